//! Compiled three-valued evaluation.
//!
//! Formulas are compiled against a fixed vocabulary and universe size into
//! a tree with variables resolved to slots and constants to elements. The
//! evaluator runs over any [`Interp`], which may leave some tuple cells
//! undecided; Kleene semantics then yield [`Truth::Unknown`] exactly when
//! the value is not forced by the decided cells.

use crate::logic::{Connective, Formula, Quantifier, Term, Vocabulary};

use super::structure::{Assignment, Layout, Structure};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Truth {
    False = 0,
    Unknown = 1,
    True = 2,
}

impl Truth {
    #[inline]
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }

    #[inline]
    fn not(self) -> Self {
        match self {
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
            Truth::True => Truth::False,
        }
    }
}

/// Read access to the vocabulary relations' tuple tables.
pub trait Interp {
    fn get(&self, rel: usize, idx: usize) -> Truth;
    /// True if no cell of `rel` is undecided.
    fn decided(&self, rel: usize) -> bool;
}

/// Fully decided interpretation backed by a flat bit table.
pub struct FullInterp<'a> {
    pub layout: &'a Layout,
    pub words: &'a [u64],
}

impl Interp for FullInterp<'_> {
    #[inline]
    fn get(&self, rel: usize, idx: usize) -> Truth {
        let b = self.layout.base[rel] + idx;
        Truth::from_bool((self.words[b >> 6] >> (b & 63)) & 1 == 1)
    }

    fn decided(&self, _rel: usize) -> bool {
        true
    }
}

/// Partially decided interpretation used by the pruned search.
pub struct PartialInterp {
    pub layout: Layout,
    pub known: Vec<u64>,
    pub value: Vec<u64>,
    /// Undecided cells per relation.
    pub open: Vec<usize>,
}

impl PartialInterp {
    pub fn new(layout: Layout) -> Self {
        let words = layout.total.div_ceil(64).max(1);
        let open = (0..layout.arities.len()).map(|r| layout.cells(r)).collect();
        Self {
            layout,
            known: vec![0; words],
            value: vec![0; words],
            open,
        }
    }

    #[inline]
    pub fn assign(&mut self, bit: usize, v: bool, rel: usize) {
        let (w, m) = (bit >> 6, 1u64 << (bit & 63));
        self.known[w] |= m;
        if v {
            self.value[w] |= m;
        } else {
            self.value[w] &= !m;
        }
        self.open[rel] -= 1;
    }

    #[inline]
    pub fn unassign(&mut self, bit: usize, rel: usize) {
        let (w, m) = (bit >> 6, 1u64 << (bit & 63));
        self.known[w] &= !m;
        self.value[w] &= !m;
        self.open[rel] += 1;
    }

    #[inline]
    pub fn value_bit(&self, bit: usize) -> bool {
        (self.value[bit >> 6] >> (bit & 63)) & 1 == 1
    }
}

impl Interp for PartialInterp {
    #[inline]
    fn get(&self, rel: usize, idx: usize) -> Truth {
        let b = self.layout.base[rel] + idx;
        let m = 1u64 << (b & 63);
        let w = b >> 6;
        if self.known[w] & m == 0 {
            Truth::Unknown
        } else {
            Truth::from_bool(self.value[w] & m != 0)
        }
    }

    #[inline]
    fn decided(&self, rel: usize) -> bool {
        self.open[rel] == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Arg {
    Slot(u32),
    Elem(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Rel {
    Global(usize),
    Local(usize),
}

#[derive(Debug, Clone)]
pub(crate) enum Node {
    Const(bool),
    Atom {
        rel: Rel,
        args: Box<[Arg]>,
    },
    Eq(Arg, Arg),
    Not(Box<Node>),
    And(Box<[Node]>),
    Or(Box<[Node]>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Quant {
        forall: bool,
        slot: u32,
        body: Box<Node>,
    },
    Count {
        residue: u32,
        modulus: u32,
        slot: u32,
        body: Box<Node>,
    },
    RelQuant {
        forall: bool,
        local: usize,
        cells: u32,
        body: Box<Node>,
    },
    Guarded {
        forall: bool,
        local: usize,
        guard: Rel,
        cells: u32,
        body: Box<Node>,
    },
}

/// Evaluation state: variable slots and second-order locals (as bit
/// masks over at most 63 cells).
#[derive(Debug, Clone)]
pub struct Env {
    pub(crate) vars: Vec<u32>,
    pub(crate) locals: Vec<u64>,
    pub(crate) n: usize,
}

/// A formula compiled against a vocabulary and universe size.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub(crate) root: Node,
    pub(crate) num_slots: usize,
    pub(crate) num_locals: usize,
    pub(crate) universe: usize,
    /// Rough evaluation cost, used to order conjuncts.
    pub(crate) cost: f64,
}

impl Compiled {
    pub fn env(&self) -> Env {
        Env {
            vars: vec![0; self.num_slots],
            locals: vec![0; self.num_locals],
            n: self.universe,
        }
    }

    #[inline]
    pub fn eval<I: Interp>(&self, interp: &I, env: &mut Env) -> Truth {
        eval(&self.root, interp, env)
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Truth of a compiled sentence in `s`, which must be over the
    /// vocabulary and universe size it was compiled for.
    pub fn satisfied_by(&self, s: &Structure) -> bool {
        assert_eq!(
            s.universe(),
            self.universe,
            "universe size differs from compilation"
        );
        let layout = s.layout();
        let interp = FullInterp {
            layout: &layout,
            words: s.bits().words(),
        };
        self.eval(&interp, &mut self.env()) == Truth::True
    }
}

/// Compilation options.
#[derive(Debug, Clone, Copy)]
pub struct CompileLimits {
    /// Largest tuple table a second-order quantifier may range over.
    pub so_cells: u64,
}

impl Default for CompileLimits {
    fn default() -> Self {
        Self { so_cells: 16 }
    }
}

struct Compiler<'a> {
    vocab: &'a Vocabulary,
    universe: usize,
    limits: CompileLimits,
    vars: Vec<(String, u32)>,
    rels: Vec<(String, usize, usize)>,
    next_slot: u32,
    next_local: usize,
}

impl<'a> Compiler<'a> {
    fn term(&self, t: &Term) -> Result<Arg, EvalError> {
        match t {
            Term::Var(v) => self
                .vars
                .iter()
                .rev()
                .find(|(n, _)| n == v)
                .map(|(_, s)| Arg::Slot(*s))
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Const(i) => {
                let k = self.vocab.num_constants;
                if *i == 0 || *i > k {
                    return Err(EvalError::ConstantOutOfRange(*i));
                }
                Ok(Arg::Elem((self.universe - k + i - 1) as u32))
            }
        }
    }

    fn relation(&self, name: &str) -> Result<(Rel, usize), EvalError> {
        if let Some((_, local, arity)) = self.rels.iter().rev().find(|(n, _, _)| n == name) {
            return Ok((Rel::Local(*local), *arity));
        }
        self.vocab
            .index_of(name)
            .map(|i| (Rel::Global(i), self.vocab.relations[i].arity))
            .ok_or_else(|| EvalError::UnknownRelation(name.to_string()))
    }

    fn so_cells(&self, arity: usize) -> Result<u32, EvalError> {
        let cells = (self.universe as u64).checked_pow(arity as u32);
        match cells {
            Some(c) if c <= self.limits.so_cells && c <= 63 => Ok(c as u32),
            _ => Err(EvalError::SecondOrderBudget {
                arity,
                universe: self.universe,
                limit: self.limits.so_cells,
            }),
        }
    }

    fn bind_var(&mut self, v: &str) -> u32 {
        let s = self.next_slot;
        self.next_slot += 1;
        self.vars.push((v.to_string(), s));
        s
    }

    /// Returns the node and its cost estimate.
    fn compile(&mut self, f: &Formula) -> Result<(Node, f64), EvalError> {
        let n = self.universe.max(1) as f64;
        Ok(match f {
            Formula::True => (Node::Const(true), 1.0),
            Formula::False => (Node::Const(false), 1.0),
            Formula::Atom { rel, args } => {
                let (r, arity) = self.relation(rel)?;
                if arity != args.len() {
                    return Err(EvalError::ArityMismatch(rel.clone()));
                }
                let args = args
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<Result<Vec<_>, _>>()?;
                (
                    Node::Atom {
                        rel: r,
                        args: args.into_boxed_slice(),
                    },
                    1.0,
                )
            }
            Formula::Eq(a, b) => (Node::Eq(self.term(a)?, self.term(b)?), 1.0),
            Formula::Not(g) => {
                let (c, k) = self.compile(g)?;
                match c {
                    Node::Const(b) => (Node::Const(!b), k),
                    c => (Node::Not(Box::new(c)), k + 1.0),
                }
            }
            Formula::Binary { op, lhs, rhs } => {
                let (l, kl) = self.compile(lhs)?;
                let (r, kr) = self.compile(rhs)?;
                let cost = kl + kr + 1.0;
                let node = match op {
                    Connective::And => Node::And(flatten(l, r, true)),
                    Connective::Or => Node::Or(flatten(l, r, false)),
                    Connective::Implies => Node::Implies(Box::new(l), Box::new(r)),
                    Connective::Iff => Node::Iff(Box::new(l), Box::new(r)),
                };
                (node, cost)
            }
            Formula::Quant { q, var, body } => {
                let slot = self.bind_var(var);
                let (b, k) = self.compile(body)?;
                self.vars.pop();
                (
                    Node::Quant {
                        forall: *q == Quantifier::Forall,
                        slot,
                        body: Box::new(b),
                    },
                    n * k + 1.0,
                )
            }
            Formula::Count {
                residue,
                modulus,
                var,
                body,
            } => {
                if *modulus < 2 {
                    return Err(EvalError::BadModulus(*modulus));
                }
                let slot = self.bind_var(var);
                let (b, k) = self.compile(body)?;
                self.vars.pop();
                (
                    Node::Count {
                        residue: residue % modulus,
                        modulus: *modulus,
                        slot,
                        body: Box::new(b),
                    },
                    n * k + 1.0,
                )
            }
            Formula::RelQuant {
                q,
                rel,
                arity,
                body,
            } => {
                let cells = self.so_cells(*arity)?;
                let local = self.next_local;
                self.next_local += 1;
                self.rels.push((rel.clone(), local, *arity));
                let (b, k) = self.compile(body)?;
                self.rels.pop();
                (
                    Node::RelQuant {
                        forall: *q == Quantifier::Forall,
                        local,
                        cells,
                        body: Box::new(b),
                    },
                    (cells as f64).exp2() * k + 1.0,
                )
            }
            Formula::GuardedQuant {
                q,
                rel,
                guard,
                body,
            } => {
                let (g, arity) = self.relation(guard)?;
                let cells = self.so_cells(arity)?;
                let local = self.next_local;
                self.next_local += 1;
                self.rels.push((rel.clone(), local, arity));
                let (b, k) = self.compile(body)?;
                self.rels.pop();
                (
                    Node::Guarded {
                        forall: *q == Quantifier::Forall,
                        local,
                        guard: g,
                        cells,
                        body: Box::new(b),
                    },
                    (cells as f64).exp2() * k + 1.0,
                )
            }
        })
    }
}

fn flatten(l: Node, r: Node, conj: bool) -> Box<[Node]> {
    let mut out = Vec::new();
    for part in [l, r] {
        match (part, conj) {
            (Node::And(xs), true) | (Node::Or(xs), false) => out.extend(xs.into_vec()),
            (p, _) => out.push(p),
        }
    }
    out.into_boxed_slice()
}

/// Compiles `f` with the given variables pre-bound to slots `0..k` and
/// relations pre-bound to locals `0..r` (in map order).
pub(crate) fn compile_with(
    f: &Formula,
    vocab: &Vocabulary,
    universe: usize,
    limits: CompileLimits,
    bound_vars: &[String],
    bound_rels: &[(String, usize)],
) -> Result<Compiled, EvalError> {
    if universe < vocab.num_constants {
        return Err(EvalError::UniverseTooSmall {
            universe,
            constants: vocab.num_constants,
        });
    }
    let mut c = Compiler {
        vocab,
        universe,
        limits,
        vars: Vec::new(),
        rels: Vec::new(),
        next_slot: 0,
        next_local: 0,
    };
    for v in bound_vars {
        c.bind_var(v);
    }
    for (r, arity) in bound_rels {
        c.so_cells(*arity)?;
        c.rels.push((r.clone(), c.next_local, *arity));
        c.next_local += 1;
    }
    let (root, cost) = c.compile(f)?;
    Ok(Compiled {
        root,
        num_slots: c.next_slot as usize,
        num_locals: c.next_local,
        universe,
        cost,
    })
}

/// Compiles a closed formula.
pub fn compile(
    f: &Formula,
    vocab: &Vocabulary,
    universe: usize,
    limits: CompileLimits,
) -> Result<Compiled, EvalError> {
    compile_with(f, vocab, universe, limits, &[], &[])
}

#[inline]
fn arg(a: Arg, env: &Env) -> u32 {
    match a {
        Arg::Slot(s) => env.vars[s as usize],
        Arg::Elem(e) => e,
    }
}

#[inline]
fn tuple_index(args: &[Arg], env: &Env) -> usize {
    let n = env.n;
    args.iter()
        .fold(0usize, |acc, &a| acc * n + arg(a, env) as usize)
}

#[inline]
fn rel_get<I: Interp>(rel: Rel, idx: usize, interp: &I, env: &Env) -> Truth {
    match rel {
        Rel::Global(r) => interp.get(r, idx),
        Rel::Local(l) => Truth::from_bool((env.locals[l] >> idx) & 1 == 1),
    }
}

pub(crate) fn eval<I: Interp>(node: &Node, interp: &I, env: &mut Env) -> Truth {
    match node {
        Node::Const(b) => Truth::from_bool(*b),
        Node::Atom { rel, args } => {
            let idx = tuple_index(args, env);
            rel_get(*rel, idx, interp, env)
        }
        Node::Eq(a, b) => Truth::from_bool(arg(*a, env) == arg(*b, env)),
        Node::Not(g) => eval(g, interp, env).not(),
        Node::And(parts) => {
            let mut res = Truth::True;
            for p in parts.iter() {
                match eval(p, interp, env) {
                    Truth::False => return Truth::False,
                    Truth::Unknown => res = Truth::Unknown,
                    Truth::True => {}
                }
            }
            res
        }
        Node::Or(parts) => {
            let mut res = Truth::False;
            for p in parts.iter() {
                match eval(p, interp, env) {
                    Truth::True => return Truth::True,
                    Truth::Unknown => res = Truth::Unknown,
                    Truth::False => {}
                }
            }
            res
        }
        Node::Implies(a, b) => {
            let va = eval(a, interp, env);
            if va == Truth::False {
                return Truth::True;
            }
            let vb = eval(b, interp, env);
            match (va, vb) {
                (_, Truth::True) => Truth::True,
                (Truth::True, v) => v,
                _ => Truth::Unknown,
            }
        }
        Node::Iff(a, b) => {
            let va = eval(a, interp, env);
            if va == Truth::Unknown {
                return Truth::Unknown;
            }
            match eval(b, interp, env) {
                Truth::Unknown => Truth::Unknown,
                vb => Truth::from_bool(va == vb),
            }
        }
        Node::Quant { forall, slot, body } => {
            let (stop, mut res) = if *forall {
                (Truth::False, Truth::True)
            } else {
                (Truth::True, Truth::False)
            };
            for v in 0..env.n as u32 {
                env.vars[*slot as usize] = v;
                match eval(body, interp, env) {
                    t if t == stop => return stop,
                    Truth::Unknown => res = Truth::Unknown,
                    _ => {}
                }
            }
            res
        }
        Node::Count {
            residue,
            modulus,
            slot,
            body,
        } => {
            let (mut sure, mut maybe) = (0u32, 0u32);
            for v in 0..env.n as u32 {
                env.vars[*slot as usize] = v;
                match eval(body, interp, env) {
                    Truth::True => sure += 1,
                    Truth::Unknown => maybe += 1,
                    Truth::False => {}
                }
            }
            if maybe == 0 {
                return Truth::from_bool(sure % modulus == *residue);
            }
            if maybe + 1 >= *modulus {
                return Truth::Unknown;
            }
            let reachable = (sure..=sure + maybe).any(|k| k % modulus == *residue);
            if reachable {
                Truth::Unknown
            } else {
                Truth::False
            }
        }
        Node::RelQuant {
            forall,
            local,
            cells,
            body,
        } => {
            let (stop, mut res) = if *forall {
                (Truth::False, Truth::True)
            } else {
                (Truth::True, Truth::False)
            };
            let saved = env.locals[*local];
            for mask in 0..(1u64 << cells) {
                env.locals[*local] = mask;
                match eval(body, interp, env) {
                    t if t == stop => {
                        res = stop;
                        break;
                    }
                    Truth::Unknown => res = Truth::Unknown,
                    _ => {}
                }
            }
            env.locals[*local] = saved;
            res
        }
        Node::Guarded {
            forall,
            local,
            guard,
            cells,
            body,
        } => {
            let guard_mask = match *guard {
                Rel::Local(l) => env.locals[l],
                Rel::Global(r) => {
                    if !interp.decided(r) {
                        return Truth::Unknown;
                    }
                    let mut m = 0u64;
                    for i in 0..*cells as usize {
                        if interp.get(r, i) == Truth::True {
                            m |= 1 << i;
                        }
                    }
                    m
                }
            };
            let (stop, mut res) = if *forall {
                (Truth::False, Truth::True)
            } else {
                (Truth::True, Truth::False)
            };
            let saved = env.locals[*local];
            // Enumerate all submasks of the guard, including the empty set.
            let mut sub = guard_mask;
            loop {
                env.locals[*local] = sub;
                match eval(body, interp, env) {
                    t if t == stop => {
                        res = stop;
                        break;
                    }
                    Truth::Unknown => res = Truth::Unknown,
                    _ => {}
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & guard_mask;
            }
            env.locals[*local] = saved;
            res
        }
    }
}

/// Tarskian truth of `f` in `s` under `asg`.
///
/// Second-order quantifiers may range over at most `limits.so_cells`
/// tuple cells; larger ranges fail with a budget error.
pub fn evaluate_with(
    s: &Structure,
    f: &Formula,
    asg: &Assignment,
    limits: CompileLimits,
) -> Result<bool, EvalError> {
    let n = s.universe();
    let vars: Vec<String> = asg.vars.keys().cloned().collect();
    for (v, &e) in &asg.vars {
        if e == 0 || e > n {
            return Err(EvalError::ElementOutOfRange {
                name: v.clone(),
                element: e,
            });
        }
    }
    let rels: Vec<(String, usize)> = asg
        .relations
        .iter()
        .map(|(k, (a, _))| (k.clone(), *a))
        .collect();
    let compiled = compile_with(f, s.vocab(), n, limits, &vars, &rels)?;
    let mut env = compiled.env();
    for (i, e) in asg.vars.values().enumerate() {
        env.vars[i] = (*e - 1) as u32;
    }
    let layout = s.layout();
    for (i, (name, (arity, tuples))) in asg.relations.iter().enumerate() {
        let mut mask = 0u64;
        for t in tuples {
            if t.len() != *arity || t.iter().any(|&e| e == 0 || e > n) {
                return Err(EvalError::BadTuple(name.clone()));
            }
            let zero: Vec<usize> = t.iter().map(|e| e - 1).collect();
            mask |= 1 << layout.tuple_index(&zero);
        }
        env.locals[i] = mask;
    }
    let interp = FullInterp {
        layout: &layout,
        words: s.bits().words(),
    };
    Ok(compiled.eval(&interp, &mut env) == Truth::True)
}

/// [`evaluate_with`] under default limits.
pub fn evaluate(s: &Structure, f: &Formula, asg: &Assignment) -> Result<bool, EvalError> {
    evaluate_with(s, f, asg, CompileLimits::default())
}
