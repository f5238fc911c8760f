use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::OnceLock;

use crate::logic::Vocabulary;
use crate::registry::{Named, Registry};

use super::eval::{Compiled, FullInterp, PartialInterp, Truth};
use super::sink::ModelSink;
use super::structure::Layout;
use super::EngineError;

/// Resource caps for one counting run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Largest interpretation space, in bits, that may be searched.
    pub max_bits: usize,
    /// Largest tuple table a second-order quantifier may range over.
    pub so_cells: u64,
    /// Optional cap on search nodes, summed over all workers.
    pub max_nodes: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_bits: 64,
            so_cells: 16,
            max_nodes: None,
        }
    }
}

/// One worker's slice of the search space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shard {
    pub index: usize,
    pub count: usize,
}

impl Shard {
    pub const WHOLE: Shard = Shard { index: 0, count: 1 };
}

/// Shared cancellation and node accounting.
#[derive(Debug, Default)]
pub struct Control {
    nodes: AtomicU64,
    abort: AtomicBool,
    limit: Option<u64>,
}

impl Control {
    pub fn new(limit: Option<u64>) -> Self {
        Self {
            nodes: AtomicU64::new(0),
            abort: AtomicBool::new(false),
            limit,
        }
    }

    /// Records `k` visited nodes; false once the budget is spent.
    #[inline]
    pub fn charge(&self, k: u64) -> bool {
        if self.abort.load(Ordering::Relaxed) {
            return false;
        }
        let total = self.nodes.fetch_add(k, Ordering::Relaxed) + k;
        if self.limit.is_some_and(|l| total > l) {
            self.abort.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    pub fn aborted(&self) -> bool {
        self.abort.load(Ordering::Relaxed)
    }

    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }
}

/// A compiled counting problem: the sentence split into top-level
/// conjuncts (cheapest first) over a fixed layout.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    pub layout: Layout,
    pub conjuncts: Vec<Compiled>,
    pub whole: Compiled,
}

impl SearchProblem {
    pub fn new(whole: Compiled, mut conjuncts: Vec<Compiled>, vocab: &Vocabulary) -> Option<Self> {
        let layout = Layout::new(vocab, whole.universe)?;
        conjuncts.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        Some(Self {
            layout,
            conjuncts,
            whole,
        })
    }

    pub fn bits(&self) -> usize {
        self.layout.total
    }
}

/// A way of enumerating the models of a [`SearchProblem`].
pub trait CountStrategy: Named + Send + Sync {
    /// Largest space the strategy can address, independent of the budget.
    fn max_bits(&self) -> usize;

    /// Feeds every model in `shard` to `sink`. Together the shards of a
    /// run must cover each model exactly once.
    fn search(
        &self,
        problem: &SearchProblem,
        shard: Shard,
        ctl: &Control,
        sink: &mut dyn ModelSink,
    ) -> Result<(), EngineError>;
}

fn node_budget_error(ctl: &Control) -> EngineError {
    EngineError::Budget(format!("search stopped after {} nodes", ctl.nodes()))
}

/// Runs a counter over every interpretation and evaluates the full
/// sentence on each. Workers take contiguous counter ranges.
pub struct Exhaustive;

impl Named for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn summary(&self) -> &'static str {
        "evaluate the sentence on every interpretation"
    }
}

impl CountStrategy for Exhaustive {
    fn max_bits(&self) -> usize {
        40
    }

    fn search(
        &self,
        problem: &SearchProblem,
        shard: Shard,
        ctl: &Control,
        sink: &mut dyn ModelSink,
    ) -> Result<(), EngineError> {
        let bits = problem.bits();
        let total = 1u64 << bits;
        let lo = total as u128 * shard.index as u128 / shard.count as u128;
        let hi = total as u128 * (shard.index as u128 + 1) / shard.count as u128;
        let mut env = problem.whole.env();
        let mut words = [0u64];
        for mask in lo as u64..hi as u64 {
            if mask & 0xfff == 0 && !ctl.charge(0x1000) {
                return Err(node_budget_error(ctl));
            }
            words[0] = mask;
            let interp = FullInterp {
                layout: &problem.layout,
                words: &words,
            };
            if problem.whole.eval(&interp, &mut env) == Truth::True {
                sink.accept(&words, &[]);
            }
        }
        Ok(())
    }
}

/// Backtracking search over tuple cells with three-valued evaluation of
/// every pending conjunct at each node. A subtree is cut as soon as some
/// conjunct is false and counted in one step once all are true.
///
/// Cells are decided relation by relation, lowest arity first, tuples in
/// lexicographic order. Worker `w` owns the subtrees whose first `d`
/// decisions, read as a binary number, are congruent to `w`.
pub struct Pruned;

impl Named for Pruned {
    fn name(&self) -> &'static str {
        "pruned"
    }

    fn summary(&self) -> &'static str {
        "backtracking with partial evaluation of each conjunct"
    }
}

struct Dfs<'a> {
    problem: &'a SearchProblem,
    order: Vec<usize>,
    rel_of: Vec<usize>,
    interp: PartialInterp,
    envs: Vec<super::eval::Env>,
    shard: Shard,
    split: usize,
    ctl: &'a Control,
    sink: &'a mut dyn ModelSink,
    local_nodes: u64,
}

impl Dfs<'_> {
    fn owns(&self, prefix: u64) -> bool {
        prefix % self.shard.count as u64 == self.shard.index as u64
    }

    /// `pending` holds indices of conjuncts not yet known to be true.
    fn go(&mut self, depth: usize, prefix: u64, pending: &[usize]) -> bool {
        self.local_nodes += 1;
        if self.local_nodes >= 4096 {
            if !self.ctl.charge(self.local_nodes) {
                return false;
            }
            self.local_nodes = 0;
        }
        let mut still = Vec::with_capacity(pending.len());
        for &c in pending {
            match self.problem.conjuncts[c].eval(&self.interp, &mut self.envs[c]) {
                Truth::False => return true,
                Truth::Unknown => still.push(c),
                Truth::True => {}
            }
        }
        if still.is_empty() || depth == self.order.len() {
            debug_assert!(
                still.is_empty(),
                "fully decided state left a conjunct unknown"
            );
            if depth <= self.split && !self.owns(prefix) {
                return true;
            }
            let free = &self.order[depth..];
            self.sink.accept(&self.interp.value, free);
            return true;
        }
        if depth == self.split && !self.owns(prefix) {
            return true;
        }
        let bit = self.order[depth];
        let rel = self.rel_of[depth];
        for v in [false, true] {
            self.interp.assign(bit, v, rel);
            let next = if depth < self.split {
                prefix | ((v as u64) << depth)
            } else {
                prefix
            };
            let ok = self.go(depth + 1, next, &still);
            self.interp.unassign(bit, rel);
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Decision order used by [`Pruned`].
pub(crate) fn decision_order(layout: &Layout) -> Vec<usize> {
    let mut rels: Vec<usize> = (0..layout.arities.len()).collect();
    rels.sort_by_key(|&r| layout.arities[r]);
    rels.into_iter()
        .flat_map(|r| (0..layout.cells(r)).map(move |i| layout.base[r] + i))
        .collect()
}

impl CountStrategy for Pruned {
    fn max_bits(&self) -> usize {
        usize::MAX
    }

    fn search(
        &self,
        problem: &SearchProblem,
        shard: Shard,
        ctl: &Control,
        sink: &mut dyn ModelSink,
    ) -> Result<(), EngineError> {
        let order = decision_order(&problem.layout);
        let rel_of = order.iter().map(|&b| problem.layout.locate(b).0).collect();
        let split = if shard.count == 1 {
            0
        } else {
            let need = usize::BITS - (shard.count - 1).leading_zeros();
            (need as usize + 3).min(order.len()).min(60)
        };
        let pending: Vec<usize> = (0..problem.conjuncts.len()).collect();
        let mut dfs = Dfs {
            problem,
            rel_of,
            interp: PartialInterp::new(problem.layout.clone()),
            envs: problem.conjuncts.iter().map(|c| c.env()).collect(),
            order,
            shard,
            split,
            ctl,
            sink,
            local_nodes: 0,
        };
        if dfs.go(0, 0, &pending) {
            Ok(())
        } else {
            Err(node_budget_error(ctl))
        }
    }
}

/// Built-in strategies: `exhaustive` and `pruned`.
pub fn strategies() -> &'static Registry<dyn CountStrategy> {
    static REG: OnceLock<Registry<dyn CountStrategy>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r: Registry<dyn CountStrategy> = Registry::new();
        r.register(Box::new(Exhaustive)).register(Box::new(Pruned));
        r
    })
}
