use std::collections::{BTreeSet, HashMap};

use super::{Formula, Term};

/// Renames binders so that every bound variable and bound relation symbol
/// is bound exactly once and differs from every free name.
///
/// A binder keeps its original name when that name is still unclaimed, so
/// an already hygienic formula comes back unchanged.
pub fn normalize_hygiene(f: &Formula) -> Formula {
    normalize_hygiene_with(f, &BTreeSet::new())
}

/// Like [`normalize_hygiene`], additionally treating `reserved_relations`
/// (typically the vocabulary) as taken.
pub fn normalize_hygiene_with(f: &Formula, reserved_relations: &BTreeSet<String>) -> Formula {
    let mut vars = Namer::new(f.free_variables(), f.all_variable_names());
    let mut rel_claimed = f.free_relations();
    rel_claimed.extend(reserved_relations.iter().cloned());
    let mut rel_avoid = f.all_relation_names();
    rel_avoid.extend(reserved_relations.iter().cloned());
    let mut rels = Namer::new(rel_claimed, rel_avoid);
    rename(
        f,
        &mut vars,
        &mut rels,
        &mut HashMap::new(),
        &mut HashMap::new(),
    )
}

/// True when no name is bound twice and no bound name also occurs free.
pub fn is_hygienic(f: &Formula) -> bool {
    let free_v = f.free_variables();
    let free_r = f.free_relations();
    let mut seen_v = BTreeSet::new();
    let mut seen_r = BTreeSet::new();
    let mut ok = true;
    f.visit(&mut |g| match g {
        Formula::Quant { var, .. } | Formula::Count { var, .. } => {
            ok &= !free_v.contains(var) && seen_v.insert(var.clone());
        }
        Formula::RelQuant { rel, .. } | Formula::GuardedQuant { rel, .. } => {
            ok &= !free_r.contains(rel) && seen_r.insert(rel.clone());
        }
        _ => {}
    });
    ok
}

struct Namer {
    claimed: BTreeSet<String>,
    avoid: BTreeSet<String>,
}

impl Namer {
    fn new(claimed: BTreeSet<String>, avoid: BTreeSet<String>) -> Self {
        Self { claimed, avoid }
    }

    fn bind(&mut self, name: &str) -> String {
        if !self.claimed.contains(name) {
            self.claimed.insert(name.to_string());
            return name.to_string();
        }
        let mut k = 1usize;
        loop {
            let candidate = format!("{name}_{k}");
            if !self.claimed.contains(&candidate) && !self.avoid.contains(&candidate) {
                self.claimed.insert(candidate.clone());
                return candidate;
            }
            k += 1;
        }
    }
}

fn rename_term(t: &Term, vmap: &HashMap<String, Vec<String>>) -> Term {
    match t {
        Term::Var(v) => match vmap.get(v).and_then(|s| s.last()) {
            Some(new) => Term::Var(new.clone()),
            None => t.clone(),
        },
        Term::Const(_) => t.clone(),
    }
}

fn lookup(map: &HashMap<String, Vec<String>>, name: &str) -> String {
    map.get(name)
        .and_then(|s| s.last())
        .cloned()
        .unwrap_or_else(|| name.to_string())
}

fn rename(
    f: &Formula,
    vars: &mut Namer,
    rels: &mut Namer,
    vmap: &mut HashMap<String, Vec<String>>,
    rmap: &mut HashMap<String, Vec<String>>,
) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { rel, args } => Formula::Atom {
            rel: lookup(rmap, rel),
            args: args.iter().map(|t| rename_term(t, vmap)).collect(),
        },
        Formula::Eq(a, b) => Formula::Eq(rename_term(a, vmap), rename_term(b, vmap)),
        Formula::Not(g) => Formula::not(rename(g, vars, rels, vmap, rmap)),
        Formula::Binary { op, lhs, rhs } => {
            let l = rename(lhs, vars, rels, vmap, rmap);
            let r = rename(rhs, vars, rels, vmap, rmap);
            Formula::binary(*op, l, r)
        }
        Formula::Quant { q, var, body } => {
            let new = vars.bind(var);
            vmap.entry(var.clone()).or_default().push(new.clone());
            let b = rename(body, vars, rels, vmap, rmap);
            vmap.get_mut(var).unwrap().pop();
            Formula::quant(*q, new, b)
        }
        Formula::Count {
            residue,
            modulus,
            var,
            body,
        } => {
            let new = vars.bind(var);
            vmap.entry(var.clone()).or_default().push(new.clone());
            let b = rename(body, vars, rels, vmap, rmap);
            vmap.get_mut(var).unwrap().pop();
            Formula::count(*residue, *modulus, new, b)
        }
        Formula::RelQuant {
            q,
            rel,
            arity,
            body,
        } => {
            let new = rels.bind(rel);
            rmap.entry(rel.clone()).or_default().push(new.clone());
            let b = rename(body, vars, rels, vmap, rmap);
            rmap.get_mut(rel).unwrap().pop();
            Formula::rel_quant(*q, new, *arity, b)
        }
        Formula::GuardedQuant {
            q,
            rel,
            guard,
            body,
        } => {
            let g = lookup(rmap, guard);
            let new = rels.bind(rel);
            rmap.entry(rel.clone()).or_default().push(new.clone());
            let b = rename(body, vars, rels, vmap, rmap);
            rmap.get_mut(rel).unwrap().pop();
            Formula::guarded_quant(*q, new, g, b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::Quantifier;

    #[test]
    fn sibling_binders_are_separated() {
        let f = Formula::and(
            Formula::exists("x", Formula::atom("U", ["x"])),
            Formula::exists("x", Formula::atom("V", ["x"])),
        );
        let g = normalize_hygiene(&f);
        assert!(is_hygienic(&g));
        let expect = Formula::and(
            Formula::exists("x", Formula::atom("U", ["x"])),
            Formula::exists("x_1", Formula::atom("V", ["x_1"])),
        );
        assert_eq!(g, expect);
    }

    #[test]
    fn nested_shadowing_resolves_innermost() {
        let f = Formula::forall("x", Formula::exists("x", Formula::atom("R", ["x", "x"])));
        let g = normalize_hygiene(&f);
        let expect = Formula::forall(
            "x",
            Formula::exists("x_1", Formula::atom("R", ["x_1", "x_1"])),
        );
        assert_eq!(g, expect);
    }

    #[test]
    fn hygienic_input_is_unchanged() {
        let f = Formula::forall("x", Formula::exists("y", Formula::atom("R", ["x", "y"])));
        assert!(is_hygienic(&f));
        assert_eq!(normalize_hygiene(&f), f);
    }

    #[test]
    fn free_variable_never_captured() {
        let f = Formula::and(
            Formula::atom("U", ["x"]),
            Formula::exists("x", Formula::atom("V", ["x"])),
        );
        let g = normalize_hygiene(&f);
        assert_eq!(g.free_variables(), f.free_variables());
        assert!(is_hygienic(&g));
    }

    #[test]
    fn relation_binders_renamed_away_from_vocabulary() {
        let f = Formula::rel_quant(
            Quantifier::Exists,
            "U",
            1,
            Formula::forall("x", Formula::atom("U", ["x"])),
        );
        let reserved: BTreeSet<String> = ["U".to_string()].into_iter().collect();
        let g = normalize_hygiene_with(&f, &reserved);
        let expect = Formula::rel_quant(
            Quantifier::Exists,
            "U_1",
            1,
            Formula::forall("x", Formula::atom("U_1", ["x"])),
        );
        assert_eq!(g, expect);
    }
}
