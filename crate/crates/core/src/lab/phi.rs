use crate::logic::{ClassSpec, Formula, Term, Vocabulary};

/// Largest prime accepted by [`build_phi_mp`]. The partition conjunct
/// quantifies `p + 1` variables, so larger values only give sentences
/// too large to count.
pub const MAX_P: u64 = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PrimeError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = {0} exceeds the supported maximum of {MAX_P}")]
    TooLarge(u64),
}

pub fn is_prime(p: u64) -> bool {
    p >= 2
        && (2..)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// Builds the comparator macros over `R`, drawing fresh bound variables
/// `q1, q2, ...` for the inlined universal quantifiers.
struct Builder {
    fresh: usize,
}

fn r(x: &Term, y: &Term, z: &Term) -> Formula {
    Formula::atom_terms("R", vec![x.clone(), y.clone(), z.clone()])
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn a() -> Term {
    Term::Const(1)
}

impl Builder {
    fn new() -> Self {
        Self { fresh: 0 }
    }

    fn q(&mut self) -> String {
        self.fresh += 1;
        format!("q{}", self.fresh)
    }

    /// Same rank: `forall q (R(x1,y1,q) <-> R(x2,y2,q))`.
    fn same(&mut self, x1: &Term, y1: &Term, x2: &Term, y2: &Term) -> Formula {
        let q = self.q();
        let z = v(&q);
        Formula::forall(q, Formula::iff(r(x1, y1, &z), r(x2, y2, &z)))
    }

    /// Rank contained in: `forall q (R(x1,y1,q) -> R(x2,y2,q))`.
    fn le(&mut self, x1: &Term, y1: &Term, x2: &Term, y2: &Term) -> Formula {
        let q = self.q();
        let z = v(&q);
        Formula::forall(q, Formula::implies(r(x1, y1, &z), r(x2, y2, &z)))
    }

    fn lt(&mut self, x1: &Term, y1: &Term, x2: &Term, y2: &Term) -> Formula {
        let le = self.le(x1, y1, x2, y2);
        let same = self.same(x1, y1, x2, y2);
        Formula::and(le, Formula::not(same))
    }

    fn graph(&mut self) -> Formula {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        Formula::forall_all(
            &["x", "y", "z"],
            Formula::implies(
                r(&x, &y, &z),
                Formula::and(Formula::neq(x.clone(), y.clone()), r(&y, &x, &z)),
            ),
        )
    }

    fn comp(&mut self) -> Formula {
        let (x1, y1, x2, y2, z1, z2) = (v("x1"), v("y1"), v("x2"), v("y2"), v("z1"), v("z2"));
        let body = Formula::and_all([
            r(&x1, &y1, &z1),
            Formula::not(r(&x2, &y2, &z1)),
            r(&x2, &y2, &z2),
            Formula::not(r(&x1, &y1, &z2)),
        ]);
        Formula::forall_all(
            &["x1", "y1", "x2", "y2"],
            Formula::not(Formula::exists_all(&["z1", "z2"], body)),
        )
    }

    fn full(&mut self) -> Formula {
        let (x, y) = (v("x"), v("y"));
        Formula::forall_all(
            &["x", "y"],
            Formula::implies(Formula::neq(x.clone(), y.clone()), r(&x, &y, &a())),
        )
    }

    fn rank(&mut self) -> Formula {
        Formula::and_all([self.graph(), self.comp(), self.full()])
    }

    fn trans(&mut self) -> Formula {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        let left = self.le(&x, &z, &x, &y);
        let right = self.le(&x, &z, &y, &z);
        Formula::forall_all(&["x", "y", "z"], Formula::or(left, right))
    }

    fn cover(&mut self) -> Formula {
        let (x, y, z, w) = (v("x"), v("y"), v("z"), v("w"));
        let body = self.same(&x, &y, &z, &w);
        Formula::forall_all(&["x", "y", "z"], Formula::exists("w", body))
    }

    fn part(&mut self) -> Formula {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        let left = self.same(&x, &y, &y, &z);
        let right = self.same(&x, &y, &x, &z);
        Formula::forall_all(
            &["x", "y", "z"],
            Formula::implies(
                Formula::neq(x.clone(), y.clone()),
                Formula::not(Formula::and(left, right)),
            ),
        )
    }

    fn anchor(&mut self) -> Formula {
        let (x, y, z, w) = (v("x"), v("y"), v("z"), v("w"));
        let below_anchor = self.lt(&z, &a(), &x, &y);
        let closure = self.lt(&z, &w, &x, &y);
        Formula::forall_all(
            &["x", "y", "z"],
            Formula::implies(
                r(&x, &y, &z),
                Formula::and(
                    below_anchor,
                    Formula::forall("w", Formula::implies(closure, r(&x, &y, &w))),
                ),
            ),
        )
    }

    /// Names of the clique variables in the mod-`p` conjuncts, chosen so
    /// that `p = 2` reproduces the base sentence.
    fn cover_var(i: usize) -> String {
        match i {
            1 => "z".into(),
            2 => "w".into(),
            i => format!("w{i}"),
        }
    }

    fn part_var(i: usize) -> String {
        match i {
            1 => "x".into(),
            2 => "y".into(),
            3 => "z".into(),
            i => format!("z{i}"),
        }
    }

    fn cover_p(&mut self, p: usize) -> Formula {
        let (x, y) = (v("x"), v("y"));
        let zs: Vec<Term> = (1..=p).map(|i| v(&Self::cover_var(i))).collect();
        let mut parts = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                parts.push(self.same(&x, &y, &zs[i], &zs[j]));
            }
        }
        let inner: Vec<String> = (2..=p).map(Self::cover_var).collect();
        Formula::forall_all(
            &["x", "y", "z"],
            Formula::exists_all(&inner, Formula::and_all(parts)),
        )
    }

    fn part_p(&mut self, p: usize) -> Formula {
        let zs: Vec<Term> = (1..=p + 1).map(|i| v(&Self::part_var(i))).collect();
        // All pairs except the trivial (1, 2), larger indices first.
        let mut pairs: Vec<(usize, usize)> = (0..=p)
            .flat_map(|i| (i + 1..=p).map(move |j| (i, j)))
            .filter(|&pair| pair != (0, 1))
            .collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then(b.0.cmp(&a.0)));
        let parts: Vec<Formula> = pairs
            .into_iter()
            .map(|(i, j)| {
                let (z1, z2) = (zs[0].clone(), zs[1].clone());
                self.same(&z1, &z2, &zs[i], &zs[j])
            })
            .collect();
        let vars: Vec<String> = (1..=p + 1).map(Self::part_var).collect();
        Formula::forall_all(
            &vars,
            Formula::implies(
                Formula::neq(zs[0].clone(), zs[1].clone()),
                Formula::not(Formula::and_all(parts)),
            ),
        )
    }
}

fn vocab() -> Vocabulary {
    Vocabulary::from_pairs(&[("R", 3)], 1)
}

/// The ternary sentence with one hard-wired constant whose models over
/// `{1, ..., n}` are the canonical encodings of full iterated matching
/// sequences, so its count vanishes unless `n` is a power of two.
pub fn build_phi_m() -> ClassSpec {
    let mut b = Builder::new();
    let parts = [b.rank(), b.trans(), b.cover(), b.part(), b.anchor()];
    ClassSpec::new(vocab(), Formula::and_all(parts)).expect("well-formed")
}

/// The mod-`p` generalization over iterated `p`-matchings.
pub fn build_phi_mp(p: u64) -> Result<ClassSpec, PrimeError> {
    if !is_prime(p) {
        return Err(PrimeError::NotPrime(p));
    }
    if p > MAX_P {
        return Err(PrimeError::TooLarge(p));
    }
    let p = p as usize;
    let mut b = Builder::new();
    let parts = [b.rank(), b.trans(), b.cover_p(p), b.part_p(p), b.anchor()];
    Ok(ClassSpec::new(vocab(), Formula::and_all(parts)).expect("well-formed"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..30).filter(|&p| is_prime(p)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn p_two_is_the_base_sentence() {
        assert_eq!(build_phi_mp(2).unwrap(), build_phi_m());
    }

    #[test]
    fn rejects_bad_p() {
        assert_eq!(build_phi_mp(4), Err(PrimeError::NotPrime(4)));
        assert_eq!(build_phi_mp(1), Err(PrimeError::NotPrime(1)));
        assert_eq!(build_phi_mp(7), Err(PrimeError::TooLarge(7)));
    }

    #[test]
    fn sentence_is_closed_first_order() {
        let s = build_phi_mp(3).unwrap();
        assert!(s.sentence().free_variables().is_empty());
        assert_eq!(s.sentence().logic_profile().name(), "FOL");
    }
}
