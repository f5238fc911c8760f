use crate::eliminate::family_name;
use crate::logic::{ClassSpec, Formula, RelationSymbol, Term, Vocabulary};

/// One step of the trimming pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimStage {
    /// Number of relation symbols left.
    pub stage: usize,
    pub spec: ClassSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrimError {
    #[error("expected the eight-relation family of a single ternary R, found {0}")]
    Shape(String),
}

const BASE: &str = "R";

fn member(positions: &[usize]) -> String {
    if positions.is_empty() {
        BASE.to_string()
    } else {
        family_name(BASE, positions)
    }
}

fn expected_shape() -> Vec<(String, usize)> {
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    sets.extend(crate::eliminate::position_sets(3));
    sets.into_iter()
        .map(|a| (member(&a), 3 - a.len()))
        .collect()
}

fn check_shape(spec: &ClassSpec) -> Result<(), TrimError> {
    let found: Vec<(String, usize)> = spec
        .vocab()
        .relations
        .iter()
        .map(|r| (r.name.clone(), r.arity))
        .collect();
    let mut want = expected_shape();
    let mut got = found.clone();
    want.sort();
    got.sort();
    if got != want || spec.vocab().num_constants != 0 {
        let shown: Vec<String> = found.iter().map(|(n, a)| format!("{n}/{a}")).collect();
        return Err(TrimError::Shape(shown.join(" ")));
    }
    Ok(())
}

/// Rewrites the atoms named in `subst` and drops those symbols from the
/// vocabulary.
fn substitute(
    spec: &ClassSpec,
    mut subst: impl FnMut(&str, &[Term]) -> Option<Formula>,
    dropped: &[String],
) -> ClassSpec {
    let sentence = spec.sentence().map_atoms(&mut subst);
    let relations: Vec<RelationSymbol> = spec
        .vocab()
        .relations
        .iter()
        .filter(|r| !dropped.contains(&r.name))
        .cloned()
        .collect();
    ClassSpec::new(Vocabulary::new(relations, 0), sentence)
        .expect("substitution keeps the sentence well-formed")
}

/// Replaces every atom of the listed relations by a fixed truth value.
fn constant_stage(spec: &ClassSpec, names: &[String], value: bool) -> ClassSpec {
    let c = if value { Formula::True } else { Formula::False };
    substitute(
        spec,
        |rel, _| names.iter().any(|n| n == rel).then(|| c.clone()),
        names,
    )
}

/// Runs the staged substitutions on the higher-arity elimination of the
/// ternary counterexample, from eight relation symbols down to one.
pub fn trim_pipeline(spec8: &ClassSpec) -> Result<Vec<TrimStage>, TrimError> {
    check_shape(spec8)?;
    let mut stages = vec![TrimStage {
        stage: 8,
        spec: spec8.clone(),
    }];

    let s6 = constant_stage(spec8, &[member(&[1, 2, 3]), member(&[1, 2])], false);
    let s4 = constant_stage(&s6, &[member(&[1, 3]), member(&[2, 3])], true);

    let r3 = member(&[3]);
    let s3 = substitute(
        &s4,
        |rel, args| (rel == r3).then(|| Formula::neq(args[0].clone(), args[1].clone())),
        std::slice::from_ref(&r3),
    );

    let (r1, r2) = (member(&[1]), member(&[2]));
    let s2 = substitute(
        &s3,
        |rel, args| (rel == r2).then(|| Formula::atom_terms(r1.clone(), args.to_vec())),
        std::slice::from_ref(&r2),
    );

    let s1 = substitute(
        &s2,
        |rel, args| {
            if rel == BASE {
                Some(Formula::and(
                    Formula::neq(args[0].clone(), args[1].clone()),
                    Formula::atom_terms(BASE, args.to_vec()),
                ))
            } else if rel == r1 {
                let (x, y) = (args[0].clone(), args[1].clone());
                Some(Formula::atom_terms(BASE, vec![x.clone(), x, y]))
            } else {
                None
            }
        },
        std::slice::from_ref(&r1),
    );

    for (stage, spec) in [(6, s6), (4, s4), (3, s3), (2, s2), (1, s1)] {
        stages.push(TrimStage { stage, spec });
    }
    Ok(stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eliminate::eliminate_higher_arity;
    use crate::lab::build_phi_m;

    #[test]
    fn stage_vocabularies() {
        let spec8 = eliminate_higher_arity(&build_phi_m()).unwrap();
        let stages = trim_pipeline(&spec8).unwrap();
        let sizes: Vec<(usize, usize)> = stages
            .iter()
            .map(|s| (s.stage, s.spec.vocab().relations.len()))
            .collect();
        assert_eq!(sizes, vec![(8, 8), (6, 6), (4, 4), (3, 3), (2, 2), (1, 1)]);
        let last = &stages[5].spec.vocab().relations[0];
        assert_eq!((last.name.as_str(), last.arity), ("R", 3));
    }

    #[test]
    fn rejects_other_shapes() {
        assert!(trim_pipeline(&build_phi_m()).is_err());
    }
}
