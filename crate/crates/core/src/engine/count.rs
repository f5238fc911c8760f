use std::sync::mpsc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::logic::ClassSpec;
use crate::text::print_class_spec;

use super::eval::{compile, CompileLimits};
use super::sink::{CollectSink, ExactSink, ModSink, ModelSink};
use super::strategy::{strategies, Budget, Control, CountStrategy, SearchProblem, Shard};
use super::structure::Structure;
use super::EngineError;

/// How a counting run is carried out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountOptions {
    /// Registry name of the [`CountStrategy`].
    pub strategy: String,
    pub workers: usize,
    pub budget: Budget,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            strategy: "pruned".into(),
            workers: 1,
            budget: Budget::default(),
        }
    }
}

impl CountOptions {
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_strategy(mut self, name: &str) -> Self {
        self.strategy = name.to_string();
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    Enumeration,
    Oracle,
}

/// Outcome of [`count_models`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountResult {
    /// Canonical text of the counted class.
    #[serde(rename = "class")]
    pub class: String,
    /// Size of the universe minus the number of constants.
    pub n: usize,
    pub universe: usize,
    #[serde(serialize_with = "decimal")]
    pub count: BigUint,
    pub method: CountMethod,
    #[serde(rename = "elapsedMs", serialize_with = "millis")]
    pub elapsed: Duration,
}

fn decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

fn millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

impl CountResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("count results always serialize")
    }
}

fn prepare(
    spec: &ClassSpec,
    n: usize,
    opts: &CountOptions,
) -> Result<(SearchProblem, &'static dyn CountStrategy), EngineError> {
    let strategy = strategies()
        .get(&opts.strategy)
        .ok_or_else(|| EngineError::UnknownStrategy(opts.strategy.clone()))?;
    let vocab = spec.vocab();
    let universe = n + vocab.num_constants;
    let bits = vocab
        .interpretation_bits(universe)
        .filter(|&b| b <= u32::MAX as u64)
        .ok_or_else(|| EngineError::Budget("interpretation space overflows".into()))?
        as usize;
    let cap = opts.budget.max_bits.min(strategy.max_bits());
    if bits > cap {
        return Err(EngineError::Budget(format!(
            "{bits} interpretation bits at universe size {universe} exceed the cap of {cap}"
        )));
    }
    let limits = CompileLimits {
        so_cells: opts.budget.so_cells,
    };
    let whole = compile(spec.sentence(), vocab, universe, limits)?;
    let conjuncts = spec
        .sentence()
        .conjuncts()
        .into_iter()
        .map(|c| compile(c, vocab, universe, limits))
        .collect::<Result<Vec<_>, _>>()?;
    let problem = SearchProblem::new(whole, conjuncts, vocab)
        .ok_or_else(|| EngineError::Budget("interpretation space overflows".into()))?;
    Ok((problem, strategy))
}

/// Runs `strategy` over `workers` shards. Each worker fills its own sink;
/// finished sinks are sent back over a channel and merged in shard order.
fn run_sharded<S, F, M>(
    problem: &SearchProblem,
    strategy: &dyn CountStrategy,
    workers: usize,
    budget: &Budget,
    make: F,
    mut merge: M,
) -> Result<S, EngineError>
where
    S: ModelSink + 'static,
    F: Fn() -> S + Sync,
    M: FnMut(&mut S, S),
{
    let workers = workers.max(1);
    let ctl = Control::new(budget.max_nodes);
    let mut parts: Vec<Option<Result<S, EngineError>>> = (0..workers).map(|_| None).collect();
    if workers == 1 {
        let mut sink = make();
        strategy.search(problem, Shard::WHOLE, &ctl, &mut sink)?;
        return Ok(sink);
    }
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for index in 0..workers {
            let tx = tx.clone();
            let (ctl, make) = (&ctl, &make);
            scope.spawn(move || {
                let mut sink = make();
                let shard = Shard {
                    index,
                    count: workers,
                };
                let r = strategy
                    .search(problem, shard, ctl, &mut sink)
                    .map(|_| sink);
                let _ = tx.send((index, r));
            });
        }
        drop(tx);
        for (index, r) in rx {
            parts[index] = Some(r);
        }
    });
    let mut acc = make();
    for part in parts {
        let sink = part.expect("every worker reports")?;
        merge(&mut acc, sink);
    }
    Ok(acc)
}

/// Number of models of `spec` over the universe `{1, ..., n + k}`, where
/// `k` is the number of hard-wired constants.
pub fn count_models(
    spec: &ClassSpec,
    n: usize,
    opts: &CountOptions,
) -> Result<CountResult, EngineError> {
    let start = Instant::now();
    let (problem, strategy) = prepare(spec, n, opts)?;
    let sink = run_sharded(
        &problem,
        strategy,
        opts.workers,
        &opts.budget,
        ExactSink::new,
        |a, b| a.merge(b),
    )?;
    Ok(CountResult {
        class: print_class_spec(spec),
        n,
        universe: n + spec.vocab().num_constants,
        count: sink.total(),
        method: CountMethod::Enumeration,
        elapsed: start.elapsed(),
    })
}

/// [`count_models`] reduced modulo `m`, accumulated as a residue.
pub fn count_models_mod(
    spec: &ClassSpec,
    n: usize,
    m: u64,
    opts: &CountOptions,
) -> Result<u64, EngineError> {
    if m < 2 {
        return Err(EngineError::BadModulus);
    }
    let (problem, strategy) = prepare(spec, n, opts)?;
    let bits = problem.bits();
    let sink = run_sharded(
        &problem,
        strategy,
        opts.workers,
        &opts.budget,
        || ModSink::new(m, bits),
        |a, b| a.merge(b),
    )?;
    Ok(sink.residue())
}

/// Every model of `spec` at `n`, sorted by bit table. Fails if there are
/// more than `limit`.
pub fn enumerate_models(
    spec: &ClassSpec,
    n: usize,
    limit: usize,
    opts: &CountOptions,
) -> Result<Vec<Structure>, EngineError> {
    let (problem, strategy) = prepare(spec, n, opts)?;
    let universe = n + spec.vocab().num_constants;
    let bits = problem.bits();
    let vocab = spec.vocab();
    let sink = run_sharded(
        &problem,
        strategy,
        opts.workers,
        &opts.budget,
        || CollectSink::new(vocab, universe, bits, limit),
        |a, b| a.merge(b),
    )?;
    if sink.overflowed() {
        return Err(EngineError::Budget(format!("more than {limit} models")));
    }
    Ok(sink.into_models())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{Formula, Vocabulary};

    fn opts(strategy: &str, workers: usize) -> CountOptions {
        CountOptions::default()
            .with_strategy(strategy)
            .with_workers(workers)
    }

    #[test]
    fn true_sentence_counts_all() {
        let spec = ClassSpec::new(Vocabulary::from_pairs(&[("E", 2)], 0), Formula::True).unwrap();
        for s in ["exhaustive", "pruned"] {
            let r = count_models(&spec, 2, &opts(s, 1)).unwrap();
            assert_eq!(r.count, BigUint::from(16u32));
            assert_eq!(count_models_mod(&spec, 2, 10, &opts(s, 3)).unwrap(), 6);
        }
    }

    #[test]
    fn empty_universe_uses_standard_semantics() {
        let v = Vocabulary::from_pairs(&[("Z", 0), ("U", 1)], 0);
        let all = Formula::forall("x", Formula::atom("U", ["x"]));
        let spec = ClassSpec::new(v, all).unwrap();
        assert_eq!(
            count_models(&spec, 0, &opts("pruned", 1)).unwrap().count,
            BigUint::from(2u32)
        );
        let empty = |f| ClassSpec::new(Vocabulary::default(), f).unwrap();
        let none = empty(Formula::exists("x", Formula::True));
        assert_eq!(
            count_models(&none, 0, &opts("pruned", 1)).unwrap().count,
            BigUint::from(0u32)
        );
    }

    #[test]
    fn budget_is_enforced() {
        let spec = ClassSpec::new(Vocabulary::from_pairs(&[("T", 3)], 0), Formula::True).unwrap();
        let o = opts("pruned", 1).with_budget(Budget {
            max_bits: 20,
            ..Budget::default()
        });
        let err = count_models(&spec, 3, &o).unwrap_err();
        assert!(err.is_budget());
        assert!(matches!(
            count_models(&spec, 3, &opts("nope", 1)),
            Err(EngineError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn json_shape() {
        let spec = ClassSpec::new(Vocabulary::from_pairs(&[("E", 2)], 0), Formula::True).unwrap();
        let r = count_models(&spec, 1, &CountOptions::default()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["count"], "2");
        assert_eq!(v["n"], 1);
        assert_eq!(v["universe"], 1);
        assert_eq!(v["method"], "enumeration");
        assert!(v["elapsedMs"].is_u64());
        assert!(v["class"].as_str().unwrap().starts_with("(vocab"));
    }
}
