use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_bigint::BigUint;
use serde_json::{json, Value};

use mcount_core::builtins::{builtin_class, builtins};
use mcount_core::eliminate::{eliminate_higher_arity, eliminators};
use mcount_core::engine::{count_models, strategies, Budget, CountOptions};
use mcount_core::lab::{build_phi_mp, is_prime, trim_pipeline};
use mcount_core::oracles::{oracle_values, oracles};
use mcount_core::recurrence::{
    decompose_modulus, detect_ultimate_periodicity, find_linear_recurrence_mod_prime,
    oracle_residue_series, residue_series, AnalysisError, PeriodBound, PeriodicityOptions,
    ResidueSequence, RECURRENCE_SLACK,
};
use mcount_core::text::{parse_class_spec, print_class_spec};
use mcount_core::ClassSpec;

use crate::output::{emit, emit_timing, write_file, Cell, Format, Table};
use crate::{Engine, Failure, Source};

/// Default cap, in bits, on the search spaces `eliminate` verifies.
const VERIFY_BITS: u64 = 20;

fn load(source: &Source) -> Result<(ClassSpec, String), Failure> {
    match (&source.builtin, &source.spec) {
        (Some(b), _) => builtin_class(b)
            .map(|s| (s, b.clone()))
            .map_err(|e| Failure::user(e.to_string())),
        (None, Some(p)) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::user(format!("cannot read {}: {e}", p.display())))?;
            let spec = parse_class_spec(&text)
                .map_err(|e| Failure::user(format!("{}: {e}", p.display())))?;
            Ok((spec, p.display().to_string()))
        }
        (None, None) => Err(Failure::user("one of --builtin or --spec is required")),
    }
}

fn count_options(engine: &Engine) -> Result<CountOptions, Failure> {
    if strategies().get(&engine.strategy).is_none() {
        let known: Vec<&str> = strategies().names().collect();
        return Err(Failure::user(format!(
            "unknown strategy {} (known: {})",
            engine.strategy,
            known.join(", ")
        )));
    }
    Ok(CountOptions::default()
        .with_strategy(&engine.strategy)
        .with_workers(engine.workers as usize)
        .with_budget(Budget {
            max_bits: engine.budget as usize,
            ..Budget::default()
        }))
}

fn residue(v: &BigUint, m: u64) -> u64 {
    u64::try_from(v % m).expect("below the modulus")
}

pub fn count(
    source: &Source,
    range: RangeInclusive<usize>,
    modulus: Option<u64>,
    engine: &Engine,
    out: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let (spec, _) = load(source)?;
    let opts = count_options(engine)?;
    let mut headers = vec!["n", "universeSize", "count"];
    if modulus.is_some() {
        headers.push("residue");
    }
    let mut table = Table::new(headers);
    let started = Instant::now();
    let mut timings = Vec::new();
    for n in range {
        let r = count_models(&spec, n, &opts)?;
        timings.push((n, r.elapsed));
        let mut row = vec![
            Cell::Int(n as u64),
            Cell::Int(r.universe as u64),
            Cell::Big(r.count.to_string()),
        ];
        if let Some(m) = modulus {
            row.push(Cell::Int(residue(&r.count, m)));
        }
        table.push(row);
    }
    emit(out, &table.render(format))?;
    emit_timing(out, started.elapsed(), &timings)
}

/// Values of `n` whose search spaces, for every class given, fit in
/// `bits`.
fn default_verify_range(specs: &[&ClassSpec], bits: u64) -> Option<RangeInclusive<usize>> {
    let fits = |n: usize| {
        specs.iter().all(|s| {
            let k = s.vocab().num_constants;
            s.vocab()
                .interpretation_bits(n + k)
                .is_some_and(|b| b <= bits)
        })
    };
    let last = (0..64).take_while(|&n| fits(n)).last()?;
    Some(0..=last)
}

fn spec_file(dir: &Path, name: &str, spec: &ClassSpec) -> Result<String, Failure> {
    write_file(&dir.join(name), &(print_class_spec(spec) + "\n"))?;
    Ok(name.to_string())
}

pub fn eliminate(
    source: &Source,
    mode: &str,
    verify: Option<RangeInclusive<usize>>,
    allow_noop: bool,
    engine: &Engine,
    out: &Path,
) -> Result<(), Failure> {
    let (spec, label) = load(source)?;
    let eliminator = eliminators().get(mode).ok_or_else(|| {
        let known: Vec<&str> = eliminators().names().collect();
        Failure::user(format!("unknown mode {mode} (known: {})", known.join(", ")))
    })?;
    if spec.vocab().num_constants == 0 {
        if !allow_noop {
            return Err(Failure::user(format!(
                "{label} has no hard-wired constants; nothing to eliminate (pass --allow-noop to copy it)"
            )));
        }
        eprintln!("mcount: warning: {label} has no hard-wired constants; output is the input");
    }
    let opts = count_options(engine)?;
    let started = Instant::now();

    let (outputs, labels, provenance) = if spec.vocab().num_constants == 0 {
        (
            vec![spec.clone()],
            Vec::new(),
            Value::Object(Default::default()),
        )
    } else {
        let r = eliminator
            .eliminate(&spec)
            .map_err(|e| Failure::user(e.to_string()))?;
        let prov = serde_json::to_value(&r.provenance).expect("provenance serializes");
        (r.outputs, r.labels, prov)
    };

    let input_file = spec_file(out, "input.sexp", &spec)?;
    let mut files = Vec::new();
    for (i, o) in outputs.iter().enumerate() {
        let name = if outputs.len() == 1 {
            "output.sexp".to_string()
        } else {
            format!("output-{i}.sexp")
        };
        let file = spec_file(out, &name, o)?;
        let mut entry = json!({ "file": file });
        if let Some(l) = labels.get(i) {
            entry["label"] = json!({ "unary": l.unary, "binary": l.binary });
        }
        files.push(entry);
    }

    let all: Vec<&ClassSpec> = std::iter::once(&spec).chain(outputs.iter()).collect();
    let range = match verify {
        Some(r) => Some(r),
        None => default_verify_range(&all, VERIFY_BITS.min(engine.budget)),
    };
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    let mut timings = Vec::new();
    if let Some(range) = &range {
        for n in range.clone() {
            let t = Instant::now();
            let expected = count_models(&spec, n, &opts)?.count;
            let mut got = BigUint::default();
            for o in &outputs {
                got += count_models(o, n, &opts)?.count;
            }
            timings.push((n, t.elapsed()));
            if got != expected {
                mismatches.push(n);
            }
            rows.push(json!({
                "n": n,
                "input": expected.to_string(),
                "output": got.to_string(),
            }));
        }
    }
    let verification = match &range {
        Some(r) => json!({
            "range": [r.start(), r.end()],
            "rows": rows,
            "verified": mismatches.is_empty(),
        }),
        None => json!({ "range": null, "rows": [], "verified": null }),
    };
    let manifest = json!({
        "mode": eliminator.name(),
        "source": label,
        "input": input_file,
        "outputs": files,
        "provenance": provenance,
        "verification": verification,
    });
    let manifest_path = out.join("manifest.json");
    write_file(
        &manifest_path,
        &(serde_json::to_string_pretty(&manifest).expect("json") + "\n"),
    )?;
    emit_timing(Some(&manifest_path), started.elapsed(), &timings)?;
    if !mismatches.is_empty() {
        return Err(Failure::mismatch(format!(
            "output counts differ from the input at n = {mismatches:?}"
        )));
    }
    println!(
        "wrote {} output class(es) and manifest.json to {}",
        outputs.len(),
        out.display()
    );
    Ok(())
}

pub fn witness(p: u64, max_n: u64, out: &Path) -> Result<(), Failure> {
    let phi = build_phi_mp(p).map_err(|e| Failure::user(e.to_string()))?;
    spec_file(out, "phi.sexp", &phi)?;
    let spec8 = eliminate_higher_arity(&phi).map_err(|e| Failure::user(e.to_string()))?;
    let stages = trim_pipeline(&spec8).map_err(|e| Failure::user(e.to_string()))?;
    for st in &stages {
        spec_file(out, &format!("stage-{}.sexp", st.stage), &st.spec)?;
    }
    let values = oracle_values(&format!("iteratedMatchings:{p}"), 1..=max_n)
        .map_err(|e| Failure::user(e.to_string()))?;
    let mut table = Table::new([
        "universeSize".to_string(),
        "count".to_string(),
        format!("countMod{p}"),
    ]);
    for (n, v) in (1..=max_n).zip(&values) {
        table.push(vec![
            Cell::Int(n),
            Cell::Big(v.to_string()),
            Cell::Int(residue(v, p)),
        ]);
    }
    write_file(&out.join("counts.csv"), &table.csv())?;
    println!(
        "wrote phi.sexp, {} trimming stages and counts.csv to {}",
        stages.len(),
        out.display()
    );
    Ok(())
}

pub enum SeqInput {
    Csv(PathBuf),
    Class(Source),
    Oracle(String),
}

pub struct AnalyzeOptions {
    pub n: Option<RangeInclusive<usize>>,
    pub modulus: Option<u64>,
    pub max_order: usize,
    pub threshold: usize,
    pub bound: Option<String>,
}

fn analysis_failure(e: AnalysisError) -> Failure {
    match e {
        AnalysisError::Engine(e) => e.into(),
        e => Failure::user(e.to_string()),
    }
}

fn parse_bound(s: &str) -> Result<PeriodBound, Failure> {
    let bad = || Failure::user(format!("--bound expects R,P, found {s:?}"));
    let (r, p) = s.split_once(',').ok_or_else(bad)?;
    let max_preperiod = r.trim().parse().map_err(|_| bad())?;
    let max_period: usize = p.trim().parse().map_err(|_| bad())?;
    if max_period == 0 {
        return Err(bad());
    }
    Ok(PeriodBound {
        max_preperiod,
        max_period,
    })
}

fn load_sequence(
    input: &SeqInput,
    opts: &AnalyzeOptions,
    engine: &Engine,
) -> Result<ResidueSequence, Failure> {
    let need = |what: &str| Failure::user(format!("--{what} is required for this input"));
    match input {
        SeqInput::Csv(path) => {
            let file = fs::File::open(path)
                .map_err(|e| Failure::user(format!("cannot read {}: {e}", path.display())))?;
            let seq = ResidueSequence::read_csv(file, opts.modulus)
                .map_err(|e| Failure::user(format!("{}: {e}", path.display())))?;
            Ok(seq.with_source(path.display().to_string()))
        }
        SeqInput::Class(source) => {
            let (spec, label) = load(source)?;
            let range = opts.n.clone().ok_or_else(|| need("n"))?;
            let m = opts.modulus.ok_or_else(|| need("mod"))?;
            let seq = residue_series(&spec, range, m, &count_options(engine)?)
                .map_err(analysis_failure)?;
            Ok(seq.with_source(label))
        }
        SeqInput::Oracle(name) => {
            let range = opts.n.clone().ok_or_else(|| need("n"))?;
            let m = opts.modulus.ok_or_else(|| need("mod"))?;
            oracle_residue_series(name, *range.start() as u64..=*range.end() as u64, m)
                .map_err(analysis_failure)
        }
    }
}

pub fn analyze(
    input: &SeqInput,
    opts: &AnalyzeOptions,
    engine: &Engine,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let started = Instant::now();
    let seq = load_sequence(input, opts, engine)?;
    let popts = PeriodicityOptions {
        witness_threshold: opts.threshold.max(1),
        bound: opts.bound.as_deref().map(parse_bound).transpose()?,
    };
    let verdict = detect_ultimate_periodicity(&seq, &popts).map_err(analysis_failure)?;
    let mut report = serde_json::to_value(&verdict).expect("verdict serializes");
    report["modulus"] = json!(seq.modulus);
    report["startIndex"] = json!(seq.start_index);
    report["length"] = json!(seq.len());
    report["source"] = json!(seq.source);
    if let Some(t) = &seq.truncated {
        report["truncated"] = serde_json::to_value(t).expect("truncation serializes");
    }
    let powers = decompose_modulus(seq.modulus);
    report["primePowers"] = json!(powers);
    if powers.len() > 1 {
        let mut parts = Vec::new();
        for &q in &powers {
            let v = detect_ultimate_periodicity(&seq.reduce(q).map_err(analysis_failure)?, &popts)
                .map_err(analysis_failure)?;
            let mut entry = serde_json::to_value(&v).expect("verdict serializes");
            entry["modulus"] = json!(q);
            parts.push(entry);
        }
        report["components"] = json!(parts);
    }
    if is_prime(seq.modulus) {
        let order = opts
            .max_order
            .min(seq.len().saturating_sub(RECURRENCE_SLACK) / 2);
        report["maxOrderTried"] = json!(order);
        report["recurrence"] = if order == 0 {
            Value::Null
        } else {
            match find_linear_recurrence_mod_prime(&seq, seq.modulus, order)
                .map_err(analysis_failure)?
            {
                Some(r) => json!({ "order": r.order(), "coefficients": r.coefficients }),
                None => Value::Null,
            }
        };
    }
    emit(
        out,
        &(serde_json::to_string_pretty(&report).expect("json") + "\n"),
    )?;
    emit_timing(out, started.elapsed(), &[])
}

pub fn oracle(
    name: &str,
    range: RangeInclusive<usize>,
    modulus: Option<u64>,
    out: Option<&Path>,
    format: Format,
) -> Result<(), Failure> {
    let (a, b) = (*range.start() as u64, *range.end() as u64);
    let values = oracle_values(name, a..=b).map_err(|e| Failure::user(e.to_string()))?;
    let mut headers = vec!["n", "value"];
    if modulus.is_some() {
        headers.push("residue");
    }
    let mut table = Table::new(headers);
    for (n, v) in (a..=b).zip(&values) {
        let mut row = vec![Cell::Int(n), Cell::Big(v.to_string())];
        if let Some(m) = modulus {
            row.push(Cell::Int(residue(v, m)));
        }
        table.push(row);
    }
    emit(out, &table.render(format))
}

pub fn list() -> Result<(), Failure> {
    let mut text = String::new();
    let mut section = |title: &str, items: Vec<(&str, &str, usize)>| {
        text += &format!("{title}:\n");
        for (name, summary, params) in items {
            let shown = match params {
                0 => name.to_string(),
                k => format!("{name}:{}", vec!["N"; k].join(",")),
            };
            text += &format!("  {shown:<22} {summary}\n");
        }
    };
    section(
        "builtin classes",
        builtins()
            .iter()
            .map(|b| (b.name(), b.summary(), b.param_count()))
            .collect(),
    );
    section(
        "oracles",
        oracles()
            .iter()
            .map(|o| (o.name(), o.summary(), o.param_count()))
            .collect(),
    );
    section(
        "strategies",
        strategies()
            .iter()
            .map(|s| (s.name(), s.summary(), 0))
            .collect(),
    );
    section(
        "elimination modes",
        eliminators()
            .iter()
            .map(|e| (e.name(), e.summary(), 0))
            .collect(),
    );
    emit(None, &text)
}
