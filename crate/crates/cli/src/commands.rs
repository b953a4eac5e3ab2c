use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use nonadapt_core::algorithms::{
    bv_instance, learning_success, parity_algorithm, parity_summary, subset_count,
    vandam_outcome_distribution, vandam_state, vandam_success_closed_form, AlgorithmFile,
    NonadaptiveAlgorithm, BV_MAX_B,
};
use nonadapt_core::boolfn::{FunctionKind, TotalFunction};
use nonadapt_core::bounds::{bound_report, helstrom_error, overlap_after_oracles};
use nonadapt_core::learning::{
    classical_learn, extract_plan_from_profile, extraction_query_bound, is_distinguishing,
    min_distinguishing_set, sample_distinguishing_set, sufficient_draws, union_failure_bound,
    AmplitudeProfile, ConceptClass, CountingOracle, ExtractionOptions, SearchMode, MAX_EXACT_N,
};
use nonadapt_core::qstate::{Measurement, OracleString, QueryState};
use nonadapt_core::{rng, Error};

use crate::output::Record;
use crate::{
    BvArgs, Cli, CliError, Command, ExtractSetArgs, FunctionArg, LearnArgs, ModeArg, ParityArgs,
    ReportArgs, VandamArgs, VerifyBoundArgs,
};

pub const VANDAM_MAX_N: usize = 16;
pub const PARITY_MAX_N: usize = 12;
/// Largest `n` for which the van Dam sweep tests every input.
const VANDAM_EXHAUSTIVE_N: usize = 10;
const VANDAM_SAMPLES: usize = 32;
const MATCH_TOL: f64 = 1e-9;

pub fn dispatch(cli: &Cli) -> Result<Record, CliError> {
    match &cli.command {
        Command::VerifyBound(a) => verify_bound(a, cli.seed),
        Command::Vandam(a) => vandam(a, cli.seed),
        Command::Parity(a) => parity(a, cli.seed),
        Command::Bv(a) => bv(a, cli.seed),
        Command::Learn(a) => learn(a, cli.seed),
        Command::ExtractSet(a) => extract_set(a, cli.seed),
        Command::Report(a) => report(a, cli.seed),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| {
        let err = Error::from(e);
        let mut c = CliError::from(err);
        c.message = format!("{}: {}", path.display(), c.message);
        c
    })
}

fn read_parsed<T>(path: &Path) -> Result<T, CliError>
where
    T: std::str::FromStr<Err = Error>,
{
    read_text(path)?.parse::<T>().map_err(|e| {
        let mut c = CliError::from(e);
        c.message = format!("{}: {}", path.display(), c.message);
        c
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn to_pretty(value: &impl serde::Serialize) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

// ---------------------------------------------------------------------------

fn verify_bound(a: &VerifyBoundArgs, seed: u64) -> Result<Record, CliError> {
    let expected = if a.function.is_some() { 1 } else { 2 };
    if a.inputs.len() != expected {
        return Err(CliError::validation(if expected == 1 {
            "verify-bound with --function takes one --in (the state file)"
        } else {
            "verify-bound takes --in STATE --in TRUTH_TABLE"
        }));
    }
    let psi: QueryState = read_json(&a.inputs[0])?;
    let f = match a.function {
        Some(kind) => {
            let kind = match kind {
                FunctionArg::Parity => FunctionKind::Parity,
                FunctionArg::And => FunctionKind::And,
                FunctionArg::Or => FunctionKind::Or,
                FunctionArg::Majority => FunctionKind::Majority,
            };
            TotalFunction::build(kind, psi.n())?
        }
        None => read_parsed(&a.inputs[1])?,
    };
    let meas: Option<Measurement> = a.meas.as_deref().map(read_json).transpose()?;
    let report = bound_report(&psi, &f, meas.as_ref())?;

    let mut rec = Record::new(
        format!("verify-bound-{}-n{}-k{}", stem(&a.inputs[0]), psi.n(), psi.k()),
        "verify-bound",
        seed,
    );
    rec.set("reduced_variables", report.n_eff < report.n)?;
    rec.merge(&report)?;
    Ok(rec)
}

// ---------------------------------------------------------------------------

fn vandam(a: &VandamArgs, seed: u64) -> Result<Record, CliError> {
    let n = a.n;
    if n == 0 || n > VANDAM_MAX_N {
        return Err(CliError::validation(format!(
            "vandam supports 1 <= n <= {VANDAM_MAX_N}, got n={n}"
        )));
    }
    let ks: Vec<usize> = match a.k {
        Some(k) if k > n => {
            return Err(CliError::validation(format!("k={k} exceeds n={n}")));
        }
        Some(k) => vec![k],
        None => (0..=n).collect(),
    };
    let exhaustive = n <= VANDAM_EXHAUSTIVE_N;
    let inputs: Vec<OracleString> = if exhaustive {
        (0..1u64 << n).map(|v| OracleString::from_index(n, v)).collect()
    } else {
        use rand::Rng;
        let mut r = rng::stream(seed, "vandam-inputs");
        (0..VANDAM_SAMPLES)
            .map(|_| OracleString::from_index(n, r.gen_range(0..1u64 << n)))
            .collect()
    };

    let mut rows = Vec::with_capacity(ks.len());
    for &k in &ks {
        let probs = inputs
            .par_iter()
            .map(|x| Ok(vandam_outcome_distribution(n, k, x)?.prob(x)))
            .collect::<Result<Vec<f64>, Error>>()?;
        let lo = probs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let closed = vandam_success_closed_form(n, k);
        rows.push(json!({
            "k": k,
            "success": lo,
            "success_max": hi,
            "closed_form": closed,
            "subsets": subset_count(n, k),
            "match": (lo - closed).abs() <= MATCH_TOL && (hi - closed).abs() <= MATCH_TOL,
        }));
    }
    let all_match = rows.iter().all(|r| r["match"] == true);
    let monotone = rows
        .windows(2)
        .all(|w| w[1]["success"].as_f64() >= w[0]["success"].as_f64().map(|v| v - MATCH_TOL));

    let run_id = match a.k {
        Some(k) => format!("vandam-n{n}-k{k}"),
        None => format!("vandam-n{n}"),
    };
    let mut rec = Record::new(run_id, "vandam", seed);
    rec.set("n", n)?;
    rec.set("inputs_tested", inputs.len())?;
    rec.set("exhaustive", exhaustive)?;
    rec.set("rows", rows)?;
    rec.set("monotone", monotone)?;
    rec.set("pass", all_match && monotone)?;
    rec.table = Some("rows");
    Ok(rec)
}

// ---------------------------------------------------------------------------

fn parity(a: &ParityArgs, seed: u64) -> Result<Record, CliError> {
    let n = a.n;
    if n == 0 || n > PARITY_MAX_N {
        return Err(CliError::validation(format!(
            "parity supports 1 <= n <= {PARITY_MAX_N}, got n={n}"
        )));
    }
    let summary = parity_summary(n)?;
    if let Some(path) = &a.state_out {
        let alg = parity_algorithm(n)?;
        write_file(path, &to_pretty(alg.state())?)?;
    }
    let exact = summary.success_min >= 1.0 - MATCH_TOL;
    let meets_floor = summary.k as f64 >= summary.theorem1_rhs - MATCH_TOL;
    let mut rec = Record::new(format!("parity-n{n}"), "parity", seed);
    rec.merge(&summary)?;
    rec.set("worst_case_error", (1.0 - summary.success_min).max(0.0))?;
    rec.set("pass", exact && meets_floor)?;
    Ok(rec)
}

// ---------------------------------------------------------------------------

/// Largest optimal error for telling apart any two concepts from the
/// learner's post-oracle states.
fn pairwise_error_floor(psi: &QueryState, class: &ConceptClass) -> Result<f64, Error> {
    let c = class.concepts();
    let mut worst: f64 = 0.0;
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let overlap = overlap_after_oracles(psi, &c[i], &c[j])?;
            worst = worst.max(helstrom_error(overlap.abs().min(1.0))?);
        }
    }
    Ok(worst)
}

fn bv(a: &BvArgs, seed: u64) -> Result<Record, CliError> {
    if a.b == 0 || a.b > BV_MAX_B {
        return Err(CliError::validation(format!(
            "bv supports 1 <= b <= {BV_MAX_B}, got b={}",
            a.b
        )));
    }
    let (class, alg) = bv_instance(a.b)?;
    if let Some(path) = &a.class_out {
        write_file(path, class.to_string().as_bytes())?;
    }
    let (lo, hi) = learning_success(&alg, &class)?;
    let classical_min = min_distinguishing_set(&class, SearchMode::Exact)?.len();
    let mut rec = Record::new(format!("bv-b{}", a.b), "bv", seed);
    rec.set("name", alg.name())?;
    rec.set("b", a.b)?;
    rec.set("n", class.n())?;
    rec.set("k", alg.k())?;
    rec.set("m", class.m())?;
    rec.set("success_min", lo)?;
    rec.set("success_max", hi)?;
    rec.set("eps_lower_bound", pairwise_error_floor(alg.state(), &class)?)?;
    // The query floor concerns total functions, not learning tasks.
    rec.set("theorem1_rhs", Value::Null)?;
    rec.set("classical_min", classical_min)?;
    rec.set("classical_bound", extraction_query_bound(class.m(), 0.0)?)?;
    rec.set("pass", lo >= 1.0 - MATCH_TOL)?;
    Ok(rec)
}

// ---------------------------------------------------------------------------

struct Learner {
    name: String,
    profile: AmplitudeProfile,
    /// Worst success over the class, when it can be computed.
    success_min: Option<f64>,
}

fn bv_bits_for(n: usize) -> Option<usize> {
    (1..=BV_MAX_B).find(|&b| (1usize << b) - 1 == n)
}

fn build_learner(a: &LearnArgs, class: &ConceptClass) -> Result<Learner, CliError> {
    let n = class.n();
    match a.learner.as_str() {
        "bv" => {
            let b = bv_bits_for(n).ok_or_else(|| {
                CliError::validation(format!(
                    "the bv learner needs n = 2^b - 1 with b <= {BV_MAX_B}, got n={n}"
                ))
            })?;
            let (_, alg) = bv_instance(b)?;
            from_algorithm(alg, class)
        }
        "vandam" => {
            let k = a.k.unwrap_or(n);
            let psi = vandam_state(n, k)?;
            let success_min = class
                .concepts()
                .par_iter()
                .map(|x| Ok(vandam_outcome_distribution(n, k, x)?.prob(x)))
                .collect::<Result<Vec<f64>, Error>>()?
                .into_iter()
                .reduce(f64::min);
            Ok(Learner {
                name: format!("vandam-n{n}-k{k}"),
                profile: AmplitudeProfile::from_state(&psi)?,
                success_min,
            })
        }
        path => {
            let file: AlgorithmFile = read_json(Path::new(path))?;
            from_algorithm(NonadaptiveAlgorithm::try_from(file)?, class)
        }
    }
}

fn from_algorithm(alg: NonadaptiveAlgorithm, class: &ConceptClass) -> Result<Learner, CliError> {
    if alg.state().n() != class.n() {
        return Err(CliError::validation(format!(
            "learner acts on n={}, class has n={}",
            alg.state().n(),
            class.n()
        )));
    }
    let (lo, _) = learning_success(&alg, class)?;
    Ok(Learner {
        name: alg.name().to_string(),
        profile: AmplitudeProfile::from_state(alg.state())?,
        success_min: Some(lo),
    })
}

fn learn(a: &LearnArgs, seed: u64) -> Result<Record, CliError> {
    let class: ConceptClass = read_parsed(&a.input)?;
    let learner = build_learner(a, &class)?;
    let opts = ExtractionOptions { retry_cap: a.retry_cap };
    let (plan, audit) = extract_plan_from_profile(&learner.profile, &class, a.eps, seed, opts)
        .map_err(|e| match e {
            Error::OverlapViolation { first, second, lhs, rhs } => CliError::failure(format!(
                "learner cannot reach error {} on this class: concepts {} and {} have squared \
                 overlap {lhs} > {rhs}",
                a.eps,
                class.concepts()[first],
                class.concepts()[second],
            )),
            other => other.into(),
        })?;

    let mut decoded = 0;
    for (i, x) in class.concepts().iter().enumerate() {
        let got = classical_learn(&plan, &mut CountingOracle::new(x))?;
        if got.concept == i && got.queries == plan.len() {
            decoded += 1;
        }
    }
    let verified = decoded == class.m();
    if let Some(path) = &a.plan {
        write_file(path, &to_pretty(&plan)?)?;
    }

    let mut rec = Record::new(
        format!("learn-{}-{}", stem(&a.input), learner.name),
        "learn",
        seed,
    );
    rec.merge(&audit)?;
    rec.set("learner", &learner.name)?;
    rec.set("learner_success_min", learner.success_min)?;
    rec.set(
        "learner_meets_eps",
        learner.success_min.map(|s| s >= 1.0 - a.eps - MATCH_TOL),
    )?;
    rec.set("base_queries", plan.base_queries())?;
    rec.set("concepts_decoded", decoded)?;
    rec.set("pass", verified && audit.within_bound)?;
    Ok(rec)
}

// ---------------------------------------------------------------------------

fn extract_set(a: &ExtractSetArgs, seed: u64) -> Result<Record, CliError> {
    let class: ConceptClass = read_parsed(&a.input)?;
    let mut rec = Record::new(format!("extract-set-{}", stem(&a.input)), "extract-set", seed);
    rec.set("n", class.n())?;
    rec.set("m", class.m())?;
    match &a.profile {
        None => {
            let mode = match a.mode {
                ModeArg::Exact => SearchMode::Exact,
                ModeArg::Greedy => SearchMode::Greedy,
            };
            if mode == SearchMode::Exact && class.n() > MAX_EXACT_N {
                return Err(CliError::validation(format!(
                    "exact search refuses n > {MAX_EXACT_N}; use --mode greedy"
                )));
            }
            let set = min_distinguishing_set(&class, mode)?;
            rec.set("mode", if mode == SearchMode::Exact { "exact" } else { "greedy" })?;
            rec.set("size", set.len())?;
            rec.set("distinguishing", is_distinguishing(&class, &set)?)?;
            rec.set("set", set)?;
            rec.set("pass", true)?;
        }
        Some(path) => {
            let weights: Vec<f64> = read_json(path)?;
            let profile = AmplitudeProfile::from_weights(weights)?;
            let draws = match a.draws {
                Some(d) => d,
                None => sufficient_draws(class.m(), a.eps)?.max(1),
            };
            let sample = sample_distinguishing_set(&profile, &class, draws, seed)?;
            rec.set("mode", "sample")?;
            rec.set("eps", a.eps)?;
            rec.set("draws", draws)?;
            rec.set("union_failure_bound", union_failure_bound(class.m(), a.eps, draws)?)?;
            rec.set("size", sample.indices.len())?;
            rec.set("distinguishing", sample.distinguishing)?;
            rec.set("set", &sample.indices)?;
            rec.set("pass", sample.distinguishing)?;
        }
    }
    Ok(rec)
}

// ---------------------------------------------------------------------------

fn report(a: &ReportArgs, seed: u64) -> Result<Record, CliError> {
    let dir = &a.input;
    let entries = fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();

    let mut runs: BTreeMap<String, Value> = BTreeMap::new();
    let mut skipped = Vec::new();
    for path in &paths {
        let value: Value = read_json(path)?;
        let Some(id) = value.get("run_id").and_then(Value::as_str).map(str::to_owned) else {
            skipped.push(path.display().to_string());
            continue;
        };
        if runs.insert(id.clone(), value).is_some() {
            eprintln!(
                "warning: duplicate run_id {id:?}; keeping the record from {}",
                path.display()
            );
        }
    }
    for s in &skipped {
        eprintln!("warning: {s} has no run_id; skipped");
    }
    if runs.is_empty() {
        return Err(CliError::io(format!(
            "no run records in {}; expected one or more *.json files written by \
             verify-bound, vandam, parity, bv, learn or extract-set (for example \
             parity-n4.json, vandam-n4.json, bv-b3.json)",
            dir.display()
        )));
    }

    let passed = runs
        .values()
        .filter(|r| r.get("pass").and_then(Value::as_bool).unwrap_or(true))
        .count();
    let total = runs.len();
    let mut rec = Record::new("report".into(), "report", seed);
    rec.set("total", total)?;
    rec.set("passed", passed)?;
    rec.set("failed", total - passed)?;
    rec.set("runs", runs.into_values().collect::<Vec<_>>())?;
    rec.set("pass", passed == total)?;
    rec.table = Some("runs");
    Ok(rec)
}
