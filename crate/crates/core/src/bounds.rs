//! Query weights and the error lower bounds they imply.
//!
//! For a k-register state `psi = Σ α_t |t>`, the weight `W_j` of variable `j`
//! is the squared mass on tuples containing `j` an odd number of times. Two
//! inputs that differ only in bit `j` produce post-oracle states with overlap
//! `1 - 2 W_j`, and two pure states with overlap `c` cannot be told apart
//! with worst-case error below `(1 - sqrt(1 - c^2)) / 2`. Since every tuple
//! has at most `k` odd entries, `Σ_j W_j <= k`, which caps how many
//! variables a `k`-query state can watch at once.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boolfn::TotalFunction;
use crate::error::{contract, invalid, Result};
use crate::qstate::{apply_oracle, measure, Distribution, Measurement, OracleString, QueryState};

/// Slack for quantities computed from exact ±1 sign arithmetic.
pub const SIGN_SLACK: f64 = 1e-12;
/// Slack for quantities that pass through measurement linear algebra.
pub const MEAS_SLACK: f64 = 1e-9;

/// `W_j`: mass of tuples in which `j` appears an odd number of times,
/// summed over the ancilla.
pub fn weight(psi: &QueryState, j: usize) -> Result<f64> {
    if j == 0 || j > psi.n() {
        return Err(contract(format!("variable {j} outside [1, {}]", psi.n())));
    }
    Ok(psi
        .entries()
        .filter(|(t, _, _)| t.multiplicity(j) % 2 == 1)
        .map(|(_, _, amp)| amp.norm_sqr())
        .sum())
}

/// All weights `W_1..W_n` of a state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub n: usize,
    pub k: usize,
    pub w: Vec<f64>,
}

impl WeightProfile {
    pub fn of(psi: &QueryState) -> Self {
        let mut w = vec![0.0; psi.n()];
        for (t, _, amp) in psi.entries() {
            let p = amp.norm_sqr();
            for j in t.odd_support() {
                w[j - 1] += p;
            }
        }
        Self {
            n: psi.n(),
            k: psi.k(),
            w,
        }
    }

    pub fn get(&self, j: usize) -> f64 {
        self.w[j - 1]
    }

    pub fn total(&self) -> f64 {
        self.w.iter().sum()
    }

    /// Checks `0 <= W_j <= 1` and `Σ W_j <= k`, up to `slack`.
    pub fn within_budget(&self, slack: f64) -> bool {
        self.w.iter().all(|&w| (-slack..=1.0 + slack).contains(&w))
            && self.total() <= self.k as f64 + slack
    }
}

/// `<psi| (O_x O_y)^{⊗k} |psi>`. The operator is diagonal with ±1 entries,
/// so the value is real.
pub fn overlap_after_oracles(psi: &QueryState, x: &OracleString, y: &OracleString) -> Result<f64> {
    if x.n() != psi.n() || y.n() != psi.n() {
        return Err(contract(format!(
            "state has n={}, strings have {} and {} bits",
            psi.n(),
            x.n(),
            y.n()
        )));
    }
    let z = x.xor(y)?;
    let mut acc = 0.0;
    for (t, _, amp) in psi.entries() {
        let mut odd = false;
        for &i in t.indices() {
            odd ^= z.bit(i)?;
        }
        let p = amp.norm_sqr();
        acc += if odd { -p } else { p };
    }
    Ok(acc)
}

fn check_unit(name: &str, v: f64, hi: f64) -> Result<()> {
    if !(-SIGN_SLACK..=hi + SIGN_SLACK).contains(&v) {
        return Err(contract(format!("{name} = {v} outside [0, {hi}]")));
    }
    Ok(())
}

/// Whether two states with squared overlap `overlap_sq` can be separated by
/// a two-outcome measurement erring with probability at most `eps` on each:
/// `overlap_sq <= 4 eps (1 - eps)`.
pub fn discrimination_feasible(overlap_sq: f64, eps: f64) -> Result<bool> {
    check_unit("squared overlap", overlap_sq, 1.0)?;
    check_unit("eps", eps, 0.5)?;
    Ok(overlap_sq <= 4.0 * eps * (1.0 - eps) + SIGN_SLACK)
}

/// Optimal worst-case error for telling apart two equiprobable pure states
/// whose overlap has magnitude `overlap_abs`.
pub fn helstrom_error(overlap_abs: f64) -> Result<f64> {
    check_unit("overlap", overlap_abs, 1.0)?;
    let c = overlap_abs.clamp(0.0, 1.0);
    Ok((1.0 - (1.0 - c * c).sqrt()) / 2.0)
}

fn error_floor_for_weight(w: f64) -> f64 {
    let w = w.clamp(0.0, 1.0);
    (1.0 - 2.0 * (w * (1.0 - w)).sqrt()) / 2.0
}

/// Smallest worst-case error any measurement can reach on input state `psi`
/// when computing `f`: the largest per-variable discrimination floor over
/// the variables `f` depends on.
pub fn epsilon_lower_bound(psi: &QueryState, f: &TotalFunction) -> Result<f64> {
    if psi.n() != f.n() {
        return Err(contract(format!(
            "state has n={}, function has {} variables",
            psi.n(),
            f.n()
        )));
    }
    let relevant = f.relevant_variables();
    if relevant.is_empty() {
        return Err(invalid("function is constant; it has no sensitive input pairs"));
    }
    let profile = WeightProfile::of(psi);
    Ok(relevant
        .into_iter()
        .map(|j| error_floor_for_weight(profile.get(j)))
        .fold(0.0, f64::max))
}

/// Fewest queries a nonadaptive algorithm computing a function of `n`
/// relevant variables with worst-case error `eps` can make:
/// `n/2 · (1 - 2 sqrt(eps (1 - eps)))`. Real valued; no rounding.
pub fn min_queries_for_error(n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(contract("n must be positive"));
    }
    check_unit("eps", eps, 0.5)?;
    let eps = eps.clamp(0.0, 0.5);
    Ok(n as f64 / 2.0 * (1.0 - 2.0 * (eps * (1.0 - eps)).sqrt()))
}

/// The averaged form read the other way: the least worst-case error
/// compatible with `k` queries on `n` relevant variables.
pub fn min_error_for_queries(n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(contract("n must be positive"));
    }
    let ratio = k as f64 / n as f64;
    if ratio >= 0.5 {
        return Ok(0.0);
    }
    helstrom_error(1.0 - 2.0 * ratio)
}

/// Largest error over all `2^n` inputs of an algorithm whose output
/// distribution on the post-oracle state is produced by `outcome`.
pub(crate) fn sweep_worst_error<F>(psi: &QueryState, f: &TotalFunction, outcome: F) -> Result<f64>
where
    F: Fn(&QueryState) -> Result<Distribution> + Sync,
{
    if psi.n() != f.n() {
        return Err(contract(format!(
            "state has n={}, function has {} variables",
            psi.n(),
            f.n()
        )));
    }
    let n = f.n();
    let errors = (0..1usize << n)
        .into_par_iter()
        .map(|v| {
            let x = OracleString::from_index(n, v as u64);
            let dist = outcome(&apply_oracle(psi, &x)?)?;
            let want = if f.eval_index(v) { "1" } else { "0" };
            Ok((1.0 - dist.get(want)).clamp(0.0, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

/// `max_x Pr[output != f(x)]` for input state `psi` and a measurement whose
/// outcomes are labelled `"0"` and `"1"`.
pub fn worst_case_error(psi: &QueryState, meas: &Measurement, f: &TotalFunction) -> Result<f64> {
    let mut labels = meas.labels();
    labels.sort_unstable();
    if labels != ["0", "1"] {
        return Err(contract(format!(
            "expected a two-outcome measurement labelled 0/1, got {labels:?}"
        )));
    }
    sweep_worst_error(psi, f, |phi| measure(phi, meas))
}

/// Machine-readable verification record for one (state, function) pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub n_eff: usize,
    pub k: usize,
    pub weights: Vec<f64>,
    pub weight_total: f64,
    /// Per-variable bound: the largest discrimination floor over relevant `j`.
    pub eps_lower_bound: f64,
    /// Averaged bound: least error compatible with `k` queries on `n_eff`
    /// variables.
    pub eps_lower_bound_averaged: f64,
    /// Query floor at the reported error (the measured worst case when a
    /// measurement is supplied, otherwise `eps_lower_bound`).
    pub theorem1_rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_case_error: Option<f64>,
    pub pass: bool,
}

/// Builds the verification record. `pass` requires the weight budget, the
/// query floor `k >= n_eff/2 (1 - 2 sqrt(eps (1-eps)))`, and, when a
/// measurement is given, `worst_case_error >= eps_lower_bound`.
pub fn bound_report(
    psi: &QueryState,
    f: &TotalFunction,
    meas: Option<&Measurement>,
) -> Result<BoundReport> {
    let eps_lb = epsilon_lower_bound(psi, f)?;
    let n_eff = f.relevant_variables().len();
    let profile = WeightProfile::of(psi);
    let wce = meas.map(|m| worst_case_error(psi, m, f)).transpose()?;
    // The floor only constrains bounded-error algorithms; past 1/2 it is vacuous.
    let eps_at = wce.unwrap_or(eps_lb).min(0.5);
    let rhs = min_queries_for_error(n_eff, eps_at)?;
    let k = psi.k();
    let pass = profile.within_budget(MEAS_SLACK)
        && k as f64 >= rhs - MEAS_SLACK
        && wce.is_none_or(|e| e >= eps_lb - MEAS_SLACK);
    Ok(BoundReport {
        n: psi.n(),
        n_eff,
        k,
        weight_total: profile.total(),
        weights: profile.w,
        eps_lower_bound: eps_lb,
        eps_lower_bound_averaged: min_error_for_queries(n_eff, k)?,
        theorem1_rhs: rhs,
        worst_case_error: wce,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::FunctionKind;
    use crate::qstate::{random_state, IndexTuple, ProjectiveOutcome};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn t(v: &[usize]) -> IndexTuple {
        IndexTuple::new(v.to_vec())
    }

    fn x(s: &str) -> OracleString {
        s.parse().unwrap()
    }

    fn pair_state() -> QueryState {
        QueryState::uniform(2, 2, [t(&[1, 1]), t(&[1, 2])]).unwrap()
    }

    #[test]
    fn weight_examples() {
        assert!((weight(&pair_state(), 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((weight(&pair_state(), 2).unwrap() - 0.5).abs() < 1e-15);
        let zero = QueryState::basis_state(3, 2, t(&[0, 0])).unwrap();
        for j in 1..=3 {
            assert_eq!(weight(&zero, j).unwrap(), 0.0);
        }
        assert!(weight(&zero, 0).is_err());
        assert!(weight(&zero, 4).is_err());
    }

    #[test]
    fn overlap_examples() {
        let psi = pair_state();
        assert!((overlap_after_oracles(&psi, &x("01"), &x("01")).unwrap() - 1.0).abs() < 1e-15);
        assert!(overlap_after_oracles(&psi, &x("00"), &x("01")).unwrap().abs() < 1e-15);
        let uni = QueryState::uniform(4, 1, (1..=4).map(|i| t(&[i]))).unwrap();
        assert!((overlap_after_oracles(&uni, &x("0000"), &x("1111")).unwrap() + 1.0).abs() < 1e-15);
        assert!(overlap_after_oracles(&uni, &x("000"), &x("1111")).is_err());
    }

    #[test]
    fn feasibility_examples() {
        assert!(discrimination_feasible(0.0, 0.0).unwrap());
        assert!(!discrimination_feasible(1.0, 0.25).unwrap());
        assert!(discrimination_feasible(0.36, 0.1).unwrap());
        assert!(discrimination_feasible(1.5, 0.1).is_err());
        assert!(discrimination_feasible(0.5, 0.6).is_err());
    }

    #[test]
    fn helstrom_examples() {
        assert_eq!(helstrom_error(0.0).unwrap(), 0.0);
        assert_eq!(helstrom_error(1.0).unwrap(), 0.5);
        assert!((helstrom_error(0.6).unwrap() - 0.1).abs() < 1e-15);
        assert!(helstrom_error(-0.5).is_err());
    }

    /// Optimal two-state discrimination error computed from the spectrum of
    /// `(|a><a| - |b><b|)/2`, independent of the closed form.
    fn helstrom_by_eigen(a: &QueryState, b: &QueryState) -> f64 {
        let labels: Vec<_> = a.support().chain(b.support()).cloned().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let d = labels.len();
        let va: Vec<Complex64> = labels.iter().map(|(t, k)| a.amplitude(t, *k)).collect();
        let vb: Vec<Complex64> = labels.iter().map(|(t, k)| b.amplitude(t, *k)).collect();
        let m = DMatrix::from_fn(d, d, |i, j| (va[i] * va[j].conj() - vb[i] * vb[j].conj()) * 0.5);
        let trace_norm: f64 = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().map(|e| e.abs()).sum();
        (1.0 - trace_norm) / 2.0
    }

    #[test]
    fn helstrom_matches_optimal_measurement() {
        let mut rng = crate::rng::stream(11, "helstrom");
        for _ in 0..50 {
            let a = random_state(3, 1, 1, 3, &mut rng).unwrap();
            let b = random_state(3, 1, 1, 3, &mut rng).unwrap();
            let c = crate::qstate::inner_product(&a, &b).unwrap().norm();
            assert!((helstrom_error(c).unwrap() - helstrom_by_eigen(&a, &b)).abs() < 1e-9);
        }
    }

    #[test]
    fn epsilon_bound_examples() {
        let parity = TotalFunction::build(FunctionKind::Parity, 2).unwrap();
        // W_1 = W_2 = 1/2
        assert!(epsilon_lower_bound(&pair_state(), &parity).unwrap().abs() < 1e-15);
        // a state that never looks at variable 2
        let blind = QueryState::uniform(2, 1, [t(&[0]), t(&[1])]).unwrap();
        assert!((epsilon_lower_bound(&blind, &parity).unwrap() - 0.5).abs() < 1e-15);
        // W_1 = 1/4: only variable 1 relevant
        let f = TotalFunction::from_table(2, vec![false, true, false, true]).unwrap();
        let quarter = QueryState::from_entries(
            2,
            1,
            1,
            [(t(&[1]), 0, Complex64::new(0.5, 0.0)), (t(&[0]), 0, Complex64::new(0.75f64.sqrt(), 0.0))],
        )
        .unwrap();
        let lb = epsilon_lower_bound(&quarter, &f).unwrap();
        assert!((lb - 0.066_987_298_107_780_7).abs() < 1e-12);
        assert!((lb - helstrom_error(0.5).unwrap()).abs() < 1e-12);
        let constant = TotalFunction::constant(2, false).unwrap();
        assert!(matches!(
            epsilon_lower_bound(&quarter, &constant),
            Err(crate::Error::Validation(_))
        ));
    }

    #[test]
    fn query_floor_examples() {
        assert_eq!(min_queries_for_error(4, 0.0).unwrap(), 2.0);
        assert_eq!(min_queries_for_error(10, 0.5).unwrap(), 0.0);
        assert!((min_queries_for_error(6, 0.1).unwrap() - 1.2).abs() < 1e-12);
        assert!(min_queries_for_error(0, 0.1).is_err());
        assert_eq!(min_error_for_queries(4, 2).unwrap(), 0.0);
        // k = 1 of n = 4: overlap 1/2 floor
        assert!((min_error_for_queries(4, 1).unwrap() - helstrom_error(0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn identity_measurement_has_worst_error_one() {
        let psi = pair_state();
        let f = TotalFunction::build(FunctionKind::And, 2).unwrap();
        let basis: Vec<_> = psi.support().cloned().collect();
        let d = basis.len();
        let meas = Measurement::povm(
            basis,
            vec![
                ("0".into(), DMatrix::identity(d, d)),
                ("1".into(), DMatrix::zeros(d, d)),
            ],
        )
        .unwrap();
        assert!((worst_case_error(&psi, &meas, &f).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn worst_case_error_needs_binary_labels() {
        let psi = QueryState::basis_state(2, 1, t(&[1])).unwrap();
        let meas = Measurement::projective(vec![ProjectiveOutcome {
            label: "a".into(),
            state: psi.clone(),
        }])
        .unwrap();
        let f = TotalFunction::build(FunctionKind::And, 2).unwrap();
        assert!(matches!(worst_case_error(&psi, &meas, &f), Err(crate::Error::Contract(_))));
    }

    #[test]
    fn report_for_deutsch_pair() {
        let psi = QueryState::uniform(2, 1, [t(&[1]), t(&[2])]).unwrap();
        let minus = QueryState::from_entries(
            2,
            1,
            1,
            [(t(&[1]), 0, Complex64::new(1.0, 0.0)), (t(&[2]), 0, Complex64::new(-1.0, 0.0))],
        )
        .unwrap();
        let meas = Measurement::projective(vec![
            ProjectiveOutcome { label: "0".into(), state: psi.clone() },
            ProjectiveOutcome { label: "1".into(), state: minus },
        ])
        .unwrap();
        let f = TotalFunction::build(FunctionKind::Parity, 2).unwrap();
        let r = bound_report(&psi, &f, Some(&meas)).unwrap();
        assert_eq!(r.n_eff, 2);
        assert!(r.worst_case_error.unwrap() < 1e-12);
        assert!((r.theorem1_rhs - 1.0).abs() < 1e-6);
        assert!(r.pass);
    }
}
