//! From a one-query quantum learner to a certain classical query plan.
//!
//! A learner that identifies every concept with error at most `eps` must
//! keep the post-oracle states of any two concepts nearly orthogonal:
//! `(Σ_i p_i (-1)^{x_i + y_i})^2 <= 4 eps (1 - eps)` where `p_i = |α_i|^2`.
//! That forces at least `1/2 - sqrt(eps (1-eps))` of the mass onto positions
//! where `x` and `y` differ, so drawing positions from `p` separates a fixed
//! pair quickly, and a union bound over all pairs shows a short draw
//! sequence separates everything with positive probability. Samples are
//! verified, so the plan that comes out is deterministic and exact.
//!
//! For a `k`-query learner the same argument runs on the tensor class with
//! tuples as positions; each chosen tuple costs at most `k` base queries.

use std::collections::{BTreeSet, HashSet};

use rand::distributions::{Distribution as _, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::concept::{greedy_cover, min_distinguishing_set, ConceptClass, SearchMode, MAX_EXACT_N};
use super::plan::QueryPlan;
use super::tensor::tensor_bit;
use crate::algorithms::NonadaptiveAlgorithm;
use crate::bounds::SIGN_SLACK;
use crate::error::{contract, invalid, Error, Result};
use crate::qstate::{IndexTuple, QueryState, TOL};
use crate::rng;

/// Squared amplitudes of a learner's input state, per query tuple (summed
/// over any ancilla). For `k = 1` the tuples are the single indices
/// `0..=n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeProfile {
    n: usize,
    k: usize,
    entries: Vec<(IndexTuple, f64)>,
}

impl AmplitudeProfile {
    /// Profile `p_0..p_n` of a single-register state.
    pub fn from_weights(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(invalid("profile needs entries p_0..p_n with n >= 1"));
        }
        let n = p.len() - 1;
        Self::from_entries(
            n,
            1,
            p.into_iter()
                .enumerate()
                .map(|(i, w)| (IndexTuple::new(vec![i]), w))
                .collect(),
        )
    }

    pub fn from_state(psi: &QueryState) -> Result<Self> {
        Self::from_entries(psi.n(), psi.k(), psi.tuple_weights().into_iter().collect())
    }

    fn from_entries(n: usize, k: usize, mut entries: Vec<(IndexTuple, f64)>) -> Result<Self> {
        for (t, w) in &entries {
            t.check(n, k)?;
            if !(w.is_finite() && *w >= 0.0) {
                return Err(invalid(format!("weight {w} at {t} is not a probability")));
            }
        }
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > TOL {
            return Err(invalid(format!("profile sums to {total}, expected 1")));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { n, k, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[(IndexTuple, f64)] {
        &self.entries
    }

    fn check_class(&self, class: &ConceptClass) -> Result<()> {
        if class.n() != self.n {
            return Err(contract(format!(
                "profile is over n={}, class over n={}",
                self.n,
                class.n()
            )));
        }
        Ok(())
    }

    /// `signs[c][e]`: whether concept `c` has bit 1 at entry `e`.
    fn bit_table(&self, class: &ConceptClass) -> Result<Vec<Vec<bool>>> {
        class
            .concepts()
            .iter()
            .map(|x| self.entries.iter().map(|(t, _)| tensor_bit(x, t)).collect())
            .collect()
    }
}

/// Squared overlap of one concept pair and its slack against `4 eps (1-eps)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOverlap {
    pub first: usize,
    pub second: usize,
    pub lhs: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapCheck {
    pub pass: bool,
    pub rhs: f64,
    pub pairs: Vec<PairOverlap>,
}

impl OverlapCheck {
    pub fn violations(&self) -> impl Iterator<Item = &PairOverlap> + '_ {
        self.pairs.iter().filter(|p| p.margin < -SIGN_SLACK)
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.pairs.iter().map(|p| p.margin).reduce(f64::min)
    }
}

/// Evaluates `(Σ_t p_t (-1)^{x_t ⊕ y_t})^2 <= 4 eps (1 - eps)` for every
/// pair of concepts, with `x_t` the tensor bit at tuple `t`.
pub fn pairwise_overlap_check(
    p: &AmplitudeProfile,
    class: &ConceptClass,
    eps: f64,
) -> Result<OverlapCheck> {
    p.check_class(class)?;
    if !(0.0..=0.5).contains(&eps) {
        return Err(contract(format!("eps = {eps} outside [0, 1/2]")));
    }
    let rhs = 4.0 * eps * (1.0 - eps);
    let bits = p.bit_table(class)?;
    let mut pairs = Vec::with_capacity(class.m() * class.m().saturating_sub(1) / 2);
    for a in 0..class.m() {
        for b in a + 1..class.m() {
            let s: f64 = p
                .entries
                .iter()
                .zip(bits[a].iter().zip(&bits[b]))
                .map(|((_, w), (x, y))| if x ^ y { -w } else { *w })
                .sum();
            let lhs = s * s;
            pairs.push(PairOverlap {
                first: a,
                second: b,
                lhs,
                margin: rhs - lhs,
            });
        }
    }
    let pass = pairs.iter().all(|q| q.margin >= -SIGN_SLACK);
    Ok(OverlapCheck { pass, rhs, pairs })
}

fn check_eps(eps: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&eps) {
        return Err(contract(format!("eps = {eps} outside [0, 1/2)")));
    }
    Ok((eps * (1.0 - eps)).sqrt())
}

/// Classical query budget guaranteed by the extraction for a one-query
/// learner: `4 log2(m) / (1 - 2 sqrt(eps (1 - eps)))`.
pub fn extraction_query_bound(m: usize, eps: f64) -> Result<f64> {
    let root = check_eps(eps)?;
    if m == 0 {
        return Err(contract("class must contain at least one concept"));
    }
    Ok(4.0 * (m as f64).log2() / (1.0 - 2.0 * root))
}

/// Smallest draw count `d` with `m^2 (1/2 + sqrt(eps (1-eps)))^d < 1`, i.e.
/// the first integer above `2 log2(m) / log2(2 / (1 + 2 sqrt(eps (1-eps))))`.
/// Never exceeds [`extraction_query_bound`].
pub fn sufficient_draws(m: usize, eps: f64) -> Result<usize> {
    let root = check_eps(eps)?;
    if m <= 1 {
        return Ok(0);
    }
    let threshold = 2.0 * (m as f64).log2() / (2.0 / (1.0 + 2.0 * root)).log2();
    Ok(threshold.floor() as usize + 1)
}

/// `m^2 (1/2 + sqrt(eps (1-eps)))^draws`, the union bound on the chance that
/// `draws` samples leave some pair unseparated.
pub fn union_failure_bound(m: usize, eps: f64, draws: usize) -> Result<f64> {
    let root = check_eps(eps)?;
    Ok((m as f64).powi(2) * (0.5 + root).powi(draws as i32))
}

/// One run of the sampling construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSample {
    /// Every draw, in order, including uninformative ones.
    pub draws: Vec<IndexTuple>,
    /// Distinct drawn tuples that can carry information (some variable
    /// occurs an odd number of times), ascending.
    pub tuples: Vec<IndexTuple>,
    /// Base indices needed to answer those tuples, ascending.
    pub indices: Vec<usize>,
    pub distinguishing: bool,
}

fn separates(bits_by_concept: impl Iterator<Item = Vec<bool>>) -> bool {
    let mut seen = HashSet::new();
    bits_by_concept.into_iter().all(|row| seen.insert(row))
}

fn restricted_rows<'a>(
    class: &'a ConceptClass,
    tuples: &'a [IndexTuple],
) -> impl Iterator<Item = Vec<bool>> + 'a {
    class.concepts().iter().map(move |x| {
        tuples
            .iter()
            .map(|t| tensor_bit(x, t).expect("tuples validated against the profile"))
            .collect()
    })
}

fn base_indices(tuples: &[IndexTuple]) -> Vec<usize> {
    tuples
        .iter()
        .flat_map(IndexTuple::distinct_nonzero)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Draws `k_draws` tuples independently from `p` and reports whether the
/// drawn positions separate every pair of concepts. Draws of the
/// always-zero position are counted but contribute nothing.
pub fn sample_distinguishing_set(
    p: &AmplitudeProfile,
    class: &ConceptClass,
    k_draws: usize,
    seed: u64,
) -> Result<ExtractionSample> {
    p.check_class(class)?;
    if k_draws == 0 {
        return Err(contract("need at least one draw"));
    }
    let weights = WeightedIndex::new(p.entries.iter().map(|(_, w)| *w))
        .map_err(|e| invalid(format!("cannot sample from profile: {e}")))?;
    let mut rng = rng::stream(seed, "extraction-draws");
    let draws: Vec<IndexTuple> = (0..k_draws)
        .map(|_| p.entries[weights.sample(&mut rng)].0.clone())
        .collect();
    let tuples: Vec<IndexTuple> = draws
        .iter()
        .filter(|t| !t.odd_support().is_empty())
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let distinguishing = separates(restricted_rows(class, &tuples));
    Ok(ExtractionSample {
        indices: base_indices(&tuples),
        draws,
        tuples,
        distinguishing,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractionOptions {
    /// Sampling attempts before falling back to greedy selection.
    pub retry_cap: usize,
}

impl Default for ExtractionOptions {
    fn default() -> Self {
        Self { retry_cap: 64 }
    }
}

/// Audit record of one extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractionAudit {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    /// `4 k log2(m) / (1 - 2 sqrt(eps (1-eps)))`.
    pub bound: f64,
    pub draws_per_attempt: usize,
    /// Sampling attempts made (1 when the first sample separated).
    pub attempts: usize,
    pub retries: usize,
    pub tuples_used: usize,
    /// `k` per tuple, the bookkeeping the bound is stated in.
    pub charged_queries: usize,
    pub base_query_count: usize,
    pub within_bound: bool,
    /// Set when sampling never separated and greedy selection was used.
    pub fallback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_minimum: Option<usize>,
    pub overlap: OverlapCheck,
}

/// Runs the extraction on an amplitude profile.
pub fn extract_plan_from_profile(
    p: &AmplitudeProfile,
    class: &ConceptClass,
    eps: f64,
    seed: u64,
    opts: ExtractionOptions,
) -> Result<(QueryPlan, ExtractionAudit)> {
    p.check_class(class)?;
    let bound = p.k() as f64 * extraction_query_bound(class.m(), eps)?;
    let overlap = pairwise_overlap_check(p, class, eps)?;
    if let Some(worst) = overlap
        .violations()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
    {
        return Err(Error::OverlapViolation {
            first: worst.first,
            second: worst.second,
            lhs: worst.lhs,
            rhs: overlap.rhs,
        });
    }

    let draws = sufficient_draws(class.m(), eps)?;
    let mut chosen: Option<Vec<IndexTuple>> = None;
    let mut attempts = 0;
    if class.m() <= 1 {
        chosen = Some(Vec::new());
    } else {
        for attempt in 0..opts.retry_cap {
            attempts += 1;
            let attempt_seed = seed ^ (attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let sample = sample_distinguishing_set(p, class, draws, attempt_seed)?;
            if sample.distinguishing {
                chosen = Some(sample.tuples);
                break;
            }
        }
    }
    let fallback = chosen.is_none();
    let tuples = match chosen {
        Some(t) => t,
        None => {
            let candidates: Vec<IndexTuple> = p
                .entries
                .iter()
                .filter(|(t, w)| *w > 0.0 && !t.odd_support().is_empty())
                .map(|(t, _)| t.clone())
                .collect();
            let columns: Vec<Vec<bool>> = candidates
                .iter()
                .map(|t| class.concepts().iter().map(|x| tensor_bit(x, t)).collect())
                .collect::<Result<_>>()?;
            let picked = greedy_cover(class.m(), &columns)
                .ok_or_else(|| invalid("profile support cannot separate the class"))?;
            let mut t: Vec<IndexTuple> = picked.into_iter().map(|c| candidates[c].clone()).collect();
            t.sort();
            t
        }
    };

    let indices = base_indices(&tuples);
    let plan = QueryPlan::new(class, indices)?;
    let exact_minimum = if class.n() <= MAX_EXACT_N {
        Some(min_distinguishing_set(class, SearchMode::Exact)?.len())
    } else {
        None
    };
    let audit = ExtractionAudit {
        n: class.n(),
        m: class.m(),
        k: p.k(),
        eps,
        seed,
        bound,
        draws_per_attempt: draws,
        attempts,
        retries: attempts.saturating_sub(1),
        tuples_used: tuples.len(),
        charged_queries: p.k() * tuples.len(),
        base_query_count: plan.len(),
        within_bound: plan.len() as f64 <= bound.ceil(),
        fallback,
        exact_minimum,
        overlap,
    };
    Ok((plan, audit))
}

/// Turns a `k`-query learner that errs with probability at most `eps` on
/// every concept of `class` into a classical plan that learns `class`
/// with certainty.
pub fn extract_classical_plan(
    learner: &NonadaptiveAlgorithm,
    class: &ConceptClass,
    eps: f64,
    seed: u64,
    opts: ExtractionOptions,
) -> Result<(QueryPlan, ExtractionAudit)> {
    let profile = AmplitudeProfile::from_state(learner.state())?;
    extract_plan_from_profile(&profile, class, eps, seed, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::bv_instance;
    use crate::learning::{classical_learn, CountingOracle};

    fn uniform(n: usize, support: &[usize]) -> AmplitudeProfile {
        let mut p = vec![0.0; n + 1];
        for &i in support {
            p[i] = 1.0 / support.len() as f64;
        }
        AmplitudeProfile::from_weights(p).unwrap()
    }

    #[test]
    fn profile_validation() {
        assert!(AmplitudeProfile::from_weights(vec![0.5, 0.6]).is_err());
        assert!(AmplitudeProfile::from_weights(vec![-0.5, 1.5]).is_err());
        assert!(AmplitudeProfile::from_weights(vec![1.0]).is_err());
        assert!(AmplitudeProfile::from_weights(vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn bv_overlaps_vanish() {
        let (class, _) = bv_instance(2).unwrap();
        let check = pairwise_overlap_check(&uniform(3, &[0, 1, 2, 3]), &class, 0.0).unwrap();
        assert!(check.pass);
        assert!(check.pairs.iter().all(|p| p.lhs < 1e-24));
        assert_eq!(check.pairs.len(), 6);
    }

    #[test]
    fn reference_index_carries_nothing() {
        let (class, _) = bv_instance(2).unwrap();
        let check = pairwise_overlap_check(&uniform(3, &[0]), &class, 0.49).unwrap();
        assert!(!check.pass);
        assert!(check.pairs.iter().all(|p| p.lhs == 1.0));
    }

    #[test]
    fn antipodal_pair_fails_at_three_tenths() {
        let class = ConceptClass::new(4, vec!["0000".parse().unwrap(), "1111".parse().unwrap()]).unwrap();
        let check = pairwise_overlap_check(&uniform(4, &[1, 2, 3, 4]), &class, 0.3).unwrap();
        assert!(!check.pass);
        assert!((check.pairs[0].lhs - 1.0).abs() < 1e-15);
        assert!((check.rhs - 0.84).abs() < 1e-15);
        assert_eq!(check.violations().count(), 1);
    }

    #[test]
    fn overlap_check_dimension_mismatch() {
        let (class, _) = bv_instance(2).unwrap();
        assert!(matches!(
            pairwise_overlap_check(&uniform(4, &[1]), &class, 0.1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn bound_examples() {
        assert!((extraction_query_bound(4, 0.1).unwrap() - 20.0).abs() < 1e-12);
        assert!((extraction_query_bound(2, 0.0).unwrap() - 4.0).abs() < 1e-12);
        for m in [2, 3, 8, 100] {
            assert!(
                (extraction_query_bound(m, 0.0).unwrap() - 4.0 * (m as f64).log2()).abs() < 1e-12
            );
        }
        assert!(extraction_query_bound(4, 0.5).is_err());
    }

    #[test]
    fn draws_never_exceed_bound() {
        for m in 2..200 {
            for e in 0..50 {
                let eps = e as f64 / 100.0;
                let d = sufficient_draws(m, eps).unwrap();
                assert!(d as f64 <= extraction_query_bound(m, eps).unwrap(), "m={m} eps={eps}");
                assert!(union_failure_bound(m, eps, d).unwrap() < 1.0);
            }
        }
        assert_eq!(sufficient_draws(8, 0.0).unwrap(), 7);
        assert_eq!(sufficient_draws(1, 0.0).unwrap(), 0);
    }

    #[test]
    fn point_masses() {
        let (class, _) = bv_instance(2).unwrap();
        let s = sample_distinguishing_set(&uniform(3, &[3]), &class, 5, 1).unwrap();
        assert_eq!(s.indices, vec![3]);
        assert_eq!(s.draws.len(), 5);
        let s = sample_distinguishing_set(&uniform(3, &[0]), &class, 5, 1).unwrap();
        assert!(s.indices.is_empty());
        assert!(!s.distinguishing);
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let (class, _) = bv_instance(3).unwrap();
        let p = uniform(7, &[0, 1, 2, 3, 4, 5, 6, 7]);
        let a = sample_distinguishing_set(&p, &class, 6, 99).unwrap();
        let b = sample_distinguishing_set(&p, &class, 6, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bv_pipeline() {
        let (class, alg) = bv_instance(3).unwrap();
        let (plan, audit) =
            extract_classical_plan(&alg, &class, 0.0, 5, ExtractionOptions::default()).unwrap();
        assert!(plan.len() <= 12);
        assert!(audit.within_bound);
        assert_eq!(audit.exact_minimum, Some(3));
        for (i, x) in class.concepts().iter().enumerate() {
            let got = classical_learn(&plan, &mut CountingOracle::new(x)).unwrap();
            assert_eq!(got.concept, i);
        }
    }

    #[test]
    fn single_bit_learner() {
        // (|0> + |2>)/sqrt(2) tells the two concepts apart perfectly
        let class = ConceptClass::new(3, vec!["010".parse().unwrap(), "000".parse().unwrap()]).unwrap();
        let (plan, audit) =
            extract_plan_from_profile(&uniform(3, &[0, 2]), &class, 0.0, 0, ExtractionOptions::default())
                .unwrap();
        assert_eq!(plan.base_queries(), &[2]);
        assert!(!audit.fallback);
    }

    #[test]
    fn violation_is_reported() {
        let class = ConceptClass::new(4, vec!["0000".parse().unwrap(), "1111".parse().unwrap()]).unwrap();
        let err = extract_plan_from_profile(&uniform(4, &[1, 2, 3, 4]), &class, 0.3, 0, ExtractionOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::OverlapViolation { first: 0, second: 1, .. }));
    }

    #[test]
    fn greedy_fallback_when_sampling_is_disabled() {
        let (class, alg) = bv_instance(2).unwrap();
        let (plan, audit) =
            extract_classical_plan(&alg, &class, 0.0, 0, ExtractionOptions { retry_cap: 0 }).unwrap();
        assert!(audit.fallback);
        assert_eq!(plan.len(), 2);
    }
}
