//! Reference nonadaptive algorithms: exact pairwise parity, van Dam's
//! retrieve-every-bit algorithm and one-query Bernstein-Vazirani learning.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boolfn::{FunctionKind, TotalFunction};
use crate::bounds::{self, sweep_worst_error};
use crate::error::{contract, invalid, Error, Result};
use crate::learning::ConceptClass;
use crate::qstate::{
    apply_oracle, measure, Distribution, IndexTuple, Measurement, OracleString,
    ProjectiveOutcome, QueryState, TOL,
};

/// Outcome label used for residual probability mass.
pub const FAIL_LABEL: &str = "fail";

/// A nonadaptive algorithm: an input state, a measurement after the `k`
/// parallel queries, and a table mapping measurement outcomes to outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlgorithmFile", into = "AlgorithmFile")]
pub struct NonadaptiveAlgorithm {
    name: String,
    psi: QueryState,
    meas: Measurement,
    postprocess: BTreeMap<String, String>,
}

impl NonadaptiveAlgorithm {
    pub fn new(
        name: impl Into<String>,
        psi: QueryState,
        meas: Measurement,
        postprocess: BTreeMap<String, String>,
    ) -> Result<Self> {
        if !psi.is_normalized() {
            return Err(invalid(format!(
                "input state has squared norm {}",
                psi.norm_sqr()
            )));
        }
        if let Some(missing) = meas.labels().into_iter().find(|l| !postprocess.contains_key(*l)) {
            return Err(invalid(format!("outcome {missing:?} has no output assigned")));
        }
        // Oracles are diagonal, so checking the input state covers every
        // post-oracle state.
        measure(&psi, &meas)?;
        Ok(Self {
            name: name.into(),
            psi,
            meas,
            postprocess,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.psi.n()
    }

    pub fn k(&self) -> usize {
        self.psi.k()
    }

    pub fn state(&self) -> &QueryState {
        &self.psi
    }

    pub fn measurement(&self) -> &Measurement {
        &self.meas
    }

    pub fn postprocess(&self) -> &BTreeMap<String, String> {
        &self.postprocess
    }

    /// Output distribution on the post-oracle state `phi`.
    fn outputs(&self, phi: &QueryState) -> Result<Distribution> {
        measure(phi, &self.meas)?.relabel(&self.postprocess)
    }

    /// Worst-case error when the outputs are read as the bits `"0"`/`"1"`
    /// of `f`.
    pub fn worst_case_error(&self, f: &TotalFunction) -> Result<f64> {
        sweep_worst_error(&self.psi, f, |phi| self.outputs(phi))
    }
}

/// Runs the algorithm against `O_x`: measure `O_x^{⊗k} |psi>` and push the
/// outcome through the postprocessing table.
pub fn run_learning(alg: &NonadaptiveAlgorithm, x: &OracleString) -> Result<Distribution> {
    alg.outputs(&apply_oracle(&alg.psi, x)?)
}

/// Best and worst probability of outputting the true concept, over `class`.
pub fn learning_success(alg: &NonadaptiveAlgorithm, class: &ConceptClass) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in class.concepts() {
        let p = run_learning(alg, x)?.get(&x.to_string());
        lo = lo.min(p);
        hi = hi.max(p);
    }
    Ok((lo, hi))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgorithmFile {
    pub name: String,
    pub state: QueryState,
    pub measurement: Measurement,
    pub postprocess: BTreeMap<String, String>,
}

impl From<NonadaptiveAlgorithm> for AlgorithmFile {
    fn from(a: NonadaptiveAlgorithm) -> Self {
        AlgorithmFile {
            name: a.name,
            state: a.psi,
            measurement: a.meas,
            postprocess: a.postprocess,
        }
    }
}

impl TryFrom<AlgorithmFile> for NonadaptiveAlgorithm {
    type Error = Error;

    fn try_from(f: AlgorithmFile) -> Result<Self> {
        NonadaptiveAlgorithm::new(f.name, f.state, f.measurement, f.postprocess)
    }
}

// ---------------------------------------------------------------------------
// Parity

/// Index pairs read by each register of the parity algorithm. An odd final
/// variable is paired with the phase reference index 0.
fn parity_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(2))
        .map(|r| {
            let a = 2 * r + 1;
            if a < n {
                (a, a + 1)
            } else {
                (a, 0)
            }
        })
        .collect()
}

/// Exact parity of `n` bits with `⌈n/2⌉` queries: each register holds
/// `(|a> + |b>)/√2` for a pair of variables, is measured in the `±` basis,
/// and the outputs are XORed.
pub fn parity_algorithm(n: usize) -> Result<NonadaptiveAlgorithm> {
    if n == 0 {
        return Err(contract("parity needs n >= 1"));
    }
    let pairs = parity_pairs(n);
    let k = pairs.len();
    if k > 20 {
        return Err(contract(format!("parity algorithm with k={k} registers is too large")));
    }
    let amp = (0.5f64).powf(k as f64 / 2.0);
    let tuple_for = |choice: usize| {
        IndexTuple::new(
            pairs
                .iter()
                .enumerate()
                .map(|(r, &(a, b))| if choice >> r & 1 == 0 { a } else { b })
                .collect(),
        )
    };
    let signed_state = |signs: usize| -> Result<QueryState> {
        let mut s = QueryState::new(n, k, 1)?;
        for choice in 0..1usize << k {
            let negative = (signs & choice).count_ones() % 2 == 1;
            s.add(
                tuple_for(choice),
                0,
                Complex64::new(if negative { -amp } else { amp }, 0.0),
            )?;
        }
        Ok(s)
    };
    let mut outcomes = Vec::with_capacity(1 << k);
    let mut postprocess = BTreeMap::new();
    for signs in 0..1usize << k {
        let label: String = (0..k)
            .map(|r| if signs >> r & 1 == 1 { '-' } else { '+' })
            .collect();
        let bit = if signs.count_ones() % 2 == 1 { "1" } else { "0" };
        postprocess.insert(label.clone(), bit.to_string());
        outcomes.push(ProjectiveOutcome {
            label,
            state: signed_state(signs)?,
        });
    }
    NonadaptiveAlgorithm::new(
        format!("parity-n{n}"),
        signed_state(0)?,
        Measurement::projective(outcomes)?,
        postprocess,
    )
}

// ---------------------------------------------------------------------------
// van Dam

/// `N_k = Σ_{j<=k} C(n, j)`.
pub fn subset_count(n: usize, k: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for j in 0..=k.min(n) {
        total += binom;
        binom = binom * (n - j) as u64 / (j + 1) as u64;
    }
    total
}

fn encode_subset(mask: u64, n: usize, k: usize) -> IndexTuple {
    let mut idx: Vec<usize> = (1..=n).filter(|&j| mask >> (j - 1) & 1 == 1).collect();
    idx.resize(k, 0);
    IndexTuple::new(idx)
}

/// Bitmask of the variables occurring an odd number of times in `t`.
fn decode_subset(t: &IndexTuple) -> u64 {
    t.odd_support()
        .into_iter()
        .fold(0u64, |acc, j| acc | 1 << (j - 1))
}

fn check_vandam(n: usize, k: usize) -> Result<()> {
    if n == 0 || n > 24 {
        return Err(contract(format!("van Dam simulation supports 1 <= n <= 24, got {n}")));
    }
    if k > n {
        return Err(contract(format!("k={k} exceeds n={n}")));
    }
    Ok(())
}

/// Uniform superposition over subsets `S ⊆ [n]` with `|S| <= k`, each
/// written as its increasing index list padded with zeros to length `k`.
pub fn vandam_state(n: usize, k: usize) -> Result<QueryState> {
    check_vandam(n, k)?;
    if k == 0 {
        return Err(contract("the van Dam state needs k >= 1"));
    }
    QueryState::uniform(
        n,
        k,
        (0..1u64 << n)
            .filter(|m| m.count_ones() as usize <= k)
            .map(|m| encode_subset(m, n, k)),
    )
}

/// Outcome statistics of van Dam's measurement: one probability per
/// candidate string `y` (indexed by its integer encoding) and the residual
/// mass not captured by the Fourier family.
#[derive(Clone, Debug, PartialEq)]
pub struct VanDamOutcome {
    n: usize,
    probs: Vec<f64>,
    fail: f64,
}

impl VanDamOutcome {
    pub fn prob(&self, y: &OracleString) -> f64 {
        self.probs[y.to_index() as usize]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn fail(&self) -> f64 {
        self.fail
    }

    pub fn to_distribution(&self) -> Distribution {
        let mut out: Vec<(String, f64)> = self
            .probs
            .iter()
            .enumerate()
            .map(|(y, &p)| (OracleString::from_index(self.n, y as u64).to_string(), p))
            .collect();
        out.push((FAIL_LABEL.to_string(), self.fail));
        Distribution::new(out)
    }
}

/// Amplitudes of the post-oracle state indexed by subset bitmask, computed
/// from the masks alone. The zero query case is the empty set with
/// amplitude 1.
fn post_oracle_subset_amplitudes(n: usize, k: usize, x: &OracleString) -> Result<Vec<f64>> {
    check_vandam(n, k)?;
    if x.n() != n {
        return Err(contract(format!("input has {} bits, expected {n}", x.n())));
    }
    let mut amps = vec![0.0; 1 << n];
    if k == 0 {
        amps[0] = 1.0;
        return Ok(amps);
    }
    let xmask = x.to_index();
    let amp = 1.0 / (subset_count(n, k) as f64).sqrt();
    for (mask, a) in amps.iter_mut().enumerate() {
        let mask = mask as u64;
        if mask.count_ones() as usize <= k {
            *a = if (mask & xmask).count_ones() % 2 == 1 { -amp } else { amp };
        }
    }
    Ok(amps)
}

fn finish(n: usize, probs: Vec<f64>) -> VanDamOutcome {
    let captured: f64 = probs.iter().sum();
    VanDamOutcome {
        n,
        probs,
        fail: (1.0 - captured).max(0.0),
    }
}

/// In-place unnormalized Walsh-Hadamard transform.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Van Dam's outcome distribution on input `x`, via a fast Walsh-Hadamard
/// transform of the post-oracle amplitudes.
pub fn vandam_outcome_distribution(n: usize, k: usize, x: &OracleString) -> Result<VanDamOutcome> {
    let mut amps = post_oracle_subset_amplitudes(n, k, x)?;
    walsh_hadamard(&mut amps);
    let scale = (0.5f64).powi(n as i32);
    Ok(finish(n, amps.into_iter().map(|a| a * a * scale).collect()))
}

/// Same distribution by applying the oracle to the sparse state and summing
/// over its support directly, `O(N_k · 2^n)`.
pub fn vandam_outcome_distribution_direct(
    n: usize,
    k: usize,
    x: &OracleString,
) -> Result<VanDamOutcome> {
    check_vandam(n, k)?;
    let support: Vec<(u64, f64)> = if k == 0 {
        vec![(0, 1.0)]
    } else {
        let phi = apply_oracle(&vandam_state(n, k)?, x)?;
        phi.entries().map(|(t, _, amp)| (decode_subset(t), amp.re)).collect()
    };
    let scale = (0.5f64).powi(n as i32);
    let probs = (0..1u64 << n)
        .map(|y| {
            let overlap: f64 = support
                .iter()
                .map(|&(m, a)| if (m & y).count_ones() % 2 == 1 { -a } else { a })
                .sum();
            overlap * overlap * scale
        })
        .collect();
    Ok(finish(n, probs))
}

/// Closed-form recovery probability `N_k / 2^n`.
pub fn vandam_success_closed_form(n: usize, k: usize) -> f64 {
    subset_count(n, k) as f64 / (1u64 << n) as f64
}

/// Largest `n` for which [`vandam_algorithm`] materializes its POVM.
pub const VANDAM_POVM_MAX_N: usize = 6;

/// Van Dam as a learner of the full class `{0,1}^n`: a rank-one POVM
/// element per candidate `y` built from the Fourier vector restricted to
/// the state's support, plus a `"fail"` element absorbing the remainder.
pub fn vandam_algorithm(n: usize, k: usize) -> Result<NonadaptiveAlgorithm> {
    if n > VANDAM_POVM_MAX_N {
        return Err(contract(format!(
            "van Dam POVM is materialized only for n <= {VANDAM_POVM_MAX_N}"
        )));
    }
    let psi = vandam_state(n, k)?;
    let basis: Vec<_> = psi.support().cloned().collect();
    let masks: Vec<u64> = basis.iter().map(|(t, _)| decode_subset(t)).collect();
    let d = basis.len();
    let scale = (0.5f64).powf(n as f64 / 2.0);
    let mut total = DMatrix::<Complex64>::zeros(d, d);
    let mut elements = Vec::with_capacity((1 << n) + 1);
    let mut postprocess = BTreeMap::new();
    for y in 0..1u64 << n {
        let v: Vec<f64> = masks
            .iter()
            .map(|&m| if (m & y).count_ones() % 2 == 1 { -scale } else { scale })
            .collect();
        let e = DMatrix::from_fn(d, d, |i, j| Complex64::new(v[i] * v[j], 0.0));
        total += &e;
        let label = OracleString::from_index(n, y).to_string();
        postprocess.insert(label.clone(), label.clone());
        elements.push((label, e));
    }
    let mut residual = DMatrix::<Complex64>::identity(d, d) - total;
    // the restricted Fourier family is a tight frame; drop round-off
    residual.iter_mut().for_each(|z| {
        if z.norm() < TOL {
            *z = Complex64::new(0.0, 0.0);
        }
    });
    elements.push((FAIL_LABEL.to_string(), residual));
    postprocess.insert(FAIL_LABEL.to_string(), FAIL_LABEL.to_string());
    NonadaptiveAlgorithm::new(
        format!("vandam-n{n}-k{k}"),
        psi,
        Measurement::povm(basis, elements)?,
        postprocess,
    )
}

// ---------------------------------------------------------------------------
// Bernstein-Vazirani

/// Largest supported `b`.
pub const BV_MAX_B: usize = 4;

fn bits_string(value: usize, width: usize) -> String {
    (0..width)
        .map(|i| if value >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// The concept class of linear functions `s · y` over `b`-bit query strings,
/// and the one-query algorithm that learns it exactly.
///
/// Oracle index `i` in `0..2^b` stands for the query string `y = i`, so the
/// visible input length is `n = 2^b - 1` and index 0 (the zero string) is
/// the usual always-0 position. Concept `s` has bit `popcount(s & i) mod 2`
/// at index `i`. Concepts are listed in increasing order of `s`.
pub fn bv_instance(b: usize) -> Result<(ConceptClass, NonadaptiveAlgorithm)> {
    if b == 0 || b > BV_MAX_B {
        return Err(contract(format!("b must be in [1, {BV_MAX_B}], got {b}")));
    }
    let size = 1usize << b;
    let n = size - 1;
    let concept = |s: usize| {
        OracleString::new((1..size).map(|i| (s & i).count_ones() % 2 == 1).collect())
    };
    let concepts = (0..size).map(concept).collect::<Result<Vec<_>>>()?;
    let class = ConceptClass::new(n, concepts)?;

    let psi = QueryState::uniform(n, 1, (0..size).map(|i| IndexTuple::new(vec![i])))?;
    let amp = 1.0 / (size as f64).sqrt();
    let mut outcomes = Vec::with_capacity(size);
    let mut postprocess = BTreeMap::new();
    for s in 0..size {
        let mut state = QueryState::new(n, 1, 1)?;
        for i in 0..size {
            let sign = if (s & i).count_ones() % 2 == 1 { -amp } else { amp };
            state.add(IndexTuple::new(vec![i]), 0, Complex64::new(sign, 0.0))?;
        }
        let label = bits_string(s, b);
        postprocess.insert(label.clone(), class.concepts()[s].to_string());
        outcomes.push(ProjectiveOutcome { label, state });
    }
    let alg = NonadaptiveAlgorithm::new(
        format!("bv-b{b}"),
        psi,
        Measurement::projective(outcomes)?,
        postprocess,
    )?;
    Ok((class, alg))
}

// ---------------------------------------------------------------------------
// Summaries

/// Per-algorithm summary record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub success_min: f64,
    pub success_max: f64,
    pub eps_lower_bound: f64,
    pub theorem1_rhs: f64,
}

/// Summary of the parity algorithm on `n` bits: exact success over all
/// inputs, the weight-based error floor, and the query floor at the
/// achieved error.
pub fn parity_summary(n: usize) -> Result<AlgorithmSummary> {
    let alg = parity_algorithm(n)?;
    let f = TotalFunction::build(FunctionKind::Parity, n)?;
    let err = alg.worst_case_error(&f)?;
    let mut best: f64 = 0.0;
    for v in 0..1usize << n {
        let x = OracleString::from_index(n, v as u64);
        let want = if f.eval_index(v) { "1" } else { "0" };
        best = best.max(run_learning(&alg, &x)?.get(want));
    }
    Ok(AlgorithmSummary {
        name: alg.name().to_string(),
        n,
        k: alg.k(),
        success_min: 1.0 - err,
        success_max: best,
        eps_lower_bound: bounds::epsilon_lower_bound(alg.state(), &f)?,
        theorem1_rhs: bounds::min_queries_for_error(n, err.min(0.5))?,
    })
}
