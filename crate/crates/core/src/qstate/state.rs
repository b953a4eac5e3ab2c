use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::oracle::{oracle_phase, IndexTuple, OracleString};
use crate::error::{contract, invalid, Error, Result};

/// A basis element of the query space together with its ancilla label.
pub type BasisLabel = (IndexTuple, usize);

/// Normalization, orthonormality and PSD tolerance.
pub const TOL: f64 = 1e-9;

/// Sparse pure state on `k` query registers of dimension `n + 1`, optionally
/// tensored with an ancilla of dimension `ancilla_dim` that the oracle does
/// not touch.
///
/// Entries are kept in lexicographic order of `(tuple, ancilla)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateFile", into = "StateFile")]
pub struct QueryState {
    n: usize,
    k: usize,
    ancilla_dim: usize,
    amplitudes: BTreeMap<BasisLabel, Complex64>,
}

impl QueryState {
    /// An empty (zero) state, to be filled with [`QueryState::add`].
    pub fn new(n: usize, k: usize, ancilla_dim: usize) -> Result<Self> {
        if n == 0 || k == 0 || ancilla_dim == 0 {
            return Err(invalid(format!(
                "state dimensions must be positive (n={n}, k={k}, ancilla_dim={ancilla_dim})"
            )));
        }
        Ok(Self {
            n,
            k,
            ancilla_dim,
            amplitudes: BTreeMap::new(),
        })
    }

    /// Builds a state from entries and normalizes it.
    pub fn from_entries<I>(n: usize, k: usize, ancilla_dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (IndexTuple, usize, Complex64)>,
    {
        let mut psi = Self::new(n, k, ancilla_dim)?;
        for (t, a, amp) in entries {
            psi.add(t, a, amp)?;
        }
        psi.normalize()?;
        Ok(psi)
    }

    /// Equal superposition over `tuples` (ancilla 0).
    pub fn uniform<I>(n: usize, k: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = IndexTuple>,
    {
        Self::from_entries(
            n,
            k,
            1,
            tuples.into_iter().map(|t| (t, 0, Complex64::new(1.0, 0.0))),
        )
    }

    pub fn basis_state(n: usize, k: usize, t: IndexTuple) -> Result<Self> {
        Self::uniform(n, k, [t])
    }

    /// Adds `amp` to the amplitude at `(t, a)`.
    pub fn add(&mut self, t: IndexTuple, a: usize, amp: Complex64) -> Result<()> {
        t.check(self.n, self.k)?;
        if a >= self.ancilla_dim {
            return Err(contract(format!(
                "ancilla index {a} outside [0, {})",
                self.ancilla_dim
            )));
        }
        *self
            .amplitudes
            .entry((t, a))
            .or_insert(Complex64::new(0.0, 0.0)) += amp;
        Ok(())
    }

    /// Drops entries that are exactly zero.
    pub fn prune(&mut self) {
        self.amplitudes.retain(|_, amp| amp.norm_sqr() != 0.0);
    }

    pub fn normalize(&mut self) -> Result<()> {
        self.prune();
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite state"));
        }
        for amp in self.amplitudes.values_mut() {
            *amp /= norm;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn support_len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= TOL
    }

    pub fn amplitude(&self, t: &IndexTuple, a: usize) -> Complex64 {
        // BTreeMap lookups need an owned key; the clone is small.
        self.amplitudes
            .get(&(t.clone(), a))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Entries in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (&IndexTuple, usize, Complex64)> + '_ {
        self.amplitudes.iter().map(|((t, a), amp)| (t, *a, *amp))
    }

    /// Basis labels carrying a stored amplitude.
    pub fn support(&self) -> impl Iterator<Item = &BasisLabel> + '_ {
        self.amplitudes.keys()
    }

    /// `|alpha_t|^2` summed over the ancilla, per tuple.
    pub fn tuple_weights(&self) -> BTreeMap<IndexTuple, f64> {
        let mut out = BTreeMap::new();
        for ((t, _), amp) in &self.amplitudes {
            *out.entry(t.clone()).or_insert(0.0) += amp.norm_sqr();
        }
        out
    }

    /// Tensor product `self ⊗ other`: tuples concatenate and ancilla labels
    /// combine as `a_self * other.ancilla_dim + a_other`.
    pub fn tensor(&self, other: &QueryState) -> Result<QueryState> {
        if self.n != other.n {
            return Err(contract(format!(
                "cannot tensor states over n={} and n={}",
                self.n, other.n
            )));
        }
        let mut out = QueryState::new(
            self.n,
            self.k + other.k,
            self.ancilla_dim * other.ancilla_dim,
        )?;
        for ((t1, a1), amp1) in &self.amplitudes {
            for ((t2, a2), amp2) in &other.amplitudes {
                let mut idx = t1.indices().to_vec();
                idx.extend_from_slice(t2.indices());
                out.amplitudes
                    .insert((IndexTuple::new(idx), a1 * other.ancilla_dim + a2), amp1 * amp2);
            }
        }
        Ok(out)
    }

    fn check_same_space(&self, other: &QueryState) -> Result<()> {
        if (self.n, self.k, self.ancilla_dim) != (other.n, other.k, other.ancilla_dim) {
            return Err(contract(format!(
                "state spaces differ: (n={}, k={}, ancilla={}) vs (n={}, k={}, ancilla={})",
                self.n, self.k, self.ancilla_dim, other.n, other.k, other.ancilla_dim
            )));
        }
        Ok(())
    }
}

/// Applies `O_x^{⊗k}` (identity on the ancilla).
pub fn apply_oracle(psi: &QueryState, x: &OracleString) -> Result<QueryState> {
    if psi.n != x.n() {
        return Err(contract(format!(
            "state has n={} but oracle string has {} bits",
            psi.n,
            x.n()
        )));
    }
    let mut out = psi.clone();
    for ((t, _), amp) in out.amplitudes.iter_mut() {
        if oracle_phase(x, t)? < 0 {
            *amp = -*amp;
        }
    }
    Ok(out)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &QueryState, b: &QueryState) -> Result<Complex64> {
    a.check_same_space(b)?;
    let (small, large, conj_small) = if a.support_len() <= b.support_len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (key, amp) in &small.amplitudes {
        if let Some(other) = large.amplitudes.get(key) {
            acc += if conj_small {
                amp.conj() * other
            } else {
                other.conj() * amp
            };
        }
    }
    Ok(acc)
}

/// A random normalized state with `support` distinct basis labels drawn
/// uniformly from the full `(n+1)^k * ancilla_dim` space and complex Gaussian
/// amplitudes.
pub fn random_state<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    ancilla_dim: usize,
    support: usize,
    rng: &mut R,
) -> Result<QueryState> {
    let dim = (n + 1)
        .checked_pow(k as u32)
        .and_then(|d| d.checked_mul(ancilla_dim))
        .ok_or_else(|| invalid("query space too large to sample"))?;
    let support = support.clamp(1, dim);
    let mut psi = QueryState::new(n, k, ancilla_dim)?;
    for flat in sample(rng, dim, support) {
        let a = flat % ancilla_dim;
        let mut rest = flat / ancilla_dim;
        let mut idx = vec![0; k];
        for slot in idx.iter_mut().rev() {
            *slot = rest % (n + 1);
            rest /= n + 1;
        }
        let amp = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        psi.add(IndexTuple::new(idx), a, amp)?;
    }
    psi.normalize()?;
    Ok(psi)
}

/// On-disk form: `{n, k, ancilla_dim, entries: [{tuple, a, re, im}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub n: usize,
    pub k: usize,
    pub ancilla_dim: usize,
    pub entries: Vec<EntryRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryRecord {
    pub tuple: Vec<usize>,
    pub a: usize,
    pub re: f64,
    pub im: f64,
}

impl From<QueryState> for StateFile {
    fn from(psi: QueryState) -> Self {
        StateFile {
            n: psi.n,
            k: psi.k,
            ancilla_dim: psi.ancilla_dim,
            entries: psi
                .amplitudes
                .into_iter()
                .map(|((t, a), amp)| EntryRecord {
                    tuple: t.indices().to_vec(),
                    a,
                    re: amp.re,
                    im: amp.im,
                })
                .collect(),
        }
    }
}

impl TryFrom<StateFile> for QueryState {
    type Error = Error;

    /// Loads amplitudes verbatim; no renormalization, so a round trip is exact.
    fn try_from(file: StateFile) -> Result<Self> {
        let mut psi = QueryState::new(file.n, file.k, file.ancilla_dim)?;
        for e in file.entries {
            let key = (IndexTuple::new(e.tuple), e.a);
            key.0.check(psi.n, psi.k)?;
            if e.a >= psi.ancilla_dim {
                return Err(contract(format!("ancilla index {} out of range", e.a)));
            }
            if psi
                .amplitudes
                .insert(key.clone(), Complex64::new(e.re, e.im))
                .is_some()
            {
                return Err(invalid(format!("duplicate entry for tuple {}", key.0)));
            }
        }
        Ok(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn t(v: &[usize]) -> IndexTuple {
        IndexTuple::new(v.to_vec())
    }

    #[test]
    fn oracle_on_single_register() {
        let psi = QueryState::uniform(2, 1, [t(&[0]), t(&[1]), t(&[2])]).unwrap();
        let out = apply_oracle(&psi, &"01".parse().unwrap()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((out.amplitude(&t(&[0]), 0) - c(s)).norm() < 1e-15);
        assert!((out.amplitude(&t(&[1]), 0) - c(s)).norm() < 1e-15);
        assert!((out.amplitude(&t(&[2]), 0) - c(-s)).norm() < 1e-15);
    }

    #[test]
    fn oracle_on_two_registers() {
        let psi = QueryState::uniform(2, 2, [t(&[1, 1]), t(&[1, 2])]).unwrap();
        let out = apply_oracle(&psi, &"10".parse().unwrap()).unwrap();
        let s = 0.5f64.sqrt();
        // (-1)^{x1+x1} = +1, (-1)^{x1+x2} = -1
        assert!((out.amplitude(&t(&[1, 1]), 0) - c(s)).norm() < 1e-15);
        assert!((out.amplitude(&t(&[1, 2]), 0) - c(-s)).norm() < 1e-15);
    }

    #[test]
    fn zero_oracle_is_identity() {
        let mut rng = crate::rng::stream(1, "zero-oracle");
        let psi = random_state(3, 2, 2, 10, &mut rng).unwrap();
        assert_eq!(apply_oracle(&psi, &OracleString::zeros(3)).unwrap(), psi);
    }

    #[test]
    fn oracle_dimension_mismatch() {
        let psi = QueryState::basis_state(2, 1, t(&[1])).unwrap();
        let err = apply_oracle(&psi, &OracleString::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn inner_product_examples() {
        let one = QueryState::basis_state(2, 1, t(&[1])).unwrap();
        let two = QueryState::basis_state(2, 1, t(&[2])).unwrap();
        assert_eq!(inner_product(&one, &two).unwrap(), c(0.0));
        assert!((inner_product(&one, &one).unwrap() - c(1.0)).norm() < 1e-15);
        let plus = QueryState::uniform(2, 1, [t(&[1]), t(&[2])]).unwrap();
        let minus = QueryState::from_entries(2, 1, 1, [(t(&[1]), 0, c(1.0)), (t(&[2]), 0, c(-1.0))])
            .unwrap();
        assert!(inner_product(&plus, &minus).unwrap().norm() < 1e-15);
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = QueryState::from_entries(1, 1, 1, [(t(&[1]), 0, Complex64::new(0.0, 1.0))]).unwrap();
        let b = QueryState::basis_state(1, 1, t(&[1])).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(inner_product(&b, &a).unwrap(), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn inner_product_space_mismatch() {
        let a = QueryState::basis_state(2, 1, t(&[1])).unwrap();
        let b = QueryState::basis_state(2, 2, t(&[1, 1])).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::Contract(_))));
    }

    #[test]
    fn add_rejects_out_of_range() {
        let mut psi = QueryState::new(2, 2, 1).unwrap();
        assert!(psi.add(t(&[1, 3]), 0, c(1.0)).is_err());
        assert!(psi.add(t(&[1]), 0, c(1.0)).is_err());
        assert!(psi.add(t(&[1, 2]), 1, c(1.0)).is_err());
    }

    #[test]
    fn normalize_rejects_zero_state() {
        let mut psi = QueryState::new(2, 1, 1).unwrap();
        assert!(psi.normalize().is_err());
    }

    #[test]
    fn tensor_concatenates_tuples() {
        let a = QueryState::uniform(3, 1, [t(&[1]), t(&[2])]).unwrap();
        let b = QueryState::uniform(3, 1, [t(&[3]), t(&[0])]).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.k(), 2);
        assert_eq!(ab.support_len(), 4);
        assert!((ab.amplitude(&t(&[2, 0]), 0) - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mut rng = crate::rng::stream(3, "json");
        let psi = random_state(4, 3, 2, 17, &mut rng).unwrap();
        let text = serde_json::to_string(&psi).unwrap();
        let back: QueryState = serde_json::from_str(&text).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn json_rejects_duplicates() {
        let text = r#"{"n":1,"k":1,"ancilla_dim":1,"entries":[
            {"tuple":[1],"a":0,"re":1.0,"im":0.0},
            {"tuple":[1],"a":0,"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<QueryState>(text).is_err());
    }
}
