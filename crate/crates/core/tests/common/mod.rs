//! Reference computations for integration tests, written against raw
//! amplitudes and bit vectors rather than the library's own helpers.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use nonadapt_core::qstate::QueryState;

pub type Key = (Vec<usize>, usize);

/// `x` as bits with `x[0] = 0` prepended.
pub fn padded(x: &[bool]) -> Vec<bool> {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(false);
    v.extend_from_slice(x);
    v
}

/// `(-1)^(x_{i_1} + ... + x_{i_k})` with `x` already padded.
pub fn sign(xp: &[bool], idx: &[usize]) -> f64 {
    if idx.iter().filter(|&&i| xp[i]).count() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

pub fn amplitudes(psi: &QueryState) -> Vec<(Key, Complex64)> {
    psi.entries()
        .map(|(t, a, amp)| ((t.indices().to_vec(), a), amp))
        .collect()
}

pub fn after_oracle(amps: &[(Key, Complex64)], x: &[bool]) -> Vec<(Key, Complex64)> {
    let xp = padded(x);
    amps.iter()
        .map(|(k, a)| (k.clone(), a * sign(&xp, &k.0)))
        .collect()
}

pub fn inner(a: &[(Key, Complex64)], b: &[(Key, Complex64)]) -> Complex64 {
    let lookup: HashMap<&Key, Complex64> = b.iter().map(|(k, v)| (k, *v)).collect();
    a.iter()
        .filter_map(|(k, v)| lookup.get(k).map(|w| v.conj() * w))
        .sum()
}

/// Mass on tuples where `j` occurs an odd number of times.
pub fn weight(psi: &QueryState, j: usize) -> f64 {
    amplitudes(psi)
        .iter()
        .filter(|(k, _)| k.0.iter().filter(|&&i| i == j).count() % 2 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

pub fn binomial_success(n: usize, k: usize) -> f64 {
    let mut row = vec![1.0f64];
    for _ in 0..n {
        let mut next = vec![1.0; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[..=k].iter().sum::<f64>() / 2f64.powi(n as i32)
}

/// Bits of `v` with bit 0 as `x_1`.
pub fn bits_of(v: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| v >> i & 1 == 1).collect()
}

/// Whether the positions in `set` (1-based) tell every pair apart.
pub fn separates(concepts: &[Vec<bool>], set: &[usize]) -> bool {
    let mut seen = HashSet::new();
    concepts
        .iter()
        .all(|c| seen.insert(set.iter().map(|&i| c[i - 1]).collect::<Vec<_>>()))
}

/// Smallest separating set size by trying all subsets of positions.
pub fn brute_min_set(concepts: &[Vec<bool>]) -> usize {
    let n = concepts.first().map_or(0, Vec::len);
    (0u32..1 << n)
        .filter(|mask| {
            let set: Vec<usize> = (1..=n).filter(|j| mask >> (j - 1) & 1 == 1).collect();
            separates(concepts, &set)
        })
        .map(u32::count_ones)
        .min()
        .unwrap_or(0) as usize
}

pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    (&g + g.adjoint()).map(|z| z * 0.5)
}

/// `U diag(values) U^†` for the eigenbasis `U` of a Hermitian `h`.
pub fn reshape_spectrum(h: DMatrix<Complex64>, mut values: impl FnMut(f64) -> f64) -> DMatrix<Complex64> {
    let eig = nalgebra::SymmetricEigen::new(h);
    let d = eig.eigenvalues.len();
    let diag = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(values(eig.eigenvalues[i]), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let out = &eig.eigenvectors * diag * eig.eigenvectors.adjoint();
    (&out + out.adjoint()).map(|z| z * 0.5)
}
