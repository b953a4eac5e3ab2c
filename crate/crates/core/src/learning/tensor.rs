//! The tensor class `C^{⊗k}` and classical simulation of its queries.
//!
//! `x^{⊗k}` is the `(n+1)^k`-bit string whose bit at tuple `(i_1..i_k)` is
//! `x_{i_1} ⊕ ... ⊕ x_{i_k}` (with `x_0 = 0`). One query to `O_x^{⊗k}` is one
//! query to the phase oracle of `x^{⊗k}`, so a k-query learner for `C` is a
//! one-query learner for `C^{⊗k}`.

use super::concept::ConceptClass;
use crate::error::{contract, Result};
use crate::qstate::{IndexTuple, OracleString};

/// Bit of `x^{⊗k}` at tuple `t`.
pub fn tensor_bit(x: &OracleString, t: &IndexTuple) -> Result<bool> {
    t.indices()
        .iter()
        .try_fold(false, |acc, &i| Ok(acc ^ x.bit(i)?))
}

/// Classical membership-query access to a hidden string.
pub trait MembershipOracle {
    fn n(&self) -> usize;
    /// Returns `x_i` for `i` in `1..=n`.
    fn query(&mut self, i: usize) -> Result<bool>;
}

/// A membership oracle over a known string that counts and logs queries.
#[derive(Clone, Debug)]
pub struct CountingOracle<'a> {
    x: &'a OracleString,
    log: Vec<usize>,
}

impl<'a> CountingOracle<'a> {
    pub fn new(x: &'a OracleString) -> Self {
        Self { x, log: Vec::new() }
    }

    pub fn count(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &[usize] {
        &self.log
    }
}

impl MembershipOracle for CountingOracle<'_> {
    fn n(&self) -> usize {
        self.x.n()
    }

    fn query(&mut self, i: usize) -> Result<bool> {
        if i == 0 || i > self.x.n() {
            return Err(contract(format!("query index {i} outside [1, {}]", self.x.n())));
        }
        self.log.push(i);
        self.x.bit(i)
    }
}

/// Answers a query to `x^{⊗k}` at `t` using the base oracle. Each distinct
/// nonzero index of `t` is queried once; the answer XORs the bits whose
/// multiplicity is odd. Cost is at most `k`.
pub fn simulate_tensor_query<O: MembershipOracle + ?Sized>(
    t: &IndexTuple,
    oracle: &mut O,
) -> Result<bool> {
    t.check(oracle.n(), t.k())?;
    let mut acc = false;
    for i in t.distinct_nonzero() {
        let bit = oracle.query(i)?;
        if t.multiplicity(i) % 2 == 1 {
            acc ^= bit;
        }
    }
    Ok(acc)
}

/// `C^{⊗k}`, with bits computed on demand.
#[derive(Clone, Debug)]
pub struct TensorClass<'a> {
    base: &'a ConceptClass,
    k: usize,
}

/// Largest position count [`TensorClass::materialize`] accepts.
pub const MAX_MATERIALIZED_POSITIONS: usize = 1 << 20;

impl<'a> TensorClass<'a> {
    pub fn new(base: &'a ConceptClass, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(contract("tensor power needs k >= 1"));
        }
        Ok(Self { base, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.base.m()
    }

    pub fn base(&self) -> &ConceptClass {
        self.base
    }

    /// `(n+1)^k`, including the always-zero position `(0, ..., 0)`.
    pub fn positions(&self) -> Option<usize> {
        (self.base.n() + 1).checked_pow(self.k as u32)
    }

    /// Bit of concept `i` at tuple `t`.
    pub fn bit(&self, i: usize, t: &IndexTuple) -> Result<bool> {
        t.check(self.base.n(), self.k)?;
        tensor_bit(&self.base.concepts()[i], t)
    }

    /// Tuple at flat position `p` (first register most significant), so
    /// positions follow lexicographic tuple order.
    pub fn tuple_at(&self, mut p: usize) -> IndexTuple {
        let base = self.base.n() + 1;
        let mut idx = vec![0; self.k];
        for slot in idx.iter_mut().rev() {
            *slot = p % base;
            p /= base;
        }
        IndexTuple::new(idx)
    }

    /// Writes the class out as ordinary strings over positions
    /// `1..(n+1)^k`; position 0 is the always-zero tuple, which is the
    /// implicit `x_0`. For `k = 1` this is the base class itself.
    pub fn materialize(&self) -> Result<ConceptClass> {
        let total = self
            .positions()
            .filter(|&p| p <= MAX_MATERIALIZED_POSITIONS)
            .ok_or_else(|| contract("tensor class too large to materialize"))?;
        let tuples: Vec<IndexTuple> = (1..total).map(|p| self.tuple_at(p)).collect();
        let concepts = self
            .base
            .concepts()
            .iter()
            .map(|x| {
                OracleString::new(tuples.iter().map(|t| tensor_bit(x, t)).collect::<Result<_>>()?)
            })
            .collect::<Result<Vec<_>>>()?;
        ConceptClass::new(total - 1, concepts)
    }
}

/// `x^{⊗k}` over the embedded copy `(j, 0, ..., 0)`, which reproduces `x`.
pub fn embedded_tuple(j: usize, k: usize) -> IndexTuple {
    let mut idx = vec![0; k];
    idx[0] = j;
    IndexTuple::new(idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(s: &str) -> OracleString {
        s.parse().unwrap()
    }

    fn t(v: &[usize]) -> IndexTuple {
        IndexTuple::new(v.to_vec())
    }

    #[test]
    fn tensor_bit_examples() {
        assert!(tensor_bit(&x("10"), &t(&[1, 2])).unwrap());
        assert!(!tensor_bit(&x("10"), &t(&[1, 1])).unwrap());
        assert!(!tensor_bit(&x("10"), &t(&[0, 2])).unwrap());
        assert!(tensor_bit(&x("10"), &t(&[3, 0])).is_err());
    }

    #[test]
    fn simulated_query_examples() {
        let input = x("101");
        let mut o = CountingOracle::new(&input);
        assert!(!simulate_tensor_query(&t(&[1, 2, 1]), &mut o).unwrap());
        assert_eq!(o.log(), &[1, 2]);

        let mut o = CountingOracle::new(&input);
        assert!(!simulate_tensor_query(&t(&[0, 0]), &mut o).unwrap());
        assert_eq!(o.count(), 0);

        let mut o = CountingOracle::new(&input);
        assert!(simulate_tensor_query(&t(&[3]), &mut o).unwrap());
        assert_eq!(o.count(), 1);

        let mut o = CountingOracle::new(&input);
        assert!(simulate_tensor_query(&t(&[4]), &mut o).is_err());
    }

    #[test]
    fn tensor_class_examples() {
        let c = ConceptClass::new(2, vec![x("10"), x("01")]).unwrap();
        let tc = TensorClass::new(&c, 2).unwrap();
        assert_eq!(tc.positions(), Some(9));
        assert!(tc.bit(0, &t(&[1, 2])).unwrap());
        assert!(tc.bit(1, &t(&[1, 2])).unwrap());
        let mat = tc.materialize().unwrap();
        assert_eq!(mat.m(), 2);
        assert_eq!(mat.n(), 8);

        let one = TensorClass::new(&c, 1).unwrap().materialize().unwrap();
        assert_eq!(one, c);
        assert!(TensorClass::new(&c, 0).is_err());
    }

    #[test]
    fn positions_follow_lexicographic_order() {
        let c = ConceptClass::new(2, vec![x("10")]).unwrap();
        let tc = TensorClass::new(&c, 2).unwrap();
        let tuples: Vec<_> = (0..9).map(|p| tc.tuple_at(p)).collect();
        let mut sorted = tuples.clone();
        sorted.sort();
        assert_eq!(tuples, sorted);
        assert_eq!(tuples[0], t(&[0, 0]));
        assert_eq!(tuples[5], t(&[1, 2]));
    }
}
