use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{contract, invalid, Error, Result};

/// An `n`-bit input string addressed by positions `1..=n`.
///
/// Position 0 is a virtual bit fixed at 0, which is what lets a phase oracle
/// leave `|0>` untouched. Rendering writes `x_1` first, so `"01"` has
/// `x_1 = 0` and `x_2 = 1`. The integer encoding puts `x_1` in the least
/// significant bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OracleString {
    bits: Vec<bool>,
}

impl OracleString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(invalid("oracle string must have at least one bit"));
        }
        Ok(Self { bits })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "oracle string length must be positive");
        Self {
            bits: vec![false; n],
        }
    }

    /// The string `e^j`: a single 1 at position `j`.
    pub fn unit(n: usize, j: usize) -> Result<Self> {
        let mut x = Self::zeros(n);
        x.flip(j)?;
        Ok(x)
    }

    /// Decodes `value` with `x_1` as the least significant bit.
    pub fn from_index(n: usize, value: u64) -> Self {
        assert!(n > 0 && n <= 64, "integer encoding supports 1..=64 bits");
        Self {
            bits: (0..n).map(|b| (value >> b) & 1 == 1).collect(),
        }
    }

    /// Integer encoding, `x_1` least significant. Requires `n <= 64`.
    pub fn to_index(&self) -> u64 {
        assert!(self.bits.len() <= 64, "integer encoding supports at most 64 bits");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (b, &bit)| acc | (u64::from(bit) << b))
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    /// Bit `x_i` for `i` in `0..=n`, with `x_0 = 0`.
    pub fn bit(&self, i: usize) -> Result<bool> {
        match i {
            0 => Ok(false),
            i if i <= self.bits.len() => Ok(self.bits[i - 1]),
            i => Err(contract(format!(
                "index {i} outside [0, {}]",
                self.bits.len()
            ))),
        }
    }

    /// Bits `x_1..x_n`.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn flip(&mut self, j: usize) -> Result<()> {
        if j == 0 || j > self.bits.len() {
            return Err(contract(format!(
                "variable {j} outside [1, {}]",
                self.bits.len()
            )));
        }
        self.bits[j - 1] = !self.bits[j - 1];
        Ok(())
    }

    pub fn flipped(&self, j: usize) -> Result<Self> {
        let mut y = self.clone();
        y.flip(j)?;
        Ok(y)
    }

    pub fn xor(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(contract(format!(
                "length mismatch: {} vs {}",
                self.n(),
                other.n()
            )));
        }
        Ok(Self {
            bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for OracleString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for OracleString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(col, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 1,
                    column: col + 1,
                    message: format!("expected '0' or '1', found {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(bits)
    }
}

/// A basis label `|i_1, ..., i_k>` of the k-register query space.
///
/// Ordering is lexicographic, which gives states a canonical iteration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![0; k])
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn check(&self, n: usize, k: usize) -> Result<()> {
        if self.0.len() != k {
            return Err(contract(format!(
                "tuple {:?} has length {}, expected {k}",
                self.0,
                self.0.len()
            )));
        }
        if let Some(&bad) = self.0.iter().find(|&&i| i > n) {
            return Err(contract(format!("tuple index {bad} outside [0, {n}]")));
        }
        Ok(())
    }

    /// Number of times variable `j` occurs in the tuple.
    pub fn multiplicity(&self, j: usize) -> usize {
        self.0.iter().filter(|&&i| i == j).count()
    }

    /// The variables occurring an odd number of times, ascending. Index 0 is
    /// never included.
    ///
    /// A diagonal phase oracle sees a tuple only through this set.
    pub fn odd_support(&self) -> Vec<usize> {
        let mut sorted: Vec<usize> = self.0.iter().copied().filter(|&i| i != 0).collect();
        sorted.sort_unstable();
        let mut out = Vec::new();
        let mut iter = sorted.into_iter().peekable();
        while let Some(i) = iter.next() {
            let mut count = 1;
            while iter.peek() == Some(&i) {
                iter.next();
                count += 1;
            }
            if count % 2 == 1 {
                out.push(i);
            }
        }
        out
    }

    /// Distinct nonzero indices, ascending.
    pub fn distinct_nonzero(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.0.iter().copied().filter(|&i| i != 0).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl From<Vec<usize>> for IndexTuple {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (pos, i) in self.0.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str(")")
    }
}

/// Phase `(-1)^(x_{i_1} + ... + x_{i_k})` picked up by `|t>` under `O_x^{⊗k}`.
pub fn oracle_phase(x: &OracleString, t: &IndexTuple) -> Result<i8> {
    let mut odd = false;
    for &i in t.indices() {
        odd ^= x.bit(i)?;
    }
    Ok(if odd { -1 } else { 1 })
}
