//! Total boolean functions stored as truth tables.
//!
//! Inputs are encoded as integers with `x_1` in the least significant bit, so
//! `table[v]` is `f` evaluated on `OracleString::from_index(n, v)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{contract, invalid, Error, Result};
use crate::qstate::OracleString;

/// Largest supported input length.
pub const MAX_VARS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionKind {
    Parity,
    And,
    Or,
    Majority,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalFunction {
    n: usize,
    table: Vec<bool>,
}

impl TotalFunction {
    pub fn from_table(n: usize, table: Vec<bool>) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("n must be in [1, {MAX_VARS}], got {n}")));
        }
        if table.len() != 1 << n {
            return Err(invalid(format!(
                "truth table for n={n} needs {} entries, got {}",
                1usize << n,
                table.len()
            )));
        }
        Ok(Self { n, table })
    }

    pub fn build(kind: FunctionKind, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_VARS {
            return Err(invalid(format!("n must be in [1, {MAX_VARS}], got {n}")));
        }
        if kind == FunctionKind::Majority && n.is_multiple_of(2) {
            return Err(invalid(format!("majority needs an odd number of bits, got {n}")));
        }
        let full = (1usize << n) - 1;
        let table = (0..1usize << n)
            .map(|v| {
                let ones = v.count_ones() as usize;
                match kind {
                    FunctionKind::Parity => ones % 2 == 1,
                    FunctionKind::And => v == full,
                    FunctionKind::Or => v != 0,
                    FunctionKind::Majority => 2 * ones > n,
                }
            })
            .collect();
        Ok(Self { n, table })
    }

    pub fn constant(n: usize, value: bool) -> Result<Self> {
        Self::from_table(n, vec![value; 1usize.checked_shl(n as u32).unwrap_or(0)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval_index(&self, v: usize) -> bool {
        self.table[v]
    }

    pub fn eval(&self, x: &OracleString) -> Result<bool> {
        if x.n() != self.n {
            return Err(contract(format!(
                "function has {} variables, input has {}",
                self.n,
                x.n()
            )));
        }
        Ok(self.table[x.to_index() as usize])
    }

    fn check_var(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return Err(contract(format!("variable {j} outside [1, {}]", self.n)));
        }
        Ok(())
    }

    /// The smallest-encoded `x` with `f(x) != f(x ⊕ e^j)`, if `f` depends on `j`.
    pub fn sensitive_witness(&self, j: usize) -> Result<Option<OracleString>> {
        self.check_var(j)?;
        let mask = 1usize << (j - 1);
        Ok((0..self.table.len())
            .find(|&v| self.table[v] != self.table[v ^ mask])
            .map(|v| OracleString::from_index(self.n, v as u64)))
    }

    pub fn depends_on(&self, j: usize) -> Result<bool> {
        Ok(self.sensitive_witness(j)?.is_some())
    }

    /// Variables the function depends on, ascending.
    pub fn relevant_variables(&self) -> Vec<usize> {
        (1..=self.n)
            .filter(|&j| {
                let mask = 1usize << (j - 1);
                (0..self.table.len()).any(|v| self.table[v] != self.table[v ^ mask])
            })
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.table.iter().all(|&b| b == self.table[0])
    }
}

/// Truth-table file: the first line holds `n`, the second `2^n` characters
/// of `0`/`1` in integer order.
impl FromStr for TotalFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (ln, first) = lines.next().ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "empty truth-table file".into(),
        })?;
        let n: usize = first.trim().parse().map_err(|_| Error::Parse {
            line: ln + 1,
            column: 1,
            message: format!("expected variable count, found {:?}", first.trim()),
        })?;
        let (ln, second) = lines.next().ok_or(Error::Parse {
            line: ln + 2,
            column: 1,
            message: "missing truth-table line".into(),
        })?;
        let table = second
            .trim()
            .chars()
            .enumerate()
            .map(|(col, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: ln + 1,
                    column: col + 1,
                    message: format!("expected '0' or '1', found {other:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln + 1,
                column: 1,
                message: "unexpected trailing content".into(),
            });
        }
        Self::from_table(n, table)
    }
}

impl fmt::Display for TotalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for &b in &self.table {
            f.write_str(if b { "1" } else { "0" })?;
        }
        writeln!(f)
    }
}
