use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{contract, invalid, Error, Result};
use crate::qstate::OracleString;

/// Largest `n` for which the exact distinguishing-set search runs.
pub const MAX_EXACT_N: usize = 24;

/// A finite set of distinct `n`-bit concepts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConceptClass {
    n: usize,
    concepts: Vec<OracleString>,
}

impl ConceptClass {
    pub fn new(n: usize, concepts: Vec<OracleString>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("concepts need at least one bit"));
        }
        if concepts.is_empty() {
            return Err(invalid("concept class is empty"));
        }
        let mut seen = HashSet::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            if c.n() != n {
                return Err(invalid(format!("concept {i} has {} bits, expected {n}", c.n())));
            }
            if !seen.insert(c) {
                return Err(invalid(format!("concept {c} appears more than once")));
            }
        }
        Ok(Self { n, concepts })
    }

    /// Every string in `{0,1}^n`, in integer order.
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(contract(format!("full class supports 1 <= n <= 20, got {n}")));
        }
        Self::new(n, (0..1u64 << n).map(|v| OracleString::from_index(n, v)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.concepts.len()
    }

    pub fn concepts(&self) -> &[OracleString] {
        &self.concepts
    }

    pub fn index_of(&self, x: &OracleString) -> Option<usize> {
        self.concepts.iter().position(|c| c == x)
    }

    fn check_indices(&self, s: &[usize]) -> Result<()> {
        match s.iter().find(|&&j| j == 0 || j > self.n) {
            Some(j) => Err(contract(format!("index {j} outside [1, {}]", self.n))),
            None => Ok(()),
        }
    }

    /// Restriction of concept `i` to positions `s`, in the order given.
    pub fn restriction(&self, i: usize, s: &[usize]) -> Result<Vec<bool>> {
        self.check_indices(s)?;
        let c = &self.concepts[i];
        Ok(s.iter().map(|&j| c.bits()[j - 1]).collect())
    }

    fn masks(&self) -> Vec<u64> {
        self.concepts.iter().map(OracleString::to_index).collect()
    }
}

/// Whether every pair of concepts differs somewhere in `s`.
pub fn is_distinguishing(class: &ConceptClass, s: &[usize]) -> Result<bool> {
    class.check_indices(s)?;
    let mut seen = HashSet::with_capacity(class.m());
    for i in 0..class.m() {
        if !seen.insert(class.restriction(i, s)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Greedy,
}

/// A smallest (exact) or greedily built distinguishing set, ascending.
///
/// Exact search enumerates subsets by increasing size in lexicographic
/// order and returns the first hit, so ties go to the lexicographically
/// smallest set. Greedy repeatedly adds the position separating the most
/// not-yet-separated pairs, lowest index on ties.
pub fn min_distinguishing_set(class: &ConceptClass, mode: SearchMode) -> Result<Vec<usize>> {
    match mode {
        SearchMode::Exact => exact_search(class),
        SearchMode::Greedy => {
            let columns: Vec<Vec<bool>> = (1..=class.n())
                .map(|j| class.concepts().iter().map(|c| c.bits()[j - 1]).collect())
                .collect();
            let chosen = greedy_cover(class.m(), &columns)
                .expect("distinct concepts are always separated by the full index set");
            let mut s: Vec<usize> = chosen.into_iter().map(|c| c + 1).collect();
            s.sort_unstable();
            Ok(s)
        }
    }
}

fn exact_search(class: &ConceptClass) -> Result<Vec<usize>> {
    let n = class.n();
    if n > MAX_EXACT_N {
        return Err(contract(format!(
            "exact search is limited to n <= {MAX_EXACT_N}; use greedy mode"
        )));
    }
    let masks = class.masks();
    let mut restricted = Vec::with_capacity(masks.len());
    for size in 0..=n {
        for subset in (1..=n).combinations(size) {
            let sel = subset.iter().fold(0u64, |acc, j| acc | 1 << (j - 1));
            restricted.clear();
            restricted.extend(masks.iter().map(|c| c & sel));
            restricted.sort_unstable();
            if restricted.windows(2).all(|w| w[0] != w[1]) {
                return Ok(subset);
            }
        }
    }
    unreachable!("the full index set separates distinct concepts")
}

/// Greedy separation over candidate positions. `columns[c][i]` is the bit of
/// concept `i` at candidate `c`. Returns the chosen candidates in pick order,
/// or `None` if the candidates cannot separate every pair.
///
/// Concepts are kept in blocks that agree on every chosen candidate; the
/// pairs a candidate would newly separate are `Σ_block zeros · ones`.
pub fn greedy_cover(m: usize, columns: &[Vec<bool>]) -> Option<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = vec![(0..m).collect()];
    let mut chosen = Vec::new();
    while blocks.iter().any(|b| b.len() > 1) {
        let mut best: Option<(usize, usize)> = None;
        for (c, col) in columns.iter().enumerate() {
            let gain: usize = blocks
                .iter()
                .map(|b| {
                    let ones = b.iter().filter(|&&i| col[i]).count();
                    ones * (b.len() - ones)
                })
                .sum();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((c, gain));
            }
        }
        let (c, _) = best?;
        chosen.push(c);
        let col = &columns[c];
        blocks = blocks
            .into_iter()
            .flat_map(|b| {
                let (ones, zeros): (Vec<usize>, Vec<usize>) = b.into_iter().partition(|&i| col[i]);
                [zeros, ones]
            })
            .filter(|b| !b.is_empty())
            .collect();
    }
    Some(chosen)
}

/// Concept-class file: a header line `n m`, then `m` lines of `n` bits.
impl FromStr for ConceptClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (ln, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            column: 1,
            message: "empty concept file".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let parse = |v: &str, col: usize| {
            v.parse::<usize>().map_err(|_| Error::Parse {
                line: ln + 1,
                column: col,
                message: format!("expected a non-negative integer, found {v:?}"),
            })
        };
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: ln + 1,
                column: 1,
                message: "header must be \"n m\"".into(),
            });
        }
        let n = parse(parts[0], 1)?;
        let m = parse(parts[1], parts[0].len() + 2)?;
        let mut concepts = Vec::with_capacity(m);
        for (ln, line) in lines {
            let line = line.trim();
            if line.len() != n {
                return Err(Error::Parse {
                    line: ln + 1,
                    column: 1,
                    message: format!("expected {n} bits, found {}", line.len()),
                });
            }
            let x = line.parse::<OracleString>().map_err(|e| match e {
                Error::Parse { column, message, .. } => Error::Parse {
                    line: ln + 1,
                    column,
                    message,
                },
                other => other,
            })?;
            concepts.push(x);
        }
        if concepts.len() != m {
            return Err(Error::Parse {
                line: s.lines().count() + 1,
                column: 1,
                message: format!("header declares {m} concepts, found {}", concepts.len()),
            });
        }
        ConceptClass::new(n, concepts)
    }
}

impl fmt::Display for ConceptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.m())?;
        for c in &self.concepts {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
