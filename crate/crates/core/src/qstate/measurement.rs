use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::oracle::IndexTuple;
use super::state::{inner_product, BasisLabel, QueryState, StateFile, TOL};
use crate::error::{contract, invalid, Error, Result};

/// A labelled outcome of a projective measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveOutcome {
    pub label: String,
    pub state: QueryState,
}

/// A POVM given as matrices over an explicit ordered basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    basis: Vec<BasisLabel>,
    position: HashMap<BasisLabel, usize>,
    elements: Vec<(String, DMatrix<Complex64>)>,
}

impl Povm {
    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    pub fn elements(&self) -> &[(String, DMatrix<Complex64>)] {
        &self.elements
    }
}

/// A measurement on the query space. Constructors validate, so a value of
/// this type always satisfies its invariants.
#[derive(Clone, Debug, PartialEq)]
pub enum Measurement {
    Projective(Vec<ProjectiveOutcome>),
    Povm(Povm),
}

fn check_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(invalid(format!("duplicate outcome label {l:?}")));
        }
    }
    if seen.is_empty() {
        return Err(invalid("measurement has no outcomes"));
    }
    Ok(())
}

impl Measurement {
    /// A measurement in an orthonormal family of states. The family need not
    /// span the whole space, only the support of the states it is applied to.
    pub fn projective(outcomes: Vec<ProjectiveOutcome>) -> Result<Self> {
        check_labels(outcomes.iter().map(|o| o.label.as_str()))?;
        for (i, a) in outcomes.iter().enumerate() {
            let norm = inner_product(&a.state, &a.state)?.re;
            if (norm - 1.0).abs() > TOL {
                return Err(invalid(format!(
                    "outcome {:?} has squared norm {norm}",
                    a.label
                )));
            }
            for b in &outcomes[i + 1..] {
                let ip = inner_product(&a.state, &b.state)?;
                if ip.norm() > TOL {
                    return Err(invalid(format!(
                        "outcomes {:?} and {:?} are not orthogonal (|<a|b>| = {})",
                        a.label,
                        b.label,
                        ip.norm()
                    )));
                }
            }
        }
        Ok(Measurement::Projective(outcomes))
    }

    /// A POVM whose elements act on the span of `basis`.
    pub fn povm(
        basis: Vec<BasisLabel>,
        elements: Vec<(String, DMatrix<Complex64>)>,
    ) -> Result<Self> {
        check_labels(elements.iter().map(|(l, _)| l.as_str()))?;
        let d = basis.len();
        let mut position = HashMap::with_capacity(d);
        for (i, b) in basis.iter().enumerate() {
            if position.insert(b.clone(), i).is_some() {
                return Err(invalid(format!("basis element {} repeated", b.0)));
            }
        }
        let mut total = DMatrix::<Complex64>::zeros(d, d);
        for (label, e) in &elements {
            if e.shape() != (d, d) {
                return Err(invalid(format!(
                    "element {label:?} has shape {:?}, basis has {d} elements",
                    e.shape()
                )));
            }
            let asym = (e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if asym > TOL {
                return Err(invalid(format!("element {label:?} is not Hermitian")));
            }
            let hermitian = (e + e.adjoint()).map(|z| z * 0.5);
            let min_eig = SymmetricEigen::new(hermitian)
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            if min_eig < -TOL {
                return Err(invalid(format!(
                    "element {label:?} has eigenvalue {min_eig} < 0"
                )));
            }
            total += e;
        }
        let dev = (total - DMatrix::<Complex64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > TOL {
            return Err(invalid(format!(
                "POVM elements sum to identity only within {dev}"
            )));
        }
        Ok(Measurement::Povm(Povm {
            basis,
            position,
            elements,
        }))
    }

    pub fn labels(&self) -> Vec<&str> {
        match self {
            Measurement::Projective(outs) => outs.iter().map(|o| o.label.as_str()).collect(),
            Measurement::Povm(p) => p.elements.iter().map(|(l, _)| l.as_str()).collect(),
        }
    }
}

/// Outcome probabilities in the measurement's declared order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    outcomes: Vec<(String, f64)>,
}

impl Distribution {
    pub fn new(outcomes: Vec<(String, f64)>) -> Self {
        Self { outcomes }
    }

    /// Probability of `label`; 0 for an unknown label.
    pub fn get(&self, label: &str) -> f64 {
        self.outcomes
            .iter()
            .filter(|(l, _)| l == label)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.outcomes.iter().map(|(_, p)| p).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.outcomes.iter().map(|(l, p)| (l.as_str(), *p))
    }

    /// Pushes the distribution through a relabelling, merging outcomes that
    /// map to the same label. Output order follows first appearance.
    pub fn relabel(&self, map: &BTreeMap<String, String>) -> Result<Distribution> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for (label, p) in &self.outcomes {
            let target = map
                .get(label)
                .ok_or_else(|| contract(format!("no output assigned to outcome {label:?}")))?;
            match out.iter_mut().find(|(l, _)| l == target) {
                Some((_, acc)) => *acc += p,
                None => out.push((target.clone(), *p)),
            }
        }
        Ok(Distribution { outcomes: out })
    }
}

/// Outcome statistics of measuring `psi` with `meas`.
pub fn measure(psi: &QueryState, meas: &Measurement) -> Result<Distribution> {
    let outcomes = match meas {
        Measurement::Projective(outs) => {
            let mut probs = Vec::with_capacity(outs.len());
            for o in outs {
                let p = inner_product(&o.state, psi)?.norm_sqr();
                probs.push((o.label.clone(), p.clamp(0.0, 1.0)));
            }
            let total: f64 = probs.iter().map(|(_, p)| p).sum();
            if (total - psi.norm_sqr()).abs() > TOL {
                return Err(contract(format!(
                    "state is not contained in the span of the measurement basis \
                     (captured probability {total})"
                )));
            }
            probs
        }
        Measurement::Povm(povm) => {
            let mut v = DVector::<Complex64>::zeros(povm.basis.len());
            for (t, a, amp) in psi.entries() {
                let pos = povm.position.get(&(t.clone(), a)).ok_or_else(|| {
                    contract(format!(
                        "state support element {t} (ancilla {a}) is outside the declared basis"
                    ))
                })?;
                v[*pos] = amp;
            }
            povm.elements
                .iter()
                .map(|(label, e)| {
                    let q = (v.adjoint() * e * &v)[(0, 0)].re;
                    (label.clone(), q.clamp(0.0, 1.0))
                })
                .collect()
        }
    };
    Ok(Distribution { outcomes })
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasurementFile {
    Projective {
        outcomes: Vec<ProjectiveRecord>,
    },
    Povm {
        basis: Vec<BasisRecord>,
        elements: Vec<PovmElementRecord>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectiveRecord {
    pub label: String,
    pub state: StateFile,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisRecord {
    pub tuple: Vec<usize>,
    pub a: usize,
}

/// Row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmElementRecord {
    pub label: String,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&Measurement> for MeasurementFile {
    fn from(m: &Measurement) -> Self {
        match m {
            Measurement::Projective(outs) => MeasurementFile::Projective {
                outcomes: outs
                    .iter()
                    .map(|o| ProjectiveRecord {
                        label: o.label.clone(),
                        state: o.state.clone().into(),
                    })
                    .collect(),
            },
            Measurement::Povm(p) => MeasurementFile::Povm {
                basis: p
                    .basis
                    .iter()
                    .map(|(t, a)| BasisRecord {
                        tuple: t.indices().to_vec(),
                        a: *a,
                    })
                    .collect(),
                elements: p
                    .elements
                    .iter()
                    .map(|(label, e)| PovmElementRecord {
                        label: label.clone(),
                        re: e.row_iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
                        im: e.row_iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
                    })
                    .collect(),
            },
        }
    }
}

impl TryFrom<MeasurementFile> for Measurement {
    type Error = Error;

    fn try_from(file: MeasurementFile) -> Result<Self> {
        match file {
            MeasurementFile::Projective { outcomes } => Measurement::projective(
                outcomes
                    .into_iter()
                    .map(|r| {
                        Ok(ProjectiveOutcome {
                            label: r.label,
                            state: QueryState::try_from(r.state)?,
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
            MeasurementFile::Povm { basis, elements } => {
                let d = basis.len();
                let basis = basis
                    .into_iter()
                    .map(|b| (IndexTuple::new(b.tuple), b.a))
                    .collect();
                let elements = elements
                    .into_iter()
                    .map(|r| {
                        if r.re.len() != d
                            || r.im.len() != d
                            || r.re.iter().chain(&r.im).any(|row| row.len() != d)
                        {
                            return Err(invalid(format!(
                                "element {:?} is not {d}x{d}",
                                r.label
                            )));
                        }
                        let m = DMatrix::from_fn(d, d, |i, j| Complex64::new(r.re[i][j], r.im[i][j]));
                        Ok((r.label, m))
                    })
                    .collect::<Result<_>>()?;
                Measurement::povm(basis, elements)
            }
        }
    }
}

impl Serialize for Measurement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasurementFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Measurement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = MeasurementFile::deserialize(d)?;
        Measurement::try_from(file).map_err(serde::de::Error::custom)
    }
}
