use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::concept::ConceptClass;
use super::tensor::MembershipOracle;
use crate::error::{contract, invalid, Error, Result};
use crate::qstate::OracleString;

fn pattern_key(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// A classical nonadaptive learner: query `base_queries` (ascending) on the
/// hidden input, then look the observed pattern up in the decoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PlanFile", into = "PlanFile")]
pub struct QueryPlan {
    base_queries: Vec<usize>,
    concepts: Vec<OracleString>,
    decoder: BTreeMap<String, usize>,
}

impl QueryPlan {
    /// Builds the decoder for `class` restricted to `base_queries`. Fails if
    /// two concepts share a restriction.
    pub fn new(class: &ConceptClass, mut base_queries: Vec<usize>) -> Result<Self> {
        base_queries.sort_unstable();
        base_queries.dedup();
        let mut decoder = BTreeMap::new();
        for i in 0..class.m() {
            let key = pattern_key(&class.restriction(i, &base_queries)?);
            if let Some(prev) = decoder.insert(key.clone(), i) {
                return Err(invalid(format!(
                    "concepts {prev} and {i} agree on every planned query (pattern {key})"
                )));
            }
        }
        Ok(Self {
            base_queries,
            concepts: class.concepts().to_vec(),
            decoder,
        })
    }

    pub fn base_queries(&self) -> &[usize] {
        &self.base_queries
    }

    pub fn concepts(&self) -> &[OracleString] {
        &self.concepts
    }

    pub fn len(&self) -> usize {
        self.base_queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base_queries.is_empty()
    }

    /// Concept index for an observed bit pattern.
    pub fn decode(&self, pattern: &[bool]) -> Result<usize> {
        if pattern.len() != self.base_queries.len() {
            return Err(contract(format!(
                "pattern has {} bits, plan queries {}",
                pattern.len(),
                self.base_queries.len()
            )));
        }
        let key = pattern_key(pattern);
        self.decoder
            .get(&key)
            .copied()
            .ok_or(Error::OutsideClass(key))
    }
}

/// Result of running a plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Learned {
    pub concept: usize,
    pub queries: usize,
}

/// Queries exactly the plan's positions and decodes.
pub fn classical_learn<O: MembershipOracle + ?Sized>(
    plan: &QueryPlan,
    oracle: &mut O,
) -> Result<Learned> {
    let pattern = plan
        .base_queries
        .iter()
        .map(|&i| oracle.query(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Learned {
        concept: plan.decode(&pattern)?,
        queries: pattern.len(),
    })
}

/// `{base_queries, concepts, decoder_table: {pattern -> concept index}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanFile {
    pub base_queries: Vec<usize>,
    pub concepts: Vec<String>,
    pub decoder_table: BTreeMap<String, usize>,
}

impl From<QueryPlan> for PlanFile {
    fn from(p: QueryPlan) -> Self {
        PlanFile {
            base_queries: p.base_queries,
            concepts: p.concepts.iter().map(ToString::to_string).collect(),
            decoder_table: p.decoder,
        }
    }
}

impl TryFrom<PlanFile> for QueryPlan {
    type Error = Error;

    /// Rebuilds the plan from its concepts and checks the stored decoder
    /// agrees with it.
    fn try_from(f: PlanFile) -> Result<Self> {
        let concepts = f
            .concepts
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<OracleString>>>()?;
        let n = concepts
            .first()
            .map(OracleString::n)
            .ok_or_else(|| invalid("plan has no concepts"))?;
        let plan = QueryPlan::new(&ConceptClass::new(n, concepts)?, f.base_queries)?;
        if plan.decoder != f.decoder_table {
            return Err(invalid("decoder table does not match the plan's concepts"));
        }
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::CountingOracle;

    fn class(rows: &[&str]) -> ConceptClass {
        ConceptClass::new(rows[0].len(), rows.iter().map(|r| r.parse().unwrap()).collect()).unwrap()
    }

    #[test]
    fn learns_every_concept() {
        let c = class(&["000", "011", "101"]);
        let plan = QueryPlan::new(&c, vec![3, 1]).unwrap();
        assert_eq!(plan.base_queries(), &[1, 3]);
        for (i, x) in c.concepts().iter().enumerate() {
            let mut o = CountingOracle::new(x);
            let got = classical_learn(&plan, &mut o).unwrap();
            assert_eq!(got, Learned { concept: i, queries: 2 });
            assert_eq!(o.log(), &[1, 3]);
        }
    }

    #[test]
    fn non_separating_plan_rejected() {
        let c = class(&["000", "011", "101"]);
        assert!(matches!(QueryPlan::new(&c, vec![3]), Err(Error::Validation(_))));
    }

    #[test]
    fn single_concept_needs_no_queries() {
        let c = class(&["0110"]);
        let plan = QueryPlan::new(&c, vec![]).unwrap();
        let mut o = CountingOracle::new(&c.concepts()[0]);
        assert_eq!(classical_learn(&plan, &mut o).unwrap(), Learned { concept: 0, queries: 0 });
    }

    #[test]
    fn full_plan_returns_input() {
        let c = ConceptClass::full(3).unwrap();
        let plan = QueryPlan::new(&c, vec![1, 2, 3]).unwrap();
        for x in c.concepts() {
            let got = classical_learn(&plan, &mut CountingOracle::new(x)).unwrap();
            assert_eq!(&plan.concepts()[got.concept], x);
        }
    }

    #[test]
    fn outside_class_pattern() {
        let c = class(&["000", "011"]);
        let plan = QueryPlan::new(&c, vec![2]).unwrap();
        let stranger: OracleString = "111".parse().unwrap();
        // 111 restricted to {2} is "1", which is concept 1's pattern
        assert_eq!(classical_learn(&plan, &mut CountingOracle::new(&stranger)).unwrap().concept, 1);
        let plan = QueryPlan::new(&c, vec![1, 2]).unwrap();
        assert!(matches!(
            classical_learn(&plan, &mut CountingOracle::new(&stranger)),
            Err(Error::OutsideClass(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let c = class(&["000", "011", "101"]);
        let plan = QueryPlan::new(&c, vec![1, 3]).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        assert!(text.contains("\"decoder_table\""));
        let back: QueryPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
        let tampered = text.replace("\"00\":0", "\"00\":2");
        assert!(serde_json::from_str::<QueryPlan>(&tampered).is_err());
    }
}
