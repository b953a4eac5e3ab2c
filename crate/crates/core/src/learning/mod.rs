//! Exact learning from membership queries: concept classes, distinguishing
//! sets, the tensor class, and extraction of classical plans from quantum
//! learners.

mod concept;
mod extraction;
mod plan;
mod tensor;

pub use concept::{
    greedy_cover, is_distinguishing, min_distinguishing_set, ConceptClass, SearchMode, MAX_EXACT_N,
};
pub use extraction::{
    extract_classical_plan, extract_plan_from_profile, extraction_query_bound,
    pairwise_overlap_check, sample_distinguishing_set, sufficient_draws, union_failure_bound,
    AmplitudeProfile, ExtractionAudit, ExtractionOptions, ExtractionSample, OverlapCheck,
    PairOverlap,
};
pub use plan::{classical_learn, Learned, PlanFile, QueryPlan};
pub use tensor::{
    embedded_tuple, simulate_tensor_query, tensor_bit, CountingOracle, MembershipOracle,
    TensorClass, MAX_MATERIALIZED_POSITIONS,
};
