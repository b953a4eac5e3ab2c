//! Simulation and verification of nonadaptive quantum query algorithms in the
//! phase-oracle model.
//!
//! A nonadaptive algorithm making `k` queries is an input state on `k`
//! registers of dimension `n + 1` plus a final measurement. The crate
//! simulates such algorithms exactly, computes the query-weight lower bounds
//! that limit them, runs the reference algorithms that meet those bounds,
//! and turns one-query quantum learners into certain classical query plans.
//!
//! - [`qstate`]: sparse states, phase oracles, measurements.
//! - [`boolfn`]: truth tables and sensitivity witnesses.
//! - [`bounds`]: query weights, two-state discrimination, error lower bounds.
//! - [`algorithms`]: pairwise parity, van Dam, Bernstein-Vazirani.
//! - [`learning`]: concept classes, distinguishing sets, the tensor class and
//!   the sampling-based extraction of classical plans.

pub mod algorithms;
pub mod boolfn;
pub mod bounds;
pub mod error;
pub mod learning;
pub mod qstate;
pub mod rng;

pub use error::{Error, Result};
