//! Exact intent analysis for structural causal models and influence diagrams.

pub mod audit;
pub mod dsl;
pub mod epistemic;
pub mod hkw;
pub mod influence;
pub mod rational;
pub mod scm;
