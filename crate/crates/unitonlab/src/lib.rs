//! Loop-group machinery for harmonic maps of finite uniton type into inner
//! symmetric spaces, compact and non-compact.
//!
//! The pipeline runs: nilpotent normalized potential → exact Picard
//! integration → Birkhoff / Iwasawa factorization → extended frames and
//! extended solutions, with root-grading machinery for the canonical-element
//! constructions and closed-form Willmore-sphere evaluators as numeric
//! oracles.

pub mod config;
pub mod dpw;
pub mod exact;
pub mod factor;
pub mod harmonic;
pub mod jsonio;
pub mod liealg;
pub mod linalg;
pub mod loops;
pub mod pipeline;
pub mod poly;
pub mod potentials;
pub mod roots;
pub mod synth;
pub mod willmore;

mod error;

pub use error::UnitonError;

pub type Result<T> = std::result::Result<T, UnitonError>;
