//! Sequential double cross-validation assessment of the added predictive
//! ability of a secondary high-dimensional predictor block over a primary one.
//!
//! The pipeline: penalized regression solvers ([`penreg`]), nested
//! cross-validated prediction with inner penalty selection ([`cv`]), the
//! two-stage sequential procedure and its Q² summary measures ([`seqassess`]),
//! a permutation test of added predictive value ([`permtest`]), a synthetic
//! two-source data generator ([`simgen`]), a Monte Carlo driver ([`harness`]),
//! and CSV/JSON interchange ([`dataio`], [`report`]).

pub mod cv;
pub mod dataio;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod penreg;
pub mod permtest;
pub mod report;
pub mod seed;
pub mod seqassess;
pub mod simgen;

pub use error::{Error, Result};
