//! State space compression (SSC) for finite-state, discrete-time Markov processes.
//!
//! A microstate process `x_t` evolves under a row-stochastic transition matrix `P`
//! and is observed through a channel `O(ω|x)`. A compression is a triple
//! `(π, φ, ρ)`: `π(y|x)` maps the initial microstate to a macrostate, `φ(y'|y)`
//! evolves the macrostate, and `ρ(ω'|y)` turns a macrostate into a predicted
//! observable. This crate evaluates such triples exactly:
//!
//! - [`accuracy`]: how badly the predictions `ω'_t` track the observables `ω_t`,
//!   metric-based or information-theoretic, weighted over time by `W(t)`;
//! - [`computation`]: declared proxies for the cost of running the compressed model;
//! - [`optimize`]: the scalarized objective `K = κ·C + α·E`, triples induced by hard
//!   partitions, strong lumpability, exhaustive and annealed partition search, and
//!   Pareto sweeps;
//! - [`measures`]: compression complexity and inter-scale information flow;
//! - [`montecarlo`]: trajectory sampling estimators used as an independent check;
//! - [`corpus`]: small named benchmark systems.
//!
//! All probabilities are `f64`; entropies and mutual informations are in bits.
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod accuracy;
pub mod computation;
pub mod corpus;
pub mod error;
pub mod info;
pub mod matrix;
pub mod measures;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod partition;
pub mod propagation;

pub use accuracy::Aggregate;
pub use computation::{CompCostKind, CompCostModel};
pub use error::SscError;
pub use matrix::Matrix;
pub use model::{
    AccuracyKind, CompressionTriple, MarkovSystem, ObjectiveConfig, Observable, ValidationReport,
    WeightKind, WeightSpec, Weights,
};
pub use optimize::{Objective, OptimizationResult, OptimizerConfig, SearchMethod};
pub use partition::Partition;
pub use propagation::JointDist;

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, SscError>;
