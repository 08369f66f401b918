//! Computation-cost proxies for running a compressed model.
//!
//! None of these is a literal running time. They are declared stand-ins:
//!
//! - `Cardinality`: `log₂(k) · E_W[t]`, bits of macrostate carried per step times
//!   the expected number of steps;
//! - `Sparsity`: `nnz(π)/n + E_W[t]·nnz(φ)/k + nnz(ρ)/k`, average nonzeros touched
//!   per pipeline stage;
//! - `InitEntropyPlusSparsity`: `H(Y₀)` under `p₀` and `π`, replacing the `π` term of
//!   `Sparsity`.

use crate::info;
use crate::model::{CompressionTriple, MarkovSystem, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompCostKind {
    Cardinality,
    Sparsity,
    InitEntropyPlusSparsity,
}

impl CompCostKind {
    pub fn name(self) -> &'static str {
        match self {
            CompCostKind::Cardinality => "cardinality",
            CompCostKind::Sparsity => "sparsity",
            CompCostKind::InitEntropyPlusSparsity => "init-entropy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompCostModel {
    pub kind: CompCostKind,
    /// Entries with magnitude below this do not count as nonzero.
    pub nnz_threshold: f64,
}

impl CompCostModel {
    pub const DEFAULT_NNZ_THRESHOLD: f64 = 1e-12;

    pub fn new(kind: CompCostKind) -> Self {
        CompCostModel {
            kind,
            nnz_threshold: Self::DEFAULT_NNZ_THRESHOLD,
        }
    }
}

impl Default for CompCostModel {
    fn default() -> Self {
        CompCostModel::new(CompCostKind::Cardinality)
    }
}

/// `Σ_t W(t)·t`.
pub fn expected_horizon(w: &Weights) -> f64 {
    w.expected_time()
}

/// `H(Y₀)` with `P(y₀) = Σ_x p₀(x) π(y₀|x)`.
pub fn initial_macrostate_entropy(sys: &MarkovSystem, triple: &CompressionTriple) -> f64 {
    info::entropy(&triple.pi().left_mul(sys.initial()))
}

pub fn computation_cost(
    model: &CompCostModel,
    sys: &MarkovSystem,
    triple: &CompressionTriple,
    w: &Weights,
) -> f64 {
    let steps = expected_horizon(w);
    let k = triple.k() as f64;
    let nnz = |m: &crate::Matrix| m.count_nonzero(model.nnz_threshold) as f64;
    let per_step = steps * nnz(triple.phi()) / k;
    let readout = nnz(triple.rho()) / k;
    match model.kind {
        CompCostKind::Cardinality => libm::log2(k) * steps,
        CompCostKind::Sparsity => nnz(triple.pi()) / triple.pi().rows() as f64 + per_step + readout,
        CompCostKind::InitEntropyPlusSparsity => initial_macrostate_entropy(sys, triple) + per_step + readout,
    }
}
