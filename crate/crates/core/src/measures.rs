//! Quantities derived from SSC: compression complexity, inter-scale information
//! flow, and two conditional mutual informations used for comparison with other
//! coarse-graining criteria.

use alloc::vec;

use crate::accuracy::avg_mi_cost;
use crate::computation::CompCostModel;
use crate::error::SscError;
use crate::info;
use crate::matrix::Matrix;
use crate::model::{identity_triple, CompressionTriple, MarkovSystem, ObjectiveConfig, Observable, Weights};
use crate::optimize::{objective_k, optimize, Objective, OptimizerConfig};
use crate::partition::Partition;
use crate::propagation::Propagation;
use crate::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ComplexityMode {
    /// `min K / K(id)`, in `[0, 1]`.
    #[default]
    Normalized,
    /// `min K` itself.
    Unnormalized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Complexity {
    pub value: f64,
    pub mode: ComplexityMode,
    /// Smallest `K` found over the induced-partition class, capped by `identity_k`.
    pub min_k: f64,
    pub identity_k: f64,
    /// Partition attaining `min_k`; the singleton partition when nothing beats identity.
    pub best_partition: Partition,
    pub evaluations: usize,
}

fn require_nonnegative(cfg: &ObjectiveConfig) -> Result<()> {
    if cfg.accuracy_is_nonnegative() {
        Ok(())
    } else {
        Err(SscError::Config(alloc::format!(
            "accuracy cost `{}` can be negative; use cond-ent (or expected, kl) for ratios against the identity compression",
            cfg.accuracy.name()
        )))
    }
}

fn identity_objective(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
) -> Result<Objective> {
    objective_k(sys, obs, &identity_triple(sys, obs), w, cfg, model)
}

/// `min K / K(id)` with the minimum taken by the configured optimizer over induced
/// triples of hard partitions. The identity compression is always a candidate, so
/// the normalized value lies in `[0, 1]`.
pub fn compression_complexity(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
    opt: &OptimizerConfig,
    mode: ComplexityMode,
) -> Result<Complexity> {
    require_nonnegative(cfg)?;
    let identity_k = identity_objective(sys, obs, w, cfg, model)?.k;
    let found = optimize(sys, obs, w, cfg, model, opt)?;
    let (min_k, best_partition) = if found.k_value < identity_k {
        (found.k_value, found.best_partition)
    } else {
        (identity_k, Partition::singletons(sys.n()))
    };
    let value = match mode {
        ComplexityMode::Unnormalized => min_k,
        ComplexityMode::Normalized => {
            if identity_k == 0.0 {
                return Err(SscError::DegenerateBaseline);
            }
            min_k / identity_k
        }
    };
    Ok(Complexity {
        value,
        mode,
        min_k,
        identity_k,
        best_partition,
        evaluations: found.evaluations,
    })
}

/// `(K(triple) − K(id)) / K(id)`; near `−1` means a large gain from compressing.
pub fn normalized_improvement(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
    triple: &CompressionTriple,
) -> Result<f64> {
    require_nonnegative(cfg)?;
    let identity_k = identity_objective(sys, obs, w, cfg, model)?.k;
    if identity_k == 0.0 {
        return Err(SscError::DegenerateBaseline);
    }
    let k = objective_k(sys, obs, triple, w, cfg, model)?.k;
    Ok((k - identity_k) / identity_k)
}

/// Inter-scale information-flow measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfoFlowMeasure {
    /// `−Σ_t W(t) H(Ω_t | Ω'_{t−lag})`, weights renormalized over `t ≥ lag`.
    CondEntropy { lag: usize },
    /// `−Σ_t W(t) I(Ω'_t; Ω_t)`.
    Mi,
    /// `−I_{𝒫̄}(Ω'; Ω)`.
    MiOfAvg,
    /// `−H_{𝒫̄}(Ω | Ω')`.
    CondEntropyOfAvg,
}

/// `−Σ_{t≥lag} W'(t) H(Ω_t | Ω'_{t−lag})` with `W'` the weight restricted to `t ≥ lag`.
pub fn info_flow_cond_ent(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    lag: usize,
) -> Result<f64> {
    let restricted = w.restricted_from(lag)?;
    let prop = Propagation::new(sys, obs, triple, restricted.horizon());
    let mut total = 0.0;
    for (t, wt) in restricted.iter() {
        if wt == 0.0 {
            continue;
        }
        total += wt * prop.lagged_joint(t, lag)?.conditional_entropy();
    }
    Ok(-total)
}

/// Time-averaged mutual information; shares its implementation with the `avg-mi`
/// accuracy cost.
pub fn info_flow_mi(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, w: &Weights) -> f64 {
    avg_mi_cost(sys, obs, triple, w)
}

pub fn info_flow(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    measure: InfoFlowMeasure,
) -> Result<f64> {
    Ok(match measure {
        InfoFlowMeasure::CondEntropy { lag } => info_flow_cond_ent(sys, obs, triple, w, lag)?,
        InfoFlowMeasure::Mi => info_flow_mi(sys, obs, triple, w),
        InfoFlowMeasure::MiOfAvg => crate::accuracy::mi_of_avg_cost(sys, obs, triple, w),
        InfoFlowMeasure::CondEntropyOfAvg => -crate::accuracy::cond_entropy_cost(sys, obs, triple, w),
    })
}

/// `Pᵗ · M`.
fn propagate(sys: &MarkovSystem, m: &Matrix, t: usize) -> Matrix {
    let mut out = m.clone();
    for _ in 0..t {
        out = sys.transition().matmul(&out);
    }
    out
}

/// `I(Y_t; X₀ | Y₀)` when `y` is obtained by applying `π` afresh at every time
/// (`y₀ ~ π(·|x₀)`, `y_t ~ π(·|x_t)`), not by running `φ`.
pub fn recompression_conditional_mi(sys: &MarkovSystem, pi: &Matrix, t: usize) -> Result<f64> {
    if t < 1 {
        return Err(SscError::Argument("recompression MI needs t >= 1".into()));
    }
    let (n, k) = pi.shape();
    let ahead = propagate(sys, pi, t); // (x₀, y_t)
    // joint[y_t][x₀][y₀]
    let mut joint = vec![0.0; k * n * k];
    for x0 in 0..n {
        let p0 = sys.initial()[x0];
        if p0 == 0.0 {
            continue;
        }
        for y0 in 0..k {
            let a = p0 * pi[(x0, y0)];
            if a == 0.0 {
                continue;
            }
            for yt in 0..k {
                joint[(yt * n + x0) * k + y0] += a * ahead[(x0, yt)];
            }
        }
    }
    Ok(info::conditional_mutual_information(&joint, k, n, k))
}

/// `I(X_{t+1}; Y_t | X_t)` under the SSC network, where `y_t` descends from `x₀`
/// through `π` and `φ` only.
pub fn micro_transfer_entropy(sys: &MarkovSystem, triple: &CompressionTriple, t: usize) -> f64 {
    let n = sys.n();
    let k = triple.k();
    let occupancy = propagate(sys, &Matrix::identity(n), t); // (x₀, x_t)
    let mut macro_ahead = triple.pi().clone(); // (x₀, y_t)
    for _ in 0..t {
        macro_ahead = macro_ahead.matmul(triple.phi());
    }
    // joint[x_{t+1}][y_t][x_t]
    let mut joint = vec![0.0; n * k * n];
    for x0 in 0..n {
        let p0 = sys.initial()[x0];
        if p0 == 0.0 {
            continue;
        }
        for xt in 0..n {
            let a = p0 * occupancy[(x0, xt)];
            if a == 0.0 {
                continue;
            }
            for yt in 0..k {
                let b = a * macro_ahead[(x0, yt)];
                if b == 0.0 {
                    continue;
                }
                for (x1, &p) in sys.transition().row(xt).iter().enumerate() {
                    joint[(x1 * k + yt) * n + xt] += b * p;
                }
            }
        }
    }
    info::conditional_mutual_information(&joint, n, k, n)
}
