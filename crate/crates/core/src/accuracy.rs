//! Accuracy costs of a compression triple.
//!
//! All functions take a materialized weight `W(t)`; timesteps with zero weight are
//! skipped so that an infinite per-time KL term cannot poison the sum with `0·∞`.

use alloc::vec::Vec;

use crate::error::SscError;
use crate::info;
use crate::matrix::Matrix;
use crate::model::{AccuracyKind, CompressionTriple, MarkovSystem, ObjectiveConfig, Observable, Weights};
use crate::propagation::Propagation;
use crate::Result;

/// How the metric cost is aggregated over initial microstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregate {
    /// `p₀`-weighted average.
    Mean,
    /// Maximum over initial states with `p₀(x₀) > 0`, taken separately at each `t`.
    WorstCase,
}

/// One timestep's contribution before weighting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerTime {
    pub t: usize,
    pub weight: f64,
    pub value: f64,
}

/// The selected accuracy cost together with per-time diagnostics.
///
/// For the costs defined on the time-averaged joint (`mi-of-avg`, `cond-ent`), the
/// per-time entries are the same quantity on each `𝒫_t` and do not sum to the total.
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyBreakdown {
    pub kind: AccuracyKind,
    pub value: f64,
    pub per_time: Vec<PerTime>,
}

fn expected_at(prop: &Propagation, cost: &Matrix, t: usize, aggregate: Aggregate) -> f64 {
    let q = prop.truth(t);
    let r = prop.predicted(t);
    let mut mean = 0.0;
    let mut worst = 0.0f64;
    for (x0, &p) in prop.initial().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let mut c = 0.0;
        for (w, &qw) in q.row(x0).iter().enumerate() {
            if qw == 0.0 {
                continue;
            }
            for (wp, &rw) in r.row(x0).iter().enumerate() {
                c += qw * rw * cost[(w, wp)];
            }
        }
        mean += p * c;
        worst = worst.max(c);
    }
    match aggregate {
        Aggregate::Mean => mean,
        Aggregate::WorstCase => worst,
    }
}

fn kl_at(prop: &Propagation, t: usize, smoothing: f64) -> f64 {
    let q = prop.truth(t);
    let r = prop.predicted(t);
    let mut total = 0.0;
    for (x0, &p) in prop.initial().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let d = if smoothing > 0.0 {
            info::kl_divergence(&info::smooth(r.row(x0), smoothing), &info::smooth(q.row(x0), smoothing))
        } else {
            info::kl_divergence(r.row(x0), q.row(x0))
        };
        if d.is_infinite() {
            return f64::INFINITY;
        }
        total += p * d;
    }
    total
}

fn weighted(w: &Weights, mut per_t: impl FnMut(usize) -> f64) -> (f64, Vec<PerTime>) {
    let mut total = 0.0;
    let mut rows = Vec::new();
    for (t, weight) in w.iter() {
        if weight == 0.0 {
            continue;
        }
        let value = per_t(t);
        total += weight * value;
        rows.push(PerTime { t, weight, value });
    }
    (total, rows)
}

fn check_rho(triple: &CompressionTriple, obs: &Observable) -> Result<()> {
    if triple.rho().cols() != obs.m() {
        return Err(SscError::Argument(alloc::format!(
            "prediction alphabet has {} symbols, observable has {}",
            triple.rho().cols(),
            obs.m()
        )));
    }
    Ok(())
}

/// Evaluates the configured accuracy cost from an existing propagation.
pub fn breakdown_from(
    prop: &Propagation,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
) -> Result<AccuracyBreakdown> {
    debug_assert!(prop.horizon() >= w.horizon());
    let (value, per_time) = match cfg.accuracy {
        kind @ (AccuracyKind::Expected | AccuracyKind::ExpectedWorstCase) => {
            let cost = obs.cost_matrix().ok_or(SscError::MissingCostMatrix)?;
            let agg = if kind == AccuracyKind::Expected {
                Aggregate::Mean
            } else {
                Aggregate::WorstCase
            };
            weighted(w, |t| expected_at(prop, cost, t, agg))
        }
        AccuracyKind::AvgMi => {
            let (v, rows) = weighted(w, |t| prop.joint(t).mutual_information());
            (-v, rows)
        }
        AccuracyKind::MiOfAvg => {
            let (_, rows) = weighted(w, |t| prop.joint(t).mutual_information());
            (-prop.averaged_joint(w).mutual_information(), rows)
        }
        AccuracyKind::CondEntropy => {
            let (_, rows) = weighted(w, |t| prop.joint(t).conditional_entropy());
            (prop.averaged_joint(w).conditional_entropy(), rows)
        }
        AccuracyKind::Kl => {
            let (v, rows) = weighted(w, |t| kl_at(prop, t, cfg.kl_smoothing));
            let v = if v.is_infinite() { f64::INFINITY } else { v };
            (if cfg.kl_negate { -v } else { v }, rows)
        }
    };
    Ok(AccuracyBreakdown {
        kind: cfg.accuracy,
        value,
        per_time,
    })
}

/// The accuracy cost selected by `cfg`, with per-time diagnostics.
pub fn accuracy_breakdown(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    cfg: &ObjectiveConfig,
) -> Result<AccuracyBreakdown> {
    if cfg.accuracy.needs_cost_matrix() && obs.cost_matrix().is_none() {
        return Err(SscError::MissingCostMatrix);
    }
    if cfg.accuracy == AccuracyKind::Kl {
        check_rho(triple, obs)?;
    }
    let prop = Propagation::new(sys, obs, triple, w.horizon());
    breakdown_from(&prop, obs, w, cfg)
}

pub fn accuracy_cost(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    accuracy_breakdown(sys, obs, triple, w, cfg).map(|b| b.value)
}

/// `Σ_t W(t) Σ_{x₀} p₀(x₀) Σ_{ω,ω'} q_t(ω|x₀) r_t(ω'|x₀) C(ω, ω')`, or with the
/// average over `x₀` replaced by a per-time maximum.
pub fn expected_cost(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    aggregate: Aggregate,
) -> Result<f64> {
    let cost = obs.cost_matrix().ok_or(SscError::MissingCostMatrix)?;
    let prop = Propagation::new(sys, obs, triple, w.horizon());
    Ok(weighted(w, |t| expected_at(&prop, cost, t, aggregate)).0)
}

/// `I(Ω'_t; Ω_t)` in bits; the per-time cost is its negation.
pub fn mi_per_time(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, t: usize) -> f64 {
    Propagation::new(sys, obs, triple, t).joint(t).mutual_information()
}

/// `−Σ_t W(t) I(Ω'_t; Ω_t)`.
pub fn avg_mi_cost(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, w: &Weights) -> f64 {
    let prop = Propagation::new(sys, obs, triple, w.horizon());
    -weighted(w, |t| prop.joint(t).mutual_information()).0
}

/// `−I_{𝒫̄}(Ω'; Ω)`: mutual information of the time-averaged joint.
pub fn mi_of_avg_cost(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, w: &Weights) -> f64 {
    -Propagation::new(sys, obs, triple, w.horizon())
        .averaged_joint(w)
        .mutual_information()
}

/// `H_{𝒫̄}(Ω | Ω')`.
pub fn cond_entropy_cost(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, w: &Weights) -> f64 {
    Propagation::new(sys, obs, triple, w.horizon())
        .averaged_joint(w)
        .conditional_entropy()
}

/// `Σ_t W(t) Σ_{x₀} p₀(x₀) KL[r_t(·|x₀) ‖ q_t(·|x₀)]`, nonnegative.
///
/// Returns `+∞` when a prediction puts mass where the truth has none, unless
/// `smoothing > 0`, in which case both arguments get `ε` added and are renormalized.
pub fn kl_cost(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    smoothing: f64,
) -> f64 {
    let prop = Propagation::new(sys, obs, triple, w.horizon());
    let v = weighted(w, |t| kl_at(&prop, t, smoothing)).0;
    if v.is_infinite() {
        f64::INFINITY
    } else {
        v
    }
}
