//! Time-indexed and time-averaged distributions over (predicted, true) observables.
//!
//! For an initial microstate `x₀`:
//! - `q_t(ω|x₀) = Σ_x Pᵗ(x|x₀) O(ω|x)` is the true observable at time `t`;
//! - `r_t(ω'|x₀) = Σ_{y₀,y} π(y₀|x₀) φᵗ(y|y₀) ρ(ω'|y)` is the prediction.
//!
//! Both are propagated by repeated multiplication, never by spectral methods.

use alloc::format;
use alloc::vec::Vec;

use crate::error::SscError;
use crate::info;
use crate::matrix::Matrix;
use crate::model::{CompressionTriple, MarkovSystem, Observable, Weights};
use crate::Result;

/// Total-mass tolerance beyond which a joint is renormalized and flagged.
pub const JOINT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeLabel {
    At(usize),
    /// Predictions at `t − lag` against truth at `t`.
    Lagged { t: usize, lag: usize },
    Averaged,
}

/// Joint distribution over `(ω', ω)`: rows index the prediction, columns the truth.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist {
    matrix: Matrix,
    label: TimeLabel,
    drift: Option<f64>,
}

impl JointDist {
    fn checked(mut matrix: Matrix, label: TimeLabel) -> Self {
        let total = matrix.sum();
        let drift = if libm::fabs(total - 1.0) > JOINT_TOL && total > 0.0 {
            matrix.scale(1.0 / total);
            Some(total - 1.0)
        } else {
            None
        };
        JointDist { matrix, label, drift }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn label(&self) -> TimeLabel {
        self.label
    }

    /// Mass error that forced renormalization, if any.
    pub fn drift_warning(&self) -> Option<f64> {
        self.drift
    }

    /// Distribution of the prediction `ω'`.
    pub fn predicted_marginal(&self) -> Vec<f64> {
        self.matrix.row_sums()
    }

    /// Distribution of the true observable `ω`.
    pub fn true_marginal(&self) -> Vec<f64> {
        self.matrix.col_sums()
    }

    /// `I(Ω'; Ω)` in bits.
    pub fn mutual_information(&self) -> f64 {
        info::mutual_information(&self.matrix)
    }

    /// `H(Ω | Ω')` in bits.
    pub fn conditional_entropy(&self) -> f64 {
        info::conditional_entropy_cols_given_rows(&self.matrix)
    }

    /// `H(Ω)` in bits.
    pub fn true_entropy(&self) -> f64 {
        info::entropy(&self.true_marginal())
    }
}

/// Per-call cache of `q_t` and `r_t` for `t = 0..=horizon`.
#[derive(Clone, Debug)]
pub struct Propagation {
    initial: Vec<f64>,
    truth: Vec<Matrix>,
    predicted: Vec<Matrix>,
}

impl Propagation {
    pub fn new(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, horizon: usize) -> Self {
        let mut truth = Vec::with_capacity(horizon + 1);
        truth.push(obs.channel().clone());
        for t in 1..=horizon {
            let next = sys.transition().matmul(&truth[t - 1]);
            truth.push(next);
        }
        // φᵗ ρ, then π on the left
        let mut ahead = triple.rho().clone();
        let mut predicted = Vec::with_capacity(horizon + 1);
        predicted.push(triple.pi().matmul(&ahead));
        for _ in 1..=horizon {
            ahead = triple.phi().matmul(&ahead);
            predicted.push(triple.pi().matmul(&ahead));
        }
        Propagation {
            initial: sys.initial().to_vec(),
            truth,
            predicted,
        }
    }

    pub fn horizon(&self) -> usize {
        self.truth.len() - 1
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// `q_t`, `n×m`.
    pub fn truth(&self, t: usize) -> &Matrix {
        &self.truth[t]
    }

    /// `r_t`, `n×m'`.
    pub fn predicted(&self, t: usize) -> &Matrix {
        &self.predicted[t]
    }

    fn couple(&self, pred: &Matrix, truth: &Matrix, label: TimeLabel) -> JointDist {
        let mut joint = Matrix::zeros(pred.cols(), truth.cols());
        for (x0, &p) in self.initial.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let r = pred.row(x0);
            let q = truth.row(x0);
            for (a, &ra) in r.iter().enumerate() {
                let pa = p * ra;
                if pa == 0.0 {
                    continue;
                }
                for (b, &qb) in q.iter().enumerate() {
                    joint[(a, b)] += pa * qb;
                }
            }
        }
        JointDist::checked(joint, label)
    }

    /// `𝒫_t(ω', ω) = Σ_{x₀} p₀(x₀) r_t(ω'|x₀) q_t(ω|x₀)`.
    pub fn joint(&self, t: usize) -> JointDist {
        self.couple(&self.predicted[t], &self.truth[t], TimeLabel::At(t))
    }

    /// Joint of the prediction at `t − lag` and the truth at `t`.
    pub fn lagged_joint(&self, t: usize, lag: usize) -> Result<JointDist> {
        if lag > t {
            return Err(SscError::Argument(format!("lag {lag} exceeds timestep {t}")));
        }
        Ok(self.couple(&self.predicted[t - lag], &self.truth[t], TimeLabel::Lagged { t, lag }))
    }

    /// `𝒫̄ = Σ_t W(t) 𝒫_t`.
    pub fn averaged_joint(&self, w: &Weights) -> JointDist {
        let mut acc = Matrix::zeros(self.predicted[0].cols(), self.truth[0].cols());
        for (t, wt) in w.iter() {
            if wt == 0.0 {
                continue;
            }
            acc.add_scaled(wt, self.joint(t).matrix());
        }
        JointDist::checked(acc, TimeLabel::Averaged)
    }
}

/// Rows are `P(ω_t | x₀)`.
pub fn true_observable_dist(sys: &MarkovSystem, obs: &Observable, t: usize) -> Matrix {
    let mut q = obs.channel().clone();
    for _ in 0..t {
        q = sys.transition().matmul(&q);
    }
    q
}

/// Rows are `P(ω'_t | x₀)`, i.e. `π · φᵗ · ρ`.
pub fn predicted_observable_dist(triple: &CompressionTriple, t: usize) -> Matrix {
    let mut ahead = triple.rho().clone();
    for _ in 0..t {
        ahead = triple.phi().matmul(&ahead);
    }
    triple.pi().matmul(&ahead)
}

pub fn joint_at_time(sys: &MarkovSystem, obs: &Observable, triple: &CompressionTriple, t: usize) -> JointDist {
    Propagation::new(sys, obs, triple, t).joint(t)
}

pub fn time_averaged_joint(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
) -> JointDist {
    Propagation::new(sys, obs, triple, w.horizon()).averaged_joint(w)
}

pub fn lagged_joint(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    t: usize,
    lag: usize,
) -> Result<JointDist> {
    Propagation::new(sys, obs, triple, t).lagged_joint(t, lag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_example, ExampleName};
    use crate::model::{identity_triple, singleton_triple};

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn swap2_truth_is_identity_at_every_t() {
        let ex = build_example(ExampleName::Swap2);
        for t in 0..5 {
            assert_eq!(true_observable_dist(&ex.system, &ex.observable, t), Matrix::identity(2));
        }
    }

    #[test]
    fn iid4_truth_rows_uniform_after_one_step() {
        let ex = build_example(ExampleName::Iid4);
        let q = true_observable_dist(&ex.system, &ex.observable, 1);
        assert!(close(&q, &Matrix::from_fn(4, 4, |_, _| 0.25), 1e-15));
    }

    #[test]
    fn lump4_block_row() {
        let ex = build_example(ExampleName::Lump4);
        let q = true_observable_dist(&ex.system, &ex.observable, 1);
        assert!(libm::fabs(q[(0, 0)] - 0.3) < 1e-15);
        assert!(libm::fabs(q[(0, 1)] - 0.7) < 1e-15);
    }

    #[test]
    fn swap2_predictions() {
        let ex = build_example(ExampleName::Swap2);
        let triple = ex.reference.unwrap();
        assert_eq!(predicted_observable_dist(&triple, 0), Matrix::identity(2));
        let anti = Matrix::from_fn(2, 2, |a, b| if a != b { 1.0 } else { 0.0 });
        assert_eq!(predicted_observable_dist(&triple, 1), anti);
    }

    #[test]
    fn singleton_prediction_is_rank_one() {
        let triple = singleton_triple(4, &[0.25; 4]);
        for t in 0..3 {
            let r = predicted_observable_dist(&triple, t);
            assert!(close(&r, &Matrix::from_fn(4, 4, |_, _| 0.25), 1e-15));
        }
    }

    #[test]
    fn swap2_joints() {
        let ex = build_example(ExampleName::Swap2);
        let triple = ex.reference.unwrap();
        let diag = Matrix::from_fn(2, 2, |a, b| if a == b { 0.5 } else { 0.0 });
        let anti = Matrix::from_fn(2, 2, |a, b| if a != b { 0.5 } else { 0.0 });
        assert_eq!(joint_at_time(&ex.system, &ex.observable, &triple, 0).matrix(), &diag);
        assert_eq!(joint_at_time(&ex.system, &ex.observable, &triple, 1).matrix(), &anti);

        let w = crate::WeightSpec::uniform(1, true).materialize().unwrap();
        let avg = time_averaged_joint(&ex.system, &ex.observable, &triple, &w);
        assert!(close(avg.matrix(), &Matrix::from_fn(2, 2, |_, _| 0.25), 1e-15));
        assert_eq!(avg.label(), TimeLabel::Averaged);

        let lagged = lagged_joint(&ex.system, &ex.observable, &triple, 1, 1).unwrap();
        assert_eq!(lagged.matrix(), &diag);
    }

    #[test]
    fn iid4_joints_uniform() {
        let ex = build_example(ExampleName::Iid4);
        let id = identity_triple(&ex.system, &ex.observable);
        let u = Matrix::from_fn(4, 4, |_, _| 1.0 / 16.0);
        assert!(close(joint_at_time(&ex.system, &ex.observable, &id, 1).matrix(), &u, 1e-15));
        let lagged = lagged_joint(&ex.system, &ex.observable, &id, 1, 1).unwrap();
        assert!(close(lagged.matrix(), &u, 1e-15));
    }

    #[test]
    fn lag_zero_matches_joint_and_bad_lag_errors() {
        let ex = build_example(ExampleName::Lump4);
        let triple = ex.reference.unwrap();
        let prop = Propagation::new(&ex.system, &ex.observable, &triple, 3);
        assert_eq!(prop.lagged_joint(2, 0).unwrap().matrix(), prop.joint(2).matrix());
        assert!(prop.lagged_joint(1, 2).is_err());
    }

    #[test]
    fn point_mass_average_equals_single_joint() {
        let ex = build_example(ExampleName::Lump4);
        let triple = ex.reference.unwrap();
        let avg = time_averaged_joint(&ex.system, &ex.observable, &triple, &Weights::point_mass(3));
        let one = joint_at_time(&ex.system, &ex.observable, &triple, 3);
        assert!(close(avg.matrix(), one.matrix(), 1e-15));
    }

    #[test]
    fn drift_is_flagged_not_silent() {
        let j = JointDist::checked(Matrix::from_fn(2, 2, |_, _| 0.3), TimeLabel::At(0));
        assert!(j.drift_warning().is_some());
        assert!(libm::fabs(j.matrix().sum() - 1.0) < 1e-15);
    }
}
