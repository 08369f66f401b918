//! Domain objects: the microstate process, the observable, the temporal weight,
//! compression triples and objective configuration, plus their validators.
//!
//! Constructors do not check invariants. Data coming from outside should go through
//! [`validate_system`] / [`validate_triple`], which report every violation instead of
//! stopping at the first one. Operations elsewhere in the crate assume valid inputs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::SscError;
use crate::matrix::Matrix;
use crate::Result;

/// Tolerance on row sums of every stochastic matrix and vector.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Finite-state, time-homogeneous, first-order Markov microstate process.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovSystem {
    transition: Matrix,
    initial: Vec<f64>,
}

impl MarkovSystem {
    /// `transition[(x, x')] = P(x'|x)`; `initial[x] = p₀(x)`.
    pub fn new(transition: Matrix, initial: Vec<f64>) -> Self {
        MarkovSystem {
            transition,
            initial,
        }
    }

    pub fn n(&self) -> usize {
        self.transition.rows()
    }

    pub fn transition(&self) -> &Matrix {
        &self.transition
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }
}

/// Observable channel `O(ω|x)` and optional accuracy function `C(ω, ω')`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    channel: Matrix,
    cost_matrix: Option<Matrix>,
}

impl Observable {
    pub fn new(channel: Matrix, cost_matrix: Option<Matrix>) -> Self {
        Observable {
            channel,
            cost_matrix,
        }
    }

    /// The microstate itself is observed.
    pub fn identity(n: usize) -> Self {
        Observable::new(Matrix::identity(n), None)
    }

    pub fn with_cost_matrix(mut self, cost: Matrix) -> Self {
        self.cost_matrix = Some(cost);
        self
    }

    pub fn m(&self) -> usize {
        self.channel.cols()
    }

    pub fn channel(&self) -> &Matrix {
        &self.channel
    }

    /// `cost[(ω, ω')]` is the cost of predicting `ω'` when the truth is `ω`.
    pub fn cost_matrix(&self) -> Option<&Matrix> {
        self.cost_matrix.as_ref()
    }
}

/// `0` on the diagonal, `1` elsewhere.
pub fn discrete_metric(m: usize) -> Matrix {
    Matrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { 1.0 })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    /// `W(t) ∝ (1 − γ)^t`, `γ ∈ (0, 1]`.
    Geometric { gamma: f64 },
    Uniform,
}

/// Temporal weight, truncated at `horizon` and renormalized over the included range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSpec {
    pub kind: WeightKind,
    pub horizon: usize,
    pub include_t0: bool,
}

impl WeightSpec {
    pub fn uniform(horizon: usize, include_t0: bool) -> Self {
        WeightSpec {
            kind: WeightKind::Uniform,
            horizon,
            include_t0,
        }
    }

    pub fn geometric(gamma: f64, horizon: usize, include_t0: bool) -> Self {
        WeightSpec {
            kind: WeightKind::Geometric { gamma },
            horizon,
            include_t0,
        }
    }

    fn first_step(&self) -> usize {
        usize::from(!self.include_t0)
    }

    /// Materializes `(t, W(t))` for `t` from 0 (or 1) to the horizon.
    pub fn materialize(&self) -> Result<Weights> {
        if let WeightKind::Geometric { gamma } = self.kind {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(SscError::InvalidWeight(format!(
                    "geometric discount must lie in (0, 1], got {gamma}"
                )));
            }
        }
        let start = self.first_step();
        if self.horizon < start {
            return Err(SscError::EmptyWeightSupport);
        }
        let raw: Vec<(usize, f64)> = (start..=self.horizon)
            .map(|t| {
                let v = match self.kind {
                    WeightKind::Uniform => 1.0,
                    WeightKind::Geometric { gamma } => powi(1.0 - gamma, t),
                };
                (t, v)
            })
            .collect();
        let total: f64 = raw.iter().map(|(_, v)| v).sum();
        if total <= 0.0 {
            return Err(SscError::EmptyWeightSupport);
        }
        Ok(Weights(raw.into_iter().map(|(t, v)| (t, v / total)).collect()))
    }

    /// Geometric mass that lies beyond the horizon of the untruncated discount,
    /// `(1 − γ)^(T+1)` relative to the full series. Zero for uniform weights.
    pub fn truncation_error(&self) -> f64 {
        match self.kind {
            WeightKind::Uniform => 0.0,
            WeightKind::Geometric { gamma } => powi(1.0 - gamma, self.horizon + 1 - self.first_step()),
        }
    }
}

/// `b^e` with `0^0 = 1`.
pub(crate) fn powi(b: f64, e: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..e {
        acc *= b;
    }
    acc
}

/// A materialized temporal weight: ascending, distinct timesteps with nonnegative
/// weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights(Vec<(usize, f64)>);

impl Weights {
    /// Validates and sorts explicit `(t, w)` pairs.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(SscError::EmptyWeightSupport);
        }
        pairs.sort_by_key(|&(t, _)| t);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SscError::InvalidWeight("repeated timestep".into()));
        }
        if pairs.iter().any(|&(_, w)| !(w.is_finite() && w >= 0.0)) {
            return Err(SscError::InvalidWeight("weights must be finite and nonnegative".into()));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if libm::fabs(total - 1.0) > STOCHASTIC_TOL {
            return Err(SscError::InvalidWeight(format!("weights sum to {total}, not 1")));
        }
        Ok(Weights(pairs))
    }

    pub fn point_mass(t: usize) -> Self {
        Weights(alloc::vec![(t, 1.0)])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[(usize, f64)] {
        &self.0
    }

    /// Largest timestep in the support, zero-weight entries included.
    pub fn horizon(&self) -> usize {
        self.0.last().map_or(0, |p| p.0)
    }

    /// `E_W[t]`.
    pub fn expected_time(&self) -> f64 {
        self.0.iter().map(|&(t, w)| t as f64 * w).sum()
    }

    /// Weights restricted to `t ≥ from` and renormalized.
    pub fn restricted_from(&self, from: usize) -> Result<Weights> {
        let kept: Vec<(usize, f64)> = self.0.iter().copied().filter(|&(t, _)| t >= from).collect();
        let total: f64 = kept.iter().map(|p| p.1).sum();
        if total <= 0.0 {
            return Err(SscError::Argument(format!("weight has no support at t >= {from}")));
        }
        Ok(Weights(kept.into_iter().map(|(t, w)| (t, w / total)).collect()))
    }
}

/// A compression `(π, φ, ρ)` onto `k` macrostates.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressionTriple {
    pi: Matrix,
    phi: Matrix,
    rho: Matrix,
}

impl CompressionTriple {
    /// `pi` is `n×k`, `phi` is `k×k`, `rho` is `k×m`.
    pub fn new(pi: Matrix, phi: Matrix, rho: Matrix) -> Self {
        CompressionTriple { pi, phi, rho }
    }

    pub fn k(&self) -> usize {
        self.phi.rows()
    }

    pub fn pi(&self) -> &Matrix {
        &self.pi
    }

    pub fn phi(&self) -> &Matrix {
        &self.phi
    }

    pub fn rho(&self) -> &Matrix {
        &self.rho
    }

    /// Same `π`, `φ` with `ρ` replaced by the identity on the `k` macrostates, so that
    /// predictions are the macrostates themselves.
    pub fn macrostate_level(&self) -> CompressionTriple {
        CompressionTriple::new(self.pi.clone(), self.phi.clone(), Matrix::identity(self.k()))
    }
}

/// The null compression: `Y = X`, `π = id`, `φ = P`, `ρ = O`.
pub fn identity_triple(sys: &MarkovSystem, obs: &Observable) -> CompressionTriple {
    CompressionTriple::new(
        Matrix::identity(sys.n()),
        sys.transition().clone(),
        obs.channel().clone(),
    )
}

/// Everything mapped to one macrostate, predicting a fixed distribution `rho_row` over Ω.
pub fn singleton_triple(n: usize, rho_row: &[f64]) -> CompressionTriple {
    CompressionTriple::new(
        Matrix::from_fn(n, 1, |_, _| 1.0),
        Matrix::identity(1),
        Matrix::from_row_major(1, rho_row.len(), rho_row.to_vec()),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccuracyKind {
    Expected,
    ExpectedWorstCase,
    AvgMi,
    MiOfAvg,
    CondEntropy,
    Kl,
}

impl AccuracyKind {
    pub const ALL: [AccuracyKind; 6] = [
        AccuracyKind::Expected,
        AccuracyKind::ExpectedWorstCase,
        AccuracyKind::AvgMi,
        AccuracyKind::MiOfAvg,
        AccuracyKind::CondEntropy,
        AccuracyKind::Kl,
    ];

    pub fn needs_cost_matrix(self) -> bool {
        matches!(self, AccuracyKind::Expected | AccuracyKind::ExpectedWorstCase)
    }

    /// Whether the cost can be negative (the mutual-information costs are `≤ 0`).
    pub fn may_be_negative(self) -> bool {
        matches!(self, AccuracyKind::AvgMi | AccuracyKind::MiOfAvg)
    }

    pub fn name(self) -> &'static str {
        match self {
            AccuracyKind::Expected => "expected",
            AccuracyKind::ExpectedWorstCase => "expected-worst",
            AccuracyKind::AvgMi => "avg-mi",
            AccuracyKind::MiOfAvg => "mi-of-avg",
            AccuracyKind::CondEntropy => "cond-ent",
            AccuracyKind::Kl => "kl",
        }
    }
}

/// Configuration of the scalarized objective `K = κ·C + α·E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveConfig {
    pub accuracy: AccuracyKind,
    pub kappa: f64,
    pub alpha: f64,
    /// ε-smoothing applied to both KL arguments; `0` disables it.
    pub kl_smoothing: f64,
    /// Report the KL cost with a leading minus sign.
    pub kl_negate: bool,
}

impl ObjectiveConfig {
    pub fn new(accuracy: AccuracyKind, kappa: f64, alpha: f64) -> Self {
        ObjectiveConfig {
            accuracy,
            kappa,
            alpha,
            kl_smoothing: 0.0,
            kl_negate: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.kappa) || !ok(self.alpha) {
            return Err(SscError::Config("kappa and alpha must be finite and nonnegative".into()));
        }
        if self.kappa == 0.0 && self.alpha == 0.0 {
            return Err(SscError::Config("at least one of kappa, alpha must be positive".into()));
        }
        if !ok(self.kl_smoothing) {
            return Err(SscError::Config("kl smoothing must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Whether the accuracy component is guaranteed nonnegative.
    pub fn accuracy_is_nonnegative(&self) -> bool {
        !self.accuracy.may_be_negative() && !(self.accuracy == AccuracyKind::Kl && self.kl_negate)
    }
}

/// Which stored object a violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Object {
    Transition,
    Initial,
    Channel,
    CostMatrix,
    Pi,
    Phi,
    Rho,
}

impl Object {
    pub fn name(self) -> &'static str {
        match self {
            Object::Transition => "transition",
            Object::Initial => "initial",
            Object::Channel => "channel",
            Object::CostMatrix => "cost_matrix",
            Object::Pi => "pi",
            Object::Phi => "phi",
            Object::Rho => "rho",
        }
    }
}

/// One broken invariant. Vectors are reported as a single row (`row = 0`).
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty { object: Object },
    Dimension { object: Object, expected: (usize, usize), found: (usize, usize) },
    NonFinite { object: Object, row: usize, col: usize },
    Range { object: Object, row: usize, col: usize, value: f64 },
    RowSum { object: Object, row: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty { object } => write!(f, "{}: empty", object.name()),
            Violation::Dimension { object, expected, found } => write!(
                f,
                "{}: expected shape {}x{}, found {}x{}",
                object.name(),
                expected.0,
                expected.1,
                found.0,
                found.1
            ),
            Violation::NonFinite { object, row, col } => {
                write!(f, "{}[{row}][{col}]: not finite", object.name())
            }
            Violation::Range { object, row, col, value } => {
                write!(f, "{}[{row}][{col}] = {value}: out of range", object.name())
            }
            Violation::RowSum { object, row, sum } => {
                write!(f, "{} row {row} sums to {sum}, not 1", object.name())
            }
        }
    }
}

/// Advisory findings that do not make the input invalid.
#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// `C(ω, ω)` exceeds the cheapest entry of its row.
    CostDiagonal { row: usize, diagonal: f64, row_min: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::CostDiagonal { row, diagonal, row_min } => write!(
                f,
                "cost_matrix[{row}][{row}] = {diagonal} exceeds row minimum {row_min}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Human-readable lines, violations first.
    pub fn messages(&self) -> Vec<String> {
        self.violations
            .iter()
            .map(|v| format!("{v}"))
            .chain(self.warnings.iter().map(|w| format!("warning: {w}")))
            .collect()
    }
}

fn check_shape(report: &mut ValidationReport, object: Object, m: &Matrix, expected: (usize, usize)) -> bool {
    if m.shape() != expected {
        report.violations.push(Violation::Dimension {
            object,
            expected,
            found: m.shape(),
        });
        return false;
    }
    true
}

/// Entries in `[0, 1]` and rows summing to one.
fn check_stochastic(report: &mut ValidationReport, object: Object, m: &Matrix) {
    for (r, row) in m.iter_rows().enumerate() {
        let mut finite = true;
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                report.violations.push(Violation::NonFinite { object, row: r, col: c });
                finite = false;
            } else if !(0.0..=1.0).contains(&v) {
                report.violations.push(Violation::Range { object, row: r, col: c, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if finite && libm::fabs(sum - 1.0) > STOCHASTIC_TOL {
            report.violations.push(Violation::RowSum { object, row: r, sum });
        }
    }
}

/// Checks every invariant of the process and the observable.
pub fn validate_system(sys: &MarkovSystem, obs: &Observable) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = sys.n();
    if n == 0 {
        report.violations.push(Violation::Empty { object: Object::Transition });
    }
    if check_shape(&mut report, Object::Transition, sys.transition(), (n, n)) {
        check_stochastic(&mut report, Object::Transition, sys.transition());
    }
    let init = Matrix::from_row_major(1, sys.initial().len(), sys.initial().to_vec());
    if check_shape(&mut report, Object::Initial, &init, (1, n)) {
        check_stochastic(&mut report, Object::Initial, &init);
    }
    let m = obs.m();
    if m == 0 {
        report.violations.push(Violation::Empty { object: Object::Channel });
    }
    if check_shape(&mut report, Object::Channel, obs.channel(), (n, m)) {
        check_stochastic(&mut report, Object::Channel, obs.channel());
    }
    if let Some(cost) = obs.cost_matrix() {
        if check_shape(&mut report, Object::CostMatrix, cost, (m, m)) {
            for (r, row) in cost.iter_rows().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        report.violations.push(Violation::NonFinite { object: Object::CostMatrix, row: r, col: c });
                    } else if v < 0.0 {
                        report.violations.push(Violation::Range { object: Object::CostMatrix, row: r, col: c, value: v });
                    }
                }
                let row_min = row.iter().copied().fold(f64::INFINITY, f64::min);
                if row[r] > row_min {
                    report.warnings.push(Warning::CostDiagonal { row: r, diagonal: row[r], row_min });
                }
            }
        }
    }
    report
}

/// Checks dimension compatibility with the system and observable, and stochasticity.
pub fn validate_triple(triple: &CompressionTriple, sys: &MarkovSystem, obs: &Observable) -> ValidationReport {
    let mut report = ValidationReport::default();
    let k = triple.phi().rows();
    if k == 0 {
        report.violations.push(Violation::Empty { object: Object::Phi });
    }
    for (object, mat, expected) in [
        (Object::Pi, triple.pi(), (sys.n(), k)),
        (Object::Phi, triple.phi(), (k, k)),
        (Object::Rho, triple.rho(), (k, obs.m())),
    ] {
        if check_shape(&mut report, object, mat, expected) {
            check_stochastic(&mut report, object, mat);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn swap2() -> (MarkovSystem, Observable) {
        (
            MarkovSystem::new(Matrix::identity(2), vec![0.5, 0.5]),
            Observable::identity(2).with_cost_matrix(discrete_metric(2)),
        )
    }

    #[test]
    fn uniform_weights() {
        let w = WeightSpec::uniform(2, false).materialize().unwrap();
        assert_eq!(w.as_slice(), &[(1, 0.5), (2, 0.5)]);
    }

    #[test]
    fn geometric_weights_hand_normalized() {
        let w = WeightSpec::geometric(0.5, 2, true).materialize().unwrap();
        let expect = [(0, 4.0 / 7.0), (1, 2.0 / 7.0), (2, 1.0 / 7.0)];
        for (got, want) in w.iter().zip(expect) {
            assert_eq!(got.0, want.0);
            assert!(libm::fabs(got.1 - want.1) < 1e-15);
        }
    }

    #[test]
    fn degenerate_discount_is_point_mass_at_zero() {
        let w = WeightSpec::geometric(1.0, 3, true).materialize().unwrap();
        assert_eq!(w.as_slice(), &[(0, 1.0), (1, 0.0), (2, 0.0), (3, 0.0)]);
    }

    #[test]
    fn empty_support_errors() {
        assert_eq!(WeightSpec::uniform(0, false).materialize(), Err(SscError::EmptyWeightSupport));
        assert_eq!(WeightSpec::geometric(1.0, 3, false).materialize(), Err(SscError::EmptyWeightSupport));
        assert!(matches!(
            WeightSpec::geometric(0.0, 3, false).materialize(),
            Err(SscError::InvalidWeight(_))
        ));
    }

    #[test]
    fn valid_system_has_empty_report() {
        let (sys, obs) = swap2();
        let report = validate_system(&sys, &obs);
        assert!(report.is_valid(), "{:?}", report);
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn short_row_named() {
        let p = Matrix::from_rows(&[vec![0.5, 0.4], vec![0.0, 1.0]]).unwrap();
        let sys = MarkovSystem::new(p, vec![0.5, 0.5]);
        let report = validate_system(&sys, &Observable::identity(2));
        assert_eq!(report.violations.len(), 1);
        match &report.violations[0] {
            Violation::RowSum { object: Object::Transition, row: 0, sum } => {
                assert!(libm::fabs(sum - 0.9) < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_initial_entry() {
        let sys = MarkovSystem::new(Matrix::identity(3), vec![-0.1, 0.6, 0.5]);
        let report = validate_system(&sys, &Observable::identity(3));
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::Range { object: Object::Initial, row: 0, col: 0, .. }
        ));
    }

    #[test]
    fn cost_diagonal_warns() {
        let (sys, _) = swap2();
        let cost = Matrix::from_rows(&[vec![1.0, 0.5], vec![1.0, 0.0]]).unwrap();
        let report = validate_system(&sys, &Observable::identity(2).with_cost_matrix(cost));
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn triple_checks() {
        let (sys, obs) = swap2();
        assert!(validate_triple(&identity_triple(&sys, &obs), &sys, &obs).is_valid());

        let bad_pi = CompressionTriple::new(Matrix::identity(3), Matrix::identity(2), Matrix::identity(2));
        let r = validate_triple(&bad_pi, &sys, &obs);
        assert!(matches!(r.violations[0], Violation::Dimension { object: Object::Pi, .. }));

        let phi = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        let bad_phi = CompressionTriple::new(Matrix::identity(2), phi, Matrix::identity(2));
        let r = validate_triple(&bad_phi, &sys, &obs);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::RowSum { object: Object::Phi, row: 0, .. }));
    }

    #[test]
    fn objective_config_rules() {
        assert!(ObjectiveConfig::new(AccuracyKind::Kl, 0.0, 1.0).validate().is_ok());
        assert!(ObjectiveConfig::new(AccuracyKind::Kl, 0.0, 0.0).validate().is_err());
        assert!(ObjectiveConfig::new(AccuracyKind::Kl, -1.0, 1.0).validate().is_err());
        assert!(ObjectiveConfig::new(AccuracyKind::Kl, f64::NAN, 1.0).validate().is_err());
    }
}
