//! Trajectory sampling estimators for the accuracy costs.
//!
//! Each path draws `x₀ ~ p₀`, runs the microstate chain through `P` with
//! `ω_t ~ O(·|x_t)`, and independently runs the compressed model
//! `y₀ ~ π(·|x₀)`, `y_t ~ φ(·|y_{t−1})`, `ω'_t ~ ρ(·|y_t)`.
//!
//! Path `i` uses its own ChaCha8 stream `(seed, i)`, so a path set does not depend
//! on how sampling is split across workers: [`sample_paths_range`] over disjoint
//! ranges followed by [`PathSet::concat`] reproduces [`sample_paths`] exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accuracy::Aggregate;
use crate::error::SscError;
use crate::info;
use crate::matrix::Matrix;
use crate::model::{AccuracyKind, CompressionTriple, MarkovSystem, ObjectiveConfig, Observable, Weights};
use crate::Result;

/// Number of bootstrap resamples behind information-cost standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 32;

/// Stream reserved for bootstrap resampling; path streams count up from 0.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Estimator {
    #[default]
    Plugin,
    /// Plug-in entropies plus `(K − 1)/(2N ln 2)` bits, `K` the number of occupied cells.
    PluginMillerMadow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    pub n_paths: usize,
    pub horizon: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl SampleConfig {
    pub fn new(n_paths: usize, horizon: usize, seed: u64) -> Self {
        SampleConfig {
            n_paths,
            horizon,
            seed,
            estimator: Estimator::Plugin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.horizon == 0 {
            return Err(SscError::Config("n_paths and horizon must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sampled trajectories, stored path-major: entry `i·(T+1) + t` is time `t` of path `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSet {
    n_states: usize,
    m: usize,
    horizon: usize,
    seed: u64,
    x0: Vec<usize>,
    observed: Vec<usize>,
    predicted: Vec<usize>,
}

impl PathSet {
    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn x0(&self, path: usize) -> usize {
        self.x0[path]
    }

    /// `ω_0..=ω_T` of one path.
    pub fn observed(&self, path: usize) -> &[usize] {
        let s = self.horizon + 1;
        &self.observed[path * s..(path + 1) * s]
    }

    /// `ω'_0..=ω'_T` of one path.
    pub fn predicted(&self, path: usize) -> &[usize] {
        let s = self.horizon + 1;
        &self.predicted[path * s..(path + 1) * s]
    }

    /// Joins consecutive path ranges sampled with the same configuration.
    pub fn concat(parts: Vec<PathSet>) -> Result<PathSet> {
        let mut iter = parts.into_iter();
        let mut out = iter
            .next()
            .ok_or_else(|| SscError::Argument("no path sets to join".into()))?;
        for p in iter {
            if (p.n_states, p.m, p.horizon, p.seed) != (out.n_states, out.m, out.horizon, out.seed) {
                return Err(SscError::Argument("path sets come from different configurations".into()));
            }
            out.x0.extend(p.x0);
            out.observed.extend(p.observed);
            out.predicted.extend(p.predicted);
        }
        Ok(out)
    }
}

fn draw(row: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    // round-off left u just above the cumulative total
    last
}

/// The RNG of path `index`.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn sample_paths(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    cfg: &SampleConfig,
) -> Result<PathSet> {
    sample_paths_range(sys, obs, triple, cfg, 0..cfg.n_paths)
}

/// Paths `range` of the set [`sample_paths`] would produce.
pub fn sample_paths_range(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    cfg: &SampleConfig,
    range: Range<usize>,
) -> Result<PathSet> {
    cfg.validate()?;
    if range.end > cfg.n_paths || range.start > range.end {
        return Err(SscError::Argument("path range outside 0..n_paths".into()));
    }
    let steps = cfg.horizon + 1;
    let count = range.len();
    let mut out = PathSet {
        n_states: sys.n(),
        m: obs.m(),
        horizon: cfg.horizon,
        seed: cfg.seed,
        x0: Vec::with_capacity(count),
        observed: Vec::with_capacity(count * steps),
        predicted: Vec::with_capacity(count * steps),
    };
    for index in range {
        let mut rng = path_rng(cfg.seed, index);
        let x0 = draw(sys.initial(), &mut rng);
        out.x0.push(x0);
        let mut x = x0;
        let mut y = draw(triple.pi().row(x0), &mut rng);
        for t in 0..steps {
            if t > 0 {
                x = draw(sys.transition().row(x), &mut rng);
                y = draw(triple.phi().row(y), &mut rng);
            }
            out.observed.push(draw(obs.channel().row(x), &mut rng));
            out.predicted.push(draw(triple.rho().row(y), &mut rng));
        }
    }
    Ok(out)
}

/// A sampled cost with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    /// Set when the estimate is `+∞` (a KL support mismatch in the sample).
    pub infinite: bool,
}

impl Estimate {
    /// `|value − exact| ≤ max(3·stderr, abs_tol)`; two infinite values agree.
    pub fn agrees_with(&self, exact: f64, abs_tol: f64) -> bool {
        if self.value.is_infinite() || exact.is_infinite() {
            return self.value == exact;
        }
        libm::fabs(self.value - exact) <= (3.0 * self.stderr).max(abs_tol)
    }
}

/// Options shared with the exact evaluator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostOptions {
    pub kind: AccuracyKind,
    pub kl_smoothing: f64,
    pub kl_negate: bool,
    pub estimator: Estimator,
}

impl CostOptions {
    pub fn new(kind: AccuracyKind) -> Self {
        CostOptions {
            kind,
            kl_smoothing: 0.0,
            kl_negate: false,
            estimator: Estimator::Plugin,
        }
    }

    pub fn from_objective(cfg: &ObjectiveConfig, estimator: Estimator) -> Self {
        CostOptions {
            kind: cfg.accuracy,
            kl_smoothing: cfg.kl_smoothing,
            kl_negate: cfg.kl_negate,
            estimator,
        }
    }
}

struct Sample<'a> {
    paths: &'a PathSet,
    w: &'a Weights,
    cost: Option<&'a Matrix>,
    opts: CostOptions,
}

/// Miller–Madow bias term of one entropy, in bits.
fn mm_term(table: &[f64], n: usize) -> f64 {
    let occupied = table.iter().filter(|&&v| v > 0.0).count();
    if occupied == 0 {
        return 0.0;
    }
    (occupied - 1) as f64 / (2.0 * n as f64 * core::f64::consts::LN_2)
}

impl Sample<'_> {
    fn m(&self) -> usize {
        self.paths.m
    }

    fn corrected(&self) -> bool {
        self.opts.estimator == Estimator::PluginMillerMadow
    }

    /// Empirical joint at time `t` (rows predicted, columns true), as counts.
    fn joint_counts(&self, idx: &[usize], t: usize) -> Matrix {
        let m = self.m();
        let mut j = Matrix::zeros(m, m);
        for &i in idx {
            j[(self.paths.predicted(i)[t], self.paths.observed(i)[t])] += 1.0;
        }
        j
    }

    fn mi(&self, joint: &Matrix, n: usize) -> f64 {
        let mut v = info::mutual_information(joint);
        if self.corrected() {
            v += mm_term(&joint.row_sums(), n) + mm_term(&joint.col_sums(), n) - mm_term(joint.as_slice(), n);
        }
        v
    }

    fn cond_ent(&self, joint: &Matrix, n: usize) -> f64 {
        let mut v = info::conditional_entropy_cols_given_rows(joint);
        if self.corrected() {
            v += mm_term(joint.as_slice(), n) - mm_term(&joint.row_sums(), n);
        }
        v
    }

    fn averaged_counts(&self, idx: &[usize]) -> Matrix {
        let m = self.m();
        let mut avg = Matrix::zeros(m, m);
        for (t, wt) in self.w.iter() {
            if wt != 0.0 {
                avg.add_scaled(wt, &self.joint_counts(idx, t));
            }
        }
        avg
    }

    /// Per-time, per-`x₀` mean cost; `None` when `x₀` was never drawn.
    fn expected_by_start(&self, idx: &[usize], cost: &Matrix, t: usize) -> Vec<Option<f64>> {
        let n = self.paths.n_states;
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        for &i in idx {
            let x0 = self.paths.x0(i);
            sum[x0] += cost[(self.paths.observed(i)[t], self.paths.predicted(i)[t])];
            count[x0] += 1;
        }
        sum.iter()
            .zip(&count)
            .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
            .collect()
    }

    fn kl_at(&self, idx: &[usize], t: usize) -> f64 {
        let n = self.paths.n_states;
        let m = self.m();
        let mut pred = vec![0.0; n * m];
        let mut truth = vec![0.0; n * m];
        let mut count = vec![0usize; n];
        for &i in idx {
            let x0 = self.paths.x0(i);
            pred[x0 * m + self.paths.predicted(i)[t]] += 1.0;
            truth[x0 * m + self.paths.observed(i)[t]] += 1.0;
            count[x0] += 1;
        }
        let eps = self.opts.kl_smoothing;
        let total = idx.len() as f64;
        let mut kl = 0.0;
        for x0 in 0..n {
            if count[x0] == 0 {
                continue;
            }
            let c = count[x0] as f64;
            let r: Vec<f64> = pred[x0 * m..(x0 + 1) * m].iter().map(|v| v / c).collect();
            let q: Vec<f64> = truth[x0 * m..(x0 + 1) * m].iter().map(|v| v / c).collect();
            let d = if eps > 0.0 {
                info::kl_divergence(&info::smooth(&r, eps), &info::smooth(&q, eps))
            } else {
                info::kl_divergence(&r, &q)
            };
            if d.is_infinite() {
                return f64::INFINITY;
            }
            kl += c / total * d;
        }
        kl
    }

    /// The configured cost evaluated on paths `idx` (indices may repeat).
    fn evaluate(&self, idx: &[usize]) -> Result<f64> {
        let n = idx.len();
        let weighted = |f: &mut dyn FnMut(usize) -> f64| {
            self.w
                .iter()
                .filter(|&(_, wt)| wt != 0.0)
                .map(|(t, wt)| wt * f(t))
                .sum::<f64>()
        };
        Ok(match self.opts.kind {
            AccuracyKind::Expected | AccuracyKind::ExpectedWorstCase => {
                let cost = self.cost.ok_or(SscError::MissingCostMatrix)?;
                let aggregate = if self.opts.kind == AccuracyKind::Expected {
                    Aggregate::Mean
                } else {
                    Aggregate::WorstCase
                };
                weighted(&mut |t| {
                    match aggregate {
                        Aggregate::Mean => {
                            let mut total = 0.0;
                            for &i in idx {
                                total += cost[(self.paths.observed(i)[t], self.paths.predicted(i)[t])];
                            }
                            total / n as f64
                        }
                        Aggregate::WorstCase => self
                            .expected_by_start(idx, cost, t)
                            .iter()
                            .flatten()
                            .fold(0.0f64, |a, &b| a.max(b)),
                    }
                })
            }
            AccuracyKind::AvgMi => -weighted(&mut |t| self.mi(&self.joint_counts(idx, t), n)),
            AccuracyKind::MiOfAvg => -self.mi(&self.averaged_counts(idx), n),
            AccuracyKind::CondEntropy => self.cond_ent(&self.averaged_counts(idx), n),
            AccuracyKind::Kl => {
                let mut any_inf = false;
                let v = weighted(&mut |t| {
                    let d = self.kl_at(idx, t);
                    any_inf |= d.is_infinite();
                    if d.is_infinite() {
                        0.0
                    } else {
                        d
                    }
                });
                let v = if any_inf { f64::INFINITY } else { v };
                if self.opts.kl_negate {
                    -v
                } else {
                    v
                }
            }
        })
    }

    /// Sample stdev of per-path metric costs over `√N`.
    fn path_mean_stderr(&self, cost: &Matrix) -> f64 {
        let n = self.paths.len();
        if n < 2 {
            return 0.0;
        }
        let per_path: Vec<f64> = (0..n)
            .map(|i| {
                let (obs, pred) = (self.paths.observed(i), self.paths.predicted(i));
                self.w.iter().map(|(t, wt)| wt * cost[(obs[t], pred[t])]).sum()
            })
            .collect();
        let mean = per_path.iter().sum::<f64>() / n as f64;
        let var = per_path.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        libm::sqrt(var / n as f64)
    }

    fn bootstrap_stderr(&self) -> Result<f64> {
        let n = self.paths.len();
        let mut rng = ChaCha8Rng::seed_from_u64(self.paths.seed);
        rng.set_stream(BOOTSTRAP_STREAM);
        let mut values = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        let mut idx = vec![0usize; n];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for slot in idx.iter_mut() {
                *slot = rng.random_range(0..n);
            }
            values.push(self.evaluate(&idx)?);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Ok(f64::INFINITY);
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
        Ok(libm::sqrt(var))
    }
}

/// Estimates one accuracy cost from sampled paths.
///
/// The mean expected cost uses the per-path standard error; every other cost uses a
/// bootstrap over paths seeded from the path-set seed. Miller–Madow correction
/// applies to the entropy-based costs only.
pub fn estimate_cost(paths: &PathSet, w: &Weights, cost: Option<&Matrix>, opts: CostOptions) -> Result<Estimate> {
    if paths.is_empty() {
        return Err(SscError::Argument("no sampled paths".into()));
    }
    if w.horizon() > paths.horizon {
        return Err(SscError::Argument(alloc::format!(
            "weight reaches t = {} but paths stop at t = {}",
            w.horizon(),
            paths.horizon
        )));
    }
    let sample = Sample { paths, w, cost, opts };
    let all: Vec<usize> = (0..paths.len()).collect();
    let value = sample.evaluate(&all)?;
    if value.is_infinite() {
        return Ok(Estimate {
            value,
            stderr: 0.0,
            infinite: true,
        });
    }
    let stderr = match opts.kind {
        AccuracyKind::Expected => sample.path_mean_stderr(cost.ok_or(SscError::MissingCostMatrix)?),
        _ => sample.bootstrap_stderr()?,
    };
    Ok(Estimate {
        value,
        stderr,
        infinite: false,
    })
}

/// Absolute slack of the agreement test between sampled and exact costs.
pub const CHECK_ABS_TOL: f64 = 0.02;

/// A sampled cost next to its exact value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McCheck {
    pub exact: f64,
    pub estimate: Estimate,
    /// `|estimate − exact| ≤ max(3·stderr, 0.02)`.
    pub pass: bool,
}

/// Samples `sample.n_paths` paths and compares the configured cost with the exact one.
pub fn check_against_exact(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    cfg: &ObjectiveConfig,
    sample: &SampleConfig,
) -> Result<McCheck> {
    let exact = crate::accuracy::accuracy_cost(sys, obs, triple, w, cfg)?;
    let paths = sample_paths(sys, obs, triple, sample)?;
    let estimate = estimate_cost(&paths, w, obs.cost_matrix(), CostOptions::from_objective(cfg, sample.estimator))?;
    Ok(McCheck {
        exact,
        estimate,
        pass: estimate.agrees_with(exact, CHECK_ABS_TOL),
    })
}
