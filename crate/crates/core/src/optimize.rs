//! The scalarized objective and the search over hard-partition compressions.
//!
//! The search space is the class of *induced* triples: `π` is the indicator of a
//! partition of the microstates, `φ` aggregates `P` over blocks under a reference
//! distribution on microstates, and `ρ` predicts the observable from the block.
//! Optima reported here are optima over that class only.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accuracy::accuracy_breakdown;
use crate::computation::{computation_cost, CompCostModel};
use crate::error::SscError;
use crate::matrix::Matrix;
use crate::model::{CompressionTriple, MarkovSystem, ObjectiveConfig, Observable, Weights};
use crate::partition::{enumerate_partitions, Partition};
use crate::Result;

/// Value of `K = κ·C + α·E` and its two components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Objective {
    pub k: f64,
    pub accuracy: f64,
    pub computation: f64,
}

impl Objective {
    /// Combines components; a zero coefficient contributes exactly zero, even
    /// against an infinite component.
    pub fn combine(kappa: f64, alpha: f64, computation: f64, accuracy: f64) -> Self {
        let term = |c: f64, v: f64| if c == 0.0 { 0.0 } else { c * v };
        Objective {
            k: term(kappa, computation) + term(alpha, accuracy),
            accuracy,
            computation,
        }
    }
}

/// `K(π, φ, ρ) = κ·C(π, φ, ρ) + α·E(π, φ, ρ)` for the configured cost functions.
pub fn objective_k(
    sys: &MarkovSystem,
    obs: &Observable,
    triple: &CompressionTriple,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
) -> Result<Objective> {
    cfg.validate()?;
    let accuracy = accuracy_breakdown(sys, obs, triple, w, cfg)?.value;
    let computation = computation_cost(model, sys, triple, w);
    Ok(Objective::combine(cfg.kappa, cfg.alpha, computation, accuracy))
}

/// Distribution over microstates used to weight states within a block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RefDist {
    /// `Σ_t W(t) (p₀ᵀ Pᵗ)(x)`.
    #[default]
    WAveragedOccupancy,
    Stationary,
    Uniform,
}

impl RefDist {
    pub fn name(self) -> &'static str {
        match self {
            RefDist::WAveragedOccupancy => "w_averaged_occupancy",
            RefDist::Stationary => "stationary",
            RefDist::Uniform => "uniform",
        }
    }
}

/// How `ρ` is built for each block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RhoMode {
    /// Reference-weighted `P(ω | block)`.
    #[default]
    Bayes,
    /// One-hot on the prediction minimizing expected `C` under `P(ω | block)`;
    /// ties go to the lowest index. Needs a cost matrix.
    ArgminCost,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InduceOptions {
    pub ref_dist: RefDist,
    pub rho: RhoMode,
}

/// The microstate distribution selected by `ref_dist`.
pub fn reference_distribution(sys: &MarkovSystem, w: &Weights, ref_dist: RefDist) -> Vec<f64> {
    let n = sys.n();
    match ref_dist {
        RefDist::Uniform => vec![1.0 / n as f64; n],
        RefDist::Stationary => stationary_distribution(sys),
        RefDist::WAveragedOccupancy => {
            let mut acc = vec![0.0; n];
            let mut dist = sys.initial().to_vec();
            let mut t = 0;
            for (ts, wt) in w.iter() {
                while t < ts {
                    dist = sys.transition().left_mul(&dist);
                    t += 1;
                }
                for (a, d) in acc.iter_mut().zip(&dist) {
                    *a += wt * d;
                }
            }
            acc
        }
    }
}

/// Stationary distribution of `P`.
///
/// Solved directly when it is unique. For chains with several closed classes the
/// system is singular and the Cesàro average of `p₀ Pᵗ` over 10 000 steps is used,
/// which picks the stationary law reached from `p₀`.
pub fn stationary_distribution(sys: &MarkovSystem) -> Vec<f64> {
    let n = sys.n();
    // (Pᵀ − I) s = 0 with the last equation replaced by Σ s = 1
    let mut a = Matrix::from_fn(n, n, |r, c| {
        if r == n - 1 {
            1.0
        } else {
            sys.transition()[(c, r)] - if r == c { 1.0 } else { 0.0 }
        }
    });
    let mut b = vec![0.0; n];
    b[n - 1] = 1.0;
    if let Some(mut s) = solve(&mut a, &mut b) {
        if s.iter().all(|v| *v > -1e-9) {
            s.iter_mut().for_each(|v| *v = v.max(0.0));
            let total: f64 = s.iter().sum();
            s.iter_mut().for_each(|v| *v /= total);
            return s;
        }
    }
    const STEPS: usize = 10_000;
    let mut acc = vec![0.0; n];
    let mut dist = sys.initial().to_vec();
    for _ in 0..STEPS {
        for (a, d) in acc.iter_mut().zip(&dist) {
            *a += d / STEPS as f64;
        }
        dist = sys.transition().left_mul(&dist);
    }
    acc
}

/// Gaussian elimination with partial pivoting; `None` if numerically singular.
fn solve(a: &mut Matrix, b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| libm::fabs(a[(i, col)]).total_cmp(&libm::fabs(a[(j, col)])))?;
        if libm::fabs(a[(pivot, col)]) < 1e-12 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot, c)];
                a[(pivot, c)] = tmp;
            }
            b.swap(col, pivot);
        }
        for r in col + 1..n {
            let f = a[(r, col)] / a[(col, col)];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[(r, c)] -= f * a[(col, c)];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[(r, c)] * x[c]).sum();
        x[r] = (b[r] - s) / a[(r, r)];
    }
    Some(x)
}

fn normalize_rows(m: &mut Matrix) {
    for r in 0..m.rows() {
        let row = m.row_mut(r);
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
}

/// Builds the induced triple of `partition` given per-microstate reference weights.
pub fn induced_triple_from_reference(
    partition: &Partition,
    sys: &MarkovSystem,
    obs: &Observable,
    reference: &[f64],
    rho_mode: RhoMode,
) -> Result<CompressionTriple> {
    let n = sys.n();
    if partition.len() != n {
        return Err(SscError::Argument(format!(
            "partition covers {} states, system has {n}",
            partition.len()
        )));
    }
    let cost = match rho_mode {
        RhoMode::Bayes => None,
        RhoMode::ArgminCost => Some(obs.cost_matrix().ok_or(SscError::MissingCostMatrix)?),
    };
    let k = partition.num_blocks();
    let m = obs.m();
    let blocks = partition.blocks();

    // within-block weights, uniform where the block carries no reference mass
    let mut within = vec![0.0; n];
    for members in &blocks {
        let mass: f64 = members.iter().map(|&x| reference[x]).sum();
        for &x in members {
            within[x] = if mass > 0.0 {
                reference[x] / mass
            } else {
                1.0 / members.len() as f64
            };
        }
    }

    let pi = Matrix::from_fn(n, k, |x, b| if partition.block_of(x) == b { 1.0 } else { 0.0 });
    let mut phi = Matrix::zeros(k, k);
    let mut rho = Matrix::zeros(k, m);
    for (b, members) in blocks.iter().enumerate() {
        for &x in members {
            let wx = within[x];
            if wx == 0.0 {
                continue;
            }
            for (x2, &p) in sys.transition().row(x).iter().enumerate() {
                phi[(b, partition.block_of(x2))] += wx * p;
            }
            for (w, &o) in obs.channel().row(x).iter().enumerate() {
                rho[(b, w)] += wx * o;
            }
        }
    }
    normalize_rows(&mut phi);
    normalize_rows(&mut rho);

    if let Some(cost) = cost {
        for b in 0..k {
            let posterior = rho.row(b).to_vec();
            let expected = |pred: usize| -> f64 { posterior.iter().enumerate().map(|(w, p)| p * cost[(w, pred)]).sum() };
            let mut best = 0;
            let mut best_cost = expected(0);
            for pred in 1..m {
                let c = expected(pred);
                if c < best_cost {
                    best = pred;
                    best_cost = c;
                }
            }
            rho.row_mut(b).iter_mut().enumerate().for_each(|(w, v)| *v = if w == best { 1.0 } else { 0.0 });
        }
    }
    Ok(CompressionTriple::new(pi, phi, rho))
}

/// The triple induced by a hard partition:
/// `π` is the block indicator,
/// `φ(b'|b) = Σ_{x∈b} w(x) Σ_{x'∈b'} P(x'|x) / Σ_{x∈b} w(x)`,
/// and `ρ(·|b)` follows `opts.rho`, with `w` the reference distribution.
pub fn induced_triple(
    partition: &Partition,
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    opts: InduceOptions,
) -> Result<CompressionTriple> {
    let reference = reference_distribution(sys, w, opts.ref_dist);
    induced_triple_from_reference(partition, sys, obs, &reference, opts.rho)
}

/// Strong lumpability: every state of a block sends the same mass to every block.
pub fn lumpability_test(partition: &Partition, sys: &MarkovSystem, tol: f64) -> bool {
    let k = partition.num_blocks();
    let aggregated = |x: usize| {
        let mut out = vec![0.0; k];
        for (x2, &p) in sys.transition().row(x).iter().enumerate() {
            out[partition.block_of(x2)] += p;
        }
        out
    };
    partition.blocks().iter().all(|members| {
        let first = aggregated(members[0]);
        members[1..].iter().all(|&x| {
            aggregated(x)
                .iter()
                .zip(&first)
                .all(|(a, b)| libm::fabs(a - b) <= tol)
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    Anneal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub method: SearchMethod,
    /// Largest number of blocks a candidate partition may use.
    pub k_max: usize,
    pub anneal_iters: usize,
    /// Initial annealing temperature.
    pub t0: f64,
    /// Geometric cooling factor per iteration.
    pub cooling: f64,
    pub seed: u64,
    pub induce: InduceOptions,
    /// Keep the `(iteration, current K)` trace of the annealing chain.
    pub record_trace: bool,
}

impl OptimizerConfig {
    pub fn new(method: SearchMethod, k_max: usize) -> Self {
        OptimizerConfig {
            method,
            k_max,
            anneal_iters: 20_000,
            t0: 1.0,
            cooling: 0.995,
            seed: 0,
            induce: InduceOptions::default(),
            record_trace: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k_max < 1 || self.k_max > n {
            return Err(SscError::Config(format!("k_max must lie in 1..={n}, got {}", self.k_max)));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(SscError::Config(format!("cooling must lie in (0, 1), got {}", self.cooling)));
        }
        if self.anneal_iters < 1 {
            return Err(SscError::Config("anneal_iters must be at least 1".into()));
        }
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(SscError::Config("initial temperature must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub best_triple: CompressionTriple,
    pub best_partition: Partition,
    pub k_value: f64,
    pub accuracy_component: f64,
    pub computation_component: f64,
    /// Distinct partitions whose objective was computed.
    pub evaluations: usize,
    pub trace: Option<Vec<(usize, f64)>>,
}

/// Evaluates induced triples of partitions for one fixed problem.
struct PartitionObjective<'a> {
    sys: &'a MarkovSystem,
    obs: &'a Observable,
    w: &'a Weights,
    cfg: &'a ObjectiveConfig,
    model: &'a CompCostModel,
    reference: Vec<f64>,
    rho: RhoMode,
    cache: BTreeMap<Vec<usize>, Objective>,
}

impl<'a> PartitionObjective<'a> {
    fn new(
        sys: &'a MarkovSystem,
        obs: &'a Observable,
        w: &'a Weights,
        cfg: &'a ObjectiveConfig,
        model: &'a CompCostModel,
        induce: InduceOptions,
    ) -> Result<Self> {
        cfg.validate()?;
        if cfg.accuracy.needs_cost_matrix() && obs.cost_matrix().is_none() {
            return Err(SscError::MissingCostMatrix);
        }
        if induce.rho == RhoMode::ArgminCost && obs.cost_matrix().is_none() {
            return Err(SscError::MissingCostMatrix);
        }
        Ok(PartitionObjective {
            sys,
            obs,
            w,
            cfg,
            model,
            reference: reference_distribution(sys, w, induce.ref_dist),
            rho: induce.rho,
            cache: BTreeMap::new(),
        })
    }

    fn triple(&self, p: &Partition) -> Result<CompressionTriple> {
        induced_triple_from_reference(p, self.sys, self.obs, &self.reference, self.rho)
    }

    fn evaluate(&mut self, p: &Partition) -> Result<Objective> {
        if let Some(o) = self.cache.get(p.assignment()) {
            return Ok(*o);
        }
        let triple = self.triple(p)?;
        let o = objective_k(self.sys, self.obs, &triple, self.w, self.cfg, self.model)?;
        self.cache.insert(p.assignment().to_vec(), o);
        Ok(o)
    }

    fn finish(self, best: Partition, o: Objective, trace: Option<Vec<(usize, f64)>>) -> Result<OptimizationResult> {
        Ok(OptimizationResult {
            best_triple: self.triple(&best)?,
            best_partition: best,
            k_value: o.k,
            accuracy_component: o.accuracy,
            computation_component: o.computation,
            evaluations: self.cache.len(),
            trace,
        })
    }
}

/// Global minimum of `K` over all partitions with at most `k_max` blocks.
/// Ties go to the first partition in restricted-growth order.
pub fn exhaustive_optimize(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
    opt: &OptimizerConfig,
) -> Result<OptimizationResult> {
    opt.validate(sys.n())?;
    let partitions = enumerate_partitions(sys.n(), opt.k_max)?;
    let mut eval = PartitionObjective::new(sys, obs, w, cfg, model, opt.induce)?;
    let mut best: Option<(Partition, Objective)> = None;
    for p in partitions {
        let o = eval.evaluate(&p)?;
        let better = match &best {
            None => true,
            Some((_, b)) => o.k < b.k,
        };
        if better {
            best = Some((p, o));
        }
    }
    let (p, o) = best.expect("at least one partition");
    eval.finish(p, o, None)
}

/// Simulated annealing over partitions with at most `k_max` blocks.
///
/// Starts from `x ↦ min(x, k_max − 1)` (the identity partition when `k_max = n`).
/// Each later iteration relocates one uniformly chosen state to a uniformly chosen
/// block, or to a fresh block while fewer than `k_max` are in use, and accepts with
/// probability `min(1, exp(−ΔK / T))`, `T = t0·coolingⁱ`. Returns the best partition
/// evaluated; ties keep the earlier one.
pub fn anneal_optimize(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
    opt: &OptimizerConfig,
) -> Result<OptimizationResult> {
    let n = sys.n();
    opt.validate(n)?;
    let mut eval = PartitionObjective::new(sys, obs, w, cfg, model, opt.induce)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);

    let mut current = Partition::from_assignment((0..n).map(|x| x.min(opt.k_max - 1)).collect());
    let mut current_k = eval.evaluate(&current)?.k;
    let mut best = (current.clone(), eval.evaluate(&current)?);
    let mut trace = opt.record_trace.then(|| vec![(0, current_k)]);

    let mut temperature = opt.t0;
    for iter in 1..opt.anneal_iters {
        temperature *= opt.cooling;
        let state = rng.random_range(0..n);
        let blocks = current.num_blocks();
        let choices = if blocks < opt.k_max { blocks + 1 } else { blocks };
        let target = rng.random_range(0..choices);
        let u: f64 = rng.random();

        if target != current.block_of(state) {
            let mut assignment = current.assignment().to_vec();
            assignment[state] = target;
            let candidate = Partition::from_assignment(assignment);
            let o = eval.evaluate(&candidate)?;
            if o.k < best.1.k {
                best = (candidate.clone(), o);
            }
            let mut delta = o.k - current_k;
            if delta.is_nan() {
                delta = 0.0;
            }
            if delta <= 0.0 || u < libm::exp(-delta / temperature) {
                current = candidate;
                current_k = o.k;
            }
        }
        if let Some(tr) = trace.as_mut() {
            tr.push((iter, current_k));
        }
    }
    let (p, o) = best;
    eval.finish(p, o, trace)
}

/// Runs the method selected in `opt`.
pub fn optimize(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg: &ObjectiveConfig,
    model: &CompCostModel,
    opt: &OptimizerConfig,
) -> Result<OptimizationResult> {
    match opt.method {
        SearchMethod::Exhaustive => exhaustive_optimize(sys, obs, w, cfg, model, opt),
        SearchMethod::Anneal => anneal_optimize(sys, obs, w, cfg, model, opt),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParetoPoint {
    pub alpha: f64,
    pub result: OptimizationResult,
    /// No other point has both components `≤` and one `<`.
    pub non_dominated: bool,
}

/// Optimizes once per `α` with `κ = 1` and marks the non-dominated
/// `(computation, accuracy)` pairs.
pub fn pareto_sweep(
    sys: &MarkovSystem,
    obs: &Observable,
    w: &Weights,
    cfg_base: &ObjectiveConfig,
    model: &CompCostModel,
    alphas: &[f64],
    opt: &OptimizerConfig,
) -> Result<Vec<ParetoPoint>> {
    if alphas.is_empty() {
        return Err(SscError::Argument("pareto sweep needs at least one alpha".into()));
    }
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let cfg = ObjectiveConfig {
            kappa: 1.0,
            alpha,
            ..*cfg_base
        };
        let result = optimize(sys, obs, w, &cfg, model, opt)?;
        points.push(ParetoPoint {
            alpha,
            result,
            non_dominated: true,
        });
    }
    let pairs: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.result.computation_component, p.result.accuracy_component))
        .collect();
    for (i, p) in points.iter_mut().enumerate() {
        let (ci, ai) = pairs[i];
        p.non_dominated = !pairs
            .iter()
            .any(|&(c, a)| c <= ci && a <= ai && (c < ci || a < ai));
    }
    Ok(points)
}
