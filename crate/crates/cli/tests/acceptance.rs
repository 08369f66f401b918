//! Exit criteria, one PASS/FAIL line each. Runs as a plain binary so every line
//! is printed; exits non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{close, oracle_avg_true_entropy, oracle_costs, random_distribution, random_instance, random_stochastic, random_system, rng};
use ssc_core::accuracy::{accuracy_cost, avg_mi_cost, cond_entropy_cost, expected_cost, kl_cost, mi_of_avg_cost, mi_per_time};
use ssc_core::computation::CompCostKind;
use ssc_core::corpus::{build_example, ExampleName};
use ssc_core::measures::{compression_complexity, micro_transfer_entropy, recompression_conditional_mi, ComplexityMode};
use ssc_core::model::identity_triple;
use ssc_core::montecarlo::{check_against_exact, SampleConfig};
use ssc_core::optimize::{anneal_optimize, exhaustive_optimize, induced_triple, lumpability_test, objective_k, InduceOptions};
use ssc_core::{
    AccuracyKind, Aggregate, CompCostModel, CompressionTriple, Matrix, ObjectiveConfig, OptimizerConfig, Partition,
    SearchMethod, WeightSpec, Weights,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Fails the criterion when it ran past `limit`.
fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    o.detail = format!("{} [{:.3} s]", o.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took >= limit {
            o.pass = false;
            o.detail = format!("{} exceeds {} s", o.detail, limit.as_secs_f64());
        }
    }
    o
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn swap_discrepancy() -> Outcome {
    let ex = build_example(ExampleName::Swap2);
    let w = WeightSpec::uniform(1, true).materialize().unwrap();
    let triple = ex.reference.unwrap();
    let avg = avg_mi_cost(&ex.system, &ex.observable, &triple, &w);
    let of_avg = mi_of_avg_cost(&ex.system, &ex.observable, &triple, &w);
    outcome(
        close(avg, -1.0, 1e-9) && close(of_avg, 0.0, 1e-9),
        format!("avg_mi = {:.3e}, mi_of_avg = {:.3e}", avg + 0.0, of_avg + 0.0),
    )
}

fn lumpability() -> Outcome {
    let ex = build_example(ExampleName::Lump4);
    let partition = Partition::from_assignment(vec![0, 0, 1, 1]);
    let lumpable = lumpability_test(&partition, &ex.system, 1e-12);
    let gamma = match ex.weight.kind {
        ssc_core::WeightKind::Geometric { gamma } => gamma,
        ssc_core::WeightKind::Uniform => unreachable!("LUMP4 ships a geometric weight"),
    };
    let (mut worst_kl, mut worst_ce) = (0.0f64, 0.0f64);
    for horizon in 1..=20 {
        let w = WeightSpec::geometric(gamma, horizon, ex.weight.include_t0).materialize().unwrap();
        let triple = induced_triple(&partition, &ex.system, &ex.observable, &w, InduceOptions::default()).unwrap();
        worst_kl = worst_kl.max(kl_cost(&ex.system, &ex.observable, &triple, &w, 0.0).abs());
        worst_ce = worst_ce.max(cond_entropy_cost(&ex.system, &ex.observable, &triple, &w).abs());
    }
    outcome(
        lumpable && worst_kl <= 1e-10 && worst_ce <= 1e-10,
        format!("lumpable = {lumpable}, max |kl| = {worst_kl:.3e}, max cond_ent = {worst_ce:.3e} over T = 1..20"),
    )
}

fn iid_noise() -> Outcome {
    let ex = build_example(ExampleName::Iid4);
    let w = ex.weight.materialize().unwrap();
    let model = CompCostModel::default();
    let opt = OptimizerConfig::new(SearchMethod::Exhaustive, ex.system.n());
    let id = identity_triple(&ex.system, &ex.observable);
    let mut failures = Vec::new();
    let grid = [0.01, 0.1, 1.0, 10.0, 100.0];
    for kappa in grid {
        for alpha in grid {
            let cfg = ObjectiveConfig::new(AccuracyKind::CondEntropy, kappa, alpha);
            let best = exhaustive_optimize(&ex.system, &ex.observable, &w, &cfg, &model, &opt).unwrap();
            let base = objective_k(&ex.system, &ex.observable, &id, &w, &cfg, &model).unwrap();
            let cx = compression_complexity(&ex.system, &ex.observable, &w, &cfg, &model, &opt, ComplexityMode::Normalized).unwrap();
            let ok = best.best_partition.num_blocks() == 1
                && close(best.accuracy_component, base.accuracy, 1e-9)
                && best.computation_component < base.computation
                && cx.value < 1.0;
            if !ok {
                failures.push(format!("κ={kappa} α={alpha}"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} of {} (κ, α) pairs satisfied; failing: {:?}", grid.len().pow(2) - failures.len(), grid.len().pow(2), failures),
    )
}

fn cylinder() -> Outcome {
    let ex = build_example(ExampleName::Cyl);
    let triple = ex.reference.unwrap();
    let mut worst = 0.0f64;
    for horizon in 1..=20 {
        for w in [Weights::point_mass(horizon), WeightSpec::uniform(horizon, true).materialize().unwrap()] {
            let c = expected_cost(&ex.system, &ex.observable, &triple, &w, Aggregate::Mean).unwrap();
            worst = worst.max(c.abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("n = {}, max expected cost = {worst:.3e} over horizons ≤ 20", ex.system.n()),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..200 {
        let inst = random_instance(20_000 + seed, 4, 3, 3, 3);
        let oracle = oracle_costs(&inst);
        for (kind, want) in AccuracyKind::ALL.into_iter().zip(oracle) {
            let cfg = ObjectiveConfig::new(kind, 1.0, 1.0);
            let got = accuracy_cost(&inst.sys, &inst.obs, &inst.triple, &inst.w, &cfg).unwrap();
            if !close(got, want, 1e-9) {
                bad.push(format!("seed {seed} {}", kind.name()));
            }
        }
    }
    outcome(bad.is_empty(), format!("200 instances × 6 costs, mismatches: {bad:?}"))
}

fn data_processing() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..200 {
        let inst = random_instance(30_000 + seed, 4, 3, 3, 3);
        let y_level = inst.triple.macrostate_level();
        for (t, _) in inst.w.iter() {
            let gap = mi_per_time(&inst.sys, &inst.obs, &inst.triple, t) - mi_per_time(&inst.sys, &inst.obs, &y_level, t);
            worst = worst.max(gap);
        }
    }
    outcome(worst <= 1e-10, format!("max I(Ω';Ω) − I(Y;Ω) = {worst:.3e}"))
}

/// Mixture of cyclic shifts: keeps the uniform macrostate law fixed.
fn doubly_stochastic(r: &mut rand_chacha::ChaCha8Rng, k: usize) -> Matrix {
    let mix = random_distribution(r, k, false);
    Matrix::from_fn(k, k, |a, b| mix[(b + k - a) % k])
}

fn noise_compression() -> Outcome {
    let (mut worst_cmi, mut worst_gap) = (0.0f64, 0.0f64);
    for seed in 0..50 {
        let mut r = rng(40_000 + seed);
        let n = 2 + (seed as usize % 5);
        let (sys, obs) = random_system(&mut r, n, 3);
        let k = 3;
        let triple = CompressionTriple::new(
            Matrix::from_fn(n, k, |_, _| 1.0 / k as f64),
            doubly_stochastic(&mut r, k),
            random_stochastic(&mut r, k, 3, false),
        );
        let w = WeightSpec::uniform(4, false).materialize().unwrap();
        for t in 1..=4 {
            worst_cmi = worst_cmi.max(recompression_conditional_mi(&sys, triple.pi(), t).unwrap().abs());
        }
        let inst = common::Instance { sys, obs, triple, w };
        let ce = cond_entropy_cost(&inst.sys, &inst.obs, &inst.triple, &inst.w);
        worst_gap = worst_gap.max((ce - oracle_avg_true_entropy(&inst)).abs());
    }
    outcome(
        worst_cmi <= 1e-10 && worst_gap <= 1e-9,
        format!("max |CMI| = {worst_cmi:.3e}, max |cond_ent − H(Ω)| = {worst_gap:.3e}"),
    )
}

fn transfer_entropy_null() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..50 {
        let inst = random_instance(50_000 + seed, 6, 3, 4, 1);
        for t in 0..5 {
            worst = worst.max(micro_transfer_entropy(&inst.sys, &inst.triple, t).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max |I(X_t+1; Y_t | X_t)| = {worst:.3e}"))
}

fn annealing_quality() -> Outcome {
    let model = CompCostModel::new(CompCostKind::Cardinality);
    let cfg = ObjectiveConfig::new(AccuracyKind::CondEntropy, 0.3, 1.0);
    let mut hits = 0;
    let mut misses = Vec::new();
    for seed in 0..50u64 {
        let mut r = rng(60_000 + seed);
        let n = 2 + (seed as usize % 7);
        let (sys, obs) = random_system(&mut r, n, 3);
        let w = common::random_weights(&mut r, 3);
        let ex = exhaustive_optimize(&sys, &obs, &w, &cfg, &model, &OptimizerConfig::new(SearchMethod::Exhaustive, n)).unwrap();
        let mut an_cfg = OptimizerConfig::new(SearchMethod::Anneal, n);
        an_cfg.seed = seed;
        let an = anneal_optimize(&sys, &obs, &w, &cfg, &model, &an_cfg).unwrap();
        if (an.k_value - ex.k_value).abs() <= 1e-9 {
            hits += 1;
        } else {
            misses.push(seed);
        }
    }
    outcome(hits * 100 >= 90 * 50, format!("{hits}/50 reach the exhaustive optimum; misses at seeds {misses:?}"))
}

fn monte_carlo() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for name in [ExampleName::Swap2, ExampleName::Iid4, ExampleName::Lump4] {
        let ex = build_example(name);
        let triple = ex.reference.clone().unwrap();
        let w = ex.weight.materialize().unwrap();
        for (i, kind) in AccuracyKind::ALL.into_iter().enumerate() {
            let cfg = ObjectiveConfig::new(kind, 1.0, 1.0);
            let sample = SampleConfig::new(100_000, w.horizon().max(1), 1_000 + i as u64);
            let c = check_against_exact(&ex.system, &ex.observable, &triple, &w, &cfg, &sample).unwrap();
            checked += 1;
            if !c.pass {
                bad.push(format!("{name} {}: exact {} est {} ± {}", kind.name(), c.exact, c.estimate.value, c.estimate.stderr));
            }
        }
    }
    outcome(bad.is_empty(), format!("{} of {checked} (example, cost) pairs agree; failing: {bad:?}", checked - bad.len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap().to_string();
    let ssc = |args: &[&str]| Command::new(env!("CARGO_BIN_EXE_ssc")).args(args).output().expect("binary runs");
    for name in ["RING8", "LUMP4", "SWAP2"] {
        assert!(ssc(&["example", name, "--out", &out]).status.success());
    }
    let file = |f: &str| dir.path().join(f).to_str().unwrap().to_string();
    let (ring, ring_t) = (file("ring8.system.json"), file("ring8.triple.json"));
    let (lump, lump_t) = (file("lump4.system.json"), file("lump4.triple.json"));
    let runs: Vec<Vec<String>> = [
        vec!["optimize", &ring, "--method", "anneal", "--seed", "3", "--iters", "5000"],
        vec!["eval", &lump, &lump_t, "--acc", "kl"],
        vec!["--format", "csv", "eval", &ring, &ring_t, "--acc", "cond-ent"],
        vec!["mc-check", &lump, &lump_t, "--acc", "cond-ent", "--paths", "20000", "--seed", "9", "--workers", "2"],
        vec!["complexity", &lump, "--acc", "cond-ent", "--kappa", "0.2"],
        vec!["pareto", &ring, "--acc", "cond-ent", "--alphas", "0.5,2,8", "--method", "anneal", "--iters", "2000"],
        vec!["infoflow", &ring, &ring_t, "--measure", "cond-ent"],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let mut differing = Vec::new();
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (a, b) = (ssc(&args), ssc(&args));
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            differing.push(args[..2].join(" "));
        }
    }
    outcome(differing.is_empty(), format!("{} commands run twice; unstable or failing: {differing:?}", runs.len()))
}

type Criterion = (&'static str, Option<Duration>, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("swap discrepancy", Some(Duration::from_secs(1)), swap_discrepancy),
        ("lumpability exactness", Some(Duration::from_secs(1)), lumpability),
        ("iid noise compressibility", secs(5), iid_noise),
        ("cylinder projection", Some(Duration::from_secs(1)), cylinder),
        ("oracle equivalence", secs(60), oracle_equivalence),
        ("data processing inequality", None, data_processing),
        ("noise compression critique", None, noise_compression),
        ("transfer entropy null", None, transfer_entropy_null),
        ("annealing quality", secs(120), annealing_quality),
        ("monte carlo consistency", secs(60), monte_carlo),
        ("cli determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let o = timed(limit, run);
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{failed} of 11 criteria failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
