mod common;

use ssc_core::corpus::{build_example, ExampleName};
use ssc_core::montecarlo::{
    check_against_exact, estimate_cost, sample_paths, CostOptions, Estimator, SampleConfig,
};
use ssc_core::{AccuracyKind, ObjectiveConfig};

fn horizon_of(w: &ssc_core::Weights) -> usize {
    w.horizon().max(1)
}

#[test]
fn corpus_estimates_agree_with_exact_values() {
    for name in [ExampleName::Swap2, ExampleName::Iid4, ExampleName::Lump4] {
        let ex = build_example(name);
        let triple = ex.reference.clone().unwrap();
        let w = ex.weight.materialize().unwrap();
        for (i, kind) in AccuracyKind::ALL.into_iter().enumerate() {
            let cfg = ObjectiveConfig::new(kind, 1.0, 1.0);
            let sample = SampleConfig::new(100_000, horizon_of(&w), 17 + i as u64);
            let c = check_against_exact(&ex.system, &ex.observable, &triple, &w, &cfg, &sample).unwrap();
            assert!(c.pass, "{name} {}: exact {} estimate {:?}", kind.name(), c.exact, c.estimate);
        }
    }
}

#[test]
fn random_small_systems_agree() {
    for seed in 0..6 {
        let inst = common::random_instance(40 + seed, 4, 3, 3, 3);
        for kind in AccuracyKind::ALL {
            let cfg = ObjectiveConfig::new(kind, 1.0, 1.0);
            let sample = SampleConfig::new(100_000, horizon_of(&inst.w), seed);
            let c = check_against_exact(&inst.sys, &inst.obs, &inst.triple, &inst.w, &cfg, &sample).unwrap();
            if c.exact.is_infinite() && !c.estimate.infinite {
                // a support mismatch of tiny mass can go unsampled
                continue;
            }
            assert!(c.pass, "seed {seed} {}: exact {} estimate {:?}", kind.name(), c.exact, c.estimate);
        }
    }
}

#[test]
fn identical_configuration_gives_identical_estimates() {
    let ex = build_example(ExampleName::Ring8);
    let triple = ex.reference.clone().unwrap();
    let w = ex.weight.materialize().unwrap();
    let sample = SampleConfig::new(5_000, w.horizon(), 99);
    let run = || {
        let paths = sample_paths(&ex.system, &ex.observable, &triple, &sample).unwrap();
        estimate_cost(&paths, &w, ex.observable.cost_matrix(), CostOptions::new(AccuracyKind::CondEntropy)).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
}

#[test]
fn swap2_expected_cost_is_one_half() {
    let ex = build_example(ExampleName::Swap2);
    let w = ex.weight.materialize().unwrap();
    let paths = sample_paths(&ex.system, &ex.observable, ex.reference.as_ref().unwrap(), &SampleConfig::new(100_000, 1, 5)).unwrap();
    let est = estimate_cost(&paths, &w, ex.observable.cost_matrix(), CostOptions::new(AccuracyKind::Expected)).unwrap();
    // ω'₀ = ω₀ always and ω'₁ ≠ ω₁ always: every path costs exactly 0.5
    assert_eq!(est.value, 0.5);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn miller_madow_reduces_independence_bias_on_iid4() {
    let ex = build_example(ExampleName::Iid4);
    let id = ssc_core::model::identity_triple(&ex.system, &ex.observable);
    let w = ex.weight.materialize().unwrap();
    let mut wins = 0;
    for seed in 0..20 {
        // ω'₁ = x₀ and ω₁ = x₁ are independent: the true MI is 0
        let paths = sample_paths(&ex.system, &ex.observable, &id, &SampleConfig::new(400, 1, seed)).unwrap();
        let mut opts = CostOptions::new(AccuracyKind::AvgMi);
        let plug = estimate_cost(&paths, &w, None, opts).unwrap().value;
        opts.estimator = Estimator::PluginMillerMadow;
        let mm = estimate_cost(&paths, &w, None, opts).unwrap().value;
        if mm.abs() < plug.abs() {
            wins += 1;
        }
    }
    assert!(wins > 10, "Miller–Madow closer in only {wins}/20 runs");
}
