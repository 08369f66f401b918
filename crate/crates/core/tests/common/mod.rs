//! Random small instances and a brute-force trajectory-enumeration oracle.
//!
//! The oracle shares no code with the library beyond the input types: it enumerates
//! every microstate path and every macrostate path, builds the joint of
//! `(x₀, ω'_t, ω_t)` cell by cell, and takes entropies with its own natural-log
//! routine.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssc_core::{CompressionTriple, MarkovSystem, Matrix, Observable, Weights};

pub struct Instance {
    pub sys: MarkovSystem,
    pub obs: Observable,
    pub triple: CompressionTriple,
    pub w: Weights,
}

/// Row-stochastic matrix; about a quarter of the entries are zero when `sparse`.
pub fn random_stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sparse: bool) -> Matrix {
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let mut row: Vec<f64> = (0..cols)
            .map(|_| {
                if sparse && rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random::<f64>() + 0.01
                }
            })
            .collect();
        if row.iter().all(|&v| v == 0.0) {
            row[rng.random_range(0..cols)] = 1.0;
        }
        let s: f64 = row.iter().sum();
        data.extend(row.into_iter().map(|v| v / s));
    }
    Matrix::from_row_major(rows, cols, data)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize, sparse: bool) -> Vec<f64> {
    random_stochastic(rng, 1, n, sparse).row(0).to_vec()
}

pub fn random_weights(rng: &mut ChaCha8Rng, horizon: usize) -> Weights {
    let start = usize::from(rng.random_bool(0.5)).min(horizon);
    let raw: Vec<f64> = (start..=horizon).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = raw.iter().sum();
    let mut pairs: Vec<(usize, f64)> = (start..=horizon).zip(raw.iter().map(|v| v / s)).collect();
    // force an exact unit sum
    let rest: f64 = pairs[1..].iter().map(|p| p.1).sum();
    pairs[0].1 = 1.0 - rest;
    Weights::from_pairs(pairs).unwrap()
}

pub fn random_system(rng: &mut ChaCha8Rng, n: usize, m: usize) -> (MarkovSystem, Observable) {
    let sparse = rng.random_bool(0.5);
    let sys = MarkovSystem::new(random_stochastic(rng, n, n, sparse), random_distribution(rng, n, sparse));
    let cost = Matrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { rng.random::<f64>() * 2.0 });
    let obs = Observable::new(random_stochastic(rng, n, m, sparse), Some(cost));
    (sys, obs)
}

/// `n ≤ n_max`, `m ≤ m_max`, `k ≤ k_max`, horizon `≤ t_max`, all at least 1 (`m`, `k` at least 2 when allowed).
pub fn random_instance(seed: u64, n_max: usize, m_max: usize, k_max: usize, t_max: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=n_max);
    let m = rng.random_range(2.min(m_max)..=m_max);
    let k = rng.random_range(1..=k_max);
    let horizon = rng.random_range(1..=t_max);
    let (sys, obs) = random_system(&mut rng, n, m);
    let sparse = rng.random_bool(0.5);
    let triple = CompressionTriple::new(
        random_stochastic(&mut rng, n, k, sparse),
        random_stochastic(&mut rng, k, k, sparse),
        random_stochastic(&mut rng, k, m, sparse),
    );
    let w = random_weights(&mut rng, horizon);
    Instance { sys, obs, triple, w }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entropy in bits via natural logs.
pub fn oracle_entropy(cells: &[f64]) -> f64 {
    let total: f64 = cells.iter().sum();
    cells
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| {
            let p = v / total;
            -p * p.ln()
        })
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// `joint[x₀][ω'][ω]` at time `t`, by enumerating all length-`t` paths.
pub fn oracle_joint(inst: &Instance, t: usize) -> Vec<Vec<Vec<f64>>> {
    let n = inst.sys.n();
    let m = inst.obs.m();
    let k = inst.triple.k();
    let p = inst.sys.transition();
    let mut out = vec![vec![vec![0.0; m]; m]; n];
    for (x0, row) in out.iter_mut().enumerate() {
        let p0 = inst.sys.initial()[x0];
        // distribution of x_t by enumerating (x₁..x_t)
        let mut x_end = vec![0.0; n];
        for code in 0..n.pow(t as u32) {
            let (mut prob, mut x, mut c) = (1.0, x0, code);
            for _ in 0..t {
                let next = c % n;
                c /= n;
                prob *= p[(x, next)];
                x = next;
            }
            x_end[x] += prob;
        }
        // distribution of y_t by enumerating (y₀..y_t)
        let mut y_end = vec![0.0; k];
        for code in 0..k.pow(t as u32 + 1) {
            let mut c = code;
            let mut y = c % k;
            c /= k;
            let mut prob = inst.triple.pi()[(x0, y)];
            for _ in 0..t {
                let next = c % k;
                c /= k;
                prob *= inst.triple.phi()[(y, next)];
                y = next;
            }
            y_end[y] += prob;
        }
        for (x, &px) in x_end.iter().enumerate() {
            for (y, &py) in y_end.iter().enumerate() {
                for (wp, cell) in row.iter_mut().enumerate() {
                    for (w, v) in cell.iter_mut().enumerate() {
                        *v += p0 * px * inst.obs.channel()[(x, w)] * py * inst.triple.rho()[(y, wp)];
                    }
                }
            }
        }
    }
    out
}

fn flatten_x0(j: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let m = j[0].len();
    let mut out = vec![vec![0.0; m]; m];
    for per in j {
        for (a, row) in per.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                out[a][b] += v;
            }
        }
    }
    out
}

fn mi(j: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = j.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..j[0].len()).map(|c| j.iter().map(|r| r[c]).sum()).collect();
    let cells: Vec<f64> = j.iter().flatten().copied().collect();
    oracle_entropy(&rows) + oracle_entropy(&cols) - oracle_entropy(&cells)
}

fn cond_ent(j: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = j.iter().map(|r| r.iter().sum()).collect();
    let cells: Vec<f64> = j.iter().flatten().copied().collect();
    oracle_entropy(&cells) - oracle_entropy(&rows)
}

fn oracle_kl(p: &[f64], q: &[f64]) -> f64 {
    let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b == 0.0 {
                return f64::INFINITY;
            }
            d += a / sp * ((a / sp) / (b / sq)).ln();
        }
    }
    d / std::f64::consts::LN_2
}

/// All six accuracy costs, in the order expected, expected-worst, avg-mi,
/// mi-of-avg, cond-ent, kl.
pub fn oracle_costs(inst: &Instance) -> [f64; 6] {
    let m = inst.obs.m();
    let cost = inst.obs.cost_matrix().unwrap();
    let (mut mean, mut worst, mut avg_mi, mut kl) = (0.0, 0.0, 0.0, 0.0);
    let mut avg = vec![vec![0.0; m]; m];
    let mut kl_inf = false;
    for (t, wt) in inst.w.iter() {
        if wt == 0.0 {
            continue;
        }
        let j = oracle_joint(inst, t);
        let mut worst_t = 0.0f64;
        let mut kl_t = 0.0;
        for (x0, per) in j.iter().enumerate() {
            let p0 = inst.sys.initial()[x0];
            if p0 == 0.0 {
                continue;
            }
            let mut c = 0.0;
            for (wp, row) in per.iter().enumerate() {
                for (w, v) in row.iter().enumerate() {
                    c += v * cost[(w, wp)];
                }
            }
            mean += wt * c;
            worst_t = worst_t.max(c / p0);
            let r: Vec<f64> = per.iter().map(|row| row.iter().sum()).collect();
            let q: Vec<f64> = (0..m).map(|w| per.iter().map(|row| row[w]).sum()).collect();
            let d = oracle_kl(&r, &q);
            if d.is_infinite() {
                kl_inf = true;
            } else {
                kl_t += p0 * d;
            }
        }
        worst += wt * worst_t;
        kl += wt * kl_t;
        let flat = flatten_x0(&j);
        avg_mi += wt * mi(&flat);
        for a in 0..m {
            for b in 0..m {
                avg[a][b] += wt * flat[a][b];
            }
        }
    }
    [
        mean,
        worst,
        -avg_mi,
        -mi(&avg),
        cond_ent(&avg),
        if kl_inf { f64::INFINITY } else { kl },
    ]
}

/// `I(Ω'_t; Ω_t)` from the oracle joint.
pub fn oracle_mi_at(inst: &Instance, t: usize) -> f64 {
    mi(&flatten_x0(&oracle_joint(inst, t)))
}

/// `H(Ω)` of the time-averaged true observable.
pub fn oracle_avg_true_entropy(inst: &Instance) -> f64 {
    let m = inst.obs.m();
    let mut marg = vec![0.0; m];
    for (t, wt) in inst.w.iter() {
        let flat = flatten_x0(&oracle_joint(inst, t));
        for row in &flat {
            for (w, v) in row.iter().enumerate() {
                marg[w] += wt * v;
            }
        }
    }
    oracle_entropy(&marg)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol
}
