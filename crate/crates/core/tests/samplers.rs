//! Samplers against independent laws: the exact CME density for SSA and the
//! exactly propagated one-leap Markov kernel of each tau method.

mod common;

use cme_core::analysis::{histogram_marginal, moments};
use cme_core::samplers::{parse_ensemble, write_ensemble};
use cme_core::*;

const C: f64 = 10.0;
const TOTAL: usize = 80;

/// Poisson pmf on `0..=n` with the tail beyond `n` folded into `n`.
fn capped_poisson(mean: f64, n: usize) -> Vec<f64> {
    let mut p = common::poisson_pmf(mean, n + 1);
    let head: f64 = p[..n].iter().sum();
    p[n] = (1.0 - head).max(0.0);
    p
}

/// One isomer channel on the law of x1 over `0..=80`, firing counts capped
/// at feasibility. `forward` is x1 -> x2.
fn channel(p: &[f64], forward: bool, h: f64) -> Vec<f64> {
    let mut q = vec![0.0; TOTAL + 1];
    for (x, &w) in p.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let n = if forward { x } else { TOTAL - x };
        for (k, pk) in capped_poisson(C * n as f64 * h, n).into_iter().enumerate() {
            let y = if forward { x - k } else { x + k };
            q[y] += w * pk;
        }
    }
    q
}

/// Joint tau-leap kernel: both counts drawn at x; an infeasible pair is
/// applied channel by channel with capped counts.
fn tau_leap_kernel(p: &[f64], tau: f64) -> Vec<f64> {
    let mut q = vec![0.0; TOTAL + 1];
    let range = |m: f64| (m + 12.0 * m.sqrt() + 30.0) as usize;
    for (x, &w) in p.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (m1, m2) = (C * x as f64 * tau, C * (TOTAL - x) as f64 * tau);
        let p1 = common::poisson_pmf(m1, range(m1));
        let p2 = common::poisson_pmf(m2, range(m2));
        for (k1, &a) in p1.iter().enumerate() {
            for (k2, &b) in p2.iter().enumerate() {
                let y = x as i64 - k1 as i64 + k2 as i64;
                let y = if (0..=TOTAL as i64).contains(&y) {
                    y as usize
                } else {
                    let x1 = x - k1.min(x);
                    x1 + k2.min(TOTAL - x1)
                };
                q[y] += w * a * b;
            }
        }
    }
    q
}

fn kernel_law(method: SamplerMethod, tau: f64, steps: usize, x1: usize) -> Vec<f64> {
    let mut p = vec![0.0; TOTAL + 1];
    p[x1] = 1.0;
    for _ in 0..steps {
        p = match method {
            SamplerMethod::TauLeap => tau_leap_kernel(&p, tau),
            // for two channels both block orders coincide with channel 2, then 1
            SamplerMethod::Accelerated | SamplerMethod::AcceleratedSplit => {
                channel(&channel(&p, false, tau), true, tau)
            }
            SamplerMethod::Symmetric => {
                let h = tau / 2.0;
                let p = channel(&channel(&p, false, h), true, h);
                channel(&channel(&p, true, h), false, h)
            }
            SamplerMethod::Ssa => unreachable!(),
        };
    }
    p
}

#[test]
fn tau_methods_match_their_exact_kernels() {
    let model = builtin_isomer().model;
    let space = StateSpace::for_model(&model).unwrap();
    for method in SamplerMethod::ALL.into_iter().filter(|m| m.needs_tau()) {
        for (tau, steps) in [(0.1, 20), (0.02, 50)] {
            let law = kernel_law(method, tau, steps, 60);
            let ens = run_ensemble(method, &model, &[60, 20], tau * steps as f64, Some(tau), 10_000, 5).unwrap();
            let m = histogram_marginal(&space, &ens.histogram, 0).unwrap();
            let tv = common::tv(&m, &law);
            let (mean, var) = moments(&m);
            let (lm, lv) = moments(&law);
            assert!(tv < 0.04, "{method} tau {tau}: TV {tv}");
            assert!((mean - lm).abs() < 4.0 * (lv / 1e4).sqrt() + 1e-9, "{method} tau {tau}: mean {mean} vs {lm}");
            assert!((var / lv - 1.0).abs() < 0.1, "{method} tau {tau}: var {var} vs {lv}");
        }
    }
}

#[test]
fn symmetric_kernel_moments_at_large_steps() {
    // the exactly propagated sampler chain: the symmetric leap fixes the
    // mean drift of the plain one but inflates its variance
    let acc = moments(&kernel_law(SamplerMethod::Accelerated, 0.1, 100, 40));
    let sym = moments(&kernel_law(SamplerMethod::Symmetric, 0.1, 100, 40));
    assert!((sym.0 - 40.0).abs() < (acc.0 - 40.0).abs());
    assert!((sym.1 - 20.0).abs() > (acc.1 - 20.0).abs());
}

#[test]
fn ssa_isomer_mean_is_forty() {
    let sc = builtin_isomer();
    let ens = run_ensemble(SamplerMethod::Ssa, &sc.model, &sc.initial.state, 10.0, None, 10_000, 1).unwrap();
    let (mean, _) = moments(&histogram_marginal(&ens.space(), &ens.histogram, 0).unwrap());
    assert!((mean - 40.0).abs() < 0.14, "{mean}");
}

#[test]
fn ssa_transient_matches_exact_density() {
    let model = builtin_isomer().model;
    let space = StateSpace::for_model(&model).unwrap();
    let exact = exact_solution(&model, &space, &[70, 10], 0.05).unwrap();
    let ens = run_ensemble(SamplerMethod::Ssa, &model, &[70, 10], 0.05, None, 20_000, 3).unwrap();
    let joint = analysis::histogram_to_joint(&space, &ens.histogram).unwrap();
    let tv = common::tv(&joint, exact.values());
    assert!(tv < 0.03, "{tv}");
}

#[test]
fn ensemble_file_round_trips_through_text() {
    let sc = builtin_schlogl();
    let ens = run_ensemble(SamplerMethod::TauLeap, &sc.model, &sc.initial.state, 0.2, Some(1e-3), 200, 4).unwrap();
    let parsed = parse_ensemble(&write_ensemble(&ens, "schlogl")).unwrap();
    assert_eq!(parsed.histogram, ens.histogram);
    assert_eq!(parsed.tau, Some(1e-3));
    assert_eq!(parsed.caps, vec![900]);
    assert_eq!(parsed.n_samples, 200);
}

#[test]
fn methods_under_one_seed_use_disjoint_streams() {
    let bases: Vec<u64> = SamplerMethod::ALL.iter().map(|m| m.stream_base()).collect();
    for w in bases.windows(2) {
        assert!(w[1] - w[0] >= 1 << 40);
    }
    // same seed, different methods, same law: the draws must still differ
    let model = builtin_isomer().model;
    let a = run_ensemble(SamplerMethod::Accelerated, &model, &[40, 40], 1.0, Some(0.01), 50, 2).unwrap();
    let b = run_ensemble(SamplerMethod::AcceleratedSplit, &model, &[40, 40], 1.0, Some(0.01), 50, 2).unwrap();
    assert_ne!(a.final_states, b.final_states);
}
