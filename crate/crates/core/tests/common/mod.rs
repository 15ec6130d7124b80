//! Independent reference computations for the integration tests. Nothing
//! here goes through the crate's assembly or propagation code.

#![allow(dead_code)]

use cme_core::{PropensitySpec, ReactionModel, RngStream};

/// `ln C(n, k)`.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp())
        .collect()
}

pub fn poisson_pmf(mean: f64, len: usize) -> Vec<f64> {
    if mean == 0.0 {
        return (0..len).map(|k| f64::from(u8::from(k == 0))).collect();
    }
    (0..len)
        .map(|k| (-mean + k as f64 * mean.ln() - libm::lgamma(k as f64 + 1.0)).exp())
        .collect()
}

/// Normalized null vector of a dense generator (columns sum to zero) with a
/// one-dimensional kernel: solves `G p = 0, sum p = 1` by Gaussian
/// elimination with partial pivoting, the last equation replaced by the
/// normalization.
pub fn nullspace(g: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let mut m: Vec<Vec<f64>> = g.to_vec();
    let mut rhs = vec![0.0; n];
    m[n - 1] = vec![1.0; n];
    rhs[n - 1] = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-300, "singular system");
        for r in col + 1..n {
            let f = m[r][col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    x
}

/// Dense generator of a one-dimensional birth-death chain on `0..=cap`.
pub fn birth_death_generator(cap: usize, birth: impl Fn(usize) -> f64, death: impl Fn(usize) -> f64) -> Vec<Vec<f64>> {
    let n = cap + 1;
    let mut g = vec![vec![0.0; n]; n];
    for x in 0..n {
        if x < cap {
            g[x + 1][x] += birth(x);
            g[x][x] -= birth(x);
        }
        if x > 0 {
            g[x - 1][x] += death(x);
            g[x][x] -= death(x);
        }
    }
    g
}

/// Stationary law of a birth-death chain via detailed balance, in log space.
pub fn birth_death_stationary(cap: usize, birth: impl Fn(usize) -> f64, death: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut logp = vec![0.0; cap + 1];
    for x in 0..cap {
        logp[x + 1] = logp[x] + birth(x).ln() - death(x + 1).ln();
    }
    let top = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let p: Vec<f64> = logp.iter().map(|l| (l - top).exp()).collect();
    let s: f64 = p.iter().sum();
    p.into_iter().map(|v| v / s).collect()
}

/// Schlogl birth and death rates written out from the reaction scheme:
/// `2X -> 3X` (0.03), `3X -> 2X` (1e-4), `0 -> X` (200), `X -> 0` (3.5).
pub fn schlogl_birth(x: usize) -> f64 {
    let x = x as f64;
    0.03 * x * (x - 1.0) / 2.0 + 200.0
}

pub fn schlogl_death(x: usize) -> f64 {
    let x = x as f64;
    1e-4 * x * (x - 1.0) * (x - 2.0) / 6.0 + 3.5 * x
}

/// Local maxima of `p` (strict on the left), ascending.
pub fn local_maxima(p: &[f64], min_height: f64) -> Vec<usize> {
    (0..p.len())
        .filter(|&i| {
            p[i] >= min_height
                && (i == 0 || p[i] > p[i - 1])
                && (i + 1 == p.len() || p[i] >= p[i + 1])
        })
        .collect()
}

/// `exp(t G) v` by a truncated Taylor series on a dense matrix, with
/// `t G` scaled down by `2^s` and the result squared back up.
pub fn dense_expmv(g: &[Vec<f64>], v: &[f64], t: f64, terms: usize) -> Vec<f64> {
    let n = g.len();
    let norm = (0..n)
        .map(|j| (0..n).map(|i| g[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * t;
    let mut s = 0;
    while norm / f64::powi(2.0, s) > 0.5 {
        s += 1;
    }
    let h = t / f64::powi(2.0, s);
    let mut e = vec![vec![0.0; n]; n];
    let mut term: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for k in 0..terms {
        for i in 0..n {
            for j in 0..n {
                e[i][j] += term[i][j];
            }
        }
        term = matmul(g, &term).into_iter().map(|row| row.into_iter().map(|x| x * h / (k + 1) as f64).collect()).collect();
    }
    for _ in 0..s {
        e = matmul(&e, &e);
    }
    (0..n).map(|i| (0..n).map(|j| e[i][j] * v[j]).sum()).collect()
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Two species, four channels: inflow of A, conversion A -> B, decay of B
/// and of A. The channels' frozen operators do not commute on the box.
pub fn noncommuting_toy() -> ReactionModel {
    ReactionModel::new(
        vec!["A".into(), "B".into()],
        vec![10, 10],
        vec![vec![1, 0], vec![-1, 1], vec![0, -1], vec![-1, 0]],
        vec![
            PropensitySpec::constant(2.0),
            PropensitySpec::new(1.0, vec![(0, 1)]),
            PropensitySpec::new(0.5, vec![(1, 1)]),
            PropensitySpec::new(0.3, vec![(0, 1)]),
        ],
    )
    .unwrap()
}

/// Total variation between two weight vectors, normalizing both.
pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    let n = p.len().max(q.len());
    0.5 * (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) / sp - q.get(i).copied().unwrap_or(0.0) / sq).abs())
        .sum::<f64>()
}

/// Histogram of `n` i.i.d. draws from `p` by inverse CDF.
pub fn iid_histogram(p: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &w in p {
        acc += w / total;
        cdf.push(acc);
    }
    let mut rng = RngStream::new(seed, u64::MAX);
    let mut h = vec![0.0; p.len()];
    for _ in 0..n {
        let u = rng.uniform();
        let k = cdf.partition_point(|&c| c <= u).min(p.len() - 1);
        h[k] += 1.0;
    }
    h
}
