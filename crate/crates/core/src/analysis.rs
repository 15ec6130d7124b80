//! Marginals and distances between discrete distributions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::statespace::StateSpace;

/// Marginal of species `species` from joint weights over the state space
/// (densities or histogram counts), normalized to sum to one. Bin `k` holds
/// the probability of exactly `k` molecules.
pub fn marginal(space: &StateSpace, joint: &[f64], species: usize) -> Result<Vec<f64>> {
    if species >= space.dim() {
        return Err(Error::usage(format!(
            "species index {species} out of range (space has {})",
            space.dim()
        )));
    }
    if joint.len() != space.size() {
        return Err(Error::Dimension(format!(
            "joint has {} entries, space has {}",
            joint.len(),
            space.size()
        )));
    }
    let radix = space.caps()[species] as usize + 1;
    let stride = space.strides()[species];
    let mut out = vec![0.0; radix];
    for (idx, &w) in joint.iter().enumerate() {
        out[(idx / stride) % radix] += w;
    }
    normalize(&mut out);
    Ok(out)
}

/// Marginal from a histogram keyed by 1-based state index.
pub fn histogram_marginal(
    space: &StateSpace,
    histogram: &BTreeMap<usize, u64>,
    species: usize,
) -> Result<Vec<f64>> {
    marginal(space, &histogram_to_joint(space, histogram)?, species)
}

/// Dense joint weights from a 1-based histogram.
pub fn histogram_to_joint(space: &StateSpace, histogram: &BTreeMap<usize, u64>) -> Result<Vec<f64>> {
    let mut joint = vec![0.0; space.size()];
    for (&idx, &count) in histogram {
        if idx == 0 || idx > space.size() {
            return Err(Error::IndexOutOfRange {
                index: idx,
                size: space.size(),
            });
        }
        joint[idx - 1] += count as f64;
    }
    Ok(joint)
}

fn normalize(p: &mut [f64]) {
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|v| *v /= total);
    }
}

fn normalized(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    normalize(&mut v);
    v
}

/// `sum |p - q|` after normalizing both; shorter inputs are zero-padded.
pub fn l1_distance(p: &[f64], q: &[f64]) -> f64 {
    let (p, q) = (normalized(p), normalized(q));
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| (p.get(i).copied().unwrap_or(0.0) - q.get(i).copied().unwrap_or(0.0)).abs())
        .sum()
}

/// Total variation distance `0.5 * sum |p - q|`, in `[0, 1]`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    (0.5 * l1_distance(p, q)).clamp(0.0, 1.0)
}

/// Mean and variance of a distribution over `0, 1, 2, ...`.
pub fn moments(p: &[f64]) -> (f64, f64) {
    let p = normalized(p);
    let mean: f64 = p.iter().enumerate().map(|(k, &w)| k as f64 * w).sum();
    let var = p
        .iter()
        .enumerate()
        .map(|(k, &w)| (k as f64 - mean).powi(2) * w)
        .sum();
    (mean, var)
}

/// Centered moving average over `2 * half_width + 1` bins, truncated at
/// the ends. Sampled histograms on integer bins are rough enough that
/// single-bin noise passes any prominence threshold; smoothing before
/// [`prominent_modes`] removes it.
pub fn moving_average(p: &[f64], half_width: usize) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(p.len() + 1);
    prefix.push(0.0);
    for &v in p {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..p.len())
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(p.len());
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Local maxima whose prominence exceeds `min_prominence` times the global
/// peak. Returned as bin positions, ascending.
pub fn prominent_modes(p: &[f64], min_prominence: f64) -> Vec<usize> {
    let peak = p.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Vec::new();
    }
    let threshold = min_prominence * peak;
    let mut modes = Vec::new();
    for i in 0..p.len() {
        let left_ok = i == 0 || p[i] > p[i - 1];
        let right_ok = i + 1 == p.len() || p[i] >= p[i + 1];
        if !(left_ok && right_ok) || p[i] <= 0.0 {
            continue;
        }
        // prominence: height above the higher of the two minima reached
        // before meeting a taller point on either side
        let base = |range: &mut dyn Iterator<Item = usize>| {
            let mut low = p[i];
            for j in range {
                if p[j] > p[i] {
                    return Some(low);
                }
                low = low.min(p[j]);
            }
            None
        };
        let left = base(&mut (0..i).rev());
        let right = base(&mut (i + 1..p.len()));
        let reference = match (left, right) {
            (Some(l), Some(r)) => l.max(r),
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => 0.0,
        };
        if p[i] - reference > threshold {
            modes.push(i);
        }
    }
    modes
}
