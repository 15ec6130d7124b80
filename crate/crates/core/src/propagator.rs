//! Probability-density evolution: exact `exp(tA) p` by uniformization and
//! the product-of-exponentials approximations built on frozen, column and
//! per-reaction splittings of the generator.
//!
//! Operator products are applied right to left, so in
//! `exp(tau Abar_0) exp(tau Abar_1) ... exp(tau Abar_M)` the last factor
//! acts on the vector first.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::ReactionModel;
use crate::operator::{
    assemble_frozen, assemble_generator, assemble_reaction_generators, Generator,
};
use crate::statespace::StateSpace;

/// Truncation tolerance for the Poisson weights of one uniformization step.
pub const UNIFORMIZATION_TOL: f64 = 1e-13;
/// Largest `lambda * t` handled in a single uniformization step.
pub const MAX_STEP_RATE: f64 = 500.0;
/// Negative components at or above this are clamped to zero.
pub const CLAMP_TOL: f64 = -1e-12;

/// Dense probability vector over a state space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    values: Vec<f64>,
    mass: f64,
    /// Total magnitude of negative rounding noise clamped away so far.
    pub clamped_mass: f64,
}

impl ProbabilityVector {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let mut p = Self {
            values,
            mass: 0.0,
            clamped_mass: 0.0,
        };
        p.clamp()?;
        Ok(p)
    }

    /// Unit mass on the 0-based index `idx`.
    pub fn delta(size: usize, idx: usize) -> Self {
        let mut values = vec![0.0; size];
        values[idx] = 1.0;
        Self {
            values,
            mass: 1.0,
            clamped_mass: 0.0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// 0-based index of the largest entry (lowest index on ties).
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self.mass *= factor;
    }

    fn clamp(&mut self) -> Result<()> {
        let mut mass = 0.0;
        for (i, v) in self.values.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < CLAMP_TOL || v.is_nan() {
                    return Err(Error::NegativeProbability { index: i, value: *v });
                }
                self.clamped_mass -= *v;
                *v = 0.0;
            } else if v.is_nan() {
                return Err(Error::NegativeProbability { index: i, value: *v });
            }
            mass += *v;
        }
        self.mass = mass;
        Ok(())
    }

    pub fn l1_distance(&self, other: &ProbabilityVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Substep length `tau` repeated `n` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub tau: f64,
    pub n: usize,
}

impl StepPlan {
    pub fn new(tau: f64, n: usize) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::usage(format!("step length must be positive, got {tau}")));
        }
        if n == 0 {
            return Err(Error::usage("step plan needs at least one substep"));
        }
        Ok(Self { tau, n })
    }

    /// `n` equal substeps covering `horizon`.
    pub fn with_steps(horizon: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("step plan needs at least one substep"));
        }
        Self::new(horizon / n as f64, n)
    }

    /// Substeps of (approximately) `tau` covering `horizon`; `horizon / tau`
    /// must be an integer to within 1e-9 relative.
    pub fn with_tau(horizon: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::usage(format!("step length must be positive, got {tau}")));
        }
        let ratio = horizon / tau;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
            return Err(Error::usage(format!(
                "horizon {horizon} is not a whole number of steps of {tau}"
            )));
        }
        Self::with_steps(horizon, n as usize)
    }

    pub fn horizon(&self) -> f64 {
        self.tau * self.n as f64
    }
}

/// Poisson(`rate`) weights `w_0..=w_K` with the tail past `K` below
/// [`UNIFORMIZATION_TOL`], renormalized to sum to one.
fn poisson_weights(rate: f64) -> Vec<f64> {
    let ln_rate = rate.ln();
    let mut log_w = -rate;
    let mut weights = vec![log_w.exp()];
    let mut k = 0usize;
    loop {
        k += 1;
        log_w += ln_rate - (k as f64).ln();
        let w = log_w.exp();
        weights.push(w);
        let kf = (k + 1) as f64;
        // past the mode the ratio w_{k+1}/w_k < rate/(k+1), a geometric bound
        if kf > rate && w * kf / (kf - rate) < UNIFORMIZATION_TOL {
            break;
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    weights
}

/// Returns `exp(t A) p` for a sub-generator `A` (nonnegative off-diagonals,
/// column sums at most zero).
///
/// With `lambda = max_j -A_jj` and `P = I + A / lambda`,
/// `exp(tA) = sum_k Pois(k; lambda t) P^k`. `P` is nonnegative, so the
/// result is too; for a proper generator `P` is column-stochastic and mass
/// is kept. Intervals with `lambda t > 500` are split into equal substeps.
pub fn expmv(a: &Generator, p: &ProbabilityVector, t: f64) -> Result<ProbabilityVector> {
    if a.dim() != p.len() {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, vector has {} entries",
            a.dim(),
            a.dim(),
            p.len()
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::usage(format!("time must be nonnegative, got {t}")));
    }
    a.check_subgenerator()?;
    let lambda = a.max_exit_rate();
    if t == 0.0 || lambda == 0.0 {
        return Ok(p.clone());
    }
    if a.is_diagonal() {
        let values = (0..a.dim())
            .map(|j| p.values[j] * (t * a.diagonal(j)).exp())
            .collect();
        let mut out = ProbabilityVector {
            values,
            mass: 0.0,
            clamped_mass: p.clamped_mass,
        };
        out.clamp()?;
        return Ok(out);
    }
    let substeps = (lambda * t / MAX_STEP_RATE).ceil().max(1.0) as usize;
    let rate = lambda * t / substeps as f64;
    let weights = poisson_weights(rate);
    let transition = a.scaled(1.0 / lambda).shifted(1.0);

    let q = a.dim();
    let mut current = p.values.clone();
    let mut power = vec![0.0; q];
    let mut next = vec![0.0; q];
    let mut acc = vec![0.0; q];
    for _ in 0..substeps {
        power.copy_from_slice(&current);
        acc.iter_mut()
            .zip(&power)
            .for_each(|(s, &v)| *s = weights[0] * v);
        for &w in &weights[1..] {
            transition.apply(&power, &mut next);
            std::mem::swap(&mut power, &mut next);
            acc.iter_mut().zip(&power).for_each(|(s, &v)| *s += w * v);
        }
        std::mem::swap(&mut current, &mut acc);
    }
    let mut out = ProbabilityVector {
        values: current,
        mass: 0.0,
        clamped_mass: p.clamped_mass,
    };
    out.clamp()?;
    Ok(out)
}

/// `exp(t M) p` for `M` with nonnegative off-diagonals and arbitrary
/// column sums. Writes `M = G + c I` with `c` the largest column sum, so `G`
/// is a sub-generator with at least one conservative column, and returns
/// `exp(t G) p` along with the deferred log-scale `t c`. Keeping `t c` out
/// of the vector avoids underflow for strongly leaking factors such as
/// `exp(tau Abar_0)`.
fn expmv_shifted(m: &Generator, p: &ProbabilityVector, t: f64) -> Result<(ProbabilityVector, f64)> {
    let c = m.column_sums().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if c == 0.0 {
        return Ok((expmv(m, p, t)?, 0.0));
    }
    let g = m.shifted(-c);
    Ok((expmv(&g, p, t)?, t * c))
}

fn start_vector(space: &StateSpace, x0: &[i64]) -> Result<ProbabilityVector> {
    Ok(ProbabilityVector::delta(space.size(), space.index_of(x0)? - 1))
}

/// `exp(T A) delta_{x0}` with the full clipped generator.
pub fn exact_solution(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    horizon: f64,
) -> Result<ProbabilityVector> {
    let p = start_vector(space, x0)?;
    let a = assemble_generator(model, space)?;
    expmv(&a, &p, horizon)
}

/// `exp(T sum_r Abar_r) delta_{x0}` with propensities frozen at `x0`.
///
/// The frozen operator leaks probability at the box faces; the returned
/// vector carries the surviving mass.
pub fn frozen_sum_solution(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    horizon: f64,
) -> Result<ProbabilityVector> {
    let p = start_vector(space, x0)?;
    let frozen = assemble_frozen(model, space, x0)?;
    let abar = Generator::sum(space.size(), &frozen)?;
    let (mut out, log_scale) = expmv_shifted(&abar, &p, horizon)?;
    out.scale(log_scale.exp());
    Ok(out)
}

/// Applies `exp(t_k M_k)` for each `(M_k, t_k)` in order, then the
/// accumulated scalar factor.
fn apply_factors<'a>(
    p: ProbabilityVector,
    factors: impl IntoIterator<Item = (&'a Generator, f64)>,
) -> Result<ProbabilityVector> {
    let mut p = p;
    let mut log_scale = 0.0;
    for (m, t) in factors {
        let (next, s) = expmv_shifted(m, &p, t)?;
        p = next;
        log_scale += s;
    }
    if log_scale != 0.0 {
        p.scale(log_scale.exp());
    }
    Ok(p)
}

fn state_at(space: &StateSpace, idx: usize) -> Vec<i64> {
    let mut x = vec![0; space.dim()];
    space.fill_state0(idx, &mut x);
    x
}

/// Lie product `exp(tau Abar_0) exp(tau Abar_1) ... exp(tau Abar_M)` per
/// substep, `Abar_M` acting first. Frozen at `x0`, or with `refreeze` at
/// the mode of the density at the start of each substep.
pub fn lie_product_solution(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    plan: StepPlan,
    refreeze: bool,
) -> Result<ProbabilityVector> {
    let mut p = start_vector(space, x0)?;
    let mut frozen = assemble_frozen(model, space, x0)?;
    for step in 0..plan.n {
        if refreeze && step > 0 {
            frozen = assemble_frozen(model, space, &state_at(space, p.mode()))?;
        }
        p = apply_factors(p, frozen.iter().rev().map(|m| (m, plan.tau)))?;
    }
    Ok(p)
}

/// Weight given to `Abar_0` at the center of a Strang substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrangCenter {
    /// `exp(tau Abar_0)`: every operator receives total weight `tau`.
    #[default]
    Full,
    /// `exp(tau/2 Abar_0)`, as the splitting is sometimes printed.
    Half,
}

/// Symmetric splitting per substep:
/// `exp(tau/2 Abar_M) ... exp(tau/2 Abar_1) exp(w Abar_0) exp(tau/2 Abar_1) ... exp(tau/2 Abar_M)`
/// with `w` set by `center`. Frozen at `x0`.
pub fn strang_solution(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    plan: StepPlan,
    center: StrangCenter,
) -> Result<ProbabilityVector> {
    let mut p = start_vector(space, x0)?;
    let frozen = assemble_frozen(model, space, x0)?;
    let half = plan.tau / 2.0;
    let center_t = match center {
        StrangCenter::Full => plan.tau,
        StrangCenter::Half => half,
    };
    let channels = &frozen[1..];
    let sequence: Vec<(&Generator, f64)> = channels
        .iter()
        .rev()
        .map(|m| (m, half))
        .chain(std::iter::once((&frozen[0], center_t)))
        .chain(channels.iter().map(|m| (m, half)))
        .collect();
    for _ in 0..plan.n {
        p = apply_factors(p, sequence.iter().copied())?;
    }
    Ok(p)
}

/// One column factor `I + S_j tau A_j` for a column with exit rate `a0`.
///
/// `S_j tau a0 = 1 - exp(-tau a0)`, so the factor moves that fraction of
/// `p_j` along `c_j` and is exactly `exp(tau A_j)`.
#[derive(Debug, Clone)]
struct ColumnFactor {
    j: usize,
    /// `S_j tau a_0(x_j)`, in `[0, 1)`.
    outflow: f64,
    /// Off-diagonal rows and their share `a_r / a_0` of the outflow.
    targets: Vec<(usize, f64)>,
}

fn column_factors(a: &Generator, tau: f64) -> Vec<ColumnFactor> {
    (0..a.dim())
        .filter_map(|j| {
            let a0 = -a.diagonal(j);
            if a0 <= 0.0 {
                // S_j = 1 and A_j = 0: identity
                return None;
            }
            let outflow = -(-tau * a0).exp_m1();
            debug_assert!((0.0..1.0).contains(&outflow) || outflow == 1.0);
            let targets = a
                .column(j)
                .filter(|&(i, _)| i != j)
                .map(|(i, v)| (i, v / a0))
                .collect();
            Some(ColumnFactor { j, outflow, targets })
        })
        .collect()
}

/// `S_j = (1 - exp(-tau a0)) / (tau a0)`, and 1 when `a0 = 0`.
pub fn column_split_weight(tau: f64, a0: f64) -> f64 {
    let z = tau * a0;
    if z == 0.0 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}

/// Applies `I + S_j tau A_j` for the column piece `j` of `a` to `p` in place.
pub fn apply_column_factor(a: &Generator, j: usize, tau: f64, p: &mut [f64]) {
    let a0 = -a.diagonal(j);
    let s = column_split_weight(tau, a0);
    let pj = p[j];
    if pj == 0.0 {
        return;
    }
    for (i, v) in a.column(j) {
        p[i] += s * tau * v * pj;
    }
}

/// Column splitting: per substep applies `I + S_j tau A_j` for
/// `j = 1, 2, ..., Q`, the first column acting first.
pub fn column_split_solution(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    plan: StepPlan,
) -> Result<ProbabilityVector> {
    let p = start_vector(space, x0)?;
    let a = assemble_generator(model, space)?;
    let factors = column_factors(&a, plan.tau);
    let mut values = p.values;
    for _ in 0..plan.n {
        for f in &factors {
            let moved = f.outflow * values[f.j];
            if moved == 0.0 {
                continue;
            }
            values[f.j] -= moved;
            for &(i, share) in &f.targets {
                values[i] += moved * share;
            }
        }
    }
    ProbabilityVector::from_values(values)
}

/// `exp(tau B_1) exp(tau B_2) ... exp(tau B_M) delta_{x0}`, `B_M` acting first.
pub fn reaction_product_density(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    tau: f64,
) -> Result<ProbabilityVector> {
    reaction_product_solution(model, space, x0, StepPlan::new(tau, 1)?)
}

/// [`reaction_product_density`] repeated over every substep of `plan`.
pub fn reaction_product_solution(
    model: &ReactionModel,
    space: &StateSpace,
    x0: &[i64],
    plan: StepPlan,
) -> Result<ProbabilityVector> {
    let mut p = start_vector(space, x0)?;
    let bs = assemble_reaction_generators(model, space)?;
    for _ in 0..plan.n {
        for b in bs.iter().rev() {
            p = expmv(b, &p, plan.tau)?;
        }
    }
    Ok(p)
}

/// Density dump: one line per state, `index x_1 ... x_N probability`, with
/// 1-based index and shortest round-trip scientific notation.
pub fn write_density(space: &StateSpace, p: &ProbabilityVector) -> String {
    let mut out = String::with_capacity(p.len() * 24);
    let mut x = vec![0; space.dim()];
    for (i, v) in p.values().iter().enumerate() {
        space.fill_state0(i, &mut x);
        let _ = write!(out, "{}", i + 1);
        for xi in &x {
            let _ = write!(out, " {xi}");
        }
        let _ = writeln!(out, " {v:e}");
    }
    out
}

/// Parses a density dump back into `(states, probabilities)` in file order.
pub fn parse_density(text: &str) -> Result<(Vec<Vec<i64>>, Vec<f64>)> {
    let mut states = Vec::new();
    let mut probs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |what: &str| Error::Parse {
            line: i + 1,
            message: what.to_string(),
        };
        if fields.len() < 3 {
            return Err(bad("expected 'index x_1 ... x_N probability'"));
        }
        let state = fields[1..fields.len() - 1]
            .iter()
            .map(|f| f.parse::<i64>().map_err(|_| bad("invalid state component")))
            .collect::<Result<Vec<_>>>()?;
        let prob: f64 = fields[fields.len() - 1]
            .parse()
            .map_err(|_| bad("invalid probability"))?;
        states.push(state);
        probs.push(prob);
    }
    Ok((states, probs))
}
