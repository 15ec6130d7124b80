//! Trajectory samplers: Gillespie's direct method, explicit tau-leap and the
//! accelerated variants that sample per-reaction product densities, plus
//! seeded ensembles.
//!
//! All samplers keep states inside the model's box. A firing count that
//! would push a species below zero or above its cap is reduced to the
//! largest feasible count and the event is counted in `boundary_clamps`.
//! Reducing counts rather than zeroing components keeps stoichiometric
//! conservation laws intact.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ReactionModel;
use crate::propagator::StepPlan;
use crate::rng::RngStream;
use crate::statespace::StateSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerMethod {
    Ssa,
    TauLeap,
    Accelerated,
    AcceleratedSplit,
    Symmetric,
}

impl SamplerMethod {
    pub const ALL: [SamplerMethod; 5] = [
        SamplerMethod::Ssa,
        SamplerMethod::TauLeap,
        SamplerMethod::Accelerated,
        SamplerMethod::AcceleratedSplit,
        SamplerMethod::Symmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerMethod::Ssa => "ssa",
            SamplerMethod::TauLeap => "tau-leap",
            SamplerMethod::Accelerated => "accelerated",
            SamplerMethod::AcceleratedSplit => "accelerated-split",
            SamplerMethod::Symmetric => "symmetric",
        }
    }

    pub fn needs_tau(self) -> bool {
        self != SamplerMethod::Ssa
    }

    /// First stream id used by ensembles of this method. Each method owns
    /// the block `[base, base + 2^40)` of a master seed, so runs of
    /// different methods under one seed never share a stream.
    pub fn stream_base(self) -> u64 {
        let slot = Self::ALL.iter().position(|&m| m == self).unwrap() as u64;
        slot << 40
    }
}

impl fmt::Display for SamplerMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown sampler '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub final_state: Vec<i64>,
    /// SSA events, or leaps for the tau methods.
    pub steps_taken: u64,
    pub boundary_clamps: u64,
    pub wall_time: f64,
}

/// Mutable state of one trajectory.
struct Walker<'a> {
    model: &'a ReactionModel,
    x: Vec<i64>,
    clamps: u64,
    rates: Vec<f64>,
}

impl<'a> Walker<'a> {
    fn new(model: &'a ReactionModel, x0: &[i64]) -> Self {
        Self {
            model,
            x: x0.to_vec(),
            clamps: 0,
            rates: vec![0.0; model.n_reactions()],
        }
    }

    /// Largest number of firings of `r` that keeps the state in the box.
    fn max_firings(&self, r: usize) -> u64 {
        let mut limit = u64::MAX;
        for ((&xi, &vi), &cap) in self.x.iter().zip(&self.model.stoich[r]).zip(&self.model.caps) {
            let room = match vi.cmp(&0) {
                std::cmp::Ordering::Less => xi / -vi,
                std::cmp::Ordering::Greater => (cap as i64 - xi) / vi,
                std::cmp::Ordering::Equal => continue,
            };
            limit = limit.min(room.max(0) as u64);
        }
        limit
    }

    /// Fires `r` up to `k` times, clamping at the box faces.
    fn fire(&mut self, r: usize, k: u64) {
        if k == 0 {
            return;
        }
        let limit = self.max_firings(r);
        let k = if k > limit {
            self.clamps += 1;
            limit
        } else {
            k
        };
        let k = k as i64;
        for (xi, &vi) in self.x.iter_mut().zip(&self.model.stoich[r]) {
            *xi += vi * k;
        }
    }

    #[inline]
    fn rate(&self, r: usize) -> f64 {
        self.model.rate(r, &self.x)
    }

    fn in_box_after(&self, r: usize) -> bool {
        self.x
            .iter()
            .zip(&self.model.stoich[r])
            .zip(&self.model.caps)
            .all(|((&xi, &vi), &cap)| {
                let y = xi + vi;
                y >= 0 && y <= cap as i64
            })
    }
}

fn check_start(model: &ReactionModel, x0: &[i64]) -> Result<()> {
    let space = StateSpace::for_model(model)?;
    if !space.in_bounds(x0) {
        return Err(Error::OutOfBounds {
            state: x0.to_vec(),
            caps: model.caps.clone(),
        });
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::usage(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// Runs one trajectory of `method` to time `horizon`, calling `observe` on
/// the start state and after every event or leap.
pub fn run_trajectory_with(
    method: SamplerMethod,
    model: &ReactionModel,
    x0: &[i64],
    horizon: f64,
    tau: f64,
    rng: &mut RngStream,
    mut observe: impl FnMut(&[i64]),
) -> Result<TrajectoryResult> {
    check_start(model, x0)?;
    let started = Instant::now();
    let mut w = Walker::new(model, x0);
    observe(&w.x);
    let mut steps = 0u64;
    match method {
        SamplerMethod::Ssa => {
            let mut t = 0.0;
            loop {
                let mut a0 = 0.0;
                for r in 0..model.n_reactions() {
                    // firings that would leave the box are disabled
                    let a = if w.in_box_after(r) { w.rate(r) } else { 0.0 };
                    w.rates[r] = a;
                    a0 += a;
                }
                if a0 <= 0.0 {
                    break;
                }
                t += rng.exponential(a0);
                if t >= horizon {
                    break;
                }
                let target = rng.uniform() * a0;
                let mut acc = 0.0;
                let mut chosen = model.n_reactions() - 1;
                for (r, &a) in w.rates.iter().enumerate() {
                    acc += a;
                    if target < acc {
                        chosen = r;
                        break;
                    }
                }
                // guard against rounding picking a disabled last channel
                while w.rates[chosen] == 0.0 {
                    chosen -= 1;
                }
                w.fire(chosen, 1);
                steps += 1;
                observe(&w.x);
            }
        }
        _ => {
            check_tau(tau)?;
            let plan = StepPlan::with_tau(horizon, tau)?;
            for _ in 0..plan.n {
                leap(method, &mut w, plan.tau, rng);
                steps += 1;
                observe(&w.x);
            }
        }
    }
    Ok(TrajectoryResult {
        final_state: w.x,
        steps_taken: steps,
        boundary_clamps: w.clamps,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

fn leap(method: SamplerMethod, w: &mut Walker<'_>, tau: f64, rng: &mut RngStream) {
    let m = w.model.n_reactions();
    match method {
        SamplerMethod::Ssa => unreachable!("SSA has no fixed leap"),
        SamplerMethod::TauLeap => tau_leap_step(w, tau, rng),
        SamplerMethod::Accelerated => {
            for r in (0..m).rev() {
                let k = rng.poisson_unchecked(w.rate(r) * tau);
                w.fire(r, k);
            }
        }
        SamplerMethod::AcceleratedSplit => {
            if m < 2 {
                return leap(SamplerMethod::Accelerated, w, tau, rng);
            }
            // upper block: channels M..=M-h+1 at the entry state; lower
            // block: the rest at the state the upper block left behind
            let upper = m.div_ceil(2);
            let split = m - upper;
            for block in [split..m, 0..split] {
                for r in block.clone() {
                    w.rates[r] = w.rate(r);
                }
                for r in block.rev() {
                    let k = rng.poisson_unchecked(w.rates[r] * tau);
                    w.fire(r, k);
                }
            }
        }
        SamplerMethod::Symmetric => {
            let half = tau / 2.0;
            for r in (0..m).rev().chain(0..m) {
                let k = rng.poisson_unchecked(w.rate(r) * half);
                w.fire(r, k);
            }
        }
    }
}

fn tau_leap_step(w: &mut Walker<'_>, tau: f64, rng: &mut RngStream) {
    let m = w.model.n_reactions();
    let mut counts = [0u64; 16];
    let mut heap;
    let counts: &mut [u64] = if m <= counts.len() {
        &mut counts[..m]
    } else {
        heap = vec![0u64; m];
        &mut heap
    };
    for (r, k) in counts.iter_mut().enumerate() {
        *k = rng.poisson_unchecked(w.rate(r) * tau);
    }
    let model = w.model;
    let fits = (0..model.n_species()).all(|i| {
        let y = w.x[i]
            + counts
                .iter()
                .zip(&model.stoich)
                .map(|(&k, v)| k as i64 * v[i])
                .sum::<i64>();
        y >= 0 && y <= model.caps[i] as i64
    });
    if fits {
        for (i, xi) in w.x.iter_mut().enumerate() {
            *xi += counts
                .iter()
                .zip(&model.stoich)
                .map(|(&k, v)| k as i64 * v[i])
                .sum::<i64>();
        }
    } else {
        // infeasible leap: apply channels in order, each capped
        w.clamps += 1;
        let before = w.clamps;
        for (r, &k) in counts.iter().enumerate() {
            w.fire(r, k);
        }
        w.clamps = before;
    }
}

/// Gillespie direct method to time `horizon`.
pub fn ssa_run(
    model: &ReactionModel,
    x0: &[i64],
    horizon: f64,
    rng: &mut RngStream,
) -> Result<TrajectoryResult> {
    run_trajectory_with(SamplerMethod::Ssa, model, x0, horizon, 0.0, rng, |_| {})
}

/// Explicit tau-leap with `horizon / tau` leaps.
pub fn tau_leap_run(
    model: &ReactionModel,
    x0: &[i64],
    horizon: f64,
    tau: f64,
    rng: &mut RngStream,
) -> Result<TrajectoryResult> {
    run_trajectory_with(SamplerMethod::TauLeap, model, x0, horizon, tau, rng, |_| {})
}

/// Single leaps of each tau method. Each returns the new state and the
/// number of boundary clamps it took.
fn single_leap(
    method: SamplerMethod,
    model: &ReactionModel,
    x: &[i64],
    tau: f64,
    rng: &mut RngStream,
) -> Result<(Vec<i64>, u64)> {
    check_tau(tau)?;
    check_start(model, x)?;
    let mut w = Walker::new(model, x);
    leap(method, &mut w, tau, rng);
    Ok((w.x, w.clamps))
}

/// One explicit tau-leap from `x`: every `K_r ~ Poisson(a_r(x) tau)`.
pub fn tau_leap_step_from(
    model: &ReactionModel,
    x: &[i64],
    tau: f64,
    rng: &mut RngStream,
) -> Result<(Vec<i64>, u64)> {
    single_leap(SamplerMethod::TauLeap, model, x, tau, rng)
}

/// One accelerated leap: channels `M, M-1, ..., 1` fire in turn with
/// propensities evaluated at the state left by the previous channel.
pub fn accelerated_step(
    model: &ReactionModel,
    x: &[i64],
    tau: f64,
    rng: &mut RngStream,
) -> Result<(Vec<i64>, u64)> {
    single_leap(SamplerMethod::Accelerated, model, x, tau, rng)
}

/// Accelerated leap with the channels in two blocks. The upper
/// `ceil(M/2)` channels fire (from `M` down) with propensities frozen at
/// `x`; the remaining ones fire with propensities frozen at the state the
/// first block produced. `M < 2` falls back to [`accelerated_step`].
pub fn accelerated_half_split_step(
    model: &ReactionModel,
    x: &[i64],
    tau: f64,
    rng: &mut RngStream,
) -> Result<(Vec<i64>, u64)> {
    single_leap(SamplerMethod::AcceleratedSplit, model, x, tau, rng)
}

/// Symmetric accelerated leap: channels `M..1` at `tau/2`, then `1..M` at
/// `tau/2`, each with its propensity at the current state.
pub fn symmetric_accelerated_step(
    model: &ReactionModel,
    x: &[i64],
    tau: f64,
    rng: &mut RngStream,
) -> Result<(Vec<i64>, u64)> {
    single_leap(SamplerMethod::Symmetric, model, x, tau, rng)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnsembleDiagnostics {
    pub boundary_clamps: u64,
    pub clamped_trajectories: u64,
    pub total_steps: u64,
    /// Summed per-trajectory wall time, seconds.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub method: SamplerMethod,
    pub tau: Option<f64>,
    pub horizon: f64,
    pub n_samples: usize,
    pub master_seed: u64,
    pub caps: Vec<u32>,
    /// Final state of trajectory `i` (stream `method.stream_base() + i`).
    pub final_states: Vec<Vec<i64>>,
    /// 1-based state index -> count.
    pub histogram: BTreeMap<usize, u64>,
    pub diagnostics: EnsembleDiagnostics,
}

impl EnsembleResult {
    pub fn space(&self) -> StateSpace {
        StateSpace::new(&self.caps).expect("caps came from a valid model")
    }
}

/// Runs `n_samples` trajectories on streams
/// `method.stream_base() + 0..n_samples` of `master_seed` using the
/// current rayon pool. The histogram and final
/// states do not depend on scheduling or thread count.
pub fn run_ensemble(
    method: SamplerMethod,
    model: &ReactionModel,
    x0: &[i64],
    horizon: f64,
    tau: Option<f64>,
    n_samples: usize,
    master_seed: u64,
) -> Result<EnsembleResult> {
    if n_samples == 0 {
        return Err(Error::usage("ensemble needs at least one sample"));
    }
    if n_samples as u64 > 1 << 40 {
        return Err(Error::usage("too many samples for one stream block"));
    }
    let step = match (method.needs_tau(), tau) {
        (true, None) => return Err(Error::usage(format!("{method} needs a tau"))),
        (_, t) => t.unwrap_or(0.0),
    };
    if method.needs_tau() {
        check_tau(step)?;
        StepPlan::with_tau(horizon, step)?;
    }
    let space = StateSpace::for_model(model)?;
    let runs: Vec<TrajectoryResult> = (0..n_samples)
        .into_par_iter()
        .map(|id| {
            let mut rng = RngStream::new(master_seed, method.stream_base() + id as u64);
            run_trajectory_with(method, model, x0, horizon, step, &mut rng, |_| {})
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    let mut diagnostics = EnsembleDiagnostics::default();
    let mut final_states = Vec::with_capacity(n_samples);
    for run in runs {
        *histogram.entry(space.index0(&run.final_state) + 1).or_insert(0) += 1;
        diagnostics.boundary_clamps += run.boundary_clamps;
        diagnostics.clamped_trajectories += u64::from(run.boundary_clamps > 0);
        diagnostics.total_steps += run.steps_taken;
        diagnostics.wall_time += run.wall_time;
        final_states.push(run.final_state);
    }
    Ok(EnsembleResult {
        method,
        tau: method.needs_tau().then_some(step),
        horizon,
        n_samples,
        master_seed,
        caps: model.caps.clone(),
        final_states,
        histogram,
        diagnostics,
    })
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::usage(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Parsed form of an ensemble file.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleFile {
    pub method: String,
    pub model: String,
    pub tau: Option<f64>,
    pub horizon: f64,
    pub n_samples: usize,
    pub master_seed: u64,
    pub caps: Vec<u32>,
    pub histogram: BTreeMap<usize, u64>,
}

/// Ensemble file: `# key value` header lines for `method`, `model`, `tau`
/// (`-` for SSA), `T`, `n`, `seed` and `caps`, then one
/// `state-index count` pair per line with 1-based indices ascending.
pub fn write_ensemble(result: &EnsembleResult, model_name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# method {}", result.method);
    let _ = writeln!(out, "# model {model_name}");
    match result.tau {
        Some(t) => {
            let _ = writeln!(out, "# tau {t}");
        }
        None => out.push_str("# tau -\n"),
    }
    let _ = writeln!(out, "# T {}", result.horizon);
    let _ = writeln!(out, "# n {}", result.n_samples);
    let _ = writeln!(out, "# seed {}", result.master_seed);
    let caps: Vec<String> = result.caps.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "# caps {}", caps.join(" "));
    for (idx, count) in &result.histogram {
        let _ = writeln!(out, "{idx} {count}");
    }
    out
}

pub fn parse_ensemble(text: &str) -> Result<EnsembleFile> {
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut histogram = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        let bad = |m: &str| Error::Parse {
            line: i + 1,
            message: m.to_string(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .trim()
                .split_once(' ')
                .ok_or_else(|| bad("header line needs a key and value"))?;
            header.insert(k.to_string(), v.trim().to_string());
            continue;
        }
        let (idx, count) = line
            .split_once(' ')
            .ok_or_else(|| bad("expected 'state-index count'"))?;
        let idx: usize = idx.parse().map_err(|_| bad("invalid state index"))?;
        let count: u64 = count.trim().parse().map_err(|_| bad("invalid count"))?;
        *histogram.entry(idx).or_insert(0) += count;
    }
    let get = |k: &str| {
        header.get(k).cloned().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("missing header '{k}'"),
        })
    };
    let num_err = |k: &str| Error::Parse {
        line: 0,
        message: format!("invalid header '{k}'"),
    };
    let tau = match get("tau")?.as_str() {
        "-" => None,
        t => Some(t.parse().map_err(|_| num_err("tau"))?),
    };
    let caps = get("caps")?
        .split_whitespace()
        .map(|c| c.parse().map_err(|_| num_err("caps")))
        .collect::<Result<Vec<u32>>>()?;
    let file = EnsembleFile {
        method: get("method")?,
        model: get("model")?,
        tau,
        horizon: get("T")?.parse().map_err(|_| num_err("T"))?,
        n_samples: get("n")?.parse().map_err(|_| num_err("n"))?,
        master_seed: get("seed")?.parse().map_err(|_| num_err("seed"))?,
        caps,
        histogram,
    };
    let total: u64 = file.histogram.values().sum();
    if total != file.n_samples as u64 {
        return Err(Error::Parse {
            line: 0,
            message: format!("counts sum to {total}, header says {}", file.n_samples),
        });
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_isomer, builtin_schlogl, PropensitySpec};

    fn birth_only(rate: f64, cap: u32) -> ReactionModel {
        ReactionModel::new(
            vec!["A".into()],
            vec![cap],
            vec![vec![1]],
            vec![PropensitySpec::constant(rate)],
        )
        .unwrap()
    }

    #[test]
    fn zero_rates_freeze_state() {
        let mut m = builtin_isomer().model;
        for p in &mut m.propensities {
            p.rate = 0.0;
        }
        let mut rng = RngStream::new(1, 0);
        let r = ssa_run(&m, &[30, 50], 10.0, &mut rng).unwrap();
        assert_eq!(r.final_state, vec![30, 50]);
        assert_eq!(r.steps_taken, 0);
        for method in SamplerMethod::ALL {
            let r = run_trajectory_with(method, &m, &[30, 50], 1.0, 0.1, &mut rng, |_| {}).unwrap();
            assert_eq!(r.final_state, vec![30, 50], "{method}");
        }
    }

    #[test]
    fn isomer_conserves_total_under_every_sampler() {
        let s = builtin_isomer();
        for method in SamplerMethod::ALL {
            for (id, tau) in [(0u64, 0.01), (1, 0.1), (2, 0.3)] {
                let mut rng = RngStream::new(9, id);
                run_trajectory_with(method, &s.model, &[40, 40], 3.0 - 0.0, tau, &mut rng, |x| {
                    assert_eq!(x[0] + x[1], 80, "{method} tau {tau}");
                    assert!(x[0] >= 0 && x[1] >= 0);
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn split_equals_accelerated_for_two_channels() {
        let s = builtin_isomer();
        for id in 0..200 {
            let mut a = RngStream::new(5, id);
            let mut b = RngStream::new(5, id);
            let x = [37, 43];
            assert_eq!(
                accelerated_step(&s.model, &x, 0.05, &mut a).unwrap(),
                accelerated_half_split_step(&s.model, &x, 0.05, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn single_channel_accelerated_matches_tau_leap() {
        let m = birth_only(3.0, 100);
        for id in 0..100 {
            let mut a = RngStream::new(2, id);
            let mut b = RngStream::new(2, id);
            assert_eq!(
                accelerated_step(&m, &[4], 0.7, &mut a).unwrap(),
                tau_leap_step_from(&m, &[4], 0.7, &mut b).unwrap()
            );
        }
    }

    #[test]
    fn zero_propensity_passes_through() {
        let s = builtin_schlogl();
        let mut rng = RngStream::new(1, 1);
        // at x = 0 only the inflow channel is live
        let m = s.model.clone();
        let mut only_decay = m.clone();
        only_decay.propensities[2].rate = 0.0;
        let (x, clamps) = accelerated_step(&only_decay, &[0], 0.5, &mut rng).unwrap();
        assert_eq!(x, vec![0]);
        assert_eq!(clamps, 0);
    }

    #[test]
    fn bad_tau_is_rejected() {
        let s = builtin_isomer();
        let mut rng = RngStream::new(1, 1);
        assert!(accelerated_step(&s.model, &[40, 40], 0.0, &mut rng).is_err());
        assert!(tau_leap_run(&s.model, &[40, 40], 1.0, -0.1, &mut rng).is_err());
        assert!(run_ensemble(SamplerMethod::TauLeap, &s.model, &[40, 40], 1.0, None, 5, 1).is_err());
        assert!(run_ensemble(SamplerMethod::Ssa, &s.model, &[40, 40], 1.0, None, 0, 1).is_err());
    }

    #[test]
    fn clamping_counts_and_keeps_box() {
        // huge leap on a decay channel overshoots zero
        let m = ReactionModel::new(
            vec!["A".into()],
            vec![10],
            vec![vec![-1]],
            vec![PropensitySpec::new(50.0, vec![(0, 1)])],
        )
        .unwrap();
        let mut rng = RngStream::new(3, 0);
        let r = tau_leap_run(&m, &[10], 1.0, 1.0, &mut rng).unwrap();
        assert_eq!(r.final_state, vec![0]);
        assert_eq!(r.boundary_clamps, 1);
    }

    #[test]
    fn ensemble_single_sample_and_determinism() {
        let s = builtin_isomer();
        let one = run_ensemble(SamplerMethod::Ssa, &s.model, &[40, 40], 1.0, None, 1, 4).unwrap();
        assert_eq!(one.histogram.values().sum::<u64>(), 1);
        let idx = one.space().index_of(&one.final_states[0]).unwrap();
        assert_eq!(one.histogram[&idx], 1);

        let a = run_ensemble(SamplerMethod::Symmetric, &s.model, &[40, 40], 1.0, Some(0.1), 300, 8).unwrap();
        let b = with_threads(3, || {
            run_ensemble(SamplerMethod::Symmetric, &s.model, &[40, 40], 1.0, Some(0.1), 300, 8)
        })
        .unwrap()
        .unwrap();
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.final_states, b.final_states);
    }

    #[test]
    fn ensemble_file_round_trip() {
        let s = builtin_isomer();
        let e = run_ensemble(SamplerMethod::TauLeap, &s.model, &[40, 40], 1.0, Some(0.1), 50, 2).unwrap();
        let text = write_ensemble(&e, "isomer");
        let f = parse_ensemble(&text).unwrap();
        assert_eq!(f.histogram, e.histogram);
        assert_eq!(f.tau, Some(0.1));
        assert_eq!(f.caps, vec![80, 80]);
        assert_eq!(f.method, "tau-leap");
        assert!(parse_ensemble(&text.replace("# n 50", "# n 51")).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in SamplerMethod::ALL {
            assert_eq!(m.name().parse::<SamplerMethod>().unwrap(), m);
        }
        assert!("exact".parse::<SamplerMethod>().is_err());
    }
}
