//! Reaction networks with generalized mass-action propensities.
//!
//! A channel's propensity is `rate * prod_i C(x_i, m_i)` where `m_i` is the
//! multiplicity of reactant species `i`. Buffered species never appear as
//! state; their counts are folded into `rate`.
//!
//! Reaction and species indices are 0-based throughout the crate.

use crate::error::{Error, Result};

/// Propensity of one reaction channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PropensitySpec {
    /// Effective rate constant, buffered-species factors included.
    pub rate: f64,
    /// `(species index, multiplicity)` pairs, one per distinct reactant.
    pub orders: Vec<(usize, u32)>,
}

impl PropensitySpec {
    pub fn new(rate: f64, orders: Vec<(usize, u32)>) -> Self {
        Self { rate, orders }
    }

    /// Zero-order channel (constant inflow).
    pub fn constant(rate: f64) -> Self {
        Self::new(rate, Vec::new())
    }

    /// Evaluates `rate * prod C(x_i, m_i)`. Negative counts give zero.
    pub fn evaluate(&self, x: &[i64]) -> f64 {
        let mut combos: u128 = 1;
        let mut overflowed: Option<f64> = None;
        for &(species, m) in &self.orders {
            let n = x[species];
            if n < m as i64 {
                return 0.0;
            }
            let c = binomial(n as u64, m as u64);
            match (overflowed.as_mut(), c) {
                (Some(acc), _) => *acc *= binomial_f64(n as u64, m as u64),
                (None, Some(c)) => match combos.checked_mul(c) {
                    Some(v) => combos = v,
                    None => overflowed = Some(combos as f64 * c as f64),
                },
                (None, None) => {
                    overflowed = Some(combos as f64 * binomial_f64(n as u64, m as u64))
                }
            }
        }
        match overflowed {
            Some(c) => self.rate * c,
            None => self.rate * combos as f64,
        }
    }

    fn max_species(&self) -> Option<usize> {
        self.orders.iter().map(|&(s, _)| s).max()
    }
}

/// Exact `C(n, k)` in integer arithmetic, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A reaction network over `N` species and `M` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionModel {
    pub species_names: Vec<String>,
    /// Maximum molecule count per species.
    pub caps: Vec<u32>,
    /// `stoich[r]` is the state-change vector of channel `r` (length `N`).
    pub stoich: Vec<Vec<i64>>,
    pub propensities: Vec<PropensitySpec>,
}

impl ReactionModel {
    /// Builds a model and checks its structural invariants.
    pub fn new(
        species_names: Vec<String>,
        caps: Vec<u32>,
        stoich: Vec<Vec<i64>>,
        propensities: Vec<PropensitySpec>,
    ) -> Result<Self> {
        let model = Self {
            species_names,
            caps,
            stoich,
            propensities,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.species_names.len();
        let m = self.stoich.len();
        if n == 0 {
            return Err(Error::InvalidModel("model has no species".into()));
        }
        if m == 0 {
            return Err(Error::InvalidModel("model has no reactions".into()));
        }
        if self.caps.len() != n {
            return Err(Error::InvalidModel(format!(
                "{} caps for {} species",
                self.caps.len(),
                n
            )));
        }
        if self.propensities.len() != m {
            return Err(Error::InvalidModel(format!(
                "{} propensities for {} reactions",
                self.propensities.len(),
                m
            )));
        }
        for (r, (v, prop)) in self.stoich.iter().zip(&self.propensities).enumerate() {
            if v.len() != n {
                return Err(Error::InvalidModel(format!(
                    "reaction {r}: change vector has length {}, expected {n}",
                    v.len()
                )));
            }
            if v.iter().all(|&c| c == 0) {
                return Err(Error::InvalidModel(format!(
                    "reaction {r}: change vector is zero"
                )));
            }
            if !(prop.rate.is_finite() && prop.rate >= 0.0) {
                return Err(Error::InvalidModel(format!(
                    "reaction {r}: negative or non-finite rate {}",
                    prop.rate
                )));
            }
            if prop.max_species().is_some_and(|s| s >= n) {
                return Err(Error::InvalidModel(format!(
                    "reaction {r}: reactant refers to unknown species"
                )));
            }
            // mass action: a channel may only consume what its propensity counts
            for (i, &dv) in v.iter().enumerate() {
                let m_i: i64 = prop
                    .orders
                    .iter()
                    .filter(|&&(s, _)| s == i)
                    .map(|&(_, k)| k as i64)
                    .sum();
                if m_i + dv < 0 {
                    return Err(Error::InvalidModel(format!(
                        "reaction {r}: consumes {} of species {} but has order {m_i}",
                        -dv, self.species_names[i]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_species(&self) -> usize {
        self.species_names.len()
    }

    pub fn n_reactions(&self) -> usize {
        self.stoich.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species_names.iter().position(|s| s == name)
    }

    /// Propensity of channel `r` (0-based) at state `x`.
    pub fn propensity(&self, r: usize, x: &[i64]) -> Result<f64> {
        let spec = self.propensities.get(r).ok_or_else(|| {
            Error::usage(format!(
                "reaction index {r} out of range (model has {})",
                self.n_reactions()
            ))
        })?;
        if x.len() != self.n_species() {
            return Err(Error::Dimension(format!(
                "state has {} components, model has {} species",
                x.len(),
                self.n_species()
            )));
        }
        Ok(spec.evaluate(x))
    }

    /// `a_0(x)`, the sum of all channel propensities.
    pub fn total_propensity(&self, x: &[i64]) -> Result<f64> {
        (0..self.n_reactions()).try_fold(0.0, |acc, r| Ok(acc + self.propensity(r, x)?))
    }

    /// Unchecked propensity for hot loops; `x` must have `N` components.
    #[inline]
    pub(crate) fn rate(&self, r: usize, x: &[i64]) -> f64 {
        self.propensities[r].evaluate(x)
    }

    pub fn with_caps(&self, caps: Vec<u32>) -> Result<Self> {
        Self::new(
            self.species_names.clone(),
            caps,
            self.stoich.clone(),
            self.propensities.clone(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub state: Vec<i64>,
    pub time: f64,
}

impl InitialCondition {
    pub fn new(state: Vec<i64>) -> Self {
        Self { state, time: 0.0 }
    }
}

/// A model together with its initial condition and final time.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub model: ReactionModel,
    pub initial: InitialCondition,
    pub horizon: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let init = &self.initial.state;
        if init.len() != self.model.n_species() {
            return Err(Error::Dimension(format!(
                "initial state has {} components, model has {} species",
                init.len(),
                self.model.n_species()
            )));
        }
        if init
            .iter()
            .zip(&self.model.caps)
            .any(|(&x, &cap)| x < 0 || x > cap as i64)
        {
            return Err(Error::OutOfBounds {
                state: init.clone(),
                caps: self.model.caps.clone(),
            });
        }
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(Error::InvalidModel(format!("bad horizon {}", self.horizon)));
        }
        Ok(())
    }
}

/// Reversible isomerization `X1 <-> X2` with `c1 = c2 = 10`.
pub fn builtin_isomer() -> Scenario {
    let model = ReactionModel::new(
        vec!["X1".into(), "X2".into()],
        vec![80, 80],
        vec![vec![-1, 1], vec![1, -1]],
        vec![
            PropensitySpec::new(10.0, vec![(0, 1)]),
            PropensitySpec::new(10.0, vec![(1, 1)]),
        ],
    )
    .expect("isomer model is valid");
    Scenario {
        model,
        initial: InitialCondition::new(vec![40, 40]),
        horizon: 10.0,
    }
}

pub const SCHLOGL_C1: f64 = 3e-7;
pub const SCHLOGL_C2: f64 = 1e-4;
pub const SCHLOGL_C3: f64 = 1e-3;
pub const SCHLOGL_C4: f64 = 3.5;
pub const SCHLOGL_N1: f64 = 1e5;
pub const SCHLOGL_N2: f64 = 2e5;

/// Schlogl's bistable network `B1 + 2X <-> 3X`, `B2 <-> X`.
///
/// `a1 = (c1/2) N1 x(x-1) = c1 N1 C(x,2)`, `a2 = (c2/6) x(x-1)(x-2) = c2 C(x,3)`,
/// `a3 = c3 N2`, `a4 = c4 x`. The reverse trimolecular channel carries no
/// `N1` factor; with it the upper branch vanishes.
pub fn builtin_schlogl() -> Scenario {
    let model = ReactionModel::new(
        vec!["X".into()],
        vec![900],
        vec![vec![1], vec![-1], vec![1], vec![-1]],
        vec![
            PropensitySpec::new(SCHLOGL_C1 * SCHLOGL_N1, vec![(0, 2)]),
            PropensitySpec::new(SCHLOGL_C2, vec![(0, 3)]),
            PropensitySpec::constant(SCHLOGL_C3 * SCHLOGL_N2),
            PropensitySpec::new(SCHLOGL_C4, vec![(0, 1)]),
        ],
    )
    .expect("schlogl model is valid");
    Scenario {
        model,
        initial: InitialCondition::new(vec![250]),
        horizon: 4.0,
    }
}

/// Looks up a built-in scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "isomer" => Some(builtin_isomer()),
        "schlogl" => Some(builtin_schlogl()),
        _ => None,
    }
}
