//! Mixed-radix enumeration of the truncated state box `0 <= x_i <= cap_i`.
//!
//! Species 0 varies fastest: `index(x) = 1 + sum_i stride_i * x_i` with
//! `stride_0 = 1` and `stride_{i+1} = stride_i * (cap_i + 1)`. Public indices
//! are 1-based; the `*0` helpers are the 0-based forms used by the matrices.

use crate::error::{Error, Result};
use crate::model::ReactionModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    caps: Vec<u32>,
    strides: Vec<usize>,
    size: usize,
}

/// Linear-index shift `d_r` produced by one firing of each channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactionOffset {
    pub d: Vec<i64>,
}

impl StateSpace {
    pub fn new(caps: &[u32]) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::usage("state space needs at least one species"));
        }
        let mut strides = Vec::with_capacity(caps.len());
        let mut size: usize = 1;
        for &cap in caps {
            strides.push(size);
            size = size
                .checked_mul(cap as usize + 1)
                .ok_or_else(|| Error::usage("state space size overflows usize"))?;
        }
        Ok(Self {
            caps: caps.to_vec(),
            strides,
            size,
        })
    }

    pub fn for_model(model: &ReactionModel) -> Result<Self> {
        Self::new(&model.caps)
    }

    pub fn caps(&self) -> &[u32] {
        &self.caps
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Total number of states `Q = prod (cap_i + 1)`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.caps.len()
    }

    pub fn in_bounds(&self, x: &[i64]) -> bool {
        x.len() == self.caps.len()
            && x.iter().zip(&self.caps).all(|(&v, &c)| v >= 0 && v <= c as i64)
    }

    fn check(&self, x: &[i64]) -> Result<()> {
        if x.len() != self.caps.len() {
            return Err(Error::Dimension(format!(
                "state has {} components, space has {}",
                x.len(),
                self.caps.len()
            )));
        }
        if !self.in_bounds(x) {
            return Err(Error::OutOfBounds {
                state: x.to_vec(),
                caps: self.caps.clone(),
            });
        }
        Ok(())
    }

    /// 1-based linear index of `x`.
    pub fn index_of(&self, x: &[i64]) -> Result<usize> {
        self.check(x)?;
        Ok(self.index0(x) + 1)
    }

    /// Inverse of [`index_of`](Self::index_of).
    pub fn state_of(&self, index: usize) -> Result<Vec<i64>> {
        if index == 0 || index > self.size {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            });
        }
        let mut x = vec![0; self.caps.len()];
        self.fill_state0(index - 1, &mut x);
        Ok(x)
    }

    /// 0-based index; `x` must be in bounds.
    #[inline]
    pub fn index0(&self, x: &[i64]) -> usize {
        x.iter()
            .zip(&self.strides)
            .map(|(&v, &s)| v as usize * s)
            .sum()
    }

    /// Writes the state with 0-based index `idx` into `x`.
    #[inline]
    pub fn fill_state0(&self, mut idx: usize, x: &mut [i64]) {
        for (slot, &cap) in x.iter_mut().zip(&self.caps) {
            let radix = cap as usize + 1;
            *slot = (idx % radix) as i64;
            idx /= radix;
        }
    }

    /// `d_r = sum_i stride_i * v_r^i` for every channel.
    pub fn reaction_offsets(&self, model: &ReactionModel) -> Result<ReactionOffset> {
        if model.n_species() != self.dim() {
            return Err(Error::Dimension(format!(
                "model has {} species, space has {}",
                model.n_species(),
                self.dim()
            )));
        }
        let d = model
            .stoich
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&self.strides)
                    .map(|(&dv, &s)| dv * s as i64)
                    .sum()
            })
            .collect();
        Ok(ReactionOffset { d })
    }

    /// Iterates over all states in index order.
    pub fn states(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.size).map(move |i| {
            let mut x = vec![0; self.caps.len()];
            self.fill_state0(i, &mut x);
            x
        })
    }
}
