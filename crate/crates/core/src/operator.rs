//! Sparse CTMC generators over a truncated state box.
//!
//! Everything here is stored column-compressed: column `j` lists the rates out
//! of state `x_j`. Rows and columns are 0-based.
//!
//! A firing that would leave the box is clipped: its propensity is dropped
//! from both the off-diagonal inflow and the diagonal outflow, so assembled
//! generators have zero column sums. Frozen matrices keep the constant rate
//! `a_r(xbar)` and only lose the positions that fall outside the box.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::ReactionModel;
use crate::statespace::StateSpace;

/// Column-compressed sparse square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
    column_sums: Vec<f64>,
}

impl Generator {
    /// Builds from per-column `(row, value)` lists. Rows are sorted and
    /// duplicates summed in insertion order; exact zeros are dropped.
    pub fn from_columns(dim: usize, columns: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(columns.len(), dim);
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            let start = rows.len();
            for (r, v) in col {
                debug_assert!(r < dim);
                if rows.len() > start && *rows.last().unwrap() == r {
                    *vals.last_mut().unwrap() += v;
                } else {
                    rows.push(r);
                    vals.push(v);
                }
            }
            // drop entries that cancelled or were zero to begin with
            let mut w = start;
            for k in start..rows.len() {
                if vals[k] != 0.0 {
                    rows[w] = rows[k];
                    vals[w] = vals[k];
                    w += 1;
                }
            }
            rows.truncate(w);
            vals.truncate(w);
            col_ptr.push(rows.len());
        }
        let column_sums = (0..dim)
            .map(|j| vals[col_ptr[j]..col_ptr[j + 1]].iter().sum())
            .collect();
        Self {
            dim,
            col_ptr,
            rows,
            vals,
            column_sums,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_columns(dim, vec![Vec::new(); dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|j| self.column(j).all(|(i, _)| i == j))
    }

    pub fn column_sums(&self) -> &[f64] {
        &self.column_sums
    }

    /// Nonzero `(row, value)` pairs of column `j`, rows ascending.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.rows[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        match self.rows[range.clone()].binary_search(&i) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self, j: usize) -> f64 {
        self.get(j, j)
    }

    /// `y = A x`, accumulated column by column in a fixed order.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for k in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.rows[k]] += self.vals[k] * xj;
            }
        }
    }

    /// Entrywise sum; values at shared positions are added `self + other`.
    pub fn add(&self, other: &Generator) -> Result<Generator> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "cannot add {}x{} and {}x{}",
                self.dim, self.dim, other.dim, other.dim
            )));
        }
        let columns = (0..self.dim)
            .map(|j| self.column(j).chain(other.column(j)).collect())
            .collect();
        Ok(Self::from_columns(self.dim, columns))
    }

    /// Sums matrices left to right, starting from the zero matrix.
    pub fn sum<'a>(dim: usize, parts: impl IntoIterator<Item = &'a Generator>) -> Result<Generator> {
        parts
            .into_iter()
            .try_fold(Generator::zeros(dim), |acc, g| acc.add(g))
    }

    pub fn scaled(&self, factor: f64) -> Generator {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out.column_sums.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shifted(&self, shift: f64) -> Generator {
        let columns = (0..self.dim)
            .map(|j| self.column(j).chain(std::iter::once((j, shift))).collect())
            .collect();
        Self::from_columns(self.dim, columns)
    }

    /// Largest exit rate `max_j -A_jj` (zero if no diagonal is negative).
    pub fn max_exit_rate(&self) -> f64 {
        (0..self.dim)
            .map(|j| -self.diagonal(j))
            .fold(0.0, f64::max)
    }

    /// Largest absolute column sum relative to the column's diagonal scale.
    fn column_sum_slack(&self, j: usize) -> f64 {
        let scale = self.column(j).map(|(_, v)| v.abs()).fold(1.0, f64::max);
        1e-12 * scale
    }

    /// Checks the sub-generator property: nonnegative off-diagonals and
    /// column sums not above zero (beyond rounding).
    pub fn check_subgenerator(&self) -> Result<()> {
        for j in 0..self.dim {
            for (i, v) in self.column(j) {
                if i != j && v < 0.0 {
                    return Err(Error::Structural(format!(
                        "negative off-diagonal {v:e} at ({i}, {j})"
                    )));
                }
            }
            if self.column_sums[j] > self.column_sum_slack(j) {
                return Err(Error::Structural(format!(
                    "column {j} sums to {:e} > 0",
                    self.column_sums[j]
                )));
            }
        }
        Ok(())
    }

    /// Checks the generator property: sub-generator with zero column sums.
    pub fn check_generator(&self) -> Result<()> {
        self.check_subgenerator()?;
        for j in 0..self.dim {
            if self.column_sums[j].abs() > self.column_sum_slack(j) {
                return Err(Error::Structural(format!(
                    "column {j} sums to {:e}",
                    self.column_sums[j]
                )));
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for j in 0..self.dim {
            for (i, v) in self.column(j) {
                out[i][j] = v;
            }
        }
        out
    }

    /// Row-major dense text, one row per line, space separated.
    pub fn dense_text(&self) -> String {
        let mut out = String::new();
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }
}

fn check_dims(model: &ReactionModel, space: &StateSpace) -> Result<()> {
    if model.n_species() != space.dim() || model.caps != space.caps() {
        return Err(Error::Dimension(format!(
            "model caps {:?} do not match space caps {:?}",
            model.caps,
            space.caps()
        )));
    }
    Ok(())
}

/// Visits every state with, per channel, its clipped propensity and target
/// 0-based index (`None` when the firing leaves the box).
fn for_each_transition(
    model: &ReactionModel,
    space: &StateSpace,
    mut f: impl FnMut(usize, usize, f64, Option<usize>),
) {
    let n = model.n_species();
    let mut x = vec![0i64; n];
    let mut y = vec![0i64; n];
    for j in 0..space.size() {
        space.fill_state0(j, &mut x);
        for (r, v) in model.stoich.iter().enumerate() {
            for ((yi, &xi), &vi) in y.iter_mut().zip(&x).zip(v) {
                *yi = xi + vi;
            }
            let a = model.rate(r, &x);
            if space.in_bounds(&y) {
                f(j, r, a, Some(space.index0(&y)));
            } else {
                f(j, r, 0.0, None);
            }
        }
    }
}

/// The full generator `A`: `A[i][j] = sum of clipped a_r(x_j)` over channels
/// with target `i`, and `A[j][j] = -sum_r clipped a_r(x_j)`.
pub fn assemble_generator(model: &ReactionModel, space: &StateSpace) -> Result<Generator> {
    check_dims(model, space)?;
    let q = space.size();
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); q];
    let mut diag = vec![0.0; q];
    for_each_transition(model, space, |j, _, a, target| {
        if let Some(i) = target {
            if a != 0.0 {
                columns[j].push((i, a));
            }
            diag[j] -= a;
        }
    });
    for (j, col) in columns.iter_mut().enumerate() {
        col.push((j, diag[j]));
    }
    Ok(Generator::from_columns(q, columns))
}

/// `[A_0, A_1, ..., A_M]`: the clipped diagonal and one off-diagonal
/// matrix per channel, summing to [`assemble_generator`].
pub fn assemble_channels(model: &ReactionModel, space: &StateSpace) -> Result<Vec<Generator>> {
    check_dims(model, space)?;
    let q = space.size();
    let m = model.n_reactions();
    let mut diag = vec![0.0; q];
    let mut chans: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); q]; m];
    for_each_transition(model, space, |j, r, a, target| {
        if let Some(i) = target {
            chans[r][j].push((i, a));
            diag[j] -= a;
        }
    });
    let a0 = Generator::from_columns(q, diag.iter().enumerate().map(|(j, &d)| vec![(j, d)]).collect());
    let mut out = vec![a0];
    out.extend(chans.into_iter().map(|c| Generator::from_columns(q, c)));
    Ok(out)
}

/// `[Abar_0, ..., Abar_M]` frozen at `xbar`: `Abar_0 = -a_0(xbar) I` and
/// `Abar_r` carries the constant `a_r(xbar)` at every in-box position
/// `(j + d_r, j)`. Propensities are not clipped.
pub fn assemble_frozen(
    model: &ReactionModel,
    space: &StateSpace,
    xbar: &[i64],
) -> Result<Vec<Generator>> {
    check_dims(model, space)?;
    if !space.in_bounds(xbar) {
        return Err(Error::OutOfBounds {
            state: xbar.to_vec(),
            caps: space.caps().to_vec(),
        });
    }
    let q = space.size();
    let rates: Vec<f64> = (0..model.n_reactions()).map(|r| model.rate(r, xbar)).collect();
    let a0: f64 = rates.iter().sum();
    let mut out = vec![Generator::from_columns(
        q,
        (0..q).map(|j| vec![(j, -a0)]).collect(),
    )];
    let mut chans: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); q]; rates.len()];
    for_each_transition(model, space, |j, r, _, target| {
        if let Some(i) = target {
            chans[r][j].push((i, rates[r]));
        }
    });
    out.extend(chans.into_iter().map(|c| Generator::from_columns(q, c)));
    Ok(out)
}

/// `[B_1, ..., B_M]`: single-channel generators with `-a_r(x_j)` on the
/// diagonal and `a_r(x_j)` at `(j + d_r, j)`, both clipped.
pub fn assemble_reaction_generators(
    model: &ReactionModel,
    space: &StateSpace,
) -> Result<Vec<Generator>> {
    check_dims(model, space)?;
    let q = space.size();
    let m = model.n_reactions();
    let mut chans: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); q]; m];
    for_each_transition(model, space, |j, r, a, target| {
        if let Some(i) = target {
            chans[r][j].push((i, a));
            chans[r][j].push((j, -a));
        }
    });
    Ok(chans.into_iter().map(|c| Generator::from_columns(q, c)).collect())
}

/// Column `j` of a generator as a rank-one piece `A_j = c_j e_j^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnPiece {
    pub j: usize,
    /// Nonzeros of `c_j`, rows ascending.
    pub entries: Vec<(usize, f64)>,
}

impl ColumnPiece {
    /// `e_j^T c_j`, i.e. the diagonal entry `-a_0(x_j)`.
    pub fn self_weight(&self) -> f64 {
        self.entries
            .iter()
            .find(|&&(i, _)| i == self.j)
            .map_or(0.0, |&(_, v)| v)
    }
}

pub fn column_piece(a: &Generator, j: usize) -> Result<ColumnPiece> {
    if j >= a.dim() {
        return Err(Error::IndexOutOfRange {
            index: j,
            size: a.dim(),
        });
    }
    Ok(ColumnPiece {
        j,
        entries: a.column(j).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_isomer, builtin_schlogl, PropensitySpec};

    fn isomer_small() -> (ReactionModel, StateSpace) {
        let m = builtin_isomer().model.with_caps(vec![2, 2]).unwrap();
        let s = StateSpace::for_model(&m).unwrap();
        (m, s)
    }

    #[test]
    fn channel_sum_equals_generator() {
        for (m, s) in [
            isomer_small(),
            {
                let m = builtin_schlogl().model.with_caps(vec![5]).unwrap();
                let s = StateSpace::for_model(&m).unwrap();
                (m, s)
            },
        ] {
            let a = assemble_generator(&m, &s).unwrap();
            let chans = assemble_channels(&m, &s).unwrap();
            assert_eq!(Generator::sum(a.dim(), &chans).unwrap(), a);
            let bs = assemble_reaction_generators(&m, &s).unwrap();
            assert_eq!(Generator::sum(a.dim(), &bs).unwrap(), a);
            for b in &bs {
                b.check_generator().unwrap();
            }
            a.check_generator().unwrap();
            // A_0 is diagonal
            for j in 0..a.dim() {
                assert!(chans[0].column(j).all(|(i, _)| i == j));
            }
        }
    }

    #[test]
    fn isomer_channel_one_lies_on_offset_two() {
        let (m, s) = isomer_small();
        let chans = assemble_channels(&m, &s).unwrap();
        for j in 0..9 {
            for (i, _) in chans[1].column(j) {
                assert_eq!(i as i64 - j as i64, 2);
            }
            for (i, _) in chans[2].column(j) {
                assert_eq!(i as i64 - j as i64, -2);
            }
        }
    }

    #[test]
    fn frozen_isomer_constant_entries() {
        let sc = builtin_isomer();
        let s = StateSpace::for_model(&sc.model).unwrap();
        let fr = assemble_frozen(&sc.model, &s, &[40, 40]).unwrap();
        assert_eq!(fr.len(), 3);
        for j in 0..s.size() {
            assert_eq!(fr[0].diagonal(j), -800.0);
            for (_, v) in fr[1].column(j) {
                assert_eq!(v, 400.0);
            }
        }
        assert!(assemble_frozen(&sc.model, &s, &[81, 0]).is_err());
    }

    #[test]
    fn frozen_sum_applied_to_delta_is_cme_stencil() {
        let sc = builtin_isomer();
        let s = StateSpace::for_model(&sc.model).unwrap();
        let xbar = [40, 40];
        let fr = assemble_frozen(&sc.model, &s, &xbar).unwrap();
        let abar = Generator::sum(s.size(), &fr).unwrap();
        let mut p = vec![0.0; s.size()];
        let j = s.index0(&xbar);
        p[j] = 1.0;
        let mut out = vec![0.0; s.size()];
        abar.apply(&p, &mut out);
        // frozen CME right-hand side: sum_r a_r(xbar) P(x - v_r) - a_0(xbar) P(x)
        for (idx, x) in s.states().enumerate() {
            let mut rhs = 0.0;
            for (r, v) in sc.model.stoich.iter().enumerate() {
                let src: Vec<i64> = x.iter().zip(v).map(|(a, b)| a - b).collect();
                if src == xbar {
                    rhs += sc.model.propensity(r, &xbar).unwrap();
                }
            }
            if x == xbar {
                rhs -= 800.0;
            }
            assert_eq!(out[idx], rhs, "state {x:?}");
        }
    }

    #[test]
    fn schlogl_b4_is_bidiagonal() {
        let m = builtin_schlogl().model.with_caps(vec![5]).unwrap();
        let s = StateSpace::for_model(&m).unwrap();
        let bs = assemble_reaction_generators(&m, &s).unwrap();
        let b4 = bs[3].to_dense();
        for i in 0..6 {
            for j in 0..6 {
                let a4 = 3.5 * j as f64;
                let expected = if j == 0 {
                    0.0
                } else if i == j {
                    -a4
                } else if i + 1 == j {
                    a4
                } else {
                    0.0
                };
                assert_eq!(b4[i][j], expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn zero_rates_give_zero_matrix() {
        let m = ReactionModel::new(
            vec!["A".into()],
            vec![4],
            vec![vec![1], vec![-1]],
            vec![PropensitySpec::constant(0.0), PropensitySpec::new(0.0, vec![(0, 1)])],
        )
        .unwrap();
        let s = StateSpace::for_model(&m).unwrap();
        assert_eq!(assemble_generator(&m, &s).unwrap().nnz(), 0);
    }

    #[test]
    fn column_pieces_rebuild_generator() {
        let (m, s) = isomer_small();
        let a = assemble_generator(&m, &s).unwrap();
        let mut cols = Vec::new();
        for j in 0..a.dim() {
            let piece = column_piece(&a, j).unwrap();
            let x = s.state_of(j + 1).unwrap();
            let clipped_a0: f64 = (0..m.n_reactions())
                .filter(|&r| {
                    let y: Vec<i64> = x.iter().zip(&m.stoich[r]).map(|(a, b)| a + b).collect();
                    s.in_bounds(&y)
                })
                .map(|r| m.propensity(r, &x).unwrap())
                .sum();
            assert_eq!(piece.self_weight(), -clipped_a0);
            cols.push(piece.entries);
        }
        assert_eq!(Generator::from_columns(a.dim(), cols), a);
        // state (0,0) cannot react
        assert!(column_piece(&a, 0).unwrap().entries.is_empty());
        assert!(column_piece(&a, 9).is_err());
    }

    #[test]
    fn subgenerator_checks() {
        let bad = Generator::from_columns(2, vec![vec![(0, -1.0), (1, 2.0)], vec![]]);
        assert!(matches!(bad.check_subgenerator(), Err(Error::Structural(_))));
        let neg = Generator::from_columns(2, vec![vec![(0, 1.0), (1, -2.0)], vec![]]);
        assert!(neg.check_subgenerator().is_err());
        let leaky = Generator::from_columns(2, vec![vec![(0, -2.0), (1, 1.0)], vec![]]);
        leaky.check_subgenerator().unwrap();
        assert!(leaky.check_generator().is_err());
    }
}
