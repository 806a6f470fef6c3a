//! Dense two-phase primal simplex and the zero-sum matrix-game solver built
//! on it.
//!
//! Entering variable: largest reduced cost, switching to Bland's rule after
//! `degenerate_limit` consecutive degenerate pivots. Leaving variable: minimum
//! ratio, ties broken by the smallest basic column index. The whole solve is
//! deterministic for a given input.

use num::BigRational;

use crate::error::{NasgError, Result};
use crate::scalar::Scalar;

/// Largest `rows * cols` accepted by [`solve_matrix_game`].
pub const MAX_GAME_ENTRIES: usize = 10_000_000;

/// Numerical knobs for every LP solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility and pivot-element threshold.
    pub feasibility: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
    /// Residual phase-one infeasibility accepted as feasible.
    pub phase_one: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_limit: usize,
    /// Hard cap on pivots per phase; `0` picks a size-based default.
    pub max_pivots: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { feasibility: 1e-9, optimality: 1e-8, phase_one: 1e-9, degenerate_limit: 50, max_pivots: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint<T = f64> {
    pub coeffs: Vec<T>,
    pub relation: Relation,
    pub rhs: T,
}

impl<T> Constraint<T> {
    pub fn new(coeffs: Vec<T>, relation: Relation, rhs: T) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

/// `maximize objective·x` subject to `constraints`, `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<T = f64> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<T = f64> {
    /// Basic optimal solution. `duals[i]` prices constraint `i`.
    Optimal { x: Vec<T>, objective: T, duals: Vec<T> },
    /// No feasible point. `certificate` is a Farkas multiplier `y`:
    /// `yᵀA <= 0` column-wise, `y·b = infeasibility > 0`, `y_i >= 0` on `>=`
    /// rows and `y_i <= 0` on `<=` rows.
    Infeasible { certificate: Vec<T>, infeasibility: T },
    Unbounded,
}

/// Solves a small dense LP. Every variable is nonnegative.
pub fn feasibility_lp<T: Scalar>(lp: &LinearProgram<T>, tol: &Tolerances) -> Result<LpOutcome<T>> {
    let d = lp.objective.len();
    if d > 10_000 || lp.constraints.len() > 100_000 {
        return Err(NasgError::Capacity(format!(
            "LP with {d} variables and {} constraints exceeds limits",
            lp.constraints.len()
        )));
    }
    if let Some(c) = lp.constraints.iter().find(|c| c.coeffs.len() != d) {
        return Err(NasgError::DimensionMismatch { expected: d, got: c.coeffs.len() });
    }
    Tableau::build(lp, tol).solve(lp)
}

struct Tableau<T> {
    m: usize,
    d: usize,
    /// Total columns excluding the right-hand side.
    cols: usize,
    /// Row-major `m x (cols + 1)`; last entry of each row is the rhs.
    a: Vec<T>,
    basis: Vec<usize>,
    /// Column carrying the unit vector of each row at the start (slack or
    /// artificial); used to read duals.
    unit_col: Vec<usize>,
    artificial_start: usize,
    /// +1 or -1 applied to each row to make its rhs nonnegative.
    sign: Vec<T>,
    feas: T,
    opt: T,
    phase_one: T,
    degenerate_limit: usize,
    max_pivots: usize,
}

impl<T: Scalar> Tableau<T> {
    fn build(lp: &LinearProgram<T>, tol: &Tolerances) -> Self {
        let m = lp.constraints.len();
        let d = lp.objective.len();
        let mut sign = Vec::with_capacity(m);
        let mut rel = Vec::with_capacity(m);
        for c in &lp.constraints {
            let flip = c.rhs < T::zero();
            sign.push(if flip { -T::one() } else { T::one() });
            rel.push(match (c.relation, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            });
        }
        let n_slack = rel.iter().filter(|r| **r != Relation::Eq).count();
        let n_art = rel.iter().filter(|r| **r != Relation::Le).count();
        let cols = d + n_slack + n_art;
        let artificial_start = d + n_slack;
        let width = cols + 1;
        let mut a = vec![T::zero(); m * width];
        let mut basis = vec![0; m];
        let mut unit_col = vec![0; m];
        let (mut next_slack, mut next_art) = (d, artificial_start);
        for (i, c) in lp.constraints.iter().enumerate() {
            let row = &mut a[i * width..(i + 1) * width];
            for (j, v) in c.coeffs.iter().enumerate() {
                row[j] = v.clone() * sign[i].clone();
            }
            row[cols] = c.rhs.clone() * sign[i].clone();
            match rel[i] {
                Relation::Le => {
                    row[next_slack] = T::one();
                    basis[i] = next_slack;
                    unit_col[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -T::one();
                    next_slack += 1;
                    row[next_art] = T::one();
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = T::one();
                    basis[i] = next_art;
                    unit_col[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let max_pivots = if tol.max_pivots > 0 { tol.max_pivots } else { 50_000 + 50 * (m + cols) };
        Tableau {
            m,
            d,
            cols,
            a,
            basis,
            unit_col,
            artificial_start,
            sign,
            feas: T::tolerance(tol.feasibility),
            opt: T::tolerance(tol.optimality),
            phase_one: T::tolerance(tol.phase_one),
            degenerate_limit: tol.degenerate_limit,
            max_pivots,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> &T {
        &self.a[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> &T {
        self.at(i, self.cols)
    }

    /// Reduced costs `c_j - c_Bᵀ B⁻¹ A_j` for every column.
    fn reduced_costs(&self, cost: &[T]) -> Vec<T> {
        let mut rc: Vec<T> = cost.to_vec();
        for i in 0..self.m {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, r) in rc.iter_mut().enumerate() {
                let aij = self.at(i, j);
                if !aij.is_zero() {
                    *r -= cb.clone() * aij.clone();
                }
            }
        }
        rc
    }

    fn pivot(&mut self, row: usize, col: usize, rc: &mut [T]) {
        let width = self.cols + 1;
        let p = self.at(row, col).clone();
        for j in 0..width {
            let v = self.a[row * width + j].clone();
            self.a[row * width + j] = v / p.clone();
        }
        let pivot_row: Vec<T> = self.a[row * width..(row + 1) * width].to_vec();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.a[i * width + col].clone();
            if f.is_zero() {
                continue;
            }
            for (j, pv) in pivot_row.iter().enumerate() {
                if !pv.is_zero() {
                    let v = self.a[i * width + j].clone();
                    self.a[i * width + j] = v - f.clone() * pv.clone();
                }
            }
            // Exact zero on the pivot column keeps the tableau clean.
            self.a[i * width + col] = T::zero();
        }
        let f = rc[col].clone();
        if !f.is_zero() {
            for (j, pv) in pivot_row.iter().take(self.cols).enumerate() {
                if !pv.is_zero() {
                    let v = rc[j].clone();
                    rc[j] = v - f.clone() * pv.clone();
                }
            }
            rc[col] = T::zero();
        }
        self.basis[row] = col;
    }

    /// Runs primal simplex for `cost` over columns `< allowed`. Returns false
    /// when unbounded.
    fn optimize(&mut self, cost: &[T], allowed: usize) -> Result<bool> {
        let mut rc = self.reduced_costs(cost);
        let mut degenerate_run = 0usize;
        for _ in 0..self.max_pivots {
            let bland = degenerate_run >= self.degenerate_limit;
            let mut entering: Option<usize> = None;
            for j in 0..allowed {
                if rc[j] > self.opt && !self.basis.contains(&j) {
                    match entering {
                        None => entering = Some(j),
                        Some(e) if !bland && rc[j] > rc[e] => entering = Some(j),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leaving: Option<(usize, T)> = None;
            for i in 0..self.m {
                let aij = self.at(i, col);
                if *aij > self.feas {
                    let ratio = self.rhs(i).clone() / aij.clone();
                    let better = match &leaving {
                        None => true,
                        Some((r, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r]),
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, ratio)) = leaving else {
                return Ok(false);
            };
            if ratio.abs_val() <= self.feas {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col, &mut rc);
        }
        Err(NasgError::Solver(format!(
            "simplex exceeded {} pivots ({} rows, {} columns)",
            self.max_pivots, self.m, self.cols
        )))
    }

    /// Multipliers of the current basis for `cost`, mapped back to the
    /// caller's row orientation.
    fn duals(&self, cost: &[T]) -> Vec<T> {
        let rc = self.reduced_costs(cost);
        (0..self.m)
            .map(|i| {
                let j = self.unit_col[i];
                (cost[j].clone() - rc[j].clone()) * self.sign[i].clone()
            })
            .collect()
    }

    fn solve(mut self, lp: &LinearProgram<T>) -> Result<LpOutcome<T>> {
        if self.artificial_start < self.cols {
            let mut phase1 = vec![T::zero(); self.cols];
            for c in &mut phase1[self.artificial_start..] {
                *c = -T::one();
            }
            if !self.optimize(&phase1, self.cols)? {
                return Err(NasgError::Solver("phase one reported unbounded".into()));
            }
            let infeasibility: T = (0..self.m)
                .filter(|i| self.basis[*i] >= self.artificial_start)
                .fold(T::zero(), |acc, i| acc + self.rhs(i).clone());
            if infeasibility > self.phase_one {
                // Phase-one duals y satisfy Aᵀy >= 0 and b·y = -infeasibility.
                let certificate = self.duals(&phase1).into_iter().map(|v| -v).collect();
                return Ok(LpOutcome::Infeasible { certificate, infeasibility });
            }
            self.drive_out_artificials();
        }
        let mut cost = vec![T::zero(); self.cols];
        cost[..self.d].clone_from_slice(&lp.objective);
        if !self.optimize(&cost, self.artificial_start)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![T::zero(); self.d];
        for i in 0..self.m {
            if self.basis[i] < self.d {
                let v = self.rhs(i).clone();
                x[self.basis[i]] = if v < T::zero() { T::zero() } else { v };
            }
        }
        let objective = x.iter().zip(&lp.objective).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone());
        let duals = self.duals(&cost);
        Ok(LpOutcome::Optimal { x, objective, duals })
    }

    /// Pivots zero-valued artificials out of the basis where a structural or
    /// slack column can replace them; rows where none can are redundant.
    fn drive_out_artificials(&mut self) {
        let mut dummy = vec![T::zero(); self.cols];
        for i in 0..self.m {
            if self.basis[i] < self.artificial_start {
                continue;
            }
            let col = (0..self.artificial_start)
                .find(|&j| self.at(i, j).abs_val() > self.feas && !self.basis.contains(&j));
            if let Some(col) = col {
                self.pivot(i, col, &mut dummy);
            }
        }
    }
}

/// A finite two-player zero-sum game. The row player maximizes.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(NasgError::InvalidInput("matrix game needs at least one row and column".into()));
        }
        if data.len() != rows * cols {
            return Err(NasgError::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NasgError::InvalidInput("non-finite payoff".into()));
        }
        Ok(MatrixGame { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NasgError::InvalidInput("ragged payoff matrix".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Expected payoff of each pure row against column mixture `q`.
    pub fn row_payoffs(&self, q: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * q[j]).sum()).collect()
    }

    /// Expected payoff of each pure column against row mixture `p`.
    pub fn col_payoffs(&self, p: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j) * p[i]).sum()).collect()
    }

    pub fn transpose_negated(&self) -> MatrixGame {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(-self.get(i, j));
            }
        }
        MatrixGame { rows: self.cols, cols: self.rows, data }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

impl GameSolution {
    /// Largest improvement any pure deviation offers either player.
    pub fn exploitability(&self, game: &MatrixGame) -> (f64, f64) {
        let best_row = game.row_payoffs(&self.col_strategy).into_iter().fold(f64::NEG_INFINITY, f64::max);
        let best_col = game.col_payoffs(&self.row_strategy).into_iter().fold(f64::INFINITY, f64::min);
        (best_row - self.value, self.value - best_col)
    }
}

pub fn solve_matrix_game(game: &MatrixGame) -> Result<GameSolution> {
    solve_matrix_game_with::<f64>(game, &Tolerances::default())
}

/// Same as [`solve_matrix_game`] with rational pivoting.
pub fn solve_matrix_game_exact(game: &MatrixGame) -> Result<GameSolution> {
    solve_matrix_game_with::<BigRational>(game, &Tolerances::default())
}

/// Minimax solution of `game` in arithmetic `T`.
///
/// After shifting the payoffs positive, the column player's problem is
/// `max Σz s.t. M z <= 1, z >= 0`; the row strategy is read from its duals.
pub fn solve_matrix_game_with<T: Scalar>(game: &MatrixGame, tol: &Tolerances) -> Result<GameSolution> {
    if game.rows.saturating_mul(game.cols) > MAX_GAME_ENTRIES {
        return Err(NasgError::Capacity(format!("{}x{} matrix game too large", game.rows, game.cols)));
    }
    let min = game.data.iter().copied().fold(f64::INFINITY, f64::min);
    let shift_f = 1.0 - min;
    let shift = T::from_f64(shift_f).ok_or_else(|| NasgError::InvalidInput("non-finite payoff".into()))?;
    let constraints = (0..game.rows)
        .map(|i| {
            let coeffs = (0..game.cols)
                .map(|j| T::from_f64(game.get(i, j)).expect("finite") + shift.clone())
                .collect();
            Constraint::new(coeffs, Relation::Le, T::one())
        })
        .collect();
    let lp = LinearProgram { objective: vec![T::one(); game.cols], constraints };
    match feasibility_lp(&lp, tol)? {
        LpOutcome::Optimal { x, objective, duals } => {
            if objective <= T::zero() {
                return Err(NasgError::Solver("degenerate game LP objective".into()));
            }
            let value = T::one() / objective.clone() - shift;
            let col_strategy = normalize(x.iter().map(Scalar::to_f64).collect());
            let row_strategy = normalize(duals.iter().map(|y| Scalar::to_f64(y).max(0.0)).collect());
            let sol = GameSolution { value: value.to_f64(), row_strategy, col_strategy };
            let (row_gap, col_gap) = sol.exploitability(game);
            let slack = 1e-6 * (1.0 + sol.value.abs());
            if row_gap > slack || col_gap > slack {
                return Err(NasgError::Solver(format!(
                    "minimax certificate failed: row gap {row_gap:.3e}, column gap {col_gap:.3e}"
                )));
            }
            Ok(sol)
        }
        other => Err(NasgError::Solver(format!("matrix game LP ended as {other:?}"))),
    }
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for x in &mut v {
            *x /= total;
        }
    }
    v
}
