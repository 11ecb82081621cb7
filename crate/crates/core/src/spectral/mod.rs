//! Grid discretizations of one-dimensional kernels, Dirichlet forms, spectral
//! gaps and the comparison checks built on them.
//!
//! Matrices are cell-averaged: entry `(i, j)` is the probability of moving
//! from cell `i` to cell `j` when starting from `π` restricted to cell `i`.
//! For functions constant on cells the matrix Dirichlet form is then the exact
//! Dirichlet form of the kernel, so inequalities between kernels carry over
//! to the matrices without discretization error.

mod functions;
mod galerkin;
mod grid;
mod monte_carlo;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::target::Target;
use crate::wpi::BetaFn;

pub use functions::{ideal_dirichlet_quadrature, Observable, TestFunction, TestFunctionKind, TestFunctionSet};
pub use galerkin::{joint_masses, MatrixKernel};
pub use grid::{pi_cdf, pi_interval, pi_quantile, Grid, MAX_FOLD, MAX_GRID};
pub use monte_carlo::{
    chi_square_test, dirichlet_form_mc, discretize_empirical, invariance_test, DirichletEstimate, EmpiricalMatrix, InvarianceReport,
    MomentCheck,
};

/// Tolerance on `|Σ_j J_ij − π(C_i)| / π(C_i)` for assembled matrices.
pub const RENORMALIZATION_TOL: f64 = 1e-8;
/// Tolerance for `π_i P_ij = π_j P_ji`.
pub const REVERSIBILITY_TOL: f64 = 1e-8;

/// A row-stochastic matrix on a grid with its stationary weights.
#[derive(Debug, Clone)]
pub struct StochasticMatrix {
    pub label: String,
    pub grid: Grid,
    /// `J_ij = π_i P_ij`.
    pub joint: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub weights: Vec<f64>,
    /// Largest relative gap between row sums of `J` and the cell masses.
    pub correction: f64,
}

impl StochasticMatrix {
    /// Builds the matrix from joint masses, taking `π_i = Σ_j J_ij`.
    pub fn from_joint(label: impl Into<String>, grid: Grid, joint: DMatrix<f64>) -> Result<Self> {
        let n = grid.len();
        if joint.nrows() != n || joint.ncols() != n {
            return Err(crate::error::invalid("joint matrix does not match the grid"));
        }
        if let Some((k, v)) = joint.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < -1e-15) {
            return Err(Error::Quadrature(format!(
                "joint mass ({}, {}) = {v:e} is not a finite nonnegative number",
                k % n,
                k / n
            )));
        }
        let joint = joint.map(|v| v.max(0.0));
        let weights: Vec<f64> = (0..n).map(|i| joint.row(i).sum()).collect();
        let correction = weights
            .iter()
            .zip(&grid.pi_mass)
            .map(|(w, m)| (w / m - 1.0).abs())
            .fold(0.0, f64::max);
        if correction > RENORMALIZATION_TOL {
            return Err(Error::Renormalization { correction });
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(crate::error::invalid("stationary weights must be positive"));
        }
        let p = DMatrix::from_fn(n, n, |i, j| joint[(i, j)] / weights[i]);
        Ok(StochasticMatrix { label: label.into(), grid, joint, p, weights, correction })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest `|Σ_j P_ij − 1|`.
    pub fn row_sum_error(&self) -> f64 {
        (0..self.len()).map(|i| (self.p.row(i).sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|(πᵀP)_j − π_j|`.
    pub fn invariance_error(&self) -> f64 {
        (0..self.len())
            .map(|j| {
                let s: f64 = (0..self.len()).map(|i| self.weights[i] * self.p[(i, j)]).sum();
                (s - self.weights[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|π_i P_ij − π_j P_ji|`.
    pub fn reversibility_residual(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let a = self.weights[i] * self.p[(i, j)];
                let b = self.weights[j] * self.p[(j, i)];
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }

    /// `D^{1/2} P D^{−1/2}`, symmetrized.
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let n = self.len();
        let s: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let m = DMatrix::from_fn(n, n, |i, j| s[i] * self.p[(i, j)] / s[j]);
        (m.clone() + m.transpose()) * 0.5
    }
}

/// Discretizes a kernel on a [`Grid::mixed`] grid of `n` cells up to `x_max`.
///
/// ```
/// use slicelab::spectral::{discretize_1d, spectral_gap, MatrixKernel};
/// let t = slicelab::Target::exp(1.0, 0.5).unwrap();
/// let u = discretize_1d(&MatrixKernel::Ideal, &t, 100, 40.0).unwrap();
/// assert!(spectral_gap(&u).unwrap() >= 0.75 - 0.02);
/// ```
pub fn discretize_1d(kernel: &MatrixKernel, target: &Target, n: usize, x_max: f64) -> Result<StochasticMatrix> {
    let grid = Grid::mixed(target, n, x_max)?;
    discretize_on_grid(kernel, target, &grid)
}

/// Discretizes a kernel on a given grid.
pub fn discretize_on_grid(kernel: &MatrixKernel, target: &Target, grid: &Grid) -> Result<StochasticMatrix> {
    let joint = joint_masses(kernel, target, grid)?;
    StochasticMatrix::from_joint(kernel.name(), grid.clone(), joint)
}

/// `½ Σ_ij π_i P_ij (f_i − f_j)²`.
pub fn dirichlet_form_matrix(p: &StochasticMatrix, f: &[f64]) -> f64 {
    let n = p.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = f[i] - f[j];
            total += 0.5 * (p.joint[(i, j)] + p.joint[(j, i)]) * d * d;
        }
    }
    total
}

/// `Var_π(f)` on the grid.
pub fn variance(weights: &[f64], f: &[f64]) -> f64 {
    let mean: f64 = weights.iter().zip(f).map(|(w, v)| w * v).sum();
    weights.iter().zip(f).map(|(w, v)| w * (v - mean) * (v - mean)).sum()
}

/// `max f − min f` over cells with positive weight.
pub fn osc_norm(f: &[f64], weights: &[f64]) -> f64 {
    let vals = f.iter().zip(weights).filter(|(_, w)| **w > 0.0).map(|(v, _)| *v);
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

fn check_reversible(p: &StochasticMatrix) -> Result<()> {
    let residual = p.reversibility_residual();
    if residual > REVERSIBILITY_TOL {
        return Err(Error::Reversibility { residual });
    }
    Ok(())
}

/// Eigenvalues of the symmetrized matrix, ascending.
pub fn spectrum(p: &StochasticMatrix) -> Result<Vec<f64>> {
    check_reversible(p)?;
    let mut ev: Vec<f64> = SymmetricEigen::new(p.symmetrized()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `1 − max |λ|` over the spectrum orthogonal to constants.
pub fn spectral_gap(p: &StochasticMatrix) -> Result<f64> {
    check_reversible(p)?;
    let n = p.len();
    let root: Vec<f64> = p.weights.iter().map(|w| w.sqrt()).collect();
    let s = p.symmetrized() - DMatrix::from_fn(n, n, |i, j| root[i] * root[j]);
    let eig = SymmetricEigen::new(s).eigenvalues;
    let top = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((1.0 - top).max(0.0))
}

/// Reversibility residual and smallest eigenvalue of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub reversibility_residual: f64,
    pub min_eigenvalue: f64,
    pub reversible: bool,
    pub positive: bool,
}

pub fn check_reversible_positive(p: &StochasticMatrix) -> PositivityReport {
    let residual = p.reversibility_residual();
    let min_eigenvalue = SymmetricEigen::new(p.symmetrized()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    PositivityReport {
        reversibility_residual: residual,
        min_eigenvalue,
        reversible: residual <= REVERSIBILITY_TOL,
        positive: min_eigenvalue >= -1e-8,
    }
}

fn same_grid(a: &StochasticMatrix, b: &StochasticMatrix) -> Result<()> {
    if a.grid.edges != b.grid.edges {
        return Err(crate::error::invalid("matrices live on different grids"));
    }
    let dw = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    if dw > 1e-8 {
        return Err(crate::error::invalid(format!("stationary weights differ by {dw:e}")));
    }
    Ok(())
}

/// Dirichlet forms of one test function under two kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct FormPair {
    pub id: String,
    pub e_u: f64,
    pub e_h: f64,
}

impl FormPair {
    /// `E_H / E_U`, `NaN` when `E_U = 0`.
    pub fn ratio(&self) -> f64 {
        if self.e_u > 0.0 {
            self.e_h / self.e_u
        } else {
            f64::NAN
        }
    }
}

/// Outcome of `E(H, f) ≤ E(U, f) + tol` over a set of functions.
#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub forms: Vec<FormPair>,
    /// Largest `E(H, f) − E(U, f)`.
    pub max_violation: f64,
    pub worst: Option<String>,
    pub passed: bool,
}

pub fn check_domination(
    p_u: &StochasticMatrix,
    p_h: &StochasticMatrix,
    fns: &TestFunctionSet,
    tol: f64,
) -> Result<DominationReport> {
    same_grid(p_u, p_h)?;
    let mut forms = Vec::new();
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst = None;
    for f in &fns.functions {
        let e_u = dirichlet_form_matrix(p_u, &f.values);
        let e_h = dirichlet_form_matrix(p_h, &f.values);
        if e_h - e_u > max_violation {
            max_violation = e_h - e_u;
            worst = Some(f.id.clone());
        }
        forms.push(FormPair { id: f.id.clone(), e_u, e_h });
    }
    Ok(DominationReport { forms, max_violation, worst, passed: max_violation <= tol })
}

/// One `(s, f)` evaluation of `E(U,f) ≤ s E(H,f) + β(s) ‖f‖²_osc`.
#[derive(Debug, Clone, PartialEq)]
pub struct WpiRow {
    pub s: f64,
    pub id: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl WpiRow {
    pub fn margin(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WpiReport {
    pub rows: Vec<WpiRow>,
    pub min_margin: f64,
    pub worst: Option<(f64, String)>,
    pub passed: bool,
}

pub fn check_wpi_comparison(
    p_u: &StochasticMatrix,
    p_h: &StochasticMatrix,
    beta: &BetaFn,
    s_grid: &[f64],
    fns: &TestFunctionSet,
    tol: f64,
) -> Result<WpiReport> {
    same_grid(p_u, p_h)?;
    let mut rows = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut worst = None;
    for f in &fns.functions {
        let e_u = dirichlet_form_matrix(p_u, &f.values);
        let e_h = dirichlet_form_matrix(p_h, &f.values);
        let osc = osc_norm(&f.values, &p_u.weights);
        for &s in s_grid {
            let row = WpiRow { s, id: f.id.clone(), lhs: e_u, rhs: s * e_h + beta.eval(s) * osc * osc };
            if row.margin() < min_margin {
                min_margin = row.margin();
                worst = Some((s, f.id.clone()));
            }
            rows.push(row);
        }
    }
    Ok(WpiReport { rows, min_margin, worst, passed: min_margin >= -tol })
}

/// `γ E(U,f) ≤ E(H,f) ≤ E(U,f)` for every test function; returns the
/// smallest margin of the two inequalities.
pub fn check_gap_sandwich(p_u: &StochasticMatrix, p_h: &StochasticMatrix, gamma: f64, fns: &TestFunctionSet) -> Result<f64> {
    same_grid(p_u, p_h)?;
    Ok(fns
        .functions
        .iter()
        .map(|f| {
            let e_u = dirichlet_form_matrix(p_u, &f.values);
            let e_h = dirichlet_form_matrix(p_h, &f.values);
            (e_h - gamma * e_u).min(e_u - e_h)
        })
        .fold(f64::INFINITY, f64::min))
}

/// `inf_f E(H,f)/E(U,f)` over all nonconstant grid functions, as the smallest
/// generalized eigenvalue of the two Dirichlet forms on the complement of
/// constants.
pub fn min_dirichlet_ratio(p_u: &StochasticMatrix, p_h: &StochasticMatrix) -> Result<f64> {
    same_grid(p_u, p_h)?;
    let n = p_u.len();
    let root: Vec<f64> = p_u.weights.iter().map(|w| w.sqrt()).collect();
    // Orthonormal basis of the complement of √π from a Householder reflection.
    let mut v: Vec<f64> = root.clone();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let house = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vv);
    let q = house.columns(1, n - 1).into_owned();
    let id = DMatrix::<f64>::identity(n, n);
    let lu = q.transpose() * (&id - p_u.symmetrized()) * &q;
    let lh = q.transpose() * (&id - p_h.symmetrized()) * &q;
    let chol = nalgebra::Cholesky::new((lu.clone() + lu.transpose()) * 0.5)
        .ok_or_else(|| Error::Unsupported("reference Dirichlet form is singular on the grid".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n - 1, n - 1))
        .ok_or_else(|| Error::Unsupported("singular Cholesky factor".into()))?;
    let c = &linv * lh * linv.transpose();
    let c = (c.clone() + c.transpose()) * 0.5;
    Ok(SymmetricEigen::new(c).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
