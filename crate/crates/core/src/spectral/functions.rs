//! Test functions on grids and the slice representation of the ideal
//! Dirichlet form.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, LevelSetShape};
use crate::quadrature::{self, QuadConfig};
use crate::rng;
use crate::target::Target;

use super::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunctionKind {
    Indicator,
    Polynomial,
    Blocks,
}

/// A centered function on the cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: String,
    pub kind: TestFunctionKind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSet {
    pub functions: Vec<TestFunction>,
    pub seed: u64,
}

fn center(values: &mut [f64], weights: &[f64]) {
    for _ in 0..2 {
        let mean: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
        values.iter_mut().for_each(|v| *v -= mean);
    }
}

/// Chebyshev polynomial `T_k(x)`.
fn chebyshev(k: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        let c = 2.0 * x * b - a;
        a = b;
        b = c;
    }
    b
}

impl TestFunctionSet {
    /// 20 interval indicators, 10 Chebyshev polynomials in the π-quantile
    /// coordinate and 20 random ±1 block functions, all centered under the
    /// grid weights.
    pub fn standard(grid: &Grid, seed: u64) -> Result<Self> {
        Self::generate(grid, seed, 20, 10, 20)
    }

    pub fn generate(grid: &Grid, seed: u64, indicators: usize, polynomials: usize, blocks: usize) -> Result<Self> {
        let n = grid.len();
        if n < 4 {
            return Err(invalid("test functions need at least four cells"));
        }
        let w = &grid.pi_mass;
        let total: f64 = w.iter().sum();
        let weights: Vec<f64> = w.iter().map(|v| v / total).collect();
        let mut r = rng::stream(seed, 0x7e57);
        let mut functions = Vec::with_capacity(indicators + polynomials + blocks);
        let mut push = |id: String, kind, mut values: Vec<f64>| {
            center(&mut values, &weights);
            functions.push(TestFunction { id, kind, values });
        };
        for k in 0..indicators {
            let a = r.random_range(0..n - 1);
            let b = r.random_range(a + 1..n);
            let values = (0..n).map(|i| if (a..b).contains(&i) { 1.0 } else { 0.0 }).collect();
            push(format!("ind{k:02}[{a},{b})"), TestFunctionKind::Indicator, values);
        }
        let mut cum = 0.0;
        let u: Vec<f64> = weights
            .iter()
            .map(|w| {
                let mid = cum + 0.5 * w;
                cum += w;
                mid
            })
            .collect();
        for k in 1..=polynomials {
            let values = u.iter().map(|u| chebyshev(k, 2.0 * u - 1.0)).collect();
            push(format!("cheb{k:02}"), TestFunctionKind::Polynomial, values);
        }
        for k in 0..blocks {
            let count = r.random_range(2..=n.min(12));
            let mut cuts: Vec<usize> = (0..count - 1).map(|_| r.random_range(1..n)).collect();
            cuts.sort_unstable();
            cuts.dedup();
            let mut signs = Vec::with_capacity(cuts.len() + 1);
            signs.push(if r.random::<bool>() { 1.0 } else { -1.0 });
            for _ in 0..cuts.len() {
                let prev: f64 = *signs.last().unwrap();
                signs.push(-prev);
            }
            let values = (0..n).map(|i| signs[cuts.partition_point(|c| *c <= i)]).collect();
            push(format!("blk{k:02}"), TestFunctionKind::Blocks, values);
        }
        Ok(TestFunctionSet { functions, seed })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}

/// A function of one variable with closed-form slice integrals.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// `Σ_j c_j x^j`.
    Polynomial(Vec<f64>),
    /// Constant on the cells of a grid.
    CellConstant { edges: Vec<f64>, values: Vec<f64> },
}

impl Observable {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Observable::Polynomial(c) => c.iter().rev().fold(0.0, |acc, cj| acc * x + cj),
            Observable::CellConstant { edges, values } => {
                let k = edges.partition_point(|e| *e <= x).saturating_sub(1).min(values.len() - 1);
                values[k]
            }
        }
    }

    /// `(∫_a^b f dν, ∫_a^b f² dν)`.
    fn interval_integrals(&self, target: &Target, a: f64, b: f64) -> Result<(f64, f64)> {
        let reference = target.reference();
        match self {
            Observable::Polynomial(c) => {
                let deg = c.len().saturating_sub(1);
                let m = reference.interval_moments(a, b, 2 * deg)?;
                let first: f64 = c.iter().zip(&m).map(|(c, m)| c * m).sum();
                let mut second = 0.0;
                for (i, ci) in c.iter().enumerate() {
                    for (j, cj) in c.iter().enumerate() {
                        second += ci * cj * m[i + j];
                    }
                }
                Ok((first, second))
            }
            Observable::CellConstant { edges, values } => {
                let mut first = 0.0;
                let mut second = 0.0;
                for (e, v) in edges.windows(2).zip(values) {
                    let mass = reference.interval_mass(a.max(e[0]), b.min(e[1]));
                    first += v * mass;
                    second += v * v * mass;
                }
                Ok((first, second))
            }
        }
    }
}

/// `E(U, f) = c⁻¹ ∫ [∫_{G(t)} f² dν − (∫_{G(t)} f dν)² / ν(G(t))] dt`.
///
/// ```
/// use slicelab::spectral::{ideal_dirichlet_quadrature, Observable};
/// // When ϖ is constant the ideal sampler draws from π, so E(U, f) = Var_π(f).
/// let t = slicelab::Target::exp(1.0, 1.0).unwrap();
/// let e = ideal_dirichlet_quadrature(&t, &Observable::Polynomial(vec![0.0, 1.0])).unwrap();
/// assert!((e - 1.0).abs() < 1e-8);
/// ```
pub fn ideal_dirichlet_quadrature(target: &Target, f: &Observable) -> Result<f64> {
    if target.dim() != 1 {
        return Err(Error::Unsupported("slice quadrature is one-dimensional".into()));
    }
    let sup = target
        .sup_density()
        .ok_or_else(|| Error::Unsupported("slice quadrature needs the target's own reference".into()))?
        .value();
    let mut heights = vec![0.0];
    if let Observable::CellConstant { edges, .. } = f {
        heights.extend(edges.iter().filter(|e| e.is_finite()).map(|e| target.density_or_zero(&[*e])));
    }
    let consts = geometry::bimodal_constants(target);
    if !consts.is_unimodal() {
        heights.extend([consts.t1, consts.t2]);
    }
    if sup.is_infinite() {
        heights.push(1.0);
    }
    heights.retain(|h| *h >= 0.0 && *h < sup);
    heights.push(sup);
    heights.sort_by(f64::total_cmp);
    heights.dedup();

    let integrand = |t: f64| -> f64 {
        let Ok(LevelSetShape::Intervals(iv)) = geometry::level_shape(target, t) else {
            return f64::NAN;
        };
        let mut m = 0.0;
        let mut first = 0.0;
        let mut second = 0.0;
        for (a, b) in iv {
            m += target.reference().interval_mass(a, b);
            match f.interval_integrals(target, a, b) {
                Ok((s1, s2)) => {
                    first += s1;
                    second += s2;
                }
                Err(_) => return f64::NAN,
            }
        }
        if m > 0.0 {
            (second - first * first / m).max(0.0)
        } else {
            0.0
        }
    };
    let cfg = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 4000 };
    let mut total = 0.0;
    for w in heights.windows(2) {
        let v = quadrature::integrate_checked(integrand, w[0], w[1], cfg)
            .map_err(|e| Error::NonIntegrable(format!("slice variance on [{}, {}]: {e}", w[0], w[1])))?;
        total += v;
    }
    Ok(total / target.normalizer())
}
