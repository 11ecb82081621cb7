use std::f64::consts::PI;

use statrs::function::erf::{erf, erfc};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, QuadConfig};
use crate::target::{Family, ReferenceMeasure, Target};

/// Largest grid accepted by the dense eigensolver.
pub const MAX_GRID: usize = 2000;
/// Largest π mass allowed outside `[lower, x_max]`.
pub const MAX_FOLD: f64 = 1e-6;

/// `π((−∞, x])` for a one-dimensional target.
pub fn pi_cdf(target: &Target, x: f64) -> Result<f64> {
    if target.dim() != 1 {
        return Err(Error::Unsupported("CDF of a multivariate target".into()));
    }
    Ok(match target.family() {
        Family::Exp { alpha, .. } => {
            if x <= 0.0 {
                0.0
            } else {
                -(-alpha * x).exp_m1()
            }
        }
        Family::Bimodal => {
            let xs = crate::geometry::bimodal_constants(target).x_star;
            let c = target.normalizer();
            let left = |x: f64| 0.5 * PI.sqrt() * erfc(-(x + 2.0));
            if x <= xs {
                left(x) / c
            } else {
                (left(xs) + 0.25 * PI.sqrt() * (erf(x - 2.0) - erf(xs - 2.0))) / c
            }
        }
        _ => {
            let c = target.normalizer();
            let w = |y: f64| target.density_or_zero(&[y]) * target.reference().log_density(&[y]).exp();
            let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 4000 };
            let below = quadrature::integrate_checked(|u| w(x - u), 0.0, f64::INFINITY, cfg)?;
            below / c
        }
    })
}

/// `π((a, b))` computed from the CDF, using the upper tail where that is
/// more accurate.
pub fn pi_interval(target: &Target, a: f64, b: f64) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    let fa = if a == f64::NEG_INFINITY { 0.0 } else { pi_cdf(target, a)? };
    let fb = if b == f64::INFINITY { 1.0 } else { pi_cdf(target, b)? };
    if let Family::Exp { alpha, .. } = target.family() {
        let a = a.max(0.0);
        let tail = |x: f64| if x.is_infinite() { 0.0 } else { (-alpha * x).exp() };
        return Ok(tail(a) - tail(b));
    }
    Ok((fb - fa).max(0.0))
}

/// Quantile of `π` by bisection on the CDF.
pub fn pi_quantile(target: &Target, p: f64, lo: f64, hi: f64) -> Result<f64> {
    quadrature::bisect(|x| pi_cdf(target, x).unwrap_or(f64::NAN) - p, lo, hi, 1e-13 * (1.0 + hi.abs()), 300)
}

/// Cells of equal π mass covering the real line (or the half line).
///
/// The first and last cells extend to the ends of the support, so mass outside
/// `[lower, x_max]` is folded into them; that mass is reported as `fold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    /// `n + 1` increasing edges; the outer ones may be infinite.
    pub edges: Vec<f64>,
    /// Cell medians.
    pub points: Vec<f64>,
    /// `π(C_i)`.
    pub pi_mass: Vec<f64>,
    /// `ν(C_i)`, possibly infinite for unbounded Lebesgue cells.
    pub nu_mass: Vec<f64>,
    pub x_max: f64,
    pub fold: f64,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Equal-mass cells of `π` restricted to `[lower, x_max]`, where `lower`
    /// is `0` on the half line and `−x_max` on the real line.
    pub fn quantile(target: &Target, n: usize, x_max: f64) -> Result<Self> {
        if target.dim() != 1 {
            return Err(Error::Unsupported("grids are one-dimensional".into()));
        }
        if !(2..=MAX_GRID).contains(&n) {
            return Err(invalid(format!("grid size must lie in 2..={MAX_GRID}, got {n}")));
        }
        let half_line = matches!(target.reference(), ReferenceMeasure::Exponential { .. });
        let lower = if half_line { 0.0 } else { -x_max };
        if !(x_max > lower) {
            return Err(invalid("x_max must exceed the lower end of the grid"));
        }
        let f_lo = if half_line { 0.0 } else { pi_cdf(target, lower)? };
        let f_hi = pi_cdf(target, x_max)?;
        let mut edges = vec![if half_line { 0.0 } else { f64::NEG_INFINITY }];
        for k in 1..n {
            let p = f_lo + (f_hi - f_lo) * k as f64 / n as f64;
            edges.push(pi_quantile(target, p, lower, x_max)?);
        }
        edges.push(f64::INFINITY);
        Self::assemble(target, edges, lower, x_max)
    }

    /// Half of the edges at equal π mass, the other half equally spaced over
    /// the central `1 − 2·10⁻⁷` of `π` (capped at `[lower, x_max]`), so both
    /// the bulk and the tails are resolved.
    ///
    /// ```
    /// let t = slicelab::Target::exp(1.0, 2.0).unwrap();
    /// let g = slicelab::spectral::Grid::mixed(&t, 200, 40.0).unwrap();
    /// assert_eq!(g.len(), 200);
    /// assert!(g.edges[199] > 10.0);
    /// ```
    pub fn mixed(target: &Target, n: usize, x_max: f64) -> Result<Self> {
        if n < 4 {
            return Err(invalid("a mixed grid needs at least four cells"));
        }
        let by_mass = Self::quantile(target, n / 2, x_max)?;
        let half_line = matches!(target.reference(), ReferenceMeasure::Exponential { .. });
        let lower = if half_line { 0.0 } else { -x_max };
        let tail = 1e-7;
        let lo = if half_line { 0.0 } else { pi_quantile(target, tail, lower, x_max)? };
        let hi = pi_quantile(target, 1.0 - tail, lower, x_max)?;
        let mut interior: Vec<f64> = by_mass.edges[1..by_mass.len()].to_vec();
        let k = n - by_mass.len();
        interior.extend((1..=k).map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64));
        interior.sort_by(f64::total_cmp);
        Self::from_edges(target, &interior, x_max)
    }

    /// Cells with the given finite interior edges; the outer cells extend to
    /// the ends of the support.
    pub fn from_edges(target: &Target, interior: &[f64], x_max: f64) -> Result<Self> {
        if target.dim() != 1 {
            return Err(Error::Unsupported("grids are one-dimensional".into()));
        }
        let n = interior.len() + 1;
        if !(2..=MAX_GRID).contains(&n) {
            return Err(invalid(format!("grid size must lie in 2..={MAX_GRID}, got {n}")));
        }
        let half_line = matches!(target.reference(), ReferenceMeasure::Exponential { .. });
        let lower = if half_line { 0.0 } else { -x_max };
        let mut edges = vec![if half_line { 0.0 } else { f64::NEG_INFINITY }];
        edges.extend_from_slice(interior);
        edges.push(f64::INFINITY);
        Self::assemble(target, edges, lower, x_max)
    }

    fn assemble(target: &Target, edges: Vec<f64>, lower: f64, x_max: f64) -> Result<Self> {
        for w in edges.windows(2) {
            if !(w[1] > w[0]) {
                return Err(invalid("grid edges are not strictly increasing; reduce n"));
            }
        }
        let half_line = matches!(target.reference(), ReferenceMeasure::Exponential { .. });
        let f_lo = if half_line { 0.0 } else { pi_cdf(target, lower)? };
        let fold = f_lo + pi_interval(target, x_max, f64::INFINITY)?;
        if fold > MAX_FOLD {
            return Err(invalid(format!("grid misses π mass {fold:e} > {MAX_FOLD:e}; increase x_max")));
        }
        let n = edges.len() - 1;
        let mut points = Vec::with_capacity(n);
        let mut pi_mass = Vec::with_capacity(n);
        let mut nu_mass = Vec::with_capacity(n);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let fa = if a.is_finite() { pi_cdf(target, a)? } else { 0.0 };
            let fb = if b.is_finite() { pi_cdf(target, b)? } else { 1.0 };
            let lo = if a.is_finite() { a } else { lower - 50.0 * (x_max - lower) };
            let hi = if b.is_finite() { b } else { x_max + 50.0 * (x_max - lower) };
            points.push(pi_quantile(target, 0.5 * (fa + fb), lo, hi)?);
            pi_mass.push(pi_interval(target, a, b)?);
            nu_mass.push(target.reference().interval_mass(a, b));
        }
        Ok(Grid { edges, points, pi_mass, nu_mass, x_max, fold })
    }

    /// Index of the cell whose closure contains `x` from the right.
    pub fn cell_of(&self, x: f64) -> usize {
        let k = self.edges.partition_point(|e| *e <= x);
        k.saturating_sub(1).min(self.len() - 1)
    }

    /// Index of the cell whose closure contains `x` from the left.
    pub fn cell_of_upper(&self, x: f64) -> usize {
        let k = self.edges.partition_point(|e| *e < x);
        k.saturating_sub(1).min(self.len() - 1)
    }

    /// `∫_{C_i} f dπ / π(C_i)` for each cell.
    pub fn cell_means<F: Fn(f64) -> f64>(&self, target: &Target, f: F) -> Result<Vec<f64>> {
        let c = target.normalizer();
        let w = |x: f64| f(x) * target.density_or_zero(&[x]) * target.reference().log_density(&[x]).exp() / c;
        let cfg = QuadConfig { abs_tol: 1e-15, rel_tol: 1e-12, max_intervals: 2000 };
        self.edges
            .windows(2)
            .zip(&self.pi_mass)
            .map(|(e, m)| {
                let (a, b) = (e[0], e[1]);
                let v = match (a.is_finite(), b.is_finite()) {
                    (true, true) => quadrature::integrate_checked(w, a, b, cfg)?,
                    (true, false) => quadrature::integrate_checked(w, a, f64::INFINITY, cfg)?,
                    (false, true) => quadrature::integrate_checked(|u| w(b - u), 0.0, f64::INFINITY, cfg)?,
                    (false, false) => return Err(invalid("grid has a single unbounded cell")),
                };
                Ok(v / m)
            })
            .collect()
    }
}
