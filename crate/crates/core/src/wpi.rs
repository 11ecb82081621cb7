//! Weak Poincaré machinery: β functions, the β → α_β convergence profile, and
//! closed-form bound evaluators.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::geometry::SandwichConstants;
use crate::quadrature::{self, QuadConfig};
use crate::target::{parse_f64, split_call, unit_ball_volume, Target};

type BetaClosure = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum BetaKind {
    Power { c0: f64, c1: f64 },
    Indicator { gamma: f64 },
    ImExponential { lambda: f64 },
    QuadQuartic { d: usize },
    Scaled { inner: Box<BetaFn>, gamma: f64 },
    Custom { f: BetaClosure, jumps: Vec<f64> },
}

/// A nonincreasing function `β` with `β(s) → 0`, certifying a weak Poincaré
/// inequality.
///
/// Constructors return the raw formula; [`BetaFn::capped`] applies
/// `min{1/4, β}`, which certifies the same inequality.
#[derive(Clone)]
pub struct BetaFn {
    kind: BetaKind,
    capped: bool,
    description: String,
}

impl fmt::Debug for BetaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BetaFn({})", self.description)
    }
}

impl fmt::Display for BetaFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.description)
    }
}

impl BetaFn {
    /// `β(s) = c0 s^{−c1}`.
    pub fn power(c0: f64, c1: f64) -> Result<Self> {
        if !(c0 > 0.0 && c1 > 0.0) {
            return Err(invalid("power β needs positive constants"));
        }
        Ok(Self::new(BetaKind::Power { c0, c1 }, format!("power({c0},{c1})")))
    }

    /// `β(s) = ¼·1{s < 1/γ}`, the strong Poincaré form for spectral gap `γ`.
    pub fn gap(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(invalid("spectral gap must be positive"));
        }
        Ok(Self::new(BetaKind::Indicator { gamma }, format!("gap({gamma})")))
    }

    /// Independent-Metropolis slice comparison on the exponential target.
    pub fn im_exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(invalid("rate must be positive"));
        }
        Ok(Self::new(BetaKind::ImExponential { lambda }, format!("im_exp({lambda})")))
    }

    /// Hit-and-Run comparison on the quadratic–quartic family: the two-term
    /// integral bound divided by `4c` with `c ≥ ω_d/e`.
    pub fn quad_quartic(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(Self::new(BetaKind::QuadQuartic { d }, format!("quadquartic({d})")))
    }

    /// An arbitrary nonincreasing function with known jump locations.
    pub fn from_fn<F>(description: impl Into<String>, f: F, jumps: Vec<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(BetaKind::Custom { f: Arc::new(f), jumps }, description.into())
    }

    fn new(kind: BetaKind, description: String) -> Self {
        BetaFn { kind, capped: false, description }
    }

    /// `min{1/4, β}`.
    pub fn capped(mut self) -> Self {
        if !self.capped {
            self.capped = true;
            self.description = format!("min(1/4,{})", self.description);
        }
        self
    }

    pub fn is_capped(&self) -> bool {
        self.capped
    }

    /// `s ↦ γ⁻¹ β(γ s)`.
    pub fn rescaled(&self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(invalid("gap must be positive"));
        }
        Ok(Self::new(
            BetaKind::Scaled { inner: Box::new(self.clone()), gamma },
            format!("bar({},{gamma})", self.description),
        ))
    }

    pub fn eval(&self, s: f64) -> f64 {
        let raw = match &self.kind {
            BetaKind::Power { c0, c1 } => c0 * s.powf(-c1),
            BetaKind::Indicator { gamma } => {
                if s < 1.0 / gamma {
                    0.25
                } else {
                    0.0
                }
            }
            BetaKind::ImExponential { lambda } => beta_im_exponential(*lambda, s),
            BetaKind::QuadQuartic { d } => {
                quad_quartic_two_term(*d, s) * std::f64::consts::E / (4.0 * unit_ball_volume(*d))
            }
            BetaKind::Scaled { inner, gamma } => bar_beta(inner, *gamma, s),
            BetaKind::Custom { f, .. } => f(s),
        };
        if self.capped {
            raw.min(0.25)
        } else {
            raw
        }
    }

    /// Locations in `s` where `β` jumps.
    pub fn jumps(&self) -> Vec<f64> {
        match &self.kind {
            BetaKind::Indicator { gamma } => vec![1.0 / gamma],
            BetaKind::ImExponential { lambda } if *lambda > 1.0 => {
                vec![(2.0 * lambda - 1.0).powi(-2)]
            }
            BetaKind::Scaled { inner, gamma } => inner.jumps().into_iter().map(|s| s / gamma).collect(),
            BetaKind::Custom { jumps, .. } => jumps.clone(),
            _ => Vec::new(),
        }
    }

    /// `K_β(u) = u β(1/u)`, with `K_β(0) = 0`.
    pub fn k(&self, u: f64) -> f64 {
        if u == 0.0 {
            0.0
        } else {
            u * self.eval(1.0 / u)
        }
    }
}

impl BetaFn {
    /// The closed-form α bound that applies, if any.
    pub fn closed_form_case(&self) -> Option<ClosedFormCase> {
        match self.kind {
            BetaKind::Power { c0, c1 } => Some(ClosedFormCase::Power { c0, c1 }),
            _ => None,
        }
    }
}

impl FromStr for BetaFn {
    type Err = Error;

    /// Parses `power(c0,c1)`, `gap(gamma)`, `im_exp(lambda)` or
    /// `quadquartic(d)`, optionally wrapped as `capped(...)`.
    ///
    /// ```
    /// let b: slicelab::wpi::BetaFn = "im_exp(2)".parse().unwrap();
    /// assert!((b.eval(1.0) - 1.0 / 72.0).abs() < 1e-15);
    /// ```
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_call(s)?;
        let args = args.ok_or_else(|| Error::Parse(format!("`{name}` needs arguments")))?;
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = args.split(',').map(parse_f64).collect::<Result<_>>()?;
            if v.len() != n {
                return Err(Error::Parse(format!("`{name}` needs {n} arguments")));
            }
            Ok(v)
        };
        match name {
            "power" => {
                let v = nums(2)?;
                BetaFn::power(v[0], v[1])
            }
            "gap" => BetaFn::gap(nums(1)?[0]),
            "im_exp" => BetaFn::im_exponential(nums(1)?[0]),
            "quadquartic" => {
                let d = nums(1)?[0];
                if d.fract() != 0.0 || d < 1.0 {
                    return Err(invalid("dimension must be a positive integer"));
                }
                BetaFn::quad_quartic(d as usize)
            }
            "capped" => Ok(args.parse::<BetaFn>()?.capped()),
            _ => Err(Error::Parse(format!("unknown beta `{s}`"))),
        }
    }
}

/// The `b` function of the small-rate branch.
pub fn im_exponential_b(lambda: f64, s: f64) -> f64 {
    if s <= 1.0 {
        return lambda;
    }
    let w = 1.0 - 1.0 / s;
    lambda - w.powf((1.0 - lambda) / lambda) + (1.0 - lambda) * w.powf(1.0 / lambda)
}

/// β for the independent-Metropolis hybrid slice sampler on the exponential
/// target with rate `λ` relative to `α = 1`.
///
/// ```
/// use slicelab::wpi::beta_im_exponential;
/// assert!((beta_im_exponential(0.5, 1.0) - 1.0 / 3.0).abs() < 1e-15);
/// assert!((beta_im_exponential(2.0, 1.0) - 1.0 / 72.0).abs() < 1e-15);
/// assert_eq!(beta_im_exponential(1.0, 2.0), 0.0);
/// ```
pub fn beta_im_exponential(lambda: f64, s: f64) -> f64 {
    if lambda < 1.0 {
        im_exponential_b(lambda, (1.0 + lambda) * s / 2.0) / (2.0 * (1.0 + lambda) * lambda)
    } else {
        let k = 2.0 * lambda - 1.0;
        let ind = if s < k.powi(-2) { 1.0 } else { 0.0 };
        (ind + (lambda - 1.0) * s.powf(-1.0 / lambda) / k.powf(2.0 / lambda)) / (4.0 * k * lambda)
    }
}

/// The `λ ≥ 1` branch of [`beta_im_exponential`] rebuilt from the ideal
/// sampler's gap `(2λ−1)⁻²` instead of `(2λ−1)²`:
/// `β(s) = (4λg)⁻¹ (1{gs < 1} + (λ−1)(gs)^{−1/λ})` with `g = (2λ−1)⁻²`.
/// Agrees with [`beta_im_exponential`] for `λ ≤ 1`.
///
/// ```
/// use slicelab::wpi::{beta_im_exponential, beta_im_exponential_from_gap};
/// assert_eq!(beta_im_exponential_from_gap(0.5, 3.0), beta_im_exponential(0.5, 3.0));
/// assert!((beta_im_exponential_from_gap(2.0, 9.0) - 9.0 / 8.0).abs() < 1e-12);
/// ```
pub fn beta_im_exponential_from_gap(lambda: f64, s: f64) -> f64 {
    if lambda <= 1.0 {
        return beta_im_exponential(lambda, s);
    }
    let g = (2.0 * lambda - 1.0).powi(-2);
    let gs = g * s;
    let ind = if gs < 1.0 { 1.0 } else { 0.0 };
    (ind + (lambda - 1.0) * gs.powf(-1.0 / lambda)) / (4.0 * lambda * g)
}

/// `γ⁻¹ β(γ s)`.
pub fn bar_beta(beta: &BetaFn, gamma: f64, s: f64) -> f64 {
    beta.eval(gamma * s) / gamma
}

const CONJ_LO: f64 = 1e-8;
const CONJ_HI: f64 = 1e8;
const CONJ_MAX: f64 = 1e16;
const GRID_PER_DECADE: usize = 8;

/// `K*_β(v) = sup_{u ≥ 0} [uv − K_β(u)]`; `+∞` when the supremum is unbounded.
///
/// ```
/// let beta = slicelab::wpi::BetaFn::power(0.25, 1.0).unwrap();
/// assert!((slicelab::wpi::convex_conjugate(&beta, 1.0) - 1.0).abs() < 1e-9);
/// ```
pub fn convex_conjugate(beta: &BetaFn, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let g = |u: f64| u * v - beta.k(u);
    let consider = |u: f64, best_u: &mut f64, best: &mut f64| {
        let val = g(u);
        if val > *best {
            *best = val;
            *best_u = u;
        }
    };
    let mut hi = CONJ_HI;
    let (best_u, best) = loop {
        let decades = (hi / CONJ_LO).log10().round() as usize;
        let n = decades * GRID_PER_DECADE;
        let mut best_u = 0.0;
        let mut best = 0.0;
        for i in 0..=n {
            let u = CONJ_LO * 10f64.powf(i as f64 / GRID_PER_DECADE as f64);
            consider(u, &mut best_u, &mut best);
        }
        for s in beta.jumps() {
            let u = 1.0 / s;
            if (CONJ_LO..=hi).contains(&u) {
                for f in [1.0 - 1e-13, 1.0, 1.0 + 1e-13] {
                    consider(u * f, &mut best_u, &mut best);
                }
            }
        }
        // Still increasing at the top of the bracket: expand or give up.
        if best_u >= hi * 0.999 {
            if hi >= CONJ_MAX {
                return f64::INFINITY;
            }
            hi *= 10.0;
            continue;
        }
        break (best_u, best);
    };
    if best_u == 0.0 {
        return best;
    }
    let step = 10f64.powf(1.0 / GRID_PER_DECADE as f64);
    let (a, b) = ((best_u / step).ln(), (best_u * step).ln());
    let (_, val) = quadrature::golden_max(|y| g(y.exp()), a, b, 1e-12);
    best.max(val)
}

/// The α_β profile: `F_β(x) = ∫_x^1 dv / K*_β(v)` tabulated in `y = ln x`,
/// inverted on demand.
#[derive(Debug, Clone)]
pub struct AlphaProfile {
    beta: BetaFn,
    /// Nodes `y_0 = 0 > y_1 > …` and `F` at each node.
    ys: Vec<f64>,
    fs: Vec<f64>,
}

const Y_MIN: f64 = -690.0;

fn f_integrand(beta: &BetaFn, y: f64) -> f64 {
    let v = y.exp();
    let k = convex_conjugate(beta, v);
    if k.is_infinite() {
        0.0
    } else {
        v / k
    }
}

fn f_segment(beta: &BetaFn, a: f64, b: f64) -> Result<f64> {
    let cfg = QuadConfig { abs_tol: 1e-11, rel_tol: 1e-11, max_intervals: 400 };
    let r = quadrature::integrate(|y| f_integrand(beta, y), a, b, cfg);
    if !r.value[0].is_finite() {
        return Err(Error::Quadrature("non-finite F segment".into()));
    }
    Ok(r.value[0])
}

impl AlphaProfile {
    /// Tabulates `F_β` until it exceeds `n_max`.
    pub fn new(beta: &BetaFn, n_max: f64) -> Result<Self> {
        let mut splits: Vec<f64> = Vec::new();
        // K* becomes infinite above the asymptotic slope β(0⁺).
        let slope = beta.eval(1e-300);
        if slope.is_finite() && slope > 0.0 && slope < 1.0 {
            splits.push(slope.ln());
        }
        let mut ys = vec![0.0];
        let mut fs = vec![0.0];
        let mut y = 0.0f64;
        while *fs.last().expect("nonempty") < n_max {
            if y <= Y_MIN {
                return Err(Error::Quadrature(format!(
                    "F stays below {n_max} down to x = e^{Y_MIN}; α_β decays faster than tabulated"
                )));
            }
            let mut next = (y - (0.1 * y.abs()).max(0.05)).max(Y_MIN);
            if let Some(s) = splits.iter().find(|s| **s < y && **s > next) {
                next = *s;
            }
            let seg = f_segment(beta, next, y)?;
            ys.push(next);
            fs.push(fs.last().expect("nonempty") + seg);
            y = next;
        }
        Ok(AlphaProfile { beta: beta.clone(), ys, fs })
    }

    /// Largest `n` covered by the table.
    pub fn n_max(&self) -> f64 {
        *self.fs.last().expect("nonempty")
    }

    /// `F_β(x)`.
    pub fn big_f(&self, x: f64) -> Result<f64> {
        let y = x.ln();
        if y >= 0.0 {
            return Ok(0.0);
        }
        let k = self.ys.iter().position(|yy| *yy <= y).ok_or_else(|| invalid("x below the tabulated range"))?;
        Ok(self.fs[k - 1] + f_segment(&self.beta, y, self.ys[k - 1])?)
    }

    /// `α_β(n) = F_β⁻¹(n)`.
    pub fn alpha(&self, n: f64) -> Result<f64> {
        if !(n > 0.0) {
            return Err(invalid("n must be positive"));
        }
        let k = self
            .fs
            .iter()
            .position(|f| *f >= n)
            .ok_or_else(|| invalid(format!("n = {n} beyond tabulated range {}", self.n_max())))?;
        let (y_hi, f_hi) = (self.ys[k - 1], self.fs[k - 1]);
        // Safeguarded Newton on F(e^y) = n, using dF/dy = −integrand(y).
        // F is carried along incrementally so each quadrature covers one step.
        let (mut lo, mut hi) = (self.ys[k], y_hi);
        let (mut y, mut f) = (y_hi, f_hi);
        let mut next = lo + (hi - lo) * (n - f_hi) / (self.fs[k] - f_hi);
        for _ in 0..200 {
            f += if next < y { f_segment(&self.beta, next, y)? } else { -f_segment(&self.beta, y, next)? };
            y = next;
            let r = f - n;
            if r > 0.0 {
                lo = y;
            } else {
                hi = y;
            }
            let slope = -f_integrand(&self.beta, y);
            next = if slope < 0.0 { y - r / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - y).abs() < 1e-11 || hi - lo < 1e-11 {
                return Ok(next.exp());
            }
        }
        Err(Error::IterationCap { what: "alpha inversion", cap: 200 })
    }
}

/// `α_β(n)` through the full conjugate/integral/inversion pipeline.
///
/// ```
/// let beta = slicelab::wpi::BetaFn::power(0.25, 1.0).unwrap();
/// let a = slicelab::wpi::alpha_from_beta(&beta, 4.0).unwrap();
/// assert!((a - 0.2).abs() < 1e-6);
/// ```
pub fn alpha_from_beta(beta: &BetaFn, n: f64) -> Result<f64> {
    AlphaProfile::new(beta, n)?.alpha(n)
}

/// Decay regimes with closed-form α bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormCase {
    /// `β = c0 s^{−c1}`: `α(n) ≤ c0 (1+c1)^{1+c1} n^{−c1}`.
    Power { c0: f64, c1: f64 },
    /// `β = c1 exp(−c2 s^{c3})`: `α(n) ≤ c4 exp(−c5 n^{c3/(1+c3)})` for some
    /// `c4, c5` not given in closed form.
    Stretched { c3: f64, c4: f64, c5: f64 },
    /// `β = c1 / log(max{c2, s})^{c3}`: `α(n) ≤ c4 / log(max{2, n})^{c3}`.
    Logarithmic { c3: f64, c4: f64 },
}

/// Evaluates the bound (case 1) or the functional form (cases 2 and 3).
pub fn alpha_closed_form_bound(case: ClosedFormCase, n: f64) -> f64 {
    match case {
        ClosedFormCase::Power { c0, c1 } => c0 * (1.0 + c1).powf(1.0 + c1) * n.powf(-c1),
        ClosedFormCase::Stretched { c3, c4, c5 } => c4 * (-c5 * n.powf(c3 / (1.0 + c3))).exp(),
        ClosedFormCase::Logarithmic { c3, c4 } => c4 / n.max(2.0).ln().powf(c3),
    }
}

/// `(4c)⁻¹ ∫_T 1{s < 1/γ(t)} m(t) dt` by quadrature, split where
/// `γ(t) = 1/s`.
pub fn beta_from_gap_profile<G: Fn(f64) -> f64>(target: &Target, gamma_of_t: G, s: f64) -> Result<f64> {
    let sup = target
        .sup_density()
        .ok_or_else(|| Error::Unsupported("level masses of rebased targets".into()))?
        .value();
    let c = target.normalizer();
    let m = |t: f64| target.level_mass(t).map(|l| l.value).unwrap_or(f64::NAN);
    let active = |t: f64| s * gamma_of_t(t) < 1.0;
    let top = if sup.is_finite() { sup } else { 1e12 };
    let lo_exp = -12.0f64;
    let hi_exp = top.log10();
    let count = 400 + if sup.is_finite() { 0 } else { 400 };
    let mut nodes: Vec<f64> =
        (0..=count).map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / count as f64)).collect();
    nodes[count] = top;
    if sup.is_infinite() {
        nodes.push(1.0);
        nodes.sort_by(f64::total_cmp);
    }
    nodes.insert(0, 0.0);
    let mut breaks = nodes.clone();
    for w in nodes.windows(2) {
        let (a, b) = (w[0].max(1e-300), w[1]);
        let (ia, ib) = (active(a), active(b * (1.0 - 1e-15)));
        if ia != ib {
            let root = quadrature::bisect_predicate(|t| active(t) == ia, a, b, 1e-15 * b.max(1e-300), 200)?;
            breaks.push(root);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let cfg = QuadConfig { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 };
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a || !active(0.5 * (a + b)) {
            continue;
        }
        total += quadrature::integrate_checked(m, a, b, cfg)?;
    }
    if sup.is_infinite() && active(top) {
        total += quadrature::integrate_checked(m, top, f64::INFINITY, cfg)?;
    }
    if !total.is_finite() {
        return Err(Error::NonIntegrable("level mass integral".into()));
    }
    Ok(total / (4.0 * c))
}

/// `ρ = (h−Δ)/h · m/(m+Δ)`, with `m = ∞` read as the limit `(h−Δ)/h`.
///
/// ```
/// assert_eq!(slicelab::wpi::rho_stepping_out(2.0, 1.0, 1.0).unwrap(), 0.25);
/// ```
pub fn rho_stepping_out(h: f64, delta: f64, m_small: f64) -> Result<f64> {
    if !(delta >= 0.0) || h < delta || !(h > 0.0) {
        return Err(invalid(format!("need h ≥ Δ ≥ 0 and h > 0, got h = {h}, Δ = {delta}")));
    }
    let width = (h - delta) / h;
    Ok(if m_small.is_infinite() { width } else { width * m_small / (m_small + delta) })
}

/// Spectral gap of the ideal slice sampler on the exponential target.
pub fn gamma_exp_slice(alpha: f64, lambda: f64) -> f64 {
    if alpha >= lambda {
        (alpha + lambda) / (2.0 * alpha)
    } else {
        (alpha / (2.0 * lambda - alpha)).powi(2)
    }
}

/// `2⁻³³ d⁻² κ⁻²`.
pub fn har_gap_bound(d: usize, kappa: f64) -> Result<f64> {
    if !(kappa >= 1.0) || d == 0 {
        return Err(invalid(format!("need d ≥ 1 and κ ≥ 1, got d = {d}, κ = {kappa}")));
    }
    Ok(2f64.powi(-33) / ((d * d) as f64 * kappa * kappa))
}

/// `(m−1)/((d+1)(d+m−1))`, the ideal slice sampler gap lower bound for the
/// Student-type family.
pub fn student_ideal_gap(d: usize, m: f64) -> f64 {
    (m - 1.0) / ((d as f64 + 1.0) * (d as f64 + m - 1.0))
}

/// Constants and bounds of the quadratic–quartic example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadQuarticBound {
    pub b1: f64,
    pub b2: f64,
    pub r_star: f64,
    /// `ω_d d^{2d} 2^{6d} s^{−d/8−1/4}`.
    pub simplified: f64,
    pub two_term: f64,
}

/// The two-term integral bound for the quadratic–quartic family.
pub fn quad_quartic_two_term(d: usize, s: f64) -> f64 {
    let k = SandwichConstants::quad_quartic(d);
    let (b1, b2, r) = (k.b1(d), k.b2(d), k.r_star());
    let df = d as f64;
    let first = (b1 / s).powf((k.p1 - k.p2) / (k.p1 * k.p2)).min(1.0).powf(df / r + 1.0);
    let tail_exp = (s / b1).powf((k.q2 - k.q1) / (k.q1 * k.q2)).max(1.0);
    b2 * first + 2.0 * b2 * (2.0 * df / (r * std::f64::consts::E)).powf(df / r) * (-0.5 * tail_exp).exp()
}

/// Constants, the two-term bound and the simplified bound (`d ≥ 4`).
///
/// ```
/// let b = slicelab::wpi::quad_quartic_bound(4, 1.0).unwrap();
/// assert_eq!(b.b1, 2f64.powi(39));
/// assert!((b.simplified / 5.43e12 - 1.0).abs() < 1e-3);
/// ```
pub fn quad_quartic_bound(d: usize, s: f64) -> Result<QuadQuarticBound> {
    if d < 4 {
        return Err(invalid("the simplified bound needs d ≥ 4"));
    }
    if !(s > 0.0) {
        return Err(invalid("s must be positive"));
    }
    let k = SandwichConstants::quad_quartic(d);
    let df = d as f64;
    let simplified = unit_ball_volume(d) * df.powf(2.0 * df) * 2f64.powf(6.0 * df) * s.powf(-df / 8.0 - 0.25);
    Ok(QuadQuarticBound {
        b1: k.b1(d),
        b2: k.b2(d),
        r_star: k.r_star(),
        simplified,
        two_term: quad_quartic_two_term(d, s),
    })
}

/// `√M · √α`.
pub fn tv_bound(m_osc: f64, alpha: f64) -> f64 {
    m_osc.sqrt() * alpha.sqrt()
}

/// `2⁴⁸ (Mε)^{16/(d+2)} d¹⁶ ((d+10)/(8γ_d))³`.
pub fn iterations_for_epsilon(d: usize, gamma_d: f64, m: f64, epsilon: f64) -> Result<f64> {
    if d < 4 || !(gamma_d > 0.0) || !(m >= 0.0) || !(epsilon > 0.0) {
        return Err(invalid("need d ≥ 4, γ_d > 0, M ≥ 0, ε > 0"));
    }
    let df = d as f64;
    Ok(2f64.powi(48) * (m * epsilon).powf(16.0 / (df + 2.0)) * df.powi(16) * ((df + 10.0) / (8.0 * gamma_d)).powi(3))
}
