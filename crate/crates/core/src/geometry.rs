//! Level sets `G(t) = {x : ϖ(x) > t}`: membership, analytic shapes, chords,
//! exact uniform draws, bimodality constants and conditioning profiles.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::quadrature;
use crate::target::{unit_ball_volume, Family, ReferenceMeasure, Target};

/// Absolute tolerance for chord and level-endpoint bisection.
pub const BISECTION_TOL: f64 = 1e-10;
/// Iteration bound for every bisection.
pub const BISECTION_MAX_ITER: usize = 200;

/// Shape of a level set.
#[derive(Debug, Clone)]
pub enum LevelSetShape<'a> {
    /// At most two disjoint, ordered open intervals. Endpoints may be infinite.
    Intervals(Vec<(f64, f64)>),
    Ball { center: Vec<f64>, radius: f64 },
    Convex(ConvexOracle<'a>),
}

/// Membership oracle for a convex level set contained in `B(0, bound)`.
#[derive(Debug, Clone)]
pub struct ConvexOracle<'a> {
    pub target: &'a Target,
    pub t: f64,
    pub bound: f64,
}

impl ConvexOracle<'_> {
    pub fn contains(&self, x: &[f64]) -> bool {
        contains(self.target, self.t, x)
    }
}

impl LevelSetShape<'_> {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            LevelSetShape::Intervals(iv) => iv.iter().any(|(a, b)| x[0] > *a && x[0] < *b),
            LevelSetShape::Ball { center, radius } => dist2(x, center) < radius * radius,
            LevelSetShape::Convex(o) => o.contains(x),
        }
    }
}

fn dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `ϖ(x) > t`, false outside the support.
pub fn contains(target: &Target, t: f64, x: &[f64]) -> bool {
    target.density_or_zero(x) > t
}

/// A uniformly distributed unit vector, from a normalized Gaussian draw.
pub fn random_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            v.iter_mut().for_each(|a| *a /= n);
            return v;
        }
    }
}

/// Distance from the origin to the boundary of `{V < level}` along the unit
/// vector `theta`, for the star-shaped Lebesgue builtins.
pub fn radial_extent(target: &Target, theta: &[f64], level: f64) -> Result<f64> {
    if level <= 0.0 {
        return Ok(0.0);
    }
    match target.family() {
        Family::QuadQuartic { quadratic } => {
            let mut a = 0.0;
            let mut b = 0.0;
            for (q, th) in quadratic.iter().zip(theta) {
                if *q {
                    a += th * th;
                } else {
                    b += (th * th) * (th * th);
                }
            }
            // b ρ⁴ + a ρ² = level
            let q = 2.0 * level / (a + (a * a + 4.0 * b * level).sqrt());
            Ok(q.sqrt())
        }
        Family::DiagQuadratic { coeffs } => {
            let s: f64 = coeffs.iter().zip(theta).map(|(a, th)| a * th * th).sum();
            Ok((2.0 * level / s).sqrt())
        }
        Family::StudentT { dim, dof } => {
            let k = 2.0 / (*dim as f64 + dof);
            Ok((level * k).exp_m1().sqrt())
        }
        _ => Err(Error::Unsupported("radial extent needs a centered star-shaped target".into())),
    }
}

/// Analytic level sets of the bimodal builtin.
pub fn bimodal_intervals(t: f64) -> Vec<(f64, f64)> {
    if !(t > 0.0 && t < 1.0) {
        return Vec::new();
    }
    let a = (-t.ln()).sqrt();
    let left = (-2.0 - a, -2.0 + a);
    if t >= 0.5 {
        return vec![left];
    }
    let b = (-(2.0 * t).ln()).sqrt();
    let right = (2.0 - b, 2.0 + b);
    if left.1 > right.0 {
        vec![(left.0, right.1)]
    } else {
        vec![left, right]
    }
}

/// Bimodality constants of a one-dimensional target.
#[derive(Debug, Clone, PartialEq)]
pub struct BimodalConstants {
    pub t1: f64,
    pub t2: f64,
    /// `Δ_ϖ`, the largest gap between the two slice pieces.
    pub delta_max: f64,
    /// `m_ϖ`, the smallest slice mass on `[t1, t2)`; infinite when unimodal.
    pub m_small: f64,
    /// Location of the interior local minimum (zero when unimodal).
    pub x_star: f64,
}

impl BimodalConstants {
    pub fn unimodal() -> Self {
        BimodalConstants { t1: 0.0, t2: 0.0, delta_max: 0.0, m_small: f64::INFINITY, x_star: 0.0 }
    }

    pub fn is_unimodal(&self) -> bool {
        self.delta_max == 0.0 && self.m_small.is_infinite()
    }

    /// `δ_ϖ(t)`: the gap between the two pieces of `G(t)` for `t ∈ [t1, t2)`.
    pub fn delta(&self, t: f64) -> f64 {
        if self.is_unimodal() || !(t >= self.t1 && t < self.t2) {
            return 0.0;
        }
        match bimodal_intervals(t).as_slice() {
            [l, r] => (r.0 - l.1).max(0.0),
            _ => 0.0,
        }
    }
}

pub(crate) fn compute_bimodal_constants() -> BimodalConstants {
    // The bumps cross where (x+2)² = (x−2)² + ln 2.
    let x_star = quadrature::bisect(
        |x| (x + 2.0).powi(2) - (x - 2.0).powi(2) - LN_2,
        -2.0,
        2.0,
        BISECTION_TOL,
        BISECTION_MAX_ITER,
    )
    .expect("crossing point is bracketed");
    let t1 = (-(x_star + 2.0).powi(2)).exp();
    let t2 = 0.5;
    let a = LN_2.sqrt();
    BimodalConstants { t1, t2, delta_max: 4.0 - a, m_small: 2.0 * a, x_star }
}

/// Bimodality constants; unimodal targets give `Δ = 0`, `m = ∞`.
pub fn bimodal_constants(target: &Target) -> BimodalConstants {
    target.bimodal_constants().cloned().unwrap_or_else(BimodalConstants::unimodal)
}

fn check_height(target: &Target, t: f64) -> Result<()> {
    let sup = target
        .sup_density()
        .ok_or_else(|| Error::NoAnalyticShape("target is expressed against a non-native reference".into()))?
        .value();
    if !(t > 0.0 && t < sup) {
        return Err(Error::HeightOutOfRange { t, sup });
    }
    Ok(())
}

/// Outer radius for `{V < v}` of the quadratic–quartic family.
fn quad_quartic_bound(d: usize, v: f64) -> f64 {
    let dv = d as f64 * v;
    dv.powf(0.25).max(dv.sqrt())
}

/// Analytic or oracle description of `G(t)`.
///
/// ```
/// use slicelab::geometry::{level_shape, LevelSetShape};
/// let t = slicelab::Target::exp(1.0, 0.5).unwrap();
/// let LevelSetShape::Intervals(iv) = level_shape(&t, (-0.5f64).exp()).unwrap() else { panic!() };
/// assert!((iv[0].1 - 1.0).abs() < 1e-12);
/// ```
pub fn level_shape(target: &Target, t: f64) -> Result<LevelSetShape<'_>> {
    check_height(target, t)?;
    let level = -t.ln();
    let d = target.dim();
    Ok(match target.family() {
        Family::Exp { alpha, lambda } => {
            let r = alpha - lambda;
            if r > 0.0 {
                LevelSetShape::Intervals(vec![(0.0, level / r)])
            } else if r == 0.0 {
                LevelSetShape::Intervals(vec![(0.0, f64::INFINITY)])
            } else {
                LevelSetShape::Intervals(vec![(t.max(1.0).ln() / -r, f64::INFINITY)])
            }
        }
        Family::Bimodal => LevelSetShape::Intervals(bimodal_intervals(t)),
        Family::StudentT { .. } => {
            let radius = radial_extent(target, &[1.0], level)?;
            if d == 1 {
                LevelSetShape::Intervals(vec![(-radius, radius)])
            } else {
                LevelSetShape::Ball { center: vec![0.0; d], radius }
            }
        }
        Family::DiagQuadratic { coeffs } => {
            let min_a = coeffs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max_a = coeffs.iter().cloned().fold(0.0, f64::max);
            let radius = (2.0 * level / min_a).sqrt();
            if d == 1 {
                LevelSetShape::Intervals(vec![(-radius, radius)])
            } else if min_a == max_a {
                LevelSetShape::Ball { center: vec![0.0; d], radius }
            } else {
                LevelSetShape::Convex(ConvexOracle { target, t, bound: radius * (1.0 + 1e-9) + 1e-12 })
            }
        }
        Family::QuadQuartic { .. } => {
            if d == 1 {
                let rho = radial_extent(target, &[1.0], level)?;
                LevelSetShape::Intervals(vec![(-rho, rho)])
            } else {
                let bound = quad_quartic_bound(d, level) * (1.0 + 1e-9) + 1e-12;
                LevelSetShape::Convex(ConvexOracle { target, t, bound })
            }
        }
    })
}

/// `{s : x + sθ ∈ K}` for a convex level set `K` and a unit vector `θ`.
///
/// ```
/// use slicelab::geometry::{chord, LevelSetShape};
/// let ball = LevelSetShape::Ball { center: vec![0.0, 0.0], radius: 1.0 };
/// let (lo, hi) = chord(&ball, &[0.5, 0.0], &[1.0, 0.0]).unwrap();
/// assert!((lo + 1.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
/// ```
pub fn chord(shape: &LevelSetShape<'_>, x: &[f64], theta: &[f64]) -> Result<(f64, f64)> {
    if !shape.contains(x) {
        return Err(Error::NotInside);
    }
    match shape {
        LevelSetShape::Intervals(iv) => {
            if iv.len() != 1 {
                return Err(Error::NonConvex);
            }
            let (a, b) = iv[0];
            if a.is_infinite() || b.is_infinite() {
                return Err(Error::ChordFailure("unbounded level set".into()));
            }
            let (lo, hi) = ((a - x[0]) / theta[0], (b - x[0]) / theta[0]);
            Ok((lo.min(hi), lo.max(hi)))
        }
        LevelSetShape::Ball { center, radius } => {
            let b: f64 = theta.iter().zip(x.iter().zip(center)).map(|(th, (xi, ci))| th * (xi - ci)).sum();
            let c = dist2(x, center) - radius * radius;
            let disc = (b * b - c).sqrt();
            // Roots of s² + 2bs + c, computed without cancellation.
            let q = -(b + b.signum() * disc);
            if q == 0.0 {
                return Ok((-disc, disc));
            }
            let (r1, r2) = (q, c / q);
            Ok((r1.min(r2), r1.max(r2)))
        }
        LevelSetShape::Convex(o) => {
            let xn = dist2(x, &vec![0.0; x.len()]).sqrt();
            let far = o.bound + xn + 1.0;
            let along = |s: f64| -> Vec<f64> { x.iter().zip(theta).map(|(a, b)| a + s * b).collect() };
            let end = |sign: f64| -> Result<f64> {
                if o.contains(&along(sign * far)) {
                    return Err(Error::ChordFailure("bounding radius does not enclose the level set".into()));
                }
                quadrature::bisect_predicate(|s| o.contains(&along(sign * s)), 0.0, far, BISECTION_TOL, BISECTION_MAX_ITER)
                    .map(|s| sign * s)
            };
            let hi = end(1.0)?;
            let lo = end(-1.0)?;
            if !(lo < 0.0 && hi > 0.0) {
                return Err(Error::ChordFailure("point lies on the boundary".into()));
            }
            Ok((lo, hi))
        }
    }
}

/// Exact draw from `ν_t`, the normalized restriction of `ν` to `G(t)`.
pub fn uniform_on_level<R: Rng + ?Sized>(target: &Target, t: f64, rng: &mut R) -> Result<Vec<f64>> {
    let shape = level_shape(target, t)?;
    match (&shape, target.reference()) {
        (LevelSetShape::Intervals(iv), ReferenceMeasure::Lebesgue { .. }) => {
            let lens: Vec<f64> = iv.iter().map(|(a, b)| b - a).collect();
            if lens.iter().any(|l| !l.is_finite()) {
                return Err(Error::NoAnalyticShape("unbounded slice under Lebesgue measure".into()));
            }
            let total: f64 = lens.iter().sum();
            let mut u = rng.random::<f64>() * total;
            for ((a, _), len) in iv.iter().zip(&lens) {
                if u < *len {
                    return Ok(vec![a + u]);
                }
                u -= len;
            }
            let (a, b) = *iv.last().expect("nonempty level set");
            Ok(vec![a + rng.random::<f64>() * (b - a)])
        }
        (LevelSetShape::Intervals(iv), ReferenceMeasure::Exponential { rate }) => {
            let (a, b) = iv[0];
            let u: f64 = rng.random();
            let x = if b.is_infinite() {
                a - (1.0 - u).ln() / rate
            } else {
                a - (u * (-rate * (b - a)).exp_m1()).ln_1p() / rate
            };
            Ok(vec![if x < b { x.max(a) } else { a }])
        }
        (LevelSetShape::Ball { center, radius }, ReferenceMeasure::Lebesgue { dim }) => {
            let dir = random_direction(*dim, rng);
            let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
            Ok(center.iter().zip(dir).map(|(c, v)| c + r * v).collect())
        }
        _ => Err(Error::NoAnalyticShape(format!("no exact slice sampler for {target}"))),
    }
}

/// Ball-sandwich constants of Appendix-B type: for `v < v_lo`
/// `B(0, c2 v^{1/p2}) ⊆ {V < v} ⊆ B(0, c1 v^{1/p1})`, and for `v ≥ v_hi`
/// `B(0, cc2 v^{1/q2}) ⊆ {V < v} ⊆ B(0, cc1 v^{1/q1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichConstants {
    pub p1: f64,
    pub p2: f64,
    pub c1: f64,
    pub c2: f64,
    pub v_lo: f64,
    pub q1: f64,
    pub q2: f64,
    pub cc1: f64,
    pub cc2: f64,
    pub v_hi: f64,
}

impl SandwichConstants {
    /// Constants of the quadratic–quartic family in dimension `d`.
    pub fn quad_quartic(d: usize) -> Self {
        let d = d as f64;
        SandwichConstants {
            p1: 4.0,
            p2: 2.0,
            c1: d.powf(0.25),
            c2: 1.0,
            v_lo: 1.0 / d,
            q1: 2.0,
            q2: 4.0,
            cc1: d.sqrt(),
            cc2: 1.0,
            v_hi: 1.0,
        }
    }

    pub fn b1(&self, d: usize) -> f64 {
        let d = d as f64;
        let cross = self.cc1 / self.c2 * self.v_hi.powf(1.0 / self.q1) / self.v_lo.powf(1.0 / self.p2);
        2f64.powi(33) * d * d * (self.c1 / self.c2).max(self.cc1 / self.cc2).max(cross)
    }

    pub fn b2(&self, d: usize) -> f64 {
        let df = d as f64;
        let tail = self.v_hi.powf(df / self.q1) * self.cc1.powf(df) / self.v_lo.powf(df / self.p1);
        unit_ball_volume(d) * tail.max(self.c1.powf(df))
    }

    pub fn r_star(&self) -> f64 {
        self.q1.min(self.p1)
    }

    /// `(inner, outer)` sandwich radii at level `v`, `None` strictly between
    /// `v_lo` and `v_hi`.
    pub fn radii(&self, v: f64) -> Option<(f64, f64)> {
        if v <= self.v_lo {
            Some((self.c2 * v.powf(1.0 / self.p2), self.c1 * v.powf(1.0 / self.p1)))
        } else if v >= self.v_hi {
            Some((self.cc2 * v.powf(1.0 / self.q2), self.cc1 * v.powf(1.0 / self.q1)))
        } else {
            None
        }
    }

    /// Lower bound for the inscribed radius of `{V < v}`.
    pub fn inner_radius(&self, v: f64) -> f64 {
        if v < self.v_lo {
            self.c2 * v.powf(1.0 / self.p2)
        } else if v < self.v_hi {
            self.c2 * self.v_lo.powf(1.0 / self.p2)
        } else {
            self.cc2 * v.powf(1.0 / self.q2)
        }
    }

    /// Upper bound for the circumscribed radius of `{V < v}`.
    pub fn outer_radius(&self, v: f64) -> f64 {
        if v < self.v_lo {
            self.c1 * v.powf(1.0 / self.p1)
        } else if v < self.v_hi {
            self.cc1 * self.v_hi.powf(1.0 / self.q1)
        } else {
            self.cc1 * v.powf(1.0 / self.q1)
        }
    }
}

/// The piecewise function and its envelope from the auxiliary estimate used
/// for conditioning profiles:
/// `f = c_hi L^β` for `L ≥ v_hi`, `c_mid` between, `c_lo L^{−α}` for `L < v_lo`,
/// with `L = log(1/t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseProfile {
    pub c_hi: f64,
    pub c_mid: f64,
    pub c_lo: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v_lo: f64,
    pub v_hi: f64,
}

impl PiecewiseProfile {
    pub fn value(&self, t: f64) -> f64 {
        let l = -t.ln();
        if l >= self.v_hi {
            self.c_hi * l.powf(self.beta)
        } else if l >= self.v_lo {
            self.c_mid
        } else {
            self.c_lo * l.powf(-self.alpha)
        }
    }

    /// `max{c_hi, c_mid, c_lo} · L^β` for `t ≤ 1/e`, `… · L^{−α}` above.
    pub fn envelope(&self, t: f64) -> f64 {
        let l = -t.ln();
        let c = self.c_hi.max(self.c_mid).max(self.c_lo);
        if l >= 1.0 {
            c * l.powf(self.beta)
        } else {
            c * l.powf(-self.alpha)
        }
    }
}

/// Inscribed/circumscribed radii of the slices and their ratio `κ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditioningProfile {
    /// Slices are Euclidean balls of the Student-type family.
    Round { dim: usize, dof: f64 },
    /// Slices are ellipsoids with curvature between `m` and `l`.
    Ellipsoid { m: f64, l: f64 },
    /// Validated bounds from ball sandwiches.
    Sandwich { dim: usize, constants: SandwichConstants },
}

impl ConditioningProfile {
    /// `r(t)`, or a lower bound for it.
    pub fn inscribed_radius(&self, t: f64) -> f64 {
        let level = -t.ln();
        match self {
            ConditioningProfile::Round { dim, dof } => (level * 2.0 / (*dim as f64 + dof)).exp_m1().sqrt(),
            ConditioningProfile::Ellipsoid { l, .. } => (2.0 * level / l).sqrt(),
            ConditioningProfile::Sandwich { constants, .. } => constants.inner_radius(level),
        }
    }

    /// `R(t)`, or an upper bound for it.
    pub fn circumscribed_radius(&self, t: f64) -> f64 {
        let level = -t.ln();
        match self {
            ConditioningProfile::Round { .. } => self.inscribed_radius(t),
            ConditioningProfile::Ellipsoid { m, .. } => (2.0 * level / m).sqrt(),
            ConditioningProfile::Sandwich { constants, .. } => constants.outer_radius(level),
        }
    }

    /// `κ(t) = R(t)/r(t)`, or an upper bound for it.
    pub fn kappa(&self, t: f64) -> f64 {
        match self {
            ConditioningProfile::Round { .. } => 1.0,
            ConditioningProfile::Ellipsoid { m, l } => (l / m).sqrt(),
            ConditioningProfile::Sandwich { .. } => self.circumscribed_radius(t) / self.inscribed_radius(t),
        }
    }

    /// The three-case bound on `κ(t)` in piecewise form.
    pub fn kappa_piecewise(&self) -> Option<PiecewiseProfile> {
        let ConditioningProfile::Sandwich { constants: k, .. } = self else { return None };
        Some(PiecewiseProfile {
            c_hi: k.cc1 / k.cc2,
            c_mid: k.cc1 * k.v_hi.powf(1.0 / k.q1) / (k.c2 * k.v_lo.powf(1.0 / k.p2)),
            c_lo: k.c1 / k.c2,
            alpha: 1.0 / k.p2 - 1.0 / k.p1,
            beta: 1.0 / k.q1 - 1.0 / k.q2,
            v_lo: k.v_lo,
            v_hi: k.v_hi,
        })
    }

    /// Envelope bound `b1/(2³³d²) · L^{±…}` on `κ(t)`.
    pub fn kappa_envelope(&self, t: f64) -> Option<f64> {
        self.kappa_piecewise().map(|p| p.envelope(t))
    }

    /// `sup_t κ(t)` when finite.
    pub fn kappa_bar(&self) -> Option<f64> {
        match self {
            ConditioningProfile::Round { .. } => Some(1.0),
            ConditioningProfile::Ellipsoid { m, l } => Some((l / m).sqrt()),
            ConditioningProfile::Sandwich { constants, .. } => {
                (constants.p1 == constants.p2 && constants.q1 == constants.q2).then(|| {
                    let p = self.kappa_piecewise().expect("sandwich profile");
                    p.c_hi.max(p.c_mid).max(p.c_lo)
                })
            }
        }
    }

    /// Upper bound on `m(t)`: `b2 · max{L^{d/q1}, L^{d/p1}}`.
    pub fn level_mass_envelope(&self, t: f64) -> Option<f64> {
        let ConditioningProfile::Sandwich { dim, constants: k } = self else { return None };
        let l = -t.ln();
        let d = *dim as f64;
        Some(k.b2(*dim) * l.powf(d / k.q1).max(l.powf(d / k.p1)))
    }
}

/// Conditioning profile of a quasi-log-concave builtin.
pub fn conditioning_profile(target: &Target) -> Result<ConditioningProfile> {
    if !target.is_natural() {
        return Err(Error::NoAnalyticShape("rebased target".into()));
    }
    match target.family() {
        Family::StudentT { dim, dof } => Ok(ConditioningProfile::Round { dim: *dim, dof: *dof }),
        Family::DiagQuadratic { coeffs } => Ok(ConditioningProfile::Ellipsoid {
            m: coeffs.iter().cloned().fold(f64::INFINITY, f64::min),
            l: coeffs.iter().cloned().fold(0.0, f64::max),
        }),
        Family::QuadQuartic { quadratic } => Ok(ConditioningProfile::Sandwich {
            dim: quadratic.len(),
            constants: SandwichConstants::quad_quartic(quadratic.len()),
        }),
        Family::Exp { alpha, lambda } if alpha >= lambda => {
            Err(invalid("one-dimensional targets have no conditioning profile"))
        }
        _ => Err(invalid(format!("{target} is not a quasi-log-concave multivariate builtin"))),
    }
}

/// Outcome of a ball-sandwich check at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichReport {
    pub level: f64,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Smallest `v − V(x)` over points drawn in the shrunken inner ball.
    pub inner_margin: f64,
    /// Smallest `outer − ρ(θ)` over random directions, where `ρ(θ)` is the
    /// distance from the origin to the boundary of `{V < v}` along `θ`.
    pub outer_margin: f64,
    /// Smallest `ρ(θ) − inner` over the same directions.
    pub radial_inner_margin: f64,
    pub passed: bool,
}

/// Draws `n` points in the inner ball shrunk by `1 − 1e−6` and checks
/// `V < v`, then compares the boundary distance of `{V < v}` along `n`
/// random directions with both radii.
pub fn ball_sandwich_check<R: Rng + ?Sized>(target: &Target, v: f64, n: usize, rng: &mut R) -> Result<SandwichReport> {
    let Family::QuadQuartic { quadratic } = target.family() else {
        return Err(invalid("ball sandwiches are defined for the quadratic–quartic family"));
    };
    let d = quadratic.len();
    let k = SandwichConstants::quad_quartic(d);
    let (inner, outer) = k
        .radii(v)
        .ok_or_else(|| invalid(format!("level {v} lies strictly between {} and {}", k.v_lo, k.v_hi)))?;
    let mut inner_margin = f64::INFINITY;
    for _ in 0..n {
        let r = inner * (1.0 - 1e-6) * rng.random::<f64>().powf(1.0 / d as f64);
        let x: Vec<f64> = random_direction(d, rng).into_iter().map(|u| r * u).collect();
        inner_margin = inner_margin.min(v - target.potential(&x)?);
    }
    let mut outer_margin = f64::INFINITY;
    let mut radial_inner_margin = f64::INFINITY;
    for _ in 0..n {
        let rho = radial_extent(target, &random_direction(d, rng), v)?;
        outer_margin = outer_margin.min(outer - rho);
        radial_inner_margin = radial_inner_margin.min(rho - inner);
    }
    Ok(SandwichReport {
        level: v,
        inner_radius: inner,
        outer_radius: outer,
        inner_margin,
        outer_margin,
        radial_inner_margin,
        passed: inner_margin > 0.0 && outer_margin >= 0.0 && radial_inner_margin >= 0.0,
    })
}

/// Largest violation of the pointwise bounds `|x|⁴/d ≤ V ≤ |x|²` on the unit
/// ball and `|x|²/d ≤ V ≤ |x|⁴` outside, over `n` points with radii uniform
/// on `[0, 3)`. Nonpositive means no violation.
pub fn potential_sandwich_violation<R: Rng + ?Sized>(target: &Target, n: usize, rng: &mut R) -> Result<f64> {
    let Family::QuadQuartic { quadratic } = target.family() else {
        return Err(invalid("potential sandwich is defined for the quadratic–quartic family"));
    };
    let d = quadratic.len();
    let df = d as f64;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..n {
        let r = 3.0 * rng.random::<f64>();
        let x: Vec<f64> = random_direction(d, rng).into_iter().map(|u| r * u).collect();
        let v = target.potential(&x)?;
        let (r2, r4) = (r * r, r * r * r * r);
        let (lo, hi) = if r <= 1.0 { (r4 / df, r2) } else { (r2 / df, r4) };
        let scale = 1e-12 * (1.0 + hi);
        worst = worst.max(lo - v - scale).max(v - hi - scale);
    }
    Ok(worst)
}
