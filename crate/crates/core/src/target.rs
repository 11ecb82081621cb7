//! Target distributions `π(dx) = c⁻¹ ϖ(x) ν(dx)`.
//!
//! A [`Target`] pairs one of the builtin unnormalized densities with a
//! [`ReferenceMeasure`]. The builtins are immutable after construction and can
//! be shared freely between threads.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use statrs::function::erf::{erf, erfc};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, BimodalConstants};
use crate::quadrature::{self, QuadConfig};

/// Reference measure `ν`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceMeasure {
    Lebesgue { dim: usize },
    /// Exponential law with the given rate on `[0, ∞)`.
    Exponential { rate: f64 },
    /// Centered Gaussian with diagonal covariance.
    Gaussian { variances: Vec<f64> },
}

impl ReferenceMeasure {
    pub fn lebesgue(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dimension must be positive"));
        }
        Ok(ReferenceMeasure::Lebesgue { dim })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(invalid(format!("exponential rate must be positive, got {rate}")));
        }
        Ok(ReferenceMeasure::Exponential { rate })
    }

    pub fn gaussian(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() || variances.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid("Gaussian variances must be positive"));
        }
        Ok(ReferenceMeasure::Gaussian { variances })
    }

    pub fn dim(&self) -> usize {
        match self {
            ReferenceMeasure::Lebesgue { dim } => *dim,
            ReferenceMeasure::Exponential { .. } => 1,
            ReferenceMeasure::Gaussian { variances } => variances.len(),
        }
    }

    pub fn is_probability(&self) -> bool {
        !matches!(self, ReferenceMeasure::Lebesgue { .. })
    }

    pub fn in_support(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().all(|v| v.is_finite())
            && match self {
                ReferenceMeasure::Exponential { .. } => x[0] >= 0.0,
                _ => true,
            }
    }

    /// Log of the Lebesgue density of `ν` at `x`, assumed in the support.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        match self {
            ReferenceMeasure::Lebesgue { .. } => 0.0,
            ReferenceMeasure::Exponential { rate } => rate.ln() - rate * x[0],
            ReferenceMeasure::Gaussian { variances } => variances
                .iter()
                .zip(x)
                .map(|(v, xi)| -0.5 * (2.0 * PI * v).ln() - 0.5 * xi * xi / v)
                .sum(),
        }
    }

    /// Lebesgue density of `ν`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        if !self.in_support(x) {
            return Err(Error::OutsideSupport);
        }
        Ok(self.log_density(x).exp())
    }

    /// One exact draw from `ν`; Lebesgue measure has no such draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            ReferenceMeasure::Lebesgue { .. } => {
                Err(Error::Unsupported("Lebesgue reference cannot be sampled".into()))
            }
            ReferenceMeasure::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                Ok(vec![e / rate])
            }
            ReferenceMeasure::Gaussian { variances } => Ok(variances
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * v.sqrt()
                })
                .collect()),
        }
    }

    /// `ν((a, b))` for a one-dimensional reference; `b` may be infinite.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            ReferenceMeasure::Lebesgue { .. } => b - a,
            ReferenceMeasure::Exponential { rate } => {
                let a = a.max(0.0);
                let b = b.max(0.0);
                (-rate * a).exp() - (-rate * b).exp()
            }
            ReferenceMeasure::Gaussian { variances } => {
                let s = (2.0 * variances[0]).sqrt();
                0.5 * (erf(b / s) - erf(a / s))
            }
        }
    }

    /// `∫_a^b x^j ν(dx)` for `j = 0..=k` on a one-dimensional reference.
    pub fn interval_moments(&self, a: f64, b: f64, k: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; k + 1];
        if !(b > a) {
            return Ok(out);
        }
        match self {
            ReferenceMeasure::Lebesgue { .. } => {
                if b.is_infinite() || a.is_infinite() {
                    return Err(invalid("unbounded interval has infinite Lebesgue moments"));
                }
                let (mut pa, mut pb) = (a, b);
                for (j, o) in out.iter_mut().enumerate() {
                    *o = (pb - pa) / (j as f64 + 1.0);
                    pa *= a;
                    pb *= b;
                }
            }
            ReferenceMeasure::Exponential { rate } => {
                let a = a.max(0.0);
                let ea = (-rate * a).exp();
                let eb = if b.is_infinite() { 0.0 } else { (-rate * b).exp() };
                out[0] = ea - eb;
                let (mut pa, mut pb) = (1.0, 1.0);
                for j in 1..=k {
                    pa *= a;
                    if b.is_finite() {
                        pb *= b;
                    }
                    let boundary = pa * ea - if b.is_finite() { pb * eb } else { 0.0 };
                    out[j] = boundary + j as f64 / rate * out[j - 1];
                }
            }
            ReferenceMeasure::Gaussian { .. } => {
                return Err(Error::Unsupported("Gaussian interval moments".into()));
            }
        }
        Ok(out)
    }
}

/// The builtin families of unnormalized densities.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `ϖ(x) = exp(−(α−λ)x)` with respect to Exponential(λ).
    Exp { alpha: f64, lambda: f64 },
    /// `ϖ(x) = (1+|x|²)^{−(d+m)/2}` with respect to Lebesgue measure.
    StudentT { dim: usize, dof: f64 },
    /// `V(x) = Σ_{i∈I} x_i² + Σ_{i∉I} x_i⁴`; `quadratic[i]` marks membership in `I`.
    QuadQuartic { quadratic: Vec<bool> },
    /// `V(x) = ½ Σ a_i x_i²`.
    DiagQuadratic { coeffs: Vec<f64> },
    /// `ϖ(x) = max(exp(−(x+2)²), ½ exp(−(x−2)²))`.
    Bimodal,
}

/// Supremum of `ϖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupNorm {
    Finite(f64),
    Infinite,
}

impl SupNorm {
    pub fn value(self) -> f64 {
        match self {
            SupNorm::Finite(v) => v,
            SupNorm::Infinite => f64::INFINITY,
        }
    }
}

/// Monte Carlo or exact value of `m(t) = ν(G(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelMass {
    pub value: f64,
    /// Zero for analytic values.
    pub std_error: f64,
}

/// Number of directions used by the Monte Carlo level-mass fallback.
pub const LEVEL_MASS_MC_DRAWS: usize = 100_000;

/// A target density together with its reference measure.
#[derive(Debug, Clone)]
pub struct Target {
    family: Family,
    reference: ReferenceMeasure,
    natural: ReferenceMeasure,
    bimodal: Option<BimodalConstants>,
}

/// Volume of the unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

impl Target {
    /// `exp(−(α−λ)x)` against Exponential(λ), so that `π` is Exponential(α).
    ///
    /// ```
    /// let t = slicelab::Target::exp(1.0, 0.5).unwrap();
    /// assert!((t.density(&[1.0]).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
    /// assert_eq!(t.normalizer(), 0.5);
    /// ```
    pub fn exp(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be positive, got {alpha}")));
        }
        let reference = ReferenceMeasure::exponential(lambda)?;
        Ok(Self::natural(Family::Exp { alpha, lambda }, reference))
    }

    pub fn student_t(dim: usize, dof: f64) -> Result<Self> {
        if !(dof > 2.0 && dof.is_finite()) {
            return Err(invalid(format!("degrees of freedom must exceed 2, got {dof}")));
        }
        let reference = ReferenceMeasure::lebesgue(dim)?;
        Ok(Self::natural(Family::StudentT { dim, dof }, reference))
    }

    /// `quadratic_coords` lists the 1-based coordinates in `I`.
    pub fn quad_quartic(dim: usize, quadratic_coords: &[usize]) -> Result<Self> {
        let reference = ReferenceMeasure::lebesgue(dim)?;
        let mut quadratic = vec![false; dim];
        for &i in quadratic_coords {
            if i == 0 || i > dim {
                return Err(invalid(format!("coordinate {i} outside 1..={dim}")));
            }
            quadratic[i - 1] = true;
        }
        Ok(Self::natural(Family::QuadQuartic { quadratic }, reference))
    }

    pub fn diag_quadratic(coeffs: Vec<f64>) -> Result<Self> {
        let reference = ReferenceMeasure::lebesgue(coeffs.len())?;
        if coeffs.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(invalid("quadratic coefficients must be positive"));
        }
        Ok(Self::natural(Family::DiagQuadratic { coeffs }, reference))
    }

    pub fn bimodal() -> Self {
        let mut t = Self::natural(Family::Bimodal, ReferenceMeasure::Lebesgue { dim: 1 });
        t.bimodal = Some(geometry::compute_bimodal_constants());
        t
    }

    fn natural(family: Family, reference: ReferenceMeasure) -> Self {
        Target { family, natural: reference.clone(), reference, bimodal: None }
    }

    /// The same `π` expressed against another reference measure:
    /// `ϖ'(x) = ϖ(x) ρ(x) / ρ'(x)` for the Lebesgue densities `ρ`, `ρ'`.
    pub fn rebased(&self, reference: ReferenceMeasure) -> Result<Self> {
        if reference.dim() != self.dim() {
            return Err(invalid("reference dimension differs from target dimension"));
        }
        if let (ReferenceMeasure::Exponential { .. }, false) =
            (&self.natural, matches!(reference, ReferenceMeasure::Exponential { .. }))
        {
            return Err(invalid("targets on [0, ∞) can only be rebased onto exponential references"));
        }
        let mut t = self.clone();
        t.reference = reference;
        Ok(t)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn reference(&self) -> &ReferenceMeasure {
        &self.reference
    }

    /// Whether `ν` is the family's own reference measure, for which the
    /// analytic level-set geometry applies.
    pub fn is_natural(&self) -> bool {
        self.reference == self.natural
    }

    pub fn dim(&self) -> usize {
        self.natural.dim()
    }

    pub fn bimodal_constants(&self) -> Option<&BimodalConstants> {
        self.bimodal.as_ref()
    }

    fn natural_potential(&self, x: &[f64]) -> f64 {
        match &self.family {
            Family::Exp { alpha, lambda } => (alpha - lambda) * x[0],
            Family::StudentT { dim, dof } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                0.5 * (*dim as f64 + dof) * r2.ln_1p()
            }
            Family::QuadQuartic { quadratic } => quadratic
                .iter()
                .zip(x)
                .map(|(q, v)| if *q { v * v } else { (v * v) * (v * v) })
                .sum(),
            Family::DiagQuadratic { coeffs } => {
                0.5 * coeffs.iter().zip(x).map(|(a, v)| a * v * v).sum::<f64>()
            }
            Family::Bimodal => {
                let l = (x[0] + 2.0) * (x[0] + 2.0);
                let r = (x[0] - 2.0) * (x[0] - 2.0) + LN_2;
                l.min(r)
            }
        }
    }

    /// `V(x) = −log ϖ(x)`.
    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        if !self.reference.in_support(x) || !self.natural.in_support(x) {
            return Err(Error::OutsideSupport);
        }
        let mut v = self.natural_potential(x);
        if !self.is_natural() {
            v += self.reference.log_density(x) - self.natural.log_density(x);
        }
        Ok(v)
    }

    /// `ϖ(x)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        Ok((-self.potential(x)?).exp())
    }

    /// `ϖ(x)`, or zero outside the support.
    pub fn density_or_zero(&self, x: &[f64]) -> f64 {
        self.density(x).unwrap_or(0.0)
    }

    /// `‖ϖ‖_∞`, known for every builtin against its own reference.
    pub fn sup_density(&self) -> Option<SupNorm> {
        if !self.is_natural() {
            return None;
        }
        Some(match &self.family {
            Family::Exp { alpha, lambda } if alpha < lambda => SupNorm::Infinite,
            _ => SupNorm::Finite(1.0),
        })
    }

    fn check_height(&self, t: f64) -> Result<()> {
        let sup = self
            .sup_density()
            .ok_or_else(|| Error::NoAnalyticShape("rebased target".into()))?
            .value();
        if !(t > 0.0 && t < sup) {
            return Err(Error::HeightOutOfRange { t, sup });
        }
        Ok(())
    }

    /// `m(t) = ν(G(t))`: analytic where possible, Monte Carlo otherwise.
    pub fn level_mass(&self, t: f64) -> Result<LevelMass> {
        self.check_height(t)?;
        let value = match &self.family {
            Family::Exp { alpha, lambda } => {
                let r = alpha - lambda;
                if r > 0.0 {
                    -(lambda / r * t.ln()).exp_m1()
                } else if r == 0.0 {
                    1.0
                } else {
                    t.max(1.0).powf(lambda / r)
                }
            }
            Family::StudentT { dim, dof } => {
                let d = *dim as f64;
                let r2 = t.powf(-2.0 / (d + dof)) - 1.0;
                unit_ball_volume(*dim) * r2.max(0.0).powf(d / 2.0)
            }
            Family::DiagQuadratic { coeffs } => {
                let l = -t.ln();
                unit_ball_volume(coeffs.len())
                    * coeffs.iter().map(|a| (2.0 * l / a).sqrt()).product::<f64>()
            }
            Family::Bimodal => geometry::bimodal_intervals(t).iter().map(|(a, b)| b - a).sum(),
            Family::QuadQuartic { .. } => {
                let mut rng = crate::rng::stream(0x1e7e1, 0);
                return self.level_mass_mc(t, LEVEL_MASS_MC_DRAWS, &mut rng);
            }
        };
        Ok(LevelMass { value, std_error: 0.0 })
    }

    /// Monte Carlo estimate of `m(t)` for a star-shaped level set of a
    /// Lebesgue target: `Leb(G) = ω_d E|ρ(θ)|^d` over uniform directions `θ`,
    /// where `ρ(θ)` is the radial extent of `G` along `θ`.
    ///
    /// Reusing the same generator state for different `t` yields a
    /// nonincreasing estimate.
    pub fn level_mass_mc<R: Rng + ?Sized>(&self, t: f64, n: usize, rng: &mut R) -> Result<LevelMass> {
        self.check_height(t)?;
        if !matches!(self.reference, ReferenceMeasure::Lebesgue { .. }) || n < 2 {
            return Err(Error::Unsupported("Monte Carlo level mass needs a Lebesgue target and n ≥ 2".into()));
        }
        let d = self.dim();
        let level = -t.ln();
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for k in 0..n {
            let theta = geometry::random_direction(d, rng);
            let rho = geometry::radial_extent(self, &theta, level)?;
            let v = rho.powi(d as i32);
            let delta = v - mean;
            mean += delta / (k as f64 + 1.0);
            m2 += delta * (v - mean);
        }
        let w = unit_ball_volume(d);
        let sd = (m2 / (n as f64 - 1.0)).sqrt();
        Ok(LevelMass { value: w * mean, std_error: w * sd / (n as f64).sqrt() })
    }

    /// Normalizing constant `c = ∫ ϖ dν` from its closed form.
    pub fn normalizer(&self) -> f64 {
        match &self.family {
            Family::Exp { alpha, lambda } => lambda / alpha,
            Family::StudentT { dim, dof } => {
                let d = *dim as f64;
                PI.powf(d / 2.0) * gamma(dof / 2.0) / gamma((d + dof) / 2.0)
            }
            Family::QuadQuartic { quadratic } => {
                let q = quadratic.iter().filter(|b| **b).count() as i32;
                let quartic = 2.0 * gamma(1.25);
                PI.sqrt().powi(q) * quartic.powi(quadratic.len() as i32 - q)
            }
            Family::DiagQuadratic { coeffs } => {
                (2.0 * PI).powf(coeffs.len() as f64 / 2.0) / coeffs.iter().product::<f64>().sqrt()
            }
            Family::Bimodal => {
                let xs = self.bimodal.as_ref().map(|b| b.x_star).unwrap_or(LN_2 / 8.0);
                0.5 * PI.sqrt() * (1.0 + erf(xs + 2.0)) + 0.25 * PI.sqrt() * erfc(xs - 2.0)
            }
        }
    }

    /// `c` by numerical integration: adaptive in one dimension, a product
    /// Gauss–Legendre rule with 64 nodes per axis for `d ≤ 4`.
    pub fn normalizer_numeric(&self) -> Result<f64> {
        let d = self.dim();
        let integrand = |x: &[f64]| -> f64 {
            match self.density(x) {
                Ok(w) => w * self.reference.log_density(x).exp(),
                Err(_) => 0.0,
            }
        };
        let cfg = QuadConfig { abs_tol: 1e-10, rel_tol: 1e-12, max_intervals: 4000 };
        if d == 1 {
            let right = quadrature::integrate_checked(|x| integrand(&[x]), 0.0, f64::INFINITY, cfg)?;
            if matches!(self.reference, ReferenceMeasure::Exponential { .. }) {
                return Ok(right);
            }
            let left = quadrature::integrate_checked(|x| integrand(&[-x]), 0.0, f64::INFINITY, cfg)?;
            return Ok(left + right);
        }
        if d > 4 {
            return Err(Error::Unsupported(format!("numeric normalizer in dimension {d} > 4")));
        }
        let (nodes, weights) = quadrature::gauss_legendre(64);
        let half = std::f64::consts::FRAC_PI_2;
        let axis: Vec<(f64, f64)> = nodes
            .iter()
            .zip(&weights)
            .map(|(u, w)| {
                let th = half * u;
                let c = th.cos();
                (th.tan(), w * half / (c * c))
            })
            .collect();
        let mut total = 0.0;
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        loop {
            let mut w = 1.0;
            for k in 0..d {
                x[k] = axis[idx[k]].0;
                w *= axis[idx[k]].1;
            }
            total += w * integrand(&x);
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < axis.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == d {
                    return if total.is_finite() {
                        Ok(total)
                    } else {
                        Err(Error::NonIntegrable("non-finite quadrature sum".into()))
                    };
                }
            }
        }
    }

    /// One exact draw from `π`.
    pub fn sample_exact<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.family {
            Family::Exp { alpha, .. } => {
                let e: f64 = Exp1.sample(rng);
                vec![e / alpha]
            }
            Family::StudentT { dim, dof } => {
                let g1 = Gamma::new(*dim as f64 / 2.0, 1.0).expect("positive shape").sample(rng);
                let g2 = Gamma::new(dof / 2.0, 1.0).expect("positive shape").sample(rng);
                let r = (g1 / g2).sqrt();
                geometry::random_direction(*dim, rng).into_iter().map(|v| r * v).collect()
            }
            Family::DiagQuadratic { coeffs } => coeffs
                .iter()
                .map(|a| {
                    let z: f64 = StandardNormal.sample(rng);
                    z / a.sqrt()
                })
                .collect(),
            Family::QuadQuartic { quadratic } => {
                let quartic = Gamma::new(0.25, 1.0).expect("positive shape");
                quadratic
                    .iter()
                    .map(|q| {
                        if *q {
                            let z: f64 = StandardNormal.sample(rng);
                            z * std::f64::consts::FRAC_1_SQRT_2
                        } else {
                            let m: f64 = quartic.sample(rng);
                            let m = m.powf(0.25);
                            if rng.random::<bool>() { m } else { -m }
                        }
                    })
                    .collect()
            }
            Family::Bimodal => {
                let xs = self.bimodal.as_ref().map(|b| b.x_star).unwrap_or(LN_2 / 8.0);
                let left = 0.5 * PI.sqrt() * (1.0 + erf(xs + 2.0));
                let p_left = left / self.normalizer();
                let go_left = rng.random::<f64>() < p_left;
                loop {
                    let z: f64 = StandardNormal.sample(rng);
                    let z = z * std::f64::consts::FRAC_1_SQRT_2;
                    if go_left && z - 2.0 <= xs {
                        return vec![z - 2.0];
                    }
                    if !go_left && z + 2.0 >= xs {
                        return vec![z + 2.0];
                    }
                }
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        match &self.family {
            Family::Exp { alpha, lambda } => write!(f, "exp({alpha},{lambda})"),
            Family::StudentT { dim, dof } => write!(f, "student({dim},{dof})"),
            Family::QuadQuartic { quadratic } => {
                let i: Vec<String> = quadratic
                    .iter()
                    .enumerate()
                    .filter(|(_, q)| **q)
                    .map(|(k, _)| (k + 1).to_string())
                    .collect();
                write!(f, "quadquartic({},I={})", quadratic.len(), join(i))
            }
            Family::DiagQuadratic { coeffs } => write!(
                f,
                "diagquad({},a={})",
                coeffs.len(),
                join(coeffs.iter().map(|a| a.to_string()).collect())
            ),
            Family::Bimodal => write!(f, "bimodal1d"),
        }
    }
}

/// Splits `name(args)` into the name and the argument text.
pub(crate) fn split_call(s: &str) -> Result<(&str, Option<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, None)),
        Some(open) => {
            if !s.ends_with(')') {
                return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
            }
            Ok((s[..open].trim(), Some(&s[open + 1..s.len() - 1])))
        }
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("expected a number, got `{s}`")))
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    let s = s.trim().trim_start_matches('{').trim_end_matches('}');
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad list entry `{p}`"))))
        .collect()
}

/// `d` followed by `key=list`.
fn parse_dim_and_list<T: FromStr>(args: &str, key: &str) -> Result<(usize, Vec<T>)> {
    let (d, rest) = match args.split_once(',') {
        Some((d, rest)) => (d, Some(rest)),
        None => (args, None),
    };
    let d: usize = d.trim().parse().map_err(|_| Error::Parse(format!("bad dimension `{d}`")))?;
    let list = match rest {
        None => Vec::new(),
        Some(rest) => {
            let rest = rest.trim();
            let body = rest
                .strip_prefix(key)
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or_else(|| Error::Parse(format!("expected `{key}=...`, got `{rest}`")))?;
            parse_list(body)?
        }
    };
    Ok((d, list))
}

impl FromStr for Target {
    type Err = Error;

    /// Parses `exp(alpha,lambda)`, `student(d,m)`, `quadquartic(d,I=...)`,
    /// `diagquad(d,a=...)` or `bimodal1d`.
    ///
    /// ```
    /// let t: slicelab::Target = "quadquartic(2,I=1)".parse().unwrap();
    /// assert!((t.potential(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
    /// ```
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_call(s)?;
        let nums = |args: Option<&str>, n: usize| -> Result<Vec<f64>> {
            let a = args.ok_or_else(|| Error::Parse(format!("`{name}` needs {n} arguments")))?;
            let v: Vec<f64> = a.split(',').map(parse_f64).collect::<Result<_>>()?;
            if v.len() != n {
                return Err(Error::Parse(format!("`{name}` needs {n} arguments")));
            }
            Ok(v)
        };
        match name {
            "exp" => {
                let v = nums(args, 2)?;
                Target::exp(v[0], v[1])
            }
            "student" => {
                let v = nums(args, 2)?;
                if v[0].fract() != 0.0 || v[0] < 1.0 {
                    return Err(invalid("dimension must be a positive integer"));
                }
                Target::student_t(v[0] as usize, v[1])
            }
            "quadquartic" => {
                let a = args.ok_or_else(|| Error::Parse("quadquartic needs a dimension".into()))?;
                let (d, coords) = parse_dim_and_list::<usize>(a, "I")?;
                Target::quad_quartic(d, &coords)
            }
            "diagquad" => {
                let a = args.ok_or_else(|| Error::Parse("diagquad needs a dimension".into()))?;
                let (d, mut coeffs) = parse_dim_and_list::<f64>(a, "a")?;
                if coeffs.is_empty() {
                    coeffs = vec![1.0; d];
                }
                if coeffs.len() != d {
                    return Err(invalid(format!("diagquad needs {d} coefficients, got {}", coeffs.len())));
                }
                Target::diag_quadratic(coeffs)
            }
            "bimodal1d" if args.is_none() => Ok(Target::bimodal()),
            _ => Err(Error::Parse(format!("unknown target `{s}`"))),
        }
    }
}
