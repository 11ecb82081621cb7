//! Transition mechanisms: the ideal slice sampler, hybrid slice samplers with
//! pluggable on-slice kernels, the Metropolis family and lazy versions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::geometry::{self, LevelSetShape};
use crate::rng::{self, StreamRng};
use crate::target::{parse_f64, split_call, ReferenceMeasure, Target};

/// Iteration cap for stepping out and shrinkage.
pub const PROCEDURE_CAP: usize = 1_000_000;

/// Width rule for the stepping-out procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepWidth {
    Fixed(f64),
    /// A multiple of the target's `Δ_ϖ`.
    DeltaMultiple(f64),
}

impl StepWidth {
    pub fn resolve(self, target: &Target) -> Result<f64> {
        let h = match self {
            StepWidth::Fixed(h) => h,
            StepWidth::DeltaMultiple(k) => k * geometry::bimodal_constants(target).delta_max,
        };
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("stepping-out width must be positive, got {h}")));
        }
        Ok(h)
    }
}

/// Kernels acting on a single slice `G(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnSliceKernel {
    /// `H_t = ν_t`.
    Exact,
    /// Propose from `ν`, keep the proposal if it lies in the slice.
    IndependentMetropolis,
    SteppingOut { width: StepWidth },
    HitAndRun,
}

impl OnSliceKernel {
    pub fn step<R: Rng + ?Sized>(&self, target: &Target, t: f64, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        match self {
            OnSliceKernel::Exact => geometry::uniform_on_level(target, t, rng),
            OnSliceKernel::IndependentMetropolis => im_on_slice_step(target, t, x, rng),
            OnSliceKernel::SteppingOut { width } => {
                let h = width.resolve(target)?;
                let interval = stepping_out(target, t, x, h, rng)?;
                shrink_sample(target, t, x, interval, rng).map(|y| vec![y])
            }
            OnSliceKernel::HitAndRun => hit_and_run_step(target, t, x, rng),
        }
    }
}

/// Metropolis proposals, each reversible with respect to its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProposalKernel {
    /// `N(x, σ² I)`, Lebesgue reference.
    RandomWalk { sigma: f64 },
    /// Draw from `ν` itself.
    Independent,
    /// `N(√(1−s²) x, s² C)` for the Gaussian reference `N(0, C)`.
    Pcn { s: f64 },
}

impl ProposalKernel {
    pub fn check(&self, target: &Target) -> Result<()> {
        match (self, target.reference()) {
            (ProposalKernel::RandomWalk { sigma }, ReferenceMeasure::Lebesgue { .. }) => {
                if *sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("random-walk scale must be positive"))
                }
            }
            (ProposalKernel::Independent, r) if r.is_probability() => Ok(()),
            (ProposalKernel::Pcn { s }, ReferenceMeasure::Gaussian { .. }) => {
                if (0.0..=1.0).contains(s) {
                    Ok(())
                } else {
                    Err(invalid("pCN step must lie in [0, 1]"))
                }
            }
            (p, r) => Err(Error::Mismatch(format!("{p:?} is not reversible with respect to {r:?}"))),
        }
    }

    pub fn propose<R: Rng + ?Sized>(&self, target: &Target, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        self.check(target)?;
        match (self, target.reference()) {
            (ProposalKernel::RandomWalk { sigma }, _) => Ok(x
                .iter()
                .map(|xi| {
                    let z: f64 = StandardNormal.sample(rng);
                    xi + sigma * z
                })
                .collect()),
            (ProposalKernel::Independent, r) => r.sample(rng),
            (ProposalKernel::Pcn { s }, ReferenceMeasure::Gaussian { variances }) => {
                let keep = (1.0 - s * s).sqrt();
                Ok(x.iter()
                    .zip(variances)
                    .map(|(xi, v)| {
                        let z: f64 = StandardNormal.sample(rng);
                        keep * xi + s * v.sqrt() * z
                    })
                    .collect())
            }
            _ => unreachable!("checked above"),
        }
    }
}

/// The Metropolis acceptance rule: accept when `u < ϖ(y)/ϖ(x)`.
pub fn metropolis_accept(ratio: f64, u: f64) -> bool {
    u < ratio
}

/// One Metropolis step with acceptance probability `min{1, ϖ(y)/ϖ(x)}`.
pub fn metropolis_step<R: Rng + ?Sized>(target: &Target, proposal: &ProposalKernel, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let wx = target.density(x)?;
    let y = proposal.propose(target, x, rng)?;
    let wy = target.density_or_zero(&y);
    if metropolis_accept(wy / wx, rng.random()) {
        Ok(y)
    } else {
        Ok(x.to_vec())
    }
}

/// Slice height `t = u ϖ(x)`.
pub fn slice_height(target: &Target, x: &[f64], u: f64) -> Result<f64> {
    Ok(u * target.density(x)?)
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// One step of the ideal slice sampler.
pub fn ideal_step<R: Rng + ?Sized>(target: &Target, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    hybrid_step(target, &OnSliceKernel::Exact, x, rng)
}

/// One step of the hybrid slice sampler with the given on-slice kernel.
pub fn hybrid_step<R: Rng + ?Sized>(target: &Target, on_slice: &OnSliceKernel, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let t = slice_height(target, x, open_unit(rng))?;
    on_slice.step(target, t, x, rng)
}

/// Independent-Metropolis on-slice step: draw `Y ∼ ν`, keep it if it lies in
/// the slice, otherwise stay.
pub fn im_on_slice_step<R: Rng + ?Sized>(target: &Target, t: f64, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let y = target.reference().sample(rng)?;
    Ok(if geometry::contains(target, t, &y) { y } else { x.to_vec() })
}

fn require_1d(target: &Target) -> Result<()> {
    if target.dim() != 1 {
        return Err(Error::Mismatch("stepping out needs a one-dimensional target".into()));
    }
    Ok(())
}

/// Stepping out from `x` with width `h` and initial offset `u`.
///
/// ```
/// use slicelab::kernels::stepping_out_interval;
/// let slice = |y: f64| y > 0.0 && y < 1.0;
/// assert_eq!(stepping_out_interval(slice, 0.5, 2.0, 0.75).unwrap(), (-1.0, 1.0));
/// let (l, r) = stepping_out_interval(slice, 0.5, 0.6, 0.5).unwrap();
/// assert!((l + 0.4).abs() < 1e-12 && (r - 1.4).abs() < 1e-12);
/// ```
pub fn stepping_out_interval<F: Fn(f64) -> bool>(in_slice: F, x: f64, h: f64, u: f64) -> Result<(f64, f64)> {
    let mut l = x - h * u;
    let mut r = l + h;
    let mut n = 0;
    while in_slice(l) {
        l -= h;
        n += 1;
        if n > PROCEDURE_CAP {
            return Err(Error::IterationCap { what: "stepping out", cap: PROCEDURE_CAP });
        }
    }
    while in_slice(r) {
        r += h;
        n += 1;
        if n > PROCEDURE_CAP {
            return Err(Error::IterationCap { what: "stepping out", cap: PROCEDURE_CAP });
        }
    }
    Ok((l, r))
}

/// Shrinkage toward `x` with uniform draws supplied by `draw`.
///
/// ```
/// use slicelab::kernels::shrink_interval;
/// let slice = |y: f64| y > 0.0 && y < 1.0;
/// let mut draws = [0.1, 1.0 / 3.0].into_iter();
/// let y = shrink_interval(slice, 0.5, (-0.5, 1.5), || draws.next().unwrap()).unwrap();
/// assert!((y - 0.3).abs() < 1e-12);
/// ```
pub fn shrink_interval<F, D>(in_slice: F, x: f64, interval: (f64, f64), mut draw: D) -> Result<f64>
where
    F: Fn(f64) -> bool,
    D: FnMut() -> f64,
{
    let (mut l, mut r) = interval;
    for _ in 0..PROCEDURE_CAP {
        let y = l + draw() * (r - l);
        if y == x || in_slice(y) {
            return Ok(y);
        }
        if y < x {
            l = y;
        } else {
            r = y;
        }
    }
    Err(Error::IterationCap { what: "shrinkage", cap: PROCEDURE_CAP })
}

/// Neal's stepping-out procedure on the slice `G(t)` of a one-dimensional
/// Lebesgue target.
pub fn stepping_out<R: Rng + ?Sized>(target: &Target, t: f64, x: &[f64], h: f64, rng: &mut R) -> Result<(f64, f64)> {
    require_1d(target)?;
    if !(h > 0.0) {
        return Err(invalid("stepping-out width must be positive"));
    }
    stepping_out_interval(|y| geometry::contains(target, t, &[y]), x[0], h, rng.random())
}

/// Shrinkage sampling on `G(t)` starting from `interval ∋ x`.
pub fn shrink_sample<R: Rng + ?Sized>(target: &Target, t: f64, x: &[f64], interval: (f64, f64), rng: &mut R) -> Result<f64> {
    require_1d(target)?;
    shrink_interval(|y| geometry::contains(target, t, &[y]), x[0], interval, || rng.random())
}

/// `λ = (h−δ)/h · m/(m+δ)`, the weight of `ν_t` in the stepping-out kernel.
pub fn stepping_out_lambda(h: f64, delta: f64, mass: f64) -> f64 {
    if delta == 0.0 {
        return 1.0;
    }
    (h - delta) / h * mass / (mass + delta)
}

/// Closed form of the stepping-out/shrinkage kernel on one slice:
/// `H_t(x,·) = λ ν_t + (1−λ) ν_{t,k(x)}` where `k(x)` is the piece holding `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteppingOutLaw {
    pub lambda: f64,
    pub pieces: Vec<(f64, f64)>,
}

impl SteppingOutLaw {
    pub fn mass(&self) -> f64 {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }

    fn piece_of(&self, x: f64) -> Option<usize> {
        self.pieces.iter().position(|(a, b)| x > *a && x < *b)
    }

    /// `H_t(x, (a, b))`.
    pub fn transition_mass(&self, x: f64, a: f64, b: f64) -> f64 {
        let overlap = |(lo, hi): (f64, f64)| (hi.min(b) - lo.max(a)).max(0.0);
        let global: f64 = self.pieces.iter().map(|p| overlap(*p)).sum::<f64>() / self.mass();
        let local = match self.piece_of(x) {
            Some(k) => overlap(self.pieces[k]) / (self.pieces[k].1 - self.pieces[k].0),
            None => 0.0,
        };
        self.lambda * global + (1.0 - self.lambda) * local
    }
}

/// Closed-form stepping-out kernel at height `t` for width `h ≥ Δ_ϖ`.
pub fn on_slice_closed_form(target: &Target, t: f64, h: f64) -> Result<SteppingOutLaw> {
    require_1d(target)?;
    let consts = geometry::bimodal_constants(target);
    if h < consts.delta_max {
        return Err(invalid(format!("width {h} is below Δ = {}", consts.delta_max)));
    }
    let LevelSetShape::Intervals(pieces) = geometry::level_shape(target, t)? else {
        return Err(Error::Mismatch("one-dimensional slices are interval unions".into()));
    };
    let mass: f64 = pieces.iter().map(|(a, b)| b - a).sum();
    let lambda = stepping_out_lambda(h, consts.delta(t), mass);
    Ok(SteppingOutLaw { lambda, pieces })
}

/// One Hit-and-Run step on the convex slice `G(t)`.
pub fn hit_and_run_step<R: Rng + ?Sized>(target: &Target, t: f64, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let shape = geometry::level_shape(target, t)?;
    let theta = geometry::random_direction(target.dim(), rng);
    let (lo, hi) = geometry::chord(&shape, x, &theta)?;
    let s = lo + rng.random::<f64>() * (hi - lo);
    Ok(x.iter().zip(&theta).map(|(a, b)| a + s * b).collect())
}

/// Anything that moves a state.
pub trait MarkovKernel: Sync {
    fn step<R: Rng + ?Sized>(&self, target: &Target, x: &[f64], rng: &mut R) -> Result<Vec<f64>>;
}

/// The kernel that never moves.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl MarkovKernel for Identity {
    fn step<R: Rng + ?Sized>(&self, _: &Target, x: &[f64], _: &mut R) -> Result<Vec<f64>> {
        Ok(x.to_vec())
    }
}

/// `(P + Id)/2`: stay with probability one half.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lazy<K>(pub K);

impl<K: MarkovKernel> MarkovKernel for Lazy<K> {
    fn step<R: Rng + ?Sized>(&self, target: &Target, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        if rng.random::<bool>() {
            Ok(x.to_vec())
        } else {
            self.0.step(target, x, rng)
        }
    }
}

/// Any kernel in the library, addressable by a selection string.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Ideal,
    Hybrid(OnSliceKernel),
    Metropolis(ProposalKernel),
    Lazy(Box<KernelSpec>),
}

impl KernelSpec {
    /// Checks that the kernel can run on the target without error.
    pub fn check(&self, target: &Target) -> Result<()> {
        match self {
            KernelSpec::Ideal | KernelSpec::Hybrid(OnSliceKernel::Exact) => {
                let t = 0.5 * target.density(&vec![0.0; target.dim()]).unwrap_or(0.5);
                let mut probe = rng::stream(0, 0);
                geometry::uniform_on_level(target, t, &mut probe).map(|_| ()).map_err(|e| match e {
                    Error::NoAnalyticShape(_) => {
                        Error::Mismatch(format!("no exact slice sampler for {target}; use a hybrid kernel"))
                    }
                    e => e,
                })
            }
            KernelSpec::Hybrid(OnSliceKernel::IndependentMetropolis) => {
                if target.reference().is_probability() {
                    Ok(())
                } else {
                    Err(Error::Mismatch("independent proposals need a probability reference".into()))
                }
            }
            KernelSpec::Hybrid(OnSliceKernel::SteppingOut { width }) => {
                require_1d(target)?;
                if !matches!(target.reference(), ReferenceMeasure::Lebesgue { .. }) {
                    return Err(Error::Mismatch("stepping out needs a Lebesgue reference".into()));
                }
                width.resolve(target).map(|_| ())
            }
            KernelSpec::Hybrid(OnSliceKernel::HitAndRun) => {
                if !matches!(target.reference(), ReferenceMeasure::Lebesgue { .. }) || !target.is_natural() {
                    return Err(Error::Mismatch("Hit-and-Run needs a Lebesgue target".into()));
                }
                Ok(())
            }
            KernelSpec::Metropolis(p) => p.check(target),
            KernelSpec::Lazy(inner) => inner.check(target),
        }
    }

    /// The reference measure the kernel needs, if it differs from the
    /// target's natural one.
    pub fn preferred_reference(&self, target: &Target) -> Option<ReferenceMeasure> {
        let d = target.dim();
        match self {
            KernelSpec::Metropolis(ProposalKernel::RandomWalk { .. })
            | KernelSpec::Hybrid(OnSliceKernel::SteppingOut { .. })
            | KernelSpec::Hybrid(OnSliceKernel::HitAndRun) => {
                if matches!(target.reference(), ReferenceMeasure::Exponential { .. }) {
                    None
                } else {
                    Some(ReferenceMeasure::Lebesgue { dim: d })
                }
            }
            KernelSpec::Metropolis(ProposalKernel::Pcn { .. }) => {
                Some(ReferenceMeasure::Gaussian { variances: vec![1.0; d] })
            }
            KernelSpec::Metropolis(ProposalKernel::Independent)
            | KernelSpec::Hybrid(OnSliceKernel::IndependentMetropolis) => {
                if target.reference().is_probability() {
                    None
                } else {
                    Some(ReferenceMeasure::Gaussian { variances: vec![1.0; d] })
                }
            }
            KernelSpec::Lazy(inner) => inner.preferred_reference(target),
            _ => None,
        }
    }

    /// The target expressed against the reference this kernel needs.
    pub fn adapt_target(&self, target: &Target) -> Result<Target> {
        match self.preferred_reference(target) {
            Some(r) if &r != target.reference() => target.rebased(r),
            _ => Ok(target.clone()),
        }
    }
}

impl MarkovKernel for KernelSpec {
    fn step<R: Rng + ?Sized>(&self, target: &Target, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        match self {
            KernelSpec::Ideal => ideal_step(target, x, rng),
            KernelSpec::Hybrid(k) => hybrid_step(target, k, x, rng),
            KernelSpec::Metropolis(p) => metropolis_step(target, p, x, rng),
            KernelSpec::Lazy(inner) => Lazy(inner.as_ref()).step(target, x, rng),
        }
    }
}

impl<K: MarkovKernel + ?Sized> MarkovKernel for &K {
    fn step<R: Rng + ?Sized>(&self, target: &Target, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        (**self).step(target, x, rng)
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Ideal | KernelSpec::Hybrid(OnSliceKernel::Exact) => write!(f, "ideal"),
            KernelSpec::Hybrid(OnSliceKernel::IndependentMetropolis) => write!(f, "hybrid:im"),
            KernelSpec::Hybrid(OnSliceKernel::SteppingOut { width: StepWidth::Fixed(h) }) => {
                write!(f, "hybrid:stepout(h={h})")
            }
            KernelSpec::Hybrid(OnSliceKernel::SteppingOut { width: StepWidth::DeltaMultiple(k) }) => {
                write!(f, "hybrid:stepout(h=auto{k}x)")
            }
            KernelSpec::Hybrid(OnSliceKernel::HitAndRun) => write!(f, "hybrid:har"),
            KernelSpec::Metropolis(ProposalKernel::RandomWalk { sigma }) => write!(f, "metropolis:rwm(sigma={sigma})"),
            KernelSpec::Metropolis(ProposalKernel::Independent) => write!(f, "metropolis:im"),
            KernelSpec::Metropolis(ProposalKernel::Pcn { s }) => write!(f, "metropolis:pcn(s={s})"),
            KernelSpec::Lazy(inner) => write!(f, "lazy:{inner}"),
        }
    }
}

fn keyed_arg<'a>(args: Option<&'a str>, key: &str) -> Result<&'a str> {
    let a = args.ok_or_else(|| Error::Parse(format!("missing `{key}=` argument")))?;
    a.trim()
        .strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix('='))
        .map(str::trim)
        .ok_or_else(|| Error::Parse(format!("expected `{key}=...`, got `{a}`")))
}

impl FromStr for KernelSpec {
    type Err = Error;

    /// ```
    /// use slicelab::kernels::KernelSpec;
    /// let k: KernelSpec = "lazy:hybrid:stepout(h=auto2x)".parse().unwrap();
    /// assert_eq!(k.to_string(), "lazy:hybrid:stepout(h=auto2x)");
    /// ```
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("lazy:") {
            return Ok(KernelSpec::Lazy(Box::new(rest.parse()?)));
        }
        let (name, args) = split_call(s)?;
        let plain = |k: KernelSpec| if args.is_none() { Ok(k) } else { Err(Error::Parse(format!("`{name}` takes no arguments"))) };
        match name {
            "ideal" => plain(KernelSpec::Ideal),
            "hybrid:im" => plain(KernelSpec::Hybrid(OnSliceKernel::IndependentMetropolis)),
            "hybrid:har" => plain(KernelSpec::Hybrid(OnSliceKernel::HitAndRun)),
            "hybrid:exact" => plain(KernelSpec::Hybrid(OnSliceKernel::Exact)),
            "hybrid:stepout" => {
                let h = keyed_arg(args, "h")?;
                let width = match h.strip_prefix("auto").and_then(|k| k.strip_suffix('x')) {
                    Some(k) => StepWidth::DeltaMultiple(parse_f64(k)?),
                    None => StepWidth::Fixed(parse_f64(h)?),
                };
                Ok(KernelSpec::Hybrid(OnSliceKernel::SteppingOut { width }))
            }
            "metropolis:rwm" => Ok(KernelSpec::Metropolis(ProposalKernel::RandomWalk {
                sigma: parse_f64(keyed_arg(args, "sigma")?)?,
            })),
            "metropolis:im" => plain(KernelSpec::Metropolis(ProposalKernel::Independent)),
            "metropolis:pcn" => {
                Ok(KernelSpec::Metropolis(ProposalKernel::Pcn { s: parse_f64(keyed_arg(args, "s")?)? }))
            }
            _ => Err(Error::Parse(format!("unknown kernel `{s}`"))),
        }
    }
}

/// Position, random stream and step count of one chain.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub rng: StreamRng,
    pub step: u64,
}

impl ChainState {
    /// Chain `chain` under `master_seed`, started at `position`.
    pub fn new(master_seed: u64, chain: u64, position: Vec<f64>) -> Self {
        ChainState { position, rng: rng::stream(master_seed, chain), step: 0 }
    }

    pub fn advance<K: MarkovKernel>(&mut self, kernel: &K, target: &Target) -> Result<&[f64]> {
        self.position = kernel.step(target, &self.position, &mut self.rng)?;
        self.step += 1;
        Ok(&self.position)
    }
}
