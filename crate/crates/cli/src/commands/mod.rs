pub mod bounds;
pub mod compare;
pub mod sample;
pub mod verify;
pub mod wpi;

use slicelab::geometry::bimodal_constants;
use slicelab::kernels::{KernelSpec, OnSliceKernel, ProposalKernel};
use slicelab::spectral::MatrixKernel;
use slicelab::target::Family;
use slicelab::wpi::{self as w, BetaFn};
use slicelab::Target;

/// Checks that ran and did not pass.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn check(&mut self, name: String, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "pass" } else { "FAIL" });
        if !ok {
            self.failures.push(format!("{name}: {detail}"));
        }
    }
}

pub type CmdResult = Result<Outcome, String>;

pub fn parse_kernel(spec: &str) -> Result<KernelSpec, String> {
    spec.parse().map_err(|e| format!("kernel `{spec}`: {e}"))
}

/// The kernel prepared for the target, or an error naming both.
pub fn prepare(kernel: &KernelSpec, target: &Target) -> Result<Target, String> {
    let adapted = kernel.adapt_target(target).map_err(|e| format!("kernel `{kernel}` on `{target}`: {e}"))?;
    kernel.check(&adapted).map_err(|e| format!("kernel `{kernel}` cannot run on `{target}`: {e}"))?;
    Ok(adapted)
}

/// The matrix form of a kernel, when one exists on this target.
pub fn matrix_kernel(kernel: &KernelSpec, target: &Target) -> Option<MatrixKernel> {
    if target.dim() != 1 || kernel.preferred_reference(target).is_some_and(|r| &r != target.reference()) {
        return None;
    }
    match kernel {
        KernelSpec::Ideal | KernelSpec::Hybrid(OnSliceKernel::Exact) => Some(MatrixKernel::Ideal),
        KernelSpec::Hybrid(OnSliceKernel::IndependentMetropolis) => Some(MatrixKernel::HybridIm),
        KernelSpec::Hybrid(OnSliceKernel::SteppingOut { width }) => {
            width.resolve(target).ok().map(|h| MatrixKernel::SteppingOut { h })
        }
        KernelSpec::Metropolis(ProposalKernel::Independent) => Some(MatrixKernel::MetropolisIm),
        KernelSpec::Lazy(inner) => matrix_kernel(inner, target).map(|k| MatrixKernel::Lazy(Box::new(k))),
        _ => None,
    }
}

/// `ρ` of stepping out with width `h` on a one-dimensional target.
pub fn stepping_out_rho(target: &Target, h: f64) -> Option<f64> {
    let c = bimodal_constants(target);
    w::rho_stepping_out(h, c.delta_max, c.m_small).ok()
}

/// A β known to certify the comparison of `kernel` with the ideal sampler.
pub fn matching_beta(kernel: &MatrixKernel, target: &Target) -> Option<BetaFn> {
    match (kernel, target.family()) {
        (MatrixKernel::Ideal, _) => BetaFn::gap(1.0).ok(),
        (MatrixKernel::HybridIm | MatrixKernel::MetropolisIm, Family::Exp { alpha, lambda }) if *alpha == 1.0 => {
            BetaFn::im_exponential(*lambda).ok()
        }
        (MatrixKernel::SteppingOut { h }, _) => BetaFn::gap(stepping_out_rho(target, *h)?).ok(),
        _ => None,
    }
}
