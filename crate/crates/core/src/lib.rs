//! Ideal and hybrid slice samplers together with tools that check their
//! comparison inequalities numerically.
//!
//! * [`target`] holds the builtin unnormalized densities and their reference measures.
//! * [`geometry`] describes the level sets and their conditioning.
//! * [`kernels`] implements the samplers.
//! * [`wpi`] turns weak Poincaré functions into convergence rates and evaluates the bounds.
//! * [`spectral`] discretizes one-dimensional kernels and compares Dirichlet forms.
//! * [`verification`] runs the acceptance checks.
//!
//! ```
//! use slicelab::{kernels::KernelSpec, rng, Target};
//! use slicelab::kernels::MarkovKernel;
//!
//! let target: Target = "exp(1,0.5)".parse().unwrap();
//! let kernel: KernelSpec = "ideal".parse().unwrap();
//! let mut r = rng::stream(1, 0);
//! let mut x = target.sample_exact(&mut r);
//! for _ in 0..10 {
//!     x = kernel.step(&target, &x, &mut r).unwrap();
//! }
//! assert!(x[0] >= 0.0);
//! ```

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod rng;
pub mod spectral;
pub mod target;
pub mod verification;
pub mod wpi;

pub use error::{Error, Result};
pub use target::Target;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/targets.md")]
    mod targets {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/dirichlet.md")]
    mod dirichlet {}
    #[doc = include_str!("../../../book/src/wpi.md")]
    mod wpi {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
