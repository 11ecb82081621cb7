//! Monte Carlo Dirichlet forms, invariance tests and empirical transition
//! matrices for kernels that are only available as samplers.

use rand::Rng;
use rayon::prelude::*;
use statrs::function::gamma::gamma_ur;

use crate::error::{invalid, Result};
use crate::rng::{self, StreamRng};

use super::grid::Grid;

/// Estimate of `E(P, f)` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirichletEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub sample_count: usize,
}

/// Mean of `½(f(X) − f(Y))²` over `X ∼ π`, `Y ∼ P(X, ·)`.
///
/// The standard error is the jackknife one, which for a sample mean equals
/// the sample standard deviation over `√n`.
pub fn dirichlet_form_mc<R, S, D, F>(mut step: S, mut sampler: D, f: F, n: usize, rng: &mut R) -> Result<DirichletEstimate>
where
    R: Rng + ?Sized,
    S: FnMut(&[f64], &mut R) -> Result<Vec<f64>>,
    D: FnMut(&mut R) -> Vec<f64>,
    F: Fn(&[f64]) -> f64,
{
    if n < 2 {
        return Err(invalid("need at least two samples"));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let x = sampler(rng);
        let y = step(&x, rng)?;
        let d = f(&x) - f(&y);
        let v = 0.5 * d * d;
        sum += v;
        sum_sq += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(DirichletEstimate { value: mean, standard_error: (var / nf).sqrt(), sample_count: n })
}

/// Two-sample comparison of one moment of one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub coordinate: usize,
    pub order: u32,
    pub chain_mean: f64,
    pub exact_mean: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub chains: usize,
    pub steps: usize,
    pub threshold: f64,
    pub checks: Vec<MomentCheck>,
    pub max_abs_z: f64,
    pub passed: bool,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

/// Runs `chains` chains for `steps` steps from exact stationary draws and
/// compares first and second moments of the end points with fresh exact
/// draws, flagging any two-sample z-score above `threshold`.
///
/// Chain `i` uses stream `i` of `seed`; the fresh sample uses stream
/// `chains + i`, so the result does not depend on scheduling.
///
/// ```
/// use slicelab::spectral::invariance_test;
/// let t = slicelab::Target::exp(1.0, 0.5).unwrap();
/// let sampler = |r: &mut slicelab::rng::StreamRng| t.sample_exact(r);
/// let step = |x: &[f64], r: &mut slicelab::rng::StreamRng| slicelab::kernels::ideal_step(&t, x, r);
/// let report = invariance_test(step, sampler, 2000, 10, 4.0, 7).unwrap();
/// assert!(report.passed);
/// ```
pub fn invariance_test<S, D>(step: S, sampler: D, chains: usize, steps: usize, threshold: f64, seed: u64) -> Result<InvarianceReport>
where
    S: Fn(&[f64], &mut StreamRng) -> Result<Vec<f64>> + Sync,
    D: Fn(&mut StreamRng) -> Vec<f64> + Sync,
{
    if chains < 2 {
        return Err(invalid("need at least two chains"));
    }
    let ends: Vec<Vec<f64>> = (0..chains)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let mut x = sampler(&mut r);
            for _ in 0..steps {
                x = step(&x, &mut r)?;
            }
            Ok(x)
        })
        .collect::<Result<_>>()?;
    let fresh: Vec<Vec<f64>> = (0..chains)
        .into_par_iter()
        .map(|i| sampler(&mut rng::stream(seed, (chains + i) as u64)))
        .collect();
    let dim = ends[0].len();
    let mut checks = Vec::with_capacity(2 * dim);
    for coordinate in 0..dim {
        for order in 1..=2u32 {
            let a: Vec<f64> = ends.iter().map(|x| x[coordinate].powi(order as i32)).collect();
            let b: Vec<f64> = fresh.iter().map(|x| x[coordinate].powi(order as i32)).collect();
            let (ma, va) = mean_var(&a);
            let (mb, vb) = mean_var(&b);
            let se = ((va + vb) / chains as f64).sqrt();
            let z = if se > 0.0 { (ma - mb) / se } else if ma == mb { 0.0 } else { f64::INFINITY };
            checks.push(MomentCheck { coordinate, order, chain_mean: ma, exact_mean: mb, z });
        }
    }
    let max_abs_z = checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    Ok(InvarianceReport { chains, steps, threshold, checks, passed: max_abs_z <= threshold, max_abs_z })
}

/// Pearson chi-square statistic and upper-tail p-value for observed counts
/// against cell probabilities.
pub fn chi_square_test(counts: &[u64], probs: &[f64]) -> Result<(f64, f64)> {
    if counts.len() != probs.len() || counts.len() < 2 {
        return Err(invalid("counts and probabilities must match and have two or more cells"));
    }
    let n: u64 = counts.iter().sum();
    let total: f64 = probs.iter().sum();
    let mut stat = 0.0;
    for (c, p) in counts.iter().zip(probs) {
        let e = n as f64 * p / total;
        if !(e > 0.0) {
            return Err(invalid("chi-square cells need positive expected counts"));
        }
        stat += (*c as f64 - e).powi(2) / e;
    }
    let dof = (counts.len() - 1) as f64;
    Ok((stat, gamma_ur(0.5 * dof, 0.5 * stat)))
}

/// Transition frequencies between grid cells, estimated from stationary draws.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMatrix {
    pub counts: Vec<Vec<u64>>,
    pub p: Vec<Vec<f64>>,
    /// Largest binomial standard error over the entries.
    pub standard_error: f64,
}

/// Estimates `P(C_i, C_j)` for a sampler-only kernel from `n` pairs
/// `X ∼ π`, `Y ∼ P(X, ·)`.
pub fn discretize_empirical<S, D>(step: S, sampler: D, grid: &Grid, n: usize, seed: u64) -> Result<EmpiricalMatrix>
where
    S: Fn(&[f64], &mut StreamRng) -> Result<Vec<f64>>,
    D: Fn(&mut StreamRng) -> Vec<f64>,
{
    let k = grid.len();
    let mut counts = vec![vec![0u64; k]; k];
    let mut r = rng::stream(seed, 0);
    for _ in 0..n {
        let x = sampler(&mut r);
        let y = step(&x, &mut r)?;
        counts[grid.cell_of(x[0])][grid.cell_of(y[0])] += 1;
    }
    let mut se = 0.0f64;
    let p = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|c| {
                    if total == 0 {
                        return 0.0;
                    }
                    let q = *c as f64 / total as f64;
                    se = se.max((q * (1.0 - q) / total as f64).sqrt());
                    q
                })
                .collect()
        })
        .collect();
    Ok(EmpiricalMatrix { counts, p, standard_error: se })
}
