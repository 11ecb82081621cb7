//! Kernel comparisons, by exact matrices on one-dimensional targets and by
//! Monte Carlo Dirichlet forms otherwise.

use rayon::prelude::*;
use slicelab::kernels::{KernelSpec, MarkovKernel};
use slicelab::rng::{self, StreamRng};
use slicelab::spectral::{self, dirichlet_form_mc, Grid, MatrixKernel, StochasticMatrix, TestFunctionSet};
use slicelab::target::Family;
use slicelab::wpi;
use slicelab::Target;

use super::{matching_beta, matrix_kernel, parse_kernel, prepare, stepping_out_rho, CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::{num, show, write_csv, Stamp};

const DOMINATION_TOL: f64 = 1e-10;
const WPI_TOL: f64 = 1e-9;
const GAP_SLACK: f64 = 0.02;
const REFINEMENT_TOL: f64 = 0.01;

const FORMS_HEADER: &str = "kernel,fn_id,E_U,E_H,ratio,se_U,se_H";
const SPECTRUM_HEADER: &str = "kernel,n,gap,bound,slack";
const WPI_HEADER: &str = "kernel,s,f_id,lhs,rhs,margin";

struct Setup {
    target: Target,
    specs: Vec<KernelSpec>,
    matrices: Option<Vec<MatrixKernel>>,
}

fn setup(cfg: &ExperimentConfig, min_kernels: usize) -> Result<Setup, String> {
    let target = cfg.target()?;
    if cfg.kernels.len() < min_kernels {
        return Err(format!("need at least {min_kernels} kernels (use --kernels ideal,...)"));
    }
    let specs: Vec<KernelSpec> = cfg.kernels.iter().map(|s| parse_kernel(s)).collect::<Result<_, _>>()?;
    for k in &specs {
        prepare(k, &target)?;
    }
    let matrices: Option<Vec<MatrixKernel>> = specs.iter().map(|k| matrix_kernel(k, &target)).collect();
    Ok(Setup { target, specs, matrices })
}

/// Closed-form lower bound on the gap of `kernel`, given the measured gap of
/// the reference kernel.
fn gap_bound(kernel: &MatrixKernel, target: &Target, reference_gap: Option<f64>) -> Option<f64> {
    match (kernel, target.family()) {
        (MatrixKernel::Ideal, Family::Exp { alpha, lambda }) => Some(wpi::gamma_exp_slice(*alpha, *lambda)),
        (MatrixKernel::SteppingOut { h }, _) => Some(stepping_out_rho(target, *h)? * reference_gap?),
        _ => None,
    }
}

fn build(kernel: &MatrixKernel, target: &Target, grid: &Grid) -> Result<StochasticMatrix, String> {
    spectral::discretize_on_grid(kernel, target, grid).map_err(|e| format!("assembling {}: {e}", kernel.name()))
}

/// Gaps at `n/2` and `n` with bounds; returns the spectrum rows.
fn spectrum_rows(
    s: &Setup,
    kernels: &[MatrixKernel],
    fine: &[StochasticMatrix],
    cfg: &ExperimentConfig,
    x_max: f64,
    out: &mut Outcome,
) -> Result<Vec<String>, String> {
    let coarse_grid = Grid::mixed(&s.target, cfg.grid_n / 2, x_max).map_err(|e| e.to_string())?;
    let gap = |p: &StochasticMatrix| spectral::spectral_gap(p).map_err(|e| format!("{}: {e}", p.label));
    let mut rows = Vec::new();
    let mut ref_gaps: Option<(f64, f64)> = None;
    for (i, (k, p)) in kernels.iter().zip(fine).enumerate() {
        let pos = spectral::check_reversible_positive(p);
        out.check(
            format!("reversibility[{}]", s.specs[i]),
            pos.reversible,
            format!("residual {:.3e}, smallest eigenvalue {}", pos.reversibility_residual, show(pos.min_eigenvalue)),
        );
        let g_fine = gap(p)?;
        let g_coarse = gap(&build(k, &s.target, &coarse_grid)?)?;
        if i == 0 && *k == MatrixKernel::Ideal {
            ref_gaps = Some((g_coarse, g_fine));
        }
        for (n, g, reference) in [(cfg.grid_n / 2, g_coarse, ref_gaps.map(|r| r.0)), (cfg.grid_n, g_fine, ref_gaps.map(|r| r.1))] {
            let bound = gap_bound(k, &s.target, reference).unwrap_or(f64::NAN);
            rows.push(format!("{},{n},{},{},{}", s.specs[i], num(g), num(bound), num(g - bound)));
        }
        if let Some(bound) = gap_bound(k, &s.target, ref_gaps.map(|r| r.1)) {
            out.check(
                format!("gap[{}]", s.specs[i]),
                g_fine >= bound - GAP_SLACK,
                format!("gap {} vs bound {} (slack {GAP_SLACK})", show(g_fine), show(bound)),
            );
            let shift = (g_fine - g_coarse).abs();
            out.check(
                format!("refinement[{}]", s.specs[i]),
                shift <= REFINEMENT_TOL,
                format!("gap moved {} from n = {} to n = {}", show(shift), cfg.grid_n / 2, cfg.grid_n),
            );
        } else {
            println!("info gap[{}]: {} (no closed-form bound)", s.specs[i], show(g_fine));
        }
    }
    Ok(rows)
}

pub fn run_compare(cfg: &ExperimentConfig) -> CmdResult {
    let s = setup(cfg, 2)?;
    match s.matrices.clone() {
        Some(kernels) => compare_matrix(cfg, &s, &kernels),
        None => compare_mc(cfg, &s),
    }
}

fn compare_matrix(cfg: &ExperimentConfig, s: &Setup, kernels: &[MatrixKernel]) -> CmdResult {
    let x_max = cfg.x_max_for(&s.target);
    let grid = Grid::mixed(&s.target, cfg.grid_n, x_max).map_err(|e| e.to_string())?;
    let mats: Vec<StochasticMatrix> = kernels.iter().map(|k| build(k, &s.target, &grid)).collect::<Result<_, _>>()?;
    let fns = TestFunctionSet::standard(&grid, cfg.seed).map_err(|e| e.to_string())?;
    let s_grid = cfg.s_values()?;
    let mut out = Outcome::default();
    println!("{} on {} cells up to x = {}, {} test functions", s.target, grid.len(), show(x_max), fns.len());

    let mut forms = Vec::new();
    let mut wpi_rows = Vec::new();
    let u = &mats[0];
    for (i, h) in mats.iter().enumerate().skip(1) {
        let name = &s.specs[i];
        let dom = spectral::check_domination(u, h, &fns, DOMINATION_TOL).map_err(|e| e.to_string())?;
        for f in &dom.forms {
            forms.push(format!("{name},{},{},{},{},0,0", f.id, num(f.e_u), num(f.e_h), num(f.ratio())));
        }
        out.check(
            format!("domination[{name}]"),
            dom.passed,
            format!(
                "max E_H - E_U = {:.3e} over {} functions{} (tol {DOMINATION_TOL:e})",
                dom.max_violation,
                dom.forms.len(),
                dom.worst.as_ref().map(|w| format!(", worst {w}")).unwrap_or_default()
            ),
        );
        if let MatrixKernel::SteppingOut { h: width } = kernels[i] {
            if let Some(rho) = stepping_out_rho(&s.target, width) {
                let ratio = dom.forms.iter().map(|f| f.ratio()).filter(|r| r.is_finite()).fold(f64::INFINITY, f64::min);
                println!("info rho[{name}]: h = {}, rho = {}, smallest E_H/E_U = {}", show(width), show(rho), show(ratio));
            }
        }
        if kernels[0] != MatrixKernel::Ideal {
            continue;
        }
        match matching_beta(&kernels[i], &s.target) {
            Some(beta) => {
                let rep = spectral::check_wpi_comparison(u, h, &beta, &s_grid, &fns, WPI_TOL).map_err(|e| e.to_string())?;
                for r in &rep.rows {
                    wpi_rows.push(format!("{name},{},{},{},{},{}", num(r.s), r.id, num(r.lhs), num(r.rhs), num(r.margin())));
                }
                let worst = rep.worst.as_ref().map(|(s, id)| format!(" at s = {}, f = {id}", show(*s))).unwrap_or_default();
                out.check(
                    format!("wpi[{name}]"),
                    rep.passed,
                    format!("beta = {beta}, min margin {:.3e}{worst} over {} pairs (tol {WPI_TOL:e})", rep.min_margin, rep.rows.len()),
                );
            }
            None => println!("info wpi[{name}]: no matching beta for this target"),
        }
    }
    let spectrum = spectrum_rows(s, kernels, &mats, cfg, x_max, &mut out)?;

    let stamp = Stamp::new(cfg, Some(cfg.grid_n), Some(x_max));
    write_csv(&cfg.out, "forms.csv", &stamp, FORMS_HEADER, &forms)?;
    write_csv(&cfg.out, "spectrum.csv", &stamp, SPECTRUM_HEADER, &spectrum)?;
    write_csv(&cfg.out, "wpi_check.csv", &stamp, WPI_HEADER, &wpi_rows)?;
    println!("wrote forms.csv, spectrum.csv, wpi_check.csv to {}", cfg.out.display());
    Ok(out)
}

/// Coordinate observables for targets without a matrix form.
fn mc_functions(target: &Target, seed: u64) -> Vec<(String, Box<dyn Fn(&[f64]) -> f64 + Send + Sync>)> {
    let mut r = rng::stream(seed, 0x0b5e);
    let mut radii: Vec<f64> =
        (0..2001).map(|_| target.sample_exact(&mut r).iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    radii.sort_by(f64::total_cmp);
    let median = radii[1000];
    let mut fns: Vec<(String, Box<dyn Fn(&[f64]) -> f64 + Send + Sync>)> =
        vec![("ball_median".into(), Box::new(move |x: &[f64]| if x.iter().map(|v| v * v).sum::<f64>().sqrt() < median { 1.0 } else { 0.0 }))];
    for i in 0..target.dim().min(3) {
        fns.push((format!("x{i}"), Box::new(move |x: &[f64]| x[i])));
        fns.push((format!("sign_x{i}"), Box::new(move |x: &[f64]| x[i].signum())));
        fns.push((format!("atan_x{i}^2"), Box::new(move |x: &[f64]| (x[i] * x[i]).atan())));
    }
    fns
}

fn compare_mc(cfg: &ExperimentConfig, s: &Setup) -> CmdResult {
    println!("{}: no matrix form for every kernel, using {} Monte Carlo pairs per form", s.target, cfg.samples);
    let prepared: Vec<Target> = s.specs.iter().map(|k| prepare(k, &s.target)).collect::<Result<_, _>>()?;
    let fns = mc_functions(&s.target, cfg.seed);
    let jobs: Vec<(usize, usize)> = (0..s.specs.len()).flat_map(|k| (0..fns.len()).map(move |f| (k, f))).collect();
    let estimates: Vec<Result<(f64, f64), String>> = jobs
        .par_iter()
        .map(|&(k, f)| {
            let mut r = rng::stream(cfg.seed, 1_000 + (k * fns.len() + f) as u64);
            let (kernel, target) = (&s.specs[k], &prepared[k]);
            let est = dirichlet_form_mc(
                |x: &[f64], r: &mut StreamRng| kernel.step(target, x, r),
                |r: &mut StreamRng| s.target.sample_exact(r),
                |x: &[f64]| (fns[f].1)(x),
                cfg.samples,
                &mut r,
            )
            .map_err(|e| format!("{kernel}: {e}"))?;
            Ok((est.value, est.standard_error))
        })
        .collect();
    let estimates: Vec<(f64, f64)> = estimates.into_iter().collect::<Result<_, _>>()?;
    let at = |k: usize, f: usize| estimates[k * fns.len() + f];

    let mut out = Outcome::default();
    let mut forms = Vec::new();
    for k in 1..s.specs.len() {
        let mut worst = f64::NEG_INFINITY;
        for (f, (id, _)) in fns.iter().enumerate() {
            let ((eu, su), (eh, sh)) = (at(0, f), at(k, f));
            worst = worst.max((eh - eu) / (su * su + sh * sh).sqrt().max(f64::MIN_POSITIVE));
            forms.push(format!("{},{id},{},{},{},{},{}", s.specs[k], num(eu), num(eh), num(eh / eu), num(su), num(sh)));
        }
        out.check(
            format!("domination[{}]", s.specs[k]),
            worst <= 4.0,
            format!("largest (E_H - E_U)/s.e. = {} over {} functions (tol 4 s.e.)", show(worst), fns.len()),
        );
    }
    let stamp = Stamp::new(cfg, None, None);
    write_csv(&cfg.out, "forms.csv", &stamp, FORMS_HEADER, &forms)?;
    write_csv(&cfg.out, "spectrum.csv", &stamp, SPECTRUM_HEADER, &[])?;
    write_csv(&cfg.out, "wpi_check.csv", &stamp, WPI_HEADER, &[])?;
    println!("wrote forms.csv to {} (spectrum and WPI checks need a matrix form)", cfg.out.display());
    Ok(out)
}

pub fn run_spectrum(cfg: &ExperimentConfig) -> CmdResult {
    let s = setup(cfg, 1)?;
    let kernels = s.matrices.clone().ok_or_else(|| format!("spectra need one-dimensional matrix kernels on {}", s.target))?;
    let x_max = cfg.x_max_for(&s.target);
    let grid = Grid::mixed(&s.target, cfg.grid_n, x_max).map_err(|e| e.to_string())?;
    let mats: Vec<StochasticMatrix> = kernels.iter().map(|k| build(k, &s.target, &grid)).collect::<Result<_, _>>()?;
    let mut out = Outcome::default();
    let rows = spectrum_rows(&s, &kernels, &mats, cfg, x_max, &mut out)?;
    let mut eig_rows = Vec::new();
    for (i, p) in mats.iter().enumerate() {
        let ev = spectral::spectrum(p).map_err(|e| e.to_string())?;
        eig_rows.extend(ev.iter().rev().enumerate().map(|(j, v)| format!("{},{j},{}", s.specs[i], num(*v))));
    }
    let stamp = Stamp::new(cfg, Some(cfg.grid_n), Some(x_max));
    write_csv(&cfg.out, "spectrum.csv", &stamp, SPECTRUM_HEADER, &rows)?;
    write_csv(&cfg.out, "eigenvalues.csv", &stamp, "kernel,index,eigenvalue", &eig_rows)?;
    println!("wrote spectrum.csv, eigenvalues.csv to {}", cfg.out.display());
    Ok(out)
}
