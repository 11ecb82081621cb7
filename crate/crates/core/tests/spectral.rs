use rand::Rng;
use slicelab::kernels::{ideal_step, KernelSpec, MarkovKernel, OnSliceKernel, StepWidth};
use slicelab::rng::{stream, StreamRng};
use slicelab::spectral::{
    check_domination, check_gap_sandwich, check_reversible_positive, chi_square_test, dirichlet_form_matrix,
    dirichlet_form_mc, discretize_on_grid, ideal_dirichlet_quadrature, invariance_test, osc_norm, spectral_gap,
    spectrum, variance, Grid, MatrixKernel, Observable, StochasticMatrix, TestFunctionSet,
};
use slicelab::wpi::rho_stepping_out;
use slicelab::Target;

fn matrix(kernel: &MatrixKernel, target: &Target, grid: &Grid) -> StochasticMatrix {
    discretize_on_grid(kernel, target, grid).unwrap()
}

fn max_entry_diff(a: &StochasticMatrix, b: &StochasticMatrix) -> f64 {
    (a.p.clone() - b.p.clone()).abs().max()
}

#[test]
fn identity_and_independent() {
    let t = Target::exp(1.0, 0.5).unwrap();
    let grid = Grid::mixed(&t, 40, 40.0).unwrap();
    let id = matrix(&MatrixKernel::Identity, &t, &grid);
    for i in 0..id.len() {
        assert_eq!(id.p[(i, i)], 1.0);
    }
    assert_eq!(spectral_gap(&id).unwrap(), 0.0);

    let ind = matrix(&MatrixKernel::Independent, &t, &grid);
    for i in 0..ind.len() {
        for j in 0..ind.len() {
            assert!((ind.p[(i, j)] - ind.weights[j]).abs() < 1e-12);
        }
    }
    assert!((spectral_gap(&ind).unwrap() - 1.0).abs() < 1e-10);
    let ev = spectrum(&ind).unwrap();
    assert!((ev[ev.len() - 1] - 1.0).abs() < 1e-10);
    assert!(ev[..ev.len() - 1].iter().all(|v| v.abs() < 1e-10));
}

#[test]
fn flat_target_ideal_rows_are_pi() {
    let t = Target::exp(1.0, 1.0).unwrap();
    let grid = Grid::mixed(&t, 60, 40.0).unwrap();
    let u = matrix(&MatrixKernel::Ideal, &t, &grid);
    for i in 0..u.len() {
        for j in 0..u.len() {
            assert!((u.p[(i, j)] - u.weights[j]).abs() < 1e-10);
        }
    }
}

#[test]
fn ideal_matrix_on_exponential() {
    let t = Target::exp(1.0, 0.5).unwrap();
    let grid = Grid::mixed(&t, 200, 40.0).unwrap();
    let u = matrix(&MatrixKernel::Ideal, &t, &grid);
    assert!(u.row_sum_error() < 1e-10);
    assert!(u.invariance_error() < 1e-8);
    let pos = check_reversible_positive(&u);
    assert!(pos.reversible && pos.positive, "{pos:?}");
    assert!(pos.min_eigenvalue >= -1e-8);
    assert!(spectral_gap(&u).unwrap() >= 0.73);
}

#[test]
fn dirichlet_form_basics() {
    let t = Target::exp(1.0, 0.5).unwrap();
    let grid = Grid::mixed(&t, 50, 40.0).unwrap();
    let u = matrix(&MatrixKernel::Ideal, &t, &grid);
    let ind = matrix(&MatrixKernel::Independent, &t, &grid);
    let id = matrix(&MatrixKernel::Identity, &t, &grid);
    let constant = vec![3.0; grid.len()];
    assert!(dirichlet_form_matrix(&u, &constant).abs() < 1e-14);
    let f: Vec<f64> = grid.points.iter().map(|x| x.sqrt()).collect();
    let var = variance(&ind.weights, &f);
    assert!((dirichlet_form_matrix(&ind, &f) - var).abs() < 1e-12 * var.max(1.0));
    assert_eq!(dirichlet_form_matrix(&id, &f), 0.0);
    let e = dirichlet_form_matrix(&u, &f);
    assert!(e > 0.0 && e <= 2.0 * var);
}

#[test]
fn oscillation_norm() {
    let w = vec![0.25; 4];
    assert_eq!(osc_norm(&[0.0, 1.0, 1.0, 0.0], &w), 1.0);
    assert_eq!(osc_norm(&[2.0; 4], &w), 0.0);
    let xs: Vec<f64> = (0..=40).map(f64::from).collect();
    assert_eq!(osc_norm(&xs, &vec![1.0; 41]), 40.0);
    assert_eq!(osc_norm(&[5.0, -9.0], &[1.0, 0.0]), 0.0);
}

#[test]
fn quadrature_matches_matrix_for_cell_constant_functions() {
    for (s, x_max) in [("exp(1,0.5)", 40.0), ("exp(1,2)", 40.0), ("bimodal1d", 8.0)] {
        let t: Target = s.parse().unwrap();
        let grid = Grid::mixed(&t, 80, x_max).unwrap();
        let u = matrix(&MatrixKernel::Ideal, &t, &grid);
        let fns = TestFunctionSet::generate(&grid, 3, 3, 2, 3).unwrap();
        for f in &fns.functions {
            let obs = Observable::CellConstant { edges: grid.edges.clone(), values: f.values.clone() };
            let quad = ideal_dirichlet_quadrature(&t, &obs).unwrap();
            let mat = dirichlet_form_matrix(&u, &f.values);
            assert!((quad - mat).abs() < 1e-8 * quad.max(1e-3), "{s} {}: {quad} vs {mat}", f.id);
        }
    }
}

#[test]
fn matrix_forms_converge_to_quadrature_for_smooth_functions() {
    let t = Target::exp(1.0, 0.5).unwrap();
    let obs = Observable::Polynomial(vec![-1.0, 1.0]);
    let quad = ideal_dirichlet_quadrature(&t, &obs).unwrap();
    let form = |n: usize| {
        let grid = Grid::mixed(&t, n, 40.0).unwrap();
        let u = matrix(&MatrixKernel::Ideal, &t, &grid);
        let means = grid.cell_means(&t, |x| obs.eval(x)).unwrap();
        dirichlet_form_matrix(&u, &means)
    };
    let (coarse, fine) = (form(100), form(200));
    let err = (fine - coarse).abs();
    assert!((quad - fine).abs() <= (2.0 * err).max(1e-6), "{quad} {fine} {coarse}");
    assert!((quad - fine).abs() < (quad - coarse).abs());
}

fn mc_matches_matrix(spec: &str, kernel: MatrixKernel) {
    let t = Target::exp(1.0, 0.5).unwrap();
    let grid = Grid::mixed(&t, 200, 40.0).unwrap();
    let p = matrix(&kernel, &t, &grid);
    // Centered indicator of the first 60 cells.
    let mass: f64 = grid.pi_mass[..60].iter().sum::<f64>() / grid.pi_mass.iter().sum::<f64>();
    let values: Vec<f64> = (0..grid.len()).map(|i| if i < 60 { 1.0 - mass } else { -mass }).collect();
    let exact = dirichlet_form_matrix(&p, &values);
    let k: KernelSpec = spec.parse().unwrap();
    let mut rng = stream(31, 0);
    let est = dirichlet_form_mc(
        |x: &[f64], r: &mut StreamRng| k.step(&t, x, r),
        |r: &mut StreamRng| t.sample_exact(r),
        |x: &[f64]| values[grid.cell_of(x[0])],
        200_000,
        &mut rng,
    )
    .unwrap();
    assert!((est.value - exact).abs() < 4.0 * est.standard_error, "{spec}: {} ± {} vs {exact}", est.value, est.standard_error);
}

#[test]
fn monte_carlo_agrees_with_matrix_ideal() {
    mc_matches_matrix("ideal", MatrixKernel::Ideal);
}

#[test]
fn monte_carlo_agrees_with_matrix_hybrid_im() {
    mc_matches_matrix("hybrid:im", MatrixKernel::HybridIm);
}

#[test]
fn domination_holds() {
    let t = Target::exp(1.0, 0.5).unwrap();
    let grid = Grid::mixed(&t, 120, 40.0).unwrap();
    let u = matrix(&MatrixKernel::Ideal, &t, &grid);
    let h = matrix(&MatrixKernel::HybridIm, &t, &grid);
    let fns = TestFunctionSet::standard(&grid, 4).unwrap();
    let rep = check_domination(&u, &h, &fns, 1e-10).unwrap();
    assert!(rep.passed, "{:?} {}", rep.worst, rep.max_violation);
    assert_eq!(rep.forms.len(), fns.len());

    let b = Target::bimodal();
    let h_width = StepWidth::DeltaMultiple(2.0).resolve(&b).unwrap();
    let grid = Grid::mixed(&b, 120, 8.0).unwrap();
    let u = matrix(&MatrixKernel::Ideal, &b, &grid);
    let so = matrix(&MatrixKernel::SteppingOut { h: h_width }, &b, &grid);
    let fns = TestFunctionSet::standard(&grid, 4).unwrap();
    assert!(check_domination(&u, &so, &fns, 1e-10).unwrap().passed);

    let c = b.bimodal_constants().unwrap();
    let rho = rho_stepping_out(h_width, c.delta_max, c.m_small).unwrap();
    assert!(check_gap_sandwich(&u, &so, rho, &fns).unwrap() >= -1e-10);
}

#[test]
fn metropolis_im_equals_hybrid_im() {
    for s in ["exp(1,0.5)", "exp(1,2)", "exp(2,0.7)"] {
        let t: Target = s.parse().unwrap();
        let grid = Grid::mixed(&t, 60, 40.0).unwrap();
        let a = matrix(&MatrixKernel::MetropolisIm, &t, &grid);
        let b = matrix(&MatrixKernel::HybridIm, &t, &grid);
        assert!(max_entry_diff(&a, &b) <= 1e-8, "{s}");
    }
    let b = Target::bimodal();
    let grid = Grid::mixed(&b, 60, 8.0).unwrap();
    assert!(discretize_on_grid(&MatrixKernel::MetropolisIm, &b, &grid).is_err());
}

#[test]
fn lazy_matrix_is_half_identity() {
    let t = Target::exp(1.0, 2.0).unwrap();
    let grid = Grid::mixed(&t, 60, 40.0).unwrap();
    let u = matrix(&MatrixKernel::Ideal, &t, &grid);
    let lazy = matrix(&MatrixKernel::Lazy(Box::new(MatrixKernel::Ideal)), &t, &grid);
    let n = u.len();
    let half = (u.p.clone() + nalgebra::DMatrix::<f64>::identity(n, n)) * 0.5;
    assert!((lazy.p.clone() - half).abs().max() < 1e-12);
    assert!(spectrum(&lazy).unwrap()[0] >= -1e-10);
}

#[test]
fn test_functions_are_centered() {
    let t = Target::bimodal();
    let grid = Grid::mixed(&t, 100, 8.0).unwrap();
    let fns = TestFunctionSet::standard(&grid, 9).unwrap();
    assert_eq!(fns.len(), 50);
    let total: f64 = grid.pi_mass.iter().sum();
    for f in &fns.functions {
        let mean: f64 = f.values.iter().zip(&grid.pi_mass).map(|(v, w)| v * w / total).sum();
        assert!(mean.abs() <= 1e-12, "{}", f.id);
        assert!(f.values.iter().any(|v| *v != f.values[0]));
    }
    let again = TestFunctionSet::standard(&grid, 9).unwrap();
    assert_eq!(fns.functions[0].values, again.functions[0].values);
}

#[test]
fn chi_square_sanity() {
    let probs = [0.2, 0.3, 0.5];
    let mut rng = stream(2, 0);
    let mut counts = [0u64; 3];
    for _ in 0..30_000 {
        let u: f64 = rng.random();
        counts[if u < 0.2 { 0 } else if u < 0.5 { 1 } else { 2 }] += 1;
    }
    let (_, p) = chi_square_test(&counts, &probs).unwrap();
    assert!(p > 1e-4);
    let (_, p) = chi_square_test(&[10_000, 10_000, 10_000], &probs).unwrap();
    assert!(p < 1e-10);
}

#[test]
fn broken_kernel_fails_invariance() {
    let t = Target::exp(1.0, 0.5).unwrap();
    // Draws the height from (0, 2ϖ(x)) instead of (0, ϖ(x)).
    let broken = |x: &[f64], r: &mut StreamRng| {
        let h = 2.0 * r.random::<f64>() * t.density(x)?;
        if h >= 1.0 {
            return Ok(x.to_vec());
        }
        OnSliceKernel::Exact.step(&t, h, x, r)
    };
    let report = invariance_test(broken, |r: &mut StreamRng| t.sample_exact(r), 20_000, 5, 4.0, 3).unwrap();
    assert!(!report.passed);
    let good = invariance_test(
        |x: &[f64], r: &mut StreamRng| ideal_step(&t, x, r),
        |r: &mut StreamRng| t.sample_exact(r),
        20_000,
        5,
        4.0,
        3,
    )
    .unwrap();
    assert!(good.passed, "{}", good.max_abs_z);
}
