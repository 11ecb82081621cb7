use proptest::prelude::*;
use slicelab::geometry::potential_sandwich_violation;
use slicelab::quadrature::{self, QuadConfig};
use slicelab::rng::stream;
use slicelab::target::{unit_ball_volume, ReferenceMeasure, SupNorm};
use slicelab::Target;

fn builtins() -> Vec<Target> {
    [
        "exp(1,0.5)",
        "exp(1,1)",
        "exp(1,2)",
        "exp(2.5,0.7)",
        "student(1,3)",
        "student(2,3)",
        "student(5,4.5)",
        "quadquartic(2,I=1)",
        "quadquartic(4,I=1,2)",
        "quadquartic(3,I=)",
        "diagquad(2,a=1,4)",
        "diagquad(3)",
        "bimodal1d",
    ]
    .iter()
    .map(|s| s.parse().unwrap())
    .collect()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn builtin_values() {
    let e = Target::exp(1.0, 0.5).unwrap();
    assert!(close(e.density(&[1.0]).unwrap(), (-0.5f64).exp(), 1e-15));
    assert_eq!(e.sup_density(), Some(SupNorm::Finite(1.0)));
    let e2 = Target::exp(1.0, 2.0).unwrap();
    assert_eq!(e2.sup_density(), Some(SupNorm::Infinite));
    let qq = Target::quad_quartic(2, &[1]).unwrap();
    assert!(close(qq.potential(&[1.0, 1.0]).unwrap(), 2.0, 1e-15));
    assert!(close(qq.density(&[1.0, 1.0]).unwrap(), (-2.0f64).exp(), 1e-15));
}

#[test]
fn densities_at_modes() {
    assert_eq!(Target::student_t(2, 3.0).unwrap().density(&[0.0, 0.0]).unwrap(), 1.0);
    assert_eq!(Target::exp(1.0, 0.5).unwrap().density(&[0.0]).unwrap(), 1.0);
    assert_eq!(Target::quad_quartic(4, &[1, 2]).unwrap().density(&[0.0; 4]).unwrap(), 1.0);
    assert!(close(Target::bimodal().density(&[-2.0]).unwrap(), 1.0, 1e-15));
}

#[test]
fn outside_support_is_an_error() {
    let e = Target::exp(1.0, 0.5).unwrap();
    assert!(e.density(&[-0.1]).is_err());
    assert_eq!(e.density_or_zero(&[-0.1]), 0.0);
}

#[test]
fn level_masses() {
    let m = |s: &str, t: f64| s.parse::<Target>().unwrap().level_mass(t).unwrap().value;
    assert!(close(m("exp(1,0.5)", 0.5), 0.5, 1e-15));
    assert!(close(m("exp(1,2)", 2.0), 0.25, 1e-15));
    assert!(close(m("exp(1,2)", 0.5), 1.0, 1e-15));
    assert!(Target::exp(1.0, 0.5).unwrap().level_mass(1.0).is_err());
}

#[test]
fn student_level_mass_is_ball_volume() {
    let (d, dof, t) = (3usize, 4.0, 0.2f64);
    let r = (t.powf(-2.0 / (d as f64 + dof)) - 1.0).sqrt();
    let got = Target::student_t(d, dof).unwrap().level_mass(t).unwrap().value;
    assert!(close(got, unit_ball_volume(d) * r.powi(3), 1e-12));
}

#[test]
fn quad_quartic_mc_level_mass_reports_uncertainty() {
    let qq = Target::quad_quartic(2, &[1]).unwrap();
    let m = qq.level_mass((-1.0f64).exp()).unwrap();
    assert!(m.std_error > 0.0);
    // {x² + y⁴ < 1} has area 4∫₀¹ (1−y⁴)^{1/2} dy.
    let cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 500 };
    let area = 4.0 * quadrature::integrate_checked(|y: f64| (1.0 - y.powi(4)).sqrt(), 0.0, 1.0, cfg).unwrap();
    assert!((m.value - area).abs() < 4.0 * m.std_error, "{} vs {area}", m.value);
}

#[test]
fn normalizers() {
    assert_eq!(Target::exp(1.0, 0.5).unwrap().normalizer(), 0.5);
    assert_eq!(Target::exp(1.0, 2.0).unwrap().normalizer(), 2.0);
    for d in [4, 6, 8] {
        let c = Target::quad_quartic(d, &[]).unwrap().normalizer();
        assert!(c >= unit_ball_volume(d) / std::f64::consts::E);
    }
}

#[test]
fn normalizers_match_quadrature() {
    for s in ["exp(1,0.5)", "exp(1,2)", "student(1,3)", "student(2,3)", "quadquartic(2,I=1)", "diagquad(2,a=1,4)", "bimodal1d"] {
        let t: Target = s.parse().unwrap();
        let numeric = t.normalizer_numeric().unwrap();
        assert!((numeric / t.normalizer() - 1.0).abs() < 1e-6, "{s}: {numeric} vs {}", t.normalizer());
    }
    assert!(Target::quad_quartic(5, &[]).unwrap().normalizer_numeric().is_err());
}

#[test]
fn level_mass_integrates_to_normalizer() {
    let cfg = QuadConfig { abs_tol: 1e-12, rel_tol: 1e-10, max_intervals: 2000 };
    let a = Target::exp(1.0, 0.5).unwrap();
    let ia = quadrature::integrate_checked(|t| a.level_mass(t).unwrap().value, 0.0, 1.0, cfg).unwrap();
    assert!((ia / 0.5 - 1.0).abs() < 1e-6);
    let b = Target::exp(1.0, 2.0).unwrap();
    let m = |t: f64| b.level_mass(t).unwrap().value;
    let ib = quadrature::integrate_checked(m, 0.0, 1.0, cfg).unwrap()
        + quadrature::integrate_checked(m, 1.0, f64::INFINITY, cfg).unwrap();
    assert!((ib / 2.0 - 1.0).abs() < 1e-6, "{ib}");
}

#[test]
fn quad_quartic_potential_sandwich() {
    let mut rng = stream(11, 0);
    for d in [2, 4, 8] {
        for coords in [vec![], vec![1], (1..=d).collect::<Vec<_>>()] {
            let t = Target::quad_quartic(d, &coords).unwrap();
            assert!(potential_sandwich_violation(&t, 10_000, &mut rng).unwrap() <= 0.0);
        }
    }
}

#[test]
fn exact_samples_have_the_right_moments() {
    let n = 200_000;
    let mut rng = stream(5, 1);
    // Student-type with m dof is a t_m vector scaled by 1/√m: E|X|² = d/(m−2).
    let t = Target::student_t(2, 8.0).unwrap();
    let sq: Vec<f64> = (0..n).map(|_| t.sample_exact(&mut rng).iter().map(|x| x * x).sum()).collect();
    let mean = sq.iter().sum::<f64>() / n as f64;
    let sd = (sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    assert!((mean - 2.0 / 6.0).abs() < 4.0 * sd / (n as f64).sqrt(), "{mean}");

    let e = Target::exp(2.5, 0.7).unwrap();
    let xs: Vec<f64> = (0..n).map(|_| e.sample_exact(&mut rng)[0]).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    assert!((mean - 0.4).abs() < 4.0 * 0.4 / (n as f64).sqrt());

    let b = Target::bimodal();
    let right = (0..n).filter(|_| b.sample_exact(&mut rng)[0] > b.bimodal_constants().unwrap().x_star).count();
    let c = b.normalizer();
    let p = 0.25 * std::f64::consts::PI.sqrt() * erfc(b.bimodal_constants().unwrap().x_star - 2.0) / c;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((right as f64 / n as f64 - p).abs() < 4.0 * se);
}

fn erfc(x: f64) -> f64 {
    // ∫_x^∞ 2/√π e^{−u²} du by quadrature.
    let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 500 };
    2.0 / std::f64::consts::PI.sqrt()
        * quadrature::integrate_checked(|u: f64| (-u * u).exp(), x, f64::INFINITY, cfg).unwrap()
}

#[test]
fn rebasing_preserves_pi() {
    let t = Target::student_t(1, 3.0).unwrap();
    let g = t.rebased(ReferenceMeasure::gaussian(vec![1.0]).unwrap()).unwrap();
    let ratio = |x: f64| {
        let a = t.density(&[x]).unwrap() * t.reference().density(&[x]).unwrap();
        let b = g.density(&[x]).unwrap() * g.reference().density(&[x]).unwrap();
        a / b
    };
    for x in [-3.0, -0.5, 0.0, 1.7, 4.0] {
        assert!((ratio(x) - 1.0).abs() < 1e-12);
    }
    assert!(g.sup_density().is_none());
    assert!(Target::exp(1.0, 0.5).unwrap().rebased(ReferenceMeasure::lebesgue(1).unwrap()).is_err());
}

#[test]
fn parse_errors() {
    for s in ["exp(1)", "student(0,3)", "student(2,2)", "quadquartic(2,I=3)", "diagquad(2,a=1)", "gauss(1)", "exp(1,2"] {
        assert!(s.parse::<Target>().is_err(), "{s}");
    }
}

#[test]
fn display_roundtrip() {
    for t in builtins() {
        let again: Target = t.to_string().parse().unwrap();
        assert_eq!(again.to_string(), t.to_string());
        assert_eq!(again.family(), t.family());
    }
}

fn point_in(t: &Target, raw: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = raw.iter().cycle().take(t.dim()).cloned().collect();
    if matches!(t.reference(), ReferenceMeasure::Exponential { .. }) {
        x[0] = x[0].abs();
    }
    x
}

proptest! {
    #[test]
    fn density_is_exp_of_minus_potential(raw in prop::collection::vec(-6.0f64..6.0, 8), k in 0usize..13) {
        let t = &builtins()[k];
        let x = point_in(t, &raw);
        let w = t.density(&x).unwrap();
        let v = t.potential(&x).unwrap();
        prop_assert!((w - (-v).exp()).abs() <= 1e-12 * w);
        if let Some(SupNorm::Finite(s)) = t.sup_density() {
            prop_assert!(w <= s);
        }
    }

    #[test]
    fn level_mass_is_nonincreasing(t1 in 1e-6f64..0.999, t2 in 1e-6f64..0.999, k in 0usize..13) {
        let t = &builtins()[k];
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let a = t.level_mass(lo).unwrap();
        let b = t.level_mass(hi).unwrap();
        prop_assert!(a.value >= b.value - 1e-12 * a.value.max(1.0));
    }

    #[test]
    fn exp_parameters_roundtrip(alpha in 0.01f64..50.0, lambda in 0.01f64..50.0) {
        let t = Target::exp(alpha, lambda).unwrap();
        let again: Target = t.to_string().parse().unwrap();
        prop_assert_eq!(again.family(), t.family());
    }
}
