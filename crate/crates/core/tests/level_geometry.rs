use proptest::prelude::*;
use rand::Rng;
use slicelab::geometry::{
    ball_sandwich_check, bimodal_constants, bimodal_intervals, chord, conditioning_profile, contains, level_shape,
    random_direction, uniform_on_level, LevelSetShape, PiecewiseProfile, SandwichConstants,
};
use slicelab::rng::stream;
use slicelab::Target;

fn intervals(shape: LevelSetShape<'_>) -> Vec<(f64, f64)> {
    match shape {
        LevelSetShape::Intervals(iv) => iv,
        other => panic!("expected intervals, got {other:?}"),
    }
}

#[test]
fn membership() {
    let e = Target::exp(1.0, 0.5).unwrap();
    assert!(contains(&e, 0.5, &[0.0]));
    assert!(!contains(&e, 0.5, &[2.0]));
    let x = 1.0;
    assert!(!contains(&e, e.density(&[x]).unwrap(), &[x]));
    assert!(!contains(&e, 0.5, &[-1.0]));
}

#[test]
fn exponential_slices() {
    let e = Target::exp(1.0, 0.5).unwrap();
    let iv = intervals(level_shape(&e, (-0.5f64).exp()).unwrap());
    assert_eq!(iv.len(), 1);
    assert!(iv[0].0 == 0.0 && (iv[0].1 - 1.0).abs() < 1e-12);
    let up = Target::exp(1.0, 2.0).unwrap();
    assert_eq!(intervals(level_shape(&up, 0.5).unwrap()), vec![(0.0, f64::INFINITY)]);
    let iv = intervals(level_shape(&up, 3.0).unwrap());
    assert!((iv[0].0 - 3f64.ln()).abs() < 1e-12 && iv[0].1.is_infinite());
    assert!(level_shape(&e, 1.0).is_err());
    assert!(level_shape(&e, 0.0).is_err());
}

#[test]
fn student_slices_are_balls() {
    let (d, m, t) = (3usize, 2.5, 0.3f64);
    let s = Target::student_t(d, m).unwrap();
    let LevelSetShape::Ball { center, radius } = level_shape(&s, t).unwrap() else { panic!() };
    assert_eq!(center, vec![0.0; d]);
    let expected = (t.powf(-2.0 / (d as f64 + m)) - 1.0).sqrt();
    assert!((radius - expected).abs() < 1e-12);
}

#[test]
fn bimodal_slice_has_two_pieces_below_the_second_mode() {
    let b = Target::bimodal();
    let k = bimodal_constants(&b);
    assert!(0.4 > k.t1 && 0.4 < k.t2);
    let iv = intervals(level_shape(&b, 0.4).unwrap());
    assert_eq!(iv.len(), 2);
    assert!(iv[0].1 < iv[1].0);
    // Sign scan of ϖ − 0.4 on a fine grid.
    let n = 200_000;
    let mut crossings = Vec::new();
    let mut prev = b.density(&[-6.0]).unwrap() > 0.4;
    for i in 1..=n {
        let x = -6.0 + 12.0 * i as f64 / n as f64;
        let inside = b.density(&[x]).unwrap() > 0.4;
        if inside != prev {
            crossings.push(x);
        }
        prev = inside;
    }
    assert_eq!(crossings.len(), 4);
    let ends = [iv[0].0, iv[0].1, iv[1].0, iv[1].1];
    for (c, e) in crossings.iter().zip(ends) {
        assert!((c - e).abs() < 1e-4);
    }
    assert_eq!(bimodal_intervals(0.01).len(), 1);
    assert_eq!(bimodal_intervals(0.7).len(), 1);
}

#[test]
fn bimodal_constants_match_a_grid_scan() {
    let b = Target::bimodal();
    let k = bimodal_constants(&b);
    assert_eq!(k.t2, 0.5);
    let n = 1_000_000;
    let xs: Vec<f64> = (0..=n).map(|i| -2.0 + 4.0 * i as f64 / n as f64).collect();
    let t1 = xs.iter().map(|x| b.density(&[*x]).unwrap()).fold(f64::INFINITY, f64::min);
    assert!((k.t1 - t1).abs() < 1e-4);
    // Gap and slice mass as t approaches 1/2 from below.
    let t = 0.5 * (1.0 - 1e-9);
    let inside: Vec<bool> = (0..=n).map(|i| b.density(&[-6.0 + 12.0 * i as f64 / n as f64]).unwrap() > t).collect();
    let h = 12.0 / n as f64;
    let mass = inside.iter().filter(|v| **v).count() as f64 * h;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, v) in inside.iter().enumerate() {
        match (v, runs.last_mut()) {
            (true, Some(r)) if r.1 == i => r.1 = i + 1,
            (true, _) => runs.push((i, i + 1)),
            _ => {}
        }
    }
    assert_eq!(runs.len(), 2);
    let (gap_start, gap_end) = (runs[0].1, runs[1].0);
    let gap = (gap_end - gap_start) as f64 * h;
    assert!((gap - k.delta_max).abs() < 1e-4, "{gap} vs {}", k.delta_max);
    assert!((mass - k.m_small).abs() < 1e-4, "{mass} vs {}", k.m_small);
}

#[test]
fn unimodal_constants() {
    for s in ["exp(1,0.5)", "student(1,3)", "diagquad(1)"] {
        let k = bimodal_constants(&s.parse().unwrap());
        assert_eq!(k.delta_max, 0.0);
        assert!(k.m_small.is_infinite());
        assert!(k.is_unimodal());
        assert_eq!(k.delta(0.3), 0.0);
    }
    let k = bimodal_constants(&Target::bimodal());
    assert_eq!(k.delta(0.6), 0.0);
    assert_eq!(k.delta(0.5 * k.t1), 0.0);
    assert!(k.delta(0.45) > 0.0);
}

#[test]
fn chords() {
    let ball = LevelSetShape::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let (lo, hi) = chord(&ball, &[0.5, 0.0], &[1.0, 0.0]).unwrap();
    assert!((lo + 1.5).abs() < 1e-12 && (hi - 0.5).abs() < 1e-12);
    let mut rng = stream(3, 0);
    for _ in 0..100 {
        let th = random_direction(2, &mut rng);
        let (lo, hi) = chord(&ball, &[0.0, 0.0], &th).unwrap();
        assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }
    let qq = Target::quad_quartic(2, &[1]).unwrap();
    let shape = level_shape(&qq, (-1.0f64).exp()).unwrap();
    assert!(matches!(shape, LevelSetShape::Convex(_)));
    let (lo, hi) = chord(&shape, &[0.0, 0.0], &[0.0, 1.0]).unwrap();
    assert!((lo + 1.0).abs() < 1e-8 && (hi - 1.0).abs() < 1e-8);
    assert!(chord(&ball, &[2.0, 0.0], &[1.0, 0.0]).is_err());
    let two = LevelSetShape::Intervals(bimodal_intervals(0.4));
    assert!(chord(&two, &[-2.0], &[1.0]).is_err());
}

#[test]
fn chord_endpoints_are_sharp() {
    let targets: Vec<(Target, f64)> = vec![
        ("student(3,3)".parse().unwrap(), 0.2),
        ("diagquad(3,a=1,2,5)".parse().unwrap(), 0.3),
        ("quadquartic(4,I=1,3)".parse().unwrap(), 0.1),
        ("quadquartic(2,I=)".parse().unwrap(), 0.6),
    ];
    let mut rng = stream(4, 0);
    for (t, level) in &targets {
        let shape = level_shape(t, *level).unwrap();
        for _ in 0..1000 {
            let x = uniform_interior(t, *level, &mut rng);
            let th = random_direction(t.dim(), &mut rng);
            let (lo, hi) = chord(&shape, &x, &th).unwrap();
            let at = |s: f64| -> Vec<f64> { x.iter().zip(&th).map(|(a, b)| a + s * b).collect() };
            assert!(contains(t, *level, &at(hi - 1e-8)), "{t}");
            assert!(!contains(t, *level, &at(hi + 1e-6)), "{t}");
            assert!(contains(t, *level, &at(lo + 1e-8)), "{t}");
            assert!(!contains(t, *level, &at(lo - 1e-6)), "{t}");
        }
    }
}

/// Rejection draw from the slice inside its outer bounding box.
fn uniform_interior<R: Rng>(t: &Target, level: f64, rng: &mut R) -> Vec<f64> {
    let bound = 3.0;
    loop {
        let x: Vec<f64> = (0..t.dim()).map(|_| bound * (2.0 * rng.random::<f64>() - 1.0)).collect();
        if contains(t, level, &x) {
            return x;
        }
    }
}

#[test]
fn exact_level_draws_match_moments() {
    let n = 100_000;
    let mut rng = stream(8, 0);
    // Bimodal below t1: a single interval.
    let b = Target::bimodal();
    let t = 0.5 * bimodal_constants(&b).t1;
    let iv = intervals(level_shape(&b, t).unwrap());
    assert_eq!(iv.len(), 1);
    let (a, c) = iv[0];
    let xs: Vec<f64> = (0..n).map(|_| uniform_on_level(&b, t, &mut rng).unwrap()[0]).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
    let se = (c - a) / 12f64.sqrt() / (n as f64).sqrt();
    assert!((mean - 0.5 * (a + c)).abs() < 3.0 * se);
    let exact_m2 = (c.powi(3) - a.powi(3)) / (3.0 * (c - a));
    let var2 = (c.powi(5) - a.powi(5)) / (5.0 * (c - a)) - exact_m2 * exact_m2;
    assert!((m2 - exact_m2).abs() < 4.0 * (var2 / n as f64).sqrt());

    // Truncated exponential on [0, 1) with rate 1/2.
    let e = Target::exp(1.0, 0.5).unwrap();
    let t = (-0.5f64).exp();
    let ys: Vec<f64> = (0..n).map(|_| uniform_on_level(&e, t, &mut rng).unwrap()[0]).collect();
    assert!(ys.iter().all(|y| (0.0..1.0).contains(y)));
    let mom = e.reference().interval_moments(0.0, 1.0, 2).unwrap();
    let (m1, m2) = (mom[1] / mom[0], mom[2] / mom[0]);
    let mean = ys.iter().sum::<f64>() / n as f64;
    assert!((mean - m1).abs() < 4.0 * ((m2 - m1 * m1) / n as f64).sqrt());

    // Disc of radius R: |y|² is uniform on [0, R²).
    let s = Target::student_t(2, 3.0).unwrap();
    let LevelSetShape::Ball { radius, .. } = level_shape(&s, 0.3).unwrap() else { panic!() };
    let r2: Vec<f64> = (0..n).map(|_| uniform_on_level(&s, 0.3, &mut rng).unwrap().iter().map(|v| v * v).sum()).collect();
    let mean = r2.iter().sum::<f64>() / n as f64;
    let r_sq = radius * radius;
    assert!((mean - 0.5 * r_sq).abs() < 4.0 * r_sq / 12f64.sqrt() / (n as f64).sqrt());
}

#[test]
fn no_exact_sampler_for_convex_oracles() {
    let qq = Target::quad_quartic(2, &[1]).unwrap();
    assert!(uniform_on_level(&qq, 0.5, &mut stream(0, 0)).is_err());
}

#[test]
fn conditioning_profiles() {
    let s = conditioning_profile(&Target::student_t(3, 3.0).unwrap()).unwrap();
    for t in [0.01, 0.3, 0.9] {
        assert_eq!(s.kappa(t), 1.0);
    }
    let q = conditioning_profile(&Target::diag_quadratic(vec![1.0, 4.0]).unwrap()).unwrap();
    assert_eq!(q.kappa_bar(), Some(2.0));
    for d in [4usize, 6, 8] {
        let k = SandwichConstants::quad_quartic(d);
        assert!((k.b1(d) / (2f64.powi(33) * (d as f64).powi(3)) - 1.0).abs() < 1e-12);
    }
    let k = SandwichConstants::quad_quartic(4);
    let w4 = std::f64::consts::PI.powi(2) / 2.0;
    assert!((k.b2(4) / (w4 * 4f64.powi(3)) - 1.0).abs() < 1e-12);
    assert_eq!(k.r_star(), 2.0);
    assert!(conditioning_profile(&Target::bimodal()).is_err());
}

#[test]
fn sandwich_radii() {
    let k = SandwichConstants::quad_quartic(4);
    let (inner, outer) = k.radii(0.25).unwrap();
    assert!((inner - 0.5).abs() < 1e-15 && (outer - 1.0).abs() < 1e-15);
    let (inner, outer) = k.radii(1.0).unwrap();
    assert!((inner - 1.0).abs() < 1e-15 && (outer - 2.0).abs() < 1e-15);
    assert!(k.radii(0.5).is_none());
    let t = Target::quad_quartic(4, &[1, 2]).unwrap();
    let mut rng = stream(9, 0);
    for v in [1e-3, 0.1, 0.25, 1.0, 3.0, 20.0] {
        let r = ball_sandwich_check(&t, v, 2000, &mut rng).unwrap();
        assert!(r.passed, "{r:?}");
    }
    assert!(t.potential(&[0.0; 4]).unwrap() < 1e-9);
}

#[test]
fn piecewise_envelope() {
    let p = PiecewiseProfile { c_hi: 1.0, c_mid: 1.0, c_lo: 1.0, alpha: 1.0, beta: 1.0, v_lo: 1.0, v_hi: 2.0 };
    for i in 1..=1000 {
        let t = 10f64.powf(-8.0 + 8.0 * i as f64 / 1001.0);
        assert!(p.value(t) <= p.envelope(t) * (1.0 + 1e-12), "t = {t}");
    }
}

proptest! {
    #[test]
    fn slices_are_nested(lo in 0.01f64..0.99, hi in 0.01f64..0.99, seed in 0u64..1000, k in 0usize..5) {
        let targets = ["exp(1,0.5)", "student(2,3)", "bimodal1d", "diagquad(3)", "student(1,4)"];
        let t: Target = targets[k].parse().unwrap();
        let (s, u) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let mut rng = stream(seed, 0);
        for _ in 0..50 {
            let x = uniform_on_level(&t, u, &mut rng).unwrap();
            prop_assert!(contains(&t, u, &x));
            prop_assert!(contains(&t, s, &x));
        }
    }

    #[test]
    fn bimodal_pieces_are_ordered(t in 1e-6f64..0.999) {
        let iv = bimodal_intervals(t);
        prop_assert!(!iv.is_empty() && iv.len() <= 2);
        for (a, b) in &iv {
            prop_assert!(a < b);
        }
        if iv.len() == 2 {
            prop_assert!(iv[0].1 < iv[1].0);
        }
    }
}
