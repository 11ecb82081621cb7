//! Adaptive Gauss–Kronrod integration, Gauss–Legendre rules and bracketing
//! root finders.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub converged: bool,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn kronrod<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    for (i, &x) in XGK.iter().enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sgn in nodes {
            f(c + sgn * h * x, buf);
            for j in 0..dim {
                k[j] += WGK[i] * buf[j];
                if i % 2 == 1 {
                    g[j] += WG[i / 2] * buf[j];
                }
            }
        }
    }
    let mut error = 0.0f64;
    for j in 0..dim {
        k[j] *= h;
        g[j] *= h;
        error = error.max((k[j] - g[j]).abs());
    }
    Segment { a, b, value: k, error }
}

/// Integrates a vector-valued function over `[a, b]` (finite) with globally
/// adaptive G7/K15 bisection.
///
/// The integrand writes its `dim` components into the supplied buffer. The
/// error estimate is the sum over segments of the largest per-component
/// Kronrod–Gauss difference.
pub fn integrate_vec<F>(mut f: F, a: f64, b: f64, dim: usize, cfg: QuadConfig) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    if !(b > a) {
        return QuadResult { value: vec![0.0; dim], error: 0.0, converged: true };
    }
    let mut buf = vec![0.0; dim];
    let mut segs = vec![kronrod(&mut f, a, b, dim, &mut buf)];
    loop {
        let total_err: f64 = segs.iter().map(|s| s.error).sum();
        let mut scale = 0.0f64;
        for j in 0..dim {
            scale = scale.max(segs.iter().map(|s| s.value[j]).sum::<f64>().abs());
        }
        let tol = cfg.abs_tol.max(cfg.rel_tol * scale);
        if total_err <= tol || segs.len() >= cfg.max_intervals {
            let mut value = vec![0.0; dim];
            for s in &segs {
                for j in 0..dim {
                    value[j] += s.value[j];
                }
            }
            return QuadResult { value, error: total_err, converged: total_err <= tol };
        }
        let (idx, _) = segs
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segs.swap_remove(idx);
        let m = 0.5 * (s.a + s.b);
        if !(m > s.a && m < s.b) {
            // Segment cannot be split further in floating point.
            segs.push(Segment { error: 0.0, ..s });
            continue;
        }
        segs.push(kronrod(&mut f, s.a, m, dim, &mut buf));
        segs.push(kronrod(&mut f, m, s.b, dim, &mut buf));
    }
}

/// Scalar adaptive integration over a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, cfg: QuadConfig) -> QuadResult {
    integrate_vec(|x, out| out[0] = f(x), a, b, 1, cfg)
}

/// Vector integration over `[a, ∞)` via `x = a + L u/(1-u)` with
/// `L = max{1, |a|}`, so integrands decaying on the scale of `a` stay resolved.
pub fn integrate_vec_to_inf<F>(mut f: F, a: f64, dim: usize, cfg: QuadConfig) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    let scale = a.abs().max(1.0);
    integrate_vec(
        |u, out| {
            let w = 1.0 - u;
            let x = a + scale * u / w;
            f(x, out);
            let jac = scale / (w * w);
            for v in out.iter_mut() {
                *v = if v.is_finite() { *v * jac } else { 0.0 };
            }
        },
        0.0,
        1.0,
        dim,
        cfg,
    )
}

/// Scalar integration over `[a, ∞)`.
pub fn integrate_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, cfg: QuadConfig) -> QuadResult {
    integrate_vec_to_inf(|x, out| out[0] = f(x), a, 1, cfg)
}

/// Integrates over `[a, b]`, allowing `b = ∞`, and requires convergence.
pub fn integrate_checked<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    let r = if b.is_infinite() { integrate_to_inf(f, a, cfg) } else { integrate(f, a, b, cfg) };
    if !r.converged || !r.value[0].is_finite() {
        return Err(Error::Quadrature(format!("on [{a}, {b}], error estimate {:e}", r.error)));
    }
    Ok(r.value[0])
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket once it is narrower than `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidParameter(format!("no sign change on [{lo}, {hi}]")));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::IterationCap { what: "bisection", cap: max_iter })
    }
}

/// Boundary of a predicate along a ray: given `inside(lo)` and `!inside(hi)`,
/// bisects to a bracket narrower than `tol` and returns its inner end.
pub fn bisect_predicate<F: FnMut(f64) -> bool>(mut inside: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    for _ in 0..max_iter {
        if (hi - lo).abs() <= tol {
            return Ok(lo);
        }
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (hi - lo).abs() <= tol {
        Ok(lo)
    } else {
        Err(Error::IterationCap { what: "bisection", cap: max_iter })
    }
}

/// Maximizes a unimodal function on `[a, b]` by golden-section search.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_polynomials_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadConfig::default());
        assert!((r.value[0] - (63.0 / 6.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_inf(|x| (-2.0 * x).exp(), 1.0, QuadConfig::default());
        assert!((r.value[0] - 0.5 * (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn legendre_weights_and_moments() {
        let (x, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((m - 2.0 / 11.0).abs() < 1e-13);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn golden_parabola() {
        let (x, v) = golden_max(|u| u - u * u / 4.0, 0.0, 10.0, 1e-12);
        assert!((x - 2.0).abs() < 1e-5 && (v - 1.0).abs() < 1e-12);
    }
}
