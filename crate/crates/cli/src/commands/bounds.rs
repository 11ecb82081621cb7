use clap::Subcommand;
use slicelab::geometry::{bimodal_constants, conditioning_profile};
use slicelab::target::unit_ball_volume;
use slicelab::wpi;
use slicelab::Target;

use super::{CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::{num, show, write_csv, Stamp};

#[derive(Debug, Clone, Subcommand)]
pub enum BoundsCmd {
    /// Ideal slice sampler gap on the exponential family.
    GammaExp { alpha: f64, lambda: f64 },
    /// Hit-and-Run gap lower bound for dimension d and conditioning kappa.
    HarGap { d: usize, kappa: f64 },
    /// Quadratic-quartic constants and WPI bounds at s.
    Qq { d: usize, s: f64 },
    /// Stepping-out comparison constant for width h, gap delta and smallest slice mass m (`inf` allowed).
    Rho { h: f64, delta: f64, m: f64 },
    /// Student-type ideal slice sampler gap lower bound.
    StudentGap { d: usize, m: f64 },
    /// Conditioning and Hit-and-Run bound of a diagonal quadratic, coefficients comma-separated.
    DiagKappa { coeffs: String },
    /// Iterations for accuracy epsilon on the quadratic-quartic family.
    Iterations { d: usize, gamma_d: f64, m: f64, epsilon: f64 },
    /// Total variation bound sqrt(M) sqrt(alpha).
    Tv { m: f64, alpha: f64 },
    /// Bimodality constants of the builtin bimodal target and rho at h = 2 delta.
    Bimodal,
    /// Conditioning profile of a multivariate builtin; writes profile.csv.
    Kappa { target: String },
}

const FOOTNOTES: [&str; 2] = [
    "[1] strongly convex targets: the level sets lie between balls of radii sqrt(2 ln(1/t)/L) and \
     sqrt(2 ln(1/t)/m), so kappa_bar = sqrt(L/m) and the Hit-and-Run bound is 2^-33 d^-2 m/L. The inverted ratio \
     sqrt(m/L) is a suspected typo and is not used.",
    "[2] iterations: the factor (M eps)^(16/(d+2)) grows with eps, although an accuracy threshold would suggest \
     (M/eps); the formula is evaluated exactly as stated.",
];

fn line(name: &str, value: f64, formula: &str) {
    println!("{name:<24} = {:<16} {formula}", show(value));
}

fn err(e: slicelab::Error) -> String {
    e.to_string()
}

pub fn run(cmd: &BoundsCmd, cfg: &ExperimentConfig) -> CmdResult {
    match cmd {
        BoundsCmd::GammaExp { alpha, lambda } => {
            if !(*alpha > 0.0 && *lambda > 0.0) {
                return Err("alpha and lambda must be positive".into());
            }
            line("gamma_exp", wpi::gamma_exp_slice(*alpha, *lambda), "(a+l)/(2a) if a >= l, else (a/(2l-a))^2");
        }
        BoundsCmd::HarGap { d, kappa } => {
            line("har_gap", wpi::har_gap_bound(*d, *kappa).map_err(err)?, "2^-33 d^-2 kappa^-2 [1]");
        }
        BoundsCmd::Qq { d, s } => {
            let b = wpi::quad_quartic_bound(*d, *s).map_err(err)?;
            line("b1", b.b1, "2^33 d^3");
            line("b2", b.b2, "omega_d d^(3d/4)");
            line("r_star", b.r_star, "");
            line("two_term", b.two_term, "b2 min(...)^(d/r+1) + tail term");
            line("simplified", b.simplified, "omega_d d^(2d) 2^(6d) s^-(d/8+1/4)");
            line("beta", b.two_term * std::f64::consts::E / (4.0 * unit_ball_volume(*d)), "two_term / (4c), c >= omega_d/e");
        }
        BoundsCmd::Rho { h, delta, m } => {
            line("rho", wpi::rho_stepping_out(*h, *delta, *m).map_err(err)?, "(h-delta)/h * m/(m+delta)");
        }
        BoundsCmd::StudentGap { d, m } => {
            if *d == 0 || !(*m > 1.0) {
                return Err("need d >= 1 and m > 1".into());
            }
            line("student_gap", wpi::student_ideal_gap(*d, *m), "(m-1)/((d+1)(d+m-1))");
        }
        BoundsCmd::DiagKappa { coeffs } => {
            let coeffs: Vec<f64> =
                coeffs.split(',').map(|c| c.trim().parse().map_err(|_| format!("bad coefficient `{c}`"))).collect::<Result<_, _>>()?;
            let t = Target::diag_quadratic(coeffs.clone()).map_err(err)?;
            let kappa = conditioning_profile(&t).map_err(err)?.kappa_bar().ok_or("unbounded conditioning")?;
            line("kappa_bar", kappa, "sqrt(L/m) [1]");
            line("har_gap", wpi::har_gap_bound(coeffs.len(), kappa).map_err(err)?, "2^-33 d^-2 m/L [1]");
        }
        BoundsCmd::Iterations { d, gamma_d, m, epsilon } => {
            line(
                "iterations",
                wpi::iterations_for_epsilon(*d, *gamma_d, *m, *epsilon).map_err(err)?,
                "2^48 (M eps)^(16/(d+2)) d^16 ((d+10)/(8 gamma_d))^3 [2]",
            );
        }
        BoundsCmd::Tv { m, alpha } => {
            if !(*m >= 0.0 && *alpha >= 0.0) {
                return Err("M and alpha must be nonnegative".into());
            }
            line("tv", wpi::tv_bound(*m, *alpha), "sqrt(M) sqrt(alpha)");
        }
        BoundsCmd::Bimodal => {
            let c = bimodal_constants(&Target::bimodal());
            line("t1", c.t1, "lowest height with two slice pieces");
            line("t2", c.t2, "highest height with two slice pieces");
            line("delta", c.delta_max, "largest gap between the pieces");
            line("m_small", c.m_small, "smallest slice mass on [t1, t2)");
            line("x_star", c.x_star, "interior local minimum");
            let h = 2.0 * c.delta_max;
            line("rho(h = 2 delta)", wpi::rho_stepping_out(h, c.delta_max, c.m_small).map_err(err)?, "(h-delta)/h * m/(m+delta)");
        }
        BoundsCmd::Kappa { target } => {
            let t: Target = target.parse().map_err(err)?;
            let profile = conditioning_profile(&t).map_err(err)?;
            let rows: Vec<String> = (0..50)
                .map(|k| {
                    let level = 10f64.powf(-6.0 + 6.0 * k as f64 / 50.0);
                    let (r, big_r) = (profile.inscribed_radius(level), profile.circumscribed_radius(level));
                    format!("{},{},{},{}", num(level), num(r), num(big_r), num(profile.kappa(level)))
                })
                .collect();
            let path = write_csv(&cfg.out, "profile.csv", &Stamp::new(cfg, None, None), "t,r_lower,R_upper,kappa_upper", &rows)?;
            match profile.kappa_bar() {
                Some(k) => {
                    line("kappa_bar", k, "sup_t R(t)/r(t) [1]");
                    line("har_gap", wpi::har_gap_bound(t.dim(), k).map_err(err)?, "2^-33 d^-2 kappa_bar^-2");
                }
                None => println!("kappa_bar unbounded; see {}", path.display()),
            }
            println!("wrote {}", path.display());
        }
    }
    println!();
    for f in FOOTNOTES {
        println!("{f}");
    }
    Ok(Outcome::default())
}
