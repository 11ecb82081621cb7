use slicelab::wpi::{alpha_closed_form_bound, AlphaProfile, BetaFn};

use super::{CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::{num, show, write_csv, Stamp};

pub fn run(cfg: &ExperimentConfig) -> CmdResult {
    let spec = cfg.beta.as_deref().ok_or("no beta given (use --beta)")?;
    let beta: BetaFn = spec.parse().map_err(|e| format!("beta `{spec}`: {e}"))?;
    let s_grid = cfg.s_values()?;
    let n_grid = cfg.n_values()?;
    let stamp = Stamp::new(cfg, None, None);

    println!("beta = {beta}");
    let beta_rows: Vec<String> = s_grid
        .iter()
        .map(|&s| {
            let b = beta.eval(s);
            println!("  s = {:<12} beta = {}", show(s), show(b));
            format!("{},{}", num(s), num(b))
        })
        .collect();
    write_csv(&cfg.out, "beta.csv", &stamp, "s,beta", &beta_rows)?;

    let n_max = n_grid.iter().cloned().fold(1.0, f64::max);
    let profile = AlphaProfile::new(&beta, n_max).map_err(|e| format!("alpha profile of {beta}: {e}"))?;
    let case = beta.closed_form_case();
    let mut alpha_rows = Vec::with_capacity(n_grid.len());
    for &n in &n_grid {
        let a = profile.alpha(n).map_err(|e| format!("alpha({n}): {e}"))?;
        let bound = case.map(|c| alpha_closed_form_bound(c, n)).unwrap_or(f64::NAN);
        println!("  n = {:<12} alpha = {:<16} bound = {}", show(n), show(a), if bound.is_nan() { "-".into() } else { show(bound) });
        alpha_rows.push(format!("{},{},{}", num(n), num(a), num(bound)));
    }
    write_csv(&cfg.out, "alpha.csv", &stamp, "n,alpha,closed_form_bound", &alpha_rows)?;
    println!("wrote beta.csv, alpha.csv to {}", cfg.out.display());
    Ok(Outcome::default())
}
