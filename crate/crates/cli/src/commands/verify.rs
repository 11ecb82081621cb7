use slicelab::verification::{self, CriterionReport};

use super::{CmdResult, Outcome};
use crate::config::ExperimentConfig;

fn criterion(number: u8, seed: u64) -> Option<CriterionReport> {
    Some(match number {
        1 => verification::metropolis_identity(),
        2 => verification::domination(seed),
        3 => verification::wpi_comparison(seed),
        4 => verification::exponential_gap(),
        5 => verification::stepping_out_ratio(seed),
        6 => verification::stepping_out_procedure(seed),
        7 => verification::wpi_pipeline(),
        8 => verification::hit_and_run(seed),
        9 => verification::quad_quartic_geometry(seed),
        10 => verification::negative_control(seed),
        _ => return None,
    })
}

pub fn run(cfg: &ExperimentConfig, only: &[u8]) -> CmdResult {
    let numbers: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    let mut out = Outcome::default();
    for n in numbers {
        let report = criterion(n, cfg.seed).ok_or_else(|| format!("no criterion {n} (valid: 1-10)"))?;
        println!("{report}");
        for d in &report.details {
            println!("    {d}");
        }
        if !report.passed {
            out.failures.push(format!("criterion {n}: {}", report.title));
        }
    }
    Ok(out)
}
