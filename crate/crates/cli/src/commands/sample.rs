use rayon::prelude::*;
use slicelab::kernels::ChainState;
use slicelab::rng;

use super::{parse_kernel, prepare, CmdResult, Outcome};
use crate::config::ExperimentConfig;
use crate::output::{num, show, write_csv, Stamp};

pub fn run(cfg: &ExperimentConfig) -> CmdResult {
    let target = cfg.target()?;
    let spec = match cfg.kernels.as_slice() {
        [one] => one,
        [] => return Err("no kernel given (use --kernel)".into()),
        _ => return Err("sample takes exactly one kernel".into()),
    };
    let kernel = parse_kernel(spec)?;
    let adapted = prepare(&kernel, &target)?;
    if cfg.thin == 0 || cfg.chains == 0 {
        return Err("chains and thin must be positive".into());
    }
    let d = target.dim();
    let chains: Vec<Result<Vec<Vec<f64>>, String>> = (0..cfg.chains as u64)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(cfg.seed, c);
            let start = adapted.sample_exact(&mut r);
            let mut state = ChainState { position: start, rng: r, step: 0 };
            let mut kept = Vec::with_capacity(cfg.steps / cfg.thin + 1);
            for i in 0..cfg.burn_in + cfg.steps {
                let x = state.advance(&kernel, &adapted).map_err(|e| format!("chain {c}, step {i}: {e}"))?;
                if i >= cfg.burn_in && (i - cfg.burn_in) % cfg.thin == 0 {
                    kept.push(x.to_vec());
                }
            }
            Ok(kept)
        })
        .collect();
    let chains: Vec<Vec<Vec<f64>>> = chains.into_iter().collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(chains.iter().map(Vec::len).sum());
    for (c, xs) in chains.iter().enumerate() {
        for (k, x) in xs.iter().enumerate() {
            let step = cfg.burn_in + 1 + k * cfg.thin;
            let coords: Vec<String> = x.iter().map(|v| num(*v)).collect();
            rows.push(format!("{c},{step},{}", coords.join(",")));
        }
    }
    let header = std::iter::once("chain,step".to_string()).chain((0..d).map(|i| format!("x{i}"))).collect::<Vec<_>>().join(",");
    let path = write_csv(&cfg.out, "samples.csv", &Stamp::new(cfg, None, None), &header, &rows)?;
    println!("{} rows ({} chains) of {kernel} on {target} -> {}", rows.len(), cfg.chains, path.display());

    for i in 0..d {
        let means: Vec<f64> =
            chains.iter().filter(|xs| !xs.is_empty()).map(|xs| xs.iter().map(|x| x[i]).sum::<f64>() / xs.len() as f64).collect();
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let se = if means.len() > 1 {
            (means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        } else {
            f64::NAN
        };
        println!("x{i}: mean {} (between-chain s.e. {})", show(mean), show(se));
    }
    Ok(Outcome::default())
}
