use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

/// Run identification written as the first line of every CSV.
#[derive(Debug, Clone)]
pub struct Stamp(String);

impl Stamp {
    pub fn new(cfg: &ExperimentConfig, grid_n: Option<usize>, x_max: Option<f64>) -> Self {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
        Stamp(format!(
            "# seed={} grid_n={} x_max={} version={}",
            cfg.seed,
            opt(grid_n.map(|n| n.to_string())),
            opt(x_max.map(num)),
            version()
        ))
    }
}

pub fn version() -> &'static str {
    option_env!("SLICELAB_GIT_DESCRIBE").unwrap_or(env!("CARGO_PKG_VERSION"))
}

/// Shortest round-trip decimal form; empty for `NaN`.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Human-readable form for terminal output.
pub fn show(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v:.9}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.6e}")
    }
}

pub fn write_csv(dir: &Path, name: &str, stamp: &Stamp, header: &str, rows: &[String]) -> Result<PathBuf, String> {
    fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    let mut text = String::with_capacity(64 * (rows.len() + 2));
    text.push_str(&stamp.0);
    text.push('\n');
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(show(1.0 / 9.0), "0.111111111");
        assert_eq!(show(2.0f64.powi(-35)), "2.910383e-11");
        assert_eq!(show(2.0), "2");
        assert_eq!(num(f64::NAN), "");
        assert_eq!(num(0.25), "0.25");
    }
}
