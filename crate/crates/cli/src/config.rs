//! Experiment configuration: defaults, the `key = value` file format and
//! command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use slicelab::target::Family;
use slicelab::Target;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub target: Option<String>,
    pub kernels: Vec<String>,
    pub beta: Option<String>,
    pub seed: u64,
    pub chains: usize,
    pub steps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub samples: usize,
    pub grid_n: usize,
    pub x_max: Option<f64>,
    pub s_grid: String,
    pub n_grid: String,
    pub out: PathBuf,
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            target: None,
            kernels: Vec::new(),
            beta: None,
            seed: 1,
            chains: 4,
            steps: 10_000,
            burn_in: 0,
            thin: 1,
            samples: 100_000,
            grid_n: 200,
            x_max: None,
            s_grid: "log(1e-2,1e3,30)".into(),
            n_grid: "1,2,5,10,20,50,100,200,500,1000".into(),
            out: PathBuf::from("."),
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Reads `[target]`, `[kernel]` and `[run]` sections of `key = value`
    /// lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| format!("line {}: {msg}", no + 1);
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !matches!(name, "target" | "kernel" | "run") {
                    return Err(at(format!("unknown section [{name}]")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| at(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            cfg.set(&section, key, value).map_err(at)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        match (section, key) {
            ("target", "spec") => self.target = Some(value.to_string()),
            ("kernel", "spec" | "specs") => self.kernels = split_top_level(value),
            ("run", "seed") => self.seed = parse(key, value)?,
            ("run", "chains") => self.chains = parse(key, value)?,
            ("run", "steps") => self.steps = parse(key, value)?,
            ("run", "burn_in") => self.burn_in = parse(key, value)?,
            ("run", "thin") => self.thin = parse(key, value)?,
            ("run", "samples") => self.samples = parse(key, value)?,
            ("run", "grid_n") => self.grid_n = parse(key, value)?,
            ("run", "x_max") => self.x_max = Some(parse(key, value)?),
            ("run", "s_grid") => self.s_grid = value.to_string(),
            ("run", "n_grid") => self.n_grid = value.to_string(),
            ("run", "beta") => self.beta = Some(value.to_string()),
            ("run", "out") => self.out = PathBuf::from(value),
            ("run", "workers") => self.workers = Some(parse(key, value)?),
            ("", _) => return Err(format!("`{key}` appears before any section")),
            _ => return Err(format!("unknown key `{key}` in [{section}]")),
        }
        Ok(())
    }

    pub fn target(&self) -> Result<Target, String> {
        let spec = self.target.as_deref().ok_or("no target given (use --target or [target] spec)")?;
        spec.parse().map_err(|e| format!("target `{spec}`: {e}"))
    }

    pub fn s_values(&self) -> Result<Vec<f64>, String> {
        parse_grid(&self.s_grid)
    }

    pub fn n_values(&self) -> Result<Vec<f64>, String> {
        parse_grid(&self.n_grid)
    }

    pub fn x_max_for(&self, target: &Target) -> f64 {
        self.x_max.unwrap_or_else(|| default_x_max(target))
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("bad value `{value}` for `{key}`"))
}

/// Splits on commas outside parentheses.
pub fn split_top_level(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(c);
    }
    if !current.trim().is_empty() {
        parts.push(current.trim().to_string());
    }
    parts
}

/// A comma list, `a..b` for the integers in between, or `log(lo,hi,k)` for
/// `k` log-spaced points.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    let bad = || format!("bad grid `{spec}`");
    if let Some(body) = spec.strip_prefix("log(").and_then(|s| s.strip_suffix(')')) {
        let v: Vec<f64> = body.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        if v.len() != 3 || !(v[0] > 0.0 && v[1] > v[0]) || v[2] < 2.0 || v[2].fract() != 0.0 {
            return Err(bad());
        }
        let k = v[2] as usize;
        let (a, b) = (v[0].log10(), v[1].log10());
        return Ok((0..k).map(|i| 10f64.powf(a + (b - a) * i as f64 / (k - 1) as f64)).collect());
    }
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        return Ok((a..=b).map(|n| n as f64).collect());
    }
    let v: Vec<f64> = spec.split(',').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if v.is_empty() || v.iter().any(|x| !(*x > 0.0)) {
        return Err(bad());
    }
    Ok(v)
}

/// A truncation point leaving well under `1e-6` of `π` outside the grid.
pub fn default_x_max(target: &Target) -> f64 {
    match target.family() {
        Family::Exp { alpha, .. } => 40.0 / alpha,
        Family::Bimodal => 8.0,
        Family::StudentT { dof, .. } => 2.0 * 1e8f64.powf(1.0 / dof),
        Family::DiagQuadratic { coeffs } => 12.0 / coeffs[0].sqrt(),
        Family::QuadQuartic { .. } => 6.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let cfg = ExperimentConfig::parse(
            "# demo\n[target]\nspec = exp(1,0.5)\n[kernel]\nspecs = ideal, hybrid:stepout(h=auto2x)\n[run]\nseed = 7\ngrid_n = 100 # small\n",
        )
        .unwrap();
        assert_eq!(cfg.target.as_deref(), Some("exp(1,0.5)"));
        assert_eq!(cfg.kernels, vec!["ideal", "hybrid:stepout(h=auto2x)"]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.grid_n, 100);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentConfig::parse("[run]\ncolour = red\n").unwrap_err().contains("line 2"));
        assert!(ExperimentConfig::parse("seed = 1\n").is_err());
        assert!(ExperimentConfig::parse("[plot]\n").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,10,100").unwrap(), vec![1.0, 10.0, 100.0]);
        assert_eq!(parse_grid("3..5").unwrap(), vec![3.0, 4.0, 5.0]);
        let g = parse_grid("log(1e-2,1e3,30)").unwrap();
        assert_eq!(g.len(), 30);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[29] - 1000.0).abs() < 1e-9);
        assert!(parse_grid("log(1,0.5,3)").is_err());
        assert!(parse_grid("0,1").is_err());
    }

    #[test]
    fn splits_outside_parentheses() {
        assert_eq!(split_top_level("exp(1,2), ideal"), vec!["exp(1,2)", "ideal"]);
    }
}
