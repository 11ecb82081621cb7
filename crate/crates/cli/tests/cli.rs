use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn slicelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicelab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV written by the runner, split into fields.
fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# seed="));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

fn value_of(out: &str, name: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(name)).unwrap_or_else(|| panic!("no `{name}` in\n{out}"));
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn bounds_examples() {
    let o = slicelab(&["bounds", "gamma-exp", "1", "2"]);
    assert!(o.status.success());
    assert!((value_of(&stdout(&o), "gamma_exp") - 1.0 / 9.0).abs() < 1e-9);

    let o = slicelab(&["bounds", "har-gap", "2", "1"]);
    let v = value_of(&stdout(&o), "har_gap");
    assert!((v / 2.9104e-11 - 1.0).abs() < 1e-4, "{v}");

    let o = slicelab(&["bounds", "qq", "4", "1"]);
    let out = stdout(&o);
    assert_eq!(value_of(&out, "b1"), 5.497558e11);
    assert!((value_of(&out, "simplified") / 5.43e12 - 1.0).abs() < 1e-3);
    assert!(out.contains("[1]") && out.contains("[2]"));

    let o = slicelab(&["bounds", "diag-kappa", "1,4"]);
    assert_eq!(value_of(&stdout(&o), "kappa_bar"), 2.0);

    let o = slicelab(&["bounds", "rho", "2", "1", "1"]);
    assert_eq!(value_of(&stdout(&o), "rho"), 0.25);
}

#[test]
fn bounds_reject_bad_parameters() {
    let o = slicelab(&["bounds", "har-gap", "2", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn wpi_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = slicelab(&["--out", out, "wpi", "--beta", "im_exp(2)", "--s", "1", "--n", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let beta = rows(&dir.path().join("beta.csv"));
    assert_eq!(beta.len(), 1);
    assert!((beta[0][1].parse::<f64>().unwrap() - 1.0 / 72.0).abs() < 1e-15);

    let o = slicelab(&["--out", out, "wpi", "--beta", "power(0.25,1)", "--n", "1,10,100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for r in rows(&dir.path().join("alpha.csv")) {
        let n: f64 = r[0].parse().unwrap();
        let alpha: f64 = r[1].parse().unwrap();
        assert!((alpha - 1.0 / (n + 1.0)).abs() < 1e-6, "{r:?}");
        assert!((r[2].parse::<f64>().unwrap() - 1.0 / n).abs() < 1e-12);
    }

    let o = slicelab(&["--out", out, "wpi", "--beta", "gap(0.75)", "--s", "0.5,1.3,1.3334,2", "--n", "1,5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let beta: Vec<f64> = rows(&dir.path().join("beta.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(beta, vec![0.25, 0.25, 0.0, 0.0]);
    assert!(rows(&dir.path().join("alpha.csv")).iter().all(|r| r[2].is_empty()));

    let o = slicelab(&["--out", out, "wpi", "--beta", "cauchy(1)"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_exponential_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["--out", out, "compare", "--target", "exp(1,0.5)", "--kernels", "ideal,hybrid:im", "--grid-n", "200", "--seed", "7"];
    let o = slicelab(&args);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    let spectrum = rows(&dir.path().join("spectrum.csv"));
    let gap_u: f64 = spectrum.iter().find(|r| r[0] == "ideal" && r[1] == "200").unwrap()[2].parse().unwrap();
    assert!(gap_u >= 0.73, "{gap_u}");
    assert_eq!(rows(&dir.path().join("forms.csv")).len(), 50);
    assert_eq!(rows(&dir.path().join("wpi_check.csv")).len(), 50 * 30);
    let stamp = fs::read_to_string(dir.path().join("forms.csv")).unwrap();
    assert!(stamp.starts_with("# seed=7 grid_n=200 x_max=40 version="));
}

#[test]
fn compare_bimodal_reports_rho() {
    let dir = tempfile::tempdir().unwrap();
    let o = slicelab(&[
        "--out",
        dir.path().to_str().unwrap(),
        "compare",
        "--target",
        "bimodal1d",
        "--kernels",
        "ideal,hybrid:stepout(h=auto2x)",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("rho = 0.17"));
}

#[test]
fn compare_names_the_failing_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = slicelab(&["--out", dir.path().to_str().unwrap(), "compare", "--target", "exp(1,2)", "--kernels", "ideal,hybrid:im"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("check failed: wpi[hybrid:im]"), "{}", stderr(&o));
}

#[test]
fn compare_is_deterministic_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let o = slicelab(&[
            "--out",
            dir.path().to_str().unwrap(),
            "--workers",
            workers,
            "compare",
            "--target",
            "bimodal1d",
            "--kernels",
            "ideal,hybrid:stepout(h=auto2x)",
            "--grid-n",
            "80",
            "--seed",
            "5",
        ]);
        assert!(o.status.success());
    }
    for f in ["forms.csv", "spectrum.csv", "wpi_check.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn compare_falls_back_to_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let o = slicelab(&[
        "--out",
        dir.path().to_str().unwrap(),
        "compare",
        "--target",
        "student(2,3)",
        "--kernels",
        "ideal,hybrid:har",
        "--samples",
        "20000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let forms = rows(&dir.path().join("forms.csv"));
    assert_eq!(forms.len(), 7);
    assert!(forms.iter().all(|r| r[5].parse::<f64>().unwrap() > 0.0));
    assert!(rows(&dir.path().join("spectrum.csv")).is_empty());
}

#[test]
fn sample_shape_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "4")] {
        let o = slicelab(&[
            "--out",
            dir.path().to_str().unwrap(),
            "--workers",
            workers,
            "sample",
            "--target",
            "student(2,3)",
            "--kernel",
            "hybrid:har",
            "--steps",
            "1000",
            "--chains",
            "4",
            "--seed",
            "1",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let samples = rows(&a.path().join("samples.csv"));
    assert_eq!(samples.len(), 4000);
    assert!(samples.iter().all(|r| r.len() == 4 && r[2..].iter().all(|v| v.parse::<f64>().unwrap().is_finite())));
    assert_eq!(fs::read(a.path().join("samples.csv")).unwrap(), fs::read(b.path().join("samples.csv")).unwrap());
}

#[test]
fn sample_burn_in_and_thinning() {
    let dir = tempfile::tempdir().unwrap();
    let o = slicelab(&[
        "--out",
        dir.path().to_str().unwrap(),
        "sample",
        "--target",
        "bimodal1d",
        "--kernel",
        "hybrid:stepout(h=auto1x)",
        "--steps",
        "100",
        "--burn-in",
        "10",
        "--thin",
        "5",
        "--chains",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let samples = rows(&dir.path().join("samples.csv"));
    assert_eq!(samples.len(), 40);
    let steps: Vec<&str> = samples.iter().take(3).map(|r| r[1].as_str()).collect();
    assert_eq!(steps, vec!["11", "16", "21"]);
}

#[test]
fn ideal_sampler_mean_on_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let o = slicelab(&[
        "--out",
        dir.path().to_str().unwrap(),
        "sample",
        "--target",
        "exp(1,0.5)",
        "--kernel",
        "ideal",
        "--steps",
        "100000",
        "--chains",
        "1",
        "--seed",
        "3",
    ]);
    assert!(o.status.success());
    let xs: Vec<f64> = rows(&dir.path().join("samples.csv")).iter().map(|r| r[2].parse().unwrap()).collect();
    // Batch means over 100 batches absorb the autocorrelation.
    let batch = xs.len() / 100;
    let means: Vec<f64> = xs.chunks(batch).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let sd = (means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64).sqrt();
    assert!((m - 1.0).abs() < 4.0 * sd / (means.len() as f64).sqrt(), "{m} ± {sd}");
}

#[test]
fn sample_rejects_incompatible_kernel() {
    let o = slicelab(&["sample", "--target", "quadquartic(4,I=1,2)", "--kernel", "ideal"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no exact slice sampler"), "{}", stderr(&o));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "[target]\nspec = exp(1,2)\n\n[kernel]\nspec = ideal\n\n[run]\nchains = 2\nsteps = 50\nseed = 9\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = slicelab(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "sample", "--steps", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(text.starts_with("# seed=9 "));
    assert_eq!(rows(&out.join("samples.csv")).len(), 40);

    fs::write(&cfg, "[run]\nsteps = many\n").unwrap();
    let o = slicelab(&["--config", cfg.to_str().unwrap(), "sample"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));
}

#[test]
fn spectrum_writes_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let o = slicelab(&[
        "--out",
        dir.path().to_str().unwrap(),
        "spectrum",
        "--target",
        "exp(1,2)",
        "--kernels",
        "ideal,lazy:ideal",
        "--grid-n",
        "100",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let ev = rows(&dir.path().join("eigenvalues.csv"));
    assert_eq!(ev.len(), 200);
    let lazy_min = ev.iter().filter(|r| r[0] == "lazy:ideal").map(|r| r[2].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    assert!(lazy_min >= -1e-10);
    assert!((ev[0][2].parse::<f64>().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn verify_runs_selected_criteria() {
    let o = slicelab(&["verify", "--only", "7"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("[PASS] criterion  7"));
    let o = slicelab(&["verify", "--only", "11"]);
    assert_eq!(o.status.code(), Some(2));
}
