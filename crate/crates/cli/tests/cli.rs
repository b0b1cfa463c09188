//! End-to-end checks of the benchmark binary: output files, CSV round trip,
//! exit codes and the convergence report.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlfv"))
}

#[test]
fn run_writes_results_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "run",
            "--case",
            "uniform",
            "--scheme",
            "all",
            "--grids",
            "8,16",
            "--residual",
            "algebraic",
            "--audit",
            "--dump-matrix",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let csv = dir.path().join("results.csv");
    assert!(csv.exists());
    let text = std::fs::read_to_string(&csv).unwrap();
    // header + 3 schemes x 2 grids
    assert_eq!(text.lines().count(), 7);

    for scheme in ["nltpfa", "nlmpfa", "rnlmpfa"] {
        for n in [8, 16] {
            let tag = format!("uniform_{scheme}_{n}x{n}");
            assert!(dir.path().join(format!("residuals_{tag}.dat")).exists(), "{tag}");
            assert!(dir.path().join(format!("field_{tag}.dat")).exists());
            assert!(dir.path().join(format!("system_{tag}.mtx")).exists());
        }
    }

    // residual file has one line per iteration plus the header
    let res =
        std::fs::read_to_string(dir.path().join("residuals_uniform_rnlmpfa_8x8.dat")).unwrap();
    assert!(res.starts_with("# iteration residual"));
    assert!(res.lines().count() >= 2);

    // field file carries one x y value triple per cell
    let field = std::fs::read_to_string(dir.path().join("field_uniform_rnlmpfa_8x8.dat")).unwrap();
    assert_eq!(field.lines().count(), 1 + 64);

    // matrix dump parses as 1-based triplets within range
    let mtx = std::fs::read_to_string(dir.path().join("system_uniform_rnlmpfa_8x8.mtx")).unwrap();
    let mut lines = mtx.lines();
    assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
    let dims: Vec<usize> =
        lines.next().unwrap().split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert_eq!(dims[0], 64);
    assert_eq!(dims[1], 64);
    let mut count = 0;
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (r, c): (usize, usize) = (toks[0].parse().unwrap(), toks[1].parse().unwrap());
        let _: f64 = toks[2].parse().unwrap();
        assert!((1..=64).contains(&r) && (1..=64).contains(&c));
        count += 1;
    }
    assert_eq!(count, dims[2]);
}

#[test]
fn convergence_report_from_results() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["run", "--case", "convergence", "--scheme", "rnlmpfa", "--grids", "8,16,32", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());

    let out = bin()
        .args(["convergence", "--in"])
        .arg(dir.path().join("results.csv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("convergence rnlmpfa: orders"), "{text}");
    // two orders from three grids, both near 2
    let orders: Vec<f64> = text
        .split("orders")
        .nth(1)
        .unwrap()
        .trim()
        .split(',')
        .map(|t| t.trim().parse().unwrap())
        .collect();
    assert_eq!(orders.len(), 2);
    for o in orders {
        assert!(o > 1.5 && o < 2.5, "order {o}");
    }
}

#[test]
fn unknown_case_and_scheme_fail_with_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "--case", "not-a-case", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown case"));

    let out = bin()
        .args(["run", "--case", "uniform", "--scheme", "bogus", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown scheme"));
}

#[test]
fn nonconvergence_controls_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // one iteration cannot converge the nonlinear uniform case
    let out = bin()
        .args([
            "run", "--case", "uniform", "--scheme", "rnlmpfa", "--grids", "8", "--max-iter", "1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin()
        .args([
            "run",
            "--case",
            "uniform",
            "--scheme",
            "rnlmpfa",
            "--grids",
            "8",
            "--max-iter",
            "1",
            "--allow-nonconverged",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn transient_subcommand_writes_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "transient",
            "--case",
            "transient",
            "--scheme",
            "rnlmpfa",
            "--dt",
            "10000",
            "--t-end",
            "30000",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("transient,rnlmpfa,transient,24,32"));
}

#[test]
fn custom_case_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    // a catalog case serialized back to TOML with a tweaked tensor
    let toml_text = r#"
name = "custom"

[grid]
kind = "uniform"
domain = [0.0, 1.0, 0.0, 1.0]
nx = 6
ny = 6

[tensor]
kind = "uniform"
dxx = 100.0
dxy = 5.0
dyy = 1.0

[source]
kind = "zero"

[bc.left]
kind = "dirichlet"
[bc.left.value]
kind = "sin_sin"
[bc.right]
kind = "dirichlet"
[bc.right.value]
kind = "sin_sin"
[bc.bottom]
kind = "dirichlet"
[bc.bottom.value]
kind = "sin_sin"
[bc.top]
kind = "no_flux"

[picard]
epsilon = 1e-8
"#;
    let path = dir.path().join("custom.toml");
    std::fs::write(&path, toml_text).unwrap();
    let out = bin()
        .args(["run", "--case"])
        .arg(&path)
        .args(["--scheme", "nlmpfa", "--grids", "6", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("custom,nlmpfa,steady,6,6"));
}
