use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hypstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypstab"))
        .args(args)
        .env("HYPSTAB_THREADS", "2")
        .output()
        .expect("failed to launch hypstab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn rates_prints_table_two_row() {
    let o = hypstab(&[
        "rates", "--model", "wave", "--J", "100", "--cfl", "0.5", "--mu", "0.5",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("alpha*mu = 0.5000"), "{s}");
    assert!(s.contains("eta_T = 0.4994"), "{s}");
    assert!(s.contains("eta_N = 0.4969"), "{s}");
}

#[test]
fn check_k_passes_for_euler() {
    let o = hypstab(&[
        "check-k", "--mu", "0.5", "--model", "euler", "--J", "200", "--cfl", "0.5",
    ]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(s.matches("PASS").count(), 5, "{s}");
    assert!(!s.contains("FAIL"));
}

#[test]
fn check_k_reports_bad_matrix() {
    let o = hypstab(&["check-k", "--k", "0.8,0,0,0.8", "--mu", "0.5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("value      residual") && stdout(&o).contains("FAIL"));
}

#[test]
fn config_errors_exit_one() {
    for args in [
        vec!["rates", "--cfl", "1.5"],
        vec!["rates", "--model", "burgers"],
        vec!["rates", "--J", "abc"],
        vec!["frobnicate"],
        vec!["table", "7"],
        vec!["check-k", "--k", "1,2,3"],
    ] {
        let o = hypstab(&args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = hypstab(&["rates", "--cfl", "1.5"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL condition"));
}

#[test]
fn missing_config_file_exits_one() {
    let o = hypstab(&["rates", "--config", "/nonexistent/hypstab.conf"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = hypstab(&[
        "simulate", "--J", "10", "--T", "1", "--k", "1,1,1,1", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));

    let o = hypstab(&[
        "simulate", "--J", "10", "--cfl", "1", "--T", "1000", "--k", "3,0,0,3", "--out", out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}

#[test]
fn simulate_writes_series_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "model = euler\nJ = 20\nT = 1\nmu = 0.5, 1.25\n").unwrap();
    let o = hypstab(&[
        "simulate",
        "--config",
        conf.to_str().unwrap(),
        "--cfl",
        "0.8",
        "--snapshot-every",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("cfl = 0.8"));
    for line in manifest.lines().filter_map(|l| l.strip_prefix("# file: ")) {
        assert!(Path::new(line).exists(), "{line}");
    }
    let series = out.join("series_euler_J20_cfl0.8_mu0.5_model-default_viscous.csv");
    let text = fs::read_to_string(&series).unwrap();
    assert!(text.starts_with("t,L,L_up_alpha_mu,L_up_eta_T,L_up_eta_N\n"));
    assert!(out
        .join("snapshots_euler_J20_cfl0.8_mu1.25_model-default_viscous.csv")
        .exists());

    // the manifest is itself a config that reproduces the run
    let o = hypstab(&[
        "simulate",
        "--config",
        out.join("manifest.txt").to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&series).unwrap(), text);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hypstab(&[
            "sweep",
            "--J",
            "40",
            "--T",
            "2",
            "--mu",
            "0.25,0.5,4.5",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(out.join("sweep.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("model,J,mu,n,t,L\n"));
}

#[test]
fn converge_writes_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let o = hypstab(&[
        "converge",
        "--J",
        "25,50,100",
        "--cfl",
        "0.95",
        "--T",
        "2",
        "--initial",
        "constant",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = out.join("convergence.csv");
    assert_eq!(csv_rows(&csv), 3);
    assert!(out.join("report.txt").exists());
    let o = hypstab(&["converge", "--J", "25,50,75"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn table_one_has_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = hypstab(&["table", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = dir.path().join("table1.csv");
    assert_eq!(csv_rows(&csv), 5);
    let text = fs::read_to_string(csv).unwrap();
    let row: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
    assert_eq!(row[0], "400");
    assert_eq!(
        format!("{:.4e}", row[2].parse::<f64>().unwrap()),
        "7.2780e-4"
    );
    assert!(stdout(&o).contains("2.0257"));
}
