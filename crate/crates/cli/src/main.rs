//! `hypstab` command-line runner.
//!
//! Configuration comes from built-in defaults, then `--config FILE`, then
//! individual flags. Exit status is 0 on success, 1 for configuration
//! errors and 2 for numerical failures (singular closure, divergence).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use hypstab::config::{apply_config, ExperimentConfig};
use hypstab::harness::{self, CaseResult};
use hypstab::lyapunov::{decay_rates, verify_continuous_k_conditions, verify_k_conditions};
use hypstab::scheme::{build_discretization, diffusion_coefficients};
use hypstab::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "hypstab",
    version,
    about = "Boundary feedback stabilization experiments for 2x2 hyperbolic systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (mu, J) case and write its Lyapunov series.
    Simulate,
    /// Grid refinement study over the J list.
    Converge,
    /// Reproduce one of the four reference tables.
    Table {
        #[arg(value_parser = clap::value_parser!(u32).range(1..=4))]
        id: u32,
    },
    /// One run per mu value, written as a long-format CSV.
    Sweep,
    /// Check the feedback matrix conditions.
    CheckK,
    /// Print alpha*mu, eta_T and eta_N.
    Rates,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<String>,
    /// Interior cell counts, comma separated.
    #[arg(long = "J", global = true)]
    cells: Option<String>,
    #[arg(long, global = true)]
    cfl: Option<String>,
    /// Lyapunov weight parameters, comma separated.
    #[arg(long, global = true)]
    mu: Option<String>,
    #[arg(long = "T", global = true)]
    t_final: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    /// plain | viscous
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// constant | perturbed | model-default
    #[arg(long, global = true)]
    initial: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    snapshot_every: Option<String>,
    /// Feedback matrix "k11,k12,k21,k22"; defaults to diag(e^{-mu/2}).
    #[arg(long, global = true)]
    k: Option<String>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Config {
                location: "flag --config".into(),
                text: path.display().to_string(),
                reason: e.to_string(),
            })?;
            apply_config(&mut cfg, &text)?;
        }
        let flags = [
            ("model", "model", &self.model),
            ("J", "J", &self.cells),
            ("cfl", "cfl", &self.cfl),
            ("mu", "mu", &self.mu),
            ("T", "T", &self.t_final),
            ("tol", "tol", &self.tol),
            ("scheme", "scheme", &self.scheme),
            ("initial", "initial", &self.initial),
            ("out", "out", &self.out),
            ("snapshot-every", "snapshot_every", &self.snapshot_every),
            ("k", "K", &self.k),
        ];
        for (flag, key, value) in flags {
            if let Some(value) = value {
                cfg.set(key, value).map_err(|reason| Error::Config {
                    location: format!("flag --{flag}"),
                    text: value.clone(),
                    reason,
                })?;
            }
        }
        cfg.resolved_model()?;
        Ok(cfg)
    }
}

/// `manifest.txt`: the resolved config, followed by `#`-prefixed run
/// information, so the file itself parses back as a config.
fn write_manifest(
    cfg: &ExperimentConfig,
    files: &[PathBuf],
    results: &[CaseResult],
    started: Instant,
) -> Result<PathBuf> {
    let path = cfg.out.join("manifest.txt");
    let mut text = cfg.to_config_text();
    for f in files {
        text.push_str(&format!("# file: {}\n", f.display()));
    }
    for r in results {
        text.push_str(&format!(
            "# case {}: alpha_mu = {:.12e}, eta_T = {:.12e}, eta_N = {:.12e}, mu_feasible = {}\n",
            r.case.key(),
            r.rates.alpha_mu,
            r.rates.eta_t,
            r.rates.eta_n,
            r.rates.mu_feasible
        ));
    }
    text.push_str(&format!(
        "# wall_clock_seconds: {:.3}\n",
        started.elapsed().as_secs_f64()
    ));
    fs::write(&path, text)?;
    Ok(path)
}

fn finish(
    cfg: &ExperimentConfig,
    files: Vec<PathBuf>,
    results: &[CaseResult],
    started: Instant,
) -> Result<()> {
    let manifest = write_manifest(cfg, &files, results, started)?;
    for f in files.iter().chain([&manifest]) {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.out)?;
    Ok(&cfg.out)
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let mut cfg = cli.common.resolve()?;
    match cli.command {
        Command::Simulate => {
            let results = harness::mu_sweep(&cfg)?;
            let dir = out_dir(&cfg)?;
            let mut files = Vec::new();
            for r in &results {
                print!("{}", harness::case_summary(r));
                files.extend(harness::write_case(r, dir)?);
            }
            finish(&cfg, files, &results, started)
        }
        Command::Converge => {
            let report = harness::convergence_study(&cfg, "Convergence study")?;
            print!("{report}");
            let files = harness::write_report(&report, out_dir(&cfg)?, "convergence")?;
            finish(&cfg, files, &report.results, started)
        }
        Command::Table { id } => {
            let (table_cfg, _) = harness::table_config(id)?;
            let out = cfg.out.clone();
            cfg = ExperimentConfig { out, ..table_cfg };
            let report = harness::reproduce_table(id)?;
            print!("{report}");
            let files = harness::write_report(&report, out_dir(&cfg)?, &format!("table{id}"))?;
            finish(&cfg, files, &report.results, started)
        }
        Command::Sweep => {
            let results = harness::mu_sweep(&cfg)?;
            let dir = out_dir(&cfg)?;
            let path = dir.join("sweep.csv");
            fs::write(&path, harness::sweep_csv(&results))?;
            for r in &results {
                print!("{}", harness::case_summary(r));
            }
            finish(&cfg, vec![path], &results, started)
        }
        Command::CheckK => {
            let system = cfg.resolved_model()?.system()?;
            for &mu in &cfg.mu {
                for &cells in &cfg.cells {
                    let d = build_discretization(&system, cells, cfg.cfl, mu)?;
                    let v = diffusion_coefficients(&system, &d);
                    let k = cfg.feedback_for(mu);
                    println!(
                        "{} J = {cells}, cfl = {}, mu = {mu}, K = {:?}",
                        cfg.model, cfg.cfl, k.k
                    );
                    print!("{}", verify_k_conditions(&k, &system, &d, &v));
                    print!(
                        "{}",
                        verify_continuous_k_conditions(&k, &system, v.eps_max, mu)
                    );
                }
            }
            Ok(())
        }
        Command::Rates => {
            let system = cfg.resolved_model()?.system()?;
            for &mu in &cfg.mu {
                for &cells in &cfg.cells {
                    let d = build_discretization(&system, cells, cfg.cfl, mu)?;
                    let r = decay_rates(&system, &d, &diffusion_coefficients(&system, &d));
                    println!(
                        "{} J = {cells}, cfl = {}, mu = {mu}: alpha = {}, eps = {:.6e}, alpha*mu = {:.4}, eta_T = {:.4}, eta_N = {:.4}, mu feasible = {}",
                        cfg.model, cfg.cfl, r.alpha, r.eps, r.alpha_mu, r.eta_t, r.eta_n, r.mu_feasible
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
