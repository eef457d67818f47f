//! Grid-refinement studies, μ sweeps and the four reference tables.
//!
//! Every run compares `𝓛ⁿ` with the three exponential envelopes
//! `e^{-rate·tⁿ}𝓛⁰` for `rate ∈ {αμ, η_T, η_N}`. Difference norms are taken
//! against the `η_N` envelope. Refinement rates compare runs at `J`, `2J`
//! and `4J` on the coarse time grid by index (`n ↔ 2n ↔ 4n`).
//!
//! Independent cases run on a rayon pool whose size can be capped with the
//! `HYPSTAB_THREADS` environment variable. Results always come back in case
//! order, so outputs do not depend on scheduling.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::lyapunov::{decay_rates, DecayRates, LyapunovSeries, LyapunovSum, SeriesMeta};
use crate::model::{initial_data, InitialData, Model, ModelKind, SystemSpec};
use crate::scheme::{
    build_discretization, diffusion_coefficients, Discretization, FeedbackMatrix, Scheme,
    ViscosityCoeffs,
};
use crate::simulate::{simulate, RunRecord, SimulationConfig};

pub const THREADS_ENV: &str = "HYPSTAB_THREADS";

/// Relative tolerance on time stamps that must coincide across grids.
const ALIGN_TOL: f64 = 1e-9;

/// Quadrature weight of the discrete L² norm over time levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum TimeNorm {
    /// `√(Δx Σₙ dₙ²)`, the weighting the reference tables were printed with.
    #[default]
    Dx,
    /// `√(Δt Σₙ dₙ²)`.
    Dt,
}

impl TimeNorm {
    pub fn label(self) -> &'static str {
        match self {
            TimeNorm::Dx => "dx",
            TimeNorm::Dt => "dt",
        }
    }

    fn weight(self, meta: &SeriesMeta) -> f64 {
        match self {
            TimeNorm::Dx => meta.dx,
            TimeNorm::Dt => meta.dt,
        }
    }
}

impl fmt::Display for TimeNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TimeNorm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dx" => Ok(TimeNorm::Dx),
            "dt" => Ok(TimeNorm::Dt),
            other => Err(format!("unknown time norm '{other}' (expected dx | dt)")),
        }
    }
}

/// One fully specified run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub model: Model,
    pub cells: usize,
    pub cfl: f64,
    pub mu: f64,
    pub t_final: f64,
    pub tol: f64,
    pub initial: InitialData,
    pub scheme: Scheme,
    pub center: bool,
    pub sum: LyapunovSum,
    pub snapshot_every: usize,
    /// `diag(e^{-μ/2})` when unset.
    pub feedback: Option<FeedbackMatrix>,
}

impl CaseSpec {
    /// Defaults of the reference experiments for `model`.
    pub fn new(model: ModelKind, cells: usize, cfl: f64, mu: f64, t_final: f64) -> Self {
        Self {
            model: Model::new(model),
            cells,
            cfl,
            mu,
            t_final,
            tol: 1e-7,
            initial: InitialData::ModelDefault,
            scheme: Scheme::Viscous,
            center: false,
            sum: LyapunovSum::WithGhosts,
            snapshot_every: 0,
            feedback: None,
        }
    }

    pub fn with_initial(mut self, initial: InitialData) -> Self {
        self.initial = initial;
        self
    }

    /// File-name friendly identifier, e.g. `wave_J200_cfl0.5_mu0.5_constant_viscous`.
    pub fn key(&self) -> String {
        format!(
            "{}_J{}_cfl{}_mu{}_{}_{}",
            self.model.kind, self.cells, self.cfl, self.mu, self.initial, self.scheme
        )
    }
}

/// The three envelopes `e^{-rate·tⁿ}𝓛⁰` on the run's time stamps.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBounds {
    pub alpha_mu: Vec<f64>,
    pub eta_t: Vec<f64>,
    pub eta_n: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub case: CaseSpec,
    pub system: SystemSpec,
    pub grid: Discretization,
    pub viscosity: ViscosityCoeffs,
    pub rates: DecayRates,
    pub record: RunRecord,
    pub series: LyapunovSeries,
    pub bounds: UpperBounds,
}

pub fn run_case(case: &CaseSpec) -> Result<CaseResult> {
    let system = case.model.system()?;
    let grid = build_discretization(&system, case.cells, case.cfl, case.mu)?;
    let viscosity = diffusion_coefficients(&system, &grid);
    let rates = decay_rates(&system, &grid, &viscosity);
    let u0 = initial_data(case.model.kind, case.initial, &grid, case.center);
    let sim = SimulationConfig {
        scheme: case.scheme,
        t_final: case.t_final,
        tol: case.tol,
        stop_on: case.sum,
        snapshot_every: case.snapshot_every,
    };
    let k = case
        .feedback
        .unwrap_or_else(|| FeedbackMatrix::for_mu(case.mu));
    let record = simulate(&u0, &system, &grid, &k, &sim)?;
    let series = LyapunovSeries {
        times: record.times.clone(),
        values: record.lyapunov(case.sum).to_vec(),
        meta: SeriesMeta {
            cells: case.cells,
            cfl: case.cfl,
            mu: case.mu,
            dx: grid.dx,
            dt: grid.dt,
            model: case.model.kind,
        },
    };
    let bounds = UpperBounds {
        alpha_mu: series.upper_bound(rates.alpha_mu),
        eta_t: series.upper_bound(rates.eta_t),
        eta_n: series.upper_bound(rates.eta_n),
    };
    Ok(CaseResult {
        case: *case,
        system,
        grid,
        viscosity,
        rates,
        record,
        series,
        bounds,
    })
}

fn pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw.trim().parse().map_err(|_| Error::Config {
            location: format!("environment {THREADS_ENV}"),
            text: raw.clone(),
            reason: "expected a positive thread count".into(),
        })?;
        builder = builder.num_threads(n.max(1));
    }
    builder
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// Runs independent cases concurrently; results are in input order.
pub fn run_cases(cases: &[CaseSpec]) -> Result<Vec<CaseResult>> {
    pool()?.install(|| cases.par_iter().map(run_case).collect())
}

/// All `(μ, J)` combinations of a config, μ-major.
pub fn cases_from_config(cfg: &ExperimentConfig) -> Result<Vec<CaseSpec>> {
    let model = cfg.resolved_model()?;
    Ok(cfg
        .mu
        .iter()
        .flat_map(|&mu| {
            cfg.cells.iter().map(move |&cells| CaseSpec {
                model,
                cells,
                cfl: cfg.cfl,
                mu,
                t_final: cfg.t_final,
                tol: cfg.tol,
                initial: cfg.initial,
                scheme: cfg.scheme,
                center: cfg.center,
                sum: cfg.lyapunov_sum,
                snapshot_every: cfg.snapshot_every,
                feedback: cfg.feedback.map(|_| cfg.feedback_for(mu)),
            })
        })
        .collect())
}

/// `(sup_n |bound_n - 𝓛ⁿ|, √(w Σₙ |bound_n - 𝓛ⁿ|²))`.
pub fn diff_norms(series: &LyapunovSeries, bound: &[f64], norm: TimeNorm) -> Result<(f64, f64)> {
    if series.len() != bound.len() {
        return Err(Error::LengthMismatch {
            left: series.len(),
            right: bound.len(),
        });
    }
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    for (l, b) in series.values.iter().zip(bound) {
        let d = (b - l).abs();
        sup = sup.max(d);
        sq += d * d;
    }
    Ok((sup, (norm.weight(&series.meta) * sq).sqrt()))
}

fn times_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= ALIGN_TOL * a.abs().max(b.abs()).max(1.0)
}

/// `‖𝓛_J - 𝓛_{2J}‖ / ‖𝓛_{2J} - 𝓛_{4J}‖` on the coarse time grid, or `None`
/// when the denominator vanishes.
pub fn refinement_rate(
    coarse: &LyapunovSeries,
    mid: &LyapunovSeries,
    fine: &LyapunovSeries,
    norm: TimeNorm,
) -> Result<Option<f64>> {
    let cells = [coarse.meta.cells, mid.meta.cells, fine.meta.cells];
    if cells[1] != 2 * cells[0] || cells[2] != 2 * cells[1] {
        return Err(Error::NonDyadic(cells.to_vec()));
    }
    let n = coarse
        .len()
        .min(mid.len().div_ceil(2))
        .min(fine.len().div_ceil(4));
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let (tc, tm, tf) = (coarse.times[i], mid.times[2 * i], fine.times[4 * i]);
        if !times_match(tc, tm) {
            return Err(Error::MisalignedTimes {
                coarse: tc,
                fine: tm,
            });
        }
        if !times_match(tc, tf) {
            return Err(Error::MisalignedTimes {
                coarse: tc,
                fine: tf,
            });
        }
        let a = coarse.values[i] - mid.values[2 * i];
        let b = mid.values[2 * i] - fine.values[4 * i];
        num += a * a;
        den += b * b;
    }
    let w = norm.weight(&coarse.meta);
    let (num, den) = ((w * num).sqrt(), (w * den).sqrt());
    if den == 0.0 || !den.is_finite() {
        return Ok(None);
    }
    Ok(Some(num / den))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub mu: f64,
    pub sup_diff: f64,
    pub l2_diff: f64,
    pub alpha_mu: f64,
    pub eta_t: f64,
    pub eta_n: f64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub title: String,
    pub rows: Vec<ConvergenceRow>,
    /// Every run behind the rows, including extra refinement levels.
    pub results: Vec<CaseResult>,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("J,mu,sup_diff,l2_diff,alpha_mu,eta_T,eta_N,rate\n");
        for r in &self.rows {
            let rate = r.rate.map(|v| format!("{v:.12e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
                r.cells, r.mu, r.sup_diff, r.l2_diff, r.alpha_mu, r.eta_t, r.eta_n, rate
            );
        }
        s
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.title)?;
        writeln!(
            f,
            "{:>6} {:>6} {:>12} {:>12} {:>8} {:>8} {:>8} {:>8}",
            "J", "mu", "sup", "l2", "alpha*mu", "eta_T", "eta_N", "rate"
        )?;
        for r in &self.rows {
            let rate = r
                .rate
                .map(|v| format!("{v:.4}"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:>6} {:>6} {:>12.4e} {:>12.4e} {:>8.4} {:>8.4} {:>8.4} {:>8}",
                r.cells, r.mu, r.sup_diff, r.l2_diff, r.alpha_mu, r.eta_t, r.eta_n, rate
            )?;
        }
        Ok(())
    }
}

/// Runs every case of `cfg` and tabulates the `η_N` envelope differences.
/// With three or more grids the J list must double at each step, and each
/// row with two finer successors gets a refinement rate.
pub fn convergence_study(cfg: &ExperimentConfig, title: &str) -> Result<ConvergenceReport> {
    if cfg.cells.len() >= 3 && cfg.cells.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::NonDyadic(cfg.cells.clone()));
    }
    let cases = cases_from_config(cfg)?;
    let results = run_cases(&cases)?;
    let per_mu = cfg.cells.len();
    let mut rows = Vec::with_capacity(results.len());
    for group in results.chunks(per_mu) {
        for (i, r) in group.iter().enumerate() {
            let (sup_diff, l2_diff) = diff_norms(&r.series, &r.bounds.eta_n, cfg.time_norm)?;
            let rate = match (group.get(i + 1), group.get(i + 2)) {
                (Some(m), Some(fine)) => {
                    refinement_rate(&r.series, &m.series, &fine.series, cfg.time_norm)?
                }
                _ => None,
            };
            rows.push(ConvergenceRow {
                cells: r.case.cells,
                mu: r.case.mu,
                sup_diff,
                l2_diff,
                alpha_mu: r.rates.alpha_mu,
                eta_t: r.rates.eta_t,
                eta_n: r.rates.eta_n,
                rate,
            });
        }
    }
    Ok(ConvergenceReport {
        title: title.to_string(),
        rows,
        results,
    })
}

pub const TABLE_MUS: [f64; 5] = [0.25, 0.5, 1.25, 2.75, 4.5];
pub const TABLE_CELLS: [usize; 5] = [100, 200, 400, 800, 1600];

/// Settings of reference table `id` and the number of rows it prints.
/// Tables 1 and 2 add two finer grids so every printed row has a rate.
pub fn table_config(id: u32) -> Result<(ExperimentConfig, String)> {
    let base = ExperimentConfig {
        model: ModelKind::Wave,
        ..Default::default()
    };
    let refine: Vec<usize> = TABLE_CELLS.iter().copied().chain([3200, 6400]).collect();
    let (cfg, title) = match id {
        1 | 2 => {
            let cfl = if id == 1 { 0.95 } else { 0.5 };
            (
                ExperimentConfig {
                    cells: refine,
                    cfl,
                    mu: vec![0.5],
                    t_final: 12.0,
                    initial: InitialData::Constant,
                    ..base
                },
                format!("Table {id}: wave, constant data, CFL {cfl}, mu 0.5, T 12"),
            )
        }
        3 | 4 => {
            let initial = if id == 3 {
                InitialData::Constant
            } else {
                InitialData::Perturbed
            };
            (
                ExperimentConfig {
                    cells: vec![1600],
                    cfl: 0.95,
                    mu: TABLE_MUS.to_vec(),
                    t_final: 35.0,
                    initial,
                    ..base
                },
                format!("Table {id}: wave, {initial} data, J 1600, CFL 0.95, T 35"),
            )
        }
        other => return Err(Error::UnknownTable(other)),
    };
    Ok((cfg, title))
}

/// Rows of reference table `id`, computed from scratch.
pub fn reproduce_table(id: u32) -> Result<ConvergenceReport> {
    let (cfg, title) = table_config(id)?;
    let mut report = convergence_study(&cfg, &title)?;
    report.rows.retain(|r| TABLE_CELLS.contains(&r.cells));
    Ok(report)
}

/// One run per `(μ, J)` of `cfg`, in config order.
pub fn mu_sweep(cfg: &ExperimentConfig) -> Result<Vec<CaseResult>> {
    run_cases(&cases_from_config(cfg)?)
}

/// Long-format CSV `model,J,mu,n,t,L` over all runs.
pub fn sweep_csv(results: &[CaseResult]) -> String {
    let mut s = String::from("model,J,mu,n,t,L\n");
    for r in results {
        for (n, (t, l)) in r.series.times.iter().zip(&r.series.values).enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{:.12e},{:.12e}",
                r.case.model.kind, r.case.cells, r.case.mu, n, t, l
            );
        }
    }
    s
}

/// `t,L,L_up_alpha_mu,L_up_eta_T,L_up_eta_N`, one row per time level.
pub fn series_csv(r: &CaseResult) -> String {
    let mut s = String::from("t,L,L_up_alpha_mu,L_up_eta_T,L_up_eta_N\n");
    for i in 0..r.series.len() {
        let _ = writeln!(
            s,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            r.series.times[i],
            r.series.values[i],
            r.bounds.alpha_mu[i],
            r.bounds.eta_t[i],
            r.bounds.eta_n[i]
        );
    }
    s
}

/// `n,t,j,x,u_plus,u_minus` for every stored state, ghosts included.
pub fn snapshots_csv(r: &CaseResult) -> String {
    let mut s = String::from("n,t,j,x,u_plus,u_minus\n");
    for snap in &r.record.snapshots {
        let n = snap.time_index;
        for j in 0..snap.u_plus.len() {
            let _ = writeln!(
                s,
                "{},{:.12e},{},{:.12e},{:.12e},{:.12e}",
                n,
                r.grid.time(n),
                j,
                r.grid.center(j),
                snap.u_plus[j],
                snap.u_minus[j]
            );
        }
    }
    s
}

/// Human-readable summary of one run.
pub fn case_summary(r: &CaseResult) -> String {
    let last = r.series.values.last().copied().unwrap_or(0.0);
    format!(
        "{}: steps {}, stop {:?}, L0 {:.6e}, L_end {:.6e}, alpha*mu {:.4}, eta_T {:.4}, eta_N {:.4}, eps {:.6e}, mu feasible {}\n",
        r.case.key(),
        r.record.steps(),
        r.record.stop,
        r.series.initial(),
        last,
        r.rates.alpha_mu,
        r.rates.eta_t,
        r.rates.eta_n,
        r.rates.eps,
        r.rates.mu_feasible
    )
}

fn write(dir: &Path, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    written.push(path);
    Ok(())
}

/// Writes the series CSV of a run, plus its snapshots if any were kept.
pub fn write_case(r: &CaseResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(
        dir,
        &format!("series_{}.csv", r.case.key()),
        &series_csv(r),
        &mut written,
    )?;
    if !r.record.snapshots.is_empty() {
        write(
            dir,
            &format!("snapshots_{}.csv", r.case.key()),
            &snapshots_csv(r),
            &mut written,
        )?;
    }
    Ok(written)
}

/// Writes `<stem>.csv`, a series CSV per printed row and appends the
/// rounded view to `report.txt`.
pub fn write_report(report: &ConvergenceReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(dir, &format!("{stem}.csv"), &report.to_csv(), &mut written)?;
    for r in &report.results {
        written.extend(write_case(r, dir)?);
    }
    let mut text = report.to_string();
    text.push('\n');
    for r in &report.results {
        text.push_str(&case_summary(r));
    }
    write(dir, "report.txt", &text, &mut written)?;
    Ok(written)
}
