//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # Table 1, first row
//! model = wave
//! J = 100, 200, 400
//! cfl = 0.95
//! mu = 0.5
//! T = 12
//! ```
//!
//! Lists are comma separated. `#` starts a comment. Unknown keys, bad
//! numbers and out-of-range values are rejected with the offending line.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::harness::TimeNorm;
use crate::lyapunov::LyapunovSum;
use crate::model::{InitialData, Model, ModelKind, SteadyState};
use crate::scheme::{FeedbackMatrix, Scheme};

pub const KEYS: &[&str] = &[
    "model",
    "J",
    "cfl",
    "mu",
    "T",
    "tol",
    "initial",
    "scheme",
    "out",
    "steady_w",
    "steady_q",
    "steady_c",
    "center",
    "lyapunov_sum",
    "time_norm",
    "snapshot_every",
    "K",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    /// Number of interior cells per run, strictly increasing.
    pub cells: Vec<usize>,
    pub cfl: f64,
    pub mu: Vec<f64>,
    pub t_final: f64,
    pub tol: f64,
    pub initial: InitialData,
    pub scheme: Scheme,
    pub out: PathBuf,
    /// Overrides of the model's steady state `(w*, q*, a or g)`.
    pub steady_w: Option<f64>,
    pub steady_q: Option<f64>,
    pub steady_c: Option<f64>,
    /// Subtract the interior mean from the initial data.
    pub center: bool,
    pub lyapunov_sum: LyapunovSum,
    pub time_norm: TimeNorm,
    /// Write every n-th state of a run (0 disables snapshots).
    pub snapshot_every: usize,
    /// Row-major feedback matrix; `diag(e^{-μ/2})` per μ when unset.
    pub feedback: Option<[f64; 4]>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Wave,
            cells: vec![100],
            cfl: 0.5,
            mu: vec![0.5],
            t_final: 12.0,
            tol: 1e-7,
            initial: InitialData::ModelDefault,
            scheme: Scheme::Viscous,
            out: PathBuf::from("results"),
            steady_w: None,
            steady_q: None,
            steady_c: None,
            center: false,
            lyapunov_sum: LyapunovSum::WithGhosts,
            time_norm: TimeNorm::Dx,
            snapshot_every: 0,
            feedback: None,
        }
    }
}

fn number(value: &str) -> std::result::Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("'{value}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{value}' is not finite"));
    }
    Ok(v)
}

fn positive(value: &str) -> std::result::Result<f64, String> {
    let v = number(value)?;
    if v <= 0.0 {
        return Err(format!("must be positive, got {v}"));
    }
    Ok(v)
}

fn list<T>(
    value: &str,
    item: impl Fn(&str) -> std::result::Result<T, String>,
) -> std::result::Result<Vec<T>, String> {
    let items = value
        .split(',')
        .map(str::trim)
        .map(&item)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        match key {
            "model" => self.model = value.parse().map_err(|e: Error| e.to_string())?,
            "J" => {
                let cells = list(value, |s| {
                    let j: usize = s
                        .parse()
                        .map_err(|_| format!("'{s}' is not a cell count"))?;
                    if j < 2 {
                        return Err(format!("need at least 2 cells, got {j}"));
                    }
                    Ok(j)
                })?;
                if cells.windows(2).any(|w| w[1] <= w[0]) {
                    return Err("J list must be strictly increasing".into());
                }
                self.cells = cells;
            }
            "cfl" => {
                let c = number(value)?;
                if !(c > 0.0 && c <= 1.0) {
                    return Err(format!("cfl = {c} violates the CFL condition 0 < cfl <= 1"));
                }
                self.cfl = c;
            }
            "mu" => self.mu = list(value, positive)?,
            "T" => self.t_final = positive(value)?,
            "tol" => {
                let t = number(value)?;
                if t < 0.0 {
                    return Err(format!("must be non-negative, got {t}"));
                }
                self.tol = t;
            }
            "initial" => self.initial = value.parse().map_err(|e: Error| e.to_string())?,
            "scheme" => self.scheme = value.parse()?,
            "out" => {
                if value.is_empty() {
                    return Err("empty output directory".into());
                }
                self.out = PathBuf::from(value);
            }
            "steady_w" => self.steady_w = Some(positive(value)?),
            "steady_q" => self.steady_q = Some(number(value)?),
            "steady_c" => self.steady_c = Some(positive(value)?),
            "center" => {
                self.center = value
                    .parse()
                    .map_err(|_| format!("'{value}' is not true or false"))?
            }
            "lyapunov_sum" => self.lyapunov_sum = value.parse()?,
            "time_norm" => self.time_norm = value.parse()?,
            "snapshot_every" => {
                self.snapshot_every = value
                    .parse()
                    .map_err(|_| format!("'{value}' is not a step count"))?
            }
            "K" => {
                let k = list(value, number)?;
                let k: [f64; 4] = k.try_into().map_err(|k: Vec<f64>| {
                    format!("expected 4 entries k11, k12, k21, k22, got {}", k.len())
                })?;
                self.feedback = Some(k);
            }
            other => {
                return Err(format!(
                    "unknown key '{other}' (known: {})",
                    KEYS.join(", ")
                ));
            }
        }
        Ok(())
    }

    /// Feedback matrix used for weight parameter `mu`.
    pub fn feedback_for(&self, mu: f64) -> FeedbackMatrix {
        match self.feedback {
            Some([a, b, c, d]) => FeedbackMatrix::new([[a, b], [c, d]]),
            None => FeedbackMatrix::for_mu(mu),
        }
    }

    /// The model with any steady-state overrides applied and validated.
    pub fn resolved_model(&self) -> Result<Model> {
        let mut model = Model::new(self.model);
        let overrides = [self.steady_w, self.steady_q, self.steady_c];
        if overrides.iter().any(Option::is_some) {
            if self.model == ModelKind::Wave {
                return Err(Error::InvalidSteadyState(
                    "steady-state parameters do not apply to the wave model".into(),
                ));
            }
            let base = model.steady;
            model.steady = SteadyState {
                primary_star: self.steady_w.unwrap_or(base.primary_star),
                flux_star: self.steady_q.unwrap_or(base.flux_star),
                constant: self.steady_c.unwrap_or(base.constant),
            };
        }
        model.system()?;
        Ok(model)
    }

    /// Canonical text form; [`parse_config`] reads it back unchanged.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "J = {}", join(&self.cells));
        let _ = writeln!(s, "cfl = {}", self.cfl);
        let _ = writeln!(s, "mu = {}", join(&self.mu));
        let _ = writeln!(s, "T = {}", self.t_final);
        let _ = writeln!(s, "tol = {:e}", self.tol);
        let _ = writeln!(s, "initial = {}", self.initial);
        let _ = writeln!(s, "scheme = {}", self.scheme);
        let _ = writeln!(s, "out = {}", self.out.display());
        for (key, v) in [
            ("steady_w", self.steady_w),
            ("steady_q", self.steady_q),
            ("steady_c", self.steady_c),
        ] {
            if let Some(v) = v {
                let _ = writeln!(s, "{key} = {v}");
            }
        }
        let _ = writeln!(s, "center = {}", self.center);
        let _ = writeln!(s, "lyapunov_sum = {}", self.lyapunov_sum);
        let _ = writeln!(s, "time_norm = {}", self.time_norm);
        let _ = writeln!(s, "snapshot_every = {}", self.snapshot_every);
        if let Some(k) = self.feedback {
            let _ = writeln!(s, "K = {}", join(&k));
        }
        s
    }
}

/// Parses configuration text on top of the defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    apply_config(&mut cfg, text)?;
    Ok(cfg)
}

/// Parses configuration text on top of an existing config.
pub fn apply_config(cfg: &mut ExperimentConfig, text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::Config {
            location: format!("line {}", i + 1),
            text: raw.trim().to_string(),
            reason,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        cfg.set(key.trim(), value).map_err(err)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.cfl, 0.5);
        assert_eq!(cfg.mu, vec![0.5]);
        assert_eq!(cfg.tol, 1e-7);
        assert_eq!(cfg.scheme, Scheme::Viscous);
        assert_eq!(cfg.model, ModelKind::Wave);
    }

    #[test]
    fn table_one_row() {
        let cfg = parse_config("model = wave\nJ = 100\ncfl = 0.95\nmu = 0.5\nT = 12").unwrap();
        assert_eq!(cfg.cells, vec![100]);
        assert_eq!(cfg.cfl, 0.95);
        assert_eq!(cfg.t_final, 12.0);
    }

    #[test]
    fn comments_and_lists() {
        let cfg = parse_config("# sweep\nmu = 0.25, 0.5 , 4.5  # three\nJ=100,200\n\n").unwrap();
        assert_eq!(cfg.mu, vec![0.25, 0.5, 4.5]);
        assert_eq!(cfg.cells, vec![100, 200]);
    }

    #[test]
    fn cfl_violation_names_line() {
        let err = parse_config("model = wave\ncfl = 1.5").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("cfl = 1.5"), "{msg}");
        assert!(msg.contains("CFL condition"), "{msg}");
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "colour = red",
            "cfl = fast",
            "J = 200, 100",
            "J = 1",
            "mu = -1",
            "T = 0",
            "scheme = lax",
            "model = burgers",
            "just words",
            "center = maybe",
            "K = 1, 2, 3",
        ] {
            assert!(
                matches!(parse_config(text), Err(Error::Config { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn steady_overrides() {
        let cfg = parse_config("model = euler\nsteady_q = 0.3").unwrap();
        let m = cfg.resolved_model().unwrap();
        assert_eq!(m.steady.flux_star, 0.3);
        assert_eq!(m.steady.primary_star, 3.0);

        let cfg = parse_config("model = euler\nsteady_q = 6").unwrap();
        assert!(matches!(
            cfg.resolved_model(),
            Err(Error::NotSubsonic { .. })
        ));
        let cfg = parse_config("steady_q = 1").unwrap();
        assert!(cfg.resolved_model().is_err());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = parse_config(
            "model = saint-venant\nJ = 50, 100\nmu = 0.1, 2.75\nsteady_c = 9.81\nout = /tmp/x y",
        )
        .unwrap();
        cfg.tol = 3.3e-9;
        cfg.center = true;
        cfg.feedback = Some([0.5, -0.1, 0.0, 2.0]);
        assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn round_trip(
                model in prop::sample::select(vec![ModelKind::Wave, ModelKind::Euler, ModelKind::SaintVenant]),
                start in 2usize..500,
                count in 1usize..5,
                cfl in 1e-3f64..=1.0,
                mu in prop::collection::vec(1e-3f64..10.0, 1..5),
                t_final in 1e-2f64..100.0,
                tol in 0.0f64..1e-2,
                plain in any::<bool>(),
                center in any::<bool>(),
                snapshot_every in 0usize..100,
            ) {
                let cfg = ExperimentConfig {
                    model,
                    cells: (0..count).map(|i| start << i).collect(),
                    cfl,
                    mu,
                    t_final,
                    tol,
                    scheme: if plain { Scheme::Plain } else { Scheme::Viscous },
                    center,
                    snapshot_every,
                    ..Default::default()
                };
                prop_assert_eq!(parse_config(&cfg.to_config_text()).unwrap(), cfg);
            }
        }
    }
}
