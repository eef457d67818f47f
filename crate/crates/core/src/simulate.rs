//! Time loop: close ghosts, record diagnostics, step, until the final time
//! or the stopping tolerance is reached.

use crate::error::{Error, Result};
use crate::lyapunov::{diagnostics, Diagnostics, LyapunovSum, LyapunovWeights};
use crate::model::SystemSpec;
use crate::scheme::{
    close_boundaries, Discretization, FeedbackMatrix, Scheme, StateField, UpwindStepper,
};

/// A run is declared divergent once `𝓛ⁿ` exceeds this multiple of `𝓛⁰`.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub scheme: Scheme,
    pub t_final: f64,
    pub tol: f64,
    /// Functional compared against `tol`.
    pub stop_on: LyapunovSum,
    /// Keep every n-th state (0 keeps none; the last state is always kept).
    pub snapshot_every: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Viscous,
            t_final: 12.0,
            tol: 1e-7,
            stop_on: LyapunovSum::WithGhosts,
            snapshot_every: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    FinalTime,
    Tolerance,
}

/// Per-step diagnostics of one run. Entry `n` belongs to `tⁿ = n·Δt` and is
/// taken after the ghosts of `Uⁿ` have been closed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub times: Vec<f64>,
    pub interior: Vec<f64>,
    pub with_ghosts: Vec<f64>,
    pub l2_sq: Vec<f64>,
    pub snapshots: Vec<StateField>,
    pub final_state: StateField,
    pub stop: StopReason,
}

impl RunRecord {
    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn lyapunov(&self, sum: LyapunovSum) -> &[f64] {
        match sum {
            LyapunovSum::Interior => &self.interior,
            LyapunovSum::WithGhosts => &self.with_ghosts,
        }
    }

    fn push(&mut self, t: f64, diag: Diagnostics) {
        self.times.push(t);
        self.interior.push(diag.interior);
        self.with_ghosts.push(diag.with_ghosts);
        self.l2_sq.push(diag.l2_sq);
    }
}

fn pick(sum: LyapunovSum, diag: &Diagnostics) -> f64 {
    match sum {
        LyapunovSum::Interior => diag.interior,
        LyapunovSum::WithGhosts => diag.with_ghosts,
    }
}

/// Runs `initial` forward with feedback `k`. Ghost values of `initial` are
/// overwritten by the closure. Both schemes use the full ghost closure so
/// the ghost-inclusive functional means the same thing for each.
pub fn simulate(
    initial: &StateField,
    spec: &SystemSpec,
    d: &Discretization,
    k: &FeedbackMatrix,
    cfg: &SimulationConfig,
) -> Result<RunRecord> {
    let stepper = UpwindStepper::for_scheme(cfg.scheme, spec, d, *k);
    let weights = LyapunovWeights::new(d);

    let mut current = initial.clone();
    current.time_index = 0;
    let mut next = StateField::zeros(current.cells());
    close_boundaries(&mut current, k)?;

    let first = diagnostics(&current, &weights, d);
    let l0 = pick(cfg.stop_on, &first);
    let mut record = RunRecord {
        times: Vec::new(),
        interior: Vec::new(),
        with_ghosts: Vec::new(),
        l2_sq: Vec::new(),
        snapshots: Vec::new(),
        final_state: StateField::zeros(0),
        stop: StopReason::FinalTime,
    };
    record.push(0.0, first);
    if cfg.snapshot_every > 0 {
        record.snapshots.push(current.clone());
    }

    let mut n = 0usize;
    let mut value = l0;
    loop {
        if d.time(n) >= cfg.t_final {
            record.stop = StopReason::FinalTime;
            break;
        }
        if value < cfg.tol {
            record.stop = StopReason::Tolerance;
            break;
        }
        stepper.advance(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
        n += 1;
        close_boundaries(&mut current, k)?;

        let diag = diagnostics(&current, &weights, d);
        value = pick(cfg.stop_on, &diag);
        if !value.is_finite() || value > DIVERGENCE_FACTOR * l0.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence {
                step: n,
                value,
                initial: l0,
            });
        }
        record.push(d.time(n), diag);
        if cfg.snapshot_every > 0 && n.is_multiple_of(cfg.snapshot_every) {
            record.snapshots.push(current.clone());
        }
    }

    if cfg.snapshot_every > 0 && !n.is_multiple_of(cfg.snapshot_every) {
        record.snapshots.push(current.clone());
    }
    record.final_state = current;
    Ok(record)
}
