//! Weighted discrete Lyapunov functional, decay rates and the conditions a
//! feedback matrix must satisfy for the decay estimate to hold.
//!
//! With weights `P_j(μ) = diag(e^{-μx_j}, e^{μx_j})` the functional is
//! `𝓛ⁿ = Δx Σ_j U_jᵀ P_j U_j`. Under the matrix conditions checked by
//! [`verify_k_conditions`] and `μ e^{μΔx} ≤ α/ε`, each viscous upwind step
//! satisfies `𝓛^{n+1} ≤ (1 - Δt η_N) 𝓛ⁿ`.

use std::fmt;
use std::str::FromStr;

use crate::model::{ModelKind, SystemSpec};
use crate::scheme::{Discretization, FeedbackMatrix, StateField, ViscosityCoeffs};

/// Relative residual below which a matrix identity counts as satisfied.
pub const CONDITION_TOLERANCE: f64 = 1e-12;

/// `e^{-μx_j}` and `e^{μx_j}` for `j = 0..=J+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovWeights {
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
}

impl LyapunovWeights {
    pub fn new(d: &Discretization) -> Self {
        Self::with_mu(d, d.mu)
    }

    pub fn with_mu(d: &Discretization, mu: f64) -> Self {
        let (p_plus, p_minus) = (0..d.cells + 2)
            .map(|j| {
                let x = d.center(j);
                ((-mu * x).exp(), (mu * x).exp())
            })
            .unzip();
        Self { p_plus, p_minus }
    }
}

/// Which cells enter the Lyapunov sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LyapunovSum {
    /// Interior cells `1..=J` only.
    Interior,
    /// Interior plus the two closed ghost cells, `0..=J+1`. This is the
    /// convention the reference convergence tables were produced with.
    #[default]
    WithGhosts,
}

impl LyapunovSum {
    pub fn label(self) -> &'static str {
        match self {
            LyapunovSum::Interior => "interior",
            LyapunovSum::WithGhosts => "with-ghosts",
        }
    }
}

impl fmt::Display for LyapunovSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LyapunovSum {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interior" => Ok(LyapunovSum::Interior),
            "with-ghosts" | "ghosts" => Ok(LyapunovSum::WithGhosts),
            other => Err(format!(
                "unknown lyapunov sum '{other}' (expected interior | with-ghosts)"
            )),
        }
    }
}

fn weighted_term(state: &StateField, w: &LyapunovWeights, j: usize) -> f64 {
    let p = state.u_plus[j];
    let m = state.u_minus[j];
    p * p * w.p_plus[j] + m * m * w.p_minus[j]
}

fn interior_weighted_sum(state: &StateField, w: &LyapunovWeights) -> f64 {
    (1..=state.cells())
        .map(|j| weighted_term(state, w, j))
        .sum()
}

fn ghost_terms(state: &StateField, w: &LyapunovWeights) -> f64 {
    weighted_term(state, w, 0) + weighted_term(state, w, state.cells() + 1)
}

/// `Δx Σ_{j=1}^{J} [(U_j^+)² e^{-μx_j} + (U_j^-)² e^{μx_j}]`.
pub fn discrete_lyapunov(state: &StateField, w: &LyapunovWeights, d: &Discretization) -> f64 {
    d.dx * interior_weighted_sum(state, w)
}

/// Same sum over `j = 0..=J+1`; the ghosts must be closed.
pub fn discrete_lyapunov_with_ghosts(
    state: &StateField,
    w: &LyapunovWeights,
    d: &Discretization,
) -> f64 {
    d.dx * (interior_weighted_sum(state, w) + ghost_terms(state, w))
}

pub fn lyapunov(
    sum: LyapunovSum,
    state: &StateField,
    w: &LyapunovWeights,
    d: &Discretization,
) -> f64 {
    match sum {
        LyapunovSum::Interior => discrete_lyapunov(state, w, d),
        LyapunovSum::WithGhosts => discrete_lyapunov_with_ghosts(state, w, d),
    }
}

fn interior_square_sum(state: &StateField) -> f64 {
    state
        .interior_plus()
        .iter()
        .zip(state.interior_minus())
        .map(|(p, m)| p * p + m * m)
        .sum()
}

/// Interior functional, ghost-inclusive functional and squared L² norm of
/// one state, bit-identical to the separate functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub interior: f64,
    pub with_ghosts: f64,
    pub l2_sq: f64,
}

pub fn diagnostics(state: &StateField, w: &LyapunovWeights, d: &Discretization) -> Diagnostics {
    let inner = interior_weighted_sum(state, w);
    Diagnostics {
        interior: d.dx * inner,
        with_ghosts: d.dx * (inner + ghost_terms(state, w)),
        l2_sq: d.dx * interior_square_sum(state),
    }
}

/// `√(Δx Σ_j (|U_j^+|² + |U_j^-|²))` over the interior.
pub fn discrete_l2_norm(state: &StateField, d: &Discretization) -> f64 {
    (d.dx * interior_square_sum(state)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub alpha: f64,
    pub eps: f64,
    pub mu: f64,
    pub alpha_mu: f64,
    pub eta_t: f64,
    pub eta_n: f64,
    pub mu_feasible: bool,
}

/// `αμ - εμ²`
pub fn eta_t(alpha: f64, eps: f64, mu: f64) -> f64 {
    alpha * mu - eps * mu * mu
}

/// `αμ e^{-μΔx} - εμ²`
pub fn eta_n(alpha: f64, eps: f64, mu: f64, dx: f64) -> f64 {
    alpha * mu * (-mu * dx).exp() - eps * mu * mu
}

/// `μ e^{μΔx} ≤ α/ε`; trivially true without viscosity.
pub fn mu_feasible(alpha: f64, eps: f64, mu: f64, dx: f64) -> bool {
    eps == 0.0 || mu * (mu * dx).exp() <= alpha / eps
}

pub fn decay_rates(spec: &SystemSpec, d: &Discretization, v: &ViscosityCoeffs) -> DecayRates {
    let alpha = spec.alpha();
    let eps = v.eps_max;
    let mu = d.mu;
    DecayRates {
        alpha,
        eps,
        mu,
        alpha_mu: alpha * mu,
        eta_t: eta_t(alpha, eps, mu),
        eta_n: eta_n(alpha, eps, mu, d.dx),
        mu_feasible: mu_feasible(alpha, eps, mu, d.dx),
    }
}

/// `e^{-rate·t}·l0` at every time stamp.
pub fn upper_bound_series(l0: f64, rate: f64, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| (-rate * t).exp() * l0).collect()
}

/// Run parameters attached to a Lyapunov series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesMeta {
    pub cells: usize,
    pub cfl: f64,
    pub mu: f64,
    pub dx: f64,
    pub dt: f64,
    pub model: ModelKind,
}

/// `𝓛ⁿ` along one run, `times[n] = n·Δt`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl LyapunovSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn initial(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// `e^{-rate·tⁿ}𝓛⁰` on this series' time stamps.
    pub fn upper_bound(&self, rate: f64) -> Vec<f64> {
        upper_bound_series(self.initial(), rate, &self.times)
    }
}

type Mat2 = [[f64; 2]; 2];

fn congruence(k: &FeedbackMatrix, diag: [f64; 2]) -> Mat2 {
    // Kᵀ D K
    let k = k.k;
    let mut out = [[0.0; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = diag[0] * k[0][r] * k[0][c] + diag[1] * k[1][r] * k[1][c];
        }
    }
    out
}

fn diag(d: [f64; 2]) -> Mat2 {
    [[d[0], 0.0], [0.0, d[1]]]
}

/// One matrix identity `lhs = rhs`, evaluated numerically.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub id: String,
    pub lhs: Mat2,
    pub rhs: Mat2,
    /// `max|lhs - rhs|` relative to the larger side's max-abs entry.
    pub residual: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn new(id: &str, lhs: Mat2, rhs: Mat2) -> Self {
        let max_abs = |m: &Mat2| m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut diff = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                diff = diff.max((lhs[r][c] - rhs[r][c]).abs());
            }
        }
        let scale = max_abs(&lhs).max(max_abs(&rhs));
        let residual = if scale == 0.0 { diff } else { diff / scale };
        Self {
            id: id.to_string(),
            lhs,
            rhs,
            residual,
            pass: residual < CONDITION_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// One row per matrix entry: `condition,entry,lhs,rhs,residual,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,entry,lhs,rhs,residual,pass\n");
        for c in &self.checks {
            for r in 0..2 {
                for col in 0..2 {
                    out.push_str(&format!(
                        "{},{}{},{:.12e},{:.12e},{:.12e},{}\n",
                        c.id,
                        r + 1,
                        col + 1,
                        c.lhs[r][col],
                        c.rhs[r][col],
                        c.residual,
                        c.pass
                    ));
                }
            }
        }
        out
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<10} residual = {:.3e}  {}",
                c.id,
                c.residual,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Checks the three boundary identities a feedback matrix must satisfy for
/// the discrete decay estimate, using the ghost and boundary-cell centers
/// `x_0 = -Δx/2`, `x_1`, `x_J`, `x_{J+1} = 1 + Δx/2`.
pub fn verify_k_conditions(
    k: &FeedbackMatrix,
    spec: &SystemSpec,
    d: &Discretization,
    v: &ViscosityCoeffs,
) -> ConditionReport {
    let mu = d.mu;
    let dx = d.dx;
    let x0 = d.center(0);
    let x1 = d.center(1);
    let xj = d.center(d.cells);
    let xj1 = d.center(d.cells + 1);
    let ap = spec.a_plus;
    let am = spec.a_minus.abs();
    let (ep, em) = (v.eps_plus / dx, v.eps_minus / dx);

    let shift = ((-mu * dx).exp() - 1.0) * (mu * dx).exp();
    let cp = ap + ep * shift;
    let cm = am + em * shift;
    let value = ConditionCheck::new(
        "value",
        congruence(k, [cp * (-mu * x1).exp(), cm * (mu * xj).exp()]),
        diag([cp * (-mu * xj1).exp(), cm * (mu * x0).exp()]),
    );

    let gradient = ConditionCheck::new(
        "gradient",
        congruence(k, [ep * (-mu * x0).exp(), -em * (mu * xj1).exp()]),
        diag([ep * (-mu * xj).exp(), -em * (mu * x1).exp()]),
    );

    let gp = ep * (ap + 2.0 * ep);
    let gm = em * (am + 2.0 * em);
    let curvature = ConditionCheck::new(
        "curvature",
        congruence(k, [gp * (-mu * x0).exp(), -gm * (mu * xj1).exp()]),
        diag([gp * (-mu * xj).exp(), -gm * (mu * x1).exp()]),
    );

    ConditionReport {
        checks: vec![value, gradient, curvature],
    }
}

/// The two conditions on `K` for the continuous viscous system with
/// diffusion `eps` and the weight `diag(e^{-μx}, e^{μx})`.
pub fn verify_continuous_k_conditions(
    k: &FeedbackMatrix,
    spec: &SystemSpec,
    eps: f64,
    mu: f64,
) -> ConditionReport {
    let ap = spec.a_plus - eps * mu;
    let am = spec.a_minus.abs() - eps * mu;
    let e = mu.exp();
    let flux = ConditionCheck::new("flux", congruence(k, [ap, am * e]), diag([ap / e, am]));
    let weight = ConditionCheck::new("weight", congruence(k, [1.0, -e]), diag([1.0 / e, -1.0]));
    ConditionReport {
        checks: vec![flux, weight],
    }
}
