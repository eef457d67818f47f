//! Space-time grid, artificial viscosity, ghost-cell closure and the two
//! explicit upwind steppers.
//!
//! The unknowns are cell averages `U_j^{n,±}` for `j = 1..=J` on a uniform
//! grid of `[0, 1]`, plus one ghost cell on each side. `U+` travels right
//! and is upwinded from the left; `U-` travels left and is upwinded from
//! the right. The viscous variant adds the second-difference term of the
//! modified equation with per-component coefficients `ε±`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::SystemSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub cells: usize,
    pub dx: f64,
    pub cfl: f64,
    pub dt: f64,
    pub mu: f64,
}

impl Discretization {
    /// `x_j = (j - 1/2)Δx`; also valid for the ghost indices 0 and J+1.
    pub fn center(&self, j: usize) -> f64 {
        (j as f64 - 0.5) * self.dx
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }
}

/// `Δx = 1/J`, `Δt = cfl·Δx / max(a+, |a-|)`.
pub fn build_discretization(
    spec: &SystemSpec,
    cells: usize,
    cfl: f64,
    mu: f64,
) -> Result<Discretization> {
    if cells < 2 {
        return Err(Error::TooFewCells { min: 2, got: cells });
    }
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Cfl(cfl));
    }
    if !mu.is_finite() || mu <= 0.0 {
        return Err(Error::InvalidMu(mu));
    }
    let dx = 1.0 / cells as f64;
    Ok(Discretization {
        cells,
        dx,
        cfl,
        dt: cfl * dx / spec.max_speed(),
        mu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViscosityCoeffs {
    pub eps_plus: f64,
    pub eps_minus: f64,
    pub eps_max: f64,
}

impl ViscosityCoeffs {
    pub const ZERO: ViscosityCoeffs = ViscosityCoeffs {
        eps_plus: 0.0,
        eps_minus: 0.0,
        eps_max: 0.0,
    };
}

/// `ε± = ½|a±|Δx(1 - |a±|Δt/Δx)`, each component with its own Courant number.
pub fn diffusion_coefficients(spec: &SystemSpec, d: &Discretization) -> ViscosityCoeffs {
    let eps = |speed: f64| 0.5 * speed * d.dx * (1.0 - speed * d.dt / d.dx);
    let eps_plus = eps(spec.a_plus);
    let eps_minus = eps(spec.a_minus.abs());
    ViscosityCoeffs {
        eps_plus,
        eps_minus,
        eps_max: eps_plus.max(eps_minus),
    }
}

/// Cell averages of both invariants at one time level, ghosts included.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub u_plus: Vec<f64>,
    pub u_minus: Vec<f64>,
    pub time_index: usize,
}

impl StateField {
    pub fn zeros(cells: usize) -> Self {
        Self {
            u_plus: vec![0.0; cells + 2],
            u_minus: vec![0.0; cells + 2],
            time_index: 0,
        }
    }

    pub fn cells(&self) -> usize {
        self.u_plus.len() - 2
    }

    pub fn interior_plus(&self) -> &[f64] {
        &self.u_plus[1..=self.cells()]
    }

    pub fn interior_minus(&self) -> &[f64] {
        &self.u_minus[1..=self.cells()]
    }

    /// `αU + βV` on every entry, ghosts included.
    pub fn combine(alpha: f64, u: &StateField, beta: f64, v: &StateField) -> StateField {
        let mix =
            |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        StateField {
            u_plus: mix(&u.u_plus, &v.u_plus),
            u_minus: mix(&u.u_minus, &v.u_minus),
            time_index: u.time_index,
        }
    }
}

/// Feedback `(U+(0), U-(1)) = K (U+(1), U-(0))`, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackMatrix {
    pub k: [[f64; 2]; 2],
}

impl FeedbackMatrix {
    pub fn new(k: [[f64; 2]; 2]) -> Self {
        Self { k }
    }

    pub fn diagonal(k1: f64, k2: f64) -> Self {
        Self {
            k: [[k1, 0.0], [0.0, k2]],
        }
    }

    /// `diag(e^{-μ/2}, e^{-μ/2})`, the matrix used in all experiments.
    pub fn for_mu(mu: f64) -> Self {
        let k = (-0.5 * mu).exp();
        Self::diagonal(k, k)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut k = self.k;
        k.iter_mut().flatten().for_each(|v| *v *= factor);
        Self { k }
    }

    pub fn det(&self) -> f64 {
        self.k[0][0] * self.k[1][1] - self.k[0][1] * self.k[1][0]
    }

    pub fn max_abs(&self) -> f64 {
        self.k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.k[0][0] * v[0] + self.k[0][1] * v[1],
            self.k[1][0] * v[0] + self.k[1][1] * v[1],
        ]
    }

    /// Solves `K x = r`, refusing when `|det K| <= 1e-14·max|K_ij|²`.
    pub fn solve(&self, r: [f64; 2]) -> Result<[f64; 2]> {
        let det = self.det();
        let scale = self.max_abs();
        if det.abs() <= 1e-14 * scale * scale || !det.is_finite() {
            return Err(Error::SingularClosure { det });
        }
        let [[a, b], [c, d]] = self.k;
        Ok([(d * r[0] - b * r[1]) / det, (a * r[1] - c * r[0]) / det])
    }
}

/// Sets `U_0^+` and `U_{J+1}^-` from the feedback law.
pub fn close_value_ghosts(state: &mut StateField, k: &FeedbackMatrix) {
    let j = state.cells();
    let [g_plus, g_minus] = k.apply([state.u_plus[j], state.u_minus[1]]);
    state.u_plus[0] = g_plus;
    state.u_minus[j + 1] = g_minus;
}

/// Sets all four ghost values so that both the value condition
/// `(U_0^+, U_{J+1}^-) = K (U_J^+, U_1^-)` and the gradient condition
/// `(U_1^+ - U_0^+, U_{J+1}^- - U_J^-) = K (U_{J+1}^+ - U_J^+, U_1^- - U_0^-)` hold.
pub fn close_boundaries(state: &mut StateField, k: &FeedbackMatrix) -> Result<()> {
    close_value_ghosts(state, k);
    let j = state.cells();
    let rhs = [
        state.u_plus[1] - state.u_plus[0],
        state.u_minus[j + 1] - state.u_minus[j],
    ];
    let [jump_plus, jump_minus] = k.solve(rhs)?;
    state.u_plus[j + 1] = state.u_plus[j] + jump_plus;
    state.u_minus[0] = state.u_minus[1] - jump_minus;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    /// First-order upwind without added viscosity.
    Plain,
    /// Upwind plus the `ε± ∂xx` term of the modified equation.
    #[default]
    Viscous,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Plain => "plain",
            Scheme::Viscous => "viscous",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "plain" | "upwind" => Ok(Scheme::Plain),
            "viscous" => Ok(Scheme::Viscous),
            other => Err(format!(
                "unknown scheme '{other}' (expected plain | viscous)"
            )),
        }
    }
}

/// Three-point stencil `new_j = own·U_j + upwind·U_up + downwind·U_down`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Stencil {
    own: f64,
    upwind: f64,
    downwind: f64,
}

impl Stencil {
    // (1 - λ - 2d)U_j + (λ + d)U_up + d·U_down; exact shift when λ = 1, d = 0.
    fn new(courant: f64, diffusion: f64) -> Self {
        Self {
            own: 1.0 - courant - 2.0 * diffusion,
            upwind: courant + diffusion,
            downwind: diffusion,
        }
    }
}

/// Precomputed update for one (system, grid, viscosity, K) combination.
#[derive(Debug, Clone, Copy)]
pub struct UpwindStepper {
    plus: Stencil,
    minus: Stencil,
    feedback: FeedbackMatrix,
}

impl UpwindStepper {
    pub fn new(
        spec: &SystemSpec,
        d: &Discretization,
        v: &ViscosityCoeffs,
        feedback: FeedbackMatrix,
    ) -> Self {
        let ratio = d.dt / d.dx;
        let diffusion = d.dt / (d.dx * d.dx);
        Self {
            plus: Stencil::new(spec.a_plus * ratio, v.eps_plus * diffusion),
            minus: Stencil::new(spec.a_minus.abs() * ratio, v.eps_minus * diffusion),
            feedback,
        }
    }

    pub fn for_scheme(
        scheme: Scheme,
        spec: &SystemSpec,
        d: &Discretization,
        feedback: FeedbackMatrix,
    ) -> Self {
        let v = match scheme {
            Scheme::Plain => ViscosityCoeffs::ZERO,
            Scheme::Viscous => diffusion_coefficients(spec, d),
        };
        Self::new(spec, d, &v, feedback)
    }

    pub fn feedback(&self) -> &FeedbackMatrix {
        &self.feedback
    }

    /// Writes the interior of `next` from `current`, whose ghosts must
    /// already be closed. Ghosts of `next` are left for the next closure.
    pub fn advance(&self, current: &StateField, next: &mut StateField) {
        let cells = current.cells();
        debug_assert_eq!(next.cells(), cells);
        let Stencil {
            own,
            upwind,
            downwind,
        } = self.plus;
        let u = &current.u_plus;
        for (j, out) in next.u_plus[1..=cells]
            .iter_mut()
            .enumerate()
            .map(|(i, o)| (i + 1, o))
        {
            *out = own * u[j] + upwind * u[j - 1] + downwind * u[j + 1];
        }
        let Stencil {
            own,
            upwind,
            downwind,
        } = self.minus;
        let u = &current.u_minus;
        for (j, out) in next.u_minus[1..=cells]
            .iter_mut()
            .enumerate()
            .map(|(i, o)| (i + 1, o))
        {
            *out = own * u[j] + upwind * u[j + 1] + downwind * u[j - 1];
        }
        next.time_index = current.time_index + 1;
    }

    /// Closes the ghosts of `current` and advances one step into `next`.
    pub fn step(&self, current: &mut StateField, next: &mut StateField) -> Result<()> {
        close_boundaries(current, &self.feedback)?;
        self.advance(current, next);
        Ok(())
    }
}

/// One step of the viscous upwind scheme; closes the ghosts of a copy first.
pub fn step_viscous_upwind(
    state: &StateField,
    spec: &SystemSpec,
    d: &Discretization,
    v: &ViscosityCoeffs,
    k: &FeedbackMatrix,
) -> Result<StateField> {
    let stepper = UpwindStepper::new(spec, d, v, *k);
    let mut current = state.clone();
    let mut next = StateField::zeros(state.cells());
    stepper.step(&mut current, &mut next)?;
    Ok(next)
}

/// One step of the plain upwind scheme. Only the value ghosts are read,
/// so a singular gradient system is not an error here.
pub fn step_plain_upwind(
    state: &StateField,
    spec: &SystemSpec,
    d: &Discretization,
    k: &FeedbackMatrix,
) -> Result<StateField> {
    let stepper = UpwindStepper::new(spec, d, &ViscosityCoeffs::ZERO, *k);
    let mut current = state.clone();
    close_value_ghosts(&mut current, k);
    let mut next = StateField::zeros(state.cells());
    stepper.advance(&current, &mut next);
    Ok(next)
}
