//! Physical models reduced to their characteristic (Riemann-invariant) form.
//!
//! Every model is a 2×2 linear system `∂t U + diag(a+, a-) ∂x U = 0` on
//! `[0, 1]` with `a- < 0 < a+`. The Euler and Saint-Venant systems are
//! linearized around a steady state; the wave equation has speeds ±c.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scheme::{Discretization, StateField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Wave,
    Euler,
    SaintVenant,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Wave => "wave",
            ModelKind::Euler => "euler",
            ModelKind::SaintVenant => "saint-venant",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wave" => Ok(ModelKind::Wave),
            "euler" | "isothermal-euler" => Ok(ModelKind::Euler),
            "saint-venant" | "saint_venant" | "shallow-water" => Ok(ModelKind::SaintVenant),
            other => Err(Error::UnknownModel(other.to_string())),
        }
    }
}

/// Characteristic speeds of a strictly hyperbolic 2×2 system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub a_plus: f64,
    pub a_minus: f64,
    pub label: ModelKind,
}

impl SystemSpec {
    pub fn new(a_plus: f64, a_minus: f64, label: ModelKind) -> Result<Self> {
        if !(a_minus < 0.0 && 0.0 < a_plus) || !a_plus.is_finite() || !a_minus.is_finite() {
            return Err(Error::NotStrictlyHyperbolic { a_plus, a_minus });
        }
        Ok(Self {
            a_plus,
            a_minus,
            label,
        })
    }

    /// `min(a+, |a-|)`, the slowest characteristic speed.
    pub fn alpha(&self) -> f64 {
        self.a_plus.min(self.a_minus.abs())
    }

    pub fn max_speed(&self) -> f64 {
        self.a_plus.max(self.a_minus.abs())
    }
}

/// Steady state `(w*, q*)` of a balance law plus its model constant
/// (sound speed `a` for Euler, gravity `g` for Saint-Venant).
///
/// `primary_star` is the density `ρ*` or the water height `h*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub primary_star: f64,
    pub flux_star: f64,
    pub constant: f64,
}

impl SteadyState {
    /// a = 1, q* = 0.6, ρ* = 3.
    pub const EULER_DEFAULT: SteadyState = SteadyState {
        primary_star: 3.0,
        flux_star: 0.6,
        constant: 1.0,
    };

    /// g = 9.8, q* = 10, h* = 4.
    pub const SAINT_VENANT_DEFAULT: SteadyState = SteadyState {
        primary_star: 4.0,
        flux_star: 10.0,
        constant: 9.8,
    };

    /// Zero state used for the wave system, whose invariants need no shift.
    pub const ZERO: SteadyState = SteadyState {
        primary_star: 0.0,
        flux_star: 0.0,
        constant: 1.0,
    };

    fn velocity(&self) -> Result<f64> {
        if !self.primary_star.is_finite() || self.primary_star <= 0.0 {
            return Err(Error::InvalidSteadyState(format!(
                "density/height must be positive, got {}",
                self.primary_star
            )));
        }
        if !self.constant.is_finite() || self.constant <= 0.0 || !self.flux_star.is_finite() {
            return Err(Error::InvalidSteadyState(format!(
                "model constant must be positive, got {}",
                self.constant
            )));
        }
        Ok(self.flux_star / self.primary_star)
    }
}

/// Values of the two Riemann invariants at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannState {
    pub u_plus: f64,
    pub u_minus: f64,
}

/// The linear wave equation with unit phase velocity: a+ = 1, a- = -1.
pub fn wave_system() -> SystemSpec {
    SystemSpec {
        a_plus: 1.0,
        a_minus: -1.0,
        label: ModelKind::Wave,
    }
}

/// Isothermal Euler linearized at `(ρ*, q*)`: `a± = q*/ρ* ± a`.
pub fn euler_system(steady: &SteadyState) -> Result<SystemSpec> {
    let u = steady.velocity()?;
    let sound = steady.constant;
    if u.abs() >= sound {
        return Err(Error::NotSubsonic {
            velocity: u.abs(),
            sound_speed: sound,
        });
    }
    SystemSpec::new(u + sound, u - sound, ModelKind::Euler)
}

/// Saint-Venant linearized at `(h*, q*)`: `a± = q*/h* ± √(g h*)`.
pub fn saint_venant_system(steady: &SteadyState) -> Result<SystemSpec> {
    let u = steady.velocity()?;
    let celerity = (steady.constant * steady.primary_star).sqrt();
    if u.abs() >= celerity {
        return Err(Error::NotSubcritical {
            velocity: u.abs(),
            wave_speed: celerity,
        });
    }
    SystemSpec::new(u + celerity, u - celerity, ModelKind::SaintVenant)
}

/// `U+ = (q - q*) - a-(w - w*)`, `U- = (q - q*) - a+(w - w*)`.
pub fn to_riemann(physical: (f64, f64), steady: &SteadyState, spec: &SystemSpec) -> RiemannState {
    let (w, q) = physical;
    let dw = w - steady.primary_star;
    let dq = q - steady.flux_star;
    RiemannState {
        u_plus: dq - spec.a_minus * dw,
        u_minus: dq - spec.a_plus * dw,
    }
}

/// Inverse of [`to_riemann`]; returns `(w, q)`.
pub fn from_riemann(r: RiemannState, steady: &SteadyState, spec: &SystemSpec) -> (f64, f64) {
    // U+ - U- = (a+ - a-) dw
    let dw = (r.u_plus - r.u_minus) / (spec.a_plus - spec.a_minus);
    let dq = (spec.a_plus * r.u_plus - spec.a_minus * r.u_minus) / (spec.a_plus - spec.a_minus);
    (steady.primary_star + dw, steady.flux_star + dq)
}

/// Initial-data families in Riemann variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitialData {
    /// `U+ = -0.5`, `U- = 0.5`.
    Constant,
    /// Constant data plus `sin(2πx)/(4π)` in both components.
    Perturbed,
    /// The model's own profile (constant data for the wave system).
    ModelDefault,
}

impl InitialData {
    pub fn label(self) -> &'static str {
        match self {
            InitialData::Constant => "constant",
            InitialData::Perturbed => "perturbed",
            InitialData::ModelDefault => "model-default",
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InitialData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(InitialData::Constant),
            "perturbed" => Ok(InitialData::Perturbed),
            "model-default" | "default" => Ok(InitialData::ModelDefault),
            other => Err(Error::InvalidSteadyState(format!(
                "unknown initial data '{other}' (expected constant | perturbed | model-default)"
            ))),
        }
    }
}

/// Fills the interior cells `1..=J` at centers `x_j = (j - 1/2)Δx`; ghosts stay zero.
///
/// The Euler and Saint-Venant profiles are used exactly as printed, with
/// their literal coefficients; the Saint-Venant one is not centered at the
/// zero steady state. With `center` set the interior mean of each component
/// is subtracted afterwards.
pub fn initial_data(
    model: ModelKind,
    variant: InitialData,
    grid: &Discretization,
    center: bool,
) -> StateField {
    let mut state = StateField::zeros(grid.cells);
    for j in 1..=grid.cells {
        let x = grid.center(j);
        let (p, m) = match (variant, model) {
            (InitialData::Constant, _) | (InitialData::ModelDefault, ModelKind::Wave) => {
                (-0.5, 0.5)
            }
            (InitialData::Perturbed, _) => {
                let s = (2.0 * PI * x).sin() / (4.0 * PI);
                (-0.5 + s, 0.5 + s)
            }
            (InitialData::ModelDefault, ModelKind::Euler) => {
                let e = (-x).exp();
                (0.8 * e - 3.0, -1.2 * e + 3.0)
            }
            (InitialData::ModelDefault, ModelKind::SaintVenant) => {
                let h = 4.0 + 0.5 * (PI * x).sin();
                (10.0 + 3.761 * h, 10.0 - 8.761 * h)
            }
        };
        state.u_plus[j] = p;
        state.u_minus[j] = m;
    }
    if center {
        let n = grid.cells as f64;
        let mean_p: f64 = state.interior_plus().iter().sum::<f64>() / n;
        let mean_m: f64 = state.interior_minus().iter().sum::<f64>() / n;
        for j in 1..=grid.cells {
            state.u_plus[j] -= mean_p;
            state.u_minus[j] -= mean_m;
        }
    }
    state
}

/// A model together with the steady state it is linearized about.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub kind: ModelKind,
    pub steady: SteadyState,
}

impl Model {
    pub fn new(kind: ModelKind) -> Self {
        let steady = match kind {
            ModelKind::Wave => SteadyState::ZERO,
            ModelKind::Euler => SteadyState::EULER_DEFAULT,
            ModelKind::SaintVenant => SteadyState::SAINT_VENANT_DEFAULT,
        };
        Self { kind, steady }
    }

    pub fn system(&self) -> Result<SystemSpec> {
        match self.kind {
            ModelKind::Wave => Ok(wave_system()),
            ModelKind::Euler => euler_system(&self.steady),
            ModelKind::SaintVenant => saint_venant_system(&self.steady),
        }
    }
}
