//! Dense-matrix reference for one viscous upwind step, assembled entry by
//! entry from the difference operators and the ghost equations.

#![allow(dead_code)]

use hypstab::model::SystemSpec;
use hypstab::scheme::{Discretization, FeedbackMatrix, StateField, ViscosityCoeffs};
use nalgebra::{DMatrix, DVector};

/// Layout of the extended vector: `[U+_0..U+_{J+1}, U-_0..U-_{J+1}]`.
fn plus(j: usize) -> usize {
    j
}

fn minus(cells: usize, j: usize) -> usize {
    cells + 2 + j
}

/// Maps the `2J` interior values to all `2J + 4` values by solving the
/// four ghost equations for `(U+_0, U+_{J+1}, U-_0, U-_{J+1})`.
pub fn extension_matrix(cells: usize, k: &FeedbackMatrix) -> DMatrix<f64> {
    let [[k11, k12], [k21, k22]] = k.k;
    let j = cells;
    // ghost unknowns g = (U+_0, U+_{J+1}, U-_0, U-_{J+1}); A g = B z
    let mut a = DMatrix::<f64>::zeros(4, 4);
    let mut b = DMatrix::<f64>::zeros(4, 2 * cells);
    let zp = |i: usize| i - 1;
    let zm = |i: usize| cells + i - 1;

    // U+_0 = k11 U+_J + k12 U-_1
    a[(0, 0)] = 1.0;
    b[(0, zp(j))] = k11;
    b[(0, zm(1))] = k12;
    // U-_{J+1} = k21 U+_J + k22 U-_1
    a[(1, 3)] = 1.0;
    b[(1, zp(j))] = k21;
    b[(1, zm(1))] = k22;
    // U+_1 - U+_0 = k11 (U+_{J+1} - U+_J) + k12 (U-_1 - U-_0)
    a[(2, 0)] = -1.0;
    a[(2, 1)] = -k11;
    a[(2, 2)] = k12;
    b[(2, zp(1))] = -1.0;
    b[(2, zp(j))] = -k11;
    b[(2, zm(1))] = k12;
    // U-_{J+1} - U-_J = k21 (U+_{J+1} - U+_J) + k22 (U-_1 - U-_0)
    a[(3, 3)] = 1.0;
    a[(3, 1)] = -k21;
    a[(3, 2)] = k22;
    b[(3, zm(j))] = 1.0;
    b[(3, zp(j))] = -k21;
    b[(3, zm(1))] = k22;

    let g = a.lu().solve(&b).expect("ghost system is singular");

    let mut e = DMatrix::<f64>::zeros(2 * cells + 4, 2 * cells);
    for i in 1..=cells {
        e[(plus(i), zp(i))] = 1.0;
        e[(minus(cells, i), zm(i))] = 1.0;
    }
    for c in 0..2 * cells {
        e[(plus(0), c)] = g[(0, c)];
        e[(plus(j + 1), c)] = g[(1, c)];
        e[(minus(cells, 0), c)] = g[(2, c)];
        e[(minus(cells, j + 1), c)] = g[(3, c)];
    }
    e
}

/// `U_j - λ(U_j - U_up) + d(U_{j+1} - 2U_j + U_{j-1})` for each component,
/// as a `2J × (2J + 4)` matrix.
pub fn stencil_matrix(
    cells: usize,
    spec: &SystemSpec,
    d: &Discretization,
    v: &ViscosityCoeffs,
) -> DMatrix<f64> {
    let mut s = DMatrix::<f64>::zeros(2 * cells, 2 * cells + 4);
    let r = d.dt / d.dx;
    let q = d.dt / (d.dx * d.dx);
    let (lp, dp) = (spec.a_plus * r, v.eps_plus * q);
    let (lm, dm) = (spec.a_minus.abs() * r, v.eps_minus * q);
    for j in 1..=cells {
        let row = j - 1;
        s[(row, plus(j))] += 1.0;
        s[(row, plus(j))] -= lp;
        s[(row, plus(j - 1))] += lp;
        s[(row, plus(j + 1))] += dp;
        s[(row, plus(j))] -= 2.0 * dp;
        s[(row, plus(j - 1))] += dp;

        let row = cells + j - 1;
        s[(row, minus(cells, j))] += 1.0;
        s[(row, minus(cells, j))] -= lm;
        s[(row, minus(cells, j + 1))] += lm;
        s[(row, minus(cells, j + 1))] += dm;
        s[(row, minus(cells, j))] -= 2.0 * dm;
        s[(row, minus(cells, j - 1))] += dm;
    }
    s
}

pub fn interior_vector(state: &StateField) -> DVector<f64> {
    DVector::from_iterator(
        2 * state.cells(),
        state
            .interior_plus()
            .iter()
            .chain(state.interior_minus())
            .copied(),
    )
}

/// Interior values after one step, computed densely.
pub fn dense_step(
    state: &StateField,
    spec: &SystemSpec,
    d: &Discretization,
    v: &ViscosityCoeffs,
    k: &FeedbackMatrix,
) -> DVector<f64> {
    let cells = state.cells();
    stencil_matrix(cells, spec, d, v) * extension_matrix(cells, k) * interior_vector(state)
}
