//! Verification of the 4-qubit critical line of non-trivial local minima.
//!
//! The star Hamiltonian `Z0(Z1 + Z2 + Z3)` explored with the X-basis ansatz
//! `exp(-i/2 [sum theta_i X_i + sum theta_ij X_i X_j])|0>` has a line of
//! parameters, swept by `theta_2`, on which the energy is constant at -2,
//! the gradient vanishes, the Hessian is positive semidefinite with a single
//! null mode along the line, and the state keeps overlap 1/2 with the
//! degenerate ground eigenspace. Since -2 is not an eigenvalue of the star
//! (all eigenvalues are odd), every point on the line is a non-trivial local
//! minimum.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::analytic::{counterexample_zz, counterexample_zz_grad, XBASIS_ARITY};
use crate::error::{Error, Result};
use crate::ising::IsingProblem;
use crate::simulator::{ground_overlap, xbasis_state};

/// The fixed angles of the critical line, `theta_2` left free:
/// `theta_0 = theta_1 = theta_3 = pi/2`, `theta_01 = theta_03 = theta_13 =
/// pi/2`, `theta_02 = pi`, `theta_12 = theta_23 = 0`.
pub fn critical_line_angles(theta2: f64) -> [f64; XBASIS_ARITY] {
    [FRAC_PI_2, FRAC_PI_2, theta2, FRAC_PI_2, FRAC_PI_2, PI, FRAC_PI_2, 0.0, FRAC_PI_2, 0.0]
}

/// Samples closer than this to the excluded point `theta_2 = pi/2` are
/// rejected up front.
pub const THETA2_EXCLUSION_RADIUS: f64 = 0.1;

// Angle-vector permutations mapping the <Z0 Z1> formula onto <Z0 Z2> and
// <Z0 Z3>: entry i of the permuted vector is angles[PERM[i]].
const PERM_Z0Z2: [usize; XBASIS_ARITY] = [0, 2, 3, 1, 5, 6, 4, 9, 7, 8];
const PERM_Z0Z3: [usize; XBASIS_ARITY] = [0, 3, 1, 2, 6, 4, 5, 8, 9, 7];

fn permuted(angles: &[f64], perm: &[usize; XBASIS_ARITY]) -> [f64; XBASIS_ARITY] {
    std::array::from_fn(|i| angles[perm[i]])
}

/// `<H>` of the star Hamiltonian in the X-basis ansatz.
pub fn star_energy(angles: &[f64; XBASIS_ARITY]) -> f64 {
    counterexample_zz(angles).expect("arity fixed")
        + counterexample_zz(&permuted(angles, &PERM_Z0Z2)).expect("arity fixed")
        + counterexample_zz(&permuted(angles, &PERM_Z0Z3)).expect("arity fixed")
}

/// Exact gradient of [`star_energy`] with respect to all ten angles.
pub fn star_gradient(angles: &[f64; XBASIS_ARITY]) -> [f64; XBASIS_ARITY] {
    let mut g = counterexample_zz_grad(angles);
    for perm in [&PERM_Z0Z2, &PERM_Z0Z3] {
        let local = counterexample_zz_grad(&permuted(angles, perm));
        for (i, &slot) in perm.iter().enumerate() {
            g[slot] += local[i];
        }
    }
    g
}

/// Hessian of [`star_energy`] by central differences of the exact gradient
/// (step 1e-5), symmetrized.
pub fn star_hessian(angles: &[f64; XBASIS_ARITY]) -> DMatrix<f64> {
    const STEP: f64 = 1e-5;
    let dim = XBASIS_ARITY;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for mu in 0..dim {
        let mut plus = *angles;
        let mut minus = *angles;
        plus[mu] += STEP;
        minus[mu] -= STEP;
        let gp = star_gradient(&plus);
        let gm = star_gradient(&minus);
        for nu in 0..dim {
            m[(mu, nu)] = (gp[nu] - gm[nu]) / (2.0 * STEP);
        }
    }
    let mt = m.transpose();
    (m + mt) * 0.5
}

/// Outcome of the four checks at one `theta_2` sample.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalPointCheck {
    pub theta2: f64,
    pub energy: f64,
    pub grad_norm: f64,
    pub hessian_min_eigenvalue: f64,
    pub null_modes: usize,
    pub ground_overlap: f64,
    /// Names of failed checks; empty means the point verified.
    pub failures: Vec<String>,
}

impl CriticalPointCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub checks: Vec<CriticalPointCheck>,
}

impl CounterexampleReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CriticalPointCheck::passed)
    }
}

const GRAD_NORM_TOL: f64 = 1e-8;
const ENERGY_TOL: f64 = 1e-10;
const HESSIAN_NEG_TOL: f64 = 1e-8;
const NULL_MODE_TOL: f64 = 1e-8;
const OVERLAP_TOL: f64 = 1e-10;

/// Verifies the critical line at the given `theta_2` samples.
pub fn verify_counterexample(theta2_samples: &[f64]) -> Result<CounterexampleReport> {
    verify_critical_line(&critical_line_angles(0.0), theta2_samples)
}

/// Same checks with an explicit base parameter set (slot 2 is replaced by
/// each sample); lets callers probe off-line points as a negative control.
pub fn verify_critical_line(
    base: &[f64; XBASIS_ARITY],
    theta2_samples: &[f64],
) -> Result<CounterexampleReport> {
    for &t in theta2_samples {
        let dist = (t.rem_euclid(TAU) - FRAC_PI_2).abs();
        if dist.min((TAU - dist).abs()) < THETA2_EXCLUSION_RADIUS {
            return Err(Error::InvalidInput(format!(
                "theta_2 = {t} is inside the excluded neighborhood of pi/2"
            )));
        }
    }
    let star = IsingProblem::star4();
    let truth = star.brute_force_ground()?;

    let mut checks = Vec::with_capacity(theta2_samples.len());
    for &theta2 in theta2_samples {
        let mut angles = *base;
        angles[2] = theta2;

        let energy = star_energy(&angles);
        let grad = star_gradient(&angles);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let hessian = star_hessian(&angles);
        let eigs = hessian.symmetric_eigen().eigenvalues;
        let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        let null_modes = eigs.iter().filter(|l| l.abs() < NULL_MODE_TOL).count();
        let state = xbasis_state(4, &angles[..4], &angles[4..])?;
        let overlap = ground_overlap(&state, &truth)?;

        let mut failures = Vec::new();
        if grad_norm >= GRAD_NORM_TOL {
            failures.push(format!("gradient norm {grad_norm:.3e} >= {GRAD_NORM_TOL:.0e}"));
        }
        if (energy + 2.0).abs() >= ENERGY_TOL {
            failures.push(format!("energy {energy} differs from -2"));
        }
        if min_eig < -HESSIAN_NEG_TOL {
            failures.push(format!("hessian eigenvalue {min_eig:.3e} below -{HESSIAN_NEG_TOL:.0e}"));
        }
        if null_modes != 1 {
            failures.push(format!("{null_modes} null modes, expected exactly 1"));
        }
        if (overlap - 0.5).abs() >= OVERLAP_TOL {
            failures.push(format!("ground overlap {overlap} differs from 0.5"));
        }
        checks.push(CriticalPointCheck {
            theta2,
            energy,
            grad_norm,
            hessian_min_eigenvalue: min_eig,
            null_modes,
            ground_overlap: overlap,
            failures,
        });
    }
    Ok(CounterexampleReport { checks })
}
