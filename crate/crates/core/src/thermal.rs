//! Exact thermal distributions, KL divergence and effective-temperature
//! fitting onto the Boltzmann family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{IsingProblem, DEFAULT_BRUTE_FORCE_CAP};

/// Fitted effective inverse temperature of a distribution.
///
/// The fit minimizes the forward divergence `KL(p || boltzmann(beta))` over
/// `beta >= 0`; `kl` is the residual in nats and `beta_normalized` is
/// `beta_eff` times the Frobenius norm of the problem coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalFit {
    pub beta_eff: f64,
    pub beta_normalized: f64,
    pub kl: f64,
    /// Set when the bracket growth hit the search ceiling `1e4 / ||J||`.
    pub bracket_hit_max: bool,
}

/// Boltzmann distribution `p(x) ~ exp(-beta E(x))` over all configurations,
/// computed with a max-shift so large `beta` cannot overflow.
pub fn boltzmann(problem: &IsingProblem, beta: f64) -> Result<Vec<f64>> {
    boltzmann_with_cap(problem, beta, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn boltzmann_with_cap(problem: &IsingProblem, beta: f64, cap: usize) -> Result<Vec<f64>> {
    if beta < 0.0 {
        return Err(Error::InvalidInput("beta must be non-negative".into()));
    }
    let energies = problem.energy_table(cap)?;
    Ok(boltzmann_from_energies(&energies, beta))
}

fn boltzmann_from_energies(energies: &[f64], beta: f64) -> Vec<f64> {
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut p: Vec<f64> = energies.iter().map(|e| (-beta * (e - e_min)).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    p
}

/// `sum p log(p / q)` in nats, with `0 log 0 = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "distributions of length {} and {}",
            p.len(),
            q.len()
        )));
    }
    let mut kl = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < 0.0 || qi < 0.0 {
            return Err(Error::InvalidInput(format!("negative mass at index {i}")));
        }
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::KlUndefined(format!(
                    "p({i}) = {pi} but q({i}) = 0"
                )));
            }
            kl += pi * (pi / qi).ln();
        }
    }
    Ok(kl)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const BETA_MAX_OVER_NORM: f64 = 1e4;

/// Fits `beta` by minimizing `KL(p || boltzmann(beta))` over `beta >= 0`.
///
/// The divergence is evaluated in log space, so it stays finite for any
/// bracket point. The bracket starts at `[0, 1/||J||]` and doubles until the
/// derivative turns positive or the ceiling `1e4/||J||` is reached (flagged);
/// golden-section search then resolves the minimum to a relative width of
/// 1e-8.
pub fn fit_beta(problem: &IsingProblem, p: &[f64]) -> Result<ThermalFit> {
    fit_beta_with_cap(problem, p, DEFAULT_BRUTE_FORCE_CAP)
}

pub fn fit_beta_with_cap(problem: &IsingProblem, p: &[f64], cap: usize) -> Result<ThermalFit> {
    let energies = problem.energy_table(cap)?;
    if p.len() != energies.len() {
        return Err(Error::DimensionMismatch(format!(
            "distribution of length {}, expected {}",
            p.len(),
            energies.len()
        )));
    }
    if p.iter().any(|&v| v < -1e-15 || !v.is_finite()) {
        return Err(Error::InvalidInput("distribution has negative or non-finite mass".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "distribution sums to {total}, expected 1"
        )));
    }

    let norm = problem.coupling_norm();
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = energies.iter().map(|e| e - e_min).collect();
    let p_log_p: f64 =
        p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum();
    let mean_p: f64 = p.iter().zip(&shifted).map(|(&pi, &e)| pi * e).sum();

    // KL(p || boltzmann(beta)) = sum p ln p + beta <E - Emin>_p + ln Z_shift.
    let kl_at = |beta: f64| -> f64 {
        let z: f64 = shifted.iter().map(|&e| (-beta * e).exp()).sum();
        p_log_p + beta * mean_p + z.ln()
    };
    // d KL / d beta = <E>_p - <E>_beta.
    let slope_at = |beta: f64| -> f64 {
        let mut z = 0.0;
        let mut ez = 0.0;
        for &e in &shifted {
            let w = (-beta * e).exp();
            z += w;
            ez += e * w;
        }
        mean_p - ez / z
    };

    if norm == 0.0 {
        // Constant Hamiltonian: every thermal state is uniform.
        let kl = kl_at(0.0).max(0.0);
        return Ok(ThermalFit { beta_eff: 0.0, beta_normalized: 0.0, kl, bracket_hit_max: false });
    }

    if slope_at(0.0) >= 0.0 {
        let kl = kl_at(0.0).max(0.0);
        return Ok(ThermalFit { beta_eff: 0.0, beta_normalized: 0.0, kl, bracket_hit_max: false });
    }

    let beta_max = BETA_MAX_OVER_NORM / norm;
    let mut hi = 1.0 / norm;
    let mut bracket_hit_max = false;
    while slope_at(hi) < 0.0 {
        hi *= 2.0;
        if hi >= beta_max {
            hi = beta_max;
            bracket_hit_max = slope_at(hi) < 0.0;
            break;
        }
    }

    let mut lo = 0.0f64;
    let tol = 1e-8 * hi;
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = kl_at(x1);
    let mut f2 = kl_at(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = kl_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = kl_at(x2);
        }
    }
    let beta_eff = 0.5 * (lo + hi);
    let kl = kl_at(beta_eff).max(0.0);
    Ok(ThermalFit { beta_eff, beta_normalized: beta_eff * norm, kl, bracket_hit_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::sk_random;

    #[test]
    fn infinite_temperature_is_uniform() {
        let p = sk_random(6, 1, false).unwrap();
        let b = boltzmann(&p, 0.0).unwrap();
        for &v in &b {
            assert!((v - 1.0 / 64.0).abs() < 1e-15);
        }
    }

    #[test]
    fn low_temperature_concentrates_on_ground_states() {
        let p = sk_random(8, 2, false).unwrap();
        let truth = p.brute_force_ground().unwrap();
        let beta = 1e3 / p.coupling_norm();
        let b = boltzmann(&p, beta).unwrap();
        let ground_mass: f64 =
            truth.ground_indices().iter().map(|&g| b[g as usize]).sum();
        assert!(ground_mass >= 1.0 - 1e-6, "ground mass {ground_mass}");
    }

    #[test]
    fn two_level_partition_function() {
        let p = crate::ising::IsingProblem::new(2, vec![0.0, 0.0], vec![1.0]).unwrap();
        let b = boltzmann(&p, 1.0).unwrap();
        let e1 = 1f64.exp();
        let em1 = (-1f64).exp();
        let expected_anti = e1 / (2.0 * e1 + 2.0 * em1);
        // Antialigned states are indices 1 and 2.
        assert!((b[1] - expected_anti).abs() < 1e-12);
        assert!((b[2] - expected_anti).abs() < 1e-12);
    }

    #[test]
    fn kl_closed_forms() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let kl = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((kl - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(
            kl_divergence(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::KlUndefined(_))
        ));
    }

    #[test]
    fn kl_matches_independent_rederivation() {
        // Second route: KL = -H(p) - sum p ln q.
        let mut rng_state = 9u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng_state >> 33) as f64 / (1u64 << 31) as f64).max(1e-9)
        };
        for _ in 0..20 {
            let mut p: Vec<f64> = (0..16).map(|_| next()).collect();
            let mut q: Vec<f64> = (0..16).map(|_| next()).collect();
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            p.iter_mut().for_each(|v| *v /= sp);
            q.iter_mut().for_each(|v| *v /= sq);
            let kl = kl_divergence(&p, &q).unwrap();
            assert!(kl >= 0.0);
            let other: f64 = p
                .iter()
                .zip(&q)
                .map(|(&pi, &qi)| pi * pi.ln() - pi * qi.ln())
                .sum();
            assert!((kl - other).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_planted_member() {
        let problem = sk_random(8, 11, false).unwrap();
        let norm = problem.coupling_norm();
        let beta0 = 0.7 / norm;
        let planted = boltzmann(&problem, beta0).unwrap();
        let fit = fit_beta(&problem, &planted).unwrap();
        assert!((fit.beta_eff - beta0).abs() < 1e-6 * beta0, "fit {}", fit.beta_eff);
        assert!(fit.kl < 1e-10);
        assert!(!fit.bracket_hit_max);
        assert_eq!(fit.beta_normalized, fit.beta_eff * norm);
    }

    #[test]
    fn fit_uniform_gives_zero_beta() {
        let problem = sk_random(7, 4, false).unwrap();
        let size = 1usize << 7;
        let uniform = vec![1.0 / size as f64; size];
        let fit = fit_beta(&problem, &uniform).unwrap();
        assert!(fit.beta_eff.abs() < 1e-6);
        assert!(fit.kl < 1e-12);
    }

    #[test]
    fn fit_cross_checked_against_grid_scan() {
        let problem = sk_random(6, 8, true).unwrap();
        let energies = problem.energy_table(10).unwrap();
        // A distribution outside the thermal family.
        let mut p: Vec<f64> = energies.iter().map(|e| (-0.9 * e).exp() + 0.001).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        let fit = fit_beta(&problem, &p).unwrap();
        let grid_min = (0..1000)
            .map(|k| {
                let beta = k as f64 * 3.0 / (1000.0 * problem.coupling_norm());
                kl_divergence(&p, &boltzmann(&problem, beta).unwrap()).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(grid_min >= fit.kl - 1e-9, "grid {grid_min} vs fit {}", fit.kl);
    }

    #[test]
    fn fit_rejects_unnormalized_input() {
        let problem = sk_random(4, 3, false).unwrap();
        let p = vec![0.5; 16];
        assert!(matches!(fit_beta(&problem, &p), Err(Error::InvalidInput(_))));
    }
}
