//! Exact statevector construction for the IQP and QAOA ansatze.
//!
//! The diagonal Z/ZZ evolution is applied as a pointwise phase on the
//! amplitudes; only the single-qubit X-type layers touch pairs of
//! amplitudes. This is the sampling backend and the ground-truth oracle for
//! every closed-form expression in [`crate::analytic`].

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::IqpParams;
use crate::error::{Error, Result};
use crate::ising::{GroundTruth, IsingProblem};

/// Default cap on statevector size (2^28 amplitudes, ~4 GiB).
pub const DEFAULT_QUBIT_CAP: usize = 28;

/// Normalized complex amplitudes over the computational basis. Qubit `i`
/// maps to bit `i` of the index; a set bit is spin `-1`.
#[derive(Debug, Clone)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probability(&self, idx: u64) -> f64 {
        self.amps[idx as usize].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "states on {} and {} qubits",
                self.n, other.n
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Fidelity `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Expectation of the Pauli string `Z^a X^b` given as support bitmasks.
    pub fn expectation_zx(&self, a: u64, b: u64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..self.amps.len() as u64 {
            let sign = if ((a & y).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
            acc += self.amps[y as usize].conj() * self.amps[(y ^ b) as usize] * sign;
        }
        acc
    }

    /// `<H>` for a diagonal Ising Hamiltonian.
    pub fn expectation_energy(&self, problem: &IsingProblem) -> Result<f64> {
        if problem.n_qubits() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "problem on {} qubits, state on {}",
                problem.n_qubits(),
                self.n
            )));
        }
        let mut e = 0.0;
        for idx in 0..self.amps.len() as u64 {
            let p = self.amps[idx as usize].norm_sqr();
            if p > 0.0 {
                e += p * problem.energy_of_index(idx);
            }
        }
        Ok(e)
    }

    /// Multiplies every amplitude by a unit phase. Exported quantities are
    /// invariant under this.
    pub fn with_global_phase(&self, alpha: f64) -> StateVector {
        let ph = Complex64::from_polar(1.0, alpha);
        StateVector { n: self.n, amps: self.amps.iter().map(|a| a * ph).collect() }
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::ResourceLimit(format!(
            "statevector over {n} qubits exceeds cap {cap}"
        )));
    }
    if n >= usize::BITS as usize {
        return Err(Error::ResourceLimit(format!("{n} qubits cannot be indexed")));
    }
    Ok(())
}

/// Mixes amplitude pairs that differ in qubit `q`:
/// `(a0, a1) -> (c*a0 + m*a1, m*a0 + c*a1)`.
fn mix_pairs(amps: &mut [Complex64], q: usize, c: f64, m: Complex64) {
    let bit = 1usize << q;
    for base in 0..amps.len() {
        if base & bit == 0 {
            let a0 = amps[base];
            let a1 = amps[base | bit];
            amps[base] = c * a0 + m * a1;
            amps[base | bit] = m * a0 + c * a1;
        }
    }
}

/// Builds the ansatz state: diagonal phase
/// `exp(-i [theta_i s_i + theta_ij s_i s_j] / 2)` on `|+>^N` followed by
/// `R_x(phi_i) = exp(-i phi_i X / 2)` on every qubit.
pub fn iqp_state(params: &IqpParams) -> Result<StateVector> {
    iqp_state_with_cap(params, DEFAULT_QUBIT_CAP)
}

pub fn iqp_state_with_cap(params: &IqpParams, cap: usize) -> Result<StateVector> {
    let n = params.n_qubits();
    check_cap(n, cap)?;
    let size = 1usize << n;
    let norm = (size as f64).sqrt().recip();
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    let mut spins = vec![1.0f64; n];
    for (idx, amp) in amps.iter_mut().enumerate() {
        for (i, s) in spins.iter_mut().enumerate() {
            *s = if idx >> i & 1 == 0 { 1.0 } else { -1.0 };
        }
        let mut phase = 0.0;
        for i in 0..n {
            phase += 0.5 * params.theta_lin[i] * spins[i];
            for j in (i + 1)..n {
                phase += 0.5 * params.theta(i, j) * spins[i] * spins[j];
            }
        }
        *amp = Complex64::from_polar(norm, -phase);
    }
    for q in 0..n {
        let half = params.phi[q] / 2.0;
        mix_pairs(&mut amps, q, half.cos(), Complex64::new(0.0, -half.sin()));
    }
    Ok(StateVector { n, amps })
}

/// 1-layer QAOA state: diagonal phase `exp(-i gamma E(x))` on `|+>^N`
/// followed by `exp(i beta X)` on every qubit.
pub fn qaoa_state(problem: &IsingProblem, gamma: f64, beta: f64) -> Result<StateVector> {
    qaoa_state_with_cap(problem, gamma, beta, DEFAULT_QUBIT_CAP)
}

pub fn qaoa_state_with_cap(
    problem: &IsingProblem,
    gamma: f64,
    beta: f64,
    cap: usize,
) -> Result<StateVector> {
    let n = problem.n_qubits();
    check_cap(n, cap)?;
    let size = 1usize << n;
    let norm = (size as f64).sqrt().recip();
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    for (idx, amp) in amps.iter_mut().enumerate() {
        *amp = Complex64::from_polar(norm, -gamma * problem.energy_of_index(idx as u64));
    }
    for q in 0..n {
        mix_pairs(&mut amps, q, beta.cos(), Complex64::new(0.0, beta.sin()));
    }
    Ok(StateVector { n, amps })
}

/// X-basis IQP state `exp(-i/2 [sum theta_i X_i + sum theta_ij X_i X_j])|0>`,
/// with `quad` packed in lexicographic `(i, j)` order.
pub fn xbasis_state(n: usize, lin: &[f64], quad: &[f64]) -> Result<StateVector> {
    check_cap(n, DEFAULT_QUBIT_CAP)?;
    if lin.len() != n || quad.len() != crate::ising::pair_count(n) {
        return Err(Error::DimensionMismatch(format!(
            "expected {} linear and {} quadratic angles",
            n,
            crate::ising::pair_count(n)
        )));
    }
    let size = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); size];
    amps[0] = Complex64::new(1.0, 0.0);
    for (i, &th) in lin.iter().enumerate() {
        let half = th / 2.0;
        mix_pairs(&mut amps, i, half.cos(), Complex64::new(0.0, -half.sin()));
    }
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let half = quad[k] / 2.0;
            k += 1;
            if half == 0.0 {
                continue;
            }
            let (c, s) = (half.cos(), half.sin());
            let mask = (1usize << i) | (1usize << j);
            let m = Complex64::new(0.0, -s);
            for base in 0..size {
                if base & mask == 0 {
                    for sub in [0usize, 1 << i] {
                        let lo = base | sub;
                        let hi = lo ^ mask;
                        let a0 = amps[lo];
                        let a1 = amps[hi];
                        amps[lo] = c * a0 + m * a1;
                        amps[hi] = m * a0 + c * a1;
                    }
                }
            }
        }
    }
    Ok(StateVector { n, amps })
}

/// Measurement counts from repeated computational-basis sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    n: usize,
    pub counts: BTreeMap<u64, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl SampleSet {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

/// Draws `shots` i.i.d. samples from `|amplitude|^2` by inverse-CDF over the
/// basis-state index order; deterministic for a fixed seed.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<SampleSet> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        *counts.entry(idx as u64).or_insert(0) += 1;
    }
    Ok(SampleSet { n: state.n, counts, shots, seed })
}

/// Total probability mass on the ground eigenspace.
pub fn ground_overlap(state: &StateVector, truth: &GroundTruth) -> Result<f64> {
    if truth.n_qubits() != state.n {
        return Err(Error::DimensionMismatch(format!(
            "ground truth on {} qubits, state on {}",
            truth.n_qubits(),
            state.n
        )));
    }
    Ok(truth.ground_indices().iter().map(|&g| state.probability(g)).sum())
}

/// Probability mass per distinct classical energy, sorted by energy.
/// Energies closer than 1e-9 are merged into one level.
pub fn energy_distribution(
    state: &StateVector,
    problem: &IsingProblem,
) -> Result<Vec<(f64, f64)>> {
    if problem.n_qubits() != state.n {
        return Err(Error::DimensionMismatch(format!(
            "problem on {} qubits, state on {}",
            problem.n_qubits(),
            state.n
        )));
    }
    const MERGE_TOL: f64 = 1e-9;
    let mut pairs: Vec<(f64, f64)> = (0..state.amps.len() as u64)
        .map(|idx| (problem.energy_of_index(idx), state.probability(idx)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (e, p) in pairs {
        match out.last_mut() {
            Some((e0, p0)) if e - *e0 <= MERGE_TOL => *p0 += p,
            _ => out.push((e, p)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::sk_random;

    #[test]
    fn zero_params_give_uniform_state() {
        let params = IqpParams::zeros(3);
        let state = iqp_state(&params).unwrap();
        let expected = 1.0 / (8f64).sqrt();
        for a in state.amplitudes() {
            assert!((a.re - expected).abs() < 1e-15 && a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn qaoa_zero_angles_uniform() {
        let p = sk_random(3, 0, false).unwrap();
        let state = qaoa_state(&p, 0.0, 0.0).unwrap();
        for a in state.amplitudes() {
            assert!((a.norm_sqr() - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn norm_preserved_after_all_layers() {
        let p = sk_random(6, 11, true).unwrap();
        let params = IqpParams::random(6, 3);
        assert!((iqp_state(&params).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        assert!((qaoa_state(&p, 0.7, -0.3).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_qubit_matches_hadamard_convention() {
        // phi = pi/2 with theta shifted by -pi/2 reproduces the
        // Hadamard-capped diagonal evolution up to global phase.
        use std::f64::consts::FRAC_PI_2;
        let theta_iqp = 0.9f64;
        let mut params = IqpParams::zeros(1);
        params.phi[0] = FRAC_PI_2;
        params.theta_lin[0] = theta_iqp + FRAC_PI_2;
        let got = iqp_state(&params).unwrap();

        // H * exp(-i theta Z / 2) |+> by 2x2 arithmetic.
        let h = 1.0 / 2f64.sqrt();
        let a0 = Complex64::from_polar(h, -theta_iqp / 2.0) * h;
        let a1 = Complex64::from_polar(h, theta_iqp / 2.0) * h;
        let reference =
            StateVector { n: 1, amps: vec![a0 + a1, a0 - a1] };
        assert!((got.fidelity(&reference).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_and_counts_sum() {
        let params = IqpParams::zeros(2);
        let state = iqp_state(&params).unwrap();
        let a = sample(&state, 1000, 99).unwrap();
        let b = sample(&state, 1000, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), 1000);
    }

    #[test]
    fn sampling_basis_state_concentrates() {
        let mut amps = vec![Complex64::new(0.0, 0.0); 8];
        amps[0] = Complex64::new(1.0, 0.0);
        let state = StateVector { n: 3, amps };
        let s = sample(&state, 50, 1).unwrap();
        assert_eq!(s.counts.len(), 1);
        assert_eq!(s.counts[&0], 50);
    }

    #[test]
    fn sampling_uniform_frequencies() {
        let state = iqp_state(&IqpParams::zeros(2)).unwrap();
        let s = sample(&state, 100_000, 7).unwrap();
        for idx in 0..4u64 {
            let f = *s.counts.get(&idx).unwrap_or(&0) as f64 / 100_000.0;
            assert!((f - 0.25).abs() < 0.01, "outcome {idx} frequency {f}");
        }
    }

    #[test]
    fn ground_overlap_uniform_and_basis() {
        let p = sk_random(5, 3, false).unwrap();
        let truth = p.brute_force_ground().unwrap();
        assert_eq!(truth.degeneracy(), 2);
        let uniform = iqp_state(&IqpParams::zeros(5)).unwrap();
        let overlap = ground_overlap(&uniform, &truth).unwrap();
        assert!((overlap - 2.0 / 32.0).abs() < 1e-12);

        let mut amps = vec![Complex64::new(0.0, 0.0); 32];
        amps[truth.ground_indices()[0] as usize] = Complex64::new(1.0, 0.0);
        let basis = StateVector { n: 5, amps };
        assert!((ground_overlap(&basis, &truth).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_distribution_two_site() {
        let p = crate::ising::IsingProblem::new(2, vec![0.0, 0.0], vec![1.0]).unwrap();
        let state = iqp_state(&IqpParams::zeros(2)).unwrap();
        let dist = energy_distribution(&state, &p).unwrap();
        assert_eq!(dist.len(), 2);
        assert!((dist[0].0 + 1.0).abs() < 1e-12 && (dist[0].1 - 0.5).abs() < 1e-12);
        assert!((dist[1].0 - 1.0).abs() < 1e-12 && (dist[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn energy_distribution_mass_sums_to_one() {
        let p = sk_random(6, 4, true).unwrap();
        let params = IqpParams::random(6, 8);
        let dist = energy_distribution(&iqp_state(&params).unwrap(), &p).unwrap();
        let mass: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bitflip_symmetry_for_unbiased_zero_linear() {
        let mut params = IqpParams::random(5, 17);
        params.theta_lin.iter_mut().for_each(|t| *t = 0.0);
        let state = iqp_state(&params).unwrap();
        let full = (1u64 << 5) - 1;
        for idx in 0..1u64 << 5 {
            let p = state.probability(idx);
            let q = state.probability(idx ^ full);
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn global_phase_insensitivity() {
        let p = sk_random(4, 9, false).unwrap();
        let truth = p.brute_force_ground().unwrap();
        let params = IqpParams::random(4, 2);
        let state = iqp_state(&params).unwrap();
        let rotated = state.with_global_phase(1.234);
        assert!((state.expectation_energy(&p).unwrap()
            - rotated.expectation_energy(&p).unwrap())
        .abs()
            < 1e-12);
        assert!((ground_overlap(&state, &truth).unwrap()
            - ground_overlap(&rotated, &truth).unwrap())
        .abs()
            < 1e-14);
        assert!((state.fidelity(&rotated).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cap_is_enforced() {
        let params = IqpParams::zeros(9);
        assert!(matches!(
            iqp_state_with_cap(&params, 8),
            Err(Error::ResourceLimit(_))
        ));
    }
}
