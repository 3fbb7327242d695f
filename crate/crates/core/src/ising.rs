//! Ising problem representation, random instance generation and exact
//! brute-force ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on exhaustive enumeration (2^26 configurations).
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 26;

/// Absolute tolerance used to collect degenerate minimizers.
pub const GROUND_DEGENERACY_TOL: f64 = 1e-12;

/// Classical Ising Hamiltonian `sum_i h_i x_i + sum_{i<j} J_ij x_i x_j`
/// over spins `x in {+1,-1}^N`.
///
/// Couplings are stored as a packed upper triangle in lexicographic `(i, j)`
/// order, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    n: usize,
    h: Vec<f64>,
    j: Vec<f64>,
    /// Generator seed, when the instance came from [`sk_random`].
    pub seed: Option<u64>,
    /// Whether local fields were drawn (biased SK) rather than fixed at zero.
    pub biased: bool,
}

/// Index of pair `(i, j)`, `i < j`, in the packed upper triangle of size `n`.
#[inline]
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Number of packed upper-triangle entries for `n` sites.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

impl IsingProblem {
    /// Builds a problem from explicit fields and a packed coupling table.
    pub fn new(n: usize, h: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize { got: 0, min: 1 });
        }
        if h.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "field vector has length {}, expected {}",
                h.len(),
                n
            )));
        }
        if j.len() != pair_count(n) {
            return Err(Error::DimensionMismatch(format!(
                "coupling table has length {}, expected {}",
                j.len(),
                pair_count(n)
            )));
        }
        if h.iter().chain(j.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { n, h, j, seed: None, biased: false })
    }

    /// Problem with all coefficients zero.
    pub fn zeros(n: usize) -> Self {
        Self::new(n, vec![0.0; n], vec![0.0; pair_count(n)]).expect("valid dimensions")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    /// Packed upper-triangle couplings in lexicographic `(i, j)` order.
    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    /// Coupling `J_ij`; indices may be given in either order.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.j[pair_index(a, b, self.n)]
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.j[pair_index(a, b, self.n)] = value;
    }

    pub fn set_field(&mut self, i: usize, value: f64) {
        self.h[i] = value;
    }

    /// `H = Z0 Z1 + Z0 Z2 + Z0 Z3`: the 4-qubit star used by the
    /// local-minimum verification.
    pub fn star4() -> Self {
        let mut p = Self::zeros(4);
        p.set_coupling(0, 1, 1.0);
        p.set_coupling(0, 2, 1.0);
        p.set_coupling(0, 3, 1.0);
        p
    }

    /// Classical energy of a spin configuration.
    pub fn energy(&self, x: &SpinConfiguration) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} spins, problem has {}",
                x.len(),
                self.n
            )));
        }
        Ok(self.energy_of_spins(x.spins()))
    }

    fn energy_of_spins(&self, s: &[i8]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            e += self.h[i] * s[i] as f64;
        }
        let mut k = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                e += self.j[k] * (s[i] * s[j]) as f64;
                k += 1;
            }
        }
        e
    }

    /// Energy of the configuration encoded as a basis-state index
    /// (bit `i` set means spin `i` is `-1`).
    pub fn energy_of_index(&self, idx: u64) -> f64 {
        let s: Vec<i8> = (0..self.n).map(|i| if idx >> i & 1 == 0 { 1 } else { -1 }).collect();
        self.energy_of_spins(&s)
    }

    /// Frobenius norm `sqrt(sum h_i^2 + sum J_ij^2)` over all coefficients.
    pub fn coupling_norm(&self) -> f64 {
        let s: f64 = self.h.iter().chain(self.j.iter()).map(|v| v * v).sum();
        s.sqrt()
    }

    /// All `2^N` energies indexed by configuration.
    ///
    /// Enumerates in Gray-code order with incremental updates, recomputing
    /// from scratch every 4096 steps to keep the accumulated rounding error
    /// well below the 1e-9 scale at which downstream code distinguishes
    /// energy levels.
    pub fn energy_table(&self, cap: usize) -> Result<Vec<f64>> {
        if self.n > cap {
            return Err(Error::ResourceLimit(format!(
                "energy table needs 2^{} entries, cap is 2^{}",
                self.n, cap
            )));
        }
        let size = 1usize << self.n;
        let mut table = vec![0.0; size];
        let mut spins = vec![1i8; self.n];
        let mut idx = 0u64;
        let mut e = self.energy_of_spins(&spins);
        table[0] = e;
        for k in 1..size as u64 {
            let bit = k.trailing_zeros() as usize;
            e += self.flip_delta(&spins, bit);
            spins[bit] = -spins[bit];
            idx ^= 1 << bit;
            if k % 4096 == 0 {
                e = self.energy_of_spins(&spins);
            }
            table[idx as usize] = e;
        }
        Ok(table)
    }

    /// Energy change from flipping spin `bit` in configuration `s`.
    fn flip_delta(&self, s: &[i8], bit: usize) -> f64 {
        let mut field = self.h[bit];
        for l in 0..self.n {
            if l != bit {
                field += self.coupling(l, bit) * s[l] as f64;
            }
        }
        -2.0 * s[bit] as f64 * field
    }

    /// Exhaustive scan of all `2^N` configurations with the default cap.
    pub fn brute_force_ground(&self) -> Result<GroundTruth> {
        self.brute_force_ground_with_cap(DEFAULT_BRUTE_FORCE_CAP)
    }

    /// Exhaustive scan with an explicit qubit cap.
    ///
    /// Scans in Gray-code order collecting near-minimal and near-maximal
    /// candidates with a wide safety margin, then recomputes candidate
    /// energies exactly so the reported extrema and the degenerate ground
    /// set (within [`GROUND_DEGENERACY_TOL`]) do not depend on incremental
    /// rounding.
    pub fn brute_force_ground_with_cap(&self, cap: usize) -> Result<GroundTruth> {
        if self.n > cap {
            return Err(Error::ResourceLimit(format!(
                "brute force over 2^{} configurations exceeds cap 2^{}",
                self.n, cap
            )));
        }
        const MARGIN: f64 = 1e-6;
        const MAX_CANDIDATES: usize = 1 << 22;

        let size = 1u64 << self.n;
        let mut spins = vec![1i8; self.n];
        let mut idx = 0u64;
        let mut e = self.energy_of_spins(&spins);
        let mut min_e = e;
        let mut max_e = e;
        let mut min_cand: Vec<u64> = vec![0];
        let mut max_cand: Vec<u64> = vec![0];

        let mut push = |cand: &mut Vec<u64>, idx: u64| -> Result<()> {
            cand.push(idx);
            if cand.len() > MAX_CANDIDATES {
                return Err(Error::ResourceLimit(
                    "ground-state degeneracy exceeds the candidate buffer".into(),
                ));
            }
            Ok(())
        };

        for k in 1..size {
            let bit = k.trailing_zeros() as usize;
            e += self.flip_delta(&spins, bit);
            spins[bit] = -spins[bit];
            idx ^= 1 << bit;
            if k % 4096 == 0 {
                e = self.energy_of_spins(&spins);
            }
            if e <= min_e + MARGIN {
                if e < min_e {
                    min_e = e;
                    if min_cand.len() > 1024 {
                        let keep = min_e + MARGIN;
                        let table = &self;
                        min_cand.retain(|&c| table.energy_of_index(c) <= keep);
                    }
                }
                push(&mut min_cand, idx)?;
            }
            if e >= max_e - MARGIN {
                if e > max_e {
                    max_e = e;
                    if max_cand.len() > 1024 {
                        let keep = max_e - MARGIN;
                        let table = &self;
                        max_cand.retain(|&c| table.energy_of_index(c) >= keep);
                    }
                }
                push(&mut max_cand, idx)?;
            }
        }

        // Exact pass over the candidates only.
        let exact_min = min_cand
            .iter()
            .map(|&c| self.energy_of_index(c))
            .fold(f64::INFINITY, f64::min);
        let exact_max = max_cand
            .iter()
            .map(|&c| self.energy_of_index(c))
            .fold(f64::NEG_INFINITY, f64::max);
        let mut ground: Vec<u64> = min_cand
            .into_iter()
            .filter(|&c| self.energy_of_index(c) <= exact_min + GROUND_DEGENERACY_TOL)
            .collect();
        ground.sort_unstable();
        ground.dedup();

        Ok(GroundTruth {
            n: self.n,
            min_energy: exact_min,
            max_energy: exact_max,
            ground_states: ground,
        })
    }
}

/// Random Sherrington-Kirkpatrick instance: couplings i.i.d. Gaussian with
/// mean 0 and standard deviation `1/sqrt(n)`; local fields drawn from the
/// same distribution when `biased`, zero otherwise.
///
/// Randomness comes from a ChaCha8 stream seeded with `seed`, with Gaussians
/// produced by the Box-Muller cosine branch (one normal per two uniforms),
/// so instances are bit-identical across platforms. Couplings are drawn
/// first in lexicographic pair order, then fields; an unbiased and a biased
/// instance with the same seed therefore share their couplings.
pub fn sk_random(n: usize, seed: u64, biased: bool) -> Result<IsingProblem> {
    if n < 2 {
        return Err(Error::InvalidSize { got: n, min: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 1.0 / (n as f64).sqrt();
    let mut draw = move |rng: &mut ChaCha8Rng| -> f64 {
        let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
        let u2: f64 = rng.gen();
        sigma * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let j: Vec<f64> = (0..pair_count(n)).map(|_| draw(&mut rng)).collect();
    let h: Vec<f64> = if biased {
        (0..n).map(|_| draw(&mut rng)).collect()
    } else {
        vec![0.0; n]
    };
    let mut p = IsingProblem::new(n, h, j)?;
    p.seed = Some(seed);
    p.biased = biased;
    Ok(p)
}

/// A spin assignment, one `+1` or `-1` per site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput("spins must be +1 or -1".into()));
        }
        Ok(Self(spins))
    }

    /// Decodes a basis-state index: bit `i` set means spin `i` is `-1`.
    pub fn from_index(n: usize, idx: u64) -> Self {
        Self((0..n).map(|i| if idx >> i & 1 == 0 { 1 } else { -1 }).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &s)| if s < 0 { acc | 1 << i } else { acc })
    }

    /// Bit string with the qubit-0 character first; `0` encodes spin `+1`.
    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&s| if s > 0 { '0' } else { '1' }).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }
}

/// Exact spectrum extrema and the full set of minimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    n: usize,
    pub min_energy: f64,
    pub max_energy: f64,
    ground_states: Vec<u64>,
}

impl GroundTruth {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn degeneracy(&self) -> usize {
        self.ground_states.len()
    }

    /// Minimizer indices, sorted ascending.
    pub fn ground_indices(&self) -> &[u64] {
        &self.ground_states
    }

    pub fn ground_configurations(&self) -> Vec<SpinConfiguration> {
        self.ground_states
            .iter()
            .map(|&g| SpinConfiguration::from_index(self.n, g))
            .collect()
    }

    pub fn is_ground_index(&self, idx: u64) -> bool {
        self.ground_states.binary_search(&idx).is_ok()
    }

    /// `(E_max - E) / (E_max - E_min)`: 1 at a ground state, 0 at the top of
    /// the spectrum. A degenerate spectrum (constant Hamiltonian) maps to 1.
    pub fn approximation_ratio(&self, energy: f64) -> f64 {
        let span = self.max_energy - self.min_energy;
        if span <= 0.0 {
            return 1.0;
        }
        (self.max_energy - energy) / span
    }
}

/// Approximation ratio of a configuration against precomputed ground truth.
pub fn approximation_ratio(
    problem: &IsingProblem,
    x: &SpinConfiguration,
    truth: &GroundTruth,
) -> Result<f64> {
    Ok(truth.approximation_ratio(problem.energy(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_site(j01: f64) -> IsingProblem {
        IsingProblem::new(2, vec![0.0, 0.0], vec![j01]).unwrap()
    }

    #[test]
    fn pair_indexing_is_lexicographic() {
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(pair_index(i, j, n), k);
                k += 1;
            }
        }
        assert_eq!(k, pair_count(n));
    }

    #[test]
    fn energy_direct_substitution() {
        let p = two_site(1.0);
        let aligned = SpinConfiguration::new(vec![1, 1]).unwrap();
        let anti = SpinConfiguration::new(vec![1, -1]).unwrap();
        assert_eq!(p.energy(&aligned).unwrap(), 1.0);
        assert_eq!(p.energy(&anti).unwrap(), -1.0);
    }

    #[test]
    fn energy_star4_known_value() {
        let p = IsingProblem::star4();
        let x = SpinConfiguration::new(vec![1, -1, -1, -1]).unwrap();
        assert_eq!(p.energy(&x).unwrap(), -3.0);
    }

    #[test]
    fn energy_rejects_size_mismatch() {
        let p = two_site(1.0);
        let x = SpinConfiguration::new(vec![1, 1, 1]).unwrap();
        assert!(matches!(p.energy(&x), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn sk_rejects_small_sizes() {
        assert!(matches!(sk_random(1, 0, false), Err(Error::InvalidSize { .. })));
    }

    #[test]
    fn sk_structure_and_determinism() {
        let a = sk_random(2, 7, false).unwrap();
        assert_eq!(a.fields(), &[0.0, 0.0]);
        assert_eq!(a.couplings().len(), 1);

        let b = sk_random(2, 7, false).unwrap();
        assert_eq!(a, b);

        let c = sk_random(2, 8, false).unwrap();
        assert_ne!(a.couplings(), c.couplings());

        // Same seed biased/unbiased share couplings.
        let d = sk_random(2, 7, true).unwrap();
        assert_eq!(a.couplings(), d.couplings());
        assert_ne!(d.fields(), &[0.0, 0.0]);
    }

    #[test]
    fn sk_coupling_variance_matches_model() {
        // Monte-Carlo estimate of Var(J) at n = 16 over ~10^4 draws.
        let n = 16;
        let mut values = Vec::new();
        for seed in 0..84 {
            values.extend_from_slice(sk_random(n, seed, false).unwrap().couplings());
        }
        assert!(values.len() >= 10_000);
        let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
        let var: f64 =
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        let expected = 1.0 / n as f64;
        assert!(
            (var - expected).abs() < 0.05 * expected,
            "sample variance {var} vs expected {expected}"
        );
    }

    #[test]
    fn coupling_norm_values() {
        assert_eq!(two_site(1.0).coupling_norm(), 1.0);
        let p = IsingProblem::new(2, vec![3.0, 4.0], vec![0.0]).unwrap();
        assert_eq!(p.coupling_norm(), 5.0);
    }

    #[test]
    fn coupling_norm_concentrates_for_sk() {
        // E[sum J^2] = (n-1)/2, so the norm concentrates near sqrt((n-1)/2).
        let n = 16;
        let expected = ((n - 1) as f64 / 2.0).sqrt();
        let mean: f64 = (0..1000)
            .map(|seed| sk_random(n, seed, false).unwrap().coupling_norm())
            .sum::<f64>()
            / 1000.0;
        assert!((mean - expected).abs() < 0.05 * expected, "mean {mean} vs {expected}");
    }

    #[test]
    fn brute_force_two_site() {
        let p = two_site(1.0);
        let truth = p.brute_force_ground().unwrap();
        assert_eq!(truth.min_energy, -1.0);
        assert_eq!(truth.max_energy, 1.0);
        assert_eq!(truth.degeneracy(), 2);
        for g in truth.ground_configurations() {
            assert_eq!(p.energy(&g).unwrap(), truth.min_energy);
        }
    }

    #[test]
    fn brute_force_star4() {
        let p = IsingProblem::star4();
        let truth = p.brute_force_ground().unwrap();
        assert_eq!(truth.min_energy, -3.0);
        assert_eq!(truth.max_energy, 3.0);
        assert_eq!(truth.degeneracy(), 2);
        let grounds = truth.ground_configurations();
        // The pair with spin 0 opposite to spins 1, 2, 3.
        assert!(grounds.contains(&SpinConfiguration::new(vec![1, -1, -1, -1]).unwrap()));
        assert!(grounds.contains(&SpinConfiguration::new(vec![-1, 1, 1, 1]).unwrap()));
    }

    #[test]
    fn brute_force_matches_reversed_rescan() {
        let p = sk_random(10, 42, false).unwrap();
        let truth = p.brute_force_ground().unwrap();
        // Independent oracle: direct evaluation over all indices in reversed
        // order, no incremental updates.
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for idx in (0..1u64 << 10).rev() {
            let e = p.energy_of_index(idx);
            min = min.min(e);
            max = max.max(e);
        }
        assert_eq!(truth.min_energy, min);
        assert_eq!(truth.max_energy, max);
    }

    #[test]
    fn brute_force_respects_cap() {
        let p = sk_random(10, 1, false).unwrap();
        assert!(matches!(
            p.brute_force_ground_with_cap(8),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn ground_set_closed_under_flip_when_unbiased() {
        for seed in 0..20 {
            let p = sk_random(8, seed, false).unwrap();
            let truth = p.brute_force_ground().unwrap();
            assert_eq!(truth.degeneracy() % 2, 0);
            for g in truth.ground_configurations() {
                assert!(truth.is_ground_index(g.flipped().to_index()));
            }
        }
    }

    #[test]
    fn approximation_ratio_endpoints() {
        let p = IsingProblem::star4();
        let truth = p.brute_force_ground().unwrap();
        let ground = &truth.ground_configurations()[0];
        assert_eq!(approximation_ratio(&p, ground, &truth).unwrap(), 1.0);
        let top = SpinConfiguration::new(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(approximation_ratio(&p, &top, &truth).unwrap(), 0.0);
        // Energy -1 sits at 2/3 of the {-3,-1,1,3} spectrum span.
        let x = SpinConfiguration::new(vec![1, -1, -1, 1]).unwrap();
        assert_eq!(p.energy(&x).unwrap(), -1.0);
        assert!((approximation_ratio(&p, &x, &truth).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn approximation_ratio_constant_spectrum() {
        let p = IsingProblem::zeros(3);
        let truth = p.brute_force_ground().unwrap();
        assert_eq!(truth.approximation_ratio(0.0), 1.0);
    }

    #[test]
    fn energy_table_matches_direct() {
        let p = sk_random(8, 3, true).unwrap();
        let table = p.energy_table(DEFAULT_BRUTE_FORCE_CAP).unwrap();
        for idx in 0..1u64 << 8 {
            assert!((table[idx as usize] - p.energy_of_index(idx)).abs() < 1e-11);
        }
    }

    #[test]
    fn flip_symmetry_unbiased() {
        let p = sk_random(9, 5, false).unwrap();
        for idx in [0u64, 3, 100, 511] {
            let x = SpinConfiguration::from_index(9, idx);
            let e = p.energy(&x).unwrap();
            let ef = p.energy(&x.flipped()).unwrap();
            assert_eq!(e, ef);
        }
    }
}
