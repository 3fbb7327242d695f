//! Closed-form expectation values, energy, gradient and tangent-space Gram
//! matrix for the IQP ansatz.
//!
//! Every quantity here refers to the state
//! `R_x(phi_1) x ... x R_x(phi_N) * exp(-i H_diag) |+>^N` with
//! `H_diag = (1/2) sum_i theta_i Z_i + (1/2) sum_{i<j} theta_ij Z_i Z_j`.
//! Expectations of `Z^a X^b` strings in the pre-rotation state reduce to a
//! sum of `2^(w_b - 1)` trigonometric products, which makes the Ising energy,
//! its exact gradient and the Gram matrix all `O(N^3)` for dense problems.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ising::{pair_count, pair_index, IsingProblem};

/// Default cap on the X weight of a Pauli string passed to
/// [`expectation_pauli`]; blocks accidental exponential blowup.
pub const DEFAULT_WEIGHT_CAP: u32 = 8;

/// Variational point of the ansatz: one final-layer X angle and one linear
/// diagonal angle per qubit, plus one pair angle per qubit pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IqpParams {
    n: usize,
    /// Final-layer X-rotation angles, radians.
    pub phi: Vec<f64>,
    /// Linear diagonal angles, radians.
    pub theta_lin: Vec<f64>,
    /// Pair angles packed in lexicographic `(i, j)` order.
    theta_quad: Vec<f64>,
}

/// Total number of parameters for `n` qubits: `n (n + 3) / 2`.
#[inline]
pub fn param_dim(n: usize) -> usize {
    2 * n + pair_count(n)
}

/// Flat slot of `phi_i` in the global parameter ordering
/// (all phi, then all linear theta, then pair theta in `(i, j)` order).
#[inline]
pub fn phi_slot(_n: usize, i: usize) -> usize {
    i
}

#[inline]
pub fn theta_lin_slot(n: usize, i: usize) -> usize {
    n + i
}

#[inline]
pub fn theta_quad_slot(n: usize, i: usize, j: usize) -> usize {
    2 * n + pair_index(i, j, n)
}

impl IqpParams {
    pub fn zeros(n: usize) -> Self {
        Self { n, phi: vec![0.0; n], theta_lin: vec![0.0; n], theta_quad: vec![0.0; pair_count(n)] }
    }

    /// Uniform random angles in `(-pi, pi)`; deterministic in the seed.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |rng: &mut ChaCha8Rng| PI * (2.0 * rng.gen::<f64>() - 1.0);
        Self {
            n,
            phi: (0..n).map(|_| draw(&mut rng)).collect(),
            theta_lin: (0..n).map(|_| draw(&mut rng)).collect(),
            theta_quad: (0..pair_count(n)).map(|_| draw(&mut rng)).collect(),
        }
    }

    pub fn from_parts(phi: Vec<f64>, theta_lin: Vec<f64>, theta_quad: Vec<f64>) -> Result<Self> {
        let n = phi.len();
        if theta_lin.len() != n || theta_quad.len() != pair_count(n) {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} linear and {} pair angles, got {} and {}",
                pair_count(n),
                theta_lin.len(),
                theta_quad.len()
            )));
        }
        if phi.iter().chain(&theta_lin).chain(&theta_quad).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite parameter".into()));
        }
        Ok(Self { n, phi, theta_lin, theta_quad })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn param_count(&self) -> usize {
        param_dim(self.n)
    }

    /// Pair angle `theta_ij`; indices in either order.
    pub fn theta(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.theta_quad[pair_index(a, b, self.n)]
    }

    pub fn set_theta(&mut self, i: usize, j: usize, value: f64) {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.theta_quad[pair_index(a, b, self.n)] = value;
    }

    pub fn theta_quad(&self) -> &[f64] {
        &self.theta_quad
    }

    /// Flattens into the global parameter ordering.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        out.extend_from_slice(&self.phi);
        out.extend_from_slice(&self.theta_lin);
        out.extend_from_slice(&self.theta_quad);
        out
    }

    pub fn from_flat(n: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != param_dim(n) {
            return Err(Error::DimensionMismatch(format!(
                "flat vector has {} entries, expected {}",
                flat.len(),
                param_dim(n)
            )));
        }
        Ok(Self {
            n,
            phi: flat[..n].to_vec(),
            theta_lin: flat[n..2 * n].to_vec(),
            theta_quad: flat[2 * n..].to_vec(),
        })
    }
}

/// Pauli string `Z^a X^b` identified by support bitmasks (phases dropped).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliTerm {
    n: usize,
    a: u64,
    b: u64,
}

impl PauliTerm {
    pub fn new(n: usize, a: u64, b: u64) -> Result<Self> {
        if n > 64 {
            return Err(Error::ResourceLimit("bitmask terms support up to 64 qubits".into()));
        }
        let valid = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if a & !valid != 0 || b & !valid != 0 {
            return Err(Error::InvalidInput("support mask outside the qubit range".into()));
        }
        Ok(Self { n, a, b })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn z_mask(&self) -> u64 {
        self.a
    }

    pub fn x_mask(&self) -> u64 {
        self.b
    }

    /// Z weight `w_a`.
    pub fn weight_z(&self) -> u32 {
        self.a.count_ones()
    }

    /// X weight `w_b`.
    pub fn weight_x(&self) -> u32 {
        self.b.count_ones()
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[inline]
fn q_fn(kind: bool, x: f64) -> f64 {
    if kind {
        x.sin()
    } else {
        x.cos()
    }
}

/// `<Z^a X^b>` in the pre-rotation state `exp(-i H_diag)|+>^N`, with the
/// default X-weight cap.
pub fn expectation_pauli(params: &IqpParams, term: &PauliTerm) -> Result<Complex64> {
    expectation_pauli_with_cap(params, term, DEFAULT_WEIGHT_CAP)
}

/// Evaluates the quotiented configuration sum: one representative per global
/// spin-flip orbit of the X support (first support spin pinned to `+1`),
/// `2^(w_b - 1)` terms in total. A pure-Z string averages to zero over the
/// uniform distribution the diagonal layer preserves, and the empty string
/// is the identity.
pub fn expectation_pauli_with_cap(
    params: &IqpParams,
    term: &PauliTerm,
    weight_cap: u32,
) -> Result<Complex64> {
    let n = params.n_qubits();
    if term.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "term on {} qubits, parameters on {}",
            term.n_qubits(),
            n
        )));
    }
    let wa = term.weight_z();
    let wb = term.weight_x();
    if wb > weight_cap {
        return Err(Error::ResourceLimit(format!(
            "X weight {wb} exceeds cap {weight_cap}"
        )));
    }
    if wb == 0 {
        return Ok(if wa == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    }

    let support: Vec<usize> = (0..n).filter(|&i| term.b >> i & 1 == 1).collect();
    let a_bit = |i: usize| term.a >> i & 1 == 1;
    let a_parity = (term.a & !term.b).count_ones() % 2 == 1;
    // Linear angles shifted by -pi/2 where the string carries a Z.
    let tilde: Vec<f64> = support
        .iter()
        .map(|&i| params.theta_lin[i] - if a_bit(i) { FRAC_PI_2 } else { 0.0 })
        .collect();

    let mut r = vec![1.0f64; support.len()];
    let mut total = 0.0;
    for conf in 0..1u64 << (support.len() - 1) {
        for (k, rk) in r.iter_mut().enumerate().skip(1) {
            *rk = if conf >> (k - 1) & 1 == 0 { 1.0 } else { -1.0 };
        }
        let arg: f64 = tilde.iter().zip(&r).map(|(t, rk)| t * rk).sum();
        let mut prod = q_fn(a_parity, arg);
        for j in 0..n {
            if term.b >> j & 1 == 1 {
                continue;
            }
            let s: f64 = support.iter().zip(&r).map(|(&i, rk)| params.theta(i, j) * rk).sum();
            prod *= q_fn(a_bit(j), s);
            if prod == 0.0 {
                break;
            }
        }
        total += prod;
    }

    let scale = (2.0f64).powi(wb as i32 - 1);
    Ok(i_pow(wa + a_parity as u32) * (total / scale))
}

/// Product with leave-one-out queries that tracks exact zero factors instead
/// of dividing by them.
struct LooProduct {
    zeros: usize,
    prod: f64,
}

impl LooProduct {
    fn from_iter(it: impl Iterator<Item = f64>) -> Self {
        let mut zeros = 0;
        let mut prod = 1.0;
        for f in it {
            if f == 0.0 {
                zeros += 1;
            } else {
                prod *= f;
            }
        }
        Self { zeros, prod }
    }

    fn full(&self) -> f64 {
        if self.zeros > 0 {
            0.0
        } else {
            self.prod
        }
    }

    /// Product of all factors except one occurrence of `f`.
    fn without(&self, f: f64) -> f64 {
        if f == 0.0 {
            if self.zeros > 1 {
                0.0
            } else {
                self.prod
            }
        } else if self.zeros > 0 {
            0.0
        } else {
            self.prod / f
        }
    }

    /// Product of all factors except one occurrence each of `f1` and `f2`.
    fn without2(&self, f1: f64, f2: f64) -> f64 {
        let removed = (f1 == 0.0) as usize + (f2 == 0.0) as usize;
        if self.zeros > removed {
            return 0.0;
        }
        let mut p = self.prod;
        if f1 != 0.0 {
            p /= f1;
        }
        if f2 != 0.0 {
            p /= f2;
        }
        p
    }
}

fn check_dims(problem: &IsingProblem, params: &IqpParams) -> Result<()> {
    if problem.n_qubits() != params.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "problem on {} qubits, parameters on {}",
            problem.n_qubits(),
            params.n_qubits()
        )));
    }
    Ok(())
}

/// Exact ansatz energy `<H>` assembled from the closed-form field and pair
/// contributions; `O(N^3)` for dense couplings.
pub fn energy(problem: &IsingProblem, params: &IqpParams) -> Result<f64> {
    check_dims(problem, params)?;
    let n = params.n_qubits();
    let sin_phi: Vec<f64> = params.phi.iter().map(|p| p.sin()).collect();
    let cos_phi: Vec<f64> = params.phi.iter().map(|p| p.cos()).collect();
    let sin_th: Vec<f64> = params.theta_lin.iter().map(|t| t.sin()).collect();
    let cos_th: Vec<f64> = params.theta_lin.iter().map(|t| t.cos()).collect();

    let mut e = 0.0;
    for i in 0..n {
        let h = problem.fields()[i];
        if h == 0.0 {
            continue;
        }
        let mut prod = 1.0;
        for l in 0..n {
            if l != i {
                prod *= params.theta(i, l).cos();
            }
        }
        e += h * sin_phi[i] * sin_th[i] * prod;
    }

    for i in 0..n {
        for j in (i + 1)..n {
            let coupling = problem.coupling(i, j);
            if coupling == 0.0 {
                continue;
            }
            let (mut pi, mut pj, mut pp, mut pm) = (1.0, 1.0, 1.0, 1.0);
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                let tli = params.theta(l, i);
                let tlj = params.theta(l, j);
                pi *= tli.cos();
                pj *= tlj.cos();
                pp *= (tli + tlj).cos();
                pm *= (tli - tlj).cos();
            }
            let sij = params.theta(i, j).sin();
            let single_x = cos_phi[i] * sin_phi[j] * cos_th[j] * sij * pj
                + sin_phi[i] * cos_phi[j] * cos_th[i] * sij * pi;
            let double_x = 0.5
                * sin_phi[i]
                * sin_phi[j]
                * ((params.theta_lin[i] + params.theta_lin[j]).cos() * pp
                    - (params.theta_lin[i] - params.theta_lin[j]).cos() * pm);
            e += coupling * (single_x - double_x);
        }
    }
    Ok(e)
}

/// Exact gradient of [`energy`] with respect to every parameter, in the
/// global flat ordering. Each closed-form energy term contributes to `O(N)`
/// parameters; leave-one-out products keep the total cost `O(N^3)` without
/// ever dividing by a vanishing cosine.
pub fn gradient(problem: &IsingProblem, params: &IqpParams) -> Result<Vec<f64>> {
    check_dims(problem, params)?;
    let n = params.n_qubits();
    let sin_phi: Vec<f64> = params.phi.iter().map(|p| p.sin()).collect();
    let cos_phi: Vec<f64> = params.phi.iter().map(|p| p.cos()).collect();
    let sin_th: Vec<f64> = params.theta_lin.iter().map(|t| t.sin()).collect();
    let cos_th: Vec<f64> = params.theta_lin.iter().map(|t| t.cos()).collect();

    let mut g = vec![0.0; params.param_count()];

    // Field terms h_i sin(phi_i) sin(theta_i) prod_{l != i} cos(theta_il).
    for i in 0..n {
        let h = problem.fields()[i];
        if h == 0.0 {
            continue;
        }
        let loo =
            LooProduct::from_iter((0..n).filter(|&l| l != i).map(|l| params.theta(i, l).cos()));
        let full = loo.full();
        g[phi_slot(n, i)] += h * cos_phi[i] * sin_th[i] * full;
        g[theta_lin_slot(n, i)] += h * sin_phi[i] * cos_th[i] * full;
        let coef = h * sin_phi[i] * sin_th[i];
        if coef != 0.0 {
            for l in 0..n {
                if l != i {
                    let til = params.theta(i, l);
                    g[theta_quad_slot(n, i.min(l), i.max(l))] +=
                        coef * (-til.sin()) * loo.without(til.cos());
                }
            }
        }
    }

    // Pair terms. Scratch buffers are reused across pairs.
    let mut others: Vec<usize> = Vec::with_capacity(n);
    let mut fi = Vec::with_capacity(n);
    let mut fj = Vec::with_capacity(n);
    let mut fp = Vec::with_capacity(n);
    let mut fm = Vec::with_capacity(n);
    let mut si = Vec::with_capacity(n);
    let mut sj = Vec::with_capacity(n);
    let mut sp = Vec::with_capacity(n);
    let mut sm = Vec::with_capacity(n);

    for i in 0..n {
        for j in (i + 1)..n {
            let coupling = problem.coupling(i, j);
            if coupling == 0.0 {
                continue;
            }
            others.clear();
            fi.clear();
            fj.clear();
            fp.clear();
            fm.clear();
            si.clear();
            sj.clear();
            sp.clear();
            sm.clear();
            for l in 0..n {
                if l == i || l == j {
                    continue;
                }
                let tli = params.theta(l, i);
                let tlj = params.theta(l, j);
                others.push(l);
                fi.push(tli.cos());
                fj.push(tlj.cos());
                fp.push((tli + tlj).cos());
                fm.push((tli - tlj).cos());
                si.push(tli.sin());
                sj.push(tlj.sin());
                sp.push((tli + tlj).sin());
                sm.push((tli - tlj).sin());
            }
            let loo_i = LooProduct::from_iter(fi.iter().copied());
            let loo_j = LooProduct::from_iter(fj.iter().copied());
            let loo_p = LooProduct::from_iter(fp.iter().copied());
            let loo_m = LooProduct::from_iter(fm.iter().copied());
            let (pi, pj, pp, pm) = (loo_i.full(), loo_j.full(), loo_p.full(), loo_m.full());

            let tij = params.theta(i, j);
            let (sij, cij) = (tij.sin(), tij.cos());
            let sum_th = params.theta_lin[i] + params.theta_lin[j];
            let dif_th = params.theta_lin[i] - params.theta_lin[j];
            let (c_sum, s_sum) = (sum_th.cos(), sum_th.sin());
            let (c_dif, s_dif) = (dif_th.cos(), dif_th.sin());
            let bracket = c_sum * pp - c_dif * pm;

            // d/d phi
            g[phi_slot(n, i)] += coupling
                * (-sin_phi[i] * sin_phi[j] * cos_th[j] * sij * pj
                    + cos_phi[i] * cos_phi[j] * cos_th[i] * sij * pi
                    - 0.5 * cos_phi[i] * sin_phi[j] * bracket);
            g[phi_slot(n, j)] += coupling
                * (cos_phi[i] * cos_phi[j] * cos_th[j] * sij * pj
                    - sin_phi[i] * sin_phi[j] * cos_th[i] * sij * pi
                    - 0.5 * sin_phi[i] * cos_phi[j] * bracket);

            // d/d theta_lin
            g[theta_lin_slot(n, i)] += coupling
                * (-sin_phi[i] * cos_phi[j] * sin_th[i] * sij * pi
                    - 0.5 * sin_phi[i] * sin_phi[j] * (-s_sum * pp + s_dif * pm));
            g[theta_lin_slot(n, j)] += coupling
                * (-cos_phi[i] * sin_phi[j] * sin_th[j] * sij * pj
                    - 0.5 * sin_phi[i] * sin_phi[j] * (-s_sum * pp - s_dif * pm));

            // d/d theta_ij
            g[theta_quad_slot(n, i, j)] += coupling
                * cij
                * (cos_phi[i] * sin_phi[j] * cos_th[j] * pj
                    + sin_phi[i] * cos_phi[j] * cos_th[i] * pi);

            // d/d theta_li and theta_lj for every spectator l
            let coef_j = coupling * cos_phi[i] * sin_phi[j] * cos_th[j] * sij;
            let coef_i = coupling * sin_phi[i] * cos_phi[j] * cos_th[i] * sij;
            let coef_d = -0.5 * coupling * sin_phi[i] * sin_phi[j];
            for (k, &l) in others.iter().enumerate() {
                let pp_wo = loo_p.without(fp[k]);
                let pm_wo = loo_m.without(fm[k]);
                let d_quad = coef_d * (c_sum * (-sp[k]) * pp_wo - c_dif * (-sm[k]) * pm_wo);
                g[theta_quad_slot(n, l.min(i), l.max(i))] +=
                    coef_i * (-si[k]) * loo_i.without(fi[k]) + d_quad;
                let d_quad_j = coef_d * (c_sum * (-sp[k]) * pp_wo - c_dif * sm[k] * pm_wo);
                g[theta_quad_slot(n, l.min(j), l.max(j))] +=
                    coef_j * (-sj[k]) * loo_j.without(fj[k]) + d_quad_j;
            }
        }
    }
    Ok(g)
}

/// Gram matrix of the ansatz tangent vectors, `A_uv = Re <d_u psi | d_v psi>`,
/// in the global flat parameter ordering.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    n: usize,
    matrix: DMatrix<f64>,
}

impl GramMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    /// Matrix row of a given parameter, same convention as the flat layout.
    pub fn row_of_phi(&self, i: usize) -> usize {
        phi_slot(self.n, i)
    }

    pub fn row_of_theta_lin(&self, i: usize) -> usize {
        theta_lin_slot(self.n, i)
    }

    pub fn row_of_theta_quad(&self, i: usize, j: usize) -> usize {
        theta_quad_slot(self.n, i, j)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Assembles all Gram blocks. The block over diagonal-angle directions is
/// exactly `I/4`; the remaining blocks are low-weight X-type expectations
/// with closed forms.
pub fn gram(params: &IqpParams) -> GramMatrix {
    let n = params.n_qubits();
    let dim = param_dim(n);
    let mut m = DMatrix::<f64>::zeros(dim, dim);

    // theta-theta block: identity / 4 over linear and pair rows alike.
    for r in n..dim {
        m[(r, r)] = 0.25;
    }

    // phi-phi block.
    for k in 0..n {
        m[(k, k)] = 0.25;
    }
    for k in 0..n {
        for q in (k + 1)..n {
            let mut val = 0.0;
            for s in [1.0, -1.0] {
                let mut prod = (params.theta_lin[k] + s * params.theta_lin[q]).cos();
                for l in 0..n {
                    if l != k && l != q {
                        prod *= (params.theta(l, k) + s * params.theta(l, q)).cos();
                    }
                }
                val += prod;
            }
            val *= 0.125;
            m[(k, q)] = val;
            m[(q, k)] = val;
        }
    }

    // theta-phi blocks: per column k, reuse the product of all coupling
    // cosines that touch k.
    for k in 0..n {
        let loo =
            LooProduct::from_iter((0..n).filter(|&l| l != k).map(|l| params.theta(l, k).cos()));
        let sin_k = params.theta_lin[k].sin();
        let cos_k = params.theta_lin[k].cos();
        for i in 0..n {
            if i == k {
                continue;
            }
            let tik = params.theta(i, k);
            let v = -0.25 * sin_k * tik.sin() * loo.without(tik.cos());
            let row = theta_lin_slot(n, i);
            m[(row, k)] = v;
            m[(k, row)] = v;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if i == k || j == k {
                    continue;
                }
                let tik = params.theta(i, k);
                let tjk = params.theta(j, k);
                let v = -0.25
                    * cos_k
                    * tik.sin()
                    * tjk.sin()
                    * loo.without2(tik.cos(), tjk.cos());
                let row = theta_quad_slot(n, i, j);
                m[(row, k)] = v;
                m[(k, row)] = v;
            }
        }
    }

    GramMatrix { n, matrix: m }
}

/// Angle slots of the 4-qubit X-basis ansatz, in the order
/// `theta_0..theta_3, theta_01, theta_02, theta_03, theta_12, theta_13,
/// theta_23`.
pub const XBASIS_ARITY: usize = 10;

// <Z0 Z1> in the X-basis ansatz is a sum of four products over the six
// angles that anticommute with Z0 Z1 (slots 0, 1, 5, 6, 7, 8); each entry
// flags which factors are sines.
const ZZ01_SLOTS: [usize; 6] = [0, 1, 5, 6, 7, 8];
const ZZ01_TERMS: [[bool; 6]; 4] = [
    [false, false, false, false, false, false],
    [true, true, false, true, false, true],
    [true, true, true, false, true, false],
    [false, false, true, true, true, true],
];

/// `<Z0 Z1>` in the 4-qubit X-basis ansatz
/// `exp(-i/2 [sum theta_i X_i + sum theta_ij X_i X_j])|0>`, evaluated from
/// its four-product closed form. Cyclic relabelings of qubits 1, 2, 3 give
/// the other correlators of the star Hamiltonian.
pub fn counterexample_zz(angles: &[f64]) -> Result<f64> {
    if angles.len() != XBASIS_ARITY {
        return Err(Error::DimensionMismatch(format!(
            "expected {XBASIS_ARITY} angles, got {}",
            angles.len()
        )));
    }
    let mut total = 0.0;
    for term in &ZZ01_TERMS {
        let mut prod = 1.0;
        for (slot, &is_sin) in ZZ01_SLOTS.iter().zip(term) {
            prod *= q_fn(is_sin, angles[*slot]);
        }
        total += prod;
    }
    Ok(total)
}

/// Exact gradient of [`counterexample_zz`] with respect to all ten angles.
pub(crate) fn counterexample_zz_grad(angles: &[f64]) -> [f64; XBASIS_ARITY] {
    let mut g = [0.0; XBASIS_ARITY];
    for term in &ZZ01_TERMS {
        for (dk, &dslot) in ZZ01_SLOTS.iter().enumerate() {
            let mut prod = 1.0;
            for (k, (slot, &is_sin)) in ZZ01_SLOTS.iter().zip(term).enumerate() {
                if k == dk {
                    // cos -> -sin, sin -> cos
                    prod *= if is_sin { angles[*slot].cos() } else { -angles[*slot].sin() };
                } else {
                    prod *= q_fn(is_sin, angles[*slot]);
                }
            }
            g[dslot] += prod;
        }
    }
    g
}
