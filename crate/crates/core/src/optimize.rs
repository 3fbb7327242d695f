//! QAOA warm start, descent and imaginary-time flows on the ansatz manifold,
//! plateau handling and circuit selection.

mod bfgs;
mod counterexample;
mod ode;

pub use counterexample::{
    critical_line_angles, star_energy, star_gradient, star_hessian, verify_counterexample,
    verify_critical_line, CounterexampleReport, CriticalPointCheck, THETA2_EXCLUSION_RADIUS,
};

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analytic::{self, param_dim, phi_slot, theta_lin_slot, theta_quad_slot, IqpParams};
use crate::error::{Error, Result};
use crate::ising::IsingProblem;
use ode::{Dopri5, StepState};

/// 1-layer QAOA angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gamma: f64,
    pub beta: f64,
}

/// Maps a QAOA point onto the ansatz manifold: `theta_i = 2 gamma h_i`,
/// `theta_ij = 2 gamma J_ij`, `phi_i = -2 beta`. The resulting state equals
/// the 1-layer QAOA state exactly.
pub fn embed_qaoa(problem: &IsingProblem, q: QaoaParams) -> IqpParams {
    let n = problem.n_qubits();
    let mut params = IqpParams::zeros(n);
    for i in 0..n {
        params.phi[i] = -2.0 * q.beta;
        params.theta_lin[i] = 2.0 * q.gamma * problem.fields()[i];
    }
    for i in 0..n {
        for j in (i + 1)..n {
            params.set_theta(i, j, 2.0 * q.gamma * problem.coupling(i, j));
        }
    }
    params
}

/// Ansatz energy restricted to the QAOA submanifold, with its exact
/// two-component gradient (chain rule through the embedding).
pub fn qaoa_objective(problem: &IsingProblem, q: QaoaParams) -> (f64, [f64; 2]) {
    let n = problem.n_qubits();
    let params = embed_qaoa(problem, q);
    let e = analytic::energy(problem, &params).expect("embedded dimensions match");
    let g = analytic::gradient(problem, &params).expect("embedded dimensions match");
    let mut d_gamma = 0.0;
    let mut d_beta = 0.0;
    for i in 0..n {
        d_gamma += g[theta_lin_slot(n, i)] * 2.0 * problem.fields()[i];
        d_beta += g[phi_slot(n, i)] * -2.0;
        for j in (i + 1)..n {
            d_gamma += g[theta_quad_slot(n, i, j)] * 2.0 * problem.coupling(i, j);
        }
    }
    (e, [d_gamma, d_beta])
}

/// Finds a locally optimal QAOA point by quasi-Newton descent from the best
/// of an 8x8 grid of starts over `gamma in (0, pi]`, `beta in (-pi/2, pi/2]`.
pub fn optimize_qaoa(problem: &IsingProblem) -> QaoaParams {
    let mut best = QaoaParams { gamma: 0.0, beta: 0.0 };
    let mut best_e = f64::INFINITY;
    for gi in 0..8 {
        for bi in 0..8 {
            let start = [
                (gi + 1) as f64 * PI / 8.0,
                -FRAC_PI_2 + (bi + 1) as f64 * PI / 8.0,
            ];
            let out = bfgs::minimize(
                |x| {
                    let (e, g) = qaoa_objective(problem, QaoaParams { gamma: x[0], beta: x[1] });
                    (e, g.to_vec())
                },
                &start,
                1e-10,
                200,
            );
            if out.value < best_e {
                best_e = out.value;
                best = QaoaParams { gamma: out.x[0], beta: out.x[1] };
            }
        }
    }
    best
}

/// Shot budget `round(2^(0.32 n))` clamped to `[4, 1208]`.
pub fn shots_schedule(n: usize) -> u64 {
    let raw = (2f64).powf(0.32 * n as f64).round();
    (raw as u64).clamp(4, 1208)
}

/// Flow regime: steepest descent (`A = I`) or imaginary time evolution with
/// the tangent-space metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMode {
    PlainGradient,
    Varqite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub mode: FlowMode,
    pub tau_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Flow stops once the gradient norm drops below this.
    pub grad_tol: f64,
    /// Ridge added to the metric before solving.
    pub gram_regularization: f64,
    /// Flow stops once the regularized metric condition number exceeds this.
    pub gram_condition_max: f64,
    /// Trajectory recording interval in flow time; non-positive records
    /// every accepted step.
    pub record_stride: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            mode: FlowMode::PlainGradient,
            tau_max: 10.0,
            rtol: 1e-6,
            atol: 1e-9,
            grad_tol: 1e-6,
            gram_regularization: 1e-8,
            gram_condition_max: 1e10,
            record_stride: 0.05,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_max > 0.0) || !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::InvalidInput(
                "tau_max, rtol and atol must be positive".into(),
            ));
        }
        if self.grad_tol < 0.0 || self.gram_regularization < 0.0 {
            return Err(Error::InvalidInput(
                "grad_tol and gram_regularization must be non-negative".into(),
            ));
        }
        if !(self.gram_condition_max > 0.0) {
            return Err(Error::InvalidInput("gram_condition_max must be positive".into()));
        }
        Ok(())
    }
}

/// Why a flow stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TauMax,
    GradientConverged,
    GramIllConditioned,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Termination::TauMax => "tau_max",
            Termination::GradientConverged => "gradient_converged",
            Termination::GramIllConditioned => "gram_ill_conditioned",
        };
        f.write_str(s)
    }
}

/// One recorded flow state.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub tau: f64,
    pub params: IqpParams,
    pub energy: f64,
    pub grad_norm: f64,
    /// Condition number of the regularized metric; absent in plain mode.
    pub gram_condition: Option<f64>,
    pub step_accepted: bool,
}

/// Time-ordered flow record. `tau` is strictly increasing and the energy is
/// non-increasing up to integration tolerance.
#[derive(Debug, Clone)]
pub struct Trajectory {
    records: Vec<TrajectoryRecord>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn records(&self) -> &[TrajectoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> &TrajectoryRecord {
        self.records.last().expect("trajectory holds at least the start")
    }

    /// Largest normalized energy increase `(E_{k+1} - E_k) / (1 + |E_k|)`
    /// between consecutive records; descent flows keep this below ~1e-8.
    pub fn max_normalized_energy_increase(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| (w[1].energy - w[0].energy) / (1.0 + w[0].energy.abs()))
            .fold(0.0, f64::max)
    }
}

/// Anything the flow can descend on: an energy with an exact gradient and,
/// for imaginary-time mode, a tangent-space metric.
pub trait EnergyModel {
    fn dim(&self) -> usize;
    fn energy(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64]) -> Vec<f64>;
    fn metric(&self, _y: &[f64]) -> Option<DMatrix<f64>> {
        None
    }
}

/// The ansatz landscape of an Ising problem in flat parameter coordinates.
pub struct IqpEnergyModel<'a> {
    problem: &'a IsingProblem,
}

impl<'a> IqpEnergyModel<'a> {
    pub fn new(problem: &'a IsingProblem) -> Self {
        Self { problem }
    }

    fn unflatten(&self, y: &[f64]) -> IqpParams {
        IqpParams::from_flat(self.problem.n_qubits(), y).expect("flat layout fixed by dim()")
    }
}

impl EnergyModel for IqpEnergyModel<'_> {
    fn dim(&self) -> usize {
        param_dim(self.problem.n_qubits())
    }

    fn energy(&self, y: &[f64]) -> f64 {
        analytic::energy(self.problem, &self.unflatten(y)).expect("dimensions match")
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        analytic::gradient(self.problem, &self.unflatten(y)).expect("dimensions match")
    }

    fn metric(&self, y: &[f64]) -> Option<DMatrix<f64>> {
        Some(analytic::gram(&self.unflatten(y)).into_matrix())
    }
}

/// Raw flow record in flat coordinates, for models other than the IQP
/// manifold.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub tau: f64,
    pub y: Vec<f64>,
    pub energy: f64,
    pub grad_norm: f64,
    pub gram_condition: Option<f64>,
    pub step_accepted: bool,
}

#[derive(Debug, Clone)]
pub struct RawTrajectory {
    pub records: Vec<RawRecord>,
    pub termination: Termination,
}

/// Failure of a flow on a generic model.
#[derive(Debug)]
pub enum ModelFlowError {
    Invalid(Error),
    /// Step-size underflow; carries everything recorded so far.
    StepUnderflow { tau: f64, partial: RawTrajectory },
}

struct RhsSingular;

/// Condition number estimate of a symmetric positive-definite matrix via
/// deterministic power iteration (largest eigenvalue) and inverse iteration
/// through an existing Cholesky factor (smallest).
fn spd_condition_estimate(a: &DMatrix<f64>, chol: &Cholesky<f64, nalgebra::Dyn>) -> f64 {
    let n = a.nrows();
    let start = DVector::from_element(n, 1.0 / (n as f64).sqrt());

    let mut v = start.clone();
    for _ in 0..40 {
        let w = a * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 1.0;
        }
        v = w / norm;
    }
    let lmax = v.dot(&(a * &v));

    let mut u = start;
    for _ in 0..40 {
        let w = chol.solve(&u);
        let norm = w.norm();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        u = w / norm;
    }
    let lmin = u.dot(&(a * &u));
    if lmin <= 0.0 {
        f64::INFINITY
    } else {
        lmax / lmin
    }
}

struct FlowDriver<'m, M: EnergyModel> {
    model: &'m M,
    cfg: FlowConfig,
}

struct FlowDiag {
    energy: f64,
    grad_norm: f64,
    cond: Option<f64>,
}

impl<M: EnergyModel> FlowDriver<'_, M> {
    fn rhs(&self, y: &[f64]) -> std::result::Result<Vec<f64>, RhsSingular> {
        let g = self.model.gradient(y);
        match self.cfg.mode {
            FlowMode::PlainGradient => Ok(g.iter().map(|v| -0.5 * v).collect()),
            FlowMode::Varqite => {
                let a = self.regularized_metric(y)?;
                let chol = Cholesky::new(a).ok_or(RhsSingular)?;
                let rhs = DVector::from_iterator(g.len(), g.iter().map(|v| -0.5 * v));
                Ok(chol.solve(&rhs).as_slice().to_vec())
            }
        }
    }

    fn regularized_metric(&self, y: &[f64]) -> std::result::Result<DMatrix<f64>, RhsSingular> {
        let mut a = self.model.metric(y).ok_or(RhsSingular)?;
        for i in 0..a.nrows() {
            a[(i, i)] += self.cfg.gram_regularization;
        }
        Ok(a)
    }

    fn diagnostics(&self, y: &[f64]) -> FlowDiag {
        let energy = self.model.energy(y);
        let g = self.model.gradient(y);
        let grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cond = match self.cfg.mode {
            FlowMode::PlainGradient => None,
            FlowMode::Varqite => Some(match self.regularized_metric(y) {
                Ok(a) => match Cholesky::new(a.clone()) {
                    Some(chol) => spd_condition_estimate(&a, &chol),
                    None => f64::INFINITY,
                },
                Err(_) => f64::INFINITY,
            }),
        };
        FlowDiag { energy, grad_norm, cond }
    }
}

/// Integrates the flow `dtheta/dtau = -1/2 grad E` (plain) or
/// `(A + lambda I) dtheta/dtau = -1/2 grad E` (VarQITE) with an adaptive
/// Dormand-Prince 5(4) pair, on an arbitrary [`EnergyModel`].
///
/// Records are taken every `record_stride` of flow time plus both endpoints.
/// The flow stops at `tau_max`, when the gradient norm falls below
/// `grad_tol`, or when the regularized metric condition estimate exceeds
/// `gram_condition_max`.
pub fn flow_model<M: EnergyModel>(
    model: &M,
    y0: &[f64],
    cfg: &FlowConfig,
) -> std::result::Result<RawTrajectory, ModelFlowError> {
    cfg.validate().map_err(ModelFlowError::Invalid)?;
    if y0.len() != model.dim() {
        return Err(ModelFlowError::Invalid(Error::DimensionMismatch(format!(
            "start vector has {} entries, model expects {}",
            y0.len(),
            model.dim()
        ))));
    }
    if cfg.mode == FlowMode::Varqite && model.metric(y0).is_none() {
        return Err(ModelFlowError::Invalid(Error::InvalidInput(
            "model provides no metric for VarQITE mode".into(),
        )));
    }

    let driver = FlowDriver { model, cfg: *cfg };
    let mut records: Vec<RawRecord> = Vec::new();
    let mut record =
        |records: &mut Vec<RawRecord>, tau: f64, y: &[f64], d: &FlowDiag| {
            records.push(RawRecord {
                tau,
                y: y.to_vec(),
                energy: d.energy,
                grad_norm: d.grad_norm,
                gram_condition: d.cond,
                step_accepted: true,
            });
        };

    let diag0 = driver.diagnostics(y0);
    let cond0 = diag0.cond.unwrap_or(0.0);
    record(&mut records, 0.0, y0, &diag0);
    if diag0.grad_norm < cfg.grad_tol {
        return Ok(RawTrajectory { records, termination: Termination::GradientConverged });
    }
    if cond0 > cfg.gram_condition_max {
        return Ok(RawTrajectory { records, termination: Termination::GramIllConditioned });
    }

    let stepper = Dopri5 { rtol: cfg.rtol, atol: cfg.atol };
    let f0 = match driver.rhs(y0) {
        Ok(f0) => f0,
        Err(RhsSingular) => {
            return Ok(RawTrajectory { records, termination: Termination::GramIllConditioned })
        }
    };
    let h0 = stepper
        .initial_step(y0, &f0, cfg.tau_max, |y| driver.rhs(y))
        .unwrap_or(cfg.tau_max * 1e-3);
    let mut st = StepState { t: 0.0, y: y0.to_vec(), f: f0, h: h0 };

    let mut last_recorded = 0.0;
    let termination;
    const MAX_STEPS: usize = 5_000_000;
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(ModelFlowError::StepUnderflow {
                tau: st.t,
                partial: RawTrajectory { records, termination: Termination::TauMax },
            });
        }
        st.h = st.h.min(cfg.tau_max - st.t);
        match stepper.try_step(&mut st, |y| driver.rhs(y)) {
            Err(RhsSingular) => {
                termination = Termination::GramIllConditioned;
                break;
            }
            Ok(false) => {
                let floor = 1e-14 * st.t.abs().max(1.0);
                if st.h < floor {
                    return Err(ModelFlowError::StepUnderflow {
                        tau: st.t,
                        partial: RawTrajectory { records, termination: Termination::TauMax },
                    });
                }
            }
            Ok(true) => {
                let diag = driver.diagnostics(&st.y);
                let converged = diag.grad_norm < cfg.grad_tol;
                let ill = diag.cond.unwrap_or(0.0) > cfg.gram_condition_max;
                let done = st.t >= cfg.tau_max * (1.0 - 1e-12);
                let due = cfg.record_stride <= 0.0
                    || st.t - last_recorded >= cfg.record_stride * (1.0 - 1e-9);
                if due || converged || ill || done {
                    record(&mut records, st.t, &st.y, &diag);
                    last_recorded = st.t;
                }
                if converged {
                    termination = Termination::GradientConverged;
                    break;
                }
                if ill {
                    termination = Termination::GramIllConditioned;
                    break;
                }
                if done {
                    termination = Termination::TauMax;
                    break;
                }
            }
        }
    }

    // Both endpoints are always present.
    if records.last().map(|r| r.tau) != Some(st.t) {
        let diag = driver.diagnostics(&st.y);
        record(&mut records, st.t, &st.y, &diag);
    }
    Ok(RawTrajectory { records, termination })
}

/// Runs [`flow_model`] on the ansatz landscape of `problem` and returns
/// parameter-typed records. Step-size underflow yields
/// [`Error::IntegrationFailure`] carrying the partial trajectory.
pub fn flow(problem: &IsingProblem, start: &IqpParams, cfg: &FlowConfig) -> Result<Trajectory> {
    if problem.n_qubits() != start.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "problem on {} qubits, start on {}",
            problem.n_qubits(),
            start.n_qubits()
        )));
    }
    let model = IqpEnergyModel::new(problem);
    let n = problem.n_qubits();
    match flow_model(&model, &start.to_flat(), cfg) {
        Ok(raw) => Ok(trajectory_from_raw(n, raw)),
        Err(ModelFlowError::Invalid(e)) => Err(e),
        Err(ModelFlowError::StepUnderflow { tau, partial }) => Err(Error::IntegrationFailure {
            tau,
            partial: Box::new(trajectory_from_raw(n, partial)),
        }),
    }
}

fn trajectory_from_raw(n: usize, raw: RawTrajectory) -> Trajectory {
    Trajectory {
        records: raw
            .records
            .into_iter()
            .map(|r| TrajectoryRecord {
                tau: r.tau,
                params: IqpParams::from_flat(n, &r.y).expect("record layout fixed"),
                energy: r.energy,
                grad_norm: r.grad_norm,
                gram_condition: r.gram_condition,
                step_accepted: r.step_accepted,
            })
            .collect(),
        termination: raw.termination,
    }
}

/// Default relative flatness threshold for plateau detection.
pub const DEFAULT_PLATEAU_EPS: f64 = 1e-3;
/// Default minimum plateau span as a fraction of the trajectory span.
pub const DEFAULT_PLATEAU_MIN_SPAN: f64 = 0.05;

/// Index of the middle of the first sufficiently long flat window of the
/// energy profile, with default thresholds.
pub fn detect_plateau(traj: &Trajectory) -> usize {
    detect_plateau_with(traj, DEFAULT_PLATEAU_EPS, DEFAULT_PLATEAU_MIN_SPAN)
}

/// An interval is flat when `|dE/dtau| < eps * (1 + |E|)`; a plateau is a
/// maximal run of flat intervals spanning at least `min_span_frac` of the
/// total flow time. Falls back to the final index when nothing qualifies.
pub fn detect_plateau_with(traj: &Trajectory, eps: f64, min_span_frac: f64) -> usize {
    let recs = traj.records();
    let m = recs.len();
    if m < 3 {
        return m.saturating_sub(1);
    }
    let total_span = recs[m - 1].tau - recs[0].tau;
    let min_span = min_span_frac * total_span;
    let flat: Vec<bool> = (0..m - 1)
        .map(|i| {
            let dt = recs[i + 1].tau - recs[i].tau;
            let de = (recs[i + 1].energy - recs[i].energy).abs();
            dt > 0.0 && de / dt < eps * (1.0 + recs[i].energy.abs())
        })
        .collect();
    let mut i = 0;
    while i < flat.len() {
        if flat[i] {
            let start = i;
            while i < flat.len() && flat[i] {
                i += 1;
            }
            let end = i; // run covers records start..=end
            if recs[end].tau - recs[start].tau >= min_span {
                return (start + end) / 2;
            }
        } else {
            i += 1;
        }
    }
    m - 1
}

/// Default pruning tolerance: pair angles within this of a multiple of pi
/// compile to single-qubit gates.
pub const DEFAULT_ANGLE_TOL: f64 = 0.05;

/// Four circuits picked along a trajectory: the warm start, two equidistant
/// intermediates and the last step whose non-prunable pair-angle graph is
/// still connected.
#[derive(Debug, Clone, Serialize)]
pub struct CircuitSelection {
    pub indices: [usize; 4],
    /// Non-prunable pair-gate count relative to the warm start, capped at 1.
    pub entangling_fraction: [f64; 4],
    pub connected: [bool; 4],
    /// Set when no step beyond the start has a connected graph and the
    /// selection collapsed onto the warm start.
    pub degenerate: bool,
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    fn components(&mut self) -> usize {
        (0..self.parent.len()).map(|i| self.find(i)).collect::<std::collections::BTreeSet<_>>().len()
    }
}

/// Number of non-prunable pair gates and whether they connect all qubits.
pub fn entangling_stats(params: &IqpParams, angle_tol: f64) -> (usize, bool) {
    let n = params.n_qubits();
    let mut uf = UnionFind::new(n);
    let mut count = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            let th = params.theta(i, j);
            let dist = th - PI * (th / PI).round();
            if dist.abs() > angle_tol {
                count += 1;
                uf.union(i, j);
            }
        }
    }
    (count, n <= 1 || uf.components() == 1)
}

/// Picks the four circuits: index 0, the last connected index `L`, and
/// `floor(L/3)`, `floor(2L/3)` in between.
pub fn select_circuits(traj: &Trajectory, angle_tol: f64) -> CircuitSelection {
    let recs = traj.records();
    let stats: Vec<(usize, bool)> =
        recs.iter().map(|r| entangling_stats(&r.params, angle_tol)).collect();
    let last_connected = (0..recs.len()).rev().find(|&t| stats[t].1);

    let (indices, degenerate) = match last_connected {
        Some(l4) if l4 > 0 => ([0, l4 / 3, 2 * l4 / 3, l4], false),
        _ => ([0, 0, 0, 0], true),
    };
    let denom = stats[0].0.max(1) as f64;
    let entangling_fraction =
        indices.map(|t| (stats[t].0 as f64 / denom).min(1.0));
    let connected = indices.map(|t| stats[t].1);
    CircuitSelection { indices, entangling_fraction, connected, degenerate }
}

/// Default qubit cap for finite-difference Hessians.
pub const DEFAULT_HESSIAN_CAP: usize = 8;

/// Hessian of the ansatz energy by central differences of the exact
/// gradient (step 1e-5), symmetrized.
pub fn hessian(problem: &IsingProblem, params: &IqpParams) -> Result<DMatrix<f64>> {
    hessian_with_cap(problem, params, DEFAULT_HESSIAN_CAP)
}

pub fn hessian_with_cap(
    problem: &IsingProblem,
    params: &IqpParams,
    cap: usize,
) -> Result<DMatrix<f64>> {
    if problem.n_qubits() > cap {
        return Err(Error::ResourceLimit(format!(
            "finite-difference Hessian on {} qubits exceeds cap {cap}",
            problem.n_qubits()
        )));
    }
    const STEP: f64 = 1e-5;
    let dim = params.param_count();
    let flat = params.to_flat();
    let n = params.n_qubits();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for mu in 0..dim {
        let mut plus = flat.clone();
        let mut minus = flat.clone();
        plus[mu] += STEP;
        minus[mu] -= STEP;
        let gp = analytic::gradient(problem, &IqpParams::from_flat(n, &plus)?)?;
        let gm = analytic::gradient(problem, &IqpParams::from_flat(n, &minus)?)?;
        for nu in 0..dim {
            m[(mu, nu)] = (gp[nu] - gm[nu]) / (2.0 * STEP);
        }
    }
    let mt = m.transpose();
    Ok((m + mt) * 0.5)
}
