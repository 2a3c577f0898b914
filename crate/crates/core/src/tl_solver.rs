//! Trace-lasso regularized L1-norm graph-cut solver.
//!
//! Directions are extracted greedily. For one direction the solver maximizes
//!
//! ```text
//! J(v) = ‖vᵀF‖₁ - ‖vᵀG‖₁ - δ‖Xᵀ Diag(v)‖_*      subject to vᵀv = 1
//! ```
//!
//! by replacing the trace norm with its variational bound
//! `½ (vᵀ Diag(diag(X S⁻¹ Xᵀ)) v + tr S)` at `S = (Xᵀ Diag(v₀)² X)^{1/2}` and
//! iterating the reweighted update `v ← (δ D̂ + M)⁻¹ N`, renormalized, where
//! `N = Σ qᵢ fᵢ` uses the between-class signs and `M = Σ g gᵀ / |vᵀg|`.
//! After each direction the data and dispersion columns are deflated.
//!
//! The update is not an exact ascent step on the sphere. With
//! [`SolverConfig::safeguard`] enabled (the default), a proposal that lowers
//! the surrogate objective is replaced by the best point found by halving
//! along the chord towards it, or rejected, so the surrogate never decreases.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dispersion::{self, DispersionSet};
use crate::error::{Error, Result};
use crate::hsi_io::LabeledDataset;
use crate::linalg;
use crate::rng;

const BACKTRACK_HALVINGS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Trace-lasso weight δ.
    pub delta: f64,
    pub target_dim: usize,
    /// Convergence threshold on ‖v(t+1) - v(t)‖₂.
    pub tol: f64,
    pub max_inner_iters: usize,
    /// Relative eigenvalue ridge used when inverting S.
    pub eig_floor: f64,
    /// Lower bound on |vᵀg| in the reweighting.
    pub z_floor: f64,
    pub seed: u64,
    /// Recompute S⁻¹ at every inner iteration instead of once per direction.
    pub refresh_s: bool,
    /// Reject or shorten proposals that decrease the surrogate objective.
    pub safeguard: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: 0.4,
            target_dim: 1,
            tol: 1e-6,
            max_inner_iters: 50,
            eig_floor: 1e-10,
            z_floor: 1e-8,
            seed: 0,
            refresh_s: false,
            safeguard: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be finite and >= 0, got {}", self.delta));
        }
        if self.target_dim == 0 || self.target_dim > dim {
            return bad(format!(
                "target_dim must be in 1..={dim}, got {}",
                self.target_dim
            ));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_inner_iters == 0 {
            return bad("max_inner_iters must be >= 1".into());
        }
        if !(self.eig_floor >= 0.0) {
            return bad(format!("eig_floor must be >= 0, got {}", self.eig_floor));
        }
        if !(self.z_floor > 0.0) {
            return bad(format!("z_floor must be > 0, got {}", self.z_floor));
        }
        Ok(())
    }
}

/// Inverse square root of `Xᵀ Diag(v)² X` and the trace of its square root.
#[derive(Debug, Clone, PartialEq)]
pub struct SInverse {
    pub matrix: DMatrix<f64>,
    pub trace_s: f64,
}

/// `Σ uᵢuᵢᵀ / √(sᵢ + ridge)` over the eigenpairs of `A = Xᵀ Diag(v)² X`
/// with `ridge = eig_floor · max(max sᵢ, 1)`. With `eig_floor = 0`, numerically
/// zero eigenvalues are dropped (pseudo-inverse square root).
pub fn s_inverse(x: &DMatrix<f64>, v: &DVector<f64>, eig_floor: f64) -> SInverse {
    let n = x.ncols();
    let mut xv = x.clone();
    for (mut row, &w) in xv.row_iter_mut().zip(v.iter()) {
        row *= w;
    }
    let a = xv.transpose() * &xv;
    let (s, u) = linalg::sym_eigen_desc(&a);
    let smax = s.iter().copied().fold(0.0f64, f64::max);
    let ridge = eig_floor * smax.max(1.0);
    let cutoff = if eig_floor == 0.0 {
        smax * n as f64 * f64::EPSILON
    } else {
        0.0
    };
    let mut matrix = DMatrix::zeros(n, n);
    let mut trace_s = 0.0;
    for i in 0..n {
        let si = s[i].max(0.0);
        trace_s += si.sqrt();
        let denom = si + ridge;
        if denom <= cutoff || denom <= 0.0 {
            continue;
        }
        let ui = u.column(i);
        matrix.ger(1.0 / denom.sqrt(), &ui, &ui, 1.0);
    }
    matrix = 0.5 * (&matrix + matrix.transpose());
    SInverse { matrix, trace_s }
}

/// `diag(X S⁻¹ Xᵀ)`.
pub fn weighted_diag(x: &DMatrix<f64>, s_inv: &SInverse) -> DVector<f64> {
    let xs = x * &s_inv.matrix;
    DVector::from_iterator(
        x.nrows(),
        (0..x.nrows()).map(|a| xs.row(a).dot(&x.row(a))),
    )
}

/// Sum of singular values.
pub fn trace_norm(j: &DMatrix<f64>) -> f64 {
    if j.is_empty() {
        return 0.0;
    }
    j.singular_values().sum()
}

/// `Diag(v) X`, whose singular values are those of `Xᵀ Diag(v)`.
fn scaled_rows(x: &DMatrix<f64>, v: &DVector<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for (mut row, &w) in out.row_iter_mut().zip(v.iter()) {
        row *= w;
    }
    out
}

/// The regularized L1 graph-cut objective
/// `‖vᵀF‖₁ - ‖vᵀG‖₁ - δ‖Xᵀ Diag(v)‖_*`.
pub fn objective(v: &DVector<f64>, disp: &DispersionSet, x: &DMatrix<f64>, delta: f64) -> f64 {
    let (f, g) = disp.l1_norms(v);
    let penalty = if delta == 0.0 {
        0.0
    } else {
        delta * trace_norm(&scaled_rows(x, v))
    };
    f - g - penalty
}

/// The objective with the trace norm replaced by its bound at a fixed S:
/// `‖vᵀF‖₁ - ‖vᵀG‖₁ - δ/2 (vᵀ D̂ v + tr S)`.
pub fn surrogate_objective(
    v: &DVector<f64>,
    disp: &DispersionSet,
    d_hat: &DVector<f64>,
    trace_s: f64,
    delta: f64,
) -> f64 {
    let (f, g) = disp.l1_norms(v);
    let mut quad = 0.0;
    for (w, d) in v.iter().zip(d_hat.iter()) {
        quad += d * w * w;
    }
    f - g - 0.5 * delta * (quad + trace_s)
}

/// Sign patterns `q` (between-class columns) and `r` (within-class
/// columns): `+1` where `vᵀc > 0`, `-1` otherwise.
pub fn sign_vectors(v: &DVector<f64>, disp: &DispersionSet) -> (DVector<f64>, DVector<f64>) {
    let sign = |m: &DMatrix<f64>| {
        DVector::from_iterator(
            m.ncols(),
            m.column_iter().map(|c| {
                if linalg::dot(c.as_slice(), v.as_slice()) > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }),
        )
    };
    (sign(&disp.between), sign(&disp.within))
}

/// Iterate of the inner loop together with the S⁻¹ it is evaluated against.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub v: DVector<f64>,
    pub t: usize,
    /// Surrogate objective at `v` under the current S.
    pub objective: f64,
    pub s_inv: SInverse,
    pub d_hat: DVector<f64>,
}

impl SolverState {
    pub fn new(
        x: &DMatrix<f64>,
        disp: &DispersionSet,
        v: DVector<f64>,
        cfg: &SolverConfig,
    ) -> Self {
        let s_inv = s_inverse(x, &v, cfg.eig_floor);
        let d_hat = weighted_diag(x, &s_inv);
        let objective = surrogate_objective(&v, disp, &d_hat, s_inv.trace_s, cfg.delta);
        Self {
            v,
            t: 0,
            objective,
            s_inv,
            d_hat,
        }
    }

    /// Recomputes S⁻¹ and D̂ at the current iterate.
    pub fn refresh(&mut self, x: &DMatrix<f64>, disp: &DispersionSet, cfg: &SolverConfig) {
        self.s_inv = s_inverse(x, &self.v, cfg.eig_floor);
        self.d_hat = weighted_diag(x, &self.s_inv);
        self.objective = self.surrogate(disp, &self.v, cfg.delta);
    }

    pub fn surrogate(&self, disp: &DispersionSet, v: &DVector<f64>, delta: f64) -> f64 {
        surrogate_objective(v, disp, &self.d_hat, self.s_inv.trace_s, delta)
    }
}

/// `N(t) = Σ qᵢ fᵢ`.
fn sign_sum(disp: &DispersionSet, q: &DVector<f64>) -> DVector<f64> {
    let d = disp.dim();
    let mut n = DVector::zeros(d);
    for (c, &s) in disp.between.column_iter().zip(q.iter()) {
        for a in 0..d {
            n[a] += s * c[a];
        }
    }
    n
}

/// `M(t) = Σ g gᵀ / max(|vᵀg|, z_floor)`.
fn reweighted_within(disp: &DispersionSet, v: &DVector<f64>, z_floor: f64) -> DMatrix<f64> {
    let d = disp.dim();
    let mut m = DMatrix::zeros(d, d);
    for g in disp.within.column_iter() {
        if g.iter().all(|&e| e == 0.0) {
            continue;
        }
        let z = linalg::dot(g.as_slice(), v.as_slice());
        let w = 1.0 / z.abs().max(z_floor);
        for b in 0..d {
            let gw = g[b] * w;
            for a in 0..d {
                m[(a, b)] += g[a] * gw;
            }
        }
    }
    m
}

fn project_out(u: &mut DVector<f64>, basis: &[DVector<f64>]) {
    for b in basis {
        let p = linalg::dot(b.as_slice(), u.as_slice());
        u.axpy(-p, b, 1.0);
    }
}

fn propose(
    state: &SolverState,
    disp: &DispersionSet,
    cfg: &SolverConfig,
    basis: &[DVector<f64>],
) -> Result<DVector<f64>> {
    let (q, _) = sign_vectors(&state.v, disp);
    let n = sign_sum(disp, &q);
    if n.iter().all(|&e| e == 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let mut k = reweighted_within(disp, &state.v, cfg.z_floor);
    if cfg.delta != 0.0 {
        for a in 0..k.nrows() {
            k[(a, a)] += cfg.delta * state.d_hat[a];
        }
    }
    let mut u = linalg::solve_spd(&k, &n).ok_or(Error::DegenerateDirection)?;
    project_out(&mut u, basis);
    let mut u = linalg::normalized(&u).ok_or(Error::DegenerateDirection)?;
    // J is even in v; keep the orientation of the current iterate
    if linalg::dot(u.as_slice(), state.v.as_slice()) < 0.0 {
        u.neg_mut();
    }
    Ok(u)
}

/// One reweighted update `normalize((δ D̂ + M(t))⁻¹ N(t))`, oriented to
/// agree in sign with the current iterate.
pub fn update_v(
    state: &SolverState,
    disp: &DispersionSet,
    x: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    if x.nrows() != disp.dim() || state.v.len() != disp.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} rows, dispersions {}, iterate {}",
            x.nrows(),
            disp.dim(),
            state.v.len()
        )));
    }
    propose(state, disp, cfg, &[])
}

/// Accepted next iterate: the proposal itself, a point on the chord towards
/// it, or the current iterate when no tried point keeps the surrogate from
/// decreasing.
fn safeguarded_step(
    state: &SolverState,
    disp: &DispersionSet,
    cfg: &SolverConfig,
    basis: &[DVector<f64>],
) -> Result<(DVector<f64>, bool)> {
    let u = propose(state, disp, cfg, basis)?;
    if !cfg.safeguard || state.surrogate(disp, &u, cfg.delta) >= state.objective {
        return Ok((u, false));
    }
    let step = &u - &state.v;
    let mut alpha = 1.0;
    for _ in 0..BACKTRACK_HALVINGS {
        alpha *= 0.5;
        let Some(w) = linalg::normalized(&(&state.v + alpha * &step)) else {
            continue;
        };
        if state.surrogate(disp, &w, cfg.delta) >= state.objective {
            return Ok((w, true));
        }
    }
    Ok((state.v.clone(), true))
}

/// Public single step of the inner loop as run by [`solve_direction`].
pub fn ascent_step(
    state: &SolverState,
    disp: &DispersionSet,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    safeguarded_step(state, disp, cfg, &[]).map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// ‖v(t+1) - v(t)‖ ≤ tol.
    StepTolerance,
    MaxIterations,
    /// N(t) vanished; the direction came from the fallback.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionRecord {
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Exact objective at the initial and the returned direction.
    pub objective_start: f64,
    pub objective_end: f64,
    /// Surrogate objective of every iterate, each under the S⁻¹ active for
    /// the step that produced it.
    pub surrogate_trace: Vec<f64>,
    /// `v(0), v(1), …` as visited.
    pub iterates: Vec<DVector<f64>>,
    /// Steps in which the safeguard shortened or rejected the proposal.
    pub safeguarded_steps: usize,
}

/// Runs the inner loop for one direction from the unit vector `v0`.
pub fn solve_direction(
    x: &DMatrix<f64>,
    disp: &DispersionSet,
    cfg: &SolverConfig,
    v0: &DVector<f64>,
) -> Result<(DVector<f64>, DirectionRecord)> {
    solve_direction_in(x, disp, cfg, v0, &[])
}

fn solve_direction_in(
    x: &DMatrix<f64>,
    disp: &DispersionSet,
    cfg: &SolverConfig,
    v0: &DVector<f64>,
    basis: &[DVector<f64>],
) -> Result<(DVector<f64>, DirectionRecord)> {
    if x.nrows() != disp.dim() || v0.len() != disp.dim() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} rows, dispersions {}, v0 {}",
            x.nrows(),
            disp.dim(),
            v0.len()
        )));
    }
    let n0 = linalg::norm(v0.as_slice());
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnitNorm(n0));
    }

    let mut state = SolverState::new(x, disp, v0.clone(), cfg);
    let mut record = DirectionRecord {
        iterations: 0,
        converged: false,
        stop: StopReason::MaxIterations,
        objective_start: objective(v0, disp, x, cfg.delta),
        objective_end: f64::NAN,
        surrogate_trace: vec![state.objective],
        iterates: vec![v0.clone()],
        safeguarded_steps: 0,
    };

    while state.t < cfg.max_inner_iters {
        if cfg.refresh_s && state.t > 0 {
            state.refresh(x, disp, cfg);
        }
        let (next, guarded) = safeguarded_step(&state, disp, cfg, basis)?;
        let delta_v = linalg::norm((&next - &state.v).as_slice());
        state.t += 1;
        state.objective = state.surrogate(disp, &next, cfg.delta);
        state.v = next;
        record.surrogate_trace.push(state.objective);
        record.iterates.push(state.v.clone());
        record.safeguarded_steps += guarded as usize;
        if delta_v <= cfg.tol {
            record.converged = true;
            record.stop = StopReason::StepTolerance;
            break;
        }
    }
    record.iterations = state.t;
    record.objective_end = objective(&state.v, disp, x, cfg.delta);
    Ok((state.v, record))
}

/// Learned projection: `D × d`, orthonormal columns in extraction order.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    pub matrix: DMatrix<f64>,
    /// One record per column; empty for closed-form methods.
    pub records: Vec<DirectionRecord>,
}

impl ProjectionMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix,
            records: Vec::new(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// The first `d` directions.
    pub fn truncated(&self, d: usize) -> ProjectionMatrix {
        ProjectionMatrix {
            matrix: self.matrix.columns(0, d.min(self.output_dim())).into_owned(),
            records: self.records.iter().take(d).cloned().collect(),
        }
    }
}

/// Dominant direction of the remaining between-class columns, orthogonal to
/// `basis`; used when the iteration degenerates.
fn fallback_direction(disp: &DispersionSet, basis: &[DVector<f64>]) -> DVector<f64> {
    let d = disp.dim();
    let f = &disp.between;
    let (vals, vecs) = linalg::sym_eigen_desc(&(f * f.transpose()));
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if vals[0] > 0.0 {
        candidates.push(vecs.column(0).into_owned());
    }
    // complement of the basis, for all-zero dispersions
    let mut proj = DMatrix::<f64>::identity(d, d);
    for b in basis {
        proj -= b * b.transpose();
    }
    candidates.push(linalg::sym_eigen_desc(&proj).1.column(0).into_owned());
    for mut c in candidates {
        project_out(&mut c, basis);
        if let Some(mut v) = linalg::normalized(&c) {
            linalg::orient(&mut v);
            return v;
        }
    }
    DVector::from_fn(d, |i, _| if i == 0 { 1.0 } else { 0.0 })
}

/// Greedy extraction of `cfg.target_dim` directions with deflation.
pub fn fit(train: &LabeledDataset, cfg: &SolverConfig) -> Result<ProjectionMatrix> {
    let d = train.dim();
    cfg.validate(d)?;
    let mut disp = dispersion::build_dispersions(train)?;
    let mut x = train.x().clone();
    let mut rng = rng::stream(cfg.seed, rng::STREAM_SOLVER);

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(cfg.target_dim);
    let mut records = Vec::with_capacity(cfg.target_dim);
    for _ in 0..cfg.target_dim {
        let mut draw = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
        project_out(&mut draw, &basis);
        let v0 = match linalg::normalized(&draw) {
            Some(v) => v,
            None => fallback_direction(&disp, &basis),
        };

        let (mut v, record) = match solve_direction_in(&x, &disp, cfg, &v0, &basis) {
            Ok(found) => found,
            Err(Error::DegenerateDirection) => {
                let v = fallback_direction(&disp, &basis);
                let obj = objective(&v, &disp, &x, cfg.delta);
                let record = DirectionRecord {
                    iterations: 0,
                    converged: false,
                    stop: StopReason::Degenerate,
                    objective_start: objective(&v0, &disp, &x, cfg.delta),
                    objective_end: obj,
                    surrogate_trace: Vec::new(),
                    iterates: vec![v0.clone(), v.clone()],
                    safeguarded_steps: 0,
                };
                (v, record)
            }
            Err(e) => return Err(e),
        };
        // one more Gram-Schmidt pass against accumulated rounding
        project_out(&mut v, &basis);
        let mut v = linalg::normalized(&v).ok_or(Error::DegenerateDirection)?;
        linalg::orient(&mut v);

        dispersion::deflate_columns(&mut x, &v);
        disp = dispersion::deflate_dispersions(&disp, &v)?;
        basis.push(v);
        records.push(record);
    }

    let mut matrix = DMatrix::zeros(d, basis.len());
    for (j, b) in basis.iter().enumerate() {
        matrix.set_column(j, b);
    }
    Ok(ProjectionMatrix { matrix, records })
}
