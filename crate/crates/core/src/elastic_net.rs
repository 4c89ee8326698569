//! Multi-task Elastic Net with an acceleration penalty, solved as an
//! augmented multi-task Lasso by cyclic block coordinate descent.
//!
//! The objective at fixed features is
//!
//! ```text
//! F(W) = ||Y - Phi W||_F^2 + lambda1 ||W||_21 + lambda2 ||Phi'' W||_F^2
//! ```
//!
//! Stacking `[Phi; sqrt(lambda2) Phi'']` against `[Y; 0]` turns the two
//! quadratic terms into one, leaving a plain l21-penalized least squares.
//! The loss is not rescaled by the sample count.

use std::sync::OnceLock;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;
use crate::rbf::{RbfParams, StackedRbfParams};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;
pub const DEFAULT_PRUNE_TOL: f64 = 1e-10;

const ANDERSON_DEPTH: usize = 5;
const WORKING_SET_MIN: usize = 10;
const NEWTON_MAX_DIM: usize = 600;
const INNER_FRACTION: f64 = 0.3;
/// Candidates whose columns have cosine above this with one already picked
/// in the same round wait for a later round.
const COLLINEAR: f64 = 0.99;

/// Regression coefficients, one row per feature and one column per task.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefMatrix {
    w: Array2<f64>,
}

impl CoefMatrix {
    pub fn new(w: Array2<f64>) -> Result<Self> {
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficient matrix".into()));
        }
        Ok(Self { w })
    }

    pub fn zeros(features: usize, tasks: usize) -> Self {
        Self { w: Array2::zeros((features, tasks)) }
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.w.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.w
    }

    pub fn n_features(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_tasks(&self) -> usize {
        self.w.ncols()
    }

    pub fn row_norms(&self) -> Array1<f64> {
        row_norms(self.w.view())
    }

    /// Rows with nonzero Euclidean norm, ascending.
    pub fn active_set(&self) -> Vec<usize> {
        self.w.rows().into_iter().enumerate().filter(|(_, r)| r.iter().any(|&v| v != 0.0)).map(|(j, _)| j).collect()
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.w.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn l21_norm(&self) -> f64 {
        l21_norm(self.w.view())
    }
}

pub fn row_norms(w: ArrayView2<f64>) -> Array1<f64> {
    Array1::from_iter(w.rows().into_iter().map(|r| r.dot(&r).sqrt()))
}

pub fn l21_norm(w: ArrayView2<f64>) -> f64 {
    w.rows().into_iter().map(|r| r.dot(&r).sqrt()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penalties {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl Penalties {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(Self { lambda1, lambda2 })
    }
}

/// The Elastic Net rewritten as a Lasso: design `[Phi; sqrt(l2) Phi'']`,
/// target `[Y; 0]`.
///
/// Stored transposed (`features x rows`, `tasks x rows`) so that every
/// feature column and residual column is contiguous.
#[derive(Debug, Clone)]
pub struct AugmentedProblem {
    design_t: Array2<f64>,
    target_t: Array2<f64>,
    data_rows: usize,
    lambda2: f64,
    cov: OnceLock<(Array2<f64>, Array2<f64>)>,
}

pub fn to_lasso(
    phi: ArrayView2<f64>,
    phi_acc: ArrayView2<f64>,
    y: ArrayView2<f64>,
    lambda2: f64,
) -> Result<AugmentedProblem> {
    if !lambda2.is_finite() || lambda2 < 0.0 {
        return Err(Error::invalid(format!("lambda2 must be finite and nonnegative, got {lambda2}")));
    }
    if phi.dim() != phi_acc.dim() {
        return Err(Error::DimensionMismatch {
            axis: "acceleration basis rows",
            expected: phi.nrows(),
            found: phi_acc.nrows(),
        });
    }
    if y.nrows() != phi.nrows() {
        return Err(Error::DimensionMismatch { axis: "target rows", expected: phi.nrows(), found: y.nrows() });
    }
    let rows = phi.nrows();
    let p = phi.ncols();
    let m = y.ncols();
    let weight = lambda2.sqrt();
    let mut design_t = Array2::<f64>::zeros((p, 2 * rows));
    design_t.slice_mut(s![.., ..rows]).assign(&phi.t());
    design_t.slice_mut(s![.., rows..]).assign(&phi_acc.t().mapv(|v| weight * v));
    let mut target_t = Array2::<f64>::zeros((m, 2 * rows));
    target_t.slice_mut(s![.., ..rows]).assign(&y.t());
    Ok(AugmentedProblem { design_t, target_t, data_rows: rows, lambda2, cov: OnceLock::new() })
}

impl AugmentedProblem {
    /// Builds a problem directly from a design and target (no acceleration block).
    pub fn from_design(phi_a: ArrayView2<f64>, y_a: ArrayView2<f64>) -> Result<Self> {
        if phi_a.nrows() != y_a.nrows() {
            return Err(Error::DimensionMismatch { axis: "target rows", expected: phi_a.nrows(), found: y_a.nrows() });
        }
        let design_t = phi_a.t().to_owned();
        Ok(Self {
            design_t,
            target_t: y_a.t().to_owned(),
            data_rows: phi_a.nrows(),
            lambda2: 0.0,
            cov: OnceLock::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.design_t.nrows()
    }

    pub fn n_tasks(&self) -> usize {
        self.target_t.nrows()
    }

    pub fn n_rows(&self) -> usize {
        self.design_t.ncols()
    }

    /// Rows of the original (unaugmented) data.
    pub fn data_rows(&self) -> usize {
        self.data_rows
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn phi_a(&self) -> Array2<f64> {
        self.design_t.t().to_owned()
    }

    pub fn y_a(&self) -> Array2<f64> {
        self.target_t.t().to_owned()
    }

    /// `(Phi_a' Phi_a, Phi_a' Y_a)`, computed on first use.
    fn covariances(&self) -> (&Array2<f64>, &Array2<f64>) {
        let (g, c) =
            self.cov.get_or_init(|| (self.design_t.dot(&self.design_t.t()), self.design_t.dot(&self.target_t.t())));
        (g, c)
    }

    /// `Y_a - Phi_a W`, transposed (`tasks x rows`).
    fn residual_t(&self, w: ArrayView2<f64>) -> Array2<f64> {
        &self.target_t - &w.t().dot(&self.design_t)
    }

    /// `||Y_a - Phi_a W||_F^2`.
    pub fn residual_norm2(&self, w: ArrayView2<f64>) -> f64 {
        self.residual_t(w).iter().map(|v| v * v).sum()
    }

    /// `||Y - Phi W||_F^2` over the data rows alone.
    pub fn data_residual_norm2(&self, w: ArrayView2<f64>) -> f64 {
        let rows = self.data_rows;
        let fit = w.t().dot(&self.design_t.slice(s![.., ..rows]));
        let r = &self.target_t.slice(s![.., ..rows]) - &fit;
        r.iter().map(|v| v * v).sum()
    }

    pub fn objective(&self, lambda1: f64, w: ArrayView2<f64>) -> f64 {
        self.residual_norm2(w) + lambda1 * l21_norm(w)
    }

    fn check_coef_shape(&self, w: ArrayView2<f64>) -> Result<()> {
        if w.nrows() != self.n_features() {
            return Err(Error::DimensionMismatch {
                axis: "coefficient rows",
                expected: self.n_features(),
                found: w.nrows(),
            });
        }
        if w.ncols() != self.n_tasks() {
            return Err(Error::DimensionMismatch {
                axis: "coefficient columns",
                expected: self.n_tasks(),
                found: w.ncols(),
            });
        }
        Ok(())
    }
}

/// Smallest `lambda1` for which `W = 0` is optimal: `2 max_j ||phi_j^T Y_a||`.
pub fn lambda_max(prob: &AugmentedProblem) -> f64 {
    let corr = prob.design_t.dot(&prob.target_t.t());
    corr.rows().into_iter().map(|r| 2.0 * r.dot(&r).sqrt()).fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Convergence threshold on the largest row change of a full sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    pub warm_start: Option<Array2<f64>>,
    /// Record the objective after every sweep.
    pub record_objective: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_sweeps: DEFAULT_MAX_SWEEPS, warm_start: None, record_objective: false }
    }
}

impl SolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn warm(mut self, w: Array2<f64>) -> Self {
        self.warm_start = Some(w);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub coef: CoefMatrix,
    pub sweeps: usize,
    pub kkt: f64,
    pub objective_trace: Vec<f64>,
}

/// Coordinate descent restricted to a working set of rows, in covariance
/// form: `G = Phi_a' Phi_a`, `C = Phi_a' Y_a`, and `GW` kept up to date on
/// the working set.
struct WorkingSet<'a> {
    gram: &'a Array2<f64>,
    corr: &'a Array2<f64>,
    lambda1: f64,
    w: Array2<f64>,
    gw: Array2<f64>,
    rows: Vec<usize>,
    z: Array1<f64>,
}

impl WorkingSet<'_> {
    /// Exact minimization over row `j`; returns the norm of the row change.
    fn update(&mut self, j: usize) -> f64 {
        let nj = self.gram[[j, j]];
        let m = self.w.ncols();
        if nj == 0.0 {
            let had = self.w.row(j).iter().any(|&v| v != 0.0);
            self.w.row_mut(j).fill(0.0);
            return if had { f64::INFINITY } else { 0.0 };
        }
        for t in 0..m {
            self.z[t] = self.corr[[j, t]] - self.gw[[j, t]] + nj * self.w[[j, t]];
        }
        let znorm = self.z.dot(&self.z).sqrt();
        let shrink = if znorm > 0.0 { (1.0 - self.lambda1 / (2.0 * znorm)).max(0.0) } else { 0.0 };
        let mut change2 = 0.0;
        let g_j = self.gram.row(j);
        for t in 0..m {
            let new = if shrink > 0.0 { self.z[t] / nj * shrink } else { 0.0 };
            let delta = new - self.w[[j, t]];
            if delta != 0.0 {
                self.w[[j, t]] = new;
                change2 += delta * delta;
                for &k in &self.rows {
                    self.gw[[k, t]] += g_j[k] * delta;
                }
            }
        }
        change2.sqrt()
    }

    fn sweep(&mut self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.rows.len() {
            let j = self.rows[idx];
            worst = worst.max(self.update(j));
        }
        worst
    }

    /// Recomputes `GW` on every row from the current coefficients.
    fn refresh(&mut self) {
        let nz: Vec<usize> = (0..self.w.nrows()).filter(|&j| self.w.row(j).iter().any(|&v| v != 0.0)).collect();
        self.gw = if nz.is_empty() {
            Array2::zeros(self.w.dim())
        } else {
            self.gram.select(Axis(1), &nz).dot(&self.w.select(Axis(0), &nz))
        };
    }

    fn grad_row(&self, j: usize) -> Array1<f64> {
        (&self.gw.row(j) - &self.corr.row(j)).mapv(|v| 2.0 * v)
    }

    fn kkt_on(&self, rows: &[usize]) -> f64 {
        rows.iter().map(|&j| row_kkt(self.grad_row(j).view(), self.w.row(j), self.lambda1)).fold(0.0, f64::max)
    }

    fn gather(&self) -> Array1<f64> {
        Array1::from_iter(self.rows.iter().flat_map(|&j| self.w.row(j).to_vec()))
    }

    /// Anderson extrapolation from the last few working-set iterates. The
    /// extrapolated point is kept only if it lowers the objective.
    fn try_extrapolate(&mut self, history: &[Array1<f64>]) {
        let depth = history.len() - 1;
        let diffs: Vec<Array1<f64>> = history.windows(2).map(|w| &w[1] - &w[0]).collect();
        let mut gram = Array2::<f64>::zeros((depth, depth));
        for a in 0..depth {
            for b in 0..=a {
                let v = diffs[a].dot(&diffs[b]);
                gram[[a, b]] = v;
                gram[[b, a]] = v;
            }
        }
        let trace = gram.diag().sum();
        if !(trace > 0.0) {
            return;
        }
        for a in 0..depth {
            gram[[a, a]] += 1e-10 * trace;
        }
        let Ok(c) = cholesky_solve(gram.view(), Array2::ones((depth, 1)).view()) else {
            return;
        };
        let total = c.sum();
        if !(total.abs() > 0.0) || !total.is_finite() {
            return;
        }
        let mut x = Array1::<f64>::zeros(history[0].len());
        for (k, ck) in c.column(0).iter().enumerate() {
            x.scaled_add(ck / total, &history[k + 1]);
        }
        let m = self.w.ncols();
        let delta = Array2::from_shape_fn((self.rows.len(), m), |(a, t)| x[a * m + t] - self.w[[self.rows[a], t]]);
        let rows = self.rows.clone();
        self.try_step(&rows, &delta);
    }

    /// Exact change of the objective when `rows` move by `delta`, from the
    /// covariance form (no cancellation against `||Y||^2`).
    fn step_change(&self, rows: &[usize], delta: &Array2<f64>) -> f64 {
        let m = self.w.ncols();
        let g_rr = self.gram.select(Axis(0), rows).select(Axis(1), rows);
        let g_delta = g_rr.dot(delta);
        let mut change = 0.0;
        for (a, &j) in rows.iter().enumerate() {
            let old = self.w.row(j);
            let mut new_norm2 = 0.0;
            for t in 0..m {
                let d = delta[[a, t]];
                change += d * g_delta[[a, t]] + 2.0 * d * (self.gw[[j, t]] - self.corr[[j, t]]);
                new_norm2 += (old[t] + d) * (old[t] + d);
            }
            change += self.lambda1 * (new_norm2.sqrt() - old.dot(&old).sqrt());
        }
        change
    }

    /// Applies the move if it lowers the objective.
    fn try_step(&mut self, rows: &[usize], delta: &Array2<f64>) -> bool {
        if !(self.step_change(rows, delta) < 0.0) {
            return false;
        }
        for (a, &j) in rows.iter().enumerate() {
            let mut row = self.w.row_mut(j);
            row += &delta.row(a);
        }
        let g_full = self.gram.select(Axis(1), rows).dot(delta);
        for &k in &self.rows {
            let mut row = self.gw.row_mut(k);
            row += &g_full.row(k);
        }
        true
    }

    /// Damped Newton step on the nonzero rows, where the objective is
    /// smooth; backtracks until the objective drops.
    fn try_newton(&mut self) {
        let m = self.w.ncols();
        let rows: Vec<usize> = self.rows.iter().copied().filter(|&j| self.w.row(j).iter().any(|&v| v != 0.0)).collect();
        let r = rows.len();
        if r == 0 || r * m > NEWTON_MAX_DIM {
            return;
        }
        let dim = r * m;
        let mut hess = Array2::<f64>::zeros((dim, dim));
        let mut grad = Array2::<f64>::zeros((dim, 1));
        for (a, &j) in rows.iter().enumerate() {
            let wj = self.w.row(j);
            let norm = wj.dot(&wj).sqrt();
            for t in 0..m {
                grad[[a * m + t, 0]] = 2.0 * (self.gw[[j, t]] - self.corr[[j, t]]) + self.lambda1 * wj[t] / norm;
                for (b, &k) in rows.iter().enumerate() {
                    hess[[a * m + t, b * m + t]] += 2.0 * self.gram[[j, k]];
                }
                for u in 0..m {
                    let eye = if t == u { 1.0 } else { 0.0 };
                    hess[[a * m + t, a * m + u]] += self.lambda1 * (eye - wj[t] * wj[u] / (norm * norm)) / norm;
                }
            }
        }
        let scale = hess.diag().iter().fold(0.0f64, |acc, v| acc.max(*v));
        // Levenberg-Marquardt: raise the damping until the step pays off
        let mut damping = 1e-12 * scale;
        while damping <= scale {
            let mut h = hess.clone();
            for i in 0..dim {
                h[[i, i]] += damping;
            }
            if let Ok(step) = cholesky_solve(h.view(), grad.view()) {
                let delta = Array2::from_shape_fn((r, m), |(a, t)| -step[[a * m + t, 0]]);
                if self.try_step(&rows, &delta) {
                    return;
                }
            }
            damping *= 100.0;
        }
    }

    /// Up to `limit` rows outside the working set with the largest KKT
    /// violation above `threshold`, skipping rows nearly collinear with one
    /// already picked in this round.
    fn violators(&self, threshold: f64, limit: usize) -> Vec<usize> {
        let p = self.w.nrows();
        let mut inside = vec![false; p];
        for &j in &self.rows {
            inside[j] = true;
        }
        let mut cand: Vec<(f64, usize)> = (0..p)
            .filter(|&j| !inside[j])
            .map(|j| {
                let g = self.grad_row(j);
                (g.dot(&g).sqrt() - self.lambda1, j)
            })
            .filter(|(v, _)| *v > threshold)
            .collect();
        cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut picked: Vec<usize> = Vec::new();
        for (_, j) in cand {
            let gjj = self.gram[[j, j]];
            let close = picked.iter().any(|&k| {
                let denom = (gjj * self.gram[[k, k]]).sqrt();
                denom > 0.0 && self.gram[[j, k]].abs() > COLLINEAR * denom
            });
            if !close {
                picked.push(j);
                if picked.len() == limit {
                    break;
                }
            }
        }
        picked
    }
}

/// Block coordinate descent with a growing working set.
///
/// Rows enter the working set when they violate the optimality conditions;
/// within the set, cyclic sweeps (with occasional Anderson extrapolation)
/// run until no row moves by more than `tol` and the set's KKT violation is
/// at most `10 * tol`. The solve ends once the violation over all rows is
/// at most `10 * tol`.
pub fn solve(prob: &AugmentedProblem, lambda1: f64, opts: &SolveOptions) -> Result<Solution> {
    if !lambda1.is_finite() || lambda1 < 0.0 {
        return Err(Error::invalid(format!("lambda1 must be finite and nonnegative, got {lambda1}")));
    }
    let p = prob.n_features();
    let m = prob.n_tasks();
    let w = match &opts.warm_start {
        Some(w0) => {
            prob.check_coef_shape(w0.view())?;
            w0.clone()
        }
        None => Array2::zeros((p, m)),
    };
    let (gram, corr) = prob.covariances();
    let rows = (0..p).filter(|&j| w.row(j).iter().any(|&v| v != 0.0)).collect();
    let mut ws = WorkingSet { gram, corr, lambda1, w, gw: Array2::zeros((p, m)), rows, z: Array1::zeros(m) };
    ws.refresh();
    let mut trace = Vec::new();
    if opts.record_objective {
        trace.push(prob.objective(lambda1, ws.w.view()));
    }
    let threshold = 10.0 * opts.tol;
    let mut sweeps = 0;
    loop {
        let all: Vec<usize> = (0..p).collect();
        let kkt = ws.kkt_on(&all);
        if kkt <= threshold {
            return Ok(Solution { coef: CoefMatrix { w: ws.w }, sweeps, kkt, objective_trace: trace });
        }
        if sweeps >= opts.max_sweeps {
            return Err(Error::NotConverged { sweeps, kkt, last: Box::new(ws.w) });
        }
        let limit = ws.rows.len().max(WORKING_SET_MIN);
        let mut added = ws.violators(threshold, limit);
        added.sort_unstable();
        ws.rows.extend(added);
        ws.rows.sort_unstable();
        let mut history = vec![ws.gather()];
        while sweeps < opts.max_sweeps {
            let change = ws.sweep();
            sweeps += 1;
            if opts.record_objective {
                trace.push(prob.objective(lambda1, ws.w.view()));
            }
            if change <= opts.tol || sweeps % ANDERSON_DEPTH == 0 {
                // stop early once the subproblem is well ahead of the rest
                let inner = ws.kkt_on(&ws.rows);
                if inner <= threshold.max(INNER_FRACTION * kkt) {
                    break;
                }
            }
            history.push(ws.gather());
            if history.len() > ANDERSON_DEPTH {
                ws.try_extrapolate(&history);
                ws.try_newton();
                if opts.record_objective {
                    trace.push(prob.objective(lambda1, ws.w.view()));
                }
                history.clear();
                history.push(ws.gather());
            }
        }
        ws.refresh();
    }
}

fn row_kkt(g: ArrayView1<f64>, w: ArrayView1<f64>, lambda1: f64) -> f64 {
    let wn = w.dot(&w).sqrt();
    if wn > 0.0 {
        let mut s = 0.0;
        for (gi, wi) in g.iter().zip(w.iter()) {
            let d = gi + lambda1 * wi / wn;
            s += d * d;
        }
        s.sqrt()
    } else {
        (g.dot(&g).sqrt() - lambda1).max(0.0)
    }
}

fn kkt_violation_t(prob: &AugmentedProblem, lambda1: f64, w: ArrayView2<f64>, resid_t: ArrayView2<f64>) -> f64 {
    // G = 2 Phi_a^T (Phi_a W - Y_a) = -2 Phi_a^T R
    let grad = prob.design_t.dot(&resid_t.t()).mapv(|v| -2.0 * v);
    let mut worst: f64 = 0.0;
    Zip::from(grad.rows()).and(w.rows()).for_each(|g, wr| worst = worst.max(row_kkt(g, wr, lambda1)));
    worst
}

/// Largest violation of the l21 optimality conditions at `W`.
pub fn kkt_violation(prob: &AugmentedProblem, lambda1: f64, w: ArrayView2<f64>) -> Result<f64> {
    prob.check_coef_shape(w)?;
    let resid_t = prob.residual_t(w);
    Ok(kkt_violation_t(prob, lambda1, w, resid_t.view()))
}

fn keep_rows(w: &CoefMatrix, tol_prune: f64) -> Vec<usize> {
    w.row_norms().iter().enumerate().filter(|(_, &n)| n > tol_prune).map(|(j, _)| j).collect()
}

fn select_rows(w: &CoefMatrix, keep: &[usize]) -> CoefMatrix {
    CoefMatrix { w: w.w.select(Axis(0), keep) }
}

/// Drops rows whose norm is at most `tol_prune`, together with their features.
pub fn prune(w: &CoefMatrix, params: &RbfParams, tol_prune: f64, iteration: usize) -> Result<(CoefMatrix, RbfParams)> {
    if w.n_features() != params.len() {
        return Err(Error::DimensionMismatch { axis: "features", expected: params.len(), found: w.n_features() });
    }
    let keep = keep_rows(w, tol_prune);
    if keep.is_empty() {
        return Err(Error::EmptyModel { iteration });
    }
    Ok((select_rows(w, &keep), params.select(&keep)))
}

/// [`prune`] for per-DoF features: feature `j` is removed from every DoF set.
pub fn prune_stacked(
    w: &CoefMatrix,
    params: &StackedRbfParams,
    tol_prune: f64,
    iteration: usize,
) -> Result<(CoefMatrix, StackedRbfParams)> {
    if w.n_features() != params.n_features() {
        return Err(Error::DimensionMismatch {
            axis: "features",
            expected: params.n_features(),
            found: w.n_features(),
        });
    }
    let keep = keep_rows(w, tol_prune);
    if keep.is_empty() {
        return Err(Error::EmptyModel { iteration });
    }
    Ok((select_rows(w, &keep), params.select(&keep)))
}
