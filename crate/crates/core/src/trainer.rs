//! Alternating Elastic Net / feature optimization trainers for single
//! demonstrations (shared features, one column per DoF) and for several
//! demonstrations (per-DoF features, one column per demonstration).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::elastic_net::{
    lambda_max, prune_stacked, solve, to_lasso, AugmentedProblem, CoefMatrix, SolveOptions, DEFAULT_PRUNE_TOL,
};
use crate::error::{Error, Result};
use crate::features::{decode, encode_stacked, optimize_features, CenterBounds, FeatureObjective};
use crate::path::{compute_path, PathGrid, PathResult};
use crate::rbf::{stack_basis, BasisMatrices, RbfParams, StackedRbfParams};
use crate::trajectory::{center, center_stacked, stack_demoset, DemoSet, JointTrajectory, DT_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerConfig {
    /// Initial sparsity penalty. Defaults to `0.01 lambda_max`.
    pub lambda1: Option<f64>,
    /// Initial acceleration penalty. Defaults to `1e-6 lambda1`.
    pub lambda2: Option<f64>,
    /// Stop once the cost changes by less than this between iterations.
    pub epsilon: f64,
    pub max_outer_iters: usize,
    /// Initial feature count; `None` puts one feature on every sample.
    pub initial_features: Option<usize>,
    pub initial_width: f64,
    /// Choose the penalties by cross-validation with this many folds.
    pub cv_folds: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub en_tol: f64,
    pub en_max_sweeps: usize,
    pub prune_tol: f64,
    /// BFGS iteration cap per outer iteration; `None` means `100 p`.
    pub bfgs_max_iters: Option<usize>,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            lambda1: None,
            lambda2: None,
            epsilon: 1e-6,
            max_outer_iters: 50,
            initial_features: None,
            initial_width: 0.1,
            cv_folds: None,
            restarts: 1,
            seed: 0,
            en_tol: 1e-8,
            en_max_sweeps: 5_000,
            prune_tol: DEFAULT_PRUNE_TOL,
            bfgs_max_iters: None,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::invalid(format!("{name} must be finite and nonnegative, got {v}")));
                }
            }
        }
        if self.initial_features == Some(0) {
            return Err(Error::invalid("initial feature count must be at least 1"));
        }
        if !(self.initial_width > 0.0) {
            return Err(Error::invalid("initial width must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        if matches!(self.cv_folds, Some(k) if k < 2) {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        if !(self.en_tol > 0.0) {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Coupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveMeta {
    pub n_samples: usize,
    pub n_dof: usize,
    pub n_demos: usize,
    pub dt: f64,
    pub duration: f64,
    pub cost: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Penalties in force for the final Elastic Net step.
    pub lambda1: f64,
    pub lambda2: f64,
    pub converged: bool,
}

/// A learned primitive. In `Single` mode there is one feature block shared
/// by all joints and `coef` has one column per joint; in `Coupled` mode
/// every joint has its own block and `coef` has one column per demo.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPrimitive {
    pub mode: Mode,
    pub features: StackedRbfParams,
    pub coef: CoefMatrix,
    /// `n x 1` in single mode, `n x d` in coupled mode.
    pub intercepts: Array2<f64>,
    pub meta: PrimitiveMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Nonzero coefficient entries.
    pub nnz: usize,
    pub n_dof: usize,
    pub acc_norm: f64,
    pub res_norm: f64,
    pub cost: f64,
}

impl FitReport {
    pub fn per_dof(&self) -> f64 {
        self.nnz as f64 / self.n_dof as f64
    }
}

impl TrainedPrimitive {
    pub fn n_features(&self) -> usize {
        self.coef.n_features()
    }

    pub fn n_demos(&self) -> usize {
        self.meta.n_demos
    }

    /// Shared features of a single-mode primitive.
    pub fn shared_features(&self) -> Option<&RbfParams> {
        match self.mode {
            Mode::Single => self.features.per_dof().first(),
            Mode::Coupled => None,
        }
    }

    pub fn check(&self) -> Result<()> {
        let blocks = self.features.n_dof();
        let p = self.features.n_features();
        let (want_blocks, cols, icols) = match self.mode {
            Mode::Single => (1, self.meta.n_dof, 1),
            Mode::Coupled => (self.meta.n_dof, self.meta.n_demos, self.meta.n_demos),
        };
        if blocks != want_blocks {
            return Err(Error::DimensionMismatch { axis: "feature blocks", expected: want_blocks, found: blocks });
        }
        if self.coef.n_features() != p {
            return Err(Error::DimensionMismatch { axis: "features", expected: p, found: self.coef.n_features() });
        }
        if self.coef.n_tasks() != cols {
            return Err(Error::DimensionMismatch {
                axis: "coefficient columns",
                expected: cols,
                found: self.coef.n_tasks(),
            });
        }
        if self.intercepts.dim() != (self.meta.n_dof, icols) {
            return Err(Error::DimensionMismatch {
                axis: "intercepts",
                expected: self.meta.n_dof * icols,
                found: self.intercepts.len(),
            });
        }
        Ok(())
    }

    fn check_domain(&self, t: ArrayView1<f64>) -> Result<()> {
        let tol = DT_TOLERANCE.max(1e-9 * self.meta.duration);
        for &v in t {
            if !(v >= -tol && v <= self.meta.duration + tol) {
                return Err(Error::OutsideDomain { time: v, duration: self.meta.duration });
            }
        }
        Ok(())
    }

    /// `(Phi W, Phi'' W)` in the primitive's native layout.
    fn raw(&self, t: ArrayView1<f64>) -> (Array2<f64>, Array2<f64>) {
        let basis = stack_basis(t, &self.features);
        let w = self.coef.values();
        (basis.phi.dot(&w), basis.phi_acc.dot(&w))
    }

    fn per_demo(&self, m: &Array2<f64>, n: usize, with_intercepts: bool) -> Vec<Array2<f64>> {
        let dofs = self.meta.n_dof;
        match self.mode {
            Mode::Single => {
                let mut q = m.clone();
                if with_intercepts {
                    q += &self.intercepts.column(0).insert_axis(Axis(0));
                }
                vec![q]
            }
            Mode::Coupled => (0..self.meta.n_demos)
                .map(|j| {
                    Array2::from_shape_fn((n, dofs), |(k, i)| {
                        m[[i * n + k, j]] + if with_intercepts { self.intercepts[[i, j]] } else { 0.0 }
                    })
                })
                .collect(),
        }
    }

    /// Positions on `t`, one `N x n` matrix per demonstration column.
    pub fn evaluate(&self, t: ArrayView1<f64>) -> Result<Vec<Array2<f64>>> {
        self.check_domain(t)?;
        let (q, _) = self.raw(t);
        Ok(self.per_demo(&q, t.len(), true))
    }

    /// Accelerations on `t`, one `N x n` matrix per demonstration column.
    pub fn accelerations(&self, t: ArrayView1<f64>) -> Result<Vec<Array2<f64>>> {
        self.check_domain(t)?;
        let (_, a) = self.raw(t);
        Ok(self.per_demo(&a, t.len(), false))
    }

    /// Metrics against `demos`: one demo in single mode, all `d` in coupled mode.
    pub fn fit_report(&self, demos: &[JointTrajectory]) -> Result<FitReport> {
        let want = match self.mode {
            Mode::Single => 1,
            Mode::Coupled => self.meta.n_demos,
        };
        if demos.len() != want {
            return Err(Error::DimensionMismatch { axis: "demos", expected: want, found: demos.len() });
        }
        let t = demos[0].times().mapv(|v| v - demos[0].start_time());
        for demo in demos {
            if demo.n_dof() != self.meta.n_dof {
                return Err(Error::DimensionMismatch { axis: "dofs", expected: self.meta.n_dof, found: demo.n_dof() });
            }
            if demo.n_samples() != t.len() {
                return Err(Error::DimensionMismatch { axis: "samples", expected: t.len(), found: demo.n_samples() });
            }
        }
        let q = self.evaluate(t.view())?;
        let (_, acc) = self.raw(t.view());
        let mut res2 = 0.0;
        for (fit, demo) in q.iter().zip(demos) {
            res2 += (&demo.positions() - fit).iter().map(|v| v * v).sum::<f64>();
        }
        let acc2: f64 = acc.iter().map(|v| v * v).sum();
        Ok(FitReport {
            nnz: self.coef.nnz(),
            n_dof: self.meta.n_dof,
            acc_norm: acc2.sqrt(),
            res_norm: res2.sqrt(),
            cost: res2 + self.meta.lambda1 * self.coef.l21_norm() + self.meta.lambda2 * acc2,
        })
    }
}

/// One outer iteration, with costs evaluated at the penalties in force
/// for that iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub cost_start: f64,
    pub cost_after_features: f64,
    pub cost_after_en: f64,
    pub features_before: usize,
    pub features_after: usize,
    pub residual_norm: f64,
    pub bfgs_iterations: usize,
    pub en_sweeps: usize,
    /// The Elastic Net step met its tolerance within the sweep budget.
    pub en_converged: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub primitive: TrainedPrimitive,
    pub trace: Vec<IterationRecord>,
    /// Cost after the initial fit and prune.
    pub initial_cost: f64,
    /// Which restart produced the result.
    pub restart: usize,
}

/// `lambda * r_k^2 / r_prev^2`, floored at `1e-12` times the initial value.
pub fn scale_penalties(lambda1: f64, lambda2: f64, r_k: f64, r_prev: f64, initial: (f64, f64)) -> (f64, f64) {
    if !(r_prev > 0.0) {
        return (lambda1, lambda2);
    }
    let f = (r_k / r_prev).powi(2);
    ((lambda1 * f).max(1e-12 * initial.0), (lambda2 * f).max(1e-12 * initial.1))
}

/// Centered targets with `blocks * N` rows and the intercepts that were removed.
struct Targets {
    t: Array1<f64>,
    y: Array2<f64>,
    intercepts: Array2<f64>,
    blocks: usize,
    mode: Mode,
    n_dof: usize,
    n_demos: usize,
    dt: f64,
    duration: f64,
}

impl Targets {
    fn single(demo: &JointTrajectory) -> Self {
        let c = center(demo);
        Self {
            t: demo.times().mapv(|v| v - demo.start_time()),
            y: c.centered,
            intercepts: c.intercepts.insert_axis(Axis(1)),
            blocks: 1,
            mode: Mode::Single,
            n_dof: demo.n_dof(),
            n_demos: 1,
            dt: demo.dt(),
            duration: demo.duration(),
        }
    }

    fn coupled(demos: &DemoSet) -> Self {
        let c = center_stacked(&stack_demoset(demos));
        let first = &demos.demos()[0];
        Self {
            t: first.times().mapv(|v| v - first.start_time()),
            y: c.centered.y,
            intercepts: c.intercepts,
            blocks: demos.n_dof(),
            mode: Mode::Coupled,
            n_dof: demos.n_dof(),
            n_demos: demos.len(),
            dt: demos.dt(),
            duration: first.duration(),
        }
    }

    fn initial_features(&self, cfg: &TrainerConfig) -> Result<StackedRbfParams> {
        let n = self.t.len();
        let p = cfg.initial_features.unwrap_or(n);
        let base = if p == n {
            RbfParams::new(self.t.to_vec(), vec![cfg.initial_width; n])?
        } else {
            RbfParams::uniform(self.t[0], self.t[n - 1], p, cfg.initial_width)?
        };
        StackedRbfParams::new(vec![base; self.blocks])
    }

    fn basis(&self, params: &StackedRbfParams) -> BasisMatrices {
        stack_basis(self.t.view(), params)
    }

    fn problem(&self, params: &StackedRbfParams, lambda2: f64) -> Result<AugmentedProblem> {
        let b = self.basis(params);
        to_lasso(b.phi.view(), b.phi_acc.view(), self.y.view(), lambda2)
    }

    fn primitive(&self, features: StackedRbfParams, coef: CoefMatrix, meta_run: RunSummary) -> TrainedPrimitive {
        TrainedPrimitive {
            mode: self.mode,
            features,
            coef,
            intercepts: self.intercepts.clone(),
            meta: PrimitiveMeta {
                n_samples: self.t.len(),
                n_dof: self.n_dof,
                n_demos: self.n_demos,
                dt: self.dt,
                duration: self.duration,
                cost: meta_run.cost,
                residual_norm: meta_run.residual_norm,
                iterations: meta_run.iterations,
                lambda1: meta_run.lambda1,
                lambda2: meta_run.lambda2,
                converged: meta_run.converged,
            },
        }
    }

    fn intercept_only(&self) -> Result<TrainOutcome> {
        let empty = StackedRbfParams::new(vec![RbfParams::new(vec![], vec![])?; self.blocks])?;
        let coef = CoefMatrix::zeros(0, self.y.ncols());
        let primitive = self.primitive(
            empty,
            coef,
            RunSummary { cost: 0.0, residual_norm: 0.0, iterations: 0, lambda1: 0.0, lambda2: 0.0, converged: true },
        );
        Ok(TrainOutcome { primitive, trace: Vec::new(), initial_cost: 0.0, restart: 0 })
    }
}

struct RunSummary {
    cost: f64,
    residual_norm: f64,
    iterations: usize,
    lambda1: f64,
    lambda2: f64,
    converged: bool,
}

fn en_options(cfg: &TrainerConfig, warm: Option<Array2<f64>>) -> SolveOptions {
    SolveOptions { tol: cfg.en_tol, max_sweeps: cfg.en_max_sweeps, warm_start: warm, record_objective: false }
}

/// Elastic Net step for the trainer. Coordinate descent only ever lowers the
/// objective, so when the sweep budget runs out the last iterate is kept.
fn en_step(prob: &AugmentedProblem, lambda1: f64, opts: &SolveOptions) -> Result<(CoefMatrix, usize, bool)> {
    match solve(prob, lambda1, opts) {
        Ok(sol) => Ok((sol.coef, sol.sweeps, true)),
        Err(Error::NotConverged { sweeps, last, .. }) => Ok((CoefMatrix::new(*last)?, sweeps, false)),
        Err(e) => Err(e),
    }
}

fn data_residual(prob: &AugmentedProblem, w: ArrayView2<f64>) -> f64 {
    prob.data_residual_norm2(w).sqrt()
}

fn alternate(
    data: &Targets,
    init: StackedRbfParams,
    lambdas: (f64, f64),
    cfg: &TrainerConfig,
) -> Result<(StackedRbfParams, CoefMatrix, RunSummary, Vec<IterationRecord>, f64)> {
    let (mut l1, mut l2) = lambdas;
    let prob = data.problem(&init, l2)?;
    let (w0, _, _) = en_step(&prob, l1, &en_options(cfg, None))?;
    let mut r_prev = data_residual(&prob, w0.values());
    let f0 = prob.objective(l1, w0.values());
    let (mut coef, mut params) = prune_stacked(&w0, &init, cfg.prune_tol, 0)?;
    let mut f_prev = f0;
    let bounds = CenterBounds::around(data.t.view());
    let mut trace = Vec::new();
    let mut converged = false;
    let mut last_l = (l1, l2);
    let mut r_k = r_prev;
    for k in 1..=cfg.max_outer_iters {
        let features_before = params.n_features();
        let l21 = coef.l21_norm();
        let obj = FeatureObjective::new(data.t.view(), data.y.view(), coef.values(), l2, data.blocks)?;
        let step = optimize_features(&obj, encode_stacked(&params), bounds, cfg.bfgs_max_iters, None)?;
        params = StackedRbfParams::new(decode(step.theta.view(), data.blocks)?)?;
        let prob = data.problem(&params, l2)?;
        let (w, en_sweeps, en_converged) = en_step(&prob, l1, &en_options(cfg, Some(coef.values().to_owned())))?;
        r_k = data_residual(&prob, w.values());
        let f_k = prob.objective(l1, w.values());
        last_l = (l1, l2);
        let (next, next_params) = prune_stacked(&w, &params, cfg.prune_tol, k)?;
        trace.push(IterationRecord {
            iteration: k,
            lambda1: l1,
            lambda2: l2,
            cost_start: step.cost_before + l1 * l21,
            cost_after_features: step.cost_after + l1 * l21,
            cost_after_en: f_k,
            features_before,
            features_after: next.n_features(),
            residual_norm: r_k,
            bfgs_iterations: step.iterations,
            en_sweeps,
            en_converged,
        });
        (l1, l2) = scale_penalties(l1, l2, r_k, r_prev, lambdas);
        coef = next;
        params = next_params;
        let done = (f_k - f_prev).abs() < cfg.epsilon;
        f_prev = f_k;
        r_prev = r_k;
        if done {
            converged = true;
            break;
        }
    }
    let summary = RunSummary {
        cost: f_prev,
        residual_norm: r_k,
        iterations: trace.len(),
        lambda1: last_l.0,
        lambda2: last_l.1,
        converged,
    };
    Ok((params, coef, summary, trace, f0))
}

fn jitter(params: &StackedRbfParams, amount: f64, rng: &mut ChaCha8Rng) -> Result<StackedRbfParams> {
    let sets = params
        .per_dof()
        .iter()
        .map(|set| {
            let mu = set.mu().iter().map(|m| m + rng.random_range(-amount..=amount)).collect();
            RbfParams::new(mu, set.sigma2().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    StackedRbfParams::new(sets)
}

fn default_lambdas(data: &Targets, init: &StackedRbfParams, cfg: &TrainerConfig) -> Result<Option<(f64, f64)>> {
    // lambda_max does not depend on lambda2: the acceleration rows have zero target
    let lmax = lambda_max(&data.problem(init, 0.0)?);
    if lmax == 0.0 {
        return Ok(None);
    }
    if let Some(folds) = cfg.cv_folds {
        let grid = default_cv_grid(lmax);
        return select_penalties(data, init, &grid, folds, cfg).map(Some);
    }
    let l1 = cfg.lambda1.unwrap_or(0.01 * lmax);
    let l2 = cfg.lambda2.unwrap_or(1e-6 * l1);
    Ok(Some((l1, l2)))
}

fn train(data: Targets, cfg: &TrainerConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let init = data.initial_features(cfg)?;
    let Some(lambdas) = default_lambdas(&data, &init, cfg)? else {
        return data.intercept_only();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<TrainOutcome> = None;
    for restart in 0..cfg.restarts {
        let start = if restart == 0 { init.clone() } else { jitter(&init, 2.0 * data.dt, &mut rng)? };
        let (params, coef, summary, trace, f0) = alternate(&data, start, lambdas, cfg)?;
        if best.as_ref().is_none_or(|b| summary.cost < b.primitive.meta.cost) {
            best = Some(TrainOutcome {
                primitive: data.primitive(params, coef, summary),
                trace,
                initial_cost: f0,
                restart,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Shared features for one demonstration, one coefficient column per joint.
pub fn train_lsdp(demo: &JointTrajectory, cfg: &TrainerConfig) -> Result<TrainOutcome> {
    train(Targets::single(demo), cfg)
}

/// Per-joint features with one coefficient column per demonstration.
pub fn train_clsdp(demos: &DemoSet, cfg: &TrainerConfig) -> Result<TrainOutcome> {
    train(Targets::coupled(demos), cfg)
}

/// Regularization path of a trained primitive on its training data, with
/// the features held fixed and `lambda2` at its final value.
pub fn primitive_path(
    prim: &TrainedPrimitive,
    demos: &[JointTrajectory],
    grid: PathGrid,
    opts: &SolveOptions,
) -> Result<PathResult> {
    let data = match prim.mode {
        Mode::Single => {
            if demos.len() != 1 {
                return Err(Error::DimensionMismatch { axis: "demos", expected: 1, found: demos.len() });
            }
            Targets::single(&demos[0])
        }
        Mode::Coupled => Targets::coupled(&DemoSet::new(demos.to_vec())?),
    };
    if data.n_dof != prim.meta.n_dof || data.t.len() != prim.meta.n_samples || data.y.ncols() != prim.coef.n_tasks() {
        return Err(Error::invalid("demonstrations do not match the primitive's training shape"));
    }
    if prim.n_features() == 0 {
        return Err(Error::NothingToRank);
    }
    compute_path(&data.problem(&prim.features, prim.meta.lambda2)?, grid, opts)
}

/// `lambda1 = lambda_max * {0.1, 0.03, 0.01, 0.003, 0.001}`, each with
/// `lambda2 = lambda1 * {1e-6, 1e-4}`.
pub fn default_cv_grid(lambda_max: f64) -> Vec<(f64, f64)> {
    let mut grid = Vec::new();
    for a in [0.1, 0.03, 0.01, 0.003, 0.001] {
        for b in [1e-6, 1e-4] {
            grid.push((a * lambda_max, a * lambda_max * b));
        }
    }
    grid
}

fn fold_bounds(n: usize, folds: usize) -> Vec<(usize, usize)> {
    (0..folds).map(|f| (f * n / folds, (f + 1) * n / folds)).collect()
}

fn select_penalties(
    data: &Targets,
    init: &StackedRbfParams,
    grid: &[(f64, f64)],
    folds: usize,
    cfg: &TrainerConfig,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::invalid("penalty grid is empty"));
    }
    let n = data.t.len();
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    let bounds = fold_bounds(n, folds);
    for (f, &(a, b)) in bounds.iter().enumerate() {
        if b - a < 2 || n - (b - a) < 2 {
            return Err(Error::DegenerateFold { fold: f, samples: b - a });
        }
    }
    let basis = data.basis(init);
    let rows_of = |keep: &dyn Fn(usize) -> bool| -> Vec<usize> {
        (0..data.blocks).flat_map(|blk| (0..n).filter(|&k| keep(k)).map(move |k| blk * n + k)).collect()
    };
    let mut best: Option<(f64, (f64, f64))> = None;
    let mut last_err = None;
    for &(l1, l2) in grid {
        let mut total = 0.0;
        let mut ok = true;
        for &(a, b) in &bounds {
            let train = rows_of(&|k| k < a || k >= b);
            let held = rows_of(&|k| k >= a && k < b);
            let phi = basis.phi.select(Axis(0), &train);
            let acc = basis.phi_acc.select(Axis(0), &train);
            let y = data.y.select(Axis(0), &train);
            let prob = to_lasso(phi.view(), acc.view(), y.view(), l2)?;
            let (coef, _, _) = en_step(&prob, l1, &en_options(cfg, None))?;
            if coef.nnz() == 0 {
                ok = false;
                last_err = Some(Error::EmptyModel { iteration: 0 });
                break;
            }
            let r = &data.y.select(Axis(0), &held) - &basis.phi.select(Axis(0), &held).dot(&coef.values());
            total += r.iter().map(|v| v * v).sum::<f64>();
        }
        if !ok {
            continue;
        }
        let mean = total / folds as f64;
        if best.is_none_or(|(m, _)| mean < m) {
            best = Some((mean, (l1, l2)));
        }
    }
    best.map(|(_, l)| l).ok_or_else(|| last_err.unwrap_or(Error::EmptyModel { iteration: 0 }))
}

/// Cross-validated `(lambda1, lambda2)` for the initial fit of one demo.
pub fn select_penalties_cv_single(
    demo: &JointTrajectory,
    grid: &[(f64, f64)],
    folds: usize,
    cfg: &TrainerConfig,
) -> Result<(f64, f64)> {
    let data = Targets::single(demo);
    let init = data.initial_features(cfg)?;
    select_penalties(&data, &init, grid, folds, cfg)
}

/// Cross-validated `(lambda1, lambda2)` for the initial fit of several demos.
pub fn select_penalties_cv(
    demos: &DemoSet,
    grid: &[(f64, f64)],
    folds: usize,
    cfg: &TrainerConfig,
) -> Result<(f64, f64)> {
    let data = Targets::coupled(demos);
    let init = data.initial_features(cfg)?;
    select_penalties(&data, &init, grid, folds, cfg)
}

/// Cross-validation with caller-supplied initial features (one block per
/// joint for `Mode::Coupled`, a single block otherwise).
pub fn select_penalties_cv_with(
    demos: &DemoSet,
    mode: Mode,
    init: &StackedRbfParams,
    grid: &[(f64, f64)],
    folds: usize,
    cfg: &TrainerConfig,
) -> Result<(f64, f64)> {
    let data = match mode {
        Mode::Single => {
            if demos.len() != 1 {
                return Err(Error::DimensionMismatch { axis: "demos", expected: 1, found: demos.len() });
            }
            Targets::single(&demos.demos()[0])
        }
        Mode::Coupled => Targets::coupled(demos),
    };
    if init.n_dof() != data.blocks {
        return Err(Error::DimensionMismatch { axis: "feature blocks", expected: data.blocks, found: init.n_dof() });
    }
    select_penalties(&data, init, grid, folds, cfg)
}
