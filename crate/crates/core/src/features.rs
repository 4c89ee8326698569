//! Feature adaptation: the Elastic Net cost as a function of the basis
//! parameters at fixed coefficients, with its analytic gradient, minimized
//! by BFGS.
//!
//! The parameter vector for `B` blocks of `p` features is laid out as
//! `[mu_1, .., mu_B, log s_1, .., log s_B]` where each entry is a
//! length-`p` run. `B = 1` for shared features and `B = n` when every DoF
//! has its own features.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};

use crate::bfgs::{bfgs_minimize, BfgsOptions, BfgsResult, BfgsStatus};
use crate::error::{Error, Result};
use crate::rbf::{kernel_all, RbfParams, StackedRbfParams, SIGMA2_MIN};

pub fn encode(sets: &[RbfParams]) -> Array1<f64> {
    let p = sets.first().map_or(0, RbfParams::len);
    let b = sets.len();
    let mut theta = Array1::zeros(2 * b * p);
    for (k, set) in sets.iter().enumerate() {
        for j in 0..p {
            theta[k * p + j] = set.mu()[j];
            theta[(b + k) * p + j] = set.sigma2()[j].ln();
        }
    }
    theta
}

pub fn encode_shared(params: &RbfParams) -> Array1<f64> {
    encode(std::slice::from_ref(params))
}

pub fn encode_stacked(params: &StackedRbfParams) -> Array1<f64> {
    encode(params.per_dof())
}

pub fn decode(theta: ArrayView1<f64>, blocks: usize) -> Result<Vec<RbfParams>> {
    if blocks == 0 || !theta.len().is_multiple_of(2 * blocks) {
        return Err(Error::invalid(format!(
            "parameter vector of length {} does not split into {blocks} blocks",
            theta.len()
        )));
    }
    let p = theta.len() / (2 * blocks);
    (0..blocks)
        .map(|k| {
            let mu = theta.slice(s![k * p..(k + 1) * p]).to_vec();
            let sigma2 = theta.slice(s![(blocks + k) * p..(blocks + k + 1) * p]).iter().map(|v| v.exp()).collect();
            RbfParams::new(mu, sigma2)
        })
        .collect()
}

/// Cost `||Y - Phi(theta) W||_F^2 + lambda2 ||Phi''(theta) W||_F^2` at fixed `W`.
///
/// The l21 term does not depend on the features and is left out.
#[derive(Debug, Clone)]
pub struct FeatureObjective<'a> {
    t: ArrayView1<'a, f64>,
    y: ArrayView2<'a, f64>,
    w: ArrayView2<'a, f64>,
    lambda2: f64,
    blocks: usize,
}

impl<'a> FeatureObjective<'a> {
    /// `y` must hold `blocks * t.len()` rows, one block per feature set.
    pub fn new(
        t: ArrayView1<'a, f64>,
        y: ArrayView2<'a, f64>,
        w: ArrayView2<'a, f64>,
        lambda2: f64,
        blocks: usize,
    ) -> Result<Self> {
        if y.nrows() != blocks * t.len() {
            return Err(Error::DimensionMismatch { axis: "target rows", expected: blocks * t.len(), found: y.nrows() });
        }
        if y.ncols() != w.ncols() {
            return Err(Error::DimensionMismatch { axis: "tasks", expected: w.ncols(), found: y.ncols() });
        }
        if !(lambda2 >= 0.0) {
            return Err(Error::invalid(format!("lambda2 must be nonnegative, got {lambda2}")));
        }
        Ok(Self { t, y, w, lambda2, blocks })
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn n_features(&self) -> usize {
        self.w.nrows()
    }

    pub fn dim(&self) -> usize {
        2 * self.blocks * self.n_features()
    }

    pub fn cost(&self, theta: ArrayView1<f64>) -> Result<f64> {
        self.evaluate(theta, false).map(|(c, _)| c)
    }

    pub fn grad(&self, theta: ArrayView1<f64>) -> Result<Array1<f64>> {
        self.evaluate(theta, true).map(|(_, g)| g)
    }

    pub fn cost_grad(&self, theta: ArrayView1<f64>) -> Result<(f64, Array1<f64>)> {
        self.evaluate(theta, true)
    }

    fn evaluate(&self, theta: ArrayView1<f64>, with_grad: bool) -> Result<(f64, Array1<f64>)> {
        let p = self.n_features();
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                axis: "feature parameters",
                expected: self.dim(),
                found: theta.len(),
            });
        }
        let n = self.t.len();
        let b_count = self.blocks;
        let mut cost = 0.0;
        let mut grad = Array1::zeros(if with_grad { theta.len() } else { 0 });
        // feature-major storage so every per-feature loop is contiguous
        let mut phi_t = Array2::<f64>::zeros((p, n));
        let mut acc_t = Array2::<f64>::zeros((p, n));
        let mut parts = if with_grad { vec![Array2::<f64>::zeros((p, n)); 4] } else { vec![] };
        for b in 0..b_count {
            for j in 0..p {
                let mu = theta[b * p + j];
                let s2 = theta[(b_count + b) * p + j].exp();
                if !(s2 >= SIGMA2_MIN) || !s2.is_finite() || !mu.is_finite() {
                    return Err(Error::WidthBelowFloor { index: j, value: s2, floor: SIGMA2_MIN });
                }
                let mut phi_row = phi_t.row_mut(j);
                let mut acc_row = acc_t.row_mut(j);
                if with_grad {
                    let [p0, p1, p2, p3] = &mut parts[..] else { unreachable!() };
                    for i in 0..n {
                        let k = kernel_all(self.t[i], mu, s2);
                        phi_row[i] = k[0];
                        acc_row[i] = k[1];
                        p0[[j, i]] = k[2];
                        p1[[j, i]] = k[3];
                        p2[[j, i]] = k[4];
                        p3[[j, i]] = k[5];
                    }
                } else {
                    for i in 0..n {
                        let u = self.t[i] - mu;
                        let e = (-0.5 * u * u / s2).exp();
                        phi_row[i] = e;
                        acc_row[i] = e * (u * u / (s2 * s2) - 1.0 / s2);
                    }
                }
            }
            let yb = self.y.slice(s![b * n..(b + 1) * n, ..]);
            let resid = &yb - &phi_t.t().dot(&self.w);
            let accel = acc_t.t().dot(&self.w);
            cost += resid.iter().map(|v| v * v).sum::<f64>() + self.lambda2 * accel.iter().map(|v| v * v).sum::<f64>();
            if with_grad {
                // d cost / d phi_ij = -2 (R W^T)_ij ; d cost / d acc_ij = 2 l2 (A W^T)_ij
                let u_t = self.w.dot(&resid.t());
                let v_t = self.w.dot(&accel.t());
                let l2 = 2.0 * self.lambda2;
                for j in 0..p {
                    let (u, v) = (u_t.row(j), v_t.row(j));
                    let g_mu = -2.0 * u.dot(&parts[0].row(j)) + l2 * v.dot(&parts[2].row(j));
                    let g_lw = -2.0 * u.dot(&parts[1].row(j)) + l2 * v.dot(&parts[3].row(j));
                    grad[b * p + j] = g_mu;
                    grad[(b_count + b) * p + j] = g_lw;
                }
            }
        }
        if !cost.is_finite() || grad.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature objective".into()));
        }
        Ok((cost, grad))
    }
}

/// BFGS reruns allowed after centers leave the box.
const FREEZE_ROUNDS: usize = 4;

/// Box applied to centers after optimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterBounds {
    pub lo: f64,
    pub hi: f64,
}

impl CenterBounds {
    /// `[t_min - T, t_max + T]` with `T` the grid span.
    pub fn around(t: ArrayView1<f64>) -> Self {
        let lo = t[0];
        let hi = t[t.len() - 1];
        let span = hi - lo;
        Self { lo: lo - span, hi: hi + span }
    }
}

#[derive(Debug, Clone)]
pub struct FeatureStep {
    pub theta: Array1<f64>,
    pub cost_before: f64,
    pub cost_after: f64,
    /// BFGS iterations summed over reruns.
    pub iterations: usize,
    pub status: BfgsStatus,
    /// Objective after every accepted BFGS step of the final run.
    pub history: Vec<f64>,
    /// Centers held at their starting value because they left the box.
    pub frozen: Vec<usize>,
}

/// Runs BFGS on the feature parameters with centers kept inside `bounds`.
///
/// `max_iters` defaults to `100 p` and `grad_tol` to `1e-6 (1 + |cost0|)`
/// when the corresponding option is `None`. A center that leaves the box is
/// held at its starting value and BFGS is rerun from `theta0`; if centers
/// still escape after a few reruns the starting point is returned.
pub fn optimize_features(
    objective: &FeatureObjective<'_>,
    theta0: Array1<f64>,
    bounds: CenterBounds,
    max_iters: Option<usize>,
    grad_tol: Option<f64>,
) -> Result<FeatureStep> {
    let cost0 = objective.cost(theta0.view())?;
    let opts = BfgsOptions {
        max_iters: max_iters.unwrap_or(100 * objective.n_features().max(1)),
        grad_tol: grad_tol.unwrap_or(1e-6 * (1.0 + cost0.abs())),
        ..BfgsOptions::default()
    };
    let mu_len = objective.blocks * objective.n_features();
    let mut frozen = vec![false; theta0.len()];
    let mut iterations = 0;
    for _ in 0..FREEZE_ROUNDS {
        // a zero gradient entry keeps BFGS from ever moving that coordinate
        let masked = |th: &Array1<f64>| {
            objective.cost_grad(th.view()).ok().map(|(f, mut g)| {
                for (gi, &fz) in g.iter_mut().zip(&frozen) {
                    if fz {
                        *gi = 0.0;
                    }
                }
                (f, g)
            })
        };
        let BfgsResult { x, f, iterations: it, status, history, .. } = bfgs_minimize(masked, theta0.clone(), &opts)?;
        iterations += it;
        let escaped: Vec<usize> = (0..mu_len).filter(|&j| !(x[j] >= bounds.lo && x[j] <= bounds.hi)).collect();
        if escaped.is_empty() {
            return Ok(FeatureStep {
                theta: x,
                cost_before: cost0,
                cost_after: f,
                iterations,
                status,
                history,
                frozen: (0..mu_len).filter(|&j| frozen[j]).collect(),
            });
        }
        for j in escaped {
            frozen[j] = true;
        }
    }
    Ok(FeatureStep {
        theta: theta0,
        cost_before: cost0,
        cost_after: cost0,
        iterations,
        status: BfgsStatus::LineSearchFailed,
        history: vec![cost0],
        frozen: (0..mu_len).filter(|&j| frozen[j]).collect(),
    })
}
