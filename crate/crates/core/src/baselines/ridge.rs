//! Fixed-basis regression with a penalty on accelerations.

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;
use crate::rbf::{eval_both, RbfParams};
use crate::trainer::FitReport;
use crate::trajectory::{center, JointTrajectory};

pub const DEFAULT_N_BASIS: usize = 10;
pub const DEFAULT_LAMBDA2: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub basis: RbfParams,
    /// `n_basis x n`, dense.
    pub coef: Array2<f64>,
    pub intercepts: Array1<f64>,
    pub lambda2: f64,
    pub duration: f64,
}

/// Uniform centers on `[0, duration]` with `sigma = spacing / sqrt(2)`.
pub fn uniform_basis(duration: f64, n_basis: usize) -> Result<RbfParams> {
    if n_basis == 0 {
        return Err(Error::invalid("ridge regression needs at least one basis function"));
    }
    let spacing = if n_basis > 1 { duration / (n_basis - 1) as f64 } else { duration };
    RbfParams::uniform(0.0, duration, n_basis, 0.5 * spacing * spacing)
}

pub fn train_ridge(demo: &JointTrajectory, n_basis: usize, lambda2: f64) -> Result<RidgeModel> {
    if !(lambda2 >= 0.0) || !lambda2.is_finite() {
        return Err(Error::invalid(format!("lambda2 must be nonnegative, got {lambda2}")));
    }
    let duration = demo.duration();
    let basis = uniform_basis(duration, n_basis)?;
    let t = demo.times().mapv(|v| v - demo.start_time());
    let b = eval_both(t.view(), &basis);
    let centered = center(demo);
    let normal = b.phi.t().dot(&b.phi) + b.phi_acc.t().dot(&b.phi_acc) * lambda2;
    let rhs = b.phi.t().dot(&centered.centered);
    let coef = cholesky_solve(normal.view(), rhs.view())?;
    Ok(RidgeModel { basis, coef, intercepts: centered.intercepts, lambda2, duration })
}

impl RidgeModel {
    pub fn n_dof(&self) -> usize {
        self.coef.ncols()
    }

    /// Weights plus the intercept.
    pub fn params_per_dof(&self) -> usize {
        self.basis.len() + 1
    }

    /// Positions and accelerations on `t` (seconds from the window start).
    pub fn evaluate(&self, t: ArrayView1<f64>) -> (Array2<f64>, Array2<f64>) {
        let b = eval_both(t, &self.basis);
        let q = b.phi.dot(&self.coef) + self.intercepts.view().insert_axis(Axis(0));
        (q, b.phi_acc.dot(&self.coef))
    }

    pub fn fit_report(&self, demo: &JointTrajectory) -> Result<FitReport> {
        if demo.n_dof() != self.n_dof() {
            return Err(Error::DimensionMismatch { axis: "dofs", expected: self.n_dof(), found: demo.n_dof() });
        }
        let t = demo.times().mapv(|v| v - demo.start_time());
        let (q, acc) = self.evaluate(t.view());
        let res2: f64 = (&demo.positions() - &q).iter().map(|v| v * v).sum();
        let acc2: f64 = acc.iter().map(|v| v * v).sum();
        Ok(FitReport {
            nnz: self.params_per_dof() * self.n_dof(),
            n_dof: self.n_dof(),
            acc_norm: acc2.sqrt(),
            res_norm: res2.sqrt(),
            cost: res2 + self.lambda2 * acc2,
        })
    }
}
