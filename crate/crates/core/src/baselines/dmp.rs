//! Discrete dynamic movement primitives with a phase-gated forcing term.
//!
//! Per joint: `tau z' = a_z (b_z (g - y) - z) + f(x)`, `tau y' = z` and
//! `tau x' = -a_x x`, with `f(x) = sum_i psi_i(x) w_i x / sum_i psi_i(x)`.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::trainer::FitReport;
use crate::trajectory::JointTrajectory;

pub const DEFAULT_N_BASIS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmpGains {
    pub alpha_z: f64,
    pub beta_z: f64,
    pub alpha_x: f64,
}

impl Default for DmpGains {
    /// Critically damped, with the phase decaying to `exp(-25 / 3)` at `t = tau`.
    fn default() -> Self {
        Self { alpha_z: 25.0, beta_z: 25.0 / 4.0, alpha_x: 25.0 / 3.0 }
    }
}

impl DmpGains {
    fn check(&self) -> Result<()> {
        if !(self.alpha_z > 0.0 && self.beta_z > 0.0 && self.alpha_x > 0.0) {
            return Err(Error::invalid("DMP gains must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmpModel {
    /// `n_basis x n` forcing weights.
    pub weights: Array2<f64>,
    pub goal: Array1<f64>,
    pub start: Array1<f64>,
    pub tau: f64,
    pub gains: DmpGains,
    /// Basis centers in phase space, descending from 1.
    pub centers: Array1<f64>,
    /// Inverse squared widths in phase space.
    pub widths: Array1<f64>,
    /// Time step of the training demo, used for evaluation rollouts.
    pub dt: f64,
}

/// Phase-space basis spaced evenly in time: `c_i = exp(-a_x i / (m - 1))`,
/// each width set from the gap to the next center.
fn phase_basis(n_basis: usize, alpha_x: f64) -> (Array1<f64>, Array1<f64>) {
    if n_basis == 1 {
        return (Array1::from_elem(1, 1.0), Array1::from_elem(1, 1.0));
    }
    let last = (n_basis - 1) as f64;
    let c = Array1::from_iter((0..n_basis).map(|i| (-alpha_x * i as f64 / last).exp()));
    let mut h = Array1::zeros(n_basis);
    for i in 0..n_basis - 1 {
        h[i] = 1.0 / (c[i + 1] - c[i]).powi(2);
    }
    h[n_basis - 1] = h[n_basis - 2];
    (c, h)
}

/// Normalized, phase-gated activations at phase `x`.
fn activations(centers: &Array1<f64>, widths: &Array1<f64>, x: f64) -> Array1<f64> {
    let psi = Array1::from_iter(centers.iter().zip(widths).map(|(c, h)| (-h * (x - c) * (x - c)).exp()));
    let total: f64 = psi.sum();
    if total > 0.0 {
        psi * (x / total)
    } else {
        psi
    }
}

/// First derivative by central differences, one-sided at the ends.
fn gradient(v: ArrayView1<f64>, dt: f64) -> Array1<f64> {
    let n = v.len();
    Array1::from_iter((0..n).map(|k| {
        if k == 0 {
            (v[1] - v[0]) / dt
        } else if k == n - 1 {
            (v[n - 1] - v[n - 2]) / dt
        } else {
            (v[k + 1] - v[k - 1]) / (2.0 * dt)
        }
    }))
}

pub fn train_dmp(demo: &JointTrajectory, n_basis: usize, gains: DmpGains) -> Result<DmpModel> {
    gains.check()?;
    if n_basis == 0 {
        return Err(Error::invalid("a DMP needs at least one basis function"));
    }
    let n = demo.n_samples();
    if n < 3 {
        return Err(Error::invalid(format!("a DMP needs at least 3 samples, got {n}")));
    }
    let dt = demo.dt();
    let tau = demo.duration();
    let q = demo.positions();
    let t = demo.times().mapv(|v| v - demo.start_time());
    let (centers, widths) = phase_basis(n_basis, gains.alpha_x);
    let mut design = Array2::zeros((n, n_basis));
    for (k, &tk) in t.iter().enumerate() {
        let x = (-gains.alpha_x * tk / tau).exp();
        design.row_mut(k).assign(&activations(&centers, &widths, x));
    }
    let goal = q.row(n - 1).to_owned();
    let start = q.row(0).to_owned();
    let mut weights = Array2::zeros((n_basis, demo.n_dof()));
    for (i, y) in q.axis_iter(Axis(1)).enumerate() {
        let yd = gradient(y, dt);
        let ydd = gradient(yd.view(), dt);
        let target = Array1::from_iter(
            (0..n).map(|k| tau * tau * ydd[k] - gains.alpha_z * (gains.beta_z * (goal[i] - y[k]) - tau * yd[k])),
        );
        if target.iter().all(|&v| v == 0.0) {
            continue;
        }
        weights.column_mut(i).assign(&lstsq(design.view(), target.view())?);
    }
    Ok(DmpModel { weights, goal, start, tau, gains, centers, widths, dt })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmpRollout {
    pub trajectory: JointTrajectory,
    /// Accelerations from the transformation system at every sample.
    pub accelerations: Array2<f64>,
}

impl DmpModel {
    pub fn n_basis(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_dof(&self) -> usize {
        self.weights.ncols()
    }

    /// Weights plus the goal.
    pub fn params_per_dof(&self) -> usize {
        self.n_basis() + 1
    }

    /// Rollout over the training window from the training start and goal.
    pub fn reproduce(&self) -> Result<DmpRollout> {
        rollout_dmp(self, None, None, self.tau, self.dt)
    }

    pub fn fit_report(&self, demo: &JointTrajectory) -> Result<FitReport> {
        if demo.n_dof() != self.n_dof() {
            return Err(Error::DimensionMismatch { axis: "dofs", expected: self.n_dof(), found: demo.n_dof() });
        }
        let roll = rollout_dmp(self, None, None, demo.duration(), demo.dt())?;
        let fit = roll.trajectory.positions();
        if fit.nrows() != demo.n_samples() {
            return Err(Error::DimensionMismatch { axis: "samples", expected: demo.n_samples(), found: fit.nrows() });
        }
        let res2: f64 = (&demo.positions() - &fit).iter().map(|v| v * v).sum();
        let acc2: f64 = roll.accelerations.iter().map(|v| v * v).sum();
        Ok(FitReport {
            nnz: self.params_per_dof() * self.n_dof(),
            n_dof: self.n_dof(),
            acc_norm: acc2.sqrt(),
            res_norm: res2.sqrt(),
            cost: res2,
        })
    }
}

/// Explicit Euler integration at `dt`, producing `round(duration / dt) + 1`
/// samples starting at `y0` (default: the training start).
pub fn rollout_dmp(
    model: &DmpModel,
    y0_override: Option<ArrayView1<f64>>,
    g_override: Option<ArrayView1<f64>>,
    duration: f64,
    dt: f64,
) -> Result<DmpRollout> {
    if !(dt > 0.0 && duration > 0.0) {
        return Err(Error::invalid("rollout needs positive dt and duration"));
    }
    let n = model.n_dof();
    let y0 = y0_override.map_or_else(|| model.start.clone(), |v| v.to_owned());
    let g = g_override.map_or_else(|| model.goal.clone(), |v| v.to_owned());
    if y0.len() != n || g.len() != n {
        return Err(Error::DimensionMismatch { axis: "dofs", expected: n, found: y0.len().min(g.len()) });
    }
    let DmpGains { alpha_z, beta_z, alpha_x } = model.gains;
    let tau = model.tau;
    let steps = (duration / dt).round() as usize;
    let mut pos = Array2::zeros((steps + 1, n));
    let mut acc = Array2::zeros((steps + 1, n));
    let mut y = y0;
    let mut z = Array1::<f64>::zeros(n);
    let mut x = 1.0;
    for k in 0..=steps {
        let forcing = activations(&model.centers, &model.widths, x).dot(&model.weights);
        let zd = (alpha_z * (beta_z * (&g - &y) - &z) + forcing) / tau;
        pos.row_mut(k).assign(&y);
        acc.row_mut(k).assign(&(&zd / tau));
        y = &y + &(&z * (dt / tau));
        z = &z + &(zd * dt);
        x -= alpha_x * x / tau * dt;
    }
    Ok(DmpRollout { trajectory: JointTrajectory::uniform(dt, pos)?, accelerations: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn model_with(weights: Array2<f64>, start: Array1<f64>, goal: Array1<f64>) -> DmpModel {
        let gains = DmpGains::default();
        let (centers, widths) = phase_basis(weights.nrows(), gains.alpha_x);
        DmpModel { weights, goal, start, tau: 1.0, gains, centers, widths, dt: 0.001 }
    }

    #[test]
    fn constant_demo_has_zero_weights() {
        let q = Array2::from_elem((100, 2), 0.4);
        let demo = JointTrajectory::uniform(0.01, q).unwrap();
        let m = train_dmp(&demo, DEFAULT_N_BASIS, DmpGains::default()).unwrap();
        assert!(m.weights.iter().all(|&w| w == 0.0));
        assert_eq!(m.params_per_dof(), 11);
    }

    #[test]
    fn zero_weights_at_goal_stay_put() {
        let m = model_with(Array2::zeros((10, 1)), array![0.3], array![0.3]);
        let roll = rollout_dmp(&m, None, None, 1.0, 0.002).unwrap();
        assert!(roll.trajectory.positions().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn unforced_system_converges_without_overshoot() {
        let m = model_with(Array2::zeros((10, 1)), array![0.0], array![1.0]);
        let roll = rollout_dmp(&m, None, None, 1.5, 0.002).unwrap();
        let y = roll.trajectory.positions().column(0).to_owned();
        assert!(y.windows(2).into_iter().all(|w| w[1] >= w[0]));
        assert!(y.iter().all(|&v| v <= 1.0));
        assert!((y[y.len() - 1] - 1.0).abs() < 1e-2);
    }

    // the Euler rollout differs from the differentiated fit at first order
    // in dt, so the oracle runs at 1 kHz
    #[test]
    fn recovers_a_known_rollout() {
        let weights = Array2::from_shape_fn((10, 2), |(i, j)| 100.0 * ((i + 3 * j) as f64).sin());
        let m = model_with(weights, array![0.1, -0.2], array![0.9, 0.4]);
        let demo = m.reproduce().unwrap().trajectory;
        let fit = train_dmp(&demo, 10, DmpGains::default()).unwrap();
        let again = fit.reproduce().unwrap().trajectory;
        let diff = &again.positions() - &demo.positions();
        let rms = (diff.mapv(|v| v * v).mean().unwrap()).sqrt();
        assert!(rms <= 1e-3, "rms {rms}");
    }

    #[test]
    fn shifted_start_raises_initial_acceleration() {
        let t = Array1::linspace(0.0, 1.0, 501);
        let q = t.mapv(|v| 0.5 * (1.0 - (std::f64::consts::PI * v).cos())).insert_axis(Axis(1));
        let demo = JointTrajectory::new(t, q).unwrap();
        let m = train_dmp(&demo, 10, DmpGains::default()).unwrap();
        let base = m.reproduce().unwrap().accelerations[[0, 0]].abs();
        let shifted = array![m.start[0] + 0.3];
        let moved = rollout_dmp(&m, Some(shifted.view()), None, m.tau, m.dt).unwrap();
        assert!(moved.accelerations[[0, 0]].abs() > base);
    }

    #[test]
    fn too_short_demo_is_rejected() {
        let demo = JointTrajectory::uniform(0.01, Array2::zeros((2, 1))).unwrap();
        assert!(train_dmp(&demo, 10, DmpGains::default()).is_err());
    }
}
