//! Squared-exponential basis functions, their second time derivative, and
//! the partials with respect to centers and log-widths.
//!
//! For a center `mu` and squared width `s`, with `u = t - mu`:
//!
//! ```text
//! phi     = exp(-u^2 / (2 s))
//! phi''   = phi * (u^2 / s^2 - 1 / s)
//! ```
//!
//! Widths are optimized as `log s`, so the width partials below are taken
//! with respect to `log s`.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible squared width, in s^2.
pub const SIGMA2_MIN: f64 = 1e-6;

/// Centers and squared widths of `p` basis functions.
///
/// An empty set (`p = 0`) is allowed so that an intercept-only model can be
/// represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfParams {
    mu: Vec<f64>,
    sigma2: Vec<f64>,
}

impl RbfParams {
    pub fn new(mu: Vec<f64>, sigma2: Vec<f64>) -> Result<Self> {
        if mu.len() != sigma2.len() {
            return Err(Error::DimensionMismatch { axis: "basis widths", expected: mu.len(), found: sigma2.len() });
        }
        if let Some(bad) = mu.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("basis center {bad}")));
        }
        for (index, &value) in sigma2.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("basis width {value}")));
            }
            if value < SIGMA2_MIN {
                return Err(Error::WidthBelowFloor { index, value, floor: SIGMA2_MIN });
            }
        }
        Ok(Self { mu, sigma2 })
    }

    /// `p` centers spread uniformly over `[start, end]` with a common width.
    pub fn uniform(start: f64, end: f64, p: usize, sigma2: f64) -> Result<Self> {
        let mu = match p {
            0 => vec![],
            1 => vec![0.5 * (start + end)],
            _ => (0..p).map(|j| start + (end - start) * j as f64 / (p - 1) as f64).collect(),
        };
        Self::new(mu, vec![sigma2; p])
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    /// Keeps the listed features, in the given order.
    pub fn select(&self, keep: &[usize]) -> Self {
        Self { mu: keep.iter().map(|&j| self.mu[j]).collect(), sigma2: keep.iter().map(|&j| self.sigma2[j]).collect() }
    }
}

/// One [`RbfParams`] per DoF, all with the same feature count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedRbfParams {
    per_dof: Vec<RbfParams>,
}

impl StackedRbfParams {
    pub fn new(per_dof: Vec<RbfParams>) -> Result<Self> {
        let first = per_dof.first().ok_or_else(|| Error::invalid("stacked basis needs at least one DoF"))?;
        for set in &per_dof[1..] {
            if set.len() != first.len() {
                return Err(Error::DimensionMismatch {
                    axis: "features per DoF",
                    expected: first.len(),
                    found: set.len(),
                });
            }
        }
        Ok(Self { per_dof })
    }

    pub fn per_dof(&self) -> &[RbfParams] {
        &self.per_dof
    }

    pub fn n_dof(&self) -> usize {
        self.per_dof.len()
    }

    pub fn n_features(&self) -> usize {
        self.per_dof[0].len()
    }

    pub fn select(&self, keep: &[usize]) -> Self {
        Self { per_dof: self.per_dof.iter().map(|p| p.select(keep)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrices {
    pub phi: Array2<f64>,
    pub phi_acc: Array2<f64>,
}

/// Partials of `phi` and `phi''` with respect to each feature's center and
/// log-width. Entry `(i, j)` is the derivative of the `(i, j)` basis entry
/// with respect to feature `j`'s parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGrads {
    pub phi_d_mu: Array2<f64>,
    pub phi_d_logw: Array2<f64>,
    pub acc_d_mu: Array2<f64>,
    pub acc_d_logw: Array2<f64>,
}

#[inline]
pub(crate) fn kernel(t: f64, mu: f64, s: f64) -> f64 {
    let u = t - mu;
    (-(u * u) / (2.0 * s)).exp()
}

#[inline]
pub(crate) fn kernel_acc(t: f64, mu: f64, s: f64) -> f64 {
    let u = t - mu;
    kernel(t, mu, s) * (u * u / (s * s) - 1.0 / s)
}

/// Value, second derivative, and the four parameter partials of one entry.
#[inline]
pub(crate) fn kernel_all(t: f64, mu: f64, s: f64) -> [f64; 6] {
    let u = t - mu;
    let u2 = u * u;
    let inv = 1.0 / s;
    let phi = (-0.5 * u2 * inv).exp();
    let g = u2 * inv * inv - inv;
    let acc = phi * g;
    let phi_d_mu = phi * u * inv;
    let phi_d_logw = 0.5 * phi * u2 * inv;
    let acc_d_mu = phi * u * inv * (g - 2.0 * inv);
    let acc_d_logw = phi * (0.5 * u2 * inv * g - 2.0 * u2 * inv * inv + inv);
    [phi, acc, phi_d_mu, phi_d_logw, acc_d_mu, acc_d_logw]
}

pub fn eval_basis(t: ArrayView1<f64>, params: &RbfParams) -> Array2<f64> {
    Array2::from_shape_fn((t.len(), params.len()), |(i, j)| kernel(t[i], params.mu[j], params.sigma2[j]))
}

pub fn eval_basis_accel(t: ArrayView1<f64>, params: &RbfParams) -> Array2<f64> {
    Array2::from_shape_fn((t.len(), params.len()), |(i, j)| kernel_acc(t[i], params.mu[j], params.sigma2[j]))
}

pub fn eval_both(t: ArrayView1<f64>, params: &RbfParams) -> BasisMatrices {
    BasisMatrices { phi: eval_basis(t, params), phi_acc: eval_basis_accel(t, params) }
}

pub fn eval_basis_param_grads(t: ArrayView1<f64>, params: &RbfParams) -> BasisGrads {
    let shape = (t.len(), params.len());
    let mut out = BasisGrads {
        phi_d_mu: Array2::zeros(shape),
        phi_d_logw: Array2::zeros(shape),
        acc_d_mu: Array2::zeros(shape),
        acc_d_logw: Array2::zeros(shape),
    };
    for i in 0..shape.0 {
        for j in 0..shape.1 {
            let [_, _, a, b, c, d] = kernel_all(t[i], params.mu[j], params.sigma2[j]);
            out.phi_d_mu[[i, j]] = a;
            out.phi_d_logw[[i, j]] = b;
            out.acc_d_mu[[i, j]] = c;
            out.acc_d_logw[[i, j]] = d;
        }
    }
    out
}

/// Basis for per-DoF features: row block `i` holds DoF `i`'s features
/// evaluated on `t`, giving an `Nn x p` matrix.
pub fn stack_basis(t: ArrayView1<f64>, stacked: &StackedRbfParams) -> BasisMatrices {
    let n = t.len();
    let p = stacked.n_features();
    let rows = n * stacked.n_dof();
    let mut phi = Array2::zeros((rows, p));
    let mut phi_acc = Array2::zeros((rows, p));
    for (b, set) in stacked.per_dof.iter().enumerate() {
        let block = eval_both(t, set);
        phi.slice_mut(ndarray::s![b * n..(b + 1) * n, ..]).assign(&block.phi);
        phi_acc.slice_mut(ndarray::s![b * n..(b + 1) * n, ..]).assign(&block.phi_acc);
    }
    BasisMatrices { phi, phi_acc }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_params(rng: &mut ChaCha8Rng, p: usize) -> RbfParams {
        RbfParams::new(
            (0..p).map(|_| rng.random_range(0.0..1.0)).collect(),
            (0..p).map(|_| rng.random_range(0.005..0.1)).collect(),
        )
        .unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
    }

    #[test]
    fn kernel_values() {
        let p = RbfParams::new(vec![0.3], vec![0.04]).unwrap();
        let t = Array1::from(vec![0.3, 0.5]);
        let phi = eval_basis(t.view(), &p);
        assert_eq!(phi[[0, 0]], 1.0);
        assert!((phi[[1, 0]] - 0.606_530_659_712_633_4).abs() < 1e-12);
        let acc = eval_basis_accel(t.view(), &p);
        assert!((acc[[0, 0]] + 1.0 / 0.04).abs() < 1e-9);
        assert!(acc[[1, 0]].abs() < 1e-12);
    }

    #[test]
    fn width_floor_is_enforced() {
        assert!(matches!(RbfParams::new(vec![0.0], vec![1e-7]), Err(Error::WidthBelowFloor { index: 0, .. })));
    }

    #[test]
    fn matrix_matches_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_params(&mut rng, 3);
        let t = Array1::linspace(0.0, 1.0, 5);
        let phi = eval_basis(t.view(), &p);
        for i in 0..5 {
            for j in 0..3 {
                let u = t[i] - p.mu()[j];
                let want = (-u * u / (2.0 * p.sigma2()[j])).exp();
                assert_eq!(phi[[i, j]], want);
            }
        }
    }

    #[test]
    fn accel_matches_finite_differences_in_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = random_params(&mut rng, 4);
        let h = 1e-5;
        for _ in 0..20 {
            let t0 = rng.random_range(0.0..1.0);
            let t = Array1::from(vec![t0 - h, t0, t0 + h]);
            let phi = eval_basis(t.view(), &p);
            let acc = eval_basis_accel(t.view(), &p);
            for j in 0..4 {
                let fd = (phi[[2, j]] - 2.0 * phi[[1, j]] + phi[[0, j]]) / (h * h);
                let scale = 1.0 / p.sigma2()[j];
                assert!((fd - acc[[1, j]]).abs() / scale <= 1e-6, "fd {fd} vs {}", acc[[1, j]]);
            }
        }
    }

    #[test]
    fn grads_vanish_at_center() {
        let p = RbfParams::new(vec![0.4], vec![0.02]).unwrap();
        let t = Array1::from(vec![0.4]);
        let g = eval_basis_param_grads(t.view(), &p);
        assert_eq!(g.phi_d_mu[[0, 0]], 0.0);
        assert_eq!(g.phi_d_logw[[0, 0]], 0.0);
    }

    #[test]
    fn param_grads_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..20 {
            let mu = rng.random_range(0.0..1.0);
            let s: f64 = rng.random_range(0.005..0.1);
            let t = rng.random_range(0.0..1.0);
            let [_, _, a, b, c, d] = kernel_all(t, mu, s);
            let fd_phi_mu = (kernel(t, mu + h, s) - kernel(t, mu - h, s)) / (2.0 * h);
            let (sp, sm) = ((s.ln() + h).exp(), (s.ln() - h).exp());
            let fd_phi_lw = (kernel(t, mu, sp) - kernel(t, mu, sm)) / (2.0 * h);
            let fd_acc_mu = (kernel_acc(t, mu + h, s) - kernel_acc(t, mu - h, s)) / (2.0 * h);
            let fd_acc_lw = (kernel_acc(t, mu, sp) - kernel_acc(t, mu, sm)) / (2.0 * h);
            // compare against the natural scale of each quantity
            let sd = s.sqrt();
            assert!((a - fd_phi_mu).abs() * sd <= 1e-5, "{a} {fd_phi_mu}");
            assert!((b - fd_phi_lw).abs() <= 1e-5 * b.abs().max(1.0));
            assert!((c - fd_acc_mu).abs() * sd * s <= 1e-5, "{c} {fd_acc_mu}");
            assert!((d - fd_acc_lw).abs() * s <= 1e-5, "{d} {fd_acc_lw}");
            assert!(rel_err(a, fd_phi_mu) <= 1e-5 || a.abs() * sd < 1e-8);
        }
    }

    #[test]
    fn entries_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_params(&mut rng, 6);
        let t = Array1::linspace(-0.5, 1.5, 101);
        let phi = eval_basis(t.view(), &p);
        assert!(phi.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn accel_columns_integrate_to_zero() {
        let p = RbfParams::new(vec![0.0, 0.2], vec![0.01, 0.003]).unwrap();
        for j in 0..2 {
            let sd = p.sigma2()[j].sqrt();
            let mu = p.mu()[j];
            let t = Array1::linspace(mu - 6.0 * sd, mu + 6.0 * sd, 4001);
            let single = p.select(&[j]);
            let acc = eval_basis_accel(t.view(), &single);
            let h = t[1] - t[0];
            let col = acc.column(0);
            let integral = h * (col.sum() - 0.5 * (col[0] + col[col.len() - 1]));
            assert!(integral.abs() <= 1e-3, "integral {integral}");
        }
    }

    #[test]
    fn stacked_blocks_match_unstacked() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sets: Vec<_> = (0..3).map(|_| random_params(&mut rng, 5)).collect();
        let stacked = StackedRbfParams::new(sets.clone()).unwrap();
        let t = Array1::linspace(0.0, 1.0, 20);
        let b = stack_basis(t.view(), &stacked);
        assert_eq!(b.phi.dim(), (60, 5));
        for (i, set) in sets.iter().enumerate() {
            let block = eval_both(t.view(), set);
            assert_eq!(b.phi.slice(ndarray::s![i * 20..(i + 1) * 20, ..]), block.phi);
            assert_eq!(b.phi_acc.slice(ndarray::s![i * 20..(i + 1) * 20, ..]), block.phi_acc);
        }
    }

    #[test]
    fn single_dof_stack_equals_plain_basis() {
        let p = RbfParams::uniform(0.0, 1.0, 4, 0.05).unwrap();
        let t = Array1::linspace(0.0, 1.0, 9);
        let stacked = StackedRbfParams::new(vec![p.clone()]).unwrap();
        assert_eq!(stack_basis(t.view(), &stacked), eval_both(t.view(), &p));
    }

    #[test]
    fn inconsistent_feature_counts_rejected() {
        let a = RbfParams::uniform(0.0, 1.0, 4, 0.05).unwrap();
        let b = RbfParams::uniform(0.0, 1.0, 3, 0.05).unwrap();
        assert!(StackedRbfParams::new(vec![a, b]).is_err());
    }
}
