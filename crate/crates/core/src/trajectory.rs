//! Demonstration recordings, centering and the per-DoF stacking layout.
//!
//! A single demonstration is an `N x n` matrix of joint angles sampled on a
//! uniform time grid. Several demonstrations are stacked into an `Nn x d`
//! matrix where sample `k` of joint `i` of demo `j` lives at row `N*i + k`,
//! column `j` (all indices 0-based).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Tolerance on grid spacing regularity, in seconds.
pub const DT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct JointTrajectory {
    t: Array1<f64>,
    q: Array2<f64>,
    dt: f64,
}

impl JointTrajectory {
    pub fn new(t: Array1<f64>, q: Array2<f64>) -> Result<Self> {
        let n_samples = t.len();
        if n_samples < 2 {
            return Err(Error::invalid(format!("a trajectory needs at least 2 samples, got {n_samples}")));
        }
        if q.nrows() != n_samples {
            return Err(Error::DimensionMismatch { axis: "samples", expected: n_samples, found: q.nrows() });
        }
        if q.ncols() == 0 {
            return Err(Error::invalid("a trajectory needs at least one joint"));
        }
        if let Some(bad) = t.iter().chain(q.iter()).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("trajectory entry {bad}")));
        }
        let dt = (t[n_samples - 1] - t[0]) / (n_samples - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::invalid("time grid must be strictly increasing"));
        }
        for k in 1..n_samples {
            let step = t[k] - t[k - 1];
            if (step - dt).abs() > DT_TOLERANCE {
                return Err(Error::NonUniformSampling { index: k, step, dt });
            }
        }
        Ok(Self { t, q, dt })
    }

    /// Trajectory on the grid `t_k = k * dt`.
    pub fn uniform(dt: f64, q: Array2<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let t = Array1::from_iter((0..q.nrows()).map(|k| k as f64 * dt));
        Self::new(t, q)
    }

    pub fn times(&self) -> ArrayView1<'_, f64> {
        self.t.view()
    }

    pub fn positions(&self) -> ArrayView2<'_, f64> {
        self.q.view()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_samples(&self) -> usize {
        self.t.len()
    }

    pub fn n_dof(&self) -> usize {
        self.q.ncols()
    }

    pub fn start_time(&self) -> f64 {
        self.t[0]
    }

    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1] - self.t[0]
    }

    /// Copy of samples `[start, start + len)`, re-based so the first sample is at t = 0.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n_samples() {
            return Err(Error::invalid(format!(
                "window [{start}, {}) exceeds {} samples",
                start + len,
                self.n_samples()
            )));
        }
        let q = self.q.slice(ndarray::s![start..start + len, ..]).to_owned();
        Self::uniform(self.dt, q)
    }
}

/// `d` demonstrations sharing the sample count, joint count and time step.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoSet {
    demos: Vec<JointTrajectory>,
}

impl DemoSet {
    pub fn new(demos: Vec<JointTrajectory>) -> Result<Self> {
        let first = demos.first().ok_or_else(|| Error::invalid("a demo set needs at least one demonstration"))?;
        for demo in &demos[1..] {
            if demo.n_samples() != first.n_samples() {
                return Err(Error::DimensionMismatch {
                    axis: "samples",
                    expected: first.n_samples(),
                    found: demo.n_samples(),
                });
            }
            if demo.n_dof() != first.n_dof() {
                return Err(Error::DimensionMismatch { axis: "joints", expected: first.n_dof(), found: demo.n_dof() });
            }
            if (demo.dt() - first.dt()).abs() > DT_TOLERANCE {
                return Err(Error::invalid(format!("time step {} differs from {}", demo.dt(), first.dt())));
            }
        }
        Ok(Self { demos })
    }

    pub fn demos(&self) -> &[JointTrajectory] {
        &self.demos
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.demos[0].n_samples()
    }

    pub fn n_dof(&self) -> usize {
        self.demos[0].n_dof()
    }

    pub fn dt(&self) -> f64 {
        self.demos[0].dt()
    }

    pub fn times(&self) -> ArrayView1<'_, f64> {
        self.demos[0].times()
    }
}

/// Column-centered data with the removed means kept as intercepts.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredData {
    pub intercepts: Array1<f64>,
    pub centered: Array2<f64>,
}

impl CenteredData {
    pub fn reconstruct(&self) -> Array2<f64> {
        &self.centered + &self.intercepts.view().insert_axis(Axis(0))
    }
}

pub fn center(traj: &JointTrajectory) -> CenteredData {
    center_columns(traj.positions())
}

pub(crate) fn center_columns(q: ArrayView2<f64>) -> CenteredData {
    let n = q.nrows() as f64;
    let intercepts = Array1::from_iter(q.columns().into_iter().map(|c| c.sum() / n));
    let centered = &q - &intercepts.view().insert_axis(Axis(0));
    CenteredData { intercepts, centered }
}

/// Demonstrations stacked per DoF: `Nn` rows, one column per demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedData {
    pub y: Array2<f64>,
    n_samples: usize,
    n_dof: usize,
}

impl StackedData {
    pub fn from_matrix(y: Array2<f64>, n_samples: usize, n_dof: usize) -> Result<Self> {
        if y.nrows() != n_samples * n_dof {
            return Err(Error::DimensionMismatch {
                axis: "stacked rows",
                expected: n_samples * n_dof,
                found: y.nrows(),
            });
        }
        Ok(Self { y, n_samples, n_dof })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn n_demos(&self) -> usize {
        self.y.ncols()
    }

    /// Row of sample `k` of joint `dof`.
    pub fn row_index(&self, dof: usize, k: usize) -> usize {
        self.n_samples * dof + k
    }

    /// Recovers the `N x n` matrix of every demonstration.
    pub fn unstack(&self) -> Vec<Array2<f64>> {
        (0..self.n_demos())
            .map(|j| Array2::from_shape_fn((self.n_samples, self.n_dof), |(k, i)| self.y[[self.row_index(i, k), j]]))
            .collect()
    }
}

pub fn stack_demoset(demos: &DemoSet) -> StackedData {
    let n_samples = demos.n_samples();
    let n_dof = demos.n_dof();
    let mut y = Array2::<f64>::zeros((n_samples * n_dof, demos.len()));
    for (j, demo) in demos.demos().iter().enumerate() {
        let q = demo.positions();
        for i in 0..n_dof {
            for k in 0..n_samples {
                y[[n_samples * i + k, j]] = q[[k, i]];
            }
        }
    }
    StackedData { y, n_samples, n_dof }
}

/// Per-demo, per-DoF centering of stacked data.
///
/// `intercepts[[i, j]]` is the mean of joint `i` in demo `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredStack {
    pub intercepts: Array2<f64>,
    pub centered: StackedData,
}

impl CenteredStack {
    pub fn reconstruct(&self) -> StackedData {
        let mut y = self.centered.y.clone();
        let n = self.centered.n_samples;
        for i in 0..self.centered.n_dof {
            for j in 0..y.ncols() {
                let c = self.intercepts[[i, j]];
                y.slice_mut(ndarray::s![n * i..n * (i + 1), j]).mapv_inplace(|v| v + c);
            }
        }
        StackedData { y, n_samples: n, n_dof: self.centered.n_dof }
    }
}

pub fn center_stacked(stacked: &StackedData) -> CenteredStack {
    let n = stacked.n_samples;
    let mut y = stacked.y.clone();
    let mut intercepts = Array2::<f64>::zeros((stacked.n_dof, y.ncols()));
    for i in 0..stacked.n_dof {
        for j in 0..y.ncols() {
            let mut block = y.slice_mut(ndarray::s![n * i..n * (i + 1), j]);
            let mean = block.sum() / n as f64;
            block.mapv_inplace(|v| v - mean);
            intercepts[[i, j]] = mean;
        }
    }
    CenteredStack { intercepts, centered: StackedData { y, n_samples: n, n_dof: stacked.n_dof } }
}
