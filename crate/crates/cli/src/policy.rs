//! JSON policy files.
//!
//! One schema covers every method. `centers` and `widths` hold one list per
//! feature block: a single block for `lsdp`, `dmp` and `ridge`, one per joint
//! for `clsdp`. Widths are variances in s^2, except for `dmp`, where centers
//! and widths live in phase space and widths are inverse squared widths.
//! Floats are written in shortest round-trip form, so a load/save cycle
//! reproduces every number bit for bit.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use lsdp_core::baselines::{DmpGains, DmpModel, RidgeModel};
use lsdp_core::trainer::PrimitiveMeta;
use lsdp_core::{CoefMatrix, FitReport, JointTrajectory, Mode, RbfParams, StackedRbfParams, TrainedPrimitive};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lsdp,
    Clsdp,
    Dmp,
    Ridge,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lsdp => "lsdp",
            Method::Clsdp => "clsdp",
            Method::Dmp => "dmp",
            Method::Ridge => "ridge",
        }
    }
}

/// Coefficients with all-zero rows left out. `rows` is ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseRows {
    pub n_rows: usize,
    pub n_cols: usize,
    pub rows: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

impl SparseRows {
    pub fn from_dense(w: &Array2<f64>) -> Self {
        // compare bits so that a row holding only -0.0 survives
        let rows: Vec<usize> = (0..w.nrows()).filter(|&j| w.row(j).iter().any(|v| v.to_bits() != 0)).collect();
        let values = rows.iter().map(|&j| w.row(j).to_vec()).collect();
        Self { n_rows: w.nrows(), n_cols: w.ncols(), rows, values }
    }

    pub fn to_dense(&self) -> Result<Array2<f64>> {
        ensure!(
            self.rows.len() == self.values.len(),
            "coefficients: {} row indices but {} value rows",
            self.rows.len(),
            self.values.len()
        );
        ensure!(self.rows.windows(2).all(|w| w[0] < w[1]), "coefficients: active rows must be strictly ascending");
        let mut w = Array2::zeros((self.n_rows, self.n_cols));
        for (&j, vals) in self.rows.iter().zip(&self.values) {
            ensure!(j < self.n_rows, "coefficients: row {j} out of range for {} rows", self.n_rows);
            ensure!(
                vals.len() == self.n_cols,
                "coefficients: row {j} has {} values, expected {}",
                vals.len(),
                self.n_cols
            );
            w.row_mut(j).assign(&Array1::from(vals.clone()));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmpFields {
    pub goal: Vec<f64>,
    pub start: Vec<f64>,
    pub tau: f64,
    pub gains: DmpGains,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub n_samples: usize,
    pub cost: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub converged: bool,
    pub seed: u64,
    /// The settings the model was trained with.
    pub config: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub schema_version: u32,
    pub method: Method,
    pub dt: f64,
    pub duration: f64,
    /// Joints.
    pub n: usize,
    /// Demonstrations the coefficients cover.
    pub d: usize,
    /// `n` rows; one column for `lsdp` and `ridge`, `d` for `clsdp`, none for `dmp`.
    pub intercepts: Vec<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub widths: Vec<Vec<f64>>,
    pub coefficients: SparseRows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmp: Option<DmpFields>,
    pub metadata: Metadata,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ground_truth: bool,
}

/// A loaded policy, ready to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Primitive(TrainedPrimitive),
    Dmp(DmpModel),
    Ridge(RidgeModel),
}

impl Model {
    /// Metrics on `demos`. Coupled primitives take all their demos at once;
    /// the other models are scored on each demo in turn.
    pub fn fit_reports(&self, demos: &[JointTrajectory]) -> Result<Vec<FitReport>> {
        let reports = match self {
            Model::Primitive(p) if p.mode == Mode::Coupled => vec![p.fit_report(demos)?],
            Model::Primitive(p) => {
                demos.iter().map(|d| p.fit_report(std::slice::from_ref(d))).collect::<Result<_, _>>()?
            }
            Model::Dmp(m) => demos.iter().map(|d| m.fit_report(d)).collect::<Result<_, _>>()?,
            Model::Ridge(m) => demos.iter().map(|d| m.fit_report(d)).collect::<Result<_, _>>()?,
        };
        Ok(reports)
    }
}

fn rows_of(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn matrix(rows: &[Vec<f64>], n_rows: usize, n_cols: usize, what: &str) -> Result<Array2<f64>> {
    ensure!(rows.len() == n_rows, "{what}: expected {n_rows} rows, found {}", rows.len());
    let mut out = Array2::zeros((n_rows, n_cols));
    for (i, r) in rows.iter().enumerate() {
        ensure!(r.len() == n_cols, "{what}: row {i} has {} values, expected {n_cols}", r.len());
        out.row_mut(i).assign(&Array1::from(r.clone()));
    }
    Ok(out)
}

impl PolicyFile {
    pub fn from_primitive(p: &TrainedPrimitive, seed: u64, config: Value) -> Self {
        let m = &p.meta;
        Self {
            schema_version: SCHEMA_VERSION,
            method: match p.mode {
                Mode::Single => Method::Lsdp,
                Mode::Coupled => Method::Clsdp,
            },
            dt: m.dt,
            duration: m.duration,
            n: m.n_dof,
            d: m.n_demos,
            intercepts: rows_of(&p.intercepts),
            centers: p.features.per_dof().iter().map(|b| b.mu().to_vec()).collect(),
            widths: p.features.per_dof().iter().map(|b| b.sigma2().to_vec()).collect(),
            coefficients: SparseRows::from_dense(&p.coef.values().to_owned()),
            dmp: None,
            metadata: Metadata {
                n_samples: m.n_samples,
                cost: m.cost,
                residual_norm: m.residual_norm,
                iterations: m.iterations,
                lambda1: m.lambda1,
                lambda2: m.lambda2,
                converged: m.converged,
                seed,
                config,
            },
            ground_truth: false,
        }
    }

    pub fn from_dmp(model: &DmpModel, demo: &JointTrajectory, report: &FitReport, config: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            method: Method::Dmp,
            dt: model.dt,
            duration: model.tau,
            n: model.n_dof(),
            d: 1,
            intercepts: vec![Vec::new(); model.n_dof()],
            centers: vec![model.centers.to_vec()],
            widths: vec![model.widths.to_vec()],
            coefficients: SparseRows::from_dense(&model.weights),
            dmp: Some(DmpFields {
                goal: model.goal.to_vec(),
                start: model.start.to_vec(),
                tau: model.tau,
                gains: model.gains,
            }),
            metadata: Metadata {
                n_samples: demo.n_samples(),
                cost: report.cost,
                residual_norm: report.res_norm,
                iterations: 0,
                lambda1: 0.0,
                lambda2: 0.0,
                converged: true,
                seed: 0,
                config,
            },
            ground_truth: false,
        }
    }

    pub fn from_ridge(model: &RidgeModel, demo: &JointTrajectory, report: &FitReport, config: Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            method: Method::Ridge,
            dt: demo.dt(),
            duration: model.duration,
            n: model.n_dof(),
            d: 1,
            intercepts: model.intercepts.iter().map(|&v| vec![v]).collect(),
            centers: vec![model.basis.mu().to_vec()],
            widths: vec![model.basis.sigma2().to_vec()],
            coefficients: SparseRows::from_dense(&model.coef),
            dmp: None,
            metadata: Metadata {
                n_samples: demo.n_samples(),
                cost: report.cost,
                residual_norm: report.res_norm,
                iterations: 0,
                lambda1: 0.0,
                lambda2: model.lambda2,
                converged: true,
                seed: 0,
                config,
            },
            ground_truth: false,
        }
    }

    fn blocks(&self) -> Result<Vec<RbfParams>> {
        ensure!(
            self.centers.len() == self.widths.len(),
            "{} center blocks but {} width blocks",
            self.centers.len(),
            self.widths.len()
        );
        self.centers
            .iter()
            .zip(&self.widths)
            .map(|(mu, s2)| RbfParams::new(mu.clone(), s2.clone()).context("invalid feature block"))
            .collect()
    }

    fn single_block(&self) -> Result<RbfParams> {
        let mut blocks = self.blocks()?;
        ensure!(blocks.len() == 1, "{} policies hold one feature block, found {}", self.method.name(), blocks.len());
        Ok(blocks.remove(0))
    }

    pub fn to_model(&self) -> Result<Model> {
        ensure!(self.schema_version == SCHEMA_VERSION, "unsupported schema version {}", self.schema_version);
        let coef = self.coefficients.to_dense()?;
        match self.method {
            Method::Lsdp | Method::Clsdp => {
                let (mode, icols) = match self.method {
                    Method::Lsdp => (Mode::Single, 1),
                    _ => (Mode::Coupled, self.d),
                };
                let m = &self.metadata;
                let prim = TrainedPrimitive {
                    mode,
                    features: StackedRbfParams::new(self.blocks()?)?,
                    coef: CoefMatrix::new(coef)?,
                    intercepts: matrix(&self.intercepts, self.n, icols, "intercepts")?,
                    meta: PrimitiveMeta {
                        n_samples: m.n_samples,
                        n_dof: self.n,
                        n_demos: self.d,
                        dt: self.dt,
                        duration: self.duration,
                        cost: m.cost,
                        residual_norm: m.residual_norm,
                        iterations: m.iterations,
                        lambda1: m.lambda1,
                        lambda2: m.lambda2,
                        converged: m.converged,
                    },
                };
                prim.check()?;
                Ok(Model::Primitive(prim))
            }
            Method::Dmp => {
                let Some(f) = &self.dmp else { bail!("dmp policy without a dmp section") };
                let basis = self.single_block()?;
                ensure!(coef.dim() == (basis.len(), self.n), "dmp weights must be {} x {}", basis.len(), self.n);
                ensure!(
                    f.goal.len() == self.n && f.start.len() == self.n,
                    "dmp goal and start need {} entries",
                    self.n
                );
                Ok(Model::Dmp(DmpModel {
                    weights: coef,
                    goal: Array1::from(f.goal.clone()),
                    start: Array1::from(f.start.clone()),
                    tau: f.tau,
                    gains: f.gains,
                    centers: Array1::from(basis.mu().to_vec()),
                    widths: Array1::from(basis.sigma2().to_vec()),
                    dt: self.dt,
                }))
            }
            Method::Ridge => {
                let basis = self.single_block()?;
                ensure!(coef.dim() == (basis.len(), self.n), "ridge coefficients must be {} x {}", basis.len(), self.n);
                let intercepts = matrix(&self.intercepts, self.n, 1, "intercepts")?;
                Ok(Model::Ridge(RidgeModel {
                    basis,
                    coef,
                    intercepts: intercepts.column(0).to_owned(),
                    lambda2: self.metadata.lambda2,
                    duration: self.duration,
                }))
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use lsdp_core::baselines::{train_dmp, train_ridge};

    fn demo() -> JointTrajectory {
        let q = Array2::from_shape_fn((200, 2), |(k, i)| (0.03 * k as f64 + i as f64).sin());
        JointTrajectory::uniform(0.005, q).unwrap()
    }

    #[test]
    fn sparse_rows_keep_negative_zero_and_drop_zero_rows() {
        let w = ndarray::array![[0.0, 0.0], [-0.0, 0.0], [1.5, -2.0]];
        let s = SparseRows::from_dense(&w);
        assert_eq!(s.rows, vec![1, 2]);
        let back = s.to_dense().unwrap();
        assert!(back.iter().zip(w.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn unsorted_rows_are_rejected() {
        let s = SparseRows { n_rows: 3, n_cols: 1, rows: vec![2, 0], values: vec![vec![1.0], vec![2.0]] };
        assert!(s.to_dense().is_err());
    }

    #[test]
    fn baseline_models_survive_a_round_trip() {
        let d = demo();
        let dmp = train_dmp(&d, 10, DmpGains::default()).unwrap();
        let r = dmp.fit_report(&d).unwrap();
        let file = PolicyFile::from_dmp(&dmp, &d, &r, Value::Null);
        let back = PolicyFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back.to_model().unwrap(), Model::Dmp(dmp));

        let ridge = train_ridge(&d, 10, 1e-6).unwrap();
        let r = ridge.fit_report(&d).unwrap();
        let file = PolicyFile::from_ridge(&ridge, &d, &r, Value::Null);
        let back = PolicyFile::from_json(&file.to_json().unwrap()).unwrap();
        assert_eq!(back.to_model().unwrap(), Model::Ridge(ridge));
    }

    #[test]
    fn coupled_policy_needs_one_block_per_joint() {
        let d = demo();
        let ridge = train_ridge(&d, 4, 1e-6).unwrap();
        let r = ridge.fit_report(&d).unwrap();
        let mut file = PolicyFile::from_ridge(&ridge, &d, &r, Value::Null);
        file.method = Method::Clsdp;
        assert!(file.to_model().is_err());
    }
}
