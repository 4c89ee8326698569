//! Sparse radial-basis movement primitives.
//!
//! A primitive is a sum of Gaussian kernels plus an intercept per joint. The
//! learners alternate a multi-task Elastic Net over the coefficients with
//! BFGS over the kernel centers and widths, pruning kernels whose rows go
//! to zero. Ranking follows the Elastic Net regularization path.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod baselines;
pub mod bfgs;
pub mod elastic_net;
pub mod error;
pub mod features;
pub mod io;
pub mod linalg;
pub mod path;
pub mod rbf;
pub mod segment;
pub mod synth;
pub mod trainer;
pub mod trajectory;

pub use baselines::{DmpModel, RidgeModel};
pub use elastic_net::{AugmentedProblem, CoefMatrix, SolveOptions};
pub use error::{Error, Result};
pub use path::{FeatureRanking, PathGrid, PathResult};
pub use rbf::{RbfParams, StackedRbfParams};
pub use trainer::{FitReport, Mode, TrainOutcome, TrainedPrimitive, TrainerConfig};
pub use trajectory::{DemoSet, JointTrajectory};
