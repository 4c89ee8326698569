//! Fixed-basis comparison methods.

pub mod dmp;
pub mod ridge;

pub use dmp::{rollout_dmp, train_dmp, DmpGains, DmpModel, DmpRollout};
pub use ridge::{train_ridge, RidgeModel};
