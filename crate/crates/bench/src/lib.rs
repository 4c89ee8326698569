//! Shared fixtures for the benchmarks.

use lsdp_core::elastic_net::{lambda_max, to_lasso, AugmentedProblem};
use lsdp_core::rbf::{eval_both, RbfParams};
use lsdp_core::synth::{synth_demoset, PlantedSpec, SynthOutput};
use lsdp_core::trajectory::center;
use lsdp_core::SolveOptions;
use ndarray::Array1;

/// The default planted fixture: 5 demos of 500 samples on 7 joints.
pub fn fixture() -> SynthOutput {
    synth_demoset(&PlantedSpec::default()).expect("default fixture")
}

/// Local time axis of the fixture demos, starting at zero.
pub fn local_times(out: &SynthOutput) -> Array1<f64> {
    let demo = &out.demos.demos()[0];
    Array1::linspace(0.0, demo.duration(), demo.n_samples())
}

/// An elastic-net problem on demo 0 with `p` evenly spread kernels of half
/// the spacing in standard deviation, and its largest useful `lambda1`.
pub fn en_problem(out: &SynthOutput, p: usize, lambda2: f64) -> (AugmentedProblem, f64) {
    let t = local_times(out);
    let params = kernels(&t, p);
    let basis = eval_both(t.view(), &params);
    let data = center(&out.demos.demos()[0]);
    let prob = to_lasso(basis.phi.view(), basis.phi_acc.view(), data.centered.view(), lambda2).expect("problem");
    let lmax = lambda_max(&prob);
    (prob, lmax)
}

pub fn kernels(t: &Array1<f64>, p: usize) -> RbfParams {
    let end = t[t.len() - 1];
    let spacing = end / p.max(2).saturating_sub(1) as f64;
    RbfParams::uniform(0.0, end, p, 0.25 * spacing * spacing).expect("kernels")
}

/// Solver settings with a KKT tolerance relative to `lambda_max`.
pub fn solve_opts(lmax: f64) -> SolveOptions {
    SolveOptions::with_tol(1e-8 * lmax)
}
