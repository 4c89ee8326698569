use lsdp_core::features::{encode, FeatureObjective};
use lsdp_core::rbf::RbfParams;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_case(rng: &mut ChaCha8Rng, blocks: usize) -> (Array1<f64>, Array2<f64>, Array2<f64>, Array1<f64>, f64) {
    let n = rng.random_range(20..60);
    let p = rng.random_range(1..6);
    let m = rng.random_range(1..4);
    let t = Array1::linspace(0.0, 1.0, n);
    let y = Array2::from_shape_fn((blocks * n, m), |_| rng.random_range(-1.0..1.0));
    let w = Array2::from_shape_fn((p, m), |_| rng.random_range(-2.0..2.0));
    let sets: Vec<RbfParams> = (0..blocks)
        .map(|_| {
            RbfParams::new(
                (0..p).map(|_| rng.random_range(0.0..1.0)).collect(),
                (0..p).map(|_| rng.random_range(0.01..0.1)).collect(),
            )
            .unwrap()
        })
        .collect();
    let lambda2 = 10f64.powf(rng.random_range(-6.0..-2.0));
    (t, y, w, encode(&sets), lambda2)
}

/// Largest relative error between the analytic gradient and central
/// differences, using a step scaled to each coordinate.
fn worst_relative_error(blocks: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t, y, w, theta, lambda2) = random_case(&mut rng, blocks);
    let obj = FeatureObjective::new(t.view(), y.view(), w.view(), lambda2, blocks).unwrap();
    let grad = obj.grad(theta.view()).unwrap();
    let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs())).max(1e-8);
    let mut worst = 0.0f64;
    for k in 0..theta.len() {
        let h = 1e-5 * theta[k].abs().max(1.0);
        let mut up = theta.clone();
        up[k] += h;
        let mut down = theta.clone();
        down[k] -= h;
        let fd = (obj.cost(up.view()).unwrap() - obj.cost(down.view()).unwrap()) / (2.0 * h);
        // relative to the gradient's overall scale so near-zero entries do not dominate
        worst = worst.max((fd - grad[k]).abs() / scale);
    }
    worst
}

#[test]
fn shared_feature_gradient_matches_central_differences() {
    for seed in 0..10 {
        let e = worst_relative_error(1, seed);
        assert!(e <= 1e-5, "seed {seed}: relative error {e:e}");
    }
}

#[test]
fn stacked_feature_gradient_matches_central_differences() {
    for seed in 100..110 {
        let e = worst_relative_error(3, seed);
        assert!(e <= 1e-5, "seed {seed}: relative error {e:e}");
    }
}

#[test]
fn cost_is_consistent_with_direct_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (t, y, w, theta, lambda2) = random_case(&mut rng, 2);
    let obj = FeatureObjective::new(t.view(), y.view(), w.view(), lambda2, 2).unwrap();
    let p = w.nrows();
    let n = t.len();
    let mut want = 0.0;
    for b in 0..2 {
        for i in 0..n {
            for c in 0..w.ncols() {
                let mut fit = 0.0;
                let mut acc = 0.0;
                for j in 0..p {
                    let mu = theta[b * p + j];
                    let s = theta[(2 + b) * p + j].exp();
                    let u = t[i] - mu;
                    let e = (-u * u / (2.0 * s)).exp();
                    fit += e * w[[j, c]];
                    acc += e * (u * u / (s * s) - 1.0 / s) * w[[j, c]];
                }
                want += (y[[b * n + i, c]] - fit).powi(2) + lambda2 * acc * acc;
            }
        }
    }
    let got = obj.cost(theta.view()).unwrap();
    assert!((got - want).abs() <= 1e-10 * want.max(1.0));
}
