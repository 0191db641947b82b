#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spline2relu::{AffineLayer, Cpwl, Network, ReluNetwork};

/// A spline with `n` random interior breakpoints (at least `1e-6` apart)
/// and values in `[-1, 1]`.
pub fn random_spline(rng: &mut ChaCha8Rng, n: usize) -> Cpwl {
    let mut xs: Vec<f64> = Vec::with_capacity(n + 2);
    while xs.len() < n {
        let x: f64 = rng.gen_range(1e-6..1.0 - 1e-6);
        if xs.iter().all(|y| (x - y).abs() > 1e-6) {
            xs.push(x);
        }
    }
    xs.push(0.0);
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    let vs = xs.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    Cpwl::new(xs, vs).unwrap()
}

/// A dense network with weights in `[-1, 1]` and biases in `[-1/2, 1/2]`.
pub fn random_net(rng: &mut ChaCha8Rng, width: usize, depth: usize) -> ReluNetwork {
    let mut layers = Vec::with_capacity(depth + 1);
    for l in 0..=depth {
        let rows = if l == depth { 1 } else { width };
        let cols = if l == 0 { 1 } else { width };
        let w = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = (0..rows).map(|_| rng.gen_range(-0.5..0.5)).collect();
        layers.push(AffineLayer::new(rows, cols, w, b).unwrap());
    }
    ReluNetwork::new(layers).unwrap()
}

/// `random_net` rescaled at the output so that its range on `[0, 1]` is
/// inside `[0, 1]`.
pub fn random_unit_net(rng: &mut ChaCha8Rng, width: usize, depth: usize) -> ReluNetwork {
    let net = random_net(rng, width, depth);
    let f = net.extract_cpwl().unwrap();
    let (lo, hi) = (f.min_value(), f.max_value());
    if hi - lo < 1e-9 {
        return net.affine_output(0.0, rng.gen_range(0.0..1.0));
    }
    let shrink = rng.gen_range(0.5..1.0);
    let net = net.affine_output(shrink / (hi - lo), -shrink * lo / (hi - lo));
    net.affine_output(1.0, rng.gen_range(0.0..1.0 - shrink))
}

/// A member of the unit Lip-α ball vanishing at 0 and 1: a convex mix of
/// `|x - t|^α` and a 1-Lipschitz walk, clamped to `±min(x, 1-x)^α`.
pub fn lip_sample(rng: &mut ChaCha8Rng, alpha: f64) -> impl Fn(f64) -> f64 {
    let t: f64 = rng.gen_range(0.0..1.0);
    let mix: f64 = rng.gen_range(0.0..1.0);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let n = 32;
    let mut v = vec![0.0; n + 1];
    for i in 0..n {
        v[i + 1] = v[i] + rng.gen_range(-1.0..1.0) / n as f64;
    }
    let walk = Cpwl::new((0..=n).map(|i| i as f64 / n as f64).collect(), v).unwrap();
    move |x: f64| {
        let w = sign * mix * (x - t).abs().powf(alpha) + (1.0 - mix) * walk.eval_clamped(x);
        let cap = x.min(1.0 - x).powf(alpha);
        w.clamp(-cap, cap)
    }
}
