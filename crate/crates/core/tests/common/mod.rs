//! Shared helpers for the gradient tests.

#![allow(dead_code)]

use garchnet::mlp::{MlpArchitecture, Network};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Loop-based forward pass written independently of the matrix code.
pub fn naive_forward(layers: &[Array2<f64>], input: &[f64]) -> f64 {
    let mut a = input.to_vec();
    for (h, w) in layers.iter().enumerate() {
        let mut z = vec![0.0; w.ncols()];
        for (i, zi) in z.iter_mut().enumerate() {
            *zi = w[[0, i]];
            for (k, ak) in a.iter().enumerate() {
                *zi += ak * w[[k + 1, i]];
            }
        }
        a = if h + 1 < layers.len() {
            z.into_iter().map(|v| v.max(0.0)).collect()
        } else {
            z
        };
    }
    a[0]
}

pub fn naive_msd(layers: &[Array2<f64>], x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let n = x.nrows();
    (0..n)
        .map(|i| {
            let r = naive_forward(layers, x.row(i).as_slice().unwrap()) - y[i];
            r * r
        })
        .sum::<f64>()
        / n as f64
}

pub fn random_case(seed: u64) -> (Network, Array2<f64>, Array1<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth = rng.random_range(1..=3);
    let hidden: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=8)).collect();
    let arch = MlpArchitecture::new(3, hidden, 1).unwrap();
    let mut net = Network::init(arch.clone(), seed);
    let mut layers = net.layers().to_vec();
    for layer in layers.iter_mut() {
        for b in layer.row_mut(0).iter_mut() {
            *b = rng.random_range(-0.3..0.3);
        }
    }
    net = Network::from_layers(arch, layers).unwrap();
    let rows = rng.random_range(1..=6);
    let x = Array2::from_shape_fn((rows, 3), |_| rng.random_range(0.0..1.0));
    let y = Array1::from_shape_fn(rows, |_| rng.random_range(0.0..1.0));
    (net, x, y)
}

/// Largest |analytic - central difference| over every weight.
pub fn max_gradient_error(net: &Network, x: &Array2<f64>, y: &Array1<f64>) -> f64 {
    let step = 1e-6;
    let grads = net.backward(x.view(), y.view()).unwrap();
    let mut worst: f64 = 0.0;
    let base = net.layers().to_vec();
    for (l, layer) in base.iter().enumerate() {
        for idx in 0..layer.len() {
            let (r, c) = (idx / layer.ncols(), idx % layer.ncols());
            let mut plus = base.clone();
            plus[l][[r, c]] += step;
            let mut minus = base.clone();
            minus[l][[r, c]] -= step;
            let fd = (naive_msd(&plus, x, y) - naive_msd(&minus, x, y)) / (2.0 * step);
            worst = worst.max((grads.layers[l][[r, c]] - fd).abs());
        }
    }
    worst
}
