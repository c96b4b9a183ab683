//! Reference implementations shared by the integration tests. They are
//! written for clarity, not speed, and share no code with the library.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Sum of squared residuals after a least-squares polynomial fit of
/// degree `order`, via the normal equations on abscissae scaled to [-1, 1].
fn poly_residual(y: &[f64], order: usize) -> f64 {
    let w = y.len();
    let half = (w - 1) as f64 / 2.0;
    let u: Vec<f64> = (0..w).map(|t| (t as f64 - half) / half).collect();
    let p = order + 1;
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for (ut, yt) in u.iter().zip(y) {
        for i in 0..p {
            b[i] += ut.powi(i as i32) * yt;
            for j in 0..p {
                a[i][j] += ut.powi((i + j) as i32);
            }
        }
    }
    let c = solve(a, b);
    u.iter()
        .zip(y)
        .map(|(ut, yt)| {
            let fit: f64 = c
                .iter()
                .enumerate()
                .map(|(i, ci)| ci * ut.powi(i as i32))
                .sum();
            (yt - fit).powi(2)
        })
        .sum()
}

/// DFA fluctuation at one window: profile of deviations from the mean,
/// windows laid from both ends, RMS of all residuals.
pub fn naive_fluctuation(series: &[f64], window: usize, order: usize) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut profile = Vec::with_capacity(n);
    let mut acc = 0.0;
    for x in series {
        acc += x - mean;
        profile.push(acc);
    }
    let m = n / window;
    let mut total = 0.0;
    for k in 0..m {
        total += poly_residual(&profile[k * window..(k + 1) * window], order);
        total += poly_residual(&profile[n - (k + 1) * window..n - k * window], order);
    }
    (total / (2 * m * window) as f64).sqrt()
}

pub fn gaussian(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// AR(1) with coefficient `phi`.
pub fn ar1(n: usize, phi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x = phi * x + e;
            x
        })
        .collect()
}
