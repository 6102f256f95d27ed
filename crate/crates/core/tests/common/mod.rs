//! Shared helpers for the integration suites: a seeded generator of
//! structurally valid networks and an elimination-based kernel oracle
//! kept independent of the library's power-iteration path.

use crnzero::linalg::Mat;
use crnzero::network::{validate_network, Network};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Draws a network satisfying all four structural hypotheses, with
/// 2 ≤ m ≤ n ≤ `max_species`, integer complex coefficients in 0..=3 and
/// rates in [0.1, 2).
pub fn random_valid_network(rng: &mut ChaCha8Rng, max_species: usize) -> Network {
    loop {
        let n = rng.random_range(2..=max_species);
        let m = rng.random_range(2..=n);
        let mut complexes = Mat::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                if rng.random_bool(0.6) {
                    complexes.set(i, j, rng.random_range(1..=3) as f64);
                }
            }
        }
        // repair empty rows and columns so the draw is rarely wasted
        for i in 0..n {
            if (0..m).all(|j| complexes.at(i, j) == 0.0) {
                complexes.set(i, rng.random_range(0..m), 1.0);
            }
        }
        for j in 0..m {
            if (0..n).all(|i| complexes.at(i, j) == 0.0) {
                complexes.set(rng.random_range(0..n), j, 1.0);
            }
        }
        // a random cycle keeps the reaction graph strongly connected;
        // extra edges add irregularity
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let mut rates = Mat::zeros(m, m);
        for k in 0..m {
            let source = order[k];
            let target = order[(k + 1) % m];
            rates.set(target, source, rng.random_range(0.1..2.0));
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && rng.random_bool(0.25) && rates.at(i, j) == 0.0 {
                    rates.set(i, j, rng.random_range(0.1..2.0));
                }
            }
        }
        let net = match Network::from_matrices(rates, complexes) {
            Ok(net) => net,
            Err(_) => continue,
        };
        if validate_network(&net).overall {
            return net;
        }
    }
}

/// Kernel direction of a square matrix with one-dimensional null space,
/// by Gauss-Jordan elimination: reduce, set the single free variable to
/// one, back-substitute, normalize to unit 1-norm with positive sign.
///
/// Independent oracle: no code shared with the power-iteration path.
pub fn kernel_by_elimination(matrix: &Mat) -> Vec<f64> {
    let m = matrix.rows();
    assert_eq!(m, matrix.cols());
    let mut a: Vec<Vec<f64>> = (0..m).map(|i| matrix.row(i).to_vec()).collect();
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = 1e-12 * scale.max(1.0);

    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..m {
        let mut best = row;
        for r in row..m {
            if a[r][col].abs() > a[best][col].abs() {
                best = r;
            }
        }
        if a[best][col].abs() <= tol {
            continue;
        }
        a.swap(row, best);
        let piv = a[row][col];
        for v in a[row].iter_mut() {
            *v /= piv;
        }
        for r in 0..m {
            if r != row {
                let factor = a[r][col];
                if factor != 0.0 {
                    let pivot_row = a[row].clone();
                    for (v, p) in a[r].iter_mut().zip(&pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    assert_eq!(
        pivot_cols.len(),
        m - 1,
        "matrix does not have a one-dimensional kernel"
    );
    let free_col = (0..m)
        .find(|c| !pivot_cols.contains(c))
        .expect("one free column");
    let mut kernel = vec![0.0; m];
    kernel[free_col] = 1.0;
    for (r, &pc) in pivot_cols.iter().enumerate() {
        kernel[pc] = -a[r][free_col];
    }
    let total: f64 = kernel.iter().sum();
    let norm: f64 = kernel.iter().map(|v| v.abs()).sum();
    let sign = if total < 0.0 { -1.0 } else { 1.0 };
    kernel.iter().map(|v| sign * v / norm).collect()
}

/// A strictly positive point of the class through a strictly positive
/// `anchor`, perturbed pseudo-randomly along the reaction subspace. The
/// perturbation is halved until every component stays above a floor
/// proportional to the anchor scale, so draws are interior but not
/// microscopically so.
pub fn random_class_point(
    basis: &crnzero::network::StoichBasis,
    anchor: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let scale = anchor.iter().cloned().fold(0.0f64, f64::max);
    let floor = 1e-3 * scale;
    let coeffs: Vec<f64> = basis
        .reaction_basis
        .iter()
        .map(|_| rng.random_range(-1.0..1.0) * scale)
        .collect();
    let mut step = 1.0f64;
    for _ in 0..60 {
        let mut x = anchor.to_vec();
        for (c, d) in coeffs.iter().zip(&basis.reaction_basis) {
            for (xi, di) in x.iter_mut().zip(d) {
                *xi += step * c * di;
            }
        }
        if x.iter().all(|&v| v > floor) {
            return x;
        }
        step *= 0.5;
    }
    anchor.to_vec()
}
