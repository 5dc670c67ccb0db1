//! Oracles shared by the integration tests. Nothing here calls the
//! estimator code it is used to check.
#![allow(dead_code)]

use biphoton_capacity::{Alignment, Basis, GaussianBiphotonState, JointDistribution, SweepParams};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

pub fn reference_matrix(n: usize, basis: Basis, alignment: Alignment) -> JointDistribution {
    SweepParams::default()
        .theory_matrix(&GaussianBiphotonState::reference(), n, basis, alignment)
        .unwrap()
}

/// Plug-in MI of sparse `(row, col, count)` cells, written from the
/// definition `sum p log2(p / (p_a p_b))`.
pub fn plugin_mi(cells: &[(usize, usize, f64)], n_a: usize, n_b: usize) -> f64 {
    let total: f64 = cells.iter().map(|c| c.2).sum();
    let mut rows = vec![0.0; n_a];
    let mut cols = vec![0.0; n_b];
    for &(m, n, c) in cells {
        rows[m] += c;
        cols[n] += c;
    }
    cells
        .iter()
        .filter(|c| c.2 > 0.0)
        .map(|&(m, n, c)| c / total * (c * total / (rows[m] * cols[n])).log2())
        .sum()
}

/// Standard deviation of the plug-in MI over parametric bootstrap
/// replicates, each cell redrawn as Poisson(observed count).
pub fn bootstrap_mi_std(counts: &Array2<u64>, replicates: usize, seed: u64) -> f64 {
    let cells: Vec<(usize, usize, f64)> = counts
        .indexed_iter()
        .filter(|(_, &c)| c > 0)
        .map(|((m, n), &c)| (m, n, c as f64))
        .collect();
    let (n_a, n_b) = counts.dim();
    let values: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let resampled: Vec<(usize, usize, f64)> = cells
                .iter()
                .map(|&(m, n, c)| (m, n, Poisson::new(c).unwrap().sample(&mut rng)))
                .collect();
            plugin_mi(&resampled, n_a, n_b)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / replicates as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replicates - 1) as f64).sqrt()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Mutual information of the continuous state (both axes, bits) by direct
/// quadrature of `p log2(p / (p_a p_b))` over one axis's joint density, with
/// the marginals themselves obtained by quadrature of the density.
pub fn continuous_mi_by_quadrature(state: &GaussianBiphotonState, basis: Basis) -> f64 {
    let (sd_diff, sd_sum) = state.rotated_widths(basis);
    let reach = 13.0 * 0.5 * sd_diff.hypot(sd_sum);
    let marginal = |a: f64| simpson(|b| state.axis_density(basis, a, b), -reach, reach, 6000);
    let integrand = |d: f64, s: f64| {
        let (a, b) = (0.5 * (s + d), 0.5 * (s - d));
        let p = state.axis_density(basis, a, b);
        if p <= 0.0 {
            return 0.0;
        }
        p * (p / (marginal(a) * marginal(b))).log2()
    };
    let per_axis = simpson(
        |s| simpson(|d| integrand(d, s), -9.0 * sd_diff, 9.0 * sd_diff, 60),
        -9.0 * sd_sum,
        9.0 * sd_sum,
        120,
    ) * 0.5;
    2.0 * per_axis
}

/// Integral of one axis's density over the plane, by quadrature in the
/// rotated coordinates.
pub fn axis_density_mass(state: &GaussianBiphotonState, basis: Basis) -> f64 {
    let (sd_diff, sd_sum) = state.rotated_widths(basis);
    0.5 * simpson(
        |s| {
            simpson(
                |d| state.axis_density(basis, 0.5 * (s + d), 0.5 * (s - d)),
                -12.0 * sd_diff,
                12.0 * sd_diff,
                400,
            )
        },
        -12.0 * sd_sum,
        12.0 * sd_sum,
        400,
    )
}

pub fn scenario(n: usize, basis: Basis, alignment: Alignment) -> String {
    format!("{n}x{n} {basis} {alignment}")
}
