//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use mollow_hhg::{parse_config, RunConfig};
use nalgebra::{DMatrix, SymmetricEigen};

/// Power series for J0, summed term by term.
pub fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Lowest eigenvalue of the 3-point finite-difference Hamiltonian on a
/// uniform grid, by dense symmetric diagonalisation.
pub fn dense_ground_energy(potential: impl Fn(f64) -> f64, half_width: f64, n: usize) -> f64 {
    let dx = 2.0 * half_width / (n - 1) as f64;
    let kin = 0.5 / (dx * dx);
    let mut h = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let x = -half_width + i as f64 * dx;
        h[(i, i)] = 2.0 * kin + potential(x);
        if i + 1 < n {
            h[(i, i + 1)] = -kin;
            h[(i + 1, i)] = -kin;
        }
    }
    SymmetricEigen::new(h).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Attractive soft-Coulomb well `-1/sqrt(a (x-c)^2 + b)`.
pub fn soft_coulomb(a: f64, b: f64, c: f64) -> impl Fn(f64) -> f64 {
    move |x| -1.0 / (a * (x - c) * (x - c) + b).sqrt()
}

/// Analytic density width of a free Gaussian packet with initial width `sigma0`.
pub fn free_gaussian_width(sigma0: f64, t: f64) -> f64 {
    sigma0 * (1.0 + (t / (2.0 * sigma0 * sigma0)).powi(2)).sqrt()
}

/// Density-weighted standard deviation of `x`.
pub fn spread(x: &[f64], density: &[f64]) -> f64 {
    let w: f64 = density.iter().sum();
    let mean = x.iter().zip(density).map(|(x, d)| x * d).sum::<f64>() / w;
    let var = x.iter().zip(density).map(|(x, d)| (x - mean).powi(2) * d).sum::<f64>() / w;
    var.sqrt()
}

/// Least-squares slope and intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Loads a shipped config, drops the `unset` keys and applies overrides.
pub fn load_config(name: &str, unset: &[&str], overrides: &[(&str, &str)]) -> RunConfig {
    let path = config_path(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut config = parse_config(&text).unwrap();
    for k in unset {
        config.unset(k);
    }
    config.apply_overrides(overrides).unwrap();
    config
}
