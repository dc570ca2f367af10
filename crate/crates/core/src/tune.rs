//! Root-finding on well geometry to hit a target transition frequency.
//!
//! Target systems are usually known by their level spacing rather than by
//! well parameters, so these helpers search for the geometry instead.

use crate::eigen::solve_levels;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{build_potential, WellSpec};

const MAX_ITER: usize = 100;

fn gap(wells: &[WellSpec], grid: &Grid, j: usize, k: usize) -> Result<f64> {
    let pot = build_potential(wells, grid)?;
    let set = solve_levels(&pot, grid, k + 1)?;
    Ok(set.frequency(j, k))
}

/// Bisect on `f`, which must decrease through `target` on `[lo, hi]`.
fn bisect_decreasing<F>(mut f: F, mut lo: f64, mut hi: f64, target: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if !(f_lo >= target && f_hi <= target) {
        return Err(Error::Tuning(format!(
            "target {target} not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < tol {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Separation of an `n_wells` chain of identical `(a, b)` wells for which
/// `E_1 - E_0 = omega_a`.
pub fn tune_separation(n_wells: usize, a: f64, b: f64, omega_a: f64, grid: &Grid) -> Result<f64> {
    if n_wells < 2 {
        return Err(Error::Tuning(
            "separation tuning needs at least two wells".into(),
        ));
    }
    if !(omega_a > 0.0) {
        return Err(Error::Tuning("target frequency must be positive".into()));
    }
    let splitting = |d: f64| gap(&WellSpec::chain(n_wells, a, b, d), grid, 0, 1);
    let lo = 0.25;
    let mut hi = 2.0;
    while splitting(hi)? > omega_a {
        hi *= 1.5;
        let span = hi * (n_wells - 1) as f64;
        if span > 0.5 * (grid.x_max() - grid.x_min()) {
            return Err(Error::Tuning(format!(
                "splitting {omega_a} needs wells wider than the grid allows"
            )));
        }
    }
    bisect_decreasing(splitting, lo, hi, omega_a, 1e-10)
}

/// Softening `b` of a single well with shape `a` whose first excitation
/// energy `E_1 - E_0` equals `gap_target`.
pub fn tune_softening(a: f64, gap_target: f64, grid: &Grid) -> Result<f64> {
    if !(gap_target > 0.0) {
        return Err(Error::Tuning("target gap must be positive".into()));
    }
    // Bisect on log b: the gap shrinks as the well gets shallower.
    let f = |log_b: f64| gap(&[WellSpec::new(a, log_b.exp(), 0.0)], grid, 0, 1);
    let log_b = bisect_decreasing(f, (1e-3f64).ln(), (1e3f64).ln(), gap_target, 1e-12)?;
    Ok(log_b.exp())
}
