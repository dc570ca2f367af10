//! Tridiagonal kernels: complex elimination for the time stepper, and a
//! Sturm-bisection / inverse-iteration eigensolver for symmetric matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

const PIVOT_GUARD: f64 = 1e-300;

/// Solve `A x = rhs` for tridiagonal `A` by forward elimination and back
/// substitution (no pivoting).
///
/// `sub[i] = A[i+1][i]`, `sup[i] = A[i][i+1]`, both of length `n - 1`.
pub fn solve_tridiagonal(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = diag.len();
    if n == 0 || rhs.len() != n || sub.len() + 1 != n || sup.len() + 1 != n {
        return Err(Error::InvalidArgument(
            "tridiagonal system has inconsistent lengths".into(),
        ));
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut denom = diag[0];
    if denom.norm() < PIVOT_GUARD {
        return Err(Error::SolveBreakdown { row: 0 });
    }
    if n > 1 {
        c[0] = sup[0] / denom;
    }
    x[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i - 1] * c[i - 1];
        if !(denom.norm() >= PIVOT_GUARD) {
            return Err(Error::SolveBreakdown { row: i });
        }
        if i + 1 < n {
            c[i] = sup[i] / denom;
        }
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below
/// `lambda`. `off_sq[i]` holds the squared off-diagonal entries.
pub fn sturm_count(diag: &[f64], off_sq: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let prev = if q.abs() < PIVOT_GUARD {
            PIVOT_GUARD.copysign(q)
        } else {
            q
        };
        q = diag[i] - lambda - off_sq[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing every eigenvalue.
pub fn gershgorin_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// The `k`-th smallest eigenvalue (0-based) by Sturm-sequence bisection.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let off_sq: Vec<f64> = off.iter().map(|o| o * o).collect();
    let (mut lo, mut hi) = gershgorin_bounds(diag, off);
    let scale = lo.abs().max(hi.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, &off_sq, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector for the eigenvalue estimate `lambda` by inverse iteration.
/// The returned vector has unit Euclidean norm.
pub fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let scale = gershgorin_bounds(diag, off).1.abs().max(1.0);
    // Nudge off the exact eigenvalue so the factorisation stays finite.
    let shift = lambda + 8.0 * f64::EPSILON * scale;
    let lu = BandLu::factor(diag, off, shift);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75).fract())
        .collect();
    normalize(&mut v);
    for _ in 0..4 {
        lu.solve(&mut v);
        normalize(&mut v);
    }
    v
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// LU factorisation of `T - shift I` with partial pivoting, stored as LAPACK
/// `dgttrf` does: one sub-diagonal multiplier and two super-diagonals.
struct BandLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl BandLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl: Vec<f64> = off.to_vec();
        let mut du: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = PIVOT_GUARD;
                }
                let m = dl[i] / d[i];
                dl[i] = m;
                d[i + 1] -= m * du[i];
            } else {
                let m = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = m;
                let tmp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = tmp - m * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -m * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = PIVOT_GUARD;
        }
        Self {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}
