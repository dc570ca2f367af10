//! Closed-form sideband predictors and the driven two-level reference model.
//!
//! Sideband positions, for a transition of frequency `ω_a` driven at `ω_d`
//! with Rabi frequency `Ω_R`:
//!
//! * odd harmonics: `(2n + 1) ω_d`
//! * linear regime (`Ω_R < ω_a`): `(2n + 1) ω_d ± Ω_R`
//! * carrier-wave Mollow sidebands: `(2n + 1) ω_d ∓ [ω_d − ω_a J0(2 Ω_R / ω_d)]`
//! * odd-centred variant for a transition `ω_a'`: `(2n + 1) ω_d ± ω_a' J0(2 Ω_R / ω_d)`

use std::f64::consts::PI;

use crate::drive::Pulse;
use crate::error::{Error, Result};
use crate::propagator::{step_plan, TimeSeries};

/// Zeroth-order Bessel function of the first kind.
///
/// Power series for `|x| <= 8`, a trapezoidal rule on the integral
/// representation `J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ` up to `|x| <= 64`
/// (spectrally accurate for this periodic integrand), and the Hankel
/// asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("J0 of non-finite {x}")));
    }
    let ax = x.abs();
    Ok(if ax <= 8.0 {
        j0_series(ax)
    } else if ax <= 64.0 {
        j0_trapezoid(ax)
    } else {
        j0_asymptotic(ax)
    })
}

fn j0_series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 5 {
            break;
        }
    }
    sum
}

fn j0_trapezoid(x: f64) -> f64 {
    // The integrand is even and 2π-periodic in θ; with m nodes the error is
    // of order J_{2m}(x), negligible once 2m exceeds x by a few dozen.
    let m = 2 * (x as usize) + 48;
    let h = PI / m as f64;
    // Both endpoints contribute cos(0) = 1 with weight 1/2.
    let mut acc = 1.0;
    for k in 1..m {
        acc += (x * (k as f64 * h).sin()).cos();
    }
    acc / m as f64
}

fn j0_asymptotic(x: f64) -> f64 {
    // P and Q series of the Hankel expansion, truncated at the smallest term.
    let mu = 0.0; // 4 ν² for ν = 0
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut k = 1usize;
    let mut last = f64::INFINITY;
    loop {
        let f = (2 * k - 1) as f64;
        term *= (mu - f * f) / (k as f64 * z);
        if term.abs() >= last || term.abs() < 1e-17 {
            break;
        }
        last = term.abs();
        let alternate = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += alternate * term;
        } else {
            p += alternate * term;
        }
        k += 1;
        if k > 60 {
            break;
        }
    }
    let chi = x - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// First positive zero of `J0`, refined by bisection.
pub fn bessel_j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if j0_series(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A two-level transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    /// Transition frequency (a.u.).
    pub omega_a: f64,
    /// Dipole matrix element (a.u.).
    pub mu: f64,
}

impl TlsParams {
    pub fn new(omega_a: f64, mu: f64) -> Result<Self> {
        if !(omega_a > 0.0 && omega_a.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "transition frequency must be positive, got {omega_a}"
            )));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dipole must be non-negative, got {mu}"
            )));
        }
        Ok(Self { omega_a, mu })
    }
}

/// Which closed form produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// `(2n + 1) ω_d ± Ω_R`, valid for `Ω_R < ω_a`.
    Linear,
    /// Carrier-wave Mollow sidebands around the even harmonics.
    Eq2,
    /// Odd-centred sidebands of a higher transition.
    Eq3,
}

impl Formula {
    pub fn name(&self) -> &'static str {
        match self {
            Formula::Linear => "linear",
            Formula::Eq2 => "eq2",
            Formula::Eq3 => "eq3",
        }
    }
}

/// Predicted sideband pair around the odd harmonic `(2n + 1) ω_d`.
///
/// `lower = center - s` and `upper = center + s` for the signed splitting
/// `s` of the formula, so `lower > upper` when `s < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandPrediction {
    pub n: usize,
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    pub formula: Formula,
    /// Whether the driving strength is inside the formula's stated regime.
    pub in_regime: bool,
}

/// Odd harmonic `(2n + 1) ω_d`.
pub fn odd_harmonic(omega_d: f64, n: usize) -> f64 {
    (2 * n + 1) as f64 * omega_d
}

fn check_drive(omega_d: f64, rabi: f64) -> Result<()> {
    if !(omega_d > 0.0) {
        return Err(Error::InvalidArgument("omega_d must be positive".into()));
    }
    if !(rabi >= 0.0 && rabi.is_finite()) {
        return Err(Error::InvalidArgument(format!("rabi must be non-negative, got {rabi}")));
    }
    Ok(())
}

/// Carrier-wave Mollow sidebands, `n >= 1`. `in_regime` is set when
/// `Ω_R > ω_a`.
pub fn predict_eq2(tls: &TlsParams, omega_d: f64, rabi: f64, n: usize) -> Result<SidebandPrediction> {
    check_drive(omega_d, rabi)?;
    if n < 1 {
        return Err(Error::InvalidArgument("eq2 sidebands are indexed from n = 1".into()));
    }
    let center = odd_harmonic(omega_d, n);
    let bracket = omega_d - tls.omega_a * bessel_j0(2.0 * rabi / omega_d)?;
    Ok(SidebandPrediction {
        n,
        center,
        lower: center - bracket,
        upper: center + bracket,
        formula: Formula::Eq2,
        in_regime: rabi > tls.omega_a,
    })
}

/// Odd-centred sidebands of the transition `tls` (typically `0 → 2`).
///
/// Any `n >= 0` is accepted.
pub fn predict_eq3(tls: &TlsParams, omega_d: f64, rabi: f64, n: usize) -> Result<SidebandPrediction> {
    check_drive(omega_d, rabi)?;
    let center = odd_harmonic(omega_d, n);
    let split = tls.omega_a * bessel_j0(2.0 * rabi / omega_d)?;
    Ok(SidebandPrediction {
        n,
        center,
        lower: center - split,
        upper: center + split,
        formula: Formula::Eq3,
        in_regime: rabi > tls.omega_a,
    })
}

/// Linear-regime Mollow triplet `(2n + 1) ω_d ± Ω_R`; `in_regime` holds
/// while `Ω_R < ω_a`.
pub fn predict_linear_sidebands(tls: &TlsParams, omega_d: f64, rabi: f64, n: usize) -> Result<SidebandPrediction> {
    check_drive(omega_d, rabi)?;
    let center = odd_harmonic(omega_d, n);
    Ok(SidebandPrediction {
        n,
        center,
        lower: center - rabi,
        upper: center + rabi,
        formula: Formula::Linear,
        in_regime: rabi < tls.omega_a,
    })
}

/// Result of a two-level run: the series and final populations.
#[derive(Debug, Clone)]
pub struct TlsRun {
    pub series: TimeSeries,
    pub ground_population: Vec<f64>,
    pub excited_population: Vec<f64>,
    pub dt: f64,
}

/// Drive a two-level system with `H = -(ω_a/2) σ_z - μ E(t) σ_x` without
/// the rotating-wave approximation, starting in the ground state.
///
/// Each step applies the exact propagator of the Hamiltonian frozen at the
/// step midpoint. The recorded dipole is `μ 2 Re(c_g* c_e)` and the
/// acceleration its second finite difference.
pub fn tls_propagate(tls: &TlsParams, pulse: &Pulse, dt: f64) -> Result<TlsRun> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let (steps, dt) = step_plan(pulse.duration(), dt);
    // Amplitudes as (re, im) pairs: cg = (g0, g1), ce = (e0, e1).
    let (mut g0, mut g1, mut e0, mut e1) = (1.0f64, 0.0f64, 0.0f64, 0.0f64);
    let hz = -0.5 * tls.omega_a;
    let n = steps + 1;
    let mut series = TimeSeries {
        times: Vec::with_capacity(n),
        field: Vec::with_capacity(n),
        norm: Vec::with_capacity(n),
        dipole: Vec::with_capacity(n),
        accel: Vec::with_capacity(n),
    };
    let mut pg = Vec::with_capacity(n);
    let mut pe = Vec::with_capacity(n);

    let mut record = |t: f64, g0: f64, g1: f64, e0: f64, e1: f64, series: &mut TimeSeries| {
        series.times.push(t);
        series.field.push(pulse.field(t));
        let popg = g0 * g0 + g1 * g1;
        let pope = e0 * e0 + e1 * e1;
        series.norm.push(popg + pope);
        series.dipole.push(tls.mu * 2.0 * (g0 * e0 + g1 * e1));
        pg.push(popg);
        pe.push(pope);
    };
    record(0.0, g0, g1, e0, e1, &mut series);

    for k in 1..=steps {
        let t_mid = (k as f64 - 0.5) * dt;
        let hx = -tls.mu * pulse.field(t_mid);
        let h = (hx * hx + hz * hz).sqrt();
        // exp(-i H dt) = cos(h dt) - i sin(h dt) (hx σx + hz σz) / h
        let (s, c) = (h * dt).sin_cos();
        let (ax, az) = if h > 0.0 { (s * hx / h, s * hz / h) } else { (0.0, 0.0) };
        // new_g = c g - i (az g + ax e); new_e = c e - i (ax g - az e)
        let ng0 = c * g0 + (az * g1 + ax * e1);
        let ng1 = c * g1 - (az * g0 + ax * e0);
        let ne0 = c * e0 + (ax * g1 - az * e1);
        let ne1 = c * e1 - (ax * g0 - az * e0);
        g0 = ng0;
        g1 = ng1;
        e0 = ne0;
        e1 = ne1;
        record(k as f64 * dt, g0, g1, e0, e1, &mut series);
    }

    series.accel = second_difference(&series.dipole, dt);
    Ok(TlsRun {
        series,
        ground_population: pg,
        excited_population: pe,
        dt,
    })
}

/// Central second difference, with the end values copied from their
/// neighbours.
pub fn second_difference(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    if n < 3 {
        return out;
    }
    let inv = 1.0 / (h * h);
    for i in 1..n - 1 {
        out[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * inv;
    }
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    out
}

/// Least-squares estimate of the dipole moment from linear-regime sidebands.
///
/// Fits `|ω_sideband − ω_d| = μ E + c` over the points and returns `μ`.
pub fn fit_dipole(points: &[(f64, f64)], omega_d: f64) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| (p.1 - omega_d).abs()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-300 * n {
        return Err(Error::InvalidArgument("all field amplitudes are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::Envelope;

    #[test]
    fn j0_known_values() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        assert!((bessel_j0(1.0).unwrap() - 0.765_197_686_6).abs() < 1e-10);
        assert!((bessel_j0_first_zero() - 2.404_825_557_695_773).abs() < 1e-12);
        assert!(bessel_j0(f64::NAN).is_err());
        assert_eq!(bessel_j0(-3.3).unwrap(), bessel_j0(3.3).unwrap());
    }

    #[test]
    fn j0_branches_join_smoothly() {
        let pairs = [
            (j0_series(8.0), j0_trapezoid(8.0)),
            (j0_trapezoid(64.0), j0_asymptotic(64.0)),
        ];
        for (a, b) in pairs {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
        assert!((bessel_j0(8.0).unwrap() - 0.171_650_807_137_553_9).abs() < 1e-13);
        // J0(100) from tables.
        assert!((bessel_j0(100.0).unwrap() - 0.019_985_850_304_223_12).abs() < 1e-12);
    }

    #[test]
    fn eq2_resonant_collapse() {
        let tls = TlsParams::new(0.04, 1.0).unwrap();
        let p = predict_eq2(&tls, 0.04, 0.0, 1).unwrap();
        assert!((p.lower - p.center).abs() < 1e-15);
        assert!((p.upper - p.center).abs() < 1e-15);
        assert!(predict_eq2(&tls, 0.04, 0.0, 0).is_err());
    }

    #[test]
    fn eq2_at_j0_zero_hits_even_harmonics() {
        let tls = TlsParams::new(0.02, 1.0).unwrap();
        let wd = 0.028;
        let rabi = 0.5 * bessel_j0_first_zero() * wd;
        for n in 1..4 {
            let p = predict_eq2(&tls, wd, rabi, n).unwrap();
            assert!((p.lower - 2.0 * n as f64 * wd).abs() < 1e-12);
            assert!((p.upper - (2.0 * n as f64 + 2.0) * wd).abs() < 1e-12);
            assert!(p.in_regime);
        }
    }

    #[test]
    fn eq3_limits() {
        let tls3 = TlsParams::new(0.08, 1.0).unwrap();
        let p = predict_eq3(&tls3, 0.028, 0.0, 0).unwrap();
        assert!((p.lower - (0.028 - 0.08)).abs() < 1e-15);
        assert!((p.upper - (0.028 + 0.08)).abs() < 1e-15);
        let rabi = 0.5 * bessel_j0_first_zero() * 0.028;
        let p = predict_eq3(&tls3, 0.028, rabi, 2).unwrap();
        assert!((p.lower - p.center).abs() < 1e-12);
        assert!((p.upper - p.center).abs() < 1e-12);
    }

    #[test]
    fn linear_sidebands() {
        let tls = TlsParams::new(0.04, 1.0).unwrap();
        let p = predict_linear_sidebands(&tls, 0.04, 0.01, 0).unwrap();
        assert!((p.lower - 0.03).abs() < 1e-15);
        assert!((p.upper - 0.05).abs() < 1e-15);
        assert!(p.in_regime);
        let p = predict_linear_sidebands(&tls, 0.04, 0.0, 1).unwrap();
        assert_eq!(p.lower, p.upper);
        assert!(!predict_linear_sidebands(&tls, 0.04, 0.05, 0).unwrap().in_regime);
    }

    #[test]
    fn undriven_tls_is_stationary() {
        let tls = TlsParams::new(0.04, 1.0).unwrap();
        let pulse = Pulse::new(0.04, 0.0, Envelope::trapezoid(1.0, 5.0, 1.0)).unwrap();
        let run = tls_propagate(&tls, &pulse, 1.0).unwrap();
        assert!(run.series.dipole.iter().all(|&d| d == 0.0));
        assert!(run.ground_population.iter().all(|&p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn fit_dipole_exact_line() {
        let pts: Vec<(f64, f64)> = [0.01, 0.02, 0.03].iter().map(|&e| (e, 0.04 + 0.8 * e)).collect();
        assert!((fit_dipole(&pts, 0.04).unwrap() - 0.8).abs() < 1e-12);
        assert!(fit_dipole(&pts[..1], 0.04).is_err());
        assert!(fit_dipole(&[(0.01, 0.05), (0.01, 0.06)], 0.04).is_err());
    }
}
