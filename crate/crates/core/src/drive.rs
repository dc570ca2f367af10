//! Driving field `E(t) = p(t) E sin(ω_d t)` and its envelopes.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::units::ATOMIC_INTENSITY_WCM2;

/// Total Gaussian pulse length in units of its FWHM.
pub const GAUSSIAN_SPAN_FWHM: f64 = 4.0;

/// Pulse envelope, with durations counted in carrier periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Gaussian { n_fwhm: f64 },
    Trapezoid { n_on: f64, n_p: f64, n_off: f64 },
}

impl Envelope {
    /// The `(n_on, n_p, n_off)` trapezoid.
    pub fn trapezoid(n_on: f64, n_p: f64, n_off: f64) -> Self {
        Envelope::Trapezoid { n_on, n_p, n_off }
    }

    pub fn gaussian(n_fwhm: f64) -> Self {
        Envelope::Gaussian { n_fwhm }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Envelope::Gaussian { n_fwhm } => n_fwhm > 0.0 && n_fwhm.is_finite(),
            Envelope::Trapezoid { n_on, n_p, n_off } => [n_on, n_p, n_off]
                .iter()
                .all(|n| *n > 0.0 && n.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPulse(format!(
                "cycle counts must be positive and finite: {self:?}"
            )))
        }
    }

    /// Total number of carrier periods covered by the envelope.
    pub fn total_cycles(&self) -> f64 {
        match *self {
            Envelope::Gaussian { n_fwhm } => GAUSSIAN_SPAN_FWHM * n_fwhm,
            Envelope::Trapezoid { n_on, n_p, n_off } => n_on + n_p + n_off,
        }
    }

    /// Envelope value with no range check; zero outside `[0, τ]`.
    #[inline]
    pub fn value(&self, omega_d: f64, t: f64) -> f64 {
        let period = 2.0 * PI / omega_d;
        let tau = self.total_cycles() * period;
        if !(0.0..=tau).contains(&t) {
            return 0.0;
        }
        match *self {
            Envelope::Gaussian { n_fwhm } => {
                let fwhm = n_fwhm * period;
                let s = t - 0.5 * tau;
                (-4.0 * LN_2 * s * s / (fwhm * fwhm)).exp()
            }
            Envelope::Trapezoid { n_on, n_off, .. } => {
                let t_on = n_on * period;
                let t_off = n_off * period;
                if t < t_on {
                    t / t_on
                } else if t > tau - t_off {
                    (tau - t) / t_off
                } else {
                    1.0
                }
            }
        }
    }
}

/// A linearly polarised pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    /// Carrier frequency (a.u.).
    pub omega_d: f64,
    /// Peak field amplitude (a.u.).
    pub e_peak: f64,
    pub envelope: Envelope,
}

impl Pulse {
    pub fn new(omega_d: f64, e_peak: f64, envelope: Envelope) -> Result<Self> {
        if !(omega_d > 0.0 && omega_d.is_finite()) {
            return Err(Error::InvalidPulse(format!(
                "carrier frequency must be positive, got {omega_d}"
            )));
        }
        if !(e_peak >= 0.0 && e_peak.is_finite()) {
            return Err(Error::InvalidPulse(format!(
                "peak amplitude must be non-negative, got {e_peak}"
            )));
        }
        envelope.validate()?;
        Ok(Self {
            omega_d,
            e_peak,
            envelope,
        })
    }

    /// Same carrier and envelope at a different amplitude.
    pub fn with_amplitude(&self, e_peak: f64) -> Result<Self> {
        Self::new(self.omega_d, e_peak, self.envelope)
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_d
    }

    /// Total duration τ (a.u.).
    pub fn duration(&self) -> f64 {
        self.envelope.total_cycles() * self.period()
    }

    /// Field with no range check; zero outside the pulse.
    #[inline]
    pub fn field(&self, t: f64) -> f64 {
        self.envelope.value(self.omega_d, t) * self.e_peak * (self.omega_d * t).sin()
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let tau = self.duration();
        if (0.0..=tau).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange { t, tau })
        }
    }
}

/// Envelope value `p(t)` for `0 <= t <= τ`.
pub fn envelope_at(envelope: &Envelope, omega_d: f64, t: f64) -> Result<f64> {
    let tau = envelope.total_cycles() * 2.0 * PI / omega_d;
    if !(0.0..=tau).contains(&t) {
        return Err(Error::TimeOutOfRange { t, tau });
    }
    Ok(envelope.value(omega_d, t))
}

/// `E(t) = p(t) E sin(ω_d t)` for `0 <= t <= τ`.
pub fn field_at(pulse: &Pulse, t: f64) -> Result<f64> {
    pulse.check_time(t)?;
    Ok(pulse.field(t))
}

/// Peak field (a.u.) for a peak intensity in W/cm².
pub fn intensity_to_field(intensity_wcm2: f64) -> Result<f64> {
    if !(intensity_wcm2 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "intensity must be non-negative, got {intensity_wcm2}"
        )));
    }
    Ok((intensity_wcm2 / ATOMIC_INTENSITY_WCM2).sqrt())
}

/// Inverse of [`intensity_to_field`].
pub fn field_to_intensity(e_peak: f64) -> f64 {
    e_peak * e_peak * ATOMIC_INTENSITY_WCM2
}

/// Rabi frequency `Ω_R = μ E` of a transition with dipole `mu`.
pub fn rabi_frequency(mu: f64, e_peak: f64) -> Result<f64> {
    if !(mu >= 0.0) || !(e_peak >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dipole and amplitude must be non-negative, got mu = {mu}, E = {e_peak}"
        )));
    }
    Ok(mu * e_peak)
}

/// Peak field needed for a Rabi frequency `rabi` on a transition with dipole `mu`.
pub fn field_for_rabi(mu: f64, rabi: f64) -> Result<f64> {
    if !(mu > 0.0) || !(rabi >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need mu > 0 and rabi >= 0, got mu = {mu}, rabi = {rabi}"
        )));
    }
    Ok(rabi / mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_peak_and_half_maximum() {
        let env = Envelope::gaussian(20.0);
        let w = 0.028;
        let period = 2.0 * PI / w;
        let tau = 80.0 * period;
        let fwhm = 20.0 * period;
        assert_relative_eq!(envelope_at(&env, w, tau / 2.0).unwrap(), 1.0);
        assert_relative_eq!(
            envelope_at(&env, w, tau / 2.0 + fwhm / 2.0).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            envelope_at(&env, w, tau / 2.0 - fwhm / 2.0).unwrap(),
            0.5,
            epsilon = 1e-14
        );
        // Truncated tails stay below exp(-16 ln 2).
        assert!(envelope_at(&env, w, 0.0).unwrap() < 1.6e-5);
    }

    #[test]
    fn trapezoid_plateau_and_ramps() {
        let env = Envelope::trapezoid(1.0, 50.0, 1.0);
        let w = 0.04;
        let period = 2.0 * PI / w;
        let tau = 52.0 * period;
        for k in 0..=500 {
            let t = period + (tau - 2.0 * period) * k as f64 / 500.0;
            assert_eq!(envelope_at(&env, w, t).unwrap(), 1.0);
        }
        assert_eq!(envelope_at(&env, w, 0.0).unwrap(), 0.0);
        assert_relative_eq!(envelope_at(&env, w, 0.5 * period).unwrap(), 0.5, epsilon = 1e-14);
        assert!(envelope_at(&env, w, tau).unwrap().abs() < 1e-12);
        assert!(envelope_at(&env, w, tau + 1.0).is_err());
        assert!(envelope_at(&env, w, -1e-9).is_err());
    }

    #[test]
    fn field_values() {
        let w = 0.057;
        let pulse = Pulse::new(w, 0.05, Envelope::trapezoid(1.0, 50.0, 1.0)).unwrap();
        assert_eq!(field_at(&pulse, 0.0).unwrap(), 0.0);
        let t = pulse.period() + PI / (2.0 * w);
        assert_relative_eq!(field_at(&pulse, t).unwrap(), 0.05, epsilon = 1e-14);
        let zero = pulse.with_amplitude(0.0).unwrap();
        assert_eq!(field_at(&zero, t).unwrap(), 0.0);
        assert!(field_at(&pulse, pulse.duration() * 1.01).is_err());
    }

    #[test]
    fn duration_counts_cycles() {
        let pulse = Pulse::new(0.028, 0.1, Envelope::trapezoid(1.0, 50.0, 1.0)).unwrap();
        assert_relative_eq!(pulse.duration(), 2.0 * PI * 52.0 / 0.028, epsilon = 1e-9);
        let g = Pulse::new(0.028, 0.1, Envelope::gaussian(20.0)).unwrap();
        assert_relative_eq!(g.duration(), 4.0 * 2.0 * PI * 20.0 / 0.028, epsilon = 1e-9);
    }

    #[test]
    fn intensity_conversion() {
        assert_relative_eq!(intensity_to_field(3.50945e16).unwrap(), 1.0);
        assert_relative_eq!(intensity_to_field(1e14).unwrap(), 0.05338, epsilon = 1e-5);
        assert_eq!(intensity_to_field(0.0).unwrap(), 0.0);
        assert!(intensity_to_field(-1.0).is_err());
        assert_relative_eq!(field_to_intensity(intensity_to_field(2e13).unwrap()), 2e13, max_relative = 1e-12);
    }

    #[test]
    fn rabi_products() {
        assert_relative_eq!(rabi_frequency(1.0, 0.05).unwrap(), 0.05);
        assert_eq!(rabi_frequency(0.0, 0.3).unwrap(), 0.0);
        assert!(rabi_frequency(-1.0, 0.3).is_err());
        assert_relative_eq!(field_for_rabi(2.0, 0.08).unwrap(), 0.04);
    }

    #[test]
    fn invalid_pulses() {
        assert!(Pulse::new(0.0, 0.1, Envelope::gaussian(5.0)).is_err());
        assert!(Pulse::new(0.1, -0.1, Envelope::gaussian(5.0)).is_err());
        assert!(Pulse::new(0.1, 0.1, Envelope::trapezoid(0.0, 5.0, 1.0)).is_err());
    }
}
