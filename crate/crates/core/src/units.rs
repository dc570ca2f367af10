//! Atomic-unit conversion constants.

/// Hartree energy in electron-volts.
pub const HARTREE_EV: f64 = 27.211386;

/// Intensity corresponding to a peak field of 1 a.u., in W/cm².
pub const ATOMIC_INTENSITY_WCM2: f64 = 3.50945e16;

pub fn hartree_to_ev(energy_au: f64) -> f64 {
    energy_au * HARTREE_EV
}
