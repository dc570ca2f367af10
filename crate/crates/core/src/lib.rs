//! Strong-field driving of isolated bound states in one dimension.
//!
//! A soft-Coulomb chain is discretised on a uniform grid, its bound states are
//! found by a tridiagonal eigensolver, and the length-gauge time-dependent
//! Schrödinger equation is stepped with Crank–Nicolson. Emission spectra of
//! the induced dipole show odd harmonics of the drive and, once the Rabi
//! frequency exceeds the transition frequency, Mollow-type sidebands whose
//! positions are compared with closed-form two-level predictions.
//!
//! ```
//! use mollow_hhg::{build_potential, solve_bound_states, Grid, WellSpec};
//!
//! let grid = Grid::symmetric(40.0, 801).unwrap();
//! let pot = build_potential(&[WellSpec::new(1.0, 2.0, 0.0)], &grid).unwrap();
//! let levels = solve_bound_states(&pot, &grid, 2).unwrap();
//! assert!(levels.energies()[0] < levels.energies()[1]);
//! ```

pub mod analytic;
pub mod config;
pub mod drive;
pub mod eigen;
pub mod error;
pub mod grid;
pub mod io;
pub mod potential;
pub mod propagator;
pub mod spectra;
pub mod sweep;
pub mod tridiag;
pub mod tune;
pub mod units;

pub use analytic::{
    bessel_j0, fit_dipole, predict_eq2, predict_eq3, predict_linear_sidebands, tls_propagate,
    Formula, SidebandPrediction, TlsParams,
};
pub use drive::{field_at, envelope_at, intensity_to_field, rabi_frequency, Envelope, Pulse};
pub use eigen::{solve_bound_states, solve_levels, transition, EigenSet};
pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use grid::Grid;
pub use potential::{build_potential, Potential, WellSpec};
pub use propagator::{propagate, PropagationConfig, TimeSeries, Wavefunction};
pub use spectra::{compute_spectrum, find_peaks, Source, Spectrum, SpectrumOptions, Window};
pub use sweep::{
    compare_tracks, extract_tracks, prediction_curves, run_sweep, SpectrumMap, SweepConfig,
    SweepSystem,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/drive.md")]
    struct Drive;
    #[doc = include_str!("../../../book/src/propagation.md")]
    struct Propagation;
    #[doc = include_str!("../../../book/src/spectra.md")]
    struct Spectra;
    #[doc = include_str!("../../../book/src/two_level.md")]
    struct TwoLevel;
    #[doc = include_str!("../../../book/src/sweeps.md")]
    struct Sweeps;
}
