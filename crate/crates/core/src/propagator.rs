//! Crank–Nicolson evolution under `H(x, t) = -1/2 d²/dx² + V(x) + E(t) x`.
//!
//! Each step solves `(1 + i dt/2 H) ψ' = (1 - i dt/2 H) ψ` with the field
//! sampled at the step midpoint, then multiplies by the absorbing mask.
//! Observers record the norm, `<x>`, and the Ehrenfest acceleration
//! `-<dV/dx> - E(t) N`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::drive::Pulse;
use crate::eigen::EigenSet;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;

/// Settings for a single propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Requested timestep (a.u.). The run uses the nearest step that
    /// divides the pulse duration evenly.
    pub dt: f64,
    pub mask_enabled: bool,
    /// Fraction of the grid covered by the mask on each side.
    pub mask_fraction: f64,
    pub mask_exponent: f64,
    /// Steps between observer samples.
    pub record_stride: usize,
    /// Steps between density snapshots; 0 disables the movie.
    pub density_stride: usize,
    /// Norm below which the run is flagged as depleted.
    pub norm_floor: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            mask_enabled: true,
            mask_fraction: 0.1,
            mask_exponent: 0.125,
            record_stride: 5,
            density_stride: 0,
            norm_floor: 1e-3,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.mask_fraction > 0.0 && self.mask_fraction < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "mask_fraction must lie in (0, 0.5), got {}",
                self.mask_fraction
            )));
        }
        if !(self.mask_exponent > 0.0 && self.mask_exponent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "mask_exponent must be positive, got {}",
                self.mask_exponent
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidArgument("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Complex amplitudes on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// The `level`-th eigenstate as a complex wavefunction.
    pub fn from_eigenstate(set: &EigenSet, level: usize) -> Result<Self> {
        let state = set.states().get(level).ok_or_else(|| {
            Error::IndexOutOfRange(format!("level {level} of {}", set.len()))
        })?;
        Self::from_real(*set.grid(), state)
    }

    /// Normalised Gaussian packet with density standard deviation `sigma`
    /// and mean momentum `k0`.
    pub fn gaussian(grid: Grid, center: f64, sigma: f64, k0: f64) -> Result<Self> {
        let amps = grid
            .points()
            .map(|x| {
                let u = x - center;
                Complex64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), k0 * x)
            })
            .collect();
        let mut psi = Self::new(grid, amps)?;
        psi.normalize();
        Ok(psi)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    /// `dx Σ |ψ|²`.
    pub fn norm(&self) -> f64 {
        self.grid.dx() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let s = 1.0 / n.sqrt();
            self.amplitudes.iter_mut().for_each(|a| *a *= s);
        }
    }

    /// `dx Σ x |ψ|²`, not divided by the norm.
    pub fn dipole(&self) -> f64 {
        self.grid.dx()
            * self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, a)| self.grid.x(i) * a.norm_sqr())
                .sum::<f64>()
    }

    /// `dx Σ f(x_i) |ψ_i|²` for a tabulated `f`.
    pub fn expectation(&self, f: &[f64]) -> f64 {
        self.grid.dx()
            * self
                .amplitudes
                .iter()
                .zip(f)
                .map(|(a, v)| v * a.norm_sqr())
                .sum::<f64>()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Edge mask `sin^q` rising from 0 at each boundary to 1 at the interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    values: Vec<f64>,
    /// Points per side where the mask is below one.
    band: usize,
}

impl Mask {
    pub fn new(grid: &Grid, fraction: f64, exponent: f64) -> Self {
        let n = grid.len();
        let band = ((fraction * n as f64).round() as usize).clamp(1, n / 2);
        let mut values = vec![1.0; n];
        for i in 0..band {
            let m = (0.5 * PI * i as f64 / band as f64).sin().powf(exponent);
            values[i] = m;
            values[n - 1 - i] = m;
        }
        Self { values, band }
    }

    /// All ones.
    pub fn disabled(grid: &Grid) -> Self {
        Self {
            values: vec![1.0; grid.len()],
            band: 0,
        }
    }

    pub fn from_config(grid: &Grid, config: &PropagationConfig) -> Self {
        if config.mask_enabled {
            Self::new(grid, config.mask_fraction, config.mask_exponent)
        } else {
            Self::disabled(grid)
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Multiply `psi` pointwise by the mask described by `config`.
pub fn apply_mask(psi: &mut Wavefunction, config: &PropagationConfig) {
    let mask = Mask::from_config(psi.grid(), config);
    apply_mask_values(psi, &mask);
}

pub fn apply_mask_values(psi: &mut Wavefunction, mask: &Mask) {
    let n = psi.amplitudes.len();
    let band = mask.band.min(n / 2);
    for i in (0..band).chain(n - band..n) {
        psi.amplitudes[i] *= mask.values[i];
    }
}

/// Reusable Crank–Nicolson stepper for one potential and timestep.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    xs: Vec<f64>,
    /// `1/dx² + V_i`, the field-free diagonal of `H`.
    h_diag: Vec<f64>,
    half_dt: f64,
    /// Off-diagonal of `1 + i dt/2 H`.
    off: Complex64,
    /// Reciprocal pivots of the two-ended elimination.
    c: Vec<Complex64>,
    d: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(potential: &Potential, grid: &Grid, dt: f64) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(Error::InvalidArgument("potential and grid sizes differ".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
        let n = grid.len();
        Ok(Self {
            xs: grid.to_vec(),
            h_diag: potential.values().iter().map(|v| inv_dx2 + v).collect(),
            half_dt: 0.5 * dt,
            off: Complex64::new(0.0, -0.5 * dt * 0.5 * inv_dx2),
            c: vec![Complex64::new(0.0, 0.0); n],
            d: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.half_dt
    }

    /// Advance `amps` by one step in a uniform field `field`.
    ///
    /// The system is eliminated from both ends at once, meeting in the
    /// middle row; the two recurrences are independent and overlap in the
    /// pipeline.
    pub fn step(&mut self, amps: &mut [Complex64], field: f64) -> Result<()> {
        let n = amps.len();
        let o = self.off;
        // `o` is purely imaginary, so `o²` is real.
        let o2 = (o * o).re;
        let two = Complex64::new(2.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let (h, xs, hdt) = (&self.h_diag, &self.xs, self.half_dt);
        let diag = |i: usize| Complex64::new(1.0, hdt * (h[i] + field * xs[i]));
        let recip = |z: Complex64| z.conj() * (1.0 / z.norm_sqr());
        let rhs = |i: usize, a: Complex64| {
            let left = if i > 0 { amps[i - 1] } else { zero };
            let right = if i + 1 < n { amps[i + 1] } else { zero };
            (two - a) * amps[i] - o * (left + right)
        };
        let (inv, d) = (&mut self.c, &mut self.d);

        let m = n / 2;
        let a = diag(0);
        inv[0] = recip(a);
        d[0] = rhs(0, a) * inv[0];
        let a = diag(n - 1);
        inv[n - 1] = recip(a);
        d[n - 1] = rhs(n - 1, a) * inv[n - 1];
        // Rows 1..m from the top, rows n-2 down to m+1 from the bottom.
        let top = m - 1;
        let bottom = n - 2 - m;
        for k in 1..=top.max(bottom) {
            if k <= top {
                let i = k;
                let a = diag(i);
                inv[i] = recip(a - o2 * inv[i - 1]);
                d[i] = (rhs(i, a) - o * d[i - 1]) * inv[i];
            }
            if k <= bottom {
                let i = n - 1 - k;
                let a = diag(i);
                inv[i] = recip(a - o2 * inv[i + 1]);
                d[i] = (rhs(i, a) - o * d[i + 1]) * inv[i];
            }
        }
        let a = diag(m);
        let den = a - o2 * (inv[m - 1] + inv[m + 1]);
        let xm = (rhs(m, a) - o * (d[m - 1] + d[m + 1])) * recip(den);
        if !xm.is_finite() || !d[0].is_finite() || !d[n - 1].is_finite() {
            let row = inv.iter().position(|c| !c.is_finite()).unwrap_or(m);
            return Err(Error::SolveBreakdown { row });
        }
        amps[m] = xm;
        let (mut up, mut down) = (xm, xm);
        for k in 1..=m.max(n - 1 - m) {
            if k <= m {
                let i = m - k;
                up = d[i] - o * inv[i] * up;
                amps[i] = up;
            }
            if m + k < n {
                let i = m + k;
                down = d[i] - o * inv[i] * down;
                amps[i] = down;
            }
        }
        Ok(())
    }
}

/// One Crank–Nicolson step of `psi` in a uniform field.
pub fn step(psi: &Wavefunction, potential: &Potential, field_value: f64, dt: f64) -> Result<Wavefunction> {
    let mut stepper = CrankNicolson::new(potential, psi.grid(), dt)?;
    let mut out = psi.clone();
    stepper.step(&mut out.amplitudes, field_value)?;
    Ok(out)
}

/// Uniformly sampled observables of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub field: Vec<f64>,
    pub norm: Vec<f64>,
    pub dipole: Vec<f64>,
    pub accel: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sample spacing, if there are at least two samples.
    pub fn sample_step(&self) -> Option<f64> {
        (self.times.len() >= 2).then(|| self.times[1] - self.times[0])
    }

    fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            field: Vec::with_capacity(n),
            norm: Vec::with_capacity(n),
            dipole: Vec::with_capacity(n),
            accel: Vec::with_capacity(n),
        }
    }
}

/// `|Ψ(x, t)|²` snapshots, row-major in time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMovie {
    pub times: Vec<f64>,
    pub x_min: f64,
    pub dx: f64,
    pub n_x: usize,
    pub data: Vec<f64>,
}

impl DensityMovie {
    pub fn n_t(&self) -> usize {
        self.times.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.n_x..(k + 1) * self.n_x]
    }

    /// Spacing between recorded snapshots.
    pub fn dt_record(&self) -> f64 {
        if self.times.len() >= 2 {
            self.times[1] - self.times[0]
        } else {
            0.0
        }
    }
}

/// Everything produced by [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub series: TimeSeries,
    pub density: Option<DensityMovie>,
    pub final_state: Wavefunction,
    /// First time the norm fell below the configured floor.
    pub depleted_at: Option<f64>,
    /// Timestep actually used.
    pub dt: f64,
    pub steps: usize,
}

impl Propagation {
    pub fn final_norm(&self) -> f64 {
        self.final_state.norm()
    }
}

/// Number of steps and the timestep that tile `[0, tau]` exactly.
pub fn step_plan(tau: f64, dt: f64) -> (usize, f64) {
    let steps = ((tau / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, tau / steps as f64)
}

/// Evolve `psi0` through the whole pulse.
pub fn propagate(
    psi0: &Wavefunction,
    potential: &Potential,
    pulse: &Pulse,
    config: &PropagationConfig,
) -> Result<Propagation> {
    config.validate()?;
    let grid = *psi0.grid();
    if potential.len() != grid.len() {
        return Err(Error::InvalidArgument("potential and grid sizes differ".into()));
    }
    let (steps, dt) = step_plan(pulse.duration(), config.dt);
    let mut stepper = CrankNicolson::new(potential, &grid, dt)?;
    let mask = Mask::from_config(&grid, config);
    let slope = potential.derivative();

    let mut psi = psi0.clone();
    let mut series = TimeSeries::with_capacity(steps / config.record_stride + 1);
    let mut density = (config.density_stride > 0).then(|| DensityMovie {
        times: Vec::new(),
        x_min: grid.x_min(),
        dx: grid.dx(),
        n_x: grid.len(),
        data: Vec::new(),
    });
    let mut depleted_at = None;

    let record = |psi: &Wavefunction, t: f64, series: &mut TimeSeries| -> f64 {
        let e = pulse.field(t);
        let norm = psi.norm();
        series.times.push(t);
        series.field.push(e);
        series.norm.push(norm);
        series.dipole.push(psi.dipole());
        series.accel.push(-psi.expectation(slope) - e * norm);
        norm
    };

    record(&psi, 0.0, &mut series);
    if let Some(movie) = density.as_mut() {
        movie.times.push(0.0);
        movie.data.extend(psi.density());
    }

    for k in 1..=steps {
        let t_mid = (k as f64 - 0.5) * dt;
        stepper.step(&mut psi.amplitudes, pulse.field(t_mid))?;
        if config.mask_enabled {
            apply_mask_values(&mut psi, &mask);
        }
        let t = k as f64 * dt;
        if k % config.record_stride == 0 {
            let norm = record(&psi, t, &mut series);
            if depleted_at.is_none() && norm < config.norm_floor {
                depleted_at = Some(t);
                log::warn!("wavefunction depleted below {} at t = {t:.1}", config.norm_floor);
            }
        }
        if let Some(movie) = density.as_mut() {
            if k % config.density_stride == 0 {
                movie.times.push(t);
                movie.data.extend(psi.density());
            }
        }
    }

    Ok(Propagation {
        series,
        density,
        final_state: psi,
        depleted_at,
        dt,
        steps,
    })
}
