//! Soft-Coulomb wells and their composition into a stationary potential.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Sign applied to every well. Negative values give attractive wells.
pub const ATTRACTIVE: f64 = -1.0;

/// One soft-Coulomb well, `prefactor / sqrt(a (x - center)^2 + b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellSpec {
    /// Shape parameter; larger values narrow the well.
    pub a: f64,
    /// Softening parameter in a.u.²; sets the depth `1/sqrt(b)`.
    pub b: f64,
    pub center: f64,
}

impl WellSpec {
    pub fn new(a: f64, b: f64, center: f64) -> Self {
        Self { a, b, center }
    }

    /// `n` identical wells spaced by `separation`, centered on the origin.
    pub fn chain(n: usize, a: f64, b: f64, separation: f64) -> Vec<WellSpec> {
        let offset = 0.5 * (n as f64 - 1.0);
        (0..n)
            .map(|k| WellSpec::new(a, b, (k as f64 - offset) * separation))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "well shape parameter a must be positive, got {}",
                self.a
            )));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "well softening b must be positive, got {}",
                self.b
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidPotential("non-finite well center".into()));
        }
        Ok(())
    }

    #[inline]
    fn value(&self, prefactor: f64, x: f64) -> f64 {
        let u = x - self.center;
        prefactor / (self.a * u * u + self.b).sqrt()
    }

    #[inline]
    fn derivative(&self, prefactor: f64, x: f64) -> f64 {
        let u = x - self.center;
        let s = self.a * u * u + self.b;
        -prefactor * self.a * u / (s * s.sqrt())
    }
}

/// Sum of soft-Coulomb wells sampled on a grid, with its analytic slope.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    wells: Vec<WellSpec>,
    prefactor: f64,
    values: Vec<f64>,
    derivative: Vec<f64>,
}

impl Potential {
    pub fn wells(&self) -> &[WellSpec] {
        &self.wells
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Analytic dV/dx on the grid.
    pub fn derivative(&self) -> &[f64] {
        &self.derivative
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// A potential that is identically zero. Handy for free-particle and
    /// hard-wall checks; it carries no wells.
    pub fn zero(grid: &Grid) -> Self {
        Self {
            wells: Vec::new(),
            prefactor: ATTRACTIVE,
            values: vec![0.0; grid.len()],
            derivative: vec![0.0; grid.len()],
        }
    }

    /// Evaluate the well sum at an arbitrary position.
    pub fn eval(&self, x: f64) -> f64 {
        self.wells.iter().map(|w| w.value(self.prefactor, x)).sum()
    }
}

/// Sample attractive soft-Coulomb wells on `grid`.
pub fn build_potential(wells: &[WellSpec], grid: &Grid) -> Result<Potential> {
    build_potential_with_prefactor(wells, grid, ATTRACTIVE)
}

/// Like [`build_potential`] with an explicit sign/strength for every well.
pub fn build_potential_with_prefactor(
    wells: &[WellSpec],
    grid: &Grid,
    prefactor: f64,
) -> Result<Potential> {
    if wells.is_empty() {
        return Err(Error::InvalidPotential("well list is empty".into()));
    }
    if !prefactor.is_finite() {
        return Err(Error::InvalidPotential("non-finite prefactor".into()));
    }
    for w in wells {
        w.validate()?;
    }
    let mut values = vec![0.0; grid.len()];
    let mut derivative = vec![0.0; grid.len()];
    for (i, (v, dv)) in values.iter_mut().zip(derivative.iter_mut()).enumerate() {
        let x = grid.x(i);
        for w in wells {
            *v += w.value(prefactor, x);
            *dv += w.derivative(prefactor, x);
        }
    }
    Ok(Potential {
        wells: wells.to_vec(),
        prefactor,
        values,
        derivative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        Grid::new(-20.0, 20.0, 401).unwrap()
    }

    #[test]
    fn single_well_values() {
        let g = grid();
        let p = build_potential(&[WellSpec::new(1.0, 2.0, 0.0)], &g).unwrap();
        assert_relative_eq!(p.values()[200], -1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.eval(10.0), -1.0 / 102f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(p.values()[300], -0.09901, epsilon = 1e-5);
    }

    #[test]
    fn symmetric_pair_is_even() {
        let g = grid();
        let p = build_potential(&WellSpec::chain(2, 1.0, 0.5, 5.0), &g).unwrap();
        let n = g.len();
        for i in 0..n {
            assert_eq!(p.values()[i], p.values()[n - 1 - i]);
        }
    }

    #[test]
    fn decays_far_away() {
        let p = build_potential(&[WellSpec::new(1.0, 2.0, 0.0)], &grid()).unwrap();
        assert!(p.eval(1e8).abs() < 1e-7);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g = Grid::new(-20.0, 20.0, 4001).unwrap();
        let p = build_potential(&WellSpec::chain(3, 1.3, 0.4, 4.0), &g).unwrap();
        let h = 1e-5;
        for i in (0..g.len()).step_by(7) {
            let x = g.x(i);
            if p.wells().iter().any(|w| (x - w.center).abs() < 0.05) {
                continue;
            }
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            let rel = (fd - p.derivative()[i]).abs() / p.derivative()[i].abs().max(1e-12);
            assert!(rel < 1e-6, "x = {x}: fd {fd} vs {}", p.derivative()[i]);
        }
    }

    #[test]
    fn rejects_bad_wells() {
        let g = grid();
        assert!(build_potential(&[], &g).is_err());
        assert!(build_potential(&[WellSpec::new(0.0, 1.0, 0.0)], &g).is_err());
        assert!(build_potential(&[WellSpec::new(1.0, -1.0, 0.0)], &g).is_err());
    }

    #[test]
    fn chain_is_centered() {
        let wells = WellSpec::chain(3, 1.0, 1.0, 2.5);
        let centers: Vec<f64> = wells.iter().map(|w| w.center).collect();
        assert_eq!(centers, vec![-2.5, 0.0, 2.5]);
    }
}
