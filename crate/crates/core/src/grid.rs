use crate::error::{Error, Result};

/// Uniform 1D spatial grid.
///
/// Point `i` sits at `x_min + i * dx`; positions are never accumulated, so
/// symmetric grids stay exactly symmetric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {n_points}"
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "extent [{x_min}, {x_max}] is empty or non-finite"
            )));
        }
        let dx = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dx,
        })
    }

    /// Grid symmetric about the origin, `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of point `i`. The upper half is measured back from `x_max`
    /// so that grids with `x_max == -x_min` are mirror-exact.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        let from_top = self.n_points - 1 - i;
        if from_top < i {
            self.x_max - from_top as f64 * self.dx
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.points().collect()
    }

    /// `dx * Σ f_i g_i`, the rectangle-rule inner product on this grid.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.dx * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
    }
}

impl Default for Grid {
    /// `[-200, 200]` a.u. with 8192 points.
    fn default() -> Self {
        Self::new(-200.0, 200.0, 8192).expect("default grid is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_endpoints() {
        let g = Grid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.x(0), -1.0);
        assert_eq!(g.x(2), 0.0);
        assert_eq!(g.x(4), 1.0);
    }

    #[test]
    fn symmetric_grid_is_exactly_symmetric() {
        let g = Grid::default();
        let n = g.len();
        for i in 0..n {
            assert_eq!(g.x(i), -g.x(n - 1 - i), "i = {i}");
        }
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(1.0, 1.0, 10).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 10).is_err());
    }
}
