//! Bound states of the stationary Hamiltonian `-1/2 d²/dx² + V(x)`.
//!
//! The kinetic term uses the 3-point stencil with zero (hard-wall) values
//! just outside the grid, so the Hamiltonian is a real symmetric tridiagonal
//! matrix. The lowest levels come from Sturm bisection, the states from
//! inverse iteration.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;
use crate::tridiag;
use crate::units::hartree_to_ev;

/// Boundary amplitude above which a state is considered to feel the walls.
pub const BOUNDARY_TOLERANCE: f64 = 1e-6;

/// Lowest eigenpairs of a discretised stationary Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSet {
    grid: Grid,
    energies: Vec<f64>,
    states: Vec<Vec<f64>>,
    dipoles: Vec<Vec<f64>>,
    boundary_amplitude: Vec<f64>,
}

impl EigenSet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Energies in ascending order (a.u.).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Real states normalised so that `dx * Σ φ² = 1`. Each state's sign is
    /// fixed by making its leftmost non-negligible amplitude positive.
    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `dx * Σ x φ_j φ_k`, signed.
    pub fn dipole(&self, j: usize, k: usize) -> f64 {
        self.dipoles[j][k]
    }

    pub fn dipole_table(&self) -> &[Vec<f64>] {
        &self.dipoles
    }

    /// `E_k - E_j`.
    pub fn frequency(&self, j: usize, k: usize) -> f64 {
        self.energies[k] - self.energies[j]
    }

    pub fn is_bound(&self, level: usize) -> bool {
        self.energies[level] < 0.0
    }

    pub fn bound_count(&self) -> usize {
        self.energies.iter().filter(|&&e| e < 0.0).count()
    }

    /// Energy needed to lift the ground state to the continuum threshold.
    pub fn ionization_threshold(&self) -> f64 {
        -self.energies[0]
    }

    /// Largest of `|φ|` at the two grid ends, per level.
    pub fn boundary_amplitude(&self) -> &[f64] {
        &self.boundary_amplitude
    }

    pub fn energies_ev(&self) -> Vec<f64> {
        self.energies.iter().copied().map(hartree_to_ev).collect()
    }
}

/// Frequency and dipole moment of the `j → k` transition.
pub fn transition(eigenset: &EigenSet, j: usize, k: usize) -> Result<(f64, f64)> {
    if j >= k {
        return Err(Error::IndexOutOfRange(format!(
            "transition ({j}, {k}) needs j < k"
        )));
    }
    if k >= eigenset.len() {
        return Err(Error::IndexOutOfRange(format!(
            "level {k} requested, only {} computed",
            eigenset.len()
        )));
    }
    Ok((eigenset.frequency(j, k), eigenset.dipole(j, k)))
}

/// Diagonal and off-diagonal of the discretised `H_a`.
pub fn hamiltonian_bands(potential: &Potential, grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let diag = potential.values().iter().map(|v| inv_dx2 + v).collect();
    let off = vec![-0.5 * inv_dx2; grid.len() - 1];
    (diag, off)
}

/// The `n_levels` lowest eigenpairs, bound or not.
pub fn solve_levels(potential: &Potential, grid: &Grid, n_levels: usize) -> Result<EigenSet> {
    if n_levels == 0 {
        return Err(Error::InvalidArgument("n_levels must be at least 1".into()));
    }
    if potential.len() != grid.len() {
        return Err(Error::InvalidArgument(
            "potential and grid sizes differ".into(),
        ));
    }
    if n_levels > grid.len() {
        return Err(Error::InvalidArgument(format!(
            "{n_levels} levels requested on a {}-point grid",
            grid.len()
        )));
    }
    let (diag, off) = hamiltonian_bands(potential, grid);
    let mut energies = Vec::with_capacity(n_levels);
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(n_levels);
    for k in 0..n_levels {
        let e = tridiag::kth_eigenvalue(&diag, &off, k);
        let mut v = tridiag::inverse_iteration(&diag, &off, e);
        // Near-degenerate pairs can come back non-orthogonal; project out
        // the lower states before normalising.
        for prev in &states {
            let overlap: f64 = prev.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(prev).for_each(|(x, p)| *x -= overlap * p);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        energies.push(e);
        states.push(v);
    }

    // Rescale from unit Euclidean norm to unit L2 norm on the grid.
    let scale = 1.0 / grid.dx().sqrt();
    for state in &mut states {
        let peak = state.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lead = state
            .iter()
            .find(|x| x.abs() > 1e-3 * peak)
            .copied()
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -scale } else { scale };
        state.iter_mut().for_each(|x| *x *= sign);
    }

    let xs = grid.to_vec();
    let mut dipoles = vec![vec![0.0; n_levels]; n_levels];
    for j in 0..n_levels {
        for k in j..n_levels {
            let mu = grid.dx()
                * states[j]
                    .iter()
                    .zip(&states[k])
                    .zip(&xs)
                    .map(|((a, b), x)| a * b * x)
                    .sum::<f64>();
            dipoles[j][k] = mu;
            dipoles[k][j] = mu;
        }
    }

    let boundary_amplitude: Vec<f64> = states
        .iter()
        .map(|s| s[0].abs().max(s[s.len() - 1].abs()))
        .collect();
    for (level, amp) in boundary_amplitude.iter().enumerate() {
        if *amp > BOUNDARY_TOLERANCE {
            warn!(
                "level {level} has amplitude {amp:.3e} at the grid boundary; widen the grid"
            );
        }
    }

    Ok(EigenSet {
        grid: *grid,
        energies,
        states,
        dipoles,
        boundary_amplitude,
    })
}

/// The `n_levels` lowest states, all of which must be bound (`E < 0`).
pub fn solve_bound_states(
    potential: &Potential,
    grid: &Grid,
    n_levels: usize,
) -> Result<EigenSet> {
    let (diag, off) = hamiltonian_bands(potential, grid);
    let off_sq: Vec<f64> = off.iter().map(|o| o * o).collect();
    let found = tridiag::sturm_count(&diag, &off_sq, 0.0);
    if found < n_levels {
        return Err(Error::TooFewBoundStates {
            found,
            requested: n_levels,
        });
    }
    solve_levels(potential, grid, n_levels)
}

/// `<φ|H|φ> / <φ|φ>` for a real state on the grid.
pub fn rayleigh_quotient(potential: &Potential, grid: &Grid, state: &[f64]) -> f64 {
    let (diag, off) = hamiltonian_bands(potential, grid);
    let n = state.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let mut h = diag[i] * state[i];
        if i > 0 {
            h += off[i - 1] * state[i - 1];
        }
        if i + 1 < n {
            h += off[i] * state[i + 1];
        }
        num += state[i] * h;
        den += state[i] * state[i];
    }
    num / den
}
