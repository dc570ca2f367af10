//! Numerics checked against independent references.

mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use common::*;
use mollow_hhg::analytic::second_difference;
use mollow_hhg::propagator::{CrankNicolson, Mask};
use mollow_hhg::spectra::fourier_transform;
use mollow_hhg::*;

fn single_well(half_width: f64, n: usize) -> (Grid, Potential) {
    let grid = Grid::symmetric(half_width, n).unwrap();
    let potential = build_potential(&[WellSpec::new(1.0, 2.0, 0.0)], &grid).unwrap();
    (grid, potential)
}

fn weak_pulse() -> Pulse {
    Pulse::new(0.057, 0.005, Envelope::trapezoid(1.0, 3.0, 1.0)).unwrap()
}

fn no_mask(dt: f64, stride: usize) -> PropagationConfig {
    PropagationConfig {
        dt,
        mask_enabled: false,
        record_stride: stride,
        ..Default::default()
    }
}

#[test]
fn box_levels_match_discrete_and_continuum_spectra() {
    let n = 999;
    let grid = Grid::symmetric(5.0, n).unwrap();
    let levels = solve_levels(&Potential::zero(&grid), &grid, 4).unwrap();
    let dx = grid.dx();
    // Dirichlet walls sit one spacing beyond the outermost points.
    let width = (n + 1) as f64 * dx;
    for (k, &e) in levels.energies().iter().enumerate() {
        let m = (k + 1) as f64;
        let discrete = 2.0 / (dx * dx) * (m * PI / (2.0 * (n + 1) as f64)).sin().powi(2);
        let continuum = 0.5 * (m * PI / width).powi(2);
        // Bisection stops at a few ulps of the Gershgorin scale (~2/dx^2).
        assert!((e - discrete).abs() < 1e-10, "{e} vs {discrete}");
        assert_relative_eq!(e, continuum, max_relative = 1e-4);
    }
}

#[test]
fn soft_coulomb_levels_match_dense_diagonalisation() {
    let (grid, potential) = single_well(40.0, 1601);
    let e = solve_levels(&potential, &grid, 2).unwrap();
    let oracle = dense_ground_energy(soft_coulomb(1.0, 2.0, 0.0), 40.0, 1601);
    assert!((e.energies()[0] - oracle).abs() < 1e-9, "{} vs {oracle}", e.energies()[0]);
    // Known ground energy of this well.
    assert!((e.energies()[0] + 0.5).abs() < 1e-3);
}

#[test]
fn halving_dx_moves_bound_energies_little() {
    // Default grid against one with twice the resolution.
    let (g1, v1) = single_well(200.0, 8192);
    let (g2, v2) = single_well(200.0, 16383);
    let a = solve_bound_states(&v1, &g1, 3).unwrap();
    let b = solve_bound_states(&v2, &g2, 3).unwrap();
    for (x, y) in a.energies().iter().zip(b.energies()) {
        assert!((x - y).abs() < 1e-4, "{x} vs {y}");
    }
}

#[test]
fn free_gaussian_spreads_analytically() {
    let grid = Grid::symmetric(60.0, 6001).unwrap();
    let free = Potential::zero(&grid);
    let mut psi = Wavefunction::gaussian(grid, 0.0, 1.0, 0.0).unwrap();
    let mut cn = CrankNicolson::new(&free, &grid, 0.001).unwrap();
    let x = grid.to_vec();
    for step in 1..=2000 {
        cn.step(psi.amplitudes_mut(), 0.0).unwrap();
        if step % 500 == 0 {
            let t = step as f64 * 0.001;
            let w = spread(&x, &psi.density());
            assert_relative_eq!(w, free_gaussian_width(1.0, t), max_relative = 1e-3);
        }
    }
    assert_relative_eq!(spread(&x, &psi.density()), 2f64.sqrt(), max_relative = 1e-3);
}

#[test]
fn norm_is_conserved_without_mask() {
    let (grid, potential) = single_well(100.0, 2048);
    let eigen = solve_levels(&potential, &grid, 1).unwrap();
    let mut psi = Wavefunction::from_eigenstate(&eigen, 0).unwrap();
    let mut cn = CrankNicolson::new(&potential, &grid, 0.02).unwrap();
    let n0 = psi.norm();
    for k in 0..10_000 {
        cn.step(psi.amplitudes_mut(), 0.03 * (0.057 * 0.02 * k as f64).sin()).unwrap();
    }
    assert!((psi.norm() - n0).abs() < 1e-8);
}

#[test]
fn ehrenfest_acceleration_matches_dipole_curvature() {
    let (grid, potential) = single_well(100.0, 2048);
    let eigen = solve_levels(&potential, &grid, 1).unwrap();
    let psi = Wavefunction::from_eigenstate(&eigen, 0).unwrap();
    let pulse = weak_pulse();
    let run = propagate(&psi, &potential, &pulse, &no_mask(0.02, 1)).unwrap();
    let s = &run.series;
    let h = s.sample_step().unwrap();
    let curvature = second_difference(&s.dipole, h);
    // Plateau only.
    let period = pulse.period();
    let idx: Vec<usize> = (0..s.len())
        .filter(|&i| s.times[i] > 1.2 * period && s.times[i] < 3.8 * period)
        .collect();
    let num: f64 = idx.iter().map(|&i| (curvature[i] - s.accel[i]).powi(2)).sum();
    let den: f64 = idx.iter().map(|&i| s.accel[i].powi(2)).sum();
    let rel = (num / den).sqrt();
    assert!(rel < 1e-3, "relative rms {rel}");
}

#[test]
fn halving_dt_converges_final_dipole() {
    let (grid, potential) = single_well(100.0, 2048);
    let eigen = solve_levels(&potential, &grid, 1).unwrap();
    let psi = Wavefunction::from_eigenstate(&eigen, 0).unwrap();
    let pulse = weak_pulse();
    let a = propagate(&psi, &potential, &pulse, &no_mask(0.02, 1000)).unwrap();
    let b = propagate(&psi, &potential, &pulse, &no_mask(0.01, 1000)).unwrap();
    let (xa, xb) = (a.final_state.dipole(), b.final_state.dipole());
    assert!((xa - xb).abs() < 1e-5, "{xa} vs {xb}");
}

#[test]
fn density_rows_integrate_to_the_norm() {
    let (grid, potential) = single_well(50.0, 1024);
    let eigen = solve_levels(&potential, &grid, 1).unwrap();
    let psi = Wavefunction::from_eigenstate(&eigen, 0).unwrap();
    let pulse = Pulse::new(0.057, 0.08, Envelope::trapezoid(1.0, 2.0, 1.0)).unwrap();
    let config = PropagationConfig {
        dt: 0.05,
        record_stride: 1,
        density_stride: 20,
        ..Default::default()
    };
    let run = propagate(&psi, &potential, &pulse, &config).unwrap();
    let movie = run.density.as_ref().unwrap();
    assert!(movie.n_t() > 10);
    for k in 0..movie.n_t() {
        let total: f64 = movie.row(k).iter().sum::<f64>() * movie.dx;
        let i = run.series.times.iter().position(|&t| (t - movie.times[k]).abs() < 1e-9).unwrap();
        assert_relative_eq!(total, run.series.norm[i], max_relative = 1e-12);
    }
    // Strong field into a 50 a.u. box: some flux must reach the mask.
    assert!(run.final_norm() < 1.0);
}

#[test]
fn mask_profile() {
    let grid = Grid::symmetric(100.0, 1001).unwrap();
    let mask = Mask::new(&grid, 0.1, 0.125);
    let m = mask.values();
    // 100 points per side; the band midpoint sits at sin(pi/4)^(1/8).
    assert_relative_eq!(m[50], 0.957_603_280_698_573_7, max_relative = 1e-12);
    assert_eq!(m[0], 0.0);
    assert!(m[100..901].iter().all(|&v| v == 1.0));
    for i in 0..100 {
        assert!(m[i] <= m[i + 1]);
        assert_eq!(m[i], m[1000 - i]);
    }
}

#[test]
fn parseval_with_rectangular_window() {
    let dt = 0.1;
    let signal: Vec<f64> = (0..3000)
        .map(|k| {
            let t = k as f64 * dt;
            (0.3 * t).sin() + 0.2 * (1.7 * t).cos() * (-0.001 * t).exp()
        })
        .collect();
    let spectrum = fourier_transform(&signal, dt);
    let d_omega = 2.0 * PI / (signal.len() as f64 * dt);
    let time_side: f64 = dt * signal.iter().map(|s| s * s).sum::<f64>();
    let freq_side: f64 = d_omega / (2.0 * PI) * spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>();
    assert_relative_eq!(time_side, freq_side, max_relative = 1e-10);
}

#[test]
fn j0_matches_series_on_half_integer_grid() {
    for k in 0..=40 {
        let x = -10.0 + 0.5 * k as f64;
        let j = bessel_j0(x).unwrap();
        assert!((j - j0_series(x)).abs() < 1e-10, "x = {x}");
        assert!(j.abs() <= 1.0);
    }
}

#[test]
fn tls_pi_pulse_inverts_population() {
    // Weak resonant drive: RWA Rabi flopping at Ω_R = μE.
    let tls = TlsParams::new(0.5, 1.0).unwrap();
    let e = 0.005;
    let cycles = PI / (tls.mu * e) * 0.5 / (2.0 * PI);
    let pulse = Pulse::new(0.5, e, Envelope::trapezoid(1e-3, cycles - 1e-3, 1e-3)).unwrap();
    let run = tls_propagate(&tls, &pulse, 0.01).unwrap();
    let excited = *run.excited_population.last().unwrap();
    assert!(excited > 0.99, "{excited}");
}
