//! Property tests for the invariants the library promises.

use mollow_hhg::analytic::bessel_j0_first_zero;
use mollow_hhg::propagator::{CrankNicolson, Mask};
use mollow_hhg::sweep::SweepSystem;
use mollow_hhg::tridiag::solve_tridiagonal;
use mollow_hhg::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn j0_is_even_and_bounded(x in -200.0f64..200.0) {
        let j = bessel_j0(x).unwrap();
        prop_assert!(j.abs() <= 1.0);
        prop_assert_eq!(j, bessel_j0(-x).unwrap());
    }

    #[test]
    fn eq2_and_eq3_are_symmetric(
        wa in 0.005f64..0.5,
        wd in 0.005f64..0.5,
        rabi in 0.0f64..2.0,
        n in 1usize..6,
    ) {
        let tls = TlsParams::new(wa, 1.0).unwrap();
        let p2 = predict_eq2(&tls, wd, rabi, n).unwrap();
        let sum = p2.lower + p2.upper;
        prop_assert!((sum - 2.0 * (2 * n + 1) as f64 * wd).abs() <= 1e-12 * sum.abs().max(1.0));
        let p3 = predict_eq3(&tls, wd, rabi, n - 1).unwrap();
        prop_assert!(((p3.upper - p3.center) - (p3.center - p3.lower)).abs() < 1e-12);
    }

    #[test]
    fn eq2_tends_to_even_harmonics_for_small_gap(wd in 0.01f64..0.5, rabi in 0.0f64..1.0, n in 1usize..5) {
        let wa = 1e-4 * wd;
        let tls = TlsParams::new(wa, 1.0).unwrap();
        let p = predict_eq2(&tls, wd, rabi, n).unwrap();
        prop_assert!((p.lower - 2.0 * n as f64 * wd).abs() <= wa);
        prop_assert!((p.upper - 2.0 * (n + 1) as f64 * wd).abs() <= wa);
    }

    #[test]
    fn crank_nicolson_is_unitary(
        depth in 0.1f64..2.0,
        field in -0.1f64..0.1,
        dt in 0.005f64..0.2,
        center in -5.0f64..5.0,
    ) {
        let grid = Grid::symmetric(40.0, 401).unwrap();
        let potential = build_potential(&[WellSpec::new(depth, 1.5, 0.0)], &grid).unwrap();
        let mut psi = Wavefunction::gaussian(grid, center, 1.5, 0.3).unwrap();
        let mut cn = CrankNicolson::new(&potential, &grid, dt).unwrap();
        for _ in 0..200 {
            cn.step(psi.amplitudes_mut(), field).unwrap();
        }
        prop_assert!((psi.norm() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn tridiagonal_solution_has_small_residual(
        seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..60),
    ) {
        // Diagonally dominant, like the Crank–Nicolson left-hand side.
        let n = seed.len();
        let sub: Vec<_> = seed[1..].iter().map(|&(a, b)| c(0.3 * a, 0.3 * b)).collect();
        let sup: Vec<_> = seed[..n - 1].iter().map(|&(a, b)| c(0.3 * b, -0.2 * a)).collect();
        let diag: Vec<_> = seed.iter().map(|&(a, b)| c(1.0 + a.abs(), b)).collect();
        let rhs: Vec<_> = seed.iter().map(|&(a, b)| c(b, a)).collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for i in 0..n {
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += sub[i - 1] * x[i - 1]; }
            if i + 1 < n { r += sup[i] * x[i + 1]; }
            prop_assert!(r.norm() < 1e-12);
        }
    }

    #[test]
    fn potential_is_additive(
        ca in -20.0f64..20.0,
        cb in -20.0f64..20.0,
        a in 0.2f64..3.0,
        b in 0.1f64..4.0,
    ) {
        let grid = Grid::symmetric(30.0, 301).unwrap();
        let wa = WellSpec::new(a, b, ca);
        let wb = WellSpec::new(1.0, b, cb);
        let both = build_potential(&[wa, wb], &grid).unwrap();
        let va = build_potential(&[wa], &grid).unwrap();
        let vb = build_potential(&[wb], &grid).unwrap();
        for i in 0..grid.len() {
            prop_assert!((both.values()[i] - va.values()[i] - vb.values()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_wells_give_parity_selection(separation in 2.0f64..8.0, b in 0.3f64..2.0) {
        let grid = Grid::symmetric(40.0, 801).unwrap();
        let wells = WellSpec::chain(2, 1.0, b, separation);
        let potential = build_potential(&wells, &grid).unwrap();
        let eigen = solve_levels(&potential, &grid, 3).unwrap();
        prop_assert!(eigen.dipole(0, 2).abs() <= 1e-8);
        prop_assert!(eigen.dipole(0, 1).abs() > 1e-3);
    }

    #[test]
    fn mask_is_monotone_towards_the_edges(fraction in 0.02f64..0.4, q in 0.05f64..20.0) {
        let grid = Grid::symmetric(50.0, 501).unwrap();
        let mask = Mask::new(&grid, fraction, q);
        let m = mask.values();
        let mid = m.len() / 2;
        prop_assert!(m.iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!(m[..mid].windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(m[mid..].windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(m[mid], 1.0);
    }

    #[test]
    fn trapezoid_is_continuous_at_its_corners(
        n_on in 0.5f64..4.0,
        n_p in 1.0f64..20.0,
        n_off in 0.5f64..4.0,
        wd in 0.01f64..1.0,
    ) {
        let env = Envelope::trapezoid(n_on, n_p, n_off);
        let period = 2.0 * std::f64::consts::PI / wd;
        let tau = env.total_cycles() * period;
        let eps = 1e-9 * tau;
        for corner in [n_on * period, tau - n_off * period] {
            let jump = (env.value(wd, corner + eps) - env.value(wd, corner - eps)).abs();
            prop_assert!(jump <= 2.0 * eps / (n_on.min(n_off) * period) + 1e-12);
        }
    }

    #[test]
    fn gaussian_envelope_is_symmetric(n_fwhm in 2.0f64..40.0, wd in 0.01f64..1.0, s in 0.0f64..0.5) {
        let env = Envelope::gaussian(n_fwhm);
        let tau = env.total_cycles() * 2.0 * std::f64::consts::PI / wd;
        let d = s * tau;
        prop_assert!((env.value(wd, 0.5 * tau + d) - env.value(wd, 0.5 * tau - d)).abs() <= 1e-12);
    }

    #[test]
    fn field_is_odd_about_plateau_zero_crossings(k in 3usize..100, s in 0.0f64..0.4, e in 0.01f64..0.5) {
        let pulse = Pulse::new(0.057, e, Envelope::trapezoid(1.0, 50.0, 1.0)).unwrap();
        let tc = k as f64 * 0.5 * pulse.period();
        let d = s * 0.5 * pulse.period();
        prop_assert!((pulse.field(tc + d) + pulse.field(tc - d)).abs() <= 1e-12);
    }

    #[test]
    fn tls_stays_normalised(rabi in 0.01f64..3.0, wd in 0.3f64..1.5) {
        let tls = TlsParams::new(1.0, 1.0).unwrap();
        let pulse = Pulse::new(wd, rabi, Envelope::trapezoid(1.0, 4.0, 1.0)).unwrap();
        let run = tls_propagate(&tls, &pulse, 0.05).unwrap();
        for (g, x) in run.ground_population.iter().zip(&run.excited_population) {
            prop_assert!((g + x - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn log_spectrum_ignores_signal_scale(scale in 1e-6f64..1e6) {
        let times: Vec<f64> = (0..1024).map(|k| k as f64 * 0.5).collect();
        let base: Vec<f64> = times.iter().map(|t| (0.3 * t).sin() + 0.01 * (0.9 * t).sin()).collect();
        let scaled: Vec<f64> = base.iter().map(|v| v * scale).collect();
        let opts = SpectrumOptions::default();
        let a = mollow_hhg::spectra::spectrum_of_signal(&times, &base, 0.3, &opts).unwrap();
        let b = mollow_hhg::spectra::spectrum_of_signal(&times, &scaled, 0.3, &opts).unwrap();
        for (x, y) in a.log_d.iter().zip(&b.log_d) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn config_round_trips(
        dt in 0.001f64..0.1,
        rows in 2usize..200,
        n_p in 1.0f64..80.0,
        ratio in 0.1f64..3.0,
        hann in any::<bool>(),
    ) {
        let text = format!(
            "system.wells = 2\nsystem.b = 0.2\nsystem.separation = 4\n\
             pulse.omega_d_ratio = {ratio}\npulse.rabi_over_omega_a = 1\n\
             pulse.envelope = trapezoid\npulse.n_on = 1\npulse.n_p = {n_p}\npulse.n_off = 1\n\
             propagation.dt = {dt}\nsweep.rows = {rows}\nspectrum.window = {}\n",
            if hann { "hann" } else { "rectangular" }
        );
        let first = parse_config(&text).unwrap();
        let second = parse_config(&first.to_text()).unwrap();
        prop_assert_eq!(first.effective_lines(), second.effective_lines());
        prop_assert_eq!(second.float("propagation.dt"), Some(dt));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sweep_rows_do_not_depend_on_worker_count(workers in 2usize..6, wa in 0.5f64..1.5) {
        let tls = TlsParams::new(wa, 1.0).unwrap();
        let pulse = Pulse::new(1.0, 0.0, Envelope::trapezoid(1.0, 8.0, 1.0)).unwrap();
        let mut config = SweepConfig {
            system: SweepSystem::Tls { tls, dt: 0.05 },
            pulse,
            amplitudes: vec![0.2, 0.5, 0.9, 1.4, 2.0],
            order_range: (0.2, 6.0),
            spectrum: SpectrumOptions::default(),
            workers: 1,
        };
        let serial = run_sweep(&config).unwrap();
        let again = run_sweep(&config).unwrap();
        prop_assert_eq!(&serial.log_d, &again.log_d);
        config.workers = workers;
        let parallel = run_sweep(&config).unwrap();
        prop_assert_eq!(&serial.log_d, &parallel.log_d);
    }
}

#[test]
fn eq2_collapses_at_the_bessel_zero() {
    let tls = TlsParams::new(0.04, 1.0).unwrap();
    let wd = 0.04;
    let p = predict_eq2(&tls, wd, 0.5 * bessel_j0_first_zero() * wd, 1).unwrap();
    assert!((p.lower - 2.0 * wd).abs() < 1e-12);
    assert!((p.upper - 4.0 * wd).abs() < 1e-12);
}
