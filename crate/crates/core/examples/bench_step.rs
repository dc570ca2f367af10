use std::time::Instant;

use mollow_hhg::propagator::CrankNicolson;
use mollow_hhg::{build_potential, Grid, WellSpec};
use num_complex::Complex64;

fn main() {
    let grid = Grid::symmetric(200.0, 8192).unwrap();
    let pot = build_potential(&[WellSpec::new(1.0, 2.0, 0.0)], &grid).unwrap();
    let mut cn = CrankNicolson::new(&pot, &grid, 0.02).unwrap();
    let mut amps: Vec<Complex64> = grid.points().map(|x| Complex64::new((-x * x).exp(), 0.0)).collect();
    let steps = 20_000;
    let t = Instant::now();
    for k in 0..steps {
        cn.step(&mut amps, 0.01 * (k as f64 * 0.001).sin()).unwrap();
    }
    let el = t.elapsed().as_secs_f64();
    println!("{:.2} ns per point-step", el * 1e9 / (steps as f64 * 8192.0));
}
