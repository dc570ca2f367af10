//! Amplitude sweeps: one propagation and spectrum per driving amplitude,
//! assembled into a map, then peak tracks matched against the closed-form
//! sideband predictors.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::analytic::{
    odd_harmonic, predict_eq2, predict_eq3, predict_linear_sidebands, tls_propagate, TlsParams,
};
use crate::drive::Pulse;
use crate::eigen::{solve_bound_states, transition};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{build_potential_with_prefactor, Potential, WellSpec};
use crate::propagator::{propagate, PropagationConfig, TimeSeries, Wavefunction};
use crate::spectra::{compute_spectrum_with, find_peaks, Spectrum, SpectrumOptions};

/// The driven system of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepSystem {
    /// Grid-based TDSE, started from the ground state.
    Tdse {
        grid: Grid,
        wells: Vec<WellSpec>,
        prefactor: f64,
        propagation: PropagationConfig,
        /// Levels solved for; must cover `transition`.
        n_levels: usize,
        /// Level pair defining `ω_a` and `μ` for the Rabi axis.
        transition: (usize, usize),
    },
    /// Two-level reference model.
    Tls { tls: TlsParams, dt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub system: SweepSystem,
    /// Carrier and envelope; its amplitude is replaced row by row.
    pub pulse: Pulse,
    /// Peak field amplitudes (a.u.), strictly increasing.
    pub amplitudes: Vec<f64>,
    /// Harmonic orders kept in the map.
    pub order_range: (f64, f64),
    pub spectrum: SpectrumOptions,
    /// Worker threads; 0 means rayon's default.
    pub workers: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.len() < 2 {
            return Err(Error::InvalidArgument("a sweep needs at least 2 amplitudes".into()));
        }
        if !self.amplitudes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("amplitudes must be strictly increasing".into()));
        }
        if self.amplitudes[0] < 0.0 {
            return Err(Error::InvalidArgument("amplitudes must be non-negative".into()));
        }
        let (lo, hi) = self.order_range;
        if !(hi > lo && lo >= 0.0) {
            return Err(Error::InvalidArgument(format!("bad order range ({lo}, {hi})")));
        }
        Ok(())
    }
}

/// Amplitudes giving `Ω_R / ω_a` evenly spaced on `[lo, hi]`.
pub fn amplitudes_for_rabi(omega_a: f64, mu: f64, lo: f64, hi: f64, rows: usize) -> Vec<f64> {
    (0..rows)
        .map(|k| {
            let r = if rows > 1 {
                lo + (hi - lo) * k as f64 / (rows - 1) as f64
            } else {
                lo
            };
            r * omega_a / mu
        })
        .collect()
}

/// Stationary data shared by all rows of a TDSE sweep.
#[derive(Debug, Clone)]
pub struct PreparedSystem {
    pub omega_a: f64,
    pub mu: f64,
    /// Full level list when the system is grid based.
    pub energies: Vec<f64>,
    pub dipoles: Vec<Vec<f64>>,
    tdse: Option<(Potential, Wavefunction)>,
}

/// Solve the stationary problem once: potential, levels, `ω_a`, `|μ|`.
pub fn prepare_system(system: &SweepSystem) -> Result<PreparedSystem> {
    match system {
        SweepSystem::Tdse {
            grid,
            wells,
            prefactor,
            n_levels,
            transition: (j, k),
            ..
        } => {
            let potential = build_potential_with_prefactor(wells, grid, *prefactor)?;
            let levels = (*n_levels).max(k + 1);
            let set = solve_bound_states(&potential, grid, levels)?;
            let (omega_a, mu) = transition(&set, *j, *k)?;
            let psi0 = Wavefunction::from_eigenstate(&set, 0)?;
            Ok(PreparedSystem {
                omega_a,
                mu: mu.abs(),
                energies: set.energies().to_vec(),
                dipoles: set.dipole_table().to_vec(),
                tdse: Some((potential, psi0)),
            })
        }
        SweepSystem::Tls { tls, .. } => Ok(PreparedSystem {
            omega_a: tls.omega_a,
            mu: tls.mu,
            energies: vec![-0.5 * tls.omega_a, 0.5 * tls.omega_a],
            dipoles: vec![vec![0.0, tls.mu], vec![tls.mu, 0.0]],
            tdse: None,
        }),
    }
}

/// Outcome of a single driven run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: TimeSeries,
    pub final_norm: f64,
    pub depleted_at: Option<f64>,
}

/// Run the system of `config` at one pulse.
pub fn run_single(system: &SweepSystem, prepared: &PreparedSystem, pulse: &Pulse) -> Result<RunOutcome> {
    match (system, &prepared.tdse) {
        (SweepSystem::Tdse { propagation, .. }, Some((potential, psi0))) => {
            let run = propagate(psi0, potential, pulse, propagation)?;
            Ok(RunOutcome {
                final_norm: run.final_norm(),
                depleted_at: run.depleted_at,
                series: run.series,
            })
        }
        (SweepSystem::Tls { tls, dt }, _) => {
            let run = tls_propagate(tls, pulse, *dt)?;
            Ok(RunOutcome {
                final_norm: *run.series.norm.last().unwrap_or(&1.0),
                depleted_at: None,
                series: run.series,
            })
        }
        _ => Err(Error::InvalidArgument("system was not prepared for propagation".into())),
    }
}

/// Per-row completion status.
#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Done { final_norm: f64, depleted_at: Option<f64> },
    Failed(String),
}

impl RowStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Done { .. })
    }
}

/// Log spectra stacked by driving amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumMap {
    pub amplitudes: Vec<f64>,
    /// `μ E` for each row.
    pub rabi: Vec<f64>,
    pub omega_a: f64,
    pub mu: f64,
    pub omega_d: f64,
    pub order: Vec<f64>,
    /// Bin spacing in orders.
    pub d_order: f64,
    /// Row-major `amplitudes.len() × order.len()` values of `log10 D`.
    pub log_d: Vec<f64>,
    pub status: Vec<RowStatus>,
    pub options: SpectrumOptions,
    pub metadata: BTreeMap<String, String>,
}

impl SpectrumMap {
    pub fn rows(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn cols(&self) -> usize {
        self.order.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.log_d[i * c..(i + 1) * c]
    }

    /// Row `i` as a stand-alone spectrum.
    pub fn row_spectrum(&self, i: usize) -> Spectrum {
        let d_omega = self.d_order * self.omega_d;
        Spectrum {
            omega: self.order.iter().map(|o| o * self.omega_d).collect(),
            order: self.order.clone(),
            log_d: self.row(i).to_vec(),
            omega_d: self.omega_d,
            d_omega,
            window: self.options.window,
            source: self.options.source,
            floor: self.options.floor,
            padded: self.options.pad_pow2,
        }
    }

    pub fn rabi_over_omega_a(&self, i: usize) -> f64 {
        self.rabi[i] / self.omega_a
    }

    pub fn order_range(&self) -> (f64, f64) {
        (
            self.order.first().copied().unwrap_or(0.0),
            self.order.last().copied().unwrap_or(0.0),
        )
    }
}

/// Run every row of the sweep. Rows are independent and assembled by
/// index, so the map does not depend on the worker count.
pub fn run_sweep(config: &SweepConfig) -> Result<SpectrumMap> {
    config.validate()?;
    let prepared = prepare_system(&config.system)?;
    let (lo, hi) = config.order_range;
    let omega_d = config.pulse.omega_d;

    let row = |e: f64| -> Result<(Spectrum, RunOutcome)> {
        let pulse = config.pulse.with_amplitude(e)?;
        let out = run_single(&config.system, &prepared, &pulse)?;
        let spec = compute_spectrum_with(&out.series, omega_d, &config.spectrum)?;
        Ok((spec, out))
    };

    let results: Vec<Result<(Spectrum, RunOutcome)>> = if config.workers == 1 {
        config.amplitudes.iter().map(|&e| row(e)).collect()
    } else {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if config.workers > 0 {
            builder = builder.num_threads(config.workers);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| config.amplitudes.par_iter().map(|&e| row(e)).collect())
    };

    // Column axis from the first successful row; all rows share the
    // same duration and sampling, hence the same bins.
    let template = results
        .iter()
        .find_map(|r| r.as_ref().ok())
        .map(|(s, _)| s.clone())
        .ok_or_else(|| {
            let first = results.iter().find_map(|r| r.as_ref().err()).cloned();
            first.unwrap_or_else(|| Error::InvalidArgument("sweep produced no rows".into()))
        })?;
    let cols = template.order_range(lo, hi);
    let order: Vec<f64> = template.order[cols.clone()].to_vec();
    let n_cols = order.len();

    let mut log_d = Vec::with_capacity(results.len() * n_cols);
    let mut status = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok((spec, out)) => {
                log_d.extend_from_slice(&spec.log_d[cols.clone()]);
                status.push(RowStatus::Done {
                    final_norm: out.final_norm,
                    depleted_at: out.depleted_at,
                });
            }
            Err(e) => {
                log::warn!("sweep row {i} failed: {e}");
                log_d.extend(std::iter::repeat(config.spectrum.floor).take(n_cols));
                status.push(RowStatus::Failed(e.to_string()));
            }
        }
    }

    let rabi: Vec<f64> = config.amplitudes.iter().map(|e| prepared.mu * e).collect();
    let mut metadata = BTreeMap::new();
    metadata.insert("omega_a_au".into(), format!("{}", prepared.omega_a));
    metadata.insert("mu_au".into(), format!("{}", prepared.mu));
    metadata.insert("omega_d_au".into(), format!("{omega_d}"));
    metadata.insert("window".into(), config.spectrum.window.name().into());
    metadata.insert("source".into(), config.spectrum.source.name().into());
    metadata.insert("log_floor".into(), format!("{}", config.spectrum.floor));
    metadata.insert("log_normalisation".into(), "per-row maximum".into());
    metadata.insert("units".into(), "atomic".into());
    metadata.insert("gauge".into(), "length".into());
    metadata.insert("amplitude_convention".into(), "peak".into());

    Ok(SpectrumMap {
        amplitudes: config.amplitudes.clone(),
        rabi,
        omega_a: prepared.omega_a,
        mu: prepared.mu,
        omega_d,
        order,
        d_order: template.d_order(),
        log_d,
        status,
        options: config.spectrum,
        metadata,
    })
}

/// Labels for spectral lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    OddHarmonic,
    LinearLower,
    LinearUpper,
    Eq2Lower,
    Eq2Upper,
    Eq3Lower,
    Eq3Upper,
    Unassigned,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::OddHarmonic => "odd-harmonic",
            Branch::LinearLower => "linear-lower",
            Branch::LinearUpper => "linear-upper",
            Branch::Eq2Lower => "eq2-lower",
            Branch::Eq2Upper => "eq2-upper",
            Branch::Eq3Lower => "eq3-lower",
            Branch::Eq3Upper => "eq3-upper",
            Branch::Unassigned => "unassigned",
        }
    }

    /// Family name shared by the lower and upper branches.
    pub fn family(&self) -> &'static str {
        match self {
            Branch::OddHarmonic => "odd-harmonic",
            Branch::LinearLower | Branch::LinearUpper => "linear",
            Branch::Eq2Lower | Branch::Eq2Upper => "eq2",
            Branch::Eq3Lower | Branch::Eq3Upper => "eq3",
            Branch::Unassigned => "unassigned",
        }
    }
}

/// A predicted line evaluated on every row of a map.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionCurve {
    pub branch: Branch,
    pub n: usize,
    pub rabi: Vec<f64>,
    /// Predicted harmonic order per row.
    pub orders: Vec<f64>,
    /// Whether the line can be observed on that row (inside the map's order
    /// range, row succeeded).
    pub observable: Vec<bool>,
}

/// Which closed-form curves to evaluate on a map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionSet {
    pub odd_harmonics: bool,
    pub linear_n: Vec<usize>,
    pub eq2_n: Vec<usize>,
    /// Higher transition for the odd-centred sidebands and its indices.
    pub eq3: Option<(TlsParams, Vec<usize>)>,
}

/// Evaluate `set` on the rows of `map`.
pub fn prediction_curves(map: &SpectrumMap, set: &PredictionSet) -> Result<Vec<PredictionCurve>> {
    let tls = TlsParams::new(map.omega_a, map.mu)?;
    let (lo, hi) = map.order_range();
    let wd = map.omega_d;
    let rows = map.rows();
    let mut curves = Vec::new();
    let mut push = |branch: Branch, n: usize, orders: Vec<f64>| {
        let observable = orders
            .iter()
            .zip(&map.status)
            .map(|(o, s)| s.is_ok() && *o >= lo && *o <= hi)
            .collect();
        curves.push(PredictionCurve {
            branch,
            n,
            rabi: map.rabi.clone(),
            orders,
            observable,
        });
    };
    if set.odd_harmonics {
        let mut n = 0;
        while odd_harmonic(wd, n) / wd <= hi {
            let o = odd_harmonic(wd, n) / wd;
            if o >= lo {
                push(Branch::OddHarmonic, n, vec![o; rows]);
            }
            n += 1;
        }
    }
    for &n in &set.linear_n {
        let preds = map
            .rabi
            .iter()
            .map(|&r| predict_linear_sidebands(&tls, wd, r, n))
            .collect::<Result<Vec<_>>>()?;
        push(Branch::LinearLower, n, preds.iter().map(|p| p.lower / wd).collect());
        push(Branch::LinearUpper, n, preds.iter().map(|p| p.upper / wd).collect());
    }
    for &n in &set.eq2_n {
        let preds = map
            .rabi
            .iter()
            .map(|&r| predict_eq2(&tls, wd, r, n))
            .collect::<Result<Vec<_>>>()?;
        push(Branch::Eq2Lower, n, preds.iter().map(|p| p.lower / wd).collect());
        push(Branch::Eq2Upper, n, preds.iter().map(|p| p.upper / wd).collect());
    }
    if let Some((tls3, ns)) = &set.eq3 {
        for &n in ns {
            // The Rabi axis stays that of the primary transition.
            let preds = map
                .rabi
                .iter()
                .map(|&r| predict_eq3(tls3, wd, r, n))
                .collect::<Result<Vec<_>>>()?;
            push(Branch::Eq3Lower, n, preds.iter().map(|p| p.lower / wd).collect());
            push(Branch::Eq3Upper, n, preds.iter().map(|p| p.upper / wd).collect());
        }
    }
    Ok(curves)
}

/// One detected point of a track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub row: usize,
    pub e_peak: f64,
    pub rabi: f64,
    pub order: f64,
    /// Order the matched curve predicted, NaN when unassigned.
    pub predicted: f64,
    pub log_height: f64,
}

/// Detected peaks attributed to one predicted branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakTrack {
    pub branch: Branch,
    pub n: usize,
    pub points: Vec<TrackPoint>,
}

/// Peak detection settings for track extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackOptions {
    /// Maximum |observed − predicted| order distance for a match.
    pub tolerance_order: f64,
    pub min_prominence_db: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        Self {
            tolerance_order: 0.15,
            min_prominence_db: crate::spectra::DEFAULT_PROMINENCE_DB,
        }
    }
}

/// Find peaks on every row and attribute each to the nearest predicted
/// line within tolerance. Matching is one-to-one per row, closest pairs
/// first; leftover peaks go to the `Unassigned` track.
pub fn extract_tracks(map: &SpectrumMap, curves: &[PredictionCurve], options: &TrackOptions) -> Result<Vec<PeakTrack>> {
    let mut tracks: Vec<PeakTrack> = curves
        .iter()
        .map(|c| PeakTrack {
            branch: c.branch,
            n: c.n,
            points: Vec::new(),
        })
        .collect();
    let mut unassigned = PeakTrack {
        branch: Branch::Unassigned,
        n: 0,
        points: Vec::new(),
    };
    let (lo, hi) = map.order_range();
    for row in 0..map.rows() {
        if !map.status[row].is_ok() {
            continue;
        }
        let spec = map.row_spectrum(row);
        let peaks = find_peaks(&spec, options.min_prominence_db, (lo, hi))?.peaks;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (p, peak) in peaks.iter().enumerate() {
            for (c, curve) in curves.iter().enumerate() {
                let dist = (peak.order - curve.orders[row]).abs();
                if dist <= options.tolerance_order {
                    pairs.push((dist, p, c));
                }
            }
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut peak_taken = vec![false; peaks.len()];
        let mut curve_taken = vec![false; curves.len()];
        for (_, p, c) in pairs {
            if peak_taken[p] || curve_taken[c] {
                continue;
            }
            peak_taken[p] = true;
            curve_taken[c] = true;
            tracks[c].points.push(TrackPoint {
                row,
                e_peak: map.amplitudes[row],
                rabi: map.rabi[row],
                order: peaks[p].order,
                predicted: curves[c].orders[row],
                log_height: peaks[p].log_height,
            });
        }
        for (p, peak) in peaks.iter().enumerate() {
            if !peak_taken[p] {
                unassigned.points.push(TrackPoint {
                    row,
                    e_peak: map.amplitudes[row],
                    rabi: map.rabi[row],
                    order: peak.order,
                    predicted: f64::NAN,
                    log_height: peak.log_height,
                });
            }
        }
    }
    tracks.push(unassigned);
    Ok(tracks)
}

/// Agreement statistics for one branch or family.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchStats {
    pub label: String,
    pub n: Option<usize>,
    /// RMS of observed − predicted order over detected points.
    pub rms_order: f64,
    /// Detected rows / observable rows.
    pub coverage: f64,
    pub detected: usize,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub branches: Vec<BranchStats>,
    pub families: Vec<BranchStats>,
}

impl ComparisonReport {
    pub fn family(&self, name: &str) -> Option<&BranchStats> {
        self.families.iter().find(|f| f.label == name)
    }

    pub fn branch(&self, branch: Branch, n: usize) -> Option<&BranchStats> {
        self.branches
            .iter()
            .find(|b| b.label == branch.name() && b.n == Some(n))
    }
}

/// Compare tracks to their predicting curves on rows whose Rabi frequency
/// lies in `rabi_range` (all rows if `None`).
pub fn compare_tracks(
    tracks: &[PeakTrack],
    curves: &[PredictionCurve],
    rabi_range: Option<(f64, f64)>,
) -> Result<ComparisonReport> {
    if tracks.is_empty() || curves.is_empty() {
        return Err(Error::InvalidArgument("nothing to compare".into()));
    }
    let in_range = |r: f64| rabi_range.map_or(true, |(lo, hi)| r >= lo && r <= hi);
    let mut branches = Vec::new();
    // family -> (sum sq, detected, expected)
    let mut fam: BTreeMap<&'static str, (f64, usize, usize)> = BTreeMap::new();
    for curve in curves {
        let Some(track) = tracks
            .iter()
            .find(|t| t.branch == curve.branch && t.n == curve.n)
        else {
            continue;
        };
        let expected_rows: Vec<usize> = (0..curve.orders.len())
            .filter(|&i| curve.observable[i] && in_range(curve.rabi[i]))
            .collect();
        let mut sum_sq = 0.0;
        let mut detected = 0;
        for p in &track.points {
            if expected_rows.binary_search(&p.row).is_ok() {
                sum_sq += (p.order - p.predicted).powi(2);
                detected += 1;
            }
        }
        let expected = expected_rows.len();
        branches.push(BranchStats {
            label: curve.branch.name().into(),
            n: Some(curve.n),
            rms_order: rms(sum_sq, detected),
            coverage: ratio(detected, expected),
            detected,
            expected,
        });
        let entry = fam.entry(curve.branch.family()).or_insert((0.0, 0, 0));
        entry.0 += sum_sq;
        entry.1 += detected;
        entry.2 += expected;
    }
    let families = fam
        .into_iter()
        .map(|(label, (s, d, e))| BranchStats {
            label: label.into(),
            n: None,
            rms_order: rms(s, d),
            coverage: ratio(d, e),
            detected: d,
            expected: e,
        })
        .collect();
    Ok(ComparisonReport { branches, families })
}

fn rms(sum_sq: f64, count: usize) -> f64 {
    if count == 0 {
        f64::NAN
    } else {
        (sum_sq / count as f64).sqrt()
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        f64::NAN
    } else {
        a as f64 / b as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drive::Envelope;
    use crate::spectra::{Source, Window};

    pub(crate) fn painted_map(omega_a: f64, mu: f64, omega_d: f64, rabi: &[f64], lines: impl Fn(usize) -> Vec<f64>) -> SpectrumMap {
        let d_order = 0.01;
        let order: Vec<f64> = (1..800).map(|k| k as f64 * d_order).collect();
        let mut log_d = Vec::new();
        for i in 0..rabi.len() {
            let centres = lines(i);
            for &o in &order {
                let mut v: f64 = -8.0;
                for &c in &centres {
                    v = v.max(-((o - c) / 0.02).powi(2));
                }
                log_d.push(v);
            }
        }
        SpectrumMap {
            amplitudes: rabi.iter().map(|r| r / mu).collect(),
            rabi: rabi.to_vec(),
            omega_a,
            mu,
            omega_d,
            order,
            d_order,
            log_d,
            status: vec![RowStatus::Done { final_norm: 1.0, depleted_at: None }; rabi.len()],
            options: SpectrumOptions::default(),
            metadata: BTreeMap::new(),
        }
    }

    #[test]
    fn painted_eq2_lines_are_recovered() {
        let (wa, mu, wd) = (0.04, 2.0, 0.028);
        let rabi: Vec<f64> = (0..20).map(|k| wa * (1.5 + 0.125 * k as f64)).collect();
        let tls = TlsParams::new(wa, mu).unwrap();
        let map = painted_map(wa, mu, wd, &rabi, |i| {
            let mut v = vec![1.0, 3.0, 5.0, 7.0];
            for n in 1..=2 {
                let p = predict_eq2(&tls, wd, rabi[i], n).unwrap();
                v.push(p.lower / wd);
                v.push(p.upper / wd);
            }
            v
        });
        let set = PredictionSet {
            odd_harmonics: true,
            eq2_n: vec![1, 2],
            ..Default::default()
        };
        let curves = prediction_curves(&map, &set).unwrap();
        let tracks = extract_tracks(&map, &curves, &TrackOptions::default()).unwrap();
        let report = compare_tracks(&tracks, &curves, None).unwrap();
        let eq2 = report.family("eq2").unwrap();
        // Lines that coincide with another painted line cannot both be seen.
        assert!(eq2.coverage > 0.9, "coverage {}", eq2.coverage);
        assert!(eq2.rms_order < 1e-3, "rms {}", eq2.rms_order);
    }

    #[test]
    fn compare_rejects_empty_input() {
        assert!(compare_tracks(&[], &[], None).is_err());
    }

    #[test]
    fn tls_sweep_is_row_identical_across_workers() {
        let tls = TlsParams::new(1.0, 1.0).unwrap();
        let pulse = Pulse::new(1.0, 0.0, Envelope::trapezoid(1.0, 20.0, 1.0)).unwrap();
        let mut config = SweepConfig {
            system: SweepSystem::Tls { tls, dt: 0.05 },
            pulse,
            amplitudes: vec![0.2, 0.3, 0.4, 0.5],
            order_range: (0.2, 4.0),
            spectrum: SpectrumOptions {
                window: Window::Rectangular,
                source: Source::Dipole,
                ..Default::default()
            },
            workers: 1,
        };
        let serial = run_sweep(&config).unwrap();
        config.workers = 3;
        let parallel = run_sweep(&config).unwrap();
        assert_eq!(serial.log_d, parallel.log_d);
        assert_eq!(serial.rows(), 4);
    }

    #[test]
    fn sweep_config_validation() {
        let tls = TlsParams::new(1.0, 1.0).unwrap();
        let pulse = Pulse::new(1.0, 0.0, Envelope::trapezoid(1.0, 2.0, 1.0)).unwrap();
        let mut config = SweepConfig {
            system: SweepSystem::Tls { tls, dt: 0.05 },
            pulse,
            amplitudes: vec![0.3, 0.2],
            order_range: (0.2, 4.0),
            spectrum: SpectrumOptions::default(),
            workers: 1,
        };
        assert!(run_sweep(&config).is_err());
        config.amplitudes = vec![0.3];
        assert!(run_sweep(&config).is_err());
    }
}
