//! Emission spectra `D(ω)` and peak extraction.
//!
//! `D(ω) = |FT[d](ω)|²` for the dipole source, `|FT[a](ω) / ω²|²` for the
//! acceleration source; the two agree up to endpoint terms. The log
//! spectrum is normalised to its maximum and floored.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::propagator::TimeSeries;

/// Default floor of the normalised log spectrum, in decades.
pub const DEFAULT_FLOOR: f64 = -20.0;
/// Default minimum peak prominence, in dB.
pub const DEFAULT_PROMINENCE_DB: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Rectangular,
    Hann,
}

impl Window {
    fn weight(&self, i: usize, n: usize) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann if n > 1 => 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos(),
            Window::Hann => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hann => "hann",
        }
    }
}

impl std::str::FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rectangular" | "rect" => Ok(Window::Rectangular),
            "hann" => Ok(Window::Hann),
            _ => Err(Error::InvalidArgument(format!("unknown window '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Dipole,
    Acceleration,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Dipole => "dipole",
            Source::Acceleration => "acceleration",
        }
    }
}

impl std::str::FromStr for Source {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dipole" => Ok(Source::Dipole),
            "acceleration" | "accel" => Ok(Source::Acceleration),
            _ => Err(Error::InvalidArgument(format!("unknown spectrum source '{s}'"))),
        }
    }
}

/// Options for [`compute_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub window: Window,
    pub source: Source,
    /// Floor of `log10(D / D_max)`.
    pub floor: f64,
    /// Zero-pad to the next power of two (changes bin spacing only).
    pub pad_pow2: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            window: Window::Rectangular,
            source: Source::Dipole,
            floor: DEFAULT_FLOOR,
            pad_pow2: false,
        }
    }
}

/// One-sided log spectrum on the positive DFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega: Vec<f64>,
    /// `omega / omega_d`.
    pub order: Vec<f64>,
    /// `log10(D / D_max)`, floored.
    pub log_d: Vec<f64>,
    pub omega_d: f64,
    /// Bin spacing `Δω`.
    pub d_omega: f64,
    pub window: Window,
    pub source: Source,
    pub floor: f64,
    pub padded: bool,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Bin spacing in harmonic-order units.
    pub fn d_order(&self) -> f64 {
        self.d_omega / self.omega_d
    }

    /// Indices whose order lies in `[lo, hi]`.
    pub fn order_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.order.partition_point(|&o| o < lo);
        let end = self.order.partition_point(|&o| o <= hi);
        start..end.max(start)
    }
}

/// `dt · DFT(signal)` with the `e^{-iωt}` sign convention, all `N` bins.
pub fn fourier_transform(signal: &[f64], dt: f64) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = signal.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf.iter_mut().for_each(|z| *z *= dt);
    buf
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InvalidSeries(format!(
            "need at least 2 samples, got {}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidSeries("times must increase".into()));
    }
    let tol = 1e-6 * dt;
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > tol {
            return Err(Error::InvalidSeries(format!(
                "non-uniform sampling at sample {}: step {} vs {dt}",
                k + 1,
                w[1] - w[0]
            )));
        }
    }
    Ok(dt)
}

/// Spectrum with the default floor and no padding.
pub fn compute_spectrum(
    series: &TimeSeries,
    omega_d: f64,
    window: Window,
    source: Source,
) -> Result<Spectrum> {
    compute_spectrum_with(
        series,
        omega_d,
        &SpectrumOptions {
            window,
            source,
            ..Default::default()
        },
    )
}

pub fn compute_spectrum_with(
    series: &TimeSeries,
    omega_d: f64,
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    let signal = match options.source {
        Source::Dipole => &series.dipole,
        Source::Acceleration => &series.accel,
    };
    spectrum_of_signal(&series.times, signal, omega_d, options)
}

/// Spectrum of an arbitrary uniformly sampled signal.
pub fn spectrum_of_signal(
    times: &[f64],
    signal: &[f64],
    omega_d: f64,
    options: &SpectrumOptions,
) -> Result<Spectrum> {
    if signal.is_empty() || times.is_empty() {
        return Err(Error::InvalidSeries("empty series".into()));
    }
    if signal.len() != times.len() {
        return Err(Error::InvalidSeries("signal and time lengths differ".into()));
    }
    if !(omega_d > 0.0) {
        return Err(Error::InvalidArgument("omega_d must be positive".into()));
    }
    let dt = check_uniform(times)?;
    let n = signal.len();
    let mut windowed: Vec<f64> = signal
        .iter()
        .enumerate()
        .map(|(i, s)| s * options.window.weight(i, n))
        .collect();
    if options.pad_pow2 {
        windowed.resize(n.next_power_of_two(), 0.0);
    }
    let len = windowed.len();
    let ft = fourier_transform(&windowed, dt);
    let d_omega = 2.0 * PI / (len as f64 * dt);

    let bins = len / 2;
    let mut omega = Vec::with_capacity(bins);
    let mut power = Vec::with_capacity(bins);
    for k in 1..=bins {
        let w = k as f64 * d_omega;
        let p = match options.source {
            Source::Dipole => ft[k].norm_sqr(),
            Source::Acceleration => (ft[k] / (w * w)).norm_sqr(),
        };
        omega.push(w);
        power.push(p);
    }
    let max = power.iter().cloned().fold(0.0f64, f64::max);
    let log_d = power
        .iter()
        .map(|&p| {
            if max > 0.0 && p > 0.0 {
                (p / max).log10().max(options.floor)
            } else {
                options.floor
            }
        })
        .collect();
    let order = omega.iter().map(|w| w / omega_d).collect();
    Ok(Spectrum {
        omega,
        order,
        log_d,
        omega_d,
        d_omega,
        window: options.window,
        source: options.source,
        floor: options.floor,
        padded: options.pad_pow2,
    })
}

/// A refined local maximum of a log spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub order: f64,
    pub log_height: f64,
    /// Prominence in dB (10 × decades).
    pub prominence_db: f64,
    /// Index of the bin the peak was found on.
    pub bin: usize,
}

/// Peaks sorted by frequency.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn orders(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.order).collect()
    }

    /// Peak closest in order to `order`, if any.
    pub fn nearest(&self, order: f64) -> Option<&Peak> {
        self.peaks.iter().min_by(|a, b| {
            (a.order - order)
                .abs()
                .partial_cmp(&(b.order - order).abs())
                .unwrap()
        })
    }
}

/// Topographic prominence of the local maximum at `i`, in decades.
fn prominence(y: &[f64], i: usize) -> f64 {
    let h = y[i];
    let mut left_min = h;
    let mut j = i;
    while j > 0 {
        j -= 1;
        if y[j] > h {
            break;
        }
        left_min = left_min.min(y[j]);
    }
    let mut right_min = h;
    let mut j = i;
    while j + 1 < y.len() {
        j += 1;
        if y[j] > h {
            break;
        }
        right_min = right_min.min(y[j]);
    }
    h - left_min.max(right_min)
}

/// Vertex offset (in bins) and height of the parabola through three points.
pub fn parabolic_vertex(left: f64, center: f64, right: f64) -> (f64, f64) {
    let denom = left - 2.0 * center + right;
    if denom.abs() < 1e-300 {
        return (0.0, center);
    }
    let delta = (0.5 * (left - right) / denom).clamp(-0.5, 0.5);
    (delta, center - 0.25 * (left - right) * delta)
}

/// Strict local maxima of `log_d` in `order_window` with prominence of at
/// least `min_prominence_db`, refined by parabolic interpolation.
pub fn find_peaks(spectrum: &Spectrum, min_prominence_db: f64, order_window: (f64, f64)) -> Result<PeakSet> {
    let (lo, hi) = order_window;
    let range = spectrum.order_range(lo, hi);
    if range.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let y = &spectrum.log_d;
    let n = y.len();
    let mut peaks = Vec::new();
    for i in range {
        if i == 0 || i + 1 >= n {
            continue;
        }
        if !(y[i] > y[i - 1] && y[i] > y[i + 1]) {
            continue;
        }
        let prom_db = 10.0 * prominence(y, i);
        if prom_db < min_prominence_db {
            continue;
        }
        let (delta, height) = parabolic_vertex(y[i - 1], y[i], y[i + 1]);
        let omega = spectrum.omega[i] + delta * spectrum.d_omega;
        peaks.push(Peak {
            omega,
            order: omega / spectrum.omega_d,
            log_height: height,
            prominence_db: prom_db,
            bin: i,
        });
    }
    Ok(PeakSet { peaks })
}

/// Half-width of the harmonic search window, in orders.
pub const HARMONIC_HALF_WIDTH: f64 = 0.05;

/// Largest `log_d` within ±0.05 orders of harmonic `n`.
pub fn harmonic_power(spectrum: &Spectrum, n: f64) -> Result<f64> {
    let first = spectrum.order.first().copied().unwrap_or(f64::INFINITY);
    let last = spectrum.order.last().copied().unwrap_or(f64::NEG_INFINITY);
    if !(n - HARMONIC_HALF_WIDTH >= first - spectrum.d_order() && n + HARMONIC_HALF_WIDTH <= last) {
        return Err(Error::OrderOutOfRange(n));
    }
    let range = spectrum.order_range(n - HARMONIC_HALF_WIDTH, n + HARMONIC_HALF_WIDTH);
    if range.is_empty() {
        // Window narrower than a bin: fall back to the nearest bin.
        let k = spectrum.order.partition_point(|&o| o < n).min(spectrum.len() - 1);
        return Ok(spectrum.log_d[k]);
    }
    Ok(spectrum.log_d[range].iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}
