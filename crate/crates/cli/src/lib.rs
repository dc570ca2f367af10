//! Command-line front end. Every command writes CSV or binary data plus a
//! gnuplot script next to it.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid input or configuration,
//! 3 failure while running.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use mollow_hhg::analytic::{predict_eq2, predict_eq3, predict_linear_sidebands, tls_propagate, TlsParams};
use mollow_hhg::config::{parse_config, RunConfig, SystemKind};
use mollow_hhg::io::{self, Header, PlotKind, PredictionRow};
use mollow_hhg::propagator::{propagate, Wavefunction};
use mollow_hhg::spectra::{compute_spectrum_with, find_peaks, SpectrumOptions};
use mollow_hhg::sweep::{compare_tracks, extract_tracks, prediction_curves, run_sweep};
use mollow_hhg::{fit_dipole, Error};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mollow-hhg", version, about = "Strong-field driving of isolated bound states in 1D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound states, dipole elements and the potential.
    Eigen(ConfigArgs),
    /// One driven propagation; writes the observables time series.
    Propagate(ConfigArgs),
    /// Spectrum and peaks of a time series CSV.
    Spectrum(SpectrumArgs),
    /// Driven two-level reference run with its spectrum.
    Tls(TlsArgs),
    /// Closed-form sideband curves over an amplitude range.
    Predict(PredictArgs),
    /// Amplitude sweep: spectrum map, peak tracks, comparison report.
    Sweep(SweepArgs),
    /// Dipole moment from linear-regime sideband positions.
    FitDipole(FitArgs),
    /// Probability density movie of one propagation.
    Density(DensityArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// Configuration file (`section.key = value` lines).
    #[arg(long, short)]
    config: PathBuf,
    /// Override a config value, `key=value`; may repeat.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides output.dir).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    base: ConfigArgs,
    /// Worker threads (overrides sweep.workers).
    #[arg(long)]
    workers: Option<usize>,
    /// Amplitude rows (overrides sweep.rows).
    #[arg(long)]
    rows: Option<usize>,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    base: ConfigArgs,
    /// Steps between frames when the config does not set one.
    #[arg(long, default_value_t = 50)]
    stride: usize,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Time series CSV written by `propagate` or `tls`.
    #[arg(long, short)]
    input: PathBuf,
    /// Carrier frequency; read from the input header when omitted.
    #[arg(long)]
    wd: Option<f64>,
    #[arg(long, default_value = "rectangular")]
    window: String,
    #[arg(long, default_value = "dipole")]
    source: String,
    #[arg(long, default_value_t = mollow_hhg::spectra::DEFAULT_FLOOR, allow_hyphen_values = true)]
    floor: f64,
    #[arg(long)]
    pad: bool,
    #[arg(long, default_value_t = 12.0)]
    order_max: f64,
    #[arg(long, default_value_t = mollow_hhg::spectra::DEFAULT_PROMINENCE_DB)]
    prominence_db: f64,
    /// Output directory; defaults to the input's directory.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TlsArgs {
    /// Transition frequency (a.u.).
    #[arg(long)]
    wa: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Carrier frequency (a.u.); resonant when omitted.
    #[arg(long)]
    wd: Option<f64>,
    /// Peak Rabi frequency in units of the transition frequency.
    #[arg(long, default_value_t = 0.3)]
    rabi: f64,
    /// Gaussian envelope with this FWHM in cycles instead of a trapezoid.
    #[arg(long)]
    fwhm: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    n_on: f64,
    #[arg(long, default_value_t = 50.0)]
    n_p: f64,
    #[arg(long, default_value_t = 1.0)]
    n_off: f64,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    #[arg(long, default_value = "hann")]
    window: String,
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    wa: f64,
    #[arg(long)]
    wd: f64,
    #[arg(long)]
    mu: f64,
    /// Largest peak field (a.u.).
    #[arg(long)]
    amp_max: f64,
    #[arg(long, default_value_t = 0.0)]
    amp_min: f64,
    #[arg(long, default_value_t = 101)]
    rows: usize,
    /// Highest sideband index.
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Frequency of the odd-centred transition; defaults to twice `wa`.
    #[arg(long)]
    wa3: Option<f64>,
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Tracks CSV written by `sweep` (columns branch, n, e_peak_au, omega_au).
    #[arg(long, short)]
    input: PathBuf,
    /// Carrier frequency; read from the input header when omitted.
    #[arg(long)]
    wd: Option<f64>,
    /// Sideband index around `(2n + 1) wd`.
    #[arg(long, default_value_t = 0)]
    n: usize,
    /// Use rows with Rabi frequency up to this many `omega_a` (needs the header).
    #[arg(long)]
    rabi_max: Option<f64>,
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::SolveBreakdown { .. }
        | Error::Tuning(_)
        | Error::TooFewBoundStates { .. }
        | Error::InvalidSeries(_) => EXIT_RUNTIME,
        _ => EXIT_INVALID,
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    match command {
        Command::Eigen(a) => cmd_eigen(a, out),
        Command::Propagate(a) => cmd_propagate(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Tls(a) => cmd_tls(a, out),
        Command::Predict(a) => cmd_predict(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::FitDipole(a) => cmd_fit(a, out),
        Command::Density(a) => cmd_density(a, out),
    }
}

fn load_config(args: &ConfigArgs) -> mollow_hhg::Result<(RunConfig, PathBuf)> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    let pairs = args
        .set
        .iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{s}'")))
        })
        .collect::<mollow_hhg::Result<Vec<_>>>()?;
    if !pairs.is_empty() {
        config.apply_overrides(&pairs)?;
    }
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from(config.output_dir()));
    Ok((config, dir))
}

fn report_written(out: &mut dyn Write, path: &Path) -> mollow_hhg::Result<()> {
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

fn cmd_eigen(args: ConfigArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let (config, dir) = load_config(&args)?;
    let system = config.resolve_system()?;
    let SystemKind::Tdse { grid, potential, eigen, .. } = &system.kind else {
        return Err(Error::Config("eigen needs system.kind = tdse".into()));
    };
    let prefix = config.output_prefix();
    let header = |what: &str| Header::new(what).with_config(&config).with_meta(&system.summary());
    let p = io::write_with_script(&dir, &format!("{prefix}_potential.csv"), PlotKind::Potential, "potential", |f| {
        io::write_potential(f, &header("potential"), grid, potential)
    })?;
    report_written(out, &p)?;
    let p = dir.join(format!("{prefix}_eigen.csv"));
    fs::create_dir_all(&dir)?;
    io::write_eigen(fs::File::create(&p)?, &header("eigen"), eigen)?;
    report_written(out, &p)?;
    let p = dir.join(format!("{prefix}_dipoles.csv"));
    io::write_dipoles(fs::File::create(&p)?, &header("dipoles"), eigen)?;
    report_written(out, &p)?;
    for (i, e) in eigen.energies().iter().enumerate() {
        writeln!(out, "level {i}: {e:.10} a.u.")?;
    }
    writeln!(out, "omega_a = {:.10} a.u., |mu| = {:.6} a.u.", system.omega_a, system.mu)?;
    Ok(())
}

fn cmd_propagate(args: ConfigArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let (config, dir) = load_config(&args)?;
    propagate_and_write(&config, &dir, out, false)
}

fn cmd_density(args: DensityArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let (mut config, dir) = load_config(&args.base)?;
    if config.int("propagation.density_stride") == Some(0) {
        config.set("propagation.density_stride", &args.stride.to_string())?;
    }
    propagate_and_write(&config, &dir, out, true)
}

fn propagate_and_write(config: &RunConfig, dir: &Path, out: &mut dyn Write, movie_only: bool) -> mollow_hhg::Result<()> {
    let system = config.resolve_system()?;
    let prefix = config.output_prefix();
    let pulse = config.pulse(&system)?;
    let mut meta = system.summary();
    meta.insert("derived.omega_d_au".into(), format!("{}", pulse.omega_d));
    meta.insert("derived.e_peak_au".into(), format!("{}", pulse.e_peak));
    let (series, density, final_norm) = match &system.kind {
        SystemKind::Tls(tls) => {
            let run = tls_propagate(tls, &pulse, config.float("propagation.dt").unwrap_or(0.05))?;
            let n = *run.series.norm.last().unwrap_or(&1.0);
            (run.series, None, n)
        }
        SystemKind::Tdse { eigen, potential, .. } => {
            let psi0 = Wavefunction::from_eigenstate(eigen, 0)?;
            let run = propagate(&psi0, potential, &pulse, &config.propagation()?)?;
            let n = run.final_norm();
            (run.series, run.density, n)
        }
    };
    meta.insert("derived.final_norm".into(), format!("{final_norm}"));
    let header = |what: &str| Header::new(what).with_config(config).with_meta(&meta);
    if !movie_only {
        let p = io::write_with_script(dir, &format!("{prefix}_series.csv"), PlotKind::Series, "time series", |f| {
            io::write_series(f, &header("series"), &series)
        })?;
        report_written(out, &p)?;
    }
    if let Some(movie) = density {
        let p = io::write_with_script(dir, &format!("{prefix}_density.bin"), PlotKind::Density, "density", |f| {
            io::write_density(f, &header("density"), &movie)
        })?;
        report_written(out, &p)?;
    } else if movie_only {
        return Err(Error::Config("density frames need system.kind = tdse".into()));
    }
    writeln!(out, "final norm {final_norm:.8}")?;
    Ok(())
}

/// Value of `key = value` in header lines.
fn header_value(lines: &[String], key: &str) -> Option<f64> {
    lines.iter().find_map(|l| {
        let (k, v) = l.split_once('=')?;
        if k.trim() == key {
            v.trim().trim_end_matches("(default)").trim().parse().ok()
        } else {
            None
        }
    })
}

fn cmd_spectrum(args: SpectrumArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let (series, lines) = io::read_series(fs::File::open(&args.input)?)?;
    let wd = args
        .wd
        .or_else(|| header_value(&lines, "derived.omega_d_au"))
        .ok_or_else(|| Error::InvalidArgument("no --wd given and none in the input header".into()))?;
    let options = SpectrumOptions {
        window: args.window.parse()?,
        source: args.source.parse()?,
        floor: args.floor,
        pad_pow2: args.pad,
    };
    let spec = compute_spectrum_with(&series, wd, &options)?;
    let peaks = find_peaks(&spec, args.prominence_db, (0.0, args.order_max))?;
    let dir = args
        .out
        .clone()
        .or_else(|| args.input.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = args
        .input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("input")
        .trim_end_matches("_series")
        .to_string();
    let header = |what: &str| {
        Header::new(what)
            .line(format!("input = {}", args.input.display()))
            .line(format!("spectrum.window = {}", options.window.name()))
            .line(format!("spectrum.source = {}", options.source.name()))
            .line(format!("spectrum.floor = {}", options.floor))
            .line(format!("spectrum.pad_pow2 = {}", options.pad_pow2))
            .line(format!("derived.omega_d_au = {wd}"))
            .extend(&lines)
    };
    let p = io::write_with_script(&dir, &format!("{stem}_spectrum.csv"), PlotKind::Spectrum, "spectrum", |f| {
        io::write_spectrum(f, &header("spectrum"), &spec)
    })?;
    report_written(out, &p)?;
    let p = dir.join(format!("{stem}_peaks.csv"));
    io::write_peaks(fs::File::create(&p)?, &header("peaks"), &peaks)?;
    report_written(out, &p)?;
    for pk in &peaks.peaks {
        writeln!(out, "peak at order {:.4} ({:.1} dB prominence)", pk.order, pk.prominence_db)?;
    }
    Ok(())
}

fn cmd_tls(args: TlsArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let wd = args.wd.unwrap_or(args.wa);
    let mut config = RunConfig::default();
    let mut pairs: Vec<(String, String)> = vec![
        ("system.kind".into(), "tls".into()),
        ("system.omega_a_au".into(), args.wa.to_string()),
        ("system.mu_au".into(), args.mu.to_string()),
        ("pulse.omega_d_au".into(), wd.to_string()),
        ("pulse.rabi_over_omega_a".into(), args.rabi.to_string()),
        ("propagation.dt".into(), args.dt.to_string()),
        ("spectrum.window".into(), args.window.clone()),
        ("output.prefix".into(), "tls".into()),
    ];
    match args.fwhm {
        Some(n) => {
            pairs.push(("pulse.envelope".into(), "gaussian".into()));
            pairs.push(("pulse.n_fwhm".into(), n.to_string()));
        }
        None => {
            pairs.push(("pulse.envelope".into(), "trapezoid".into()));
            pairs.push(("pulse.n_on".into(), args.n_on.to_string()));
            pairs.push(("pulse.n_p".into(), args.n_p.to_string()));
            pairs.push(("pulse.n_off".into(), args.n_off.to_string()));
        }
    }
    config.apply_overrides(&pairs)?;
    let system = config.resolve_system()?;
    let pulse = config.pulse(&system)?;
    let tls = TlsParams::new(args.wa, args.mu)?;
    let run = tls_propagate(&tls, &pulse, args.dt)?;
    let spec = compute_spectrum_with(&run.series, wd, &config.spectrum_options()?)?;
    let (lo, hi) = config.order_range();
    let peaks = find_peaks(&spec, config.float("spectrum.min_prominence_db").unwrap_or(10.0), (lo, hi))?;
    let mut meta = system.summary();
    meta.insert("derived.omega_d_au".into(), format!("{wd}"));
    meta.insert("derived.e_peak_au".into(), format!("{}", pulse.e_peak));
    let header = |what: &str| Header::new(what).with_config(&config).with_meta(&meta);
    let dir = &args.out;
    let p = io::write_with_script(dir, "tls_series.csv", PlotKind::Series, "two-level run", |f| {
        io::write_series(f, &header("series"), &run.series)
    })?;
    report_written(out, &p)?;
    let p = io::write_with_script(dir, "tls_spectrum.csv", PlotKind::Spectrum, "two-level spectrum", |f| {
        io::write_spectrum(f, &header("spectrum"), &spec)
    })?;
    report_written(out, &p)?;
    let p = dir.join("tls_peaks.csv");
    io::write_peaks(fs::File::create(&p)?, &header("peaks"), &peaks)?;
    report_written(out, &p)?;
    for pk in &peaks.peaks {
        writeln!(out, "peak at order {:.4} ({:.1} dB prominence)", pk.order, pk.prominence_db)?;
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    if args.rows < 2 || !(args.amp_max > args.amp_min) || args.amp_min < 0.0 {
        return Err(Error::InvalidArgument("need rows >= 2 and 0 <= amp-min < amp-max".into()));
    }
    let tls = TlsParams::new(args.wa, args.mu)?;
    let tls3 = TlsParams::new(args.wa3.unwrap_or(2.0 * args.wa), args.mu)?;
    let mut rows = Vec::new();
    for k in 0..args.rows {
        let e = args.amp_min + (args.amp_max - args.amp_min) * k as f64 / (args.rows - 1) as f64;
        let rabi = args.mu * e;
        for n in 0..=args.n_max {
            let mut push = |p| rows.push(PredictionRow { e_peak: e, rabi, prediction: p });
            push(predict_linear_sidebands(&tls, args.wd, rabi, n)?);
            if n >= 1 {
                push(predict_eq2(&tls, args.wd, rabi, n)?);
            }
            push(predict_eq3(&tls3, args.wd, rabi, n)?);
        }
    }
    let header = Header::new("predictions")
        .line(format!("omega_a_au = {}", args.wa))
        .line(format!("omega_d_au = {}", args.wd))
        .line(format!("mu_au = {}", args.mu))
        .line(format!("omega_a3_au = {}", tls3.omega_a))
        .line(format!("amp_min_au = {}", args.amp_min))
        .line(format!("amp_max_au = {}", args.amp_max))
        .line(format!("rows = {}", args.rows))
        .line(format!("n_max = {}", args.n_max));
    let p = io::write_with_script(&args.out, "predictions.csv", PlotKind::Predictions, "sideband predictions", |f| {
        io::write_predictions(f, &header, args.wd, &rows)
    })?;
    report_written(out, &p)?;
    Ok(())
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let (mut config, dir) = load_config(&args.base)?;
    let mut pairs = Vec::new();
    if let Some(w) = args.workers {
        pairs.push(("sweep.workers", w.to_string()));
    }
    if let Some(r) = args.rows {
        pairs.push(("sweep.rows", r.to_string()));
    }
    if !pairs.is_empty() {
        config.apply_overrides(&pairs)?;
    }
    let system = config.resolve_system()?;
    let sweep = config.sweep_config(&system)?;
    let started = std::time::Instant::now();
    let map = run_sweep(&sweep)?;
    log::info!("sweep of {} rows took {:.1} s", map.rows(), started.elapsed().as_secs_f64());
    let curves = prediction_curves(&map, &config.prediction_set(&system))?;
    let tracks = extract_tracks(&map, &curves, &config.track_options())?;
    let report = compare_tracks(&tracks, &curves, Some(config.compare_range(system.omega_a)))?;

    let mut meta = system.summary();
    meta.extend(map.metadata.iter().map(|(k, v)| (format!("map.{k}"), v.clone())));
    let header = |what: &str| Header::new(what).with_config(&config).with_meta(&meta);
    let prefix = config.output_prefix();
    let p = dir.join(format!("{prefix}_map.bin"));
    fs::create_dir_all(&dir)?;
    io::write_map(fs::File::create(&p)?, &header("map"), &map)?;
    report_written(out, &p)?;
    let p = io::write_with_script(&dir, &format!("{prefix}_map.csv"), PlotKind::Map, "spectrum map", |f| {
        io::write_map_companion(f, &header("map"), &map)
    })?;
    report_written(out, &p)?;
    let p = dir.join(format!("{prefix}_tracks.csv"));
    io::write_tracks(fs::File::create(&p)?, &header("tracks"), map.omega_d, &tracks)?;
    report_written(out, &p)?;
    let p = dir.join(format!("{prefix}_report.csv"));
    io::write_report(fs::File::create(&p)?, &header("report"), &report)?;
    report_written(out, &p)?;
    let failed = map.status.iter().filter(|s| !s.is_ok()).count();
    if failed > 0 {
        writeln!(out, "{failed} of {} rows failed", map.rows())?;
    }
    for f in &report.families {
        writeln!(
            out,
            "{:<13} rms {:.4} orders, coverage {:.2} ({}/{})",
            f.label, f.rms_order, f.coverage, f.detected, f.expected
        )?;
    }
    Ok(())
}

fn cmd_fit(args: FitArgs, out: &mut dyn Write) -> mollow_hhg::Result<()> {
    let table = io::read_table(fs::File::open(&args.input)?)?;
    let wd = args
        .wd
        .or_else(|| header_value(&table.header, "map.omega_d_au"))
        .or_else(|| header_value(&table.header, "derived.omega_d_au"))
        .ok_or_else(|| Error::InvalidArgument("no --wd given and none in the input header".into()))?;
    let branch = table.strings("branch")?;
    let n = table.floats("n")?;
    let e = table.floats("e_peak_au")?;
    let w = table.floats("omega_au")?;
    let rabi = table.floats("rabi_au").ok();
    let limit = match args.rabi_max {
        Some(r) => {
            let wa = header_value(&table.header, "derived.omega_a_au")
                .ok_or_else(|| Error::InvalidArgument("--rabi-max needs derived.omega_a_au in the header".into()))?;
            Some(r * wa)
        }
        None => None,
    };
    let points: Vec<(f64, f64)> = (0..branch.len())
        .filter(|&i| branch[i].starts_with("linear") && n[i] as usize == args.n)
        .filter(|&i| match (limit, &rabi) {
            (Some(l), Some(r)) => r[i] <= l,
            _ => true,
        })
        .map(|i| (e[i], w[i]))
        .collect();
    let center = (2 * args.n + 1) as f64 * wd;
    let mu = fit_dipole(&points, center)?;
    writeln!(out, "fitted mu = {mu:.6} a.u. from {} points", points.len())?;
    if let Some(m) = header_value(&table.header, "derived.mu_au") {
        writeln!(out, "eigensolver mu = {m:.6} a.u. (ratio {:.4})", mu / m)?;
    }
    Ok(())
}
