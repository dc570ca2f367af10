//! File formats: CSV tables with `#` comment headers, binary arrays behind
//! a one-line JSON header, and gnuplot scripts for each output.
//!
//! Every file starts with the effective configuration so that no output is
//! separated from the settings that produced it.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde_json::{json, Map, Value as Json};

use crate::analytic::SidebandPrediction;
use crate::config::RunConfig;
use crate::eigen::EigenSet;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;
use crate::propagator::{DensityMovie, TimeSeries};
use crate::spectra::{PeakSet, Spectrum};
use crate::sweep::{ComparisonReport, PeakTrack, RowStatus, SpectrumMap};
use crate::units::HARTREE_EV;

/// Comment lines written at the top of a CSV file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    /// A header naming the file's content.
    pub fn new(content: &str) -> Self {
        Self {
            lines: vec![format!("mollow-hhg {} {content}", env!("CARGO_PKG_VERSION"))],
        }
    }

    /// Append every effective config value.
    pub fn with_config(mut self, config: &RunConfig) -> Self {
        self.lines.extend(config.effective_lines());
        self
    }

    pub fn with_meta(mut self, meta: &BTreeMap<String, String>) -> Self {
        self.lines.extend(meta.iter().map(|(k, v)| format!("{k} = {v}")));
        self
    }

    pub fn line(mut self, text: impl Into<String>) -> Self {
        self.lines.push(text.into());
        self
    }

    /// Carry over lines read from another file's header.
    pub fn extend(mut self, lines: &[String]) -> Self {
        self.lines.extend(lines.iter().cloned());
        self
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        for l in &self.lines {
            writeln!(w, "# {l}")?;
        }
        Ok(())
    }

    fn as_json(&self) -> Json {
        Json::Array(self.lines.iter().map(|l| Json::String(l.clone())).collect())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn table<W: Write>(mut w: W, header: &Header, columns: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    header.write_to(&mut w)?;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(columns).map_err(csv_err)?;
    for r in rows {
        out.write_record(&r).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_potential<W: Write>(w: W, header: &Header, grid: &Grid, potential: &Potential) -> Result<()> {
    table(
        w,
        header,
        &["x", "V"],
        grid.points()
            .zip(potential.values())
            .map(|(x, v)| vec![num(x), num(*v)]),
    )
}

pub fn write_eigen<W: Write>(w: W, header: &Header, set: &EigenSet) -> Result<()> {
    table(
        w,
        header,
        &["level", "energy_au", "energy_eV"],
        set.energies()
            .iter()
            .enumerate()
            .map(|(i, e)| vec![i.to_string(), num(*e), num(e * HARTREE_EV)]),
    )
}

/// Dipole elements and transition frequencies for every level pair `j < k`.
pub fn write_dipoles<W: Write>(w: W, header: &Header, set: &EigenSet) -> Result<()> {
    let n = set.len();
    let rows = (0..n).flat_map(move |j| {
        (j + 1..n).map(move |k| {
            vec![
                j.to_string(),
                k.to_string(),
                num(set.dipole(j, k)),
                num(set.frequency(j, k)),
            ]
        })
    });
    table(w, header, &["j", "k", "dipole_au", "omega_au"], rows)
}

pub fn write_series<W: Write>(w: W, header: &Header, series: &TimeSeries) -> Result<()> {
    table(
        w,
        header,
        &["t_au", "field_au", "norm", "dipole_au", "accel_au"],
        (0..series.len()).map(|i| {
            vec![
                num(series.times[i]),
                num(series.field[i]),
                num(series.norm[i]),
                num(series.dipole[i]),
                num(series.accel[i]),
            ]
        }),
    )
}

pub fn write_spectrum<W: Write>(w: W, header: &Header, spectrum: &Spectrum) -> Result<()> {
    table(
        w,
        header,
        &["omega_au", "order", "log10_D"],
        (0..spectrum.len()).map(|i| vec![num(spectrum.omega[i]), num(spectrum.order[i]), num(spectrum.log_d[i])]),
    )
}

pub fn write_peaks<W: Write>(w: W, header: &Header, peaks: &PeakSet) -> Result<()> {
    table(
        w,
        header,
        &["omega_au", "order", "log10_height", "prominence_db"],
        peaks
            .peaks
            .iter()
            .map(|p| vec![num(p.omega), num(p.order), num(p.log_height), num(p.prominence_db)]),
    )
}

/// One predicted sideband pair at one amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRow {
    pub e_peak: f64,
    pub rabi: f64,
    pub prediction: SidebandPrediction,
}

pub fn write_predictions<W: Write>(w: W, header: &Header, omega_d: f64, rows: &[PredictionRow]) -> Result<()> {
    table(
        w,
        header,
        &["e_peak_au", "rabi_au", "n", "lower_order", "upper_order", "formula"],
        rows.iter().map(|r| {
            vec![
                num(r.e_peak),
                num(r.rabi),
                r.prediction.n.to_string(),
                num(r.prediction.lower / omega_d),
                num(r.prediction.upper / omega_d),
                r.prediction.formula.name().to_string(),
            ]
        }),
    )
}

pub fn write_tracks<W: Write>(w: W, header: &Header, omega_d: f64, tracks: &[PeakTrack]) -> Result<()> {
    let rows = tracks.iter().flat_map(|t| {
        t.points.iter().map(move |p| {
            vec![
                t.branch.name().to_string(),
                t.n.to_string(),
                p.row.to_string(),
                num(p.e_peak),
                num(p.rabi),
                num(p.order),
                num(p.order * omega_d),
                num(p.predicted),
                num(p.log_height),
            ]
        })
    });
    table(
        w,
        header,
        &["branch", "n", "row", "e_peak_au", "rabi_au", "order", "omega_au", "predicted_order", "log10_height"],
        rows,
    )
}

pub fn write_report<W: Write>(w: W, header: &Header, report: &ComparisonReport) -> Result<()> {
    let row = |scope: &str, s: &crate::sweep::BranchStats| {
        vec![
            scope.to_string(),
            s.label.clone(),
            s.n.map_or(String::new(), |n| n.to_string()),
            num(s.rms_order),
            num(s.coverage),
            s.detected.to_string(),
            s.expected.to_string(),
        ]
    };
    let rows = report
        .branches
        .iter()
        .map(|s| row("branch", s))
        .chain(report.families.iter().map(|s| row("family", s)));
    table(
        w,
        header,
        &["scope", "label", "n", "rms_order", "coverage", "detected", "expected"],
        rows,
    )
}

/// `(rabi_over_wa, order, log10_D)` triples of a map, for plotting tools.
pub fn write_map_companion<W: Write>(w: W, header: &Header, map: &SpectrumMap) -> Result<()> {
    let rows = (0..map.rows()).flat_map(|i| {
        let r = map.rabi_over_omega_a(i);
        map.order
            .iter()
            .zip(map.row(i))
            .map(move |(o, v)| vec![num(r), num(*o), num(*v)])
    });
    table(w, header, &["rabi_over_wa", "order", "log10_D"], rows)
}

/// A CSV file read back: header comments, column names, string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Io(format!("missing column '{name}'")))
    }

    /// A numeric column.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                row[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Io(format!("row {}: '{}' in column {name} is not a number", r + 1, row[i])))
            })
            .collect()
    }

    pub fn strings(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut header = Vec::new();
    let mut body = String::new();
    let mut in_header = true;
    for line in BufReader::new(reader).lines() {
        let line = line?;
        if in_header {
            if let Some(rest) = line.strip_prefix('#') {
                header.push(rest.trim_start().to_string());
                continue;
            }
            in_header = false;
        }
        body.push_str(&line);
        body.push('\n');
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(body.as_bytes());
    let columns = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(|s| s.to_string()).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(csv_err)?;
    Ok(Table { header, columns, rows })
}

/// Read a time series written by [`write_series`], with its header.
pub fn read_series<R: Read>(reader: R) -> Result<(TimeSeries, Vec<String>)> {
    let t = read_table(reader)?;
    let series = TimeSeries {
        times: t.floats("t_au")?,
        field: t.floats("field_au")?,
        norm: t.floats("norm")?,
        dipole: t.floats("dipole_au")?,
        accel: t.floats("accel_au")?,
    };
    Ok((series, t.header))
}

fn write_binary<W: Write>(mut w: W, meta: &Json, data: &[f64]) -> Result<()> {
    let line = serde_json::to_string(meta).map_err(|e| Error::Io(e.to_string()))?;
    w.write_all(line.as_bytes())?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(data.len() * 8);
    for x in data {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn read_binary<R: Read>(reader: R) -> Result<(Json, Vec<f64>)> {
    let mut r = BufReader::new(reader);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let meta: Json = serde_json::from_str(line.trim_end()).map_err(|e| Error::Io(format!("bad metadata line: {e}")))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Io(format!("payload of {} bytes is not a whole number of f64", bytes.len())));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((meta, data))
}

fn meta_f64(meta: &Json, key: &str) -> Result<f64> {
    meta.get(key)
        .and_then(Json::as_f64)
        .ok_or_else(|| Error::Io(format!("metadata lacks '{key}'")))
}

fn meta_usize(meta: &Json, key: &str) -> Result<usize> {
    meta.get(key)
        .and_then(Json::as_u64)
        .map(|n| n as usize)
        .ok_or_else(|| Error::Io(format!("metadata lacks '{key}'")))
}

fn meta_vec(meta: &Json, key: &str) -> Result<Vec<f64>> {
    meta.get(key)
        .and_then(Json::as_array)
        .and_then(|a| a.iter().map(Json::as_f64).collect::<Option<Vec<_>>>())
        .ok_or_else(|| Error::Io(format!("metadata lacks '{key}'")))
}

/// Density movie: metadata line, then `n_t × n_x` little-endian f64.
pub fn write_density<W: Write>(w: W, header: &Header, movie: &DensityMovie) -> Result<()> {
    let meta = json!({
        "format": "mollow-hhg-density",
        "n_t": movie.n_t(),
        "n_x": movie.n_x,
        "x_min": movie.x_min,
        "dx": movie.dx,
        "t0": movie.times.first().copied().unwrap_or(0.0),
        "dt_record": movie.dt_record(),
        "header": header.as_json(),
    });
    write_binary(w, &meta, &movie.data)
}

pub fn read_density<R: Read>(reader: R) -> Result<DensityMovie> {
    let (meta, data) = read_binary(reader)?;
    let n_t = meta_usize(&meta, "n_t")?;
    let n_x = meta_usize(&meta, "n_x")?;
    if data.len() != n_t * n_x {
        return Err(Error::Io(format!("expected {} values, found {}", n_t * n_x, data.len())));
    }
    let t0 = meta_f64(&meta, "t0")?;
    let dt = meta_f64(&meta, "dt_record")?;
    Ok(DensityMovie {
        times: (0..n_t).map(|k| t0 + k as f64 * dt).collect(),
        x_min: meta_f64(&meta, "x_min")?,
        dx: meta_f64(&meta, "dx")?,
        n_x,
        data,
    })
}

/// Spectrum map: metadata line with both axes, then `rows × cols` f64.
pub fn write_map<W: Write>(w: W, header: &Header, map: &SpectrumMap) -> Result<()> {
    let status: Vec<Json> = map
        .status
        .iter()
        .map(|s| match s {
            RowStatus::Done { final_norm, depleted_at } => json!({"ok": true, "final_norm": final_norm, "depleted_at": depleted_at}),
            RowStatus::Failed(msg) => json!({"ok": false, "error": msg}),
        })
        .collect();
    let metadata: Map<String, Json> = map
        .metadata
        .iter()
        .map(|(k, v)| (k.clone(), Json::String(v.clone())))
        .collect();
    let meta = json!({
        "format": "mollow-hhg-map",
        "rows": map.rows(),
        "cols": map.cols(),
        "omega_a": map.omega_a,
        "mu": map.mu,
        "omega_d": map.omega_d,
        "d_order": map.d_order,
        "amplitudes": map.amplitudes,
        "rabi": map.rabi,
        "order": map.order,
        "window": map.options.window.name(),
        "source": map.options.source.name(),
        "floor": map.options.floor,
        "pad_pow2": map.options.pad_pow2,
        "status": status,
        "metadata": metadata,
        "header": header.as_json(),
    });
    write_binary(w, &meta, &map.log_d)
}

pub fn read_map<R: Read>(reader: R) -> Result<SpectrumMap> {
    let (meta, log_d) = read_binary(reader)?;
    let rows = meta_usize(&meta, "rows")?;
    let cols = meta_usize(&meta, "cols")?;
    if log_d.len() != rows * cols {
        return Err(Error::Io(format!("expected {} values, found {}", rows * cols, log_d.len())));
    }
    let text = |k: &str| meta.get(k).and_then(Json::as_str).unwrap_or("").to_string();
    let status = meta
        .get("status")
        .and_then(Json::as_array)
        .map(|a| {
            a.iter()
                .map(|s| {
                    if s.get("ok").and_then(Json::as_bool) == Some(true) {
                        RowStatus::Done {
                            final_norm: s.get("final_norm").and_then(Json::as_f64).unwrap_or(f64::NAN),
                            depleted_at: s.get("depleted_at").and_then(Json::as_f64),
                        }
                    } else {
                        RowStatus::Failed(s.get("error").and_then(Json::as_str).unwrap_or("").to_string())
                    }
                })
                .collect()
        })
        .unwrap_or_default();
    let metadata = meta
        .get("metadata")
        .and_then(Json::as_object)
        .map(|m| {
            m.iter()
                .map(|(k, v)| (k.clone(), v.as_str().unwrap_or("").to_string()))
                .collect()
        })
        .unwrap_or_default();
    Ok(SpectrumMap {
        amplitudes: meta_vec(&meta, "amplitudes")?,
        rabi: meta_vec(&meta, "rabi")?,
        omega_a: meta_f64(&meta, "omega_a")?,
        mu: meta_f64(&meta, "mu")?,
        omega_d: meta_f64(&meta, "omega_d")?,
        order: meta_vec(&meta, "order")?,
        d_order: meta_f64(&meta, "d_order")?,
        log_d,
        status,
        options: crate::spectra::SpectrumOptions {
            window: text("window").parse()?,
            source: text("source").parse()?,
            floor: meta_f64(&meta, "floor")?,
            pad_pow2: meta.get("pad_pow2").and_then(Json::as_bool).unwrap_or(false),
        },
        metadata,
    })
}

/// Plot kinds with a companion gnuplot script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Potential,
    Series,
    Spectrum,
    Predictions,
    Map,
    Density,
}

/// A gnuplot script rendering `data` (a path relative to the script) to a PNG.
pub fn plot_script(kind: PlotKind, data: &str, title: &str) -> String {
    let png = format!("{}.png", data.trim_end_matches(".csv").trim_end_matches(".bin"));
    let mut s = format!(
        "# gnuplot script; run with: gnuplot <this file>\nset terminal pngcairo size 1000,700\nset output '{png}'\nset title '{title}'\n"
    );
    let csv = "set datafile separator ','\n";
    match kind {
        PlotKind::Potential => {
            s += csv;
            s += &format!("set xlabel 'x (a.u.)'\nset ylabel 'V (a.u.)'\nplot '{data}' using 1:2 skip 1 with lines notitle\n");
        }
        PlotKind::Series => {
            s += csv;
            s += &format!(
                "set multiplot layout 3,1\nset xlabel 't (a.u.)'\nplot '{data}' using 1:2 skip 1 with lines title 'E(t)'\n\
                 plot '{data}' using 1:4 skip 1 with lines title '<x>'\nplot '{data}' using 1:3 skip 1 with lines title 'norm'\nunset multiplot\n"
            );
        }
        PlotKind::Spectrum => {
            s += csv;
            s += &format!(
                "set xlabel 'harmonic order'\nset ylabel 'log10 D'\nset grid xtics\nset xtics 1\n\
                 plot '{data}' using 2:3 skip 1 with lines notitle\n"
            );
        }
        PlotKind::Predictions => {
            s += csv;
            s += &format!(
                "set xlabel 'harmonic order'\nset ylabel 'Rabi frequency (a.u.)'\n\
                 plot '{data}' using 4:2 skip 1 with points pt 7 ps 0.4 title 'lower', \\\n     '{data}' using 5:2 skip 1 with points pt 7 ps 0.4 title 'upper'\n"
            );
        }
        PlotKind::Map => {
            s += csv;
            s += &format!(
                "set xlabel 'harmonic order'\nset ylabel 'Omega_R / omega_a'\nset cblabel 'log10 D'\nset cbrange [-12:0]\n\
                 plot '{data}' using 2:1:3 skip 1 with image notitle\n"
            );
        }
        PlotKind::Density => {
            s += &format!(
                "# the binary file starts with one JSON line; strip it first:\n#   tail -n +2 {data} > density.raw\n\
                 set xlabel 'time frame'\nset ylabel 'grid index'\nset cblabel '|psi|^2'\n\
                 plot 'density.raw' binary format='%float64' array=(N_X,N_T) endian=little with image notitle\n\
                 # replace N_X and N_T with n_x and n_t from the metadata line\n"
            );
        }
    }
    s
}

/// Write `data` and its plot script next to each other.
pub fn write_with_script(
    dir: &Path,
    file: &str,
    kind: PlotKind,
    title: &str,
    write: impl FnOnce(&mut fs::File) -> Result<()>,
) -> Result<std::path::PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file);
    let mut f = fs::File::create(&path)?;
    write(&mut f)?;
    let stem = file.rsplit_once('.').map_or(file, |(s, _)| s);
    fs::write(dir.join(format!("{stem}.gp")), plot_script(kind, file, title))?;
    Ok(path)
}
