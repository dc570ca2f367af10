//! Flat `section.key = value` run configuration.
//!
//! Every key belongs to a closed schema with a type and, where sensible, a
//! default. Parsed values remember whether they were written explicitly or
//! filled from the default, so output headers can show both.

use std::collections::BTreeMap;
use std::fmt;

use crate::analytic::TlsParams;
use crate::drive::{intensity_to_field, Envelope, Pulse};
use crate::eigen::{solve_bound_states, transition, EigenSet};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::{build_potential_with_prefactor, Potential, WellSpec, ATTRACTIVE};
use crate::propagator::PropagationConfig;
use crate::spectra::{Source, SpectrumOptions, Window};
use crate::sweep::{amplitudes_for_rabi, PredictionSet, SweepConfig, SweepSystem, TrackOptions};
use crate::tune::{tune_separation, tune_softening};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Text(&'static [&'static str]),
    IntList,
    Path,
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Float => "a number".into(),
            Kind::Int => "a non-negative integer".into(),
            Kind::Bool => "true or false".into(),
            Kind::Text(choices) => format!("one of {}", choices.join(", ")),
            Kind::IntList => "a comma-separated list of integers".into(),
            Kind::Path => "a path".into(),
        }
    }
}

/// A schema entry.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(key: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> KeySpec {
    KeySpec { key, kind, default, help }
}

const SYSTEM_KINDS: &[&str] = &["tdse", "tls"];
const ENVELOPES: &[&str] = &["trapezoid", "gaussian"];
const WINDOWS: &[&str] = &["rectangular", "hann"];
const SOURCES: &[&str] = &["dipole", "acceleration"];

/// The complete set of accepted keys.
pub const SCHEMA: &[KeySpec] = &[
    key("system.kind", Kind::Text(SYSTEM_KINDS), Some("tdse"), "grid model or two-level reference"),
    key("system.wells", Kind::Int, Some("1"), "number of identical wells in the chain"),
    key("system.a", Kind::Float, Some("1"), "well curvature parameter"),
    key("system.b", Kind::Float, Some("2"), "well softening parameter"),
    key("system.separation", Kind::Float, None, "centre-to-centre well spacing (a.u.)"),
    key("system.target_omega_a", Kind::Float, None, "tune the spacing so E1 - E0 hits this value"),
    key("system.target_gap", Kind::Float, None, "tune b of a single well so E1 - E0 hits this value"),
    key("system.x_max", Kind::Float, Some("200"), "grid half width (a.u.)"),
    key("system.n_points", Kind::Int, Some("8192"), "grid points"),
    key("system.n_levels", Kind::Int, Some("4"), "bound states to solve for"),
    key("system.upper_level", Kind::Int, Some("1"), "upper level of the reference transition from 0"),
    key("system.eq3_level", Kind::Int, None, "upper level of the odd-centred transition"),
    key("system.omega_a_au", Kind::Float, None, "two-level transition frequency"),
    key("system.mu_au", Kind::Float, None, "two-level dipole moment"),
    key("pulse.omega_d_au", Kind::Float, None, "carrier frequency (a.u.)"),
    key("pulse.omega_d_ratio", Kind::Float, None, "carrier frequency in units of omega_a"),
    key("pulse.e_peak_au", Kind::Float, None, "peak field (a.u.)"),
    key("pulse.intensity_wcm2", Kind::Float, None, "peak intensity (W/cm^2)"),
    key("pulse.rabi_over_omega_a", Kind::Float, None, "peak field via mu E / omega_a"),
    key("pulse.envelope", Kind::Text(ENVELOPES), Some("trapezoid"), "envelope shape"),
    key("pulse.n_on", Kind::Float, Some("1"), "trapezoid ramp-up cycles"),
    key("pulse.n_p", Kind::Float, Some("50"), "trapezoid plateau cycles"),
    key("pulse.n_off", Kind::Float, Some("1"), "trapezoid ramp-down cycles"),
    key("pulse.n_fwhm", Kind::Float, Some("20"), "Gaussian FWHM in cycles"),
    key("propagation.dt", Kind::Float, Some("0.02"), "timestep (a.u.)"),
    key("propagation.mask", Kind::Bool, Some("true"), "absorbing edge mask"),
    key("propagation.mask_fraction", Kind::Float, Some("0.1"), "mask width per side, fraction of grid"),
    key("propagation.mask_exponent", Kind::Float, Some("0.125"), "mask sine exponent"),
    key("propagation.record_stride", Kind::Int, Some("5"), "steps between samples"),
    key("propagation.density_stride", Kind::Int, Some("0"), "steps between density frames, 0 = off"),
    key("propagation.norm_floor", Kind::Float, Some("0.001"), "norm flagged as depletion"),
    key("spectrum.window", Kind::Text(WINDOWS), Some("rectangular"), "window before the transform"),
    key("spectrum.source", Kind::Text(SOURCES), Some("dipole"), "signal transformed"),
    key("spectrum.floor", Kind::Float, Some("-20"), "floor of log10(D/Dmax)"),
    key("spectrum.pad_pow2", Kind::Bool, Some("false"), "zero-pad to a power of two"),
    key("spectrum.order_min", Kind::Float, Some("0"), "lowest order kept"),
    key("spectrum.order_max", Kind::Float, Some("12"), "highest order kept"),
    key("spectrum.min_prominence_db", Kind::Float, Some("10"), "peak prominence threshold"),
    key("sweep.rabi_min", Kind::Float, Some("0.1"), "first row, Omega_R / omega_a"),
    key("sweep.rabi_max", Kind::Float, Some("4"), "last row, Omega_R / omega_a"),
    key("sweep.rows", Kind::Int, Some("64"), "amplitude rows"),
    key("sweep.workers", Kind::Int, Some("1"), "worker threads, 0 = all cores"),
    key("sweep.tolerance_order", Kind::Float, Some("0.15"), "track assignment tolerance"),
    key("sweep.linear_n", Kind::IntList, Some("0,1"), "linear-regime sidebands tracked"),
    key("sweep.eq2_n", Kind::IntList, Some("1,2,3"), "carrier-wave Mollow sidebands tracked"),
    key("sweep.eq3_n", Kind::IntList, Some("0,1,2"), "odd-centred sidebands tracked"),
    key("sweep.compare_rabi_min", Kind::Float, Some("1.5"), "comparison window start, Omega_R / omega_a"),
    key("sweep.compare_rabi_max", Kind::Float, Some("4"), "comparison window end, Omega_R / omega_a"),
    key("output.dir", Kind::Path, Some("out"), "output directory"),
    key("output.prefix", Kind::Path, Some("run"), "file name prefix"),
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    SCHEMA.iter().find(|k| k.key == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(usize),
    Bool(bool),
    Text(String),
    IntList(Vec<usize>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "{s}"),
            Value::IntList(v) => {
                let parts: Vec<String> = v.iter().map(|n| n.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

fn parse_value(kind: Kind, raw: &str) -> std::result::Result<Value, String> {
    let bad = || format!("expected {}, got '{raw}'", kind.describe());
    match kind {
        Kind::Float => raw
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(Value::Float)
            .ok_or_else(bad),
        Kind::Int => raw.parse::<usize>().map(Value::Int).map_err(|_| bad()),
        Kind::Bool => match raw {
            "true" | "yes" | "on" => Ok(Value::Bool(true)),
            "false" | "no" | "off" => Ok(Value::Bool(false)),
            _ => Err(bad()),
        },
        Kind::Text(choices) => choices
            .iter()
            .find(|c| **c == raw)
            .map(|c| Value::Text((*c).to_string()))
            .ok_or_else(bad),
        Kind::IntList => {
            if raw.trim().is_empty() {
                return Ok(Value::IntList(Vec::new()));
            }
            raw.split(',')
                .map(|p| p.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Value::IntList)
                .map_err(|_| bad())
        }
        Kind::Path => {
            if raw.is_empty() {
                Err(bad())
            } else {
                Ok(Value::Text(raw.to_string()))
            }
        }
    }
}

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Default,
    /// Written on this line of the source text.
    Explicit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub provenance: Provenance,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<&'static str, Entry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        for spec in SCHEMA {
            if let Some(d) = spec.default {
                let value = parse_value(spec.kind, d).expect("schema default parses");
                entries.insert(
                    spec.key,
                    Entry {
                        value,
                        provenance: Provenance::Default,
                    },
                );
            }
        }
        Self { entries }
    }
}

/// Parse and validate configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut config = RunConfig::default();
    let mut seen: BTreeMap<&'static str, usize> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::ConfigLine {
            line,
            message: format!("expected 'section.key = value', got '{content}'"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        let spec = key_spec(k).ok_or_else(|| Error::ConfigLine {
            line,
            message: format!("unknown key '{k}'"),
        })?;
        if let Some(prev) = seen.insert(spec.key, line) {
            return Err(Error::ConfigLine {
                line,
                message: format!("'{k}' already set on line {prev}"),
            });
        }
        let value = parse_value(spec.kind, v).map_err(|m| Error::ConfigLine {
            line,
            message: format!("{k}: {m}"),
        })?;
        config.entries.insert(
            spec.key,
            Entry {
                value,
                provenance: Provenance::Explicit(line),
            },
        );
    }
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &Entry)> + '_ {
        self.entries.iter().map(|(k, e)| (*k, e))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key).map(|e| &e.value)
    }

    pub fn provenance(&self, key: &str) -> Option<Provenance> {
        self.entries.get(key).map(|e| e.provenance)
    }

    pub fn is_explicit(&self, key: &str) -> bool {
        matches!(self.provenance(key), Some(Provenance::Explicit(_)))
    }

    fn line_of(&self, key: &str) -> usize {
        match self.provenance(key) {
            Some(Provenance::Explicit(l)) => l,
            _ => 0,
        }
    }

    /// Set a value as if it had been written explicitly (line 0).
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        self.apply_overrides(&[(key, raw)])
    }

    /// Set several values, validating once all are in place.
    pub fn apply_overrides<K: AsRef<str>, V: AsRef<str>>(&mut self, pairs: &[(K, V)]) -> Result<()> {
        for (key, raw) in pairs {
            let (key, raw) = (key.as_ref(), raw.as_ref().trim());
            let spec = key_spec(key).ok_or_else(|| Error::Config(format!("unknown key '{key}'")))?;
            let value = parse_value(spec.kind, raw).map_err(|m| Error::Config(format!("{key}: {m}")))?;
            self.entries.insert(
                spec.key,
                Entry {
                    value,
                    provenance: Provenance::Explicit(0),
                },
            );
        }
        self.validate()
    }

    /// Remove an explicit value, falling back to the default if any.
    pub fn unset(&mut self, key: &str) {
        let Some(spec) = key_spec(key) else { return };
        match spec.default {
            Some(d) => {
                let value = parse_value(spec.kind, d).expect("schema default parses");
                self.entries.insert(
                    spec.key,
                    Entry {
                        value,
                        provenance: Provenance::Default,
                    },
                );
            }
            None => {
                self.entries.remove(spec.key);
            }
        }
    }

    pub fn float(&self, key: &str) -> Option<f64> {
        match self.get(key) {
            Some(Value::Float(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn int(&self, key: &str) -> Option<usize> {
        match self.get(key) {
            Some(Value::Int(n)) => Some(*n),
            _ => None,
        }
    }

    pub fn flag(&self, key: &str) -> Option<bool> {
        match self.get(key) {
            Some(Value::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.get(key) {
            Some(Value::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn list(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            Some(Value::IntList(v)) => v.clone(),
            _ => Vec::new(),
        }
    }

    fn req_float(&self, key: &str) -> Result<f64> {
        self.float(key)
            .ok_or_else(|| Error::Config(format!("missing required key {key}")))
    }

    pub fn is_tls(&self) -> bool {
        self.text("system.kind") == Some("tls")
    }

    /// Cross-key checks that do not need the eigensolver.
    fn validate(&self) -> Result<()> {
        let fail = |anchor: &str, message: String| -> Error {
            match self.line_of(anchor) {
                0 => Error::Config(message),
                line => Error::ConfigLine { line, message },
            }
        };
        // An explicit envelope must come with its own shape keys.
        if self.is_explicit("pulse.envelope") {
            let needed: &[&str] = match self.text("pulse.envelope") {
                Some("gaussian") => &["pulse.n_fwhm"],
                _ => &["pulse.n_on", "pulse.n_p", "pulse.n_off"],
            };
            for k in needed {
                if !self.is_explicit(k) {
                    return Err(fail(
                        "pulse.envelope",
                        format!(
                            "pulse.envelope = {} requires {k}",
                            self.text("pulse.envelope").unwrap_or("")
                        ),
                    ));
                }
            }
        }
        let exclusive = |keys: &[&str]| -> Result<()> {
            let set: Vec<&str> = keys.iter().copied().filter(|k| self.get(k).is_some()).collect();
            if set.len() > 1 {
                return Err(fail(set[1], format!("{} are mutually exclusive", set.join(" and "))));
            }
            Ok(())
        };
        exclusive(&["pulse.omega_d_au", "pulse.omega_d_ratio"])?;
        exclusive(&["pulse.e_peak_au", "pulse.intensity_wcm2", "pulse.rabi_over_omega_a"])?;
        exclusive(&["system.separation", "system.target_omega_a"])?;
        exclusive(&["system.b", "system.target_gap"]).or_else(|e| {
            // b always has a default; only an explicit b conflicts.
            if self.is_explicit("system.b") {
                Err(e)
            } else {
                Ok(())
            }
        })?;

        for k in [
            "system.a",
            "system.x_max",
            "pulse.omega_d_au",
            "pulse.omega_d_ratio",
            "pulse.n_on",
            "pulse.n_p",
            "pulse.n_off",
            "pulse.n_fwhm",
            "propagation.dt",
            "system.omega_a_au",
            "system.target_omega_a",
            "system.target_gap",
            "sweep.tolerance_order",
        ] {
            if let Some(x) = self.float(k) {
                if !(x > 0.0) {
                    return Err(fail(k, format!("{k} must be positive, got {x}")));
                }
            }
        }
        for k in ["system.b", "pulse.e_peak_au", "pulse.intensity_wcm2", "pulse.rabi_over_omega_a", "system.mu_au"] {
            if let Some(x) = self.float(k) {
                let ok = if k == "system.b" { x > 0.0 } else { x >= 0.0 };
                if !ok {
                    return Err(fail(k, format!("{k} out of range: {x}")));
                }
            }
        }
        if self.int("system.wells") == Some(0) {
            return Err(fail("system.wells", "system.wells must be at least 1".into()));
        }
        if self.int("system.n_points").unwrap_or(0) < 3 {
            return Err(fail("system.n_points", "system.n_points must be at least 3".into()));
        }
        let upper = self.int("system.upper_level").unwrap_or(1);
        if upper == 0 {
            return Err(fail("system.upper_level", "system.upper_level must be at least 1".into()));
        }
        if self.get("pulse.omega_d_au").is_none() && self.get("pulse.omega_d_ratio").is_none() {
            return Err(Error::Config(
                "missing required key pulse.omega_d_au (or pulse.omega_d_ratio)".into(),
            ));
        }
        if self.is_tls() {
            for k in ["system.omega_a_au", "system.mu_au"] {
                if self.get(k).is_none() {
                    return Err(fail("system.kind", format!("system.kind = tls requires {k}")));
                }
            }
        } else if self.int("system.wells").unwrap_or(1) > 1
            && self.get("system.separation").is_none()
            && self.get("system.target_omega_a").is_none()
        {
            return Err(fail(
                "system.wells",
                "more than one well requires system.separation or system.target_omega_a".into(),
            ));
        }
        if self.get("system.target_gap").is_some() && self.int("system.wells") != Some(1) {
            return Err(fail("system.target_gap", "system.target_gap applies to a single well".into()));
        }
        let (lo, hi) = (self.float("spectrum.order_min").unwrap_or(0.0), self.float("spectrum.order_max").unwrap_or(0.0));
        if !(hi > lo && lo >= 0.0) {
            return Err(fail("spectrum.order_max", format!("bad order range [{lo}, {hi}]")));
        }
        let (lo, hi) = (self.float("sweep.rabi_min").unwrap_or(0.0), self.float("sweep.rabi_max").unwrap_or(0.0));
        if !(hi > lo && lo >= 0.0) {
            return Err(fail("sweep.rabi_max", format!("bad sweep range [{lo}, {hi}]")));
        }
        if self.int("sweep.rows").unwrap_or(0) < 2 {
            return Err(fail("sweep.rows", "sweep.rows must be at least 2".into()));
        }
        if self.list("sweep.eq2_n").contains(&0) {
            return Err(fail("sweep.eq2_n", "sweep.eq2_n entries start at 1".into()));
        }
        Ok(())
    }

    /// Text form: explicit keys as assignments, defaults as comments.
    /// Parsing the result gives back an identical configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for spec in SCHEMA {
            let Some(entry) = self.entries.get(spec.key) else {
                continue;
            };
            let sec = spec.key.split('.').next().unwrap_or("");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = sec;
            }
            match entry.provenance {
                Provenance::Explicit(_) => out.push_str(&format!("{} = {}\n", spec.key, entry.value)),
                Provenance::Default => out.push_str(&format!("# {} = {}  (default)\n", spec.key, entry.value)),
            }
        }
        out
    }

    /// All effective values as `key = value` strings, defaults marked.
    pub fn effective_lines(&self) -> Vec<String> {
        self.to_text()
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.trim_start_matches("# ").to_string())
            .collect()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::symmetric(self.req_float("system.x_max")?, self.int("system.n_points").unwrap_or(0))
    }

    pub fn propagation(&self) -> Result<PropagationConfig> {
        let config = PropagationConfig {
            dt: self.req_float("propagation.dt")?,
            mask_enabled: self.flag("propagation.mask").unwrap_or(true),
            mask_fraction: self.req_float("propagation.mask_fraction")?,
            mask_exponent: self.req_float("propagation.mask_exponent")?,
            record_stride: self.int("propagation.record_stride").unwrap_or(1),
            density_stride: self.int("propagation.density_stride").unwrap_or(0),
            norm_floor: self.req_float("propagation.norm_floor")?,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn spectrum_options(&self) -> Result<SpectrumOptions> {
        Ok(SpectrumOptions {
            window: self.text("spectrum.window").unwrap_or("rectangular").parse::<Window>()?,
            source: self.text("spectrum.source").unwrap_or("dipole").parse::<Source>()?,
            floor: self.req_float("spectrum.floor")?,
            pad_pow2: self.flag("spectrum.pad_pow2").unwrap_or(false),
        })
    }

    pub fn order_range(&self) -> (f64, f64) {
        (
            self.float("spectrum.order_min").unwrap_or(0.0),
            self.float("spectrum.order_max").unwrap_or(12.0),
        )
    }

    pub fn envelope(&self) -> Result<Envelope> {
        let env = match self.text("pulse.envelope") {
            Some("gaussian") => Envelope::gaussian(self.req_float("pulse.n_fwhm")?),
            _ => Envelope::trapezoid(
                self.req_float("pulse.n_on")?,
                self.req_float("pulse.n_p")?,
                self.req_float("pulse.n_off")?,
            ),
        };
        env.validate()?;
        Ok(env)
    }

    /// Carrier frequency, resolving a ratio against `omega_a`.
    pub fn omega_d(&self, omega_a: f64) -> Result<f64> {
        match (self.float("pulse.omega_d_au"), self.float("pulse.omega_d_ratio")) {
            (Some(w), _) => Ok(w),
            (None, Some(r)) => Ok(r * omega_a),
            _ => Err(Error::Config("missing required key pulse.omega_d_au".into())),
        }
    }

    /// Peak field from whichever amplitude key is set; zero if none.
    pub fn e_peak(&self, omega_a: f64, mu: f64) -> Result<f64> {
        if let Some(e) = self.float("pulse.e_peak_au") {
            return Ok(e);
        }
        if let Some(i) = self.float("pulse.intensity_wcm2") {
            return intensity_to_field(i);
        }
        if let Some(r) = self.float("pulse.rabi_over_omega_a") {
            if !(mu > 0.0) {
                return Err(Error::Config("pulse.rabi_over_omega_a needs a non-zero dipole".into()));
            }
            return Ok(r * omega_a / mu);
        }
        Ok(0.0)
    }

    pub fn pulse(&self, system: &ResolvedSystem) -> Result<Pulse> {
        Pulse::new(
            self.omega_d(system.omega_a)?,
            self.e_peak(system.omega_a, system.mu)?,
            self.envelope()?,
        )
    }

    /// Build the potential (tuning it if asked), solve its levels and fix
    /// `ω_a` and `μ`.
    pub fn resolve_system(&self) -> Result<ResolvedSystem> {
        let mut tuned = BTreeMap::new();
        if self.is_tls() {
            let tls = TlsParams::new(self.req_float("system.omega_a_au")?, self.req_float("system.mu_au")?)?;
            return Ok(ResolvedSystem {
                kind: SystemKind::Tls(tls),
                omega_a: tls.omega_a,
                mu: tls.mu,
                eq3: None,
                tuned,
            });
        }
        let grid = self.grid()?;
        let n_wells = self.int("system.wells").unwrap_or(1);
        let a = self.req_float("system.a")?;
        let mut b = self.req_float("system.b")?;
        if let Some(gap) = self.float("system.target_gap") {
            b = tune_softening(a, gap, &grid)?;
            tuned.insert("system.b".to_string(), b);
        }
        let separation = match (self.float("system.separation"), self.float("system.target_omega_a")) {
            (Some(d), _) => d,
            (None, Some(target)) if n_wells > 1 => {
                let d = tune_separation(n_wells, a, b, target, &grid)?;
                tuned.insert("system.separation".to_string(), d);
                d
            }
            _ => 0.0,
        };
        let wells = WellSpec::chain(n_wells, a, b, separation);
        let potential = build_potential_with_prefactor(&wells, &grid, ATTRACTIVE)?;
        let upper = self.int("system.upper_level").unwrap_or(1);
        let eq3_level = self.int("system.eq3_level");
        let n_levels = self
            .int("system.n_levels")
            .unwrap_or(2)
            .max(upper + 1)
            .max(eq3_level.map_or(0, |l| l + 1));
        let eigen = solve_bound_states(&potential, &grid, n_levels)?;
        let (omega_a, mu) = transition(&eigen, 0, upper)?;
        let eq3 = match eq3_level {
            Some(l) => {
                let (w3, m3) = transition(&eigen, 0, l)?;
                Some(TlsParams::new(w3, m3.abs())?)
            }
            None => None,
        };
        Ok(ResolvedSystem {
            kind: SystemKind::Tdse {
                grid,
                wells,
                potential,
                eigen,
                upper,
            },
            omega_a,
            mu: mu.abs(),
            eq3,
            tuned,
        })
    }

    pub fn sweep_config(&self, system: &ResolvedSystem) -> Result<SweepConfig> {
        let sweep_system = match &system.kind {
            SystemKind::Tls(tls) => SweepSystem::Tls {
                tls: *tls,
                dt: self.req_float("propagation.dt")?,
            },
            SystemKind::Tdse { grid, wells, eigen, upper, .. } => SweepSystem::Tdse {
                grid: *grid,
                wells: wells.clone(),
                prefactor: ATTRACTIVE,
                propagation: self.propagation()?,
                n_levels: eigen.len(),
                transition: (0, *upper),
            },
        };
        let amplitudes = amplitudes_for_rabi(
            system.omega_a,
            system.mu,
            self.req_float("sweep.rabi_min")?,
            self.req_float("sweep.rabi_max")?,
            self.int("sweep.rows").unwrap_or(2),
        );
        Ok(SweepConfig {
            system: sweep_system,
            pulse: self.pulse(system)?,
            amplitudes,
            order_range: self.order_range(),
            spectrum: self.spectrum_options()?,
            workers: self.int("sweep.workers").unwrap_or(1),
        })
    }

    pub fn prediction_set(&self, system: &ResolvedSystem) -> PredictionSet {
        PredictionSet {
            odd_harmonics: true,
            linear_n: self.list("sweep.linear_n"),
            eq2_n: self.list("sweep.eq2_n"),
            eq3: system.eq3.map(|t| (t, self.list("sweep.eq3_n"))),
        }
    }

    pub fn track_options(&self) -> TrackOptions {
        TrackOptions {
            tolerance_order: self.float("sweep.tolerance_order").unwrap_or(0.15),
            min_prominence_db: self.float("spectrum.min_prominence_db").unwrap_or(10.0),
        }
    }

    /// Comparison window in absolute Rabi frequency.
    pub fn compare_range(&self, omega_a: f64) -> (f64, f64) {
        (
            self.float("sweep.compare_rabi_min").unwrap_or(0.0) * omega_a,
            self.float("sweep.compare_rabi_max").unwrap_or(f64::INFINITY) * omega_a,
        )
    }

    pub fn output_dir(&self) -> &str {
        self.text("output.dir").unwrap_or("out")
    }

    pub fn output_prefix(&self) -> &str {
        self.text("output.prefix").unwrap_or("run")
    }
}

#[derive(Debug, Clone)]
pub enum SystemKind {
    Tls(TlsParams),
    Tdse {
        grid: Grid,
        wells: Vec<WellSpec>,
        potential: Potential,
        eigen: EigenSet,
        upper: usize,
    },
}

/// Stationary system with its reference transition fixed.
#[derive(Debug, Clone)]
pub struct ResolvedSystem {
    pub kind: SystemKind,
    pub omega_a: f64,
    pub mu: f64,
    /// Odd-centred transition, if requested.
    pub eq3: Option<TlsParams>,
    /// Parameters set by tuning rather than given.
    pub tuned: BTreeMap<String, f64>,
}

impl ResolvedSystem {
    pub fn eigen(&self) -> Option<&EigenSet> {
        match &self.kind {
            SystemKind::Tdse { eigen, .. } => Some(eigen),
            SystemKind::Tls(_) => None,
        }
    }

    pub fn potential(&self) -> Option<&Potential> {
        match &self.kind {
            SystemKind::Tdse { potential, .. } => Some(potential),
            SystemKind::Tls(_) => None,
        }
    }

    /// Derived quantities for output headers.
    pub fn summary(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("derived.omega_a_au".into(), format!("{}", self.omega_a));
        m.insert("derived.mu_au".into(), format!("{}", self.mu));
        if let Some(t) = &self.eq3 {
            m.insert("derived.omega_a3_au".into(), format!("{}", t.omega_a));
            m.insert("derived.mu3_au".into(), format!("{}", t.mu));
        }
        for (k, v) in &self.tuned {
            m.insert(format!("tuned.{}", k.trim_start_matches("system.")), format!("{v}"));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config("system.wells = 1\npulse.omega_d_au = 0.057\npulse.e_peak_au = 0.05\n").unwrap();
        assert_eq!(c.float("propagation.dt"), Some(0.02));
        assert_eq!(c.flag("propagation.mask"), Some(true));
        assert_eq!(c.int("system.n_points"), Some(8192));
        assert_eq!(c.provenance("propagation.dt"), Some(Provenance::Default));
        assert_eq!(c.provenance("pulse.e_peak_au"), Some(Provenance::Explicit(3)));
        let env = c.envelope().unwrap();
        assert_eq!(env, Envelope::trapezoid(1.0, 50.0, 1.0));
    }

    #[test]
    fn explicit_trapezoid_needs_its_cycles() {
        let err = parse_config("pulse.omega_d_au = 0.05\n\npulse.envelope = trapezoid\n").unwrap_err();
        match err {
            Error::ConfigLine { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("pulse.n_on"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named_with_line() {
        let err = parse_config("pulse.omega_d_au = 0.05\npulse.colour = red\n").unwrap_err();
        assert_eq!(
            err,
            Error::ConfigLine {
                line: 2,
                message: "unknown key 'pulse.colour'".into()
            }
        );
    }

    #[test]
    fn type_mismatch_names_line() {
        let err = parse_config("pulse.omega_d_au = fast\n").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 1, .. }));
        let err = parse_config("pulse.omega_d_au = 0.05\nsystem.n_points = 2.5\n").unwrap_err();
        assert!(matches!(err, Error::ConfigLine { line: 2, .. }));
    }

    #[test]
    fn missing_carrier_is_reported() {
        let err = parse_config("system.wells = 1\n").unwrap_err();
        assert!(err.to_string().contains("pulse.omega_d_au"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = parse_config("# header\n\npulse.omega_d_au = 0.05   # carrier\n").unwrap();
        assert_eq!(c.float("pulse.omega_d_au"), Some(0.05));
    }

    #[test]
    fn text_round_trip() {
        let src = "system.wells = 2\nsystem.target_omega_a = 0.04\nsystem.b = 0.2\npulse.omega_d_ratio = 0.7\n\
                   pulse.envelope = trapezoid\npulse.n_on = 1\npulse.n_p = 50\npulse.n_off = 1\nsweep.eq2_n = 1,2\n";
        let c = parse_config(src).unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        // Line numbers differ; values and explicit/default status agree.
        for (k, e) in c.entries() {
            let f = again.entries.get(k).unwrap();
            assert_eq!(e.value, f.value, "{k}");
            assert_eq!(
                matches!(e.provenance, Provenance::Default),
                matches!(f.provenance, Provenance::Default),
                "{k}"
            );
        }
        assert_eq!(c.entries.len(), again.entries.len());
    }

    #[test]
    fn tls_requires_its_parameters() {
        assert!(parse_config("system.kind = tls\npulse.omega_d_au = 1\n").is_err());
        let c = parse_config("system.kind = tls\nsystem.omega_a_au = 1\nsystem.mu_au = 1\npulse.omega_d_ratio = 1\npulse.rabi_over_omega_a = 0.3\n").unwrap();
        let sys = c.resolve_system().unwrap();
        let pulse = c.pulse(&sys).unwrap();
        assert!((pulse.e_peak - 0.3).abs() < 1e-15);
        assert_eq!(pulse.omega_d, 1.0);
    }

    #[test]
    fn exclusive_keys() {
        assert!(parse_config("pulse.omega_d_au = 0.05\npulse.e_peak_au = 0.1\npulse.intensity_wcm2 = 1e14\n").is_err());
        assert!(parse_config("pulse.omega_d_au = 0.05\npulse.omega_d_ratio = 0.7\n").is_err());
    }

    #[test]
    fn chain_needs_spacing() {
        assert!(parse_config("system.wells = 2\npulse.omega_d_au = 0.05\n").is_err());
    }
}
