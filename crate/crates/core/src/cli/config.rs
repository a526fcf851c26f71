//! Run configuration: flat `section.key = value unit` text.
//!
//! ```text
//! # reference geometry
//! microscope.lambda_p = 351 nm
//! microscope.a = 2 cm
//! sample.kind = two_point
//! sample.separation = 150 nm
//! dispersion.n_o = constant(1.66)
//! dispersion.n_e = poly(1.5, 1e-17)
//! ```
//!
//! Dimensional values take a unit suffix (`nm um µm mm cm m`, `deg rad`,
//! `fs ps s`); a bare number is read in SI base units.

use crate::coincidence::{DispersionModel, IndexDescriptor, QuadratureSpec, Raster, SampleTransmittance};
use crate::geometry::Vec2;
use crate::optics::{ImageDistance, MicroscopeConfig, MicroscopeParams, PumpMode};
use crate::psf::Instrument;
use crate::scansim::ScanPlan;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

/// Keys that must appear in every configuration file.
pub const REQUIRED_KEYS: [&str; 5] = [
    "microscope.lambda_p",
    "microscope.a",
    "microscope.f",
    "microscope.f_p",
    "microscope.w0",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, line: Option<usize>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Angle,
    Time,
}

const UNITS: [(&str, Dim, f64); 11] = [
    ("deg", Dim::Angle, PI / 180.0),
    ("rad", Dim::Angle, 1.0),
    ("nm", Dim::Length, 1e-9),
    ("um", Dim::Length, 1e-6),
    ("µm", Dim::Length, 1e-6),
    ("mm", Dim::Length, 1e-3),
    ("cm", Dim::Length, 1e-2),
    ("fs", Dim::Time, 1e-15),
    ("ps", Dim::Time, 1e-12),
    ("m", Dim::Length, 1.0),
    ("s", Dim::Time, 1.0),
];

fn parse_quantity(text: &str, dim: Dim) -> Result<f64, String> {
    let text = text.trim();
    let (number, scale) = match UNITS.iter().find(|(u, _, _)| text.ends_with(u)) {
        Some(&(unit, d, scale)) => {
            if d != dim {
                return Err(format!("unit '{unit}' is not a {dim:?} unit").to_lowercase());
            }
            (&text[..text.len() - unit.len()], scale)
        }
        None => (text, 1.0),
    };
    let v: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from '{text}'"))?;
    if !v.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok(v * scale)
}

/// Parses a comma-separated list of lengths such as `1mm,8mm,12mm`.
pub fn parse_length_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_quantity(s, Dim::Length))
        .collect()
}

/// Parses one length such as `20mm`.
pub fn parse_length(text: &str) -> Result<f64, String> {
    parse_quantity(text, Dim::Length)
}

fn parse_index(text: &str) -> Result<IndexDescriptor, String> {
    let t = text.trim();
    let inner = |prefix: &str| {
        t.strip_prefix(prefix)
            .and_then(|r| r.trim_start().strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
    };
    let numbers = |body: &str| -> Result<Vec<f64>, String> {
        body.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| format!("bad coefficient '{}'", s.trim())))
            .collect()
    };
    if let Some(body) = inner("constant") {
        let v = numbers(body)?;
        if v.len() != 1 {
            return Err("constant(...) takes one value".into());
        }
        Ok(IndexDescriptor::Constant(v[0]))
    } else if let Some(body) = inner("poly") {
        let v = numbers(body)?;
        if v.is_empty() {
            return Err("poly(...) needs at least one coefficient".into());
        }
        Ok(IndexDescriptor::Polynomial(v))
    } else {
        t.parse::<f64>()
            .map(IndexDescriptor::Constant)
            .map_err(|_| format!("expected constant(n), poly(c0, c1, ...) or a number, got '{t}'"))
    }
}

fn format_index(d: &IndexDescriptor) -> String {
    match d {
        IndexDescriptor::Constant(n) => format!("constant({n:e})"),
        IndexDescriptor::Polynomial(c) => {
            let parts: Vec<String> = c.iter().map(|v| format!("{v:e}")).collect();
            format!("poly({})", parts.join(", "))
        }
    }
}

/// Sample as written in a configuration; rasters refer to a file.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSpec {
    Delta,
    TwoPoint { separation: f64 },
    Slit { width: f64 },
    Grating { period: f64, duty: f64 },
    Raster { pitch: f64, file: String },
}

impl SampleSpec {
    /// Builds the transmittance; raster paths are resolved against `base`.
    pub fn load(&self, base: &Path) -> Result<SampleTransmittance, String> {
        let s = match *self {
            SampleSpec::Delta => SampleTransmittance::Delta,
            SampleSpec::TwoPoint { separation } => SampleTransmittance::TwoPoint { separation },
            SampleSpec::Slit { width } => SampleTransmittance::Slit { width },
            SampleSpec::Grating { period, duty } => SampleTransmittance::Grating { period, duty },
            SampleSpec::Raster { pitch, ref file } => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("cannot read raster '{}': {e}", path.display()))?;
                SampleTransmittance::Raster(parse_raster(&text, pitch)?)
            }
        };
        s.validate().map_err(|e| e.to_string())?;
        Ok(s)
    }
}

/// Raster text: one row per line (first line is the lowest row), cells
/// separated by commas, each cell `re` or `re:im`.
pub fn parse_raster(text: &str, pitch: f64) -> Result<Raster, String> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                let cell = cell.trim();
                let (re, im) = cell.split_once(':').unwrap_or((cell, "0"));
                match (re.trim().parse::<f64>(), im.trim().parse::<f64>()) {
                    (Ok(re), Ok(im)) => Ok(Complex64::new(re, im)),
                    _ => Err(format!("raster line {}: bad cell '{cell}'", i + 1)),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Raster::new(pitch, rows).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSpec {
    pub n_o: IndexDescriptor,
    pub n_e: IndexDescriptor,
    pub psi: f64,
    pub theta_e: f64,
    pub theta_o: f64,
    pub length: f64,
}

impl DispersionSpec {
    pub fn build(&self) -> crate::Result<DispersionModel> {
        DispersionModel::new(
            Arc::new(self.n_o.clone()),
            Arc::new(self.n_e.clone()),
            self.psi,
            self.theta_e,
            self.theta_o,
            self.length,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanKind {
    Line,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub kind: ScanKind,
    pub instrument: Instrument,
    /// Line direction, measured from +x.
    pub direction: f64,
    pub half_range: f64,
    pub samples: usize,
    pub half_range_x: f64,
    pub half_range_y: f64,
    pub nx: usize,
    pub ny: usize,
    /// Detector delay `T1 - T2`; `None` places it mid-window.
    pub t12: Option<f64>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            kind: ScanKind::Line,
            instrument: Instrument::TwinPhoton,
            direction: 0.0,
            half_range: 1e-6,
            samples: 201,
            half_range_x: 1e-6,
            half_range_y: 1e-6,
            nx: 41,
            ny: 41,
            t12: None,
        }
    }
}

impl ScanSpec {
    pub fn plan(&self, instrument: Instrument) -> crate::Result<ScanPlan> {
        match self.kind {
            ScanKind::Line => ScanPlan::line(
                instrument,
                Vec2::new(self.direction.cos(), self.direction.sin()),
                self.half_range,
                self.samples,
            ),
            ScanKind::Grid => ScanPlan::grid(instrument, self.half_range_x, self.half_range_y, self.nx, self.ny),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// Digits after the decimal point in CSV numbers.
    pub precision: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: None,
            svg: None,
            precision: 9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub microscope: MicroscopeParams,
    pub sample: SampleSpec,
    pub dispersion: Option<DispersionSpec>,
    pub quadrature: QuadratureSpec,
    pub output: OutputSpec,
    pub scan: ScanSpec,
    /// Directory that relative raster paths are resolved against.
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            microscope: MicroscopeParams::default(),
            sample: SampleSpec::Delta,
            dispersion: None,
            quadrature: QuadratureSpec::default(),
            output: OutputSpec::default(),
            scan: ScanSpec::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        self.0.get_mut(key).map(|e| {
            e.used = true;
            (e.value.clone(), e.line)
        })
    }

    fn has_prefix(&self, prefix: &str) -> bool {
        self.0.keys().any(|k| k.starts_with(prefix))
    }

    fn get<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            Some((v, line)) => parse(&v).map(Some).map_err(|m| err(key, Some(line), m)),
            None => Ok(None),
        }
    }

    fn require<T>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        self.get(key, parse)?
            .ok_or_else(|| err(key, None, "required key is missing"))
    }

    fn length(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key, |v| parse_quantity(v, Dim::Length))
    }

    fn angle(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key, |v| parse_quantity(v, Dim::Angle))
    }
}

fn parse_count(v: &str) -> Result<usize, String> {
    v.trim().parse().map_err(|_| format!("expected a non-negative integer, got '{}'", v.trim()))
}

fn parse_real(v: &str) -> Result<f64, String> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("expected a number, got '{}'", v.trim()))
}

fn parse_word<'a>(options: &'a [&'a str]) -> impl Fn(&str) -> Result<String, String> + 'a {
    move |v| {
        let w = v.trim().to_ascii_lowercase();
        if options.contains(&w.as_str()) {
            Ok(w)
        } else {
            Err(format!("expected one of {}, got '{}'", options.join(", "), v.trim()))
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| err("--config", None, e.to_string()))?;
        let mut cfg = RunConfig::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(content, Some(line), "expected 'key = value'"));
            };
            let key = key.trim().to_string();
            let entry = Entry {
                value: value.trim().to_string(),
                line,
                used: false,
            };
            if map.insert(key.clone(), entry).is_some() {
                return Err(err(&key, Some(line), "key given more than once"));
            }
        }
        let mut e = Entries(map);
        if let Some(key) = REQUIRED_KEYS.iter().find(|k| !e.0.contains_key(**k)) {
            return Err(err(key, None, "required key is missing"));
        }

        let len = |e: &mut Entries, k: &str| e.require(k, |v| parse_quantity(v, Dim::Length));
        let lambda_p = len(&mut e, "microscope.lambda_p")?;
        let f = len(&mut e, "microscope.f")?;
        let f_p = len(&mut e, "microscope.f_p")?;
        let s1 = match e.take("microscope.s1") {
            None => ImageDistance::Collimated,
            Some((v, _)) if v.trim().eq_ignore_ascii_case("collimated") => ImageDistance::Collimated,
            Some((v, line)) => ImageDistance::Finite(
                parse_quantity(&v, Dim::Length).map_err(|m| err("microscope.s1", Some(line), m))?,
            ),
        };
        let pump = match e.get("microscope.pump", parse_word(&["focused", "unfocused"]))? {
            Some(w) if w == "unfocused" => PumpMode::Unfocused,
            _ => PumpMode::Focused,
        };
        let microscope = MicroscopeParams {
            lambda_p,
            lambda_o: e.length("microscope.lambda_o")?.unwrap_or(2.0 * lambda_p),
            lambda_e: e.length("microscope.lambda_e")?.unwrap_or(2.0 * lambda_p),
            a: len(&mut e, "microscope.a")?,
            f,
            f_p,
            w0: len(&mut e, "microscope.w0")?,
            s0: e.length("microscope.s0")?.unwrap_or(f),
            s1,
            d: e.length("microscope.d")?.unwrap_or(f_p),
            pump,
        };
        MicroscopeConfig::new(microscope).map_err(|x| err("microscope", None, x.to_string()))?;

        let kind = e
            .get(
                "sample.kind",
                parse_word(&["delta", "two_point", "slit", "grating", "raster"]),
            )?
            .unwrap_or_else(|| "delta".into());
        let sample = match kind.as_str() {
            "delta" => SampleSpec::Delta,
            "two_point" => SampleSpec::TwoPoint {
                separation: len(&mut e, "sample.separation")?,
            },
            "slit" => SampleSpec::Slit {
                width: len(&mut e, "sample.width")?,
            },
            "grating" => SampleSpec::Grating {
                period: len(&mut e, "sample.period")?,
                duty: e.require("sample.duty", parse_real)?,
            },
            _ => SampleSpec::Raster {
                pitch: len(&mut e, "sample.pitch")?,
                file: e.require("sample.file", |v| Ok(v.trim().to_string()))?,
            },
        };
        if let Some(s) = match &sample {
            SampleSpec::TwoPoint { separation } => Some(SampleTransmittance::TwoPoint { separation: *separation }),
            SampleSpec::Slit { width } => Some(SampleTransmittance::Slit { width: *width }),
            SampleSpec::Grating { period, duty } => Some(SampleTransmittance::Grating {
                period: *period,
                duty: *duty,
            }),
            _ => None,
        } {
            s.validate().map_err(|x| err("sample", None, x.to_string()))?;
        }

        let dispersion = if e.has_prefix("dispersion.") {
            let spec = DispersionSpec {
                n_o: e.require("dispersion.n_o", parse_index)?,
                n_e: e.require("dispersion.n_e", parse_index)?,
                psi: e.angle("dispersion.psi")?.ok_or_else(|| err("dispersion.psi", None, "required key is missing"))?,
                theta_e: e.angle("dispersion.theta_e")?.unwrap_or(0.0),
                theta_o: e.angle("dispersion.theta_o")?.unwrap_or(0.0),
                length: len(&mut e, "dispersion.length")?,
            };
            spec.build().map_err(|x| err("dispersion", None, x.to_string()))?;
            Some(spec)
        } else {
            None
        };

        let d = QuadratureSpec::default();
        let truncation_radius = match e.take("quadrature.truncation_radius") {
            None => None,
            Some((v, _)) if v.trim().eq_ignore_ascii_case("auto") => None,
            Some((v, line)) => Some(
                parse_quantity(&v, Dim::Length).map_err(|m| err("quadrature.truncation_radius", Some(line), m))?,
            ),
        };
        let quadrature = QuadratureSpec {
            radial_nodes: e.get("quadrature.radial_nodes", parse_count)?.unwrap_or(d.radial_nodes),
            angular_nodes: e.get("quadrature.angular_nodes", parse_count)?.unwrap_or(d.angular_nodes),
            truncation_radius,
            target_rel_tol: e.get("quadrature.target_rel_tol", parse_real)?.unwrap_or(d.target_rel_tol),
        };
        quadrature.validate().map_err(|x| err("quadrature", None, x.to_string()))?;

        let path = |v: &str| Ok(v.trim().to_string());
        let output = OutputSpec {
            csv: e.get("output.csv", path)?,
            svg: e.get("output.svg", path)?,
            precision: e.get("output.precision", parse_count)?.unwrap_or(9),
        };
        if !(1..=17).contains(&output.precision) {
            return Err(err("output.precision", None, "must lie between 1 and 17"));
        }

        let s = ScanSpec::default();
        let scan = ScanSpec {
            kind: match e.get("scan.kind", parse_word(&["line", "grid"]))?.as_deref() {
                Some("grid") => ScanKind::Grid,
                _ => ScanKind::Line,
            },
            instrument: e
                .get("scan.instrument", |v| Instrument::from_str(v.trim()).map_err(|x| x.to_string()))?
                .unwrap_or(s.instrument),
            direction: e.angle("scan.direction")?.unwrap_or(s.direction),
            half_range: e.length("scan.half_range")?.unwrap_or(s.half_range),
            samples: e.get("scan.samples", parse_count)?.unwrap_or(s.samples),
            half_range_x: e.length("scan.half_range_x")?.unwrap_or(s.half_range_x),
            half_range_y: e.length("scan.half_range_y")?.unwrap_or(s.half_range_y),
            nx: e.get("scan.nx", parse_count)?.unwrap_or(s.nx),
            ny: e.get("scan.ny", parse_count)?.unwrap_or(s.ny),
            t12: e.get("scan.t12", |v| parse_quantity(v, Dim::Time))?,
        };
        scan.plan(scan.instrument).map_err(|x| err("scan", None, x.to_string()))?;

        if let Some((key, entry)) = e.0.iter().find(|(_, v)| !v.used) {
            return Err(err(key, Some(entry.line), "unknown key"));
        }
        Ok(RunConfig {
            microscope,
            sample,
            dispersion,
            quadrature,
            output,
            scan,
            base_dir: PathBuf::from("."),
        })
    }

    /// Configuration text that parses back to an equal value.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let m = &self.microscope;
        let mut put = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        put("microscope.lambda_p", format!("{:e} m", m.lambda_p));
        put("microscope.lambda_o", format!("{:e} m", m.lambda_o));
        put("microscope.lambda_e", format!("{:e} m", m.lambda_e));
        put("microscope.a", format!("{:e} m", m.a));
        put("microscope.f", format!("{:e} m", m.f));
        put("microscope.f_p", format!("{:e} m", m.f_p));
        put("microscope.w0", format!("{:e} m", m.w0));
        put("microscope.s0", format!("{:e} m", m.s0));
        put(
            "microscope.s1",
            match m.s1 {
                ImageDistance::Collimated => "collimated".into(),
                ImageDistance::Finite(v) => format!("{v:e} m"),
            },
        );
        put("microscope.d", format!("{:e} m", m.d));
        put(
            "microscope.pump",
            match m.pump {
                PumpMode::Focused => "focused".into(),
                PumpMode::Unfocused => "unfocused".into(),
            },
        );
        match &self.sample {
            SampleSpec::Delta => put("sample.kind", "delta".into()),
            SampleSpec::TwoPoint { separation } => {
                put("sample.kind", "two_point".into());
                put("sample.separation", format!("{separation:e} m"));
            }
            SampleSpec::Slit { width } => {
                put("sample.kind", "slit".into());
                put("sample.width", format!("{width:e} m"));
            }
            SampleSpec::Grating { period, duty } => {
                put("sample.kind", "grating".into());
                put("sample.period", format!("{period:e} m"));
                put("sample.duty", format!("{duty:e}"));
            }
            SampleSpec::Raster { pitch, file } => {
                put("sample.kind", "raster".into());
                put("sample.pitch", format!("{pitch:e} m"));
                put("sample.file", file.clone());
            }
        }
        if let Some(d) = &self.dispersion {
            put("dispersion.n_o", format_index(&d.n_o));
            put("dispersion.n_e", format_index(&d.n_e));
            put("dispersion.psi", format!("{:e} rad", d.psi));
            put("dispersion.theta_e", format!("{:e} rad", d.theta_e));
            put("dispersion.theta_o", format!("{:e} rad", d.theta_o));
            put("dispersion.length", format!("{:e} m", d.length));
        }
        let q = &self.quadrature;
        put("quadrature.radial_nodes", q.radial_nodes.to_string());
        put("quadrature.angular_nodes", q.angular_nodes.to_string());
        put(
            "quadrature.truncation_radius",
            q.truncation_radius.map_or("auto".into(), |r| format!("{r:e} m")),
        );
        put("quadrature.target_rel_tol", format!("{:e}", q.target_rel_tol));
        if let Some(p) = &self.output.csv {
            put("output.csv", p.clone());
        }
        if let Some(p) = &self.output.svg {
            put("output.svg", p.clone());
        }
        put("output.precision", self.output.precision.to_string());
        let s = &self.scan;
        put(
            "scan.kind",
            match s.kind {
                ScanKind::Line => "line".into(),
                ScanKind::Grid => "grid".into(),
            },
        );
        put("scan.instrument", s.instrument.name().into());
        put("scan.direction", format!("{:e} rad", s.direction));
        put("scan.half_range", format!("{:e} m", s.half_range));
        put("scan.samples", s.samples.to_string());
        put("scan.half_range_x", format!("{:e} m", s.half_range_x));
        put("scan.half_range_y", format!("{:e} m", s.half_range_y));
        put("scan.nx", s.nx.to_string());
        put("scan.ny", s.ny.to_string());
        if let Some(t) = s.t12 {
            put("scan.t12", format!("{t:e} s"));
        }
        o
    }

    pub fn microscope_config(&self) -> crate::Result<MicroscopeConfig> {
        MicroscopeConfig::new(self.microscope)
    }
}
