//! The four subcommands. Each returns its report text and file contents;
//! the binary decides where they go.

use super::config::{ConfigError, RunConfig};
use super::output::{columns_csv, grid_csv, heat_map, line_plot, sci};
use crate::coincidence::{DispersionModel, SampleTransmittance};
use crate::error::Error;
use crate::optics::{
    airy_radius, crossover_waist, eta0_inv_sq, r0, sigma_p_sq, MicroscopeConfig, PumpMode,
};
use crate::psf::{psf_confocal, psf_twin, width_reduction, Instrument};
use crate::scansim::{dip_contrast, min_resolvable_separation, scan, ScanGeometry};
use std::fmt::Write as _;

/// Reference width reductions (percent, twin vs confocal) by pump waist.
pub const REFERENCE_REDUCTIONS: [(f64, f64); 4] = [(1e-3, 50.0), (8e-3, 61.0), (12e-3, 68.0), (20e-3, 77.3)];
/// Waists compared when none are requested.
pub const DEFAULT_WAISTS: [f64; 3] = [1e-3, 8e-3, 12e-3];
/// Points per emitted comparison curve.
pub const COMPARE_SAMPLES: usize = 401;
/// Comparison curves span `[0, COMPARE_RANGE_AIRY_RADII * R_airy]`.
pub const COMPARE_RANGE_AIRY_RADII: f64 = 2.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid { .. } | Error::Domain(_) => CliError::Config(e.to_string()),
            Error::Range(_) | Error::Numerical { .. } => CliError::Numerical(e.to_string()),
        }
    }
}

/// Command-line switches shared by all subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub no_pump_gaussian: bool,
    pub threshold: f64,
    pub instrument: Option<Instrument>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            no_pump_gaussian: false,
            threshold: crate::scansim::DEFAULT_DIP_THRESHOLD,
            instrument: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    pub report: String,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

/// Reference reduction for `w0`, if one is tabulated.
pub fn reference_reduction(w0: f64) -> Option<f64> {
    REFERENCE_REDUCTIONS
        .iter()
        .find(|(w, _)| (w - w0).abs() <= 1e-9 * w)
        .map(|&(_, r)| r)
}

fn microscope(run: &RunConfig, opts: &Options) -> Result<MicroscopeConfig, CliError> {
    let cfg = run.microscope_config()?;
    Ok(if opts.no_pump_gaussian {
        cfg.with_pump(PumpMode::Unfocused)
    } else {
        cfg
    })
}

fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

pub fn params(run: &RunConfig, opts: &Options) -> Result<Outcome, CliError> {
    let cfg = microscope(run, opts)?;
    let q = &run.quadrature;
    let mut r = String::new();
    let sp = sigma_p_sq(&cfg);
    let eta = eta0_inv_sq(&cfg);
    kv(&mut r, "r0_m", sci(r0(&cfg), 4));
    kv(&mut r, "airy_radius_m", sci(airy_radius(&cfg), 4));
    kv(&mut r, "crossover_waist_m", sci(crossover_waist(&cfg), 4));
    kv(&mut r, "sigma_p_sq_re_m2", sci(sp.re, 4));
    kv(&mut r, "sigma_p_sq_im_m2", sci(sp.im, 4));
    kv(&mut r, "eta0_inv_sq_re_per_m2", sci(eta.re, 4));
    kv(&mut r, "eta0_inv_sq_im_per_m2", sci(eta.im, 4));
    kv(&mut r, "numerical_aperture", format!("{:.4}", cfg.numerical_aperture()));
    kv(&mut r, "pump", if cfg.pump() == PumpMode::Focused { "focused" } else { "unfocused" });
    let mut widths = [0.0; 3];
    for (w, inst) in widths.iter_mut().zip(Instrument::ALL) {
        *w = inst.fwhm(&cfg)?;
        kv(&mut r, &format!("fwhm_{}_m", inst.name()), sci(*w, 4));
    }
    let [wide, conf, twin] = widths;
    kv(&mut r, "reduction_confocal_vs_widefield_pct", format!("{:.2}", width_reduction(wide, conf)));
    kv(&mut r, "reduction_twin_vs_confocal_pct", format!("{:.2}", width_reduction(conf, twin)));
    kv(&mut r, "dip_threshold", opts.threshold);
    for inst in Instrument::ALL {
        let s = min_resolvable_separation(&cfg, inst, opts.threshold, q, 0.0, None)?;
        kv(&mut r, &format!("min_separation_{}_m", inst.name()), sci(s, 4));
    }
    Ok(Outcome {
        report: r,
        ..Outcome::default()
    })
}

/// Twin-photon curve at one pump waist.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinCurve {
    pub w0: f64,
    pub values: Vec<f64>,
    pub fwhm: f64,
    pub reduction_pct: f64,
}

/// Confocal and twin-photon PSFs on a common offset grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub offsets: Vec<f64>,
    pub confocal: Vec<f64>,
    pub confocal_fwhm: f64,
    pub twins: Vec<TwinCurve>,
}

pub fn comparison(cfg: &MicroscopeConfig, waists: &[f64]) -> crate::Result<Comparison> {
    let span = COMPARE_RANGE_AIRY_RADII * airy_radius(cfg);
    let offsets: Vec<f64> = (0..COMPARE_SAMPLES)
        .map(|i| span * i as f64 / (COMPARE_SAMPLES - 1) as f64)
        .collect();
    let confocal_fwhm = Instrument::Confocal.fwhm(cfg)?;
    let twins = waists
        .iter()
        .map(|&w0| {
            let c = cfg.with_waist(w0)?;
            let fwhm = Instrument::TwinPhoton.fwhm(&c)?;
            Ok(TwinCurve {
                w0,
                values: offsets.iter().map(|&y| psf_twin(y, &c)).collect(),
                fwhm,
                reduction_pct: width_reduction(confocal_fwhm, fwhm),
            })
        })
        .collect::<crate::Result<_>>()?;
    Ok(Comparison {
        confocal: offsets.iter().map(|&y| psf_confocal(y, cfg)).collect(),
        offsets,
        confocal_fwhm,
        twins,
    })
}

fn waist_label(w0: f64) -> String {
    let mm = w0 * 1e3;
    let s = format!("{mm:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("{s}mm")
}

fn reference_lines(r: &mut String, rows: impl Iterator<Item = (f64, f64)>) {
    let mut worst: Option<(f64, f64)> = None;
    for (w0, ours) in rows {
        if let Some(reference) = reference_reduction(w0) {
            let diff = ours - reference;
            let _ = writeln!(
                r,
                "w0={} computed_pct={ours:.2} reference_pct={reference:.1} difference_pts={diff:+.2}",
                waist_label(w0)
            );
            if worst.is_none_or(|(_, d)| diff.abs() > d.abs()) {
                worst = Some((w0, diff));
            }
        }
    }
    if let Some((w0, diff)) = worst.filter(|(_, d)| d.abs() > 1.0) {
        let _ = writeln!(
            r,
            "note: computed reductions use the pump factor exp(-y^2/r0^2) as defined; the reference \
             values grow faster with w0 (largest gap {diff:+.2} points at w0={}) and are reproduced \
             by exp(-4 y^2/r0^2), i.e. a pump spot of r0/2",
            waist_label(w0)
        );
    }
}

pub fn compare(run: &RunConfig, opts: &Options, waists: &[f64]) -> Result<Outcome, CliError> {
    let cfg = microscope(run, opts)?;
    let cmp = comparison(&cfg, waists)?;
    let mut r = String::new();
    kv(&mut r, "fwhm_confocal_m", sci(cmp.confocal_fwhm, 4));
    for t in &cmp.twins {
        let _ = writeln!(
            r,
            "w0={} fwhm_twin_m={} reduction_pct={:.2}",
            waist_label(t.w0),
            sci(t.fwhm, 4),
            t.reduction_pct
        );
    }
    reference_lines(&mut r, cmp.twins.iter().map(|t| (t.w0, t.reduction_pct)));

    let names: Vec<String> = cmp.twins.iter().map(|t| format!("twin_w0_{}", waist_label(t.w0))).collect();
    let mut header = vec!["y_m", "confocal"];
    header.extend(names.iter().map(String::as_str));
    let mut cols: Vec<&[f64]> = vec![&cmp.offsets, &cmp.confocal];
    cols.extend(cmp.twins.iter().map(|t| t.values.as_slice()));
    let csv = columns_csv(&header, &cols, run.output.precision);

    let mut series = vec![("confocal".to_string(), cmp.confocal.clone())];
    series.extend(
        cmp.twins
            .iter()
            .map(|t| (format!("twin w0={}", waist_label(t.w0)), t.values.clone())),
    );
    let svg = line_plot(&cmp.offsets, &series, "y (m)", "normalized PSF");
    Ok(Outcome {
        report: r,
        csv: Some(csv),
        svg: Some(svg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub w0: f64,
    pub r0: f64,
    pub fwhm_twin: f64,
    pub reduction_pct: f64,
}

/// Twin-photon width at `steps` evenly spaced waists from `w0_min` to `w0_max`.
pub fn sweep_rows(cfg: &MicroscopeConfig, w0_min: f64, w0_max: f64, steps: usize) -> crate::Result<Vec<SweepRow>> {
    if !(w0_min > 0.0 && w0_min < w0_max && w0_max <= cfg.a()) {
        return Err(Error::invalid("sweep", "need 0 < w0_min < w0_max <= a"));
    }
    if steps == 0 {
        return Err(Error::invalid("sweep", "steps must be at least 1"));
    }
    let conf = Instrument::Confocal.fwhm(cfg)?;
    (0..steps)
        .map(|i| {
            let w0 = if steps == 1 {
                w0_min
            } else {
                w0_min + (w0_max - w0_min) * i as f64 / (steps - 1) as f64
            };
            let c = cfg.with_waist(w0)?;
            let fwhm_twin = Instrument::TwinPhoton.fwhm(&c)?;
            Ok(SweepRow {
                w0,
                r0: r0(&c),
                fwhm_twin,
                reduction_pct: width_reduction(conf, fwhm_twin),
            })
        })
        .collect()
}

pub fn sweep(run: &RunConfig, opts: &Options, w0_min: f64, w0_max: f64, steps: usize) -> Result<Outcome, CliError> {
    let cfg = microscope(run, opts)?;
    let rows = sweep_rows(&cfg, w0_min, w0_max, steps)?;
    let mut r = String::new();
    let first = rows[0];
    let last = rows[rows.len() - 1];
    kv(&mut r, "crossover_waist_m", sci(crossover_waist(&cfg), 4));
    let _ = writeln!(r, "w0={} reduction_pct={:.2}", waist_label(first.w0), first.reduction_pct);
    let _ = writeln!(r, "w0={} reduction_pct={:.2}", waist_label(last.w0), last.reduction_pct);
    reference_lines(&mut r, rows.iter().map(|s| (s.w0, s.reduction_pct)));

    let col = |f: fn(&SweepRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let (w, r0s, fw, red) = (col(|s| s.w0), col(|s| s.r0), col(|s| s.fwhm_twin), col(|s| s.reduction_pct));
    let csv = columns_csv(
        &["w0_m", "r0_m", "fwhm_twin_m", "reduction_pct"],
        &[&w, &r0s, &fw, &red],
        run.output.precision,
    );
    let svg = line_plot(&w, &[("fwhm twin".to_string(), fw.clone())], "w0 (m)", "FWHM (m)");
    Ok(Outcome {
        report: r,
        csv: Some(csv),
        svg: Some(svg),
    })
}

/// Delay used for a coincidence scan: the configured one, or the middle of
/// the gate window.
fn scan_delay(run: &RunConfig, cfg: &MicroscopeConfig, disp: Option<&DispersionModel>, warnings: &mut Vec<String>) -> crate::Result<f64> {
    let Some(d) = disp else {
        return Ok(run.scan.t12.unwrap_or(0.0));
    };
    let crystal = d.for_config(cfg)?;
    let window = crystal.window();
    if crystal.delay_mismatch() <= 0.0 {
        warnings.push(format!(
            "inverse group velocity difference D = {} s/m is not positive; the coincidence window is empty",
            sci(crystal.delay_mismatch(), 4)
        ));
    }
    Ok(run.scan.t12.unwrap_or(0.5 * window))
}

/// Warnings are pushed to `warnings` as soon as they arise, so they survive a failed scan.
pub fn scan_command(run: &RunConfig, opts: &Options, warnings: &mut Vec<String>) -> Result<Outcome, CliError> {
    let cfg = microscope(run, opts)?;
    let instrument = opts.instrument.unwrap_or(run.scan.instrument);
    let plan = run.scan.plan(instrument)?;
    let sample = run.sample.load(&run.base_dir).map_err(CliError::Config)?;
    let disp = run.dispersion.as_ref().map(|d| d.build()).transpose()?;
    let t12 = scan_delay(run, &cfg, disp.as_ref(), warnings)?;
    let image = scan(&plan, &cfg, &sample, &run.quadrature, t12, disp.as_ref())?;

    let mut r = String::new();
    kv(&mut r, "instrument", instrument.name());
    kv(&mut r, "positions", image.values.len());
    kv(&mut r, "peak_value_raw", sci(image.peak_value_raw, 6));
    if disp.is_some() {
        kv(&mut r, "t12_s", sci(t12, 4));
    }
    let precision = run.output.precision;
    let (csv, svg) = match plan.geometry {
        ScanGeometry::Line { samples, .. } => {
            if matches!(sample, SampleTransmittance::TwoPoint { .. }) && samples % 2 == 1 {
                let c = dip_contrast(&image)?;
                kv(&mut r, "dip_contrast", format!("{c:.6}"));
                kv(&mut r, "resolved", c >= opts.threshold);
            }
            let t = plan.line_offsets().expect("line plan");
            let csv = columns_csv(&["y_m", "rate"], &[&t, &image.values], precision);
            let svg = line_plot(&t, &[(instrument.name().to_string(), image.values.clone())], "y (m)", "normalized rate");
            (csv, svg)
        }
        ScanGeometry::Grid {
            half_range_x,
            half_range_y,
            nx,
            ny,
        } => (
            grid_csv(&image.values, nx, ny, plan.pitch(), precision),
            heat_map(&image.values, nx, ny, (-half_range_x, half_range_x), (-half_range_y, half_range_y)),
        ),
    };
    Ok(Outcome {
        report: r,
        csv: Some(csv),
        svg: Some(svg),
    })
}
