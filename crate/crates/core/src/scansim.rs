//! Virtual scanning microscope: line and grid scans, two-point resolution.
//!
//! The sample stays fixed and the instrument moves; a scan position `y` is the
//! offset of the instrument axis in the sample frame.

use crate::coincidence::{gate_factor, DispersionModel, Imager, QuadratureSpec, SampleTransmittance};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::optics::MicroscopeConfig;
use crate::psf::{psf_twin, Instrument};
use rayon::prelude::*;

/// Smallest number of positions along a scanned axis.
pub const MIN_SAMPLES: usize = 16;
/// Dip-contrast threshold used when none is given.
pub const DEFAULT_DIP_THRESHOLD: f64 = 0.05;
/// Positions in each two-point line scan of [`min_resolvable_separation`].
pub const RESOLUTION_SCAN_SAMPLES: usize = 801;
/// Relative bracket width at which the separation search stops.
pub const RESOLUTION_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanGeometry {
    /// `samples` positions `t * direction`, `t` evenly spaced on
    /// `[-half_range, half_range]`.
    Line {
        direction: Vec2,
        half_range: f64,
        samples: usize,
    },
    /// `nx * ny` positions on a centred rectangle, row-major with x fastest.
    Grid {
        half_range_x: f64,
        half_range_y: f64,
        nx: usize,
        ny: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPlan {
    pub geometry: ScanGeometry,
    pub instrument: Instrument,
}

// Evenly spaced, exactly antisymmetric about the centre.
fn axis(half_range: f64, n: usize) -> impl Iterator<Item = f64> {
    let span = (n - 1) as f64;
    (0..n).map(move |i| half_range * (2.0 * i as f64 - span) / span)
}

impl ScanPlan {
    pub fn line(instrument: Instrument, direction: Vec2, half_range: f64, samples: usize) -> Result<Self> {
        let plan = ScanPlan {
            geometry: ScanGeometry::Line {
                direction,
                half_range,
                samples,
            },
            instrument,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn grid(instrument: Instrument, half_range_x: f64, half_range_y: f64, nx: usize, ny: usize) -> Result<Self> {
        let plan = ScanPlan {
            geometry: ScanGeometry::Grid {
                half_range_x,
                half_range_y,
                nx,
                ny,
            },
            instrument,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match self.geometry {
            ScanGeometry::Line {
                direction,
                half_range,
                samples,
            } => {
                if (direction.norm() - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("ScanPlan", "line direction must be a unit vector"));
                }
                if !positive(half_range) {
                    return Err(Error::invalid("ScanPlan", "half range must be positive"));
                }
                if samples < MIN_SAMPLES {
                    return Err(Error::invalid("ScanPlan", format!("need at least {MIN_SAMPLES} samples")));
                }
            }
            ScanGeometry::Grid {
                half_range_x,
                half_range_y,
                nx,
                ny,
            } => {
                if !positive(half_range_x) || !positive(half_range_y) {
                    return Err(Error::invalid("ScanPlan", "half ranges must be positive"));
                }
                if nx < MIN_SAMPLES || ny < MIN_SAMPLES {
                    return Err(Error::invalid("ScanPlan", format!("need at least {MIN_SAMPLES} samples per axis")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match self.geometry {
            ScanGeometry::Line { samples, .. } => samples,
            ScanGeometry::Grid { nx, ny, .. } => nx * ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Signed offsets along the line, or `None` for grids.
    pub fn line_offsets(&self) -> Option<Vec<f64>> {
        match self.geometry {
            ScanGeometry::Line {
                half_range, samples, ..
            } => Some(axis(half_range, samples).collect()),
            ScanGeometry::Grid { .. } => None,
        }
    }

    /// Scan positions in index order.
    pub fn positions(&self) -> Vec<Vec2> {
        match self.geometry {
            ScanGeometry::Line {
                direction,
                half_range,
                samples,
            } => axis(half_range, samples).map(|t| direction * t).collect(),
            ScanGeometry::Grid {
                half_range_x,
                half_range_y,
                nx,
                ny,
            } => {
                let xs: Vec<f64> = axis(half_range_x, nx).collect();
                axis(half_range_y, ny)
                    .flat_map(|y| xs.iter().map(move |&x| Vec2::new(x, y)))
                    .collect()
            }
        }
    }

    /// Grid spacing `(pitch_x, pitch_y)`; a line reports its step twice.
    pub fn pitch(&self) -> (f64, f64) {
        match self.geometry {
            ScanGeometry::Line {
                half_range, samples, ..
            } => {
                let p = 2.0 * half_range / (samples - 1) as f64;
                (p, p)
            }
            ScanGeometry::Grid {
                half_range_x,
                half_range_y,
                nx,
                ny,
            } => (
                2.0 * half_range_x / (nx - 1) as f64,
                2.0 * half_range_y / (ny - 1) as f64,
            ),
        }
    }
}

/// A peak-normalized scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanImage {
    pub plan: ScanPlan,
    /// Normalized rate in plan index order; the maximum is exactly 1.
    pub values: Vec<f64>,
    /// Largest rate before normalization.
    pub peak_value_raw: f64,
}

impl ScanImage {
    pub fn positions(&self) -> Vec<Vec2> {
        self.plan.positions()
    }
}

/// Scans `sample` with `plan.instrument`. Coincidence scans apply the gate at
/// delay `t12`; widefield and confocal images are incoherent, `|t|²`
/// convolved with the intensity PSF.
pub fn scan(
    plan: &ScanPlan,
    cfg: &MicroscopeConfig,
    sample: &SampleTransmittance,
    quad: &QuadratureSpec,
    t12: f64,
    disp: Option<&DispersionModel>,
) -> Result<ScanImage> {
    plan.validate()?;
    sample.validate()?;
    let positions = plan.positions();
    let gate = match plan.instrument {
        Instrument::TwinPhoton => gate_factor(t12, disp, cfg)?,
        _ => 1.0,
    };
    if gate == 0.0 {
        return Err(Error::range(
            "coincidence gate is closed at this delay; every scan value would be zero",
        ));
    }
    let raw: Vec<f64> = match (plan.instrument, sample) {
        (Instrument::TwinPhoton, SampleTransmittance::Delta) => positions
            .par_iter()
            .map(|y| psf_twin(y.norm(), cfg))
            .collect(),
        (instrument, _) => {
            let imager = Imager::new(cfg, instrument, quad)?;
            let coherent = instrument == Instrument::TwinPhoton;
            positions
                .par_iter()
                .map(|&y| {
                    let v = imager.evaluate(y, sample)?;
                    Ok(if coherent { v.norm_sqr() } else { v.re })
                })
                .collect::<Result<_>>()?
        }
    };
    let peak = raw.iter().copied().fold(0.0, f64::max);
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::range("scan rate vanishes everywhere; nothing to normalize"));
    }
    Ok(ScanImage {
        plan: *plan,
        values: raw.iter().map(|v| (v / peak).max(0.0)).collect(),
        peak_value_raw: peak,
    })
}

/// `1 - I_mid / I_peak` of a line scan, clamped at 0. The plan must have a
/// sample at the centre, so `samples` must be odd.
pub fn dip_contrast(image: &ScanImage) -> Result<f64> {
    let ScanGeometry::Line { samples, .. } = image.plan.geometry else {
        return Err(Error::invalid("dip_contrast", "needs a line scan"));
    };
    if samples % 2 == 0 {
        return Err(Error::invalid(
            "dip_contrast",
            "line scan has no sample at its centre (use an odd sample count)",
        ));
    }
    let peak = image.values.iter().copied().fold(0.0, f64::max);
    let mid = image.values[samples / 2];
    Ok((1.0 - mid / peak).max(0.0))
}

/// Dip contrast of two unit points `separation` apart, scanned along their axis.
pub fn two_point_contrast(
    separation: f64,
    cfg: &MicroscopeConfig,
    instrument: Instrument,
    quad: &QuadratureSpec,
    t12: f64,
    disp: Option<&DispersionModel>,
) -> Result<f64> {
    let width = instrument.fwhm(cfg)?;
    let plan = ScanPlan::line(
        instrument,
        Vec2::new(1.0, 0.0),
        0.5 * separation + 2.0 * width,
        RESOLUTION_SCAN_SAMPLES,
    )?;
    let image = scan(&plan, cfg, &SampleTransmittance::TwoPoint { separation }, quad, t12, disp)?;
    dip_contrast(&image)
}

/// Smallest two-point separation whose dip contrast reaches `threshold`,
/// by bisection over `[FWHM/10, 4 FWHM]`.
pub fn min_resolvable_separation(
    cfg: &MicroscopeConfig,
    instrument: Instrument,
    threshold: f64,
    quad: &QuadratureSpec,
    t12: f64,
    disp: Option<&DispersionModel>,
) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::invalid("min_resolvable_separation", "threshold must lie in (0, 1)"));
    }
    let width = instrument.fwhm(cfg)?;
    let contrast = |s: f64| two_point_contrast(s, cfg, instrument, quad, t12, disp);
    let (mut lo, mut hi) = (0.1 * width, 4.0 * width);
    if contrast(lo)? >= threshold || contrast(hi)? < threshold {
        return Err(Error::range(format!(
            "dip contrast does not cross {threshold} between {lo:e} m and {hi:e} m"
        )));
    }
    while hi - lo > RESOLUTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if contrast(mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
