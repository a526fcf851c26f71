//! Thin-sample transmittance `t(y)`.

use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};
use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A pixelated complex transmittance, zero outside its extent.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pitch: f64,
    nx: usize,
    ny: usize,
    /// Row-major, row `iy` covers `origin.y + [iy, iy+1) * pitch`.
    values: Vec<Complex64>,
    origin: Vec2,
}

impl Raster {
    /// A raster centred on the origin. `rows[iy][ix]`, `iy` increasing along +y.
    pub fn new(pitch: f64, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let ny = rows.len();
        let nx = rows.first().map_or(0, Vec::len);
        let origin = Vec2::new(-0.5 * nx as f64 * pitch, -0.5 * ny as f64 * pitch);
        Self::with_origin(pitch, rows, origin)
    }

    /// A raster whose lower-left corner sits at `origin`.
    pub fn with_origin(pitch: f64, rows: Vec<Vec<Complex64>>, origin: Vec2) -> Result<Self> {
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::invalid("Raster", "pixel pitch must be positive"));
        }
        let ny = rows.len();
        let nx = rows.first().map_or(0, Vec::len);
        if nx == 0 || rows.iter().any(|r| r.len() != nx) {
            return Err(Error::invalid("Raster", "rows must be non-empty and of equal length"));
        }
        let values: Vec<Complex64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !(v.norm() <= 1.0 + 1e-12)) {
            return Err(Error::invalid("Raster", "transmittance magnitude must not exceed 1"));
        }
        Ok(Raster {
            pitch,
            nx,
            ny,
            values,
            origin,
        })
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn origin(&self) -> Vec2 {
        self.origin
    }
    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.nx + ix]
    }

    /// The same raster moved by `shift`.
    pub fn translated(&self, shift: Vec2) -> Raster {
        Raster {
            origin: self.origin + shift,
            ..self.clone()
        }
    }

    fn extent(&self) -> Rect {
        Rect {
            x0: self.origin.x,
            x1: self.origin.x + self.nx as f64 * self.pitch,
            y0: self.origin.y,
            y1: self.origin.y + self.ny as f64 * self.pitch,
        }
    }
}

/// Sample kinds. Geometry is fixed in the sample frame; the scan offset
/// moves the instrument.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleTransmittance {
    /// Ideal point at the origin.
    Delta,
    /// Two ideal points at `(-s/2, 0)` and `(+s/2, 0)`.
    TwoPoint { separation: f64 },
    /// Square opening of side `width` centred on the origin.
    Slit { width: f64 },
    /// Transmitting stripes `|x - k period| < duty * period / 2`, unbounded in y.
    Grating { period: f64, duty: f64 },
    Raster(Raster),
}

/// Piecewise-constant building blocks of a transmittance.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Piece {
    Point(Vec2, Complex64),
    Cell(Rect, Complex64),
}

impl SampleTransmittance {
    pub fn validate(&self) -> Result<()> {
        match self {
            SampleTransmittance::Delta | SampleTransmittance::Raster(_) => Ok(()),
            SampleTransmittance::TwoPoint { separation } => {
                if separation.is_finite() && *separation >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("SampleTransmittance", "separation must be >= 0"))
                }
            }
            SampleTransmittance::Slit { width } => {
                if width.is_finite() && *width > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("SampleTransmittance", "slit width must be positive"))
                }
            }
            SampleTransmittance::Grating { period, duty } => {
                if !(period.is_finite() && *period > 0.0) {
                    return Err(Error::invalid("SampleTransmittance", "grating period must be positive"));
                }
                if !(*duty > 0.0 && *duty < 1.0) {
                    return Err(Error::invalid("SampleTransmittance", "grating duty must lie in (0, 1)"));
                }
                Ok(())
            }
        }
    }

    /// True for samples made only of ideal points.
    pub fn is_pointlike(&self) -> bool {
        matches!(
            self,
            SampleTransmittance::Delta | SampleTransmittance::TwoPoint { .. }
        )
    }

    /// `t(u)` for extended samples; ideal points have zero measure and
    /// evaluate to 0.
    pub fn value_at(&self, u: Vec2) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            SampleTransmittance::Delta | SampleTransmittance::TwoPoint { .. } => zero,
            SampleTransmittance::Slit { width } => {
                if u.x.abs() < 0.5 * width && u.y.abs() < 0.5 * width {
                    ONE
                } else {
                    zero
                }
            }
            SampleTransmittance::Grating { period, duty } => {
                let k = (u.x / period).round();
                if (u.x - k * period).abs() < 0.5 * duty * period {
                    ONE
                } else {
                    zero
                }
            }
            SampleTransmittance::Raster(r) => {
                let fx = ((u.x - r.origin.x) / r.pitch).floor();
                let fy = ((u.y - r.origin.y) / r.pitch).floor();
                if fx < 0.0 || fy < 0.0 || fx >= r.nx as f64 || fy >= r.ny as f64 {
                    zero
                } else {
                    r.get(fx as usize, fy as usize)
                }
            }
        }
    }

    /// Decomposes the transmittance into points and constant-valued cells.
    /// Cells are clipped to `window`; points are always returned.
    pub(crate) fn pieces(&self, window: &Rect) -> Vec<Piece> {
        match self {
            SampleTransmittance::Delta => vec![Piece::Point(Vec2::ZERO, ONE)],
            SampleTransmittance::TwoPoint { separation } => {
                let h = 0.5 * separation;
                vec![
                    Piece::Point(Vec2::new(-h, 0.0), ONE),
                    Piece::Point(Vec2::new(h, 0.0), ONE),
                ]
            }
            SampleTransmittance::Slit { width } => {
                let h = 0.5 * width;
                Rect::centered(Vec2::ZERO, h, h)
                    .intersect(window)
                    .map(|r| Piece::Cell(r, ONE))
                    .into_iter()
                    .collect()
            }
            SampleTransmittance::Grating { period, duty } => {
                let half = 0.5 * duty * period;
                let first = ((window.x0 - half) / period).floor() as i64;
                let last = ((window.x1 + half) / period).ceil() as i64;
                (first..=last)
                    .filter_map(|k| {
                        let c = k as f64 * period;
                        let stripe = Rect {
                            x0: c - half,
                            x1: c + half,
                            y0: window.y0,
                            y1: window.y1,
                        };
                        stripe.intersect(window).map(|r| Piece::Cell(r, ONE))
                    })
                    .collect()
            }
            SampleTransmittance::Raster(r) => {
                let Some(clip) = r.extent().intersect(window) else {
                    return Vec::new();
                };
                let iy0 = ((clip.y0 - r.origin.y) / r.pitch).floor().max(0.0) as usize;
                let iy1 = (((clip.y1 - r.origin.y) / r.pitch).ceil() as usize).min(r.ny);
                let ix0 = ((clip.x0 - r.origin.x) / r.pitch).floor().max(0.0) as usize;
                let ix1 = (((clip.x1 - r.origin.x) / r.pitch).ceil() as usize).min(r.nx);
                let mut out = Vec::new();
                for iy in iy0..iy1 {
                    let y0 = r.origin.y + iy as f64 * r.pitch;
                    let mut ix = ix0;
                    while ix < ix1 {
                        let v = r.get(ix, iy);
                        let start = ix;
                        while ix < ix1 && r.get(ix, iy) == v {
                            ix += 1;
                        }
                        if v.norm_sqr() == 0.0 {
                            continue;
                        }
                        let run = Rect {
                            x0: r.origin.x + start as f64 * r.pitch,
                            x1: r.origin.x + ix as f64 * r.pitch,
                            y0,
                            y1: y0 + r.pitch,
                        };
                        if let Some(c) = run.intersect(window) {
                            out.push(Piece::Cell(c, v));
                        }
                    }
                }
                out
            }
        }
    }
}
