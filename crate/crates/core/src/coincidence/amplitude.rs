//! The coincidence amplitude
//!
//! ```text
//! A(y) = ∫ d²r exp(-r²/(2 eta0²)) t(r + y) p~(2 w_o r/(s0 c)) p~(2 w_e r/(s0 c))
//! ```
//!
//! and the incoherent images of the reference instruments. Overall constants
//! are dropped; callers normalize per scan.
//!
//! Piecewise-constant samples are integrated cell by cell: each cell is cut
//! into panels no wider than half the shortest local oscillation period of
//! the kernel, and a tensor Gauss-Legendre rule is applied on every panel.
//! Each integral is evaluated with `n` and `2n` nodes per axis; the `2n`
//! value is returned and the difference is the convergence diagnostic.
//! Smooth user-supplied transmittances go through the polar tensor rule in
//! [`amplitude_with`].

use super::dispersion::DispersionModel;
use super::sample::{Piece, SampleTransmittance};
use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::optics::{airy_radius, effective_r0_sq, MicroscopeConfig, SPEED_OF_LIGHT};
use crate::psf::{psf_confocal, psf_twin, psf_widefield, Instrument};
use crate::quadrature::{integrate_disk, integrate_rect, GaussLegendre};
use crate::specfun::jinc;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Truncation radius, in Airy radii, when no pump Gaussian bounds the kernel.
pub const TRUNCATION_AIRY_RADII: f64 = 24.0;

/// Integration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per panel axis (radial nodes per panel for the
    /// polar rule).
    pub radial_nodes: usize,
    /// Trapezoid nodes in angle (polar rule only).
    pub angular_nodes: usize,
    /// Integration radius around the kernel centre; `None` picks it from the
    /// pump focus.
    pub truncation_radius: Option<f64>,
    pub target_rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_nodes: 8,
            angular_nodes: 64,
            truncation_radius: None,
            target_rel_tol: 1e-8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_nodes < 8 || self.angular_nodes < 8 {
            return Err(Error::invalid("QuadratureSpec", "node counts must be at least 8"));
        }
        if let Some(r) = self.truncation_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::invalid("QuadratureSpec", "truncation radius must be positive"));
            }
        }
        if !(self.target_rel_tol.is_finite() && self.target_rel_tol > 0.0) {
            return Err(Error::invalid("QuadratureSpec", "target_rel_tol must be positive"));
        }
        Ok(())
    }

    /// Integration radius for `instrument` under `cfg`.
    ///
    /// With a focused pump the twin kernel carries `exp(-r²/(2 r0²))`, which
    /// falls to `target_rel_tol` at `r0 sqrt(2 ln(1/tol))`; the radius never
    /// exceeds `TRUNCATION_AIRY_RADII` Airy radii.
    pub fn radius_for(&self, cfg: &MicroscopeConfig, instrument: Instrument) -> f64 {
        if let Some(r) = self.truncation_radius {
            return r;
        }
        let cap = TRUNCATION_AIRY_RADII * airy_radius(cfg);
        match (instrument, effective_r0_sq(cfg)) {
            (Instrument::TwinPhoton, Some(r0_sq)) => {
                let gauss = (2.0 * r0_sq * (1.0 / self.target_rel_tol).ln()).sqrt();
                gauss.min(cap)
            }
            _ => cap,
        }
    }
}

/// `exp(-r²/(2 eta0²)) p~_o p~_e` as a function of the in-sample offset `r`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TwinKernel {
    gauss: f64,
    chirp: f64,
    q_o: f64,
    q_e: f64,
}

impl TwinKernel {
    pub(crate) fn new(cfg: &MicroscopeConfig) -> Self {
        let q = |lambda: f64| 2.0 * ((2.0 * PI / lambda) * cfg.a() / cfg.s0());
        TwinKernel {
            gauss: effective_r0_sq(cfg).map_or(0.0, |r0_sq| 0.5 / r0_sq),
            // -Im(1/eta0²)/2 = omega_p / (s0 c)
            chirp: cfg.omega_p() / (cfg.s0() * SPEED_OF_LIGHT),
            q_o: q(cfg.lambda_o()),
            q_e: q(cfg.lambda_e()),
        }
    }

    #[inline]
    pub(crate) fn eval(&self, r: Vec2) -> Complex64 {
        let r2 = r.norm_sq();
        let rho = r2.sqrt();
        let ao = jinc(self.q_o * rho);
        let ae = if self.q_e == self.q_o { ao } else { jinc(self.q_e * rho) };
        let mag = (-self.gauss * r2).exp() * ao * ae;
        Complex64::from_polar(mag, self.chirp * r2)
    }

    /// Highest local angular frequency of the kernel within `radius`.
    fn bandwidth(&self, radius: f64) -> f64 {
        self.q_o + self.q_e + 2.0 * self.chirp * radius * std::f64::consts::SQRT_2
    }
}

/// What is integrated against the sample.
#[derive(Debug, Clone, Copy)]
enum Mode {
    /// Coherent amplitude, `sum t * ∫ G`.
    Twin(TwinKernel),
    /// Incoherent intensity, `sum |t|² * ∫ PSF`.
    Intensity(Instrument),
}

/// A reusable integrator for one instrument, configuration and rule.
#[derive(Debug, Clone)]
pub(crate) struct Imager {
    cfg: MicroscopeConfig,
    mode: Mode,
    radius: f64,
    panel: f64,
    coarse: GaussLegendre,
    fine: GaussLegendre,
    tol: f64,
}

impl Imager {
    pub(crate) fn new(
        cfg: &MicroscopeConfig,
        instrument: Instrument,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        let radius = quad.radius_for(cfg, instrument);
        let detection = (2.0 * PI / cfg.lambda_o()) * cfg.a() / cfg.f();
        let (mode, bandwidth) = match instrument {
            Instrument::TwinPhoton => {
                let k = TwinKernel::new(cfg);
                (Mode::Twin(k), k.bandwidth(radius))
            }
            Instrument::Widefield => (Mode::Intensity(instrument), 2.0 * detection),
            Instrument::Confocal => (Mode::Intensity(instrument), 4.0 * detection),
        };
        Ok(Imager {
            cfg: *cfg,
            mode,
            radius,
            panel: PI / bandwidth,
            coarse: GaussLegendre::new(quad.radial_nodes),
            fine: GaussLegendre::new(2 * quad.radial_nodes),
            tol: quad.target_rel_tol,
        })
    }

    #[inline]
    fn kernel(&self, r: Vec2) -> Complex64 {
        match self.mode {
            Mode::Twin(k) => k.eval(r),
            Mode::Intensity(Instrument::Widefield) => Complex64::new(psf_widefield(r.norm(), &self.cfg), 0.0),
            Mode::Intensity(_) => Complex64::new(psf_confocal(r.norm(), &self.cfg), 0.0),
        }
    }

    fn weight(&self, t: Complex64) -> Complex64 {
        match self.mode {
            Mode::Twin(_) => t,
            Mode::Intensity(_) => Complex64::new(t.norm_sqr(), 0.0),
        }
    }

    /// Twin mode: the amplitude `A(y)`. Intensity modes: the image value
    /// (real part).
    pub(crate) fn evaluate(&self, y: Vec2, sample: &SampleTransmittance) -> Result<Complex64> {
        let window = Rect::centered(y, self.radius, self.radius);
        let mut coarse = Complex64::new(0.0, 0.0);
        let mut fine = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for piece in sample.pieces(&window) {
            match piece {
                Piece::Point(p, t) => {
                    let v = self.weight(t) * self.kernel(p - y);
                    coarse += v;
                    fine += v;
                    scale += v.norm();
                }
                Piece::Cell(rect, t) => {
                    let w = self.weight(t);
                    let f = |u: Vec2| self.kernel(u - y);
                    let (lo, _) = integrate_rect(&rect, self.panel, &self.coarse, y, self.radius, f);
                    let (hi, l1) = integrate_rect(&rect, self.panel, &self.fine, y, self.radius, f);
                    coarse += w * lo;
                    fine += w * hi;
                    scale += w.norm() * l1;
                }
            }
        }
        let change = (fine - coarse).norm();
        if change > 10.0 * self.tol * scale {
            return Err(Error::Numerical {
                message: "amplitude quadrature did not converge under node doubling".into(),
                diagnostics: format!(
                    "y = ({:e}, {:e}) m, |A_2n - A_n| = {change:e}, scale = {scale:e}, \
                     panel = {:e} m, radius = {:e} m",
                    y.x, y.y, self.panel, self.radius
                ),
            });
        }
        Ok(fine)
    }
}

/// Coincidence amplitude at scan offset `y` (unnormalized).
pub fn amplitude(
    y: Vec2,
    cfg: &MicroscopeConfig,
    sample: &SampleTransmittance,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    sample.validate()?;
    Imager::new(cfg, Instrument::TwinPhoton, quad)?.evaluate(y, sample)
}

/// Coincidence amplitude for a smooth transmittance `t`, by the polar tensor
/// rule centred on the kernel.
pub fn amplitude_with<T>(
    y: Vec2,
    cfg: &MicroscopeConfig,
    t: T,
    quad: &QuadratureSpec,
) -> Result<Complex64>
where
    T: Fn(Vec2) -> Complex64,
{
    quad.validate()?;
    let kernel = TwinKernel::new(cfg);
    let radius = quad.radius_for(cfg, Instrument::TwinPhoton);
    let panel = PI / kernel.bandwidth(radius);
    let f = |r: Vec2| kernel.eval(r) * t(r + y);
    let coarse_rule = GaussLegendre::new(quad.radial_nodes);
    let fine_rule = GaussLegendre::new(2 * quad.radial_nodes);
    let (coarse, _) = integrate_disk(radius, panel, &coarse_rule, quad.angular_nodes, f);
    let (fine, scale) = integrate_disk(radius, panel, &fine_rule, 2 * quad.angular_nodes, f);
    let change = (fine - coarse).norm();
    if change > 10.0 * quad.target_rel_tol * scale {
        return Err(Error::Numerical {
            message: "polar quadrature did not converge under node doubling".into(),
            diagnostics: format!(
                "y = ({:e}, {:e}) m, |A_2n - A_n| = {change:e}, scale = {scale:e}",
                y.x, y.y
            ),
        });
    }
    Ok(fine)
}

/// Gate factor; an absent crystal model leaves the gate open.
pub(crate) fn gate_factor(
    t12: f64,
    disp: Option<&DispersionModel>,
    cfg: &MicroscopeConfig,
) -> Result<f64> {
    match disp {
        Some(d) => Ok(d.for_config(cfg)?.gate(t12)),
        None => Ok(1.0),
    }
}

/// Coincidence rate `gate(t12) |A(y)|²`. An ideal point sample uses the
/// closed form `psf_twin(|y|)`.
pub fn coincidence_rate(
    y: Vec2,
    cfg: &MicroscopeConfig,
    sample: &SampleTransmittance,
    quad: &QuadratureSpec,
    t12: f64,
    disp: Option<&DispersionModel>,
) -> Result<f64> {
    let g = gate_factor(t12, disp, cfg)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    if let SampleTransmittance::Delta = sample {
        return Ok(g * psf_twin(y.norm(), cfg));
    }
    Ok(g * amplitude(y, cfg, sample, quad)?.norm_sqr())
}
