//! Instrument configuration and the derived pump-focus quantities.
//!
//! All lengths are in metres, frequencies in rad/s. The surrounding medium
//! has unit refractive index.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative tolerance of the energy-conservation and imaging checks.
const CONSISTENCY_TOL: f64 = 1e-9;

/// Distance from the objective to the pinhole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImageDistance {
    Finite(f64),
    /// Pinhole effectively at infinity; the imaging-condition check is skipped.
    Collimated,
}

/// Whether the pump-focus Gaussian `exp(-y^2/r0^2)` enters the PSF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PumpMode {
    #[default]
    Focused,
    /// Replaces the pump Gaussian by 1 (the `r0 -> infinity` limit).
    Unfocused,
}

/// Raw, unvalidated instrument parameters.
///
/// `Default` is the reference geometry: 351 nm pump, degenerate 702 nm
/// signal and idler, `a = f = f_p = 2 cm`, `w0 = 1 mm`, `d = f_p`, `s0 = f`
/// with a collimated detection arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroscopeParams {
    /// Pump wavelength.
    pub lambda_p: f64,
    /// Signal (ordinary) wavelength.
    pub lambda_o: f64,
    /// Idler (extraordinary) wavelength.
    pub lambda_e: f64,
    /// Lens aperture radius.
    pub a: f64,
    /// Objective focal length.
    pub f: f64,
    /// Pump-lens focal length.
    pub f_p: f64,
    /// Pump waist radius before the pump lens.
    pub w0: f64,
    /// Crystal face to objective.
    pub s0: f64,
    /// Objective to pinhole.
    pub s1: ImageDistance,
    /// Pump waist to pump lens.
    pub d: f64,
    pub pump: PumpMode,
}

impl Default for MicroscopeParams {
    fn default() -> Self {
        let lambda_p = 351e-9;
        MicroscopeParams {
            lambda_p,
            lambda_o: 2.0 * lambda_p,
            lambda_e: 2.0 * lambda_p,
            a: 0.02,
            f: 0.02,
            f_p: 0.02,
            w0: 1e-3,
            s0: 0.02,
            s1: ImageDistance::Collimated,
            d: 0.02,
            pump: PumpMode::Focused,
        }
    }
}

impl MicroscopeParams {
    pub fn build(self) -> Result<MicroscopeConfig> {
        MicroscopeConfig::new(self)
    }
}

/// A validated, immutable instrument description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroscopeConfig {
    p: MicroscopeParams,
}

impl MicroscopeConfig {
    pub fn new(p: MicroscopeParams) -> Result<Self> {
        let lengths = [
            ("lambda_p", p.lambda_p),
            ("lambda_o", p.lambda_o),
            ("lambda_e", p.lambda_e),
            ("a", p.a),
            ("f", p.f),
            ("f_p", p.f_p),
            ("w0", p.w0),
            ("s0", p.s0),
            ("d", p.d),
        ];
        for (name, v) in lengths {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    "MicroscopeConfig",
                    format!("{name} must be a positive length, got {v}"),
                ));
            }
        }
        if p.w0 > p.a {
            return Err(Error::invalid(
                "MicroscopeConfig",
                format!("pump waist w0 = {} exceeds the lens radius a = {}", p.w0, p.a),
            ));
        }
        let mismatch = 1.0 / p.lambda_o + 1.0 / p.lambda_e - 1.0 / p.lambda_p;
        if mismatch.abs() > CONSISTENCY_TOL / p.lambda_p {
            return Err(Error::invalid(
                "MicroscopeConfig",
                "signal and idler frequencies do not sum to the pump frequency",
            ));
        }
        if let ImageDistance::Finite(s1) = p.s1 {
            if !(s1.is_finite() && s1 > 0.0) {
                return Err(Error::invalid(
                    "MicroscopeConfig",
                    format!("s1 must be a positive length, got {s1}"),
                ));
            }
            let lens = 1.0 / p.s0 + 1.0 / s1 - 1.0 / p.f;
            if lens.abs() > CONSISTENCY_TOL / p.f {
                return Err(Error::invalid(
                    "MicroscopeConfig",
                    "s0 and s1 violate the imaging condition 1/s0 + 1/s1 = 1/f",
                ));
            }
        }
        Ok(MicroscopeConfig { p })
    }

    /// The reference geometry (see [`MicroscopeParams::default`]).
    pub fn reference() -> Self {
        MicroscopeConfig {
            p: MicroscopeParams::default(),
        }
    }

    pub fn params(&self) -> MicroscopeParams {
        self.p
    }

    pub fn with_waist(&self, w0: f64) -> Result<Self> {
        MicroscopeParams { w0, ..self.p }.build()
    }

    pub fn with_pump(&self, pump: PumpMode) -> Self {
        MicroscopeConfig {
            p: MicroscopeParams { pump, ..self.p },
        }
    }

    pub fn lambda_p(&self) -> f64 {
        self.p.lambda_p
    }
    pub fn lambda_o(&self) -> f64 {
        self.p.lambda_o
    }
    pub fn lambda_e(&self) -> f64 {
        self.p.lambda_e
    }
    pub fn a(&self) -> f64 {
        self.p.a
    }
    pub fn f(&self) -> f64 {
        self.p.f
    }
    pub fn f_p(&self) -> f64 {
        self.p.f_p
    }
    pub fn w0(&self) -> f64 {
        self.p.w0
    }
    pub fn s0(&self) -> f64 {
        self.p.s0
    }
    pub fn s1(&self) -> ImageDistance {
        self.p.s1
    }
    pub fn d(&self) -> f64 {
        self.p.d
    }
    pub fn pump(&self) -> PumpMode {
        self.p.pump
    }

    /// Pump angular frequency `2 pi c / lambda_p`.
    pub fn omega_p(&self) -> f64 {
        angular_frequency(self.p.lambda_p)
    }
    pub fn omega_o(&self) -> f64 {
        angular_frequency(self.p.lambda_o)
    }
    pub fn omega_e(&self) -> f64 {
        angular_frequency(self.p.lambda_e)
    }

    /// `sin(arctan(a/f))`. Metadata only; no formula uses it.
    pub fn numerical_aperture(&self) -> f64 {
        (self.p.a / self.p.f).atan().sin()
    }
}

pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / wavelength
}

/// The pump-focus quantities bundled together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpFocus {
    pub sigma_p_sq: Complex64,
    pub r0: f64,
    pub eta0_inv_sq: Complex64,
}

impl PumpFocus {
    pub fn of(cfg: &MicroscopeConfig) -> Self {
        PumpFocus {
            sigma_p_sq: sigma_p_sq(cfg),
            r0: r0(cfg),
            eta0_inv_sq: eta0_inv_sq(cfg),
        }
    }
}

// (c / omega_p) * (lambda_p / (pi w0^2)) * f_p^2, shared by sigma_p^2 and r0^2
fn focus_area(cfg: &MicroscopeConfig) -> f64 {
    let p = &cfg.p;
    (SPEED_OF_LIGHT / cfg.omega_p()) * (p.lambda_p / (PI * p.w0 * p.w0)) * p.f_p * p.f_p
}

/// Complex pump-beam parameter `sigma_p^2 = (c/omega_p) [d - f_p - i (lambda_p / (pi w0^2)) f_p^2]`.
pub fn sigma_p_sq(cfg: &MicroscopeConfig) -> Complex64 {
    let p = &cfg.p;
    let re = (SPEED_OF_LIGHT / cfg.omega_p()) * (p.d - p.f_p);
    Complex64::new(re, -focus_area(cfg))
}

/// Focused pump spot radius `r0 = lambda_p f_p / (sqrt(2) pi w0)`.
pub fn r0(cfg: &MicroscopeConfig) -> f64 {
    let r = focus_area(cfg).sqrt();
    let p = &cfg.p;
    let direct = p.lambda_p * p.f_p / (SQRT_2 * PI * p.w0);
    debug_assert!(
        ((r - direct) / direct).abs() <= 1e-12,
        "r0 routes disagree: {r} vs {direct}"
    );
    r
}

/// `r0^2`, or `None` when the pump Gaussian is switched off.
pub(crate) fn effective_r0_sq(cfg: &MicroscopeConfig) -> Option<f64> {
    match cfg.pump() {
        PumpMode::Focused => Some(focus_area(cfg)),
        PumpMode::Unfocused => None,
    }
}

/// `1/eta0^2 = 1/r0^2 - 2 i omega_p / (s0 c)`.
pub fn eta0_inv_sq(cfg: &MicroscopeConfig) -> Complex64 {
    Complex64::new(
        1.0 / focus_area(cfg),
        -2.0 * cfg.omega_p() / (cfg.p.s0 * SPEED_OF_LIGHT),
    )
}

/// Radius of the first dark ring, `1.22 lambda_o f / (2 a)`.
pub fn airy_radius(cfg: &MicroscopeConfig) -> f64 {
    1.22 * cfg.p.lambda_o * cfg.p.f / (2.0 * cfg.p.a)
}

/// Pump waist that focuses to a spot of radius `spot`: inverts `r0(w0)`.
pub fn waist_for_spot(lambda_p: f64, f_p: f64, spot: f64) -> f64 {
    lambda_p * f_p / (SQRT_2 * PI * spot)
}

/// Waist at which `r0` equals the Airy radius.
pub fn crossover_waist(cfg: &MicroscopeConfig) -> f64 {
    waist_for_spot(cfg.p.lambda_p, cfg.p.f_p, airy_radius(cfg))
}
