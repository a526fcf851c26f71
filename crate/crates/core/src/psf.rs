//! Closed-form lateral point-spread functions and width metrics.
//!
//! Every PSF here is peak-normalized analytically: the value at `y = 0` is
//! exactly 1 and no renormalization pass is applied.

use crate::error::{Error, Result};
use crate::optics::{airy_radius, effective_r0_sq, MicroscopeConfig};
use crate::quadrature::GaussLegendre;
use crate::specfun::{j0, jinc};
use std::f64::consts::PI;
use std::fmt;

/// Number of grid points used to bracket the half-maximum crossing.
pub const FWHM_BRACKET_POINTS: usize = 4096;
/// Relative tolerance of the bisection that refines the crossing.
pub const FWHM_REL_TOL: f64 = 1e-8;
/// FWHM searches scan `[0, FWHM_RANGE_AIRY_RADII * R_airy]` by default.
pub const FWHM_RANGE_AIRY_RADII: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instrument {
    Widefield,
    Confocal,
    TwinPhoton,
}

impl Instrument {
    pub const ALL: [Instrument; 3] = [
        Instrument::Widefield,
        Instrument::Confocal,
        Instrument::TwinPhoton,
    ];

    pub fn psf(self, y: f64, cfg: &MicroscopeConfig) -> f64 {
        match self {
            Instrument::Widefield => psf_widefield(y, cfg),
            Instrument::Confocal => psf_confocal(y, cfg),
            Instrument::TwinPhoton => psf_twin(y, cfg),
        }
    }

    /// FWHM of this instrument's PSF over the default scan range.
    pub fn fwhm(self, cfg: &MicroscopeConfig) -> Result<f64> {
        fwhm_of(|y| self.psf(y, cfg), default_fwhm_range(cfg))
    }

    pub fn name(self) -> &'static str {
        match self {
            Instrument::Widefield => "widefield",
            Instrument::Confocal => "confocal",
            Instrument::TwinPhoton => "twin",
        }
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Instrument {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "widefield" | "wf" => Ok(Instrument::Widefield),
            "confocal" => Ok(Instrument::Confocal),
            "twin" | "twinphoton" | "twin_photon" | "twin-photon" => Ok(Instrument::TwinPhoton),
            other => Err(Error::invalid("Instrument", format!("unknown instrument {other:?}"))),
        }
    }
}

pub fn default_fwhm_range(cfg: &MicroscopeConfig) -> f64 {
    FWHM_RANGE_AIRY_RADII * airy_radius(cfg)
}

/// Objective pupil.
#[derive(Debug, Clone, PartialEq)]
pub enum Pupil {
    /// Uniform circular aperture of the given radius.
    HardCircular { radius: f64 },
    /// Radial samples `(radius, amplitude)`, linearly interpolated and zero
    /// beyond the last radius.
    TabulatedRadial { radii: Vec<f64>, amplitudes: Vec<f64> },
}

impl Pupil {
    pub fn validate(&self) -> Result<()> {
        match self {
            Pupil::HardCircular { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::invalid("Pupil", "aperture radius must be positive"));
                }
            }
            Pupil::TabulatedRadial { radii, amplitudes } => {
                if radii.len() != amplitudes.len() {
                    return Err(Error::invalid("Pupil", "radii and amplitudes differ in length"));
                }
                if radii.len() < 8 {
                    return Err(Error::invalid("Pupil", "at least 8 radial samples are required"));
                }
                if radii[0] != 0.0 {
                    return Err(Error::invalid("Pupil", "radial samples must start at 0"));
                }
                if radii.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("Pupil", "radii must be strictly increasing"));
                }
                if amplitudes.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(Error::invalid("Pupil", "amplitudes must lie in [0, 1]"));
                }
                if amplitudes.iter().all(|&a| a == 0.0) {
                    return Err(Error::invalid("Pupil", "pupil is opaque everywhere"));
                }
            }
        }
        Ok(())
    }
}

/// Radial Fourier transform of the pupil at angular spatial frequency `q`
/// (1/m), normalized so that `pupil_ft(p, 0) = 1`.
pub fn pupil_ft(p: &Pupil, q: f64) -> Result<f64> {
    if !(q.is_finite() && q >= 0.0) {
        return Err(Error::domain(format!("spatial frequency must be finite and >= 0, got {q}")));
    }
    p.validate()?;
    match p {
        Pupil::HardCircular { radius } => Ok(jinc(q * radius)),
        Pupil::TabulatedRadial { radii, amplitudes } => {
            let rule = GaussLegendre::new(8);
            let hankel = |q: f64| -> f64 {
                radii
                    .windows(2)
                    .zip(amplitudes.windows(2))
                    .map(|(r, a)| {
                        let slope = (a[1] - a[0]) / (r[1] - r[0]);
                        rule.integrate(r[0], r[1], |rho| {
                            (a[0] + slope * (rho - r[0])) * j0(q * rho) * rho
                        })
                    })
                    .sum()
            };
            Ok(hankel(q) / hankel(0.0))
        }
    }
}

// (2 pi / lambda) a / distance: the Airy argument per unit offset.
fn airy_coeff(lambda: f64, a: f64, distance: f64) -> f64 {
    (2.0 * PI / lambda) * a / distance
}

/// Widefield PSF `p~^2(k y / f)`, `k = 2 pi / lambda_o`.
pub fn psf_widefield(y: f64, cfg: &MicroscopeConfig) -> f64 {
    let amp = jinc(airy_coeff(cfg.lambda_o(), cfg.a(), cfg.f()) * y);
    amp * amp
}

/// Confocal PSF `p~^4(k y / f)`.
pub fn psf_confocal(y: f64, cfg: &MicroscopeConfig) -> f64 {
    let amp = jinc(airy_coeff(cfg.lambda_o(), cfg.a(), cfg.f()) * y);
    let sq = amp * amp;
    sq * sq
}

/// Twin-photon PSF
/// `p~^2(2 Omega_o y / (s0 c)) p~^2(2 Omega_e y / (s0 c)) exp(-y^2 / r0^2)`.
pub fn psf_twin(y: f64, cfg: &MicroscopeConfig) -> f64 {
    let qo = 2.0 * airy_coeff(cfg.lambda_o(), cfg.a(), cfg.s0());
    let qe = 2.0 * airy_coeff(cfg.lambda_e(), cfg.a(), cfg.s0());
    let ao = jinc(qo * y);
    let ae = if qe == qo { ao } else { jinc(qe * y) };
    let v = (ao * ao) * (ae * ae);
    match effective_r0_sq(cfg) {
        Some(r0_sq) => v * (-y * y / r0_sq).exp(),
        None => v,
    }
}

/// A sampled, peak-normalized radial intensity profile.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    offsets: Vec<f64>,
    intensity: Vec<f64>,
    label: String,
}

impl RadialProfile {
    pub fn new(offsets: Vec<f64>, intensity: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if offsets.len() != intensity.len() || offsets.len() < 2 {
            return Err(Error::invalid(
                "RadialProfile",
                "offsets and intensity must have equal length >= 2",
            ));
        }
        if offsets[0] != 0.0 || offsets.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "RadialProfile",
                "offsets must increase strictly from 0",
            ));
        }
        if intensity[0] != 1.0 {
            return Err(Error::invalid("RadialProfile", "intensity must be 1 at y = 0"));
        }
        if intensity.iter().any(|v| !(v.is_finite() && *v >= 0.0 && *v <= 1.0)) {
            return Err(Error::invalid("RadialProfile", "intensities must lie in [0, 1]"));
        }
        Ok(RadialProfile {
            offsets,
            intensity,
            label: label.into(),
        })
    }

    /// Samples `f` on `n` evenly spaced offsets over `[0, range]`.
    pub fn sample(
        label: impl Into<String>,
        range: f64,
        n: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let offsets: Vec<f64> = (0..n)
            .map(|i| range * i as f64 / (n - 1) as f64)
            .collect();
        let intensity = offsets.iter().map(|&y| f(y)).collect();
        Self::new(offsets, intensity, label)
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// FWHM of the linearly interpolated profile (first crossing from the peak).
    pub fn fwhm(&self) -> Result<f64> {
        let i = self
            .intensity
            .iter()
            .position(|&v| v < 0.5)
            .ok_or_else(|| never_crosses(*self.offsets.last().unwrap()))?;
        let (y0, y1) = (self.offsets[i - 1], self.offsets[i]);
        let (v0, v1) = (self.intensity[i - 1], self.intensity[i]);
        Ok(2.0 * (y0 + (v0 - 0.5) / (v0 - v1) * (y1 - y0)))
    }
}

fn never_crosses(range: f64) -> Error {
    Error::range(format!(
        "intensity never falls below one half within [0, {range:e}] m; widen the scan range"
    ))
}

/// FWHM of a peak-normalized intensity `f` scanned over `[0, range]`:
/// twice the smallest positive offset where `f` falls to one half.
pub fn fwhm_of(f: impl Fn(f64) -> f64, range: f64) -> Result<f64> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::domain("FWHM scan range must be positive"));
    }
    let n = FWHM_BRACKET_POINTS;
    let mut prev = 0.0;
    for i in 1..n {
        let y = range * i as f64 / (n - 1) as f64;
        if f(y) < 0.5 {
            let (mut lo, mut hi) = (prev, y);
            while hi - lo > FWHM_REL_TOL * hi {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.5 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(lo + hi);
        }
        prev = y;
    }
    Err(never_crosses(range))
}

/// Percentage by which `narrower` is smaller than `reference`.
pub fn width_reduction(reference: f64, narrower: f64) -> f64 {
    100.0 * (1.0 - narrower / reference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{MicroscopeParams, PumpMode};
    use crate::specfun::airy_amp;

    fn reference() -> MicroscopeConfig {
        MicroscopeConfig::reference()
    }

    #[test]
    fn pupil_ft_hard_disk() {
        let p = Pupil::HardCircular { radius: 0.02 };
        assert_eq!(pupil_ft(&p, 0.0).unwrap(), 1.0);
        assert!(pupil_ft(&p, 3.83171 / 0.02).unwrap().abs() < 1e-5);
        assert!(pupil_ft(&p, -1.0).is_err());
        assert!(pupil_ft(&Pupil::HardCircular { radius: 0.0 }, 1.0).is_err());
    }

    #[test]
    fn pupil_ft_tabulated_matches_closed_form() {
        let a = 0.02;
        let n = 512;
        let radii: Vec<f64> = (0..n).map(|i| a * i as f64 / (n - 1) as f64).collect();
        let p = Pupil::TabulatedRadial {
            amplitudes: vec![1.0; n],
            radii,
        };
        let q = 1.61634 / a;
        let got = pupil_ft(&p, q).unwrap();
        assert!((got - airy_amp(1.61634).unwrap()).abs() < 1e-3);
        assert_eq!(pupil_ft(&p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn tabulated_pupil_validation() {
        let bad = Pupil::TabulatedRadial {
            radii: vec![0.0, 1.0, 2.0],
            amplitudes: vec![1.0; 3],
        };
        assert!(bad.validate().is_err());
        let unsorted = Pupil::TabulatedRadial {
            radii: vec![0.0, 1.0, 2.0, 3.0, 2.5, 5.0, 6.0, 7.0],
            amplitudes: vec![1.0; 8],
        };
        assert!(unsorted.validate().is_err());
        let bright = Pupil::TabulatedRadial {
            radii: (0..8).map(f64::from).collect(),
            amplitudes: vec![1.5; 8],
        };
        assert!(bright.validate().is_err());
    }

    #[test]
    fn widefield_zero_and_fwhm() {
        let cfg = reference();
        assert_eq!(psf_widefield(0.0, &cfg), 1.0);
        let r_airy = airy_radius(&cfg);
        assert!(psf_widefield(r_airy, &cfg) < 1e-4);
        // analytic half-max point v = 1.61634 of the squared Airy amplitude
        let oracle = 2.0 * 1.616_339_948 * 702e-9 * 0.02 / (2.0 * PI * 0.02);
        let fw = Instrument::Widefield.fwhm(&cfg).unwrap();
        assert!(((fw - oracle) / oracle).abs() < 1e-7, "{fw} vs {oracle}");
        assert!((fw - 0.361e-6).abs() < 0.0005e-6);
    }

    #[test]
    fn confocal_fwhm() {
        let cfg = reference();
        assert_eq!(psf_confocal(0.0, &cfg), 1.0);
        // half-max of the fourth power at v = 1.160286
        let oracle = 2.0 * 1.160_286_000_8 * 702e-9 / (2.0 * PI);
        let fc = Instrument::Confocal.fwhm(&cfg).unwrap();
        assert!(((fc - oracle) / oracle).abs() < 1e-7);
        assert!((fc - 0.259e-6).abs() < 0.001e-6);
        let fw = Instrument::Widefield.fwhm(&cfg).unwrap();
        assert!((fc / fw - 0.72).abs() < 0.01);
        assert!((width_reduction(fw, fc) - 28.0).abs() < 0.5);
    }

    #[test]
    fn argument_doubling_identity_is_exact() {
        let cfg = reference().with_pump(PumpMode::Unfocused);
        for i in 0..500 {
            let y = i as f64 * 3e-9;
            assert_eq!(psf_twin(y, &cfg), psf_confocal(2.0 * y, &cfg), "y={y}");
        }
        let ft = Instrument::TwinPhoton.fwhm(&cfg).unwrap();
        let fc = Instrument::Confocal.fwhm(&cfg).unwrap();
        assert!((ft / fc - 0.5).abs() < 1e-7);
    }

    #[test]
    fn gaussian_fwhm_closed_form() {
        let r0 = 0.3e-6;
        let fw = fwhm_of(|y| (-y * y / (r0 * r0)).exp(), 2e-6).unwrap();
        let exact = 2.0 * r0 * 2f64.ln().sqrt();
        assert!(((fw - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn fwhm_needs_a_crossing() {
        assert!(matches!(fwhm_of(|_| 1.0, 1.0), Err(Error::Range(_))));
        let p = RadialProfile::new(vec![0.0, 1.0], vec![1.0, 0.9], "flat").unwrap();
        assert!(matches!(p.fwhm(), Err(Error::Range(_))));
    }

    #[test]
    fn sampled_profile_fwhm() {
        let cfg = reference();
        let range = default_fwhm_range(&cfg);
        let p = RadialProfile::sample("confocal", range, 8193, |y| psf_confocal(y, &cfg)).unwrap();
        let exact = Instrument::Confocal.fwhm(&cfg).unwrap();
        assert!(((p.fwhm().unwrap() - exact) / exact).abs() < 1e-5);
        assert_eq!(p.label(), "confocal");
        assert!(RadialProfile::new(vec![0.0, 1.0], vec![0.5, 0.2], "x").is_err());
    }

    #[test]
    fn width_reduction_examples() {
        assert!((width_reduction(0.260, 0.130) - 50.0).abs() < 1e-12);
        assert_eq!(width_reduction(0.3, 0.3), 0.0);
        assert!((width_reduction(0.361, 0.260) - 28.0).abs() < 0.5);
    }

    #[test]
    fn twin_narrows_with_waist() {
        let cfg = reference();
        let mut last = f64::INFINITY;
        let mut widths = Vec::new();
        for w in [1e-3, 2e-3, 4e-3, 8e-3, 12e-3, 16e-3, 20e-3] {
            let fw = Instrument::TwinPhoton.fwhm(&cfg.with_waist(w).unwrap()).unwrap();
            assert!(fw <= last);
            last = fw;
            widths.push(fw);
        }
        assert!((widths[0] - widths[1]).abs() / widths[0] < 0.01);
        let w8 = Instrument::TwinPhoton.fwhm(&cfg.with_waist(8e-3).unwrap()).unwrap();
        let w1 = Instrument::TwinPhoton.fwhm(&cfg).unwrap();
        assert!(w8 < w1);
    }

    #[test]
    fn gaussian_factor_only_narrows() {
        let focused = reference().with_waist(8e-3).unwrap();
        let open = focused.with_pump(PumpMode::Unfocused);
        for i in 1..200 {
            let y = i as f64 * 5e-9;
            assert!(psf_twin(y, &focused) <= psf_twin(y, &open));
            for inst in Instrument::ALL {
                assert!(inst.psf(y, &focused) <= 1.0);
            }
        }
        for inst in Instrument::ALL {
            assert_eq!(inst.psf(0.0, &focused), 1.0);
        }
    }

    #[test]
    fn non_degenerate_twin_peaks_at_one() {
        let cfg = MicroscopeParams {
            lambda_o: 600e-9,
            lambda_e: 1.0 / (1.0 / 351e-9 - 1.0 / 600e-9),
            ..MicroscopeParams::default()
        }
        .build()
        .unwrap();
        assert_eq!(psf_twin(0.0, &cfg), 1.0);
        assert!(psf_twin(1e-7, &cfg) < 1.0);
    }
}
