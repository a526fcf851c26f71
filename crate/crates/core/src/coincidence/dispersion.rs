//! Thin-crystal dispersion: carrier wavenumbers, inverse group velocities,
//! walk-off, the longitudinal wavevector expansion and the coincidence gate.

use crate::error::{Error, Result};
use crate::optics::{MicroscopeConfig, SPEED_OF_LIGHT};
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

/// Relative frequency step of the group-velocity finite difference.
pub const OMEGA_REL_STEP: f64 = 1e-6;
/// Angular step of the walk-off finite difference, rad.
pub const PSI_STEP: f64 = 1e-6;

/// A refractive index as a function of angular frequency and of the angle
/// between the propagation direction and the optic axis. Ordinary indices
/// ignore the angle.
pub trait IndexModel: Send + Sync + fmt::Debug {
    fn index(&self, omega: f64, psi: f64) -> f64;
}

/// Index models expressible in a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexDescriptor {
    Constant(f64),
    /// `sum_k c_k omega^k`, coefficients in ascending powers of omega (rad/s).
    Polynomial(Vec<f64>),
}

impl IndexModel for IndexDescriptor {
    fn index(&self, omega: f64, _psi: f64) -> f64 {
        match self {
            IndexDescriptor::Constant(n) => *n,
            IndexDescriptor::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * omega + ck),
        }
    }
}

/// Adapts a closure `(omega, psi) -> n` into an [`IndexModel`].
pub struct IndexFn<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> IndexModel for IndexFn<F> {
    fn index(&self, omega: f64, psi: f64) -> f64 {
        (self.0)(omega, psi)
    }
}

impl<F> fmt::Debug for IndexFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("IndexFn(..)")
    }
}

fn eval_index(n: &dyn IndexModel, omega: f64, psi: f64) -> Result<f64> {
    let v = n.index(omega, psi);
    if !v.is_finite() {
        return Err(Error::domain(format!(
            "refractive index not evaluable at omega = {omega:e} rad/s, psi = {psi}"
        )));
    }
    if v < 1.0 {
        return Err(Error::domain(format!(
            "refractive index {v} < 1 at omega = {omega:e} rad/s"
        )));
    }
    Ok(v)
}

/// Carrier wavenumber `K = (omega / c) n(omega)`.
pub fn wavenumber_k(n: &dyn IndexModel, omega: f64, psi: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain("angular frequency must be positive"));
    }
    Ok(omega / SPEED_OF_LIGHT * eval_index(n, omega, psi)?)
}

/// Inverse group velocity `d/domega [omega n(omega) / c]` by a central
/// difference with relative step 1e-6 and one Richardson pass.
pub fn inv_group_velocity(n: &dyn IndexModel, omega: f64, psi: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::domain("angular frequency must be positive"));
    }
    let central = |h: f64| -> Result<f64> {
        let up = wavenumber_k(n, omega + h, psi)?;
        let down = wavenumber_k(n, omega - h, psi)?;
        Ok((up - down) / (2.0 * h))
    };
    let h = OMEGA_REL_STEP * omega;
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Walk-off parameter `N_e = (1/n_e) dn_e/dpsi` by a central difference
/// with step 1e-6 rad and one Richardson pass.
pub fn walkoff_ne(n_e: &dyn IndexModel, omega: f64, psi: f64) -> Result<f64> {
    if !(psi > 0.0 && psi < FRAC_PI_2) {
        return Err(Error::domain(format!("psi must lie in (0, pi/2), got {psi}")));
    }
    let central = |h: f64| -> Result<f64> {
        Ok((eval_index(n_e, omega, psi + h)? - eval_index(n_e, omega, psi - h)?) / (2.0 * h))
    };
    let slope = (4.0 * central(0.5 * PSI_STEP)? - central(PSI_STEP)?) / 3.0;
    Ok(slope / eval_index(n_e, omega, psi)?)
}

/// The crystal: index models, orientation and length.
#[derive(Debug, Clone)]
pub struct DispersionModel {
    pub n_o: Arc<dyn IndexModel>,
    pub n_e: Arc<dyn IndexModel>,
    /// Angle between the pump propagation axis and the optic axis, rad.
    pub psi: f64,
    /// Emission angle of the extraordinary beam, rad.
    pub theta_e: f64,
    /// Emission angle of the ordinary beam, rad (metadata).
    pub theta_o: f64,
    /// Crystal length, m.
    pub length: f64,
}

impl DispersionModel {
    pub fn new(
        n_o: Arc<dyn IndexModel>,
        n_e: Arc<dyn IndexModel>,
        psi: f64,
        theta_e: f64,
        theta_o: f64,
        length: f64,
    ) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid("DispersionModel", "crystal length must be positive"));
        }
        if !(psi > 0.0 && psi < FRAC_PI_2) {
            return Err(Error::invalid("DispersionModel", "psi must lie in (0, pi/2)"));
        }
        if !(theta_e.is_finite() && theta_o.is_finite()) {
            return Err(Error::invalid("DispersionModel", "emission angles must be finite"));
        }
        Ok(DispersionModel {
            n_o,
            n_e,
            psi,
            theta_e,
            theta_o,
            length,
        })
    }

    /// Evaluates every carrier quantity at the signal and idler frequencies.
    pub fn at_carriers(&self, omega_o: f64, omega_e: f64) -> Result<ThinCrystal> {
        Ok(ThinCrystal {
            k_o: wavenumber_k(self.n_o.as_ref(), omega_o, self.psi)?,
            k_e: wavenumber_k(self.n_e.as_ref(), omega_e, self.psi)?,
            inv_u_o: inv_group_velocity(self.n_o.as_ref(), omega_o, self.psi)?,
            inv_u_e: inv_group_velocity(self.n_e.as_ref(), omega_e, self.psi)?,
            n_walkoff: walkoff_ne(self.n_e.as_ref(), omega_e, self.psi)?,
            psi: self.psi,
            theta_e: self.theta_e,
            length: self.length,
        })
    }

    pub fn for_config(&self, cfg: &MicroscopeConfig) -> Result<ThinCrystal> {
        self.at_carriers(cfg.omega_o(), cfg.omega_e())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Ordinary,
    Extraordinary,
}

/// Carrier-frequency quantities of a crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinCrystal {
    pub k_o: f64,
    pub k_e: f64,
    pub inv_u_o: f64,
    pub inv_u_e: f64,
    pub n_walkoff: f64,
    pub psi: f64,
    pub theta_e: f64,
    pub length: f64,
}

impl ThinCrystal {
    /// Inverse group velocity mismatch `D = 1/u_o - 1/u_e`, s/m.
    pub fn delay_mismatch(&self) -> f64 {
        self.inv_u_o - self.inv_u_e
    }

    /// Upper edge `D L` of the coincidence window, s. Non-positive means the
    /// window is empty.
    pub fn window(&self) -> f64 {
        self.delay_mismatch() * self.length
    }

    /// 1 when `0 < t12 < D L`, else 0.
    pub fn gate(&self, t12: f64) -> f64 {
        if t12 > 0.0 && t12 < self.window() {
            1.0
        } else {
            0.0
        }
    }

    /// Longitudinal wavevector in the thin-crystal expansion, for detuning
    /// `nu` (rad/s) and transverse wavenumber magnitude `k_perp` (1/m).
    pub fn longitudinal_k(&self, branch: Branch, nu: f64, k_perp: f64) -> f64 {
        match branch {
            Branch::Ordinary => self.k_o + nu * self.inv_u_o - k_perp * k_perp / (2.0 * self.k_o),
            Branch::Extraordinary => {
                self.k_e + nu * self.inv_u_e - self.n_walkoff * k_perp * self.theta_e.cos()
                    + k_perp * k_perp / (2.0 * self.k_e)
                        * (self.n_walkoff / self.psi.tan() - 1.0)
            }
        }
    }
}

/// `k_z` of one branch at detuning `nu` and transverse wavenumber `k_perp`.
pub fn longitudinal_k(
    branch: Branch,
    disp: &DispersionModel,
    cfg: &MicroscopeConfig,
    nu: f64,
    k_perp: f64,
) -> Result<f64> {
    Ok(disp.for_config(cfg)?.longitudinal_k(branch, nu, k_perp))
}

/// The coincidence gate for arrival-time difference `t12`, seconds.
pub fn gate(t12: f64, disp: &DispersionModel, cfg: &MicroscopeConfig) -> Result<f64> {
    Ok(disp.for_config(cfg)?.gate(t12))
}
