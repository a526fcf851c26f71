//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub const C: f64 = 299_792_458.0;

/// `J1(x)` from 60 terms of its power series (accurate for |x| ≲ 12).
pub fn series_j1(x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h;
    let mut sum = term;
    for k in 1..60 {
        term *= -h * h / (k as f64 * (k + 1) as f64);
        sum += term;
    }
    sum
}

/// `J0(x)` from 60 terms of its power series.
pub fn series_j0(x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    let mut sum = term;
    for k in 1..60 {
        term *= -h * h / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

pub fn jinc(v: f64) -> f64 {
    if v.abs() < 1e-8 {
        1.0 - v * v / 8.0
    } else {
        2.0 * series_j1(v) / v
    }
}

/// Raw geometry for the oracles, in SI units.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub lambda_p: f64,
    pub lambda_o: f64,
    pub lambda_e: f64,
    pub a: f64,
    pub f: f64,
    pub f_p: f64,
    pub w0: f64,
    pub s0: f64,
    pub focused: bool,
}

impl Geometry {
    pub fn reference(w0: f64) -> Self {
        Geometry {
            lambda_p: 351e-9,
            lambda_o: 702e-9,
            lambda_e: 702e-9,
            a: 0.02,
            f: 0.02,
            f_p: 0.02,
            w0,
            s0: 0.02,
            focused: true,
        }
    }

    pub fn r0(&self) -> f64 {
        self.lambda_p * self.f_p / (2f64.sqrt() * PI * self.w0)
    }

    pub fn airy_radius(&self) -> f64 {
        1.22 * self.lambda_o * self.f / (2.0 * self.a)
    }

    /// `exp(-r²/(2 eta0²)) jinc(q_o r) jinc(q_e r)` with `1/eta0² = 1/r0² - 2 i w_p/(s0 c)`.
    pub fn kernel(&self, x: f64, y: f64) -> Complex64 {
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        let omega_p = 2.0 * PI * C / self.lambda_p;
        let inv_eta = Complex64::new(
            if self.focused { 1.0 / self.r0().powi(2) } else { 0.0 },
            -2.0 * omega_p / (self.s0 * C),
        );
        let qo = 2.0 * (2.0 * PI / self.lambda_o) * self.a / self.s0;
        let qe = 2.0 * (2.0 * PI / self.lambda_e) * self.a / self.s0;
        (-r2 * inv_eta / 2.0).exp() * jinc(qo * r) * jinc(qe * r)
    }

    pub fn psf_twin(&self, y: f64) -> f64 {
        self.kernel(y, 0.0).norm_sqr()
    }

    pub fn psf_confocal(&self, y: f64) -> f64 {
        jinc(2.0 * PI * self.a * y / (self.lambda_o * self.f)).powi(4)
    }

    pub fn psf_widefield(&self, y: f64) -> f64 {
        jinc(2.0 * PI * self.a * y / (self.lambda_o * self.f)).powi(2)
    }
}

/// Midpoint Riemann sum of `kernel(u - y)` over the square `[x0, x1] x [y0, y1]`
/// of unit transmittance, on an `n x n` grid.
pub fn riemann_amplitude(g: &Geometry, rect: (f64, f64, f64, f64), probe: (f64, f64), n: usize) -> Complex64 {
    let (x0, x1, y0, y1) = rect;
    let dx = (x1 - x0) / n as f64;
    let dy = (y1 - y0) / n as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let v = y0 + (j as f64 + 0.5) * dy - probe.1;
        let mut row = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let u = x0 + (i as f64 + 0.5) * dx - probe.0;
            row += g.kernel(u, v);
        }
        sum += row;
    }
    sum * dx * dy
}

/// Smallest `y` in `(0, hi)` with `f(y) = 0.5`, by a fine grid then bisection.
pub fn half_max_crossing(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let n = 20_000;
    let mut lo = 0.0;
    let mut up = hi;
    for i in 1..=n {
        let y = hi * i as f64 / n as f64;
        if f(y) < 0.5 {
            lo = hi * (i - 1) as f64 / n as f64;
            up = y;
            break;
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + up);
        if f(m) >= 0.5 {
            lo = m;
        } else {
            up = m;
        }
    }
    0.5 * (lo + up)
}

pub fn fwhm(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    2.0 * half_max_crossing(f, hi)
}
