//! Gauss-Legendre rules and the tensor-product integrators built on them.

use crate::geometry::{Rect, Vec2};
use num_complex::Complex64;
use std::f64::consts::PI;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Tricomi initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.mapped(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integral of `f` over `rect`, split into panels no wider than `max_panel`
/// with `rule` applied along each axis of every panel. Panels farther than
/// `cutoff` from `center` are skipped. Returns the integral together with
/// the integral of `|f|`.
pub fn integrate_rect<F>(
    rect: &Rect,
    max_panel: f64,
    rule: &GaussLegendre,
    center: Vec2,
    cutoff: f64,
    f: F,
) -> (Complex64, f64)
where
    F: Fn(Vec2) -> Complex64,
{
    let nx = ((rect.width() / max_panel).ceil() as usize).max(1);
    let ny = ((rect.height() / max_panel).ceil() as usize).max(1);
    let dx = rect.width() / nx as f64;
    let dy = rect.height() / ny as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for iy in 0..ny {
        let y0 = rect.y0 + iy as f64 * dy;
        let y1 = if iy + 1 == ny { rect.y1 } else { y0 + dy };
        for ix in 0..nx {
            let x0 = rect.x0 + ix as f64 * dx;
            let x1 = if ix + 1 == nx { rect.x1 } else { x0 + dx };
            let panel = Rect { x0, x1, y0, y1 };
            if panel.distance_to(center) > cutoff {
                continue;
            }
            for (y, wy) in rule.mapped(y0, y1) {
                for (x, wx) in rule.mapped(x0, x1) {
                    let v = f(Vec2::new(x, y));
                    let w = wx * wy;
                    total += v * w;
                    l1 += v.norm() * w;
                }
            }
        }
    }
    (total, l1)
}

/// Polar tensor rule over the disk of radius `radius` about the origin:
/// Gauss-Legendre on radial panels of width at most `max_panel` and an
/// `angular_nodes`-point trapezoid in angle.
pub fn integrate_disk<F>(
    radius: f64,
    max_panel: f64,
    rule: &GaussLegendre,
    angular_nodes: usize,
    f: F,
) -> (Complex64, f64)
where
    F: Fn(Vec2) -> Complex64,
{
    let panels = ((radius / max_panel).ceil() as usize).max(1);
    let dr = radius / panels as f64;
    let dphi = 2.0 * PI / angular_nodes as f64;
    let trig: Vec<(f64, f64)> = (0..angular_nodes)
        .map(|j| {
            let phi = j as f64 * dphi;
            (phi.cos(), phi.sin())
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0;
    for ip in 0..panels {
        let r0 = ip as f64 * dr;
        let r1 = if ip + 1 == panels { radius } else { r0 + dr };
        for (r, wr) in rule.mapped(r0, r1) {
            let w = wr * r * dphi;
            for &(c, s) in &trig {
                let v = f(Vec2::new(r * c, r * s));
                total += v * w;
                l1 += v.norm() * w;
            }
        }
    }
    (total, l1)
}
