mod common;

use common::{riemann_amplitude, Geometry};
use num_complex::Complex64;
use proptest::prelude::*;
use std::sync::Arc;
use twinfocal::coincidence::dispersion::{gate, inv_group_velocity, longitudinal_k, walkoff_ne, wavenumber_k};
use twinfocal::coincidence::*;
use twinfocal::optics::{airy_radius, MicroscopeConfig, PumpMode};
use twinfocal::psf::psf_twin;
use twinfocal::scansim::{scan, ScanPlan};
use twinfocal::{Instrument, Vec2};

const C: f64 = common::C;

fn cfg(w0: f64) -> MicroscopeConfig {
    MicroscopeConfig::reference().with_waist(w0).unwrap()
}

fn crystal(n_o: f64, n_e: f64, length: f64) -> DispersionModel {
    DispersionModel::new(
        Arc::new(IndexDescriptor::Constant(n_o)),
        Arc::new(IndexDescriptor::Constant(n_e)),
        0.5,
        0.05,
        0.05,
        length,
    )
    .unwrap()
}

#[test]
fn near_delta_slit_reproduces_twin_psf() {
    for w0 in [1e-3, 12e-3] {
        let c = cfg(w0);
        let r_airy = airy_radius(&c);
        let sample = SampleTransmittance::Slit { width: r_airy / 50.0 };
        let plan = ScanPlan::line(Instrument::TwinPhoton, Vec2::new(1.0, 0.0), 2.0 * r_airy, 81).unwrap();
        let img = scan(&plan, &c, &sample, &QuadratureSpec::default(), 0.0, None).unwrap();
        let worst = plan
            .line_offsets()
            .unwrap()
            .iter()
            .zip(&img.values)
            .map(|(t, v)| (v - psf_twin(t.abs(), &c)).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-3, "w0 = {w0}: deviation {worst}");
    }
}

#[test]
fn near_delta_raster_pixel_reproduces_twin_psf() {
    let c = cfg(8e-3);
    let r_airy = airy_radius(&c);
    let pixel = Raster::new(r_airy / 60.0, vec![vec![Complex64::new(1.0, 0.0)]]).unwrap();
    let sample = SampleTransmittance::Raster(pixel);
    let plan = ScanPlan::line(Instrument::TwinPhoton, Vec2::new(0.6, 0.8), 2.0 * r_airy, 41).unwrap();
    let img = scan(&plan, &c, &sample, &QuadratureSpec::default(), 0.0, None).unwrap();
    for (t, v) in plan.line_offsets().unwrap().iter().zip(&img.values) {
        assert!((v - psf_twin(t.abs(), &c)).abs() <= 1e-3);
    }
}

#[test]
fn slit_amplitude_matches_riemann_oracle() {
    let c = cfg(1e-3);
    let g = Geometry::reference(1e-3);
    let width = 0.1e-6;
    let sample = SampleTransmittance::Slit { width };
    let h = 0.5 * width;
    let probes = [(0.0, 0.0), (40e-9, 0.0), (80e-9, 30e-9), (120e-9, 0.0), (0.0, -60e-9)];
    for p in probes {
        let ours = amplitude(Vec2::new(p.0, p.1), &c, &sample, &QuadratureSpec::default()).unwrap();
        let oracle = riemann_amplitude(&g, (-h, h, -h, h), p, 2048);
        let rel = (ours - oracle).norm() / oracle.norm();
        assert!(rel <= 1e-3, "probe {p:?}: {ours} vs {oracle} ({rel:e})");
    }
}

#[test]
fn slit_rate_ratio_matches_riemann_oracle() {
    let c = cfg(1e-3);
    let g = Geometry::reference(1e-3);
    let sample = SampleTransmittance::Slit { width: 0.1e-6 };
    let q = QuadratureSpec::default();
    let at0 = coincidence_rate(Vec2::ZERO, &c, &sample, &q, 0.0, None).unwrap();
    let at2 = coincidence_rate(Vec2::new(0.2e-6, 0.0), &c, &sample, &q, 0.0, None).unwrap();
    assert!(at0 > 0.0);
    let rect = (-0.05e-6, 0.05e-6, -0.05e-6, 0.05e-6);
    let o0 = riemann_amplitude(&g, rect, (0.0, 0.0), 2048).norm_sqr();
    let o2 = riemann_amplitude(&g, rect, (0.2e-6, 0.0), 2048).norm_sqr();
    assert!(((at2 / at0) / (o2 / o0) - 1.0).abs() <= 1e-3);
}

#[test]
fn two_points_add_coherently() {
    let c = cfg(8e-3);
    let g = Geometry::reference(8e-3);
    let s = 0.2e-6;
    let sample = SampleTransmittance::TwoPoint { separation: s };
    for y in [0.0, 0.05e-6, 0.13e-6] {
        let a = amplitude(Vec2::new(y, 0.0), &c, &sample, &QuadratureSpec::default()).unwrap();
        let oracle = g.kernel(-0.5 * s - y, 0.0) + g.kernel(0.5 * s - y, 0.0);
        assert!((a - oracle).norm() <= 1e-12 * oracle.norm());
    }
}

#[test]
fn doubling_nodes_converges_for_every_sample_kind() {
    let c = cfg(1e-3);
    let pitch = 40e-9;
    let rows: Vec<Vec<Complex64>> = (0..12)
        .map(|j| (0..12).map(|i| Complex64::from_polar(((i + j) % 3) as f64 / 2.0, 0.3 * i as f64)).collect())
        .collect();
    let samples = [
        SampleTransmittance::TwoPoint { separation: 0.2e-6 },
        SampleTransmittance::Slit { width: 0.1e-6 },
        SampleTransmittance::Grating { period: 0.5e-6, duty: 0.5 },
        SampleTransmittance::Raster(Raster::new(pitch, rows).unwrap()),
    ];
    let base = QuadratureSpec::default();
    let doubled = QuadratureSpec {
        radial_nodes: 2 * base.radial_nodes,
        angular_nodes: 2 * base.angular_nodes,
        ..base
    };
    for s in &samples {
        let y = Vec2::new(30e-9, -20e-9);
        let a = amplitude(y, &c, s, &base).unwrap();
        let b = amplitude(y, &c, s, &doubled).unwrap();
        assert!((a - b).norm() <= base.target_rel_tol * b.norm(), "{s:?}: {a} vs {b}");
    }
}

#[test]
fn polar_rule_agrees_with_cells_for_smooth_transmittance() {
    let c = cfg(12e-3);
    let q = QuadratureSpec::default();
    let t = |u: Vec2| Complex64::new((-u.norm_sq() / (0.3e-6f64).powi(2)).exp(), 0.0);
    let y = Vec2::new(0.1e-6, 0.0);
    let polar = amplitude_with(y, &c, t, &q).unwrap();
    let g = Geometry::reference(12e-3);
    let n = 1024;
    let half = 1.2e-6;
    let d = 2.0 * half / n as f64;
    let mut oracle = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            let u = Vec2::new(-half + (i as f64 + 0.5) * d, -half + (j as f64 + 0.5) * d);
            let r = u - y;
            oracle += g.kernel(r.x, r.y) * t(u);
        }
    }
    oracle *= d * d;
    assert!((polar - oracle).norm() <= 1e-4 * oracle.norm(), "{polar} vs {oracle}");
}

#[test]
fn slit_symmetry_under_reflection() {
    let c = cfg(8e-3);
    let s = SampleTransmittance::Slit { width: 0.15e-6 };
    let q = QuadratureSpec::default();
    let a = amplitude(Vec2::new(70e-9, 20e-9), &c, &s, &q).unwrap();
    let b = amplitude(Vec2::new(-70e-9, -20e-9), &c, &s, &q).unwrap();
    assert!((a - b).norm() <= 1e-9 * a.norm());
}

#[test]
fn delta_rate_is_closed_form() {
    let c = cfg(1e-3);
    let q = QuadratureSpec::default();
    let y = Vec2::new(0.1e-6, 0.05e-6);
    assert_eq!(
        coincidence_rate(y, &c, &SampleTransmittance::Delta, &q, 0.0, None).unwrap(),
        psf_twin(y.norm(), &c)
    );
}

#[test]
fn gate_zero_outside_window() {
    let c = cfg(1e-3);
    let disp = crystal(1.66, 1.55, 1e-3);
    let window = (1.66 - 1.55) / C * 1e-3;
    let s = SampleTransmittance::Slit { width: 0.1e-6 };
    let q = QuadratureSpec::default();
    let y = Vec2::new(50e-9, 0.0);
    let open = coincidence_rate(y, &c, &s, &q, 0.3 * window, Some(&disp)).unwrap();
    assert_eq!(open, amplitude(y, &c, &s, &q).unwrap().norm_sqr());
    for t in [-1e-15, 0.0, window * 1.0001, 0.5e-12] {
        assert_eq!(coincidence_rate(y, &c, &s, &q, t, Some(&disp)).unwrap(), 0.0);
    }
}

#[test]
fn reversed_ordering_closes_gate() {
    let c = cfg(1e-3);
    let disp = crystal(1.55, 1.66, 1e-3);
    let t = disp.for_config(&c).unwrap();
    assert!(t.delay_mismatch() < 0.0);
    for t12 in [-1e-13, 1e-15, 1e-13] {
        assert_eq!(t.gate(t12), 0.0);
    }
}

#[test]
fn unfocused_pump_widens_kernel() {
    let c = cfg(1e-3);
    let wide = c.with_pump(PumpMode::Unfocused);
    let s = SampleTransmittance::Slit { width: 0.3e-6 };
    let q = QuadratureSpec::default();
    let y = Vec2::new(0.2e-6, 0.0);
    let focused = amplitude(y, &c, &s, &q).unwrap().norm();
    let loose = amplitude(y, &wide, &s, &q).unwrap().norm();
    assert!(focused != loose);
}

#[test]
fn dispersion_linear_model_oracles() {
    let alpha = 1e-17;
    let n = IndexDescriptor::Polynomial(vec![1.5, alpha]);
    let omega = 2.684e15;
    let k = wavenumber_k(&n, omega, 0.5).unwrap();
    assert!((k / (omega / C * (1.5 + alpha * omega)) - 1.0).abs() < 1e-14);
    let inv_u = inv_group_velocity(&n, omega, 0.5).unwrap();
    assert!((inv_u / ((1.5 + 2.0 * alpha * omega) / C) - 1.0).abs() < 1e-9);
    let toy = IndexFn(|_w: f64, psi: f64| 1.5 + 0.1 * psi.sin());
    let ne = walkoff_ne(&toy, omega, std::f64::consts::FRAC_PI_4).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((ne - 0.1 * h / (1.5 + 0.1 * h)).abs() < 1e-9);
    assert!((ne - 0.04501).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gate_is_binary_and_idempotent(t12 in -1e-12f64..1e-12, n_e in 1.0f64..2.0) {
        let c = MicroscopeConfig::reference();
        let disp = crystal(1.6, n_e, 2e-3);
        let g = gate(t12, &disp, &c).unwrap();
        prop_assert!(g == 0.0 || g == 1.0);
        let rate = psf_twin(1e-7, &c);
        prop_assert_eq!(g * g * rate, g * rate);
        let window = disp.for_config(&c).unwrap().window();
        prop_assert_eq!(g == 1.0, t12 > 0.0 && t12 < window);
    }

    #[test]
    fn longitudinal_k_is_carrier_at_origin(n_o in 1.0f64..2.5, n_e in 1.0f64..2.5, psi in 0.05f64..1.5) {
        let c = MicroscopeConfig::reference();
        let disp = DispersionModel::new(
            Arc::new(IndexDescriptor::Constant(n_o)),
            Arc::new(IndexFn(move |_w: f64, p: f64| n_e + 0.01 * p.sin())),
            psi, 0.05, 0.05, 1e-3,
        ).unwrap();
        let t = disp.for_config(&c).unwrap();
        prop_assert_eq!(longitudinal_k(Branch::Ordinary, &disp, &c, 0.0, 0.0).unwrap(), t.k_o);
        prop_assert_eq!(longitudinal_k(Branch::Extraordinary, &disp, &c, 0.0, 0.0).unwrap(), t.k_e);
    }

    #[test]
    fn group_velocity_matches_linear_oracle(base in 1.0f64..2.0, alpha in -2e-17f64..2e-17, omega in 1e15f64..5e15) {
        let n = IndexDescriptor::Polynomial(vec![base + 0.1, alpha]);
        let got = inv_group_velocity(&n, omega, 0.5).unwrap();
        let want = (base + 0.1 + 2.0 * alpha * omega) / C;
        prop_assert!((got / want - 1.0).abs() < 1e-9);
    }

    #[test]
    fn raster_translation_covariance(
        cells in prop::collection::vec(0.0f64..1.0, 16),
        shift_x in -2i32..=2,
        shift_y in -2i32..=2,
        probe_x in -80e-9f64..80e-9,
        probe_y in -80e-9f64..80e-9,
    ) {
        let c = cfg(12e-3);
        let pitch = 30e-9;
        let rows: Vec<Vec<Complex64>> = cells.chunks(4).map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect()).collect();
        let raster = Raster::new(pitch, rows).unwrap();
        let shift = Vec2::new(shift_x as f64 * pitch, shift_y as f64 * pitch);
        let q = QuadratureSpec::default();
        let y = Vec2::new(probe_x, probe_y);
        let a = coincidence_rate(y, &c, &SampleTransmittance::Raster(raster.clone()), &q, 0.0, None).unwrap();
        let b = coincidence_rate(y + shift, &c, &SampleTransmittance::Raster(raster.translated(shift)), &q, 0.0, None).unwrap();
        let scale = a.abs().max(b.abs()).max(1e-300);
        prop_assert!((a - b).abs() <= 1e-6 * scale, "{} vs {}", a, b);
    }
}
