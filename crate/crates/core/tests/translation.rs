mod common;

use common::*;
use proptest::prelude::*;
use willmore_core::flow::{run, FlowParams, Sample};
use willmore_core::grid::GridAtlas;
use willmore_core::translation::*;

fn round_trip_error(atlas: &GridAtlas, frame: TranslationFrame, mu: [f64; 2], u: &[f64]) -> f64 {
    let tt = TruncatedTranslation::new(frame, mu).unwrap();
    let there = apply_theta(atlas, &tt, u, Interpolation::Lagrange).unwrap();
    let back = apply_theta_inverse(atlas, &tt, &there, Interpolation::Lagrange).unwrap();
    sup_diff(&back, u)
}

#[test]
fn torus_round_trip_error_is_fourth_order() {
    // the flat cutoff has steep high derivatives, so the asymptotic regime starts late
    let errs: Vec<f64> = [256, 512]
        .iter()
        .map(|&n| {
            let atlas = torus_atlas(2.0, 1.0, n);
            let u = atlas.sample(|_, uv| (uv[0] + 2.0 * uv[1]).sin() + 0.5 * (3.0 * uv[1]).cos());
            let frame = TranslationFrame::new(&atlas, 0, [2.0, 3.0], 0.7).unwrap();
            round_trip_error(&atlas, frame, [0.6 * frame.r_max(), 0.5 * frame.r_max()], &u)
        })
        .collect();
    assert!(errs[1] > 0.0 && order(errs[0], errs[1], 2.0) >= 3.5, "{errs:?}");
}

#[test]
fn sphere_round_trip_error_is_fourth_order() {
    let errs: Vec<f64> = [128, 256]
        .iter()
        .map(|&n| {
            let atlas = sphere_atlas(n);
            let u = atlas.sample(|id, uv| {
                let p = atlas.surface.chart(id).map.position(uv);
                (2.0 * p[0]).sin() * p[1] + p[2] * p[2]
            });
            let frame = TranslationFrame::new(&atlas, 1, [0.2, -0.1], 0.35).unwrap();
            round_trip_error(&atlas, frame, [0.7 * frame.r_max(), 0.0], &u)
        })
        .collect();
    assert!(order(errs[0], errs[1], 255.0 / 127.0) >= 3.5, "{errs:?}");
}

#[test]
fn round_trip_error_scales_with_shift() {
    let atlas = torus_atlas(2.0, 1.0, 32);
    let u = atlas.sample(|_, uv| (uv[0] + 2.0 * uv[1]).sin());
    let frame = TranslationFrame::new(&atlas, 0, [2.0, 3.0], 0.5).unwrap();
    let r = frame.r_max();
    let small = round_trip_error(&atlas, frame, [0.1 * r, 0.0], &u);
    let large = round_trip_error(&atlas, frame, [0.8 * r, 0.0], &u);
    assert!(small < large);
}

fn flow_series() -> (GridAtlas, TimeSeries) {
    let atlas = torus_atlas(2.0, 1.0, 24);
    let rho0 = atlas.sample(|_, uv| 0.05 * uv[1].cos());
    let traj = run(&atlas, &rho0, &FlowParams { dt0: 5e-3, t_end: 0.1, adaptive: false, ..Default::default() });
    let series = TimeSeries::new(traj.samples).unwrap();
    (atlas, series)
}

#[test]
fn commutator_vanishes_on_flow_without_spatial_shift() {
    let (atlas, series) = flow_series();
    let frame = TranslationFrame::new(&atlas, 0, [1.0, 1.0], 0.4).unwrap();
    let time = TimeShift::new(0.05, 0.02, 0.004).unwrap();
    let tr = Transform::new(frame, time, [0.0, 0.0], Interpolation::Spectral).unwrap();
    let ut = sup(&series.derivative(0.05).unwrap());
    for t in [0.022, 0.031, 0.0475, 0.06, 0.074] {
        let b = commutator_b(&atlas, &series, &tr, t, 1e-5).unwrap();
        assert!(sup(&b) <= 1e-8 * ut, "t = {t}: {:e} vs {:e}", sup(&b), ut);
    }
}

#[test]
fn identity_parameters_leave_the_trajectory_alone() {
    let (atlas, series) = flow_series();
    let frame = TranslationFrame::new(&atlas, 0, [1.0, 1.0], 0.4).unwrap();
    let time = TimeShift::new(0.05, 0.02, 0.0).unwrap();
    let tr = Transform::new(frame, time, [0.0, 0.0], Interpolation::Spectral).unwrap();
    let out = transform_trajectory(&atlas, &series, &tr).unwrap();
    let same: Vec<&Sample> = series.samples().iter().collect();
    for (a, b) in out.iter().zip(same) {
        assert_eq!(a.rho, b.rho);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 20, ..ProptestConfig::default() })]

    #[test]
    fn newton_inversion_converges_everywhere(fx in -1.0f64..1.0, fy in -1.0f64..1.0) {
        let atlas = torus_atlas(2.0, 1.0, 16);
        let frame = TranslationFrame::new(&atlas, 0, [3.0, 3.0], 0.5).unwrap();
        let r = frame.r_max();
        let scale = 0.99 * r / fx.hypot(fy).max(1.0);
        let tt = TruncatedTranslation::new(frame, [fx * scale, fy * scale]).unwrap();
        for k in atlas.nodes() {
            let x = atlas.coords()[k];
            let back = tt.inverse(&atlas, tt.map(&atlas, x)).unwrap();
            prop_assert!((back[0] - x[0]).abs() < 1e-11 && (back[1] - x[1]).abs() < 1e-11);
        }
    }

    #[test]
    fn initial_time_is_pinned(lambda in -1.0f64..1.0, mx in -1.0f64..1.0, my in -1.0f64..1.0) {
        let atlas = torus_atlas(2.0, 1.0, 16);
        let base = atlas.sample(|_, uv| 0.05 * uv[1].cos() + 0.01 * uv[0].sin());
        let samples = (0..=10).map(|k| {
            let t = 0.01 * k as f64;
            Sample { t, rho: base.iter().map(|b| b * (1.0 - t)).collect(), rho_t: base.iter().map(|b| -b).collect() }
        }).collect();
        let series = TimeSeries::new(samples).unwrap();
        let frame = TranslationFrame::new(&atlas, 0, [1.0, 1.0], 0.4).unwrap();
        let probe = TimeShift::new(0.05, 0.02, 0.0).unwrap();
        let time = TimeShift::new(0.05, 0.02, lambda * probe.lambda_max()).unwrap();
        let r = 0.99 * frame.r_max() / mx.hypot(my).max(1.0);
        let tr = Transform::new(frame, time, [mx * r, my * r], Interpolation::Spectral).unwrap();
        let at_zero = transformed_state(&atlas, &series, &tr, 0.0).unwrap();
        prop_assert_eq!(&at_zero, &series.samples()[0].rho);
        // outside the time support too
        let late = transformed_state(&atlas, &series, &tr, 0.1).unwrap();
        prop_assert_eq!(&late, &series.samples()[10].rho);
    }
}
