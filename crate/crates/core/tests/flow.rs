mod common;

use common::*;
use willmore_core::flow::{run, step_semi_implicit, FlowEventKind, FlowParams, FlowState, StepSolver};
use willmore_core::grid::GridAtlas;

fn fixed_steps(atlas: &GridAtlas, rho0: &[f64], dt: f64, steps: usize) -> Vec<f64> {
    let mut state = FlowState::new(atlas, 0.0, dt, rho0).unwrap();
    let mut solver = StepSolver::new();
    for _ in 0..steps {
        state = step_semi_implicit(atlas, &state, &mut solver).unwrap();
    }
    state.rho().to_vec()
}

#[test]
fn concentric_spheres_survive_a_hundred_steps() {
    let atlas = sphere_atlas(24);
    for c in [-0.2, 0.1, 0.3] {
        let rho0 = vec![c; atlas.len()];
        let rho = fixed_steps(&atlas, &rho0, 1e-3, 100);
        assert!(sup_diff(&rho, &rho0) <= 1e-7, "c = {c}: {:e}", sup_diff(&rho, &rho0));
    }
}

#[test]
fn implicit_euler_is_first_order() {
    let atlas = torus_atlas(2.0, 1.0, 24);
    let rho0 = atlas.sample(|_, uv| 0.05 * uv[1].cos());
    let t_end = 1e-3;
    let reference = fixed_steps(&atlas, &rho0, t_end / 128.0, 128);
    let coarse = sup_diff(&fixed_steps(&atlas, &rho0, t_end / 4.0, 4), &reference);
    let fine = sup_diff(&fixed_steps(&atlas, &rho0, t_end / 8.0, 8), &reference);
    let p = order(coarse, fine, 2.0);
    assert!(p >= 0.8, "order {p} ({coarse:e} -> {fine:e})");
}

#[test]
fn torus_energy_decreases_along_adaptive_run() {
    let atlas = torus_atlas(2.0, 1.0, 24);
    let rho0 = atlas.sample(|_, uv| 0.05 * uv[1].cos());
    let traj = run(&atlas, &rho0, &FlowParams { t_end: 0.02, atol: 1e-6, rtol: 1e-4, ..Default::default() });
    assert_eq!(traj.event.kind, FlowEventKind::ReachedTEnd);
    assert!(traj.is_energy_monotone(), "{:?}", traj.energy_violations);
    let w: Vec<f64> = traj.records.iter().map(|r| r.report.willmore).collect();
    assert!(w.last().unwrap() < &w[0]);
    assert!(traj.records.iter().all(|r| r.report.rho_sup < atlas.surface.tubular_a));
}

fn exit_run() -> willmore_core::flow::Trajectory {
    let atlas = torus_atlas(3.0, 1.0, 24);
    let rho0 = atlas.sample(|_, uv| -0.49 + 0.003 * uv[1].cos());
    run(&atlas, &rho0, &FlowParams { t_end: 5.0, atol: 1e-6, rtol: 1e-4, ..Default::default() })
}

#[test]
fn thin_torus_leaves_the_tube_deterministically() {
    let (a, b) = (exit_run(), exit_run());
    assert_eq!(a.event.kind, FlowEventKind::TubularExit);
    assert_eq!(a.event, b.event);
    assert_eq!(a.steps, b.steps);
    let last = a.final_state.as_ref().unwrap();
    assert!(last.report.rho_sup < 0.5);
}

#[test]
fn solver_budget_exhaustion_is_an_event() {
    let atlas = torus_atlas(2.0, 1.0, 16);
    let rho0 = vec![0.0; atlas.len()];
    let traj = run(&atlas, &rho0, &FlowParams { t_end: 1.0, max_steps: 2, ..Default::default() });
    assert_eq!(traj.steps, 2);
    assert_eq!(traj.event.kind, FlowEventKind::SolverFailure);
}

#[test]
fn samples_follow_output_cadence() {
    let atlas = torus_atlas(2.0, 1.0, 16);
    let rho0 = atlas.sample(|_, uv| 0.02 * uv[1].cos());
    let traj = run(&atlas, &rho0, &FlowParams { dt0: 1e-3, t_end: 5e-3, adaptive: false, output_every: 2, ..Default::default() });
    assert_eq!(traj.steps, 5);
    let times: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 4, "{times:?}");
    assert_eq!(traj.records.len(), 6);
}
