//! `run`, `energy` and `probe`.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{OutputFormat, ProbeConfig, ProbeFixture, RunConfig};
use super::output::{mesh_path, write_json, write_obj, SeriesWriter};
use crate::error::{Error, Result};
use crate::flow::{run_with_sink, FlowEvent, FlowParams, FlowState, Sample, StepRecord};
use crate::grid::{build_grids, GridAtlas};
use crate::surface::{point_distance, ChartId};
use crate::translation::{smoothness_probe, ProbeReport, ProbeSpec, TimeSeries, TranslationFrame};

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub terminal: String,
    pub t_final: f64,
    pub steps: usize,
    #[serde(rename = "W_initial")]
    pub w_initial: f64,
    #[serde(rename = "W_final")]
    pub w_final: f64,
    pub area_final: f64,
    pub el_residual_sup: f64,
    pub config_echo: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySummary {
    #[serde(rename = "W")]
    pub willmore: f64,
    pub area: f64,
    pub gb_defect: f64,
    pub el_residual_sup: f64,
    pub rho_sup: f64,
    pub config_echo: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeSummary {
    pub fixture: ProbeFixture,
    pub decays: bool,
    pub max_ratio: f64,
    pub coefficient_max: Vec<f64>,
    pub decay_ratios: Vec<f64>,
    pub condition: f64,
    pub fit_residual: f64,
    pub samples: usize,
    pub probe: ProbeConfig,
    pub flow_terminal: Option<String>,
}

fn output_dir(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.directory.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn atlas_for(cfg: &RunConfig) -> Result<GridAtlas> {
    build_grids(&cfg.surface.build()?, cfg.grid.resolution)
}

/// Run the flow, writing `series.csv`, `mesh_<step>.obj` and `report.json`.
pub fn cmd_run(cfg: &RunConfig, out: Option<&Path>) -> Result<(FlowEvent, RunReport)> {
    let dir = output_dir(cfg, out)?;
    let atlas = atlas_for(cfg)?;
    let rho0 = cfg.initial.sample(&atlas);
    let params = cfg.flow.params();
    let every = cfg.flow.output_every;
    let mut series = if cfg.output.wants(OutputFormat::Csv) { Some(SeriesWriter::create(&dir.join("series.csv"))?) } else { None };
    let meshes = cfg.output.wants(OutputFormat::Obj);
    let mut last_written = None;
    let mut sink = |state: &FlowState, record: &StepRecord| -> Result<()> {
        if record.step == 0 || (every > 0 && record.step.is_multiple_of(every)) {
            emit(&atlas, state, record, series.as_mut(), meshes, &dir)?;
            last_written = Some(record.step);
        }
        Ok(())
    };
    let traj = run_with_sink(&atlas, &rho0, &params, &mut sink)?;
    if let (Some(state), Some(record)) = (&traj.final_state, traj.records.last()) {
        if last_written != Some(record.step) {
            emit(&atlas, state, record, series.as_mut(), meshes, &dir)?;
        }
    }
    let first = traj.initial_report();
    let last = traj.final_report();
    let report = RunReport {
        terminal: traj.event.kind.as_str().to_string(),
        t_final: traj.final_state.as_ref().map_or(traj.event.t, |s| s.t),
        steps: traj.steps,
        w_initial: first.map_or(f64::NAN, |r| r.willmore),
        w_final: last.map_or(f64::NAN, |r| r.willmore),
        area_final: last.map_or(f64::NAN, |r| r.area),
        el_residual_sup: last.map_or(f64::NAN, |r| r.el_residual_sup),
        config_echo: cfg.clone(),
    };
    if cfg.output.wants(OutputFormat::Json) {
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok((traj.event, report))
}

fn emit(
    atlas: &GridAtlas,
    state: &FlowState,
    record: &StepRecord,
    series: Option<&mut SeriesWriter>,
    meshes: bool,
    dir: &Path,
) -> Result<()> {
    if let Some(s) = series {
        s.push(record)?;
    }
    if meshes {
        write_obj(atlas, state.rho(), &mesh_path(dir, record.step))?;
    }
    Ok(())
}

/// Energy and curvature diagnostics of the initial height, without flowing.
pub fn cmd_energy(cfg: &RunConfig, out: Option<&Path>) -> Result<EnergySummary> {
    let dir = output_dir(cfg, out)?;
    let atlas = atlas_for(cfg)?;
    let rho0 = cfg.initial.sample(&atlas);
    let state = FlowState::new(&atlas, 0.0, cfg.flow.dt0, &rho0)?;
    let r = state.report;
    let summary = EnergySummary {
        willmore: r.willmore,
        area: r.area,
        gb_defect: r.gb_defect,
        el_residual_sup: r.el_residual_sup,
        rho_sup: r.rho_sup,
        config_echo: cfg.clone(),
    };
    write_json(&dir.join("report.json"), &summary)?;
    Ok(summary)
}

/// Short fixed-step flow (or the kink fixture) followed by the decay probe; writes `probe.json`.
pub fn cmd_probe(cfg: &RunConfig, out: Option<&Path>) -> Result<ProbeSummary> {
    let dir = output_dir(cfg, out)?;
    let atlas = atlas_for(cfg)?;
    let probe = cfg.probe.unwrap_or_default();
    let (series, terminal) = probe_series(cfg, &probe, &atlas)?;
    let report = run_probe(&atlas, &series, &probe)?;
    let summary = ProbeSummary {
        fixture: probe.fixture,
        decays: report.decays(),
        max_ratio: report.max_ratio(),
        coefficient_max: report.coefficient_max,
        decay_ratios: report.decay_ratios,
        condition: report.condition,
        fit_residual: report.fit_residual,
        samples: report.samples,
        probe,
        flow_terminal: terminal,
    };
    write_json(&dir.join("probe.json"), &summary)?;
    Ok(summary)
}

pub fn run_probe(atlas: &GridAtlas, series: &TimeSeries, probe: &ProbeConfig) -> Result<ProbeReport> {
    let frame = TranslationFrame::new(atlas, probe.chart, probe.point, probe.eps0)?;
    let spec = ProbeSpec {
        frame,
        t0: probe.t0,
        time_eps: probe.time_eps,
        point: probe.point,
        direction: probe.direction,
        lambda_radius: probe.lambda_radius,
        mu_radius: probe.mu_radius,
        degree: probe.degree,
        nodes: probe.nodes,
        interpolation: probe.interpolation_for(atlas),
    };
    smoothness_probe(atlas, series, &spec)
}

/// Trajectory the probe samples, and the flow's terminal event when one ran.
pub fn probe_series(cfg: &RunConfig, probe: &ProbeConfig, atlas: &GridAtlas) -> Result<(TimeSeries, Option<String>)> {
    match probe.fixture {
        ProbeFixture::Flow => {
            let params = FlowParams {
                dt0: probe.dt,
                t_end: probe.t_end,
                adaptive: false,
                output_every: 1,
                equilibrium_tol: Some(0.0),
                ..FlowParams::default()
            };
            let rho0 = cfg.initial.sample(atlas);
            let traj = run_with_sink(atlas, &rho0, &params, &mut |_, _| Ok(()))?;
            let terminal = traj.event.kind.as_str().to_string();
            Ok((TimeSeries::new(traj.samples)?, Some(terminal)))
        }
        ProbeFixture::Kink => Ok((kink_series(atlas, probe)?, None)),
    }
}

/// `u(t, p) = (1 + t) |p - p0| / 10` with `p0` the probe point.
pub fn kink_series(atlas: &GridAtlas, probe: &ProbeConfig) -> Result<TimeSeries> {
    let surface = &atlas.surface;
    if probe.chart >= surface.charts.len() {
        return Err(Error::InvalidParameter { name: "chart", reason: format!("no chart {}", probe.chart) });
    }
    let tip = surface.chart(ChartId(probe.chart)).map.position(probe.point);
    let base = atlas.sample(|id, uv| 0.1 * point_distance(surface.chart(id).map.position(uv), tip));
    let steps = (probe.t_end / probe.dt).round().max(1.0) as usize;
    let samples = (0..=steps)
        .map(|k| {
            let t = k as f64 * probe.dt;
            Sample { t, rho: base.iter().map(|b| b * (1.0 + t)).collect(), rho_t: base.clone() }
        })
        .collect();
    TimeSeries::new(samples)
}
