//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowParams;
use crate::grid::{GridAtlas, MIN_RESOLUTION};
use crate::surface::{make_sphere, make_torus, tubular_radius, ChartId, ReferenceSurface, SurfaceKind};
use crate::translation::{Interpolation, MAX_PROBE_DEGREE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub initial: InitialCondition,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceConfig {
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { resolution: 64 }
    }
}

/// One term `amplitude * Y(modes)` of an initial height.
///
/// On the sphere `modes = [l, m]` selects the associated Legendre function
/// `P_l^|m|(z/R)` times `cos(m phi)` (or `sin(|m| phi)` for `m < 0`); on the
/// torus it selects `cos(modes[0] u + modes[1] v)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicTerm {
    pub amplitude: f64,
    pub modes: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constant { amplitude: f64 },
    Harmonic { amplitude: f64, modes: [i64; 2] },
    Table { terms: Vec<HarmonicTerm> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub dt0: f64,
    pub t_end: f64,
    pub atol: f64,
    pub rtol: f64,
    pub output_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equilibrium_tol: Option<f64>,
    pub adaptive: bool,
    pub max_steps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        let p = FlowParams::default();
        Self {
            dt0: p.dt0,
            t_end: p.t_end,
            atol: p.atol,
            rtol: p.rtol,
            output_every: 10,
            equilibrium_tol: None,
            adaptive: true,
            max_steps: p.max_steps,
        }
    }
}

impl FlowConfig {
    pub fn params(&self) -> FlowParams {
        FlowParams {
            dt0: self.dt0,
            t_end: self.t_end,
            atol: self.atol,
            rtol: self.rtol,
            adaptive: self.adaptive,
            output_every: self.output_every,
            equilibrium_tol: self.equilibrium_tol,
            max_steps: self.max_steps,
            ..FlowParams::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Obj,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("output"), formats: vec![OutputFormat::Csv, OutputFormat::Obj, OutputFormat::Json] }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeFixture {
    /// The flow of the configured initial data.
    #[default]
    Flow,
    /// A cone-shaped height `|p - p0|` with its tip at the probe point.
    Kink,
}

/// Short fixed-step flow followed by the polynomial-decay probe.
///
/// Knots of the stored trajectory sit at multiples of `dt`; `t0 +- lambda_radius`
/// should stay inside one step so the time interpolant is a single cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub fixture: ProbeFixture,
    pub dt: f64,
    pub t_end: f64,
    pub t0: f64,
    pub time_eps: f64,
    pub chart: usize,
    pub point: [f64; 2],
    pub direction: [f64; 2],
    pub eps0: f64,
    pub lambda_radius: f64,
    pub mu_radius: f64,
    pub degree: usize,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<Interpolation>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            fixture: ProbeFixture::Flow,
            dt: 0.01,
            t_end: 0.2,
            t0: 0.105,
            time_eps: 0.05,
            chart: 0,
            point: [0.3, 0.2],
            direction: [0.0, 1.0],
            eps0: 0.3,
            lambda_radius: 0.004,
            mu_radius: 0.07,
            degree: 6,
            nodes: 15,
            interpolation: None,
        }
    }
}

impl ProbeConfig {
    /// Spectral on periodic charts unless overridden.
    pub fn interpolation_for(&self, atlas: &GridAtlas) -> Interpolation {
        self.interpolation.unwrap_or(if atlas.grids[self.chart].periodic {
            Interpolation::Spectral
        } else {
            Interpolation::Lagrange
        })
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::ConfigValidation { field: field.to_string(), reason: reason.into() }
}

fn finite(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if finite(field, v)? > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

/// `P_l^m(x)` for `0 <= m <= l`, without the Condon-Shortley phase.
pub fn associated_legendre(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= (2 * k + 1) as f64 * s;
    }
    if l == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = x * (2 * m + 1) as f64 * pmm;
    for n in (m + 2)..=l {
        let next = ((2 * n - 1) as f64 * x * cur - (n + m - 1) as f64 * prev) / (n - m) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

impl HarmonicTerm {
    fn eval(&self, surface: &ReferenceSurface, chart: ChartId, uv: [f64; 2]) -> f64 {
        let [a, b] = self.modes;
        let basis = match surface.kind {
            SurfaceKind::Sphere { radius } => {
                let p = surface.chart(chart).map.position(uv);
                let z = (p[2] / radius).clamp(-1.0, 1.0);
                let phi = p[1].atan2(p[0]);
                let m = b.unsigned_abs() as usize;
                let angular = if b >= 0 { (b as f64 * phi).cos() } else { (m as f64 * phi).sin() };
                associated_legendre(a.max(0) as usize, m, z) * angular
            }
            SurfaceKind::Torus { .. } => (a as f64 * uv[0] + b as f64 * uv[1]).cos(),
        };
        self.amplitude * basis
    }

    /// Bound on `|amplitude * Y|` over the surface.
    fn bound(&self, surface: &SurfaceConfig) -> f64 {
        let [a, b] = self.modes;
        let scale = match surface {
            SurfaceConfig::Torus { .. } => 1.0,
            SurfaceConfig::Sphere { .. } => {
                // crude bound (l + m)! / (l - m)!, exact for m = 0
                let (l, m) = (a.max(0) as usize, b.unsigned_abs() as usize);
                if m > l {
                    0.0
                } else {
                    ((l - m + 1)..=(l + m)).map(|k| k as f64).product::<f64>().max(1.0)
                }
            }
        };
        self.amplitude.abs() * scale
    }
}

impl InitialCondition {
    pub fn terms(&self) -> Vec<HarmonicTerm> {
        match self {
            InitialCondition::Constant { amplitude } => vec![HarmonicTerm { amplitude: *amplitude, modes: [0, 0] }],
            InitialCondition::Harmonic { amplitude, modes } => vec![HarmonicTerm { amplitude: *amplitude, modes: *modes }],
            InitialCondition::Table { terms } => terms.clone(),
        }
    }

    /// Sample the initial height on the atlas.
    pub fn sample(&self, atlas: &GridAtlas) -> Vec<f64> {
        let terms = self.terms();
        let surface = &atlas.surface;
        atlas.sample(|id, uv| terms.iter().map(|t| t.eval(surface, id, uv)).sum())
    }
}

impl SurfaceConfig {
    pub fn build(&self) -> Result<ReferenceSurface> {
        match *self {
            SurfaceConfig::Sphere { radius } => make_sphere(radius),
            SurfaceConfig::Torus { major, minor } => make_torus(major, minor),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let surface = match self.surface {
            SurfaceConfig::Sphere { radius } => {
                positive("surface.radius", radius)?;
                self.surface.build()?
            }
            SurfaceConfig::Torus { major, minor } => {
                positive("surface.major", major)?;
                positive("surface.minor", minor)?;
                if minor >= major {
                    return Err(invalid("surface.minor", format!("must be below major radius {major}")));
                }
                self.surface.build()?
            }
        };
        if self.grid.resolution < MIN_RESOLUTION {
            return Err(invalid("grid.resolution", format!("must be at least {MIN_RESOLUTION}")));
        }
        let a = tubular_radius(&surface);
        let terms = self.initial.terms();
        if terms.is_empty() {
            return Err(invalid("initial.terms", "table has no terms"));
        }
        let mut bound = 0.0;
        for t in &terms {
            finite("initial.amplitude", t.amplitude)?;
            if t.modes[0] < 0 && matches!(self.surface, SurfaceConfig::Sphere { .. }) {
                return Err(invalid("initial.modes", "degree l must be nonnegative"));
            }
            bound += t.bound(&self.surface);
        }
        if bound >= a {
            return Err(invalid(
                "initial.amplitude",
                format!("initial height may reach {bound}, at or beyond the tubular radius {a}"),
            ));
        }
        let f = &self.flow;
        positive("flow.dt0", f.dt0)?;
        positive("flow.t_end", f.t_end)?;
        if finite("flow.atol", f.atol)? < 0.0 || finite("flow.rtol", f.rtol)? < 0.0 || f.atol + f.rtol == 0.0 {
            return Err(invalid("flow.atol", "tolerances must be nonnegative and not both zero"));
        }
        if let Some(tol) = f.equilibrium_tol {
            positive("flow.equilibrium_tol", tol)?;
        }
        if f.max_steps == 0 {
            return Err(invalid("flow.max_steps", "must be positive"));
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "at least one format is required"));
        }
        if let Some(p) = &self.probe {
            p.validate(&surface)?;
        }
        Ok(())
    }
}

impl ProbeConfig {
    fn validate(&self, surface: &ReferenceSurface) -> Result<()> {
        positive("probe.dt", self.dt)?;
        positive("probe.t_end", self.t_end)?;
        positive("probe.time_eps", self.time_eps)?;
        positive("probe.eps0", self.eps0)?;
        positive("probe.lambda_radius", self.lambda_radius)?;
        if finite("probe.mu_radius", self.mu_radius)? < 0.0 {
            return Err(invalid("probe.mu_radius", "must be nonnegative"));
        }
        if self.chart >= surface.charts.len() {
            return Err(invalid("probe.chart", format!("surface has {} charts", surface.charts.len())));
        }
        for (name, v) in [("probe.point", self.point), ("probe.direction", self.direction)] {
            finite(name, v[0])?;
            finite(name, v[1])?;
        }
        if self.direction == [0.0, 0.0] {
            return Err(invalid("probe.direction", "must be nonzero"));
        }
        if self.degree == 0 || self.degree > MAX_PROBE_DEGREE {
            return Err(invalid("probe.degree", format!("must lie in 1..={MAX_PROBE_DEGREE}")));
        }
        if self.nodes < 2 {
            return Err(invalid("probe.nodes", "need at least two nodes per axis"));
        }
        let t0 = positive("probe.t0", self.t0)?;
        if t0 - 2.0 * self.time_eps <= 0.0 {
            return Err(invalid("probe.t0", "time cutoff must stay clear of t = 0"));
        }
        if t0 + self.lambda_radius >= self.t_end {
            return Err(invalid("probe.t0", "t0 + lambda_radius must lie before t_end"));
        }
        if self.interpolation == Some(Interpolation::Spectral) && !surface.charts[self.chart].periodic {
            return Err(invalid("probe.interpolation", "spectral interpolation needs a periodic chart"));
        }
        Ok(())
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    RunConfig::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[surface]
kind = "torus"
major = 2.0
minor = 1.0

[grid]
resolution = 64

[initial]
kind = "constant"
amplitude = 0.1

[flow]
t_end = 0.01
"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.flow.dt0, 1e-4);
        assert_eq!(cfg.flow.atol, 1e-8);
        assert_eq!(cfg.flow.rtol, 1e-6);
        assert_eq!(cfg.flow.t_end, 0.01);
        assert_eq!(cfg.grid.resolution, 64);
        assert!(cfg.probe.is_none());
    }

    #[test]
    fn over_amplitude_is_rejected() {
        let text = MINIMAL.replace("amplitude = 0.1", "amplitude = 0.9");
        match RunConfig::from_toml(&text).unwrap_err() {
            Error::ConfigValidation { field, .. } => assert_eq!(field, "initial.amplitude"),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\nfoo = 1\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::ConfigParse(_))));
        let text = MINIMAL.replace("t_end = 0.01", "t_end = 0.01\nfoo = 2");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::ConfigParse(_))));
        let text = MINIMAL.replace("minor = 1.0", "minor = 1.0\nfoo = 2");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn syntax_errors_report_the_line() {
        let err = RunConfig::from_toml("[surface]\nkind = \n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn legendre_matches_closed_forms() {
        for x in [-0.9f64, -0.3, 0.0, 0.4, 1.0] {
            let s = (1.0 - x * x).sqrt();
            assert!((associated_legendre(2, 0, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
            assert!((associated_legendre(3, 0, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
            assert!((associated_legendre(2, 1, x) - 3.0 * x * s).abs() < 1e-15);
            assert!((associated_legendre(2, 2, x) - 3.0 * s * s).abs() < 1e-14);
        }
    }

    #[test]
    fn table_sums_terms() {
        let text = MINIMAL.replace(
            "kind = \"constant\"\namplitude = 0.1",
            "kind = \"table\"\nterms = [{ amplitude = 0.05, modes = [0, 0] }, { amplitude = 0.02, modes = [0, 1] }]",
        );
        let cfg = RunConfig::from_toml(&text).unwrap();
        let atlas = crate::grid::build_grids(&cfg.surface.build().unwrap(), 16).unwrap();
        let rho = cfg.initial.sample(&atlas);
        for (k, r) in rho.iter().enumerate() {
            let v = atlas.coords()[k][1];
            assert!((r - 0.05 - 0.02 * v.cos()).abs() < 1e-15);
        }
    }
}
