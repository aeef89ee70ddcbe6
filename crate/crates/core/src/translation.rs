//! Parameter-dependent translations of a trajectory in space and time, and a
//! polynomial-decay probe built on them.
//!
//! A [`TruncatedTranslation`] shifts chart coordinates by `chi(x) mu` near a
//! centre point and is the identity away from it; a [`TimeShift`] does the same
//! for time. Composing both with a sampled trajectory gives the family
//! `u_{lambda,mu}(t, x) = u(t + xi(t) lambda, theta_{xi(t) mu}(x))`.

use faer::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cutoff::Plateau;
use crate::error::{Error, Result};
use crate::flow::Sample;
use crate::grid::{GridAtlas, GridField};
use crate::par::*;
use crate::surface::ChartId;

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-14;
/// Fits whose design matrix is worse conditioned than this are refused.
pub const MAX_CONDITION: f64 = 1e12;
pub const MAX_PROBE_DEGREE: usize = 8;
/// Relative size below which a fitted coefficient is treated as zero.
pub const COEFFICIENT_FLOOR: f64 = 1e-10;

/// How a transformed field is evaluated off the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Six-point tensor Lagrange; works on every chart.
    #[default]
    Lagrange,
    /// Trigonometric interpolation; periodic charts only.
    Spectral,
}

/// Geometry of the translation: centre chart and point plus the radius ladder
/// `eps0 < 2 eps0 < 3 eps0 < 4 eps0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationFrame {
    pub chart: usize,
    pub center: [f64; 2],
    pub eps0: f64,
    /// 1 on the inner ball, supported in the second.
    pub chi: Plateau,
    /// 1 on the third ball, supported in the fourth.
    pub zeta: Plateau,
}

impl TranslationFrame {
    pub fn new(atlas: &GridAtlas, chart: usize, center: [f64; 2], eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Error::InvalidParameter { name: "eps0", reason: format!("must be positive, got {eps0}") });
        }
        let c = atlas.surface.charts.get(chart).ok_or_else(|| Error::InvalidParameter {
            name: "chart",
            reason: format!("no chart {chart}"),
        })?;
        let outer = 4.0 * eps0;
        let fits = if c.periodic { outer < std::f64::consts::PI } else { c.domain.depth(center) > outer };
        if !fits {
            return Err(Error::InvalidParameter {
                name: "eps0",
                reason: format!("ball of radius {outer} around {center:?} leaves chart {chart}"),
            });
        }
        Ok(Self {
            chart,
            center,
            eps0,
            chi: Plateau::new(eps0, 2.0 * eps0),
            zeta: Plateau::new(3.0 * eps0, 4.0 * eps0),
        })
    }

    /// Largest admissible shift length.
    pub fn r_max(&self) -> f64 {
        0.5 / self.chi.lipschitz()
    }

    /// Offset from the centre, wrapped to the nearest image on periodic charts.
    fn offset(&self, atlas: &GridAtlas, x: [f64; 2]) -> [f64; 2] {
        let mut d = [x[0] - self.center[0], x[1] - self.center[1]];
        if atlas.surface.charts[self.chart].periodic {
            let tau = std::f64::consts::TAU;
            for c in &mut d {
                *c -= tau * (*c / tau).round();
            }
        }
        d
    }

    fn radius(&self, atlas: &GridAtlas, x: [f64; 2]) -> f64 {
        let d = self.offset(atlas, x);
        d[0].hypot(d[1])
    }
}

/// `theta_mu(x) = x + chi(x) mu` on the frame's chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedTranslation {
    pub frame: TranslationFrame,
    pub mu: [f64; 2],
}

impl TruncatedTranslation {
    pub fn new(frame: TranslationFrame, mu: [f64; 2]) -> Result<Self> {
        let norm = mu[0].hypot(mu[1]);
        let limit = frame.r_max();
        if !(norm <= limit) {
            return Err(Error::InadmissibleShift { norm, limit });
        }
        Ok(Self { frame, mu })
    }

    pub fn is_identity(&self) -> bool {
        self.mu == [0.0, 0.0]
    }

    pub fn map(&self, atlas: &GridAtlas, x: [f64; 2]) -> [f64; 2] {
        let c = self.frame.chi.eval(self.frame.radius(atlas, x));
        if c == 0.0 {
            return x;
        }
        [x[0] + c * self.mu[0], x[1] + c * self.mu[1]]
    }

    /// Solve `x + chi(x) mu = y` by Newton's method.
    pub fn inverse(&self, atlas: &GridAtlas, y: [f64; 2]) -> Result<[f64; 2]> {
        if self.is_identity() || self.frame.radius(atlas, y) >= self.frame.chi.outer + self.mu[0].hypot(self.mu[1]) {
            return Ok(y);
        }
        let mut x = y;
        for _ in 0..NEWTON_MAX_ITER {
            let d = self.frame.offset(atlas, x);
            let r = d[0].hypot(d[1]);
            let c = self.frame.chi.eval(r);
            let res = [x[0] + c * self.mu[0] - y[0], x[1] + c * self.mu[1] - y[1]];
            if res[0].abs().max(res[1].abs()) <= NEWTON_TOL * (1.0 + y[0].abs().max(y[1].abs())) {
                return Ok(x);
            }
            let grad = if r > 0.0 {
                let s = self.frame.chi.radial_derivative(r) / r;
                [s * d[0], s * d[1]]
            } else {
                [0.0, 0.0]
            };
            // I + mu grad^T, inverted by Sherman-Morrison
            let denom = 1.0 + grad[0] * self.mu[0] + grad[1] * self.mu[1];
            let gr = grad[0] * res[0] + grad[1] * res[1];
            x[0] -= res[0] - self.mu[0] * gr / denom;
            x[1] -= res[1] - self.mu[1] * gr / denom;
        }
        Err(Error::InversionStall { u: y[0], v: y[1] })
    }
}

/// `rho_lambda(t) = t + xi(t) lambda` with `xi` a plateau around `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeShift {
    pub t0: f64,
    pub xi: Plateau,
    pub lambda: f64,
}

impl TimeShift {
    /// Plateau of half-width `eps` around `t0`, supported within `2 eps`.
    pub fn new(t0: f64, eps: f64, lambda: f64) -> Result<Self> {
        if !(eps > 0.0) || !(t0 - 2.0 * eps > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t0",
                reason: format!("time cutoff around {t0} with width {eps} must stay clear of t = 0"),
            });
        }
        let shift = Self { t0, xi: Plateau::new(eps, 2.0 * eps), lambda };
        let limit = shift.lambda_max();
        if !(lambda.abs() <= limit) {
            return Err(Error::InadmissibleTimeShift { value: lambda, limit });
        }
        Ok(shift)
    }

    pub fn lambda_max(&self) -> f64 {
        0.5 / self.xi.lipschitz()
    }

    pub fn cutoff(&self, t: f64) -> f64 {
        self.xi.eval((t - self.t0).abs())
    }

    pub fn cutoff_prime(&self, t: f64) -> f64 {
        let d = t - self.t0;
        self.xi.radial_derivative(d.abs()) * d.signum()
    }

    pub fn map(&self, t: f64) -> f64 {
        let c = self.cutoff(t);
        if c == 0.0 || self.lambda == 0.0 {
            t
        } else {
            t + c * self.lambda
        }
    }

    pub fn map_prime(&self, t: f64) -> f64 {
        1.0 + self.cutoff_prime(t) * self.lambda
    }
}

/// Sampled trajectory with cubic Hermite interpolation in time.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    samples: Vec<Sample>,
}

/// Hermite basis on the unit interval and its derivative.
fn hermite(s: f64) -> ([f64; 4], [f64; 4]) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2],
        [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s],
    )
}

impl TimeSeries {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, have: samples.len() });
        }
        let len = samples[0].rho.len();
        if samples.iter().any(|s| s.rho.len() != len || s.rho_t.len() != len) {
            return Err(Error::InvalidParameter { name: "samples", reason: "samples differ in length".into() });
        }
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidParameter { name: "samples", reason: "times must increase strictly".into() });
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Interval index holding `t`.
    pub fn piece(&self, t: f64) -> Result<usize> {
        let (lo, hi) = self.t_range();
        if !(t >= lo && t <= hi) {
            return Err(Error::TimeOutOfRange(t));
        }
        let k = self.samples.partition_point(|s| s.t <= t);
        Ok(k.clamp(1, self.samples.len() - 1) - 1)
    }

    /// Weights `(value, derivative)` of the Hermite polynomial on `piece`, evaluated at `t`
    /// (which may lie slightly outside the piece).
    fn weights(&self, piece: usize, t: f64) -> ([f64; 4], [f64; 4]) {
        let (a, b) = (&self.samples[piece], &self.samples[piece + 1]);
        let h = b.t - a.t;
        let (v, d) = hermite((t - a.t) / h);
        ([v[0], h * v[1], v[2], h * v[3]], [d[0] / h, d[1], d[2] / h, d[3]])
    }

    fn combine(&self, piece: usize, w: [f64; 4], node: usize) -> f64 {
        let (a, b) = (&self.samples[piece], &self.samples[piece + 1]);
        w[0] * a.rho[node] + w[1] * a.rho_t[node] + w[2] * b.rho[node] + w[3] * b.rho_t[node]
    }

    /// Field at `t`; sample times return the stored data unchanged.
    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        let k = self.piece(t)?;
        if let Some(s) = self.samples.iter().find(|s| s.t == t) {
            return Ok(s.rho.clone());
        }
        Ok(self.eval_piece(k, t).0)
    }

    /// Value and time derivative of the piece-`k` polynomial at `t`.
    pub fn eval_piece(&self, piece: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (wv, wd) = self.weights(piece, t);
        let n = self.samples[0].rho.len();
        (
            (0..n).map(|i| self.combine(piece, wv, i)).collect(),
            (0..n).map(|i| self.combine(piece, wd, i)).collect(),
        )
    }

    pub fn derivative(&self, t: f64) -> Result<Vec<f64>> {
        let k = self.piece(t)?;
        Ok(self.eval_piece(k, t).1)
    }
}

/// Evaluator of a grid field at arbitrary chart points.
struct PointEval<'a> {
    atlas: &'a GridAtlas,
    owned: &'a [f64],
    field: Option<GridField>,
}

impl<'a> PointEval<'a> {
    fn new(atlas: &'a GridAtlas, owned: &'a [f64], mode: Interpolation) -> Self {
        let field = (mode == Interpolation::Lagrange).then(|| atlas.field(owned));
        Self { atlas, owned, field }
    }

    fn at(&self, chart: usize, uv: [f64; 2]) -> Result<f64> {
        match &self.field {
            Some(f) => self.atlas.interpolate(f, chart, uv),
            None => self.atlas.interpolate_spectral(self.owned, chart, uv),
        }
    }
}

fn check_mode(atlas: &GridAtlas, chart: usize, mode: Interpolation) -> Result<()> {
    if mode == Interpolation::Spectral && !atlas.grids[chart].periodic {
        return Err(Error::InvalidParameter {
            name: "interpolation",
            reason: format!("spectral interpolation needs a periodic chart, chart {chart} is not"),
        });
    }
    Ok(())
}

/// Which way a transform composes with the translation.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

fn transform_field(
    atlas: &GridAtlas,
    tt: &TruncatedTranslation,
    owned: &[f64],
    mode: Interpolation,
    direction: Direction,
) -> Result<Vec<f64>> {
    if owned.len() != atlas.len() {
        return Err(Error::InvalidParameter { name: "field", reason: "length does not match the atlas".into() });
    }
    if tt.is_identity() {
        return Ok(owned.to_vec());
    }
    let frame = &tt.frame;
    check_mode(atlas, frame.chart, mode)?;
    let eval = PointEval::new(atlas, owned, mode);
    let home = ChartId(frame.chart);
    let surface = &atlas.surface;
    let out: Vec<Result<f64>> = (0..atlas.len())
        .into_par_iter()
        .map(|k| {
            let chart = atlas.chart_of(k);
            let uv = atlas.coords()[k];
            let x = if chart == frame.chart { Some(uv) } else { surface.transition(ChartId(chart), home, uv) };
            let Some(x) = x else { return Ok(owned[k]) };
            let zeta = frame.zeta.eval(frame.radius(atlas, x));
            if zeta == 0.0 {
                return Ok(owned[k]);
            }
            let y = match direction {
                Direction::Forward => tt.map(atlas, x),
                Direction::Inverse => tt.inverse(atlas, x)?,
            };
            if y == x {
                return Ok(owned[k]);
            }
            let zeta_y = frame.zeta.eval(frame.radius(atlas, y));
            Ok(zeta_y * eval.at(frame.chart, y)? + (1.0 - zeta) * owned[k])
        })
        .collect();
    out.into_iter().collect()
}

/// Pull a field back by the truncated translation: `(T_mu u)(x) = u(theta_mu(x))` near the
/// centre, unchanged elsewhere. Nodes of other charts are handled through the transition maps.
pub fn apply_theta(atlas: &GridAtlas, tt: &TruncatedTranslation, owned: &[f64], mode: Interpolation) -> Result<Vec<f64>> {
    transform_field(atlas, tt, owned, mode, Direction::Forward)
}

/// Inverse of [`apply_theta`]: composition with `theta_mu^{-1}`.
pub fn apply_theta_inverse(
    atlas: &GridAtlas,
    tt: &TruncatedTranslation,
    owned: &[f64],
    mode: Interpolation,
) -> Result<Vec<f64>> {
    transform_field(atlas, tt, owned, mode, Direction::Inverse)
}

/// Parameters of `u_{lambda,mu}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform {
    pub frame: TranslationFrame,
    pub time: TimeShift,
    pub mu: [f64; 2],
    pub interpolation: Interpolation,
}

impl Transform {
    pub fn new(frame: TranslationFrame, time: TimeShift, mu: [f64; 2], interpolation: Interpolation) -> Result<Self> {
        TruncatedTranslation::new(frame, mu)?;
        Ok(Self { frame, time, mu, interpolation })
    }

    /// Spatial translation in effect at time `t`: shift `xi(t) mu`.
    pub fn translation_at(&self, t: f64) -> TruncatedTranslation {
        let c = self.time.cutoff(t);
        TruncatedTranslation { frame: self.frame, mu: [c * self.mu[0], c * self.mu[1]] }
    }
}

/// `u_{lambda,mu}(t)` as a grid field.
pub fn transformed_state(atlas: &GridAtlas, series: &TimeSeries, tr: &Transform, t: f64) -> Result<Vec<f64>> {
    let u = series.value(tr.time.map(t))?;
    apply_theta(atlas, &tr.translation_at(t), &u, tr.interpolation)
}

/// The transformed trajectory at the original sample times.
pub fn transform_trajectory(atlas: &GridAtlas, series: &TimeSeries, tr: &Transform) -> Result<Vec<Sample>> {
    series
        .samples()
        .iter()
        .map(|s| {
            let rho = transformed_state(atlas, series, tr, s.t)?;
            let rho_t = transformed_derivative(atlas, series, tr, s.t)?;
            Ok(Sample { t: s.t, rho, rho_t })
        })
        .collect()
}

/// `(1 + xi' lambda) T(u_t)` at `t`: the transported time derivative.
pub fn transformed_derivative(atlas: &GridAtlas, series: &TimeSeries, tr: &Transform, t: f64) -> Result<Vec<f64>> {
    let s = tr.time.map(t);
    let ut = series.derivative(s)?;
    let factor = tr.time.map_prime(t);
    let moved = apply_theta(atlas, &tr.translation_at(t), &ut, tr.interpolation)?;
    Ok(moved.into_iter().map(|v| factor * v).collect())
}

/// Defect `d/dt[u_{lambda,mu}] - (1 + xi' lambda) T(u_t)` at `t`, with the time derivative
/// from a fourth-order central difference of step `dt_fd`.
///
/// Every stencil point is evaluated with the Hermite piece that contains `rho_lambda(t)`,
/// so the difference never straddles a knot.
pub fn commutator_b(atlas: &GridAtlas, series: &TimeSeries, tr: &Transform, t: f64, dt_fd: f64) -> Result<Vec<f64>> {
    if series.samples().len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, have: series.samples().len() });
    }
    let piece = series.piece(tr.time.map(t))?;
    let state = |tau: f64| -> Result<Vec<f64>> {
        let u = series.eval_piece(piece, tr.time.map(tau)).0;
        apply_theta(atlas, &tr.translation_at(tau), &u, tr.interpolation)
    };
    let offsets = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut dudt = vec![0.0; atlas.len()];
    for (k, w) in offsets {
        let u = state(t + k * dt_fd)?;
        for (d, v) in dudt.iter_mut().zip(&u) {
            *d += w * v / (12.0 * dt_fd);
        }
    }
    let ut = series.eval_piece(piece, tr.time.map(t)).1;
    let moved = apply_theta(atlas, &tr.translation_at(t), &ut, tr.interpolation)?;
    let factor = tr.time.map_prime(t);
    Ok(dudt.iter().zip(&moved).map(|(d, m)| d - factor * m).collect())
}

/// Where and how the probe samples `(lambda, mu) -> u_{lambda,mu}(t0, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSpec {
    pub frame: TranslationFrame,
    pub t0: f64,
    /// Half-width of the time plateau around `t0`.
    pub time_eps: f64,
    /// Probe point, in the frame's chart.
    pub point: [f64; 2],
    /// Unit direction of `mu`.
    pub direction: [f64; 2],
    pub lambda_radius: f64,
    pub mu_radius: f64,
    pub degree: usize,
    /// Chebyshev-Lobatto nodes per parameter axis.
    pub nodes: usize,
    pub interpolation: Interpolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub degree: usize,
    pub samples: usize,
    pub condition: f64,
    /// `max |c_ij|` over `i + j = d`, in scaled variables `lambda / lambda_radius`, `mu / mu_radius`.
    pub coefficient_max: Vec<f64>,
    /// `coefficient_max[d] / coefficient_max[d-1]` for `d = 1..=degree`.
    pub decay_ratios: Vec<f64>,
    pub fit_residual: f64,
}

impl ProbeReport {
    /// Coefficients shrink from degree 2 through the top degree.
    pub fn decays(&self) -> bool {
        self.decay_ratios.iter().skip(1).all(|&r| r < 1.0)
    }

    pub fn max_ratio(&self) -> f64 {
        self.decay_ratios.iter().skip(1).copied().fold(0.0, f64::max)
    }
}

fn chebyshev_lobatto(count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count).map(|k| (std::f64::consts::PI * k as f64 / (count - 1) as f64).cos()).collect()
}

/// Fit a total-degree polynomial to `(lambda, mu) -> u_{lambda,mu}(t0, q)` and report the
/// size of its coefficients by degree.
///
/// A zero `mu_radius` reduces the probe to a one-dimensional fit in `lambda`.
pub fn smoothness_probe(atlas: &GridAtlas, series: &TimeSeries, spec: &ProbeSpec) -> Result<ProbeReport> {
    if spec.degree == 0 || spec.degree > MAX_PROBE_DEGREE {
        return Err(Error::InvalidParameter {
            name: "degree",
            reason: format!("must lie in 1..={MAX_PROBE_DEGREE}, got {}", spec.degree),
        });
    }
    if !(spec.lambda_radius > 0.0) || !(spec.mu_radius >= 0.0) {
        return Err(Error::InvalidParameter { name: "radius", reason: "lambda radius must be positive, mu radius nonnegative".into() });
    }
    check_mode(atlas, spec.frame.chart, spec.interpolation)?;
    let dn = spec.direction[0].hypot(spec.direction[1]);
    if !(dn > 0.0) {
        return Err(Error::InvalidParameter { name: "direction", reason: "must be nonzero".into() });
    }
    let dir = [spec.direction[0] / dn, spec.direction[1] / dn];
    // admissibility of the extreme parameters
    TimeShift::new(spec.t0, spec.time_eps, spec.lambda_radius)?;
    TruncatedTranslation::new(spec.frame, [spec.mu_radius * dir[0], spec.mu_radius * dir[1]])?;

    let one_d = spec.mu_radius == 0.0;
    let lam = chebyshev_lobatto(spec.nodes);
    let mus = if one_d { vec![0.0] } else { chebyshev_lobatto(spec.nodes) };
    let monomials: Vec<(usize, usize)> = (0..=spec.degree)
        .flat_map(|d| (0..=d).map(move |i| (d - i, i)))
        .filter(|&(_, j)| !one_d || j == 0)
        .collect();
    let params: Vec<(f64, f64)> = lam.iter().flat_map(|&l| mus.iter().map(move |&m| (l, m))).collect();
    if params.len() < monomials.len() {
        return Err(Error::InsufficientSamples { needed: monomials.len(), have: params.len() });
    }

    let values: Vec<Result<f64>> = params
        .par_iter()
        .map(|&(l, m)| probe_value(atlas, series, spec, dir, l * spec.lambda_radius, m * spec.mu_radius))
        .collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;

    let a = Mat::<f64>::from_fn(params.len(), monomials.len(), |r, c| {
        let (l, m) = params[r];
        let (i, j) = monomials[c];
        l.powi(i as i32) * m.powi(j as i32)
    });
    let sv = a.singular_values().map_err(|_| Error::IllConditioned(f64::INFINITY))?;
    let condition = sv[0] / sv[sv.len() - 1];
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let b = Mat::<f64>::from_fn(values.len(), 1, |r, _| values[r]);
    let coef = a.qr().solve_lstsq(&b);
    let fitted = &a * &coef;
    let fit_residual = (0..values.len()).map(|r| (fitted[(r, 0)] - values[r]).abs()).fold(0.0, f64::max);

    let mut coefficient_max = vec![0.0f64; spec.degree + 1];
    for (c, &(i, j)) in monomials.iter().enumerate() {
        let d = i + j;
        coefficient_max[d] = coefficient_max[d].max(coef[(c, 0)].abs());
    }
    // coefficients this far below the largest are rounding noise and count as zero
    let floor = COEFFICIENT_FLOOR * coefficient_max.iter().copied().fold(0.0, f64::max);
    let decay_ratios = coefficient_max
        .windows(2)
        .map(|w| if w[1] <= floor || w[0] <= floor { 0.0 } else { w[1] / w[0] })
        .collect();
    Ok(ProbeReport { degree: spec.degree, samples: params.len(), condition, coefficient_max, decay_ratios, fit_residual })
}

/// `u_{lambda,mu}(t0, q)` for a single parameter pair.
fn probe_value(atlas: &GridAtlas, series: &TimeSeries, spec: &ProbeSpec, dir: [f64; 2], lambda: f64, mu: f64) -> Result<f64> {
    let time = TimeShift::new(spec.t0, spec.time_eps, lambda)?;
    let tt = TruncatedTranslation::new(spec.frame, [mu * dir[0], mu * dir[1]])?;
    let c = time.cutoff(spec.t0);
    let shifted = TruncatedTranslation { frame: tt.frame, mu: [c * tt.mu[0], c * tt.mu[1]] };
    let q = spec.point;
    let y = shifted.map(atlas, q);
    let s = time.map(spec.t0);
    let piece = series.piece(s)?;
    let (wv, _) = series.weights(piece, s);
    let chart = spec.frame.chart;
    let value_at = |x: [f64; 2]| -> Result<f64> {
        let parts = [
            (&series.samples[piece].rho, wv[0]),
            (&series.samples[piece].rho_t, wv[1]),
            (&series.samples[piece + 1].rho, wv[2]),
            (&series.samples[piece + 1].rho_t, wv[3]),
        ];
        parts.iter().try_fold(0.0, |acc, (f, w)| Ok(acc + w * PointEval::new(atlas, f, spec.interpolation).at(chart, x)?))
    };
    let zeta_q = spec.frame.zeta.eval(spec.frame.radius(atlas, q));
    let zeta_y = spec.frame.zeta.eval(spec.frame.radius(atlas, y));
    let moved = value_at(y)?;
    if zeta_q == 1.0 && zeta_y == 1.0 {
        return Ok(moved);
    }
    Ok(zeta_y * moved + (1.0 - zeta_q) * value_at(q)?)
}
