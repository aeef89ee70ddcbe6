//! Reference surfaces with closed-form chart geometry.
//!
//! The sphere is covered by two stereographic caps, the torus by one
//! doubly periodic chart. Normals point inward so that the unit sphere has
//! Weingarten map equal to the identity.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::cutoff::smooth_step;
use crate::error::{Error, Result};
use crate::tensor::{
    cross, dot, inv2, mul2, norm, scale, sub, Jet, Mat2, Tensor3, Vec3,
};

/// Half-width of the square parameter domain of each stereographic cap.
pub const CAP_HALF_WIDTH: f64 = 1.7;
/// Half-width (in `z / radius`) of the equatorial band where the cap weights blend.
pub const CAP_BLEND_HALF_WIDTH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChartId(pub usize);

/// Which closed surface a chart atlas describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SurfaceKind {
    Sphere { radius: f64 },
    Torus { major: f64, minor: f64 },
}

/// Closed-form chart maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartMap {
    /// Stereographic projection; `pole = +1` covers the upper cap.
    Stereographic { radius: f64, pole: f64 },
    Torus { major: f64, minor: f64 },
}

/// Position and its partial derivatives up to third order.
#[derive(Debug, Clone, Copy)]
pub struct PositionJet {
    pub x: Vec3,
    pub d1: [Vec3; 2],
    pub d2: [[Vec3; 2]; 2],
    pub d3: [[[Vec3; 2]; 2]; 2],
}

impl ChartMap {
    fn coordinate_jets(&self, uv: [f64; 2]) -> [Jet; 3] {
        let u = Jet::variable(0, uv[0]);
        let v = Jet::variable(1, uv[1]);
        match *self {
            ChartMap::Stereographic { radius, pole } => {
                let s = u * u + v * v;
                let inv_q = (s + 1.0).recip();
                [
                    u * inv_q * (2.0 * radius),
                    v * inv_q * (2.0 * radius),
                    (-s + 1.0) * inv_q * (pole * radius),
                ]
            }
            ChartMap::Torus { major, minor } => {
                let rad = v.cos() * minor + major;
                [rad * u.cos(), rad * u.sin(), v.sin() * minor]
            }
        }
    }

    pub fn position(&self, uv: [f64; 2]) -> Vec3 {
        match *self {
            ChartMap::Stereographic { radius, pole } => {
                let s = uv[0] * uv[0] + uv[1] * uv[1];
                let q = 1.0 + s;
                [
                    2.0 * radius * uv[0] / q,
                    2.0 * radius * uv[1] / q,
                    pole * radius * (1.0 - s) / q,
                ]
            }
            ChartMap::Torus { major, minor } => {
                let rad = major + minor * uv[1].cos();
                [rad * uv[0].cos(), rad * uv[0].sin(), minor * uv[1].sin()]
            }
        }
    }

    pub fn jet(&self, uv: [f64; 2]) -> PositionJet {
        let c = self.coordinate_jets(uv);
        let pick = |a: usize, b: usize| [c[0].partial(a, b), c[1].partial(a, b), c[2].partial(a, b)];
        let order = |idx: &[usize]| {
            let a = idx.iter().filter(|&&k| k == 0).count();
            pick(a, idx.len() - a)
        };
        let mut d2 = [[[0.0; 3]; 2]; 2];
        let mut d3 = [[[[0.0; 3]; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                d2[i][j] = order(&[i, j]);
                for k in 0..2 {
                    d3[i][j][k] = order(&[i, j, k]);
                }
            }
        }
        PositionJet { x: pick(0, 0), d1: [pick(1, 0), pick(0, 1)], d2, d3 }
    }

    /// Chart coordinates of a point on the surface, if the chart reaches it.
    pub fn inverse(&self, p: Vec3) -> Option<[f64; 2]> {
        match *self {
            ChartMap::Stereographic { radius, pole } => {
                let denom = radius + pole * p[2];
                (denom > 1e-12 * radius).then(|| [p[0] / denom, p[1] / denom])
            }
            ChartMap::Torus { major, .. } => {
                let u = p[1].atan2(p[0]).rem_euclid(TAU);
                let rad = (p[0] * p[0] + p[1] * p[1]).sqrt() - major;
                let v = p[2].atan2(rad).rem_euclid(TAU);
                Some([u, v])
            }
        }
    }

    /// Sign making `orientation * (x_u x x_v)` the inward normal.
    fn orientation(&self) -> f64 {
        match *self {
            ChartMap::Stereographic { pole, .. } => -pole,
            ChartMap::Torus { .. } => -1.0,
        }
    }
}

/// Axis-aligned parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    /// Membership up to a relative rounding slack, so lattice end nodes are inside.
    pub fn contains(&self, uv: [f64; 2]) -> bool {
        (0..2).all(|k| {
            let slack = 1e-12 * (self.hi[k] - self.lo[k]);
            uv[k] >= self.lo[k] - slack && uv[k] <= self.hi[k] + slack
        })
    }

    /// Distance from `uv` to the rectangle boundary (negative outside).
    pub fn depth(&self, uv: [f64; 2]) -> f64 {
        (0..2)
            .map(|k| (uv[k] - self.lo[k]).min(self.hi[k] - uv[k]))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceChart {
    pub id: ChartId,
    pub map: ChartMap,
    pub domain: Rect,
    pub periodic: bool,
    pub overlaps: Vec<ChartId>,
}

/// Reference geometry at one chart point.
///
/// Index conventions: `l_mixed[i][j]` is `l_i^j`, `christoffel[k][i][j]` is
/// `Gamma^k_ij`, and every derivative array puts the differentiation index first.
#[derive(Debug, Clone, Copy)]
pub struct ChartGeometry {
    pub position: Vec3,
    pub tangents: [Vec3; 2],
    pub normal: Vec3,
    pub g: Mat2,
    pub g_inv: Mat2,
    pub sqrt_det_g: f64,
    pub l: Mat2,
    pub l_mixed: Mat2,
    pub christoffel: Tensor3,
    /// `dg[k][i][j]` is `d_k g_ij`.
    pub dg: Tensor3,
    /// `dg_inv[k][i][j]` is `d_k g^ij`.
    pub dg_inv: Tensor3,
    /// `dl[k][i][j]` is `d_k l_ij`.
    pub dl: Tensor3,
    /// `dl_mixed[k][i][j]` is `d_k l_i^j`.
    pub dl_mixed: Tensor3,
}

impl ChartGeometry {
    pub fn from_jet(jet: &PositionJet, orientation: f64) -> Self {
        let t = jet.d1;
        let n_raw = cross(t[0], t[1]);
        let normal = scale(orientation / norm(n_raw), n_raw);
        let mut g = [[0.0; 2]; 2];
        let mut l = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = dot(t[i], t[j]);
                l[i][j] = dot(jet.d2[i][j], normal);
            }
        }
        let g_inv = inv2(&g);
        let sqrt_det_g = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).sqrt();
        let l_mixed = mul2(&l, &g_inv);

        // d_k nu = -l_km g^mn x_n
        let mut dnu = [[0.0; 3]; 2];
        for k in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let c = -l[k][m] * g_inv[m][n];
                    dnu[k] = crate::tensor::add(dnu[k], scale(c, t[n]));
                }
            }
        }

        let mut christoffel = [[[0.0; 2]; 2]; 2];
        let mut dg = [[[0.0; 2]; 2]; 2];
        let mut dl = [[[0.0; 2]; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let first_kind = [dot(jet.d2[i][j], t[0]), dot(jet.d2[i][j], t[1])];
                for k in 0..2 {
                    christoffel[k][i][j] = g_inv[k][0] * first_kind[0] + g_inv[k][1] * first_kind[1];
                    dg[k][i][j] = dot(jet.d2[i][k], t[j]) + dot(t[i], jet.d2[j][k]);
                    dl[k][i][j] = dot(jet.d3[i][j][k], normal) + dot(jet.d2[i][j], dnu[k]);
                }
            }
        }
        let mut dg_inv = [[[0.0; 2]; 2]; 2];
        let mut dl_mixed = [[[0.0; 2]; 2]; 2];
        for k in 0..2 {
            let dgk_inv = mul2(&mul2(&g_inv, &dg[k]), &g_inv);
            for i in 0..2 {
                for j in 0..2 {
                    dg_inv[k][i][j] = -dgk_inv[i][j];
                }
            }
            let a = mul2(&dl[k], &g_inv);
            let b = mul2(&l, &dg_inv[k]);
            for i in 0..2 {
                for j in 0..2 {
                    dl_mixed[k][i][j] = a[i][j] + b[i][j];
                }
            }
        }
        Self {
            position: jet.x,
            tangents: t,
            normal,
            g,
            g_inv,
            sqrt_det_g,
            l,
            l_mixed,
            christoffel,
            dg,
            dg_inv,
            dl,
            dl_mixed,
        }
    }

    pub fn mean_curvature(&self) -> f64 {
        0.5 * (self.l_mixed[0][0] + self.l_mixed[1][1])
    }

    pub fn gauss_curvature(&self) -> f64 {
        crate::tensor::det2(&self.l_mixed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSurface {
    pub kind: SurfaceKind,
    pub charts: Vec<SurfaceChart>,
    pub tubular_a: f64,
    pub euler_char: i32,
}

pub fn make_sphere(radius: f64) -> Result<ReferenceSurface> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter { name: "radius", reason: format!("must be positive, got {radius}") });
    }
    let domain = Rect { lo: [-CAP_HALF_WIDTH; 2], hi: [CAP_HALF_WIDTH; 2] };
    let charts = [1.0, -1.0]
        .into_iter()
        .enumerate()
        .map(|(k, pole)| SurfaceChart {
            id: ChartId(k),
            map: ChartMap::Stereographic { radius, pole },
            domain,
            periodic: false,
            overlaps: vec![ChartId(1 - k)],
        })
        .collect();
    let kind = SurfaceKind::Sphere { radius };
    Ok(ReferenceSurface { kind, charts, tubular_a: tubular_radius_of(kind), euler_char: 2 })
}

pub fn make_torus(major: f64, minor: f64) -> Result<ReferenceSurface> {
    if !(minor.is_finite() && minor > 0.0) {
        return Err(Error::InvalidParameter { name: "r", reason: format!("must be positive, got {minor}") });
    }
    if !(major.is_finite() && major > minor) {
        return Err(Error::InvalidParameter {
            name: "R",
            reason: format!("must exceed r = {minor} to avoid self-intersection, got {major}"),
        });
    }
    let kind = SurfaceKind::Torus { major, minor };
    let chart = SurfaceChart {
        id: ChartId(0),
        map: ChartMap::Torus { major, minor },
        domain: Rect { lo: [0.0, 0.0], hi: [TAU, TAU] },
        periodic: true,
        overlaps: Vec::new(),
    };
    Ok(ReferenceSurface { kind, charts: vec![chart], tubular_a: tubular_radius_of(kind), euler_char: 0 })
}

/// Half the reciprocal of the largest principal curvature magnitude.
fn tubular_radius_of(kind: SurfaceKind) -> f64 {
    let max_curvature = match kind {
        SurfaceKind::Sphere { radius } => 1.0 / radius,
        SurfaceKind::Torus { major, minor } => (1.0 / minor).max(1.0 / (major - minor)),
    };
    0.5 / max_curvature
}

pub fn tubular_radius(surface: &ReferenceSurface) -> f64 {
    surface.tubular_a
}

impl ReferenceSurface {
    pub fn chart(&self, id: ChartId) -> &SurfaceChart {
        &self.charts[id.0]
    }

    /// Closed-form geometry at a chart point.
    pub fn chart_geometry(&self, id: ChartId, uv: [f64; 2]) -> Result<ChartGeometry> {
        let chart = self.chart(id);
        if !uv.iter().all(|x| x.is_finite()) || (!chart.periodic && !chart.domain.contains(uv)) {
            return Err(Error::OutsideDomain { chart: id.0, u: uv[0], v: uv[1] });
        }
        Ok(ChartGeometry::from_jet(&chart.map.jet(uv), chart.map.orientation()))
    }

    /// Inward unit normal at a surface point given in any chart.
    pub fn normal_at(&self, id: ChartId, uv: [f64; 2]) -> Vec3 {
        let map = self.chart(id).map;
        let jet = map.jet(uv);
        let n = cross(jet.d1[0], jet.d1[1]);
        scale(map.orientation() / norm(n), n)
    }

    /// Squared partition-of-unity weight of chart `id` at a chart point.
    pub fn pou_weight_sq(&self, id: ChartId, uv: [f64; 2]) -> f64 {
        match self.kind {
            SurfaceKind::Torus { .. } => 1.0,
            SurfaceKind::Sphere { radius } => {
                let ChartMap::Stereographic { pole, .. } = self.chart(id).map else {
                    unreachable!("sphere charts are stereographic")
                };
                let height = pole * self.chart(id).map.position(uv)[2] / radius;
                smooth_step((height + CAP_BLEND_HALF_WIDTH) / (2.0 * CAP_BLEND_HALF_WIDTH))
            }
        }
    }

    /// Map chart coordinates of `from` into chart `to`.
    pub fn transition(&self, from: ChartId, to: ChartId, uv: [f64; 2]) -> Option<[f64; 2]> {
        let p = self.chart(from).map.position(uv);
        self.chart(to).map.inverse(p)
    }

    /// Every chart whose domain contains the surface point, with its coordinates.
    pub fn locate(&self, p: Vec3) -> Vec<(ChartId, [f64; 2])> {
        self.charts
            .iter()
            .filter_map(|c| {
                let uv = c.map.inverse(p)?;
                (c.periodic || c.domain.contains(uv)).then_some((c.id, uv))
            })
            .collect()
    }

    /// Largest principal curvature magnitude of the reference surface.
    pub fn max_principal_curvature(&self) -> f64 {
        0.5 / self.tubular_a
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            SurfaceKind::Sphere { radius } => 4.0 * PI * radius * radius,
            SurfaceKind::Torus { major, minor } => 4.0 * PI * PI * major * minor,
        }
    }
}

/// Signed distance between two surface points, for round-trip checks.
pub fn point_distance(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}
