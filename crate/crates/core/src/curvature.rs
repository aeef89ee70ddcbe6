//! Pointwise geometry of the normal graph `p + rho(p) nu(p)` over a reference surface.
//!
//! Every quantity is expressed in the reference chart coordinates. Index
//! conventions follow [`ChartGeometry`]: `r[i][j]` is `r_i^j`, Christoffel
//! arrays put the upper index first.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, NodeId, Result};
use crate::grid::{GridAtlas, GridField, MultiIndex, StencilOrder};
use crate::par::*;
use crate::surface::{ChartGeometry, ChartId};
use crate::tensor::{add, contract2, det2, inv2, mul2, scale, sub, Mat2, Tensor3, Vec3, IDENTITY2};

/// Smallest admissible `|det(I - rho L)|`.
pub const RESOLVENT_DET_FLOOR: f64 = 1e-10;

/// Height value with first and second chart derivatives at one node.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HeightJet {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: Mat2,
}

/// Height function on the grid with a derivative cache.
#[derive(Debug)]
pub struct HeightField {
    rho: Vec<f64>,
    grad: [Vec<f64>; 2],
    hess: [Vec<f64>; 3],
    field: Option<GridField>,
    max_order: AtomicUsize,
}

impl Clone for HeightField {
    fn clone(&self) -> Self {
        Self {
            rho: self.rho.clone(),
            grad: self.grad.clone(),
            hess: self.hess.clone(),
            field: self.field.clone(),
            max_order: AtomicUsize::new(self.max_order.load(Ordering::Relaxed)),
        }
    }
}

impl HeightField {
    /// Derivatives from the fourth-order grid stencils.
    pub fn discrete(atlas: &GridAtlas, rho: &[f64]) -> Result<Self> {
        let field = atlas.field(rho);
        let d = |idx| atlas.derivative(&field, idx, StencilOrder::Fourth);
        Ok(Self {
            rho: rho.to_vec(),
            grad: [d(MultiIndex::U)?, d(MultiIndex::V)?],
            hess: [d(MultiIndex::UU)?, d(MultiIndex::UV)?, d(MultiIndex::VV)?],
            field: Some(field),
            max_order: AtomicUsize::new(0),
        })
    }

    /// Derivatives supplied in closed form by the caller.
    pub fn analytic(atlas: &GridAtlas, f: impl Fn(ChartId, [f64; 2]) -> HeightJet + Sync) -> Self {
        let jets: Vec<HeightJet> = atlas
            .nodes()
            .into_par_iter()
            .map(|k| f(ChartId(atlas.chart_of(k)), atlas.coords()[k]))
            .collect();
        Self {
            rho: jets.iter().map(|j| j.value).collect(),
            grad: [0, 1].map(|a| jets.iter().map(|j| j.grad[a]).collect()),
            hess: [(0, 0), (0, 1), (1, 1)].map(|(a, b)| jets.iter().map(|j| j.hess[a][b]).collect()),
            field: None,
            max_order: AtomicUsize::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        self.touch(0);
        &self.rho
    }

    pub fn grad(&self, axis: usize) -> &[f64] {
        self.touch(1);
        &self.grad[axis]
    }

    pub fn hess(&self, i: usize, j: usize) -> &[f64] {
        self.touch(2);
        &self.hess[i + j]
    }

    pub fn jet(&self, k: usize) -> HeightJet {
        self.touch(2);
        let uv = self.hess[1][k];
        HeightJet {
            value: self.rho[k],
            grad: [self.grad[0][k], self.grad[1][k]],
            hess: [[self.hess[0][k], uv], [uv, self.hess[2][k]]],
        }
    }

    /// Higher derivatives on demand (discrete fields only).
    pub fn derivative(&self, atlas: &GridAtlas, index: MultiIndex) -> Result<Vec<f64>> {
        self.touch(index.order());
        let field = self.field.as_ref().ok_or(Error::InvalidParameter {
            name: "height",
            reason: "analytic height fields carry derivatives up to order two only".into(),
        })?;
        atlas.derivative(field, index, StencilOrder::Fourth)
    }

    pub fn sup(&self) -> f64 {
        self.rho.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Highest derivative order requested since construction.
    pub fn max_order_requested(&self) -> usize {
        self.max_order.load(Ordering::Relaxed)
    }

    fn touch(&self, order: usize) {
        self.max_order.fetch_max(order, Ordering::Relaxed);
    }
}

/// Why a node failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointFailure {
    NearSingular(f64),
    Degenerate(f64),
}

impl PointFailure {
    fn at(self, node: NodeId) -> Error {
        match self {
            PointFailure::NearSingular(det) => Error::NearSingular { node, det },
            PointFailure::Degenerate(det) => Error::DegenerateMetric { node, det },
        }
    }
}

/// `(I - rho L)^{-1}` by Cramer's rule.
pub fn resolvent_at(geo: &ChartGeometry, rho: f64) -> std::result::Result<Mat2, PointFailure> {
    let mut m = IDENTITY2;
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] -= rho * geo.l_mixed[i][j];
        }
    }
    let det = det2(&m);
    if det.abs() < RESOLVENT_DET_FLOOR {
        return Err(PointFailure::NearSingular(det));
    }
    Ok(inv2(&m))
}

/// Covariant slope `a_i = r_i^j d_j rho` and `beta = (1 + |a|^2)^{-1/2}`.
pub fn slope_at(geo: &ChartGeometry, r: &Mat2, grad: [f64; 2]) -> ([f64; 2], f64) {
    let a = [r[0][0] * grad[0] + r[0][1] * grad[1], r[1][0] * grad[0] + r[1][1] * grad[1]];
    let mut sq = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            sq += geo.g_inv[i][k] * a[i] * a[k];
        }
    }
    (a, 1.0 / (1.0 + sq).sqrt())
}

/// `(l g^-1 l)_ij`.
fn l_squared(geo: &ChartGeometry) -> Mat2 {
    mul2(&geo.l_mixed, &geo.l)
}

/// First and second fundamental forms of the graph with its frame.
#[derive(Debug, Clone, Copy)]
pub struct Forms {
    pub g: Mat2,
    pub g_inv: Mat2,
    pub det_g: f64,
    pub l: Mat2,
    pub normal: Vec3,
    pub tangents: [Vec3; 2],
}

pub fn forms_at(
    geo: &ChartGeometry,
    jet: &HeightJet,
    slope: [f64; 2],
    beta: f64,
) -> std::result::Result<Forms, PointFailure> {
    let rho = jet.value;
    let d = jet.grad;
    let lm = &geo.l_mixed;
    let ll = l_squared(geo);

    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = geo.g[i][j] - 2.0 * rho * geo.l[i][j] + rho * rho * ll[i][j] + d[i] * d[j];
        }
    }
    let det_g = det2(&g);
    if det_g <= 0.0 || !det_g.is_finite() {
        return Err(PointFailure::Degenerate(det_g));
    }
    let g_inv = inv2(&g);

    // every resolvent term carries r_k^l d_l rho, which is the slope a_k
    let rd = slope;
    let mut l = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let mut s = geo.l[i][j] - ll[i][j] * rho + jet.hess[i][j];
            for k in 0..2 {
                s -= geo.christoffel[k][i][j] * d[k];
                let mut cov = geo.dl_mixed[j][i][k];
                for h in 0..2 {
                    cov += geo.christoffel[k][j][h] * lm[i][h] - geo.christoffel[h][i][j] * lm[h][k];
                }
                s += rd[k] * cov * rho;
                s += rd[k] * lm[i][k] * d[j];
                let mut lmlm = 0.0;
                for h in 0..2 {
                    lmlm += lm[j][h] * lm[h][k];
                }
                s += rd[k] * lmlm * rho * d[i];
                s += lm[j][k] * d[i] * d[k];
            }
            l[i][j] = beta * s;
        }
    }

    let a_up = [
        geo.g_inv[0][0] * slope[0] + geo.g_inv[0][1] * slope[1],
        geo.g_inv[1][0] * slope[0] + geo.g_inv[1][1] * slope[1],
    ];
    let tangential = add(scale(a_up[0], geo.tangents[0]), scale(a_up[1], geo.tangents[1]));
    let normal = scale(beta, sub(geo.normal, tangential));
    let tangents = [0, 1].map(|i| {
        let shift = add(scale(lm[i][0], geo.tangents[0]), scale(lm[i][1], geo.tangents[1]));
        add(sub(geo.tangents[i], scale(rho, shift)), scale(d[i], geo.normal))
    });
    Ok(Forms { g, g_inv, det_g, l, normal, tangents })
}

/// `(H, K)` from the forms.
pub fn curvatures_at(forms: &Forms) -> (f64, f64) {
    (0.5 * contract2(&forms.g_inv, &forms.l), det2(&forms.l) / forms.det_g)
}

/// Christoffel symbols `gamma^i_jk` of the graph metric, from closed-form
/// reference derivatives and the height jet.
pub fn pullback_christoffel_at(geo: &ChartGeometry, jet: &HeightJet, forms: &Forms) -> Tensor3 {
    let rho = jet.value;
    let d = jet.grad;
    let ll = l_squared(geo);
    let mut dsigma = [[[0.0; 2]; 2]; 2];
    for m in 0..2 {
        let dll = {
            let a = mul2(&mul2(&geo.dl[m], &geo.g_inv), &geo.l);
            let b = mul2(&mul2(&geo.l, &geo.dg_inv[m]), &geo.l);
            let c = mul2(&geo.l_mixed, &geo.dl[m]);
            [[a[0][0] + b[0][0] + c[0][0], a[0][1] + b[0][1] + c[0][1]], [a[1][0] + b[1][0] + c[1][0], a[1][1] + b[1][1] + c[1][1]]]
        };
        for i in 0..2 {
            for j in 0..2 {
                dsigma[m][i][j] = geo.dg[m][i][j] - 2.0 * d[m] * geo.l[i][j] - 2.0 * rho * geo.dl[m][i][j]
                    + 2.0 * rho * d[m] * ll[i][j]
                    + rho * rho * dll[i][j]
                    + jet.hess[i][m] * d[j]
                    + d[i] * jet.hess[j][m];
            }
        }
    }
    let mut gamma = [[[0.0; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                gamma[i][j][k] = (0..2)
                    .map(|l| 0.5 * forms.g_inv[i][l] * (dsigma[j][k][l] + dsigma[k][j][l] - dsigma[l][j][k]))
                    .sum();
            }
        }
    }
    gamma
}

/// Everything the operators need at one node.
#[derive(Debug, Clone, Copy)]
pub struct NodeCurvature {
    pub resolvent: Mat2,
    pub slope: [f64; 2],
    pub beta: f64,
    pub forms: Forms,
    pub mean: f64,
    pub gauss: f64,
    /// `gamma^i_jk` of the pulled-back metric.
    pub christoffel: Tensor3,
}

impl NodeCurvature {
    pub fn at(geo: &ChartGeometry, jet: &HeightJet) -> std::result::Result<Self, PointFailure> {
        let resolvent = resolvent_at(geo, jet.value)?;
        let (slope, beta) = slope_at(geo, &resolvent, jet.grad);
        let forms = forms_at(geo, jet, slope, beta)?;
        let (mean, gauss) = curvatures_at(&forms);
        let christoffel = pullback_christoffel_at(geo, jet, &forms);
        Ok(Self { resolvent, slope, beta, forms, mean, gauss, christoffel })
    }

    /// `sigma^{jk}`, identical to the inverse graph metric.
    pub fn sigma_inv(&self) -> &Mat2 {
        &self.forms.g_inv
    }
}

/// Pointwise curvature data over all owned nodes.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub nodes: Vec<NodeCurvature>,
}

impl CurvatureBundle {
    pub fn build(atlas: &GridAtlas, height: &HeightField) -> Result<Self> {
        let geometry = atlas.geometry();
        let jets: Vec<HeightJet> = (0..height.len()).map(|k| height.jet(k)).collect();
        let nodes = atlas
            .nodes()
            .into_par_iter()
            .map(|k| NodeCurvature::at(&geometry[k], &jets[k]).map_err(|e| e.at(atlas.node_id(k))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes })
    }

    pub fn mean(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.mean).collect()
    }

    pub fn gauss(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.gauss).collect()
    }

    pub fn beta(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.beta).collect()
    }

    /// `sqrt(det g_Gamma)`, the area element in reference chart coordinates.
    pub fn area_element(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.forms.det_g.sqrt()).collect()
    }
}

/// `(I - rho L)^{-1}` at every node.
pub fn resolvent(atlas: &GridAtlas, height: &HeightField) -> Result<Vec<Mat2>> {
    let rho = height.values();
    atlas
        .geometry()
        .iter()
        .zip(rho)
        .enumerate()
        .map(|(k, (geo, &r))| resolvent_at(geo, r).map_err(|e| e.at(atlas.node_id(k))))
        .collect()
}

/// Slope components and `beta` at every node.
pub fn slope(atlas: &GridAtlas, height: &HeightField) -> Result<Vec<([f64; 2], f64)>> {
    let r = resolvent(atlas, height)?;
    Ok(atlas
        .geometry()
        .iter()
        .zip(&r)
        .enumerate()
        .map(|(k, (geo, r))| slope_at(geo, r, [height.grad(0)[k], height.grad(1)[k]]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grids;
    use crate::surface::{make_sphere, make_torus};
    use crate::tensor::{dot, norm};

    fn constant(c: f64) -> impl Fn(ChartId, [f64; 2]) -> HeightJet + Sync {
        move |_, _| HeightJet { value: c, ..Default::default() }
    }

    #[test]
    fn zero_height_collapses_to_reference() {
        for surface in [make_sphere(1.0).unwrap(), make_torus(2.0, 1.0).unwrap()] {
            let atlas = build_grids(&surface, 16).unwrap();
            let h = HeightField::analytic(&atlas, constant(0.0));
            let b = CurvatureBundle::build(&atlas, &h).unwrap();
            for (n, geo) in b.nodes.iter().zip(atlas.geometry()) {
                assert_eq!(n.resolvent, IDENTITY2);
                assert_eq!(n.beta, 1.0);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((n.forms.g[i][j] - geo.g[i][j]).abs() < 1e-10);
                        assert!((n.forms.l[i][j] - geo.l[i][j]).abs() < 1e-10);
                        for k in 0..2 {
                            assert!((n.christoffel[i][j][k] - geo.christoffel[i][j][k]).abs() < 1e-10);
                        }
                    }
                }
                assert!(norm(sub(n.forms.normal, geo.normal)) < 1e-12);
                assert!((n.mean - geo.mean_curvature()).abs() < 1e-10);
                assert!((n.gauss - geo.gauss_curvature()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn concentric_spheres_are_exact() {
        let s = make_sphere(1.0).unwrap();
        let atlas = build_grids(&s, 16).unwrap();
        for c in [-0.2, 0.1, 0.2, 0.3] {
            let h = HeightField::analytic(&atlas, constant(c));
            let b = CurvatureBundle::build(&atlas, &h).unwrap();
            let want = 1.0 / (1.0 - c);
            for (n, geo) in b.nodes.iter().zip(atlas.geometry()) {
                assert!((n.mean - want).abs() < 1e-10);
                assert!((n.gauss - want * want).abs() < 1e-10);
                assert!((n.resolvent[0][0] - want).abs() < 1e-12 && n.resolvent[0][1].abs() < 1e-12);
                let s2 = (1.0 - c) * (1.0 - c);
                for i in 0..2 {
                    for j in 0..2 {
                        assert!((n.forms.g[i][j] - s2 * geo.g[i][j]).abs() < 1e-12 * geo.g[i][j].abs().max(1.0));
                        assert!((n.forms.l[i][j] - (1.0 - c) * geo.g[i][j]).abs() < 1e-12 * geo.g[i][j].abs().max(1.0));
                        for k in 0..2 {
                            assert!((n.christoffel[i][j][k] - geo.christoffel[i][j][k]).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn near_singular_resolvent_is_reported() {
        let s = make_sphere(1.0).unwrap();
        let atlas = build_grids(&s, 16).unwrap();
        let h = HeightField::analytic(&atlas, constant(1.0));
        assert!(matches!(CurvatureBundle::build(&atlas, &h), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn frame_is_orthonormal_and_consistent() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 24).unwrap();
        let h = HeightField::analytic(&atlas, move |_, uv| HeightJet {
            value: 0.1 * uv[1].sin() + 0.05 * uv[0].cos(),
            grad: [-0.05 * uv[0].sin(), 0.1 * uv[1].cos()],
            hess: [[-0.05 * uv[0].cos(), 0.0], [0.0, -0.1 * uv[1].sin()]],
        });
        let b = CurvatureBundle::build(&atlas, &h).unwrap();
        for n in &b.nodes {
            let f = &n.forms;
            assert!((norm(f.normal) - 1.0).abs() < 1e-10);
            for i in 0..2 {
                assert!(dot(f.normal, f.tangents[i]).abs() < 1e-10);
                for j in 0..2 {
                    assert!((dot(f.tangents[i], f.tangents[j]) - f.g[i][j]).abs() < 1e-10);
                }
            }
            let id = mul2(&f.g_inv, &f.g);
            assert!((id[0][0] - 1.0).abs() < 1e-10 && id[0][1].abs() < 1e-10);
            assert!(n.beta > 0.0 && n.beta <= 1.0);
            assert!(n.mean * n.mean - n.gauss >= -1e-10);
        }
    }

    #[test]
    fn slope_matches_direct_formula() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 24).unwrap();
        let h = HeightField::analytic(&atlas, move |_, uv| HeightJet {
            value: 0.1 * uv[1].sin(),
            grad: [0.0, 0.1 * uv[1].cos()],
            hess: [[0.0, 0.0], [0.0, -0.1 * uv[1].sin()]],
        });
        let s = slope(&atlas, &h).unwrap();
        for (k, ((_, beta), geo)) in s.iter().zip(atlas.geometry()).enumerate() {
            let v = atlas.coords()[k][1];
            // on the torus l_v^v = 1/r and g^vv = 1/r^2 with r = 1
            let r_vv = 1.0 / (1.0 - 0.1 * v.sin() * geo.l_mixed[1][1]);
            let dv = 0.1 * v.cos();
            let want = 1.0 / (1.0 + geo.g_inv[1][1] * (r_vv * dv).powi(2)).sqrt();
            assert!((beta - want).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_cache_tracks_order() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 16).unwrap();
        let h = HeightField::discrete(&atlas, &atlas.sample(|_, uv| 0.1 * uv[1].cos())).unwrap();
        let _ = CurvatureBundle::build(&atlas, &h).unwrap();
        assert_eq!(h.max_order_requested(), 2);
        let _ = h.derivative(&atlas, MultiIndex(0, 3)).unwrap();
        assert_eq!(h.max_order_requested(), 3);
    }
}
