//! Evolution operators of the graph formulation.
//!
//! The mean curvature splits as `H = P1(rho) rho + F1(rho)` with `P1` a second
//! order operator whose coefficients depend on `rho` and its first derivatives.
//! The flow right-hand side then becomes `P(rho) rho - F(rho)` where
//! `P = (1/beta) Lap P1 + R` is fourth order and `F` uses at most second
//! derivatives of `rho`.

use crate::curvature::{CurvatureBundle, HeightField, NodeCurvature};
use crate::error::{Error, Result};
use crate::grid::{GridAtlas, MultiIndex, StencilOrder};
use crate::par::*;
use crate::sparse::{apply_terms, assemble_operator, SparseOperator, StencilTerm};
use crate::surface::ChartGeometry;
use crate::tensor::{contract2, mul2, Mat2};

/// Smallest `beta` the operators accept before dividing by it.
pub const BETA_FLOOR: f64 = 1e-8;

/// Number of plane-wave directions sampled for the symbol check.
const SYMBOL_DIRECTIONS: usize = 16;

/// Coefficients of a second order operator `a^{ij} d_ij + b^m d_m`, with the
/// mixed term stored once as `a^{uv} + a^{vu}`.
#[derive(Debug, Clone)]
pub struct SecondOrderCoefficients {
    pub uu: Vec<f64>,
    pub uv: Vec<f64>,
    pub vv: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SecondOrderCoefficients {
    fn from_nodes(n: usize, f: impl Fn(usize) -> (Mat2, [f64; 2]) + Sync) -> Self {
        let rows: Vec<(Mat2, [f64; 2])> = (0..n).into_par_iter().map(&f).collect();
        Self {
            uu: rows.iter().map(|r| r.0[0][0]).collect(),
            uv: rows.iter().map(|r| r.0[0][1] + r.0[1][0]).collect(),
            vv: rows.iter().map(|r| r.0[1][1]).collect(),
            u: rows.iter().map(|r| r.1[0]).collect(),
            v: rows.iter().map(|r| r.1[1]).collect(),
        }
    }

    pub fn terms(&self) -> [StencilTerm<'_>; 5] {
        [
            StencilTerm { index: MultiIndex::UU, coefficient: &self.uu },
            StencilTerm { index: MultiIndex::UV, coefficient: &self.uv },
            StencilTerm { index: MultiIndex::VV, coefficient: &self.vv },
            StencilTerm { index: MultiIndex::U, coefficient: &self.u },
            StencilTerm { index: MultiIndex::V, coefficient: &self.v },
        ]
    }

    pub fn assemble(&self, atlas: &GridAtlas, accuracy: StencilOrder) -> Result<SparseOperator> {
        assemble_operator(atlas, &self.terms(), accuracy)
    }
}

/// `sigma^{jk} (d_jk - gamma^i_jk d_i)`.
pub fn laplace_coefficients(bundle: &CurvatureBundle) -> SecondOrderCoefficients {
    SecondOrderCoefficients::from_nodes(bundle.nodes.len(), |k| {
        let n = &bundle.nodes[k];
        let s = n.sigma_inv();
        let first = [0, 1].map(|i| -contract2(s, &n.christoffel[i]));
        (*s, first)
    })
}

/// Laplace-Beltrami of the graph metric applied to `f` by direct stencils.
pub fn laplace_beltrami(atlas: &GridAtlas, bundle: &CurvatureBundle, f: &[f64]) -> Result<Vec<f64>> {
    let c = laplace_coefficients(bundle);
    apply_terms(atlas, &c.terms(), &atlas.field(f), StencilOrder::Fourth)
}

/// Coefficients of `P1(rho)`, read off from the second fundamental form of the graph.
fn p1_at(geo: &ChartGeometry, node: &NodeCurvature, jet_grad: [f64; 2], rho: f64) -> (Mat2, [f64; 2]) {
    let gi = &node.forms.g_inv;
    let lm = &geo.l_mixed;
    let half_beta = 0.5 * node.beta;
    let mut b = [0.0; 2];
    for (m, bm) in b.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut t = -geo.christoffel[m][i][j] + lm[j][m] * jet_grad[i];
                for k in 0..2 {
                    let mut cov = geo.dl_mixed[j][i][k];
                    let mut lmlm = 0.0;
                    for h in 0..2 {
                        cov += geo.christoffel[k][j][h] * lm[i][h] - geo.christoffel[h][i][j] * lm[h][k];
                        lmlm += lm[j][h] * lm[h][k];
                    }
                    let r_km = node.resolvent[k][m];
                    t += r_km * (cov * rho + lm[i][k] * jet_grad[j] + lmlm * rho * jet_grad[i]);
                }
                s += gi[i][j] * t;
            }
        }
        *bm = half_beta * s;
    }
    let second = [[half_beta * gi[0][0], half_beta * gi[0][1]], [half_beta * gi[1][0], half_beta * gi[1][1]]];
    (second, b)
}

/// `(P1 coefficients, F1)` with `P1(rho) rho + F1 = H`.
pub fn split_mean_curvature(
    atlas: &GridAtlas,
    bundle: &CurvatureBundle,
    height: &HeightField,
) -> (SecondOrderCoefficients, Vec<f64>) {
    let geo = atlas.geometry();
    let rho = height.values();
    let gu = height.grad(0);
    let gv = height.grad(1);
    let coeffs = SecondOrderCoefficients::from_nodes(bundle.nodes.len(), |k| {
        p1_at(&geo[k], &bundle.nodes[k], [gu[k], gv[k]], rho[k])
    });
    let f1 = bundle
        .nodes
        .iter()
        .zip(geo)
        .zip(rho)
        .map(|((n, g), &r)| {
            let ll = mul2(&g.l_mixed, &g.l);
            let mut m = g.l;
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] -= r * ll[i][j];
                }
            }
            0.5 * n.beta * contract2(&n.forms.g_inv, &m)
        })
        .collect();
    (coeffs, f1)
}

/// `beta * tr(G^-1 l)` and `beta * tr(G^-1 l g^-1 l)`, the fields inside the remainder.
fn remainder_fields(atlas: &GridAtlas, bundle: &CurvatureBundle) -> (Vec<f64>, Vec<f64>) {
    bundle
        .nodes
        .iter()
        .zip(atlas.geometry())
        .map(|(n, g)| {
            let ll = mul2(&g.l_mixed, &g.l);
            (n.beta * contract2(&n.forms.g_inv, &g.l), n.beta * contract2(&n.forms.g_inv, &ll))
        })
        .unzip()
}

/// Operators and fields of the quasilinear form at one height field.
///
/// `R(rho) w = remainder_constant + remainder_multiplier * w`; the constant part
/// carries no trailing factor of the height and is frozen.
#[derive(Debug, Clone)]
pub struct OperatorSplit {
    pub laplace_coefficients: SecondOrderCoefficients,
    pub laplace: SparseOperator,
    pub p1_coefficients: SecondOrderCoefficients,
    pub p1: SparseOperator,
    pub f1: Vec<f64>,
    pub remainder_constant: Vec<f64>,
    pub remainder_multiplier: Vec<f64>,
    /// `R(rho) rho`.
    pub remainder: Vec<f64>,
    /// Linear part of `P(rho)`: `diag(1/beta) Lap P1 + diag(remainder_multiplier)`.
    pub stiff: SparseOperator,
    pub forcing: Vec<f64>,
    pub rhs_direct: Vec<f64>,
    pub el_residual: Vec<f64>,
    pub inv_beta: Vec<f64>,
    /// Minimum over nodes and directions of `(xi^T G^-1 xi)^2 / |xi|^4`.
    pub symbol_floor: f64,
}

impl OperatorSplit {
    pub fn build(atlas: &GridAtlas, bundle: &CurvatureBundle, height: &HeightField) -> Result<Self> {
        let inv_beta = bundle
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| {
                if n.beta < BETA_FLOOR {
                    Err(Error::SlopeBlowup { node: atlas.node_id(k), beta: n.beta })
                } else {
                    Ok(1.0 / n.beta)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let symbol_floor = symbol_floor(bundle);
        if symbol_floor <= 0.0 {
            return Err(Error::EllipticityLoss(symbol_floor));
        }

        let laplace_coefficients = laplace_coefficients(bundle);
        let laplace = laplace_coefficients.assemble(atlas, StencilOrder::Fourth)?;
        let (p1_coefficients, f1) = split_mean_curvature(atlas, bundle, height);
        let p1 = p1_coefficients.assemble(atlas, StencilOrder::Fourth)?;

        let rho = height.values();
        let (a_field, b_field) = remainder_fields(atlas, bundle);
        let lap_a = laplace.matvec(&a_field);
        let lap_b = laplace.matvec(&b_field);
        let remainder_constant: Vec<f64> = lap_a.iter().zip(&inv_beta).map(|(x, ib)| 0.5 * ib * x).collect();
        let remainder_multiplier: Vec<f64> = lap_b.iter().zip(&inv_beta).map(|(x, ib)| -0.5 * ib * x).collect();
        let remainder = remainder_constant
            .iter()
            .zip(&remainder_multiplier)
            .zip(rho)
            .map(|((c, m), r)| c + m * r)
            .collect();

        let mean = bundle.mean();
        let cubic: Vec<f64> = bundle
            .nodes
            .iter()
            .map(|n| 2.0 * n.mean * (n.mean * n.mean - n.gauss))
            .collect();
        let lap_h = laplace.matvec(&mean);
        let el_residual: Vec<f64> = lap_h.iter().zip(&cubic).map(|(a, b)| a + b).collect();
        let rhs_direct = el_residual.iter().zip(&inv_beta).map(|(e, ib)| e * ib).collect();
        let lap_f1 = laplace.matvec(&f1);
        let forcing = (0..rho.len())
            .map(|k| -inv_beta[k] * lap_f1[k] + remainder_constant[k] + remainder_multiplier[k] * rho[k] - inv_beta[k] * cubic[k])
            .collect();

        let stiff = laplace
            .compose(&p1)
            .scale_rows(&inv_beta)
            .scaled_plus_diagonal(1.0, &remainder_multiplier);

        Ok(Self {
            laplace_coefficients,
            laplace,
            p1_coefficients,
            p1,
            f1,
            remainder_constant,
            remainder_multiplier,
            remainder,
            stiff,
            forcing,
            rhs_direct,
            el_residual,
            inv_beta,
            symbol_floor,
        })
    }

    /// `P(rho) w`, affine in `w` through the frozen remainder constant.
    pub fn apply_stiff(&self, w: &[f64]) -> Vec<f64> {
        let mut out = self.stiff.matvec(w);
        out.iter_mut().zip(&self.remainder_constant).for_each(|(o, c)| *o += c);
        out
    }

    /// The same operator assembled with compact second-order stencils.
    pub fn low_order_stiff(&self, atlas: &GridAtlas) -> Result<SparseOperator> {
        let lap = self.laplace_coefficients.assemble(atlas, StencilOrder::Second)?;
        let p1 = self.p1_coefficients.assemble(atlas, StencilOrder::Second)?;
        Ok(lap
            .compose(&p1)
            .scale_rows(&self.inv_beta)
            .scaled_plus_diagonal(1.0, &self.remainder_multiplier))
    }

    /// Blended sup of the Euler-Lagrange residual.
    pub fn el_residual_sup(&self, atlas: &GridAtlas) -> f64 {
        atlas.blended_sup(&self.el_residual)
    }
}

fn symbol_floor(bundle: &CurvatureBundle) -> f64 {
    let dirs: Vec<[f64; 2]> = (0..SYMBOL_DIRECTIONS)
        .map(|k| {
            let t = std::f64::consts::PI * k as f64 / SYMBOL_DIRECTIONS as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    bundle
        .nodes
        .iter()
        .flat_map(|n| {
            let s = n.sigma_inv();
            dirs.iter().map(move |x| {
                let q = s[0][0] * x[0] * x[0] + (s[0][1] + s[1][0]) * x[0] * x[1] + s[1][1] * x[1] * x[1];
                q * q
            })
        })
        .fold(f64::INFINITY, f64::min)
}

/// `V = beta * rho_t`.
pub fn normal_velocity(bundle: &CurvatureBundle, rho_t: &[f64]) -> Vec<f64> {
    bundle.nodes.iter().zip(rho_t).map(|(n, r)| n.beta * r).collect()
}
