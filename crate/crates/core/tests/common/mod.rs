//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use willmore_core::grid::{build_grids, GridAtlas};
use willmore_core::surface::{make_sphere, make_torus, ChartId};

/// Profile `r(v)` and its first two derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
}

/// Mean and Gauss curvature of the surface of revolution about the z axis with
/// meridian `(offset + r(v) cos v, r(v) sin v)`, sign chosen so the inward normal
/// of a round sphere gives `H = 1 / r`.
pub fn revolution_curvatures(offset: f64, v: f64, p: Profile) -> (f64, f64) {
    let (s, c) = v.sin_cos();
    let x = offset + p.r * c;
    let dx = p.dr * c - p.r * s;
    let dz = p.dr * s + p.r * c;
    let ddx = p.ddr * c - 2.0 * p.dr * s - p.r * c;
    let ddz = p.ddr * s + 2.0 * p.dr * c - p.r * s;
    let speed = dx.hypot(dz);
    let meridian = (dx * ddz - ddx * dz) / speed.powi(3);
    let parallel = dz / (x * speed);
    (0.5 * (meridian + parallel), meridian * parallel)
}

/// Torus(major, minor) with `rho = amp cos v`: the tube radius becomes `minor - amp cos v`.
pub fn torus_cos_oracle(major: f64, minor: f64, amp: f64, v: f64) -> (f64, f64) {
    let profile = Profile { r: minor - amp * v.cos(), dr: amp * v.sin(), ddr: amp * v.cos() };
    revolution_curvatures(major, v, profile)
}

/// Unit sphere with `rho = amp P2(z)`, at latitude `phi`.
pub fn sphere_p2_oracle(amp: f64, phi: f64) -> (f64, f64) {
    let s = phi.sin();
    let profile = Profile {
        r: 1.0 - amp * 0.5 * (3.0 * s * s - 1.0),
        dr: -amp * 3.0 * s * phi.cos(),
        ddr: -amp * 3.0 * (2.0 * phi).cos(),
    };
    revolution_curvatures(0.0, phi, profile)
}

pub fn sphere_atlas(n: usize) -> GridAtlas {
    build_grids(&make_sphere(1.0).unwrap(), n).unwrap()
}

pub fn torus_atlas(major: f64, minor: f64, n: usize) -> GridAtlas {
    build_grids(&make_torus(major, minor).unwrap(), n).unwrap()
}

/// Height coordinate `z / R` of every node.
pub fn node_z(atlas: &GridAtlas) -> Vec<f64> {
    atlas.sample(|id: ChartId, uv| atlas.surface.chart(id).map.position(uv)[2])
}

pub fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Trigonometric height on a torus: `sum c_k cos(a_k u + b_k v + phase_k)`.
pub fn torus_height(atlas: &GridAtlas, terms: &[(f64, i32, i32, f64)]) -> Vec<f64> {
    atlas.sample(|_, uv| terms.iter().map(|&(c, a, b, ph)| c * (a as f64 * uv[0] + b as f64 * uv[1] + ph).cos()).sum())
}

/// Cubic polynomial in the ambient coordinates, restricted to the sphere.
pub fn sphere_height(atlas: &GridAtlas, coeffs: &[f64; 10]) -> Vec<f64> {
    atlas.sample(|id, uv| {
        let p = atlas.surface.chart(id).map.position(uv);
        let (x, y, z) = (p[0], p[1], p[2]);
        let monomials = [1.0, x, y, z, x * y, y * z, z * x, x * x - y * y, x * y * z, z * z * z];
        monomials.iter().zip(coeffs).map(|(m, c)| m * c).sum()
    })
}
