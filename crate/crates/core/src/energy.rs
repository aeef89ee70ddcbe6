//! Willmore energy, area and Gauss-Bonnet diagnostics.

use std::f64::consts::PI;

use serde::Serialize;

use crate::curvature::CurvatureBundle;
use crate::grid::GridAtlas;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub willmore: f64,
    pub area: f64,
    pub gb_defect: f64,
    pub rho_sup: f64,
    pub el_residual_sup: f64,
}

/// `int H^2 dsigma`.
pub fn willmore_energy(atlas: &GridAtlas, bundle: &CurvatureBundle) -> f64 {
    let h2: Vec<f64> = bundle.nodes.iter().map(|n| n.mean * n.mean).collect();
    atlas.integrate(&h2, &bundle.area_element())
}

pub fn surface_area(atlas: &GridAtlas, bundle: &CurvatureBundle) -> f64 {
    atlas.integrate(&vec![1.0; atlas.len()], &bundle.area_element())
}

/// `int K dsigma - 2 pi chi`.
pub fn gauss_bonnet_defect(atlas: &GridAtlas, bundle: &CurvatureBundle, euler_char: i32) -> f64 {
    atlas.integrate(&bundle.gauss(), &bundle.area_element()) - 2.0 * PI * euler_char as f64
}

pub fn energy_report(atlas: &GridAtlas, bundle: &CurvatureBundle, t: f64, rho_sup: f64, el_residual_sup: f64) -> EnergyReport {
    EnergyReport {
        t,
        willmore: willmore_energy(atlas, bundle),
        area: surface_area(atlas, bundle),
        gb_defect: gauss_bonnet_defect(atlas, bundle, atlas.surface.euler_char),
        rho_sup,
        el_residual_sup,
    }
}

/// Closed-form Willmore energy of a torus of revolution with aspect ratio `t = R / r`.
pub fn torus_energy(aspect: f64) -> f64 {
    PI * PI * aspect * aspect / (aspect * aspect - 1.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{HeightField, HeightJet};
    use crate::grid::build_grids;
    use crate::surface::{make_sphere, make_torus, ChartId};

    fn bundle_for(surface: &crate::surface::ReferenceSurface, n: usize, f: impl Fn(ChartId, [f64; 2]) -> HeightJet + Sync) -> (GridAtlas, CurvatureBundle) {
        let atlas = build_grids(surface, n).unwrap();
        let h = HeightField::analytic(&atlas, f);
        let b = CurvatureBundle::build(&atlas, &h).unwrap();
        (atlas, b)
    }

    #[test]
    fn sphere_energy_is_scale_invariant() {
        let s = make_sphere(1.0).unwrap();
        for c in [0.0, 0.2, 0.3] {
            let (atlas, b) = bundle_for(&s, 96, move |_, _| HeightJet { value: c, ..Default::default() });
            assert!((willmore_energy(&atlas, &b) / (4.0 * PI) - 1.0).abs() < 1e-6);
            let area = 4.0 * PI * (1.0 - c) * (1.0 - c);
            assert!((surface_area(&atlas, &b) / area - 1.0).abs() < 1e-6);
            assert!(gauss_bonnet_defect(&atlas, &b, 2).abs() < 1e-5 * 4.0 * PI);
        }
    }

    #[test]
    fn torus_area_and_gauss_bonnet() {
        let t = make_torus(2.0, 1.0).unwrap();
        let (atlas, b) = bundle_for(&t, 64, |_, _| HeightJet::default());
        assert!((surface_area(&atlas, &b) - 8.0 * PI * PI).abs() < 1e-10);
        assert!(gauss_bonnet_defect(&atlas, &b, 0).abs() < 1e-10);
        assert!((willmore_energy(&atlas, &b) - torus_energy(2.0)).abs() < 1e-9);
    }

    #[test]
    fn clifford_ratio_energy() {
        let r = 1.0;
        let t = make_torus(std::f64::consts::SQRT_2 * r, r).unwrap();
        let (atlas, b) = bundle_for(&t, 128, |_, _| HeightJet::default());
        let w = willmore_energy(&atlas, &b);
        assert!((w / (2.0 * PI * PI) - 1.0).abs() < 1e-4, "{w}");
        assert!((torus_energy(std::f64::consts::SQRT_2) - 2.0 * PI * PI).abs() < 1e-12);
    }
}
