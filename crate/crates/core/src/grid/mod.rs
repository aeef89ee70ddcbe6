//! Structured chart grids with overset halo exchange.
//!
//! Each chart carries an `n_u x n_v` lattice of owned nodes padded by a halo of
//! [`HALO`] nodes. Owned nodes are the global unknowns, numbered chart by chart
//! in row-major order. Halo values are linear combinations of owned values:
//! periodic wraps on the torus and tensor Lagrange interpolation from the other
//! cap on the sphere.

pub mod interp;
pub mod stencil;

use std::f64::consts::TAU;

use crate::error::{Error, NodeId, Result};
use crate::par::*;
use crate::surface::{ChartGeometry, ChartId, ReferenceSurface, SurfaceKind, CAP_HALF_WIDTH};

use interp::{lagrange_stencil, periodic_sinc, LAGRANGE_POINTS};
pub use stencil::{MultiIndex, StencilOrder};

pub const HALO: usize = 3;
pub const MIN_RESOLUTION: usize = 16;

/// Lattice of one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartGrid {
    pub chart: ChartId,
    pub n: [usize; 2],
    pub origin: [f64; 2],
    pub h: [f64; 2],
    pub periodic: bool,
    /// Global index of owned node `(0, 0)`.
    pub offset: usize,
}

impl ChartGrid {
    pub fn owned_len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn padded_dims(&self) -> [usize; 2] {
        [self.n[0] + 2 * HALO, self.n[1] + 2 * HALO]
    }

    pub fn padded_len(&self) -> usize {
        let d = self.padded_dims();
        d[0] * d[1]
    }

    /// Storage index of lattice node `(i, j)`, which may lie in the halo.
    pub fn slot(&self, i: isize, j: isize) -> usize {
        let w = self.padded_dims()[1] as isize;
        ((i + HALO as isize) * w + j + HALO as isize) as usize
    }

    pub fn coords(&self, i: isize, j: isize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.h[0], self.origin[1] + j as f64 * self.h[1]]
    }

    pub fn is_owned(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.n[0] && (j as usize) < self.n[1]
    }

    /// Global unknown of an owned node.
    pub fn global(&self, i: usize, j: usize) -> usize {
        self.offset + i * self.n[1] + j
    }

    /// Owned lattice position of a global unknown belonging to this chart.
    pub fn local(&self, global: usize) -> (usize, usize) {
        let k = global - self.offset;
        (k / self.n[1], k % self.n[1])
    }

    fn halo_nodes(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let h = HALO as isize;
        (-h..self.n[0] as isize + h)
            .flat_map(move |i| (-h..self.n[1] as isize + h).map(move |j| (i, j)))
            .filter(move |&(i, j)| !self.is_owned(i, j))
    }
}

/// How a halo slot is filled: a weighted sum of global unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct HaloRule {
    pub slot: usize,
    pub donors: Vec<(usize, f64)>,
}

/// Grids, reference geometry at owned nodes, weights and halo rules.
#[derive(Debug, Clone)]
pub struct GridAtlas {
    pub surface: ReferenceSurface,
    pub grids: Vec<ChartGrid>,
    pub resolution: usize,
    geometry: Vec<ChartGeometry>,
    coords: Vec<[f64; 2]>,
    pou_sq: Vec<f64>,
    halo_rules: Vec<Vec<HaloRule>>,
    /// Per chart, map from storage slot to index in `halo_rules` (or `usize::MAX`).
    halo_lookup: Vec<Vec<usize>>,
}

/// Field values on every chart lattice, halos included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub(crate) data: Vec<Vec<f64>>,
    halos_current: bool,
}

pub fn build_grids(surface: &ReferenceSurface, resolution: usize) -> Result<GridAtlas> {
    GridAtlas::new(surface, resolution)
}

impl GridAtlas {
    pub fn new(surface: &ReferenceSurface, resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::ResolutionTooSmall(resolution));
        }
        let n = resolution;
        let mut grids = Vec::with_capacity(surface.charts.len());
        let mut offset = 0;
        for chart in &surface.charts {
            let (origin, h) = if chart.periodic {
                ([0.0, 0.0], [TAU / n as f64; 2])
            } else {
                let w = 2.0 * CAP_HALF_WIDTH / (n - 1) as f64;
                ([-CAP_HALF_WIDTH; 2], [w, w])
            };
            grids.push(ChartGrid { chart: chart.id, n: [n, n], origin, h, periodic: chart.periodic, offset });
            offset += n * n;
        }

        let nodes: Vec<(usize, usize, usize)> = grids
            .iter()
            .enumerate()
            .flat_map(|(c, g)| (0..g.n[0]).flat_map(move |i| (0..g.n[1]).map(move |j| (c, i, j))))
            .collect();
        let coords: Vec<[f64; 2]> = nodes
            .iter()
            .map(|&(c, i, j)| grids[c].coords(i as isize, j as isize))
            .collect();
        let geometry = nodes
            .par_iter()
            .zip(coords.par_iter())
            .map(|(&(c, _, _), &uv)| surface.chart_geometry(ChartId(c), uv))
            .collect::<Result<Vec<_>>>()?;
        let pou_sq = nodes
            .iter()
            .zip(&coords)
            .map(|(&(c, _, _), &uv)| surface.pou_weight_sq(ChartId(c), uv))
            .collect();

        let mut halo_rules = Vec::with_capacity(grids.len());
        let mut halo_lookup = Vec::with_capacity(grids.len());
        for (c, grid) in grids.iter().enumerate() {
            let rules = grid
                .halo_nodes()
                .map(|(i, j)| halo_rule(surface, &grids, c, i, j))
                .collect::<Result<Vec<_>>>()?;
            let mut lookup = vec![usize::MAX; grid.padded_len()];
            for (k, r) in rules.iter().enumerate() {
                lookup[r.slot] = k;
            }
            halo_rules.push(rules);
            halo_lookup.push(lookup);
        }

        Ok(Self {
            surface: surface.clone(),
            grids,
            resolution,
            geometry,
            coords,
            pou_sq,
            halo_rules,
            halo_lookup,
        })
    }

    /// Number of global unknowns.
    pub fn len(&self) -> usize {
        self.grids.iter().map(ChartGrid::owned_len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn chart_of(&self, global: usize) -> usize {
        self.grids
            .iter()
            .position(|g| global < g.offset + g.owned_len())
            .expect("global index out of range")
    }

    pub fn node_id(&self, global: usize) -> NodeId {
        let c = self.chart_of(global);
        let (i, j) = self.grids[c].local(global);
        NodeId { chart: c, i: i as isize, j: j as isize }
    }

    pub fn geometry(&self) -> &[ChartGeometry] {
        &self.geometry
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    /// Squared partition-of-unity weight at each owned node.
    pub fn pou_sq(&self) -> &[f64] {
        &self.pou_sq
    }

    pub fn halo_rules(&self, chart: usize) -> &[HaloRule] {
        &self.halo_rules[chart]
    }

    /// Halo rule filling storage slot `slot` of `chart`, if that slot is a halo node.
    pub fn halo_rule_at(&self, chart: usize, slot: usize) -> Option<&HaloRule> {
        let k = self.halo_lookup[chart][slot];
        (k != usize::MAX).then(|| &self.halo_rules[chart][k])
    }

    /// Global unknowns in chart order; convenient for data-parallel maps.
    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Evaluate `f(chart, uv)` at owned nodes.
    pub fn sample(&self, f: impl Fn(ChartId, [f64; 2]) -> f64 + Sync) -> Vec<f64> {
        self.nodes()
            .into_par_iter()
            .map(|k| f(ChartId(self.chart_of(k)), self.coords[k]))
            .collect()
    }

    /// Copy of `f` with halos filled from owned values.
    pub fn field(&self, owned: &[f64]) -> GridField {
        let mut field = GridField::from_owned(self, owned);
        self.exchange(&mut field);
        field
    }

    /// Fill every halo slot from owned values.
    pub fn exchange(&self, field: &mut GridField) {
        let owned = field.owned(self);
        for (c, rules) in self.halo_rules.iter().enumerate() {
            let data = &mut field.data[c];
            for rule in rules {
                data[rule.slot] = rule.donors.iter().map(|&(g, w)| w * owned[g]).sum();
            }
        }
        field.halos_current = true;
    }

    /// Exchange a batch of fields. Blended readout of a field at a surface point is
    /// provided by [`GridAtlas::blended_value`].
    pub fn exchange_and_blend(&self, fields: &mut [GridField]) {
        fields.iter_mut().for_each(|f| self.exchange(f));
    }

    /// Partial derivative of `field` at every owned node.
    pub fn differentiate(&self, field: &GridField, index: MultiIndex) -> Result<GridField> {
        let owned = self.derivative(field, index, StencilOrder::Fourth)?;
        Ok(GridField::from_owned(self, &owned))
    }

    /// Partial derivative as a vector over global unknowns.
    pub fn derivative(&self, field: &GridField, index: MultiIndex, accuracy: StencilOrder) -> Result<Vec<f64>> {
        if !field.halos_current {
            return Err(Error::StaleHalo);
        }
        let stencils = self
            .grids
            .iter()
            .map(|g| stencil::weights_2d(index, g.h, accuracy))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .nodes()
            .into_par_iter()
            .map(|k| {
                let c = self.chart_of(k);
                let g = &self.grids[c];
                let (i, j) = g.local(k);
                let data = &field.data[c];
                stencils[c]
                    .iter()
                    .map(|&(a, b, w)| w * data[g.slot(i as isize + a, j as isize + b)])
                    .sum()
            })
            .collect())
    }

    /// `sum_k pi_k^2 f_k * area_k * h_u h_v` over owned nodes.
    pub fn integrate(&self, density: &[f64], area_element: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .nodes()
            .into_par_iter()
            .map(|k| {
                let g = &self.grids[self.chart_of(k)];
                self.pou_sq[k] * density[k] * area_element[k] * g.h[0] * g.h[1]
            })
            .collect();
        terms.iter().sum()
    }

    /// Reference area element `sqrt(det g)` at owned nodes.
    pub fn reference_area_element(&self) -> Vec<f64> {
        self.geometry.iter().map(|g| g.sqrt_det_g).collect()
    }

    /// Interpolate a halo-current field at chart coordinates with 6-point Lagrange.
    pub fn interpolate(&self, field: &GridField, chart: usize, uv: [f64; 2]) -> Result<f64> {
        if !field.halos_current {
            return Err(Error::StaleHalo);
        }
        let g = &self.grids[chart];
        let uv = if g.periodic { [uv[0].rem_euclid(TAU), uv[1].rem_euclid(TAU)] } else { uv };
        let (bu, wu) = lagrange_stencil(uv[0], g.origin[0], g.h[0]);
        let (bv, wv) = lagrange_stencil(uv[1], g.origin[1], g.h[1]);
        let lim = |b: isize, n: usize| b >= -(HALO as isize) && b + LAGRANGE_POINTS as isize <= (n + HALO) as isize;
        if !lim(bu, g.n[0]) || !lim(bv, g.n[1]) {
            return Err(Error::OutsideDomain { chart, u: uv[0], v: uv[1] });
        }
        let data = &field.data[chart];
        let mut acc = 0.0;
        for (a, wa) in wu.iter().enumerate() {
            let row: f64 = wv
                .iter()
                .enumerate()
                .map(|(b, wb)| wb * data[g.slot(bu + a as isize, bv + b as isize)])
                .sum();
            acc += wa * row;
        }
        Ok(acc)
    }

    /// Band-limited interpolation on a doubly periodic chart from owned values.
    pub fn interpolate_spectral(&self, owned: &[f64], chart: usize, uv: [f64; 2]) -> Result<f64> {
        let g = &self.grids[chart];
        if !g.periodic {
            return Err(Error::InvalidParameter {
                name: "chart",
                reason: format!("spectral interpolation needs a periodic chart, chart {chart} is not"),
            });
        }
        let ku: Vec<f64> = (0..g.n[0]).map(|i| periodic_sinc(uv[0] - g.coords(i as isize, 0)[0], g.n[0])).collect();
        let kv: Vec<f64> = (0..g.n[1]).map(|j| periodic_sinc(uv[1] - g.coords(0, j as isize)[1], g.n[1])).collect();
        let mut acc = 0.0;
        for (i, a) in ku.iter().enumerate() {
            let row = &owned[g.global(i, 0)..g.global(i, 0) + g.n[1]];
            acc += a * row.iter().zip(&kv).map(|(x, b)| x * b).sum::<f64>();
        }
        Ok(acc)
    }

    /// Partition-of-unity blend `sum_k pi_k^2 u_k(p)` at a surface point.
    pub fn blended_value(&self, field: &GridField, p: [f64; 3]) -> Result<f64> {
        let mut acc = 0.0;
        for (id, uv) in self.surface.locate(p) {
            let w = self.surface.pou_weight_sq(id, uv);
            if w > 0.0 {
                acc += w * self.interpolate(field, id.0, uv)?;
            }
        }
        Ok(acc)
    }

    /// Nodes where the partition of unity is active; sup norms are taken over these.
    pub fn blended_sup(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .zip(&self.pou_sq)
            .filter(|(_, &w)| w > 0.0)
            .map(|(v, _)| v.abs())
            .fold(0.0, f64::max)
    }

    /// Chart owning the vertex for output: the one with the largest weight.
    pub fn is_output_owner(&self, global: usize) -> bool {
        match self.surface.kind {
            SurfaceKind::Torus { .. } => true,
            SurfaceKind::Sphere { .. } => {
                let c = self.chart_of(global);
                let uv = self.coords[global];
                let mine = self.pou_sq[global];
                let p = self.surface.chart(ChartId(c)).map.position(uv);
                self.surface
                    .locate(p)
                    .into_iter()
                    .filter(|(id, _)| id.0 != c)
                    .all(|(id, w)| {
                        let other = self.surface.pou_weight_sq(id, w);
                        mine > other || (mine == other && c < id.0)
                    })
            }
        }
    }
}

fn halo_rule(surface: &ReferenceSurface, grids: &[ChartGrid], c: usize, i: isize, j: isize) -> Result<HaloRule> {
    let grid = &grids[c];
    let slot = grid.slot(i, j);
    if grid.periodic {
        let wi = i.rem_euclid(grid.n[0] as isize) as usize;
        let wj = j.rem_euclid(grid.n[1] as isize) as usize;
        return Ok(HaloRule { slot, donors: vec![(grid.global(wi, wj), 1.0)] });
    }
    let uv = grid.coords(i, j);
    let mut best: Option<(f64, HaloRule)> = None;
    for donor in grids.iter().filter(|d| d.chart.0 != c) {
        let Some(w) = surface.transition(ChartId(c), donor.chart, uv) else { continue };
        let (bu, wu) = lagrange_stencil(w[0], donor.origin[0], donor.h[0]);
        let (bv, wv) = lagrange_stencil(w[1], donor.origin[1], donor.h[1]);
        let inside = |b: isize, n: usize| b >= 0 && b + LAGRANGE_POINTS as isize <= n as isize;
        if !inside(bu, donor.n[0]) || !inside(bv, donor.n[1]) {
            continue;
        }
        let depth = surface.chart(donor.chart).domain.depth(w);
        if best.as_ref().is_some_and(|(d, _)| *d >= depth) {
            continue;
        }
        let donors = wu
            .iter()
            .enumerate()
            .flat_map(|(a, &x)| {
                wv.iter()
                    .enumerate()
                    .map(move |(b, &y)| (donor.global((bu + a as isize) as usize, (bv + b as isize) as usize), x * y))
            })
            .collect();
        best = Some((depth, HaloRule { slot, donors }));
    }
    best.map(|(_, r)| r).ok_or(Error::OrphanHalo(NodeId { chart: c, i, j }))
}

impl GridField {
    pub fn zeros(atlas: &GridAtlas) -> Self {
        Self { data: atlas.grids.iter().map(|g| vec![0.0; g.padded_len()]).collect(), halos_current: false }
    }

    /// Field with the given owned values; halos are marked stale.
    pub fn from_owned(atlas: &GridAtlas, owned: &[f64]) -> Self {
        assert_eq!(owned.len(), atlas.len(), "owned vector length mismatch");
        let mut f = Self::zeros(atlas);
        for (c, g) in atlas.grids.iter().enumerate() {
            for i in 0..g.n[0] {
                let src = &owned[g.global(i, 0)..g.global(i, 0) + g.n[1]];
                let start = g.slot(i as isize, 0);
                f.data[c][start..start + g.n[1]].copy_from_slice(src);
            }
        }
        f
    }

    pub fn owned(&self, atlas: &GridAtlas) -> Vec<f64> {
        let mut out = vec![0.0; atlas.len()];
        for (c, g) in atlas.grids.iter().enumerate() {
            for i in 0..g.n[0] {
                let start = g.slot(i as isize, 0);
                out[g.global(i, 0)..g.global(i, 0) + g.n[1]].copy_from_slice(&self.data[c][start..start + g.n[1]]);
            }
        }
        out
    }

    pub fn halos_current(&self) -> bool {
        self.halos_current
    }

    /// Value at lattice node `(i, j)` of `chart`, halo nodes included.
    pub fn at(&self, atlas: &GridAtlas, chart: usize, i: isize, j: isize) -> f64 {
        self.data[chart][atlas.grids[chart].slot(i, j)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{make_sphere, make_torus};
    use std::f64::consts::PI;

    #[test]
    fn torus_lattice_is_periodic() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 64).unwrap();
        assert_eq!(atlas.grids.len(), 1);
        assert_eq!(atlas.len(), 64 * 64);
        assert!((atlas.grids[0].h[0] - TAU / 64.0).abs() < 1e-15);
        let vals = atlas.sample(|_, uv| uv[0].sin() + 2.0 * uv[1].cos());
        let field = atlas.field(&vals);
        // halo node (-1, 5) wraps to owned (63, 5), bitwise
        assert_eq!(field.at(&atlas, 0, -1, 5), field.at(&atlas, 0, 63, 5));
        assert_eq!(field.at(&atlas, 0, 66, -3), field.at(&atlas, 0, 2, 61));
    }

    #[test]
    fn sphere_halos_all_find_donors() {
        let s = make_sphere(1.0).unwrap();
        let atlas = build_grids(&s, 48).unwrap();
        assert_eq!(atlas.grids.len(), 2);
        for c in 0..2 {
            let n_halo = (48 + 6) * (48 + 6) - 48 * 48;
            assert_eq!(atlas.halo_rules(c).len(), n_halo);
            for r in atlas.halo_rules(c) {
                let total: f64 = r.donors.iter().map(|d| d.1).sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn small_resolution_rejected() {
        let t = make_torus(2.0, 1.0).unwrap();
        assert!(matches!(build_grids(&t, 8), Err(Error::ResolutionTooSmall(8))));
    }

    #[test]
    fn derivatives_of_constant_vanish() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 32).unwrap();
        let field = atlas.field(&vec![0.37; atlas.len()]);
        for a in 0..=4 {
            for b in 0..=(4 - a) {
                if a + b == 0 {
                    continue;
                }
                let d = atlas.derivative(&field, MultiIndex(a, b), StencilOrder::Fourth).unwrap();
                assert!(d.iter().all(|x| x.abs() < 1e-13 * (32.0f64).powi((a + b) as i32)), "{a},{b}");
            }
        }
    }

    fn vv_error(n: usize) -> f64 {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, n).unwrap();
        let field = atlas.field(&atlas.sample(|_, uv| uv[1].cos()));
        let d = atlas.derivative(&field, MultiIndex::VV, StencilOrder::Fourth).unwrap();
        d.iter().zip(atlas.coords()).map(|(x, uv)| (x + uv[1].cos()).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn second_derivative_converges_at_fourth_order() {
        let order = (vv_error(32) / vv_error(64)).log2();
        assert!(order >= 3.5, "measured order {order}");
    }

    #[test]
    fn mixed_fourth_derivative() {
        let err = |n: usize| {
            let t = make_torus(2.0, 1.0).unwrap();
            let atlas = build_grids(&t, n).unwrap();
            let field = atlas.field(&atlas.sample(|_, uv| uv[0].cos() * uv[1].cos()));
            let d = atlas.derivative(&field, MultiIndex(1, 3), StencilOrder::Fourth).unwrap();
            d.iter()
                .zip(atlas.coords())
                .map(|(x, uv)| (x + uv[0].sin() * uv[1].sin()).abs())
                .fold(0.0, f64::max)
        };
        let (e32, e64) = (err(32), err(64));
        assert!(e64 < 1e-4, "{e64}");
        assert!((e32 / e64).log2() >= 3.5);
    }

    #[test]
    fn stale_halos_are_rejected() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 16).unwrap();
        let f = GridField::from_owned(&atlas, &vec![1.0; atlas.len()]);
        assert!(matches!(atlas.differentiate(&f, MultiIndex::U), Err(Error::StaleHalo)));
    }

    #[test]
    fn sphere_exchange_of_height_coordinate() {
        let s = make_sphere(1.0).unwrap();
        let atlas = build_grids(&s, 48).unwrap();
        let z = |c: ChartId, uv: [f64; 2]| s.chart(c).map.position(uv)[2];
        let field = atlas.field(&atlas.sample(z));
        let mut worst: f64 = 0.0;
        for (c, g) in atlas.grids.iter().enumerate() {
            for r in atlas.halo_rules(c) {
                let w = g.padded_dims()[1];
                let (i, j) = ((r.slot / w) as isize - HALO as isize, (r.slot % w) as isize - HALO as isize);
                let exact = z(ChartId(c), g.coords(i, j));
                worst = worst.max((field.data[c][r.slot] - exact).abs());
            }
        }
        assert!(worst <= 1e-6, "mismatch {worst}");
    }

    #[test]
    fn exchange_is_idempotent_and_blend_preserves_constants() {
        let s = make_sphere(1.0).unwrap();
        let atlas = build_grids(&s, 32).unwrap();
        let vals = atlas.sample(|c, uv| (s.chart(c).map.position(uv)[0] * 3.0).sin());
        let once = atlas.field(&vals);
        let mut twice = once.clone();
        atlas.exchange(&mut twice);
        assert_eq!(once, twice);
        let ones = atlas.field(&vec![1.0; atlas.len()]);
        for k in 0..50 {
            let z = -0.99 + 0.04 * k as f64;
            let p = [(1.0 - z * z).sqrt(), 0.0, z];
            assert!((atlas.blended_value(&ones, p).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn torus_quadrature_is_spectral() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 64).unwrap();
        let area_el = atlas.reference_area_element();
        let area = atlas.integrate(&vec![1.0; atlas.len()], &area_el);
        assert!((area - 8.0 * PI * PI).abs() < 1e-10);
        let k: Vec<f64> = atlas.geometry().iter().map(|g| g.gauss_curvature()).collect();
        assert!(atlas.integrate(&k, &area_el).abs() < 1e-10);
    }

    #[test]
    fn sphere_area_at_96() {
        let s = make_sphere(1.0).unwrap();
        let atlas = build_grids(&s, 96).unwrap();
        let area = atlas.integrate(&vec![1.0; atlas.len()], &atlas.reference_area_element());
        assert!((area / (4.0 * PI) - 1.0).abs() < 1e-6, "area {area}");
    }

    #[test]
    fn spectral_interpolation_on_torus() {
        let t = make_torus(2.0, 1.0).unwrap();
        let atlas = build_grids(&t, 32).unwrap();
        let f = |uv: [f64; 2]| (uv[0]).cos() * (2.0 * uv[1]).sin() + 0.3;
        let vals = atlas.sample(|_, uv| f(uv));
        let p = [1.234, 5.432];
        assert!((atlas.interpolate_spectral(&vals, 0, p).unwrap() - f(p)).abs() < 1e-13);
        let lag = atlas.interpolate(&atlas.field(&vals), 0, p).unwrap();
        assert!((lag - f(p)).abs() < 1e-5);
    }
}
