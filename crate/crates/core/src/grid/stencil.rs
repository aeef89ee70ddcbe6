//! Centered finite-difference weights.

use crate::error::{Error, Result};

/// Accuracy of the difference stencils used for a derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StencilOrder {
    #[default]
    Fourth,
    /// Compact second-order stencils, used only to build preconditioners.
    Second,
}

/// Partial derivative orders `(d/du)^a (d/dv)^b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub usize, pub usize);

impl MultiIndex {
    pub const VALUE: MultiIndex = MultiIndex(0, 0);
    pub const U: MultiIndex = MultiIndex(1, 0);
    pub const V: MultiIndex = MultiIndex(0, 1);
    pub const UU: MultiIndex = MultiIndex(2, 0);
    pub const UV: MultiIndex = MultiIndex(1, 1);
    pub const VV: MultiIndex = MultiIndex(0, 2);

    pub fn order(&self) -> usize {
        self.0 + self.1
    }

    /// First derivative along chart axis `axis`.
    pub fn first(axis: usize) -> Self {
        if axis == 0 { Self::U } else { Self::V }
    }

    /// Second derivative along axes `i`, `j`.
    pub fn second(i: usize, j: usize) -> Self {
        match (i, j) {
            (0, 0) => Self::UU,
            (1, 1) => Self::VV,
            _ => Self::UV,
        }
    }
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];
const D4: [f64; 7] = [-1.0 / 6.0, 2.0, -13.0 / 2.0, 28.0 / 3.0, -13.0 / 2.0, 2.0, -1.0 / 6.0];
const LOW_D1: [f64; 3] = [-0.5, 0.0, 0.5];
const LOW_D2: [f64; 3] = [1.0, -2.0, 1.0];

/// `(offset, weight)` pairs for a 1-D derivative of the given order, unscaled by `h`.
pub fn weights_1d(order: usize, accuracy: StencilOrder) -> Result<Vec<(isize, f64)>> {
    let table: &[f64] = match (order, accuracy) {
        (0, _) => return Ok(vec![(0, 1.0)]),
        (1, StencilOrder::Fourth) => &D1,
        (2, StencilOrder::Fourth) => &D2,
        (3, StencilOrder::Fourth) => &D3,
        (4, StencilOrder::Fourth) => &D4,
        (1, StencilOrder::Second) => &LOW_D1,
        (2, StencilOrder::Second) => &LOW_D2,
        (o, _) => return Err(Error::UnsupportedOrder(o)),
    };
    let half = (table.len() / 2) as isize;
    Ok(table
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(k, &w)| (k as isize - half, w))
        .collect())
}

/// Tensor-product stencil `(du, dv, weight)` including the `h^-order` scaling.
pub fn weights_2d(index: MultiIndex, h: [f64; 2], accuracy: StencilOrder) -> Result<Vec<(isize, isize, f64)>> {
    if index.order() > 4 {
        return Err(Error::UnsupportedOrder(index.order()));
    }
    let wu = weights_1d(index.0, accuracy)?;
    let wv = weights_1d(index.1, accuracy)?;
    let s = h[0].powi(-(index.0 as i32)) * h[1].powi(-(index.1 as i32));
    Ok(wu
        .iter()
        .flat_map(|&(a, x)| wv.iter().map(move |&(b, y)| (a, b, x * y * s)))
        .collect())
}
