//! Compressed-row sparse operators over global grid unknowns.

use crate::error::{Error, Result};
use crate::grid::{stencil, GridAtlas, GridField, MultiIndex, StencilOrder};
use crate::par::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    pub symmetric: bool,
}

/// A term `coefficient(x) * d^index` of a linear differential operator.
#[derive(Debug, Clone, Copy)]
pub struct StencilTerm<'a> {
    pub index: MultiIndex,
    pub coefficient: &'a [f64],
}

fn merge_row(mut entries: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    entries.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out
}

impl SparseOperator {
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let nrows = rows.len();
        let mut indptr = Vec::with_capacity(nrows + 1);
        indptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { nrows, ncols, indptr, indices, values, symmetric: false }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut op = Self::from_rows(d.len(), d.iter().enumerate().map(|(k, &v)| vec![(k, v)]).collect());
        op.symmetric = true;
        op
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .into_par_iter()
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// `self * other`.
    pub fn compose(&self, other: &SparseOperator) -> SparseOperator {
        assert_eq!(self.ncols, other.nrows);
        let rows = (0..self.nrows)
            .into_par_iter()
            .map(|r| {
                let entries = self
                    .row(r)
                    .flat_map(|(k, a)| other.row(k).map(move |(c, b)| (c, a * b)))
                    .collect();
                merge_row(entries)
            })
            .collect();
        Self::from_rows(other.ncols, rows)
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[f64]) -> SparseOperator {
        let mut out = self.clone();
        for r in 0..self.nrows {
            for v in &mut out.values[self.indptr[r]..self.indptr[r + 1]] {
                *v *= d[r];
            }
        }
        out.symmetric = false;
        out
    }

    /// `a * self + diag(d)`.
    pub fn scaled_plus_diagonal(&self, a: f64, d: &[f64]) -> SparseOperator {
        let rows = (0..self.nrows)
            .map(|r| {
                let mut e: Vec<(usize, f64)> = self.row(r).map(|(c, v)| (c, a * v)).collect();
                e.push((r, d[r]));
                merge_row(e)
            })
            .collect();
        Self::from_rows(self.ncols, rows)
    }

    pub fn diagonal_entries(&self) -> Vec<f64> {
        (0..self.nrows)
            .map(|r| self.row(r).filter(|&(c, _)| c == r).map(|(_, v)| v).sum())
            .collect()
    }

    pub fn to_faer(&self) -> Result<faer::sparse::SparseColMat<usize, f64>> {
        let triplets: Vec<faer::sparse::Triplet<usize, usize, f64>> = (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| faer::sparse::Triplet::new(r, c, v)))
            .collect();
        faer::sparse::SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &triplets)
            .map_err(|e| Error::Factorization(format!("{e:?}")))
    }
}

/// Assemble `sum_t c_t(x) d^{index_t}` with halo couplings folded into donor unknowns.
pub fn assemble_operator(atlas: &GridAtlas, terms: &[StencilTerm<'_>], accuracy: StencilOrder) -> Result<SparseOperator> {
    let n = atlas.len();
    let stencils = terms
        .iter()
        .map(|t| {
            atlas
                .grids
                .iter()
                .map(|g| stencil::weights_2d(t.index, g.h, accuracy))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for t in terms {
        assert_eq!(t.coefficient.len(), n, "coefficient length mismatch");
        if let Some(k) = t.coefficient.iter().position(|v| !v.is_finite()) {
            return Err(Error::Assembly { node: atlas.node_id(k), value: t.coefficient[k] });
        }
    }
    let rows = atlas
        .nodes()
        .into_par_iter()
        .map(|k| {
            let c = atlas.chart_of(k);
            let g = &atlas.grids[c];
            let (i, j) = g.local(k);
            let mut entries = Vec::new();
            for (t, st) in terms.iter().zip(&stencils) {
                let coef = t.coefficient[k];
                if coef == 0.0 {
                    continue;
                }
                for &(a, b, w) in &st[c] {
                    let (ii, jj) = (i as isize + a, j as isize + b);
                    if g.is_owned(ii, jj) {
                        entries.push((g.global(ii as usize, jj as usize), coef * w));
                    } else {
                        let rule = atlas.halo_rule_at(c, g.slot(ii, jj)).expect("stencil reaches beyond the halo");
                        entries.extend(rule.donors.iter().map(|&(d, dw)| (d, coef * w * dw)));
                    }
                }
            }
            merge_row(entries)
        })
        .collect();
    Ok(SparseOperator::from_rows(n, rows))
}

/// Stencil-wise evaluation of the same operator on a halo-current field.
pub fn apply_terms(atlas: &GridAtlas, terms: &[StencilTerm<'_>], field: &GridField, accuracy: StencilOrder) -> Result<Vec<f64>> {
    let mut out = vec![0.0; atlas.len()];
    for t in terms {
        let d = atlas.derivative(field, t.index, accuracy)?;
        out.iter_mut().zip(d).zip(t.coefficient).for_each(|((o, x), c)| *o += c * x);
    }
    Ok(out)
}
