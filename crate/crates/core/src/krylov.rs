//! Restarted GMRES with right preconditioning.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::SparseColMat;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

pub trait Preconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

/// Sparse LU of an approximating operator.
pub struct LuPreconditioner {
    lu: Lu<usize, f64>,
    n: usize,
}

impl std::fmt::Debug for LuPreconditioner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuPreconditioner").field("n", &self.n).finish_non_exhaustive()
    }
}

/// Symbolic factorization reusable across operators with one sparsity pattern.
#[derive(Clone)]
pub struct LuPattern {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    symbolic: SymbolicLu<usize>,
}

impl LuPattern {
    pub fn matches(&self, op: &SparseOperator) -> bool {
        self.indptr == op.indptr && self.indices == op.indices
    }
}

impl LuPreconditioner {
    /// Factor `op`, reusing `pattern` when the sparsity matches.
    pub fn factor(op: &SparseOperator, pattern: &mut Option<LuPattern>) -> Result<Self> {
        let mat: SparseColMat<usize, f64> = op.to_faer()?;
        let fail = |e: &dyn std::fmt::Debug| Error::Factorization(format!("{e:?}"));
        if !pattern.as_ref().is_some_and(|p| p.matches(op)) {
            let symbolic = SymbolicLu::try_new(mat.symbolic()).map_err(|e| fail(&e))?;
            *pattern = Some(LuPattern { indptr: op.indptr.clone(), indices: op.indices.clone(), symbolic });
        }
        let symbolic = pattern.as_ref().expect("pattern set above").symbolic.clone();
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|e| fail(&e))?;
        Ok(Self { lu, n: op.nrows })
    }
}

impl Preconditioner for LuPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let b = Mat::<f64>::from_fn(self.n, 1, |i, _| r[i]);
        let x = self.lu.solve(&b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, max_iter: 500, restart: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(a: &SparseOperator, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Solve `a x = b` to relative residual `rel_tol`.
pub fn gmres(
    a: &SparseOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    pc: &dyn Preconditioner,
    opts: GmresOptions,
) -> Result<(Vec<f64>, GmresOutcome)> {
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    if b_norm == 0.0 {
        return Ok((vec![0.0; n], GmresOutcome { iterations: 0, rel_residual: 0.0 }));
    }
    let target = opts.rel_tol * b_norm;
    let mut iterations = 0;
    let mut r = residual(a, &x, b);
    let mut beta = norm2(&r);
    while beta > target && iterations < opts.max_iter {
        let m = opts.restart.min(opts.max_iter - iterations);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut precond: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut g = vec![beta];
        for j in 0..m {
            let z = pc.apply(&basis[j]);
            let mut w = a.matvec(&z);
            precond.push(z);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let h: f64 = w.iter().zip(v).map(|(p, q)| p * q).sum();
                col[i] = h;
                w.iter_mut().zip(v).for_each(|(p, q)| *p -= h * q);
            }
            let wn = norm2(&w);
            col[j + 1] = wn;
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (p, q) = (col[i], col[i + 1]);
                col[i] = c * p + s * q;
                col[i + 1] = -s * p + c * q;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = (col[j] / denom, col[j + 1] / denom);
            col[j] = denom;
            col[j + 1] = 0.0;
            rot.push((c, s));
            g.push(-s * g[j]);
            g[j] *= c;
            hess.push(col);
            iterations += 1;
            if g[j + 1].abs() <= target || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let k = hess.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|l| hess[l][i] * y[l]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        for (yi, z) in y.iter().zip(&precond) {
            x.iter_mut().zip(z).for_each(|(xv, zv)| *xv += yi * zv);
        }
        r = residual(a, &x, b);
        beta = norm2(&r);
    }
    let rel_residual = beta / b_norm;
    if beta > target {
        return Err(Error::SolverFailure { iterations, residual: rel_residual });
    }
    Ok((x, GmresOutcome { iterations, rel_residual }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize, shift: f64) -> SparseOperator {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0 + shift)];
                if i > 0 {
                    r.insert(0, (i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        SparseOperator::from_rows(n, rows)
    }

    #[test]
    fn gmres_solves_without_preconditioner() {
        let a = laplacian_1d(50, 0.1);
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.matvec(&x_true);
        let (x, out) = gmres(&a, &b, None, &IdentityPreconditioner, GmresOptions::default()).unwrap();
        assert!(out.rel_residual <= 1e-10);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-7);
        }
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let a = laplacian_1d(200, 0.01);
        let b: Vec<f64> = (0..200).map(|i| 1.0 + (i % 7) as f64).collect();
        let mut pattern = None;
        let pc = LuPreconditioner::factor(&a, &mut pattern).unwrap();
        let (_, out) = gmres(&a, &b, None, &pc, GmresOptions::default()).unwrap();
        assert!(out.iterations <= 2, "{out:?}");
        assert!(pattern.as_ref().unwrap().matches(&a));
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let a = laplacian_1d(400, 0.0);
        let b = vec![1.0; 400];
        let opts = GmresOptions { max_iter: 5, ..Default::default() };
        assert!(matches!(gmres(&a, &b, None, &IdentityPreconditioner, opts), Err(Error::SolverFailure { iterations: 5, .. })));
    }
}
