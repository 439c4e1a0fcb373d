//! Envelope (skyline) Cholesky factorization on a reverse Cuthill-McKee ordering.

use crate::error::{Error, Result};
use crate::forms::FormMatrix;
use crate::sparse::CsrMatrix;

/// `P A P^T = L L^T` with `L` stored row-wise over each row's envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors with a fresh RCM ordering.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_with_ordering(a, a.rcm_ordering())
    }

    /// Factors with `perm[new] = old`. A failed pivot means `A` is not
    /// positive definite, so success doubles as an inertia test.
    pub fn factor_with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let first: Vec<usize> =
            (0..n).map(|i| a.row(perm[i]).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i).min(i)).collect();
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(perm[i]) {
                let jj = inv[j];
                if jj <= i {
                    values[start[i] + jj - first[i]] += v;
                }
            }
        }

        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let k0 = fi.max(fj);
                let mut s = values[si + j - fi];
                let ri = &values[si + k0 - fi..si + j - fi];
                let rj = &values[sj + k0 - fj..sj + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                values[si + j - fi] = s / values[sj + j - fj];
            }
            let diag = values[si + i - fi];
            let d = diag - values[si..si + i - fi].iter().map(|x| x * x).sum::<f64>();
            if !(d > 1e-14 * diag.abs()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            values[si + i - fi] = d.sqrt();
        }
        Ok(Self { perm, first, start, values })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut z: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let row = &self.values[si..si + i - fi];
            let s: f64 = row.iter().zip(&z[fi..i]).map(|(l, x)| l * x).sum();
            z[i] = (z[i] - s) / self.values[si + i - fi];
        }
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            z[i] /= self.values[si + i - fi];
            let xi = z[i];
            for (k, l) in (fi..i).zip(&self.values[si..si + i - fi]) {
                z[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = z[new];
        }
        x
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves `A x = b` with one step of iterative refinement and checks the
/// relative residual against `tol`.
pub fn solve_csr(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    if b.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.len() });
    }
    let bn = norm2(b);
    if bn == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let f = EnvelopeCholesky::factor(a)?;
    let mut x = f.solve(b);
    let residual = |x: &[f64]| {
        let ax = a.mul_vec(x);
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect::<Vec<f64>>()
    };
    let r = residual(&x);
    let dx = f.solve(&r);
    for (xi, d) in x.iter_mut().zip(&dx) {
        *xi += d;
    }
    let res = norm2(&residual(&x)) / bn;
    if res > tol {
        return Err(Error::SolveInaccurate { residual: res, tol });
    }
    Ok(x)
}

/// Solves `Q x = rhs` for a form that is positive definite after constraints.
pub fn solve_spd(q: &FormMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    solve_csr(&q.matrix, rhs, 1e-10)
}
