//! Symmetric generalized eigenproblems `N x = theta B x` with `B` positive definite.
//!
//! The dense path reduces to a standard problem through the Cholesky factor
//! of `B`. The iterative path runs block shift-invert subspace iteration
//! with `sigma > theta_max`, which is certified by a successful factorization
//! of `sigma B - N`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cholesky::{norm2, EnvelopeCholesky};
use crate::constraints::Reduction;
use crate::error::{Error, Result};
use crate::forms::FormMatrix;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigOptions {
    /// Bound on the normalized residual `|N x - theta B x| / ((|N| + |theta| |B|) |x|)`.
    pub tol: f64,
    pub max_iter: usize,
    /// Subspace size of the iterative solver.
    pub block: usize,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 2000, block: 4, seed: 0 }
    }
}

/// Largest eigenpair of a pencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigResult {
    pub value: f64,
    /// `B`-normalized, with its largest entry positive.
    pub vector: Vec<f64>,
    /// Normalized residual, see [`EigOptions::tol`].
    pub residual: f64,
    /// `|N x - theta B x| / |x|`.
    pub abs_residual: f64,
    pub iterations: usize,
}

/// Full spectrum in ascending order; column `k` of `vectors` is `B`-orthonormal.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn check_pencil(n: &CsrMatrix, b: &CsrMatrix) -> Result<()> {
    if n.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: n.dim(), got: b.dim() });
    }
    if n.dim() == 0 {
        return Err(Error::InvalidArgument("empty pencil".into()));
    }
    Ok(())
}

pub fn pencil_dense(n: &CsrMatrix, b: &CsrMatrix) -> Result<DenseSpectrum> {
    check_pencil(n, b)?;
    let bd = b.to_dense();
    let chol = nalgebra::Cholesky::new(bd.clone()).ok_or_else(|| {
        // report the first failing pivot from the sparse factorization
        match EnvelopeCholesky::factor(b) {
            Err(Error::NotPositiveDefinite { pivot, value }) => Error::IndefiniteB { pivot, value },
            _ => Error::IndefiniteB { pivot: 0, value: f64::NAN },
        }
    })?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(Error::IndefiniteB { pivot: 0, value: 0.0 })?;
    let c = &linv * n.to_dense() * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(n.dim(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    let vectors = linv.transpose() * y;
    Ok(DenseSpectrum { values, vectors })
}

fn normalize_sign(x: &mut [f64]) {
    let mut best = 0.0_f64;
    let mut sign = 1.0;
    for &v in x.iter() {
        if v.abs() > best {
            best = v.abs();
            sign = v.signum();
        }
    }
    if sign < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

fn finish(n: &CsrMatrix, b: &CsrMatrix, theta: f64, mut x: Vec<f64>, iterations: usize) -> EigResult {
    let bn = b.quad_form(&x).sqrt();
    if bn > 0.0 {
        x.iter_mut().for_each(|v| *v /= bn);
    }
    normalize_sign(&mut x);
    let (abs_residual, residual) = residuals(n, b, theta, &x);
    EigResult { value: theta, vector: x, residual, abs_residual, iterations }
}

fn residuals(n: &CsrMatrix, b: &CsrMatrix, theta: f64, x: &[f64]) -> (f64, f64) {
    let nx = n.mul_vec(x);
    let bx = b.mul_vec(x);
    let r: Vec<f64> = nx.iter().zip(&bx).map(|(p, q)| p - theta * q).collect();
    let xn = norm2(x);
    let abs = norm2(&r) / xn;
    let scale = n.norm_inf() + theta.abs() * b.norm_inf();
    (abs, if scale > 0.0 { abs / scale } else { abs })
}

/// Largest eigenpair from the dense oracle.
pub fn pencil_max_dense(n: &CsrMatrix, b: &CsrMatrix) -> Result<EigResult> {
    let s = pencil_dense(n, b)?;
    let k = s.values.len() - 1;
    let x: Vec<f64> = s.vectors.column(k).iter().copied().collect();
    Ok(finish(n, b, s.values[k], x, 0))
}

/// `B`-orthonormalizes the columns in place (two passes of modified
/// Gram-Schmidt); collapsed columns are replaced by random vectors.
fn b_orthonormalize(x: &mut [Vec<f64>], b: &CsrMatrix, rng: &mut ChaCha8Rng) {
    let mut bx: Vec<Vec<f64>> = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        for attempt in 0..4 {
            let before = b.quad_form(&x[k]).max(0.0).sqrt();
            let (done, rest) = x.split_at_mut(k);
            let xk = &mut rest[0];
            for _ in 0..2 {
                for (xj, bxj) in done.iter().zip(&bx) {
                    let c: f64 = xk.iter().zip(bxj).map(|(p, q)| p * q).sum();
                    for (v, w) in xk.iter_mut().zip(xj) {
                        *v -= c * w;
                    }
                }
            }
            let bk = b.mul_vec(&x[k]);
            let nrm = x[k].iter().zip(&bk).map(|(p, q)| p * q).sum::<f64>().max(0.0).sqrt();
            if nrm > 1e-10 * before && nrm > 0.0 || attempt == 3 {
                let s = if nrm > 0.0 { 1.0 / nrm } else { 1.0 };
                x[k].iter_mut().for_each(|v| *v *= s);
                bx.push(bk.into_iter().map(|v| v * s).collect());
                break;
            }
            x[k].iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        }
    }
}

/// Rayleigh-Ritz on a `B`-orthonormal block; returns Ritz values descending
/// and rotates the block accordingly.
fn rayleigh_ritz(x: &mut Vec<Vec<f64>>, n: &CsrMatrix) -> Vec<f64> {
    let p = x.len();
    let nx: Vec<Vec<f64>> = x.iter().map(|c| n.mul_vec(c)).collect();
    let h = DMatrix::from_fn(p, p, |i, j| {
        let a: f64 = x[i].iter().zip(&nx[j]).map(|(u, v)| u * v).sum();
        let b: f64 = x[j].iter().zip(&nx[i]).map(|(u, v)| u * v).sum();
        0.5 * (a + b)
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let dim = x[0].len();
    let rotated: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut v = vec![0.0; dim];
            for (i, xi) in x.iter().enumerate() {
                let c = eig.eigenvectors[(i, k)];
                for (a, b) in v.iter_mut().zip(xi) {
                    *a += c * b;
                }
            }
            v
        })
        .collect();
    *x = rotated;
    order.iter().map(|&k| eig.eigenvalues[k]).collect()
}

/// Largest eigenpair by block shift-invert subspace iteration. `warm` seeds
/// the first block column.
pub fn pencil_max(n: &CsrMatrix, b: &CsrMatrix, opts: &EigOptions, warm: Option<&[f64]>) -> Result<EigResult> {
    check_pencil(n, b)?;
    let dim = n.dim();
    let p = opts.block.max(1).min(dim);
    if dim <= 2 * p {
        return pencil_max_dense(n, b);
    }
    if let Err(e) = EnvelopeCholesky::factor(b) {
        return Err(match e {
            Error::NotPositiveDefinite { pivot, value } => Error::IndefiniteB { pivot, value },
            e => e,
        });
    }
    let n_norm = n.norm_inf();
    let b_norm = b.norm_inf();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..p).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    if n_norm == 0.0 {
        return Ok(finish(n, b, 0.0, x.swap_remove(0), 0));
    }
    let warm = warm.filter(|w| w.len() == dim && w.iter().any(|v| *v != 0.0));
    if let Some(w) = warm {
        x[0] = w.to_vec();
    } else {
        // a few steps with B^{-1} N for a lower bound on theta_max
        let fb = EnvelopeCholesky::factor(b)?;
        b_orthonormalize(&mut x, b, &mut rng);
        for _ in 0..8 {
            for c in x.iter_mut() {
                *c = fb.solve(&n.mul_vec(c));
            }
            b_orthonormalize(&mut x, b, &mut rng);
        }
    }
    b_orthonormalize(&mut x, b, &mut rng);
    let mut theta = rayleigh_ritz(&mut x, n)[0];
    let scale = theta.abs().max(n_norm / b_norm);

    // shift above theta_max, certified by factorization
    let mut eta = if warm.is_some() { 0.01 } else { 0.1 };
    let mut lo_fail = f64::NEG_INFINITY;
    let (mut sigma, mut fact) = loop {
        let s = theta + eta * scale;
        match EnvelopeCholesky::factor(&CsrMatrix::lincomb(&[(s, b), (-1.0, n)])?) {
            Ok(f) => break (s, f),
            Err(Error::NotPositiveDefinite { .. }) => {
                lo_fail = lo_fail.max(s);
                eta *= 4.0;
                if eta > 1e12 {
                    return Err(Error::NoConvergence { iterations: 0, residual: f64::INFINITY });
                }
            }
            Err(e) => return Err(e),
        }
    };

    let mut last_res = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        for c in x.iter_mut() {
            *c = fact.solve(&b.mul_vec(c));
        }
        b_orthonormalize(&mut x, b, &mut rng);
        let ritz = rayleigh_ritz(&mut x, n);
        theta = ritz[0];
        let (_, res) = residuals(n, b, theta, &x[0]);
        if res <= opts.tol {
            return Ok(finish(n, b, theta, x.swap_remove(0), iter));
        }
        // move the shift towards theta while it stays certified
        let slow = res > 0.3 * last_res;
        last_res = res;
        let gap = sigma - theta;
        if slow && gap > 1e-9 * scale {
            let mut target = theta + 0.2 * gap;
            if target <= lo_fail {
                target = 0.5 * (lo_fail + sigma);
            }
            if sigma - target > 1e-3 * gap {
                match EnvelopeCholesky::factor(&CsrMatrix::lincomb(&[(target, b), (-1.0, n)])?) {
                    Ok(f) => {
                        sigma = target;
                        fact = f;
                    }
                    Err(Error::NotPositiveDefinite { .. }) => lo_fail = lo_fail.max(target),
                    Err(e) => return Err(e),
                }
            }
        }
    }
    let (_, res) = residuals(n, b, theta, &x[0]);
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: res })
}

fn same_reduction(a: &Option<Arc<Reduction>>, b: &Option<Arc<Reduction>>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => Arc::ptr_eq(x, y) || x == y,
        _ => false,
    }
}

pub(crate) fn check_forms(forms: &[&FormMatrix]) -> Result<()> {
    let first = forms[0];
    for f in &forms[1..] {
        if f.dim() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), got: f.dim() });
        }
        if !same_reduction(&f.reduction, &first.reduction) {
            return Err(Error::InvalidConstraints("forms carry different constraint reductions".into()));
        }
    }
    Ok(())
}

/// Largest value of `f^T N f / f^T B f` by the iterative solver.
pub fn gen_eig_max(n: &FormMatrix, b: &FormMatrix, tol: f64) -> Result<EigResult> {
    check_forms(&[n, b])?;
    pencil_max(&n.matrix, &b.matrix, &EigOptions { tol, ..EigOptions::default() }, None)
}

/// Full spectrum by the dense oracle.
pub fn gen_eig_dense(n: &FormMatrix, b: &FormMatrix) -> Result<DenseSpectrum> {
    check_forms(&[n, b])?;
    pencil_dense(&n.matrix, &b.matrix)
}

/// Dense column vector helper for tests and oracles.
pub fn to_dvector(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn random_pencil(dim: usize, seed: u64) -> (CsrMatrix, CsrMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let k = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let b = m.transpose() * &m + DMatrix::identity(dim, dim);
        let n = (&k + k.transpose()) * 0.5;
        (CsrMatrix::from_dense(&n), CsrMatrix::from_dense(&b))
    }

    fn diag(v: &[f64]) -> CsrMatrix {
        CsrMatrix::from_triplets(v.len(), v.iter().enumerate().map(|(i, &x)| (i, i, x)).collect())
    }

    #[test]
    fn equal_forms_give_one() {
        let (_, b) = random_pencil(30, 1);
        let r = pencil_max(&b, &b, &EigOptions::default(), None).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_pencil() {
        let r = pencil_max_dense(&diag(&[1.0, 2.0, 3.0]), &CsrMatrix::identity(3)).unwrap();
        assert!((r.value - 3.0).abs() < 1e-14);
        let v: Vec<f64> = (1..=40).map(|i| i as f64).collect();
        let r = pencil_max(&diag(&v), &CsrMatrix::identity(40), &EigOptions::default(), None).unwrap();
        assert!((r.value - 40.0).abs() < 1e-10);
        assert!(r.residual <= 1e-10);
    }

    #[test]
    fn iterative_matches_dense_on_random_pencils() {
        for seed in 0..20 {
            let (n, b) = random_pencil(100, seed);
            let it = pencil_max(&n, &b, &EigOptions::default(), None).unwrap();
            let de = pencil_dense(&n, &b).unwrap();
            let top = *de.values.last().unwrap();
            assert!((it.value - top).abs() <= 1e-8 * top.abs(), "seed {seed}: {} vs {top}", it.value);
            assert!(it.residual <= 1e-10);
        }
    }

    #[test]
    fn indefinite_b_is_rejected() {
        let b = diag(&[1.0, -1.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let n = CsrMatrix::identity(10);
        assert!(matches!(pencil_max(&n, &b, &EigOptions::default(), None), Err(Error::IndefiniteB { .. })));
        assert!(matches!(pencil_dense(&n, &b), Err(Error::IndefiniteB { .. })));
    }

    #[test]
    fn dense_vectors_are_b_orthonormal() {
        let (n, b) = random_pencil(12, 5);
        let s = pencil_dense(&n, &b).unwrap();
        let g = s.vectors.transpose() * b.to_dense() * &s.vectors;
        assert!((g - DMatrix::identity(12, 12)).amax() < 1e-10);
        assert!(s.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn warm_start_converges() {
        let (n, b) = random_pencil(80, 3);
        let cold = pencil_max(&n, &b, &EigOptions::default(), None).unwrap();
        let warm = pencil_max(&n, &b, &EigOptions::default(), Some(&cold.vector)).unwrap();
        assert!((warm.value - cold.value).abs() <= 1e-9 * cold.value.abs());
        assert!(warm.iterations <= cold.iterations);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn invariant_under_joint_scaling(seed in 0u64..1000, c in 1e-3f64..1e3) {
            let (n, b) = random_pencil(40, seed);
            let r1 = pencil_max(&n, &b, &EigOptions::default(), None).unwrap();
            let r2 = pencil_max(&n.scaled(c), &b.scaled(c), &EigOptions::default(), None).unwrap();
            prop_assert!((r1.value - r2.value).abs() <= 1e-9 * r1.value.abs().max(1e-3));
        }
    }
}
