//! Interpolation constant through AM-GM scalarization.
//!
//! With `p = |w u|`, `q = |w e(U)|` and `p q = inf_mu (mu p^2 + q^2 / mu) / 2`,
//!
//! ```text
//! sup_U |w grad U|^2 / (p q / h + q^2) = sup_mu lambda_max(G, (mu / 2h) P + (1 + 1 / (2 mu h)) E)
//! ```
//!
//! so the constant is a one-dimensional maximization of generalized
//! eigenvalues over `mu`, done by golden-section search in `log mu`.

use serde::{Deserialize, Serialize};

use super::eigen::{check_forms, pencil_max, pencil_max_dense, EigOptions, EigResult};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::forms::FormMatrix;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarizedOptions {
    /// `mu` bracket; `None` means `[h^2 / 100, 100 / h^2]`.
    pub bracket: Option<(f64, f64)>,
    /// Golden-section stopping width in `log mu`, relative to `max(1, |log mu|)`.
    pub tol: f64,
    /// Log-spaced points scanned before the golden-section refinement.
    pub scan: usize,
    /// Use the dense eigensolver for every `mu`.
    pub dense: bool,
    pub eig: EigOptions,
}

impl Default for ScalarizedOptions {
    fn default() -> Self {
        Self { bracket: None, tol: 1e-10, scan: 9, dense: false, eig: EigOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarizedResult {
    pub k: f64,
    pub mu_star: f64,
    /// Extremizer in full nodal coefficients.
    pub field: VectorField,
    /// Extremizer in the coordinates of the forms.
    pub coefficients: Vec<f64>,
    /// Direct ratio evaluated on the extremizer.
    pub field_ratio: f64,
    /// Every `(mu, lambda_max)` evaluated, in order.
    pub history: Vec<(f64, f64)>,
    /// Final `mu` bracket after any widening.
    pub bracket: (f64, f64),
    pub eig_residual: f64,
}

/// `(mu / 2h) P + (1 + 1 / (2 mu h)) E`.
pub fn scalarized_denominator(mass_u: &CsrMatrix, strain: &CsrMatrix, h: f64, mu: f64) -> Result<CsrMatrix> {
    CsrMatrix::lincomb(&[(mu / (2.0 * h), mass_u), (1.0 + 1.0 / (2.0 * mu * h), strain)])
}

/// `|w grad U|^2 / (|w u| |w e| / h + |w e|^2)`; `None` when the denominator vanishes.
pub fn direct_ratio(grad: &FormMatrix, mass_u: &FormMatrix, strain: &FormMatrix, h: f64, x: &[f64]) -> Option<f64> {
    let g = grad.eval(x);
    let p2 = mass_u.eval(x).max(0.0);
    let q2 = strain.eval(x).max(0.0);
    let den = (p2 * q2).sqrt() / h + q2;
    (den > 0.0).then(|| g / den)
}

/// Largest eigenpair for one value of `mu`.
pub fn lambda_at_mu(
    grad: &FormMatrix,
    mass_u: &FormMatrix,
    strain: &FormMatrix,
    h: f64,
    mu: f64,
    opts: &ScalarizedOptions,
    warm: Option<&[f64]>,
) -> Result<EigResult> {
    let b = scalarized_denominator(&mass_u.matrix, &strain.matrix, h, mu)?;
    if opts.dense {
        pencil_max_dense(&grad.matrix, &b)
    } else {
        pencil_max(&grad.matrix, &b, &opts.eig, warm)
    }
}

struct Search<'a> {
    forms: [&'a FormMatrix; 3],
    h: f64,
    opts: &'a ScalarizedOptions,
    history: Vec<(f64, f64)>,
    best: Option<(f64, EigResult)>,
}

impl Search<'_> {
    fn eval(&mut self, t: f64) -> Result<f64> {
        let mu = t.exp();
        let warm = self.best.as_ref().map(|(_, r)| r.vector.clone());
        let [g, p, e] = self.forms;
        let r = lambda_at_mu(g, p, e, self.h, mu, self.opts, warm.as_deref())?;
        let v = r.value;
        self.history.push((mu, v));
        if self.best.as_ref().is_none_or(|(_, b)| v > b.value) {
            self.best = Some((mu, r));
        }
        Ok(v)
    }

    /// Scans `[tl, tr]`; returns the points and the index of the largest value.
    fn scan(&mut self, tl: f64, tr: f64) -> Result<(Vec<f64>, usize)> {
        let m = self.opts.scan.max(3);
        let ts: Vec<f64> = (0..m).map(|i| tl + (tr - tl) * i as f64 / (m - 1) as f64).collect();
        let mut vals = Vec::with_capacity(m);
        for &t in &ts {
            vals.push(self.eval(t)?);
        }
        let k = (0..m).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
        Ok((ts, k))
    }
}

/// Evaluates `sup_mu lambda_max` over the bracket. The forms must share one
/// constraint reduction with the positive definite denominator on it.
pub fn scalarized_sup(
    grad: &FormMatrix,
    mass_u: &FormMatrix,
    strain: &FormMatrix,
    h: f64,
    opts: &ScalarizedOptions,
) -> Result<ScalarizedResult> {
    check_forms(&[grad, mass_u, strain])?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("thickness h = {h} must be positive")));
    }
    let (mut lo, mut hi) = opts.bracket.unwrap_or((h * h / 100.0, 100.0 / (h * h)));
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!("invalid mu bracket [{lo}, {hi}]")));
    }
    let mut s = Search { forms: [grad, mass_u, strain], h, opts, history: Vec::new(), best: None };

    let mut widened = false;
    let (ts, k) = loop {
        let (ts, k) = s.scan(lo.ln(), hi.ln())?;
        let at_edge = k == 0 || k == ts.len() - 1;
        if !at_edge {
            break (ts, k);
        }
        if widened {
            return Err(Error::BracketExhausted { lo, hi });
        }
        widened = true;
        if k == 0 {
            lo /= 100.0;
        } else {
            hi *= 100.0;
        }
    };

    // golden-section maximization on the scan cell around the best point
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (ts[k - 1], ts[k + 1]);
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let mut fc = s.eval(c)?;
    let mut fd = s.eval(d)?;
    while b - a > opts.tol * a.abs().max(b.abs()).max(1.0) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = s.eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = s.eval(d)?;
        }
    }

    let (mu_star, best) = s.best.take().expect("at least one evaluation");
    let field_ratio = direct_ratio(grad, mass_u, strain, h, &best.vector).unwrap_or(f64::NAN);
    let full = match &grad.reduction {
        Some(r) => r.expand(&best.vector),
        None => best.vector.clone(),
    };
    Ok(ScalarizedResult {
        k: best.value,
        mu_star,
        field: VectorField(full),
        coefficients: best.vector,
        field_ratio,
        history: s.history,
        bracket: (lo, hi),
        eig_residual: best.residual,
    })
}
