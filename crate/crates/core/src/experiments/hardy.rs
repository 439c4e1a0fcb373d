//! One-dimensional Hardy-type quotients.
//!
//! `hardy_extremal` maximizes `int t^(gamma - 2) f^2 / int t^gamma f'^2` over
//! continuous piecewise linear `f` with `f(0) = f(a) = 0`. The mesh is
//! `t_i = a (i / n)^q` with `q` fixed per `gamma`, so meshes with `n` and
//! `2n` elements are nested and the discrete value cannot decrease under
//! refinement. Element integrals are exact; the largest eigenvalue of the
//! tridiagonal pencil is located by bisection on the inertia of
//! `lambda K - M`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussRule;

/// `4 / (1 - gamma)^2`.
pub fn hardy_bound(gamma: f64) -> f64 {
    4.0 / (1.0 - gamma).powi(2)
}

/// Mesh grading exponent used for a given `gamma`.
pub fn hardy_grading(gamma: f64) -> f64 {
    2.0 + 3.0 / (1.0 - gamma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyResult {
    pub gamma: f64,
    pub a: f64,
    pub elements: usize,
    pub grading: f64,
    pub value: f64,
    pub bound: f64,
    /// Mesh nodes, endpoints included.
    pub nodes: Vec<f64>,
    /// Extremizer at the nodes, normalized to `int t^gamma f'^2 = 1`.
    pub extremizer: Vec<f64>,
}

/// `int_0^x (1 + u)^p u^k du` for `k <= 2`, accurate for small `x`.
fn moment(p: f64, k: usize, x: f64) -> f64 {
    if x <= 0.5 {
        // binomial series, terms decay like x^j
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut xp = x.powi(k as i32 + 1);
        for j in 0..200 {
            let term = binom * xp / (j + k + 1) as f64;
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            binom *= (p - j as f64) / (j + 1) as f64;
            xp *= x;
        }
        sum
    } else {
        // expand u^k = (v - 1)^k with v = 1 + u
        let pw = |e: f64| {
            if e == 0.0 {
                x.ln_1p()
            } else {
                (e * x.ln_1p()).exp_m1() / e
            }
        };
        match k {
            0 => pw(p + 1.0),
            1 => pw(p + 2.0) - pw(p + 1.0),
            _ => pw(p + 3.0) - 2.0 * pw(p + 2.0) + pw(p + 1.0),
        }
    }
}

/// Element matrices on `[t0, t1]`: `(mass with t^p, int t^g)`.
fn element(t0: f64, t1: f64, p: f64, g: f64) -> ([[f64; 2]; 2], f64) {
    if t0 == 0.0 {
        // only the right basis function t / t1 is active
        let mrr = t1.powf(p + 1.0) / (p + 3.0);
        return ([[0.0, 0.0], [0.0, mrr]], t1.powf(g + 1.0) / (g + 1.0));
    }
    let x = (t1 - t0) / t0;
    let s = t0.powf(p + 1.0) / (x * x);
    let (m0, m1, m2) = (moment(p, 0, x), moment(p, 1, x), moment(p, 2, x));
    let mll = s * (x * x * m0 - 2.0 * x * m1 + m2);
    let mlr = s * (x * m1 - m2);
    let mrr = s * m2;
    ([[mll, mlr], [mlr, mrr]], t0.powf(g + 1.0) * moment(g, 0, x))
}

/// Interior tridiagonal pencil: `(mass diag, mass off, stiff diag, stiff off)`.
type Tridiag = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>);

fn assemble(nodes: &[f64], gamma: f64) -> Tridiag {
    let n = nodes.len() - 1;
    let m = n - 1;
    let (mut md, mut mo, mut kd, mut ko) =
        (vec![0.0; m], vec![0.0; m.saturating_sub(1)], vec![0.0; m], vec![0.0; m.saturating_sub(1)]);
    for e in 0..n {
        let (t0, t1) = (nodes[e], nodes[e + 1]);
        let (me, ie) = element(t0, t1, gamma - 2.0, gamma);
        let k = ie / (t1 - t0).powi(2);
        // local node 0 is global e, interior index e - 1
        let left = e.checked_sub(1);
        let right = (e + 1 <= m).then_some(e);
        if let Some(l) = left {
            md[l] += me[0][0];
            kd[l] += k;
        }
        if let Some(r) = right {
            md[r] += me[1][1];
            kd[r] += k;
        }
        if let (Some(l), Some(_)) = (left, right) {
            mo[l] += me[0][1];
            ko[l] -= k;
        }
    }
    (md, mo, kd, ko)
}

/// Whether `lambda K - M` is positive definite (tridiagonal LDL^T).
fn definite(t: &Tridiag, lambda: f64) -> bool {
    let (md, mo, kd, ko) = t;
    let mut d = 0.0;
    for i in 0..md.len() {
        let diag = lambda * kd[i] - md[i];
        d = if i == 0 {
            diag
        } else {
            let off = lambda * ko[i - 1] - mo[i - 1];
            diag - off * off / d
        };
        if !(d > 0.0) {
            return false;
        }
    }
    true
}

fn solve_tridiag(diag: &[f64], off: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut piv = diag[0];
    c[0] = if n > 1 { off[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - off[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = off[i] / piv;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / piv;
    }
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn tri_mul(diag: &[f64], off: &[f64], x: &[f64]) -> Vec<f64> {
    (0..diag.len())
        .map(|i| {
            let mut s = diag[i] * x[i];
            if i > 0 {
                s += off[i - 1] * x[i - 1];
            }
            if i + 1 < diag.len() {
                s += off[i] * x[i + 1];
            }
            s
        })
        .collect()
}

/// Mesh `t_i = a (i / n)^q`.
pub fn hardy_mesh(a: f64, n: usize, q: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=n).map(|i| a * (i as f64 / n as f64).powf(q)).collect();
    t[n] = a;
    t
}

pub fn hardy_extremal(gamma: f64, a: f64, n: usize) -> Result<HardyResult> {
    hardy_extremal_graded(gamma, a, n, hardy_grading(gamma))
}

pub fn hardy_extremal_graded(gamma: f64, a: f64, n: usize, q: f64) -> Result<HardyResult> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} must lie in [0, 1)")));
    }
    if n < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 elements, got {n}")));
    }
    if !(a > 0.0 && a.is_finite()) || !(q >= 1.0) {
        return Err(Error::InvalidArgument(format!("invalid interval length {a} or grading {q}")));
    }
    let nodes = hardy_mesh(a, n, q);
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(format!("grading {q} with {n} elements collapses nodes")));
    }
    let t = assemble(&nodes, gamma);
    let bound = hardy_bound(gamma);
    let mut hi = bound;
    while !definite(&t, hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if definite(&t, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let value = 0.5 * (lo + hi);

    // inverse iteration just above the top of the spectrum
    let (md, mo, kd, ko) = &t;
    let sigma = hi * (1.0 + 1e-10);
    let sd: Vec<f64> = kd.iter().zip(md).map(|(k, m)| sigma * k - m).collect();
    let so: Vec<f64> = ko.iter().zip(mo).map(|(k, m)| sigma * k - m).collect();
    let mut x = vec![1.0; md.len()];
    for _ in 0..4 {
        x = solve_tridiag(&sd, &so, &tri_mul(kd, ko, &x));
        let knorm = tri_mul(kd, ko, &x).iter().zip(&x).map(|(p, q)| p * q).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= knorm);
    }
    if x.iter().sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    let mut extremizer = vec![0.0];
    extremizer.extend(x);
    extremizer.push(0.0);
    Ok(HardyResult { gamma, a, elements: n, grading: q, value, bound, nodes, extremizer })
}

/// Dense pencil of the same discretization, for cross-checks on small meshes.
pub fn hardy_dense_value(gamma: f64, a: f64, n: usize, q: f64) -> Result<f64> {
    use crate::solvers::pencil_max_dense;
    use crate::sparse::CsrMatrix;
    let nodes = hardy_mesh(a, n, q);
    let (md, mo, kd, ko) = assemble(&nodes, gamma);
    let tri = |d: &[f64], o: &[f64]| {
        let mut t: Vec<(usize, usize, f64)> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        for (i, &v) in o.iter().enumerate() {
            t.extend([(i, i + 1, v), (i + 1, i, v)]);
        }
        CsrMatrix::from_triplets(d.len(), t)
    };
    Ok(pencil_max_dense(&tri(&md, &mo), &tri(&kd, &ko))?.value)
}

/// `sum_k a_k cos(2 pi k t / p) + b_k sin(2 pi k t / p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub period: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    /// Degree and coefficients drawn uniformly; `degree <= max_degree`.
    pub fn random<R: Rng>(rng: &mut R, max_degree: usize, period: f64) -> Self {
        let d = rng.random_range(0..=max_degree);
        let cos = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sin = (0..=d).map(|k| if k == 0 { 0.0 } else { rng.random_range(-1.0..1.0) }).collect();
        Self { period, cos, sin }
    }

    pub fn value(&self, t: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI / self.period;
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(k, (a, b))| {
                let s = w * k as f64 * t;
                a * s.cos() + b * s.sin()
            })
            .sum()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI / self.period;
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(k, (a, b))| {
                let wk = w * k as f64;
                wk * (b * (wk * t).cos() - a * (wk * t).sin())
            })
            .sum()
    }
}

fn composite<F: Fn(f64) -> f64>(rule: &GaussRule, lo: f64, hi: f64, panels: usize, f: F) -> f64 {
    let w = (hi - lo) / panels as f64;
    (0..panels).map(|i| rule.integrate(lo + i as f64 * w, lo + (i + 1) as f64 * w, &f)).sum()
}

/// `4 int_{a/2}^a f^2 + 4 int_0^a t^2 f'^2 - int_0^{a/2} f^2`, by composite
/// Gauss-Legendre quadrature with `panels` panels per half interval.
pub fn kondratiev_oleinik_margin<F, D>(f: F, df: D, a: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let rule = GaussRule::new(10);
    let m = a / 2.0;
    let lhs = composite(&rule, 0.0, m, panels, |t| f(t).powi(2));
    let right = composite(&rule, m, a, panels, |t| f(t).powi(2));
    let grad = composite(&rule, 0.0, m, panels, |t| (t * df(t)).powi(2))
        + composite(&rule, m, a, panels, |t| (t * df(t)).powi(2));
    4.0 * right + 4.0 * grad - lhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn moments_match_quadrature() {
        let rule = GaussRule::new(10);
        for p in [-2.0, -1.5, -1.2, 0.0, 0.4, 0.8] {
            for x in [1e-6, 0.01, 0.3, 0.5, 0.51, 2.0, 40.0] {
                for k in 0..3 {
                    let exact = composite(&rule, 0.0, x, 64, |u: f64| (1.0 + u).powf(p) * u.powi(k as i32));
                    let m = moment(p, k, x);
                    assert!((m - exact).abs() <= 1e-12 * exact.abs(), "p {p} k {k} x {x}: {m} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(hardy_bound(0.0), 4.0);
        assert_eq!(hardy_bound(0.5), 16.0);
    }

    #[test]
    fn quadratic_test_function() {
        // f = t (1 - t): int f^2 / t^2 = int (1 - t)^2 = 1/3 = int (1 - 2t)^2
        let rule = GaussRule::new(6);
        let num = rule.integrate(0.0, 1.0, |t| (1.0 - t).powi(2));
        let den = rule.integrate(0.0, 1.0, |t| (1.0 - 2.0 * t).powi(2));
        assert!((num / den - 1.0).abs() < 1e-14);
        assert!(hardy_extremal(0.0, 1.0, 64).unwrap().value >= 1.0);
    }

    #[test]
    fn bisection_matches_dense_pencil() {
        for gamma in [0.0, 0.3, 0.7] {
            for n in [8, 16, 40] {
                let q = hardy_grading(gamma);
                let it = hardy_extremal_graded(gamma, 1.0, n, q).unwrap().value;
                let de = hardy_dense_value(gamma, 1.0, n, q).unwrap();
                assert!((it - de).abs() <= 1e-9 * de, "gamma {gamma} n {n}: {it} vs {de}");
            }
        }
    }

    #[test]
    fn extremizer_attains_the_value() {
        let r = hardy_extremal(0.2, 1.0, 128).unwrap();
        let t = assemble(&r.nodes, 0.2);
        let x = &r.extremizer[1..r.extremizer.len() - 1];
        let num: f64 = tri_mul(&t.0, &t.1, x).iter().zip(x).map(|(p, q)| p * q).sum();
        let den: f64 = tri_mul(&t.2, &t.3, x).iter().zip(x).map(|(p, q)| p * q).sum();
        assert!((num / den - r.value).abs() <= 1e-8 * r.value);
    }

    #[test]
    fn monotone_and_below_the_bound() {
        for gamma in [0.0, 0.5] {
            let mut last = 0.0;
            for n in [8, 16, 32, 64, 128] {
                let v = hardy_extremal(gamma, 1.0, n).unwrap().value;
                assert!(v <= hardy_bound(gamma) + 1e-9);
                assert!(v >= last - 1e-10);
                last = v;
            }
        }
        assert!(hardy_extremal(1.0, 1.0, 16).is_err());
        assert!(hardy_extremal(0.0, 1.0, 4).is_err());
    }

    #[test]
    fn margin_examples() {
        let c = 1.7;
        let m = kondratiev_oleinik_margin(|_| c, |_| 0.0, 1.0, 8);
        assert!((m - 1.5 * c * c).abs() < 1e-13);
        let m = kondratiev_oleinik_margin(|t| t, |_| 1.0, 1.0, 8);
        assert!((m - (2.5 - 1.0 / 24.0)).abs() < 1e-13);
    }

    #[test]
    fn trig_derivative_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = TrigPoly::random(&mut rng, 6, 1.0);
        for t in [0.1, 0.37, 0.9] {
            let fd = (p.value(t + 1e-6) - p.value(t - 1e-6)) / 2e-6;
            assert!((fd - p.derivative(t)).abs() < 1e-6 * (1.0 + fd.abs()));
        }
    }
}
