//! Domains, distance functions, power-law weights and ellipticity data.
//!
//! The domain is the rectangle `(0, h) x (0, a)` with `x` the thin direction.
//! Distances are measured either from the bottom edge `y = 0` or from an
//! anchor point on that edge. A weight is a nonnegative combination of powers
//! of the distance, `w = sum_i c_i * delta^alpha_i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the plane, `x` along the thin direction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// The rectangle `(0, h) x (0, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThinRectangle {
    h: f64,
    a: f64,
}

impl ThinRectangle {
    pub fn new(h: f64, a: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidDomain(format!("thickness h = {h} must be positive")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidDomain(format!("cross-section a = {a} must be positive")));
        }
        Ok(Self { h, a })
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Advisory only: `h < a`.
    pub fn is_thin(&self) -> bool {
        self.h < self.a
    }

    pub fn area(&self) -> f64 {
        self.h * self.a
    }

    pub fn contains_closed(&self, p: Point, tol: f64) -> bool {
        p.x >= -tol && p.x <= self.h + tol && p.y >= -tol && p.y <= self.a + tol
    }
}

/// Which set the distance `delta` is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistanceKind {
    /// `delta(x, y) = y`.
    BottomEdge,
    /// `delta(p) = |p - (anchor_x, 0)|`, anchor on the closed bottom edge.
    CornerPoint { anchor_x: f64 },
}

impl DistanceKind {
    /// Anchor point on the closure of the bottom edge of `domain`.
    pub fn corner(anchor_x: f64, domain: &ThinRectangle) -> Result<Self> {
        if !(anchor_x.is_finite() && (0.0..=domain.h()).contains(&anchor_x)) {
            return Err(Error::InvalidWeight(format!(
                "anchor x0 = {anchor_x} not on the bottom edge [0, {}]",
                domain.h()
            )));
        }
        Ok(DistanceKind::CornerPoint { anchor_x })
    }

    pub fn anchor(&self) -> Option<Point> {
        match *self {
            DistanceKind::BottomEdge => None,
            DistanceKind::CornerPoint { anchor_x } => Some(Point::new(anchor_x, 0.0)),
        }
    }
}

/// Distance from `p` to the set selected by `kind`.
#[inline]
pub fn eval_distance(p: Point, kind: DistanceKind) -> f64 {
    match kind {
        DistanceKind::BottomEdge => p.y.max(0.0),
        DistanceKind::CornerPoint { anchor_x } => p.dist(&Point::new(anchor_x, 0.0)),
    }
}

/// Gradient of the distance function where it is differentiable; `None` at
/// the anchor point itself.
fn distance_gradient(p: Point, kind: DistanceKind) -> Option<[f64; 2]> {
    match kind {
        DistanceKind::BottomEdge => Some([0.0, 1.0]),
        DistanceKind::CornerPoint { anchor_x } => {
            let r = p.dist(&Point::new(anchor_x, 0.0));
            if r == 0.0 {
                None
            } else {
                Some([(p.x - anchor_x) / r, p.y / r])
            }
        }
    }
}

/// `t^e` with the convention `0^0 = 1`.
#[inline]
pub(crate) fn pow0(t: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        t.powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightTerm {
    pub coeff: f64,
    pub exponent: f64,
}

impl WeightTerm {
    pub const fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }
}

/// Marks a weight as the product of `factors` weights that all satisfy the
/// admissibility bound with the same constant `shared_constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductMarker {
    pub factors: usize,
    pub shared_constant: f64,
}

/// Whether an exponent range `[0, beta]` or `[0, beta)` is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interval {
    Closed,
    Open,
}

/// `w(p) = sum_i c_i delta(p)^alpha_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    terms: Vec<WeightTerm>,
    kind: DistanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    product: Option<ProductMarker>,
}

impl WeightSpec {
    pub fn new(terms: Vec<WeightTerm>, kind: DistanceKind) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidWeight("no terms".into()));
        }
        for t in &terms {
            if !(t.coeff.is_finite() && t.coeff >= 0.0) {
                return Err(Error::InvalidWeight(format!("coefficient {} must be >= 0", t.coeff)));
            }
            if !t.exponent.is_finite() {
                return Err(Error::InvalidWeight(format!("exponent {} is not finite", t.exponent)));
            }
        }
        if !terms.iter().any(|t| t.coeff > 0.0) {
            return Err(Error::InvalidWeight("at least one coefficient must be positive".into()));
        }
        Ok(Self { terms, kind, product: None })
    }

    /// `w = delta^alpha` measured from the bottom edge.
    pub fn power(alpha: f64) -> Self {
        Self::new(vec![WeightTerm::new(1.0, alpha)], DistanceKind::BottomEdge).expect("single positive term")
    }

    /// `w = 1`.
    pub fn unit() -> Self {
        Self::power(0.0)
    }

    pub fn with_product(mut self, factors: usize, shared_constant: f64) -> Result<Self> {
        if factors == 0 || !(shared_constant.is_finite() && shared_constant >= 0.0) {
            return Err(Error::InvalidWeight(format!(
                "product marker needs k >= 1 and K >= 0 (got k = {factors}, K = {shared_constant})"
            )));
        }
        self.product = Some(ProductMarker { factors, shared_constant });
        Ok(self)
    }

    pub fn terms(&self) -> &[WeightTerm] {
        &self.terms
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn product(&self) -> Option<ProductMarker> {
        self.product
    }

    pub fn max_exponent(&self) -> f64 {
        self.terms.iter().map(|t| t.exponent).fold(f64::NEG_INFINITY, f64::max)
    }

    /// All exponents lie in `[0, 1/2)`, or `[0, 1/2]` on the Laplacian path.
    pub fn check_exponent_range(&self, laplacian: bool) -> Result<()> {
        for t in &self.terms {
            let ok = t.exponent >= 0.0 && if laplacian { t.exponent <= 0.5 } else { t.exponent < 0.5 };
            if !ok {
                let bound = if laplacian { "[0, 1/2]" } else { "[0, 1/2) (1/2 needs the Laplacian flag)" };
                return Err(Error::InvalidWeight(format!("exponent {} outside {bound}", t.exponent)));
            }
        }
        Ok(())
    }

    /// Whether every exponent lies in `[0, beta]` (closed) or `[0, beta)` (open).
    pub fn exponents_within(&self, beta: f64, interval: Interval) -> bool {
        self.terms.iter().all(|t| {
            t.exponent >= 0.0
                && match interval {
                    Interval::Closed => t.exponent <= beta,
                    Interval::Open => t.exponent < beta,
                }
        })
    }

    /// Value of the weight at a given distance.
    #[inline]
    pub fn at_distance(&self, delta: f64) -> f64 {
        self.terms.iter().map(|t| t.coeff * pow0(delta, t.exponent)).sum()
    }

    /// Weight with each term split out; used to check superposition bounds.
    pub fn split_terms(&self) -> Vec<WeightSpec> {
        self.terms
            .iter()
            .filter(|t| t.coeff > 0.0)
            .map(|t| WeightSpec { terms: vec![*t], kind: self.kind, product: None })
            .collect()
    }
}

/// `sum_i c_i delta(p)^alpha_i`, with `0^0 = 1`.
#[inline]
pub fn eval_weight(w: &WeightSpec, p: Point) -> f64 {
    w.at_distance(eval_distance(p, w.kind))
}

/// Admissibility constant `K` in `|delta grad w| <= K w`: the largest `|alpha_i|`
/// over the terms, or `k K` for a product of `k` factors sharing `K`.
pub fn admissibility_constant(w: &WeightSpec) -> f64 {
    if let Some(m) = w.product {
        return m.factors as f64 * m.shared_constant;
    }
    w.terms.iter().filter(|t| t.coeff > 0.0).map(|t| t.exponent.abs()).fold(0.0, f64::max)
}

/// `delta_edge(p) * grad w(p)`, where `delta_edge = y` is the distance to the
/// bottom edge. Returns `None` where the product is undefined (the anchor
/// point of a corner weight).
pub fn scaled_weight_gradient(w: &WeightSpec, p: Point) -> Option<[f64; 2]> {
    let y = p.y.max(0.0);
    let mut g = [0.0; 2];
    match w.kind {
        DistanceKind::BottomEdge => {
            // y * c alpha y^(alpha - 1) = c alpha y^alpha, finite at y = 0 for alpha > 0
            for t in w.terms.iter().filter(|t| t.exponent != 0.0) {
                g[1] += t.coeff * t.exponent * pow0(y, t.exponent);
            }
        }
        DistanceKind::CornerPoint { .. } => {
            let r = eval_distance(p, w.kind);
            let dir = distance_gradient(p, w.kind)?;
            for t in w.terms.iter().filter(|t| t.exponent != 0.0) {
                let s = y * t.coeff * t.exponent * r.powf(t.exponent - 1.0);
                g[0] += s * dir[0];
                g[1] += s * dir[1];
            }
        }
    }
    Some(g)
}

/// Outcome of sampling the admissibility bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub constant: f64,
    pub max_ratio: f64,
    pub checked: usize,
    pub skipped: usize,
    pub violations: usize,
    pub pass: bool,
}

/// Checks `|y grad w| <= K w` at every sample point. Samples where the
/// ratio is undefined (`w = 0` or the corner anchor) are skipped.
pub fn verify_admissibility(w: &WeightSpec, samples: &[Point]) -> AdmissibilityReport {
    let k = admissibility_constant(w);
    let mut max_ratio: f64 = 0.0;
    let (mut checked, mut skipped, mut violations) = (0, 0, 0);
    for &p in samples {
        let wp = eval_weight(w, p);
        let g = match scaled_weight_gradient(w, p) {
            Some(g) if wp > 0.0 => g,
            _ => {
                skipped += 1;
                continue;
            }
        };
        let ratio = g[0].hypot(g[1]) / wp;
        checked += 1;
        max_ratio = max_ratio.max(ratio);
        if ratio > k * (1.0 + 1e-12) + 1e-300 {
            violations += 1;
        }
    }
    AdmissibilityReport { constant: k, max_ratio, checked, skipped, violations, pass: violations == 0 }
}

/// Constant symmetric positive definite matrix defining `L u = div(A grad u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticitySpec {
    entries: [[f64; 2]; 2],
    lambda_min: f64,
    lambda_max: f64,
}

impl EllipticitySpec {
    pub fn new(entries: [[f64; 2]; 2]) -> Result<Self> {
        let (lambda_min, lambda_max) = ellipticity_bounds(entries)?;
        Ok(Self { entries, lambda_min, lambda_max })
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]]).expect("identity is SPD")
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.entries
    }

    /// Smallest eigenvalue.
    pub fn lambda(&self) -> f64 {
        self.lambda_min
    }

    /// Largest eigenvalue.
    pub fn big_lambda(&self) -> f64 {
        self.lambda_max
    }

    /// `xi A xi^T`.
    pub fn quadratic(&self, xi: [f64; 2]) -> f64 {
        let a = &self.entries;
        a[0][0] * xi[0] * xi[0] + (a[0][1] + a[1][0]) * xi[0] * xi[1] + a[1][1] * xi[1] * xi[1]
    }

    /// `A : D^2 u` for a given Hessian.
    pub fn apply_to_hessian(&self, hess: [[f64; 2]; 2]) -> f64 {
        let a = &self.entries;
        a[0][0] * hess[0][0] + a[0][1] * hess[0][1] + a[1][0] * hess[1][0] + a[1][1] * hess[1][1]
    }

    /// `A` is a positive multiple of the identity, i.e. `L` is a scaled Laplacian.
    pub fn is_laplacian(&self) -> bool {
        let a = &self.entries;
        a[0][1] == 0.0 && a[1][0] == 0.0 && (a[0][0] - a[1][1]).abs() <= 1e-14 * a[0][0].abs()
    }
}

/// Extreme eigenvalues `(lambda, Lambda)` of a symmetric positive definite 2x2 matrix.
pub fn ellipticity_bounds(a: [[f64; 2]; 2]) -> Result<(f64, f64)> {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidEllipticity("non-finite entry".into()));
    }
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if (a[0][1] - a[1][0]).abs() > 1e-14 * scale {
        return Err(Error::InvalidEllipticity(format!("not symmetric: a12 = {}, a21 = {}", a[0][1], a[1][0])));
    }
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let rad = (0.5 * (a[0][0] - a[1][1])).hypot(a[0][1]);
    let (lo, hi) = (mean - rad, mean + rad);
    if lo <= 0.0 {
        return Err(Error::InvalidEllipticity(format!("not positive definite: smallest eigenvalue {lo}")));
    }
    Ok((lo, hi))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && (0.0..0.5).contains(&beta)) {
        return Err(Error::BetaOutOfRange { beta });
    }
    Ok(())
}

/// `lambda > 4 n Lambda beta / (1 - 2 beta)^2`.
pub fn beta_condition(lambda: f64, big_lambda: f64, n: usize, beta: f64) -> Result<bool> {
    check_beta(beta)?;
    Ok(lambda > 4.0 * n as f64 * big_lambda * beta / (1.0 - 2.0 * beta).powi(2))
}

/// Root `beta*` in `[0, 1/2)` of `lambda (1 - 2 beta)^2 = 4 n Lambda beta`,
/// found by bisection to `1e-12`.
pub fn max_admissible_beta(lambda: f64, big_lambda: f64, n: usize) -> f64 {
    let g = |b: f64| lambda * (1.0 - 2.0 * b).powi(2) - 4.0 * n as f64 * big_lambda * b;
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(eval_distance(Point::new(0.3, 0.0), DistanceKind::BottomEdge), 0.0);
        assert_eq!(eval_distance(Point::new(0.3, 0.25), DistanceKind::BottomEdge), 0.25);
        let corner = DistanceKind::CornerPoint { anchor_x: 0.0 };
        assert_eq!(eval_distance(Point::new(3.0, 4.0), corner), 5.0);
    }

    #[test]
    fn corner_anchor_must_lie_on_bottom_edge() {
        let d = ThinRectangle::new(0.5, 1.0).unwrap();
        assert!(DistanceKind::corner(0.5, &d).is_ok());
        assert!(DistanceKind::corner(0.6, &d).is_err());
    }

    #[test]
    fn weight_examples() {
        let p = Point::new(0.1, 16.0);
        assert_eq!(eval_weight(&WeightSpec::unit(), Point::new(0.2, 0.0)), 1.0);
        let w = WeightSpec::new(vec![WeightTerm::new(2.0, 0.25)], DistanceKind::BottomEdge).unwrap();
        assert!((eval_weight(&w, p) - 4.0).abs() < 1e-14);
        let w = WeightSpec::new(vec![WeightTerm::new(1.0, 0.0), WeightTerm::new(2.0, 0.25)], DistanceKind::BottomEdge)
            .unwrap();
        assert!((eval_weight(&w, p) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn weight_rejects_bad_coefficients() {
        assert!(WeightSpec::new(vec![WeightTerm::new(-1.0, 0.1)], DistanceKind::BottomEdge).is_err());
        assert!(WeightSpec::new(vec![WeightTerm::new(0.0, 0.1)], DistanceKind::BottomEdge).is_err());
        assert!(WeightSpec::new(vec![], DistanceKind::BottomEdge).is_err());
    }

    #[test]
    fn exponent_range_depends_on_laplacian_flag() {
        let w = WeightSpec::power(0.5);
        assert!(w.check_exponent_range(false).is_err());
        assert!(w.check_exponent_range(true).is_ok());
        assert!(WeightSpec::power(0.6).check_exponent_range(true).is_err());
        assert!(w.exponents_within(0.5, Interval::Closed));
        assert!(!w.exponents_within(0.5, Interval::Open));
    }

    #[test]
    fn admissibility_constants() {
        assert_eq!(admissibility_constant(&WeightSpec::power(0.3)), 0.3);
        let sum = WeightSpec::new(vec![WeightTerm::new(1.0, 0.1), WeightTerm::new(3.0, 0.3)], DistanceKind::BottomEdge)
            .unwrap();
        assert_eq!(admissibility_constant(&sum), 0.3);
        let prod = WeightSpec::power(0.2).with_product(3, 0.2).unwrap();
        assert!((admissibility_constant(&prod) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn admissibility_sampling() {
        let samples: Vec<Point> =
            (1..=10).flat_map(|i| (1..=10).map(move |j| Point::new(0.1 * i as f64, 0.1 * j as f64))).collect();
        let r = verify_admissibility(&WeightSpec::power(0.3), &samples);
        assert!(r.pass);
        assert_eq!(r.checked, 100);
        assert!((r.max_ratio - 0.3).abs() < 1e-14);

        let r = verify_admissibility(&WeightSpec::unit(), &samples);
        assert!(r.pass);
        assert_eq!(r.max_ratio, 0.0);
    }

    #[test]
    fn admissibility_sum_of_powers_on_fine_grid() {
        let w = WeightSpec::new(vec![WeightTerm::new(0.7, 0.1), WeightTerm::new(1.9, 0.3)], DistanceKind::BottomEdge)
            .unwrap();
        // Independent ratio: y w'(y) / w(y) evaluated by hand.
        let mut worst: f64 = 0.0;
        for j in 1..=2000 {
            let y = j as f64 * 5e-4;
            let num = 0.7 * 0.1 * y.powf(0.1) + 1.9 * 0.3 * y.powf(0.3);
            let den = 0.7 * y.powf(0.1) + 1.9 * y.powf(0.3);
            worst = worst.max(num / den);
        }
        assert!(worst <= 0.3);
        let samples: Vec<Point> = (1..=2000).map(|j| Point::new(0.2, j as f64 * 5e-4)).collect();
        let r = verify_admissibility(&w, &samples);
        assert!(r.pass);
        assert!((r.max_ratio - worst).abs() < 1e-13);
    }

    #[test]
    fn admissibility_skips_zero_weight_points() {
        let samples = [Point::new(0.2, 0.0), Point::new(0.2, 0.5)];
        let r = verify_admissibility(&WeightSpec::power(0.3), &samples);
        assert_eq!(r.skipped, 1);
        assert_eq!(r.checked, 1);
        assert!(r.pass);
    }

    #[test]
    fn corner_weight_is_admissible_with_alpha() {
        let d = ThinRectangle::new(1.0, 1.0).unwrap();
        let w = WeightSpec::new(vec![WeightTerm::new(1.0, 0.4)], DistanceKind::corner(0.3, &d).unwrap()).unwrap();
        let samples: Vec<Point> =
            (0..=20).flat_map(|i| (0..=20).map(move |j| Point::new(0.05 * i as f64, 0.05 * j as f64))).collect();
        let r = verify_admissibility(&w, &samples);
        assert!(r.pass, "{r:?}");
        assert!(r.max_ratio <= 0.4 + 1e-14);
    }

    #[test]
    fn ellipticity_examples() {
        assert_eq!(ellipticity_bounds([[1.0, 0.0], [0.0, 1.0]]).unwrap(), (1.0, 1.0));
        assert_eq!(ellipticity_bounds([[2.0, 0.0], [0.0, 5.0]]).unwrap(), (2.0, 5.0));
        let (lo, hi) = ellipticity_bounds([[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
        assert!(ellipticity_bounds([[1.0, 2.0], [0.0, 1.0]]).is_err());
        assert!(ellipticity_bounds([[1.0, 2.0], [2.0, 1.0]]).is_err());
    }

    #[test]
    fn ellipticity_sampled_directions() {
        use rand::{Rng, SeedableRng};
        let spec = EllipticitySpec::new([[3.0, -0.7], [-0.7, 1.2]]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let q = spec.quadratic([t.cos(), t.sin()]);
            assert!(q >= spec.lambda() - 1e-12 && q <= spec.big_lambda() + 1e-12);
        }
    }

    #[test]
    fn beta_condition_examples() {
        assert!(beta_condition(1.0, 1.0, 2, 0.0).unwrap());
        assert!(!beta_condition(1.0, 1.0, 2, 0.1).unwrap());
        assert!(beta_condition(1.0, 1.0, 2, 0.5).is_err());
        assert!(beta_condition(1.0, 1.0, 2, -0.1).is_err());
    }

    #[test]
    fn max_beta_matches_quadratic_root() {
        for &(l, big_l, n) in &[(1.0, 1.0, 2usize), (0.5, 2.0, 2), (3.0, 3.5, 3)] {
            let b = max_admissible_beta(l, big_l, n);
            // lambda (1 - 2b)^2 = 4 n Lambda b  <=>  4 l b^2 - 4 (l + n L) b + l = 0
            let s = l + n as f64 * big_l;
            let root = (s - (s * s - l * l).sqrt()) / (2.0 * l);
            assert!((b - root).abs() < 1e-11, "{b} vs {root}");
            assert!(beta_condition(l, big_l, n, (root - 1e-9).max(0.0)).unwrap());
            assert!(!beta_condition(l, big_l, n, root + 1e-9).unwrap());
        }
        assert!((max_admissible_beta(1.0, 1.0, 2) - (3.0 - 8f64.sqrt()) / 2.0).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn distance_is_one_lipschitz(
            px in 0.0..1.0f64, py in 0.0..1.0f64, qx in 0.0..1.0f64, qy in 0.0..1.0f64, x0 in 0.0..1.0f64
        ) {
            let (p, q) = (Point::new(px, py), Point::new(qx, qy));
            for kind in [DistanceKind::BottomEdge, DistanceKind::CornerPoint { anchor_x: x0 }] {
                let d = (eval_distance(p, kind) - eval_distance(q, kind)).abs();
                prop_assert!(d <= p.dist(&q) + 1e-15);
            }
        }

        #[test]
        fn single_power_admissibility_is_an_identity(alpha in 0.0..0.5f64, x in 0.0..1.0f64, y in 1e-6..1.0f64) {
            let w = WeightSpec::power(alpha);
            let p = Point::new(x, y);
            let g = scaled_weight_gradient(&w, p).unwrap();
            let lhs = g[0].hypot(g[1]);
            prop_assert!((lhs - alpha * eval_weight(&w, p)).abs() <= 1e-12 * eval_weight(&w, p));
        }

        #[test]
        fn weight_superposition_is_exact(c1 in 0.1..3.0f64, a1 in 0.0..0.5f64, c2 in 0.1..3.0f64, a2 in 0.0..0.5f64, y in 0.0..2.0f64) {
            let w = WeightSpec::new(vec![WeightTerm::new(c1, a1), WeightTerm::new(c2, a2)], DistanceKind::BottomEdge).unwrap();
            let p = Point::new(0.1, y);
            let parts: f64 = w.split_terms().iter().map(|wi| eval_weight(wi, p)).sum();
            prop_assert_eq!(eval_weight(&w, p), parts);
        }

        #[test]
        fn beta_condition_is_monotone(l in 0.1..5.0f64, big in 0.0..5.0f64, b in 0.0..0.499f64, t in 0.0..1.0f64) {
            let big = l + big;
            if beta_condition(l, big, 2, b).unwrap() {
                prop_assert!(beta_condition(l, big, 2, b * t).unwrap());
            }
        }
    }
}
