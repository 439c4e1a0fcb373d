//! Weighted Caccioppoli-type ratio
//! `|w y grad u|^2 / (|w u|^2 + |w y^2 L u|^2)` for `u` vanishing on the
//! faces `x = 0`, `x = h` and `y = a`, where `y` is the distance to the
//! bottom edge.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ansatz::integrate_cells;
use crate::error::{Error, Result};
use crate::field::{interpolate_scalar, ScalarFunction, SmoothScalarFunction};
use crate::forms::assemble_scalar_forms;
use crate::geometry::{eval_weight, EllipticitySpec, Point, WeightSpec};
use crate::grid::GradedGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma31Record {
    /// `|w y grad u|^2`
    pub dist_grad: f64,
    /// `|w u|^2`
    pub mass: f64,
    /// `|w y^2 L u|^2`
    pub operator: f64,
    pub ratio: f64,
    pub degenerate: bool,
}

impl Lemma31Record {
    fn new(dist_grad: f64, mass: f64, operator: f64) -> Self {
        let den = mass + operator;
        let degenerate = !(den > 0.0 && den.is_finite());
        Self { dist_grad, mass, operator, ratio: if degenerate { 0.0 } else { dist_grad / den }, degenerate }
    }
}

fn check_boundary<U: ScalarFunction + ?Sized>(u: &U, grid: &GradedGrid) -> Result<()> {
    let (h, a) = (grid.domain().h(), grid.domain().a());
    let mut pts = Vec::new();
    for i in 0..=32 {
        let t = i as f64 / 32.0;
        pts.extend([Point::new(0.0, t * a), Point::new(h, t * a), Point::new(t * h, a)]);
    }
    let scale = grid.nodes().map(|p| u.value(p).abs()).fold(0.0, f64::max);
    for p in pts {
        if u.value(p).abs() > 1e-10 * scale.max(1e-300) {
            return Err(Error::InvalidArgument(format!(
                "field does not vanish at ({}, {}) on the faces away from the bottom edge",
                p.x, p.y
            )));
        }
    }
    Ok(())
}

/// Ratio from quadrature of the exact derivatives.
pub fn lemma31_ratio<U: SmoothScalarFunction + ?Sized>(
    u: &U,
    a: &EllipticitySpec,
    w: &WeightSpec,
    grid: &GradedGrid,
    order: usize,
) -> Result<Lemma31Record> {
    check_boundary(u, grid)?;
    let [g, m, l] = integrate_cells(grid, order, |p| {
        let w2 = eval_weight(w, p).powi(2);
        let gr = u.gradient(p);
        let lu = a.apply_to_hessian(u.hessian(p));
        let y2 = p.y * p.y;
        [w2 * y2 * (gr[0] * gr[0] + gr[1] * gr[1]), w2 * u.value(p).powi(2), w2 * y2 * y2 * lu * lu]
    })?;
    Ok(Lemma31Record::new(g, m, l))
}

/// Ratio from the assembled forms applied to the nodal interpolants of `u`
/// and `L u`.
pub fn lemma31_discrete<U: SmoothScalarFunction + ?Sized>(
    u: &U,
    a: &EllipticitySpec,
    w: &WeightSpec,
    grid: &Arc<GradedGrid>,
    order: usize,
) -> Result<Lemma31Record> {
    check_boundary(u, grid)?;
    let forms = assemble_scalar_forms(grid, w, a, order)?;
    let ui = interpolate_scalar(|p| u.value(p), grid);
    let li = interpolate_scalar(|p| a.apply_to_hessian(u.hessian(p)), grid);
    Ok(Lemma31Record::new(forms.dist_grad.eval(&ui.0), forms.mass.eval(&ui.0), forms.dist4_mass.eval(&li.0)))
}

/// Manufactured fields that vanish on `x = 0`, `x = h` and `y = a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manufactured {
    /// `sin(pi x / h) sinh(pi (a - y) / h) / sinh(pi a / h)`, harmonic.
    HarmonicDecay { h: f64, a: f64 },
    /// `sin(pi x / h) sin(pi y / a)`.
    SineSine { h: f64, a: f64 },
    /// `x (h - x) (a - y) (1 + y) / h^2`.
    Polynomial { h: f64, a: f64 },
}

impl Manufactured {
    pub fn all(h: f64, a: f64) -> [Manufactured; 3] {
        [Manufactured::HarmonicDecay { h, a }, Manufactured::SineSine { h, a }, Manufactured::Polynomial { h, a }]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Manufactured::HarmonicDecay { .. } => "harmonic-decay",
            Manufactured::SineSine { .. } => "sine-sine",
            Manufactured::Polynomial { .. } => "polynomial",
        }
    }
}

/// `sinh(k (a - y)) / sinh(k a)` and its `y`-derivative ratio `cosh / sinh`,
/// written with decaying exponentials.
fn decay(k: f64, a: f64, y: f64) -> (f64, f64) {
    let e = (-k * y).exp();
    let num = -(-2.0 * k * (a - y)).exp_m1();
    let den = -(-2.0 * k * a).exp_m1();
    let s = e * num / den;
    let c = e * (1.0 + (-2.0 * k * (a - y)).exp()) / den;
    (s, c)
}

impl ScalarFunction for Manufactured {
    fn value(&self, p: Point) -> f64 {
        match *self {
            Manufactured::HarmonicDecay { h, a } => (PI * p.x / h).sin() * decay(PI / h, a, p.y).0,
            Manufactured::SineSine { h, a } => (PI * p.x / h).sin() * (PI * p.y / a).sin(),
            Manufactured::Polynomial { h, a } => p.x * (h - p.x) * (a - p.y) * (1.0 + p.y) / (h * h),
        }
    }

    fn gradient(&self, p: Point) -> [f64; 2] {
        match *self {
            Manufactured::HarmonicDecay { h, a } => {
                let k = PI / h;
                let (s, c) = decay(k, a, p.y);
                [k * (k * p.x).cos() * s, -k * (k * p.x).sin() * c]
            }
            Manufactured::SineSine { h, a } => {
                let (kx, ky) = (PI / h, PI / a);
                [kx * (kx * p.x).cos() * (ky * p.y).sin(), ky * (kx * p.x).sin() * (ky * p.y).cos()]
            }
            Manufactured::Polynomial { h, a } => {
                let (x, y) = (p.x, p.y);
                [(h - 2.0 * x) * (a - y) * (1.0 + y) / (h * h), x * (h - x) * (a - 1.0 - 2.0 * y) / (h * h)]
            }
        }
    }
}

impl SmoothScalarFunction for Manufactured {
    fn hessian(&self, p: Point) -> [[f64; 2]; 2] {
        match *self {
            Manufactured::HarmonicDecay { h, a } => {
                let k = PI / h;
                let (s, c) = decay(k, a, p.y);
                let (sx, cx) = ((k * p.x).sin(), (k * p.x).cos());
                let xy = -k * k * cx * c;
                [[-k * k * sx * s, xy], [xy, k * k * sx * s]]
            }
            Manufactured::SineSine { h, a } => {
                let (kx, ky) = (PI / h, PI / a);
                let (sx, cx, sy, cy) = ((kx * p.x).sin(), (kx * p.x).cos(), (ky * p.y).sin(), (ky * p.y).cos());
                let xy = kx * ky * cx * cy;
                [[-kx * kx * sx * sy, xy], [xy, -ky * ky * sx * sy]]
            }
            Manufactured::Polynomial { h, a } => {
                let (x, y) = (p.x, p.y);
                let xy = (h - 2.0 * x) * (a - 1.0 - 2.0 * y) / (h * h);
                [[-2.0 * (a - y) * (1.0 + y) / (h * h), xy], [xy, -2.0 * x * (h - x) / (h * h)]]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ThinRectangle;
    use crate::grid::build_grid;

    #[test]
    fn zero_field_is_degenerate() {
        let g = build_grid(&ThinRectangle::new(0.2, 1.0).unwrap(), 4, 8, 2.0).unwrap();
        struct Zero;
        impl ScalarFunction for Zero {
            fn value(&self, _: Point) -> f64 {
                0.0
            }
            fn gradient(&self, _: Point) -> [f64; 2] {
                [0.0; 2]
            }
        }
        impl SmoothScalarFunction for Zero {
            fn hessian(&self, _: Point) -> [[f64; 2]; 2] {
                [[0.0; 2]; 2]
            }
        }
        let r = lemma31_ratio(&Zero, &EllipticitySpec::identity(), &WeightSpec::unit(), &g, 4).unwrap();
        assert!(r.degenerate);
    }

    #[test]
    fn derivatives_match_differences() {
        let p = Point::new(0.07, 0.23);
        for f in Manufactured::all(0.2, 1.0) {
            let e = 1e-6;
            let g = f.gradient(p);
            let gx = (f.value(Point::new(p.x + e, p.y)) - f.value(Point::new(p.x - e, p.y))) / (2.0 * e);
            let gy = (f.value(Point::new(p.x, p.y + e)) - f.value(Point::new(p.x, p.y - e))) / (2.0 * e);
            assert!((g[0] - gx).abs() < 1e-5 * (1.0 + gx.abs()), "{}", f.name());
            assert!((g[1] - gy).abs() < 1e-5 * (1.0 + gy.abs()), "{}", f.name());
            let hs = f.hessian(p);
            let hxy = (f.gradient(Point::new(p.x, p.y + e))[0] - f.gradient(Point::new(p.x, p.y - e))[0]) / (2.0 * e);
            let hyy = (f.gradient(Point::new(p.x, p.y + e))[1] - f.gradient(Point::new(p.x, p.y - e))[1]) / (2.0 * e);
            assert!((hs[0][1] - hxy).abs() < 1e-4 * (1.0 + hxy.abs()), "{}", f.name());
            assert!((hs[1][1] - hyy).abs() < 1e-4 * (1.0 + hyy.abs()), "{}", f.name());
        }
        let hd = Manufactured::HarmonicDecay { h: 0.2, a: 1.0 }.hessian(p);
        assert!((hd[0][0] + hd[1][1]).abs() < 1e-9);
    }

    #[test]
    fn sine_sine_matches_closed_form() {
        // w = 1, A = I: every integral separates into 1D trigonometric moments
        let (h, a) = (0.25, 1.0);
        let g = build_grid(&ThinRectangle::new(h, a).unwrap(), 8, 32, 1.0).unwrap();
        let f = Manufactured::SineSine { h, a };
        let r = lemma31_ratio(&f, &EllipticitySpec::identity(), &WeightSpec::unit(), &g, 10).unwrap();
        let (kx, ky) = (PI / h, PI / a);
        // int_0^a y^2 sin^2, y^2 cos^2, y^4 sin^2 over (0, a) with ky a = pi
        let y2s = a.powi(3) / 6.0 - a.powi(3) / (4.0 * PI * PI);
        let y2c = a.powi(3) / 6.0 + a.powi(3) / (4.0 * PI * PI);
        let y4s = a.powi(5) / 10.0 - a.powi(5) / (2.0 * PI * PI) + 3.0 * a.powi(5) / (4.0 * PI.powi(4));
        let half = h / 2.0;
        let dist_grad = half * (kx * kx * y2s + ky * ky * y2c);
        let mass = half * a / 2.0;
        let operator = (kx * kx + ky * ky).powi(2) * half * y4s;
        let exact = dist_grad / (mass + operator);
        assert!((r.ratio - exact).abs() <= 1e-8 * exact, "{} vs {exact}", r.ratio);
    }

    #[test]
    fn boundary_check_rejects_nonvanishing_fields() {
        let g = build_grid(&ThinRectangle::new(0.2, 1.0).unwrap(), 4, 8, 2.0).unwrap();
        let bad = Manufactured::Polynomial { h: 0.3, a: 1.0 };
        assert!(lemma31_ratio(&bad, &EllipticitySpec::identity(), &WeightSpec::unit(), &g, 4).is_err());
    }

    #[test]
    fn discrete_ratio_approaches_the_quadrature_ratio() {
        let (h, a) = (0.2, 1.0);
        let d = ThinRectangle::new(h, a).unwrap();
        let w = WeightSpec::power(0.25);
        let f = Manufactured::Polynomial { h, a };
        let fine = build_grid(&d, 8, 32, 2.0).unwrap();
        let exact = lemma31_ratio(&f, &EllipticitySpec::identity(), &w, &fine, 8).unwrap().ratio;
        let mut last = f64::INFINITY;
        for n in [4, 8, 16] {
            let g = Arc::new(build_grid(&d, n, 4 * n, 2.0).unwrap());
            let r = lemma31_discrete(&f, &EllipticitySpec::identity(), &w, &g, 4).unwrap().ratio;
            let err = (r - exact).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 0.02 * exact);
    }
}
