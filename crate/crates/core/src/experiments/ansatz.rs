//! Closed-form vector fields and their Korn interpolation ratio under
//! quadrature of exact derivatives.

use serde::{Deserialize, Serialize};

use super::fit::{check_h_list, SweepPoint, SweepReport};
use crate::error::{Error, Result};
use crate::field::VectorFunction;
use crate::geometry::{eval_weight, Point, ThinRectangle, WeightSpec};
use crate::grid::{build_grid, GradedGrid};
use crate::quadrature::{check_order, GaussRule};

/// `exp(1 - 1 / (1 - z^2))` with `z = (t - center) / radius`, zero for `|z| >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub radius: f64,
}

impl Bump {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && center.is_finite()) {
            return Err(Error::InvalidArgument(format!("bump radius {radius} must be positive")));
        }
        Ok(Self { center, radius })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.radius, self.center + self.radius)
    }

    /// `(f, f', f'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let z = (t - self.center) / self.radius;
        if z.abs() >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let s = 1.0 - z * z;
        let f = (1.0 - 1.0 / s).exp();
        let g1 = -2.0 * z / (s * s);
        let g2 = -2.0 / (s * s) - 8.0 * z * z / (s * s * s);
        let r = self.radius;
        (f, f * g1 / r, f * (g1 * g1 + g2) / (r * r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzVariant {
    /// `U = (f(t), -(x / h^s) f(t))` with `t = y / h^s`.
    Printed,
    /// `U = (f(t), -(x / h^s) f'(t))`, for which `u_y + v_x = 0`.
    ShearFree,
}

/// The scaled vector Ansatz on `(0, h) x (0, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledAnsatz {
    pub bump: Bump,
    pub s: f64,
    pub h: f64,
    pub variant: AnsatzVariant,
}

/// Checks `s` in `[0, 1/2]` and that the support of `f(y / h^s)` lies in `[0, a]`.
pub fn ansatz_scaled(bump: Bump, s: f64, domain: &ThinRectangle, variant: AnsatzVariant) -> Result<ScaledAnsatz> {
    if !(0.0..=0.5).contains(&s) {
        return Err(Error::InvalidArgument(format!("scaling exponent s = {s} outside [0, 1/2]")));
    }
    let hs = domain.h().powf(s);
    let (lo, hi) = bump.support();
    if lo * hs < 0.0 || hi * hs > domain.a() {
        return Err(Error::InvalidArgument(format!(
            "support [{}, {}] of the scaled profile exceeds the cross-section (0, {})",
            lo * hs,
            hi * hs,
            domain.a()
        )));
    }
    Ok(ScaledAnsatz { bump, s, h: domain.h(), variant })
}

impl ScaledAnsatz {
    /// `y`-interval where the field is nonzero.
    pub fn support_y(&self) -> (f64, f64) {
        let hs = self.h.powf(self.s);
        let (lo, hi) = self.bump.support();
        (lo * hs, hi * hs)
    }
}

impl VectorFunction for ScaledAnsatz {
    fn value(&self, p: Point) -> [f64; 2] {
        let hs = self.h.powf(self.s);
        let (f, f1, _) = self.bump.eval(p.y / hs);
        match self.variant {
            AnsatzVariant::Printed => [f, -p.x / hs * f],
            AnsatzVariant::ShearFree => [f, -p.x / hs * f1],
        }
    }

    fn jacobian(&self, p: Point) -> [[f64; 2]; 2] {
        let hs = self.h.powf(self.s);
        let (f, f1, f2) = self.bump.eval(p.y / hs);
        match self.variant {
            AnsatzVariant::Printed => [[0.0, f1 / hs], [-f / hs, -p.x * f1 / (hs * hs)]],
            AnsatzVariant::ShearFree => [[0.0, f1 / hs], [-f1 / hs, -p.x * f2 / (hs * hs)]],
        }
    }
}

/// Weighted norms of an analytic vector field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRatio {
    pub h: f64,
    /// `|w grad U|^2`
    pub grad: f64,
    /// `|w u|^2`
    pub mass_u: f64,
    /// `|w e(U)|^2`
    pub strain: f64,
    /// Zero when degenerate.
    pub ratio: f64,
    pub degenerate: bool,
}

/// Tensor Gauss quadrature of `g(p)` over every cell of `grid`.
pub fn integrate_cells<F: Fn(Point) -> [f64; 3]>(grid: &GradedGrid, order: usize, g: F) -> Result<[f64; 3]> {
    check_order(order)?;
    let rule = GaussRule::new(order);
    let mut acc = [0.0; 3];
    for c in grid.cells() {
        let (x0, x1, y0, y1) = grid.cell_bounds(c);
        let (dx, dy) = (x1 - x0, y1 - y0);
        for (&t, &wt) in rule.points.iter().zip(&rule.weights) {
            for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
                let v = g(Point::new(x0 + s * dx, y0 + t * dy));
                let jw = ws * wt * dx * dy;
                for k in 0..3 {
                    acc[k] += jw * v[k];
                }
            }
        }
    }
    Ok(acc)
}

/// `|w grad U|^2 / (|w u| |w e(U)| / h + |w e(U)|^2)` under quadrature of the
/// exact derivatives. The trace condition `u(x, 0) = u(x, a)` is checked at
/// sample points.
pub fn ratio_on_field<U: VectorFunction + ?Sized>(
    field: &U,
    w: &WeightSpec,
    grid: &GradedGrid,
    h: f64,
    order: usize,
) -> Result<FieldRatio> {
    let a = grid.domain().a();
    let gh = grid.domain().h();
    let samples: Vec<f64> = (0..=16).map(|i| gh * i as f64 / 16.0).collect();
    let scale = samples
        .iter()
        .flat_map(|&x| [field.value(Point::new(x, 0.0))[0], field.value(Point::new(x, a))[0]])
        .fold(1e-300_f64, |m, v| m.max(v.abs()));
    for &x in &samples {
        let (b, t) = (field.value(Point::new(x, 0.0))[0], field.value(Point::new(x, a))[0]);
        if (b - t).abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidArgument(format!("u(x, 0) != u(x, a) at x = {x}: {b} vs {t}")));
        }
    }
    let [grad, mass_u, strain] = integrate_cells(grid, order, |p| {
        let w2 = eval_weight(w, p).powi(2);
        let u = field.value(p)[0];
        let j = field.jacobian(p);
        let g2 = j[0][0].powi(2) + j[0][1].powi(2) + j[1][0].powi(2) + j[1][1].powi(2);
        let e12 = 0.5 * (j[0][1] + j[1][0]);
        let e2 = j[0][0].powi(2) + j[1][1].powi(2) + 2.0 * e12 * e12;
        [w2 * g2, w2 * u * u, w2 * e2]
    })?;
    let den = (mass_u.max(0.0) * strain.max(0.0)).sqrt() / h + strain;
    let degenerate = !(den > 0.0 && den.is_finite());
    Ok(FieldRatio { h, grad, mass_u, strain, ratio: if degenerate { 0.0 } else { grad / den }, degenerate })
}

/// Quadrature grid that resolves the support of the Ansatz with at least
/// `cells` cells across it.
pub fn ansatz_grid(field: &ScaledAnsatz, domain: &ThinRectangle, cells: usize) -> Result<GradedGrid> {
    let (lo, hi) = field.support_y();
    let ny = ((cells as f64) * domain.a() / (hi - lo)).ceil() as usize;
    build_grid(domain, 2, ny.max(2), 1.0)
}

/// `ratio_on_field` of the scaled Ansatz at one thickness.
pub fn ansatz_ratio_at(
    h: f64,
    a: f64,
    w: &WeightSpec,
    bump: Bump,
    s: f64,
    variant: AnsatzVariant,
) -> Result<FieldRatio> {
    let domain = ThinRectangle::new(h, a)?;
    let field = ansatz_scaled(bump, s, &domain, variant)?;
    let grid = ansatz_grid(&field, &domain, 256)?;
    ratio_on_field(&field, w, &grid, h, 8)
}

/// `ratio_on_field` of the scaled Ansatz over an h grid.
pub fn ansatz_sweep(
    hs: &[f64],
    a: f64,
    w: &WeightSpec,
    bump: Bump,
    s: f64,
    variant: AnsatzVariant,
) -> Result<SweepReport<FieldRatio>> {
    check_h_list(hs)?;
    let points = hs
        .iter()
        .map(|&h| ansatz_ratio_at(h, a, w, bump, s, variant).map(|r| SweepPoint { h, value: r.ratio, record: r }))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport::new(points))
}
