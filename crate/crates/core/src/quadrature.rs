//! Gauss-Legendre rules and tensor quadrature over graded grids.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::GradedGrid;

/// Gauss-Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            // map [-1, 1] -> [0, 1]
            points[i] = 0.5 * (1.0 - z);
            points[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `int_a^b f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let len = b - a;
        self.points.iter().zip(&self.weights).map(|(&t, &w)| w * f(a + len * t)).sum::<f64>() * len
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

/// Quadrature orders accepted for grid integrals.
pub const MIN_ORDER: usize = 1;
pub const MAX_ORDER: usize = 10;

pub(crate) fn check_order(order: usize) -> Result<()> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::InvalidArgument(format!("quadrature order {order} outside {MIN_ORDER}..={MAX_ORDER}")));
    }
    Ok(())
}

/// Sum over cells of the tensor Gauss rule of `callback`.
pub fn quadrature_integral<F: Fn(Point) -> f64>(callback: F, grid: &GradedGrid, order: usize) -> Result<f64> {
    check_order(order)?;
    let rule = GaussRule::new(order);
    let mut total = 0.0;
    for cell in grid.cells() {
        let (x0, x1, y0, y1) = grid.cell_bounds(cell);
        let (dx, dy) = (x1 - x0, y1 - y0);
        let mut acc = 0.0;
        for (&ty, &wy) in rule.points.iter().zip(&rule.weights) {
            let y = y0 + dy * ty;
            for (&tx, &wx) in rule.points.iter().zip(&rule.weights) {
                acc += wx * wy * callback(Point::new(x0 + dx * tx, y));
            }
        }
        total += acc * dx * dy;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ThinRectangle;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for n in 1..=12 {
            let rule = GaussRule::new(n);
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let got = rule.integrate(0.0, 1.0, |t| t.powi(deg as i32));
                assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn grid_quadrature_examples() {
        let d = ThinRectangle::new(0.3, 1.0).unwrap();
        let g = GradedGrid::new(&d, 4, 6, 2.0).unwrap();
        let area = quadrature_integral(|_| 1.0, &g, 2).unwrap();
        assert!((area - 0.3).abs() < 1e-14);

        let unit = GradedGrid::new(&ThinRectangle::new(1.0, 1.0).unwrap(), 3, 3, 1.0).unwrap();
        for order in 1..=10 {
            let v = quadrature_integral(|p| p.y, &unit, order).unwrap();
            assert!((v - 0.5).abs() < 1e-14);
        }
        assert!(quadrature_integral(|_| 1.0, &unit, 0).is_err());
        assert!(quadrature_integral(|_| 1.0, &unit, 11).is_err());
    }

    #[test]
    fn graded_grid_resolves_inverse_square_root() {
        let d = ThinRectangle::new(1.0, 1.0).unwrap();
        let mut last_err = f64::INFINITY;
        for ny in [8, 16, 32, 64, 128] {
            let g = GradedGrid::new(&d, 1, ny, 3.0).unwrap();
            let v = quadrature_integral(|p| p.y.powf(-0.5), &g, 4).unwrap();
            let err = (v - 2.0).abs();
            // the first cell dominates: err ~ ny^{-3/2}
            assert!(err * 2.5 < last_err, "{err} after {last_err}");
            last_err = err;
        }
        assert!(last_err < 2e-4, "{last_err}");
    }
}
