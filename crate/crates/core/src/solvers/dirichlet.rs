//! Discrete solutions of `div(A grad u) = 0` with data on the thin faces.

use std::sync::Arc;

use super::cholesky::solve_csr;
use crate::constraints::{ConstraintSet, Reduction};
use crate::error::Result;
use crate::field::ScalarField;
use crate::forms::{assemble_operator, DEFAULT_ORDER};
use crate::geometry::{EllipticitySpec, Point};
use crate::grid::GradedGrid;

/// Solves with `u = data` on `x = 0` and `x = h` and `u = 0` on `y = 0` and
/// `y = a` (the zero condition wins at the corners).
pub fn solve_dirichlet<D: Fn(Point) -> f64>(
    a: &EllipticitySpec,
    grid: &Arc<GradedGrid>,
    data: D,
) -> Result<ScalarField> {
    let op = assemble_operator(grid, a, DEFAULT_ORDER)?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut g = vec![0.0; grid.num_nodes()];
    for (k, gk) in g.iter_mut().enumerate() {
        let (i, j) = grid.node_ij(k);
        if j != 0 && j != ny && (i == 0 || i == nx) {
            *gk = data(grid.node(k));
        }
    }
    let boundary: Vec<usize> = (0..grid.num_nodes()).filter(|&k| grid.is_boundary_node(k)).collect();
    let red = Reduction::new(grid.num_nodes(), &ConstraintSet { fixed: boundary, ..Default::default() })?;
    if red.reduced_dim() == 0 {
        return Ok(ScalarField(g));
    }
    let kg = op.matrix.mul_vec(&g);
    let rhs: Vec<f64> = red.restrict(&kg).into_iter().map(|v| -v).collect();
    let kii = op.matrix.reduce(red.map(), red.reduced_dim())?;
    let ui = solve_csr(&kii, &rhs, 1e-10)?;
    let mut u = red.expand(&ui);
    for (uk, gk) in u.iter_mut().zip(&g) {
        *uk += gk;
    }
    Ok(ScalarField(u))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::field::interpolate_scalar;
    use crate::forms::assemble_scalar_forms;
    use crate::geometry::{ThinRectangle, WeightSpec};
    use crate::grid::build_grid;

    fn exact(h: f64, a: f64) -> impl Fn(Point) -> f64 {
        move |p: Point| (PI * (p.x - h / 2.0) / a).cosh() * (PI * p.y / a).sin()
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = Arc::new(build_grid(&ThinRectangle::new(0.3, 1.0).unwrap(), 4, 8, 2.0).unwrap());
        let u = solve_dirichlet(&EllipticitySpec::identity(), &g, |_| 0.0).unwrap();
        assert!(u.0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn harmonic_data_converges_at_second_order_in_energy() {
        let (h, a) = (0.5, 1.0);
        let d = ThinRectangle::new(h, a).unwrap();
        let mut errs = Vec::new();
        for n in [4, 8, 16, 32] {
            let g = Arc::new(build_grid(&d, n, 2 * n, 1.0).unwrap());
            let u = solve_dirichlet(&EllipticitySpec::identity(), &g, exact(h, a)).unwrap();
            let ui = interpolate_scalar(exact(h, a), &g);
            let f = assemble_scalar_forms(&g, &WeightSpec::unit(), &EllipticitySpec::identity(), 4).unwrap();
            let e: Vec<f64> = u.0.iter().zip(&ui.0).map(|(p, q)| p - q).collect();
            errs.push(f.grad.eval(&e));
        }
        // the squared energy error against the interpolant drops by about 4x per doubling
        for w in errs.windows(2) {
            let rate = w[0] / w[1];
            assert!(rate > 3.0, "{errs:?}");
        }
    }

    #[test]
    fn scaled_operator_gives_the_same_solution() {
        let g = Arc::new(build_grid(&ThinRectangle::new(0.2, 1.0).unwrap(), 6, 12, 3.0).unwrap());
        let u1 = solve_dirichlet(&EllipticitySpec::identity(), &g, exact(0.2, 1.0)).unwrap();
        let two = EllipticitySpec::new([[2.0, 0.0], [0.0, 2.0]]).unwrap();
        let u2 = solve_dirichlet(&two, &g, exact(0.2, 1.0)).unwrap();
        for (p, q) in u1.0.iter().zip(&u2.0) {
            assert!((p - q).abs() < 1e-12);
        }
    }
}
