//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use kornlab_core::constraints::{apply_reduction, ConstraintSet, Reduction};
use kornlab_core::field::FieldKind;
use kornlab_core::forms::{assemble_vector_forms, FormMatrix};
use kornlab_core::geometry::{ThinRectangle, WeightSpec};
use kornlab_core::grid::{build_grid, GradedGrid};

pub fn grid(h: f64, nx: usize, ny: usize, q: f64) -> Arc<GradedGrid> {
    Arc::new(build_grid(&ThinRectangle::new(h, 1.0).expect("valid domain"), nx, ny, q).expect("valid grid"))
}

/// Constrained `(grad, mass_u, strain)` forms of the interpolation problem.
pub fn interpolation_forms(h: f64, nx: usize, ny: usize) -> [FormMatrix; 3] {
    let g = grid(h, nx, ny, 1.0);
    let vf = assemble_vector_forms(&g, &WeightSpec::power(0.25), 4).expect("assembly");
    let c = ConstraintSet::trace_tie(&g, FieldKind::Vector, 0).with_deflation(ConstraintSet::constant_component(
        &g,
        FieldKind::Vector,
        1,
    ));
    let red = Arc::new(Reduction::new(vf.grad.dim(), &c).expect("reduction"));
    [&vf.grad, &vf.mass_u, &vf.strain].map(|f| apply_reduction(f, &red).expect("reduced form"))
}
