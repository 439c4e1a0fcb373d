//! Korn interpolation constant `K(h)` on the thin rectangle.
//!
//! Fields are vector `Q1` fields whose horizontal component has equal traces
//! on `y = 0` and `y = a`; the constant vertical translation, the only
//! rigid motion left with zero `|w u|`, is deflated.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::fit::{sweep, SweepReport};
use super::separation::MeshParams;
use crate::constraints::{apply_reduction, ConstraintSet, Reduction};
use crate::error::Result;
use crate::field::FieldKind;
use crate::forms::{assemble_vector_forms, FormMatrix};
use crate::geometry::{ThinRectangle, WeightSpec};
use crate::grid::build_grid;
use crate::solvers::{scalarized_sup, ScalarizedOptions, ScalarizedResult};

/// Constrained `(grad, mass_u, strain)` forms sharing one reduction.
pub fn interpolation_forms(h: f64, a: f64, w: &WeightSpec, mesh: &MeshParams) -> Result<[FormMatrix; 3]> {
    let grid = Arc::new(build_grid(&ThinRectangle::new(h, a)?, mesh.nx, mesh.ny, mesh.q)?);
    let vf = assemble_vector_forms(&grid, w, mesh.order)?;
    let c = ConstraintSet::trace_tie(&grid, FieldKind::Vector, 0).with_deflation(ConstraintSet::constant_component(
        &grid,
        FieldKind::Vector,
        1,
    ));
    c.validate(&grid, FieldKind::Vector)?;
    let red = Arc::new(Reduction::new(vf.grad.dim(), &c)?);
    Ok([apply_reduction(&vf.grad, &red)?, apply_reduction(&vf.mass_u, &red)?, apply_reduction(&vf.strain, &red)?])
}

pub fn interpolation_constant(
    h: f64,
    a: f64,
    w: &WeightSpec,
    mesh: &MeshParams,
    opts: &ScalarizedOptions,
) -> Result<ScalarizedResult> {
    let [g, p, e] = interpolation_forms(h, a, w, mesh)?;
    scalarized_sup(&g, &p, &e, h, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRecord {
    pub k: f64,
    pub mu_star: f64,
    pub field_ratio: f64,
    /// Number of `mu` values evaluated.
    pub evaluations: usize,
    pub eig_residual: f64,
}

impl From<&ScalarizedResult> for InterpolationRecord {
    fn from(r: &ScalarizedResult) -> Self {
        Self {
            k: r.k,
            mu_star: r.mu_star,
            field_ratio: r.field_ratio,
            evaluations: r.history.len(),
            eig_residual: r.eig_residual,
        }
    }
}

/// `K(h)` at every `h` with the fitted power law.
pub fn interpolation_sweep(
    hs: &[f64],
    a: f64,
    w: &WeightSpec,
    mesh: &MeshParams,
    opts: &ScalarizedOptions,
) -> Result<SweepReport<InterpolationRecord>> {
    sweep(hs, |h| {
        let r = interpolation_constant(h, a, w, mesh, opts)?;
        Ok((r.k, InterpolationRecord::from(&r)))
    })
}
