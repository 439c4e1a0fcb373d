//! Nodal fields over bilinear elements and analytic field evaluators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::GradedGrid;

/// Scalar field with one coefficient per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField(pub Vec<f64>);

/// Vector field `U = (u, v)` stored interleaved: `[u_0, v_0, u_1, v_1, ...]`.
/// `u` is the component along the thin direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField(pub Vec<f64>);

impl ScalarField {
    pub fn zeros(grid: &GradedGrid) -> Self {
        Self(vec![0.0; grid.num_nodes()])
    }

    pub fn check(&self, grid: &GradedGrid) -> Result<()> {
        if self.0.len() != grid.num_nodes() {
            return Err(Error::DimensionMismatch { expected: grid.num_nodes(), got: self.0.len() });
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl VectorField {
    pub fn zeros(grid: &GradedGrid) -> Self {
        Self(vec![0.0; 2 * grid.num_nodes()])
    }

    pub fn check(&self, grid: &GradedGrid) -> Result<()> {
        if self.0.len() != 2 * grid.num_nodes() {
            return Err(Error::DimensionMismatch { expected: 2 * grid.num_nodes(), got: self.0.len() });
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn u(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().step_by(2).copied()
    }

    pub fn v(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().skip(1).step_by(2).copied()
    }
}

/// Whether a coefficient vector carries one or two values per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Scalar,
    Vector,
}

impl FieldKind {
    pub fn dofs_per_node(self) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => 2,
        }
    }
}

/// Analytic scalar field with exact first derivatives.
pub trait ScalarFunction: Sync {
    fn value(&self, p: Point) -> f64;
    fn gradient(&self, p: Point) -> [f64; 2];
}

/// Scalar field that also provides its Hessian, so `div(A grad u)` is exact.
pub trait SmoothScalarFunction: ScalarFunction {
    fn hessian(&self, p: Point) -> [[f64; 2]; 2];
}

/// Analytic vector field `U = (u, v)`; `jacobian[i][j] = d U_i / d x_j`.
pub trait VectorFunction: Sync {
    fn value(&self, p: Point) -> [f64; 2];
    fn jacobian(&self, p: Point) -> [[f64; 2]; 2];
}

/// Scalar function assembled from closures.
pub struct FnScalar<V, G> {
    pub value: V,
    pub gradient: G,
}

impl<V, G> ScalarFunction for FnScalar<V, G>
where
    V: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> [f64; 2] + Sync,
{
    fn value(&self, p: Point) -> f64 {
        (self.value)(p)
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        (self.gradient)(p)
    }
}

/// Vector function assembled from closures.
pub struct FnVector<V, J> {
    pub value: V,
    pub jacobian: J,
}

impl<V, J> VectorFunction for FnVector<V, J>
where
    V: Fn(Point) -> [f64; 2] + Sync,
    J: Fn(Point) -> [[f64; 2]; 2] + Sync,
{
    fn value(&self, p: Point) -> [f64; 2] {
        (self.value)(p)
    }
    fn jacobian(&self, p: Point) -> [[f64; 2]; 2] {
        (self.jacobian)(p)
    }
}

/// Nodal interpolant of a scalar evaluator.
pub fn interpolate_scalar<F: Fn(Point) -> f64>(expr: F, grid: &GradedGrid) -> ScalarField {
    ScalarField(grid.nodes().map(expr).collect())
}

/// Nodal interpolant of a vector evaluator.
pub fn interpolate_vector<F: Fn(Point) -> [f64; 2]>(expr: F, grid: &GradedGrid) -> VectorField {
    VectorField(grid.nodes().flat_map(|p| expr(p)).collect())
}
