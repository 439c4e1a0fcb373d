//! Weighted quadratic forms over bilinear elements.
//!
//! Every form is `f^T Q f ~ int rho(p) B(f)(p) dp` for a pointwise density
//! `rho` (the squared weight, possibly times powers of the distance to the
//! bottom edge) and a quadratic expression `B` in the field and its first
//! derivatives. Element integrals use tensor Gauss rules; `w^2` is the
//! integrand, so exponents `2 alpha < 1` stay integrable on graded grids.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::Reduction;
use crate::error::{Error, Result};
use crate::field::FieldKind;
use crate::geometry::{eval_weight, EllipticitySpec, Point, WeightSpec};
use crate::grid::{Cell, GradedGrid};
use crate::quadrature::{check_order, GaussRule};
use crate::sparse::CsrMatrix;

pub const DEFAULT_ORDER: usize = 4;

/// Which integral a [`FormMatrix`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormLabel {
    /// `int w^2 grad f . A grad f`
    GradA,
    /// `int w^2 |grad f|^2`
    Grad,
    /// `int w^2 f^2`
    Mass,
    /// `int w^2 f_x^2`
    DxSquared,
    /// `int w^2 y^2 |grad f|^2`
    DistGrad,
    /// `int w^2 y^4 r^2` for a nodal residual `r`
    Dist4Mass,
    /// `int |grad f|^2`-type stiffness `int grad f . A grad f`, unweighted
    Operator,
    /// `int w^2 |grad U|^2`
    VecGrad,
    /// `int w^2 |e(U)|^2` with `|e|^2 = e11^2 + 2 e12^2 + e22^2`
    VecStrain,
    /// `int w^2 u^2`, first component only
    VecMassU,
}

/// An assembled symmetric form together with its provenance.
#[derive(Debug, Clone)]
pub struct FormMatrix {
    pub label: FormLabel,
    pub kind: FieldKind,
    pub matrix: CsrMatrix,
    pub grid: Arc<GradedGrid>,
    pub weight: WeightSpec,
    /// Set when `matrix` acts on constrained coordinates.
    pub reduction: Option<Arc<Reduction>>,
}

impl FormMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `f^T Q f`.
    pub fn eval(&self, f: &[f64]) -> f64 {
        self.matrix.quad_form(f)
    }

    /// `|Q - Q^T|_max <= 1e-14 |Q|_max`.
    pub fn is_symmetric(&self) -> bool {
        self.matrix.symmetry_defect() <= 1e-14 * self.matrix.max_abs()
    }

    /// Smallest `v^T Q v / (|v|^2 |Q|)` over `samples` seeded random vectors;
    /// positive semidefinite forms give values above `-1e-12`.
    pub fn psd_margin(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let norm = self.matrix.norm_inf().max(f64::MIN_POSITIVE);
        (0..samples)
            .map(|_| {
                let v: Vec<f64> = (0..self.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let vv: f64 = v.iter().map(|x| x * x).sum();
                self.eval(&v) / (vv * norm)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Cell matrices `int rho N_a N_b` and `int rho dN_a/dx_i dN_b/dx_j`.
#[derive(Debug, Clone, Copy, Default)]
struct LocalMats {
    mass: [[f64; 4]; 4],
    kxx: [[f64; 4]; 4],
    kyy: [[f64; 4]; 4],
    /// `kxy[a][b] = int rho dN_a/dx dN_b/dy`
    kxy: [[f64; 4]; 4],
}

// Reference nodes counter-clockwise from (0, 0).
const REF: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];

#[inline]
fn shape(s: f64, t: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let mut n = [0.0; 4];
    let mut ds = [0.0; 4];
    let mut dt = [0.0; 4];
    for (a, &(sa, ta)) in REF.iter().enumerate() {
        let fs = if sa == 0.0 { 1.0 - s } else { s };
        let ft = if ta == 0.0 { 1.0 - t } else { t };
        let gs = if sa == 0.0 { -1.0 } else { 1.0 };
        let gt = if ta == 0.0 { -1.0 } else { 1.0 };
        n[a] = fs * ft;
        ds[a] = gs * ft;
        dt[a] = fs * gt;
    }
    (n, ds, dt)
}

fn local_mats<D: Fn(Point) -> f64>(grid: &GradedGrid, cell: Cell, rule: &GaussRule, density: &D) -> LocalMats {
    let (x0, x1, y0, y1) = grid.cell_bounds(cell);
    let (dx, dy) = (x1 - x0, y1 - y0);
    let mut m = LocalMats::default();
    for (&t, &wt) in rule.points.iter().zip(&rule.weights) {
        for (&s, &ws) in rule.points.iter().zip(&rule.weights) {
            let rho = density(Point::new(x0 + s * dx, y0 + t * dy)) * ws * wt * dx * dy;
            let (n, ds, dt) = shape(s, t);
            for a in 0..4 {
                let (gxa, gya) = (ds[a] / dx, dt[a] / dy);
                for b in 0..4 {
                    let (gxb, gyb) = (ds[b] / dx, dt[b] / dy);
                    m.mass[a][b] += rho * n[a] * n[b];
                    m.kxx[a][b] += rho * gxa * gxb;
                    m.kyy[a][b] += rho * gya * gyb;
                    m.kxy[a][b] += rho * gxa * gyb;
                }
            }
        }
    }
    m
}

/// Cell matrices for every cell, computed in parallel and returned in cell order.
fn all_local<D: Fn(Point) -> f64 + Sync>(grid: &GradedGrid, order: usize, density: D) -> Vec<(Cell, LocalMats)> {
    let rule = GaussRule::new(order);
    let cells: Vec<Cell> = grid.cells().collect();
    cells.into_par_iter().map(|c| (c, local_mats(grid, c, &rule, &density))).collect()
}

fn scatter_scalar<F>(grid: &GradedGrid, locals: &[(Cell, LocalMats)], mut entry: F) -> CsrMatrix
where
    F: FnMut(&LocalMats, usize, usize) -> f64,
{
    let mut t = Vec::with_capacity(16 * locals.len());
    for (c, lm) in locals {
        let nodes = grid.cell_nodes(*c);
        for a in 0..4 {
            for b in 0..4 {
                t.push((nodes[a], nodes[b], entry(lm, a, b)));
            }
        }
    }
    CsrMatrix::from_triplets(grid.num_nodes(), t)
}

/// `entry(lm, a, ca, b, cb)` gives the coupling between component `ca` of
/// local node `a` and component `cb` of local node `b` (0 = u, 1 = v).
fn scatter_vector<F>(grid: &GradedGrid, locals: &[(Cell, LocalMats)], mut entry: F) -> CsrMatrix
where
    F: FnMut(&LocalMats, usize, usize, usize, usize) -> f64,
{
    let mut t = Vec::with_capacity(64 * locals.len());
    for (c, lm) in locals {
        let nodes = grid.cell_nodes(*c);
        for a in 0..4 {
            for ca in 0..2 {
                for b in 0..4 {
                    for cb in 0..2 {
                        let v = entry(lm, a, ca, b, cb);
                        if v != 0.0 || ca == cb {
                            t.push((2 * nodes[a] + ca, 2 * nodes[b] + cb, v));
                        }
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(2 * grid.num_nodes(), t)
}

/// The scalar forms used by the gradient-separation and weighted
/// Caccioppoli-type diagnostics.
#[derive(Debug, Clone)]
pub struct ScalarForms {
    pub grad_a: FormMatrix,
    pub grad: FormMatrix,
    pub mass: FormMatrix,
    pub dx: FormMatrix,
    pub dist_grad: FormMatrix,
    /// Apply to the nodal interpolant of an `L u` residual.
    pub dist4_mass: FormMatrix,
}

/// The vector forms used by the Korn interpolation constant.
#[derive(Debug, Clone)]
pub struct VectorForms {
    pub grad: FormMatrix,
    pub strain: FormMatrix,
    pub mass_u: FormMatrix,
}

fn wrap(label: FormLabel, kind: FieldKind, matrix: CsrMatrix, grid: &Arc<GradedGrid>, w: &WeightSpec) -> FormMatrix {
    FormMatrix { label, kind, matrix, grid: Arc::clone(grid), weight: w.clone(), reduction: None }
}

pub fn assemble_scalar_forms(
    grid: &Arc<GradedGrid>,
    w: &WeightSpec,
    a: &EllipticitySpec,
    order: usize,
) -> Result<ScalarForms> {
    check_order(order)?;
    let w2 = |p: Point| eval_weight(w, p).powi(2);
    let base = all_local(grid, order, w2);
    let dist = all_local(grid, order, |p: Point| w2(p) * p.y * p.y);
    let dist4 = all_local(grid, order, |p: Point| w2(p) * p.y.powi(4));
    let ae = a.entries();
    let g = grid.as_ref();
    let s = FieldKind::Scalar;
    Ok(ScalarForms {
        grad_a: wrap(
            FormLabel::GradA,
            s,
            scatter_scalar(g, &base, |m, i, j| {
                ae[0][0] * m.kxx[i][j] + ae[0][1] * m.kxy[i][j] + ae[1][0] * m.kxy[j][i] + ae[1][1] * m.kyy[i][j]
            }),
            grid,
            w,
        ),
        grad: wrap(FormLabel::Grad, s, scatter_scalar(g, &base, |m, i, j| m.kxx[i][j] + m.kyy[i][j]), grid, w),
        mass: wrap(FormLabel::Mass, s, scatter_scalar(g, &base, |m, i, j| m.mass[i][j]), grid, w),
        dx: wrap(FormLabel::DxSquared, s, scatter_scalar(g, &base, |m, i, j| m.kxx[i][j]), grid, w),
        dist_grad: wrap(FormLabel::DistGrad, s, scatter_scalar(g, &dist, |m, i, j| m.kxx[i][j] + m.kyy[i][j]), grid, w),
        dist4_mass: wrap(FormLabel::Dist4Mass, s, scatter_scalar(g, &dist4, |m, i, j| m.mass[i][j]), grid, w),
    })
}

/// Unweighted `int grad f . A grad f`, the stiffness of `L u = div(A grad u)`.
pub fn assemble_operator(grid: &Arc<GradedGrid>, a: &EllipticitySpec, order: usize) -> Result<FormMatrix> {
    check_order(order)?;
    let base = all_local(grid, order, |_| 1.0);
    let ae = a.entries();
    let m = scatter_scalar(grid, &base, |m, i, j| {
        ae[0][0] * m.kxx[i][j] + ae[0][1] * m.kxy[i][j] + ae[1][0] * m.kxy[j][i] + ae[1][1] * m.kyy[i][j]
    });
    Ok(wrap(FormLabel::Operator, FieldKind::Scalar, m, grid, &WeightSpec::unit()))
}

pub fn assemble_vector_forms(grid: &Arc<GradedGrid>, w: &WeightSpec, order: usize) -> Result<VectorForms> {
    check_order(order)?;
    let base = all_local(grid, order, |p: Point| eval_weight(w, p).powi(2));
    let g = grid.as_ref();
    let v = FieldKind::Vector;
    let grad = scatter_vector(g, &base, |m, a, ca, b, cb| if ca == cb { m.kxx[a][b] + m.kyy[a][b] } else { 0.0 });
    // |e|^2 = u_x^2 + v_y^2 + (u_y + v_x)^2 / 2
    let strain = scatter_vector(g, &base, |m, a, ca, b, cb| match (ca, cb) {
        (0, 0) => m.kxx[a][b] + 0.5 * m.kyy[a][b],
        (1, 1) => m.kyy[a][b] + 0.5 * m.kxx[a][b],
        // u_y(a) v_x(b)
        (0, 1) => 0.5 * m.kxy[b][a],
        _ => 0.5 * m.kxy[a][b],
    });
    let mass_u = scatter_vector(g, &base, |m, a, ca, b, cb| if ca == 0 && cb == 0 { m.mass[a][b] } else { 0.0 });
    Ok(VectorForms {
        grad: wrap(FormLabel::VecGrad, v, grad, grid, w),
        strain: wrap(FormLabel::VecStrain, v, strain, grid, w),
        mass_u: wrap(FormLabel::VecMassU, v, mass_u, grid, w),
    })
}

impl ScalarForms {
    pub fn all(&self) -> [&FormMatrix; 6] {
        [&self.grad_a, &self.grad, &self.mass, &self.dx, &self.dist_grad, &self.dist4_mass]
    }
}

impl VectorForms {
    pub fn all(&self) -> [&FormMatrix; 3] {
        [&self.grad, &self.strain, &self.mass_u]
    }
}

/// Checks a vector of form values for consistency with a field length.
pub(crate) fn check_len(form: &FormMatrix, f: &[f64]) -> Result<()> {
    if f.len() != form.dim() {
        return Err(Error::DimensionMismatch { expected: form.dim(), got: f.len() });
    }
    Ok(())
}
