//! Boundary constraints and deflation, applied by exact index elimination.
//!
//! Fixed DOFs are dropped, tied DOFs are merged into one unknown, and each
//! deflation direction `d` is removed by dropping one pivot coordinate. A
//! deflation direction must lie in the null space of every form it is
//! applied to; the quotient by `span(d)` is then represented by the
//! coordinate complement `{x_p = 0}`, which keeps the reduced matrices sparse
//! and leaves every Rayleigh quotient unchanged.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldKind;
use crate::forms::FormMatrix;
use crate::grid::GradedGrid;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    /// DOFs forced to zero.
    pub fixed: Vec<usize>,
    /// DOF pairs forced to be equal.
    pub tied: Vec<(usize, usize)>,
    /// Directions on which all relevant forms vanish.
    pub deflation: Vec<Vec<f64>>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    fn dofs(grid: &GradedGrid, kind: FieldKind, nodes: &[usize], component: Option<usize>) -> Vec<usize> {
        match (kind, component) {
            (FieldKind::Scalar, _) => nodes.to_vec(),
            (FieldKind::Vector, Some(c)) => nodes.iter().map(|&k| 2 * k + c).collect(),
            (FieldKind::Vector, None) => nodes.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect(),
        }
        .into_iter()
        .filter(|&d| d < kind.dofs_per_node() * grid.num_nodes())
        .collect()
    }

    /// Zero on the lateral edges `y = 0` and `y = a`.
    pub fn lateral_dirichlet(grid: &GradedGrid, kind: FieldKind) -> Self {
        Self { fixed: Self::dofs(grid, kind, &grid.lateral_nodes(), None), ..Self::default() }
    }

    /// Zero on the whole boundary.
    pub fn boundary_dirichlet(grid: &GradedGrid, kind: FieldKind) -> Self {
        let nodes: Vec<usize> = (0..grid.num_nodes()).filter(|&k| grid.is_boundary_node(k)).collect();
        Self { fixed: Self::dofs(grid, kind, &nodes, None), ..Self::default() }
    }

    /// Ties the value at `(x_i, 0)` to the value at `(x_i, a)` for every
    /// column `i`; `component` selects `u` (0) or `v` (1) of a vector field.
    pub fn trace_tie(grid: &GradedGrid, kind: FieldKind, component: usize) -> Self {
        let ny = grid.ny();
        let tied = (0..=grid.nx())
            .map(|i| {
                let (b, t) = (grid.node_index(i, 0), grid.node_index(i, ny));
                match kind {
                    FieldKind::Scalar => (b, t),
                    FieldKind::Vector => (2 * b + component, 2 * t + component),
                }
            })
            .collect();
        Self { tied, ..Self::default() }
    }

    /// The field equal to one in `component` and zero elsewhere.
    pub fn constant_component(grid: &GradedGrid, kind: FieldKind, component: usize) -> Vec<f64> {
        let per = kind.dofs_per_node();
        (0..per * grid.num_nodes()).map(|d| if d % per == component { 1.0 } else { 0.0 }).collect()
    }

    pub fn with_deflation(mut self, d: Vec<f64>) -> Self {
        self.deflation.push(d);
        self
    }

    pub fn merge(mut self, other: ConstraintSet) -> Self {
        self.fixed.extend(other.fixed);
        self.tied.extend(other.tied);
        self.deflation.extend(other.deflation);
        self
    }

    /// Tied pairs must join nodes with equal `x`.
    pub fn validate(&self, grid: &GradedGrid, kind: FieldKind) -> Result<()> {
        let per = kind.dofs_per_node();
        let n = per * grid.num_nodes();
        for &(a, b) in &self.tied {
            if a >= n || b >= n {
                return Err(Error::InvalidConstraints(format!("tied pair ({a}, {b}) outside {n} DOFs")));
            }
            if a % per != b % per {
                return Err(Error::InvalidConstraints(format!("tied pair ({a}, {b}) mixes components")));
            }
            let (pa, pb) = (grid.node(a / per), grid.node(b / per));
            if pa.x != pb.x {
                return Err(Error::InvalidConstraints(format!(
                    "tied nodes at x = {} and x = {} differ in x",
                    pa.x, pb.x
                )));
            }
        }
        Ok(())
    }
}

/// Index map from full DOFs to constrained coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    map: Vec<Option<usize>>,
    reduced_dim: usize,
    deflation: Vec<Vec<f64>>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl Reduction {
    pub fn new(full_dim: usize, c: &ConstraintSet) -> Result<Self> {
        let n = full_dim;
        let mut fixed = vec![false; n];
        for &i in &c.fixed {
            if i >= n {
                return Err(Error::InvalidConstraints(format!("fixed DOF {i} outside {n}")));
            }
            fixed[i] = true;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        for &(a, b) in &c.tied {
            if a >= n || b >= n {
                return Err(Error::InvalidConstraints(format!("tied pair ({a}, {b}) outside {n}")));
            }
            if fixed[a] || fixed[b] {
                return Err(Error::InvalidConstraints(format!("DOF in tied pair ({a}, {b}) is also fixed")));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                let (lo, hi) = (ra.min(rb), ra.max(rb));
                parent[hi] = lo;
            }
        }
        // intermediate coordinates: one per free representative, in index order
        let mut inter = vec![None; n];
        let mut m = 0;
        for i in 0..n {
            if !fixed[i] && find(&mut parent, i) == i {
                inter[i] = Some(m);
                m += 1;
            }
        }
        for i in 0..n {
            if !fixed[i] {
                let r = find(&mut parent, i);
                inter[i] = inter[r];
            }
        }

        // deflation vectors in intermediate coordinates
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(c.deflation.len());
        for d in &c.deflation {
            if d.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: d.len() });
            }
            let scale = d.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            if scale == 0.0 {
                return Err(Error::InvalidConstraints("zero deflation vector".into()));
            }
            let mut r = vec![0.0; m];
            for i in 0..n {
                match inter[i] {
                    None if d[i].abs() > 1e-12 * scale => {
                        return Err(Error::InvalidConstraints(format!("deflation vector is nonzero on fixed DOF {i}")))
                    }
                    None => {}
                    Some(k) => {
                        let rep = find(&mut parent, i);
                        if (d[i] - d[rep]).abs() > 1e-12 * scale {
                            return Err(Error::InvalidConstraints(format!(
                                "deflation vector differs across tied DOFs {rep} and {i}"
                            )));
                        }
                        r[k] = d[i];
                    }
                }
            }
            rows.push(r);
        }

        // Gaussian elimination with full row pivoting to pick one pivot column per vector
        let mut pivots = Vec::with_capacity(rows.len());
        let mut work = rows.clone();
        for k in 0..work.len() {
            let (col, val) =
                work[k]
                    .iter()
                    .enumerate()
                    .fold((0, 0.0_f64), |best, (j, &v)| if v.abs() > best.1.abs() { (j, v) } else { best });
            let scale = rows[k].iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            if val.abs() <= 1e-10 * scale {
                return Err(Error::InvalidConstraints("deflation vectors are linearly dependent".into()));
            }
            pivots.push(col);
            for l in (k + 1)..work.len() {
                let f = work[l][col] / val;
                if f != 0.0 {
                    let pivot_row = work[k].clone();
                    for (x, p) in work[l].iter_mut().zip(&pivot_row) {
                        *x -= f * p;
                    }
                }
            }
        }
        let mut dropped = vec![false; m];
        for &p in &pivots {
            dropped[p] = true;
        }
        let mut final_idx = vec![None; m];
        let mut r = 0;
        for k in 0..m {
            if !dropped[k] {
                final_idx[k] = Some(r);
                r += 1;
            }
        }
        let map = inter.iter().map(|o| o.and_then(|k| final_idx[k])).collect();
        Ok(Self { map, reduced_dim: r, deflation: c.deflation.clone() })
    }

    pub fn full_dim(&self) -> usize {
        self.map.len()
    }

    pub fn reduced_dim(&self) -> usize {
        self.reduced_dim
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn deflation(&self) -> &[Vec<f64>] {
        &self.deflation
    }

    /// Full coefficient vector of a reduced one.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.reduced_dim);
        self.map.iter().map(|o| o.map_or(0.0, |k| x[k])).collect()
    }

    /// Reduced coordinates of a full vector that already satisfies the
    /// fixed and tied constraints (deflation components are discarded).
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.map.len());
        let mut x = vec![0.0; self.reduced_dim];
        for (i, o) in self.map.iter().enumerate() {
            if let Some(k) = o {
                x[*k] = full[i];
            }
        }
        x
    }
}

/// Applies constraints to a form; the result acts on reduced coordinates.
pub fn apply_constraints(q: &FormMatrix, c: &ConstraintSet) -> Result<FormMatrix> {
    c.validate(&q.grid, q.kind)?;
    let red = Arc::new(Reduction::new(q.dim(), c)?);
    apply_reduction(q, &red)
}

/// Applies an existing reduction, checking that its deflation directions
/// are null directions of `q`.
pub fn apply_reduction(q: &FormMatrix, red: &Arc<Reduction>) -> Result<FormMatrix> {
    if q.reduction.is_some() {
        return Err(Error::InvalidConstraints("form is already reduced".into()));
    }
    let norm = q.matrix.norm_inf();
    for d in red.deflation() {
        let qd = q.matrix.mul_vec(d);
        let dmax = d.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        let res = qd.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
        if res > 1e-10 * norm * dmax {
            return Err(Error::InvalidConstraints(format!(
                "deflation direction is not in the null space of {:?} (|Qd| = {res:e})",
                q.label
            )));
        }
    }
    Ok(FormMatrix {
        matrix: q.matrix.reduce(red.map(), red.reduced_dim())?,
        reduction: Some(Arc::clone(red)),
        ..q.clone()
    })
}
