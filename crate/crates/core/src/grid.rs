//! Tensor-product grids graded towards the bottom edge.
//!
//! Nodes are `x_i = h i / nx` and `y_j = a (j / ny)^q`. Node `(i, j)` has
//! index `j (nx + 1) + i`; cell `(i, j)` spans `[x_i, x_{i+1}] x [y_j, y_{j+1}]`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{Point, ThinRectangle};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedGrid {
    domain: ThinRectangle,
    grading: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GradedGrid {
    pub fn new(domain: &ThinRectangle, nx: usize, ny: usize, grading: f64) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(Error::InvalidGrid(format!("cell counts must be positive (nx = {nx}, ny = {ny})")));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(Error::InvalidGrid(format!("grading exponent q = {grading} must be >= 1")));
        }
        let (h, a) = (domain.h(), domain.a());
        let mut xs: Vec<f64> = (0..=nx).map(|i| h * i as f64 / nx as f64).collect();
        let mut ys: Vec<f64> = (0..=ny)
            .map(|j| {
                let t = j as f64 / ny as f64;
                if grading == 1.0 {
                    a * t
                } else {
                    a * t.powf(grading)
                }
            })
            .collect();
        xs[nx] = h;
        ys[ny] = a;
        if ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!("grading q = {grading} with ny = {ny} collapses nodes near y = 0")));
        }
        Ok(Self { domain: *domain, grading, xs, ys })
    }

    pub fn domain(&self) -> &ThinRectangle {
        &self.domain
    }

    pub fn nx(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn ny(&self) -> usize {
        self.ys.len() - 1
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn num_nodes(&self) -> usize {
        self.xs.len() * self.ys.len()
    }

    pub fn num_cells(&self) -> usize {
        self.nx() * self.ny()
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * self.xs.len() + i
    }

    #[inline]
    pub fn node_ij(&self, k: usize) -> (usize, usize) {
        (k % self.xs.len(), k / self.xs.len())
    }

    #[inline]
    pub fn node(&self, k: usize) -> Point {
        let (i, j) = self.node_ij(k);
        Point::new(self.xs[i], self.ys[j])
    }

    pub fn nodes(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.num_nodes()).map(move |k| self.node(k))
    }

    /// Cells in row-major order (fixed, so assembly is reproducible).
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let nx = self.nx();
        (0..self.ny()).flat_map(move |j| (0..nx).map(move |i| Cell { i, j }))
    }

    /// `(x0, x1, y0, y1)`.
    #[inline]
    pub fn cell_bounds(&self, c: Cell) -> (f64, f64, f64, f64) {
        (self.xs[c.i], self.xs[c.i + 1], self.ys[c.j], self.ys[c.j + 1])
    }

    /// Node indices counter-clockwise from the bottom-left corner.
    #[inline]
    pub fn cell_nodes(&self, c: Cell) -> [usize; 4] {
        [
            self.node_index(c.i, c.j),
            self.node_index(c.i + 1, c.j),
            self.node_index(c.i + 1, c.j + 1),
            self.node_index(c.i, c.j + 1),
        ]
    }

    pub fn cell_area(&self, c: Cell) -> f64 {
        let (x0, x1, y0, y1) = self.cell_bounds(c);
        (x1 - x0) * (y1 - y0)
    }

    pub fn is_boundary_node(&self, k: usize) -> bool {
        let (i, j) = self.node_ij(k);
        i == 0 || j == 0 || i == self.nx() || j == self.ny()
    }

    /// Nodes on the edges `y = 0` and `y = a`.
    pub fn lateral_nodes(&self) -> Vec<usize> {
        let ny = self.ny();
        let mut v: Vec<usize> = (0..=self.nx()).map(|i| self.node_index(i, 0)).collect();
        v.extend((0..=self.nx()).map(|i| self.node_index(i, ny)));
        v
    }

    /// Writes `x,y,value` rows for a nodal field.
    pub fn write_csv<W: Write>(&self, values: &[f64], mut out: W) -> Result<()> {
        if values.len() != self.num_nodes() {
            return Err(Error::DimensionMismatch { expected: self.num_nodes(), got: values.len() });
        }
        writeln!(out, "x,y,value")?;
        for (p, v) in self.nodes().zip(values) {
            writeln!(out, "{},{},{}", p.x, p.y, v)?;
        }
        Ok(())
    }
}

/// Builds the grid, rejecting fewer than two cells per direction.
pub fn build_grid(domain: &ThinRectangle, nx: usize, ny: usize, grading: f64) -> Result<GradedGrid> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidGrid(format!("need nx, ny >= 2 (got {nx}, {ny})")));
    }
    GradedGrid::new(domain, nx, ny, grading)
}
