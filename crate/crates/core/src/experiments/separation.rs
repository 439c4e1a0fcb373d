//! Gradient separation for solutions of `div(A grad u) = 0`.
//!
//! `rho = |w grad u|^2 / (|w u| |w u_x| / h + |w u_x|^2)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{check_h_list, SweepPoint, SweepReport};
use crate::error::{Error, Result};
use crate::field::{ScalarField, ScalarFunction, SmoothScalarFunction};
use crate::forms::{assemble_scalar_forms, ScalarForms};
use crate::geometry::{beta_condition, max_admissible_beta, EllipticitySpec, Point, ThinRectangle, WeightSpec};
use crate::grid::{build_grid, GradedGrid};
use crate::solvers::solve_dirichlet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRecord {
    pub h: f64,
    /// `|w grad u|^2`
    pub grad: f64,
    /// `|w u|^2`
    pub mass: f64,
    /// `|w u_x|^2`
    pub dx: f64,
    /// Zero when the record is degenerate.
    pub ratio: f64,
    pub degenerate: bool,
}

impl SeparationRecord {
    pub fn from_norms(h: f64, grad: f64, mass: f64, dx: f64) -> Self {
        let (grad, mass, dx) = (grad.max(0.0), mass.max(0.0), dx.max(0.0));
        let den = (mass * dx).sqrt() / h + dx;
        let degenerate = !(den > 0.0 && den.is_finite());
        let ratio = if degenerate { 0.0 } else { grad / den };
        Self { h, grad, mass, dx, ratio, degenerate }
    }
}

/// Record from already assembled forms.
pub fn separation_from_forms(u: &ScalarField, forms: &ScalarForms, h: f64) -> Result<SeparationRecord> {
    crate::forms::check_len(&forms.grad, &u.0)?;
    Ok(SeparationRecord::from_norms(h, forms.grad.eval(&u.0), forms.mass.eval(&u.0), forms.dx.eval(&u.0)))
}

pub fn separation_ratio(u: &ScalarField, w: &WeightSpec, grid: &Arc<GradedGrid>, h: f64) -> Result<SeparationRecord> {
    let forms = assemble_scalar_forms(grid, w, &EllipticitySpec::identity(), crate::forms::DEFAULT_ORDER)?;
    separation_from_forms(u, &forms, h)
}

/// `cosh(pi (x - h/2) / L) sin(pi (y - lo) / L)` with `L = hi - lo`: harmonic,
/// zero on `y = lo` and `y = hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoshSin {
    pub h: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn ansatz_cosh_sin(domain: &ThinRectangle, cross_section: (f64, f64)) -> Result<CoshSin> {
    let (lo, hi) = cross_section;
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("cross-section ({lo}, {hi}) is empty")));
    }
    Ok(CoshSin { h: domain.h(), lo, hi })
}

impl CoshSin {
    fn k(&self) -> f64 {
        PI / (self.hi - self.lo)
    }
}

impl ScalarFunction for CoshSin {
    fn value(&self, p: Point) -> f64 {
        let k = self.k();
        (k * (p.x - self.h / 2.0)).cosh() * (k * (p.y - self.lo)).sin()
    }
    fn gradient(&self, p: Point) -> [f64; 2] {
        let k = self.k();
        let (sx, cx) = ((k * (p.x - self.h / 2.0)).sinh(), (k * (p.x - self.h / 2.0)).cosh());
        let (sy, cy) = ((k * (p.y - self.lo)).sin(), (k * (p.y - self.lo)).cos());
        [k * sx * sy, k * cx * cy]
    }
}

impl SmoothScalarFunction for CoshSin {
    fn hessian(&self, p: Point) -> [[f64; 2]; 2] {
        let k = self.k();
        let (sx, cx) = ((k * (p.x - self.h / 2.0)).sinh(), (k * (p.x - self.h / 2.0)).cosh());
        let (sy, cy) = ((k * (p.y - self.lo)).sin(), (k * (p.y - self.lo)).cos());
        let xy = k * k * sx * cy;
        [[k * k * cx * sy, xy], [xy, -k * k * cx * sy]]
    }
}

/// Boundary data on the faces `x = 0` and `x = h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataMode {
    Ansatz,
    /// Sine series in `y` on each face with seeded coefficients.
    RandomModes {
        modes: usize,
        seed: u64,
    },
    Zero,
}

/// Coefficients of the random-modes data, drawn once per sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ModeCoefficients {
    pub fn draw(modes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| (1..=modes).map(|k| rng.random_range(-1.0..1.0) / k as f64).collect();
        let left = draw(&mut rng);
        let right = draw(&mut rng);
        Self { left, right }
    }

    pub fn eval(&self, p: Point, h: f64, a: f64) -> f64 {
        let c = if p.x < h / 2.0 { &self.left } else { &self.right };
        c.iter().enumerate().map(|(k, ck)| ck * ((k + 1) as f64 * PI * p.y / a).sin()).sum()
    }
}

/// Mesh resolution shared by the h-points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshParams {
    pub nx: usize,
    pub ny: usize,
    pub q: f64,
    pub order: usize,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self { nx: 16, ny: 64, q: 3.0, order: crate::forms::DEFAULT_ORDER }
    }
}

/// Accepts the operator/weight pair. On the Laplacian path (which needs `A`
/// to be a multiple of the identity) exponents up to 1/2 are allowed without
/// further checks; otherwise exponents lie in `[0, 1/2)` and the beta
/// condition must hold at the largest one.
pub fn check_operator_weight(a: &EllipticitySpec, w: &WeightSpec, laplacian_path: bool) -> Result<()> {
    if laplacian_path && !a.is_laplacian() {
        return Err(Error::InvalidArgument("the Laplacian path needs A to be a multiple of the identity".into()));
    }
    w.check_exponent_range(laplacian_path)?;
    if laplacian_path {
        return Ok(());
    }
    let beta = w.max_exponent().max(0.0);
    if !beta_condition(a.lambda(), a.big_lambda(), 2, beta)? {
        return Err(Error::BetaConditionViolated {
            beta,
            beta_star: max_admissible_beta(a.lambda(), a.big_lambda(), 2),
        });
    }
    Ok(())
}

/// Solves at one thickness and measures the separation ratio.
pub fn separation_at(
    a: &EllipticitySpec,
    w: &WeightSpec,
    h: f64,
    len: f64,
    mesh: &MeshParams,
    mode: &DataMode,
    coeffs: Option<&ModeCoefficients>,
) -> Result<SeparationRecord> {
    let domain = ThinRectangle::new(h, len)?;
    let grid = Arc::new(build_grid(&domain, mesh.nx, mesh.ny, mesh.q)?);
    let u = match mode {
        DataMode::Ansatz => {
            let f = ansatz_cosh_sin(&domain, (0.0, len))?;
            solve_dirichlet(a, &grid, |p| f.value(p))?
        }
        DataMode::RandomModes { .. } => {
            let c = coeffs.ok_or_else(|| Error::InvalidArgument("random-modes data needs coefficients".into()))?;
            solve_dirichlet(a, &grid, |p| c.eval(p, h, len))?
        }
        DataMode::Zero => ScalarField::zeros(&grid),
    };
    let forms = assemble_scalar_forms(&grid, w, a, mesh.order)?;
    separation_from_forms(&u, &forms, h)
}

/// Separation ratio over an h grid with a power-law fit of `rho(h)`.
pub fn run_separation_experiment(
    a: &EllipticitySpec,
    w: &WeightSpec,
    hs: &[f64],
    len: f64,
    mesh: &MeshParams,
    mode: &DataMode,
    laplacian_path: bool,
) -> Result<SweepReport<SeparationRecord>> {
    check_operator_weight(a, w, laplacian_path)?;
    check_h_list(hs)?;
    let coeffs = match mode {
        DataMode::RandomModes { modes, seed } => Some(ModeCoefficients::draw(*modes, *seed)),
        _ => None,
    };
    let points = hs
        .par_iter()
        .map(|&h| {
            let r = separation_at(a, w, h, len, mesh, mode, coeffs.as_ref())?;
            Ok(SweepPoint { h, value: r.ratio, record: r })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = SweepReport::new(points);
    if report.points.iter().all(|p| p.record.degenerate) {
        report.fit = None;
        report.fit_note = Some("all records degenerate".into());
    }
    Ok(report)
}
