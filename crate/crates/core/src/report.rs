//! Runs a validated config and serializes the outcome.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{num, ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::experiments::fit::{power_fit, PowerFit};
use crate::experiments::hardy::{hardy_extremal, TrigPoly};
use crate::experiments::separation::{separation_at, ModeCoefficients};
use crate::experiments::{
    ansatz_ratio_at, interpolation_constant, kondratiev_oleinik_margin, lemma31_discrete, lemma31_ratio, Manufactured,
};
use crate::geometry::{
    admissibility_constant, eval_weight, max_admissible_beta, scaled_weight_gradient, verify_admissibility, Point,
    ThinRectangle,
};
use crate::grid::build_grid;

/// One output record. `h` is absent for experiments without a thickness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    pub h: Option<f64>,
    pub value: f64,
    pub mu_star: Option<f64>,
    /// Norms and diagnostics, keyed by name.
    pub components: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub label: String,
    pub h: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    /// The config exactly as run, in its text form.
    pub config: String,
    /// Tolerances in effect, by name.
    pub tolerances: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
    pub failures: Vec<Failure>,
    /// Power law fitted to `value` over the rows that have `h`.
    pub fit: Option<PowerFit>,
    pub fit_note: Option<String>,
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl RunReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    /// JSON with the wall-clock field zeroed: equal configs give equal bytes.
    pub fn payload_json(&self) -> Result<String> {
        let mut r = self.clone();
        r.wall_clock_seconds = 0.0;
        r.to_json()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Rows as CSV: `label, h, value, mu_star` and one column per component
    /// name, then failures and the fit as trailing records.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let names: std::collections::BTreeSet<&String> = self.rows.iter().flat_map(|r| r.components.keys()).collect();
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut header = vec!["label".to_string(), "h".into(), "value".into(), "mu_star".into()];
        header.extend(names.iter().map(|s| s.to_string()));
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            let mut rec = vec![r.label.clone(), opt(r.h), num(r.value), opt(r.mu_star)];
            rec.extend(names.iter().map(|n| opt(r.components.get(*n).copied())));
            w.write_record(&rec).map_err(io)?;
        }
        for f in &self.failures {
            w.write_record(["failure".to_string(), opt(f.h), f.label.clone(), f.message.clone()]).map_err(io)?;
        }
        if let Some(f) = &self.fit {
            w.write_record(["fit", "c", "alpha", "r_squared", "used", "excluded"]).map_err(io)?;
            w.write_record([
                "fit".to_string(),
                num(f.c),
                num(f.alpha),
                num(f.r_squared),
                f.used.to_string(),
                f.excluded.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `report.csv` or `report.json` into `dir` and returns the path.
    pub fn emit(&self, dir: &std::path::Path, format: Format) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        match format {
            Format::Json => {
                let p = dir.join("report.json");
                std::fs::write(&p, self.to_json()?)?;
                Ok(p)
            }
            Format::Csv => {
                let p = dir.join("report.csv");
                self.write_csv(std::fs::File::create(&p)?)?;
                Ok(p)
            }
        }
    }
}

type Outcome = std::result::Result<Vec<Row>, Failure>;

fn row(label: impl Into<String>, h: Option<f64>, value: f64, comps: &[(&str, f64)]) -> Row {
    Row {
        label: label.into(),
        h,
        value,
        mu_star: None,
        components: comps.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
    }
}

fn fail(label: &str, h: Option<f64>, e: Error) -> Failure {
    Failure { label: label.into(), h, message: e.to_string() }
}

/// Runs `f` at every h in parallel. The h equal to `fail_on_h` fails
/// without running.
fn per_h<F>(cfg: &ExperimentConfig, label: &str, f: F) -> Vec<Outcome>
where
    F: Fn(f64) -> Result<Vec<Row>> + Sync,
{
    cfg.domain
        .h
        .par_iter()
        .map(|&h| {
            if cfg.fail_on_h.is_some_and(|x| (x - h).abs() <= 1e-12 * h) {
                return Err(fail(label, Some(h), Error::InvalidArgument("forced failure (run.fail_on_h)".into())));
            }
            f(h).map_err(|e| fail(label, Some(h), e))
        })
        .collect()
}

/// Validates and runs a config. Solver failures at one h are recorded and
/// the remaining h-points still run.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let start = Instant::now();
    let outcomes = match cfg.experiment {
        ExperimentKind::Separation => run_separation(cfg)?,
        ExperimentKind::Interpolation => run_interpolation(cfg)?,
        ExperimentKind::Hardy => run_hardy(cfg),
        ExperimentKind::KoLemma => vec![Ok(run_ko(cfg))],
        ExperimentKind::Lemma31 => run_lemma31(cfg)?,
        ExperimentKind::WeightsCheck => vec![run_weights(cfg)],
        ExperimentKind::Ansatz => run_ansatz(cfg)?,
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => rows.extend(r),
            Err(f) => failures.push(f),
        }
    }
    let (fit, fit_note) = fit_rows(cfg, &rows);
    let s = &cfg.solver;
    let tolerances = [
        ("eig_residual", s.tol),
        ("mu_golden_section", s.mu_tol),
        ("linear_solve_residual", 1e-10),
        ("deflation_null_check", 1e-10),
        ("quadrature_order", cfg.mesh.order as f64),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(RunReport {
        tool: "kornlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.emit(),
        tolerances,
        rows,
        failures,
        fit,
        fit_note,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn fit_rows(cfg: &ExperimentConfig, rows: &[Row]) -> (Option<PowerFit>, Option<String>) {
    let sweeps =
        matches!(cfg.experiment, ExperimentKind::Separation | ExperimentKind::Interpolation | ExperimentKind::Ansatz);
    if !sweeps {
        return (None, Some(format!("{} is not an h-sweep", cfg.experiment.name())));
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.h.map(|h| (h, r.value))).collect();
    match power_fit(&pts) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn run_separation(cfg: &ExperimentConfig) -> Result<Vec<Outcome>> {
    let a = cfg.ellipticity_spec()?;
    let mode = cfg.data_mode();
    let coeffs = match mode {
        crate::experiments::DataMode::RandomModes { modes, seed } => Some(ModeCoefficients::draw(modes, seed)),
        _ => None,
    };
    let label = match cfg.separation.mode {
        crate::config::SeparationMode::Ansatz => "ansatz",
        crate::config::SeparationMode::RandomModes => "random-modes",
        crate::config::SeparationMode::Zero => "zero",
    };
    Ok(per_h(cfg, label, |h| {
        let w = cfg.weight_spec(h)?;
        let r = separation_at(&a, &w, h, cfg.domain.a, &cfg.mesh, &mode, coeffs.as_ref())?;
        Ok(vec![row(
            label,
            Some(h),
            r.ratio,
            &[("grad", r.grad), ("mass", r.mass), ("dx", r.dx), ("degenerate", r.degenerate as u8 as f64)],
        )])
    }))
}

fn run_interpolation(cfg: &ExperimentConfig) -> Result<Vec<Outcome>> {
    let opts = cfg.scalarized_options();
    Ok(per_h(cfg, "interpolation", |h| {
        let w = cfg.weight_spec(h)?;
        let r = interpolation_constant(h, cfg.domain.a, &w, &cfg.mesh, &opts)?;
        let mut out = row(
            "interpolation",
            Some(h),
            r.k,
            &[
                ("field_ratio", r.field_ratio),
                ("evaluations", r.history.len() as f64),
                ("eig_residual", r.eig_residual),
                ("mu_lo", r.bracket.0),
                ("mu_hi", r.bracket.1),
            ],
        );
        out.mu_star = Some(r.mu_star);
        Ok(vec![out])
    }))
}

fn run_hardy(cfg: &ExperimentConfig) -> Vec<Outcome> {
    let jobs: Vec<(f64, usize)> =
        cfg.hardy.gamma.iter().flat_map(|&g| cfg.hardy.elements.iter().map(move |&n| (g, n))).collect();
    jobs.par_iter()
        .map(|&(g, n)| {
            let label = format!("gamma={g}");
            hardy_extremal(g, cfg.domain.a, n).map_err(|e| fail(&label, None, e)).map(|r| {
                vec![row(
                    label.clone(),
                    None,
                    r.value,
                    &[("gamma", g), ("elements", n as f64), ("bound", r.bound), ("grading", r.grading)],
                )]
            })
        })
        .collect()
}

fn run_ko(cfg: &ExperimentConfig) -> Vec<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a = cfg.domain.a;
    let margins: Vec<f64> = (0..cfg.ko.samples)
        .map(|_| {
            let p = TrigPoly::random(&mut rng, cfg.ko.degree, a);
            let shift = rng.random_range(0.0..a);
            kondratiev_oleinik_margin(|t| p.value(t + shift), |t| p.derivative(t + shift), a, cfg.ko.panels)
        })
        .collect();
    let min = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let negative = margins.iter().filter(|&&m| m < -1e-10).count();
    vec![row(
        "ko-lemma",
        None,
        min,
        &[("samples", margins.len() as f64), ("below_tolerance", negative as f64), ("tolerance", 1e-10)],
    )]
}

fn run_lemma31(cfg: &ExperimentConfig) -> Result<Vec<Outcome>> {
    let a = cfg.ellipticity_spec()?;
    let outcomes = per_h(cfg, "lemma31", |h| {
        let w = cfg.weight_spec(h)?;
        let domain = ThinRectangle::new(h, cfg.domain.a)?;
        let mut rows = Vec::new();
        for f in Manufactured::all(h, cfg.domain.a) {
            let mut ratios = Vec::with_capacity(cfg.lemma31_levels);
            for l in 0..cfg.lemma31_levels {
                let g = Arc::new(build_grid(&domain, cfg.mesh.nx << l, cfg.mesh.ny << l, cfg.mesh.q)?);
                ratios.push(lemma31_discrete(&f, &a, &w, &g, cfg.mesh.order)?.ratio);
            }
            let fine = build_grid(&domain, cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.q)?;
            let exact = lemma31_ratio(&f, &a, &w, &fine, 10)?;
            let change = ratios.windows(2).map(|p| ((p[1] - p[0]) / p[1]).abs()).fold(0.0, f64::max);
            let mut comps: Vec<(String, f64)> =
                ratios.iter().enumerate().map(|(l, &r)| (format!("level{l}"), r)).collect();
            comps.push(("max_relative_change".into(), change));
            comps.push(("quadrature_ratio".into(), exact.ratio));
            let comps: Vec<(&str, f64)> = comps.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            rows.push(row(f.name(), Some(h), *ratios.last().expect("at least two levels"), &comps));
        }
        Ok(rows)
    });
    Ok(outcomes)
}

fn run_weights(cfg: &ExperimentConfig) -> Outcome {
    let h = cfg.domain.h.iter().copied().fold(f64::INFINITY, f64::min);
    let label = "weights-check";
    let w = cfg.weight_spec(h).map_err(|e| fail(label, Some(h), e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<Point> = (0..cfg.weights_check_samples)
        .map(|_| Point::new(rng.random_range(0.0..=h), rng.random_range(0.0..=cfg.domain.a)))
        .collect();
    let rep = verify_admissibility(&w, &samples);
    // equality |y grad w| = alpha w for a single power of y
    let single = match w.terms() {
        [t] if matches!(w.kind(), crate::geometry::DistanceKind::BottomEdge) && w.product().is_none() => {
            Some(t.exponent)
        }
        _ => None,
    };
    let exactness = single.map(|alpha| {
        samples
            .iter()
            .filter(|p| p.y > 0.0)
            .filter_map(|&p| {
                let g = scaled_weight_gradient(&w, p)?;
                let lhs = g[0].hypot(g[1]);
                let rhs = alpha.abs() * eval_weight(&w, p);
                Some(if rhs > 0.0 { (lhs - rhs).abs() / rhs } else { lhs })
            })
            .fold(0.0, f64::max)
    });
    let e = cfg.ellipticity_spec().map_err(|e| fail(label, Some(h), e))?;
    let mut comps = vec![
        ("constant", admissibility_constant(&w)),
        ("checked", rep.checked as f64),
        ("skipped", rep.skipped as f64),
        ("violations", rep.violations as f64),
        ("beta_star", max_admissible_beta(e.lambda(), e.big_lambda(), 2)),
    ];
    if let Some(x) = exactness {
        comps.push(("exactness_error", x));
    }
    Ok(vec![row(label, Some(h), rep.max_ratio, &comps)])
}

fn run_ansatz(cfg: &ExperimentConfig) -> Result<Vec<Outcome>> {
    let bump = cfg.bump()?;
    let label = match cfg.ansatz.variant {
        crate::experiments::AnsatzVariant::Printed => "printed",
        crate::experiments::AnsatzVariant::ShearFree => "shear-free",
    };
    Ok(per_h(cfg, label, |h| {
        let w = cfg.weight_spec(h)?;
        let r = ansatz_ratio_at(h, cfg.domain.a, &w, bump, cfg.ansatz.s, cfg.ansatz.variant)?;
        Ok(vec![row(
            label,
            Some(h),
            r.ratio,
            &[("grad", r.grad), ("mass_u", r.mass_u), ("strain", r.strain), ("degenerate", r.degenerate as u8 as f64)],
        )])
    }))
}
