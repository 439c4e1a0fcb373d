//! Experiment configuration as flat `key = value` lines.
//!
//! ```text
//! # comment
//! experiment = separation
//! domain.h = 0.4, 0.2, 0.1, 0.05
//! weight.terms = 1:0.2
//! mesh.ny = 64
//! ```
//!
//! Every key has a default and [`ExperimentConfig::emit`] writes all of them,
//! so a report echo is a complete description of the run. Parsing collects
//! every problem instead of stopping at the first.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{check_operator_weight, AnsatzVariant, Bump, DataMode, MeshParams};
use crate::geometry::{
    beta_condition, max_admissible_beta, DistanceKind, EllipticitySpec, ThinRectangle, WeightSpec, WeightTerm,
};
use crate::solvers::{EigOptions, ScalarizedOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Separation,
    Interpolation,
    Hardy,
    KoLemma,
    Lemma31,
    WeightsCheck,
    Ansatz,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Separation,
        ExperimentKind::Interpolation,
        ExperimentKind::Hardy,
        ExperimentKind::KoLemma,
        ExperimentKind::Lemma31,
        ExperimentKind::WeightsCheck,
        ExperimentKind::Ansatz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Separation => "separation",
            ExperimentKind::Interpolation => "interpolation",
            ExperimentKind::Hardy => "hardy",
            ExperimentKind::KoLemma => "ko-lemma",
            ExperimentKind::Lemma31 => "lemma31",
            ExperimentKind::WeightsCheck => "weights-check",
            ExperimentKind::Ansatz => "ansatz",
        }
    }

    /// Experiments that involve the operator `L` and hence the beta condition.
    fn uses_operator(self) -> bool {
        matches!(self, ExperimentKind::Separation | ExperimentKind::Lemma31)
    }
}

impl FromStr for ExperimentKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment `{s}` (expected one of {})", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceChoice {
    BottomEdge,
    Corner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMode {
    Ansatz,
    RandomModes,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainConfig {
    /// Thicknesses, strictly decreasing.
    pub h: Vec<f64>,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    pub terms: Vec<WeightTerm>,
    pub distance: DistanceChoice,
    /// `x0` of a corner weight.
    pub anchor: f64,
    pub product_factors: Option<usize>,
    pub product_constant: Option<f64>,
    /// Exponent bound for the beta condition; the largest exponent if unset.
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticityConfig {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    /// Opt in to the 2D Laplacian path: exponents up to 1/2, no beta condition.
    pub laplacian_path: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub block: usize,
    pub scan: usize,
    pub mu_tol: f64,
    pub dense: bool,
    pub mu_min: Option<f64>,
    pub mu_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationConfig {
    pub mode: SeparationMode,
    pub modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyConfig {
    pub gamma: Vec<f64>,
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KoConfig {
    pub samples: usize,
    pub degree: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub s: f64,
    pub variant: AnsatzVariant,
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output: String,
    pub domain: DomainConfig,
    pub weight: WeightConfig,
    pub ellipticity: EllipticityConfig,
    pub mesh: MeshParams,
    pub solver: SolverConfig,
    pub separation: SeparationConfig,
    pub hardy: HardyConfig,
    pub ko: KoConfig,
    pub ansatz: AnsatzConfig,
    /// Number of meshes in the distance-weighted gradient refinement study, each doubling
    /// `nx` and `ny`.
    pub lemma31_levels: usize,
    pub weights_check_samples: usize,
    /// Test hook: the h-point equal to this value fails without running.
    pub fail_on_h: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            output: "kornlab-out".into(),
            domain: DomainConfig { h: vec![0.4, 0.2, 0.1, 0.05], a: 1.0 },
            weight: WeightConfig {
                terms: vec![WeightTerm::new(1.0, 0.0)],
                distance: DistanceChoice::BottomEdge,
                anchor: 0.0,
                product_factors: None,
                product_constant: None,
                beta: None,
            },
            ellipticity: EllipticityConfig { a11: 1.0, a12: 0.0, a22: 1.0, laplacian_path: false },
            mesh: MeshParams::default(),
            solver: SolverConfig {
                tol: 1e-10,
                max_iter: 2000,
                block: 4,
                scan: 9,
                mu_tol: 1e-10,
                dense: false,
                mu_min: None,
                mu_max: None,
            },
            separation: SeparationConfig { mode: SeparationMode::Ansatz, modes: 8 },
            hardy: HardyConfig { gamma: vec![0.0, 0.2, 0.4, 0.6, 0.8], elements: vec![64, 256, 1024, 2048] },
            ko: KoConfig { samples: 1000, degree: 8, panels: 64 },
            ansatz: AnsatzConfig { s: 0.5, variant: AnsatzVariant::Printed, center: 0.5, radius: 0.25 },
            lemma31_levels: 3,
            weights_check_samples: 10_000,
            fail_on_h: None,
        }
    }

    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader::new(text);
        let experiment = r.required("experiment");
        let mut c = Self::new(experiment.unwrap_or(ExperimentKind::Hardy));
        r.set(&mut c.seed, "seed");
        r.set(&mut c.output, "output");
        r.set_list(&mut c.domain.h, "domain.h");
        r.set(&mut c.domain.a, "domain.a");
        if let Some(terms) = r.take("weight.terms", parse_terms) {
            c.weight.terms = terms;
        }
        r.set_with(&mut c.weight.distance, "weight.distance", |s| match s {
            "bottom-edge" => Ok(DistanceChoice::BottomEdge),
            "corner" => Ok(DistanceChoice::Corner),
            _ => Err(format!("expected bottom-edge or corner, got `{s}`")),
        });
        r.set(&mut c.weight.anchor, "weight.anchor");
        r.set_opt(&mut c.weight.product_factors, "weight.product_factors");
        r.set_opt(&mut c.weight.product_constant, "weight.product_constant");
        r.set_opt(&mut c.weight.beta, "weight.beta");
        r.set(&mut c.ellipticity.a11, "ellipticity.a11");
        r.set(&mut c.ellipticity.a12, "ellipticity.a12");
        r.set(&mut c.ellipticity.a22, "ellipticity.a22");
        r.set(&mut c.ellipticity.laplacian_path, "ellipticity.laplacian_path");
        r.set(&mut c.mesh.nx, "mesh.nx");
        r.set(&mut c.mesh.ny, "mesh.ny");
        r.set(&mut c.mesh.q, "mesh.q");
        r.set(&mut c.mesh.order, "mesh.order");
        r.set(&mut c.solver.tol, "solver.tol");
        r.set(&mut c.solver.max_iter, "solver.max_iter");
        r.set(&mut c.solver.block, "solver.block");
        r.set(&mut c.solver.scan, "solver.scan");
        r.set(&mut c.solver.mu_tol, "solver.mu_tol");
        r.set(&mut c.solver.dense, "solver.dense");
        r.set_opt(&mut c.solver.mu_min, "solver.mu_min");
        r.set_opt(&mut c.solver.mu_max, "solver.mu_max");
        r.set_with(&mut c.separation.mode, "separation.mode", |s| match s {
            "ansatz" => Ok(SeparationMode::Ansatz),
            "random-modes" => Ok(SeparationMode::RandomModes),
            "zero" => Ok(SeparationMode::Zero),
            _ => Err(format!("expected ansatz, random-modes or zero, got `{s}`")),
        });
        r.set(&mut c.separation.modes, "separation.modes");
        r.set_list(&mut c.hardy.gamma, "hardy.gamma");
        r.set_list(&mut c.hardy.elements, "hardy.elements");
        r.set(&mut c.ko.samples, "ko.samples");
        r.set(&mut c.ko.degree, "ko.degree");
        r.set(&mut c.ko.panels, "ko.panels");
        r.set(&mut c.ansatz.s, "ansatz.s");
        r.set_with(&mut c.ansatz.variant, "ansatz.variant", |s| match s {
            "printed" => Ok(AnsatzVariant::Printed),
            "shear-free" => Ok(AnsatzVariant::ShearFree),
            _ => Err(format!("expected printed or shear-free, got `{s}`")),
        });
        r.set(&mut c.ansatz.center, "ansatz.center");
        r.set(&mut c.ansatz.radius, "ansatz.radius");
        r.set(&mut c.lemma31_levels, "lemma31.levels");
        r.set(&mut c.weights_check_samples, "weights_check.samples");
        r.set_opt(&mut c.fail_on_h, "run.fail_on_h");
        let mut errors = r.finish();
        if errors.is_empty() {
            errors = c.problems();
        }
        if errors.is_empty() {
            Ok(c)
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Every key with its value, one per line, in a fixed order.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.name().into());
        kv("seed", self.seed.to_string());
        kv("output", self.output.clone());
        kv("domain.h", self.domain.h.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", "));
        kv("domain.a", num(self.domain.a));
        let terms: Vec<String> =
            self.weight.terms.iter().map(|t| format!("{}:{}", num(t.coeff), num(t.exponent))).collect();
        kv("weight.terms", terms.join(", "));
        kv(
            "weight.distance",
            match self.weight.distance {
                DistanceChoice::BottomEdge => "bottom-edge",
                DistanceChoice::Corner => "corner",
            }
            .into(),
        );
        kv("weight.anchor", num(self.weight.anchor));
        if let Some(k) = self.weight.product_factors {
            kv("weight.product_factors", k.to_string());
        }
        if let Some(k) = self.weight.product_constant {
            kv("weight.product_constant", num(k));
        }
        if let Some(b) = self.weight.beta {
            kv("weight.beta", num(b));
        }
        kv("ellipticity.a11", num(self.ellipticity.a11));
        kv("ellipticity.a12", num(self.ellipticity.a12));
        kv("ellipticity.a22", num(self.ellipticity.a22));
        kv("ellipticity.laplacian_path", self.ellipticity.laplacian_path.to_string());
        kv("mesh.nx", self.mesh.nx.to_string());
        kv("mesh.ny", self.mesh.ny.to_string());
        kv("mesh.q", num(self.mesh.q));
        kv("mesh.order", self.mesh.order.to_string());
        kv("solver.tol", num(self.solver.tol));
        kv("solver.max_iter", self.solver.max_iter.to_string());
        kv("solver.block", self.solver.block.to_string());
        kv("solver.scan", self.solver.scan.to_string());
        kv("solver.mu_tol", num(self.solver.mu_tol));
        kv("solver.dense", self.solver.dense.to_string());
        if let Some(m) = self.solver.mu_min {
            kv("solver.mu_min", num(m));
        }
        if let Some(m) = self.solver.mu_max {
            kv("solver.mu_max", num(m));
        }
        kv(
            "separation.mode",
            match self.separation.mode {
                SeparationMode::Ansatz => "ansatz",
                SeparationMode::RandomModes => "random-modes",
                SeparationMode::Zero => "zero",
            }
            .into(),
        );
        kv("separation.modes", self.separation.modes.to_string());
        kv("hardy.gamma", self.hardy.gamma.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", "));
        kv("hardy.elements", join(&self.hardy.elements));
        kv("ko.samples", self.ko.samples.to_string());
        kv("ko.degree", self.ko.degree.to_string());
        kv("ko.panels", self.ko.panels.to_string());
        kv("ansatz.s", num(self.ansatz.s));
        kv(
            "ansatz.variant",
            match self.ansatz.variant {
                AnsatzVariant::Printed => "printed",
                AnsatzVariant::ShearFree => "shear-free",
            }
            .into(),
        );
        kv("ansatz.center", num(self.ansatz.center));
        kv("ansatz.radius", num(self.ansatz.radius));
        kv("lemma31.levels", self.lemma31_levels.to_string());
        kv("weights_check.samples", self.weights_check_samples.to_string());
        if let Some(h) = self.fail_on_h {
            kv("run.fail_on_h", num(h));
        }
        s
    }

    pub fn ellipticity_spec(&self) -> Result<EllipticitySpec> {
        let e = &self.ellipticity;
        EllipticitySpec::new([[e.a11, e.a12], [e.a12, e.a22]])
    }

    /// The weight on the domain of thickness `h`.
    pub fn weight_spec(&self, h: f64) -> Result<WeightSpec> {
        let domain = ThinRectangle::new(h, self.domain.a)?;
        let kind = match self.weight.distance {
            DistanceChoice::BottomEdge => DistanceKind::BottomEdge,
            DistanceChoice::Corner => DistanceKind::corner(self.weight.anchor, &domain)?,
        };
        let w = WeightSpec::new(self.weight.terms.clone(), kind)?;
        match (self.weight.product_factors, self.weight.product_constant) {
            (Some(k), Some(c)) => w.with_product(k, c),
            (None, None) => Ok(w),
            _ => Err(Error::InvalidWeight(
                "weight.product_factors and weight.product_constant must be given together".into(),
            )),
        }
    }

    pub fn bump(&self) -> Result<Bump> {
        Bump::new(self.ansatz.center, self.ansatz.radius)
    }

    pub fn data_mode(&self) -> DataMode {
        match self.separation.mode {
            SeparationMode::Ansatz => DataMode::Ansatz,
            SeparationMode::RandomModes => DataMode::RandomModes { modes: self.separation.modes, seed: self.seed },
            SeparationMode::Zero => DataMode::Zero,
        }
    }

    pub fn scalarized_options(&self) -> ScalarizedOptions {
        let bracket = match (self.solver.mu_min, self.solver.mu_max) {
            (Some(lo), Some(hi)) => Some((lo, hi)),
            _ => None,
        };
        ScalarizedOptions {
            bracket,
            tol: self.solver.mu_tol,
            scan: self.solver.scan,
            dense: self.solver.dense,
            eig: EigOptions {
                tol: self.solver.tol,
                max_iter: self.solver.max_iter,
                block: self.solver.block,
                seed: self.seed,
            },
        }
    }

    /// All validation problems; empty when the config is runnable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |r: Result<()>| {
            if let Err(e) = r {
                out.push(e.to_string());
            }
        };
        let uses_domain = !matches!(self.experiment, ExperimentKind::Hardy | ExperimentKind::KoLemma);
        if uses_domain {
            check(
                crate::experiments::fit::check_h_list(&self.domain.h).map_err(|e| Error::InvalidDomain(e.to_string())),
            );
        }
        if !(self.domain.a > 0.0 && self.domain.a.is_finite()) {
            check(Err(Error::InvalidDomain(format!("domain.a = {} must be positive", self.domain.a))));
        }
        let a = self.ellipticity_spec();
        check(a.as_ref().map(|_| ()).map_err(Clone::clone));
        let hmin = self.domain.h.iter().copied().fold(f64::INFINITY, f64::min);
        let w = if hmin.is_finite() && hmin > 0.0 && self.domain.a > 0.0 {
            let w = self.weight_spec(hmin);
            check(w.as_ref().map(|_| ()).map_err(Clone::clone));
            w.ok()
        } else {
            None
        };
        let lap = self.ellipticity.laplacian_path;
        if let (Ok(a), Some(w)) = (&a, &w) {
            match self.experiment {
                k if k.uses_operator() => check(check_operator_weight(a, w, lap)),
                ExperimentKind::Interpolation | ExperimentKind::Ansatz => check(w.check_exponent_range(lap)),
                _ => {}
            }
            if lap && !a.is_laplacian() {
                check(Err(Error::InvalidArgument(
                    "ellipticity.laplacian_path needs A to be a multiple of the identity".into(),
                )));
            }
            if let Some(beta) = self.weight.beta {
                check(self.check_beta(a, w, beta));
            }
        }
        let m = &self.mesh;
        if m.nx < 2 || m.ny < 2 || !(m.q >= 1.0 && m.q.is_finite()) {
            check(Err(Error::InvalidGrid(format!(
                "mesh needs nx, ny >= 2 and q >= 1 (got {}, {}, {})",
                m.nx, m.ny, m.q
            ))));
        }
        check(crate::quadrature::check_order(m.order));
        let s = &self.solver;
        if !(s.tol > 0.0 && s.mu_tol > 0.0) || s.max_iter == 0 || s.block == 0 || s.scan < 3 {
            check(Err(Error::InvalidArgument(
                "solver needs tol, mu_tol > 0, max_iter, block >= 1 and scan >= 3".into(),
            )));
        }
        match (s.mu_min, s.mu_max) {
            (Some(lo), Some(hi)) if !(lo > 0.0 && hi > lo && hi.is_finite()) => {
                check(Err(Error::InvalidArgument(format!("mu bracket [{lo}, {hi}] must satisfy 0 < mu_min < mu_max"))))
            }
            (Some(_), None) | (None, Some(_)) => {
                check(Err(Error::InvalidArgument("solver.mu_min and solver.mu_max must be given together".into())))
            }
            _ => {}
        }
        match self.experiment {
            ExperimentKind::Separation
                if self.separation.mode == SeparationMode::RandomModes && self.separation.modes == 0 =>
            {
                check(Err(Error::InvalidArgument("separation.modes must be at least 1".into())))
            }
            ExperimentKind::Hardy => {
                if self.hardy.gamma.is_empty() || self.hardy.gamma.iter().any(|g| !(0.0..1.0).contains(g)) {
                    check(Err(Error::InvalidArgument("hardy.gamma must be a nonempty list in [0, 1)".into())));
                }
                if self.hardy.elements.is_empty() || self.hardy.elements.iter().any(|&n| n < 8) {
                    check(Err(Error::InvalidArgument("hardy.elements must be a nonempty list of values >= 8".into())));
                }
            }
            ExperimentKind::KoLemma if self.ko.samples == 0 || self.ko.panels == 0 => {
                check(Err(Error::InvalidArgument("ko.samples and ko.panels must be at least 1".into())))
            }
            ExperimentKind::Ansatz => {
                let b = self.bump().map(|_| ());
                check(b);
                if !(0.0..=0.5).contains(&self.ansatz.s) {
                    check(Err(Error::InvalidArgument(format!("ansatz.s = {} outside [0, 1/2]", self.ansatz.s))));
                }
            }
            ExperimentKind::Lemma31 if self.lemma31_levels < 2 => {
                check(Err(Error::InvalidArgument("lemma31.levels must be at least 2".into())))
            }
            ExperimentKind::WeightsCheck if self.weights_check_samples == 0 => {
                check(Err(Error::InvalidArgument("weights_check.samples must be at least 1".into())))
            }
            _ => {}
        }
        out
    }

    fn check_beta(&self, a: &EllipticitySpec, w: &WeightSpec, beta: f64) -> Result<()> {
        if w.max_exponent() > beta {
            return Err(Error::InvalidWeight(format!(
                "largest exponent {} exceeds weight.beta = {beta}",
                w.max_exponent()
            )));
        }
        if self.ellipticity.laplacian_path {
            return Ok(());
        }
        if !beta_condition(a.lambda(), a.big_lambda(), 2, beta)? {
            return Err(Error::BetaConditionViolated {
                beta,
                beta_star: max_admissible_beta(a.lambda(), a.big_lambda(), 2),
            });
        }
        Ok(())
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn parse_terms(s: &str) -> std::result::Result<Vec<WeightTerm>, String> {
    s.split(',')
        .map(|t| {
            let (c, e) =
                t.trim().split_once(':').ok_or_else(|| format!("term `{}` is not coeff:exponent", t.trim()))?;
            let c = c.trim().parse::<f64>().map_err(|e| format!("coefficient `{c}`: {e}"))?;
            let e = e.trim().parse::<f64>().map_err(|err| format!("exponent `{e}`: {err}"))?;
            Ok(WeightTerm::new(c, e))
        })
        .collect()
}

/// Raw key-value pairs with error collection.
struct Reader {
    values: BTreeMap<String, (usize, String)>,
    errors: Vec<String>,
}

impl Reader {
    fn new(text: &str) -> Self {
        let mut values = BTreeMap::new();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim().to_string();
                    if values.contains_key(&k) {
                        errors.push(format!("line {}: duplicate key `{k}`", i + 1));
                    } else {
                        values.insert(k, (i + 1, v.trim().to_string()));
                    }
                }
                None => errors.push(format!("line {}: expected `key = value`", i + 1)),
            }
        }
        Self { values, errors }
    }

    fn take<T>(&mut self, key: &str, f: impl FnOnce(&str) -> std::result::Result<T, String>) -> Option<T> {
        let (line, raw) = self.values.remove(key)?;
        match f(&raw) {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("line {line}: {key}: {e}"));
                None
            }
        }
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        if !self.values.contains_key(key) {
            self.errors.push(format!("missing required key `{key}`"));
            return None;
        }
        self.take(key, |s| s.parse::<T>().map_err(|e| e.to_string()))
    }

    fn set<T: FromStr>(&mut self, slot: &mut T, key: &str)
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key, |s| s.parse::<T>().map_err(|e| e.to_string())) {
            *slot = v;
        }
    }

    fn set_opt<T: FromStr>(&mut self, slot: &mut Option<T>, key: &str)
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = self.take(key, |s| s.parse::<T>().map_err(|e| e.to_string())) {
            *slot = Some(v);
        }
    }

    fn set_with<T>(&mut self, slot: &mut T, key: &str, f: impl FnOnce(&str) -> std::result::Result<T, String>) {
        if let Some(v) = self.take(key, f) {
            *slot = v;
        }
    }

    fn set_list<T: FromStr>(&mut self, slot: &mut Vec<T>, key: &str)
    where
        T::Err: std::fmt::Display,
    {
        let parsed = self.take(key, |s| {
            s.split(',').map(|t| t.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", t.trim()))).collect()
        });
        if let Some(v) = parsed {
            *slot = v;
        }
    }

    fn finish(mut self) -> Vec<String> {
        for (k, (line, _)) in &self.values {
            self.errors.push(format!("line {line}: unknown key `{k}`"));
        }
        self.errors
    }
}
