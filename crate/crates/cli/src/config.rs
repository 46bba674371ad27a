//! Job configuration: JSON schema, validation, and construction of the
//! analysis objects, plus the failure-to-exit-code mapping.

use std::path::{Path, PathBuf};

use anyhow::Context;
use complab_core::classify::ClassifyError;
use complab_core::coeff::CoeffError;
use complab_core::{
    CotangentState, FlowControls, GeodesicControls, LorentzModel, SturmLiouvilleOperator, TrigPoly,
};
use serde::{Deserialize, Serialize};

/// Failure modes mapped to process exit codes: unusable configuration
/// exits 2, a numeric/analysis failure on a valid configuration exits 3.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Numeric(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Numeric(_) => "numeric",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(e) | Failure::Numeric(e) => format!("{e:#}"),
        }
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow::anyhow!(msg.into()))
}

/// Trigonometric-polynomial coefficient:
/// `f(x) = const + sum_n cos[n-1] cos(2 pi n x) + sum_n sin[n-1] sin(2 pi n x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    #[serde(rename = "const", default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl CoeffSpec {
    pub fn to_poly(&self) -> TrigPoly {
        TrigPoly::new(self.constant, self.cos.clone(), self.sin.clone())
    }

    pub fn from_poly(p: &TrigPoly) -> CoeffSpec {
        CoeffSpec {
            constant: p.constant_part(),
            cos: p.cos_coeffs().to_vec(),
            sin: p.sin_coeffs().to_vec(),
        }
    }
}

/// Numeric controls; every field is optional and falls back to the
/// documented default. Command-line flags override these in turn.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi_cap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
}

/// One analysis job. `kind` selects the shape:
///
/// * `"sturm"`   — circle operator from coefficients `a`, `b`;
/// * `"degree1"` — first-order operator from coefficient `b` alone;
/// * `"lorentz"` — surface model from `model` (+ optional `mode`, `seeds`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<CoeffSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<CoeffSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub include_a4: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<LorentzModel>,
    /// Angular Fourier mode for the separated torus operator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<i32>,
    /// Geodesic initial states (surface models).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<CotangentState>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub controls: Option<ControlsSpec>,
    /// Pipelines composed by `crosscheck`; subset of
    /// {classify, flow, frobenius, deficiency, crosscheck}.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipelines: Option<Vec<String>>,
    /// Default output directory; overridden by `--out`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

const KNOWN_PIPELINES: [&str; 5] = ["classify", "flow", "frobenius", "deficiency", "crosscheck"];

pub fn load_config(path: &Path) -> CliResult<JobConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .map_err(Failure::Config)?;
    let cfg: JobConfig = serde_json::from_str(&text)
        .with_context(|| format!("cannot parse config {}", path.display()))
        .map_err(Failure::Config)?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &JobConfig) -> CliResult<()> {
    match cfg.kind.as_str() {
        "sturm" => {
            if cfg.a.is_none() || cfg.b.is_none() {
                return Err(config_err("kind \"sturm\" requires coefficients \"a\" and \"b\""));
            }
            if cfg.model.is_some() {
                return Err(config_err("kind \"sturm\" does not take a \"model\""));
            }
        }
        "degree1" => {
            if cfg.b.is_none() {
                return Err(config_err("kind \"degree1\" requires coefficient \"b\""));
            }
            if cfg.a.is_some() || cfg.model.is_some() {
                return Err(config_err("kind \"degree1\" takes only coefficient \"b\""));
            }
        }
        "lorentz" => {
            if cfg.model.is_none() {
                return Err(config_err("kind \"lorentz\" requires a \"model\""));
            }
            if cfg.a.is_some() || cfg.b.is_some() {
                return Err(config_err("kind \"lorentz\" does not take coefficients"));
            }
        }
        other => {
            return Err(config_err(format!(
                "unknown kind {other:?}; expected \"sturm\", \"degree1\" or \"lorentz\""
            )));
        }
    }
    if let Some(pipes) = &cfg.pipelines {
        for p in pipes {
            if !KNOWN_PIPELINES.contains(&p.as_str()) {
                return Err(config_err(format!(
                    "unknown pipeline {p:?}; expected one of {KNOWN_PIPELINES:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Command-line overrides applied on top of the config's `controls`.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub t_max: Option<f64>,
    pub xi_cap: Option<f64>,
    pub series_order: Option<usize>,
    pub seed: Option<u64>,
}

/// Fully resolved controls for one job.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub out: PathBuf,
    pub flow: FlowControls,
    pub geo: GeodesicControls,
    pub series_order: usize,
    pub seed: u64,
}

fn in_range(name: &str, v: f64, lo: f64, hi: f64) -> CliResult<()> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(config_err(format!("{name} = {v} outside the supported range [{lo}, {hi}]")))
    }
}

/// Escalating-cap ladder ending at `cap`, one decade per rung.
fn ladder_to(cap: f64) -> Vec<f64> {
    (0..4).map(|i| cap / 10f64.powi(3 - i)).collect()
}

pub fn resolve(cfg: &JobConfig, ov: &Overrides) -> CliResult<Resolved> {
    let c = cfg.controls.clone().unwrap_or_default();
    let mut flow = FlowControls::default();
    let mut geo = GeodesicControls::default();

    if let Some(r) = c.rel_tol {
        in_range("rel_tol", r, 1e-14, 1e-2)?;
        flow.rel_tol = r;
        geo.rel_tol = r;
    }
    if let Some(r) = c.abs_tol {
        in_range("abs_tol", r, 1e-16, 1e-2)?;
        flow.abs_tol = r;
        geo.abs_tol = r;
    }
    if let Some(t) = ov.t_max.or(c.t_max) {
        in_range("t_max", t, 1e-6, 1e9)?;
        flow.t_max = t;
        geo.t_max = t;
    }
    if let Some(x) = ov.xi_cap.or(c.xi_cap) {
        in_range("xi_cap", x, 10.0, 1e12)?;
        flow.xi_cap = x;
        flow.cap_ladder = ladder_to(x);
        geo.cap = x;
        geo.cap_ladder = ladder_to(x);
    }
    let series_order = ov.series_order.or(c.series_order).unwrap_or(20);
    if !(4..=64).contains(&series_order) {
        return Err(config_err(format!(
            "series_order = {series_order} outside the supported range [4, 64]"
        )));
    }
    let out = ov
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Resolved {
        out,
        flow,
        geo,
        series_order,
        seed: ov.seed.or(c.seed).unwrap_or(0),
    })
}

/// Builds the circle operator, mapping construction failures to exit
/// codes: degenerate-beyond-resolution coefficients are numeric failures,
/// structurally unusable coefficients are config errors.
pub fn build_operator(cfg: &JobConfig) -> CliResult<SturmLiouvilleOperator> {
    let a = cfg.a.as_ref().ok_or_else(|| config_err("missing coefficient \"a\""))?;
    let b = cfg.b.as_ref().ok_or_else(|| config_err("missing coefficient \"b\""))?;
    let op = SturmLiouvilleOperator::new(a.to_poly(), b.to_poly()).map_err(|e| match &e {
        ClassifyError::Coefficient(CoeffError::OrderTooHigh { .. })
        | ClassifyError::ZerosTooClose { .. } => Failure::Numeric(e.into()),
        _ => Failure::Config(e.into()),
    })?;
    Ok(op.with_include_a4(cfg.include_a4.unwrap_or(false)))
}

pub fn require_kind(cfg: &JobConfig, kind: &str, cmd: &str) -> CliResult<()> {
    if cfg.kind == kind {
        Ok(())
    } else {
        Err(config_err(format!(
            "subcommand \"{cmd}\" requires kind \"{kind}\", got \"{}\"",
            cfg.kind
        )))
    }
}
