//! Pipeline orchestration and artifact writing.
//!
//! Every job subcommand writes `report.json` into the output directory;
//! `flow` adds `flow.json` + `trajectories/*.csv`, `frobenius` adds
//! `series/*.json`, `deficiency` adds `deficiency.json`, `lorentz` adds
//! `trajectories/*.csv`, and `crosscheck` composes the pipelines and adds
//! `crosscheck.json`. All JSON is pretty-printed with a trailing newline
//! and is byte-identical across runs of the same config and seed.

use std::path::{Path, PathBuf};

use anyhow::Context;
use complab_core::classify::{degree1_esa, CaseTag};
use complab_core::deficiency::cross_validate;
use complab_core::flow::{completeness_probe, integrate};
use complab_core::frobenius::{
    expand_operator, frobenius_series, indicial_equation, irregular_solution, oscillatory_pair,
    Side,
};
use complab_core::lorentz::{geodesic_integrate, laplacian_mode_identity, lorentz_esa_verdict};
use complab_core::{CotangentState, JobReport, LorentzModel, SturmLiouvilleOperator};
use num_complex::Complex64 as C;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    build_operator, config_err, require_kind, CliResult, CoeffSpec, Failure, JobConfig, Resolved,
};
use crate::logger::{log_debug, log_info};

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("cannot create {}", parent.display()))
            .map_err(Failure::Config)?;
    }
    std::fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Config)?;
    log_debug!("wrote {}", path.display());
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Numeric(e.into()))?;
    s.push('\n');
    write_text(path, &s)
}

/// `report.json` for the three config kinds. Operator jobs use the
/// canonical completeness report; `degree1` reports the uniform rule;
/// `lorentz` reports the surface verdict (plus the reduced circle report
/// for the torus model).
fn write_report(cfg: &JobConfig, out: &Path) -> CliResult<serde_json::Value> {
    let path = out.join("report.json");
    match cfg.kind.as_str() {
        "degree1" => {
            let rule = degree1_esa();
            let value = json!({ "esa": rule.esa, "rule": rule.statement });
            write_json(&path, &value)?;
            Ok(value)
        }
        "lorentz" => {
            let model = cfg.model.clone().ok_or_else(|| config_err("missing model"))?;
            let verdict = lorentz_esa_verdict(&model).map_err(|e| Failure::Numeric(e.into()))?;
            let value = json!({
                "model": model.name(),
                "complete": verdict.complete,
                "esa": verdict.esa,
                "reason": verdict.reason,
                "reduced": verdict.reduced.as_ref().map(JobReport::from_completeness),
            });
            write_json(&path, &value)?;
            Ok(value)
        }
        _ => {
            let op = build_operator(cfg)?;
            let report = JobReport::from_operator(&op);
            write_text(&path, &report.to_canonical_json())?;
            Ok(serde_json::to_value(&report).map_err(|e| Failure::Numeric(e.into()))?)
        }
    }
}

pub fn run_classify(cfg: &JobConfig, res: &Resolved) -> CliResult<()> {
    let value = write_report(cfg, &res.out)?;
    let flag = |primary: &str, fallback: &str| {
        value
            .get(primary)
            .or_else(|| value.get(fallback))
            .and_then(|v| v.as_bool())
            .map(|b| b.to_string())
            .unwrap_or_else(|| "n/a".into())
    };
    log_info!(
        "classify: complete = {}, esa = {}",
        flag("classical", "complete"),
        flag("quantum", "esa")
    );
    Ok(())
}

fn csv_row(cells: &[f64]) -> String {
    let mut row = String::new();
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            row.push(',');
        }
        row.push_str(&format!("{c}"));
    }
    row.push('\n');
    row
}

pub fn run_flow(cfg: &JobConfig, res: &Resolved) -> CliResult<()> {
    require_kind(cfg, "sturm", "flow")?;
    let op = build_operator(cfg)?;
    write_report(cfg, &res.out)?;
    let probe = completeness_probe(&op, &res.flow, res.seed);
    write_json(&res.out.join("flow.json"), &probe)?;
    for (i, outcome) in probe.outcomes.iter().enumerate() {
        let traj = integrate(&op, outcome.init, &res.flow);
        let mut csv = String::from("t,x,xi,p\n");
        for (t, p) in &traj.samples {
            csv.push_str(&csv_row(&[*t, p.x, p.xi, op.symbol(p.x, p.xi)]));
        }
        write_text(&res.out.join(format!("trajectories/flow_{i:02}.csv")), &csv)?;
    }
    log_info!(
        "flow: complete = {}, {} seeds, {} incompleteness witnesses",
        probe.complete,
        probe.outcomes.len(),
        probe.witnesses.len()
    );
    Ok(())
}

fn c_pair(z: C) -> serde_json::Value {
    json!([z.re, z.im])
}

fn c_list(v: &[C]) -> serde_json::Value {
    serde_json::Value::Array(v.iter().map(|&z| c_pair(z)).collect())
}

/// Local solution basis at one side of one zero, in the same branch
/// structure the deficiency estimate uses.
fn series_object(
    op: &SturmLiouvilleOperator,
    zero_index: usize,
    side: Side,
    order: usize,
) -> CliResult<serde_json::Value> {
    let record = &op.zeros()[zero_index];
    let k = record.order_a;
    let case = CaseTag::of(record);
    let x0 = record.location;
    let numeric = |e: complab_core::FrobeniusError| Failure::Numeric(e.into());
    let hs = [10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)];

    let (lambda, body) = match case {
        CaseTag::Simple | CaseTag::DegenerateBVanishes
            if case == CaseTag::Simple || record.order_b_at_least(k - 1) =>
        {
            // Regular singular point. The indicial roots are
            // eigenvalue-independent for k = 1 and k = 2; higher k uses
            // eigenvalue zero where the roots are exact.
            let lambda = if case == CaseTag::Simple || k == 2 { C::i() } else { C::new(0.0, 0.0) };
            let ode =
                expand_operator(op, x0, side, lambda, order + k + 8).map_err(numeric)?;
            let eq = indicial_equation(&ode).map_err(numeric)?;
            let mut sols = Vec::new();
            for root in eq.roots {
                let s = frobenius_series(&ode, root, order).map_err(numeric)?;
                sols.push(json!({
                    "type": "frobenius",
                    "exponent": c_pair(s.exponent),
                    "has_log": s.has_log(),
                    "coefficients": c_list(&s.coeffs),
                    "log_partner": s.log_partner.as_ref().map(|v| c_list(v)),
                    "trust_radius": s.trust_radius(),
                    "residual_slope": s.residual_slope(&ode, &hs),
                }));
            }
            (
                lambda,
                json!({
                    "indicial_roots": [c_pair(eq.roots[0]), c_pair(eq.roots[1])],
                    "resonant_gap": eq.resonant,
                    "solutions": sols,
                }),
            )
        }
        CaseTag::DegenerateBVanishes => {
            // Irregular singular point: one power-law recessive solution
            // (eigenvalue zero; the eigenvalue enters beyond all orders).
            let lambda = C::new(0.0, 0.0);
            let ode =
                expand_operator(op, x0, side, lambda, order + k + 8).map_err(numeric)?;
            let s = irregular_solution(&ode).map_err(numeric)?;
            (
                lambda,
                json!({
                    "solutions": [{
                        "type": "irregular_power",
                        "exponent": s.exponent,
                        "order_b": s.l,
                        "coefficients": c_list(&s.v),
                        "trust_radius": s.trust_radius(1e-8),
                    }],
                }),
            )
        }
        CaseTag::DegenerateBNonzero => {
            // Oscillatory pair: a smooth solution u1 and a partner
            // u2 = u3 e^{iE} with unbounded real phase E, |u2| = |u3|.
            let lambda = C::i();
            let ode =
                expand_operator(op, x0, side, lambda, order + k + 8).map_err(numeric)?;
            let pair = oscillatory_pair(&ode).map_err(numeric)?;
            (
                lambda,
                json!({
                    "solutions": [
                        {
                            "type": "oscillatory_smooth",
                            "coefficients": c_list(&pair.u1),
                            "trust_radius": pair.trust_radius(1e-8),
                        },
                        {
                            "type": "oscillatory_partner_modulus",
                            "coefficients": c_list(&pair.u3),
                            "trust_radius": pair.trust_radius(1e-8),
                        },
                    ],
                }),
            )
        }
        CaseTag::Simple => unreachable!("simple case handled by the guarded arm"),
    };

    let mut obj = json!({
        "x0": x0,
        "side": side.label(),
        "k": k,
        "case": case,
        "lambda": [lambda.re, lambda.im],
        "series_order": order,
    });
    for (key, val) in body.as_object().expect("body is an object") {
        obj[key] = val.clone();
    }
    Ok(obj)
}

pub fn run_frobenius(cfg: &JobConfig, res: &Resolved) -> CliResult<()> {
    require_kind(cfg, "sturm", "frobenius")?;
    let op = build_operator(cfg)?;
    write_report(cfg, &res.out)?;
    let mut count = 0;
    for zi in 0..op.zeros().len() {
        for side in [Side::Right, Side::Left] {
            let obj = series_object(&op, zi, side, res.series_order)?;
            let path = res.out.join(format!("series/zero{zi}_{}.json", side.label()));
            write_json(&path, &obj)?;
            count += 1;
        }
    }
    log_info!("frobenius: wrote {count} series files for {} zeros", op.zeros().len());
    Ok(())
}

pub fn run_deficiency(cfg: &JobConfig, res: &Resolved) -> CliResult<()> {
    require_kind(cfg, "sturm", "deficiency")?;
    let op = build_operator(cfg)?;
    write_report(cfg, &res.out)?;
    let est = complab_core::deficiency::deficiency_estimate(&op)
        .map_err(|e| Failure::Numeric(e.into()))?;
    log_info!("deficiency: n+ = {}, n- = {}, esa = {}", est.n_plus, est.n_minus, est.esa);
    write_json(&res.out.join("deficiency.json"), &est)
}

/// Default geodesic seeds: one null covector known to exercise each
/// model's characteristic behaviour.
fn default_seeds(model: &LorentzModel) -> Vec<CotangentState> {
    match model.base_model() {
        LorentzModel::NormalForm { a_profile } => {
            let y = 0.1;
            let xi = -0.5;
            vec![CotangentState { x: 0.0, y, xi, eta: -xi / a_profile.eval(y) }]
        }
        LorentzModel::SimpleQuotient => {
            vec![CotangentState { x: 1.0, y: 0.0, xi: 0.0, eta: -1.0 }]
        }
        _ => vec![CotangentState { x: 1.0, y: 0.0, xi: 0.0, eta: 1.0 }],
    }
}

pub fn run_lorentz(cfg: &JobConfig, res: &Resolved) -> CliResult<()> {
    require_kind(cfg, "lorentz", "lorentz")?;
    let model = cfg.model.clone().ok_or_else(|| config_err("missing model"))?;
    write_report(cfg, &res.out)?;

    let mode = cfg.mode.unwrap_or(1);
    let identity = if matches!(model.base_model(), LorentzModel::NormalForm { .. }) {
        let chk =
            laplacian_mode_identity(&model, mode, 64).map_err(|e| Failure::Numeric(e.into()))?;
        Some(json!({
            "mode": mode,
            "coarse_err": chk.coarse_err,
            "fine_err": chk.fine_err,
            "order": chk.order,
        }))
    } else {
        None
    };

    let seeds = cfg.seeds.clone().unwrap_or_else(|| default_seeds(&model));
    let mut summaries = Vec::new();
    for (i, seed) in seeds.iter().enumerate() {
        let traj =
            geodesic_integrate(&model, *seed, &res.geo).map_err(|e| Failure::Numeric(e.into()))?;
        let mut csv = String::from("t,x,y,xi,eta,h\n");
        for s in &traj.samples {
            csv.push_str(&csv_row(&[s.t, s.state.x, s.state.y, s.state.xi, s.state.eta, s.h]));
        }
        write_text(&res.out.join(format!("trajectories/geodesic_{i:02}.csv")), &csv)?;
        summaries.push(json!({
            "init": seed,
            "status": traj.status,
            "final_time": traj.final_time,
            "escape_time": traj.escape_time,
            "relative_h_drift": traj.h_drift / traj.h_scale.max(1e-300),
            "max_growth": traj.max_growth,
        }));
    }
    write_json(
        &res.out.join("geodesics.json"),
        &json!({ "model": model.name(), "mode_identity": identity, "geodesics": summaries }),
    )?;
    log_info!("lorentz: {} geodesics integrated on {}", seeds.len(), model.name());
    Ok(())
}

pub fn run_crosscheck(cfg: &JobConfig, res: &Resolved) -> CliResult<()> {
    require_kind(cfg, "sturm", "crosscheck")?;
    let op = build_operator(cfg)?;
    let report = op.report();
    write_report(cfg, &res.out)?;

    let pipes: Vec<String> = cfg.pipelines.clone().unwrap_or_else(|| {
        vec!["classify".into(), "flow".into(), "frobenius".into(), "deficiency".into()]
    });
    let want = |name: &str| pipes.iter().any(|p| p == name);

    let mut agreement = true;

    let flow_value = if want("flow") {
        let probe = completeness_probe(&op, &res.flow, res.seed);
        write_json(&res.out.join("flow.json"), &probe)?;
        let agrees = probe.complete == report.classical;
        agreement &= agrees;
        json!({ "ran": true, "complete": probe.complete, "agrees_with_classifier": agrees })
    } else {
        json!({ "ran": false })
    };

    if want("frobenius") {
        for zi in 0..op.zeros().len() {
            for side in [Side::Right, Side::Left] {
                let obj = series_object(&op, zi, side, res.series_order)?;
                write_json(&res.out.join(format!("series/zero{zi}_{}.json", side.label())), &obj)?;
            }
        }
    }

    let deficiency_value = if want("deficiency") {
        let cc = cross_validate(&op).map_err(|e| Failure::Numeric(e.into()))?;
        let est = complab_core::deficiency::deficiency_estimate(&op)
            .map_err(|e| Failure::Numeric(e.into()))?;
        write_json(&res.out.join("deficiency.json"), &est)?;
        agreement &= cc.agree;
        json!({ "ran": true, "crosscheck": cc })
    } else {
        json!({ "ran": false })
    };

    let value = json!({
        "symbolic": { "classical": report.classical, "quantum": report.quantum },
        "flow": flow_value,
        "deficiency": deficiency_value,
        "agreement": agreement,
    });
    write_json(&res.out.join("crosscheck.json"), &value)?;
    log_info!("crosscheck: agreement = {agreement}");
    if agreement {
        Ok(())
    } else {
        Err(Failure::Numeric(anyhow::anyhow!(
            "numeric pipelines disagree with the symbolic classification"
        )))
    }
}

fn sturm_config(description: &str, op: &SturmLiouvilleOperator) -> JobConfig {
    JobConfig {
        kind: "sturm".into(),
        description: Some(description.into()),
        a: Some(CoeffSpec::from_poly(op.a())),
        b: Some(CoeffSpec::from_poly(op.b())),
        include_a4: None,
        model: None,
        mode: None,
        seeds: None,
        controls: None,
        pipelines: None,
        out: None,
    }
}

fn lorentz_config(description: &str, model: LorentzModel) -> JobConfig {
    JobConfig {
        kind: "lorentz".into(),
        description: Some(description.into()),
        a: None,
        b: None,
        include_a4: None,
        model: Some(model),
        mode: Some(1),
        seeds: None,
        controls: None,
        pipelines: None,
        out: None,
    }
}

/// Writes the nine built-in example configurations.
pub fn run_gallery(out: &Path) -> CliResult<Vec<PathBuf>> {
    use complab_core::gallery;
    let entries: Vec<(&str, JobConfig)> = vec![
        (
            "e1",
            sturm_config(
                "a = sin(2 pi x) with simple zeros, b = 1: classically incomplete and not \
                 essentially self-adjoint",
                &gallery::e1(),
            ),
        ),
        (
            "e2",
            sturm_config(
                "a = (1 - cos(2 pi x))/2 with one order-2 zero, b = 0: complete and \
                 essentially self-adjoint",
                &gallery::e2(),
            ),
        ),
        (
            "e3",
            sturm_config(
                "a = (1 - cos(2 pi x))/2, b = -2 pi nonvanishing at the zero: incomplete \
                 and not essentially self-adjoint",
                &gallery::e3(),
            ),
        ),
        (
            "e4",
            sturm_config(
                "a = (1 - cos(2 pi x))/2, b = sin(2 pi x) vanishing at the zero: complete \
                 and essentially self-adjoint",
                &gallery::e4(),
            ),
        ),
        (
            "e5",
            sturm_config(
                "a = ((1 - cos(2 pi x))/2)^2 with an order-4 zero, b = sin(2 pi x): \
                 irregular singular point, complete and essentially self-adjoint",
                &gallery::e5(),
            ),
        ),
        (
            "e6",
            sturm_config(
                "a = 1 elliptic, b = cos(2 pi x): complete and essentially self-adjoint",
                &gallery::e6(),
            ),
        ),
        (
            "clifton_pohl",
            lorentz_config(
                "plane minus the origin with g = 2 dx dy / (x^2 + y^2): null-incomplete \
                 model surface",
                gallery::clifton_pohl(),
            ),
        ),
        (
            "normal_form",
            lorentz_config(
                "torus with g = dx (dy - a(y) dx), a = (1 - cos(2 pi y))/(2 pi^2): \
                 null-incomplete, wave operator not essentially self-adjoint",
                gallery::normal_form_quadratic(),
            ),
        ),
        (
            "simple_quotient",
            lorentz_config(
                "half-plane x > 0 with g = 2 dx dy: flat incomplete quotient model",
                gallery::simple_quotient(),
            ),
        ),
    ];
    let mut written = Vec::new();
    for (name, cfg) in &entries {
        let path = out.join(format!("{name}.json"));
        write_json(&path, cfg)?;
        written.push(path);
    }
    log_info!("gallery: wrote {} configs to {}", written.len(), out.display());
    Ok(written)
}
