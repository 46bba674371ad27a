//! Null geodesic flow on model Lorentzian surfaces, and its reduction to
//! the circle operators handled by the rest of the crate.
//!
//! Three base models are provided, together with conformal rescalings:
//!
//! * `CliftonPohl`: dual metric Hamiltonian `h = (x^2 + y^2) xi eta` on the
//!   punctured plane (descends to a compact quotient under the homothety
//!   `(x, y) -> (2x, 2y)`); its axis null geodesics escape in finite time.
//! * `NormalForm { a_profile }`: `h = -eta (a(y) eta + xi)` on the torus;
//!   separating in the periodic `x` variable yields exactly the circle
//!   operators with `b = -2 pi m`, tying geodesic incompleteness to the
//!   degenerate zeros of `a_profile`.
//! * `SimpleQuotient`: flat `h = xi eta` on the half plane `x > 0`;
//!   geodesics reach the deleted boundary in finite time.
//!
//! `ConformalWrap` multiplies `h` by a positive factor `e^{-phi}`. On the
//! null set, the rescaled Hamiltonian field is a positive multiple of the
//! original one, so null geodesics keep the same geometric image and only
//! their parametrisation changes; `conformal_null_check` verifies this
//! numerically.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::classify::{ClassifyError, CompletenessReport, SturmLiouvilleOperator};
use crate::coeff::TrigPoly;
use crate::flow::{self, FlowStatus, GENUINE_BLOWUP_RATIO};
use crate::rk::AdaptiveRk;

#[derive(Debug, thiserror::Error)]
pub enum LorentzError {
    #[error("operation requires the {expected} model, got {got}")]
    WrongVariant { expected: &'static str, got: String },
    #[error("separated operator is invalid: {0}")]
    Reduce(#[from] ClassifyError),
    #[error("initial state is outside the model domain: {0}")]
    OutsideDomain(String),
}

/// Point of the cotangent bundle of the surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CotangentState {
    pub x: f64,
    pub y: f64,
    pub xi: f64,
    pub eta: f64,
}

/// Conformal factor `e^{-phi}` multiplying the dual Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConformalFactor {
    /// Constant `phi`; rescales time uniformly.
    Const { value: f64 },
    /// `phi = amplitude * sin(theta)` where `theta` is the polar angle for
    /// planar models and `2 pi x` for the torus model.
    AngularSine { amplitude: f64 },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// Punctured/half plane; angular coordinate is `atan2(y, x)`.
    Plane,
    /// Torus; angular coordinate is `2 pi x`.
    Torus,
}

impl ConformalFactor {
    /// `(phi, d phi/dx, d phi/dy)` at a point of the given chart.
    fn phi_and_grad(&self, chart: Chart, x: f64, y: f64) -> (f64, f64, f64) {
        match *self {
            ConformalFactor::Const { value } => (value, 0.0, 0.0),
            ConformalFactor::AngularSine { amplitude } => match chart {
                Chart::Plane => {
                    let r2 = (x * x + y * y).max(1e-300);
                    let theta = y.atan2(x);
                    let c = theta.cos();
                    (
                        amplitude * theta.sin(),
                        -amplitude * c * y / r2,
                        amplitude * c * x / r2,
                    )
                }
                Chart::Torus => {
                    let w = std::f64::consts::TAU * x;
                    (
                        amplitude * w.sin(),
                        amplitude * std::f64::consts::TAU * w.cos(),
                        0.0,
                    )
                }
            },
        }
    }
}

/// Model Lorentzian surface, described through the dual metric Hamiltonian
/// on the cotangent bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LorentzModel {
    CliftonPohl,
    NormalForm { a_profile: TrigPoly },
    SimpleQuotient,
    ConformalWrap {
        base: Box<LorentzModel>,
        factor: ConformalFactor,
    },
}

impl LorentzModel {
    pub fn name(&self) -> &'static str {
        match self {
            LorentzModel::CliftonPohl => "clifton_pohl",
            LorentzModel::NormalForm { .. } => "normal_form",
            LorentzModel::SimpleQuotient => "simple_quotient",
            LorentzModel::ConformalWrap { .. } => "conformal_wrap",
        }
    }

    fn chart(&self) -> Chart {
        match self {
            LorentzModel::NormalForm { .. } => Chart::Torus,
            LorentzModel::ConformalWrap { base, .. } => base.chart(),
            _ => Chart::Plane,
        }
    }

    /// Innermost unwrapped model.
    pub fn base_model(&self) -> &LorentzModel {
        match self {
            LorentzModel::ConformalWrap { base, .. } => base.base_model(),
            other => other,
        }
    }

    /// Dual metric Hamiltonian (the symbol of the wave operator).
    pub fn dual_hamiltonian(&self, s: &CotangentState) -> f64 {
        self.partials(s)[0]
    }

    /// `[h, dh/dx, dh/dy, dh/dxi, dh/deta]`.
    pub fn partials(&self, s: &CotangentState) -> [f64; 5] {
        match self {
            LorentzModel::CliftonPohl => {
                let r2 = s.x * s.x + s.y * s.y;
                let m = s.xi * s.eta;
                [r2 * m, 2.0 * s.x * m, 2.0 * s.y * m, r2 * s.eta, r2 * s.xi]
            }
            LorentzModel::NormalForm { a_profile } => {
                let a = a_profile.eval(s.y);
                let da = a_profile.derivative().eval(s.y);
                [
                    -s.eta * (a * s.eta + s.xi),
                    0.0,
                    -da * s.eta * s.eta,
                    -s.eta,
                    -2.0 * a * s.eta - s.xi,
                ]
            }
            LorentzModel::SimpleQuotient => [s.xi * s.eta, 0.0, 0.0, s.eta, s.xi],
            LorentzModel::ConformalWrap { base, factor } => {
                let p = base.partials(s);
                let (phi, px, py) = factor.phi_and_grad(base.chart(), s.x, s.y);
                let g = (-phi).exp();
                [
                    g * p[0],
                    g * (p[1] - px * p[0]),
                    g * (p[2] - py * p[0]),
                    g * p[3],
                    g * p[4],
                ]
            }
        }
    }

    /// Hamiltonian vector field `(dx, dy, dxi, deta)/dt`.
    pub fn field(&self, s: &CotangentState) -> [f64; 4] {
        let p = self.partials(s);
        [p[3], p[4], -p[1], -p[2]]
    }

    /// Scalar whose ladder crossings witness a singular escape:
    /// covector/position growth for the plane and torus models, boundary
    /// approach `1/x` for the half-plane quotient.
    fn growth_measure(&self, s: &CotangentState) -> f64 {
        match self.base_model() {
            LorentzModel::CliftonPohl => s
                .x
                .abs()
                .max(s.y.abs())
                .max(s.xi.abs())
                .max(s.eta.abs()),
            LorentzModel::NormalForm { .. } => s.xi.abs().max(s.eta.abs()),
            LorentzModel::SimpleQuotient => 1.0 / s.x.max(1e-300),
            LorentzModel::ConformalWrap { .. } => unreachable!("base_model unwraps"),
        }
    }

    fn reaches_boundary(&self) -> bool {
        matches!(self.base_model(), LorentzModel::SimpleQuotient)
    }
}

/// Controls for the geodesic integrator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    /// Hard cap on the growth measure.
    pub cap: f64,
    /// Escalating caps feeding the escape extrapolation.
    pub cap_ladder: Vec<f64>,
    pub max_steps: usize,
    pub store_target: usize,
}

impl Default for GeodesicControls {
    fn default() -> Self {
        GeodesicControls {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            t_max: 10.0,
            cap: 1e6,
            cap_ladder: vec![1e3, 1e4, 1e5, 1e6],
            max_steps: 2_000_000,
            store_target: 2048,
        }
    }
}

/// One stored sample of a geodesic.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GeodesicSample {
    pub t: f64,
    pub state: CotangentState,
    /// Dual Hamiltonian at the sample (conserved along exact geodesics).
    pub h: f64,
}

/// Integrated geodesic with conservation and escape diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicTrajectory {
    pub samples: Vec<GeodesicSample>,
    pub status: FlowStatus,
    pub final_time: f64,
    /// Maximum absolute drift of the Hamiltonian from its initial value.
    pub h_drift: f64,
    /// Largest magnitude of the individual Hamiltonian terms encountered;
    /// `h_drift / h_scale` is the relative conservation error.
    pub h_scale: f64,
    pub max_growth: f64,
    pub cap_crossings: Vec<(f64, f64)>,
    pub cauchy_ratio: Option<f64>,
    pub escape_time: Option<(f64, f64)>,
}

/// Integrates the geodesic flow from `init` until the horizon, the growth
/// cap, or step collapse.
pub fn geodesic_integrate(
    model: &LorentzModel,
    init: CotangentState,
    controls: &GeodesicControls,
) -> Result<GeodesicTrajectory, LorentzError> {
    if model.reaches_boundary() && init.x <= 0.0 {
        return Err(LorentzError::OutsideDomain(format!(
            "half-plane model requires x > 0, got x = {}",
            init.x
        )));
    }
    let f = |y: &[f64; 4]| {
        let s = CotangentState {
            x: y[0],
            y: y[1],
            xi: y[2],
            eta: y[3],
        };
        model.field(&s)
    };
    let rk = AdaptiveRk::<4>::new(controls.rel_tol, controls.abs_tol);

    let mut y = [init.x, init.y, init.xi, init.eta];
    let mut t = 0.0;
    let state_of = |y: &[f64; 4]| CotangentState {
        x: y[0],
        y: y[1],
        xi: y[2],
        eta: y[3],
    };
    let h0 = model.dual_hamiltonian(&init);
    let mut h_drift = 0.0_f64;
    let mut h_scale = term_scale(model, &init).max(h0.abs()).max(1e-300);
    let mut max_growth = model.growth_measure(&init);

    let mut samples = vec![GeodesicSample {
        t: 0.0,
        state: init,
        h: h0,
    }];
    let mut stride = 1usize;
    let mut since_stored = 0usize;

    let g0 = model.growth_measure(&init);
    let mut ladder: Vec<f64> = controls
        .cap_ladder
        .iter()
        .copied()
        .filter(|&c| c > g0 * 1.000001 && c <= controls.cap)
        .collect();
    ladder.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next_cap = 0usize;
    let mut crossings: Vec<(f64, f64)> = Vec::new();

    let mut dt = rk.initial_dt(&f, &y).min(controls.t_max / 10.0);
    let mut status = FlowStatus::CompletedHorizon;

    for _ in 0..controls.max_steps {
        if t >= controls.t_max {
            break;
        }
        if t + dt > controls.t_max {
            dt = controls.t_max - t;
        }
        // Near the deleted boundary the dynamics can be exactly linear, so
        // the error estimator alone never shortens the step; approach the
        // boundary geometrically instead of overshooting it.
        if model.reaches_boundary() {
            let v = f(&y);
            if v[0] < 0.0 {
                let limit = 0.4 * y[0] / (-v[0]);
                if dt > limit {
                    dt = limit;
                }
                if dt < 1e-15 {
                    status = FlowStatus::StepUnderflow;
                    break;
                }
            }
        }
        let step = match rk.step(&f, &y, dt) {
            Some(s) => s,
            None => {
                status = FlowStatus::StepUnderflow;
                break;
            }
        };
        let g_prev = model.growth_measure(&state_of(&y)).max(1e-300);
        let y_new = step.y;
        let g_now = model.growth_measure(&state_of(&y_new));
        while next_cap < ladder.len() && g_now >= ladder[next_cap] {
            let cap = ladder[next_cap];
            let frac = ((cap / g_prev).ln() / (g_now / g_prev).ln()).clamp(0.0, 1.0);
            crossings.push((cap, t + step.dt_used * frac));
            next_cap += 1;
        }

        t += step.dt_used;
        y = y_new;
        dt = step.dt_next;

        let s_now = state_of(&y);
        let h_now = model.dual_hamiltonian(&s_now);
        h_drift = h_drift.max((h_now - h0).abs());
        h_scale = h_scale.max(term_scale(model, &s_now));
        max_growth = max_growth.max(g_now);

        since_stored += 1;
        if since_stored >= stride {
            samples.push(GeodesicSample {
                t,
                state: s_now,
                h: h_now,
            });
            since_stored = 0;
            if samples.len() >= 2 * controls.store_target {
                let mut kept = Vec::with_capacity(samples.len() / 2 + 1);
                for (i, s) in samples.iter().enumerate() {
                    if i % 2 == 0 {
                        kept.push(*s);
                    }
                }
                samples = kept;
                stride *= 2;
            }
        }

        if g_now >= controls.cap {
            status = FlowStatus::Blowup;
            break;
        }
    }

    if samples.last().map(|s| s.t) != Some(t) {
        let s_now = state_of(&y);
        samples.push(GeodesicSample {
            t,
            state: s_now,
            h: model.dual_hamiltonian(&s_now),
        });
    }

    let cauchy_ratio = flow::increment_ratio(&crossings);
    let escape_time = flow::extrapolate_escape(&crossings, t, status);

    Ok(GeodesicTrajectory {
        samples,
        status,
        final_time: t,
        h_drift,
        h_scale,
        max_growth,
        cap_crossings: crossings,
        cauchy_ratio,
        escape_time,
    })
}

/// Magnitude of the individual terms of `h`, for relative drift reporting.
fn term_scale(model: &LorentzModel, s: &CotangentState) -> f64 {
    match model {
        LorentzModel::CliftonPohl => ((s.x * s.x + s.y * s.y) * s.xi * s.eta).abs(),
        LorentzModel::NormalForm { a_profile } => {
            (a_profile.eval(s.y) * s.eta * s.eta).abs() + (s.xi * s.eta).abs()
        }
        LorentzModel::SimpleQuotient => (s.xi * s.eta).abs(),
        LorentzModel::ConformalWrap { base, factor } => {
            let (phi, _, _) = factor.phi_and_grad(base.chart(), s.x, s.y);
            (-phi).exp() * term_scale(base, s)
        }
    }
}

/// Escape-time estimate for a geodesic that leaves the surface in finite
/// time, by the same Cauchy-ladder criterion as the circle flow.
pub fn geodesic_escape_time(
    model: &LorentzModel,
    init: CotangentState,
    controls: &GeodesicControls,
) -> Result<(f64, f64), LorentzError> {
    let traj = geodesic_integrate(model, init, controls)?;
    match traj.status {
        FlowStatus::CompletedHorizon => Err(LorentzError::OutsideDomain(format!(
            "no escape: geodesic reached t = {} with growth {:.3e}",
            traj.final_time, traj.max_growth
        ))),
        FlowStatus::StepUnderflow => {
            Ok(traj.escape_time.unwrap_or((traj.final_time, 1e-9)))
        }
        FlowStatus::Blowup => {
            let ratio = traj.cauchy_ratio.unwrap_or(1.0);
            if ratio > GENUINE_BLOWUP_RATIO {
                return Err(LorentzError::OutsideDomain(format!(
                    "cap crossings are not Cauchy (ratio {ratio:.3})"
                )));
            }
            traj.escape_time
                .ok_or_else(|| LorentzError::OutsideDomain("too few cap crossings".into()))
        }
    }
}

/// Separates the torus wave operator on the Fourier mode `e^{2 pi i m x}`,
/// producing the circle operator with `a = a_profile` and `b = -2 pi m`.
pub fn separation_reduce(
    model: &LorentzModel,
    mode: i32,
) -> Result<SturmLiouvilleOperator, LorentzError> {
    match model.base_model() {
        LorentzModel::NormalForm { a_profile } => {
            let b = TrigPoly::constant(-std::f64::consts::TAU * mode as f64);
            Ok(SturmLiouvilleOperator::new(a_profile.clone(), b)?)
        }
        other => Err(LorentzError::WrongVariant {
            expected: "normal_form",
            got: other.name().to_string(),
        }),
    }
}

/// Completeness / essential self-adjointness verdict for a model surface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LorentzVerdict {
    pub complete: bool,
    pub esa: bool,
    pub reason: String,
    /// Report of the separated circle operator (torus model only).
    pub reduced: Option<CompletenessReport>,
}

/// Classifies a model surface, reducing the torus model to the circle.
pub fn lorentz_esa_verdict(model: &LorentzModel) -> Result<LorentzVerdict, LorentzError> {
    match model.base_model() {
        LorentzModel::CliftonPohl => Ok(LorentzVerdict {
            complete: false,
            esa: false,
            reason: "axis null geodesics satisfy dx/dt = x^2 and escape in finite \
                     time; the wave operator is not essentially self-adjoint"
                .into(),
            reduced: None,
        }),
        LorentzModel::SimpleQuotient => Ok(LorentzVerdict {
            complete: false,
            esa: false,
            reason: "null geodesics reach the deleted boundary x = 0 in finite time; \
                     the wave operator is not essentially self-adjoint"
                .into(),
            reduced: None,
        }),
        LorentzModel::NormalForm { .. } => {
            let op = separation_reduce(model, 1)?;
            if op.is_elliptic() {
                Ok(LorentzVerdict {
                    complete: true,
                    esa: true,
                    reason: "the profile never vanishes, so every separated operator \
                             is elliptic: geodesically complete and essentially \
                             self-adjoint"
                        .into(),
                    reduced: Some(op.report()),
                })
            } else {
                let report = op.report();
                Ok(LorentzVerdict {
                    complete: report.classical,
                    esa: report.quantum,
                    reason: "verdict of the separated mode-1 circle operator, whose \
                             drift coefficient b = -2 pi is nonzero at every zero of \
                             the profile"
                        .into(),
                    reduced: Some(report),
                })
            }
        }
        LorentzModel::ConformalWrap { .. } => unreachable!("base_model unwraps"),
    }
}

/// Measures how far the wrapped model's null geodesic strays from the base
/// model's as a curve in the `(x, y)` plane: both are integrated from
/// `init`, resampled uniformly by arclength over their common window, and
/// compared in the symmetric Hausdorff distance.
pub fn conformal_null_check(
    model: &LorentzModel,
    init: CotangentState,
    controls: &GeodesicControls,
) -> Result<f64, LorentzError> {
    let (base, _) = match model {
        LorentzModel::ConformalWrap { base, factor } => (base.as_ref(), factor),
        other => {
            return Err(LorentzError::WrongVariant {
                expected: "conformal_wrap",
                got: other.name().to_string(),
            })
        }
    };
    let h = model.dual_hamiltonian(&init);
    let scale = term_scale(model, &init).max(1e-300);
    if h.abs() > 1e-9 * scale {
        return Err(LorentzError::OutsideDomain(format!(
            "conformal comparison requires a null initial covector, got h = {h:.3e}"
        )));
    }
    // Dense sample storage keeps the stored polylines close to the true
    // curve: the dominant comparison error is the chord sagitta
    // ~ curvature * spacing^2 / 8 of whichever polyline serves as the
    // segment set.
    let mut fine = controls.clone();
    fine.store_target = fine.store_target.max(8192);
    let t_base = geodesic_integrate(base, init, &fine)?;
    let t_wrap = geodesic_integrate(model, init, &fine)?;
    let pts_base = projection(&t_base.samples);
    let pts_wrap = projection(&t_wrap.samples);
    // The wrapped flow traverses the same curve at a different speed, so
    // equal integration horizons cover different extents; compare only the
    // arclength window both runs actually cover.
    let window = polyline_length(&pts_base)
        .min(polyline_length(&pts_wrap))
        .min(20.0);
    let smp_base = arclength_resample(&pts_base, window, 512);
    let smp_wrap = arclength_resample(&pts_wrap, window, 512);
    Ok(hausdorff(&smp_base, &pts_wrap).max(hausdorff(&smp_wrap, &pts_base)))
}

fn projection(samples: &[GeodesicSample]) -> Vec<(f64, f64)> {
    samples.iter().map(|s| (s.state.x, s.state.y)).collect()
}

fn polyline_length(pts: &[(f64, f64)]) -> f64 {
    pts.windows(2)
        .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
        .sum()
}

/// Resamples a polyline uniformly by arclength over `[0, window]`.
fn arclength_resample(pts: &[(f64, f64)], window: f64, n: usize) -> Vec<(f64, f64)> {
    let mut cum = vec![0.0_f64];
    for w in pts.windows(2) {
        let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        cum.push(cum.last().unwrap() + d);
    }
    if window <= 0.0 || pts.len() < 2 {
        return vec![pts[0]; n];
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    for i in 0..n {
        let target = window * i as f64 / (n - 1) as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let d = (cum[seg + 1] - cum[seg]).max(1e-300);
        let u = ((target - cum[seg]) / d).clamp(0.0, 1.0);
        out.push((
            pts[seg].0 + u * (pts[seg + 1].0 - pts[seg].0),
            pts[seg].1 + u * (pts[seg + 1].1 - pts[seg].1),
        ));
    }
    out
}

/// Distance from a point to a line segment.
fn point_segment_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let u = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cx, cy) = (a.0 + u * dx, a.1 + u * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

/// One-sided Hausdorff distance: the largest distance from a vertex of
/// `a` to the polyline `b`, measured point-to-segment so that two
/// samplings of the same curve with offset grids score (near) zero.
fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter()
        .map(|&pt| {
            b.windows(2)
                .map(|w| point_segment_dist(pt, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0_f64, f64::max)
}

/// Result of the finite-difference separation identity check.
#[derive(Clone, Copy, Debug)]
pub struct ModeIdentityCheck {
    pub coarse_err: f64,
    pub fine_err: f64,
    /// Measured convergence order `log2(coarse/fine)`.
    pub order: f64,
}

/// Verifies, on grids `n` and `2n`, that the discretised torus wave
/// operator applied to `e^{2 pi i m x} v(y)` matches the analytic
/// separated form `e^{2 pi i m x} (a v'' + a' v' + 2 pi i m v')` to second
/// order. The test profile `v` is a periodic Gaussian bump.
pub fn laplacian_mode_identity(
    model: &LorentzModel,
    mode: i32,
    n: usize,
) -> Result<ModeIdentityCheck, LorentzError> {
    let a_profile = match model.base_model() {
        LorentzModel::NormalForm { a_profile } => a_profile.clone(),
        other => {
            return Err(LorentzError::WrongVariant {
                expected: "normal_form",
                got: other.name().to_string(),
            })
        }
    };
    let coarse_err = mode_identity_error(&a_profile, mode, n);
    let fine_err = mode_identity_error(&a_profile, mode, 2 * n);
    Ok(ModeIdentityCheck {
        coarse_err,
        fine_err,
        order: (coarse_err / fine_err).log2(),
    })
}

fn mode_identity_error(a_profile: &TrigPoly, mode: i32, n: usize) -> f64 {
    let tau = std::f64::consts::TAU;
    let m = mode as f64;
    let dx = 1.0 / n as f64;
    let sigma = 0.06_f64;
    let v = |y: f64| (-((y - 0.5) * (y - 0.5)) / (2.0 * sigma * sigma)).exp();
    let dv = |y: f64| -(y - 0.5) / (sigma * sigma) * v(y);
    let ddv = |y: f64| ((y - 0.5) * (y - 0.5) / sigma.powi(4) - 1.0 / (sigma * sigma)) * v(y);
    let da = a_profile.derivative();

    // u[i][j] = e^{2 pi i m x_i} v(y_j) on the n x n torus grid.
    let phase: Vec<C> = (0..n)
        .map(|i| C::from_polar(1.0, tau * m * i as f64 * dx))
        .collect();
    let vv: Vec<f64> = (0..n).map(|j| v(j as f64 * dx)).collect();
    // Half-point profile values for the conservative stencil.
    let a_half: Vec<f64> = (0..n)
        .map(|j| a_profile.eval((j as f64 + 0.5) * dx))
        .collect();

    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..n {
        let ip = (i + 1) % n;
        let im = (i + n - 1) % n;
        for j in 0..n {
            let jp = (j + 1) % n;
            let jm = (j + n - 1) % n;
            let y = j as f64 * dx;
            // d_y (a d_y u): conservative half-point stencil.
            let diff_y = (a_half[j] * (vv[jp] - vv[j]) - a_half[jm] * (vv[j] - vv[jm]))
                / (dx * dx);
            let term_y = phase[i] * diff_y;
            // d_x d_y u: centred cross stencil.
            let cross = (phase[ip] * vv[jp] - phase[ip] * vv[jm] - phase[im] * vv[jp]
                + phase[im] * vv[jm])
                / (4.0 * dx * dx);
            let fd = term_y + cross;
            let analytic = phase[i]
                * (C::new(
                    a_profile.eval(y) * ddv(y) + da.eval(y) * dv(y),
                    tau * m * dv(y),
                ));
            worst = worst.max((fd - analytic).norm());
            scale = scale.max(analytic.norm());
        }
    }
    worst / scale.max(1e-300)
}

/// Homothety of the punctured plane: `(x, y, xi, eta) -> (L x, L y, xi/L,
/// eta/L)` preserves the Clifton-Pohl Hamiltonian, which is why the model
/// descends to a compact quotient.
pub fn plane_homothety(s: &CotangentState, lambda: f64) -> CotangentState {
    CotangentState {
        x: lambda * s.x,
        y: lambda * s.y,
        xi: s.xi / lambda,
        eta: s.eta / lambda,
    }
}
