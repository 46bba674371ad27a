//! Hamiltonian flow of the principal symbol `p(x, xi) = -a(x) xi^2 + b(x) xi`
//! on the cotangent bundle of the circle.
//!
//! Equations of motion:
//! `dx/dt = dp/dxi = -2 a xi + b`,  `dxi/dt = -dp/dx = a' xi^2 - b' xi`.
//!
//! Completeness is probed numerically: a trajectory that crosses an
//! escalating ladder of covector caps is extrapolated to a finite escape
//! time only when its cap-crossing times form a Cauchy sequence (power-law
//! blowups give decade-crossing increments that shrink geometrically, ratio
//! `10^{-1/k}` for a pole of order `k`; trajectories that merely grow
//! exponentially while approaching a degenerate zero cross each decade in
//! constant time and are recognised as complete).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::SturmLiouvilleOperator;
use crate::coeff::TrigPoly;
use crate::rk::AdaptiveRk;

/// Cap-crossing increment ratio below which a blowup extrapolation is
/// accepted as genuine (see the module notes: power laws stay below
/// `10^{-1/12} ~ 0.825`, exponential growth sits at 1).
pub const GENUINE_BLOWUP_RATIO: f64 = 0.9;

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("no finite-time blowup detected: {detail}")]
    NoBlowupDetected { detail: String },
    #[error("graph branch xi = b/a is undefined where a vanishes (x = {x})")]
    DivisionAtZero { x: f64 },
}

/// Point of the cotangent bundle of the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub xi: f64,
}

/// Termination status of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    /// Reached the requested time horizon.
    CompletedHorizon,
    /// Hit the covector cap.
    Blowup,
    /// The adaptive step collapsed (treated as blowup evidence).
    StepUnderflow,
}

/// Integration controls.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Time horizon.
    pub t_max: f64,
    /// Hard covector cap terminating the trajectory.
    pub xi_cap: f64,
    /// Escalating caps whose crossing times feed the escape extrapolation.
    pub cap_ladder: Vec<f64>,
    pub max_steps: usize,
    /// Approximate number of retained samples.
    pub store_target: usize,
}

impl Default for FlowControls {
    fn default() -> Self {
        FlowControls {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            t_max: 1e3,
            xi_cap: 1e6,
            cap_ladder: vec![1e3, 1e4, 1e5, 1e6],
            max_steps: 5_000_000,
            store_target: 2048,
        }
    }
}

/// Integrated trajectory with conservation and blowup diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    /// Decimated `(t, state)` samples.
    pub samples: Vec<(f64, PhasePoint)>,
    pub status: FlowStatus,
    pub final_time: f64,
    pub max_abs_xi: f64,
    /// Maximum drift of the symbol along the trajectory, relative to the
    /// larger of the initial symbol value and the symbol term scale.
    pub p_drift: f64,
    /// `(cap, crossing time)` for each ladder cap crossed.
    pub cap_crossings: Vec<(f64, f64)>,
    /// Ratio of the last two cap-crossing increments.
    pub cauchy_ratio: Option<f64>,
    /// `(estimate, uncertainty)` for the escape time, when the crossings
    /// form a Cauchy sequence.
    pub escape_time: Option<(f64, f64)>,
}

/// Right-hand side of the Hamiltonian system at one point.
pub fn vector_field(op: &SturmLiouvilleOperator, p: &PhasePoint) -> (f64, f64) {
    let a = op.a().eval(p.x);
    let b = op.b().eval(p.x);
    let da = op.a().derivative().eval(p.x);
    let db = op.b().derivative().eval(p.x);
    (-2.0 * a * p.xi + b, da * p.xi * p.xi - db * p.xi)
}

struct FieldEval {
    a: TrigPoly,
    b: TrigPoly,
    da: TrigPoly,
    db: TrigPoly,
}

impl FieldEval {
    fn new(op: &SturmLiouvilleOperator) -> Self {
        FieldEval {
            a: op.a().clone(),
            b: op.b().clone(),
            da: op.a().derivative(),
            db: op.b().derivative(),
        }
    }

    fn rhs(&self, y: &[f64; 2]) -> [f64; 2] {
        let a = self.a.eval(y[0]);
        let b = self.b.eval(y[0]);
        let da = self.da.eval(y[0]);
        let db = self.db.eval(y[0]);
        [
            -2.0 * a * y[1] + b,
            da * y[1] * y[1] - db * y[1],
        ]
    }

    fn symbol(&self, y: &[f64; 2]) -> f64 {
        -self.a.eval(y[0]) * y[1] * y[1] + self.b.eval(y[0]) * y[1]
    }

    fn symbol_scale(&self, y: &[f64; 2]) -> f64 {
        (self.a.eval(y[0]) * y[1] * y[1]).abs() + (self.b.eval(y[0]) * y[1]).abs()
    }
}

/// Integrates the Hamiltonian flow from `init` until the horizon, the
/// covector cap, or step collapse.
pub fn integrate(
    op: &SturmLiouvilleOperator,
    init: PhasePoint,
    controls: &FlowControls,
) -> Trajectory {
    let field = FieldEval::new(op);
    let f = |y: &[f64; 2]| field.rhs(y);
    let rk = AdaptiveRk::<2>::new(controls.rel_tol, controls.abs_tol);

    let mut y = [init.x, init.xi];
    let mut t = 0.0;
    let p0 = field.symbol(&y);
    let mut scale = field.symbol_scale(&y).max(p0.abs()).max(1e-300);
    let mut drift = 0.0_f64;
    let mut max_abs_xi = init.xi.abs();

    let mut samples: Vec<(f64, PhasePoint)> = vec![(0.0, init)];
    let mut stride = 1usize;
    let mut since_stored = 0usize;

    let mut crossings: Vec<(f64, f64)> = Vec::new();
    let mut ladder: Vec<f64> = controls
        .cap_ladder
        .iter()
        .copied()
        .filter(|&c| c > init.xi.abs() * 1.000001 && c <= controls.xi_cap)
        .collect();
    ladder.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut next_cap = 0usize;

    let mut dt = rk.initial_dt(&f, &y).min(controls.t_max / 10.0);
    let mut status = FlowStatus::CompletedHorizon;

    for _ in 0..controls.max_steps {
        if t >= controls.t_max {
            break;
        }
        if t + dt > controls.t_max {
            dt = controls.t_max - t;
        }
        let step = match rk.step(&f, &y, dt) {
            Some(s) => s,
            None => {
                status = FlowStatus::StepUnderflow;
                break;
            }
        };
        let t_new = t + step.dt_used;
        let y_new = step.y;

        // Ladder crossings, interpolated log-linearly in |xi|.
        let xi_prev = y[1].abs().max(1e-300);
        let xi_now = y_new[1].abs();
        while next_cap < ladder.len() && xi_now >= ladder[next_cap] {
            let cap = ladder[next_cap];
            let frac = ((cap / xi_prev).ln() / (xi_now / xi_prev).ln()).clamp(0.0, 1.0);
            crossings.push((cap, t + step.dt_used * frac));
            next_cap += 1;
        }

        t = t_new;
        y = y_new;
        dt = step.dt_next;

        max_abs_xi = max_abs_xi.max(y[1].abs());
        scale = scale.max(field.symbol_scale(&y));
        drift = drift.max((field.symbol(&y) - p0).abs());

        since_stored += 1;
        if since_stored >= stride {
            samples.push((t, PhasePoint { x: y[0], xi: y[1] }));
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

        if y[1].abs() >= controls.xi_cap {
            status = FlowStatus::Blowup;
            break;
        }
    }

    if samples.last().map(|s| s.0) != Some(t) {
        samples.push((t, PhasePoint { x: y[0], xi: y[1] }));
    }

    let cauchy_ratio = increment_ratio(&crossings);
    let escape_time = extrapolate_escape(&crossings, t, status);

    Trajectory {
        samples,
        status,
        final_time: t,
        max_abs_xi,
        p_drift: drift / scale,
        cap_crossings: crossings,
        cauchy_ratio,
        escape_time,
    }
}

pub(crate) fn increment_ratio(crossings: &[(f64, f64)]) -> Option<f64> {
    if crossings.len() < 3 {
        return None;
    }
    let n = crossings.len();
    let d1 = crossings[n - 2].1 - crossings[n - 3].1;
    let d2 = crossings[n - 1].1 - crossings[n - 2].1;
    if d1 <= 0.0 {
        return None;
    }
    Some(d2 / d1)
}

pub(crate) fn extrapolate_escape(
    crossings: &[(f64, f64)],
    final_time: f64,
    status: FlowStatus,
) -> Option<(f64, f64)> {
    if status == FlowStatus::CompletedHorizon {
        return None;
    }
    let n = crossings.len();
    if n < 3 {
        // Step collapse right at a singular arrival may leave too few
        // crossings; the stopping time itself is then the best estimate.
        if status == FlowStatus::StepUnderflow {
            return Some((final_time, final_time.abs() * 1e-6 + 1e-12));
        }
        return None;
    }
    let d1 = crossings[n - 2].1 - crossings[n - 3].1;
    let d2 = crossings[n - 1].1 - crossings[n - 2].1;
    if d1 <= 0.0 || d2 <= 0.0 {
        return None;
    }
    let rho = (d2 / d1).clamp(0.0, 0.95);
    let t_last = crossings[n - 1].1;
    let estimate = t_last + d2 * rho / (1.0 - rho);
    // Compare with the extrapolation dropping the last crossing.
    let prev_estimate = if n >= 4 {
        let d0 = crossings[n - 3].1 - crossings[n - 4].1;
        if d0 > 0.0 {
            let rho_p = (d1 / d0).clamp(0.0, 0.95);
            crossings[n - 2].1 + d1 * rho_p / (1.0 - rho_p)
        } else {
            estimate + d2
        }
    } else {
        estimate + d2
    };
    let uncertainty = (estimate - prev_estimate).abs().max(1e-14 * t_last.abs());
    Some((estimate, uncertainty))
}

/// Null branch selector at a point where `a != 0`: the symbol factors as
/// `p = xi (b - a xi)`, so the null set is `xi = 0` union the graph
/// `xi = b/a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullBranch {
    Zero,
    Graph,
}

/// Initial covector on the requested null branch over `x0`.
pub fn null_branch_init(
    op: &SturmLiouvilleOperator,
    x0: f64,
    branch: NullBranch,
) -> Result<PhasePoint, FlowError> {
    match branch {
        NullBranch::Zero => Ok(PhasePoint { x: x0, xi: 0.0 }),
        NullBranch::Graph => {
            let a = op.a().eval(x0);
            if a.abs() <= 1e-12 * op.a().coeff_scale() {
                return Err(FlowError::DivisionAtZero { x: x0 });
            }
            Ok(PhasePoint {
                x: x0,
                xi: op.b().eval(x0) / a,
            })
        }
    }
}

/// Escape-time estimate for a trajectory that genuinely blows up in finite
/// time: the trajectory must cross the cap ladder with Cauchy increments
/// (or collapse the step size).
pub fn escape_time(
    op: &SturmLiouvilleOperator,
    init: PhasePoint,
    controls: &FlowControls,
) -> Result<(f64, f64), FlowError> {
    let traj = integrate(op, init, controls);
    match traj.status {
        FlowStatus::CompletedHorizon => Err(FlowError::NoBlowupDetected {
            detail: format!(
                "trajectory reached t = {} with max |xi| = {:.3e}",
                traj.final_time, traj.max_abs_xi
            ),
        }),
        FlowStatus::StepUnderflow => Ok(traj.escape_time.unwrap_or((traj.final_time, 1e-9))),
        FlowStatus::Blowup => {
            let ratio = traj.cauchy_ratio.unwrap_or(1.0);
            if ratio > GENUINE_BLOWUP_RATIO {
                return Err(FlowError::NoBlowupDetected {
                    detail: format!(
                        "cap crossings are not Cauchy (increment ratio {ratio:.3}); the \
                         covector grows without finite-time escape"
                    ),
                });
            }
            traj.escape_time.ok_or_else(|| FlowError::NoBlowupDetected {
                detail: "too few cap crossings to extrapolate an escape time".into(),
            })
        }
    }
}

/// Outcome of one probe seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub label: String,
    pub init: PhasePoint,
    pub status: FlowStatus,
    pub final_time: f64,
    pub max_abs_xi: f64,
    pub cauchy_ratio: Option<f64>,
    pub escape_time: Option<(f64, f64)>,
    /// Blowup confirmed by Cauchy cap crossings or step collapse.
    pub genuine_blowup: bool,
}

/// Combined verdict of the seed sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowProbe {
    /// No seed produced a genuine finite-time blowup.
    pub complete: bool,
    pub outcomes: Vec<SeedOutcome>,
    /// Indices of outcomes witnessing incompleteness.
    pub witnesses: Vec<usize>,
}

/// Sweeps null-branch seeds near every zero plus random interior seeds and
/// reports whether any trajectory escapes in finite time.
///
/// Near each zero, eight offsets `+-{0.01, 0.02, 0.05, 0.1} * gap` are used
/// on both null branches; four random interior seeds cover the bulk.
pub fn completeness_probe(
    op: &SturmLiouvilleOperator,
    controls: &FlowControls,
    seed: u64,
) -> FlowProbe {
    let mut outcomes = Vec::new();
    let mut witnesses = Vec::new();

    let run = |label: String, init: PhasePoint, outcomes: &mut Vec<SeedOutcome>, witnesses: &mut Vec<usize>| {
        let traj = integrate(op, init, controls);
        let genuine = match traj.status {
            FlowStatus::StepUnderflow => true,
            FlowStatus::Blowup => traj
                .cauchy_ratio
                .map(|r| r <= GENUINE_BLOWUP_RATIO)
                .unwrap_or(false),
            FlowStatus::CompletedHorizon => false,
        };
        let idx = outcomes.len();
        outcomes.push(SeedOutcome {
            label,
            init,
            status: traj.status,
            final_time: traj.final_time,
            max_abs_xi: traj.max_abs_xi,
            cauchy_ratio: traj.cauchy_ratio,
            escape_time: traj.escape_time,
            genuine_blowup: genuine,
        });
        if genuine {
            witnesses.push(idx);
        }
    };

    for (i, z) in op.zeros().iter().enumerate() {
        let gap = op.gap_at(i);
        for &frac in &[0.01, 0.02, 0.05, 0.1] {
            for &sign in &[1.0, -1.0] {
                let x = (z.location + sign * frac * gap).rem_euclid(1.0);
                for branch in [NullBranch::Zero, NullBranch::Graph] {
                    let init = match null_branch_init(op, x, branch) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    if init.xi.abs() >= 0.5 * controls.xi_cap {
                        // Too close to the cap to measure anything.
                        continue;
                    }
                    let label = format!(
                        "zero {:.4} offset {:+.4} branch {:?}",
                        z.location,
                        sign * frac * gap,
                        branch
                    );
                    run(label, init, &mut outcomes, &mut witnesses);
                }
            }
        }
    }

    let plan = op.localization_plan();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < 4 && attempts < 400 {
        attempts += 1;
        let x: f64 = rng.gen_range(0.0..1.0);
        let inside = plan.iter().any(|iv| {
            let d = (x - iv.center).abs();
            d.min(1.0 - d) < iv.radius
        });
        if inside {
            continue;
        }
        let xi: f64 = rng.gen_range(-2.0..2.0);
        placed += 1;
        run(
            format!("interior seed {placed} at x = {x:.4}"),
            PhasePoint { x, xi },
            &mut outcomes,
            &mut witnesses,
        );
    }

    FlowProbe {
        complete: witnesses.is_empty(),
        outcomes,
        witnesses,
    }
}
