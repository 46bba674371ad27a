//! End-to-end acceptance suite. Each test checks one shipping criterion
//! and prints a single `ACCEPT <name>: PASS|FAIL` line (visible with
//! `--nocapture`); tolerances and wall-clock budgets are pinned in place.

use std::f64::consts::TAU;
use std::time::Instant;

use complab_core::classify::CaseTag;
use complab_core::deficiency::{cross_validate, deficiency_estimate};
use complab_core::flow::{completeness_probe, escape_time, integrate, null_branch_init};
use complab_core::frobenius::{expand_operator, frobenius_series, indicial_equation, Side};
use complab_core::gallery::{
    clifton_pohl, normal_form_quadratic, simple_quotient, sturm_gallery,
};
use complab_core::lorentz::{
    conformal_null_check, geodesic_integrate, laplacian_mode_identity, lorentz_esa_verdict,
    separation_reduce,
};
use complab_core::{
    ConformalFactor, CotangentState, FlowControls, FlowStatus, GeodesicControls, LorentzModel,
    NullBranch, PhasePoint, SturmLiouvilleOperator, TrigPoly,
};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn criterion(name: &str, f: impl FnOnce() + std::panic::UnwindSafe) {
    match std::panic::catch_unwind(f) {
        Ok(()) => println!("ACCEPT {name}: PASS"),
        Err(payload) => {
            println!("ACCEPT {name}: FAIL");
            std::panic::resume_unwind(payload);
        }
    }
}

fn budget(name: &str, started: Instant, seconds: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < seconds, "{name} took {elapsed:.2}s, budget {seconds}s");
}

/// `amp * sin(2 pi (x - c))` as a trigonometric polynomial.
fn shifted_sin(c: f64, amp: f64) -> TrigPoly {
    TrigPoly::new(
        0.0,
        vec![-amp * (TAU * c).sin()],
        vec![amp * (TAU * c).cos()],
    )
}

/// `amp * sin(4 pi (x - c))`.
fn shifted_sin2(c: f64, amp: f64) -> TrigPoly {
    TrigPoly::new(
        0.0,
        vec![0.0, -amp * (2.0 * TAU * c).sin()],
        vec![0.0, amp * (2.0 * TAU * c).cos()],
    )
}

/// `(1 - cos(2 pi (x - c))) / 2`, vanishing to order 2 at `c`.
fn shifted_bump(c: f64) -> TrigPoly {
    TrigPoly::new(
        0.5,
        vec![-0.5 * (TAU * c).cos()],
        vec![-0.5 * (TAU * c).sin()],
    )
}

/// Polynomial with a zero of order exactly `k` at `c` (and, for odd `k`, a
/// simple zero at `c + 1/2`).
fn shifted_vanishing(k: usize, c: f64, amp: f64) -> TrigPoly {
    let mut out = if k % 2 == 0 { TrigPoly::constant(amp) } else { shifted_sin(c, amp) };
    for _ in 0..k / 2 {
        out = &out * &shifted_bump(c);
    }
    out
}

#[test]
fn acceptance_01_classification_suite() {
    criterion("classification_suite", || {
        let t0 = Instant::now();
        let expected = [
            ("e1", false, false),
            ("e2", true, true),
            ("e3", false, false),
            ("e4", true, true),
            ("e5", true, true),
            ("e6", true, true),
        ];
        for ((name, op), (ename, complete, esa)) in sturm_gallery().iter().zip(expected) {
            assert_eq!(*name, ename);
            let report = op.report();
            assert_eq!(report.classical, complete, "{name}: classical completeness");
            assert_eq!(report.quantum, esa, "{name}: essential self-adjointness");
        }
        budget("classification", t0, 1.0);
    });
}

#[test]
fn acceptance_02_flow_classifier_agreement() {
    criterion("flow_classifier_agreement", || {
        let t0 = Instant::now();
        let controls = FlowControls { t_max: 50.0, ..FlowControls::default() };
        for (name, op) in sturm_gallery() {
            let probe = completeness_probe(&op, &controls, 0);
            assert_eq!(
                probe.complete,
                op.report().classical,
                "{name}: flow probe vs classifier"
            );
        }
        // Closed-form oracle on the simple-zero operator: on the graph
        // branch over x0 the trajectory reaches the zero at t = x0.
        let (_, e1) = &sturm_gallery()[0];
        for x0 in [0.1, 0.2, 0.4] {
            let init = null_branch_init(e1, x0, NullBranch::Graph).expect("branch exists");
            let (est, _) = escape_time(e1, init, &controls).expect("blowup detected");
            assert!(
                (est - x0).abs() <= 0.01 * x0,
                "escape from {x0}: estimate {est} off by more than 1%"
            );
        }
        budget("flow agreement", t0, 30.0);
    });
}

#[test]
fn acceptance_03_indicial_roots_of_simple_zeros() {
    criterion("indicial_roots_of_simple_zeros", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for trial in 0..20 {
            let c: f64 = rng.gen();
            let amp = 0.8 + 1.2 * rng.gen::<f64>();
            // a = amp (sin th + 0.3 sin 2th), th = 2 pi (x - c): simple
            // zeros at c and c + 1/2 with gap 0.5 and |a'| >= 2.5 amp.
            let a = &shifted_sin(c, amp) + &shifted_sin2(c, 0.3 * amp);
            let b = TrigPoly::new(
                4.0 * rng.gen::<f64>() - 2.0,
                vec![4.0 * rng.gen::<f64>() - 2.0],
                vec![4.0 * rng.gen::<f64>() - 2.0],
            );
            let op = SturmLiouvilleOperator::new(a, b).expect("valid operator");
            assert_eq!(op.zeros().len(), 2, "trial {trial}: two simple zeros");
            for record in op.zeros().to_vec() {
                let x0 = record.location;
                assert!(record.is_simple());
                let da = op.a().derivative().eval(x0);
                assert!(da.abs() >= 0.5, "trial {trial}: |a'({x0})| = {}", da.abs());
                let expected_pair = [C::new(0.0, 0.0), C::i() * (op.b().eval(x0) / da)];
                let ode = expand_operator(&op, x0, Side::Right, C::i(), 20).unwrap();
                let eq = indicial_equation(&ode).unwrap();
                // Match roots to the oracle as an unordered pair.
                let d1 = (eq.roots[0] - expected_pair[0]).norm()
                    + (eq.roots[1] - expected_pair[1]).norm();
                let d2 = (eq.roots[0] - expected_pair[1]).norm()
                    + (eq.roots[1] - expected_pair[0]).norm();
                assert!(
                    d1.min(d2) <= 2e-10,
                    "trial {trial} at {x0}: roots {:?} vs {expected_pair:?}",
                    eq.roots
                );
            }
        }
    });
}

#[test]
fn acceptance_04_root_sum_law_for_degenerate_zeros() {
    criterion("root_sum_law_for_degenerate_zeros", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB00);
        for trial in 0..10 {
            let k = 2 + trial % 3;
            let l = k - 1 + trial % 2;
            let c: f64 = rng.gen();
            let a = shifted_vanishing(k, c, 0.5 + rng.gen::<f64>());
            let b = shifted_vanishing(l, c, 2.0 * rng.gen::<f64>() - 1.0 + 0.5);
            let op = SturmLiouvilleOperator::new(a, b).expect("valid operator");
            let record = op
                .zeros()
                .iter()
                .find(|z| {
                    let d = (z.location - c).abs();
                    d.min((1.0 - d).abs()) < 1e-6
                })
                .expect("degenerate zero located")
                .clone();
            assert_eq!(record.order_a, k, "trial {trial}: order of a");
            // The root sum is eigenvalue-independent; eigenvalue zero keeps
            // the expansion regular singular for every k >= 3.
            let lambda = if k == 2 { C::i() } else { C::new(0.0, 0.0) };
            let ode = expand_operator(&op, record.location, Side::Right, lambda, 24).unwrap();
            let eq = indicial_equation(&ode).unwrap();
            let sum = eq.roots[0] + eq.roots[1];
            assert!(
                (sum.re - (1.0 - k as f64)).abs() <= 1e-9,
                "trial {trial} (k = {k}, l = {l}): Re(r1 + r2) = {} vs {}",
                sum.re,
                1.0 - k as f64
            );
        }
    });
}

#[test]
fn acceptance_05_series_residual_slopes() {
    criterion("series_residual_slopes", || {
        let n = 20;
        let hs = [10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)];
        let mut checked = 0;
        for (name, op) in sturm_gallery() {
            for record in op.zeros().to_vec() {
                // Regular singular points only: simple zeros and
                // degenerate zeros whose drift vanishes fast enough.
                let regular = record.is_simple()
                    || (record.b_vanishes() && record.order_b_at_least(record.order_a - 1));
                if !regular || record.order_a > 2 {
                    continue;
                }
                for side in [Side::Right, Side::Left] {
                    for lambda in [C::i(), -C::i()] {
                        let ode =
                            expand_operator(&op, record.location, side, lambda, n + 10).unwrap();
                        let eq = indicial_equation(&ode).unwrap();
                        for root in eq.roots {
                            let s = frobenius_series(&ode, root, n).unwrap();
                            let slope = s.residual_slope(&ode, &hs);
                            let bound = n as f64 - 1.0 - root.re - 0.5;
                            assert!(
                                slope >= bound,
                                "{name} at {} ({side:?}, lambda = {lambda}): residual slope \
                                 {slope} below {bound}",
                                record.location
                            );
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(checked, 32, "series census: E1 gives 16, E2 and E4 give 8 each");
    });
}

#[test]
fn acceptance_06_deficiency_crosscheck() {
    criterion("deficiency_crosscheck", || {
        let t0 = Instant::now();
        let mut cells = 0;
        for (name, op) in sturm_gallery() {
            let est = deficiency_estimate(&op).expect("deficiency estimate");
            match name {
                "e1" | "e3" => {
                    assert!(est.n_plus >= 1 && est.n_minus >= 1, "{name}: ({}, {})", est.n_plus, est.n_minus);
                }
                _ => assert_eq!((est.n_plus, est.n_minus), (0, 0), "{name}"),
            }
            let cc = cross_validate(&op).expect("cross validation");
            assert!(cc.cells_consistent, "{name}: symbolic vs tail-slope verdicts");
            assert!(cc.lambda_independent, "{name}: Weyl verdict depends on lambda");
            assert!(cc.agree, "{name}: pipelines disagree");
            cells += est.cells.len();
        }
        assert_eq!(cells, 24, "(zero, side, lambda) census over the gallery");
        budget("deficiency crosscheck", t0, 120.0);
    });
}

#[test]
fn acceptance_07_a4_term_is_verdict_irrelevant() {
    criterion("a4_term_is_verdict_irrelevant", || {
        for (name, op) in sturm_gallery() {
            let toggled = SturmLiouvilleOperator::new(op.a().clone(), op.b().clone())
                .unwrap()
                .with_include_a4(true);
            let base = op.report();
            let with_a4 = toggled.report();
            assert_eq!(base, with_a4, "{name}: report changed under the a''/4 toggle");
        }
        // The quantum pipeline sees the toggled potential term; the
        // deficiency counts must not move either.
        for (name, op) in sturm_gallery() {
            if name != "e2" && name != "e5" {
                continue;
            }
            let toggled = SturmLiouvilleOperator::new(op.a().clone(), op.b().clone())
                .unwrap()
                .with_include_a4(true);
            let base = deficiency_estimate(&op).unwrap();
            let with_a4 = deficiency_estimate(&toggled).unwrap();
            assert_eq!(
                (base.n_plus, base.n_minus),
                (with_a4.n_plus, with_a4.n_minus),
                "{name}: deficiency indices changed under the a''/4 toggle"
            );
        }
    });
}

#[test]
fn acceptance_08_torus_separation_and_mode_identity() {
    criterion("torus_separation_and_mode_identity", || {
        let model = normal_form_quadratic();
        let op1 = separation_reduce(&model, 1).expect("mode 1 reduces");
        assert_eq!(op1.b().degree(), 0, "separated drift is constant");
        assert!((op1.b().constant_part() + TAU).abs() < 1e-12, "b = -2 pi");
        assert!(!op1.report().quantum, "mode 1 operator must not be ESA");
        assert_eq!(
            CaseTag::of(&op1.zeros()[0]),
            CaseTag::DegenerateBNonzero,
            "mode 1 falls in the oscillatory case"
        );

        let op0 = separation_reduce(&model, 0).expect("mode 0 reduces");
        assert!(op0.report().quantum, "mode 0 operator is ESA");

        let chk = laplacian_mode_identity(&model, 1, 64).expect("identity check runs");
        assert!(
            chk.order >= 1.9,
            "separated-form identity converges at order {} < 1.9",
            chk.order
        );
    });
}

#[test]
fn acceptance_09_axis_null_geodesic_escape() {
    criterion("axis_null_geodesic_escape", || {
        let model = clifton_pohl();
        let seed = CotangentState { x: 1.0, y: 0.0, xi: 0.0, eta: 1.0 };
        let controls = GeodesicControls::default();
        let traj = geodesic_integrate(&model, seed, &controls).expect("integrates");
        assert_eq!(traj.status, FlowStatus::Blowup, "axis geodesic must blow up");
        let (est, _) = traj.escape_time.expect("escape extrapolation");
        assert!((est - 1.0).abs() <= 0.01, "escape time {est} vs closed form 1.0");

        // Conservation along 99% of the ride toward the singularity.
        let clipped = GeodesicControls { t_max: 0.99, ..GeodesicControls::default() };
        let head = geodesic_integrate(&model, seed, &clipped).expect("integrates");
        assert_eq!(head.status, FlowStatus::CompletedHorizon);
        assert!(
            head.h_drift <= 1e-6 * head.h_scale.max(1e-300),
            "Hamiltonian drift {} exceeds 1e-6 relative to scale {}",
            head.h_drift,
            head.h_scale
        );
    });
}

#[test]
fn acceptance_10_conformal_invariance() {
    criterion("conformal_invariance", || {
        let cases: [(LorentzModel, CotangentState); 2] = [
            (clifton_pohl(), CotangentState { x: 1.0, y: 0.4, xi: 0.0, eta: 0.8 }),
            (normal_form_quadratic(), {
                let y = 0.35;
                let xi = -0.4;
                let a = match normal_form_quadratic() {
                    LorentzModel::NormalForm { a_profile } => a_profile.eval(y),
                    _ => unreachable!(),
                };
                CotangentState { x: 0.0, y, xi, eta: -xi / a }
            }),
        ];
        let factors =
            [ConformalFactor::Const { value: 0.5 }, ConformalFactor::AngularSine { amplitude: 0.3 }];
        let controls = GeodesicControls::default();
        for (base, seed) in cases {
            let plain = lorentz_esa_verdict(&base).expect("base verdict");
            for factor in &factors {
                let wrap = LorentzModel::ConformalWrap {
                    base: Box::new(base.clone()),
                    factor: factor.clone(),
                };
                let wrapped = lorentz_esa_verdict(&wrap).expect("wrapped verdict");
                assert_eq!(
                    (plain.complete, plain.esa),
                    (wrapped.complete, wrapped.esa),
                    "{}: verdict must be conformally invariant",
                    base.name()
                );
                let d = conformal_null_check(&wrap, seed, &controls).expect("null comparison");
                assert!(
                    d <= 1e-4,
                    "{} with {factor:?}: Hausdorff distance {d} exceeds 1e-4",
                    base.name()
                );
            }
        }
    });
}

#[test]
fn acceptance_11_conservation_on_completed_horizons() {
    criterion("conservation_on_completed_horizons", || {
        let mut completed = 0;

        // Circle flows on the elliptic operator and inside an elliptic
        // region of a degenerate one.
        let flows = [
            ("e6", &sturm_gallery()[5].1, PhasePoint { x: 0.3, xi: 1.0 }),
            ("e6", &sturm_gallery()[5].1, PhasePoint { x: 0.7, xi: -2.0 }),
            ("e2", &sturm_gallery()[1].1, PhasePoint { x: 0.5, xi: 0.5 }),
        ];
        let controls = FlowControls { t_max: 50.0, ..FlowControls::default() };
        for (name, op, init) in flows {
            let traj = integrate(op, init, &controls);
            if traj.status == FlowStatus::CompletedHorizon {
                completed += 1;
                assert!(
                    traj.p_drift <= 1e-6 * traj.final_time.max(1.0),
                    "{name} from {init:?}: symbol drift {} over t = {}",
                    traj.p_drift,
                    traj.final_time
                );
            }
        }

        // Surface flows staying away from their singular behaviour.
        let geo = GeodesicControls::default();
        let rides = [
            (simple_quotient(), CotangentState { x: 1.0, y: 0.0, xi: 0.0, eta: 1.0 }),
            (normal_form_quadratic(), CotangentState { x: 0.0, y: 0.3, xi: 0.2, eta: 0.1 }),
        ];
        for (model, seed) in rides {
            let traj = geodesic_integrate(&model, seed, &geo).expect("integrates");
            if traj.status == FlowStatus::CompletedHorizon {
                completed += 1;
                assert!(
                    traj.h_drift <= 1e-6 * traj.h_scale.max(1e-300) * traj.final_time.max(1.0),
                    "{} from {seed:?}: Hamiltonian drift {} (scale {}) over t = {}",
                    model.name(),
                    traj.h_drift,
                    traj.h_scale,
                    traj.final_time
                );
            }
        }

        assert!(completed >= 4, "only {completed} trajectories completed the horizon");
    });
}
