//! Weyl endpoint classification and deficiency-index estimation.
//!
//! Each zero of `a` splits the circle locally into a right and a left
//! endpoint problem. On every endpoint the local solution basis built by
//! the series engines is tested for square integrability in two
//! independent ways:
//!
//! * analytically, from the leading exponents (`h^r` is square integrable
//!   near `h = 0` iff `Re r > -1/2`);
//! * numerically, from tail integrals `I(eps) = int_eps^c |u|^2 dh` on a
//!   shrinking ladder of lower limits: the chunk increments of a
//!   convergent integral decay geometrically, while a divergent integral
//!   has non-shrinking (or growing) increments.
//!
//! An endpoint where every solution is square integrable is limit circle;
//! one non-integrable solution makes it limit point. The deficiency
//! indices `n_+ = n_-` count the zeros whose two endpoints are both limit
//! circle at the spectral parameters `+i` / `-i`; the operator is
//! essentially self-adjoint exactly when both vanish.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::classify::{CaseTag, SturmLiouvilleOperator};
use crate::frobenius::{
    expand_operator, frobenius_series, indicial_equation, irregular_solution,
    l2_near_singularity, oscillatory_pair, FrobeniusError, Side,
};

/// Increment ratio at or above which a tail integral is declared
/// divergent (a logarithmically divergent integral has ratio exactly 1;
/// convergent gallery cells stay below 0.17).
pub const DIVERGENT_INCREMENT_RATIO: f64 = 0.5;
/// Total-integral growth across the ladder that also flags divergence.
pub const DIVERGENT_TOTAL_RATIO: f64 = 2.0;
/// Points per decade for the logarithmic trapezoid rule.
const PTS_PER_DECADE: usize = 96;
/// Number of ladder decades below the cutoff.
const LADDER_DECADES: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum DeficiencyError {
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error("operator has no zero with index {index}")]
    NoSuchZero { index: usize },
}

/// Weyl classification of one endpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylVerdict {
    /// Some local solution fails to be square integrable.
    LimitPoint,
    /// Every local solution is square integrable.
    LimitCircle,
}

/// Tail integrals of `|u|^2` on the ladder `eps_j = cutoff * 10^{-j}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailReport {
    /// Upper integration limit (within the series trust region).
    pub cutoff: f64,
    /// Ladder of lower limits, decreasing.
    pub eps: Vec<f64>,
    /// `I(eps_j) = int_{eps_j}^{cutoff} |u|^2 dh`, cumulative.
    pub integrals: Vec<f64>,
    /// Decade chunks `int_{eps_{j+1}}^{eps_j} |u|^2 dh`.
    pub increments: Vec<f64>,
    /// Ratio of the last two increments.
    pub last_ratio: f64,
    /// `I(eps_last) / I(eps_first)`.
    pub total_ratio: f64,
    /// Least-squares slope of `ln (chunk)` against `ln eps`: `p + 1` for a
    /// density `|u|^2 ~ h^p`.
    pub slope: f64,
    pub convergent: bool,
    /// Geometric extrapolation of the full integral, when convergent.
    pub limit_estimate: Option<f64>,
}

/// Integrates `density = |u|^2` over the shrinking ladder below `cutoff`
/// and extracts the convergence diagnostics.
pub fn tail_report(density: impl Fn(f64) -> f64, cutoff: f64) -> TailReport {
    let eps: Vec<f64> = (1..=LADDER_DECADES)
        .map(|j| cutoff * 10f64.powi(-(j as i32)))
        .collect();

    // One decade chunk per ladder step, log-trapezoid rule.
    let chunk = |hi: f64, lo: f64| -> f64 {
        let t_hi = hi.ln();
        let t_lo = lo.ln();
        let n = PTS_PER_DECADE;
        let dt = (t_hi - t_lo) / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let t = t_lo + dt * i as f64;
            let h = t.exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            // dh = h dt turns the integral into a uniform-grid one.
            acc += w * density(h) * h;
        }
        acc * dt
    };

    let mut chunks = Vec::with_capacity(LADDER_DECADES);
    let mut upper = cutoff;
    for &e in &eps {
        chunks.push(chunk(upper, e));
        upper = e;
    }
    let integrals: Vec<f64> = chunks
        .iter()
        .scan(0.0, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();

    let increments: Vec<f64> = chunks[1..].to_vec();
    let n = chunks.len();
    let last_ratio = chunks[n - 1] / chunks[n - 2].max(1e-300);
    let total_ratio = integrals[n - 1] / integrals[0].max(1e-300);

    // ln(chunk_j) against ln(eps_j) for the chunks below the first decade.
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(chunks.iter())
        .skip(1)
        .map(|(&e, &c)| (e.ln(), c.max(1e-300).ln()))
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    let convergent =
        last_ratio < DIVERGENT_INCREMENT_RATIO && total_ratio < DIVERGENT_TOTAL_RATIO;
    let limit_estimate = if convergent {
        let r = last_ratio.clamp(0.0, 0.45);
        Some(integrals[n - 1] + chunks[n - 1] * r / (1.0 - r))
    } else {
        None
    };

    TailReport {
        cutoff,
        eps,
        integrals,
        increments,
        last_ratio,
        total_ratio,
        slope,
        convergent,
        limit_estimate,
    }
}

/// One local solution together with its square-integrability evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionEvidence {
    pub label: String,
    /// Leading exponent of the solution at the endpoint.
    pub exponent: C,
    pub has_log: bool,
    /// `Re exponent > -1/2`.
    pub analytic_l2: bool,
    pub tail: TailReport,
}

/// Classification of one `(zero, side, lambda)` endpoint cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndpointClassification {
    pub x0: f64,
    pub side: Side,
    pub case: CaseTag,
    /// Requested spectral parameter.
    pub lambda: C,
    /// Parameter actually used by the local expansion (degenerate branches
    /// with `b` vanishing are classified at `lambda = 0`, where the local
    /// solution structure is independent of the spectral parameter).
    pub lambda_used: C,
    /// Verdict from the analytic exponents.
    pub verdict: WeylVerdict,
    /// Verdict from the numeric tail integrals.
    pub numeric_verdict: WeylVerdict,
    pub solutions: Vec<SolutionEvidence>,
}

fn verdict_of(all_l2: bool) -> WeylVerdict {
    if all_l2 {
        WeylVerdict::LimitCircle
    } else {
        WeylVerdict::LimitPoint
    }
}

/// Classifies the endpoint on `side` of zero number `zero_index` at the
/// spectral parameter `lambda`.
pub fn endpoint_classify(
    op: &SturmLiouvilleOperator,
    zero_index: usize,
    side: Side,
    lambda: C,
) -> Result<EndpointClassification, DeficiencyError> {
    let record = *op
        .zeros()
        .get(zero_index)
        .ok_or(DeficiencyError::NoSuchZero { index: zero_index })?;
    let case = CaseTag::of(&record);
    let radius = op.localization_plan()[zero_index].radius;
    let k = record.order_a;
    let x0 = record.location;
    let order = 28.max(k + 10);
    let series_cap = 0.9 * radius;

    let mut solutions: Vec<SolutionEvidence> = Vec::new();
    let lambda_used;

    match case {
        CaseTag::Simple | CaseTag::DegenerateBVanishes
            if case == CaseTag::Simple || record.order_b_at_least(k - 1) =>
        {
            // Regular singular endpoint: two power-type solutions.
            lambda_used = if case == CaseTag::Simple || k == 2 {
                lambda
            } else {
                C::new(0.0, 0.0)
            };
            let ode = expand_operator(op, x0, side, lambda_used, order)?;
            let eq = indicial_equation(&ode)?;
            for (which, root) in eq.roots.iter().enumerate() {
                let series = frobenius_series(&ode, *root, 20)?;
                let cutoff = series.trust_radius().min(series_cap);
                let tail = tail_report(|h| series.eval(h).norm_sqr(), cutoff);
                solutions.push(SolutionEvidence {
                    label: format!(
                        "power solution {} with exponent {:.6}{:+.6}i{}",
                        ["r1", "r2"][which],
                        root.re,
                        root.im,
                        if series.has_log() { " (log factor)" } else { "" }
                    ),
                    exponent: *root,
                    has_log: series.has_log(),
                    analytic_l2: l2_near_singularity(*root, series.has_log()),
                    tail,
                });
            }
        }
        CaseTag::DegenerateBVanishes => {
            // First-order dominated endpoint (b vanishes to low order):
            // classified at lambda = 0, where the reduction is exact.
            lambda_used = C::new(0.0, 0.0);
            let ode = expand_operator(op, x0, side, lambda_used, order)?;
            let sol = irregular_solution(&ode)?;
            let exponent = C::new(sol.exponent, 0.0);
            let cutoff = sol.trust_radius(1e-8).min(series_cap);
            let tail = tail_report(|h| sol.eval(h).norm_sqr(), cutoff);
            solutions.push(SolutionEvidence {
                label: format!(
                    "first-order dominated solution h^({:.3}) v(h), b of order {}",
                    sol.exponent, sol.l
                ),
                exponent,
                has_log: false,
                analytic_l2: l2_near_singularity(exponent, false),
                tail,
            });
        }
        CaseTag::DegenerateBNonzero => {
            // Oscillatory endpoint: analytic solution plus a bounded
            // wildly oscillating partner of constant modulus profile.
            lambda_used = lambda;
            let ode = expand_operator(op, x0, side, lambda_used, order)?;
            let pair = oscillatory_pair(&ode)?;
            let cutoff = pair.trust_radius(1e-8).min(series_cap);
            let zero_exp = C::new(0.0, 0.0);
            let tail1 = tail_report(|h| pair.eval_u1(h).norm_sqr(), cutoff);
            solutions.push(SolutionEvidence {
                label: "analytic solution u1".into(),
                exponent: zero_exp,
                has_log: false,
                analytic_l2: true,
                tail: tail1,
            });
            let tail2 = tail_report(|h| pair.abs_u2(h).powi(2), cutoff);
            solutions.push(SolutionEvidence {
                label: "oscillatory solution u2 = u3 exp(iE), |u2(0)| = 1/|b(x0)|".into(),
                exponent: zero_exp,
                has_log: false,
                analytic_l2: true,
                tail: tail2,
            });
        }
        CaseTag::Simple => unreachable!("covered by the guarded arm"),
    }

    let verdict = verdict_of(solutions.iter().all(|s| s.analytic_l2));
    let numeric_verdict = verdict_of(solutions.iter().all(|s| s.tail.convergent));

    Ok(EndpointClassification {
        x0,
        side,
        case,
        lambda,
        lambda_used,
        verdict,
        numeric_verdict,
        solutions,
    })
}

/// True when all four `(side, lambda)` endpoint cells of the zero are
/// limit point, so the zero contributes nothing to the deficiency spaces.
pub fn interval_esa(
    op: &SturmLiouvilleOperator,
    zero_index: usize,
) -> Result<bool, DeficiencyError> {
    for side in [Side::Right, Side::Left] {
        for lam in [C::i(), -C::i()] {
            let cell = endpoint_classify(op, zero_index, side, lam)?;
            if cell.verdict == WeylVerdict::LimitCircle {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Deficiency-index estimate assembled from all endpoint cells.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeficiencyEstimate {
    /// Zeros whose both endpoints are limit circle at `lambda = +i`.
    pub n_plus: usize,
    /// Same at `lambda = -i`.
    pub n_minus: usize,
    /// `n_plus == n_minus == 0`.
    pub esa: bool,
    pub cells: Vec<EndpointClassification>,
}

/// Estimates the deficiency indices of the operator from the Weyl
/// classification of every zero at `lambda = +-i`.
pub fn deficiency_estimate(
    op: &SturmLiouvilleOperator,
) -> Result<DeficiencyEstimate, DeficiencyError> {
    let mut cells = Vec::new();
    let mut n_plus = 0;
    let mut n_minus = 0;
    for zero_index in 0..op.zeros().len() {
        for (lam, count) in [(C::i(), &mut n_plus), (-C::i(), &mut n_minus)] {
            let right = endpoint_classify(op, zero_index, Side::Right, lam)?;
            let left = endpoint_classify(op, zero_index, Side::Left, lam)?;
            if right.verdict == WeylVerdict::LimitCircle
                && left.verdict == WeylVerdict::LimitCircle
            {
                *count += 1;
            }
            cells.push(right);
            cells.push(left);
        }
    }
    Ok(DeficiencyEstimate {
        n_plus,
        n_minus,
        esa: n_plus == 0 && n_minus == 0,
        cells,
    })
}

/// Agreement between the symbolic classification and the numeric
/// deficiency estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossCheck {
    /// Verdict of the symbolic per-zero classification.
    pub symbolic_esa: bool,
    /// Verdict of the analytic-exponent deficiency estimate.
    pub deficiency_esa: bool,
    /// Verdict recomputed from the numeric tail integrals alone.
    pub numeric_esa: bool,
    /// Every cell's numeric verdict matches its analytic verdict.
    pub cells_consistent: bool,
    /// Verdicts at `+i` and `-i` coincide cell by cell.
    pub lambda_independent: bool,
    pub n_plus: usize,
    pub n_minus: usize,
    pub agree: bool,
}

/// Runs the full quantum-side cross-validation of an operator.
pub fn cross_validate(op: &SturmLiouvilleOperator) -> Result<CrossCheck, DeficiencyError> {
    let est = deficiency_estimate(op)?;
    let cells_consistent = est
        .cells
        .iter()
        .all(|c| c.verdict == c.numeric_verdict);

    // Recount with numeric verdicts only.
    let numeric_lc = |x0: f64, lam: C| {
        est.cells
            .iter()
            .filter(|c| c.x0 == x0 && c.lambda == lam)
            .all(|c| c.numeric_verdict == WeylVerdict::LimitCircle)
    };
    let mut numeric_plus = 0;
    let mut numeric_minus = 0;
    for z in op.zeros() {
        if numeric_lc(z.location, C::i()) {
            numeric_plus += 1;
        }
        if numeric_lc(z.location, -C::i()) {
            numeric_minus += 1;
        }
    }
    let numeric_esa = numeric_plus == 0 && numeric_minus == 0;

    let lambda_independent = op.zeros().iter().all(|z| {
        [Side::Right, Side::Left].iter().all(|&side| {
            let v: Vec<WeylVerdict> = est
                .cells
                .iter()
                .filter(|c| c.x0 == z.location && c.side == side)
                .map(|c| c.verdict)
                .collect();
            v.windows(2).all(|w| w[0] == w[1])
        })
    });

    let symbolic_esa = op.is_esa();
    let agree = symbolic_esa == est.esa && est.esa == numeric_esa && cells_consistent;
    Ok(CrossCheck {
        symbolic_esa,
        deficiency_esa: est.esa,
        numeric_esa,
        cells_consistent,
        lambda_independent,
        n_plus: est.n_plus,
        n_minus: est.n_minus,
        agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn tail_of_bounded_density_converges_with_unit_slope() {
        let r = tail_report(|_h| 1.0, 0.1);
        assert!(r.convergent);
        assert!((r.slope - 1.0).abs() < 1e-6, "slope {}", r.slope);
        assert!((r.last_ratio - 0.1).abs() < 1e-6);
        let lim = r.limit_estimate.unwrap();
        assert!((lim - 0.1).abs() < 1e-3 * 0.1, "limit {lim}");
    }

    #[test]
    fn tail_of_inverse_density_diverges_logarithmically() {
        let r = tail_report(|h| 1.0 / h, 0.1);
        assert!(!r.convergent);
        assert!(r.slope.abs() < 1e-6, "slope {}", r.slope);
        assert!((r.last_ratio - 1.0).abs() < 1e-6);
        assert!(r.limit_estimate.is_none());
    }

    #[test]
    fn tail_of_inverse_square_density_has_negative_slope() {
        let r = tail_report(|h| 1.0 / (h * h), 0.1);
        assert!(!r.convergent);
        assert!((r.slope + 1.0).abs() < 1e-6, "slope {}", r.slope);
        assert!(r.last_ratio > 5.0);
    }

    #[test]
    fn tail_of_mild_singularity_still_converges() {
        // |u|^2 = h^{-1/2}: integrable, increment ratio 10^{-1/2}.
        let r = tail_report(|h| h.powf(-0.5), 0.1);
        assert!(r.convergent);
        assert!((r.last_ratio - 0.316).abs() < 0.01);
    }

    #[test]
    fn simple_zero_endpoints_are_limit_circle() {
        let op = gallery::e1();
        for side in [Side::Right, Side::Left] {
            for lam in [C::i(), -C::i()] {
                let cell = endpoint_classify(&op, 0, side, lam).unwrap();
                assert_eq!(cell.verdict, WeylVerdict::LimitCircle);
                assert_eq!(cell.numeric_verdict, WeylVerdict::LimitCircle);
                assert_eq!(cell.lambda_used, lam);
                assert_eq!(cell.solutions.len(), 2);
            }
        }
    }

    #[test]
    fn degenerate_vanishing_b_endpoint_is_limit_point() {
        let op = gallery::e2();
        let cell = endpoint_classify(&op, 0, Side::Right, C::i()).unwrap();
        assert_eq!(cell.verdict, WeylVerdict::LimitPoint);
        assert_eq!(cell.numeric_verdict, WeylVerdict::LimitPoint);
        // k = 2 keeps the requested spectral parameter.
        assert_eq!(cell.lambda_used, C::i());
        // The top solution is square integrable, the bottom one is not.
        assert_eq!(cell.solutions.len(), 2);
        assert!(cell.solutions[0].analytic_l2);
        assert!(!cell.solutions[1].analytic_l2);
    }

    #[test]
    fn oscillatory_endpoint_is_limit_circle() {
        let op = gallery::e3();
        let cell = endpoint_classify(&op, 0, Side::Left, -C::i()).unwrap();
        assert_eq!(cell.verdict, WeylVerdict::LimitCircle);
        assert_eq!(cell.numeric_verdict, WeylVerdict::LimitCircle);
        assert_eq!(cell.solutions.len(), 2);
    }

    #[test]
    fn irregular_endpoint_is_limit_point_with_log_divergence() {
        let op = gallery::e5();
        let cell = endpoint_classify(&op, 0, Side::Right, C::i()).unwrap();
        assert_eq!(cell.verdict, WeylVerdict::LimitPoint);
        assert_eq!(cell.numeric_verdict, WeylVerdict::LimitPoint);
        // Classified at lambda = 0 regardless of the request.
        assert_eq!(cell.lambda_used, C::new(0.0, 0.0));
        let sol = &cell.solutions[0];
        assert!((sol.exponent.re + 0.5).abs() < 1e-12);
        // |u|^2 ~ 1/h: the divergence is logarithmic, increments flat.
        assert!((sol.tail.last_ratio - 1.0).abs() < 0.1, "{}", sol.tail.last_ratio);
    }

    #[test]
    fn deficiency_counts_across_gallery() {
        let expected = [
            ("e1", 2usize),
            ("e2", 0),
            ("e3", 1),
            ("e4", 0),
            ("e5", 0),
            ("e6", 0),
        ];
        for ((name, op), (ename, n)) in gallery::sturm_gallery().iter().zip(expected) {
            assert_eq!(*name, ename);
            let est = deficiency_estimate(op).unwrap();
            assert_eq!(est.n_plus, n, "n+ of {name}");
            assert_eq!(est.n_minus, n, "n- of {name}");
            assert_eq!(est.esa, op.is_esa(), "esa agreement on {name}");
        }
    }

    #[test]
    fn cross_validation_agrees_everywhere() {
        let mut cells = 0;
        for (name, op) in gallery::sturm_gallery() {
            let check = cross_validate(&op).unwrap();
            assert!(check.agree, "cross-check failed on {name}: {check:?}");
            assert!(check.cells_consistent, "numeric mismatch on {name}");
            assert!(check.lambda_independent, "lambda dependence on {name}");
            cells += deficiency_estimate(&op).unwrap().cells.len();
        }
        // 5 singular operators, 24 endpoint cells in total.
        assert_eq!(cells, 24);
    }
}
