//! Symbolic completeness / self-adjointness classification.
//!
//! The operator `P = D a D - i b D - (i/2) b'` (`D = d/dx`, optionally with
//! the smooth correction `a''/4`) on the circle is classified through the
//! zeros of `a`.  Each zero is judged by two local invariants: the vanishing
//! order `k` of `a` and the behaviour of `b` there.  The same conditions
//! decide both whether the Hamiltonian flow of the symbol
//! `p = -a xi^2 + b xi` is complete and whether `P` is essentially
//! self-adjoint:
//!
//! * `k = 1`: null characteristics reach the zero in finite time and both
//!   local solutions are square integrable -- incomplete, not ESA;
//! * `k >= 2`, `b(x0) = 0`: characteristics take infinite time and exactly
//!   one local solution is square integrable per side -- complete, ESA;
//! * `k >= 2`, `b(x0) != 0`: the graph branch arrives in finite time and
//!   the oscillatory local basis stays bounded -- incomplete, not ESA.

use serde::{Deserialize, Serialize};

use crate::coeff::{zero_profile, CoeffError, TrigPoly, ZeroRecord};

/// Zeros closer than this (circular distance) are rejected as unresolvable
/// by the localisation machinery: four times the zero-merging tolerance.
pub const MIN_ZERO_GAP: f64 = 4.0e-8;

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Coefficient(#[from] CoeffError),
    #[error("zeros at {x1} and {x2} are closer than the resolvable gap {min_gap}")]
    ZerosTooClose { x1: f64, x2: f64, min_gap: f64 },
}

/// Case tag of one zero of the leading coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    /// Simple zero (`k = 1`).
    Simple,
    /// Degenerate zero with `b(x0) = 0`.
    DegenerateBVanishes,
    /// Degenerate zero with `b(x0) != 0`.
    DegenerateBNonzero,
}

impl CaseTag {
    pub fn of(record: &ZeroRecord) -> CaseTag {
        if record.is_simple() {
            CaseTag::Simple
        } else if record.b_vanishes() {
            CaseTag::DegenerateBVanishes
        } else {
            CaseTag::DegenerateBNonzero
        }
    }
}

/// Verdict for a single zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroVerdict {
    pub record: ZeroRecord,
    pub case: CaseTag,
    /// Null characteristics avoid this zero for all time.
    pub complete: bool,
    /// Both deficiency cells at this zero are limit point.
    pub esa: bool,
    pub reason: String,
}

/// Classifies one zero by its local invariants.
pub fn classify_zero(record: &ZeroRecord) -> ZeroVerdict {
    let case = CaseTag::of(record);
    let (complete, esa, reason) = match case {
        CaseTag::Simple => (
            false,
            false,
            "simple zero: a null characteristic reaches it in finite time, and both local \
             solutions are square integrable (limit circle)"
                .to_string(),
        ),
        CaseTag::DegenerateBVanishes => (
            true,
            true,
            format!(
                "zero of order {} with b vanishing there: null characteristics need infinite \
                 time, and one local solution per side fails square integrability (limit point)",
                record.order_a
            ),
        ),
        CaseTag::DegenerateBNonzero => (
            false,
            false,
            format!(
                "zero of order {} with b(x0) = {:.6} != 0: the graph branch arrives in finite \
                 time, and the oscillatory local basis stays bounded (limit circle)",
                record.order_a, record.b_value
            ),
        ),
    };
    ZeroVerdict {
        record: record.clone(),
        case,
        complete,
        esa,
        reason,
    }
}

/// Localisation interval around one zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub center: f64,
    pub radius: f64,
}

impl Interval {
    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

/// Combined classification of the operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    /// Hamiltonian flow of the symbol is complete.
    pub classical: bool,
    /// The operator is essentially self-adjoint.
    pub quantum: bool,
    /// No zeros at all (the operator is elliptic).
    pub elliptic: bool,
    pub zeros: Vec<ZeroVerdict>,
}

/// Degenerate Sturm-Liouville operator on the unit circle, described by the
/// trigonometric polynomials `a` (leading coefficient) and `b` (first-order
/// coefficient), with the zero set of `a` profiled at construction.
#[derive(Clone, Debug)]
pub struct SturmLiouvilleOperator {
    a: TrigPoly,
    b: TrigPoly,
    include_a4: bool,
    zeros: Vec<ZeroRecord>,
}

impl SturmLiouvilleOperator {
    pub fn new(a: TrigPoly, b: TrigPoly) -> Result<Self, ClassifyError> {
        let locations = a.find_zeros_default()?;
        for w in locations.windows(2) {
            if w[1] - w[0] < MIN_ZERO_GAP {
                return Err(ClassifyError::ZerosTooClose {
                    x1: w[0],
                    x2: w[1],
                    min_gap: MIN_ZERO_GAP,
                });
            }
        }
        if locations.len() >= 2 {
            let wrap = (1.0 - locations[locations.len() - 1]) + locations[0];
            if wrap < MIN_ZERO_GAP {
                return Err(ClassifyError::ZerosTooClose {
                    x1: locations[locations.len() - 1],
                    x2: locations[0],
                    min_gap: MIN_ZERO_GAP,
                });
            }
        }
        let zeros = locations
            .iter()
            .map(|&x0| zero_profile(&a, &b, x0, crate::coeff::DEFAULT_ORDER_TOL))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SturmLiouvilleOperator {
            a,
            b,
            include_a4: false,
            zeros,
        })
    }

    /// Toggles the smooth correction term `a''/4` in the potential part.
    /// It never changes any verdict; the toggle exists to check that.
    pub fn with_include_a4(mut self, on: bool) -> Self {
        self.include_a4 = on;
        self
    }

    pub fn a(&self) -> &TrigPoly {
        &self.a
    }

    pub fn b(&self) -> &TrigPoly {
        &self.b
    }

    pub fn include_a4(&self) -> bool {
        self.include_a4
    }

    pub fn zeros(&self) -> &[ZeroRecord] {
        &self.zeros
    }

    pub fn is_elliptic(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Principal symbol with first-order part: `p = -a xi^2 + b xi`.
    pub fn symbol(&self, x: f64, xi: f64) -> f64 {
        -self.a.eval(x) * xi * xi + self.b.eval(x) * xi
    }

    /// Scale of the two symbol terms, for relative drift checks.
    pub fn symbol_scale(&self, x: f64, xi: f64) -> f64 {
        (self.a.eval(x) * xi * xi).abs() + (self.b.eval(x) * xi).abs()
    }

    /// Per-zero verdicts.
    pub fn zero_verdicts(&self) -> Vec<ZeroVerdict> {
        self.zeros.iter().map(classify_zero).collect()
    }

    /// The Hamiltonian flow of the symbol is complete.
    pub fn classical_complete(&self) -> bool {
        self.zero_verdicts().iter().all(|v| v.complete)
    }

    /// The operator is essentially self-adjoint.
    pub fn is_esa(&self) -> bool {
        self.zero_verdicts().iter().all(|v| v.esa)
    }

    pub fn report(&self) -> CompletenessReport {
        let zeros = self.zero_verdicts();
        CompletenessReport {
            classical: zeros.iter().all(|v| v.complete),
            quantum: zeros.iter().all(|v| v.esa),
            elliptic: zeros.is_empty(),
            zeros,
        }
    }

    /// Disjoint localisation intervals, one per zero: the radius is
    /// `min(0.4 * gap, 0.25)` where `gap` is the circular distance to the
    /// nearest other zero (1 for a single zero).
    pub fn localization_plan(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(self.zeros.len());
        for (i, z) in self.zeros.iter().enumerate() {
            let gap = self.gap_at(i);
            out.push(Interval {
                center: z.location,
                radius: (0.8 * gap / 2.0).min(0.25),
            });
        }
        out
    }

    /// Circular distance from zero `i` to its nearest neighbour (1.0 when it
    /// is the only zero).
    pub fn gap_at(&self, i: usize) -> f64 {
        let n = self.zeros.len();
        if n <= 1 {
            return 1.0;
        }
        let x = self.zeros[i].location;
        let prev = self.zeros[(i + n - 1) % n].location;
        let next = self.zeros[(i + 1) % n].location;
        let d = |p: f64, q: f64| {
            let r = (p - q).abs();
            r.min(1.0 - r)
        };
        d(x, prev).min(d(x, next))
    }
}

/// First-order analogue used as a sanity rule: a formally self-adjoint
/// first-order operator on a closed 1-manifold generates a unitary
/// translation flow, hence is essentially self-adjoint regardless of where
/// its coefficient vanishes.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Degree1Rule {
    pub esa: bool,
    pub statement: &'static str,
}

pub fn degree1_esa() -> Degree1Rule {
    Degree1Rule {
        esa: true,
        statement: "a formally self-adjoint first-order operator on a closed one-dimensional \
                    manifold generates a unitary flow and is essentially self-adjoint",
    }
}
