//! Serializable verdict reports with a stable, byte-deterministic layout.
//!
//! The report is plain data: field order is fixed by the struct
//! definitions, floats are printed by the standard shortest-round-trip
//! formatter, and no timestamps or unordered containers appear, so the
//! same input always produces the same bytes.

use serde::{Deserialize, Serialize};

use crate::classify::{CaseTag, CompletenessReport, SturmLiouvilleOperator};
use crate::coeff::BOrder;

/// Vanishing order of `b` at a zero, as reported: a number for finite
/// order, the string `"infinite"` for identically-zero `b`, and `null`
/// (absent order, `b(x0) != 0`) is represented by `Option::None` around
/// this type.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderBField {
    Finite(usize),
    Infinite(String),
}

impl OrderBField {
    pub fn from_border(b: BOrder) -> OrderBField {
        match b {
            BOrder::Finite { order, .. } => OrderBField::Finite(order),
            BOrder::Infinite => OrderBField::Infinite("infinite".to_string()),
        }
    }
}

/// One row of the per-zero verdict table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroRow {
    /// Zero location in `[0, 1)`.
    pub x0: f64,
    /// Vanishing order of `a`.
    pub k: usize,
    /// Vanishing order of `b` (`null` when `b(x0) != 0`).
    pub l: Option<OrderBField>,
    /// `b(x0)`.
    pub b_value: f64,
    pub case: CaseTag,
    pub esa: bool,
    pub complete: bool,
    pub reason: String,
}

/// Top-level classification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    /// The Hamiltonian flow of the symbol is complete.
    pub classical: bool,
    /// The operator is essentially self-adjoint.
    pub quantum: bool,
    /// `a` never vanishes.
    pub elliptic: bool,
    pub zeros: Vec<ZeroRow>,
}

impl JobReport {
    pub fn from_completeness(report: &CompletenessReport) -> JobReport {
        JobReport {
            classical: report.classical,
            quantum: report.quantum,
            elliptic: report.elliptic,
            zeros: report
                .zeros
                .iter()
                .map(|z| ZeroRow {
                    x0: z.record.location,
                    k: z.record.order_a,
                    l: z.record.order_b.map(OrderBField::from_border),
                    b_value: z.record.b_value,
                    case: z.case,
                    esa: z.esa,
                    complete: z.complete,
                    reason: z.reason.clone(),
                })
                .collect(),
        }
    }

    pub fn from_operator(op: &SturmLiouvilleOperator) -> JobReport {
        JobReport::from_completeness(&op.report())
    }

    /// Pretty JSON with a trailing newline; byte-identical across runs.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    #[test]
    fn order_b_field_forms() {
        #[derive(Serialize)]
        struct Probe {
            l: Option<OrderBField>,
        }
        let fin = serde_json::to_string(&Probe {
            l: Some(OrderBField::Finite(2)),
        })
        .unwrap();
        assert_eq!(fin, r#"{"l":2}"#);
        let inf = serde_json::to_string(&Probe {
            l: Some(OrderBField::from_border(BOrder::Infinite)),
        })
        .unwrap();
        assert_eq!(inf, r#"{"l":"infinite"}"#);
        let none = serde_json::to_string(&Probe { l: None }).unwrap();
        assert_eq!(none, r#"{"l":null}"#);
    }

    #[test]
    fn report_round_trips_through_json() {
        for (_, op) in gallery::sturm_gallery() {
            let report = JobReport::from_operator(&op);
            let json = report.to_canonical_json();
            let back: JobReport = serde_json::from_str(&json).unwrap();
            assert_eq!(back, report);
        }
    }

    #[test]
    fn serialization_is_byte_deterministic() {
        let op = gallery::e5();
        let a = JobReport::from_operator(&op).to_canonical_json();
        let b = JobReport::from_operator(&op).to_canonical_json();
        assert_eq!(a, b);
        // Field order is part of the format.
        assert!(a.find("\"classical\"").unwrap() < a.find("\"quantum\"").unwrap());
        assert!(a.find("\"quantum\"").unwrap() < a.find("\"elliptic\"").unwrap());
        assert!(a.find("\"elliptic\"").unwrap() < a.find("\"zeros\"").unwrap());
    }

    #[test]
    fn gallery_rows_carry_expected_invariants() {
        let report = JobReport::from_operator(&gallery::e5());
        assert!(report.classical && report.quantum && !report.elliptic);
        assert_eq!(report.zeros.len(), 1);
        let row = &report.zeros[0];
        assert_eq!(row.k, 4);
        assert_eq!(row.l, Some(OrderBField::Finite(1)));
        assert_eq!(row.case, CaseTag::DegenerateBVanishes);
    }
}
