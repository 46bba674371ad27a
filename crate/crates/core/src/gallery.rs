//! Built-in example operators and surface models used throughout the test
//! suite and the command-line interface.
//!
//! The six circle operators cover every case of the classification:
//!
//! | name | a                      | b           | zeros of a   | verdict            |
//! |------|------------------------|-------------|--------------|--------------------|
//! | e1   | sin(2 pi x)            | 1           | 0, 1/2 (k=1) | incomplete, not ESA|
//! | e2   | (1 - cos(2 pi x))/2    | 0           | 0 (k=2)      | complete, ESA      |
//! | e3   | (1 - cos(2 pi x))/2    | -2 pi       | 0 (k=2)      | incomplete, not ESA|
//! | e4   | (1 - cos(2 pi x))/2    | sin(2 pi x) | 0 (k=2, l=1) | complete, ESA      |
//! | e5   | ((1 - cos(2 pi x))/2)^2| sin(2 pi x) | 0 (k=4, l=1) | complete, ESA      |
//! | e6   | 1                      | cos(2 pi x) | none         | complete, ESA      |

use crate::classify::SturmLiouvilleOperator;
use crate::coeff::TrigPoly;
use crate::lorentz::LorentzModel;

/// `(1 - cos(2 pi x))/2 = sin^2(pi x)`: the basic order-2 bump.
pub fn bump() -> TrigPoly {
    TrigPoly::new(0.5, vec![-0.5], vec![])
}

/// Trigonometric polynomial vanishing to order exactly `k` at `x = 0` with
/// unit leading Taylor coefficient (`f(x) = x^k + O(x^{k+1})`), built from
/// `sin(2 pi x)/(2 pi)` and `(1 - cos(2 pi x))/(2 pi^2)`.
pub fn vanishing_profile(k: usize) -> TrigPoly {
    assert!(k >= 1, "order must be at least 1");
    let pi = std::f64::consts::PI;
    let unit_bump = bump().scale(1.0 / (pi * pi)); // x^2 + O(x^4)
    let unit_sin = TrigPoly::sin_term(1, 1.0 / (2.0 * pi)); // x + O(x^3)
    let mut out = if k % 2 == 0 {
        TrigPoly::constant(1.0)
    } else {
        unit_sin
    };
    for _ in 0..k / 2 {
        out = &out * &unit_bump;
    }
    out
}

pub fn e1() -> SturmLiouvilleOperator {
    SturmLiouvilleOperator::new(TrigPoly::sin_term(1, 1.0), TrigPoly::constant(1.0)).unwrap()
}

pub fn e2() -> SturmLiouvilleOperator {
    SturmLiouvilleOperator::new(bump(), TrigPoly::zero()).unwrap()
}

pub fn e3() -> SturmLiouvilleOperator {
    SturmLiouvilleOperator::new(bump(), TrigPoly::constant(-std::f64::consts::TAU)).unwrap()
}

pub fn e4() -> SturmLiouvilleOperator {
    SturmLiouvilleOperator::new(bump(), TrigPoly::sin_term(1, 1.0)).unwrap()
}

pub fn e5() -> SturmLiouvilleOperator {
    SturmLiouvilleOperator::new(&bump() * &bump(), TrigPoly::sin_term(1, 1.0)).unwrap()
}

pub fn e6() -> SturmLiouvilleOperator {
    SturmLiouvilleOperator::new(TrigPoly::constant(1.0), TrigPoly::cos_term(1, 1.0)).unwrap()
}

/// The six circle operators, in order.
pub fn sturm_gallery() -> Vec<(&'static str, SturmLiouvilleOperator)> {
    vec![
        ("e1", e1()),
        ("e2", e2()),
        ("e3", e3()),
        ("e4", e4()),
        ("e5", e5()),
        ("e6", e6()),
    ]
}

/// Plane minus the origin with `2 dx dy / (x^2 + y^2)`.
pub fn clifton_pohl() -> LorentzModel {
    LorentzModel::CliftonPohl
}

/// Torus with `g = dx (dy - a(y) dx)` and the order-2 profile
/// `a(y) = (1 - cos(2 pi y))/(2 pi^2) = y^2 + O(y^4)`.
pub fn normal_form_quadratic() -> LorentzModel {
    let pi = std::f64::consts::PI;
    LorentzModel::NormalForm {
        a_profile: bump().scale(1.0 / (pi * pi)),
    }
}

/// Half-plane `x > 0` with `2 dx dy`, the flat quotient model.
pub fn simple_quotient() -> LorentzModel {
    LorentzModel::SimpleQuotient
}

/// The three surface models, in order.
pub fn lorentz_gallery() -> Vec<(&'static str, LorentzModel)> {
    vec![
        ("clifton_pohl", clifton_pohl()),
        ("normal_form", normal_form_quadratic()),
        ("simple_quotient", simple_quotient()),
    ]
}
