//! Truncated complex power-series arithmetic for the local solution engines.

use num_complex::Complex64 as C;

pub(crate) fn zero() -> C {
    C::new(0.0, 0.0)
}

pub(crate) fn get(a: &[C], j: usize) -> C {
    a.get(j).copied().unwrap_or_else(zero)
}

/// Product truncated to orders `0..=n`.
pub(crate) fn mul_trunc(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![zero(); n + 1];
    for (i, &ai) in a.iter().enumerate().take(n + 1) {
        if ai == zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Reciprocal of a series with `a[0] != 0`, to order `n`.
pub(crate) fn recip_trunc(a: &[C], n: usize) -> Vec<C> {
    let a0 = a[0];
    let mut out = vec![zero(); n + 1];
    out[0] = 1.0 / a0;
    for s in 1..=n {
        let mut acc = zero();
        for m in 0..s {
            acc += get(a, s - m) * out[m];
        }
        out[s] = -acc / a0;
    }
    out
}

/// Quotient `a / b` to order `n`, requiring `b[0] != 0`.
pub(crate) fn div_trunc(a: &[C], b: &[C], n: usize) -> Vec<C> {
    mul_trunc(a, &recip_trunc(b, n), n)
}

/// Termwise derivative of a Taylor series.
pub(crate) fn derive(a: &[C]) -> Vec<C> {
    if a.len() <= 1 {
        return vec![];
    }
    (1..a.len()).map(|j| a[j] * j as f64).collect()
}

/// Largest coefficient magnitude among the first `window` entries.
pub(crate) fn scale_of(a: &[C], window: usize) -> f64 {
    a.iter()
        .take(window)
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max)
}

/// Index of the first coefficient exceeding `tol` in magnitude.
pub(crate) fn leading_order(a: &[C], tol: f64) -> Option<usize> {
    a.iter().position(|c| c.norm() > tol)
}

/// Divide by `x^m`: drop the first `m` coefficients, which the caller has
/// already checked to vanish within tolerance.
pub(crate) fn shift_down(a: &[C], m: usize) -> Vec<C> {
    a[m.min(a.len())..].to_vec()
}

/// Horner evaluation of `sum_j a_j h^j` at real `h`.
pub(crate) fn eval(a: &[C], h: f64) -> C {
    let mut acc = zero();
    for &c in a.iter().rev() {
        acc = acc * h + c;
    }
    acc
}

/// True when coefficient `j` is negligible next to its immediate
/// neighbours — an exact parity zero (or rounding residue of one) rather
/// than a genuinely small term. Comparing against neighbours instead of
/// the global maximum keeps factorially growing tails from swallowing all
/// the early coefficients.
fn parity_zero(a: &[C], j: usize) -> bool {
    let lo = j.saturating_sub(1);
    let hi = (j + 2).min(a.len());
    let local = a[lo..hi].iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    a[j].norm() <= 1e-13 * local
}

/// Evaluation with optimal truncation for asymptotic series: terms are
/// accumulated until their magnitude stops decreasing. Exactly vanishing
/// coefficients (parity gaps) are skipped by the turn detection, or they
/// would masquerade as the minimum term.
pub(crate) fn eval_optimal(a: &[C], h: f64) -> C {
    let mut acc = zero();
    let mut pow = 1.0;
    let mut last = f64::INFINITY;
    for (j, &c) in a.iter().enumerate() {
        let term = c * pow;
        if !parity_zero(a, j) {
            let mag = term.norm();
            if mag > last && last < 1e-6 * acc.norm().max(1e-300) {
                break;
            }
            acc += term;
            last = mag;
        }
        pow *= h;
    }
    acc
}

/// Largest `h` (from a descending grid) at which an asymptotic series can
/// reach relative accuracy `tol`: the accuracy floor of optimal truncation
/// at `h` is the smallest nonzero term magnitude `min_j |a_j h^j|`,
/// measured relative to the leading term — the value scale of the sum
/// (exactly vanishing coefficients, e.g. from parity, say nothing about
/// the attainable accuracy).
pub(crate) fn asymptotic_trust(a: &[C], tol: f64) -> f64 {
    let mut h = 0.5;
    while h > 1e-6 {
        let mut pow = 1.0_f64;
        let mut floor = f64::INFINITY;
        let mut lead = 0.0_f64;
        for (j, c) in a.iter().enumerate() {
            if !parity_zero(a, j) {
                let mag = c.norm() * pow;
                if lead == 0.0 {
                    lead = mag;
                }
                floor = floor.min(mag);
            }
            pow *= h;
        }
        if floor <= tol * lead.max(1e-300) {
            return h;
        }
        h *= 0.8;
    }
    1e-6
}
