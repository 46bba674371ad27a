//! Real trigonometric polynomials on the unit circle.
//!
//! All coefficient functions in this crate are finite Fourier series
//! `f(x) = c + sum_n (A_n cos(2 pi n x) + B_n sin(2 pi n x))` with period one,
//! Differentiation, products and Taylor data
//! are computed term by term and are exact up to rounding, which is what
//! keeps zero-order detection and local series expansions trustworthy.
//!
//! Zeros are located by a sign-change scan refined by bisection; zeros of
//! even order never change sign, so the search also recurses into the
//! derivative and keeps the candidates where `f` itself vanishes.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Default absolute-ish tolerance for deciding that a sampled value is zero.
/// Scaled by the coefficient magnitude of the polynomial being probed.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;
/// Default tolerance for order detection, scaled by the coefficient
/// magnitude of each successive derivative.
pub const DEFAULT_ORDER_TOL: f64 = 1e-8;
/// Largest vanishing order the detectors will certify.
pub const DEFAULT_MAX_ORDER: usize = 12;
/// Default number of samples for the sign-change scan.
pub const DEFAULT_GRID: usize = 2048;

/// Errors from zero detection and order measurement.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum CoeffError {
    /// Every Fourier coefficient is below tolerance; the function carries no
    /// zero-structure information.
    #[error("coefficient function is identically zero within tolerance {tol:e}")]
    IdenticallyZero { tol: f64 },
    /// No derivative up to the requested order is nonzero at the point; the
    /// zero is too flat to certify.
    #[error("no derivative up to order {max_order} is nonzero at x0 = {x0}")]
    OrderTooHigh { x0: f64, max_order: usize },
    /// The point handed to a profiling routine is not actually a zero.
    #[error("x0 = {x0} is not a zero: |f(x0)| = {value:e} exceeds tolerance")]
    NotAZero { x0: f64, value: f64 },
}

/// A real trigonometric polynomial `c + sum_n (cos_n cos(2 pi n x) + sin_n sin(2 pi n x))`.
///
/// `cos[j]` and `sin[j]` hold the coefficients of frequency `j + 1`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrigPoly {
    #[serde(rename = "const", default)]
    constant: f64,
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn new(constant: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let mut p = TrigPoly { constant, cos, sin };
        p.trim();
        p
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        TrigPoly::new(0.0, vec![], vec![])
    }

    /// The constant polynomial `c`.
    pub fn constant(c: f64) -> Self {
        TrigPoly::new(c, vec![], vec![])
    }

    /// `amp * cos(2 pi n x)` for `n >= 1`.
    pub fn cos_term(n: usize, amp: f64) -> Self {
        assert!(n >= 1, "frequency must be at least 1");
        let mut cos = vec![0.0; n];
        cos[n - 1] = amp;
        TrigPoly::new(0.0, cos, vec![])
    }

    /// `amp * sin(2 pi n x)` for `n >= 1`.
    pub fn sin_term(n: usize, amp: f64) -> Self {
        assert!(n >= 1, "frequency must be at least 1");
        let mut sin = vec![0.0; n];
        sin[n - 1] = amp;
        TrigPoly::new(0.0, vec![], sin)
    }

    fn trim(&mut self) {
        while self.cos.last() == Some(&0.0) {
            self.cos.pop();
        }
        while self.sin.last() == Some(&0.0) {
            self.sin.pop();
        }
    }

    /// Highest frequency present.
    pub fn degree(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Largest coefficient magnitude; the natural scale for tolerances.
    pub fn coeff_scale(&self) -> f64 {
        let mut m = self.constant.abs();
        for &c in self.cos.iter().chain(self.sin.iter()) {
            m = m.max(c.abs());
        }
        m
    }

    /// True when every coefficient is at most `tol` in magnitude.
    pub fn is_trivially_zero(&self, tol: f64) -> bool {
        self.coeff_scale() <= tol
    }

    pub fn eval(&self, x: f64) -> f64 {
        let theta = 2.0 * PI * x;
        let (s1, c1) = theta.sin_cos();
        let mut acc = self.constant;
        // cos/sin of n*theta by the angle-addition recurrence.
        let (mut cn, mut sn) = (1.0, 0.0);
        for n in 0..self.degree() {
            let (c_next, s_next) = (cn * c1 - sn * s1, sn * c1 + cn * s1);
            cn = c_next;
            sn = s_next;
            if let Some(&a) = self.cos.get(n) {
                acc += a * cn;
            }
            if let Some(&b) = self.sin.get(n) {
                acc += b * sn;
            }
        }
        acc
    }

    /// Exact term-by-term derivative.
    pub fn derivative(&self) -> TrigPoly {
        let deg = self.degree();
        let mut cos = vec![0.0; deg];
        let mut sin = vec![0.0; deg];
        for n in 0..deg {
            let w = 2.0 * PI * (n + 1) as f64;
            if let Some(&b) = self.sin.get(n) {
                cos[n] = w * b;
            }
            if let Some(&a) = self.cos.get(n) {
                sin[n] = -w * a;
            }
        }
        TrigPoly::new(0.0, cos, sin)
    }

    /// `order`-fold derivative.
    pub fn derivative_n(&self, order: usize) -> TrigPoly {
        let mut g = self.clone();
        for _ in 0..order {
            g = g.derivative();
        }
        g
    }

    /// `f(-x)`.
    pub fn reflect(&self) -> TrigPoly {
        TrigPoly::new(
            self.constant,
            self.cos.clone(),
            self.sin.iter().map(|b| -b).collect(),
        )
    }

    pub fn scale(&self, factor: f64) -> TrigPoly {
        TrigPoly::new(
            self.constant * factor,
            self.cos.iter().map(|c| c * factor).collect(),
            self.sin.iter().map(|c| c * factor).collect(),
        )
    }

    /// Complex Fourier coefficients `c_{-N}..c_N` with offset `N = degree()`.
    fn spectrum(&self) -> Vec<Complex64> {
        let n = self.degree();
        let mut c = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        c[n] = Complex64::new(self.constant, 0.0);
        for j in 0..n {
            let a = self.cos.get(j).copied().unwrap_or(0.0);
            let b = self.sin.get(j).copied().unwrap_or(0.0);
            c[n + j + 1] = Complex64::new(a / 2.0, -b / 2.0);
            c[n - j - 1] = Complex64::new(a / 2.0, b / 2.0);
        }
        c
    }

    fn from_spectrum(c: &[Complex64]) -> TrigPoly {
        let n = c.len() / 2;
        let constant = c[n].re;
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for j in 0..n {
            cos[j] = 2.0 * c[n + j + 1].re;
            sin[j] = -2.0 * c[n + j + 1].im;
        }
        TrigPoly::new(constant, cos, sin)
    }

    /// Taylor coefficients `f(x0), f'(x0), f''(x0)/2!, ...` up to `order`.
    pub fn taylor_at(&self, x0: f64, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        let mut g = self.clone();
        let mut factorial = 1.0;
        for j in 0..=order {
            if j > 0 {
                factorial *= j as f64;
                g = g.derivative();
            }
            out.push(g.eval(x0) / factorial);
        }
        out
    }

    /// Zeros in `[0, 1)`, sorted, each listed once regardless of order.
    ///
    /// Sign changes on the sample grid are refined by bisection; zeros of
    /// even order are recovered from zeros of the derivative at which `f`
    /// itself vanishes within tolerance. Bisection on `f` alone places a
    /// zero of order `m` only to within the rounding plateau `~tol^(1/m)`,
    /// wide enough at `m >= 3` to leave duplicate candidates that corrupt
    /// order counts, so every candidate is polished by Newton iteration on
    /// the deepest derivative still vanishing there and clusters keep the
    /// member with the highest measured order.
    pub fn find_zeros(&self, grid_n: usize, tol: f64) -> Result<Vec<f64>, CoeffError> {
        if self.is_trivially_zero(tol) {
            return Err(CoeffError::IdenticallyZero { tol });
        }
        let mut zeros = self.find_zeros_rec(grid_n, tol, DEFAULT_MAX_ORDER);
        zeros.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut zeros: Vec<f64> = merge_sharpest(self, zeros, MERGE_TOL)
            .into_iter()
            .map(|z| self.polish_zero(z))
            .collect();
        zeros.sort_by(|p, q| p.partial_cmp(q).unwrap());
        Ok(merge_sharpest(self, zeros, MERGE_TOL))
    }

    /// [`TrigPoly::find_zeros`] with default grid and tolerance.
    pub fn find_zeros_default(&self) -> Result<Vec<f64>, CoeffError> {
        self.find_zeros(DEFAULT_GRID, DEFAULT_ZERO_TOL)
    }

    fn find_zeros_rec(&self, grid_n: usize, tol: f64, depth: usize) -> Vec<f64> {
        let thresh = tol * self.coeff_scale();
        let mut zeros = Vec::new();

        let mut prev = self.eval(0.0);
        for i in 0..grid_n {
            let (lo, hi) = (i as f64 / grid_n as f64, (i + 1) as f64 / grid_n as f64);
            let next = self.eval(hi);
            if prev == 0.0 {
                zeros.push(lo.rem_euclid(1.0));
            } else if prev * next < 0.0 {
                zeros.push(refine_bisect(self, lo, hi).rem_euclid(1.0));
            }
            prev = next;
        }

        if depth > 0 {
            let d = self.derivative();
            if !d.is_trivially_zero(0.0) {
                for z in d.find_zeros_rec(grid_n, tol, depth - 1) {
                    if self.eval(z).abs() <= thresh {
                        zeros.push(z);
                    }
                }
            }
        }
        zeros
    }

    /// Smallest `k <= max_order` with `f^(k)(x0)` nonzero, and that value.
    ///
    /// Returns `(0, f(x0))` when `x0` is not a zero at all. The per-step
    /// tolerance is `tol` scaled by the coefficient magnitude of the
    /// derivative being tested.
    pub fn zero_order(
        &self,
        x0: f64,
        max_order: usize,
        tol: f64,
    ) -> Result<(usize, f64), CoeffError> {
        if self.is_trivially_zero(tol) {
            return Err(CoeffError::IdenticallyZero { tol });
        }
        let mut g = self.clone();
        for k in 0..=max_order {
            if k > 0 {
                g = g.derivative();
            }
            let value = g.eval(x0);
            if value.abs() > tol * g.coeff_scale() {
                return Ok((k, value));
            }
        }
        Err(CoeffError::OrderTooHigh { x0, max_order })
    }

    /// [`TrigPoly::zero_order`] with default order cap and tolerance.
    pub fn zero_order_default(&self, x0: f64) -> Result<(usize, f64), CoeffError> {
        self.zero_order(x0, DEFAULT_MAX_ORDER, DEFAULT_ORDER_TOL)
    }

    /// Re-locate a candidate zero to full precision.
    ///
    /// If `m` derivatives vanish at the candidate, the true zero is a
    /// simple zero of the `(m-1)`-th derivative, so Newton iteration on
    /// that derivative sharpens the location. A candidate sitting inside
    /// the rounding plateau of a deeper zero under-reports its order, so
    /// when the order measured at the refined point rises, the polish is
    /// repeated against the deeper derivative.
    fn polish_zero(&self, start: f64) -> f64 {
        let mut z = start;
        let mut last_order = 0;
        for _ in 0..DEFAULT_MAX_ORDER {
            let order = match self.zero_order(z, DEFAULT_MAX_ORDER, DEFAULT_ORDER_TOL) {
                Ok((m, _)) if m > 0 => m,
                _ => break,
            };
            if order <= last_order {
                break;
            }
            let g = self.derivative_n(order - 1);
            let dg = g.derivative();
            let mut cand = z;
            for _ in 0..60 {
                let den = dg.eval(cand);
                if den == 0.0 {
                    break;
                }
                let step = g.eval(cand) / den;
                cand -= step;
                if step.abs() <= 1e-16 {
                    break;
                }
            }
            if !cand.is_finite() || (cand - start).abs() > 1e-3 {
                break;
            }
            match self.zero_order(cand, DEFAULT_MAX_ORDER, DEFAULT_ORDER_TOL) {
                Ok((m, _)) if m >= order => z = cand,
                _ => break,
            }
            last_order = order;
        }
        z.rem_euclid(1.0)
    }
}

impl std::ops::Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let deg = self.degree().max(rhs.degree());
        let get = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
        TrigPoly::new(
            self.constant + rhs.constant,
            (0..deg).map(|j| get(&self.cos, j) + get(&rhs.cos, j)).collect(),
            (0..deg).map(|j| get(&self.sin, j) + get(&rhs.sin, j)).collect(),
        )
    }
}

impl std::ops::Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl std::ops::Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        self + &(-rhs)
    }
}

impl std::ops::Mul for &TrigPoly {
    type Output = TrigPoly;
    /// Product via convolution of complex Fourier coefficients.
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let (p, q) = (self.spectrum(), rhs.spectrum());
        let (np, nq) = (self.degree(), rhs.degree());
        let n = np + nq;
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        for (i, pi) in p.iter().enumerate() {
            if pi.norm_sqr() == 0.0 {
                continue;
            }
            for (j, qj) in q.iter().enumerate() {
                // frequencies (i - np) + (j - nq), stored at offset n
                out[i + j] += pi * qj;
            }
        }
        TrigPoly::from_spectrum(&out)
    }
}

const MERGE_TOL: f64 = 1e-8;

fn refine_bisect(f: &TrigPoly, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f.eval(lo);
    if flo == 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Deduplicate a sorted list of circle points, including the 1.0 ~ 0.0 wrap.
///
/// Members of one cluster differ in sharpness: a candidate refined through
/// a deep derivative sits at machine precision, while one from bisection on
/// `f` itself sits inside the rounding plateau and under-reports its order.
/// Each cluster therefore keeps the member with the highest measured order
/// (first seen wins ties), not simply the smallest coordinate.
fn merge_sharpest(f: &TrigPoly, zeros: Vec<f64>, tol: f64) -> Vec<f64> {
    let score = |z: f64| match f.zero_order(z, DEFAULT_MAX_ORDER, DEFAULT_ORDER_TOL) {
        Ok((m, _)) => m,
        // Deeper than the cap is the sharpest possible measurement.
        Err(_) => usize::MAX,
    };
    let mut out: Vec<(f64, usize)> = Vec::new();
    for z in zeros {
        match out.last_mut() {
            Some(last) if z - last.0 <= tol => {
                let s = score(z);
                if s > last.1 {
                    *last = (z, s);
                }
            }
            _ => out.push((z, score(z))),
        }
    }
    while out.len() > 1 {
        let (first, last) = (out[0], *out.last().unwrap());
        if (1.0 - last.0) + first.0 <= tol {
            // Same zero seen across the wrap; drop the duller member.
            if last.1 > first.1 {
                out.remove(0);
            } else {
                out.pop();
            }
        } else {
            break;
        }
    }
    out.into_iter().map(|p| p.0).collect()
}

/// How `b` behaves at a zero of `a` with `b(x0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum BOrder {
    /// `b` vanishes to finite order `order` with leading derivative `lead`.
    Finite { order: usize, lead: f64 },
    /// `b` is identically zero.
    Infinite,
}

/// Local data of one zero of `a`, together with the behaviour of `b` there.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ZeroRecord {
    /// Zero location in `[0, 1)`.
    pub location: f64,
    /// Vanishing order `k >= 1` of `a`.
    pub order_a: usize,
    /// First nonzero derivative `a^(k)(x0)`.
    pub a_lead: f64,
    /// `b(x0)`.
    pub b_value: f64,
    /// Vanishing order of `b` at `x0`; `None` when `b(x0) != 0`.
    pub order_b: Option<BOrder>,
}

impl ZeroRecord {
    pub fn is_simple(&self) -> bool {
        self.order_a == 1
    }

    pub fn b_vanishes(&self) -> bool {
        self.order_b.is_some()
    }

    /// True when the order of `b` is at least `m` (always true for `b == 0`).
    pub fn order_b_at_least(&self, m: usize) -> bool {
        match self.order_b {
            Some(BOrder::Finite { order, .. }) => order >= m,
            Some(BOrder::Infinite) => true,
            None => m == 0,
        }
    }
}

/// Measure the orders of `a` and `b` at a zero `x0` of `a`.
pub fn zero_profile(
    a: &TrigPoly,
    b: &TrigPoly,
    x0: f64,
    tol: f64,
) -> Result<ZeroRecord, CoeffError> {
    let (order_a, a_lead) = a.zero_order(x0, DEFAULT_MAX_ORDER, tol)?;
    if order_a == 0 {
        return Err(CoeffError::NotAZero { x0, value: a_lead });
    }
    let b_value = b.eval(x0);
    let order_b = if b.is_trivially_zero(tol) {
        Some(BOrder::Infinite)
    } else if b_value.abs() > tol * b.coeff_scale() {
        None
    } else {
        let (order, lead) = b.zero_order(x0, DEFAULT_MAX_ORDER, tol)?;
        Some(BOrder::Finite { order, lead })
    };
    Ok(ZeroRecord {
        location: x0,
        order_a,
        a_lead,
        b_value: if order_b.is_some() { 0.0 } else { b_value },
        order_b,
    })
}
