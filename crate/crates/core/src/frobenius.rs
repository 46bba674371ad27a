//! Local solution bases at a degenerate point of the operator.
//!
//! Near a zero `x0` of the leading coefficient the eigenvalue equation
//! `a u'' + b2 u' + c u = 0` (with `b2 = a' - i b` and
//! `c = -(i/2) b' [+ a''/4] - lambda`) is analysed in the local coordinate
//! `h = x - x0` (right side) or `h = x0 - x` (left side).  Depending on how
//! the lower-order coefficients vanish, the equation is
//!
//! * regular singular: a Frobenius basis `h^r * (power series)`, with a
//!   logarithmic partner when the indicial roots differ by an integer;
//! * irregular with dominant first-order part (`k >= l + 2` where `l` is the
//!   vanishing order of `b`): one solution behaves like `h^{-l/2}` times an
//!   asymptotic power series;
//! * oscillatory (`b(x0) != 0` at a degenerate zero): a bounded smooth
//!   solution and a partner `u3 * exp(i E)` with a real Laurent phase `E`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::series;

type C = Complex64;

/// Relative tolerance used to decide that a Taylor coefficient vanishes.
const COEFF_REL_TOL: f64 = 1e-8;
/// Relative tolerance on the structural constants of the irregular normal
/// form (coefficient one on the `h d/dh` term, constant term `l/2`).
const SHAPE_REL_TOL: f64 = 1e-7;
/// Extra Taylor orders kept beyond the series truncation so that residual
/// balances above the truncation order can be formed.
pub const RESIDUAL_MARGIN: usize = 6;

/// Which side of the singular point the local coordinate covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `h = x - x0 > 0`.
    Right,
    /// `h = x0 - x > 0`.
    Left,
}

impl Side {
    pub fn label(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FrobeniusError {
    #[error("point {x0} is not among the recorded zeros of the leading coefficient")]
    NoSuchZero { x0: f64 },
    #[error(
        "equation is not regular singular at this zero: k = {k}, ord(b2) = {ord_b2:?}, ord(c) = {ord_c:?}"
    )]
    NotRegularSingular {
        k: usize,
        ord_b2: Option<usize>,
        ord_c: Option<usize>,
    },
    #[error("recurrence pivot vanished at order {index}")]
    RecurrenceBreakdown { index: usize },
    #[error("local data does not match the expected normal form: {0}")]
    ShapeMismatch(String),
    #[error("requested root {requested} does not match either indicial root")]
    RootMismatch { requested: C },
}

/// Taylor data of the eigenvalue equation at a zero of `a`, in the local
/// coordinate of one side.
///
/// All three series share the truncation order `order()`, and
/// `taylor_a[k]` is the (nonzero) leading coefficient of `a`.
#[derive(Clone, Debug)]
pub struct LocalODE {
    pub taylor_a: Vec<C>,
    pub taylor_b2: Vec<C>,
    pub taylor_c: Vec<C>,
    /// Vanishing order of `a` at the expansion point.
    pub k: usize,
    /// Spectral parameter absorbed into the constant term of `c`.
    pub lambda: C,
    /// Expansion point on the circle.
    pub x0: f64,
    /// Side of `x0` the local coordinate covers.
    pub side: Side,
}

impl LocalODE {
    /// Builds local data directly from Taylor coefficients (used by tests
    /// and synthetic models).  Series are zero-padded to a common length.
    pub fn from_taylor(
        taylor_a: Vec<C>,
        taylor_b2: Vec<C>,
        taylor_c: Vec<C>,
        k: usize,
        lambda: C,
    ) -> Self {
        let len = taylor_a
            .len()
            .max(taylor_b2.len())
            .max(taylor_c.len())
            .max(k + 5);
        let pad = |mut v: Vec<C>| {
            v.resize(len, series::zero());
            v
        };
        LocalODE {
            taylor_a: pad(taylor_a),
            taylor_b2: pad(taylor_b2),
            taylor_c: pad(taylor_c),
            k,
            lambda,
            x0: 0.0,
            side: Side::Right,
        }
    }

    /// Truncation order shared by the three Taylor series.
    pub fn order(&self) -> usize {
        self.taylor_a.len() - 1
    }

    /// Reconstructs the Taylor series of `b` from `b2 = a' - i b`.
    pub fn taylor_b(&self) -> Vec<C> {
        let da = series::derive(&self.taylor_a);
        (0..self.taylor_b2.len())
            .map(|j| C::i() * (self.taylor_b2[j] - series::get(&da, j)))
            .collect()
    }

    fn tol_for(&self, v: &[C]) -> f64 {
        let window = (self.k + 4).min(v.len());
        COEFF_REL_TOL * series::scale_of(v, window).max(1e-300)
    }

    fn ord_b2(&self) -> Option<usize> {
        series::leading_order(&self.taylor_b2, self.tol_for(&self.taylor_b2))
    }

    fn ord_c(&self) -> Option<usize> {
        series::leading_order(&self.taylor_c, self.tol_for(&self.taylor_c))
    }

    /// Regular singular structure: `b2` vanishes to order `>= k - 1` and `c`
    /// to order `>= k - 2`.
    pub fn is_regular_singular(&self) -> bool {
        let ord_b2_ok = match self.ord_b2() {
            Some(o) => o + 1 >= self.k,
            None => true,
        };
        let ord_c_ok = match self.ord_c() {
            Some(o) => o + 2 >= self.k,
            None => true,
        };
        ord_b2_ok && ord_c_ok
    }

    /// Recurrence polynomial
    /// `F_j(rho) = a_{k+j} rho (rho - 1) + b2_{k-1+j} rho + c_{k-2+j}`,
    /// with out-of-range indices read as zero.  `F_0` is the indicial
    /// polynomial.
    fn f_poly(&self, j: usize, rho: C) -> C {
        let a = series::get(&self.taylor_a, self.k + j);
        let b = if self.k + j >= 1 {
            series::get(&self.taylor_b2, self.k + j - 1)
        } else {
            series::zero()
        };
        let c = if self.k + j >= 2 {
            series::get(&self.taylor_c, self.k + j - 2)
        } else {
            series::zero()
        };
        a * rho * (rho - 1.0) + b * rho + c
    }

    /// Derivative of `F_j` in `rho`.
    fn f_poly_prime(&self, j: usize, rho: C) -> C {
        let a = series::get(&self.taylor_a, self.k + j);
        let b = if self.k + j >= 1 {
            series::get(&self.taylor_b2, self.k + j - 1)
        } else {
            series::zero()
        };
        a * (rho * 2.0 - 1.0) + b
    }
}

/// Expands the eigenvalue equation of `op` at the zero `x0` to Taylor order
/// `order`, on the requested side.
pub fn expand_operator(
    op: &crate::classify::SturmLiouvilleOperator,
    x0: f64,
    side: Side,
    lambda: C,
    order: usize,
) -> Result<LocalODE, FrobeniusError> {
    let record = op
        .zeros()
        .iter()
        .find(|z| (z.location - x0).abs() < 1e-7)
        .ok_or(FrobeniusError::NoSuchZero { x0 })?;
    let k = record.order_a;
    let order = order.max(k + 4);

    let a = op.a();
    let b = op.b();
    let ta = a.taylor_at(x0, order);
    let tb = b.taylor_at(x0, order);
    let tda = a.derivative().taylor_at(x0, order);
    let tdb = b.derivative().taylor_at(x0, order);
    let tdda = a.derivative_n(2).taylor_at(x0, order);

    let mut taylor_a = Vec::with_capacity(order + 1);
    let mut taylor_b2 = Vec::with_capacity(order + 1);
    let mut taylor_c = Vec::with_capacity(order + 1);
    for j in 0..=order {
        taylor_a.push(C::new(ta[j], 0.0));
        taylor_b2.push(C::new(tda[j], -tb[j]));
        let mut cj = C::new(0.0, -0.5 * tdb[j]);
        if op.include_a4() {
            cj += C::new(0.25 * tdda[j], 0.0);
        }
        if j == 0 {
            cj -= lambda;
        }
        taylor_c.push(cj);
    }

    let mut ode = LocalODE {
        taylor_a,
        taylor_b2,
        taylor_c,
        k,
        lambda,
        x0,
        side: Side::Right,
    };
    if side == Side::Left {
        ode = reflect_local(&ode);
    }
    Ok(ode)
}

/// Rewrites right-side local data in the left-side coordinate `s = x0 - x`.
/// The substitution `u(x) = v(s)` maps the equation to
/// `a(x0-s) v'' - b2(x0-s) v' + c(x0-s) v = 0`, i.e. coefficientwise
/// `a_j -> (-1)^j a_j`, `b2_j -> -(-1)^j b2_j`, `c_j -> (-1)^j c_j`; the new
/// first-order coefficient equals `d/ds[a(x0-s)] - i(-b(x0-s))`, so the data
/// stays of Sturm-Liouville type with `b` replaced by `-b(x0 - s)`.
fn reflect_local(ode: &LocalODE) -> LocalODE {
    let sgn = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let n = ode.taylor_a.len();
    let mut taylor_a = Vec::with_capacity(n);
    let mut taylor_b2 = Vec::with_capacity(n);
    let mut taylor_c = Vec::with_capacity(n);
    for j in 0..n {
        let s = sgn(j);
        taylor_a.push(ode.taylor_a[j] * s);
        taylor_b2.push(-ode.taylor_b2[j] * s);
        taylor_c.push(ode.taylor_c[j] * s);
    }
    LocalODE {
        taylor_a,
        taylor_b2,
        taylor_c,
        k: ode.k,
        lambda: ode.lambda,
        x0: ode.x0,
        side: Side::Left,
    }
}

/// Indicial polynomial `I(r) = a2 r(r-1) + a1 r + a0` of a regular singular
/// point, with roots sorted by descending real part (descending imaginary
/// part on ties).
#[derive(Clone, Debug)]
pub struct IndicialEquation {
    pub a2: C,
    pub a1: C,
    pub a0: C,
    pub roots: [C; 2],
    /// `Some(n)` when `roots[0] - roots[1]` is the nonnegative integer `n`.
    pub resonant: Option<usize>,
}

impl IndicialEquation {
    pub fn eval(&self, r: C) -> C {
        self.a2 * r * (r - 1.0) + self.a1 * r + self.a0
    }

    pub fn eval_prime(&self, r: C) -> C {
        self.a2 * (r * 2.0 - 1.0) + self.a1
    }

    fn scale_at(&self, r: C) -> f64 {
        let rn = r.norm();
        self.a2.norm() * rn * (rn + 1.0) + self.a1.norm() * rn + self.a0.norm()
    }
}

/// Computes the indicial equation of a regular singular local model.
pub fn indicial_equation(ode: &LocalODE) -> Result<IndicialEquation, FrobeniusError> {
    if !ode.is_regular_singular() {
        return Err(FrobeniusError::NotRegularSingular {
            k: ode.k,
            ord_b2: ode.ord_b2(),
            ord_c: ode.ord_c(),
        });
    }
    let a2 = ode.taylor_a[ode.k];
    let a1 = series::get(&ode.taylor_b2, ode.k - 1);
    let a0 = if ode.k >= 2 {
        series::get(&ode.taylor_c, ode.k - 2)
    } else {
        series::zero()
    };

    // Stable roots of a2 r^2 + (a1 - a2) r + a0.
    let qb = a1 - a2;
    let disc = qb * qb - 4.0 * a2 * a0;
    let sq = disc.sqrt();
    // Pick the square-root sign that avoids cancellation in qb + sq.
    let sq = if (qb.conj() * sq).re < 0.0 { -sq } else { sq };
    let q = -(qb + sq) / 2.0;
    let (r1, r2) = if q.norm() < 1e-300 {
        let r = -qb / (2.0 * a2);
        (r, r)
    } else {
        (q / a2, a0 / q)
    };
    let mut roots = [r1, r2];
    roots.sort_by(|p, q| {
        (q.re, q.im)
            .partial_cmp(&(p.re, p.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let diff = roots[0] - roots[1];
    let gap = diff.re.round();
    let resonant = if diff.im.abs() <= 1e-9 * (1.0 + diff.norm())
        && (diff.re - gap).abs() <= 1e-9 * (1.0 + diff.norm())
        && gap >= 0.0
    {
        Some(gap as usize)
    } else {
        None
    };

    Ok(IndicialEquation {
        a2,
        a1,
        a0,
        roots,
        resonant,
    })
}

/// One Frobenius solution `u(h) = h^r (v3(h) + ln(h) v2(h))` of the local
/// equation, truncated at order `n`.
#[derive(Clone, Debug)]
pub struct FrobeniusSeries {
    pub exponent: C,
    pub side: Side,
    /// Power-series part `v3`, normalised to `v3[0] = 1`.
    pub coeffs: Vec<C>,
    /// Logarithmic part `v2`; `None` when the solution is log-free.
    pub log_partner: Option<Vec<C>>,
    pub n: usize,
}

impl FrobeniusSeries {
    pub fn has_log(&self) -> bool {
        self.log_partner.is_some()
    }

    /// Value at local coordinate `h > 0`.
    pub fn eval(&self, h: f64) -> C {
        let hr = C::new(h, 0.0).powc(self.exponent);
        let v3 = series::eval(&self.coeffs, h);
        match &self.log_partner {
            None => hr * v3,
            Some(v2) => hr * (v3 + h.ln() * series::eval(v2, h)),
        }
    }

    /// Derivative in the local coordinate.
    pub fn eval_deriv(&self, h: f64) -> C {
        let r = self.exponent;
        let hr1 = C::new(h, 0.0).powc(r - 1.0);
        let v3 = series::eval(&self.coeffs, h);
        let dv3 = series::eval(&series::derive(&self.coeffs), h);
        match &self.log_partner {
            None => hr1 * (r * v3 + h * dv3),
            Some(v2) => {
                let w = series::eval(v2, h);
                let dw = series::eval(&series::derive(v2), h);
                hr1 * (r * v3 + h * dv3 + h.ln() * (r * w + h * dw) + w)
            }
        }
    }

    /// Magnitude of the defect `L[u_trunc](h)` coming from orders above the
    /// truncation.  Balances at or below the truncation order vanish
    /// identically by the recurrence, so only `n < s <= n + margin` enter;
    /// the caller must have expanded the operator with enough margin.
    pub fn residual_at(&self, ode: &LocalODE, h: f64) -> f64 {
        let margin = ode
            .order()
            .saturating_sub(ode.k + self.n)
            .min(RESIDUAL_MARGIN);
        let r = self.exponent;
        let mut acc = series::zero();
        let mut acc_log = series::zero();
        let mut pow = h.powi((self.n + 1) as i32);
        for s in (self.n + 1)..=(self.n + margin) {
            let mut bal = series::zero();
            let mut bal_log = series::zero();
            for (m, &cm) in self.coeffs.iter().enumerate() {
                bal += ode.f_poly(s - m, r + m as f64) * cm;
            }
            if let Some(v2) = &self.log_partner {
                for (j, &vj) in v2.iter().enumerate() {
                    bal += ode.f_poly_prime(s - j, r + j as f64) * vj;
                    bal_log += ode.f_poly(s - j, r + j as f64) * vj;
                }
            }
            acc += bal * pow;
            acc_log += bal_log * pow;
            pow *= h;
        }
        let hk2 = h.powi(ode.k as i32 - 2);
        let hr = h.powf(r.re);
        hr * hk2 * (acc + h.ln() * acc_log).norm()
    }

    /// Least-squares slope of `log10 residual` against `log10 h`.
    pub fn residual_slope(&self, ode: &LocalODE, hs: &[f64]) -> f64 {
        let pts: Vec<(f64, f64)> = hs
            .iter()
            .map(|&h| (h.log10(), self.residual_at(ode, h).max(1e-300).log10()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    /// Half the empirical convergence radius, inferred from coefficient
    /// ratios in the tail of the series.
    pub fn trust_radius(&self) -> f64 {
        let v = &self.coeffs;
        let mut ratios: Vec<f64> = Vec::new();
        let lo = v.len().saturating_sub(8).max(1);
        for m in lo..v.len() {
            let num = v[m - 1].norm();
            let den = v[m].norm();
            if den > 1e-300 && num > 1e-300 {
                ratios.push(num / den);
            }
        }
        if ratios.is_empty() {
            return 0.25;
        }
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = ratios[ratios.len() / 2];
        (0.5 * median).clamp(1e-3, 0.5)
    }
}

/// Builds the Frobenius solution attached to `root` (one of the two indicial
/// roots) to series order `n`.  For the smaller root of a resonant pair the
/// logarithmic partner is constructed when the resonant balance demands it.
pub fn frobenius_series(
    ode: &LocalODE,
    root: C,
    n: usize,
) -> Result<FrobeniusSeries, FrobeniusError> {
    let eq = indicial_equation(ode)?;
    let n = n.min(ode.order().saturating_sub(ode.k));
    let close = |p: C, q: C| (p - q).norm() <= 1e-7 * (1.0 + q.norm());
    let is_top = close(root, eq.roots[0]);
    let is_bottom = close(root, eq.roots[1]);
    if !is_top && !is_bottom {
        return Err(FrobeniusError::RootMismatch { requested: root });
    }

    match eq.resonant {
        Some(gap) if is_bottom => log_partner_series(ode, &eq, gap, n),
        _ => {
            let root = if is_top { eq.roots[0] } else { eq.roots[1] };
            let coeffs = plain_series(ode, &eq, root, n)?;
            Ok(FrobeniusSeries {
                exponent: root,
                side: ode.side,
                coeffs,
                log_partner: None,
                n,
            })
        }
    }
}

fn plain_series(
    ode: &LocalODE,
    eq: &IndicialEquation,
    root: C,
    n: usize,
) -> Result<Vec<C>, FrobeniusError> {
    let mut c = vec![series::zero(); n + 1];
    c[0] = C::new(1.0, 0.0);
    for s in 1..=n {
        let pivot = eq.eval(root + s as f64);
        if pivot.norm() <= 1e-12 * eq.scale_at(root + s as f64).max(1.0) {
            return Err(FrobeniusError::RecurrenceBreakdown { index: s });
        }
        let mut acc = series::zero();
        for (m, &cm) in c.iter().enumerate().take(s) {
            acc += ode.f_poly(s - m, root + m as f64) * cm;
        }
        c[s] = -acc / pivot;
    }
    Ok(c)
}

/// Solution attached to the smaller root `r2` of a resonant pair
/// `r1 = r2 + gap`: `u = h^{r2} (v3 + ln(h) v2)` with `v2 = K h^{gap} v1`,
/// where `v1` is the series of the larger root and `K` balances the
/// recurrence at the resonant order (`K = 0` when no log is needed).
fn log_partner_series(
    ode: &LocalODE,
    eq: &IndicialEquation,
    gap: usize,
    n: usize,
) -> Result<FrobeniusSeries, FrobeniusError> {
    let r1 = eq.roots[0];
    let r2 = eq.roots[1];
    let c1 = plain_series(ode, eq, r1, n)?;

    let mut d = vec![series::zero(); n + 1];
    let mut kconst = series::zero();
    if gap == 0 {
        // Double root: the log multiplier is the primary series itself.
        kconst = C::new(1.0, 0.0);
        for s in 1..=n {
            let pivot = eq.eval(r2 + s as f64);
            if pivot.norm() <= 1e-12 * eq.scale_at(r2 + s as f64).max(1.0) {
                return Err(FrobeniusError::RecurrenceBreakdown { index: s });
            }
            let mut acc = series::zero();
            for (m, &dm) in d.iter().enumerate().take(s) {
                acc += ode.f_poly(s - m, r2 + m as f64) * dm;
            }
            for (m, &cm) in c1.iter().enumerate().take(s + 1) {
                acc += ode.f_poly_prime(s - m, r2 + m as f64) * cm;
            }
            d[s] = -acc / pivot;
        }
        // Normalise the power part to start at 1 by adding the primary
        // solution, which leaves the log part untouched.
        for (dm, &cm) in d.iter_mut().zip(c1.iter()) {
            *dm += cm;
        }
    } else {
        d[0] = C::new(1.0, 0.0);
        for s in 1..=n {
            if s == gap {
                // The pivot I(r2 + gap) = I(r1) vanishes; the balance at this
                // order fixes the log strength instead, and d[gap] stays zero
                // (a free choice of basis).
                let mut acc = series::zero();
                for (m, &dm) in d.iter().enumerate().take(s) {
                    acc += ode.f_poly(s - m, r2 + m as f64) * dm;
                }
                let ip = eq.eval_prime(r1);
                if ip.norm() <= 1e-12 * eq.scale_at(r1).max(1.0) {
                    return Err(FrobeniusError::RecurrenceBreakdown { index: s });
                }
                kconst = -acc / ip;
                continue;
            }
            let pivot = eq.eval(r2 + s as f64);
            if pivot.norm() <= 1e-12 * eq.scale_at(r2 + s as f64).max(1.0) {
                return Err(FrobeniusError::RecurrenceBreakdown { index: s });
            }
            let mut acc = series::zero();
            for (m, &dm) in d.iter().enumerate().take(s) {
                acc += ode.f_poly(s - m, r2 + m as f64) * dm;
            }
            if s > gap {
                for (m, &cm) in c1.iter().enumerate().take(s - gap + 1) {
                    acc += kconst * ode.f_poly_prime(s - gap - m, r1 + m as f64) * cm;
                }
            }
            d[s] = -acc / pivot;
        }
    }

    let mut v2 = vec![series::zero(); n + 1];
    for (m, &cm) in c1.iter().enumerate() {
        if m + gap <= n {
            v2[m + gap] = kconst * cm;
        }
    }
    let log_partner = if v2.iter().any(|v| v.norm() > 1e-14) {
        Some(v2)
    } else {
        None
    };
    Ok(FrobeniusSeries {
        exponent: r2,
        side: ode.side,
        coeffs: d,
        log_partner,
        n,
    })
}

/// Square integrability of `h^r (log factors)` near `h = 0`: holds exactly
/// when `Re r > -1/2`; a logarithmic factor never moves the threshold.
pub fn l2_near_singularity(exponent: C, _has_log: bool) -> bool {
    exponent.re > -0.5
}

/// Decaying local solution at an irregular singular point dominated by the
/// first-order term: `u ~ h^{-l/2} v(h)` with `v` an asymptotic power series
/// (evaluated by optimal truncation).
#[derive(Clone, Debug)]
pub struct IrregularSolution {
    /// Power `-l/2` of the leading factor.
    pub exponent: f64,
    /// Vanishing order of `b` at the zero.
    pub l: usize,
    /// Asymptotic series `v`, `v[0] = 1`.
    pub v: Vec<C>,
    pub side: Side,
}

impl IrregularSolution {
    /// Evaluates `h^{-l/2} v(h)`.
    pub fn eval(&self, h: f64) -> C {
        h.powf(self.exponent) * series::eval_optimal(&self.v, h)
    }

    /// Derivative `d/dh [h^{-l/2} v(h)]`.
    pub fn eval_deriv(&self, h: f64) -> C {
        let dv = series::derive(&self.v);
        h.powf(self.exponent - 1.0)
            * (self.exponent * series::eval_optimal(&self.v, h)
                + h * series::eval_optimal(&dv, h))
    }

    /// Largest `h` at which the optimally truncated series still reaches the
    /// requested relative accuracy.
    pub fn trust_radius(&self, tol: f64) -> f64 {
        series::asymptotic_trust(&self.v, tol)
    }
}

/// Reduces `a u'' + b2 u' + c u = 0` at a zero with `k >= l + 2` (so the
/// first-order part dominates) to the normal form
/// `[h^3 A d^2 + (h^2 P + h) d + (h Q + l/2)] u = 0`
/// by dividing through `-i h^{l-1} B(h)` (where `b = h^l B`), then extracts
/// the decaying branch `u = h^{-l/2} v` and the Taylor recurrence for `v`.
pub fn irregular_solution(ode: &LocalODE) -> Result<IrregularSolution, FrobeniusError> {
    if ode.lambda.norm() > 1e-12 {
        return Err(FrobeniusError::ShapeMismatch(
            "irregular reduction requires the bare operator (lambda = 0)".into(),
        ));
    }
    let tb = ode.taylor_b();
    let tol_b = COEFF_REL_TOL * series::scale_of(&tb, ode.k + 4).max(1e-300);
    let l = series::leading_order(&tb, tol_b).ok_or_else(|| {
        FrobeniusError::ShapeMismatch("first-order coefficient b vanishes identically".into())
    })?;
    if ode.k < l + 2 {
        return Err(FrobeniusError::ShapeMismatch(format!(
            "need k >= l + 2 for the irregular branch, got k = {}, l = {}",
            ode.k, l
        )));
    }

    let check_drop = |v: &[C], m: usize, name: &str| -> Result<(), FrobeniusError> {
        let tol = COEFF_REL_TOL * series::scale_of(v, ode.k + 4).max(1e-300);
        for (j, coeff) in v.iter().enumerate().take(m) {
            if coeff.norm() > tol {
                return Err(FrobeniusError::ShapeMismatch(format!(
                    "{name} has a non-vanishing coefficient at order {j} below the divisor order"
                )));
            }
        }
        Ok(())
    };
    let drop = l.saturating_sub(1);
    check_drop(&ode.taylor_a, drop, "a")?;
    check_drop(&ode.taylor_b2, drop, "b2")?;
    check_drop(&ode.taylor_c, drop, "c")?;

    let m = ode.order();
    // Divisor -i h^{l-1} B(h) with B = b / h^l nonvanishing at 0.
    let bhat: Vec<C> = series::shift_down(&tb, l);
    let div: Vec<C> = bhat.iter().map(|&v| -C::i() * v).collect();
    let n_new = m - drop;
    let new_a = series::div_trunc(&series::shift_down(&ode.taylor_a, drop), &div, n_new);
    let new_b = series::div_trunc(&series::shift_down(&ode.taylor_b2, drop), &div, n_new);
    let new_c = series::div_trunc(&series::shift_down(&ode.taylor_c, drop), &div, n_new);

    // Structural constants of the normal form.
    let half_l = C::new(l as f64 / 2.0, 0.0);
    let ok_b0 = series::get(&new_b, 0).norm() <= SHAPE_REL_TOL;
    let ok_b1 = (series::get(&new_b, 1) - 1.0).norm() <= SHAPE_REL_TOL;
    let ok_c0 = (series::get(&new_c, 0) - half_l).norm() <= SHAPE_REL_TOL * (1.0 + half_l.norm());
    if !(ok_b0 && ok_b1 && ok_c0) {
        return Err(FrobeniusError::ShapeMismatch(format!(
            "normal form constants off: b[0] = {:?}, b[1] = {:?}, c[0] = {:?} (expected 0, 1, {})",
            series::get(&new_b, 0),
            series::get(&new_b, 1),
            series::get(&new_c, 0),
            l as f64 / 2.0
        )));
    }

    // Substitute u = h^rho v with rho = -l/2.  In the v-equation the order-s
    // balance has pivot s (from the exact `h d/dh` term); all other
    // contributions involve strictly lower orders.
    let rho = C::new(-(l as f64) / 2.0, 0.0);
    let coef_a = |j: usize| series::get(&new_a, j + 1);
    let coef_p = |j: usize| {
        if j == 0 {
            C::new(1.0, 0.0)
        } else {
            rho * 2.0 * series::get(&new_a, j + 2) + series::get(&new_b, j + 1)
        }
    };
    let coef_q = |j: usize| {
        rho * (rho - 1.0) * series::get(&new_a, j + 3)
            + rho * series::get(&new_b, j + 2)
            + series::get(&new_c, j + 1)
    };

    let n_v = n_new.saturating_sub(3);
    let mut v = vec![series::zero(); n_v + 1];
    v[0] = C::new(1.0, 0.0);
    for s in 0..n_v {
        let mut acc = series::zero();
        for (mm, &vm) in v.iter().enumerate().take(s + 1) {
            let mf = mm as f64;
            acc += (coef_a(s - mm + 2) * mf * (mf - 1.0)
                + coef_p(s - mm + 1) * mf
                + coef_q(s - mm))
                * vm;
        }
        v[s + 1] = -acc / (s as f64 + 1.0);
    }

    Ok(IrregularSolution {
        exponent: -(l as f64) / 2.0,
        l,
        v,
        side: ode.side,
    })
}

/// Real Laurent antiderivative `E(h)` of `b/a`, written as principal part
/// plus `log_coeff ln h` plus a regular Taylor part; `principal[i]` is the
/// coefficient of `h^{-(k-1)+i}`.
#[derive(Clone, Debug)]
pub struct LaurentPhase {
    pub principal: Vec<f64>,
    pub log_coeff: f64,
    pub regular: Vec<f64>,
    /// Pole order of the integrand `b/a` (the vanishing order of `a`).
    pub pole_order: usize,
}

impl LaurentPhase {
    pub fn eval(&self, h: f64) -> f64 {
        let mut acc = 0.0;
        let k = self.pole_order;
        for (i, &p) in self.principal.iter().enumerate() {
            let pw = -(k as i32 - 1) + i as i32;
            acc += p * h.powi(pw);
        }
        acc += self.log_coeff * h.ln();
        let mut pw = h;
        for &r in &self.regular {
            acc += r * pw;
            pw *= h;
        }
        acc
    }

    /// Derivative `E'(h) = (b/a)(h)` evaluated from the stored expansion.
    pub fn eval_deriv(&self, h: f64) -> f64 {
        let mut acc = 0.0;
        let k = self.pole_order;
        for (i, &p) in self.principal.iter().enumerate() {
            let pw = -(k as i32 - 1) + i as i32;
            acc += p * pw as f64 * h.powi(pw - 1);
        }
        acc += self.log_coeff / h;
        let mut pw = 1.0;
        for (j, &r) in self.regular.iter().enumerate() {
            acc += r * (j as f64 + 1.0) * pw;
            pw *= h;
        }
        acc
    }
}

/// Local basis at a degenerate zero where `b(x0) != 0`: a smooth solution
/// `u1`, and a partner `u2 = u3 exp(i E)` with real unbounded phase `E` and
/// smooth `u3`, so that `|u2| = |u3|`.
#[derive(Clone, Debug)]
pub struct OscillatoryPair {
    /// Taylor coefficients of the smooth solution (asymptotic series).
    pub u1: Vec<C>,
    /// Taylor coefficients of `u3 = u1 w` (asymptotic series).
    pub u3: Vec<C>,
    /// Laurent antiderivative of `b/a`.
    pub phase: LaurentPhase,
    pub side: Side,
}

impl OscillatoryPair {
    pub fn eval_u1(&self, h: f64) -> C {
        series::eval_optimal(&self.u1, h)
    }

    /// Full oscillatory partner `u3 exp(i E)`.
    pub fn eval_u2(&self, h: f64) -> C {
        series::eval_optimal(&self.u3, h) * (C::i() * self.phase.eval(h)).exp()
    }

    /// `|u2| = |u3|` since the phase is real.
    pub fn abs_u2(&self, h: f64) -> f64 {
        series::eval_optimal(&self.u3, h).norm()
    }

    pub fn trust_radius(&self, tol: f64) -> f64 {
        series::asymptotic_trust(&self.u1, tol).min(series::asymptotic_trust(&self.u3, tol))
    }
}

/// Builds the oscillatory local basis at a zero of order `k >= 2` with
/// `b(x0) != 0`.
pub fn oscillatory_pair(ode: &LocalODE) -> Result<OscillatoryPair, FrobeniusError> {
    if ode.k < 2 {
        return Err(FrobeniusError::ShapeMismatch(
            "oscillatory basis needs a degenerate zero (k >= 2)".into(),
        ));
    }
    let tb = ode.taylor_b();
    let b0 = tb[0];
    let tol_b = COEFF_REL_TOL * series::scale_of(&tb, ode.k + 4).max(1e-300);
    if b0.norm() <= tol_b {
        return Err(FrobeniusError::ShapeMismatch(
            "oscillatory basis needs b(x0) != 0".into(),
        ));
    }
    let m = ode.order();
    let n = m.saturating_sub(2);

    // Smooth solution: the pivot at order s + 1 is (s + 1) b2[0], with
    // b2[0] = -i b(x0) nonzero.
    let b2_0 = ode.taylor_b2[0];
    let mut u1 = vec![series::zero(); n + 1];
    u1[0] = C::new(1.0, 0.0);
    for s in 0..n {
        let mut acc = series::zero();
        for (mm, &tm) in u1.iter().enumerate().take(s + 1) {
            let mf = mm as f64;
            acc += (series::get(&ode.taylor_a, s + 2 - mm) * mf * (mf - 1.0)
                + series::get(&ode.taylor_b2, s + 1 - mm) * mf
                + series::get(&ode.taylor_c, s - mm))
                * tm;
        }
        u1[s + 1] = -acc / (b2_0 * (s as f64 + 1.0));
    }

    // Phase E' = b/a, a Laurent series with pole order k.
    let ahat = series::shift_down(&ode.taylor_a, ode.k);
    let qhat = series::div_trunc(&tb, &ahat, m - ode.k);
    let k = ode.k;
    let mut principal = vec![0.0; k - 1];
    let mut log_coeff = 0.0;
    let mut regular = Vec::new();
    for (j, &q) in qhat.iter().enumerate() {
        let power = j as i32 - k as i32; // exponent of h in E'
        debug_assert!(q.im.abs() <= 1e-7 * (1.0 + q.norm()));
        if power == -1 {
            log_coeff = q.re;
        } else {
            let coeff = q.re / (power as f64 + 1.0);
            if power < -1 {
                // E' has q h^{j-k}; integrating gives slot j of the
                // principal part, which holds the h^{j-k+1} coefficient.
                principal[(power + k as i32) as usize] = coeff;
            } else if regular.len() < 24 {
                regular.push(coeff);
            }
        }
    }

    // w solves a w' + i b w = 1 / u1^2; then u3 = u1 w.
    let g = series::recip_trunc(&series::mul_trunc(&u1, &u1, n), n);
    let ib: Vec<C> = tb.iter().map(|&v| C::i() * v).collect();
    let ib0 = ib[0];
    let mut w = vec![series::zero(); n + 1];
    w[0] = g[0] / ib0;
    for s in 1..=n {
        let mut acc = series::zero();
        for (mm, &wm) in w.iter().enumerate().take(s) {
            let mf = mm as f64;
            acc += series::get(&ode.taylor_a, s + 1 - mm) * mf * wm;
            acc += series::get(&ib, s - mm) * wm;
        }
        w[s] = (series::get(&g, s) - acc) / ib0;
    }
    let u3 = series::mul_trunc(&u1, &w, n);

    Ok(OscillatoryPair {
        u1,
        u3,
        phase: LaurentPhase {
            principal,
            log_coeff,
            regular,
            pole_order: k,
        },
        side: ode.side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn expansion_of_simple_zero_operator() {
        let op = gallery::e1();
        let ode = expand_operator(&op, 0.0, Side::Right, C::i(), 12).unwrap();
        assert_eq!(ode.k, 1);
        assert_relative_eq!(ode.taylor_a[1].re, TAU, max_relative = 1e-12);
        assert_relative_eq!(ode.taylor_b2[0].re, TAU, max_relative = 1e-12);
        assert_relative_eq!(ode.taylor_b2[0].im, -1.0, max_relative = 1e-12);
        // c = -(i/2) b' - lambda with b constant: c[0] = -i.
        assert!((ode.taylor_c[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!(ode.is_regular_singular());
    }

    #[test]
    fn regular_singular_detection_across_cases() {
        let lam = C::i();
        assert!(expand_operator(&gallery::e2(), 0.0, Side::Right, lam, 12)
            .unwrap()
            .is_regular_singular());
        // b(0) != 0 at a double zero: first-order part too strong.
        assert!(!expand_operator(&gallery::e3(), 0.0, Side::Right, lam, 12)
            .unwrap()
            .is_regular_singular());
        // k = 4, l = 1: irregular.
        assert!(
            !expand_operator(&gallery::e5(), 0.0, Side::Right, c(0.0, 0.0), 16)
                .unwrap()
                .is_regular_singular()
        );
    }

    #[test]
    fn simple_zero_indicial_roots() {
        // At a simple zero the roots are 0 and i b(x0) / a'(x0).
        let op = gallery::e1();
        let ode = expand_operator(&op, 0.0, Side::Right, C::i(), 12).unwrap();
        let eq = indicial_equation(&ode).unwrap();
        let expected = c(0.0, 1.0 / TAU);
        let found = eq.roots;
        assert!(
            (found[0] - expected).norm() < 1e-12 && found[1].norm() < 1e-12
                || (found[1] - expected).norm() < 1e-12 && found[0].norm() < 1e-12
        );
        assert!(eq.resonant.is_none());
    }

    #[test]
    fn euler_equation_indicial_roots() {
        // x^2 u'' + x u' - u = 0 has exponents +1 and -1.
        let ode = LocalODE::from_taylor(
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(-1.0, 0.0)],
            2,
            c(0.0, 0.0),
        );
        let eq = indicial_equation(&ode).unwrap();
        assert!((eq.roots[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((eq.roots[1] - c(-1.0, 0.0)).norm() < 1e-14);
        assert_eq!(eq.resonant, Some(2));
    }

    #[test]
    fn double_root_log_solution() {
        // x u'' + u' = 0: double indicial root 0; solutions 1 and ln x.
        let mut ta = vec![c(0.0, 0.0), c(1.0, 0.0)];
        ta.resize(20, c(0.0, 0.0));
        let ode = LocalODE::from_taylor(
            ta,
            vec![c(1.0, 0.0)],
            vec![c(0.0, 0.0)],
            1,
            c(0.0, 0.0),
        );
        let eq = indicial_equation(&ode).unwrap();
        assert_eq!(eq.resonant, Some(0));
        let u2 = frobenius_series(&ode, eq.roots[1], 8).unwrap();
        assert!(u2.has_log());
        // u2(h) = 1 + ln h exactly.
        for &h in &[0.3, 0.1, 0.02] {
            assert!((u2.eval(h) - c(1.0 + h.ln(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn resonant_gap_one_log_free_partner() {
        // (a u')' = 0 with a = sin^2(pi x) at lambda = 0: exponents 0, -1.
        // The decaying solution is the cotangent derivative, whose Laurent
        // coefficients normalised to start at h^{-1} are
        // [1, 0, -pi^2/3, 0, -pi^4/45, ...].
        let op = gallery::e2();
        let ode = expand_operator(&op, 0.0, Side::Right, c(0.0, 0.0), 16).unwrap();
        let eq = indicial_equation(&ode).unwrap();
        assert_eq!(eq.resonant, Some(1));
        assert!((eq.roots[0]).norm() < 1e-12);
        assert!((eq.roots[1] - c(-1.0, 0.0)).norm() < 1e-12);

        let u1 = frobenius_series(&ode, eq.roots[0], 8).unwrap();
        // Constant solution: all higher coefficients vanish.
        for m in 1..=8 {
            assert!(u1.coeffs[m].norm() < 1e-10);
        }

        let u2 = frobenius_series(&ode, eq.roots[1], 8).unwrap();
        assert!(!u2.has_log(), "resonant balance is satisfied without a log");
        let pi = std::f64::consts::PI;
        let expect = [1.0, 0.0, -pi * pi / 3.0, 0.0, -pi.powi(4) / 45.0];
        for (m, &e) in expect.iter().enumerate() {
            assert_relative_eq!(u2.coeffs[m].re, e, max_relative = 1e-9, epsilon = 1e-9);
            assert!(u2.coeffs[m].im.abs() < 1e-10);
        }
    }

    #[test]
    fn quartic_zero_indicial_roots_match_hand_quadratic() {
        // a = sin^2(pi x), b = sin(2 pi x), lambda = 0:
        // I(r)/pi^2 = r^2 + (1 - 2i/pi) r - i/pi  (hand computed).
        let op = gallery::e4();
        let ode = expand_operator(&op, 0.0, Side::Right, c(0.0, 0.0), 16).unwrap();
        let eq = indicial_equation(&ode).unwrap();
        let pi = std::f64::consts::PI;
        let qb = c(1.0, -2.0 / pi);
        let q0 = c(0.0, -1.0 / pi);
        let disc = (qb * qb - 4.0 * q0).sqrt();
        let mut expected = [(-qb + disc) / 2.0, (-qb - disc) / 2.0];
        expected.sort_by(|p, q| (q.re, q.im).partial_cmp(&(p.re, p.im)).unwrap());
        for (f, e) in eq.roots.iter().zip(expected.iter()) {
            assert!((f - e).norm() < 1e-10, "root {f} vs expected {e}");
        }
        // Root-sum law: Re(r1 + r2) = 1 - k = -1.
        assert_relative_eq!(eq.roots[0].re + eq.roots[1].re, -1.0, epsilon = 1e-11);
    }

    #[test]
    fn residual_slope_tracks_truncation_order() {
        let op = gallery::e2();
        let lam = C::i();
        let n = 20;
        let ode = expand_operator(&op, 0.0, Side::Right, lam, n + 2 + RESIDUAL_MARGIN).unwrap();
        let eq = indicial_equation(&ode).unwrap();
        let hs = [10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5)];
        for root in eq.roots {
            let s = frobenius_series(&ode, root, n).unwrap();
            let slope = s.residual_slope(&ode, &hs);
            let bound = n as f64 - 1.0 - root.re - 0.5;
            assert!(
                slope >= bound,
                "slope {slope} below bound {bound} for root {root}"
            );
            // The defect of the truncated series starts at the first
            // surviving balance. This operator is even in h, so its series
            // lives on even orders only and the order-(n + 1) balance
            // vanishes identically: the defect starts one order higher, at
            // h^(Re r + k - 2 + (n + 2)).
            let predicted = root.re + ode.k as f64 + n as f64;
            assert!(
                (slope - predicted).abs() < 0.8,
                "slope {slope} vs {predicted}"
            );
        }
    }

    #[test]
    fn square_integrability_threshold() {
        assert!(l2_near_singularity(c(0.0, 5.0), false));
        assert!(l2_near_singularity(c(-0.49, 0.0), true));
        assert!(!l2_near_singularity(c(-0.5, 0.0), false));
        assert!(!l2_near_singularity(c(-1.0, 0.3), true));
    }

    #[test]
    fn irregular_branch_of_quartic_zero() {
        // a = sin^4(pi x), b = sin(2 pi x): k = 4, l = 1, exponent -1/2.
        let op = gallery::e5();
        let ode = expand_operator(&op, 0.0, Side::Right, c(0.0, 0.0), 24).unwrap();
        let sol = irregular_solution(&ode).unwrap();
        assert_eq!(sol.l, 1);
        assert_relative_eq!(sol.exponent, -0.5);
        assert!((sol.v[0] - c(1.0, 0.0)).norm() < 1e-14);
        // The asymptotic series is only trustworthy close to the zero.
        let trust = sol.trust_radius(1e-8);
        assert!(trust >= 0.01 && trust <= 0.1, "trust radius {trust}");
    }

    #[test]
    fn irregular_branch_matches_shooting() {
        // Start from series data well inside the trust region and integrate
        // the exact local equation to a smaller h; the series must agree.
        let op = gallery::e5();
        let ode = expand_operator(&op, 0.0, Side::Right, c(0.0, 0.0), 30).unwrap();
        let sol = irregular_solution(&ode).unwrap();

        let a = op.a().clone();
        let b = op.b().clone();
        let da = a.derivative();
        let db = b.derivative();
        // State: (x, Re u, Im u, Re u', Im u').
        let field = move |y: &[f64; 5]| {
            let x = y[0];
            let u = c(y[1], y[2]);
            let du = c(y[3], y[4]);
            let av = a.eval(x);
            let b2 = c(da.eval(x), -b.eval(x));
            let cc = c(0.0, -0.5 * db.eval(x));
            let ddu = -(b2 * du + cc * u) / av;
            [1.0, du.re, du.im, ddu.re, ddu.im]
        };
        let h0 = 0.02;
        let h1 = 0.004;
        let u0 = sol.eval(h0);
        let du0 = sol.eval_deriv(h0);
        let mut y = [h0, u0.re, u0.im, du0.re, du0.im];
        let rk = crate::rk::AdaptiveRk::<5>::new(1e-12, 1e-14);
        let mut dt = -1e-5;
        while y[0] > h1 + 1e-15 {
            if y[0] + dt < h1 {
                dt = h1 - y[0];
            }
            let step = rk.step(&field, &y, dt).expect("step");
            y = step.y;
            dt = step.dt_next;
        }
        let shot = c(y[1], y[2]);
        let direct = sol.eval(h1);
        assert!(
            (shot - direct).norm() <= 1e-5 * direct.norm(),
            "shooting {shot} vs series {direct}"
        );
    }

    fn oscillatory_model(mut ta: Vec<C>, b0: f64, k: usize) -> LocalODE {
        ta.resize(30, c(0.0, 0.0));
        let tb = vec![c(b0, 0.0)];
        let da = series::derive(&ta);
        let b2: Vec<C> = (0..ta.len())
            .map(|j| series::get(&da, j) - C::i() * series::get(&tb, j))
            .collect();
        LocalODE::from_taylor(ta, b2, vec![c(0.0, -1.0)], k, C::i())
    }

    #[test]
    fn oscillatory_phase_principal_parts() {
        // a = h^2, b = -2 pi: E = 2 pi / h.  a = h^3, b = 1: E = -1/(2 h^2).
        let ode = oscillatory_model(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], -TAU, 2);
        let pair = oscillatory_pair(&ode).unwrap();
        assert_relative_eq!(pair.phase.principal[0], TAU, max_relative = 1e-12);
        assert!(pair.phase.log_coeff.abs() < 1e-12);
        // u3(0) = -i / b(0) = i / (2 pi).
        assert!((pair.u3[0] - c(0.0, 1.0 / TAU)).norm() < 1e-12);

        let ode3 = oscillatory_model(
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
            1.0,
            3,
        );
        let pair3 = oscillatory_pair(&ode3).unwrap();
        assert_relative_eq!(pair3.phase.principal[0], -0.5, max_relative = 1e-12);
    }

    #[test]
    fn oscillatory_partner_solves_equation() {
        // Exact polynomial data (a = h^2, b = -2 pi): the semi-symbolic
        // defect of u2 = u3 exp(iE) measures only series truncation.
        let ode = oscillatory_model(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], -TAU, 2);
        let pair = oscillatory_pair(&ode).unwrap();

        for &h in &[0.05, 0.1] {
            let a = h * h;
            let b = -TAU;
            let b2v = c(2.0 * h, -b);
            let cv = c(0.0, -1.0);
            let u3 = series::eval(&pair.u3, h);
            let du3 = series::eval(&series::derive(&pair.u3), h);
            let ddu3 = series::eval(&series::derive(&series::derive(&pair.u3)), h);
            let ep = b / a; // E'
            let epp = -2.0 * b / (h * h * h); // E'' for a = h^2
            let i = C::i();
            let defect = a * (ddu3 + 2.0 * i * ep * du3 + (i * epp - ep * ep) * u3)
                + b2v * (du3 + i * ep * u3)
                + cv * u3;
            assert!(defect.norm() < 1e-8, "defect {} at h = {h}", defect.norm());
        }
    }

    #[test]
    fn smooth_oscillatory_solution_solves_equation() {
        let ode = oscillatory_model(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], -TAU, 2);
        let pair = oscillatory_pair(&ode).unwrap();
        for &h in &[0.05, 0.1] {
            let a = h * h;
            let b2v = c(2.0 * h, TAU);
            let cv = c(0.0, -1.0);
            let u = series::eval(&pair.u1, h);
            let du = series::eval(&series::derive(&pair.u1), h);
            let ddu = series::eval(&series::derive(&series::derive(&pair.u1)), h);
            let defect = a * ddu + b2v * du + cv * u;
            assert!(defect.norm() < 1e-8, "defect {} at h = {h}", defect.norm());
        }
    }

    #[test]
    fn left_side_expansion_reflects_first_order_part() {
        // At x0 = 0 of a = sin(2 pi x), b = 1: reflected leading coefficient
        // is -2 pi and the reflected b is -1, so the nonzero indicial root
        // is i * (-1) / (-2 pi) = i / (2 pi).
        let op = gallery::e1();
        let ode = expand_operator(&op, 0.0, Side::Left, C::i(), 12).unwrap();
        assert_relative_eq!(ode.taylor_a[1].re, -TAU, max_relative = 1e-12);
        let tb = ode.taylor_b();
        assert!((tb[0] - c(-1.0, 0.0)).norm() < 1e-12);
        let eq = indicial_equation(&ode).unwrap();
        let expected = c(0.0, 1.0 / TAU);
        assert!(
            (eq.roots[0] - expected).norm() < 1e-10 || (eq.roots[1] - expected).norm() < 1e-10
        );
    }

    #[test]
    fn reflection_preserves_sturm_liouville_structure() {
        // c = -(i/2) b' - lambda must keep holding for the reflected data
        // with b replaced by -b(x0 - s).
        let op = gallery::e4();
        let lam = C::i();
        let ode = expand_operator(&op, 0.0, Side::Left, lam, 14).unwrap();
        let tb = ode.taylor_b();
        let dtb = series::derive(&tb);
        for j in 0..=12 {
            let expect = -C::i() * 0.5 * series::get(&dtb, j) - if j == 0 { lam } else { c(0.0, 0.0) };
            assert!(
                (ode.taylor_c[j] - expect).norm() < 1e-9 * (1.0 + expect.norm()),
                "order {j}"
            );
        }
    }
}
