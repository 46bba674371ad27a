//! Adaptive Dormand-Prince 5(4) stepper for small autonomous systems.
//!
//! The dimension is a const generic so trajectories of different phase
//! spaces share one implementation without allocation.  Steps may be taken
//! in either time direction (the sign of `dt` is preserved; error control
//! uses its magnitude).

pub(crate) struct AdaptiveRk<const D: usize> {
    rel_tol: f64,
    abs_tol: f64,
}

pub(crate) struct StepResult<const D: usize> {
    pub y: [f64; D],
    pub dt_used: f64,
    pub dt_next: f64,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl<const D: usize> AdaptiveRk<D> {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        AdaptiveRk { rel_tol, abs_tol }
    }

    /// One accepted step of suggested (signed) size `dt`.  Returns `None`
    /// when repeated rejections shrink the step below `1e-15` in magnitude
    /// or the field produces non-finite values at a vanishing step.
    pub fn step<F>(&self, f: &F, y: &[f64; D], dt: f64) -> Option<StepResult<D>>
    where
        F: Fn(&[f64; D]) -> [f64; D],
    {
        let mut dt = dt;
        let k1 = f(y);
        for _ in 0..60 {
            if !dt.is_finite() || dt.abs() < 1e-15 {
                return None;
            }
            let stage = |coeffs: &[(f64, &[f64; D])]| {
                let mut out = *y;
                for v in out.iter_mut() {
                    *v = 0.0;
                }
                for &(c, k) in coeffs {
                    for i in 0..D {
                        out[i] += c * k[i];
                    }
                }
                let mut arg = *y;
                for i in 0..D {
                    arg[i] += dt * out[i];
                }
                arg
            };
            let k2 = f(&stage(&[(A21, &k1)]));
            let k3 = f(&stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(&stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(&stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(&stage(&[
                (A61, &k1),
                (A62, &k2),
                (A63, &k3),
                (A64, &k4),
                (A65, &k5),
            ]));
            let mut y5 = *y;
            for i in 0..D {
                y5[i] += dt * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            let k7 = f(&y5);

            let mut err_sq = 0.0;
            let mut finite = true;
            for i in 0..D {
                let e = dt
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y5[i].abs());
                let r = e / sc;
                err_sq += r * r;
                finite &= y5[i].is_finite() && e.is_finite();
            }
            let err = (err_sq / D as f64).sqrt();

            if !finite {
                dt *= 0.25;
                continue;
            }
            if err <= 1.0 {
                let factor = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                return Some(StepResult {
                    y: y5,
                    dt_used: dt,
                    dt_next: dt * factor,
                });
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            dt *= factor;
        }
        None
    }

    /// Heuristic initial step from the field magnitude at `y`.
    pub fn initial_dt<F>(&self, f: &F, y: &[f64; D]) -> f64
    where
        F: Fn(&[f64; D]) -> [f64; D],
    {
        let fy = f(y);
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nf = fy.iter().map(|v| v * v).sum::<f64>().sqrt();
        (0.01 * (ny + 1.0) / (nf + 1e-12)).clamp(1e-10, 0.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_circular_motion_accurately() {
        // y'' = -y as a 2-d system, one full period.
        let f = |y: &[f64; 2]| [y[1], -y[0]];
        let rk = AdaptiveRk::<2>::new(1e-10, 1e-12);
        let mut y = [1.0, 0.0];
        let mut t = 0.0;
        let t_end = std::f64::consts::TAU;
        let mut dt = rk.initial_dt(&f, &y);
        while t < t_end {
            if t + dt > t_end {
                dt = t_end - t;
            }
            let s = rk.step(&f, &y, dt).unwrap();
            t += s.dt_used;
            y = s.y;
            dt = s.dt_next;
        }
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn reverse_time_steps_work() {
        let f = |y: &[f64; 1]| [y[0]];
        let rk = AdaptiveRk::<1>::new(1e-10, 1e-12);
        let mut y = [1.0];
        let mut t = 0.0;
        let mut dt = -0.01;
        while t > -1.0 {
            if t + dt < -1.0 {
                dt = -1.0 - t;
            }
            let s = rk.step(&f, &y, dt).unwrap();
            t += s.dt_used;
            y = s.y;
            dt = s.dt_next;
        }
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
    }
}
