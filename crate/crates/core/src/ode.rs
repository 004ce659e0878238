//! Explicit Dormand–Prince 5(4) integrator with adaptive step-size control.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

/// Stateful integrator: remembers the last accepted step size so a long
/// integration can be advanced piecewise through a sequence of output
/// points without restarting the controller.
#[derive(Debug, Clone)]
pub struct DormandPrince<const N: usize> {
    control: StepControl,
    step: Option<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const N: usize> DormandPrince<N> {
    pub fn new(control: StepControl) -> Self {
        Self {
            control,
            step: None,
            accepted: 0,
            rejected: 0,
        }
    }

    fn error_norm(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.control.atol + self.control.rtol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / scale;
            acc += e * e;
        }
        (acc / N as f64).sqrt()
    }

    /// Advances `y` from `t` to `t_end` (forward only).
    pub fn advance<F>(&mut self, f: &mut F, t: f64, y: &mut [f64; N], t_end: f64) -> Result<()>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        if t_end < t {
            return Err(Error::domain(format!(
                "backward integration requested from {t} to {t_end}"
            )));
        }
        let mut t = t;
        let mut h = self.step.unwrap_or(1e-3 * (t_end - t).max(1e-6));
        let mut k1 = f(t, y);
        let mut steps = 0usize;

        while t < t_end {
            if steps >= self.control.max_steps {
                return Err(Error::numerical(t, "step budget exhausted"));
            }
            steps += 1;
            let last = t + h >= t_end;
            let h_try = if last { t_end - t } else { h };
            if h_try <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::numerical(t, format!("step size underflow (h = {h_try:e})")));
            }

            let mut tmp = [0.0; N];
            for i in 0..N {
                tmp[i] = y[i] + h_try * A21 * k1[i];
            }
            let k2 = f(t + C2 * h_try, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h_try * (A31 * k1[i] + A32 * k2[i]);
            }
            let k3 = f(t + C3 * h_try, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h_try * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            let k4 = f(t + C4 * h_try, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h_try * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            let k5 = f(t + C5 * h_try, &tmp);
            for i in 0..N {
                tmp[i] = y[i] + h_try * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            let k6 = f(t + h_try, &tmp);
            let mut y_new = [0.0; N];
            for i in 0..N {
                y_new[i] = y[i] + h_try * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let t_new = if last { t_end } else { t + h_try };
            let k7 = f(t_new, &y_new);
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h_try * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }

            let norm = self.error_norm(y, &y_new, &err);
            if !norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.rejected += 1;
                h = h_try * MIN_FACTOR;
                continue;
            }
            let factor = if norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if norm <= 1.0 {
                self.accepted += 1;
                t = t_new;
                *y = y_new;
                k1 = k7;
                // keep the controller's step, not the truncated final one
                h = if last { h.max(h_try) } else { h_try * factor };
                if last {
                    break;
                }
            } else {
                self.rejected += 1;
                h = h_try * factor.min(1.0);
            }
        }
        self.step = Some(h);
        Ok(())
    }
}
