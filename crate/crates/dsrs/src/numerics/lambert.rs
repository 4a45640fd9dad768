//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{invalid, Result};

const NEG_INV_E: f64 = -1.0 / E;

/// `W0(x)`: the solution `w >= -1` of `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return invalid("lambert_w0 argument is NaN");
    }
    if x < NEG_INV_E {
        // allow the rounding slack of the branch point itself
        if x >= NEG_INV_E * (1.0 + 4.0 * f64::EPSILON) {
            return Ok(-1.0);
        }
        return invalid(format!("lambert_w0 needs x >= -1/e, got {x}"));
    }
    Ok(w0_unchecked(x))
}

fn w0_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    if x > E {
        return w_of_exp_large(x.ln());
    }
    let mut w = if x < -0.32 {
        // series about the branch point
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l = x.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            return -1.0;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        if !step.is_finite() {
            break;
        }
        let next = (w - step).max(-1.0);
        if (next - w).abs() <= 1e-16 * (1.0 + next.abs()) {
            return next;
        }
        w = next;
    }
    w
}

/// Root of `w + ln w = y` for `y > 1` by Halley steps on that form.
fn w_of_exp_large(y: f64) -> f64 {
    let mut w = if y > 3.0 { y - y.ln() + y.ln() / y } else { 0.5 * y };
    for _ in 0..100 {
        let f = w + w.ln() - y;
        let f1 = 1.0 + 1.0 / w;
        let f2 = -1.0 / (w * w);
        let step = f / (f1 - 0.5 * f * f2 / f1);
        let next = w - step;
        let next = if next <= 0.0 { 0.5 * w } else { next };
        if (next - w).abs() <= 1e-16 * next {
            return next;
        }
        w = next;
    }
    w
}

/// `W0(exp(log_x))` without forming `exp(log_x)`.
pub fn lambert_w0_of_exp(log_x: f64) -> f64 {
    if log_x == f64::NEG_INFINITY {
        return 0.0;
    }
    if log_x.is_nan() {
        return f64::NAN;
    }
    if log_x == f64::INFINITY {
        return f64::INFINITY;
    }
    if log_x < -20.0 {
        let x = log_x.exp();
        return x * (1.0 - x * (1.0 - 1.5 * x));
    }
    if log_x <= 1.0 {
        return w0_unchecked(log_x.exp());
    }
    w_of_exp_large(log_x)
}
