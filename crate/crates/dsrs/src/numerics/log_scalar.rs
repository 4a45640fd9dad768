use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};

/// A real number stored as a sign and the natural log of its magnitude.
///
/// Zero is encoded as `sign == 0` with a log-magnitude of negative infinity;
/// the constructors normalise every other zero encoding to that one.
#[derive(Clone, Copy, PartialEq)]
pub struct LogScalar {
    sign: i8,
    log_magnitude: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar { sign: 0, log_magnitude: f64::NEG_INFINITY };
    pub const ONE: LogScalar = LogScalar { sign: 1, log_magnitude: 0.0 };
    pub const INFINITY: LogScalar = LogScalar { sign: 1, log_magnitude: f64::INFINITY };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogScalar { sign: sign.signum(), log_magnitude }
    }

    /// Positive value `exp(ln)`; `ln = -inf` gives zero.
    pub fn from_ln(ln: f64) -> Self {
        Self::new(1, ln)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn log_magnitude(self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    pub fn is_infinite(self) -> bool {
        self.log_magnitude == f64::INFINITY
    }

    /// Natural log of the value: `-inf` for zero, NaN for negatives.
    pub fn ln(self) -> f64 {
        match self.sign {
            0 => f64::NEG_INFINITY,
            1 => self.log_magnitude,
            _ => f64::NAN,
        }
    }

    pub fn to_f64(self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }

    /// Sum of two values, exact in sign.
    pub fn add(self, other: LogScalar) -> LogScalar {
        signed_log_sum(&[
            (f64::from(self.sign), self.log_magnitude),
            (f64::from(other.sign), other.log_magnitude),
        ])
    }

    pub fn sub(self, other: LogScalar) -> LogScalar {
        self.add(-other)
    }

    /// Multiply by `exp(shift)`.
    pub fn scale_ln(self, shift: f64) -> LogScalar {
        LogScalar::new(self.sign, self.log_magnitude + shift)
    }
}

impl Neg for LogScalar {
    type Output = LogScalar;
    fn neg(self) -> LogScalar {
        LogScalar { sign: -self.sign, log_magnitude: self.log_magnitude }
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: LogScalar) -> LogScalar {
        LogScalar::new(self.sign * rhs.sign, self.log_magnitude + rhs.log_magnitude)
    }
}

impl PartialOrd for LogScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_magnitude.partial_cmp(&other.log_magnitude),
                _ => other.log_magnitude.partial_cmp(&self.log_magnitude),
            },
            ord => Some(ord),
        }
    }
}

impl fmt::Debug for LogScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_magnitude),
            _ => write!(f, "-exp({})", self.log_magnitude),
        }
    }
}

/// `ln |sum_i c_i exp(x_i)|` together with the sign of the sum.
///
/// The largest exponent is factored out before summing, and the scaled
/// terms are accumulated with Neumaier compensation so that exact
/// cancellations come out as an exact zero.
pub fn signed_log_sum(terms: &[(f64, f64)]) -> LogScalar {
    let mut top = f64::NEG_INFINITY;
    for &(c, x) in terms {
        if c != 0.0 && x != f64::NEG_INFINITY {
            top = top.max(c.abs().ln() + x);
        }
    }
    if top == f64::NEG_INFINITY {
        return LogScalar::ZERO;
    }
    if top == f64::INFINITY {
        // only the infinite terms matter
        let mut sign = 0.0;
        for &(c, x) in terms {
            if c != 0.0 && c.abs().ln() + x == f64::INFINITY {
                sign += c.signum();
            }
        }
        return if sign == 0.0 {
            LogScalar::new(1, f64::NAN)
        } else {
            LogScalar::new(sign.signum() as i8, f64::INFINITY)
        };
    }

    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &(c, x) in terms {
        if c == 0.0 || x == f64::NEG_INFINITY {
            continue;
        }
        let term = c.signum() * (c.abs().ln() + x - top).exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    let total = sum + comp;
    if total == 0.0 {
        return LogScalar::ZERO;
    }
    LogScalar::new(if total > 0.0 { 1 } else { -1 }, top + total.abs().ln())
}
