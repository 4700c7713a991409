//! Log-domain number representations.
//!
//! Terms of the lacunary series reach magnitudes like `exp(2^(2^n))`, far
//! beyond `f64`. Values are carried as a natural-log magnitude plus an angle
//! (complex) or a sign (real).

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Reduce an angle to `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

/// Complex number stored as `(ln |w|, arg w)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_magnitude: f64,
    pub argument: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_magnitude: f64::NEG_INFINITY,
        argument: 0.0,
    };

    pub fn new(log_magnitude: f64, argument: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_magnitude,
            argument: normalize_angle(argument),
        }
    }

    pub fn from_complex(w: Complex64) -> Self {
        if w == Complex64::new(0.0, 0.0) {
            return Self::ZERO;
        }
        LogComplex::new(w.norm().ln(), w.arg())
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// Convert back to a plain complex number. Overflows to infinity for
    /// `log_magnitude > ~709`.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar(self.log_magnitude.exp(), self.argument)
    }

    /// `self * exp(-shift)` as a plain complex number.
    pub fn scaled(&self, shift: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((self.log_magnitude - shift).exp(), self.argument)
    }
}

/// Signed real stored as `(sign, ln |x|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLogReal {
    pub sign: i8,
    pub log_abs: f64,
}

impl SignedLogReal {
    pub const ZERO: SignedLogReal = SignedLogReal {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        SignedLogReal {
            sign: sign.signum(),
            log_abs,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLogReal::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// `sign * 2^(2^n)`, never materialized.
    pub fn double_power_of_two(sign: i8, n: u32) -> Self {
        SignedLogReal::new(sign, (2f64).powi(n as i32) * LN_2)
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    pub fn neg(&self) -> Self {
        SignedLogReal {
            sign: -self.sign,
            log_abs: self.log_abs,
        }
    }

    /// Text form `slr:<sign>:<log_abs>`.
    pub fn parse(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("slr:") {
            let (s, l) = rest.split_once(':')?;
            let sign: i8 = s.trim().parse().ok()?;
            let log_abs: f64 = l.trim().parse().ok()?;
            if !(-1..=1).contains(&sign) {
                return None;
            }
            return Some(SignedLogReal::new(sign, log_abs));
        }
        text.parse::<f64>().ok().map(SignedLogReal::from_f64)
    }
}

impl PartialOrd for SignedLogReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_abs.partial_cmp(&other.log_abs),
                _ => other.log_abs.partial_cmp(&self.log_abs),
            },
            ord => Some(ord),
        }
    }
}
