//! Target entire functions and their evaluation.

pub mod lognum;
pub mod series;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use lognum::{normalize_angle, LogComplex, SignedLogReal};
pub use series::{term_log, truncation_index, LacunarySeries, SeriesJet};

/// Beyond this modulus a value is reported as overflowed.
pub const OVERFLOW_MODULUS: f64 = 1e300;
/// Plain-domain evaluation of the lacunary example is limited to this disc.
pub const PAPER_PLAIN_RADIUS: f64 = 8.0;

/// Polynomial with coefficients in increasing degree order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolynomialRepr", into = "PolynomialRepr")]
pub struct Polynomial {
    coefficients: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        match coefficients.last() {
            Some(lead) if coefficients.len() >= 2 && lead.norm() > 0.0 => {
                Ok(Polynomial { coefficients })
            }
            _ => Err(Error::Precondition(
                "polynomial needs degree >= 1 and a nonzero leading coefficient".into(),
            )),
        }
    }

    pub fn from_real(coefficients: &[f64]) -> Result<Self> {
        Polynomial::new(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Horner evaluation of `p`, `p'`, `p''`.
    fn jet(&self, z: Complex64) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        let (mut p, mut d1, mut d2) = (zero, zero, zero);
        for &c in self.coefficients.iter().rev() {
            d2 = d2 * z + d1 * 2.0;
            d1 = d1 * z + p;
            p = p * z + c;
        }
        [p, d1, d2]
    }
}

// A struct rather than a bare list, so that it can sit inside the tagged catalog enum.
#[derive(Serialize, Deserialize)]
struct PolynomialRepr {
    coefficients: Vec<Complex64>,
}

impl TryFrom<PolynomialRepr> for Polynomial {
    type Error = Error;
    fn try_from(r: PolynomialRepr) -> Result<Self> {
        Polynomial::new(r.coefficients)
    }
}

impl From<Polynomial> for PolynomialRepr {
    fn from(p: Polynomial) -> Self {
        PolynomialRepr {
            coefficients: p.coefficients,
        }
    }
}

/// Catalog of entire functions the toolkit operates on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum EntireFunction {
    /// `exp(sum_k (z/2^k)^(2^k))`.
    PaperExample(LacunarySeries),
    Exp,
    /// Entire extension of `sin z / z`.
    Sinc,
    Polynomial(Polynomial),
}

impl EntireFunction {
    pub fn paper_example() -> Self {
        EntireFunction::PaperExample(LacunarySeries::default())
    }

    pub fn polynomial(coefficients: &[f64]) -> Result<Self> {
        Polynomial::from_real(coefficients).map(EntireFunction::Polynomial)
    }

    pub fn series(&self) -> Option<&LacunarySeries> {
        match self {
            EntireFunction::PaperExample(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_paper_example(&self) -> bool {
        matches!(self, EntireFunction::PaperExample(_))
    }
}

impl fmt::Display for EntireFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntireFunction::PaperExample(_) => write!(f, "lacunary"),
            EntireFunction::Exp => write!(f, "exp"),
            EntireFunction::Sinc => write!(f, "sinc"),
            EntireFunction::Polynomial(p) => {
                write!(f, "poly:")?;
                for (i, c) in p.coefficients().iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    if c.im == 0.0 {
                        write!(f, "{}", c.re)?;
                    } else {
                        write!(f, "{}{:+}i", c.re, c.im)?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FnValue {
    pub value: Complex64,
    pub derivative: Complex64,
    pub overflow: bool,
}

/// Value with first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub overflow: bool,
}

fn overflowed(values: &[Complex64]) -> bool {
    values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > OVERFLOW_MODULUS)
}

/// Taylor series of sinc and its derivatives, used for |z| < 1e-2.
fn sinc_series(z: Complex64) -> [Complex64; 3] {
    let z2 = z * z;
    // sum_m (-1)^m z^(2m) / (2m+1)!
    let coeffs = [
        1.0,
        -1.0 / 6.0,
        1.0 / 120.0,
        -1.0 / 5040.0,
        1.0 / 362_880.0,
        -1.0 / 39_916_800.0,
    ];
    let zero = Complex64::new(0.0, 0.0);
    let (mut v, mut d1, mut d2) = (zero, zero, zero);
    let mut pow = Complex64::new(1.0, 0.0);
    for (m, &c) in coeffs.iter().enumerate() {
        let e = 2.0 * m as f64;
        v += pow * c;
        if m >= 1 {
            d1 += pow / z * (c * e);
            d2 += pow / z2 * (c * e * (e - 1.0));
        }
        pow *= z2;
    }
    if z == zero {
        d1 = zero;
        d2 = Complex64::new(-1.0 / 3.0, 0.0);
    }
    [v, d1, d2]
}

fn sinc_jet(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1e-2 {
        return sinc_series(z);
    }
    let (s, c) = (z.sin(), z.cos());
    let v = s / z;
    let d1 = (z * c - s) / (z * z);
    let d2 = (-z * z * s - 2.0 * z * c + 2.0 * s) / (z * z * z);
    [v, d1, d2]
}

/// `f`, `f'`, `f''` in the plain domain.
pub fn eval_jet(func: &EntireFunction, z: Complex64) -> Result<Jet> {
    let [value, d1, d2] = match func {
        EntireFunction::Exp => {
            let e = z.exp();
            [e, e, e]
        }
        EntireFunction::Sinc => sinc_jet(z),
        EntireFunction::Polynomial(p) => p.jet(z),
        EntireFunction::PaperExample(series) => {
            if z.norm() > PAPER_PLAIN_RADIUS {
                return Err(Error::Precondition(format!(
                    "plain evaluation of the lacunary example needs |z| <= {PAPER_PLAIN_RADIUS}, got {}",
                    z.norm()
                )));
            }
            let g = series.jet(z)?;
            let e = g.value.exp();
            [e, e * g.d1, e * (g.d2 + g.d1 * g.d1)]
        }
    };
    Ok(Jet {
        value,
        d1,
        d2,
        overflow: overflowed(&[value, d1, d2]),
    })
}

/// `f(z)` and `f'(z)`.
pub fn eval_fn(func: &EntireFunction, z: Complex64) -> Result<FnValue> {
    let jet = eval_jet(func, z)?;
    Ok(FnValue {
        value: jet.value,
        derivative: jet.d1,
        overflow: overflowed(&[jet.value, jet.d1]),
    })
}

/// `|f(z) - a|` and the Newton step for `f(z) = a`, valid on the whole plane.
///
/// For the lacunary example the step is `(1 - a e^{-g}) / g'`, which avoids
/// forming `e^g`; the residual is `+inf` when `e^g` overflows.
pub(crate) fn residual_and_step(
    func: &EntireFunction,
    z: Complex64,
    a: Complex64,
) -> Option<(f64, Complex64)> {
    match func {
        EntireFunction::PaperExample(series) => {
            let g = series.jet(z).ok()?;
            let residual = if g.value.re > 700.0 {
                f64::INFINITY
            } else {
                (g.value.exp() - a).norm()
            };
            if g.d1.norm() == 0.0 {
                return Some((residual, Complex64::new(0.0, 0.0)));
            }
            let step = (Complex64::new(1.0, 0.0) - a * (-g.value).exp()) / g.d1;
            Some((residual, step))
        }
        _ => {
            let j = eval_jet(func, z).ok()?;
            if j.overflow {
                return Some((f64::INFINITY, Complex64::new(0.0, 0.0)));
            }
            let r = j.value - a;
            let step = if j.d1.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                r / j.d1
            };
            Some((r.norm(), step))
        }
    }
}

/// `|f(z) - a|` for any catalog function, `+inf` on overflow.
pub fn distance_to(func: &EntireFunction, z: Complex64, a: Complex64) -> f64 {
    residual_and_step(func, z, a).map_or(f64::INFINITY, |(r, _)| r)
}
