//! The lacunary series `g(z) = sum_{k>=1} (z / 2^k)^(2^k)`, with `f = exp(g)`.
//!
//! Everything is evaluated in the log domain and normalized by the largest
//! term before any linear-domain summation.

use std::f64::consts::LN_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lognum::{LogComplex, SignedLogReal};
use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION_TOL: f64 = -60.0;
/// Normalized sums below this are numeric noise (the point sits on a level line).
pub const DEGENERATE_CUTOFF: f64 = 1e-15;
/// `|sum w_k| < DIVISION_CUTOFF * sum |w_k|` makes `zg'/g` meaningless.
pub const DIVISION_CUTOFF: f64 = 1e-12;
const MAX_TERMS: u32 = 60;
/// Largest log-magnitude that still exponentiates to a finite `f64`.
const LOG_F64_MAX: f64 = 700.0;

fn pow2(k: u32) -> f64 {
    (2f64).powi(k as i32)
}

/// `log((z / 2^k)^(2^k))`.
pub fn term_log(k: u32, z: Complex64) -> LogComplex {
    if z == Complex64::new(0.0, 0.0) {
        return LogComplex::ZERO;
    }
    let p = pow2(k);
    LogComplex::new(p * (z.norm().ln() - f64::from(k) * LN_2), p * z.arg())
}

/// Smallest `K` such that every `k >= K` has `2^k > 2|z|` and a term
/// log-magnitude below `tol_log`. Summation runs over `k <= K`.
pub fn truncation_index(z: Complex64, tol_log: f64) -> u32 {
    debug_assert!(tol_log < 0.0);
    if z == Complex64::new(0.0, 0.0) {
        return 1;
    }
    let bound = 2.0 * z.norm();
    for k in 1..MAX_TERMS {
        // Past 2^k > 2|z| the log-magnitudes decrease strictly in k, so the
        // first index meeting both conditions is the cutoff.
        if pow2(k) > bound && term_log(k, z).log_magnitude < tol_log {
            return k;
        }
    }
    MAX_TERMS
}

/// First and second derivatives of `g` together with its value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesJet {
    pub value: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LacunarySeries {
    pub truncation_tol: f64,
}

impl Default for LacunarySeries {
    fn default() -> Self {
        LacunarySeries {
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        }
    }
}

impl LacunarySeries {
    pub fn new(truncation_tol: f64) -> Result<Self> {
        if !(truncation_tol < 0.0) {
            return Err(Error::Precondition(format!(
                "truncation tolerance must be negative (log domain), got {truncation_tol}"
            )));
        }
        Ok(LacunarySeries { truncation_tol })
    }

    /// Terms `k = 1..=K` in log form.
    pub fn terms(&self, z: Complex64) -> Vec<LogComplex> {
        let last = truncation_index(z, self.truncation_tol);
        (1..=last).map(|k| term_log(k, z)).collect()
    }

    /// `Re g(z)` as a signed log.
    pub fn signed_log_re_g(&self, z: Complex64) -> Result<SignedLogReal> {
        if z == Complex64::new(0.0, 0.0) {
            return Ok(SignedLogReal::ZERO);
        }
        let terms = self.terms(z);
        let peak = max_log_magnitude(&terms);
        let sum: f64 = terms
            .iter()
            .map(|t| (t.log_magnitude - peak).exp() * t.argument.cos())
            .sum();
        if sum.abs() < DEGENERATE_CUTOFF {
            return Err(Error::Degenerate { re: z.re, im: z.im });
        }
        Ok(SignedLogReal::new(
            if sum > 0.0 { 1 } else { -1 },
            peak + sum.abs().ln(),
        ))
    }

    /// `z g'(z) / g(z)` as the `2^k`-weighted mean of the normalized terms.
    pub fn zg_over_g(&self, z: Complex64) -> Result<Complex64> {
        let degenerate = Error::DivisionDegenerate { re: z.re, im: z.im };
        if z == Complex64::new(0.0, 0.0) {
            return Err(degenerate);
        }
        let terms = self.terms(z);
        let peak = max_log_magnitude(&terms);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        let mut mass = 0.0;
        for (k, t) in (1u32..).zip(&terms) {
            let w = t.scaled(peak);
            num += w * pow2(k);
            den += w;
            mass += w.norm();
        }
        if den.norm() < DIVISION_CUTOFF * mass {
            return Err(degenerate);
        }
        Ok(num / den)
    }

    /// Plain-domain `g`, `g'`, `g''`. Fails with `Overflow` once the largest
    /// term leaves the `f64` range (roughly `|z| > 2000`).
    pub fn jet(&self, z: Complex64) -> Result<SeriesJet> {
        if z == Complex64::new(0.0, 0.0) {
            return Ok(SeriesJet {
                value: Complex64::new(0.0, 0.0),
                d1: Complex64::new(0.0, 0.0),
                d2: Complex64::new(0.5, 0.0),
            });
        }
        let terms = self.terms(z);
        if max_log_magnitude(&terms) > LOG_F64_MAX {
            return Err(Error::Overflow { re: z.re, im: z.im });
        }
        let mut jet = SeriesJet {
            value: Complex64::new(0.0, 0.0),
            d1: Complex64::new(0.0, 0.0),
            d2: Complex64::new(0.0, 0.0),
        };
        let inv = 1.0 / z;
        for (k, t) in (1u32..).zip(&terms) {
            let p = pow2(k);
            let w = t.to_complex();
            jet.value += w;
            jet.d1 += w * p * inv;
            jet.d2 += w * (p * (p - 1.0)) * inv * inv;
        }
        Ok(jet)
    }
}

fn max_log_magnitude(terms: &[LogComplex]) -> f64 {
    terms
        .iter()
        .map(|t| t.log_magnitude)
        .fold(f64::NEG_INFINITY, f64::max)
}
