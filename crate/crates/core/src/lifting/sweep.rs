use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lift_curve, LiftResult, Polyline};
use crate::error::{Error, Result};
use crate::fnmodel::EntireFunction;

/// Family of parallel lines crossing a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFamily {
    pub disc_center: Complex64,
    pub disc_radius: f64,
    /// Direction of the lines, radians.
    pub direction: f64,
    pub n_lines: usize,
    /// How far each line is followed on either side of the perpendicular diameter.
    pub max_length: f64,
}

impl LineFamily {
    /// Point where line `i` crosses the diameter perpendicular to the direction.
    /// Offsets are cell midpoints, so a single line passes through the center.
    pub fn anchor(&self, i: usize) -> Complex64 {
        let n = self.n_lines as f64;
        let offset = self.disc_radius * (-1.0 + (2 * i + 1) as f64 / n);
        self.disc_center + Complex64::from_polar(offset, self.direction + std::f64::consts::FRAC_PI_2)
    }

    pub fn unit(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.direction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n_lines: usize,
    pub failed_line_indices: Vec<usize>,
    /// Curve points at which failing lifts stopped.
    pub singular_endpoints: Vec<Complex64>,
    pub exceptional_fraction: f64,
}

struct LineOutcome {
    failures: Vec<Complex64>,
}

fn terminal_value(curve: &Polyline, lift: &LiftResult) -> Complex64 {
    curve.point_at(lift.terminal_parameter)
}

fn sweep_line(
    func: &EntireFunction,
    family: &LineFamily,
    i: usize,
    seed: Complex64,
    seed_value: Complex64,
    window_radius: f64,
    tol_track: f64,
) -> Result<LineOutcome> {
    let anchor = family.anchor(i);
    let mut failures = Vec::new();
    let start = if (anchor - seed_value).norm() > 1e-14 * (1.0 + anchor.norm()) {
        let inner = Polyline::segment(seed_value, anchor)?;
        let lift = lift_curve(func, &inner, seed, window_radius, tol_track)?;
        if !lift.completed() {
            failures.push(terminal_value(&inner, &lift));
            return Ok(LineOutcome { failures });
        }
        lift.endpoint()
    } else {
        seed
    };
    for sign in [1.0, -1.0] {
        let ray = Polyline::segment(anchor, anchor + family.unit() * (sign * family.max_length))?;
        let lift = lift_curve(func, &ray, start, window_radius, tol_track)?;
        if !lift.completed() {
            failures.push(terminal_value(&ray, &lift));
        }
    }
    Ok(LineOutcome { failures })
}

/// Continue the branch through `seed` along `n_lines` parallel lines crossing
/// the disc, both ways from the perpendicular diameter.
pub fn line_sweep(
    func: &EntireFunction,
    family: &LineFamily,
    seed: Complex64,
    window_radius: f64,
    tol_track: f64,
) -> Result<SweepReport> {
    if family.n_lines == 0 || !(family.disc_radius > 0.0) || !(family.max_length > 0.0) {
        return Err(Error::Precondition(
            "line sweep needs n_lines >= 1, a positive disc radius and length".into(),
        ));
    }
    let seed_value = super::value_at(func, seed)?;
    if (seed_value - family.disc_center).norm() >= family.disc_radius {
        return Err(Error::Precondition("seed does not map into the disc".into()));
    }
    let outcomes: Vec<LineOutcome> = (0..family.n_lines)
        .into_par_iter()
        .map(|i| sweep_line(func, family, i, seed, seed_value, window_radius, tol_track))
        .collect::<Result<_>>()?;

    let mut failed_line_indices = Vec::new();
    let mut singular_endpoints = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        if !o.failures.is_empty() {
            failed_line_indices.push(i);
            singular_endpoints.extend(o.failures);
        }
    }
    Ok(SweepReport {
        n_lines: family.n_lines,
        exceptional_fraction: failed_line_indices.len() as f64 / family.n_lines as f64,
        failed_line_indices,
        singular_endpoints,
    })
}
