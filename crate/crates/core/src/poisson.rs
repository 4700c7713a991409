//! Poisson integrals of singular measures on the unit circle and their radial growth.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnmodel::normalize_angle;

/// Deepest Cantor-like construction accepted.
pub const MAX_CANTOR_DEPTH: u32 = 20;
/// Relative slack allowed in the lower-bound check.
pub const LOWER_BOUND_SLACK: f64 = 1e-6;
const SCAN_GRID: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub theta: f64,
    pub mass: f64,
}

/// A singular measure on the circle, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SingularMeasure {
    Atoms { atoms: Vec<Atom> },
    /// Middle-thirds construction on `arc` to `depth` levels; each of the
    /// `2^depth` surviving intervals carries equal mass at its midpoint.
    CantorLike { depth: u32, arc: (f64, f64), total_mass: f64 },
}

impl SingularMeasure {
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        let m = SingularMeasure::Atoms { atoms };
        m.validate()?;
        Ok(m)
    }

    pub fn cantor_like(depth: u32, arc: (f64, f64), total_mass: f64) -> Result<Self> {
        let m = SingularMeasure::CantorLike { depth, arc, total_mass };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Precondition(msg));
        match self {
            SingularMeasure::Atoms { atoms } => {
                if atoms.is_empty() {
                    return bad("a measure needs at least one atom".into());
                }
                for a in atoms {
                    if !(a.mass > 0.0 && a.mass.is_finite()) {
                        return bad(format!("atom mass {} must be positive", a.mass));
                    }
                    if !(a.theta > -PI && a.theta <= PI) {
                        return bad(format!("atom angle {} outside (-pi, pi]", a.theta));
                    }
                }
            }
            SingularMeasure::CantorLike { depth, arc, total_mass } => {
                if *depth > MAX_CANTOR_DEPTH {
                    return bad(format!("depth {depth} above {MAX_CANTOR_DEPTH}"));
                }
                if !(arc.0 < arc.1 && arc.1 - arc.0 <= TAU) {
                    return bad(format!("arc ({}, {}) must be increasing and at most 2 pi long", arc.0, arc.1));
                }
                if !(*total_mass > 0.0 && total_mass.is_finite()) {
                    return bad(format!("total mass {total_mass} must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Point masses realizing the measure (exact for atoms, midpoint
    /// discretization for the Cantor-like case).
    pub fn point_masses(&self) -> Vec<Atom> {
        match self {
            SingularMeasure::Atoms { atoms } => atoms.clone(),
            SingularMeasure::CantorLike { depth, arc, total_mass } => {
                let mut intervals = vec![*arc];
                for _ in 0..*depth {
                    intervals = intervals
                        .into_iter()
                        .flat_map(|(a, b)| {
                            let third = (b - a) / 3.0;
                            [(a, a + third), (b - third, b)]
                        })
                        .collect();
                }
                let mass = total_mass / intervals.len() as f64;
                intervals
                    .into_iter()
                    .map(|(a, b)| Atom {
                        theta: normalize_angle(0.5 * (a + b)),
                        mass,
                    })
                    .collect()
            }
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.point_masses().iter().map(|a| a.mass).sum()
    }

    /// Mass of the open arc `{e^{it} : a < t < b}` (angles taken mod 2π).
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.point_masses()
            .iter()
            .filter(|p| in_open_arc(p.theta, a, b))
            .map(|p| p.mass)
            .sum()
    }
}

fn in_open_arc(t: f64, a: f64, b: f64) -> bool {
    if b - a >= TAU {
        return true;
    }
    let offset = (t - a).rem_euclid(TAU);
    offset > 0.0 && offset < b - a
}

/// `(1 - r^2) / (1 + r^2 - 2 r cos d)`, with the denominator written as
/// `(1-r)^2 + 4 r sin^2(d/2)` to stay accurate as `r -> 1`.
pub fn poisson_kernel(r: f64, d: f64) -> f64 {
    let s = (0.5 * d).sin();
    (1.0 - r) * (1.0 + r) / ((1.0 - r).powi(2) + 4.0 * r * s * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonEval {
    pub r: f64,
    pub theta: f64,
    pub value: f64,
}

fn integral(points: &[Atom], r: f64, theta: f64) -> f64 {
    points.iter().map(|p| p.mass * poisson_kernel(r, p.theta - theta)).sum::<f64>() / TAU
}

/// `u(r e^{iθ}) = (1/2π) ∫ P_r(t - θ) dμ(t)` for `0 <= r < 1`.
pub fn poisson_integral(measure: &SingularMeasure, r: f64, theta: f64) -> Result<PoissonEval> {
    measure.validate()?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Precondition(format!("radius {r} outside [0, 1)")));
    }
    Ok(PoissonEval {
        r,
        theta,
        value: integral(&measure.point_masses(), r, theta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    /// `1 - r`.
    pub epsilon: f64,
    /// `μ(θ* - ε, θ* + ε)`.
    pub mass: f64,
    /// `mass / (2π ε)`.
    pub bound: f64,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub theta_star: f64,
    pub values: Vec<PoissonEval>,
    pub lower_bounds: Vec<LowerBoundCheck>,
    pub lower_bound_holds: bool,
    pub strictly_increasing: bool,
}

/// Follow `u` along the radius through the point of `arc` where it is largest
/// at the outermost rung, and compare with the bound
/// `u((1-ε) e^{iθ}) >= μ(θ-ε, θ+ε) / (2πε)`.
pub fn divergence_scan(measure: &SingularMeasure, arc: (f64, f64), r_ladder: &[f64]) -> Result<DivergenceReport> {
    measure.validate()?;
    let (a, b) = arc;
    if !(a < b) {
        return Err(Error::Precondition("arc must satisfy a < b".into()));
    }
    if r_ladder.is_empty()
        || r_ladder.iter().any(|r| !(0.0..1.0).contains(r))
        || r_ladder.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(Error::Precondition("radius ladder must increase within [0, 1)".into()));
    }
    if measure.mass_in(a, b) <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let points = measure.point_masses();
    let r_top = r_ladder[r_ladder.len() - 1];
    let mut candidates: Vec<f64> = points
        .iter()
        .filter(|p| in_open_arc(p.theta, a, b))
        .map(|p| a + (p.theta - a).rem_euclid(TAU))
        .collect();
    candidates.extend((0..SCAN_GRID).map(|i| a + (b - a) * (i as f64 + 0.5) / SCAN_GRID as f64));
    let theta_star = candidates
        .iter()
        .copied()
        .map(|t| (t, integral(&points, r_top, t)))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
        .0;

    let values: Vec<PoissonEval> = r_ladder
        .iter()
        .map(|&r| PoissonEval {
            r,
            theta: theta_star,
            value: integral(&points, r, theta_star),
        })
        .collect();
    let lower_bounds: Vec<LowerBoundCheck> = values
        .iter()
        .filter(|v| v.r > 0.0)
        .map(|v| {
            let epsilon = 1.0 - v.r;
            let mass = measure.mass_in(theta_star - epsilon, theta_star + epsilon);
            let bound = mass / (TAU * epsilon);
            LowerBoundCheck {
                epsilon,
                mass,
                bound,
                value: v.value,
                holds: v.value * (1.0 + LOWER_BOUND_SLACK) >= bound,
            }
        })
        .collect();
    Ok(DivergenceReport {
        theta_star,
        lower_bound_holds: lower_bounds.iter().all(|c| c.holds),
        strictly_increasing: values.windows(2).all(|w| w[0].value < w[1].value),
        values,
        lower_bounds,
    })
}

/// `r = 1 - 2^{-k}` for `k = 1..=k_max`.
pub fn dyadic_ladder(k_max: u32) -> Vec<f64> {
    (1..=k_max).map(|k| 1.0 - 2f64.powi(-(k as i32))).collect()
}
