//! Predictor-corrector continuation of an inverse branch along a polyline.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Polyline;
use crate::error::{Error, Result};
use crate::fnmodel::{eval_jet, EntireFunction, LacunarySeries};

pub const DEFAULT_TOL_TRACK: f64 = 1e-8;
/// Parameter steps below this end the lift with `StepUnderflow`.
pub const MIN_PARAMETER_STEP: f64 = 1e-12;
const MAX_PARAMETER_STEP: f64 = 1.0 / 16.0;
const INITIAL_PARAMETER_STEP: f64 = 1.0 / 64.0;
/// Relative radius (in the target plane) inside which a lifted point counts as
/// sitting on a critical value.
pub const CRITICAL_VALUE_RADIUS: f64 = 1e-6;
const CORRECTOR_ITERATIONS: usize = 12;
const PERTURBATION_SEED: u64 = 0x1f5e_2e4c_0de5_eed1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftStatus {
    Completed,
    HitCriticalPoint,
    EscapedWindow,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftPoint {
    pub parameter: f64,
    pub z: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftResult {
    pub status: LiftStatus,
    pub path: Vec<LiftPoint>,
    pub terminal_parameter: f64,
}

impl LiftResult {
    pub fn endpoint(&self) -> Complex64 {
        self.path[self.path.len() - 1].z
    }

    pub fn completed(&self) -> bool {
        self.status == LiftStatus::Completed
    }
}

/// The equation actually solved along the curve.
///
/// For the lacunary example `f = e^g` overflows, so the lift solves `g(z) = c(t)`
/// with `c` a continuous logarithm of the target curve.
enum Plane<'a> {
    Direct(&'a EntireFunction),
    Log(&'a LacunarySeries),
}

struct PlaneJet {
    value: Complex64,
    d1: Complex64,
    d2: Complex64,
}

impl<'a> Plane<'a> {
    fn new(func: &'a EntireFunction) -> Self {
        match func {
            EntireFunction::PaperExample(s) => Plane::Log(s),
            other => Plane::Direct(other),
        }
    }

    fn jet(&self, z: Complex64) -> Option<PlaneJet> {
        let j = match self {
            Plane::Direct(f) => {
                let j = eval_jet(f, z).ok()?;
                if j.overflow {
                    return None;
                }
                PlaneJet {
                    value: j.value,
                    d1: j.d1,
                    d2: j.d2,
                }
            }
            Plane::Log(s) => {
                let j = s.jet(z).ok()?;
                PlaneJet {
                    value: j.value,
                    d1: j.d1,
                    d2: j.d2,
                }
            }
        };
        Some(j)
    }

    /// Target value for curve point `w`, continuous with `previous`.
    fn target(&self, w: Complex64, previous: Complex64) -> Complex64 {
        match self {
            Plane::Direct(_) => w,
            Plane::Log(_) => {
                let l = w.ln();
                let turns = ((previous.im - l.im) / TAU).round();
                l + Complex64::new(0.0, TAU * turns)
            }
        }
    }

    fn initial_target(&self, w: Complex64, seed_value: Complex64) -> Result<Complex64> {
        match self {
            Plane::Direct(_) => Ok(w),
            Plane::Log(_) => {
                if w == Complex64::new(0.0, 0.0) {
                    return Err(Error::Precondition(
                        "curve starts at 0, which exp(g) omits".into(),
                    ));
                }
                Ok(self.target(w, seed_value))
            }
        }
    }
}

fn within(residual: f64, target: Complex64, tol: f64) -> bool {
    residual <= tol * (1.0 + target.norm())
}

/// Distance (first-order estimate) from the current value to the nearest
/// critical value: `|F'|^2 / (2 |F''|)`.
fn critical_value_distance(j: &PlaneJet) -> f64 {
    let d2 = j.d2.norm();
    if d2 == 0.0 {
        f64::INFINITY
    } else {
        j.d1.norm_sqr() / (2.0 * d2)
    }
}

fn near_critical(j: &PlaneJet, scale: f64) -> bool {
    j.d1.norm() < 1e-10 * (1.0 + j.value.norm())
        || critical_value_distance(j) < CRITICAL_VALUE_RADIUS * (1.0 + j.value.norm()) * scale
}

/// One predictor step `z + dw / F'(z)` followed by Newton correction.
fn step(plane: &Plane, z: Complex64, target: Complex64, tol: f64) -> Option<(Complex64, PlaneJet)> {
    let j = plane.jet(z)?;
    if j.d1.norm() == 0.0 {
        return None;
    }
    let dz = (target - j.value) / j.d1;
    let rho = if j.d2.norm() == 0.0 {
        f64::INFINITY
    } else {
        j.d1.norm() / j.d2.norm()
    };
    if dz.norm() > (0.25 * rho).min(0.5 * (1.0 + z.norm())) {
        return None;
    }
    let mut w = z + dz;
    let mut corrected = 0.0;
    for _ in 0..CORRECTOR_ITERATIONS {
        let j = plane.jet(w)?;
        if j.d1.norm() == 0.0 {
            return None;
        }
        let delta = (j.value - target) / j.d1;
        w -= delta;
        corrected += delta.norm();
        if corrected > 0.5 * dz.norm() + tol * (1.0 + w.norm()) {
            return None;
        }
        if delta.norm() <= 1e-15 * (1.0 + w.norm()) {
            break;
        }
    }
    let j = plane.jet(w)?;
    within((j.value - target).norm(), target, tol).then_some((w, j))
}

/// Continue the branch through `seed` along `curve`.
///
/// Along accepted points `|F(z(t)) - target(t)| <= tol_track (1 + |target(t)|)`,
/// where `F = f` and `target = curve`, or `F = g` and `target = log curve`
/// for the lacunary example.
pub fn lift_curve(
    func: &EntireFunction,
    curve: &Polyline,
    seed: Complex64,
    window_radius: f64,
    tol_track: f64,
) -> Result<LiftResult> {
    let plane = Plane::new(func);
    let seed_jet = plane
        .jet(seed)
        .ok_or_else(|| Error::Precondition("cannot evaluate the function at the seed".into()))?;
    let mut target = plane.initial_target(curve.start(), seed_jet.value)?;
    if !within((seed_jet.value - target).norm(), target, tol_track) {
        return Err(Error::Precondition(format!(
            "seed does not map to the curve start (residual {:e})",
            (seed_jet.value - target).norm()
        )));
    }

    let breaks = curve.vertex_parameters();
    let mut next_break = 1;
    let mut path = vec![LiftPoint {
        parameter: 0.0,
        z: seed,
    }];
    let mut z = seed;
    let mut t = 0.0;
    let mut h = INITIAL_PARAMETER_STEP;
    let mut jet = seed_jet;

    let finish = |status, path: Vec<LiftPoint>, t| {
        Ok(LiftResult {
            status,
            path,
            terminal_parameter: t,
        })
    };

    if z.norm() > window_radius {
        return finish(LiftStatus::EscapedWindow, path, t);
    }
    if near_critical(&jet, 1.0) {
        return finish(LiftStatus::HitCriticalPoint, path, t);
    }

    while t < 1.0 {
        while next_break < breaks.len() - 1 && breaks[next_break] <= t {
            next_break += 1;
        }
        let to_break = breaks[next_break] - t;
        let trial = h.min(to_break);
        if trial < MIN_PARAMETER_STEP {
            let status = if near_critical(&jet, 1e3) {
                LiftStatus::HitCriticalPoint
            } else {
                LiftStatus::StepUnderflow
            };
            return finish(status, path, t);
        }
        // land exactly on vertices, never a rounding error short of one
        let t1 = if to_break - trial < 2.0 * MIN_PARAMETER_STEP {
            breaks[next_break]
        } else {
            t + trial
        };
        let target1 = plane.target(curve.point_at(t1), target);
        match step(&plane, z, target1, tol_track) {
            None => {
                h = trial / 2.0;
            }
            Some((z1, j1)) => {
                t = t1;
                z = z1;
                target = target1;
                jet = j1;
                path.push(LiftPoint { parameter: t, z });
                if z.norm() > window_radius {
                    return finish(LiftStatus::EscapedWindow, path, t);
                }
                if near_critical(&jet, 1.0) {
                    return finish(LiftStatus::HitCriticalPoint, path, t);
                }
                h = (2.0 * trial).min(MAX_PARAMETER_STEP);
            }
        }
    }
    finish(LiftStatus::Completed, path, 1.0)
}

/// Result of [`perturbed_lift`]: the lift, the curve it followed and how many
/// lifts were attempted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedLift {
    pub lift: LiftResult,
    pub curve: Polyline,
    pub attempts: usize,
}

/// Lift along `curve`; on failure retry along copies with vertices moved by
/// at most `epsilon` (fixed pseudo-random sequence). The starting vertex is
/// never moved, nor the closing vertex of a closed curve.
#[allow(clippy::too_many_arguments)]
pub fn perturbed_lift(
    func: &EntireFunction,
    curve: &Polyline,
    seed: Complex64,
    epsilon: f64,
    max_retries: usize,
    window_radius: f64,
    tol_track: f64,
) -> Result<PerturbedLift> {
    let first = lift_curve(func, curve, seed, window_radius, tol_track)?;
    let mut best = PerturbedLift {
        lift: first,
        curve: curve.clone(),
        attempts: 1,
    };
    if best.lift.completed() || epsilon <= 0.0 {
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
    let n = curve.vertices().len();
    let movable_end = if curve.is_closed() { n - 1 } else { n };
    for attempt in 0..max_retries {
        let mut v = curve.vertices().to_vec();
        for p in v.iter_mut().take(movable_end).skip(1) {
            let radius = epsilon * rng.gen_range(0.5..=1.0);
            let angle = rng.gen_range(0.0..TAU);
            *p += Complex64::from_polar(radius, angle);
        }
        let Ok(moved) = Polyline::new(v, curve.is_closed()) else {
            continue;
        };
        let lift = lift_curve(func, &moved, seed, window_radius, tol_track)?;
        best = PerturbedLift {
            lift,
            curve: moved,
            attempts: attempt + 2,
        };
        if best.lift.completed() {
            break;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn square() -> EntireFunction {
        EntireFunction::polynomial(&[0.0, 0.0, 1.0]).unwrap()
    }

    fn unit_circle() -> Polyline {
        Polyline::circle(c(0.0, 0.0), 1.0, 64, 0.0).unwrap()
    }

    /// Re-evaluate f along the stored path against the curve.
    fn assert_tracking(func: &EntireFunction, curve: &Polyline, lift: &LiftResult, tol: f64) {
        for p in &lift.path {
            let w = curve.point_at(p.parameter);
            let fz = eval_jet(func, p.z).unwrap().value;
            assert!((fz - w).norm() <= tol * (1.0 + w.norm()), "t={} |f-w|={:e}", p.parameter, (fz - w).norm());
        }
    }

    #[test]
    fn exp_monodromy_is_two_pi_i() {
        let curve = unit_circle();
        let lift = lift_curve(&EntireFunction::Exp, &curve, c(0.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert_eq!(lift.status, LiftStatus::Completed);
        assert_eq!(lift.terminal_parameter, 1.0);
        assert!((lift.endpoint() - c(0.0, 2.0 * PI)).norm() < 1e-9);
        assert_tracking(&EntireFunction::Exp, &curve, &lift, DEFAULT_TOL_TRACK);
        assert!(lift.path.windows(2).all(|w| w[0].parameter < w[1].parameter));
    }

    #[test]
    fn square_root_monodromy() {
        let curve = unit_circle();
        let lift = lift_curve(&square(), &curve, c(1.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert_eq!(lift.status, LiftStatus::Completed);
        assert!((lift.endpoint() - c(-1.0, 0.0)).norm() < 1e-9);
        assert_tracking(&square(), &curve, &lift, DEFAULT_TOL_TRACK);
    }

    #[test]
    fn branch_point_stops_the_lift() {
        let curve = Polyline::segment(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let lift = lift_curve(&square(), &curve, c(1.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert_eq!(lift.status, LiftStatus::HitCriticalPoint);
        assert!(lift.endpoint().norm() < 1e-2);
    }

    #[test]
    fn seed_must_map_to_start() {
        let curve = unit_circle();
        assert!(matches!(
            lift_curve(&EntireFunction::Exp, &curve, c(0.5, 0.0), 100.0, DEFAULT_TOL_TRACK),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn escapes_window() {
        // log along [1, 1e-30] runs to Re z = -69
        let curve = Polyline::segment(c(1.0, 0.0), c(1e-30, 0.0)).unwrap();
        let lift = lift_curve(&EntireFunction::Exp, &curve, c(0.0, 0.0), 10.0, DEFAULT_TOL_TRACK).unwrap();
        assert_eq!(lift.status, LiftStatus::EscapedWindow);
        assert!(lift.endpoint().norm() > 10.0);
        assert!(lift.terminal_parameter < 1.0);
    }

    #[test]
    fn refinement_gives_same_endpoint() {
        for func in [EntireFunction::Exp, square(), EntireFunction::Sinc] {
            let curve = Polyline::circle(c(0.3, 0.2), 0.5, 12, 0.4).unwrap();
            let seed = match &func {
                EntireFunction::Exp => curve.start().ln(),
                EntireFunction::Sinc => {
                    // Newton from 2 for sinc(z) = start
                    let mut z = c(2.0, 0.0);
                    for _ in 0..50 {
                        let j = eval_jet(&func, z).unwrap();
                        z -= (j.value - curve.start()) / j.d1;
                    }
                    z
                }
                _ => curve.start().sqrt(),
            };
            let a = lift_curve(&func, &curve, seed, 100.0, DEFAULT_TOL_TRACK).unwrap();
            let b = lift_curve(&func, &curve.refined(), seed, 100.0, DEFAULT_TOL_TRACK).unwrap();
            assert!(a.completed() && b.completed());
            assert!((a.endpoint() - b.endpoint()).norm() <= 10.0 * DEFAULT_TOL_TRACK);
        }
    }

    #[test]
    fn closed_lift_under_omitted_value_has_zero_winding() {
        use crate::lifting::winding_number;
        // Exp omits 0: a closed lifted loop maps to a loop with winding 0 about 0.
        let curve = Polyline::new(
            vec![c(1.0, 0.0), c(2.0, 1.0), c(3.0, 0.0), c(2.0, -1.0), c(1.0, 0.0)],
            true,
        )
        .unwrap();
        let lift = lift_curve(&EntireFunction::Exp, &curve, c(0.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert!(lift.completed());
        assert!((lift.endpoint() - lift.path[0].z).norm() < 1e-9);
        let mut image: Vec<Complex64> = lift.path.iter().map(|p| p.z.exp()).collect();
        image.pop();
        image.dedup();
        image.push(image[0]);
        let image = Polyline::new(image, true).unwrap();
        assert_eq!(winding_number(&image, c(0.0, 0.0)).unwrap(), 0);
    }

    #[test]
    fn perturbation_steps_around_the_branch_point() {
        let curve = Polyline::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)], false).unwrap();
        let plain = lift_curve(&square(), &curve, c(1.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert!(!plain.completed());
        let p = perturbed_lift(&square(), &curve, c(1.0, 0.0), 0.1, 8, 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert!(p.lift.completed());
        assert!(p.attempts >= 2);
        let end = p.lift.endpoint();
        // the endpoint is a square root of the (perturbed) end vertex near -1
        assert!((end * end - p.curve.end()).norm() < 1e-7);
        assert!(end.re.abs() < 0.1 && (end.im.abs() - 1.0).abs() < 0.1);
    }

    #[test]
    fn perturbation_is_a_no_op_when_unneeded() {
        let curve = unit_circle();
        let a = lift_curve(&EntireFunction::Exp, &curve, c(0.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        let b = perturbed_lift(&EntireFunction::Exp, &curve, c(0.0, 0.0), 0.1, 5, 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert_eq!(a, b.lift);
        assert_eq!(b.attempts, 1);
        let seg = Polyline::segment(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let a = lift_curve(&square(), &seg, c(1.0, 0.0), 100.0, DEFAULT_TOL_TRACK).unwrap();
        let b = perturbed_lift(&square(), &seg, c(1.0, 0.0), 0.0, 5, 100.0, DEFAULT_TOL_TRACK).unwrap();
        assert_eq!(a, b.lift);
    }

    #[test]
    fn lacunary_example_lifts_in_the_log_plane() {
        let func = EntireFunction::paper_example();
        let series = LacunarySeries::default();
        let seed = c(6.0, 2.0);
        let w0 = series.jet(seed).unwrap().value.exp();
        // small loop around w0 not enclosing 0
        let curve = Polyline::circle(w0 * 0.75, w0.norm() * 0.25, 32, w0.arg()).unwrap();
        let curve = Polyline::new(
            curve.vertices().iter().map(|v| *v + (w0 - curve.start())).collect(),
            true,
        )
        .unwrap();
        let lift = lift_curve(&func, &curve, seed, 1000.0, DEFAULT_TOL_TRACK).unwrap();
        assert!(lift.completed(), "{:?}", lift.status);
        // loop does not enclose 0, so the branch returns to the seed
        assert!((lift.endpoint() - seed).norm() < 1e-8);
        for p in &lift.path {
            let w = curve.point_at(p.parameter);
            let g = series.jet(p.z).unwrap().value;
            assert!(((g.exp() - w) / w).norm() < 1e-6);
        }
    }
}
