use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{lift_curve, LiftStatus, Polyline, DEFAULT_TOL_TRACK};
use crate::components::{find_a_points, Window};
use crate::error::{Error, Result};
use crate::fnmodel::EntireFunction;

/// Grid spacing used to look for preimages of the curve midpoint.
pub const PROBE_RESOLUTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbedSeed {
    pub seed: Complex64,
    /// Lift from the midpoint towards the curve end.
    pub forward: LiftStatus,
    /// Lift from the midpoint back to the curve start.
    pub backward: LiftStatus,
}

impl ProbedSeed {
    pub fn compact(&self) -> bool {
        self.forward == LiftStatus::Completed && self.backward == LiftStatus::Completed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodCurveReport {
    pub probed_components: usize,
    pub compact_count: usize,
    pub noncompact_candidates: Vec<Complex64>,
    pub seeds: Vec<ProbedSeed>,
}

/// The two halves of an open curve, both starting at its midpoint.
fn halves(curve: &Polyline) -> Result<(Polyline, Polyline)> {
    let mid = curve.point_at(0.5);
    let params = curve.vertex_parameters();
    let vertices = curve.vertices();
    let mut ahead = vec![mid];
    ahead.extend(params.iter().zip(vertices).filter(|(t, _)| **t > 0.5).map(|(_, v)| *v));
    let mut behind = vec![mid];
    behind.extend(params.iter().zip(vertices).rev().filter(|(t, _)| **t < 0.5).map(|(_, v)| *v));
    ahead.dedup();
    behind.dedup();
    Ok((Polyline::new(ahead, false)?, Polyline::new(behind, false)?))
}

/// Probe whether the preimage components of an open curve are compact.
///
/// Preimages of the midpoint within `window_radius` serve as seeds, nearest
/// first. The curve is lifted from each seed in both directions; a seed whose
/// lifts both complete marks a compact component, anything else (escape from
/// the window, or a critical value on the curve) a noncompact candidate.
pub fn good_curve_probe(
    func: &EntireFunction,
    curve: &Polyline,
    window_radius: f64,
    n_seeds: usize,
) -> Result<GoodCurveReport> {
    if curve.is_closed() || !(curve.length() > 0.0) {
        return Err(Error::Precondition("probe needs an open curve of positive length".into()));
    }
    if n_seeds == 0 {
        return Err(Error::Precondition("n_seeds must be positive".into()));
    }
    let (ahead, behind) = halves(curve)?;
    let window = Window::square(window_radius, PROBE_RESOLUTION)?;
    let mut seeds: Vec<Complex64> = find_a_points(func, ahead.start(), window)
        .into_iter()
        .filter(|z| z.norm() <= window_radius)
        .collect();
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    seeds.sort_by(|p, q| p.norm().total_cmp(&q.norm()));
    seeds.truncate(n_seeds);

    let mut probed = Vec::with_capacity(seeds.len());
    for seed in seeds {
        let forward = lift_curve(func, &ahead, seed, window_radius, DEFAULT_TOL_TRACK)?.status;
        let backward = lift_curve(func, &behind, seed, window_radius, DEFAULT_TOL_TRACK)?.status;
        probed.push(ProbedSeed {
            seed,
            forward,
            backward,
        });
    }
    let noncompact_candidates: Vec<Complex64> =
        probed.iter().filter(|s| !s.compact()).map(|s| s.seed).collect();
    Ok(GoodCurveReport {
        probed_components: probed.len(),
        compact_count: probed.len() - noncompact_candidates.len(),
        noncompact_candidates,
        seeds: probed,
    })
}
