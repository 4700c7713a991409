use std::f64::consts::{LN_2, PI, TAU};
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{check_epsilon, level_geometry, SetKind, TreeSet};
use crate::error::{Error, Result};
use crate::fnmodel::{LacunarySeries, SignedLogReal};

/// Relative radial nudge applied once to a sample that sits on a level line of `Re g`.
pub const DEGENERATE_NUDGE: f64 = 1e-3;

fn re_g_nudged(series: &LacunarySeries, z: Complex64) -> Result<SignedLogReal> {
    series
        .signed_log_re_g(z)
        .or_else(|_| series.signed_log_re_g(z * (1.0 + DEGENERATE_NUDGE)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub kind: SetKind,
    pub j: u64,
    pub n: u32,
    pub index: usize,
    pub z: Complex64,
    /// `Re g(z)`; `None` when it could not be resolved.
    pub re_g: Option<SignedLogReal>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetCheck {
    pub kind: SetKind,
    pub j: u64,
    pub n: u32,
    pub samples: usize,
    pub pass: bool,
    pub failures: usize,
    /// Samples whose `Re g` stayed unresolved after the nudge.
    pub degenerate: usize,
    /// Minimum of `ln |Re g| - 2^n ln 2` over samples of the required sign.
    pub min_log_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub n: u32,
    pub pass: bool,
    pub min_log_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub epsilon: f64,
    pub samples_per_set: usize,
    pub all_pass: bool,
    pub levels: Vec<LevelSummary>,
    pub sets: Vec<SetCheck>,
    #[serde(skip)]
    pub records: Vec<SampleRecord>,
}

fn check_set(series: &LacunarySeries, set: TreeSet, samples: usize) -> (SetCheck, Vec<SampleRecord>) {
    let bound = 2f64.powi(set.n as i32) * LN_2;
    let want: i8 = if set.kind == SetKind::A { 1 } else { -1 };
    let mut check = SetCheck {
        kind: set.kind,
        j: set.j,
        n: set.n,
        samples,
        pass: true,
        failures: 0,
        degenerate: 0,
        min_log_margin: None,
    };
    let mut records = Vec::with_capacity(samples);
    for (index, z) in set.samples(samples).into_iter().enumerate() {
        let re_g = re_g_nudged(series, z).ok();
        let pass = match re_g {
            Some(v) if v.sign == want => {
                let margin = v.log_abs - bound;
                check.min_log_margin = Some(check.min_log_margin.map_or(margin, |m| m.min(margin)));
                margin > 0.0
            }
            Some(_) => false,
            None => {
                check.degenerate += 1;
                false
            }
        };
        if !pass {
            check.failures += 1;
            check.pass = false;
        }
        records.push(SampleRecord {
            kind: set.kind,
            j: set.j,
            n: set.n,
            index,
            z,
            re_g,
            pass,
        });
    }
    (check, records)
}

/// Check `Re g > 2^{2^n}` on the rays `A_{j,n}` and `Re g < -2^{2^n}` on
/// `B_{j,n}` and `C±_{j,n}`, comparing logarithms.
///
/// Rays are sampled on `[r_n, r_{n+2}]`; each set gets `samples_per_set`
/// points equally spaced in radius.
pub fn verify_inequalities(
    epsilon: f64,
    n_range: RangeInclusive<u32>,
    samples_per_set: usize,
) -> Result<InequalityReport> {
    check_epsilon(epsilon)?;
    if samples_per_set < 16 {
        return Err(Error::Precondition("at least 16 samples per set".into()));
    }
    let mut sets = Vec::new();
    for n in n_range.clone() {
        level_geometry(n, epsilon)?;
        for kind in [SetKind::A, SetKind::B, SetKind::CPlus, SetKind::CMinus] {
            for j in 0..1u64 << n {
                sets.push(TreeSet::new(kind, j, n, epsilon)?);
            }
        }
    }
    if sets.is_empty() {
        return Err(Error::Precondition("empty level range".into()));
    }
    let series = LacunarySeries::default();
    let results: Vec<(SetCheck, Vec<SampleRecord>)> = sets
        .par_iter()
        .map(|&set| check_set(&series, set, samples_per_set))
        .collect();
    let (checks, records): (Vec<SetCheck>, Vec<Vec<SampleRecord>>) = results.into_iter().unzip();
    let levels: Vec<LevelSummary> = n_range
        .map(|n| {
            let of_level: Vec<&SetCheck> = checks.iter().filter(|c| c.n == n).collect();
            let margins: Vec<f64> = of_level.iter().filter_map(|c| c.min_log_margin).collect();
            let every_set_has_margin = margins.len() == of_level.len();
            LevelSummary {
                n,
                pass: of_level.iter().all(|c| c.pass),
                min_log_margin: every_set_has_margin
                    .then(|| margins.iter().copied().fold(f64::INFINITY, f64::min)),
            }
        })
        .collect();
    Ok(InequalityReport {
        epsilon,
        samples_per_set,
        all_pass: checks.iter().all(|c| c.pass),
        levels,
        sets: checks,
        records: records.into_iter().flatten().collect(),
    })
}

/// Circle samples sit at cell midpoints. A grid through angle 0 with a power-of-two
/// count would land exactly on zeros of `cos(2^n θ)`, where the dominant term's
/// real part is pure rounding noise.
fn circle_angle(i: usize, n_theta: usize) -> f64 {
    TAU * (i as f64 + 0.5) / n_theta as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgReport {
    pub n: u32,
    pub r: f64,
    pub n_theta: usize,
    /// Minimum over the circle of `d arg g / dθ = Re(z g'/g)`.
    pub min_derivative: f64,
    /// Maximum of `|z g'/g - 2^n|`.
    pub max_deviation: f64,
    /// Whether `max_deviation <= 1/2`.
    pub bound_holds: bool,
    /// Periodic trapezoid integral of the derivative over one circuit.
    pub total_increase: f64,
    pub expected_increase: f64,
    /// Angles where `g` vanished numerically; left out of the statistics.
    pub excluded_angles: Vec<f64>,
}

/// Sample `z g'/g` on the circle `|z| = r` inside the monotone annulus of level `n`.
pub fn verify_arg_monotonic(epsilon: f64, n: u32, r: f64, n_theta: usize) -> Result<ArgReport> {
    let g = level_geometry(n, epsilon)?;
    let (lo, hi) = g.monotone_annulus();
    if !(lo..=hi).contains(&r) {
        return Err(Error::Precondition(format!("radius {r} outside [{lo}, {hi}]")));
    }
    if n_theta < 1usize << (n + 3) {
        return Err(Error::Precondition(format!("n_theta must be at least 2^{}", n + 3)));
    }
    let series = LacunarySeries::default();
    let values: Vec<(f64, Result<Complex64>)> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = circle_angle(i, n_theta);
            (theta, series.zg_over_g(Complex64::from_polar(r, theta)))
        })
        .collect();
    let target = 2f64.powi(n as i32);
    let mut min_derivative = f64::INFINITY;
    let mut max_deviation = 0.0f64;
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut excluded_angles = Vec::new();
    for (theta, v) in values {
        match v {
            Ok(w) => {
                min_derivative = min_derivative.min(w.re);
                max_deviation = max_deviation.max((w - target).norm());
                sum += w.re;
                used += 1;
            }
            Err(Error::DivisionDegenerate { .. }) => excluded_angles.push(theta),
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::Precondition("every sample was degenerate".into()));
    }
    Ok(ArgReport {
        n,
        r,
        n_theta,
        min_derivative,
        max_deviation,
        bound_holds: max_deviation <= 0.5,
        total_increase: sum * TAU / used as f64,
        expected_increase: target * TAU,
        excluded_angles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcReport {
    pub n: u32,
    pub r: f64,
    pub n_theta: usize,
    pub threshold: SignedLogReal,
    pub arc_count: usize,
    /// Every arc holds exactly one angle `π/2^n + 2πj/2^n` and every such angle is covered.
    pub midpoints_covered: bool,
    /// No ray angle `2πj/2^n` lies in the sublevel set.
    pub ray_angles_excluded: bool,
    /// The whole circle is below the threshold (control case).
    pub full_circle: bool,
    pub min_arc_samples: Option<usize>,
}

/// Count the arcs of `{θ : Re g(r e^{iθ}) < threshold}` on a circle in the
/// monotone annulus of level `n`.
pub fn count_sublevel_arcs(
    epsilon: f64,
    n: u32,
    r: f64,
    threshold: SignedLogReal,
    n_theta: usize,
) -> Result<ArcReport> {
    let g = level_geometry(n, epsilon)?;
    let (lo, hi) = g.monotone_annulus();
    if !(lo..=hi).contains(&r) {
        return Err(Error::Precondition(format!("radius {r} outside [{lo}, {hi}]")));
    }
    if n_theta < 1usize << (n + 5) {
        return Err(Error::Precondition(format!("n_theta must be at least 2^{}", n + 5)));
    }
    if threshold < SignedLogReal::double_power_of_two(-1, n) {
        return Err(Error::Precondition("threshold must be at least -2^(2^n)".into()));
    }
    let series = LacunarySeries::default();
    let marked: Vec<bool> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let z = Complex64::from_polar(r, circle_angle(i, n_theta));
            re_g_nudged(&series, z).map(|v| v < threshold)
        })
        .collect::<Result<_>>()?;

    let mut report = ArcReport {
        n,
        r,
        n_theta,
        threshold,
        arc_count: 0,
        midpoints_covered: false,
        ray_angles_excluded: false,
        full_circle: false,
        min_arc_samples: None,
    };
    // sample whose cell holds the angle
    let nearest = |angle: f64| ((angle / TAU * n_theta as f64).floor() as usize) % n_theta;
    let count = 1usize << n;
    let midpoints: Vec<usize> = (0..count).map(|j| nearest(PI * (1 + 2 * j) as f64 / count as f64)).collect();
    let rays: Vec<usize> = (0..count).map(|j| nearest(TAU * j as f64 / count as f64)).collect();
    report.ray_angles_excluded = rays.iter().all(|&i| !marked[i]);

    if marked.iter().all(|&m| m) {
        report.arc_count = 1;
        report.full_circle = true;
        report.min_arc_samples = Some(n_theta);
        return Ok(report);
    }
    // label arcs starting just after an unmarked sample so none wraps
    let first_gap = marked.iter().position(|&m| !m).expect("some sample is unmarked");
    let mut arc_of = vec![usize::MAX; n_theta];
    let mut lengths: Vec<usize> = Vec::new();
    for step in 1..=n_theta {
        let i = (first_gap + step) % n_theta;
        if !marked[i] {
            continue;
        }
        let prev = (i + n_theta - 1) % n_theta;
        if !marked[prev] {
            lengths.push(0);
        }
        arc_of[i] = lengths.len() - 1;
        *lengths.last_mut().expect("arc started") += 1;
    }
    report.arc_count = lengths.len();
    report.min_arc_samples = lengths.iter().copied().min();
    if let Some(&short) = lengths.iter().find(|&&l| l < 4) {
        return Err(Error::Undersampled { samples: short });
    }
    let mut hits = vec![0usize; lengths.len()];
    let mut all_hit = true;
    for &i in &midpoints {
        match arc_of[i] {
            usize::MAX => all_hit = false,
            a => hits[a] += 1,
        }
    }
    report.midpoints_covered = all_hit && hits.iter().all(|&h| h == 1);
    Ok(report)
}
