use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::unionfind::UnionFind;
use super::Window;
use crate::error::{Error, Result};
use crate::fnmodel::{residual_and_step, EntireFunction, SignedLogReal};

/// Smallest member count for a component that does not reach the window edge.
pub const MIN_COMPONENT_CELLS: usize = 4;
/// Residual accepted by Newton refinement, relative to `max(1, |a|)`.
pub const A_POINT_TOL: f64 = 1e-10;
/// Refined points closer than this are merged.
pub const A_POINT_MERGE: f64 = 1e-6;
const NEWTON_ITERATIONS: usize = 60;

/// Radius of a disc `B(a, r)` stored as `ln r`, so that radii such as
/// `e^{-100000}` remain representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogRadius(f64);

impl LogRadius {
    pub fn from_radius(r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Precondition(format!("radius {r} must be positive and finite")));
        }
        Ok(LogRadius(r.ln()))
    }

    pub fn from_log(log_r: f64) -> Result<Self> {
        if !log_r.is_finite() {
            return Err(Error::Precondition(format!("log radius {log_r} must be finite")));
        }
        Ok(LogRadius(log_r))
    }

    /// Accepts a plain radius or `log:<ln r>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || Error::Parse(format!("invalid radius {text:?}"));
        match text.strip_prefix("log:") {
            Some(l) => LogRadius::from_log(l.trim().parse().map_err(|_| bad())?),
            None => LogRadius::from_radius(text.parse().map_err(|_| bad())?),
        }
    }

    pub fn log(&self) -> f64 {
        self.0
    }

    /// `r` itself; underflows to 0 below about `e^{-745}`.
    pub fn radius(&self) -> f64 {
        self.0.exp()
    }
}

impl fmt::Display for LogRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.radius();
        if r.is_normal() && r.ln() == self.0 {
            write!(f, "{r}")
        } else {
            write!(f, "log:{}", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelComponent {
    pub id: usize,
    pub sample_point: Complex64,
    pub cell_count: usize,
    pub touches_window_boundary: bool,
    pub a_points: Vec<Complex64>,
    /// Member cell indices in the window grid, ascending.
    #[serde(skip)]
    pub cells: Vec<usize>,
}

/// `ln |f - a|` at every cell center of a window.
///
/// For the lacunary example over 0 this is `Re g` itself, compared in the log
/// domain, so no level is ever lost to overflow or underflow.
pub(crate) struct LevelField {
    pub window: Window,
    pub levels: Vec<SignedLogReal>,
    uses_re_g: bool,
}

fn finite_or_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

impl LevelField {
    pub fn compute(func: &EntireFunction, a: Complex64, window: Window) -> Self {
        let origin = a == Complex64::new(0.0, 0.0);
        match func.series() {
            Some(series) if origin => {
                let nudge = Complex64::new(1e-3 * window.resolution, 0.0);
                let levels = window.sample(|z| {
                    series
                        .signed_log_re_g(z)
                        .or_else(|_| series.signed_log_re_g(z + nudge))
                        .unwrap_or(SignedLogReal::ZERO)
                });
                LevelField {
                    window,
                    levels,
                    uses_re_g: true,
                }
            }
            _ => {
                let levels = window.sample(|z| {
                    let d = residual_and_step(func, z, a).map_or(f64::INFINITY, |(r, _)| r);
                    SignedLogReal::from_f64(finite_or_inf(d.ln()))
                });
                LevelField {
                    window,
                    levels,
                    uses_re_g: false,
                }
            }
        }
    }

    /// True when `f - a` has no zeros by construction (`e^g` over 0).
    pub fn omits_target(&self) -> bool {
        self.uses_re_g
    }

    /// Label the strict sublevel set `ln|f - a| < ln r` with 4-connectivity.
    /// Components are ordered by their first cell in row-major order.
    pub fn label(&self, r: LogRadius) -> Labeling {
        let threshold = SignedLogReal::from_f64(r.log());
        let cols = self.window.columns();
        let marked: Vec<bool> = self.levels.iter().map(|v| *v < threshold).collect();
        let mut uf = UnionFind::new(marked.len());
        for i in 0..marked.len() {
            if !marked[i] {
                continue;
            }
            if (i + 1) % cols != 0 && marked[i + 1] {
                uf.union(i as u32, (i + 1) as u32);
            }
            if i + cols < marked.len() && marked[i + cols] {
                uf.union(i as u32, (i + cols) as u32);
            }
        }
        let mut labels = vec![NO_LABEL; marked.len()];
        let mut root_label = vec![NO_LABEL; marked.len()];
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for i in 0..marked.len() {
            if !marked[i] {
                continue;
            }
            let root = uf.find(i as u32) as usize;
            if root_label[root] == NO_LABEL {
                root_label[root] = cells.len() as u32;
                cells.push(Vec::new());
            }
            labels[i] = root_label[root];
            cells[root_label[root] as usize].push(i);
        }
        Labeling { labels, cells }
    }

    fn is_local_min(&self, i: usize) -> bool {
        let v = self.levels[i];
        self.window.neighbors8(i).all(|j| !(self.levels[j] < v))
    }

    /// Local minima of `|f - a|` among `cells` whose Newton step is short
    /// enough to point at a nearby root.
    fn candidates<'a>(
        &'a self,
        func: &'a EntireFunction,
        a: Complex64,
        cells: impl Iterator<Item = usize> + 'a,
    ) -> impl Iterator<Item = Complex64> + 'a {
        let reach = 2.0 * self.window.resolution;
        cells.filter(|&i| self.is_local_min(i)).filter_map(move |i| {
            let z = self.window.cell_center(i);
            let (_, step) = residual_and_step(func, z, a)?;
            (step.norm() <= reach).then(|| refine_root(func, a, z)).flatten()
        })
    }
}

pub(crate) const NO_LABEL: u32 = u32::MAX;

pub(crate) struct Labeling {
    /// Component index per cell, `NO_LABEL` for unmarked cells.
    pub labels: Vec<u32>,
    pub cells: Vec<Vec<usize>>,
}

/// Newton iteration for `f(z) = a` from `z0`, run until the step vanishes so
/// that multiple roots (linear convergence) still land on one point.
pub(crate) fn refine_root(func: &EntireFunction, a: Complex64, z0: Complex64) -> Option<Complex64> {
    let tol = A_POINT_TOL * a.norm().max(1.0);
    let mut z = z0;
    for _ in 0..NEWTON_ITERATIONS {
        let (_, step) = residual_and_step(func, z, a)?;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            break;
        }
        z -= step;
    }
    let (residual, _) = residual_and_step(func, z, a)?;
    (residual <= tol).then_some(z)
}

fn merge_sorted(mut points: Vec<Complex64>) -> Vec<Complex64> {
    // Real parts are compared on the merge grid so that points on a common
    // vertical line are ordered by imaginary part despite rounding.
    let key = |p: &Complex64| (p.re / A_POINT_MERGE).round() as i64;
    points.sort_by(|p, q| key(p).cmp(&key(q)).then(p.im.total_cmp(&q.im)));
    let mut out: Vec<Complex64> = Vec::with_capacity(points.len());
    for p in points {
        if out.iter().all(|q| (p - q).norm() > A_POINT_MERGE) {
            out.push(p);
        }
    }
    out
}

/// Build components from a labeling, checking the size precondition.
pub(crate) fn components_from(
    func: &EntireFunction,
    a: Complex64,
    field: &LevelField,
    labeling: &Labeling,
) -> Result<Vec<SublevelComponent>> {
    let window = &field.window;
    let mut out = Vec::with_capacity(labeling.cells.len());
    for (id, cells) in labeling.cells.iter().enumerate() {
        let touches = cells.iter().any(|&i| window.on_border(i));
        if !touches && cells.len() < MIN_COMPONENT_CELLS {
            return Err(Error::ResolutionTooCoarse {
                id,
                cells: cells.len(),
            });
        }
        let deepest = *cells
            .iter()
            .min_by(|&&i, &&j| {
                field.levels[i]
                    .partial_cmp(&field.levels[j])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("components are nonempty");
        let a_points = if field.omits_target() {
            Vec::new()
        } else {
            let found = field
                .candidates(func, a, cells.iter().copied())
                .filter(|&z| {
                    window
                        .cell_of(z)
                        .is_some_and(|c| labeling.labels[c] == id as u32)
                })
                .collect();
            merge_sorted(found)
        };
        out.push(SublevelComponent {
            id,
            sample_point: window.cell_center(deepest),
            cell_count: cells.len(),
            touches_window_boundary: touches,
            a_points,
            cells: cells.clone(),
        });
    }
    Ok(out)
}

/// Components of `f^{-1}(B(a, r))` sampled on the window grid.
///
/// A cell belongs to the set when `|f - a| < r` holds strictly at its center;
/// components are 4-connected.
pub fn sublevel_components(
    func: &EntireFunction,
    a: Complex64,
    r: LogRadius,
    window: Window,
) -> Result<Vec<SublevelComponent>> {
    let field = LevelField::compute(func, a, window);
    let labeling = field.label(r);
    components_from(func, a, &field, &labeling)
}

/// Solutions of `f(z) = a` inside the window, sorted by real then imaginary part.
pub fn find_a_points(func: &EntireFunction, a: Complex64, window: Window) -> Vec<Complex64> {
    let field = LevelField::compute(func, a, window);
    if field.omits_target() {
        return Vec::new();
    }
    let found = field
        .candidates(func, a, 0..window.cell_count())
        .filter(|&z| window.contains(z))
        .collect();
    merge_sorted(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn exp_window(half_height: f64, resolution: f64) -> Window {
        Window::new(c(0.0, 0.0), 5.0, half_height, resolution).unwrap()
    }

    #[test]
    fn log_radius_forms() {
        assert_eq!(LogRadius::parse("log:-300").unwrap().log(), -300.0);
        assert_eq!(LogRadius::parse("0.5").unwrap(), LogRadius::from_radius(0.5).unwrap());
        assert!(LogRadius::parse("-1").is_err());
        assert!(LogRadius::parse("log:x").is_err());
        assert_eq!(LogRadius::from_radius(0.5).unwrap().to_string(), "0.5");
        assert_eq!(LogRadius::from_log(-1e5).unwrap().to_string(), "log:-100000");
    }

    #[test]
    fn exp_preimages_of_a_disc_are_translates() {
        let r = LogRadius::from_radius(0.5).unwrap();
        let comps = sublevel_components(&EntireFunction::Exp, c(1.0, 0.0), r, exp_window(10.0, 0.05)).unwrap();
        // Oracle: log B(1, 1/2) + 2 pi i k with |2 pi k| + 0.53 <= 10.
        let ks: Vec<i32> = (-3..=3).filter(|&k| (2.0 * PI * k as f64).abs() < 10.0).collect();
        assert_eq!(comps.len(), ks.len());
        for (comp, k) in comps.iter().zip(&ks) {
            let center = c(0.0, 2.0 * PI * *k as f64);
            assert!((comp.sample_point - center).norm() < 0.1, "{comp:?}");
            assert_eq!(comp.a_points.len(), 1);
            assert!((comp.a_points[0] - center).norm() < 1e-9);
            assert!(!comp.touches_window_boundary);
        }
    }

    #[test]
    fn sinc_zeros_sit_in_real_axis_components() {
        let comps = sublevel_components(
            &EntireFunction::Sinc,
            c(0.0, 0.0),
            LogRadius::from_radius(0.05).unwrap(),
            Window::square(15.0, 0.05).unwrap(),
        )
        .unwrap();
        let mut zeros: Vec<f64> = comps
            .iter()
            .flat_map(|comp| comp.a_points.iter().map(|z| z.re))
            .collect();
        zeros.sort_by(f64::total_cmp);
        let expected: Vec<f64> = [-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0].iter().map(|k| k * PI).collect();
        assert_eq!(zeros.len(), expected.len());
        for (z, e) in zeros.iter().zip(&expected) {
            assert!((z - e).abs() < 1e-8);
        }
        for comp in comps.iter().filter(|comp| comp.sample_point.im.abs() < 1.0 && comp.sample_point.re.abs() < 13.0) {
            assert!(!comp.a_points.is_empty(), "{comp:?}");
        }
    }

    #[test]
    fn square_has_one_component_at_zero() {
        let comps = sublevel_components(
            &EntireFunction::polynomial(&[0.0, 0.0, 1.0]).unwrap(),
            c(0.0, 0.0),
            LogRadius::from_radius(0.01).unwrap(),
            Window::square(2.0, 0.01).unwrap(),
        )
        .unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].a_points.len(), 1);
        assert!(comps[0].a_points[0].norm() < 1e-5);
    }

    #[test]
    fn tiny_interior_component_is_rejected() {
        // one cell centered on the root
        let err = sublevel_components(
            &EntireFunction::polynomial(&[0.0, 0.0, 1.0]).unwrap(),
            c(0.0, 0.0),
            LogRadius::from_radius(0.005).unwrap(),
            Window::new(c(0.05, 0.05), 2.0, 2.0, 0.1).unwrap(),
        );
        assert!(matches!(err, Err(Error::ResolutionTooCoarse { .. })));
    }

    #[test]
    fn refinement_never_loses_components() {
        let r = LogRadius::from_radius(0.5).unwrap();
        let mut last = 0;
        for res in [0.2, 0.1, 0.05, 0.025] {
            let n = sublevel_components(&EntireFunction::Exp, c(1.0, 0.0), r, exp_window(10.0, res)).unwrap().len();
            assert!(n >= last);
            if res <= 0.05 {
                assert_eq!(n, 3);
            }
            last = n;
        }
    }

    #[test]
    fn deterministic() {
        let w = Window::square(15.0, 0.05).unwrap();
        let r = LogRadius::from_radius(0.05).unwrap();
        let a = sublevel_components(&EntireFunction::Sinc, c(0.0, 0.0), r, w).unwrap();
        let b = sublevel_components(&EntireFunction::Sinc, c(0.0, 0.0), r, w).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn a_points_examples() {
        let sinc = find_a_points(&EntireFunction::Sinc, c(0.0, 0.0), Window::square(15.0, 0.1).unwrap());
        let expected = [-4.0, -3.0, -2.0, -1.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(sinc.len(), 8);
        for (z, k) in sinc.iter().zip(expected) {
            assert!((z - c(k * PI, 0.0)).norm() < 1e-9);
        }
        assert!(find_a_points(&EntireFunction::Exp, c(0.0, 0.0), Window::square(50.0, 0.1).unwrap()).is_empty());
        let ones = find_a_points(&EntireFunction::Exp, c(1.0, 0.0), Window::square(10.0, 0.1).unwrap());
        assert_eq!(ones.len(), 3);
        for (z, k) in ones.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((z - c(0.0, 2.0 * PI * k)).norm() < 1e-9);
        }
        for z in sinc.iter().chain(&ones) {
            assert!(crate::fnmodel::distance_to(&EntireFunction::Sinc, *z, c(0.0, 0.0)) <= 1e-10
                || crate::fnmodel::distance_to(&EntireFunction::Exp, *z, c(1.0, 0.0)) <= 1e-10);
        }
    }
}
