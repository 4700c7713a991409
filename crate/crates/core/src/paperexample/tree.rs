use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::components::Window;
use crate::error::{Error, Result};

/// Largest level index accepted; `2^n` sets per level must stay enumerable.
pub const MAX_LEVEL: u32 = 24;

pub fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 0.125 {
        Ok(())
    } else {
        Err(Error::EpsilonRange(epsilon))
    }
}

/// Radii of level `n`: `r_n = (1+ε) 2^{n+1}` and `r_n' = (1-2ε) 2^{n+2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelGeometry {
    pub n: u32,
    pub epsilon: f64,
    pub r_n: f64,
    pub r_n_prime: f64,
}

impl LevelGeometry {
    /// `r_{n+1}`, where the connecting arcs end.
    pub fn r_next(&self) -> f64 {
        (1.0 + self.epsilon) * 2f64.powi(self.n as i32 + 2)
    }

    /// Annulus on which `arg g` is monotone on circles.
    pub fn monotone_annulus(&self) -> (f64, f64) {
        let p = 2f64.powi(self.n as i32 + 1);
        ((1.0 + 2.0 * self.epsilon) * p, (1.0 - 3.0 * self.epsilon) * 2.0 * p)
    }
}

pub fn level_geometry(n: u32, epsilon: f64) -> Result<LevelGeometry> {
    check_epsilon(epsilon)?;
    if n == 0 || n > MAX_LEVEL {
        return Err(Error::Precondition(format!("level {n} outside 1..={MAX_LEVEL}")));
    }
    let p = 2f64.powi(n as i32 + 1);
    Ok(LevelGeometry {
        n,
        epsilon,
        r_n: (1.0 + epsilon) * p,
        r_n_prime: (1.0 - 2.0 * epsilon) * 2.0 * p,
    })
}

/// The angle `π · numerator / 2^exponent`, kept exact so that adjacency of
/// tree pieces can be checked without rounding.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DyadicAngle {
    pub numerator: i64,
    pub exponent: u32,
}

impl DyadicAngle {
    pub fn radians(&self) -> f64 {
        PI * self.numerator as f64 / 2f64.powi(self.exponent as i32)
    }
}

impl PartialEq for DyadicAngle {
    fn eq(&self, other: &Self) -> bool {
        let e = self.exponent.max(other.exponent);
        (self.numerator as i128) << (e - self.exponent) == (other.numerator as i128) << (e - other.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetKind {
    A,
    B,
    #[serde(rename = "C+")]
    CPlus,
    #[serde(rename = "C-")]
    CMinus,
}

impl SetKind {
    pub fn label(&self) -> &'static str {
        match self {
            SetKind::A => "A",
            SetKind::B => "B",
            SetKind::CPlus => "C+",
            SetKind::CMinus => "C-",
        }
    }
}

/// One of the rays `A`, radial segments `B` or spiral arcs `C±` of level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeSet {
    pub kind: SetKind,
    pub j: u64,
    pub n: u32,
    pub epsilon: f64,
}

impl TreeSet {
    pub fn new(kind: SetKind, j: u64, n: u32, epsilon: f64) -> Result<Self> {
        level_geometry(n, epsilon)?;
        if j >= 1u64 << n {
            return Err(Error::Precondition(format!("index {j} outside 0..2^{n}")));
        }
        Ok(TreeSet { kind, j, n, epsilon })
    }

    pub fn geometry(&self) -> LevelGeometry {
        level_geometry(self.n, self.epsilon).expect("validated at construction")
    }

    /// Angle at the inner end.
    pub fn start_angle(&self) -> DyadicAngle {
        let j = self.j as i64;
        match self.kind {
            SetKind::A => DyadicAngle {
                numerator: 2 * j,
                exponent: self.n,
            },
            _ => DyadicAngle {
                numerator: 1 + 2 * j,
                exponent: self.n,
            },
        }
    }

    /// Angle at the outer end (`r_{n+1}` for the arcs).
    pub fn end_angle(&self) -> DyadicAngle {
        let j = self.j as i64;
        let turn = match self.kind {
            SetKind::A | SetKind::B => return self.start_angle(),
            SetKind::CPlus => 1,
            SetKind::CMinus => -1,
        };
        DyadicAngle {
            numerator: 2 + 4 * j + turn,
            exponent: self.n + 1,
        }
    }

    /// Radial extent; rays are cut at `r_{n+2}` for sampling.
    pub fn radial_range(&self) -> (f64, f64) {
        let g = self.geometry();
        match self.kind {
            SetKind::A => (g.r_n, (1.0 + self.epsilon) * 2f64.powi(self.n as i32 + 3)),
            SetKind::B => (g.r_n, g.r_n_prime),
            SetKind::CPlus | SetKind::CMinus => (g.r_n_prime, g.r_next()),
        }
    }

    /// Point at radius `r`; the arcs turn linearly in `r` by `±π/2^{n+1}`.
    pub fn point_at_radius(&self, r: f64) -> Complex64 {
        let base = self.start_angle().radians();
        let angle = match self.kind {
            SetKind::A | SetKind::B => base,
            SetKind::CPlus | SetKind::CMinus => {
                let (lo, hi) = self.radial_range();
                let sign = if self.kind == SetKind::CPlus { 1.0 } else { -1.0 };
                base + sign * (r - lo) / (hi - lo) * PI / 2f64.powi(self.n as i32 + 1)
            }
        };
        Complex64::from_polar(r, angle)
    }

    /// `count` points, equally spaced in radius over the radial range, ends included.
    pub fn samples(&self, count: usize) -> Vec<Complex64> {
        self.samples_between(self.radial_range(), count)
    }

    fn samples_between(&self, (lo, hi): (f64, f64), count: usize) -> Vec<Complex64> {
        if count == 1 {
            return vec![self.point_at_radius(lo)];
        }
        (0..count)
            .map(|i| {
                let r = if i + 1 == count {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                };
                self.point_at_radius(r)
            })
            .collect()
    }

    /// Polyline for drawing; rays run out to `far`.
    pub fn outline(&self, far: f64) -> Vec<Complex64> {
        match self.kind {
            SetKind::A => {
                let lo = self.radial_range().0;
                vec![self.point_at_radius(lo), self.point_at_radius(far.max(lo))]
            }
            SetKind::B => self.samples(2),
            _ => self.samples(ARC_SEGMENTS + 1),
        }
    }
}

const ARC_SEGMENTS: usize = 48;

/// A connecting arc and the two radial segments it joins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub set: TreeSet,
    /// Index into `TreeGraph::nodes`.
    pub parent: usize,
    pub child: usize,
}

/// The radial segments and connecting arcs of levels `1..=n_max`, arcs only
/// between built levels, plus the rays `A` that separate branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeGraph {
    pub epsilon: f64,
    pub n_max: u32,
    pub window: Window,
    pub root_segment: [Complex64; 2],
    pub nodes: Vec<TreeSet>,
    pub edges: Vec<TreeEdge>,
    pub rays: Vec<TreeSet>,
}

impl TreeGraph {
    /// Index of `B_{j,n}` in `nodes`.
    pub fn node_index(&self, j: u64, n: u32) -> usize {
        ((1usize << n) - 2) + j as usize
    }

    /// Radius beyond which nothing in the window can lie.
    pub fn far_radius(&self) -> f64 {
        let w = &self.window;
        2.0 * (w.center.norm() + w.half_width + w.half_height)
    }

    pub fn fully_visible(&self, set: &TreeSet) -> bool {
        set.outline(self.far_radius()).iter().all(|&p| self.window.contains(p))
    }

    /// Children of `B_{j,n}` through the arcs leaving it.
    pub fn children(&self, node: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.parent == node).map(|e| e.child).collect()
    }
}

/// Build the tree up to level `n_max`; `n_max = 0` leaves only the root segment.
pub fn build_tree(epsilon: f64, n_max: u32, window: Window) -> Result<TreeGraph> {
    check_epsilon(epsilon)?;
    if n_max > MAX_LEVEL {
        return Err(Error::Precondition(format!("n_max {n_max} above {MAX_LEVEL}")));
    }
    let r1 = (1.0 + epsilon) * 4.0;
    let mut tree = TreeGraph {
        epsilon,
        n_max,
        window,
        root_segment: [Complex64::new(0.0, -r1), Complex64::new(0.0, r1)],
        nodes: Vec::new(),
        edges: Vec::new(),
        rays: Vec::new(),
    };
    for n in 1..=n_max {
        for j in 0..1u64 << n {
            tree.nodes.push(TreeSet::new(SetKind::B, j, n, epsilon)?);
            tree.rays.push(TreeSet::new(SetKind::A, j, n, epsilon)?);
        }
    }
    for n in 1..n_max {
        for j in 0..1u64 << n {
            let parent = tree.node_index(j, n);
            for (kind, child_j) in [(SetKind::CMinus, 2 * j), (SetKind::CPlus, 2 * j + 1)] {
                let set = TreeSet::new(kind, j, n, epsilon)?;
                let child = tree.node_index(child_j, n + 1);
                debug_assert!(set.end_angle() == tree.nodes[child].start_angle());
                tree.edges.push(TreeEdge { set, parent, child });
            }
        }
    }
    Ok(tree)
}

/// Liang-Barsky clipping of the segment `p q` to the window rectangle.
pub fn clip_segment(p: Complex64, q: Complex64, window: &Window) -> Option<(Complex64, Complex64)> {
    let d = q - p;
    let lo = window.center - Complex64::new(window.half_width, window.half_height);
    let hi = window.center + Complex64::new(window.half_width, window.half_height);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (delta, dist_lo, dist_hi) in [(d.re, p.re - lo.re, hi.re - p.re), (d.im, p.im - lo.im, hi.im - p.im)] {
        for (num, den) in [(dist_lo, -delta), (dist_hi, delta)] {
            // constraint: den * t <= num
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else {
                let t = num / den;
                if den < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    let a = if t0 == 0.0 { p } else { p + d * t0 };
    let b = if t1 == 1.0 { q } else { p + d * t1 };
    Some((a, b))
}

/// Visible runs of a polyline inside the window.
pub fn clip_polyline(points: &[Complex64], window: &Window) -> Vec<Vec<Complex64>> {
    let mut runs: Vec<Vec<Complex64>> = Vec::new();
    let mut open = false;
    for w in points.windows(2) {
        match clip_segment(w[0], w[1], window) {
            Some((a, b)) => {
                let continues = open && runs.last().and_then(|r| r.last()) == Some(&a);
                if continues {
                    runs.last_mut().expect("open run").push(b);
                } else {
                    runs.push(vec![a, b]);
                }
                open = b == w[1];
            }
            None => open = false,
        }
    }
    runs
}
