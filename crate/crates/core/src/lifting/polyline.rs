use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closing tolerance between first and last vertex of a closed polyline.
pub const CLOSURE_TOL: f64 = 1e-12;

/// Piecewise-linear curve, parametrized on `[0, 1]` by normalized arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolylineRepr", into = "PolylineRepr")]
pub struct Polyline {
    vertices: Vec<Complex64>,
    closed: bool,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolylineRepr {
    vertices: Vec<Complex64>,
    closed: bool,
}

impl TryFrom<PolylineRepr> for Polyline {
    type Error = Error;
    fn try_from(r: PolylineRepr) -> Result<Self> {
        Polyline::new(r.vertices, r.closed)
    }
}

impl From<Polyline> for PolylineRepr {
    fn from(p: Polyline) -> Self {
        PolylineRepr {
            vertices: p.vertices,
            closed: p.closed,
        }
    }
}

impl Polyline {
    pub fn new(vertices: Vec<Complex64>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Precondition("polyline needs at least two vertices".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Precondition("consecutive polyline vertices coincide".into()));
        }
        if closed && (vertices[0] - vertices[vertices.len() - 1]).norm() > CLOSURE_TOL {
            return Err(Error::Precondition(
                "closed polyline must end where it starts".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(vertices.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in vertices.windows(2) {
            acc += (w[1] - w[0]).norm();
            cumulative.push(acc);
        }
        Ok(Polyline {
            vertices,
            closed,
            cumulative,
        })
    }

    pub fn segment(from: Complex64, to: Complex64) -> Result<Self> {
        Polyline::new(vec![from, to], false)
    }

    /// Regular `n`-gon on the circle, counterclockwise from `center + radius e^{i start}`.
    pub fn circle(center: Complex64, radius: f64, n: usize, start: f64) -> Result<Self> {
        if n < 3 || !(radius > 0.0) {
            return Err(Error::Precondition("circle needs n >= 3 and radius > 0".into()));
        }
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| center + Complex64::from_polar(radius, start + std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        v.push(v[0]);
        Polyline::new(v, true)
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// Parameters of the vertices in `[0, 1]`.
    pub fn vertex_parameters(&self) -> Vec<f64> {
        let total = self.length();
        let mut p: Vec<f64> = self.cumulative.iter().map(|c| c / total).collect();
        let last = p.len() - 1;
        p[last] = 1.0;
        p
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        let t = t.clamp(0.0, 1.0);
        if t >= 1.0 {
            return self.end();
        }
        let s = t * self.length();
        let i = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => return self.vertices[i],
            Err(i) => i - 1,
        };
        let span = self.cumulative[i + 1] - self.cumulative[i];
        let u = (s - self.cumulative[i]) / span;
        self.vertices[i] + (self.vertices[i + 1] - self.vertices[i]) * u
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Polyline {
        let v: Vec<Complex64> = self.vertices.iter().rev().copied().collect();
        Polyline::new(v, self.closed).expect("reversal preserves validity")
    }

    /// Each segment bisected.
    pub fn refined(&self) -> Polyline {
        let mut v = Vec::with_capacity(2 * self.vertices.len());
        for w in self.vertices.windows(2) {
            v.push(w[0]);
            v.push(0.5 * (w[0] + w[1]));
        }
        v.push(self.end());
        Polyline::new(v, self.closed).expect("refinement preserves validity")
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn concat(&self, other: &Polyline) -> Result<Polyline> {
        if (self.end() - other.start()).norm() > CLOSURE_TOL {
            return Err(Error::Precondition("curves do not join".into()));
        }
        let mut v = self.vertices.clone();
        v.extend_from_slice(&other.vertices[1..]);
        let closed = (v[0] - v[v.len() - 1]).norm() <= CLOSURE_TOL;
        Polyline::new(v, closed)
    }

    /// Euclidean distance from `a` to the curve.
    pub fn distance_to(&self, a: Complex64) -> f64 {
        self.vertices
            .windows(2)
            .map(|w| segment_distance(w[0], w[1], a))
            .fold(f64::INFINITY, f64::min)
    }
}

fn segment_distance(p: Complex64, q: Complex64, a: Complex64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    let u = (((a - p) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p + d * u - a).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn validation() {
        assert!(Polyline::new(vec![c(0.0, 0.0)], false).is_err());
        assert!(Polyline::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], false).is_err());
        assert!(Polyline::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)], true).is_err());
        assert!(Polyline::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], true).is_ok());
    }

    #[test]
    fn arclength_parametrization() {
        let p = Polyline::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 3.0)], false).unwrap();
        assert_eq!(p.length(), 4.0);
        assert_eq!(p.point_at(0.25), c(1.0, 0.0));
        assert!((p.point_at(0.5) - c(1.0, 1.0)).norm() < 1e-15);
        assert_eq!(p.point_at(1.0), c(1.0, 3.0));
        assert_eq!(p.vertex_parameters(), vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn circle_is_closed() {
        let p = Polyline::circle(c(0.0, 0.0), 1.0, 64, 0.0).unwrap();
        assert!(p.is_closed());
        assert_eq!(p.vertices().len(), 65);
        assert_eq!(p.start(), c(1.0, 0.0));
    }

    #[test]
    fn distance() {
        let p = Polyline::segment(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(p.distance_to(c(0.0, 2.0)), 2.0);
        assert_eq!(p.distance_to(c(3.0, 0.0)), 2.0);
    }
}
