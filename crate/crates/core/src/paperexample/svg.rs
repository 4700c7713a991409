use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tree::{clip_polyline, TreeGraph};
use crate::components::Window;

/// Drawing parameters. Any change to the defaults bumps `version` so that
/// golden files can be regenerated deliberately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SvgStyle {
    pub version: u32,
    /// Width of the picture in pixels; height follows the window aspect.
    pub width: u32,
    pub tree_stroke: String,
    pub tree_width: f64,
    pub ray_stroke: String,
    pub ray_width: f64,
    /// `stroke-dasharray` for the rays.
    pub ray_dash: String,
    pub axis_stroke: String,
    pub axis_width: f64,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            version: 1,
            width: 520,
            tree_stroke: "#000000".into(),
            tree_width: 1.2,
            ray_stroke: "#000000".into(),
            ray_width: 0.8,
            ray_dash: "1.5 2.5".into(),
            axis_stroke: "#909090".into(),
            axis_width: 0.6,
        }
    }
}

struct Frame {
    window: Window,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(window: Window, width: u32) -> Self {
        let scale = f64::from(width) / (2.0 * window.half_width);
        Frame {
            window,
            scale,
            height: 2.0 * window.half_height * scale,
        }
    }

    fn map(&self, z: Complex64) -> (f64, f64) {
        let min = self.window.min_corner();
        ((z.re - min.re) * self.scale, self.height - (z.im - min.im) * self.scale)
    }

    fn points(&self, run: &[Complex64]) -> String {
        let mut s = String::new();
        for (i, &z) in run.iter().enumerate() {
            let (x, y) = self.map(z);
            // avoid "-0.00"
            let (x, y) = (x + 0.0, y + 0.0);
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{x:.2},{y:.2}");
        }
        s.replace("-0.00", "0.00")
    }
}

fn polyline(out: &mut String, frame: &Frame, run: &[Complex64], attrs: &str) {
    let _ = writeln!(out, "  <polyline points=\"{}\" {attrs}/>", frame.points(run));
}

/// Render the tree inside its window: tree pieces solid, rays dotted, axes grey.
/// Output depends only on the tree and the style.
pub fn render_svg(tree: &TreeGraph, style: &SvgStyle) -> String {
    let frame = Frame::new(tree.window, style.width);
    let w = &tree.window;
    let far = tree.far_radius();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{:.0}\" viewBox=\"0 0 {} {:.0}\">",
        style.width, frame.height, style.width, frame.height
    );
    let _ = writeln!(
        out,
        "  <!-- epsilon {} levels 1..{} window {}{:+}i half {}x{} style v{} -->",
        tree.epsilon, tree.n_max, w.center.re, w.center.im, w.half_width, w.half_height, style.version
    );
    let _ = writeln!(out, "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    let axis = format!(
        "fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3}\"",
        style.axis_stroke, style.axis_width
    );
    let _ = writeln!(out, "  <g id=\"axes\">");
    let min = w.min_corner();
    let max = w.center + Complex64::new(w.half_width, w.half_height);
    for run in clip_polyline(&[Complex64::new(min.re, 0.0), Complex64::new(max.re, 0.0)], w)
        .into_iter()
        .chain(clip_polyline(&[Complex64::new(0.0, min.im), Complex64::new(0.0, max.im)], w))
    {
        polyline(&mut out, &frame, &run, &axis);
    }
    let _ = writeln!(out, "  </g>");

    let ray = format!(
        "fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3}\" stroke-dasharray=\"{}\"",
        style.ray_stroke, style.ray_width, style.ray_dash
    );
    let _ = writeln!(out, "  <g id=\"rays\">");
    for set in &tree.rays {
        for run in clip_polyline(&set.outline(far), w) {
            polyline(&mut out, &frame, &run, &ray);
        }
    }
    let _ = writeln!(out, "  </g>");

    let solid = format!(
        "fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3}\" stroke-linejoin=\"round\"",
        style.tree_stroke, style.tree_width
    );
    let _ = writeln!(out, "  <g id=\"tree\">");
    for run in clip_polyline(&tree.root_segment, w) {
        polyline(&mut out, &frame, &run, &solid);
    }
    for n in 1..=tree.n_max {
        for set in tree.nodes.iter().filter(|b| b.n == n) {
            for run in clip_polyline(&set.outline(far), w) {
                polyline(&mut out, &frame, &run, &solid);
            }
        }
        for edge in tree.edges.iter().filter(|e| e.set.n == n) {
            for run in clip_polyline(&edge.set.outline(far), w) {
                polyline(&mut out, &frame, &run, &solid);
            }
        }
    }
    let _ = writeln!(out, "  </g>");
    out.push_str("</svg>\n");
    out
}
