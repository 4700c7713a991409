use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::sublevel::{components_from, LevelField, LogRadius, SublevelComponent};
use super::Window;
use crate::error::{Error, Result};
use crate::fnmodel::EntireFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderNode {
    /// Index into the radius list.
    pub level: usize,
    pub component: SublevelComponent,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Nesting forest of sublevel components over a decreasing list of radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLadder {
    pub a: Complex64,
    pub radii: Vec<LogRadius>,
    pub window: Window,
    pub nodes: Vec<LadderNode>,
}

impl ComponentLadder {
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].parent.is_none())
    }

    /// Node ids at one rung, in component id order.
    pub fn level(&self, level: usize) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].level == level).collect()
    }

    /// Every root-to-leaf chain, depth first in id order.
    pub fn chains(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<usize>> = self.roots().map(|r| vec![r]).collect();
        stack.reverse();
        while let Some(path) = stack.pop() {
            let last = *path.last().expect("paths are nonempty");
            let children = &self.nodes[last].children;
            if children.is_empty() {
                out.push(path);
                continue;
            }
            for &c in children.iter().rev() {
                let mut next = path.clone();
                next.push(c);
                stack.push(next);
            }
        }
        out
    }
}

/// Sublevel components at each radius, linked by cell containment.
///
/// The level field is sampled once and thresholded per rung, so every child's
/// cells are a subset of exactly one parent's cells.
pub fn component_ladder(
    func: &EntireFunction,
    a: Complex64,
    radii: &[LogRadius],
    window: Window,
) -> Result<ComponentLadder> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1].log() < w[0].log())) {
        return Err(Error::Precondition("radii must be nonempty and strictly decreasing".into()));
    }
    let field = LevelField::compute(func, a, window);
    let mut nodes: Vec<LadderNode> = Vec::new();
    let mut parent_labels: Option<(Vec<u32>, usize)> = None;
    for (level, &r) in radii.iter().enumerate() {
        let labeling = field.label(r);
        let comps = components_from(func, a, &field, &labeling)?;
        let offset = nodes.len();
        for comp in comps {
            let parent = match &parent_labels {
                Some((labels, parent_offset)) => {
                    let p = labels[comp.cells[0]];
                    debug_assert!(comp.cells.iter().all(|&c| labels[c] == p));
                    Some(parent_offset + p as usize)
                }
                None => None,
            };
            let id = nodes.len();
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            nodes.push(LadderNode {
                level,
                component: comp,
                parent,
                children: Vec::new(),
            });
        }
        parent_labels = Some((labeling.labels, offset));
    }
    Ok(ComponentLadder {
        a,
        radii: radii.to_vec(),
        window,
        nodes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    DirectCandidate,
    IndirectCandidate,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub node: usize,
    pub level: usize,
    pub radius: LogRadius,
    pub component_id: usize,
    pub sample_point: Complex64,
    pub cell_count: usize,
    pub a_point_count: usize,
    pub children: usize,
    pub touches_window_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub classification: Classification,
    pub splitting_detected: bool,
    pub witness: String,
    pub path: Vec<WitnessStep>,
}

/// Iversen type of the singularity followed by a root-to-leaf chain.
///
/// Direct when the deepest component holds no preimage of `a`, indirect when
/// every component does. A chain that stops before the last rung, or loses
/// its preimages and regains them, is inconclusive. Splitting (a component
/// with several children) rules out a logarithmic singularity.
pub fn classify_singularity(ladder: &ComponentLadder, leaf_path: &[usize]) -> Result<SingularityReport> {
    let valid = !leaf_path.is_empty()
        && leaf_path.iter().all(|&i| i < ladder.nodes.len())
        && ladder.nodes[leaf_path[0]].parent.is_none()
        && leaf_path.windows(2).all(|w| ladder.nodes[w[1]].parent == Some(w[0]))
        && ladder.nodes[leaf_path[leaf_path.len() - 1]].children.is_empty();
    if !valid {
        return Err(Error::Precondition("leaf_path is not a root-to-leaf chain".into()));
    }
    let nodes: Vec<&LadderNode> = leaf_path.iter().map(|&i| &ladder.nodes[i]).collect();
    let deepest = nodes[nodes.len() - 1];
    let classification = if nodes.iter().all(|n| !n.component.a_points.is_empty()) {
        Classification::IndirectCandidate
    } else if deepest.level + 1 == ladder.radii.len() && deepest.component.a_points.is_empty() {
        Classification::DirectCandidate
    } else {
        Classification::Inconclusive
    };
    let splitting_detected = nodes.iter().any(|n| n.children.len() >= 2);
    let path: Vec<WitnessStep> = leaf_path
        .iter()
        .zip(&nodes)
        .map(|(&node, n)| WitnessStep {
            node,
            level: n.level,
            radius: ladder.radii[n.level],
            component_id: n.component.id,
            sample_point: n.component.sample_point,
            cell_count: n.component.cell_count,
            a_point_count: n.component.a_points.len(),
            children: n.children.len(),
            touches_window_boundary: n.component.touches_window_boundary,
        })
        .collect();
    let witness = path
        .iter()
        .map(|s| {
            format!(
                "r={} #{} at {:.3}{:+.3}i: {} cells, {} a-points, {} children{}",
                s.radius,
                s.component_id,
                s.sample_point.re,
                s.sample_point.im,
                s.cell_count,
                s.a_point_count,
                s.children,
                if s.touches_window_boundary { ", clipped" } else { "" }
            )
        })
        .collect::<Vec<_>>()
        .join(" -> ");
    Ok(SingularityReport {
        classification,
        splitting_detected,
        witness,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lifting::{lift_curve, Polyline, DEFAULT_TOL_TRACK};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn radii(rs: &[f64]) -> Vec<LogRadius> {
        rs.iter().map(|&r| LogRadius::from_radius(r).unwrap()).collect()
    }

    fn assert_nested(ladder: &ComponentLadder) {
        for node in &ladder.nodes {
            if let Some(p) = node.parent {
                let parent = &ladder.nodes[p].component.cells;
                assert!(node.component.cells.iter().all(|c| parent.binary_search(c).is_ok()));
            }
        }
    }

    #[test]
    fn exp_ladder_is_one_direct_chain() {
        let window = Window::square(20.0, 0.1).unwrap();
        let ladder = component_ladder(&EntireFunction::Exp, c(0.0, 0.0), &radii(&[0.5, 0.1, 0.02]), window).unwrap();
        assert_nested(&ladder);
        let chains = ladder.chains();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].len(), 3);
        for (node, r) in chains[0].iter().zip([0.5f64, 0.1, 0.02]) {
            let comp = &ladder.nodes[*node].component;
            // Oracle: the slab -20 < Re z < ln r, full window height.
            let cols = ((r.ln() + 20.0) / 0.1).round() as usize;
            assert_eq!(comp.cell_count, cols * 400, "r = {r}");
            assert!(comp.a_points.is_empty());
        }
        let report = classify_singularity(&ladder, &chains[0]).unwrap();
        assert_eq!(report.classification, Classification::DirectCandidate);
        assert!(!report.splitting_detected);
    }

    #[test]
    fn exp_direct_chain_holds_a_lifted_ray_tail() {
        let window = Window::square(20.0, 0.1).unwrap();
        let ladder = component_ladder(&EntireFunction::Exp, c(0.0, 0.0), &radii(&[0.5, 0.1, 0.02]), window).unwrap();
        let ray = Polyline::segment(c(1.0, 0.0), c(1e-4, 0.0)).unwrap();
        let lift = lift_curve(&EntireFunction::Exp, &ray, c(0.0, 0.0), 40.0, DEFAULT_TOL_TRACK).unwrap();
        assert!(lift.completed());
        for &node in &ladder.chains()[0] {
            let comp = &ladder.nodes[node].component;
            let r = ladder.radii[ladder.nodes[node].level].radius();
            let tail = lift.path.iter().filter(|p| ray.point_at(p.parameter).norm() < r * 0.9);
            for p in tail {
                let cell = window.cell_of(p.z).unwrap();
                assert!(comp.cells.binary_search(&cell).is_ok());
            }
        }
    }

    #[test]
    fn sinc_ladder_is_indirect() {
        let window = Window::square(20.0, 0.05).unwrap();
        let ladder = component_ladder(&EntireFunction::Sinc, c(0.0, 0.0), &radii(&[0.3, 0.1, 0.03]), window).unwrap();
        assert_nested(&ladder);
        let chains = ladder.chains();
        // one leaf per zero k pi, |k| <= 6
        assert_eq!(chains.len(), 12);
        for chain in chains {
            let report = classify_singularity(&ladder, &chain).unwrap();
            assert_eq!(report.classification, Classification::IndirectCandidate, "{}", report.witness);
        }
    }

    #[test]
    fn lacunary_ladder_splits() {
        let window = Window::square(80.0, 0.25).unwrap();
        let rs: Vec<LogRadius> = [-10.0, -300.0, -1e5].iter().map(|&l| LogRadius::from_log(l).unwrap()).collect();
        let ladder = component_ladder(&EntireFunction::paper_example(), c(0.0, 0.0), &rs, window).unwrap();
        assert_nested(&ladder);
        let counts: Vec<usize> = (0..3).map(|l| ladder.level(l).len()).collect();
        assert_eq!(counts, vec![4, 8, 16]);
        for chain in ladder.chains() {
            let report = classify_singularity(&ladder, &chain).unwrap();
            assert_eq!(report.classification, Classification::DirectCandidate);
            assert!(report.splitting_detected);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let window = Window::square(5.0, 0.1).unwrap();
        assert!(component_ladder(&EntireFunction::Exp, c(0.0, 0.0), &radii(&[0.1, 0.5]), window).is_err());
        let ladder = component_ladder(&EntireFunction::Exp, c(0.0, 0.0), &radii(&[0.5, 0.1]), window).unwrap();
        let chain = &ladder.chains()[0];
        assert!(classify_singularity(&ladder, &chain[1..]).is_err());
        assert!(classify_singularity(&ladder, &chain[..1]).is_err());
    }
}
