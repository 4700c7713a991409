use std::collections::{BTreeMap, BTreeSet};

use super::sublevel::SublevelComponent;
use super::Window;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dir {
    East,
    North,
    West,
    South,
}

impl Dir {
    fn left(self) -> Dir {
        match self {
            Dir::East => Dir::North,
            Dir::North => Dir::West,
            Dir::West => Dir::South,
            Dir::South => Dir::East,
        }
    }

    fn offset(self) -> (i64, i64) {
        match self {
            Dir::East => (1, 0),
            Dir::North => (0, 1),
            Dir::West => (-1, 0),
            Dir::South => (0, -1),
        }
    }
}

type Vertex = (i64, i64);

/// Number of closed contours bounding a union of grid cells.
///
/// Cell edges between a member and a non-member are oriented with the member
/// on the left and chained into loops. Where two members touch only at a
/// corner the trace turns left, keeping them apart as 4-connectivity does.
pub fn count_cell_contours(cells: &BTreeSet<(i64, i64)>) -> usize {
    let member = |c: i64, r: i64| cells.contains(&(c, r));
    let mut outgoing: BTreeMap<Vertex, Vec<Dir>> = BTreeMap::new();
    for &(c, r) in cells {
        let mut add = |v: Vertex, d: Dir| outgoing.entry(v).or_default().push(d);
        if !member(c, r - 1) {
            add((c, r), Dir::East);
        }
        if !member(c + 1, r) {
            add((c + 1, r), Dir::North);
        }
        if !member(c, r + 1) {
            add((c + 1, r + 1), Dir::West);
        }
        if !member(c - 1, r) {
            add((c, r + 1), Dir::South);
        }
    }
    let mut visited: BTreeSet<(Vertex, Dir)> = BTreeSet::new();
    let mut loops = 0;
    let starts: Vec<(Vertex, Dir)> = outgoing
        .iter()
        .flat_map(|(&v, ds)| ds.iter().map(move |&d| (v, d)))
        .collect();
    for start in starts {
        if visited.contains(&start) {
            continue;
        }
        loops += 1;
        let mut edge = start;
        while visited.insert(edge) {
            let (v, d) = edge;
            let (dx, dy) = d.offset();
            let next = (v.0 + dx, v.1 + dy);
            let options = &outgoing[&next];
            let turn = if options.len() == 1 {
                options[0]
            } else {
                *options
                    .iter()
                    .find(|&&o| o == d.left())
                    .expect("saddle vertices offer a left turn")
            };
            edge = (next, turn);
        }
    }
    loops
}

/// Closed boundary contours of a component; 1 means its boundary is connected.
pub fn boundary_cycles(component: &SublevelComponent, window: &Window) -> Result<usize> {
    if component.touches_window_boundary {
        return Err(Error::TouchesBoundary { id: component.id });
    }
    let cols = window.columns();
    let cells: BTreeSet<(i64, i64)> = component
        .cells
        .iter()
        .map(|&i| ((i % cols) as i64, (i / cols) as i64))
        .collect();
    Ok(count_cell_contours(&cells))
}
