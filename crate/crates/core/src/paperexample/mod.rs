//! The lacunary example `f = exp g`: its asymptotic tree, numerical checks of
//! the sign inequalities along the tree, and a picture of it.

mod svg;
mod tree;
mod verify;

pub use svg::{render_svg, SvgStyle};
pub use tree::{
    build_tree, check_epsilon, clip_polyline, clip_segment, level_geometry, DyadicAngle,
    LevelGeometry, SetKind, TreeEdge, TreeGraph, TreeSet, MAX_LEVEL,
};
pub use verify::{
    count_sublevel_arcs, verify_arg_monotonic, verify_inequalities, ArcReport, ArgReport,
    InequalityReport, LevelSummary, SampleRecord, SetCheck, DEGENERATE_NUDGE,
};
