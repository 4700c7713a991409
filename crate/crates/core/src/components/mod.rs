//! Grid-sampled components of preimages of discs.

mod contour;
mod ladder;
mod sublevel;
mod unionfind;
mod window;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fnmodel::EntireFunction;

pub use contour::{boundary_cycles, count_cell_contours};
pub use ladder::{
    classify_singularity, component_ladder, Classification, ComponentLadder, LadderNode,
    SingularityReport, WitnessStep,
};
pub use sublevel::{
    find_a_points, sublevel_components, LogRadius, SublevelComponent, A_POINT_MERGE, A_POINT_TOL,
    MIN_COMPONENT_CELLS,
};
pub use window::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// At least two components were seen in the window.
    Disconnected,
    /// One component or none; the window may simply be too small.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisconnectednessReport {
    pub component_count: usize,
    pub verdict: Verdict,
    pub components: Vec<SublevelComponent>,
}

/// Count components of `f^{-1}(D)` for a disc `D` avoiding the value `a`.
///
/// When `f` omits `a` the preimage of such a disc is never connected; a
/// window that shows a single piece is reported as inconclusive.
pub fn disconnectedness_check(
    func: &EntireFunction,
    a: Complex64,
    disc_center: Complex64,
    disc_radius: f64,
    window: Window,
) -> Result<DisconnectednessReport> {
    if !((disc_center - a).norm() > disc_radius) {
        return Err(Error::Precondition(format!(
            "disc B({disc_center}, {disc_radius}) contains the omitted value {a}"
        )));
    }
    let components = sublevel_components(func, disc_center, LogRadius::from_radius(disc_radius)?, window)?;
    let component_count = components.len();
    Ok(DisconnectednessReport {
        component_count,
        verdict: if component_count >= 2 {
            Verdict::Disconnected
        } else {
            Verdict::Inconclusive
        },
        components,
    })
}
