use std::f64::consts::TAU;

use num_complex::Complex64;

use super::Polyline;
use crate::error::{Error, Result};

/// Minimum distance from the point to the curve.
pub const ON_CURVE_TOL: f64 = 1e-9;
const INTEGER_TOL: f64 = 1e-6;

/// Number of turns of `w - a` along a closed polyline.
///
/// Each segment contributes the principal argument of `(w1 - a)/(w0 - a)`,
/// which is exact for straight segments not through `a`.
pub fn winding_number(curve: &Polyline, a: Complex64) -> Result<i64> {
    if !curve.is_closed() {
        return Err(Error::NotClosed);
    }
    let distance = curve.distance_to(a);
    if distance < ON_CURVE_TOL {
        return Err(Error::OnCurve { distance });
    }
    let turns = curve
        .vertices()
        .windows(2)
        .map(|w| ((w[1] - a) / (w[0] - a)).arg())
        .sum::<f64>()
        / TAU;
    let rounded = turns.round();
    if (turns - rounded).abs() > INTEGER_TOL {
        return Err(Error::Precondition(format!(
            "winding sum {turns} is not an integer; curve not closed?"
        )));
    }
    Ok(rounded as i64)
}
