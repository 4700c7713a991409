//! Inverse-branch continuation along curves.

mod polyline;
mod probe;
mod sweep;
mod track;
mod winding;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fnmodel::{eval_fn, EntireFunction};

pub use polyline::Polyline;
pub use probe::{good_curve_probe, GoodCurveReport, ProbedSeed};
pub use sweep::{line_sweep, LineFamily, SweepReport};
pub use track::{
    lift_curve, perturbed_lift, LiftPoint, LiftResult, LiftStatus, PerturbedLift,
    CRITICAL_VALUE_RADIUS, DEFAULT_TOL_TRACK, MIN_PARAMETER_STEP,
};
pub use winding::{winding_number, ON_CURVE_TOL};

/// `f(z)` for any catalog function, going through `exp(g)` for the lacunary example.
pub(crate) fn value_at(func: &EntireFunction, z: Complex64) -> Result<Complex64> {
    let overflow = || Error::Overflow { re: z.re, im: z.im };
    let w = match func {
        EntireFunction::PaperExample(s) => s.jet(z)?.value.exp(),
        other => {
            let v = eval_fn(other, z)?;
            if v.overflow {
                return Err(overflow());
            }
            v.value
        }
    };
    if w.re.is_finite() && w.im.is_finite() {
        Ok(w)
    } else {
        Err(overflow())
    }
}
