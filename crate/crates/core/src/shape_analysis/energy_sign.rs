//! The sign of the energy read off a shape curve alone.

use serde::{Deserialize, Serialize};

use super::frame::{expansion_ratio, CurveFrame};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySign {
    /// -1, 0 or +1.
    pub sign: i8,
    /// Delta per frame; `None` at irregular frames.
    pub deltas: Vec<Option<f64>>,
}

/// Delta = (S/2)(4 J^2 + 1) - U*, which equals h rho along a motion.
pub fn energy_delta(frame: &CurveFrame) -> Option<f64> {
    let g = frame.geometry?;
    if !(g.siegel > 0.0 && g.siegel.is_finite()) {
        return None;
    }
    let j = expansion_ratio(&g);
    Some(0.5 * g.siegel * (4.0 * j * j + 1.0) - g.u)
}

/// Common sign of Delta. Values within `band` of zero count as zero; a mix of
/// strictly positive and strictly negative values is an error.
pub fn energy_sign(frames: &[CurveFrame], band: f64) -> Result<EnergySign> {
    let deltas: Vec<Option<f64>> = frames.iter().map(energy_delta).collect();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    for d in deltas.iter().flatten() {
        if d.abs() <= band {
            zero += 1;
        } else if *d > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    let sign = match (pos, neg, zero) {
        (0, 0, 0) => return Err(Error::IrregularPoint("no regular frames".into())),
        (0, 0, _) => 0,
        (p, 0, 0) if p > 0 => 1,
        (0, n, 0) if n > 0 => -1,
        _ => {
            return Err(Error::Inconsistent(format!(
                "energy sign changes along the curve ({pos} positive, {neg} negative, {zero} near zero)"
            )))
        }
    };
    Ok(EnergySign { sign, deltas })
}
