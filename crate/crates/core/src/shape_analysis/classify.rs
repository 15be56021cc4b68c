//! Regular and irregular points of a shape curve.

use serde::{Deserialize, Serialize};

use super::frame::CurveFrame;
use crate::shape_geometry::{dist, MassDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    /// 0 < S < inf; `order` counts vanishing curvature coefficients.
    Regular { order: usize },
    /// Zero speed with non-zero gradient.
    Cusp { order: usize },
    BinaryCollision { body_pair: (usize, usize) },
    TripleCollision,
    Escape,
    /// The limits cannot be decided at the sampling resolution.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    /// Chordal distance to a collision point.
    pub collision_distance: f64,
    /// Speed below which the curve is considered stopped.
    pub speed: f64,
    /// Gradient norm below which the point is considered critical.
    pub gradient: f64,
    pub rho_small: f64,
    pub rho_large: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        ClassifyThresholds { collision_distance: 1e-3, speed: 1e-6, gradient: 1e-6, rho_small: 1e-3, rho_large: 1e3 }
    }
}

/// `neighborhood` are frames near `frame` (in time order) used to read trends.
pub fn classify_point(
    frame: &CurveFrame,
    neighborhood: &[CurveFrame],
    md: &MassDistribution,
    th: &ClassifyThresholds,
) -> PointClass {
    for (k, b) in md.b().iter().enumerate() {
        if dist(&frame.p, b) < th.collision_distance {
            // b_k marks the collision of the other two bodies
            let pair = match k {
                0 => (2, 3),
                1 => (3, 1),
                _ => (1, 2),
            };
            return PointClass::BinaryCollision { body_pair: pair };
        }
    }
    let rho_trend = |small: bool| -> bool {
        let rs: Vec<f64> = neighborhood.iter().filter_map(|f| f.rho).collect();
        match frame.rho {
            Some(r) if small => r < th.rho_small && rs.iter().all(|&x| x >= r * (1.0 - 1e-12)),
            Some(r) => r > th.rho_large && rs.iter().all(|&x| x <= r * (1.0 + 1e-12)),
            None => false,
        }
    };
    if frame.grad_norm < th.gradient && rho_trend(true) {
        return PointClass::TripleCollision;
    }
    if frame.v < th.speed {
        if rho_trend(false) {
            return PointClass::Escape;
        }
        if frame.grad_norm >= th.gradient {
            let order = neighborhood
                .iter()
                .filter_map(|f| f.geometry)
                .map(|g| g.siegel_order)
                .min()
                .unwrap_or(0);
            return PointClass::Cusp { order };
        }
        return PointClass::Inconclusive;
    }
    if rho_trend(false) {
        return PointClass::Escape;
    }
    match frame.geometry {
        Some(g) if g.siegel > 0.0 && g.siegel.is_finite() => PointClass::Regular { order: g.siegel_order },
        _ => PointClass::Inconclusive,
    }
}
