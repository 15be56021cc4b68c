//! Extrema of the m-latitude along a shape curve.

use serde::{Deserialize, Serialize};

use super::latitude::{latitude_rate, latitude_generic};
use super::sampling::ShapeCurve;
use crate::shape_geometry::MassDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub t: f64,
    pub lambda: f64,
    pub kind: ExtremumKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// A local maximum of the latitude on the southern hemisphere or equator.
    MaxNotNorth,
    MinNotSouth,
    /// A complete monotone arc that does not cross the equator exactly once.
    EquatorCrossings(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    /// Index into the refined sample grid.
    pub index: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub extrema: Vec<Extremum>,
    pub equator_crossings: Vec<f64>,
    pub violations: Vec<Violation>,
    /// Times where the latitude rate is too flat to decide.
    pub inconclusive: Vec<f64>,
}

/// Sub-steps inserted between consecutive knots.
const REFINE: usize = 4;
const T_TOL: f64 = 1e-10;
const FLAT: f64 = 1e-12;

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= T_TOL {
            break;
        }
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

pub fn monotonicity_report<C: ShapeCurve + ?Sized>(curve: &C, md: &MassDistribution) -> MonotonicityReport {
    let knots = curve.knots();
    let mut ts = Vec::with_capacity(knots.len() * REFINE);
    for w in knots.windows(2) {
        for k in 0..REFINE {
            ts.push(w[0] + (w[1] - w[0]) * k as f64 / REFINE as f64);
        }
    }
    if let Some(&last) = knots.last() {
        ts.push(last);
    }
    let rate = |t: f64| latitude_rate(&curve.point(t), &curve.velocity(t), md);
    let lat = |t: f64| latitude_generic(&curve.point(t), md);
    let rates: Vec<f64> = ts.iter().map(|&t| rate(t)).collect();
    let lats: Vec<f64> = ts.iter().map(|&t| lat(t)).collect();
    let mut rep = MonotonicityReport::default();
    let mut ext_idx = Vec::new();
    for i in 0..ts.len().saturating_sub(1) {
        if rates[i].abs() < FLAT {
            rep.inconclusive.push(ts[i]);
        }
        if (rates[i] > 0.0) != (rates[i + 1] > 0.0) && rates[i] != 0.0 && rates[i + 1] != 0.0 {
            let t = bisect(rate, ts[i], ts[i + 1]);
            let kind = if rates[i] > 0.0 { ExtremumKind::Max } else { ExtremumKind::Min };
            let lambda = lat(t);
            let bad = match kind {
                ExtremumKind::Max => lambda <= 0.0,
                ExtremumKind::Min => lambda >= 0.0,
            };
            if bad {
                rep.violations.push(Violation {
                    t,
                    index: i,
                    kind: if kind == ExtremumKind::Max { ViolationKind::MaxNotNorth } else { ViolationKind::MinNotSouth },
                });
            }
            rep.extrema.push(Extremum { t, lambda, kind });
            ext_idx.push(i);
        }
        if (lats[i] > 0.0) != (lats[i + 1] > 0.0) {
            rep.equator_crossings.push(bisect(lat, ts[i], ts[i + 1]));
        }
    }
    for (w, iw) in rep.extrema.windows(2).zip(ext_idx.windows(2)) {
        let n = rep.equator_crossings.iter().filter(|&&t| t > w[0].t.min(w[1].t) && t < w[0].t.max(w[1].t)).count();
        if n != 1 {
            rep.violations.push(Violation { t: w[1].t, index: iw[1], kind: ViolationKind::EquatorCrossings(n) });
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape_analysis::FnCurve;
    use crate::shape_geometry::Chart;

    #[test]
    fn spiral_in_the_north_is_flagged() {
        let md = MassDistribution::equal();
        let ch = Chart::identity();
        let curve = FnCurve {
            range: (0.0, 12.0),
            n_knots: 200,
            point: |t: f64| ch.point(0.5 + 0.2 * t.sin(), t),
            velocity: |t: f64| {
                let (ep, et) = ch.basis(0.5 + 0.2 * t.sin(), t);
                std::array::from_fn(|i| ep[i] * 0.2 * t.cos() + et[i])
            },
        };
        let rep = monotonicity_report(&curve, &md);
        assert!(rep.extrema.len() >= 3);
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::MinNotSouth));
    }

    #[test]
    fn oscillation_across_equator_is_clean() {
        let md = MassDistribution::equal();
        let ch = Chart::identity();
        let curve = FnCurve {
            range: (0.0, 20.0),
            n_knots: 400,
            point: |t: f64| ch.point(std::f64::consts::FRAC_PI_2 + 0.6 * t.sin(), 0.3 * t),
            velocity: |t: f64| {
                let (ep, et) = ch.basis(std::f64::consts::FRAC_PI_2 + 0.6 * t.sin(), 0.3 * t);
                std::array::from_fn(|i| ep[i] * 0.6 * t.cos() + et[i] * 0.3)
            },
        };
        let rep = monotonicity_report(&curve, &md);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert_eq!(rep.extrema.len(), 6);
        for w in rep.extrema.windows(2) {
            assert_ne!(w[0].kind, w[1].kind);
            assert!((w[0].t - w[1].t).abs() > 3.0);
        }
    }
}
