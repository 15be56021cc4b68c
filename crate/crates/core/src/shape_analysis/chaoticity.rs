//! Grid-coverage estimate of how much of the sphere a shape curve fills.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::sampling::ShapeCurve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chaoticity {
    /// Visited cells over all cells.
    pub fraction: f64,
    pub cells_visited: usize,
    /// Bands in cos(phi); the grid has `resolution` x 2`resolution` cells.
    pub resolution: usize,
}

fn cell(p: &[f64; 3], n: usize) -> (usize, usize) {
    let z = p[2].clamp(-1.0, 1.0);
    let band = (((1.0 - z) / 2.0 * n as f64) as usize).min(n - 1);
    let th = p[1].atan2(p[0]).rem_euclid(2.0 * PI);
    let sector = ((th / (2.0 * PI) * (2 * n) as f64) as usize).min(2 * n - 1);
    (band, sector)
}

/// Fraction of equal-area cells visited by `points`. Cells are equal bands in
/// z crossed with equal sectors in longitude.
pub fn chaoticity(points: &[[f64; 3]], resolution: usize) -> Chaoticity {
    let n = resolution.max(1);
    let visited: BTreeSet<(usize, usize)> = points.iter().map(|p| cell(p, n)).collect();
    Chaoticity {
        fraction: visited.len() as f64 / (2 * n * n) as f64,
        cells_visited: visited.len(),
        resolution: n,
    }
}

/// Points along `curve` with chordal spacing at most about `max_step`, so
/// that consecutive points never skip a cell larger than the step.
pub fn densify<C: ShapeCurve + ?Sized>(curve: &C, max_step: f64) -> Vec<[f64; 3]> {
    let knots = curve.knots();
    let mut out = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa, pb) = (curve.point(a), curve.point(b));
        let chord = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2) + (pa[2] - pb[2]).powi(2)).sqrt();
        let speed = {
            let v = curve.velocity(a);
            (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() * (b - a)
        };
        let m = ((chord.max(speed) / max_step).ceil() as usize).max(1);
        for k in 0..m {
            out.push(curve.point(a + (b - a) * k as f64 / m as f64));
        }
    }
    if let Some(&t) = knots.last() {
        out.push(curve.point(t));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape_analysis::FnCurve;
    use crate::shape_geometry::ShapePoint;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_point_vanishes_with_resolution() {
        let p = [ShapePoint::from_angles(1.0, 2.0).0];
        let mut last = 1.0;
        for n in [4, 16, 64] {
            let c = chaoticity(&p, n);
            assert_eq!(c.cells_visited, 1);
            assert!(c.fraction < last);
            last = c.fraction;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn closed_curve_vanishes_and_random_fills() {
        let curve = FnCurve {
            range: (0.0, 2.0 * PI),
            n_knots: 200,
            point: |t: f64| ShapePoint::from_angles(1.2 + 0.3 * (3.0 * t).sin(), t).0,
            velocity: |t: f64| {
                let (phi, dphi) = (1.2 + 0.3 * (3.0 * t).sin(), 0.9 * (3.0 * t).cos());
                [
                    dphi * phi.cos() * t.cos() - phi.sin() * t.sin(),
                    dphi * phi.cos() * t.sin() + phi.sin() * t.cos(),
                    -dphi * phi.sin(),
                ]
            },
        };
        let pts = densify(&curve, 1e-3);
        let f: Vec<f64> = [8, 32, 128].iter().map(|&n| chaoticity(&pts, n).fraction).collect();
        assert!(f[0] > f[1] && f[1] > f[2] && f[2] < 0.05, "{f:?}");

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cloud: Vec<[f64; 3]> = (0..200_000)
            .map(|_| {
                let z: f64 = rng.random_range(-1.0..1.0);
                let th: f64 = rng.random_range(0.0..2.0 * PI);
                let r = (1.0 - z * z).sqrt();
                [r * th.cos(), r * th.sin(), z]
            })
            .collect();
        assert!(chaoticity(&cloud, 32).fraction > 0.99);
    }
}
