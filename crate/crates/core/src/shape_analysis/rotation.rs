//! Signed spherical areas and the rotation angle of closed shape curves.

use crate::error::{Error, Result};
use crate::jet::{cross, dot};

/// Signed area of the geodesic triangle (a, b, c); positive when
/// counterclockwise seen from outside.
pub fn spherical_excess(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let num = dot(a, &cross(b, c));
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// Signed area enclosed by the closed polygon `pts` as seen from `center`.
pub fn signed_area(pts: &[[f64; 3]], center: &[f64; 3]) -> f64 {
    let n = pts.len();
    (0..n).map(|k| spherical_excess(center, &pts[k], &pts[(k + 1) % n])).sum()
}

/// Half the signed area enclosed by a closed curve, fanned from an interior
/// pole. The value is meaningful modulo 2 pi. Fails if the ends are more than 1e-6 apart.
pub fn closed_curve_rotation(pts: &[[f64; 3]]) -> Result<f64> {
    if pts.len() < 3 {
        return Err(Error::InvalidInput("need at least three points".into()));
    }
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let gap = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    if gap > 1e-6 {
        return Err(Error::NotClosed { gap });
    }
    let body = &pts[..pts.len() - 1];
    // interior pole: the mean direction, or the orientation normal for
    // curves balanced about the origin (a great circle)
    let mut c = [0.0; 3];
    for p in body {
        for i in 0..3 {
            c[i] += p[i];
        }
    }
    if dot(&c, &c).sqrt() < 1e-8 * body.len() as f64 {
        c = [0.0; 3];
        for k in 0..body.len() {
            let x = cross(&body[k], &body[(k + 1) % body.len()]);
            for i in 0..3 {
                c[i] += x[i];
            }
        }
    }
    let n = dot(&c, &c).sqrt();
    if !(n > 0.0) {
        return Err(Error::Degenerate("curve encloses no direction".into()));
    }
    let c = c.map(|x| x / n);
    Ok(0.5 * signed_area(body, &c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape_geometry::ShapePoint;
    use std::f64::consts::PI;

    fn circle(phi0: f64, n: usize, eastward: bool) -> Vec<[f64; 3]> {
        (0..=n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                ShapePoint::from_angles(phi0, if eastward { t } else { -t }).0
            })
            .collect()
    }

    #[test]
    fn cap_area() {
        for phi0 in [0.3, 1.0, 2.0] {
            let psi = closed_curve_rotation(&circle(phi0, 100_000, true)).unwrap();
            let want = PI * (1.0 - f64::cos(phi0));
            // enclosed area is only defined modulo the full sphere
            let diff = (psi - want).rem_euclid(2.0 * PI);
            let diff = diff.min(2.0 * PI - diff);
            assert!(diff < 1e-8, "{phi0}: {psi} vs {want}");
        }
    }

    #[test]
    fn equator_and_reversal() {
        let e = circle(PI / 2.0, 1000, true);
        assert!((closed_curve_rotation(&e).unwrap() - PI).abs() < 1e-12);
        let w = circle(1.0, 1000, false);
        let fwd = closed_curve_rotation(&circle(1.0, 1000, true)).unwrap();
        let back = closed_curve_rotation(&w).unwrap();
        assert!((fwd + back).abs() < 1e-12);
    }

    #[test]
    fn open_curve_is_rejected() {
        let mut c = circle(1.0, 100, true);
        c.pop();
        c.pop();
        assert!(matches!(closed_curve_rotation(&c), Err(Error::NotClosed { .. })));
    }
}
