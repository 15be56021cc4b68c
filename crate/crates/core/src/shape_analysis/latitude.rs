//! Latitude after the Moebius normalization that sends the Lagrange points
//! to the poles and keeps the equator.

use std::f64::consts::FRAC_PI_2;

use crate::jet::{cross, Jet, Scalar, V3};
use crate::potential::lagrange_point;
use crate::shape_geometry::{MassDistribution, ShapePoint};

/// Stereographic image of p0 seen from the south pole.
fn lagrange_disk_point(md: &MassDistribution) -> [f64; 2] {
    let p0 = lagrange_point(md);
    [p0[0] / (1.0 + p0[2]), p0[1] / (1.0 + p0[2])]
}

/// Latitude on the closed northern hemisphere.
fn north_latitude<S: Scalar>(p: &V3<S>, w0: [f64; 2]) -> S {
    let d = p[2] + 1.0;
    let (wr, wi) = (p[0] / d, p[1] / d);
    // (w - w0) / (1 - conj(w0) w)
    let (nr, ni) = (wr - w0[0], wi - w0[1]);
    let dr = -(wr * w0[0] + wi * w0[1]) + 1.0;
    let di = -(wi * w0[0] - wr * w0[1]);
    let f2 = (nr * nr + ni * ni) / (dr * dr + di * di);
    // pi/2 - 2 atan |f|
    S::cst(FRAC_PI_2) - (f2.sqrt()).atan2(S::cst(1.0)) * 2.0
}

pub fn latitude_generic<S: Scalar>(p: &V3<S>, md: &MassDistribution) -> S {
    let w0 = lagrange_disk_point(md);
    if p[2].value() >= 0.0 {
        north_latitude(p, w0)
    } else {
        -north_latitude(&[p[0], p[1], -p[2]], w0)
    }
}

/// m-modified latitude in [-pi/2, pi/2].
pub fn m_latitude(p: &ShapePoint, md: &MassDistribution) -> f64 {
    latitude_generic(&p.0, md)
}

/// Tangential gradient of the latitude.
pub fn latitude_gradient(p: &[f64; 3], md: &MassDistribution) -> [f64; 3] {
    let mut g = [0.0; 3];
    for i in 0..3 {
        let x: V3<Jet<2>> = std::array::from_fn(|k| {
            Jet::from_coeffs([p[k], if k == i { 1.0 } else { 0.0 }])
        });
        // extend homogeneously so only the tangential part survives
        let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let xn = x.map(|c| c / n);
        g[i] = latitude_generic(&xn, md).c[1];
    }
    g
}

/// Unit eastward direction along the latitude circle through p.
pub fn east_direction(p: &[f64; 3], md: &MassDistribution) -> [f64; 3] {
    let e = cross(&latitude_gradient(p, md), p);
    let n = (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]).sqrt();
    e.map(|c| c / n)
}

/// Rate of change of the latitude along a moving point.
pub fn latitude_rate(p: &[f64; 3], pdot: &[f64; 3], md: &MassDistribution) -> f64 {
    let g = latitude_gradient(p, md);
    g[0] * pdot[0] + g[1] * pdot[1] + g[2] * pdot[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn poles_and_equator() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let p0 = ShapePoint(lagrange_point(&md));
        assert_relative_eq!(m_latitude(&p0, &md), FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(m_latitude(&p0.mirror(), &md), -FRAC_PI_2, epsilon = 1e-12);
        for th in [0.0, 1.0, 2.5, 4.0] {
            let e = ShapePoint::from_angles(FRAC_PI_2, th);
            assert!(m_latitude(&e, &md).abs() < 1e-14);
        }
    }

    #[test]
    fn equal_masses_is_ordinary_latitude() {
        let md = MassDistribution::equal();
        for (phi, th) in [(0.3, 1.0), (1.2, 4.0), (2.5, 0.2)] {
            let p = ShapePoint::from_angles(phi, th);
            assert_relative_eq!(m_latitude(&p, &md), FRAC_PI_2 - phi, epsilon = 1e-13);
        }
        let e = east_direction(&ShapePoint::from_angles(1.0, 0.0).0, &md);
        assert!((e[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_differences() {
        let md = MassDistribution::new(0.2, 0.5, 0.3).unwrap();
        let p = ShapePoint::from_angles(1.0, 2.0);
        let g = latitude_gradient(&p.0, &md);
        let (ep, _) = crate::shape_geometry::Chart::identity().basis(1.0, 2.0);
        let h = 1e-6;
        let fd = (m_latitude(&ShapePoint::from_angles(1.0 + h, 2.0), &md)
            - m_latitude(&ShapePoint::from_angles(1.0 - h, 2.0), &md))
            / (2.0 * h);
        assert_relative_eq!(g[0] * ep[0] + g[1] * ep[1] + g[2] * ep[2], fd, max_relative = 1e-7);
    }
}
