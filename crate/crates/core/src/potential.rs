//! The shape potential, its gradient field and critical points.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::{cross, dot, lift, vsub, Jet, Scalar, V3};
use crate::shape_geometry::{dist, others, Chart, MassDistribution, ShapePoint};

/// Closer than this to a collision point counts as the collision itself.
const COLLISION_EPS: f64 = 1e-14;

/// U* = sum k_i / |p - b_i| for any scalar type.
pub fn u_star<S: Scalar>(p: &V3<S>, md: &MassDistribution) -> S {
    let k = md.k();
    let b = md.b();
    let mut u = S::zero();
    for i in 0..3 {
        let d = vsub(p, &lift(&b[i]));
        u += dot(&d, &d).powf(-0.5) * k[i];
    }
    u
}

/// B = sum k_i b_i / |p - b_i|^3.
pub fn b_field<S: Scalar>(p: &V3<S>, md: &MassDistribution) -> V3<S> {
    let k = md.k();
    let b = md.b();
    let mut out = [S::zero(); 3];
    for i in 0..3 {
        let d = vsub(p, &lift(&b[i]));
        let w = dot(&d, &d).powf(-1.5) * k[i];
        for c in 0..3 {
            out[c] += w * b[i][c];
        }
    }
    out
}

/// Tangential gradient B - (B.p) p for any scalar type.
pub fn gradient<S: Scalar>(p: &V3<S>, md: &MassDistribution) -> V3<S> {
    let bv = b_field(p, md);
    let bp = dot(&bv, p);
    [bv[0] - bp * p[0], bv[1] - bp * p[1], bv[2] - bp * p[2]]
}

fn check_regular(p: &ShapePoint, md: &MassDistribution) -> Result<()> {
    for (i, b) in md.b().iter().enumerate() {
        if dist(&p.0, b) < COLLISION_EPS {
            return Err(Error::Singular(format!("shape point is the collision point b{}", i + 1)));
        }
    }
    Ok(())
}

pub fn shape_potential(p: &ShapePoint, md: &MassDistribution) -> Result<f64> {
    check_regular(p, md)?;
    Ok(u_star(&p.0, md))
}

pub fn shape_gradient(p: &ShapePoint, md: &MassDistribution) -> Result<[f64; 3]> {
    check_regular(p, md)?;
    Ok(gradient(&p.0, md))
}

/// B assembled from the closed-form weights centred at the Lagrange point.
pub fn b_field_about_lagrange(p: &ShapePoint, md: &MassDistribution) -> [f64; 3] {
    let p0 = lagrange_point(md);
    let m = md.masses();
    let mhat = md.mhat_sum();
    let b = md.b();
    let mut out = [0.0; 3];
    for i in 0..3 {
        let ci = md.c(i);
        let xi = dot(&b[i], &vsub(&p.0, &p0));
        let psi = 0.25 * mhat.powf(1.5) * (1.0 - m[i]) * (1.0 - xi / (2.0 * ci)).powf(-1.5);
        for c in 0..3 {
            out[c] += psi * b[i][c];
        }
    }
    out
}

/// Value, first and second partial derivatives of U* in a spherical chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Partials {
    pub u: f64,
    pub u_phi: f64,
    pub u_theta: f64,
    pub u_phiphi: f64,
    pub u_phitheta: f64,
    pub u_thetatheta: f64,
}

pub fn partials(phi: f64, theta: f64, chart: &Chart, md: &MassDistribution) -> Partials {
    let along = |dp: f64, dt: f64| -> Jet<3> {
        let s = Jet::<3>::variable(0.0);
        let p = chart.point(s * dp + phi, s * dt + theta);
        u_star(&p, md)
    };
    let jp = along(1.0, 0.0);
    let jt = along(0.0, 1.0);
    let jm = along(1.0, 1.0);
    let u_phiphi = 2.0 * jp.c[2];
    let u_thetatheta = 2.0 * jt.c[2];
    Partials {
        u: jp.c[0],
        u_phi: jp.c[1],
        u_theta: jt.c[1],
        u_phiphi,
        u_phitheta: jm.c[2] - 0.5 * (u_phiphi + u_thetatheta),
        u_thetatheta,
    }
}

/// Lagrange point on the northern hemisphere.
pub fn lagrange_point(md: &MassDistribution) -> [f64; 3] {
    let b = md.b();
    // p0.b_i = 1 - 2 c_i for i = 1, 2 fixes (x, y)
    let r0 = 1.0 - 2.0 * md.c(0);
    let r1 = 1.0 - 2.0 * md.c(1);
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let x = (r0 * b[1][1] - r1 * b[0][1]) / det;
    let y = (b[0][0] * r1 - b[1][0] * r0) / det;
    let z = (1.0 - x * x - y * y).max(0.0).sqrt();
    [x, y, z]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    LagrangeNorth,
    LagrangeSouth,
    Euler(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub lagrange_north: ShapePoint,
    pub lagrange_south: ShapePoint,
    /// `euler[i]` lies on the equator arc between b_j and b_k.
    pub euler: [ShapePoint; 3],
    pub lagrange_value: f64,
    pub euler_values: [f64; 3],
}

impl CriticalSet {
    pub fn point(&self, kind: CriticalKind) -> ShapePoint {
        match kind {
            CriticalKind::LagrangeNorth => self.lagrange_north,
            CriticalKind::LagrangeSouth => self.lagrange_south,
            CriticalKind::Euler(i) => self.euler[i],
        }
    }

    pub fn value(&self, kind: CriticalKind) -> f64 {
        match kind {
            CriticalKind::LagrangeNorth | CriticalKind::LagrangeSouth => self.lagrange_value,
            CriticalKind::Euler(i) => self.euler_values[i],
        }
    }
}

/// Longitudes of b1, b2, b3 in eastward order.
fn collision_longitudes(md: &MassDistribution) -> [f64; 3] {
    let beta = md.beta();
    [0.0, beta[2], beta[2] + beta[0]]
}

fn equator_slope(theta: f64, md: &MassDistribution) -> f64 {
    let p = [theta.cos(), theta.sin(), 0.0];
    let bv = b_field(&p, md);
    -theta.sin() * bv[0] + theta.cos() * bv[1]
}

pub fn critical_points(md: &MassDistribution) -> Result<CriticalSet> {
    let p0 = lagrange_point(md);
    let north = ShapePoint(p0);
    let lon = collision_longitudes(md);
    let beta = md.beta();
    let mut euler = [ShapePoint::NORTH; 3];
    let mut values = [0.0; 3];
    for i in 0..3 {
        let (j, _) = others(i);
        let start = lon[j];
        let arc = beta[i];
        // U* blows up at both ends, so the slope runs from -inf to +inf
        let (mut a, mut b) = (start + 1e-9 * arc, start + (1.0 - 1e-9) * arc);
        if !(equator_slope(a, md) < 0.0 && equator_slope(b, md) > 0.0) {
            return Err(Error::NoConvergence(format!(
                "Euler point bracket failed on the arc (b{}, b{})",
                j + 1,
                (i + 2) % 3 + 1
            )));
        }
        let mut iters = 0;
        while b - a > 1e-15 * PI && iters < 200 {
            let m = 0.5 * (a + b);
            if equator_slope(m, md) < 0.0 {
                a = m;
            } else {
                b = m;
            }
            iters += 1;
        }
        let th = 0.5 * (a + b);
        euler[i] = ShapePoint([th.cos(), th.sin(), 0.0]);
        values[i] = u_star(&euler[i].0, md);
    }
    Ok(CriticalSet {
        lagrange_north: north,
        lagrange_south: north.mirror(),
        euler,
        lagrange_value: u_star(&p0, md),
        euler_values: values,
    })
}

/// Hill boundary radius where h + U*/rho = 0.
pub fn hill_radius(p: &ShapePoint, h: f64, md: &MassDistribution) -> Result<f64> {
    if h >= 0.0 {
        return Err(Error::UnboundedRegion { h });
    }
    Ok(shape_potential(p, md)? / -h)
}

/// Coaxial-circle frame (T, T') with T pointing away from p0 along the
/// circles through p0 and its mirror.
pub fn southward_frame(p: &ShapePoint, md: &MassDistribution) -> Result<([f64; 3], [f64; 3])> {
    let p0 = lagrange_point(md);
    let p1 = ShapePoint(p0).mirror().0;
    if dist(&p.0, &p0) < 1e-12 || dist(&p.0, &p1) < 1e-12 {
        return Err(Error::UndefinedFrame("frame is singular at the Lagrange points".into()));
    }
    let t = cross(&p.0, &cross(&vsub(&p.0, &p0), &vsub(&p.0, &p1)));
    let t2 = cross(&p.0, &t);
    Ok((t, t2))
}

/// Covariant Hessian of U* at a critical point, in an orthonormal tangent
/// basis (e1, e2) of a chart centred there.
pub fn hessian_at(p: &ShapePoint, md: &MassDistribution) -> ([[f64; 2]; 2], [[f64; 3]; 2]) {
    let ch = Chart::centered_on(&p.0);
    let pa = partials(PI / 2.0, 0.0, &ch, md);
    let (e1, e2) = ch.basis(PI / 2.0, 0.0);
    (
        [[pa.u_phiphi, pa.u_phitheta], [pa.u_phitheta, pa.u_thetatheta]],
        [e1, e2],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape_geometry::{mutual_distances, TriangleState};
    use approx::assert_relative_eq;

    fn direct_potential(tri: &TriangleState, md: &MassDistribution) -> f64 {
        let m = md.masses();
        let r = tri.distances();
        m[0] * m[1] / r[0] + m[1] * m[2] / r[1] + m[2] * m[0] / r[2]
    }

    #[test]
    fn equal_mass_values() {
        let md = MassDistribution::equal();
        let u = shape_potential(&ShapePoint::NORTH, &md).unwrap();
        assert_relative_eq!(u, 3f64.sqrt() / 9.0, epsilon = 1e-15);
        let cs = critical_points(&md).unwrap();
        for v in cs.euler_values {
            assert_relative_eq!(v, 5.0 * 6f64.sqrt() / 54.0, epsilon = 1e-13);
        }
        // collinear oracle: bodies at -d, 0, d with d = sqrt(3/2)
        let d = 1.5f64.sqrt();
        let tri = TriangleState { pos: [[-d, 0.0], [0.0, 0.0], [d, 0.0]], vel: [[0.0; 2]; 3] };
        assert_relative_eq!(tri.inertia(&md), 1.0, epsilon = 1e-14);
        assert_relative_eq!(direct_potential(&tri, &md), 5.0 * 6f64.sqrt() / 54.0, epsilon = 1e-14);
    }

    #[test]
    fn potential_is_sum_over_distances() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let p = ShapePoint::from_angles(1.2, 2.2);
        let s = mutual_distances(&p, 1.0, &md);
        let m = md.masses();
        let want = m[0] * m[1] / s[0] + m[1] * m[2] / s[1] + m[2] * m[0] / s[2];
        assert_relative_eq!(shape_potential(&p, &md).unwrap(), want, epsilon = 1e-14);
    }

    #[test]
    fn collision_is_singular() {
        let md = MassDistribution::equal();
        assert!(shape_potential(&ShapePoint(md.b()[1]), &md).is_err());
        assert!(shape_gradient(&ShapePoint(md.b()[0]), &md).is_err());
    }

    #[test]
    fn critical_points_have_zero_gradient() {
        for md in [MassDistribution::equal(), MassDistribution::new(0.5, 0.3, 0.2).unwrap()] {
            let cs = critical_points(&md).unwrap();
            let mut pts = vec![cs.lagrange_north, cs.lagrange_south];
            pts.extend(cs.euler);
            for p in pts {
                let g = shape_gradient(&p, &md).unwrap();
                assert!(dot(&g, &g).sqrt() < 1e-9, "{p:?} {g:?}");
            }
            for v in cs.euler_values {
                assert!(v > cs.lagrange_value);
            }
        }
    }

    #[test]
    fn equal_mass_euler_points_are_antipodes() {
        let md = MassDistribution::equal();
        let cs = critical_points(&md).unwrap();
        for i in 0..3 {
            let b = md.b()[i];
            let e = cs.euler[i].0;
            assert!((e[0] + b[0]).abs() < 1e-12 && (e[1] + b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn partials_match_gradient() {
        let md = MassDistribution::new(0.2, 0.5, 0.3).unwrap();
        let (phi, theta) = (0.9, 1.3);
        let ch = Chart::identity();
        let pa = partials(phi, theta, &ch, &md);
        let g = gradient(&ch.point(phi, theta), &md);
        let (ep, et) = ch.basis(phi, theta);
        assert_relative_eq!(pa.u_phi, dot(&g, &ep), epsilon = 1e-13);
        assert_relative_eq!(pa.u_theta, dot(&g, &et), epsilon = 1e-13);
        let h = 1e-4;
        let fd = |a: f64, b: f64| partials(a, b, &ch, &md).u;
        let fpp = (fd(phi + h, theta) - 2.0 * fd(phi, theta) + fd(phi - h, theta)) / (h * h);
        let fpt = (fd(phi + h, theta + h) - fd(phi + h, theta - h) - fd(phi - h, theta + h)
            + fd(phi - h, theta - h))
            / (4.0 * h * h);
        assert_relative_eq!(pa.u_phiphi, fpp, max_relative = 1e-5);
        assert_relative_eq!(pa.u_phitheta, fpt, max_relative = 1e-5);
    }

    #[test]
    fn hill_radius_cases() {
        let md = MassDistribution::equal();
        let r = hill_radius(&ShapePoint::NORTH, -1.0, &md).unwrap();
        assert_relative_eq!(r, 3f64.sqrt() / 9.0, epsilon = 1e-15);
        assert_relative_eq!(hill_radius(&ShapePoint::NORTH, -2.0, &md).unwrap(), r / 2.0);
        assert!(matches!(hill_radius(&ShapePoint::NORTH, 0.0, &md), Err(Error::UnboundedRegion { .. })));
    }

    #[test]
    fn southward_frame_equal_masses() {
        let md = MassDistribution::equal();
        let (phi, theta) = (0.8, 2.5);
        let p = ShapePoint::from_angles(phi, theta);
        let (t, t2) = southward_frame(&p, &md).unwrap();
        let (ep, et) = Chart::identity().basis(phi, theta);
        let n = dot(&t, &t).sqrt();
        assert_relative_eq!(dot(&t, &ep), n * dot(&ep, &ep).sqrt(), max_relative = 1e-12);
        let n2 = dot(&t2, &t2).sqrt();
        assert_relative_eq!(dot(&t2, &et), n2 * dot(&et, &et).sqrt(), max_relative = 1e-12);
        assert!(southward_frame(&ShapePoint::NORTH, &md).is_err());
    }
}
