//! Intrinsic frame of a sampled shape curve: speed, geodesic curvature,
//! tangential and normal derivatives of U*, and the Siegel function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{cross, dot, Jet, V3};
use crate::potential::{gradient, partials};
use crate::shape_geometry::{Chart, MassDistribution};

/// How the derivatives of a sample were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivativeSource {
    /// Taylor jet of the governing equations at the stored state.
    FlowJet,
    /// Central differences of the continuous output.
    FiniteDifference,
    /// Supplied analytically by the caller.
    Analytic,
}

/// One point of a shape curve with the Taylor coefficients of p(t) in world
/// coordinates (`coeffs[k]` is the k-th derivative over k!).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub coeffs: Vec<[f64; 3]>,
    pub source: DerivativeSource,
    /// Hyper-radius of the generating motion when known.
    pub rho: Option<f64>,
}

pub(crate) const JET_ORDER: usize = 8;

impl CurveSample {
    /// From (phi, theta) and their first three time derivatives in `chart`.
    pub fn from_angles(t: f64, phi: [f64; 4], theta: [f64; 4], chart: &Chart) -> Self {
        let pj = Jet::<4>::from_coeffs([phi[0], phi[1], phi[2] / 2.0, phi[3] / 6.0]);
        let tj = Jet::<4>::from_coeffs([theta[0], theta[1], theta[2] / 2.0, theta[3] / 6.0]);
        let x = chart.point(pj, tj);
        let coeffs = (0..4).map(|k| [x[0].c[k], x[1].c[k], x[2].c[k]]).collect();
        CurveSample { t, coeffs, source: DerivativeSource::Analytic, rho: None }
    }

    /// From a world-coordinate jet.
    pub fn from_jet<const N: usize>(t: f64, x: &V3<Jet<N>>, source: DerivativeSource, rho: Option<f64>) -> Self {
        let coeffs = (0..N).map(|k| [x[0].c[k], x[1].c[k], x[2].c[k]]).collect();
        CurveSample { t, coeffs, source, rho }
    }

    /// Fourth-order central differences of a point function around `t`.
    pub fn from_point_fn<F: Fn(f64) -> [f64; 3]>(t: f64, f: F, step: f64, rho: Option<f64>) -> Self {
        let h = step;
        let y: Vec<[f64; 3]> = (-3..=3).map(|k| f(t + k as f64 * h)).collect();
        let c = |i: usize| -> [f64; 4] {
            let v = |k: i32| y[(k + 3) as usize][i];
            let d1 = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * h);
            let d2 = (-v(-2) + 16.0 * v(-1) - 30.0 * v(0) + 16.0 * v(1) - v(2)) / (12.0 * h * h);
            let d3 = (v(-3) - 8.0 * v(-2) + 13.0 * v(-1) - 13.0 * v(1) + 8.0 * v(2) - v(3)) / (8.0 * h * h * h);
            [v(0), d1, d2 / 2.0, d3 / 6.0]
        };
        let cs = [c(0), c(1), c(2)];
        let coeffs = (0..4).map(|k| [cs[0][k], cs[1][k], cs[2][k]]).collect();
        CurveSample { t, coeffs, source: DerivativeSource::FiniteDifference, rho }
    }

    pub fn point(&self) -> [f64; 3] {
        self.coeffs[0]
    }

    pub fn velocity(&self) -> [f64; 3] {
        self.coeffs[1]
    }

    pub(crate) fn jet<const N: usize>(&self) -> V3<Jet<N>> {
        std::array::from_fn(|i| {
            let mut c = [0.0; N];
            for (k, v) in self.coeffs.iter().take(N).enumerate() {
                c[k] = v[i];
            }
            Jet::from_coeffs(c)
        })
    }
}

/// Everything defined where the speed is positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameGeometry {
    pub tau: [f64; 3],
    pub nu: [f64; 3],
    pub kstar: f64,
    /// Derivatives marked `_prime` are with respect to arc length.
    pub kstar_prime: f64,
    pub u: f64,
    pub u_tau: f64,
    pub u_nu: f64,
    pub u_nu_prime: f64,
    pub siegel: f64,
    pub siegel_prime: f64,
    /// Number of vanishing curvature coefficients before the Siegel value
    /// was read off (0 at generic points).
    pub siegel_order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveFrame {
    pub t: f64,
    pub p: [f64; 3],
    pub v: f64,
    pub vdot: f64,
    pub grad_norm: f64,
    /// `None` at cusps (zero speed).
    pub geometry: Option<FrameGeometry>,
    pub source: DerivativeSource,
    pub rho: Option<f64>,
}

impl CurveFrame {
    pub fn is_cusp(&self) -> bool {
        self.geometry.is_none()
    }
}

/// Below this speed the sample counts as a cusp.
pub const CUSP_SPEED: f64 = 1e-13;
/// Threshold for vanishing curvature coefficients.
pub const ORDER_THRESHOLD: f64 = 1e-8;

fn frame_of(s: &CurveSample, md: &MassDistribution) -> CurveFrame {
    let p0 = s.point();
    let chart = Chart::centered_on(&p0);
    let x = s.jet::<4>();
    let r = chart.rot.transpose();
    let l: V3<Jet<4>> = std::array::from_fn(|i| x[0] * r[(i, 0)] + x[1] * r[(i, 1)] + x[2] * r[(i, 2)]);
    let pj = l[2].acos();
    let tj = l[1].atan2(l[0]);
    let (phi, theta) = (pj.c[0], tj.c[0]);
    let (pd, td) = (pj.differentiate(), tj.differentiate());
    let (sp, cp) = (phi.sin(), phi.cos());
    let vj = (pd * pd + pj.sin() * pj.sin() * td * td).sqrt();
    let g = gradient(&p0, md);
    let grad_norm = dot(&g, &g).sqrt();
    let v = vj.c[0];
    let vdot = if v > CUSP_SPEED { vj.c[1] } else { 0.0 };
    let mut frame = CurveFrame { t: s.t, p: p0, v, vdot, grad_norm, geometry: None, source: s.source, rho: s.rho };
    if !(v > CUSP_SPEED) {
        return frame;
    }
    let vdd = 2.0 * vj.c[2];
    let d = |j: &Jet<4>| [j.c[1], 2.0 * j.c[2], 6.0 * j.c[3]];
    let [p1, p2, p3] = d(&pj);
    let [t1, t2, t3] = d(&tj);
    // arc-length derivatives
    let a1 = p1 / v;
    let b1 = t1 / v;
    let a2 = (p2 - vdot * a1) / (v * v);
    let b2 = (t2 - vdot * b1) / (v * v);
    let a3 = (p3 - 3.0 * v * vdot * a2 - vdd * a1) / (v * v * v);
    let b3 = (t3 - 3.0 * v * vdot * b2 - vdd * b1) / (v * v * v);
    let k = sp * (a1 * b2 - b1 * a2) + cp * b1 * (1.0 + a1 * a1);
    let k1 = -sp * a1 * b1 * (1.0 + a1 * a1)
        + cp * b2 * (1.0 + a1 * a1)
        + cp * a1 * (a1 * b2 + b1 * a2)
        + sp * (a1 * b3 - b1 * a3);
    let pa = partials(phi, theta, &chart, md);
    let u_tau = pa.u_phi * a1 + pa.u_theta * b1;
    let u_nu = -sp * b1 * pa.u_phi + a1 / sp * pa.u_theta;
    let u_nu1 = (pa.u_phitheta / sp - cp * pa.u_theta / (sp * sp)) * a1 * a1
        - sp * pa.u_phitheta * b1 * b1
        + (-cp * pa.u_phi - sp * pa.u_phiphi + pa.u_thetatheta / sp) * a1 * b1
        + pa.u_theta / sp * a2
        - sp * pa.u_phi * b2;
    let (ep, et) = chart.basis(phi, theta);
    let tau: [f64; 3] = std::array::from_fn(|i| ep[i] * a1 + et[i] * b1);
    let nu = cross(&p0, &tau);
    let (mut siegel, mut siegel_prime, mut order) = (u_nu / k, (u_nu1 * k - u_nu * k1) / (k * k), 0);
    if k.abs() < ORDER_THRESHOLD && u_nu.abs() < ORDER_THRESHOLD * grad_norm.max(1.0) && s.coeffs.len() > 4 {
        if let Ok((s0, s1, ord)) = siegel_limit(s, md) {
            siegel = s0;
            siegel_prime = s1;
            order = ord;
        }
    }
    frame.geometry = Some(FrameGeometry {
        tau,
        nu,
        kstar: k,
        kstar_prime: k1,
        u: pa.u,
        u_tau,
        u_nu,
        u_nu_prime: u_nu1,
        siegel,
        siegel_prime,
        siegel_order: order,
    });
    frame
}

/// Curvature and normal derivative of U* as jets in time.
pub(crate) fn curvature_jets<const N: usize>(s: &CurveSample, md: &MassDistribution) -> (Jet<N>, Jet<N>, Jet<N>) {
    let x = s.jet::<N>();
    let xd: V3<Jet<N>> = x.map(|c| c.differentiate());
    let xdd: V3<Jet<N>> = xd.map(|c| c.differentiate());
    let v = dot(&xd, &xd).sqrt();
    let k = dot(&cross(&x, &xd), &xdd) / (v * v * v);
    let tau = xd.map(|c| c / v);
    let nu = cross(&x, &tau);
    let u_nu = dot(&gradient(&x, md), &nu);
    (k, u_nu, v)
}

/// Siegel value and its arc-length derivative at a point where both the
/// curvature and the normal derivative vanish, from the first
/// non-vanishing Taylor coefficients.
pub fn siegel_limit(s: &CurveSample, md: &MassDistribution) -> Result<(f64, f64, usize)> {
    let (k, u_nu, v) = curvature_jets::<JET_ORDER>(s, md);
    // K needs two derivatives, its next coefficient one more
    let usable = s.coeffs.len().min(JET_ORDER).saturating_sub(3);
    let scale = k.c[..usable].iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    for ord in 0..usable {
        if k.c[ord].abs() > ORDER_THRESHOLD * scale {
            let s0 = u_nu.c[ord] / k.c[ord];
            let s1 = if ord + 1 < usable {
                (u_nu.c[ord + 1] * k.c[ord] - u_nu.c[ord] * k.c[ord + 1]) / (k.c[ord] * k.c[ord]) / v.c[0]
            } else {
                f64::NAN
            };
            return Ok((s0, s1, ord));
        }
    }
    Err(Error::IrregularPoint("curvature vanishes to all available orders".into()))
}

/// Frame at `samples[index]`.
pub fn curve_frame(samples: &[CurveSample], md: &MassDistribution, index: usize) -> Result<CurveFrame> {
    let s = samples
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("sample index {index} out of range")))?;
    if s.coeffs.len() < 4 {
        return Err(Error::InvalidInput("samples need derivatives through order 3".into()));
    }
    Ok(frame_of(s, md))
}

pub fn curve_frames(samples: &[CurveSample], md: &MassDistribution) -> Vec<CurveFrame> {
    samples.iter().map(|s| frame_of(s, md)).collect()
}

/// rho = (4 S / v^2)^(1/3) from shape data alone.
pub fn reconstruct_rho(frame: &CurveFrame) -> Result<f64> {
    let g = frame
        .geometry
        .ok_or_else(|| Error::IrregularPoint("cusp: zero speed".into()))?;
    if !(g.siegel > 0.0 && g.siegel.is_finite()) {
        return Err(Error::IrregularPoint(format!("Siegel value {:e}", g.siegel)));
    }
    Ok((4.0 * g.siegel / (frame.v * frame.v)).cbrt())
}

/// J = (2 U_tau - S') / S, which equals rho_dot / (rho v) on genuine motions.
pub fn expansion_ratio(g: &FrameGeometry) -> f64 {
    (2.0 * g.u_tau - g.siegel_prime) / g.siegel
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle_sample(phi0: f64, t: f64, w: f64) -> CurveSample {
        CurveSample::from_angles(
            0.0,
            [phi0, 0.0, 0.0, 0.0],
            [t, w, 0.0, 0.0],
            &Chart::identity(),
        )
    }

    #[test]
    fn latitude_circle_curvature() {
        let md = MassDistribution::equal();
        let phi0 = 0.7;
        let s = circle_sample(phi0, 0.4, 1.0 / phi0.sin());
        let f = curve_frame(&[s], &md, 0).unwrap();
        let g = f.geometry.unwrap();
        assert_relative_eq!(f.v, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.kstar, phi0.cos() / phi0.sin(), epsilon = 1e-12);
        assert!(g.kstar_prime.abs() < 1e-12);
    }

    #[test]
    fn great_circle_is_geodesic() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let s = circle_sample(std::f64::consts::FRAC_PI_2, 1.0, 0.8);
        let g = curve_frame(&[s], &md, 0).unwrap().geometry.unwrap();
        assert!(g.kstar.abs() < 1e-14);
    }

    #[test]
    fn zero_speed_is_cusp() {
        let md = MassDistribution::equal();
        let s = CurveSample::from_angles(0.0, [1.0, 0.0, 0.3, 0.0], [0.5, 0.0, 0.1, 0.0], &Chart::identity());
        let f = curve_frame(&[s], &md, 0).unwrap();
        assert!(f.is_cusp());
        assert!(reconstruct_rho(&f).is_err());
    }

    /// Independent vector formulas: K = (x^x').x''/v^3, derivative via jets.
    #[test]
    fn spherical_formulas_match_vector_formulas() {
        let md = MassDistribution::new(0.45, 0.2, 0.35).unwrap();
        let ch = Chart::identity();
        let s = CurveSample::from_angles(0.0, [1.1, 0.3, -0.4, 0.7], [0.8, -0.5, 0.2, -0.3], &ch);
        let g = curve_frame(&[s.clone()], &md, 0).unwrap().geometry.unwrap();
        let (k, u_nu, v) = curvature_jets::<4>(&s, &md);
        assert_relative_eq!(g.kstar, k.c[0], max_relative = 1e-12);
        assert_relative_eq!(g.kstar_prime, k.c[1] / v.c[0], max_relative = 1e-11);
        assert_relative_eq!(g.u_nu, u_nu.c[0], max_relative = 1e-12);
        assert_relative_eq!(g.u_nu_prime, u_nu.c[1] / v.c[0], max_relative = 1e-11);
        let sd = (u_nu.c[1] * k.c[0] - u_nu.c[0] * k.c[1]) / (k.c[0] * k.c[0]) / v.c[0];
        assert_relative_eq!(g.siegel_prime, sd, max_relative = 1e-10);
        // log-derivative identity
        assert_relative_eq!(g.siegel_prime / g.siegel, g.u_nu_prime / g.u_nu - g.kstar_prime / g.kstar, max_relative = 1e-10);
    }

    #[test]
    fn finite_differences_agree_with_analytic() {
        let md = MassDistribution::new(0.45, 0.2, 0.35).unwrap();
        let ch = Chart::identity();
        let phi = |t: f64| 1.1 + 0.3 * t - 0.2 * t * t + 0.1 * t * t * t;
        let theta = |t: f64| 0.8 - 0.5 * t + 0.1 * t * t - 0.05 * t * t * t;
        let exact = CurveSample::from_angles(0.0, [1.1, 0.3, -0.4, 0.6], [0.8, -0.5, 0.2, -0.3], &ch);
        let fd = CurveSample::from_point_fn(0.0, |t| ch.point(phi(t), theta(t)), 1e-3, None);
        let a = curve_frame(&[exact], &md, 0).unwrap().geometry.unwrap();
        let b = curve_frame(&[fd], &md, 0).unwrap().geometry.unwrap();
        assert_relative_eq!(a.siegel, b.siegel, max_relative = 1e-6);
        assert_relative_eq!(a.siegel_prime, b.siegel_prime, max_relative = 1e-4);
    }
}
