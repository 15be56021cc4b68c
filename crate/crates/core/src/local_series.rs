//! Local power-series analysis at a point of a shape curve: recovering the
//! size and radial speed of the motion from intrinsic invariants, the series
//! coefficients of the moduli curve, the critical energy and cusp families.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{cross, dot, Jet, V3};
use crate::potential::{gradient, u_star};
use crate::reduced_dynamics::{angle_gradient, moduli_flow_jet, ModuliState};
use crate::shape_analysis::CurveFrame;
use crate::shape_geometry::{Chart, MassDistribution, ShapePoint};

/// Gradient norm below which a point counts as critical.
const CRITICAL_GRADIENT: f64 = 1e-10;
/// Relative tolerance for the zero-energy constraint.
pub const ZERO_ENERGY_TOL: f64 = 1e-6;

/// Intrinsic local data of an oriented shape curve at one point, expressed in
/// a spherical chart centred on the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntrinsicData {
    pub chart: Chart,
    pub phi: f64,
    pub theta: f64,
    /// Unit tangent components: tangent = j_phi d/dphi + j_theta d/dtheta.
    pub j_phi: f64,
    pub j_theta: f64,
    pub siegel0: f64,
    /// Arc-length derivative of the Siegel function.
    pub siegel1: f64,
    pub u0: f64,
    pub mu0: f64,
    pub eta0: f64,
    /// Tangential derivative of U*.
    pub u_tau: f64,
    pub h: f64,
    pub grad_norm: f64,
}

impl IntrinsicData {
    /// Data at `point` moving along the world tangent `direction`.
    pub fn new(
        point: &ShapePoint,
        direction: &[f64; 3],
        siegel0: f64,
        siegel1: f64,
        h: f64,
        md: &MassDistribution,
    ) -> Result<Self> {
        let p = point.0;
        let tan: [f64; 3] = {
            let d = dot(direction, &p);
            std::array::from_fn(|i| direction[i] - d * p[i])
        };
        let n = dot(&tan, &tan).sqrt();
        if !(n > 0.0) {
            return Err(Error::InvalidInput("direction is normal to the sphere".into()));
        }
        let tan = tan.map(|x| x / n);
        let chart = Chart::centered_on(&p);
        let (phi, theta) = chart.angles(&p);
        let (ep, et) = chart.basis(phi, theta);
        let g0 = phi.sin().powi(2);
        let j_phi = dot(&tan, &ep);
        let j_theta = dot(&tan, &et) / g0;
        let (mu0, eta0) = angle_gradient(phi, theta, &chart, md);
        let grad = gradient(&p, md);
        Ok(IntrinsicData {
            chart,
            phi,
            theta,
            j_phi,
            j_theta,
            siegel0,
            siegel1,
            u0: u_star(&p, md),
            mu0,
            eta0,
            u_tau: dot(&grad, &tan),
            h,
            grad_norm: dot(&grad, &grad).sqrt(),
        })
    }

    /// Data read off a regular frame.
    pub fn from_frame(frame: &CurveFrame, h: f64, md: &MassDistribution) -> Result<Self> {
        let g = frame
            .geometry
            .ok_or_else(|| Error::IrregularPoint("cusp: zero speed".into()))?;
        IntrinsicData::new(&ShapePoint(frame.p), &g.tau, g.siegel, g.siegel_prime, h, md)
    }

    /// Unit tangent in world coordinates.
    pub fn tangent(&self) -> [f64; 3] {
        let (ep, et) = self.chart.basis(self.phi, self.theta);
        std::array::from_fn(|i| ep[i] * self.j_phi + et[i] * self.j_theta)
    }

    /// J8 = (2 U_tau - S1) / S0.
    pub fn expansion_ratio(&self) -> f64 {
        (2.0 * self.u_tau - self.siegel1) / self.siegel0
    }

    /// |j_phi^2 + sin^2(phi) j_theta^2 - 1|.
    pub fn direction_defect(&self) -> f64 {
        (self.j_phi.powi(2) + self.phi.sin().powi(2) * self.j_theta.powi(2) - 1.0).abs()
    }

    fn check(&self) -> Result<()> {
        if self.grad_norm < CRITICAL_GRADIENT {
            return Err(Error::IrregularPoint("critical point of U*: exceptional curve".into()));
        }
        if !(self.siegel0 > 0.0 && self.siegel0.is_finite()) {
            return Err(Error::IrregularPoint(format!("Siegel value {:e}", self.siegel0)));
        }
        if self.direction_defect() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "direction not normalized (defect {:e})",
                self.direction_defect()
            )));
        }
        Ok(())
    }
}

/// Size, spherical speed and radial speed at the point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub rho0: f64,
    pub v0: f64,
    pub rho1: f64,
}

impl Lift {
    fn with_size(d: &IntrinsicData, rho0: f64) -> Self {
        Lift {
            rho0,
            v0: 2.0 * d.siegel0.sqrt() / rho0.powf(1.5),
            rho1: 2.0 * d.expansion_ratio() * (d.siegel0 / rho0).sqrt(),
        }
    }

    /// Moduli initial state realizing this lift.
    pub fn to_moduli(&self, d: &IntrinsicData) -> ModuliState {
        ModuliState {
            rho: self.rho0,
            phi: d.phi,
            theta: d.theta,
            rho1: self.rho1,
            phi1: d.j_phi * self.v0,
            theta1: d.j_theta * self.v0,
            h: d.h,
            chart: d.chart,
        }
    }
}

/// Result of the recovery: unique for h != 0, a one-parameter family in the
/// size for h = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recovery {
    Unique(Lift),
    Family { data: IntrinsicData, constraint_residual: f64 },
}

impl Recovery {
    /// The lift with a given size; for a unique recovery the size must match.
    pub fn with_size(&self, rho0: f64) -> Result<Lift> {
        match self {
            Recovery::Unique(l) if (l.rho0 - rho0).abs() <= 1e-12 * rho0.abs().max(1.0) => Ok(*l),
            Recovery::Unique(l) => Err(Error::Inconsistent(format!("size fixed at {}", l.rho0))),
            Recovery::Family { data, .. } if rho0 > 0.0 => Ok(Lift::with_size(data, rho0)),
            Recovery::Family { .. } => Err(Error::InvalidInput("size must be positive".into())),
        }
    }

    pub fn unique(&self) -> Option<Lift> {
        match self {
            Recovery::Unique(l) => Some(*l),
            Recovery::Family { .. } => None,
        }
    }
}

/// Residual of u0 = (4 J8^2 + 1) S0 / 2, relative to max(1, u0).
pub fn zero_energy_residual(d: &IntrinsicData) -> f64 {
    let j = d.expansion_ratio();
    (d.u0 - 0.5 * (4.0 * j * j + 1.0) * d.siegel0).abs() / d.u0.abs().max(1.0)
}

/// Recover (rho0, v0, rho1) from intrinsic data.
pub fn initial_data_from_intrinsics(d: &IntrinsicData) -> Result<Recovery> {
    d.check()?;
    let j = d.expansion_ratio();
    if d.h == 0.0 {
        let r = zero_energy_residual(d);
        if r > ZERO_ENERGY_TOL {
            return Err(Error::Consistency { what: "zero-energy constraint".into(), residual: r, limit: ZERO_ENERGY_TOL });
        }
        return Ok(Recovery::Family { data: *d, constraint_residual: r });
    }
    let rho0 = (0.5 * d.siegel0 * (4.0 * j * j + 1.0) - d.u0) / d.h;
    if !(rho0 > 0.0) {
        return Err(Error::Inconsistent(format!("recovered size {rho0} is not positive")));
    }
    Ok(Recovery::Unique(Lift::with_size(d, rho0)))
}

/// Taylor coefficients in time of the moduli curve and related functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesCoefficients {
    pub rho: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub mu: Vec<f64>,
    pub eta: Vec<f64>,
    /// Coefficients of the energy integral residual through order N - 1.
    pub energy_residual: Vec<f64>,
    /// rho0^2 rho2 - (S0 - u0) / 2.
    pub e4_residual: f64,
}

pub const MAX_SERIES_ORDER: usize = 4;

/// Series to order `order` (at most 4) for the given lift.
pub fn series_coefficients(
    d: &IntrinsicData,
    lift: &Lift,
    order: usize,
    md: &MassDistribution,
) -> Result<SeriesCoefficients> {
    if order > MAX_SERIES_ORDER {
        return Err(Error::Unsupported(format!("series order {order} > {MAX_SERIES_ORDER}")));
    }
    d.check()?;
    if !(lift.rho0 > 0.0) {
        return Err(Error::Singular("zero size: leading coefficient vanishes".into()));
    }
    let s = lift.to_moduli(d);
    let [rho, phi, theta] = moduli_flow_jet::<6>(&s, md);
    let (dr, dp, dt) = (rho.differentiate(), phi.differentiate(), theta.differentiate());
    let g = phi.sin() * phi.sin();
    let v = (dp * dp + g * dt * dt).sqrt();
    let u = u_star(&d.chart.point(phi, theta), md);
    let (mu, eta) = angle_gradient(phi, theta, &d.chart, md);
    let energy = dr * dr * 0.5 + rho * rho * v * v / 8.0 - u / rho - d.h;
    let take = |j: &Jet<6>, n: usize| j.c[..n].to_vec();
    Ok(SeriesCoefficients {
        rho: take(&rho, order + 1),
        phi: take(&phi, order + 1),
        theta: take(&theta, order + 1),
        v: take(&v, order),
        u: take(&u, order + 1),
        mu: take(&mu, order + 1),
        eta: take(&eta, order + 1),
        energy_residual: take(&energy, order),
        e4_residual: rho.c[0] * rho.c[0] * rho.c[2] - 0.5 * (d.siegel0 - d.u0),
    })
}

impl SeriesCoefficients {
    /// Shape point of the truncated series at time offset `t`.
    pub fn shape_at(&self, t: f64, chart: &Chart) -> [f64; 3] {
        let ev = |c: &[f64]| c.iter().rev().fold(0.0, |a, &x| a * t + x);
        chart.point(ev(&self.phi), ev(&self.theta))
    }

    pub fn rho_at(&self, t: f64) -> f64 {
        self.rho.iter().rev().fold(0.0, |a, &x| a * t + x)
    }
}

/// Critical energy for given position, spherical speed and Siegel value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalEnergy {
    pub h_min: f64,
    pub rho0: f64,
}

impl CriticalEnergy {
    /// Number of motions (0, 1 or 2) realizing the data at energy `h`.
    pub fn solution_count(&self, h: f64) -> usize {
        let tol = 1e-12 * self.h_min.abs().max(1.0);
        if h < self.h_min - tol {
            0
        } else if h <= self.h_min + tol {
            1
        } else {
            2
        }
    }

    /// The admissible radial speeds at energy `h`, ascending.
    pub fn radial_speeds(&self, h: f64) -> Vec<f64> {
        match self.solution_count(h) {
            0 => vec![],
            1 => vec![0.0],
            _ => {
                let r = (2.0 * (h - self.h_min)).sqrt();
                vec![-r, r]
            }
        }
    }
}

/// h_min = rho0^2 v0^2 / 8 - U*(p) / rho0 with rho0 = (4 S0 / v0^2)^(1/3).
pub fn h_min(point: &ShapePoint, v0: f64, siegel0: f64, md: &MassDistribution) -> Result<CriticalEnergy> {
    if !(v0 > 0.0 && siegel0 > 0.0) {
        return Err(Error::InvalidInput("speed and Siegel value must be positive".into()));
    }
    let rho0 = (4.0 * siegel0 / (v0 * v0)).cbrt();
    Ok(CriticalEnergy { h_min: rho0 * rho0 * v0 * v0 / 8.0 - u_star(&point.0, md) / rho0, rho0 })
}

/// The cusp family member with radial speed squared `c` at `point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CuspData {
    pub rho0: f64,
    /// Initial curvature of both branches.
    pub k0: f64,
    /// Unit direction of the branches (along the gradient).
    pub direction: [f64; 3],
}

/// Size, initial curvature and direction of the cusp at `point` with
/// c = rho1^2 at energy h.
pub fn cusp_data(point: &ShapePoint, h: f64, c: f64, md: &MassDistribution) -> Result<CuspData> {
    if c < 0.0 {
        return Err(Error::InvalidInput("c must be nonnegative".into()));
    }
    let p = point.0;
    let g = gradient(&p, md);
    let gn = dot(&g, &g).sqrt();
    if gn < CRITICAL_GRADIENT {
        return Err(Error::IrregularPoint("critical point of U*: no cusp".into()));
    }
    let denom = 0.5 * c - h;
    if !(denom > 0.0) {
        return Err(Error::Inconsistent(format!("no size with c = {c} at h = {h}")));
    }
    let rho0 = u_star(&p, md) / denom;
    let tau = g.map(|x| x / gn);
    let nu = cross(&p, &tau);
    // derivative of ln|grad U*| along the geodesic leaving p in direction nu
    let s = Jet::<2>::variable(0.0);
    let q: V3<Jet<2>> = std::array::from_fn(|i| s.cos() * p[i] + s.sin() * nu[i]);
    let gq = gradient(&q, md);
    let ln_norm = dot(&gq, &gq).ln() * 0.5;
    Ok(CuspData { rho0, k0: ln_norm.c[1] / 3.0, direction: tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::critical_points;
    use crate::reduced_dynamics::{integrate_moduli, ModuliOptions};
    use crate::shape_analysis::{curve_frame, moduli_samples};
    use approx::assert_relative_eq;

    fn run(h: f64, md: &MassDistribution) -> (crate::reduced_dynamics::ModuliTrajectory, Vec<crate::shape_analysis::CurveSample>) {
        let p = ShapePoint::from_angles(1.2, 0.7);
        let s = ModuliState::with_energy(0.2, &p, &[0.3, -0.8, 0.1], 0.15, h, md).unwrap();
        let traj = integrate_moduli(&s, md, 0.0, 0.5, &ModuliOptions::default()).unwrap();
        let samples = moduli_samples(&traj, md);
        (traj, samples)
    }

    #[test]
    fn recovers_lift_for_nonzero_energy() {
        let md = MassDistribution::new(0.45, 0.35, 0.2).unwrap();
        for h in [-1.0, 1.0] {
            let (traj, samples) = run(h, &md);
            let i = samples.len() / 2;
            let f = curve_frame(&samples, &md, i).unwrap();
            let d = IntrinsicData::from_frame(&f, h, &md).unwrap();
            assert!(d.direction_defect() < 1e-13);
            let l = initial_data_from_intrinsics(&d).unwrap().unique().unwrap();
            let st = traj.samples[i].state;
            assert_relative_eq!(l.rho0, st.rho, max_relative = 1e-9);
            assert_relative_eq!(l.v0, st.speed(), max_relative = 1e-9);
            assert_relative_eq!(l.rho1, st.rho1, max_relative = 1e-8);
            assert!(zero_energy_residual(&d) > 1e-3);
        }
    }

    #[test]
    fn siegel_slope_sets_expansion_index() {
        let md = MassDistribution::new(0.45, 0.35, 0.2).unwrap();
        let (_, samples) = run(-1.0, &md);
        let f = curve_frame(&samples, &md, 3).unwrap();
        let mut d = IntrinsicData::from_frame(&f, -1.0, &md).unwrap();
        let j = d.expansion_ratio();
        // reflect J8 about zero through S1 -> 4 U_tau - S1
        d.siegel1 = 4.0 * d.u_tau - d.siegel1;
        assert_relative_eq!(d.expansion_ratio(), -j, max_relative = 1e-12);
        let a = initial_data_from_intrinsics(&IntrinsicData::from_frame(&f, -1.0, &md).unwrap()).unwrap();
        let b = initial_data_from_intrinsics(&d).unwrap();
        let (a, b) = (a.unique().unwrap(), b.unique().unwrap());
        assert!(a.rho1 * b.rho1 < 0.0);
        assert_relative_eq!(a.rho1, -b.rho1, max_relative = 1e-12);
    }

    #[test]
    fn zero_energy_family() {
        let md = MassDistribution::new(0.3, 0.3, 0.4).unwrap();
        let (traj, samples) = run(0.0, &md);
        let i = samples.len() / 3;
        let f = curve_frame(&samples, &md, i).unwrap();
        let d = IntrinsicData::from_frame(&f, 0.0, &md).unwrap();
        let rec = initial_data_from_intrinsics(&d).unwrap();
        let Recovery::Family { constraint_residual, .. } = rec else { panic!("expected family") };
        assert!(constraint_residual < 1e-10);
        let st = traj.samples[i].state;
        let l = rec.with_size(st.rho).unwrap();
        assert_relative_eq!(l.v0, st.speed(), max_relative = 1e-9);
        assert_relative_eq!(l.rho1, st.rho1, max_relative = 1e-8);
        // the same data at h != 0 does not give this motion
        let mut bad = d;
        bad.u0 *= 1.01;
        assert!(matches!(initial_data_from_intrinsics(&bad), Err(Error::Consistency { .. })));
    }

    #[test]
    fn series_reproduces_integration() {
        let md = MassDistribution::new(0.45, 0.35, 0.2).unwrap();
        let (traj, samples) = run(-1.0, &md);
        let f = curve_frame(&samples, &md, 0).unwrap();
        let d = IntrinsicData::from_frame(&f, -1.0, &md).unwrap();
        let l = initial_data_from_intrinsics(&d).unwrap().unique().unwrap();
        let sc = series_coefficients(&d, &l, 4, &md).unwrap();
        assert!(sc.e4_residual.abs() < 1e-10);
        assert!(sc.energy_residual.iter().all(|r| r.abs() < 1e-9), "{:?}", sc.energy_residual);
        assert_relative_eq!(sc.v[0], l.v0, max_relative = 1e-12);
        let err = |t: f64| {
            let want = traj.state_at(t).unwrap();
            let p = sc.shape_at(t, &d.chart);
            let w = want.shape().0;
            let e = ((p[0] - w[0]).powi(2) + (p[1] - w[1]).powi(2) + (p[2] - w[2]).powi(2)).sqrt();
            (e, (sc.rho_at(t) - want.rho).abs())
        };
        // truncation after t^4: halving t divides the error by about 32
        let (a, b) = (err(8e-3), err(4e-3));
        assert!(a.0 / b.0 > 24.0 && a.0 / b.0 < 40.0, "{a:?} {b:?}");
        assert!(a.1 / b.1 > 24.0 && a.1 / b.1 < 40.0, "{a:?} {b:?}");
        assert!(series_coefficients(&d, &l, 5, &md).is_err());
    }

    #[test]
    fn lagrange_point_is_exceptional() {
        let md = MassDistribution::new(0.45, 0.35, 0.2).unwrap();
        let cs = critical_points(&md).unwrap();
        let d = IntrinsicData::new(&cs.lagrange_north, &[1.0, 0.0, 0.0], 0.3, 0.0, -1.0, &md).unwrap();
        assert!(matches!(initial_data_from_intrinsics(&d), Err(Error::IrregularPoint(_))));
        assert!(cusp_data(&cs.lagrange_north, -1.0, 0.0, &md).is_err());
    }

    #[test]
    fn critical_energy() {
        let md = MassDistribution::new(0.45, 0.35, 0.2).unwrap();
        let (traj, samples) = run(-1.0, &md);
        let i = samples.len() / 2;
        let f = curve_frame(&samples, &md, i).unwrap();
        let g = f.geometry.unwrap();
        let c = h_min(&ShapePoint(f.p), f.v, g.siegel, &md).unwrap();
        assert!(c.h_min <= -1.0);
        let st = traj.samples[i].state;
        let roots = c.radial_speeds(-1.0);
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().any(|r| (r - st.rho1).abs() < 1e-8));
        assert_eq!(c.solution_count(c.h_min), 1);
        assert_eq!(c.radial_speeds(c.h_min), vec![0.0]);
        assert_eq!(c.solution_count(c.h_min - 0.1), 0);
        let c2 = h_min(&ShapePoint(f.p), 2.0 * f.v, g.siegel, &md).unwrap();
        assert_relative_eq!(c2.rho0 / c.rho0, 2f64.powf(-2.0 / 3.0), max_relative = 1e-14);
    }

    #[test]
    fn cusp_curvature_independent_of_c() {
        let md = MassDistribution::new(0.45, 0.35, 0.2).unwrap();
        let p = ShapePoint::from_angles(1.0, 2.0);
        let a = cusp_data(&p, -1.0, 0.0, &md).unwrap();
        let b = cusp_data(&p, -1.0, 0.7, &md).unwrap();
        assert_eq!(a.k0, b.k0);
        assert!(b.rho0 < a.rho0);
        assert_relative_eq!(a.rho0, u_star(&p.0, &md), max_relative = 1e-14);
        assert!(cusp_data(&p, 1.0, 1.0, &md).is_err());
    }
}
