//! Triple collisions: homothetic ray solutions, asymptotic profiles of
//! collision orbits, the logarithmic-time magnified frame and the rotation
//! angle of the approach.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{dot, Jet};
use crate::newton_dynamics::{accelerations, energy, flow_jet, GuardEvent, GuardOptions};
use crate::ode::{locate_crossing, DenseSolution, StepOptions, Stepper};
use crate::potential::{critical_points, hessian_at, u_star, CriticalKind};
use crate::reduced_dynamics::{integrate_moduli, moduli_flow_jet, ModuliOptions, ModuliState, ModuliTrajectory};
use crate::shape_analysis::spherical_excess;
use crate::shape_geometry::{dist, lift_motion, MassDistribution, ShapeMotion, ShapePoint, TriangleState};

/// K = (9 mu / 2)^(2/3), the coefficient of I = K t^(4/3).
pub fn ray_constant(mu: f64) -> f64 {
    (4.5 * mu).powf(2.0 / 3.0)
}

/// k-th derivative of K t^(4/3), k <= 3.
pub fn ray_derivative(k_const: f64, t: f64, k: usize) -> f64 {
    match k {
        0 => k_const * t.powf(4.0 / 3.0),
        1 => 4.0 / 3.0 * k_const * t.powf(1.0 / 3.0),
        2 => 4.0 / 9.0 * k_const * t.powf(-2.0 / 3.0),
        3 => -8.0 / 27.0 * k_const * t.powf(-5.0 / 3.0),
        _ => f64::NAN,
    }
}

/// Inertia profile of a homothetic motion ejected from I(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayProfile {
    pub t: Vec<f64>,
    pub inertia: Vec<f64>,
    pub inertia_dot: Vec<f64>,
    pub inertia_ddot: Vec<f64>,
    /// |I'' - 2 mu / sqrt(I) - 4 h| / |I''| with I'' from the computed state.
    pub lj_residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySolution {
    pub kind: CriticalKind,
    pub point: ShapePoint,
    pub mu: f64,
    pub h: f64,
    pub k: f64,
    pub profile: RayProfile,
}

/// Regularized ray: rho = x^2, dt = rho ds turns the radial equation into
/// x'' = (h/2) x with x(0) = 0, x'(0) = sqrt(mu/2); state (x, x', t).
struct RegularRay {
    mu: f64,
    h: f64,
    dense: DenseSolution,
}

impl RegularRay {
    fn integrate(mu: f64, h: f64, t_end: f64) -> Result<Self> {
        let half_h = 0.5 * h;
        // a bound ray falls back into collision at s = pi / sqrt(-h/2)
        let s_max = if h < 0.0 { std::f64::consts::PI / (-half_h).sqrt() } else { f64::INFINITY };
        let opts = StepOptions { rtol: 1e-13, atol: 1e-16, ..StepOptions::default() };
        let rhs = move |_s: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
            dy[0] = y[1];
            dy[1] = half_h * y[0];
            dy[2] = y[0] * y[0];
            Ok(())
        };
        let mut st = Stepper::new(rhs, 0.0, &[0.0, (0.5 * mu).sqrt(), 0.0], 1.0, opts)?;
        let mut dense = DenseSolution::default();
        while st.y()[2] < t_end {
            if st.t() >= s_max {
                return Err(Error::Singular(format!("bound ray recollides before t = {t_end}")));
            }
            dense.push(st.step(s_max.min(1e12))?);
        }
        Ok(RegularRay { mu, h, dense })
    }

    /// (rho, drho/dt) at physical time t.
    fn at(&self, t: f64) -> Option<(f64, f64)> {
        let seg = self.dense.segments.iter().find(|s| s.y0[2] <= t && s.y1[2] >= t)?;
        let s = locate_crossing(seg, |_, y| y[2] - t, 1e-15 * seg.h().abs());
        let y = seg.eval(s);
        if y[0] == 0.0 {
            return None;
        }
        Some((y[0] * y[0], 2.0 * y[1] / y[0]))
    }
}

/// Homothetic profile from the numerically integrated regularized radial
/// equation rho'' = -mu / rho^2 ejected from rho(0) = 0.
pub fn ray_profile_numeric(mu: f64, h: f64, t_grid: &[f64]) -> Result<RayProfile> {
    let t_end = t_grid.iter().cloned().fold(0.0, f64::max);
    if !(t_end > 0.0) || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput("ray grid must be positive".into()));
    }
    let ray = RegularRay::integrate(mu, h, t_end)?;
    let mut p = RayProfile { t: t_grid.to_vec(), inertia: vec![], inertia_dot: vec![], inertia_ddot: vec![], lj_residual: vec![] };
    for &t in t_grid {
        let (rho, rd) = ray.at(t).ok_or_else(|| Error::InvalidInput(format!("t = {t} outside the ray profile")))?;
        let idd = 2.0 * rd * rd - 2.0 * ray.mu / rho;
        p.inertia.push(rho * rho);
        p.inertia_dot.push(2.0 * rho * rd);
        p.inertia_ddot.push(idd);
        p.lj_residual.push((idd - 2.0 * ray.mu / rho - 4.0 * ray.h).abs() / idd.abs().max(f64::MIN_POSITIVE));
    }
    Ok(p)
}

/// Time and size at the turning point of a bound (h < 0) ray.
pub fn ray_apex(mu: f64, h: f64) -> Result<(f64, f64)> {
    if !(h < 0.0) {
        return Err(Error::UnboundedRegion { h });
    }
    // half the radial Kepler period
    let t_half = std::f64::consts::PI * mu / (2.0 * 2f64.sqrt() * (-h).powf(1.5));
    let ray = RegularRay::integrate(mu, h, 1.01 * t_half)?;
    for seg in &ray.dense.segments {
        if seg.y0[1] > 0.0 && seg.y1[1] <= 0.0 {
            let s = locate_crossing(seg, |_, y| y[1], 1e-15 * seg.h().abs());
            let y = seg.eval(s);
            return Ok((y[2], y[0] * y[0]));
        }
    }
    Err(Error::NoConvergence("no turning point found".into()))
}

/// The homothetic collision-ejection motion at a critical shape.
pub fn ray_solution(kind: CriticalKind, h: f64, t_grid: &[f64], md: &MassDistribution) -> Result<RaySolution> {
    let cs = critical_points(md)?;
    let (point, mu) = (cs.point(kind), cs.value(kind));
    let k = ray_constant(mu);
    let profile = if h == 0.0 {
        RayProfile {
            t: t_grid.to_vec(),
            inertia: t_grid.iter().map(|&t| ray_derivative(k, t, 0)).collect(),
            inertia_dot: t_grid.iter().map(|&t| ray_derivative(k, t, 1)).collect(),
            inertia_ddot: t_grid.iter().map(|&t| ray_derivative(k, t, 2)).collect(),
            lj_residual: t_grid
                .iter()
                .map(|&t| {
                    let idd = ray_derivative(k, t, 2);
                    (idd - 2.0 * mu / ray_derivative(k, t, 0).sqrt()).abs() / idd
                })
                .collect(),
        }
    } else {
        ray_profile_numeric(mu, h, t_grid)?
    };
    Ok(RaySolution { kind, point, mu, h, k, profile })
}

/// Radial and shape data of one sample approaching a collision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    /// Time remaining until the estimated collision.
    pub tau: f64,
    pub rho: f64,
    /// R_k for k = 0..3.
    pub ratios: [f64; 4],
    pub siegel: f64,
    pub wedge: f64,
    pub shape: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticProfile {
    pub t_collision: f64,
    /// U* at the final shape.
    pub mu: f64,
    /// mu implied by the slope of rho^(3/2).
    pub mu_fit: f64,
    pub k: f64,
    pub samples: Vec<ProfileSample>,
}

impl AsymptoticProfile {
    /// Samples with tau in [tau_min, tau_max].
    pub fn window(&self, tau_min: f64, tau_max: f64) -> impl Iterator<Item = &ProfileSample> {
        self.samples.iter().filter(move |s| s.tau >= tau_min && s.tau <= tau_max)
    }

    pub fn tau_min(&self) -> f64 {
        self.samples.iter().map(|s| s.tau).fold(f64::INFINITY, f64::min)
    }
}

/// Derivatives of I in t (index k) and the shape data at one time.
struct RadialJet {
    t: f64,
    d: [f64; 4],
    rho: f64,
    siegel: f64,
    wedge: f64,
    shape: [f64; 3],
}

fn fit_collision_time(js: &[RadialJet]) -> Result<(f64, f64)> {
    // least-squares line through rho^(3/2) over the samples closest to the end
    let end = js.last().ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    let lim = 8.0 * end.rho.powf(1.5);
    let pts: Vec<(f64, f64)> = js.iter().map(|j| (j.t, j.rho.powf(1.5))).filter(|p| p.1 <= lim).collect();
    if pts.len() < 4 {
        return Err(Error::InvalidInput("too few samples near the collision".into()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::InvalidInput("size is not decreasing toward the end".into()));
    }
    // rho^(3/2) ~ (3/2) sqrt(2 mu) (t_c - t)
    let tc = mx - my / slope;
    let mu_fit = (slope / 1.5).powi(2) / 2.0;
    Ok((tc, mu_fit))
}

fn build_profile(js: Vec<RadialJet>, md: &MassDistribution) -> Result<AsymptoticProfile> {
    let (tc, mu_fit) = fit_collision_time(&js)?;
    let end = js.last().expect("checked");
    let mu = u_star(&end.shape, md);
    let k = ray_constant(mu);
    let samples = js
        .iter()
        .filter(|j| tc - j.t > 0.0)
        .map(|j| {
            let tau = tc - j.t;
            // d/dtau = -d/dt
            let ratios = std::array::from_fn(|n| {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign * j.d[n] / ray_derivative(k, tau, n)
            });
            ProfileSample { tau, rho: j.rho, ratios, siegel: j.siegel, wedge: j.wedge, shape: j.shape }
        })
        .collect();
    Ok(AsymptoticProfile { t_collision: tc, mu, mu_fit, k, samples })
}

fn moduli_radial(t: f64, s: &ModuliState, md: &MassDistribution) -> RadialJet {
    let [rho, _, _] = moduli_flow_jet::<4>(s, md);
    let i: Jet<4> = rho * rho;
    let v = s.speed();
    let siegel = s.rho.powi(3) * v * v / 4.0;
    RadialJet {
        t,
        d: [i.deriv(0), i.deriv(1), i.deriv(2), i.deriv(3)],
        rho: s.rho,
        siegel,
        wedge: s.rho * siegel,
        shape: s.shape().0,
    }
}

/// Asymptotic profile of a moduli trajectory ending near a triple collision.
pub fn asymptotic_profile(traj: &ModuliTrajectory, md: &MassDistribution) -> Result<AsymptoticProfile> {
    let js = traj.samples.iter().map(|s| moduli_radial(s.t, &s.state, md)).collect();
    build_profile(js, md)
}

/// Same for a Newtonian trajectory; requires zero angular momentum.
pub fn asymptotic_profile_newton(
    traj: &crate::newton_dynamics::NewtonTrajectory,
    md: &MassDistribution,
) -> Result<AsymptoticProfile> {
    let m = md.masses();
    let mut js = Vec::with_capacity(traj.samples.len());
    for s in &traj.samples {
        let om = s.tri.angular_momentum(md);
        if om.abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("angular momentum {om:e} is not zero")));
        }
        let pos = flow_jet::<4>(&s.tri, md);
        let mut i = Jet::<4>::constant(0.0);
        for k in 0..3 {
            i += (pos[k][0] * pos[k][0] + pos[k][1] * pos[k][1]) * m[k];
        }
        let m2 = ModuliState::from_triangle(&s.tri, md)?;
        let inertia = i.c[0];
        let kin = crate::newton_dynamics::kinetic_energy(&s.tri, md);
        let idot = i.deriv(1);
        let wedge = 2.0 * inertia * kin - idot * idot / 4.0;
        js.push(RadialJet {
            t: s.t,
            d: [i.deriv(0), idot, i.deriv(2), i.deriv(3)],
            rho: inertia.sqrt(),
            siegel: wedge / inertia.sqrt(),
            wedge,
            shape: m2.shape().0,
        });
    }
    build_profile(js, md)
}

/// Relative defect of 2 I T - Idot^2 / 4 = rho^4 v^2 / 4 at a zero angular
/// momentum state, the left side from the bodies and the right side from
/// the projected shape motion.
pub fn sundman_residual(tri: &TriangleState, md: &MassDistribution) -> Result<f64> {
    let m = md.masses();
    let inertia = tri.inertia(md);
    let idot: f64 = 2.0 * (0..3).map(|k| m[k] * (tri.pos[k][0] * tri.vel[k][0] + tri.pos[k][1] * tri.vel[k][1])).sum::<f64>();
    let wedge = 2.0 * inertia * crate::newton_dynamics::kinetic_energy(tri, md) - idot * idot / 4.0;
    let sm = crate::shape_geometry::project_motion(tri, md)?;
    let v2 = dot(&sm.p_dot, &sm.p_dot);
    let rhs = sm.rho.powi(4) * v2 / 4.0;
    Ok((wedge - rhs).abs() / (2.0 * inertia * crate::newton_dynamics::kinetic_energy(tri, md)).max(f64::MIN_POSITIVE))
}

/// Magnified motion in logarithmic time u = -ln(tau).
#[derive(Debug, Clone, PartialEq)]
pub struct LogTimeTrajectory {
    pub u: Vec<f64>,
    pub rho_hat: Vec<f64>,
    pub rho_hat_prime: Vec<f64>,
    pub shapes: Vec<[f64; 3]>,
    /// States (positions then u-velocities) at each u.
    pub states: Vec<TriangleState>,
    pub energy_residual: Vec<f64>,
    pub h: f64,
    pub dense: DenseSolution,
}

impl LogTimeTrajectory {
    /// Physical configuration at time-to-collision tau = e^(-u), with
    /// velocities in the direction of decreasing tau (toward collision).
    pub fn untransform(&self, u: f64) -> Option<TriangleState> {
        let y = self.dense.eval(u)?;
        let s = TriangleState::from_slice(&y);
        let tau = (-u).exp();
        let c = tau.powf(2.0 / 3.0);
        let cv = tau.powf(-1.0 / 3.0);
        Some(TriangleState {
            pos: s.pos.map(|p| p.map(|x| x * c)),
            // d a / d tau = -tau^(-1/3) (a' - 2/3 a); toward collision is -d/dtau
            vel: std::array::from_fn(|i| std::array::from_fn(|d| cv * (s.vel[i][d] - 2.0 / 3.0 * s.pos[i][d]))),
        })
    }
}

fn log_time_energy(s: &TriangleState, u: f64, h: f64, md: &MassDistribution) -> (f64, f64, f64) {
    let m = md.masses();
    let mut t_hat = 0.0;
    let mut rr = 0.0;
    let mut i = 0.0;
    for k in 0..3 {
        t_hat += 0.5 * m[k] * (s.vel[k][0].powi(2) + s.vel[k][1].powi(2));
        rr += m[k] * (s.pos[k][0] * s.vel[k][0] + s.pos[k][1] * s.vel[k][1]);
        i += m[k] * (s.pos[k][0].powi(2) + s.pos[k][1].powi(2));
    }
    let u_hat = crate::newton_dynamics::potential_energy(s, md);
    let rho = i.sqrt();
    let rho_prime = rr / rho;
    let res = t_hat - (u_hat + h * (-2.0 * u / 3.0).exp() - 2.0 / 9.0 * i + 2.0 / 3.0 * rho * rho_prime);
    (rho, rho_prime, res.abs() / u_hat.max(1.0))
}

/// Integrate the magnified equations from a physical state `tri` at time
/// `tau0` before collision over `u_span` units of logarithmic time.
pub fn log_time_integrate(
    tri: &TriangleState,
    tau0: f64,
    md: &MassDistribution,
    u_span: f64,
    step: StepOptions,
) -> Result<LogTimeTrajectory> {
    if !(tau0 > 0.0 && u_span > 0.0) {
        return Err(Error::InvalidInput("tau0 and u_span must be positive".into()));
    }
    let h = energy(tri, md);
    let u0 = -tau0.ln();
    let c = tau0.powf(-2.0 / 3.0);
    let cv = tau0.powf(1.0 / 3.0);
    // tri.vel points toward collision, i.e. along -d/dtau
    let start = TriangleState {
        pos: tri.pos.map(|p| p.map(|x| x * c)),
        vel: std::array::from_fn(|i| std::array::from_fn(|d| 2.0 / 3.0 * tri.pos[i][d] * c + cv * tri.vel[i][d])),
    };
    let rhs = move |_u: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        let s = TriangleState::from_slice(y);
        let a = accelerations(&s.pos, md);
        dy[..6].copy_from_slice(&y[6..]);
        for i in 0..3 {
            for d in 0..2 {
                dy[6 + 2 * i + d] = a[i][d] + y[6 + 2 * i + d] / 3.0 + 2.0 / 9.0 * y[2 * i + d];
            }
        }
        Ok(())
    };
    let mut out = LogTimeTrajectory {
        u: vec![],
        rho_hat: vec![],
        rho_hat_prime: vec![],
        shapes: vec![],
        states: vec![],
        energy_residual: vec![],
        h,
        dense: DenseSolution::default(),
    };
    let record = |u: f64, s: TriangleState, out: &mut LogTimeTrajectory| -> f64 {
        let (rho, rp, res) = log_time_energy(&s, u, h, md);
        out.u.push(u);
        out.rho_hat.push(rho);
        out.rho_hat_prime.push(rp);
        out.shapes.push(crate::shape_geometry::project_to_shape(&s, md).shape.map_or([f64::NAN; 3], |p| p.0));
        out.states.push(s);
        out.energy_residual.push(res);
        rho
    };
    let rho0 = record(u0, start, &mut out);
    let mut st = Stepper::new(rhs, u0, &start.to_vec(), u_span, step)?;
    let u_end = u0 + u_span;
    while st.t() < u_end {
        let seg = st.step(u_end)?;
        let s = TriangleState::from_slice(&seg.y1);
        let rho = record(seg.t1, s, &mut out);
        out.dense.push(seg);
        if !(rho < 1e3 * rho0 && rho > 1e-3 * rho0) {
            return Err(Error::NoConvergence(format!("magnified size {rho:e} diverges: not a collision branch")));
        }
    }
    Ok(out)
}

/// Half the signed area between the approach curve from time `t1` to the
/// collision and the great-circle arc closing it through the Lagrange point.
pub fn collision_rotation(traj: &ModuliTrajectory, t1: f64, md: &MassDistribution) -> Result<f64> {
    let pts = approach_points(traj, t1)?;
    let p0 = limiting_lagrange(traj, md)?;
    Ok(0.5 * pts.windows(2).map(|w| spherical_excess(&p0, &w[0], &w[1])).sum::<f64>())
}

/// Rotation angle for a polyline ending at (or near) a Lagrange point.
pub fn rotation_of_polyline(pts: &[[f64; 3]], p0: &[f64; 3]) -> f64 {
    0.5 * pts.windows(2).map(|w| spherical_excess(p0, &w[0], &w[1])).sum::<f64>()
}

fn approach_points(traj: &ModuliTrajectory, t1: f64) -> Result<Vec<[f64; 3]>> {
    let (a, b) = traj.t_range();
    if !(t1 >= a && t1 <= b) {
        return Err(Error::InvalidInput(format!("t1 = {t1} outside [{a}, {b}]")));
    }
    let mut pts = Vec::new();
    let mut push = |t: f64| {
        if let Some(s) = traj.state_at(t) {
            pts.push(s.shape().0);
        }
    };
    push(t1);
    for w in traj.samples.windows(2) {
        let (s0, s1) = (w[0].t.max(t1), w[1].t);
        if s1 <= t1 {
            continue;
        }
        for k in 1..=8 {
            push(s0 + (s1 - s0) * k as f64 / 8.0);
        }
    }
    Ok(pts)
}

fn limiting_lagrange(traj: &ModuliTrajectory, md: &MassDistribution) -> Result<[f64; 3]> {
    let end = traj.samples.last().expect("non-empty").state.shape().0;
    let cs = critical_points(md)?;
    for p in [cs.lagrange_north, cs.lagrange_south] {
        if dist(&end, &p.0) < 1e-2 {
            return Ok(p.0);
        }
    }
    Err(Error::Unsupported("limiting shape is not a Lagrange point".into()))
}

/// Construction parameters of a collision orbit near a Lagrange point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionOrbitSpec {
    pub h: f64,
    /// Time after the ejection at which the series start is placed.
    pub t0: f64,
    /// Length of the ejection leg; the approach takes about as long.
    pub t_end: f64,
    /// Amplitudes of the two shape modes at unit time.
    pub amplitudes: [f64; 2],
}

impl Default for CollisionOrbitSpec {
    fn default() -> Self {
        CollisionOrbitSpec { h: -1.0, t0: 1e-7, t_end: 0.05, amplitudes: [0.04, 0.06] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionOrbit {
    /// The ejection leg, starting t0 after the collision at t = 0.
    pub ejection: ModuliTrajectory,
    /// Time-reversed leg ending at the collision guard.
    pub approach: ModuliTrajectory,
    /// Collision time of `approach` implied by the construction.
    pub t_collision: f64,
    pub lagrange: ShapePoint,
    /// Exponents t^s of the two shape modes.
    pub exponents: [f64; 2],
}

/// Collision-orbit step options: tight and scale-free near rho = 0.
pub fn collision_step_options() -> StepOptions {
    StepOptions { rtol: 1e-12, atol: 1e-20, max_steps: 2_000_000, ..StepOptions::default() }
}

/// Build an orbit leaving the Lagrange collision along the two shape modes
/// of the linearized equations and the time-reversed orbit falling back in.
pub fn collision_orbit(spec: &CollisionOrbitSpec, md: &MassDistribution) -> Result<CollisionOrbit> {
    let cs = critical_points(md)?;
    let p0 = cs.lagrange_north;
    let mu = cs.lagrange_value;
    let k = ray_constant(mu);
    let (hm, basis) = hessian_at(&p0, md);
    // symmetric 2x2 eigen decomposition
    let (a, b, c) = (hm[0][0], hm[0][1], hm[1][1]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c).powi(2) + b * b).sqrt();
    let kap = [mean - rad, mean + rad];
    let ang = 0.5 * (2.0 * b).atan2(a - c);
    let dirs = [
        [ang.cos(), ang.sin()],
        [-ang.sin(), ang.cos()],
    ];
    // eigenvector of the larger eigenvalue is at angle `ang`
    let dirs = [dirs[1], dirs[0]];
    let exps = kap.map(|kp| -1.0 / 6.0 + (1.0 / 36.0 + 8.0 * kp / (9.0 * mu)).sqrt());
    let t0 = spec.t0;
    let tangent = |w: [f64; 2]| -> [f64; 3] { std::array::from_fn(|i| w[0] * basis[0][i] + w[1] * basis[1][i]) };
    let mut disp = [0.0; 3];
    let mut vel = [0.0; 3];
    for m in 0..2 {
        let e = tangent(dirs[m]);
        let amp = spec.amplitudes[m] * t0.powf(exps[m]);
        for i in 0..3 {
            disp[i] += amp * e[i];
            vel[i] += amp * exps[m] / t0 * e[i];
        }
    }
    let dn = dot(&disp, &disp).sqrt();
    let p: [f64; 3] = if dn > 0.0 {
        std::array::from_fn(|i| dn.cos() * p0.0[i] + dn.sin() * disp[i] / dn)
    } else {
        p0.0
    };
    let rho = k.sqrt() * t0.powf(2.0 / 3.0) * (1.0 + 0.9 * spec.h / k * t0.powf(2.0 / 3.0));
    let v2 = dot(&vel, &vel);
    let rd2 = 2.0 * (spec.h + u_star(&p, md) / rho - rho * rho * v2 / 8.0);
    if !(rd2 > 0.0) {
        return Err(Error::InvalidInput("ejection data infeasible".into()));
    }
    let pd = dot(&vel, &p);
    let p_dot: [f64; 3] = std::array::from_fn(|i| vel[i] - pd * p[i]);
    let s = ModuliState::from_motion(&ShapeMotion { rho, rho_dot: rd2.sqrt(), p, p_dot }, spec.h);
    let opts = ModuliOptions {
        step: collision_step_options(),
        guards: GuardOptions { r_min: 0.0, rho_min: 0.0, rho_max: 1e4 },
        ..ModuliOptions::default()
    };
    let ejection = integrate_moduli(&s, md, t0, spec.t_end, &opts)?;
    if let Some(ev) = ejection.event {
        return Err(Error::InvalidInput(format!("ejection leg stopped early: {ev:?}")));
    }
    let last = ejection.samples.last().expect("non-empty").state;
    let rev = ModuliState { rho1: -last.rho1, phi1: -last.phi1, theta1: -last.theta1, ..last };
    let approach_opts = ModuliOptions {
        guards: GuardOptions { r_min: 0.0, rho_min: 2.0 * rho, rho_max: 1e4 },
        ..opts
    };
    let approach = integrate_moduli(&rev, md, 0.0, spec.t_end, &approach_opts)?;
    match approach.event {
        Some(GuardEvent::TripleCollision { .. }) => {}
        other => return Err(Error::NoConvergence(format!("approach did not reach the collision guard: {other:?}"))),
    }
    Ok(CollisionOrbit { ejection, approach, t_collision: spec.t_end, lagrange: p0, exponents: exps })
}

/// Zero-angular-momentum triangle realizing a moduli state; convenience for
/// the log-time frame.
pub fn triangle_of(s: &ModuliState, md: &MassDistribution) -> Result<TriangleState> {
    lift_motion(&s.motion(), md)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unequal() -> MassDistribution {
        MassDistribution::new(0.5, 0.3, 0.2).unwrap()
    }

    #[test]
    fn equal_mass_ray_constant() {
        let mu = 3f64.sqrt() / 9.0;
        assert!((ray_constant(mu) - 0.908560296416).abs() < 1e-9, "{}", ray_constant(mu));
    }

    #[test]
    fn zero_energy_ray_matches_closed_form() {
        let mu = 0.3;
        let k = ray_constant(mu);
        let grid: Vec<f64> = (0..=30).map(|i| 1e-3 * 1000f64.powf(i as f64 / 30.0)).collect();
        let p = ray_profile_numeric(mu, 0.0, &grid).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            for (got, n) in [(p.inertia[i], 0), (p.inertia_dot[i], 1), (p.inertia_ddot[i], 2)] {
                let want = ray_derivative(k, t, n);
                assert!((got - want).abs() <= 1e-9 * want.abs(), "t = {t}, k = {n}: {got} vs {want}");
            }
            assert!(p.lj_residual[i] < 1e-9);
        }
    }

    #[test]
    fn bound_ray_apex_invariant() {
        let mu = 0.25;
        for h in [-0.5, -1.0, -3.0] {
            let (t, r) = ray_apex(mu, h).unwrap();
            assert!((r - mu / -h).abs() < 1e-9 * r);
            let inv = t * t / r.powi(3);
            let want = std::f64::consts::PI.powi(2) / (8.0 * mu);
            assert!((inv - want).abs() < 1e-8 * want, "{inv} vs {want}");
        }
        assert!(ray_apex(mu, 0.5).is_err());
    }

    #[test]
    fn ray_solution_uses_critical_value() {
        let md = unequal();
        let r = ray_solution(CriticalKind::Euler(1), -1.0, &[1e-3, 1e-2], &md).unwrap();
        let cs = critical_points(&md).unwrap();
        assert_eq!(r.mu, cs.euler_values[1]);
        assert!(r.profile.lj_residual.iter().all(|&x| x < 1e-9));
        // first-order ejection series I = K t^(4/3) (1 + 9h/(5K) t^(2/3))
        let series = ray_derivative(r.k, 1e-3, 0) * (1.0 - 1.8 / r.k * 1e-2);
        assert!((r.profile.inertia[0] / series - 1.0).abs() < 1e-3);
    }

    #[test]
    fn homothetic_orbit_ratios_are_one() {
        let md = MassDistribution::equal();
        let spec = CollisionOrbitSpec { h: 0.0, amplitudes: [0.0, 0.0], ..Default::default() };
        let orb = collision_orbit(&spec, &md).unwrap();
        let prof = asymptotic_profile(&orb.approach, &md).unwrap();
        assert!((prof.t_collision - orb.t_collision).abs() < 1e-10, "{}", prof.t_collision);
        for s in prof.window(1e-5, 1e-2) {
            for (k, r) in s.ratios.iter().enumerate() {
                assert!((r - 1.0).abs() < 1e-6, "tau = {}, R{k} = {r}", s.tau);
            }
        }
    }

    #[test]
    fn perturbed_orbit_profile() {
        let md = unequal();
        let orb = collision_orbit(&CollisionOrbitSpec::default(), &md).unwrap();
        let prof = asymptotic_profile(&orb.approach, &md).unwrap();
        assert!((prof.t_collision - orb.t_collision).abs() < 1e-8 * orb.t_collision.max(1.0));
        let near: Vec<_> = prof.window(0.0, 1e-4).collect();
        assert!(near.len() > 5);
        for s in &near {
            assert!((s.ratios[0] - 1.0).abs() < 0.05 && (s.ratios[1] - 1.0).abs() < 0.05, "{s:?}");
        }
        // Siegel quantity decays toward the collision
        let all: Vec<_> = prof.window(0.0, 1e-2).collect();
        for w in all.windows(2) {
            assert!(w[1].siegel <= w[0].siegel * (1.0 + 1e-9), "{} -> {}", w[0].siegel, w[1].siegel);
        }
        assert!(all.last().unwrap().siegel < 0.1 * all[0].siegel);
    }

    #[test]
    fn log_time_size_tends_to_ray_constant() {
        let md = unequal();
        let orb = collision_orbit(&CollisionOrbitSpec::default(), &md).unwrap();
        let tau0 = 1e-2;
        let s = orb.approach.state_at(orb.t_collision - tau0).unwrap();
        let tri = triangle_of(&s, &md).unwrap();
        let lt = log_time_integrate(&tri, tau0, &md, 8.0, collision_step_options()).unwrap();
        let k = ray_constant(critical_points(&md).unwrap().lagrange_value);
        let r = *lt.rho_hat.last().unwrap();
        assert!((r / k.sqrt() - 1.0).abs() < 0.02, "{r} vs {}", k.sqrt());
        assert!(lt.energy_residual.iter().all(|&e| e < 1e-8), "{:?}", lt.energy_residual.iter().cloned().fold(0.0, f64::max));
        let u = lt.u[lt.u.len() / 2];
        let back = lt.untransform(u).unwrap();
        let phys = orb.approach.state_at(orb.t_collision - (-u).exp()).unwrap();
        let m = crate::shape_geometry::project_motion(&back, &md).unwrap();
        assert!((m.rho - phys.rho).abs() < 1e-6 * phys.rho);
        assert!((m.rho_dot - phys.rho1).abs() < 1e-5 * phys.rho1.abs());
    }

    #[test]
    fn rotation_shrinks_toward_collision() {
        let md = unequal();
        let orb = collision_orbit(&CollisionOrbitSpec::default(), &md).unwrap();
        let tc = orb.t_collision;
        let psi: Vec<f64> = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
            .iter()
            .map(|tau| collision_rotation(&orb.approach, tc - tau, &md).unwrap())
            .collect();
        assert!(psi[0].abs() > 1e-8, "{psi:?}");
        for w in psi.windows(2) {
            assert!(w[1].abs() <= w[0].abs(), "{psi:?}");
        }
        let pts: Vec<[f64; 3]> = approach_points(&orb.approach, tc - 1e-2).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        let p0 = orb.lagrange.0;
        assert!((rotation_of_polyline(&rev, &p0) + rotation_of_polyline(&pts, &p0)).abs() < 1e-12);
    }

    #[test]
    fn sundman_identity_on_random_states() {
        use rand::{Rng, SeedableRng};
        let md = unequal();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let pos = std::array::from_fn(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let vel = std::array::from_fn(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            let s = crate::newton_dynamics::make_zero_momentum_state(pos, vel, &md).unwrap();
            assert!(sundman_residual(&s.tri, &md).unwrap() < 1e-8);
        }
    }

    #[test]
    fn ray_is_fixed_in_log_time_and_has_no_rotation() {
        let md = MassDistribution::equal();
        let spec = CollisionOrbitSpec { h: 0.0, amplitudes: [0.0, 0.0], ..Default::default() };
        let orb = collision_orbit(&spec, &md).unwrap();
        let tau0 = 1e-2;
        let s = orb.approach.state_at(orb.t_collision - tau0).unwrap();
        let lt = log_time_integrate(&triangle_of(&s, &md).unwrap(), tau0, &md, 5.0, collision_step_options()).unwrap();
        let k = ray_constant(critical_points(&md).unwrap().lagrange_value);
        for (r, p) in lt.rho_hat.iter().zip(&lt.shapes) {
            assert!((r - k.sqrt()).abs() < 1e-7, "{r}");
            assert!(dist(p, &orb.lagrange.0) < 1e-8);
        }
        assert!(lt.rho_hat_prime.iter().all(|d| d.abs() < 1e-6));
        let psi = collision_rotation(&orb.approach, orb.t_collision - 1e-2, &md).unwrap();
        assert!(psi.abs() < 1e-12, "{psi}");
    }

    #[test]
    fn newton_profile_and_momentum_rejection() {
        use crate::newton_dynamics::{integrate_newton, NewtonOptions, SystemState};
        let md = unequal();
        let orb = collision_orbit(&CollisionOrbitSpec::default(), &md).unwrap();
        let tc = orb.t_collision;
        let s = orb.approach.state_at(tc - 1e-2).unwrap();
        let start = SystemState { t: tc - 1e-2, tri: triangle_of(&s, &md).unwrap() };
        let last = orb.approach.samples.last().unwrap().state.rho;
        let opts = NewtonOptions {
            step: collision_step_options(),
            guards: GuardOptions { r_min: 0.0, rho_min: last, rho_max: 1e4 },
        };
        let traj = integrate_newton(&start, &md, tc, &opts).unwrap();
        assert!(matches!(traj.event, Some(GuardEvent::TripleCollision { .. })));
        let prof = asymptotic_profile_newton(&traj, &md).unwrap();
        assert!((prof.t_collision - tc).abs() < 1e-8);
        for smp in prof.window(0.0, 1e-4) {
            assert!((smp.ratios[0] - 1.0).abs() < 0.05 && (smp.ratios[1] - 1.0).abs() < 0.05);
            assert!((smp.wedge - smp.rho * smp.siegel).abs() <= 1e-12 * smp.wedge);
        }
        let mut spun = traj.clone();
        for smp in &mut spun.samples {
            smp.tri.vel[0][0] += 1e-3;
        }
        assert!(asymptotic_profile_newton(&spun, &md).is_err());
    }
}
