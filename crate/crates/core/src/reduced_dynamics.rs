//! Reduced equations on the moduli cone and on the shape sphere.

use crate::error::{Error, Result};
use crate::jet::{cross, dot, Jet, Scalar, V3};
use crate::newton_dynamics::{energy, GuardEvent, GuardOptions};
use crate::ode::{solve, Rhs, Segment, StepOptions, Stepper};
use crate::potential::{b_field, gradient, u_star};
use crate::shape_geometry::{
    lift_motion, mutual_distances, project_motion, Chart, MassDistribution, ShapeMotion,
    ShapePoint, TriangleState,
};

/// Switch charts once sin(phi) drops below this.
pub const CHART_SWITCH: f64 = 0.05;
/// Hard limit below which the spherical equations are refused.
pub const CHART_LIMIT: f64 = 1e-8;

/// Position and velocity on the moduli cone in a spherical chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliState {
    pub rho: f64,
    pub phi: f64,
    pub theta: f64,
    pub rho1: f64,
    pub phi1: f64,
    pub theta1: f64,
    pub h: f64,
    pub chart: Chart,
}

impl ModuliState {
    pub fn shape(&self) -> ShapePoint {
        ShapePoint(self.chart.point(self.phi, self.theta))
    }

    /// World velocity of the shape point.
    pub fn shape_velocity(&self) -> [f64; 3] {
        let (ep, et) = self.chart.basis(self.phi, self.theta);
        std::array::from_fn(|i| ep[i] * self.phi1 + et[i] * self.theta1)
    }

    /// Spherical speed of the shape curve on the unit sphere.
    pub fn speed(&self) -> f64 {
        (self.phi1 * self.phi1 + self.phi.sin().powi(2) * self.theta1 * self.theta1).sqrt()
    }

    /// Energy integral residual, relative to max(1, U*/rho).
    pub fn energy_residual(&self, md: &MassDistribution) -> f64 {
        let u = u_star(&self.shape().0, md) / self.rho;
        let v = self.speed();
        let e = 0.5 * self.rho1 * self.rho1 + self.rho * self.rho * v * v / 8.0 - u - self.h;
        e.abs() / u.max(1.0)
    }

    /// State at shape `p` with size `rho` and radial speed `rho1`, moving along
    /// the tangent `direction` with the spherical speed fixed by the energy.
    pub fn with_energy(
        rho: f64,
        p: &ShapePoint,
        direction: &[f64; 3],
        rho1: f64,
        h: f64,
        md: &MassDistribution,
    ) -> Result<Self> {
        let v2 = 8.0 * (h + u_star(&p.0, md) / rho - 0.5 * rho1 * rho1) / (rho * rho);
        if !(v2 >= 0.0) || !(rho > 0.0) {
            return Err(Error::InvalidInput(format!("energy {h} unreachable from rho = {rho}, rho1 = {rho1}")));
        }
        let d = dot(direction, &p.0);
        let tan: [f64; 3] = std::array::from_fn(|i| direction[i] - d * p.0[i]);
        let n = dot(&tan, &tan).sqrt();
        let pdot = if n > 0.0 { tan.map(|x| x * v2.sqrt() / n) } else { [0.0; 3] };
        let m = ShapeMotion { rho, rho_dot: rho1, p: p.0, p_dot: pdot };
        Ok(ModuliState::from_motion(&m, h))
    }

    pub fn motion(&self) -> ShapeMotion {
        ShapeMotion {
            rho: self.rho,
            rho_dot: self.rho1,
            p: self.shape().0,
            p_dot: self.shape_velocity(),
        }
    }

    /// Moduli state of a triangle, in the standard chart unless it is
    /// too close to a coordinate pole.
    pub fn from_triangle(tri: &TriangleState, md: &MassDistribution) -> Result<Self> {
        let m = project_motion(tri, md)?;
        Ok(Self::from_motion(&m, energy(tri, md)))
    }

    pub fn from_motion(m: &ShapeMotion, h: f64) -> Self {
        let chart = if m.p[2].abs() > (1.0 - CHART_SWITCH * CHART_SWITCH).sqrt() {
            Chart::centered_on(&m.p)
        } else {
            Chart::identity()
        };
        Self::from_motion_in(m, h, chart)
    }

    pub fn from_motion_in(m: &ShapeMotion, h: f64, chart: Chart) -> Self {
        let (phi, theta) = chart.angles(&m.p);
        let (phi1, theta1) = chart.rates(&m.p, &m.p_dot);
        ModuliState { rho: m.rho, phi, theta, rho1: m.rho_dot, phi1, theta1, h, chart }
    }

    /// Same point and velocity re-expressed in `chart`.
    pub fn in_chart(&self, chart: Chart) -> Self {
        Self::from_motion_in(&self.motion(), self.h, chart)
    }

    pub fn to_triangle(&self, md: &MassDistribution) -> Result<TriangleState> {
        lift_motion(&self.motion(), md)
    }

    fn to_vec(&self) -> [f64; 6] {
        [self.rho, self.phi, self.theta, self.rho1, self.phi1, self.theta1]
    }

    fn from_slice(y: &[f64], h: f64, chart: Chart) -> Self {
        ModuliState { rho: y[0], phi: y[1], theta: y[2], rho1: y[3], phi1: y[4], theta1: y[5], h, chart }
    }
}

/// (U_phi, U_theta) at a chart point for any scalar.
pub(crate) fn angle_gradient<S: Scalar>(phi: S, theta: S, chart: &Chart, md: &MassDistribution) -> (S, S) {
    let p = chart.point(phi, theta);
    let bv = b_field(&p, md);
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    let dphi = chart.to_world(&[cp * ct, cp * st, -sp]);
    let dtheta = chart.to_world(&[-sp * st, sp * ct, S::zero()]);
    (dot(&bv, &dphi), dot(&bv, &dtheta))
}

/// Second derivatives (rho'', phi'', theta'') for any scalar.
pub fn moduli_accel<S: Scalar>(
    y: [S; 6],
    h: f64,
    chart: &Chart,
    md: &MassDistribution,
) -> [S; 3] {
    let [rho, phi, theta, rho1, phi1, theta1] = y;
    let u = u_star(&chart.point(phi, theta), md);
    let (u_phi, u_theta) = angle_gradient(phi, theta, chart, md);
    let (sp, cp) = (phi.sin(), phi.cos());
    let rr = rho1 / rho;
    let rho3 = rho * rho * rho;
    [
        -rho1 * rr + (u / rho + 2.0 * h) / rho,
        -(rr * phi1) * 2.0 + sp * cp * theta1 * theta1 + u_phi * 4.0 / rho3,
        -(rr * theta1) * 2.0 - cp / sp * phi1 * theta1 * 2.0 + u_theta * 4.0 / (rho3 * sp * sp),
    ]
}

pub fn moduli_rhs(s: &ModuliState, md: &MassDistribution) -> Result<[f64; 3]> {
    if !(s.rho > 0.0) {
        return Err(Error::Singular("rho must be positive".into()));
    }
    let sp = s.phi.sin().abs();
    if sp < CHART_LIMIT {
        return Err(Error::ChartSingularity { sin_phi: sp });
    }
    let p = s.shape();
    if md.b().iter().any(|b| crate::shape_geometry::dist(&p.0, b) < 1e-14) {
        return Err(Error::Singular("shape point at binary collision".into()));
    }
    Ok(moduli_accel(s.to_vec(), s.h, &s.chart, md))
}

/// Taylor jets of (rho, phi, theta) along the flow, exact to order N-1.
pub fn moduli_flow_jet<const N: usize>(s: &ModuliState, md: &MassDistribution) -> [Jet<N>; 3] {
    let init = |a: f64, b: f64| {
        let mut c = [0.0; N];
        c[0] = a;
        if N > 1 {
            c[1] = b;
        }
        Jet::from_coeffs(c)
    };
    let mut q = [init(s.rho, s.rho1), init(s.phi, s.phi1), init(s.theta, s.theta1)];
    for n in 0..N.saturating_sub(2) {
        let d = q.map(|j| j.differentiate());
        let acc = moduli_accel([q[0], q[1], q[2], d[0], d[1], d[2]], s.h, &s.chart, md);
        for k in 0..3 {
            q[k].c[n + 2] = acc[k].c[n] / ((n + 1) * (n + 2)) as f64;
        }
    }
    q
}

/// World-coordinate Taylor jet of the shape point along the moduli flow.
pub fn moduli_shape_jet<const N: usize>(s: &ModuliState, md: &MassDistribution) -> (Jet<N>, V3<Jet<N>>) {
    let [rho, phi, theta] = moduli_flow_jet::<N>(s, md);
    (rho, s.chart.point(phi, theta))
}

struct ModuliRhs<'a> {
    md: &'a MassDistribution,
    h: f64,
    chart: Chart,
}

impl Rhs for ModuliRhs<'_> {
    fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let s = ModuliState::from_slice(y, self.h, self.chart);
        let a = moduli_rhs(&s, self.md)?;
        dy[..3].copy_from_slice(&y[3..6]);
        dy[3..6].copy_from_slice(&a);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuliOptions {
    pub step: StepOptions,
    pub guards: GuardOptions,
    /// Energy-integral residual that aborts the run.
    pub residual_limit: f64,
    /// Residual required of the initial state.
    pub initial_residual: f64,
}

impl Default for ModuliOptions {
    fn default() -> Self {
        ModuliOptions {
            step: StepOptions::default(),
            guards: GuardOptions::default(),
            residual_limit: 1e-6,
            initial_residual: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuliSample {
    pub t: f64,
    pub state: ModuliState,
}

/// A charted piece of continuous output.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartedSegment {
    pub chart: Chart,
    pub seg: Segment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuliTrajectory {
    pub samples: Vec<ModuliSample>,
    pub pieces: Vec<ChartedSegment>,
    pub h: f64,
    pub event: Option<GuardEvent>,
    pub max_energy_residual: f64,
    pub chart_switches: usize,
}

pub(crate) fn find_piece(pieces: &[ChartedSegment], t: f64) -> Option<&ChartedSegment> {
    let first = pieces.first()?;
    let fwd = first.seg.t1 >= first.seg.t0;
    let idx = pieces
        .partition_point(|p| if fwd { p.seg.t1 < t } else { p.seg.t1 > t })
        .min(pieces.len() - 1);
    let p = &pieces[idx];
    p.seg.contains(t).then_some(p)
}

impl ModuliTrajectory {
    pub fn state_at(&self, t: f64) -> Option<ModuliState> {
        let p = find_piece(&self.pieces, t)?;
        Some(ModuliState::from_slice(&p.seg.eval(t), self.h, p.chart))
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples.last().expect("non-empty").t)
    }
}

fn moduli_guards(s: &ModuliState, md: &MassDistribution, g: &GuardOptions) -> [f64; 5] {
    let r = mutual_distances(&s.shape(), s.rho, md);
    [r[0] - g.r_min, r[1] - g.r_min, r[2] - g.r_min, s.rho - g.rho_min, g.rho_max - s.rho]
}

pub fn integrate_moduli(
    s0: &ModuliState,
    md: &MassDistribution,
    t0: f64,
    t_end: f64,
    opts: &ModuliOptions,
) -> Result<ModuliTrajectory> {
    integrate_moduli_until(s0, md, t0, t_end, opts, |_| false)
}

/// As [`integrate_moduli`], also stopping after the first step whose end
/// state satisfies `stop`.
fn integrate_moduli_until(
    s0: &ModuliState,
    md: &MassDistribution,
    t0: f64,
    t_end: f64,
    opts: &ModuliOptions,
    stop_at: impl Fn(&ModuliState) -> bool,
) -> Result<ModuliTrajectory> {
    let r0 = s0.energy_residual(md);
    if r0 > opts.initial_residual {
        return Err(Error::Consistency {
            what: "initial energy integral".into(),
            residual: r0,
            limit: opts.initial_residual,
        });
    }
    let mut s0 = *s0;
    if s0.phi.sin().abs() < CHART_SWITCH {
        s0 = s0.in_chart(Chart::centered_on(&s0.shape().0));
    }
    let mut traj = ModuliTrajectory {
        samples: vec![ModuliSample { t: t0, state: s0 }],
        pieces: Vec::new(),
        h: s0.h,
        event: None,
        max_energy_residual: r0,
        chart_switches: 0,
    };
    let dir = t_end - t0;
    if dir == 0.0 {
        return Ok(traj);
    }
    let rhs = ModuliRhs { md, h: s0.h, chart: s0.chart };
    let mut st = Stepper::new(rhs, t0, &s0.to_vec(), dir, opts.step)?;
    while (t_end - st.t()) * dir > 0.0 {
        let mut seg = st.step(t_end)?;
        let chart = st.rhs_mut().chart;
        let end = ModuliState::from_slice(&seg.y1, s0.h, chart);
        let vals = |y: &[f64]| moduli_guards(&ModuliState::from_slice(y, s0.h, chart), md, &opts.guards);
        let mut stop = false;
        let mut at = end;
        if let Some(ev) = crate::newton_dynamics::guard_event(&seg, &vals(&seg.y1), vals) {
            seg = seg.truncated_at(ev.t());
            at = ModuliState::from_slice(&seg.y1, s0.h, chart);
            traj.event = Some(ev);
            stop = true;
        }
        let res = at.energy_residual(md);
        traj.max_energy_residual = traj.max_energy_residual.max(res);
        if res > opts.residual_limit {
            return Err(Error::Consistency {
                what: "energy integral".into(),
                residual: res,
                limit: opts.residual_limit,
            });
        }
        traj.samples.push(ModuliSample { t: seg.t1, state: at });
        traj.pieces.push(ChartedSegment { chart, seg });
        if stop || stop_at(&at) {
            break;
        }
        if at.phi.sin().abs() < CHART_SWITCH {
            let ch = Chart::centered_on(&at.shape().0);
            let re = at.in_chart(ch);
            st.rhs_mut().chart = ch;
            st.reset(st.t(), &re.to_vec())?;
            traj.chart_switches += 1;
        }
    }
    Ok(traj)
}

/// State of the third-order shape equation: angles with first and second
/// derivatives in a chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeState3 {
    pub phi: [f64; 3],
    pub theta: [f64; 3],
    pub chart: Chart,
}

impl ShapeState3 {
    pub fn from_moduli(s: &ModuliState, md: &MassDistribution) -> Self {
        let a = moduli_accel(s.to_vec(), s.h, &s.chart, md);
        ShapeState3 { phi: [s.phi, s.phi1, a[1]], theta: [s.theta, s.theta1, a[2]], chart: s.chart }
    }

    pub fn point(&self) -> [f64; 3] {
        self.chart.point(self.phi[0], self.theta[0])
    }

    /// World Taylor jet of the curve with the third-order terms set to zero.
    fn base_jet(&self) -> V3<Jet<4>> {
        let pj = Jet::from_coeffs([self.phi[0], self.phi[1], 0.5 * self.phi[2], 0.0]);
        let tj = Jet::from_coeffs([self.theta[0], self.theta[1], 0.5 * self.theta[2], 0.0]);
        self.chart.point(pj, tj)
    }

    /// Same curve data in another chart.
    pub fn in_chart(&self, chart: Chart) -> Self {
        let x = self.base_jet();
        let l: V3<Jet<4>> = {
            let r = chart.rot.transpose();
            std::array::from_fn(|i| x[0] * r[(i, 0)] + x[1] * r[(i, 1)] + x[2] * r[(i, 2)])
        };
        let phi = l[2].acos();
        let theta = l[1].atan2(l[0]);
        ShapeState3 {
            phi: [phi.c[0], phi.c[1], 2.0 * phi.c[2]],
            theta: [theta.c[0], theta.c[1], 2.0 * theta.c[2]],
            chart,
        }
    }
}

/// Intrinsic quantities the shape equation evaluates at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEquationTerms {
    pub v: f64,
    pub vdot: f64,
    pub curvature: f64,
    pub u_tau: f64,
    pub u_nu: f64,
    pub siegel: f64,
    pub rho: f64,
    pub rho1: f64,
}

pub fn shape_equation_terms(s: &ShapeState3, md: &MassDistribution) -> Result<ShapeEquationTerms> {
    let x = s.base_jet();
    let pos = x.map(|j| j.c[0]);
    let vel = x.map(|j| j.c[1]);
    let acc = x.map(|j| 2.0 * j.c[2]);
    let v = dot(&vel, &vel).sqrt();
    if !(v > 0.0) {
        return Err(Error::IrregularPoint("zero speed".into()));
    }
    let vdot = dot(&vel, &acc) / v;
    let curvature = dot(&cross(&pos, &vel), &acc) / (v * v * v);
    let tau = vel.map(|c| c / v);
    let nu = cross(&pos, &tau);
    let g = gradient(&pos, md);
    let u_tau = dot(&g, &tau);
    let u_nu = dot(&g, &nu);
    let gn = dot(&g, &g).sqrt();
    if curvature.abs() < 1e-10 && u_nu.abs() < 1e-10 * gn.max(1.0) {
        return Err(Error::IrregularPoint(
            "exceptional: curve follows a gradient line".into(),
        ));
    }
    let siegel = u_nu / curvature;
    if !(siegel > 0.0 && siegel.is_finite()) {
        return Err(Error::IrregularPoint(format!("Siegel value {siegel:e}")));
    }
    let rho = (4.0 * siegel / (v * v)).cbrt();
    let p = v * u_tau / siegel - vdot / v;
    Ok(ShapeEquationTerms { v, vdot, curvature, u_tau, u_nu, siegel, rho, rho1: 0.5 * p * rho })
}

/// Third derivatives (phi''', theta''') of a shape curve from its
/// second-order data. Independent of the energy.
pub fn shape_ode_rhs(s: &ShapeState3, md: &MassDistribution) -> Result<[f64; 2]> {
    let sp = s.phi[0].sin().abs();
    if sp < CHART_LIMIT {
        return Err(Error::ChartSingularity { sin_phi: sp });
    }
    let terms = shape_equation_terms(s, md)?;
    let x = s.base_jet();
    let u = u_star(&x.map(|j| j.c[0]), md);
    let rho = terms.rho;
    let rho2 = rho * terms.v * terms.v / 4.0 - u / (rho * rho);
    let rj = Jet::<2>::from_coeffs([rho, terms.rho1]);
    let r1j = Jet::<2>::from_coeffs([terms.rho1, rho2]);
    let xj: V3<Jet<2>> = x.map(|j| Jet::from_coeffs([j.c[0], j.c[1]]));
    let vj: V3<Jet<2>> = x.map(|j| Jet::from_coeffs([j.c[1], 2.0 * j.c[2]]));
    let pj = r1j / rj * 2.0;
    let qj = -(rj * rj * rj).recip() * 4.0;
    let g = gradient(&xj, md);
    let v2 = dot(&vj, &vj);
    let f: V3<Jet<2>> = std::array::from_fn(|i| -(v2 * xj[i]) - pj * vj[i] - qj * g[i]);
    let base3 = x.map(|j| 6.0 * j.c[3]);
    let delta: [f64; 3] = std::array::from_fn(|i| f[i].c[1] - base3[i]);
    let (ep, et) = s.chart.basis(s.phi[0], s.theta[0]);
    Ok([dot(&delta, &ep), dot(&delta, &et) / (sp * sp)])
}

struct ShapeRhs<'a> {
    md: &'a MassDistribution,
    chart: Chart,
}

impl Rhs for ShapeRhs<'_> {
    fn eval(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let s = ShapeState3 { phi: [y[0], y[2], y[4]], theta: [y[1], y[3], y[5]], chart: self.chart };
        let j = shape_ode_rhs(&s, self.md)?;
        dy[0] = y[2];
        dy[1] = y[3];
        dy[2] = y[4];
        dy[3] = y[5];
        dy[4] = j[0];
        dy[5] = j[1];
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTrajectory {
    pub samples: Vec<(f64, ShapeState3)>,
    pub pieces: Vec<ChartedSegment>,
    /// Stretches carried across inflections by the moduli system.
    pub bridges: Vec<ModuliTrajectory>,
    pub chart_switches: usize,
    md: MassDistribution,
}

fn shape_vec(s: &ShapeState3) -> [f64; 6] {
    [s.phi[0], s.theta[0], s.phi[1], s.theta[1], s.phi[2], s.theta[2]]
}

fn shape_from(y: &[f64], chart: Chart) -> ShapeState3 {
    ShapeState3 { phi: [y[0], y[2], y[4]], theta: [y[1], y[3], y[5]], chart }
}

impl ShapeTrajectory {
    pub fn state_at(&self, t: f64) -> Option<ShapeState3> {
        if let Some(p) = find_piece(&self.pieces, t) {
            return Some(shape_from(&p.seg.eval(t), p.chart));
        }
        let b = self.bridges.iter().find(|b| {
            let (a, z) = b.t_range();
            (a.min(z)..=a.max(z)).contains(&t)
        })?;
        Some(ShapeState3::from_moduli(&b.state_at(t)?, &self.md))
    }

    pub fn point_at(&self, t: f64) -> Option<[f64; 3]> {
        self.state_at(t).map(|s| s.point())
    }
}
/// Below this geodesic curvature the size reconstruction is a near 0/0
/// quotient; the integrator hands over to the moduli system there.
const BRIDGE_ENTER: f64 = 1e-2;
const BRIDGE_EXIT: f64 = 3e-2;

/// The motion a shape state stands for, with its energy.
fn moduli_of(s: &ShapeState3, md: &MassDistribution) -> Result<ModuliState> {
    let terms = shape_equation_terms(s, md)?;
    let u = u_star(&s.point(), md) / terms.rho;
    let h = 0.5 * terms.rho1 * terms.rho1 + terms.rho * terms.rho * terms.v * terms.v / 8.0 - u;
    Ok(ModuliState {
        rho: terms.rho,
        phi: s.phi[0],
        theta: s.theta[0],
        rho1: terms.rho1,
        phi1: s.phi[1],
        theta1: s.theta[1],
        h,
        chart: s.chart,
    })
}

fn curvature_of(s: &ShapeState3, md: &MassDistribution) -> Option<f64> {
    shape_equation_terms(s, md).ok().map(|t| t.curvature)
}

/// Integrates the third-order shape equation as a first-order system in six
/// variables, rotating the chart near coordinate poles.
///
/// Where the geodesic curvature passes through zero the equation is singular
/// off the solution manifold, so a trajectory stepping into |K*| < 1e-2 is
/// continued from the last safe state by the equivalent moduli system until
/// |K*| > 3e-2, then resumed.
pub fn integrate_shape_ode(
    s0: &ShapeState3,
    md: &MassDistribution,
    t0: f64,
    t_end: f64,
    step: StepOptions,
) -> Result<ShapeTrajectory> {
    let mut s0 = *s0;
    if s0.phi[0].sin().abs() < CHART_SWITCH {
        s0 = s0.in_chart(Chart::centered_on(&s0.point()));
    }
    let mut traj = ShapeTrajectory {
        samples: vec![(t0, s0)],
        pieces: Vec::new(),
        bridges: Vec::new(),
        chart_switches: 0,
        md: md.clone(),
    };
    let dir = t_end - t0;
    if dir == 0.0 {
        return Ok(traj);
    }
    // validates the starting state
    shape_ode_rhs(&s0, md)?;
    let bridge_opts = ModuliOptions { step, initial_residual: 1e-8, ..ModuliOptions::default() };
    let mut st = Stepper::new(ShapeRhs { md, chart: s0.chart }, t0, &shape_vec(&s0), dir, step)?;
    let (mut t_at, mut at, mut bridge) = (t0, s0, false);
    loop {
        let k_at = curvature_of(&at, md).unwrap_or(0.0);
        if bridge || k_at.abs() < BRIDGE_ENTER {
            bridge = false;
            let m = moduli_of(&at, md)?;
            let exit = |x: &ModuliState| curvature_of(&ShapeState3::from_moduli(x, md), md).is_some_and(|k| k.abs() > BRIDGE_EXIT);
            let b = integrate_moduli_until(&m, md, t_at, t_end, &bridge_opts, exit)?;
            if let Some(ev) = b.event {
                return Err(Error::IrregularPoint(format!("shape curve hit a guard while bridging: {ev:?}")));
            }
            for smp in &b.samples[1..] {
                traj.samples.push((smp.t, ShapeState3::from_moduli(&smp.state, md)));
            }
            let (t, last) = *traj.samples.last().expect("non-empty");
            traj.bridges.push(b);
            (t_at, at) = (t, last);
            if (t_end - t) * dir <= 0.0 {
                break;
            }
            st.rhs_mut().chart = at.chart;
            st.reset(t, &shape_vec(&at))?;
            continue;
        }
        if (t_end - t_at) * dir <= 0.0 {
            break;
        }
        let seg = st.step(t_end)?;
        let chart = st.rhs_mut().chart;
        let end = shape_from(&seg.y1, chart);
        let k_end = curvature_of(&end, md).unwrap_or(0.0);
        if k_end.abs() < BRIDGE_ENTER || k_end * k_at < 0.0 {
            // discard the step and bridge from its start
            at = shape_from(&seg.y0, chart);
            bridge = true;
            continue;
        }
        traj.samples.push((seg.t1, end));
        t_at = seg.t1;
        traj.pieces.push(ChartedSegment { chart, seg });
        at = end;
        if end.phi[0].sin().abs() < CHART_SWITCH {
            let ch = Chart::centered_on(&end.point());
            at = end.in_chart(ch);
            st.rhs_mut().chart = ch;
            st.reset(st.t(), &shape_vec(&at))?;
            traj.chart_switches += 1;
        }
    }
    Ok(traj)
}

/// Residuals of the cone-surface geodesic equations at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeResidual {
    pub t: f64,
    /// Angle between the motion and the radial direction of the cone.
    pub alpha: f64,
    /// In-surface geodesic equation, scaled by its largest term.
    pub in_surface: f64,
    /// Normal equation, scaled by its largest term.
    pub normal: f64,
    /// sin^2(alpha) against S / (2 (rho h + U*)), relative.
    pub siegel_identity: f64,
}

impl ConeResidual {
    pub fn max_abs(&self) -> f64 {
        self.in_surface.abs().max(self.normal.abs()).max(self.siegel_identity.abs())
    }
}

fn cone_residual_at(t: f64, s: &ModuliState, md: &MassDistribution) -> ConeResidual {
    let h = s.h;
    let [rho, phi, theta] = moduli_flow_jet::<4>(s, md);
    let x = s.chart.point(phi, theta);
    let xd: V3<Jet<4>> = x.map(|c| c.differentiate());
    let v = dot(&xd, &xd).sqrt();
    let rho_d = rho.differentiate();
    let two_t = rho_d * rho_d + rho * rho * v * v / 4.0;
    let sbar = two_t.sqrt();
    let alpha = (rho * v / 2.0).atan2(rho_d);
    let pos = x.map(|c| c.c[0]);
    let u = u_star(&pos, md);
    let g = gradient(&pos, md);
    let r = rho.c[0];
    let denom = r * h + u;
    let sa = alpha.c[0].sin();
    let ca = alpha.c[0].cos();
    let vv = v.c[0];
    if vv <= 1e-300 {
        let gn = dot(&g, &g).sqrt();
        return ConeResidual {
            t,
            alpha: alpha.c[0],
            in_surface: 0.0,
            normal: gn / (gn + (u / denom).abs()),
            siegel_identity: 0.0,
        };
    }
    let vel = xd.map(|c| c.c[0]);
    let acc = xd.map(|c| c.c[1]);
    let tau = vel.map(|c| c / vv);
    let nu = cross(&pos, &tau);
    let u_tau = dot(&g, &tau);
    let u_nu = dot(&g, &nu);
    let curvature = dot(&cross(&pos, &vel), &acc) / (vv * vv * vv);
    let dalpha = alpha.c[1] / sbar.c[0];
    let dsigma = 0.5 * vv / sbar.c[0];
    let lnf_rho = (-u / (r * r)) / (h + u / r);
    let lnf_sigma = (2.0 * u_tau / r) / (h + u / r);
    let corr = 0.5 * (-sa * lnf_rho + ca / r * lnf_sigma);
    let in_surface = (dalpha + dsigma - corr) / (dalpha.abs() + dsigma.abs() + corr.abs());
    let n1 = 2.0 * sa * sa * curvature;
    let n2 = u_nu / denom;
    let normal = (n1 - n2) / (n1.abs() + n2.abs()).max(1e-300);
    let siegel = u_nu / curvature;
    let want = siegel / (2.0 * denom);
    ConeResidual {
        t,
        alpha: alpha.c[0],
        in_surface,
        normal,
        siegel_identity: (sa * sa - want) / want.abs().max(sa * sa).max(1e-300),
    }
}

/// Per-sample residuals of the cone-surface formulation.
pub fn cone_residuals(traj: &ModuliTrajectory, md: &MassDistribution) -> Vec<ConeResidual> {
    traj.samples.iter().map(|s| cone_residual_at(s.t, &s.state, md)).collect()
}

/// rho along the cone from the angle profile alpha(sigma):
/// d ln rho / d sigma = cot(alpha). Returns rho at each requested sigma.
pub fn rho_from_alpha<A>(alpha: A, sigma0: f64, rho0: f64, sigmas: &[f64]) -> Result<Vec<f64>>
where
    A: Fn(f64) -> f64,
{
    if !(rho0 != 0.0) {
        return Err(Error::InvalidInput("rho0 must be non-zero".into()));
    }
    let alpha = &alpha;
    let f = move |s: f64, _y: &[f64], dy: &mut [f64]| -> Result<()> {
        let a = alpha(s);
        if !(a > 0.0 && a < std::f64::consts::PI) {
            return Err(Error::IrregularPoint(format!("cusp: alpha = {a} at sigma = {s}")));
        }
        dy[0] = a.cos() / a.sin();
        Ok(())
    };
    let opts = StepOptions { rtol: 1e-12, atol: 1e-14, ..Default::default() };
    let mut out = Vec::with_capacity(sigmas.len());
    for &s in sigmas {
        if s == sigma0 {
            out.push(rho0);
            continue;
        }
        let sol = solve(f, sigma0, &[0.0], s, opts)?;
        let l = sol.segments.last().expect("non-empty").y1[0];
        out.push(rho0 * l.exp());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton_dynamics::{flow_jet, make_zero_momentum_state};
    use crate::potential::{critical_points, partials};
    use crate::shape_geometry::project_generic;
    use approx::assert_relative_eq;

    fn sample_state(md: &MassDistribution, h: f64) -> ModuliState {
        let p = ShapePoint::from_angles(1.1, 0.9);
        let (phi1, theta1) = (0.3, -0.25);
        let rho = 1.3;
        let rho1 = 0.2;
        let mut s = ModuliState { rho, phi: p.phi(), theta: p.theta(), rho1, phi1, theta1, h, chart: Chart::identity() };
        // pick h from the energy integral
        let u = u_star(&p.0, md) / rho;
        s.h = 0.5 * rho1 * rho1 + rho * rho * s.speed().powi(2) / 8.0 - u;
        s
    }

    #[test]
    fn lagrange_start_is_one_dimensional_kepler() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let cs = critical_points(&md).unwrap();
        let p = cs.lagrange_north;
        let mut s = ModuliState::from_motion(&ShapeMotion { rho: 0.8, rho_dot: 0.1, p: p.0, p_dot: [0.0; 3] }, 0.0);
        s.h = 0.005 - cs.lagrange_value / 0.8;
        let a = moduli_rhs(&s, &md).unwrap();
        assert!(a[1].abs() < 1e-12 && a[2].abs() < 1e-12);
        let kepler = -0.01 / 0.8 + (cs.lagrange_value / 0.8 + 2.0 * s.h) / 0.8;
        assert_relative_eq!(a[0], kepler, epsilon = 1e-14);
    }

    #[test]
    fn matches_euler_lagrange_form() {
        let md = MassDistribution::new(0.45, 0.2, 0.35).unwrap();
        let s = sample_state(&md, 0.0);
        let a = moduli_rhs(&s, &md).unwrap();
        // Lagrangian 1/2 rho'^2 + rho^2/8 (phi'^2 + sin^2 phi theta'^2) + U*/rho
        let pa = partials(s.phi, s.theta, &Chart::identity(), &md);
        let (sp, cp) = (s.phi.sin(), s.phi.cos());
        let v2 = s.phi1 * s.phi1 + sp * sp * s.theta1 * s.theta1;
        let rho_dd = s.rho * v2 / 4.0 - pa.u / (s.rho * s.rho);
        let phi_dd = (s.rho * s.rho / 4.0 * sp * cp * s.theta1 * s.theta1 + pa.u_phi / s.rho
            - s.rho * s.rho1 * s.phi1 / 2.0)
            / (s.rho * s.rho / 4.0);
        let m = s.rho * s.rho * sp * sp / 4.0;
        let mdot = (2.0 * s.rho * s.rho1 * sp * sp + 2.0 * s.rho * s.rho * sp * cp * s.phi1) / 4.0;
        let theta_dd = (pa.u_theta / s.rho - mdot * s.theta1) / m;
        assert_relative_eq!(a[0], rho_dd, epsilon = 1e-12);
        assert_relative_eq!(a[1], phi_dd, epsilon = 1e-12);
        assert_relative_eq!(a[2], theta_dd, epsilon = 1e-12);
    }

    #[test]
    fn matches_projected_newton_acceleration() {
        let md = MassDistribution::new(0.3, 0.3, 0.4).unwrap();
        let st = make_zero_momentum_state(
            [[1.0, 0.2], [-0.3, 0.9], [-0.5, -0.6]],
            [[0.2, -0.1], [0.1, 0.3], [-0.3, 0.1]],
            &md,
        )
        .unwrap();
        let s = ModuliState::from_triangle(&st.tri, &md).unwrap();
        let jet = flow_jet::<3>(&st.tri, &md);
        let (i, p) = project_generic(&jet, &md);
        let l: V3<Jet<3>> = {
            let r = s.chart.rot.transpose();
            std::array::from_fn(|k| p[0] * r[(k, 0)] + p[1] * r[(k, 1)] + p[2] * r[(k, 2)])
        };
        let phi = l[2].acos();
        let theta = l[1].atan2(l[0]);
        let rho = i.sqrt();
        let a = moduli_rhs(&s, &md).unwrap();
        assert_relative_eq!(a[0], rho.deriv(2), epsilon = 1e-11);
        assert_relative_eq!(a[1], phi.deriv(2), epsilon = 1e-11);
        assert_relative_eq!(a[2], theta.deriv(2), epsilon = 1e-11);
    }

    #[test]
    fn pole_chart_is_refused() {
        let md = MassDistribution::equal();
        let s = ModuliState { rho: 1.0, phi: 0.0, theta: 0.0, rho1: 0.0, phi1: 0.0, theta1: 0.0, h: -1.0, chart: Chart::identity() };
        assert!(matches!(moduli_rhs(&s, &md), Err(Error::ChartSingularity { .. })));
    }

    #[test]
    fn euler_ray_keeps_its_shape() {
        let md = MassDistribution::new(0.5, 0.3, 0.2).unwrap();
        let cs = critical_points(&md).unwrap();
        let e = cs.euler[1];
        let rho = 1.0;
        let h = -cs.euler_values[1] / rho;
        let s = ModuliState::from_motion(&ShapeMotion { rho, rho_dot: 0.0, p: e.0, p_dot: [0.0; 3] }, h);
        let opts = ModuliOptions::default();
        let tr = integrate_moduli(&s, &md, 0.0, 0.5, &opts).unwrap();
        for smp in &tr.samples {
            let q = smp.state.shape();
            assert!(q.distance(&e) < 1e-9);
        }
        assert!(tr.samples.last().unwrap().state.rho < 0.99);
    }

    #[test]
    fn hill_start_accelerates_along_gradient() {
        let md = MassDistribution::new(0.2, 0.5, 0.3).unwrap();
        let p = ShapePoint::from_angles(0.9, 2.0);
        let h = -1.0;
        let rho = u_star(&p.0, &md) / -h;
        let s = ModuliState::from_motion(&ShapeMotion { rho, rho_dot: 0.0, p: p.0, p_dot: [0.0; 3] }, h);
        assert!(s.speed() == 0.0);
        let a = moduli_rhs(&s, &md).unwrap();
        let (ep, et) = s.chart.basis(s.phi, s.theta);
        let acc: [f64; 3] = std::array::from_fn(|i| ep[i] * a[1] + et[i] * a[2]);
        let g = gradient(&p.0, &md);
        let c = dot(&acc, &g) / (dot(&acc, &acc) * dot(&g, &g)).sqrt();
        assert_relative_eq!(c, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shape_jerk_matches_flow() {
        let md = MassDistribution::new(0.45, 0.2, 0.35).unwrap();
        for h in [-0.1, 0.0, 1.0] {
            let mut s = sample_state(&md, 0.0);
            // rescale speeds to hit the target energy
            let u = u_star(&s.shape().0, &md) / s.rho;
            let kin = 0.5 * s.rho1 * s.rho1 + s.rho * s.rho * s.speed().powi(2) / 8.0;
            let f = ((h + u) / kin).sqrt();
            s.rho1 *= f;
            s.phi1 *= f;
            s.theta1 *= f;
            s.h = h;
            let sh = ShapeState3::from_moduli(&s, &md);
            let j = shape_ode_rhs(&sh, &md).unwrap();
            let [_, phi, theta] = moduli_flow_jet::<4>(&s, &md);
            assert_relative_eq!(j[0], phi.deriv(3), max_relative = 1e-10, epsilon = 1e-12);
            assert_relative_eq!(j[1], theta.deriv(3), max_relative = 1e-10, epsilon = 1e-12);
            let terms = shape_equation_terms(&sh, &md).unwrap();
            assert_relative_eq!(terms.rho, s.rho, max_relative = 1e-12);
            assert_relative_eq!(terms.rho1, s.rho1, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn shape_jerk_scales_with_time() {
        let md = MassDistribution::new(0.45, 0.2, 0.35).unwrap();
        let s = sample_state(&md, 0.0);
        let sh = ShapeState3::from_moduli(&s, &md);
        let a = 1.7;
        let mut fast = sh;
        fast.phi[1] *= a;
        fast.theta[1] *= a;
        fast.phi[2] *= a * a;
        fast.theta[2] *= a * a;
        let j0 = shape_ode_rhs(&sh, &md).unwrap();
        let j1 = shape_ode_rhs(&fast, &md).unwrap();
        assert_relative_eq!(j1[0], a.powi(3) * j0[0], max_relative = 1e-11);
        assert_relative_eq!(j1[1], a.powi(3) * j0[1], max_relative = 1e-11);
    }

    #[test]
    fn gradient_line_is_exceptional() {
        let md = MassDistribution::equal();
        // the meridian through b1 is a symmetry line, hence a gradient line
        let s = ShapeState3 { phi: [1.0, 1.0, 0.0], theta: [0.0, 0.0, 0.0], chart: Chart::identity() };
        match shape_ode_rhs(&s, &md) {
            Err(Error::IrregularPoint(m)) => assert!(m.contains("exceptional")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rho_from_constant_alpha() {
        let r = rho_from_alpha(|_| std::f64::consts::FRAC_PI_2, 0.0, 2.0, &[0.5, 1.0]).unwrap();
        assert_relative_eq!(r[0], 2.0, epsilon = 1e-13);
        assert_relative_eq!(r[1], 2.0, epsilon = 1e-13);
        let r = rho_from_alpha(|_| std::f64::consts::FRAC_PI_4, 0.0, 1.0, &[0.7, -0.4]).unwrap();
        assert_relative_eq!(r[0], 0.7f64.exp(), max_relative = 1e-11);
        assert_relative_eq!(r[1], (-0.4f64).exp(), max_relative = 1e-11);
        assert!(rho_from_alpha(|s| 1.0 - s, 0.0, 1.0, &[2.0]).is_err());
    }

    #[test]
    fn shape_ode_crosses_inflections() {
        let md = MassDistribution::new(0.45, 0.33, 0.22).unwrap();
        let s = sample_state(&md, 0.0);
        let opts = ModuliOptions { step: StepOptions { rtol: 1e-12, atol: 1e-14, ..StepOptions::default() }, ..ModuliOptions::default() };
        let traj = integrate_moduli(&s, &md, 0.0, 3.0, &opts).unwrap();
        let k: Vec<f64> = traj.samples.iter().map(|x| curvature_of(&ShapeState3::from_moduli(&x.state, &md), &md).unwrap()).collect();
        assert!(k.windows(2).any(|w| w[0] * w[1] < 0.0), "no inflection on the test arc");
        let st = integrate_shape_ode(&ShapeState3::from_moduli(&s, &md), &md, 0.0, 3.0, opts.step).unwrap();
        assert!(!st.bridges.is_empty());
        for t in (0..=300).map(|i| 0.01 * i as f64) {
            let a = ShapePoint(st.point_at(t).unwrap());
            assert!(a.distance(&traj.state_at(t).unwrap().shape()) < 1e-8, "t = {t}");
        }
    }
}