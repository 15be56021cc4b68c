//! Newton's equations for three planar bodies: the ground truth that every
//! reduced system is compared against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::ode::{locate_crossing, DenseSolution, Segment, StepOptions, Stepper};
use crate::shape_geometry::{MassDistribution, TriangleState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub t: f64,
    pub tri: TriangleState,
}

/// Conserved and derived quantities of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub inertia: f64,
    pub inertia_dot: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub energy: f64,
    pub angular_momentum: f64,
    /// Radial part of the kinetic energy.
    pub t_rho: f64,
    /// Shape part of the kinetic energy (kinetic minus radial and rotational).
    pub t_sigma: f64,
    /// |delta ^ delta_dot|^2 = 2 I T - I_dot^2 / 4
    pub wedge: f64,
    /// Lagrange-Jacobi residual from the continuous output, relative to
    /// max(1, |2(U + 2h)|); `None` without a trajectory.
    pub lj_residual: Option<f64>,
}

pub(crate) fn cube_dist<S: Scalar>(dx: S, dy: S) -> S {
    (dx * dx + dy * dy).powf(-1.5)
}

/// Accelerations for any scalar type (no collision check).
pub fn accelerations<S: Scalar>(pos: &[[S; 2]; 3], md: &MassDistribution) -> [[S; 2]; 3] {
    let m = md.masses();
    let mut acc = [[S::zero(); 2]; 3];
    for (i, j) in [(0usize, 1usize), (1, 2), (2, 0)] {
        let dx = pos[j][0] - pos[i][0];
        let dy = pos[j][1] - pos[i][1];
        let w = cube_dist(dx, dy);
        acc[i][0] += dx * w * m[j];
        acc[i][1] += dy * w * m[j];
        acc[j][0] -= dx * w * m[i];
        acc[j][1] -= dy * w * m[i];
    }
    acc
}

pub fn newton_rhs(state: &SystemState, md: &MassDistribution) -> Result<[[f64; 2]; 3]> {
    let r = state.tri.distances();
    for (k, (i, j)) in [(1, 2), (2, 3), (3, 1)].into_iter().enumerate() {
        if !(r[k] > 0.0) {
            return Err(Error::CoincidentBodies { i, j });
        }
    }
    Ok(accelerations(&state.tri.pos, md))
}

pub fn potential_energy(tri: &TriangleState, md: &MassDistribution) -> f64 {
    let m = md.masses();
    let r = tri.distances();
    m[0] * m[1] / r[0] + m[1] * m[2] / r[1] + m[2] * m[0] / r[2]
}

pub fn kinetic_energy(tri: &TriangleState, md: &MassDistribution) -> f64 {
    let m = md.masses();
    0.5 * (0..3).map(|i| m[i] * (tri.vel[i][0].powi(2) + tri.vel[i][1].powi(2))).sum::<f64>()
}

pub fn energy(tri: &TriangleState, md: &MassDistribution) -> f64 {
    kinetic_energy(tri, md) - potential_energy(tri, md)
}

pub fn diagnostics(state: &SystemState, md: &MassDistribution) -> Diagnostics {
    let tri = &state.tri;
    let m = md.masses();
    let inertia = tri.inertia(md);
    let inertia_dot = 2.0
        * (0..3)
            .map(|i| m[i] * (tri.pos[i][0] * tri.vel[i][0] + tri.pos[i][1] * tri.vel[i][1]))
            .sum::<f64>();
    let kinetic = kinetic_energy(tri, md);
    let potential = potential_energy(tri, md);
    let omega = tri.angular_momentum(md);
    let t_rho = inertia_dot * inertia_dot / (8.0 * inertia);
    let t_rot = omega * omega / (2.0 * inertia);
    Diagnostics {
        inertia,
        inertia_dot,
        kinetic,
        potential,
        energy: kinetic - potential,
        angular_momentum: omega,
        t_rho,
        t_sigma: kinetic - t_rho - t_rot,
        wedge: 2.0 * inertia * kinetic - inertia_dot * inertia_dot / 4.0,
        lj_residual: None,
    }
}

/// Diagnostics at `t` with the Lagrange-Jacobi residual measured by a
/// fourth-order central difference of I_dot on the continuous output.
pub fn diagnostics_along(traj: &NewtonTrajectory, t: f64, md: &MassDistribution) -> Option<Diagnostics> {
    let y = traj.dense.eval(t)?;
    let st = SystemState { t, tri: TriangleState::from_slice(&y) };
    let mut d = diagnostics(&st, md);
    let (a, b) = (traj.dense.t_start()?, traj.dense.t_end()?);
    let (lo, hi) = (a.min(b), a.max(b));
    // step tied to the fastest pair's orbital time scale
    let (m, r) = (md.masses(), st.tri.distances());
    let pair_time = (0..3)
        .map(|k| (r[k].powi(3) / (m[k] + m[(k + 1) % 3])).sqrt())
        .fold(f64::INFINITY, f64::min);
    let delta = 2e-3 * (1.0 + t.abs()).min(pair_time).min((hi - lo) / 4.0);
    if t - 2.0 * delta >= lo && t + 2.0 * delta <= hi {
        let idot = |s: f64| {
            let y = traj.dense.eval(s).expect("inside");
            let tri = TriangleState::from_slice(&y);
            diagnostics(&SystemState { t: s, tri }, md).inertia_dot
        };
        let iddot = (-idot(t + 2.0 * delta) + 8.0 * idot(t + delta) - 8.0 * idot(t - delta)
            + idot(t - 2.0 * delta))
            / (12.0 * delta);
        let want = 2.0 * (d.potential + 2.0 * d.energy);
        d.lj_residual = Some((iddot - want).abs() / want.abs().max(1.0));
    }
    Some(d)
}

/// Removes the centre-of-mass motion and the rigid rotation.
pub fn make_zero_momentum_state(
    positions: [[f64; 2]; 3],
    velocities: [[f64; 2]; 3],
    md: &MassDistribution,
) -> Result<SystemState> {
    let mut tri = TriangleState::centered(positions, velocities, md);
    let inertia = tri.inertia(md);
    if !(inertia > 0.0) {
        return Err(Error::Degenerate("all bodies coincide".into()));
    }
    let w = tri.angular_momentum(md) / inertia;
    for i in 0..3 {
        let [x, y] = tri.pos[i];
        tri.vel[i][0] += w * y;
        tri.vel[i][1] -= w * x;
    }
    Ok(SystemState { t: 0.0, tri })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardOptions {
    /// Binary-collision guard on the smallest mutual distance.
    pub r_min: f64,
    /// Triple-collision guard on the hyper-radius.
    pub rho_min: f64,
    /// Escape guard on the hyper-radius.
    pub rho_max: f64,
}

impl Default for GuardOptions {
    fn default() -> Self {
        GuardOptions { r_min: 1e-4, rho_min: 1e-4, rho_max: 1e4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GuardEvent {
    /// Bodies `pair` (1-based) closer than `r_min`.
    BinaryCollision { t: f64, pair: (usize, usize) },
    TripleCollision { t: f64 },
    Escape { t: f64 },
}

impl GuardEvent {
    pub fn t(&self) -> f64 {
        match *self {
            GuardEvent::BinaryCollision { t, .. }
            | GuardEvent::TripleCollision { t }
            | GuardEvent::Escape { t } => t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NewtonOptions {
    pub step: StepOptions,
    pub guards: GuardOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonTrajectory {
    /// State at the end of every accepted step, starting with the initial one.
    pub samples: Vec<SystemState>,
    pub dense: DenseSolution,
    pub event: Option<GuardEvent>,
}

impl NewtonTrajectory {
    pub fn state_at(&self, t: f64) -> Option<SystemState> {
        self.dense.eval(t).map(|y| SystemState { t, tri: TriangleState::from_slice(&y) })
    }

    pub fn last(&self) -> &SystemState {
        self.samples.last().expect("trajectory has its initial state")
    }
}

fn flat_rhs(md: &MassDistribution) -> impl FnMut(f64, &[f64], &mut [f64]) -> Result<()> + '_ {
    move |_t, y, dy| {
        let tri = TriangleState::from_slice(y);
        let acc = newton_rhs(&SystemState { t: 0.0, tri }, md)?;
        dy[..6].copy_from_slice(&y[6..]);
        for i in 0..3 {
            dy[6 + 2 * i] = acc[i][0];
            dy[6 + 2 * i + 1] = acc[i][1];
        }
        Ok(())
    }
}

/// Signed guard functions; an event fires when one becomes negative.
fn guard_values(y: &[f64], md: &MassDistribution, g: &GuardOptions) -> [f64; 5] {
    let tri = TriangleState::from_slice(y);
    let r = tri.distances();
    let rho = tri.inertia(md).sqrt();
    [r[0] - g.r_min, r[1] - g.r_min, r[2] - g.r_min, rho - g.rho_min, g.rho_max - rho]
}

pub(crate) fn guard_event(
    seg: &Segment,
    guards: &[f64; 5],
    values: impl Fn(&[f64]) -> [f64; 5],
) -> Option<GuardEvent> {
    let mut best: Option<(f64, usize)> = None;
    for (k, &g) in guards.iter().enumerate() {
        if g < 0.0 {
            let tc = locate_crossing(seg, |_, y| values(y)[k], 1e-13 * (1.0 + seg.t1.abs()));
            let earlier = match best {
                None => true,
                Some((tb, _)) => (tc - tb) * seg.h().signum() < 0.0,
            };
            if earlier {
                best = Some((tc, k));
            }
        }
    }
    best.map(|(t, k)| match k {
        0 => GuardEvent::BinaryCollision { t, pair: (1, 2) },
        1 => GuardEvent::BinaryCollision { t, pair: (2, 3) },
        2 => GuardEvent::BinaryCollision { t, pair: (3, 1) },
        3 => GuardEvent::TripleCollision { t },
        _ => GuardEvent::Escape { t },
    })
}

/// Integrates from `state.t` to `t_end` (either direction) with guards.
pub fn integrate_newton(
    state: &SystemState,
    md: &MassDistribution,
    t_end: f64,
    opts: &NewtonOptions,
) -> Result<NewtonTrajectory> {
    let y0 = state.tri.to_vec();
    let dir = t_end - state.t;
    let mut traj = NewtonTrajectory { samples: vec![*state], dense: DenseSolution::default(), event: None };
    if dir == 0.0 {
        return Ok(traj);
    }
    let mut st = Stepper::new(flat_rhs(md), state.t, &y0, dir, opts.step)?;
    let vals = |y: &[f64]| guard_values(y, md, &opts.guards);
    while (t_end - st.t()) * dir > 0.0 {
        let mut seg = st.step(t_end)?;
        let g = vals(&seg.y1);
        if let Some(ev) = guard_event(&seg, &g, vals) {
            let y = seg.eval(ev.t());
            traj.samples.push(SystemState { t: ev.t(), tri: TriangleState::from_slice(&y) });
            seg = truncate(seg, ev.t());
            traj.dense.push(seg);
            traj.event = Some(ev);
            return Ok(traj);
        }
        traj.samples.push(SystemState { t: seg.t1, tri: TriangleState::from_slice(&seg.y1) });
        traj.dense.push(seg);
    }
    Ok(traj)
}

pub(crate) fn truncate(seg: Segment, t: f64) -> Segment {
    seg.truncated_at(t)
}

/// Taylor jets of positions at `state`, exact to order N-1 in time.
pub fn flow_jet<const N: usize>(tri: &TriangleState, md: &MassDistribution) -> [[Jet<N>; 2]; 3] {
    let mut pos: [[Jet<N>; 2]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|d| {
            let mut c = [0.0; N];
            c[0] = tri.pos[i][d];
            if N > 1 {
                c[1] = tri.vel[i][d];
            }
            Jet::from_coeffs(c)
        })
    });
    for n in 0..N.saturating_sub(2) {
        let acc = accelerations(&pos, md);
        for i in 0..3 {
            for d in 0..2 {
                pos[i][d].c[n + 2] = acc[i][d].c[n] / ((n + 1) * (n + 2)) as f64;
            }
        }
    }
    pos
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equilateral_accelerations_point_inwards() {
        let md = MassDistribution::equal();
        let s = 3f64.sqrt() / 2.0;
        let tri = TriangleState { pos: [[1.0, 0.0], [-0.5, s], [-0.5, -s]], vel: [[0.0; 2]; 3] };
        let acc = newton_rhs(&SystemState { t: 0.0, tri }, &md).unwrap();
        let mag0 = (acc[0][0].powi(2) + acc[0][1].powi(2)).sqrt();
        for i in 0..3 {
            let mag = (acc[i][0].powi(2) + acc[i][1].powi(2)).sqrt();
            assert_relative_eq!(mag, mag0, epsilon = 1e-14);
            let along = acc[i][0] * tri.pos[i][0] + acc[i][1] * tri.pos[i][1];
            assert_relative_eq!(along, -mag, epsilon = 1e-14);
        }
    }

    #[test]
    fn collinear_symmetric_matches_kepler() {
        // m2 at the centre, m1 and m3 at -d and d
        let md = MassDistribution::equal();
        let m = 1.0 / 3.0;
        let d = 0.7;
        let tri = TriangleState { pos: [[-d, 0.0], [0.0, 0.0], [d, 0.0]], vel: [[0.0; 2]; 3] };
        let acc = newton_rhs(&SystemState { t: 0.0, tri }, &md).unwrap();
        let want = m / (d * d) + m / (4.0 * d * d);
        assert_relative_eq!(acc[0][0], want, epsilon = 1e-14);
        assert_relative_eq!(acc[2][0], -want, epsilon = 1e-14);
        assert!(acc[1][0].abs() < 1e-15);
    }

    #[test]
    fn coincident_bodies_error() {
        let md = MassDistribution::equal();
        let tri = TriangleState { pos: [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]], vel: [[0.0; 2]; 3] };
        assert_eq!(
            newton_rhs(&SystemState { t: 0.0, tri }, &md),
            Err(Error::CoincidentBodies { i: 1, j: 2 })
        );
    }

    #[test]
    fn rest_state_energy() {
        let md = MassDistribution::new(0.2, 0.3, 0.5).unwrap();
        let st = make_zero_momentum_state([[1.0, 0.0], [0.0, 1.0], [-0.4, -0.3]], [[0.0; 2]; 3], &md).unwrap();
        let d = diagnostics(&st, &md);
        assert_eq!(d.kinetic, 0.0);
        assert_relative_eq!(d.energy, -d.potential);
    }

    #[test]
    fn rigid_rotation_is_removed() {
        let md = MassDistribution::new(0.2, 0.3, 0.5).unwrap();
        let pos = [[1.0, 0.0], [0.0, 1.0], [-0.4, -0.3]];
        let clean = make_zero_momentum_state(pos, [[0.0; 2]; 3], &md).unwrap();
        let w = 0.8;
        let vel = clean.tri.pos.map(|[x, y]| [-w * y, w * x]);
        let st = make_zero_momentum_state(clean.tri.pos, vel, &md).unwrap();
        for v in st.tri.vel {
            assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        }
    }

    #[test]
    fn flow_jet_matches_integration() {
        let md = MassDistribution::new(0.2, 0.3, 0.5).unwrap();
        let st = make_zero_momentum_state(
            [[1.0, 0.0], [0.0, 1.0], [-0.4, -0.3]],
            [[0.1, 0.2], [-0.3, 0.1], [0.0, 0.0]],
            &md,
        )
        .unwrap();
        let jet = flow_jet::<8>(&st.tri, &md);
        let dt = 0.01;
        let traj = integrate_newton(&st, &md, dt, &NewtonOptions::default()).unwrap();
        let end = traj.last();
        for i in 0..3 {
            for d in 0..2 {
                assert!((jet[i][d].eval(dt) - end.tri.pos[i][d]).abs() < 1e-12);
            }
        }
    }
}
