//! Uniform access to shape curves produced by the different integrators,
//! and exact derivative samples along them.

use crate::jet::{Jet, V3};
use crate::newton_dynamics::{flow_jet, NewtonTrajectory};
use crate::reduced_dynamics::{moduli_shape_jet, shape_ode_rhs, ModuliTrajectory, ShapeTrajectory};
use crate::shape_geometry::{project_generic, project_motion, MassDistribution};

use super::frame::{CurveSample, DerivativeSource, JET_ORDER};

/// A time-parametrized curve on the shape sphere.
pub trait ShapeCurve {
    fn t_range(&self) -> (f64, f64);
    /// Natural sampling times (integrator step ends), in order.
    fn knots(&self) -> Vec<f64>;
    fn point(&self, t: f64) -> [f64; 3];
    fn velocity(&self, t: f64) -> [f64; 3];
}

impl ShapeCurve for ModuliTrajectory {
    fn t_range(&self) -> (f64, f64) {
        ModuliTrajectory::t_range(self)
    }
    fn knots(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
    fn point(&self, t: f64) -> [f64; 3] {
        self.state_at(t).expect("t inside trajectory").shape().0
    }
    fn velocity(&self, t: f64) -> [f64; 3] {
        self.state_at(t).expect("t inside trajectory").shape_velocity()
    }
}

impl ShapeCurve for ShapeTrajectory {
    fn t_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples.last().expect("non-empty").0)
    }
    fn knots(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }
    fn point(&self, t: f64) -> [f64; 3] {
        self.point_at(t).expect("t inside trajectory")
    }
    fn velocity(&self, t: f64) -> [f64; 3] {
        let s = self.state_at(t).expect("t inside trajectory");
        let (ep, et) = s.chart.basis(s.phi[0], s.theta[0]);
        std::array::from_fn(|i| ep[i] * s.phi[1] + et[i] * s.theta[1])
    }
}

/// A Newton trajectory seen through the shape projection.
pub struct ProjectedNewton<'a> {
    pub traj: &'a NewtonTrajectory,
    pub md: &'a MassDistribution,
}

impl ShapeCurve for ProjectedNewton<'_> {
    fn t_range(&self) -> (f64, f64) {
        (self.traj.samples[0].t, self.traj.last().t)
    }
    fn knots(&self) -> Vec<f64> {
        self.traj.samples.iter().map(|s| s.t).collect()
    }
    fn point(&self, t: f64) -> [f64; 3] {
        let st = self.traj.state_at(t).expect("t inside trajectory");
        project_motion(&st.tri, self.md).expect("not a triple collision").p
    }
    fn velocity(&self, t: f64) -> [f64; 3] {
        let st = self.traj.state_at(t).expect("t inside trajectory");
        project_motion(&st.tri, self.md).expect("not a triple collision").p_dot
    }
}

/// A curve given by closures; used for synthetic checks.
pub struct FnCurve<P, V> {
    pub range: (f64, f64),
    pub n_knots: usize,
    pub point: P,
    pub velocity: V,
}

impl<P: Fn(f64) -> [f64; 3], V: Fn(f64) -> [f64; 3]> ShapeCurve for FnCurve<P, V> {
    fn t_range(&self) -> (f64, f64) {
        self.range
    }
    fn knots(&self) -> Vec<f64> {
        let (a, b) = self.range;
        (0..=self.n_knots).map(|k| a + (b - a) * k as f64 / self.n_knots as f64).collect()
    }
    fn point(&self, t: f64) -> [f64; 3] {
        (self.point)(t)
    }
    fn velocity(&self, t: f64) -> [f64; 3] {
        (self.velocity)(t)
    }
}

/// Exact-jet samples at the stored states of a moduli trajectory.
pub fn moduli_samples(traj: &ModuliTrajectory, md: &MassDistribution) -> Vec<CurveSample> {
    traj.samples
        .iter()
        .map(|s| {
            let (rho, x) = moduli_shape_jet::<JET_ORDER>(&s.state, md);
            CurveSample::from_jet(s.t, &x, DerivativeSource::FlowJet, Some(rho.c[0]))
        })
        .collect()
}

/// Exact-jet samples at the stored states of a Newton trajectory.
pub fn newton_samples(traj: &NewtonTrajectory, md: &MassDistribution) -> Vec<CurveSample> {
    traj.samples
        .iter()
        .map(|s| {
            let pos = flow_jet::<JET_ORDER>(&s.tri, md);
            let (i, x): (Jet<JET_ORDER>, V3<Jet<JET_ORDER>>) = project_generic(&pos, md);
            CurveSample::from_jet(s.t, &x, DerivativeSource::FlowJet, Some(i.c[0].sqrt()))
        })
        .collect()
}

/// Samples of a shape-equation trajectory with exact third derivatives.
pub fn shape_ode_samples(traj: &ShapeTrajectory, md: &MassDistribution) -> Vec<CurveSample> {
    traj.samples
        .iter()
        .filter_map(|(t, s)| {
            let j = shape_ode_rhs(s, md).ok()?;
            let mut c = CurveSample::from_angles(
                *t,
                [s.phi[0], s.phi[1], s.phi[2], j[0]],
                [s.theta[0], s.theta[1], s.theta[2], j[1]],
                &s.chart,
            );
            c.source = DerivativeSource::FlowJet;
            Some(c)
        })
        .collect()
}

