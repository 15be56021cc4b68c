//! Fundamental segments between consecutive latitude extrema and the
//! correspondence carrying the data at one extremum to the next.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::classify::PointClass;
use super::frame::{curve_frame, CurveFrame, CurveSample, DerivativeSource, JET_ORDER};
use super::latitude::east_direction;
use super::monotone::{monotonicity_report, MonotonicityReport};
use crate::error::{Error, Result};
use crate::jet::dot;
use crate::local_series::{initial_data_from_intrinsics, IntrinsicData};
use crate::newton_dynamics::GuardEvent;
use crate::reduced_dynamics::{integrate_moduli, moduli_shape_jet, ModuliOptions, ModuliTrajectory};
use crate::shape_geometry::{MassDistribution, ShapePoint};

/// Data (phi, theta, S0, S1, eps) at a regular latitude extremum. `eps` is 0
/// for eastward and 1 for westward motion along the latitude circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuple5 {
    pub phi: f64,
    pub theta: f64,
    pub s0: f64,
    pub s1: f64,
    pub eps: u8,
}

impl Tuple5 {
    pub fn point(&self) -> ShapePoint {
        ShapePoint::from_angles(self.phi, self.theta)
    }

    /// Reflection in the equator; Siegel data and direction index are kept.
    pub fn mirror(&self) -> Self {
        Tuple5 { phi: PI - self.phi, ..*self }
    }

    /// Largest componentwise difference (angles compared on the circle).
    pub fn distance(&self, other: &Tuple5) -> f64 {
        let dth = (self.theta - other.theta).rem_euclid(2.0 * PI);
        let dth = dth.min(2.0 * PI - dth);
        let eps = if self.eps == other.eps { 0.0 } else { f64::INFINITY };
        [(self.phi - other.phi).abs(), dth, (self.s0 - other.s0).abs(), (self.s1 - other.s1).abs(), eps]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EndKind {
    Extremum,
    BinaryCollision,
    /// The data ran out before the next extremum.
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentEnd {
    pub t: f64,
    pub point: [f64; 3],
    pub kind: EndKind,
    /// Present at regular extrema only.
    pub tuple: Option<Tuple5>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalSegment {
    pub start: SegmentEnd,
    pub end: SegmentEnd,
    /// Indices of the first and last stored samples inside the segment.
    pub samples: (usize, usize),
    /// Set when an end is irregular or not an extremum.
    pub flagged: bool,
}

impl FundamentalSegment {
    pub fn is_complete(&self) -> bool {
        self.start.kind == EndKind::Extremum && self.end.kind == EndKind::Extremum
    }
}

fn frame_at(traj: &ModuliTrajectory, t: f64, md: &MassDistribution) -> Result<CurveFrame> {
    let st = traj
        .state_at(t)
        .ok_or_else(|| Error::InvalidInput(format!("t = {t} outside the trajectory")))?;
    let (rho, x) = moduli_shape_jet::<JET_ORDER>(&st, md);
    let s = CurveSample::from_jet(t, &x, DerivativeSource::FlowJet, Some(rho.c[0]));
    curve_frame(&[s], md, 0)
}

/// The 5-tuple of a regular frame, `None` at irregular points.
pub fn tuple_of(frame: &CurveFrame, md: &MassDistribution) -> Option<Tuple5> {
    let g = frame.geometry?;
    if !(g.siegel > 0.0 && g.siegel.is_finite()) {
        return None;
    }
    let p = ShapePoint(frame.p);
    let east = east_direction(&frame.p, md);
    Some(Tuple5 {
        phi: p.phi(),
        theta: p.theta(),
        s0: g.siegel,
        s1: g.siegel_prime,
        eps: if dot(&g.tau, &east) >= 0.0 { 0 } else { 1 },
    })
}

fn end_at(traj: &ModuliTrajectory, t: f64, kind: EndKind, md: &MassDistribution) -> SegmentEnd {
    let frame = frame_at(traj, t, md).ok();
    let point = traj.state_at(t).map(|s| s.shape().0).unwrap_or([f64::NAN; 3]);
    let tuple = match kind {
        EndKind::Extremum => frame.as_ref().and_then(|f| tuple_of(f, md)),
        _ => None,
    };
    SegmentEnd { t, point, kind, tuple }
}

/// Split a moduli trajectory at the extrema listed in `report`.
pub fn fundamental_segments(
    traj: &ModuliTrajectory,
    md: &MassDistribution,
    report: &MonotonicityReport,
) -> Vec<FundamentalSegment> {
    let (t0, t1) = traj.t_range();
    let mut cuts: Vec<(f64, EndKind)> = vec![(t0, EndKind::Truncated)];
    cuts.extend(report.extrema.iter().map(|e| (e.t, EndKind::Extremum)));
    let last = match traj.event {
        Some(GuardEvent::BinaryCollision { .. }) => EndKind::BinaryCollision,
        _ => EndKind::Truncated,
    };
    cuts.push((t1, last));
    let ts: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    cuts.windows(2)
        .filter(|w| w[1].0 > w[0].0)
        .map(|w| {
            let start = end_at(traj, w[0].0, w[0].1, md);
            let end = end_at(traj, w[1].0, w[1].1, md);
            let i0 = ts.partition_point(|&t| t < w[0].0);
            let i1 = ts.partition_point(|&t| t <= w[1].0).saturating_sub(1).max(i0);
            let regular = |e: &SegmentEnd| e.kind == EndKind::Extremum && e.tuple.is_some();
            FundamentalSegment { flagged: !(regular(&start) && regular(&end)), start, end, samples: (i0, i1) }
        })
        .collect()
}

/// Image of a regular extremum under the segment correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaImage {
    /// Data at the next extremum.
    pub next: Tuple5,
    /// `next` reflected in the equator.
    pub mirrored: Tuple5,
    /// Time to reach the next extremum.
    pub duration: f64,
    pub class: PointClass,
}

/// Re-integrate from the motion determined by `tuple` at energy `h` to the
/// next latitude extremum. At h = 0 the size `rho0` must be given.
pub fn theta_map(
    tuple: &Tuple5,
    h: f64,
    rho0: Option<f64>,
    md: &MassDistribution,
    t_max: f64,
) -> Result<ThetaImage> {
    let p = tuple.point();
    let east = east_direction(&p.0, md);
    let dir = if tuple.eps == 0 { east } else { east.map(|x| -x) };
    let d = IntrinsicData::new(&p, &dir, tuple.s0, tuple.s1, h, md)?;
    let rec = initial_data_from_intrinsics(&d)?;
    let lift = match (rec.unique(), rho0) {
        (Some(l), _) => l,
        (None, Some(r)) => rec.with_size(r)?,
        (None, None) => return Err(Error::InvalidInput("zero energy needs the initial size".into())),
    };
    let s0 = lift.to_moduli(&d);
    let traj = integrate_moduli(&s0, md, 0.0, t_max, &ModuliOptions::default())?;
    let rep = monotonicity_report(&traj, md);
    // the start is itself an extremum; skip it
    let t_skip = 1e-8 * t_max;
    let ext = rep
        .extrema
        .iter()
        .find(|e| e.t > t_skip)
        .ok_or_else(|| Error::NoConvergence(format!("no latitude extremum within t = {t_max}")))?;
    let frame = frame_at(&traj, ext.t, md)?;
    let next = tuple_of(&frame, md).ok_or_else(|| Error::IrregularPoint("next extremum is irregular".into()))?;
    let class = PointClass::Regular { order: frame.geometry.map_or(0, |g| g.siegel_order) };
    Ok(ThetaImage { next, mirrored: next.mirror(), duration: ext.t, class })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced_dynamics::ModuliState;
    use crate::shape_analysis::m_latitude;

    #[test]
    fn segments_alternate_and_theta_reproduces_next_extremum() {
        let md = MassDistribution::new(0.4, 0.35, 0.25).unwrap();
        let p = ShapePoint::from_angles(1.0, 0.8);
        let s = ModuliState::with_energy(0.12, &p, &[0.2, 0.9, -0.3], 0.0, -1.0, &md).unwrap();
        let traj = integrate_moduli(&s, &md, 0.0, 2.0, &ModuliOptions::default()).unwrap();
        let rep = monotonicity_report(&traj, &md);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.extrema.len() >= 3, "{} extrema", rep.extrema.len());
        let segs = fundamental_segments(&traj, &md, &rep);
        let full: Vec<_> = segs.iter().filter(|s| s.is_complete() && !s.flagged).collect();
        assert!(full.len() >= 2);
        for sg in &full {
            let a = m_latitude(&ShapePoint(sg.start.point), &md);
            let b = m_latitude(&ShapePoint(sg.end.point), &md);
            assert!(a * b < 0.0, "ends on the same hemisphere");
            let img = theta_map(&sg.start.tuple.unwrap(), -1.0, None, &md, 2.0).unwrap();
            let want = sg.end.tuple.unwrap();
            assert!(img.next.distance(&want) < 1e-4, "{:?} vs {want:?}", img.next);
            assert!((img.duration - (sg.end.t - sg.start.t)).abs() < 1e-6);
            assert!(img.mirrored.mirror().distance(&img.next) < 1e-15);
        }
    }
}
