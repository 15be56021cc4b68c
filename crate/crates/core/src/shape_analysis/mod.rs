//! Intrinsic geometry of shape curves and the diagnostics built on it.

mod chaoticity;
mod classify;
mod energy_sign;
mod frame;
mod latitude;
mod monotone;
mod rotation;
mod sampling;
mod segments;

pub use chaoticity::{chaoticity, densify, Chaoticity};
pub use classify::{classify_point, ClassifyThresholds, PointClass};
pub use energy_sign::{energy_delta, energy_sign, EnergySign};
pub use frame::{
    curve_frame, curve_frames, expansion_ratio, reconstruct_rho, siegel_limit, CurveFrame,
    CurveSample, DerivativeSource, FrameGeometry, CUSP_SPEED, ORDER_THRESHOLD,
};
pub use latitude::{east_direction, latitude_gradient, latitude_rate, m_latitude};
pub use monotone::{monotonicity_report, Extremum, ExtremumKind, MonotonicityReport, Violation, ViolationKind};
pub use rotation::{closed_curve_rotation, signed_area, spherical_excess};
pub use sampling::{moduli_samples, newton_samples, shape_ode_samples, FnCurve, ProjectedNewton, ShapeCurve};
pub use segments::{fundamental_segments, theta_map, tuple_of, EndKind, FundamentalSegment, SegmentEnd, ThetaImage, Tuple5};
