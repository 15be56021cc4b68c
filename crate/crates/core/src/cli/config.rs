//! Scenario files: TOML with one section per concern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::CriticalKind;
use crate::shape_geometry::MassDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Newton,
    Moduli,
    Shape,
    Analyze,
    Series,
    Ray,
    Collision,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Option<Mode>,
    pub seed: Option<u64>,
    pub masses: Option<[f64; 3]>,
    #[serde(default)]
    pub integration: Integration,
    pub initial: Option<Initial>,
    pub series: Option<SeriesConfig>,
    pub ray: Option<RayConfig>,
    pub collision: Option<CollisionConfig>,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Integration {
    pub t_span: f64,
    pub rtol: f64,
    pub atol: f64,
    pub r_min: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl Default for Integration {
    fn default() -> Self {
        Integration { t_span: 1.0, rtol: 1e-12, atol: 1e-14, r_min: 1e-4, rho_min: 1e-4, rho_max: 1e4 }
    }
}

/// Initial state. Newton runs take `positions` and `velocities`; the
/// reduced modes take `rho`, `phi`, `theta`, `heading`, `rho_dot` and `h`.
/// With `random = true` the state is drawn from the seed at energy `h`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default)]
    pub random: bool,
    pub positions: Option<[[f64; 2]; 3]>,
    pub velocities: Option<[[f64; 2]; 3]>,
    pub rho: Option<f64>,
    pub phi: Option<f64>,
    pub theta: Option<f64>,
    /// Angle of the shape velocity from the east direction, counterclockwise
    /// seen from outside the sphere.
    pub heading: Option<f64>,
    pub rho_dot: Option<f64>,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub phi: f64,
    pub theta: f64,
    #[serde(default)]
    pub heading: f64,
    pub s0: f64,
    pub s1: f64,
    pub h: f64,
    /// Required at h = 0.
    pub rho0: Option<f64>,
    #[serde(default = "default_order")]
    pub order: usize,
    /// Series and integration are compared on [0, t_eval].
    #[serde(default = "default_t_eval")]
    pub t_eval: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_order() -> usize {
    4
}
fn default_t_eval() -> f64 {
    1e-2
}
fn default_points() -> usize {
    21
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalName {
    Lagrange,
    LagrangeSouth,
    Euler1,
    Euler2,
    Euler3,
}

impl CriticalName {
    pub fn kind(self) -> CriticalKind {
        match self {
            CriticalName::Lagrange => CriticalKind::LagrangeNorth,
            CriticalName::LagrangeSouth => CriticalKind::LagrangeSouth,
            CriticalName::Euler1 => CriticalKind::Euler(0),
            CriticalName::Euler2 => CriticalKind::Euler(1),
            CriticalName::Euler3 => CriticalKind::Euler(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayConfig {
    pub point: CriticalName,
    pub h: f64,
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionConfig {
    pub h: f64,
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_amplitudes")]
    pub amplitudes: [f64; 2],
    /// Time before collision where the log-time frame starts.
    #[serde(default = "default_tau0")]
    pub tau0: f64,
    #[serde(default = "default_u_span")]
    pub u_span: f64,
}

fn default_t0() -> f64 {
    1e-7
}
fn default_t_end() -> f64 {
    0.05
}
fn default_amplitudes() -> [f64; 2] {
    [0.04, 0.06]
}
fn default_tau0() -> f64 {
    1e-2
}
fn default_u_span() -> f64 {
    8.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub trajectory: String,
    pub diagnostics: String,
    pub summary: String,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            trajectory: "trajectory.csv".into(),
            diagnostics: "diagnostics.csv".into(),
            summary: "summary.json".into(),
        }
    }
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn need<T: Copy>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| cfg(format!("missing field `{field}`")))
}

fn finite(v: f64, field: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(cfg(format!("`{field}` must be finite")))
    }
}

fn positive(v: f64, field: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg(format!("`{field}` must be positive, got {v}")))
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => cfg(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn mass_distribution(&self) -> Result<MassDistribution> {
        let [a, b, c] = self.masses.unwrap_or([1.0, 1.0, 1.0]);
        MassDistribution::new(a, b, c).map_err(|e| cfg(format!("`masses`: {e}")))
    }

    /// Checks that `mode` has everything it needs.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        self.mass_distribution()?;
        let ig = &self.integration;
        positive(ig.t_span, "integration.t_span")?;
        positive(ig.rtol, "integration.rtol")?;
        if !(ig.atol >= 0.0) {
            return Err(cfg("`integration.atol` must be nonnegative"));
        }
        if !(ig.r_min >= 0.0 && ig.rho_min >= 0.0 && ig.rho_max > ig.rho_min) {
            return Err(cfg("guards need 0 <= r_min, 0 <= rho_min < rho_max"));
        }
        for (name, f) in [("trajectory", &self.output.trajectory), ("diagnostics", &self.output.diagnostics), ("summary", &self.output.summary)] {
            if f.is_empty() || f.contains('/') || f.contains('\\') {
                return Err(cfg(format!("`output.{name}` must be a plain file name")));
            }
        }
        match mode {
            Mode::Newton => {
                let i = self.initial.as_ref().ok_or_else(|| cfg("missing section [initial]"))?;
                if i.random {
                    finite(need(i.h, "initial.h")?, "initial.h")?;
                } else {
                    need(i.positions, "initial.positions")?;
                    need(i.velocities, "initial.velocities")?;
                }
            }
            Mode::Moduli | Mode::Shape | Mode::Analyze => {
                let i = self.initial.as_ref().ok_or_else(|| cfg("missing section [initial]"))?;
                finite(need(i.h, "initial.h")?, "initial.h")?;
                if !i.random {
                    positive(need(i.rho, "initial.rho")?, "initial.rho")?;
                    let phi = need(i.phi, "initial.phi")?;
                    if !(phi > 0.0 && phi < std::f64::consts::PI) {
                        return Err(cfg("`initial.phi` must lie in (0, pi)"));
                    }
                    finite(need(i.theta, "initial.theta")?, "initial.theta")?;
                    finite(i.heading.unwrap_or(0.0), "initial.heading")?;
                    finite(i.rho_dot.unwrap_or(0.0), "initial.rho_dot")?;
                }
            }
            Mode::Series => {
                let s = self.series.as_ref().ok_or_else(|| cfg("missing section [series]"))?;
                positive(s.s0, "series.s0")?;
                finite(s.s1, "series.s1")?;
                finite(s.h, "series.h")?;
                positive(s.t_eval, "series.t_eval")?;
                if s.h == 0.0 {
                    positive(need(s.rho0, "series.rho0")?, "series.rho0")?;
                }
                if !(1..=crate::local_series::MAX_SERIES_ORDER).contains(&s.order) {
                    return Err(cfg(format!("`series.order` must be 1..={}", crate::local_series::MAX_SERIES_ORDER)));
                }
                if s.points < 2 {
                    return Err(cfg("`series.points` must be at least 2"));
                }
            }
            Mode::Ray => {
                let r = self.ray.as_ref().ok_or_else(|| cfg("missing section [ray]"))?;
                finite(r.h, "ray.h")?;
                positive(r.t_min, "ray.t_min")?;
                if !(r.t_max > r.t_min) || r.points < 2 {
                    return Err(cfg("`ray` needs t_max > t_min and points >= 2"));
                }
            }
            Mode::Collision => {
                let c = self.collision.as_ref().ok_or_else(|| cfg("missing section [collision]"))?;
                finite(c.h, "collision.h")?;
                positive(c.t0, "collision.t0")?;
                positive(c.u_span, "collision.u_span")?;
                if !(c.t_end > 10.0 * c.t0) {
                    return Err(cfg("`collision.t_end` must exceed 10 t0"));
                }
                if !(c.tau0 > 0.0 && c.tau0 < c.t_end) {
                    return Err(cfg("`collision.tau0` must lie in (0, t_end)"));
                }
            }
            Mode::Verify => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_field_names_the_line() {
        let e = Scenario::parse("mode = \"moduli\"\n[integration]\nt_spam = 3\n").unwrap_err();
        let m = e.to_string();
        assert!(m.contains("t_spam") && m.contains("line 3"), "{m}");
    }

    #[test]
    fn missing_section_is_reported() {
        let s = Scenario::parse("masses = [1, 2, 3]").unwrap();
        let e = s.validate(Mode::Ray).unwrap_err();
        assert!(e.to_string().contains("[ray]"));
        assert!(s.validate(Mode::Verify).is_ok());
    }

    #[test]
    fn bad_masses_rejected() {
        let s = Scenario::parse("masses = [1, -2, 3]").unwrap();
        assert!(matches!(s.validate(Mode::Verify), Err(Error::Config(_))));
    }
}
