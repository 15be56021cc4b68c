//! Scenario pipelines behind the subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use super::config::{Initial, Mode, Scenario};
use super::emit::{csv_bytes, json_bytes, Table};
use crate::collision::{asymptotic_profile, collision_orbit, collision_rotation, collision_step_options, log_time_integrate,
    ray_apex, ray_derivative, ray_solution, triangle_of, CollisionOrbitSpec};
use crate::error::{Error, Result};
use crate::jet::cross;
use crate::local_series::{initial_data_from_intrinsics, series_coefficients, IntrinsicData};
use crate::newton_dynamics::{diagnostics_along, energy, integrate_newton, make_zero_momentum_state, potential_energy,
    kinetic_energy, GuardOptions, NewtonOptions, SystemState};
use crate::ode::StepOptions;
use crate::potential::u_star;
use crate::reduced_dynamics::{integrate_moduli, integrate_shape_ode, ModuliOptions, ModuliState, ModuliTrajectory, ShapeState3};
use crate::shape_analysis::{chaoticity, classify_point, curve_frames, densify, east_direction, energy_delta, energy_sign,
    fundamental_segments, m_latitude, moduli_samples, monotonicity_report, ClassifyThresholds, ExtremumKind, PointClass};
use crate::shape_geometry::{dist, lift_point, project_motion, Chart, MassDistribution, ShapePoint, TriangleState};

/// Subcommands of the binary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Reduce,
    Shape,
    Analyze,
    Series,
    Collision,
    Verify,
}

impl Command {
    fn default_mode(self) -> Mode {
        match self {
            Command::Simulate => Mode::Newton,
            Command::Reduce => Mode::Moduli,
            Command::Shape => Mode::Shape,
            Command::Analyze => Mode::Analyze,
            Command::Series => Mode::Series,
            Command::Collision => Mode::Collision,
            Command::Verify => Mode::Verify,
        }
    }

    fn accepts(self, m: Mode) -> bool {
        m == self.default_mode() || (self == Command::Collision && m == Mode::Ray)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub tol: Option<f64>,
}

/// Files produced by a run, written only once everything succeeded.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outputs {
    pub files: BTreeMap<String, Vec<u8>>,
    /// Human-readable lines for the terminal.
    pub report: Vec<String>,
    /// Failed checks; a verify run with failures exits with status 1.
    pub failures: usize,
}

impl Outputs {
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        }
        Ok(())
    }
}

/// 0 on success, 2 for configuration errors, 1 for everything else.
pub fn exit_code(r: &Result<Outputs>) -> i32 {
    match r {
        Ok(_) => 0,
        Err(Error::Config(_)) => 2,
        Err(_) => 1,
    }
}

/// Load and validate the configuration, then run the pipeline in memory.
pub fn prepare(cmd: Command, opts: &RunOptions) -> Result<(Scenario, Mode)> {
    let sc = match &opts.config {
        Some(p) => Scenario::from_file(p)?,
        None if cmd == Command::Verify => Scenario::parse("")?,
        None => return Err(Error::Config("--config is required".into())),
    };
    let mode = sc.mode.unwrap_or(cmd.default_mode());
    if !cmd.accepts(mode) {
        return Err(Error::Config(format!("mode `{mode:?}` does not belong to this subcommand")));
    }
    if let Some(t) = opts.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive, got {t}")));
        }
    }
    sc.validate(mode)?;
    Ok((sc, mode))
}

pub fn run(cmd: Command, opts: &RunOptions) -> Result<Outputs> {
    let (sc, mode) = prepare(cmd, opts)?;
    let seed = opts.seed.or(sc.seed).unwrap_or(0);
    let ctx = Ctx { md: sc.mass_distribution()?, seed, step: step_options(&sc, opts.tol), sc: &sc };
    let (summary, tables) = match mode {
        Mode::Newton => ctx.newton()?,
        Mode::Moduli => ctx.moduli()?,
        Mode::Shape => ctx.shape()?,
        Mode::Analyze => ctx.analyze()?,
        Mode::Series => ctx.series()?,
        Mode::Ray => ctx.ray()?,
        Mode::Collision => ctx.collision()?,
        Mode::Verify => return super::verify::verify_outputs(seed, opts.tol),
    };
    let mut out = Outputs::default();
    let names = [&sc.output.trajectory, &sc.output.diagnostics];
    for (name, t) in names.iter().zip(tables.iter()) {
        out.files.insert((*name).clone(), csv_bytes(t)?);
    }
    let summary = json!({ "mode": mode, "seed": seed, "masses": ctx.md.masses(), "result": summary });
    out.report.push(serde_json::to_string(&summary["result"]).unwrap_or_default());
    out.files.insert(sc.output.summary.clone(), json_bytes(&summary)?);
    Ok(out)
}

fn step_options(sc: &Scenario, tol: Option<f64>) -> StepOptions {
    StepOptions { rtol: tol.unwrap_or(sc.integration.rtol), atol: sc.integration.atol, ..StepOptions::default() }
}

struct Ctx<'a> {
    md: MassDistribution,
    seed: u64,
    step: StepOptions,
    sc: &'a Scenario,
}

type Pipeline = Result<(Value, Vec<Table>)>;

/// A zero angular momentum triangle at energy `h` drawn from `rng`: random
/// shape away from binary collisions, size set by a random potential U in
/// [lo, lo + 1] with lo = 0.5, or 0.2 - h for h < 0, and random velocities
/// scaled to the kinetic energy h + U.
pub fn random_triangle<R: Rng>(rng: &mut R, md: &MassDistribution, h: f64) -> Result<TriangleState> {
    loop {
        let z: f64 = rng.random_range(-1.0..1.0);
        let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        let p = ShapePoint([r * th.cos(), r * th.sin(), z]);
        if md.b().iter().any(|b| dist(&p.0, b) < 0.3) {
            continue;
        }
        let lo = if h < 0.0 { 0.2 - h } else { 0.5 };
        let u_target: f64 = rng.random_range(lo..lo + 1.0);
        let kin = h + u_target;
        if !(kin > 0.1) {
            continue;
        }
        let rho = u_star(&p.0, md) / u_target;
        let tri = lift_point(rho, &p, md)?;
        let vel: [[f64; 2]; 3] = std::array::from_fn(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
        let s = make_zero_momentum_state(tri.pos, vel, md)?;
        let t0 = kinetic_energy(&s.tri, md);
        if !(t0 > 1e-6) {
            continue;
        }
        let f = (kin / t0).sqrt();
        let mut out = s.tri;
        for v in &mut out.vel {
            v[0] *= f;
            v[1] *= f;
        }
        debug_assert!((energy(&out, md) - h).abs() < 1e-9 * potential_energy(&out, md));
        return Ok(out);
    }
}

/// Moduli state at shape angles with the velocity at `heading` from east.
pub fn moduli_from_angles(
    rho: f64,
    phi: f64,
    theta: f64,
    heading: f64,
    rho_dot: f64,
    h: f64,
    md: &MassDistribution,
) -> Result<ModuliState> {
    let p = ShapePoint::from_angles(phi, theta);
    let east = east_direction(&p.0, md);
    let north = cross(&p.0, &east);
    let dir: [f64; 3] = std::array::from_fn(|i| heading.cos() * east[i] + heading.sin() * north[i]);
    ModuliState::with_energy(rho, &p, &dir, rho_dot, h, md)
}

impl Ctx<'_> {
    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn initial(&self) -> &Initial {
        self.sc.initial.as_ref().expect("validated")
    }

    fn guards(&self) -> GuardOptions {
        let ig = &self.sc.integration;
        GuardOptions { r_min: ig.r_min, rho_min: ig.rho_min, rho_max: ig.rho_max }
    }

    fn moduli_start(&self) -> Result<ModuliState> {
        let i = self.initial();
        let h = i.h.expect("validated");
        if i.random {
            return ModuliState::from_triangle(&random_triangle(&mut self.rng(), &self.md, h)?, &self.md);
        }
        moduli_from_angles(
            i.rho.expect("validated"),
            i.phi.expect("validated"),
            i.theta.expect("validated"),
            i.heading.unwrap_or(0.0),
            i.rho_dot.unwrap_or(0.0),
            h,
            &self.md,
        )
        .map_err(|e| Error::Config(format!("[initial]: {e}")))
    }

    fn moduli_traj(&self) -> Result<ModuliTrajectory> {
        let s = self.moduli_start()?;
        let opts = ModuliOptions { step: self.step, guards: self.guards(), ..ModuliOptions::default() };
        integrate_moduli(&s, &self.md, 0.0, self.sc.integration.t_span, &opts)
    }

    fn newton(&self) -> Pipeline {
        let i = self.initial();
        let s0 = if i.random {
            SystemState { t: 0.0, tri: random_triangle(&mut self.rng(), &self.md, i.h.expect("validated"))? }
        } else {
            make_zero_momentum_state(i.positions.expect("validated"), i.velocities.expect("validated"), &self.md)?
        };
        let opts = NewtonOptions { step: self.step, guards: self.guards() };
        let traj = integrate_newton(&s0, &self.md, self.sc.integration.t_span, &opts)?;
        let e0 = energy(&s0.tri, &self.md);
        let scale = e0.abs().max(1.0);
        let mut tr = Table::new(&["t", "x1", "y1", "x2", "y2", "x3", "y3", "vx1", "vy1", "vx2", "vy2", "vx3", "vy3"]);
        let mut dg = Table::new(&["t", "rho", "phi", "theta", "energy", "energy_drift", "angular_momentum", "lj_residual", "wedge"]);
        let (mut drift, mut om, mut lj) = (0.0f64, 0.0f64, 0.0f64);
        for s in &traj.samples {
            let mut row = vec![s.t];
            row.extend(s.tri.to_vec());
            tr.push(row);
            let d = diagnostics_along(&traj, s.t, &self.md).expect("inside trajectory");
            let m = project_motion(&s.tri, &self.md)?;
            let p = ShapePoint(m.p);
            let de = (d.energy - e0).abs() / scale;
            drift = drift.max(de);
            om = om.max(d.angular_momentum.abs());
            let l = d.lj_residual.unwrap_or(f64::NAN);
            lj = lj.max(l);
            dg.push(vec![s.t, m.rho, p.phi(), p.theta(), d.energy, de, d.angular_momentum, l, d.wedge]);
        }
        let summary = json!({
            "samples": traj.samples.len(),
            "t_end": traj.last().t,
            "event": traj.event,
            "energy": e0,
            "energy_drift_max": drift,
            "angular_momentum_max": om,
            "lj_residual_max": lj,
        });
        Ok((summary, vec![tr, dg]))
    }

    fn moduli(&self) -> Pipeline {
        let traj = self.moduli_traj()?;
        let mut tr = Table::new(&["t", "rho", "phi", "theta", "rho_dot", "phi_dot", "theta_dot", "u_star", "speed", "siegel"]);
        let mut dg = Table::new(&["t", "energy_residual", "latitude", "siegel_frame", "siegel_defect"]);
        let frames = curve_frames(&moduli_samples(&traj, &self.md), &self.md);
        let mut defect = 0.0f64;
        for (s, f) in traj.samples.iter().zip(&frames) {
            let st = &s.state;
            let m = st.motion();
            let p = ShapePoint(m.p);
            let (pd, td) = Chart::identity().rates(&m.p, &m.p_dot);
            let v = st.speed();
            let siegel = st.rho.powi(3) * v * v / 4.0;
            tr.push(vec![s.t, st.rho, p.phi(), p.theta(), st.rho1, pd, td, u_star(&m.p, &self.md), v, siegel]);
            let sf = f.geometry.map_or(f64::NAN, |g| g.siegel);
            let d = (sf - siegel).abs() / siegel;
            if d.is_finite() {
                defect = defect.max(d);
            }
            dg.push(vec![s.t, st.energy_residual(&self.md), m_latitude(&p, &self.md), sf, d]);
        }
        let summary = json!({
            "samples": traj.samples.len(),
            "t_end": traj.t_range().1,
            "event": traj.event,
            "energy_residual_max": traj.max_energy_residual,
            "chart_switches": traj.chart_switches,
            "siegel_defect_max": defect,
        });
        Ok((summary, vec![tr, dg]))
    }

    fn shape(&self) -> Pipeline {
        let traj = self.moduli_traj()?;
        let s0 = ShapeState3::from_moduli(&traj.samples[0].state, &self.md);
        let (a, b) = traj.t_range();
        let st = integrate_shape_ode(&s0, &self.md, a, b, self.step)?;
        let mut tr = Table::new(&["t", "x", "y", "z", "phi", "theta"]);
        let mut dg = Table::new(&["t", "deviation"]);
        let mut dev = 0.0f64;
        for (t, s) in &st.samples {
            let p = ShapePoint(s.point());
            tr.push(vec![*t, p.0[0], p.0[1], p.0[2], p.phi(), p.theta()]);
            let q = traj.state_at(*t).expect("same range").shape();
            let d = p.distance(&q);
            dev = dev.max(d);
            dg.push(vec![*t, d]);
        }
        let summary = json!({
            "samples": st.samples.len(),
            "chart_switches": st.chart_switches,
            "max_deviation_from_moduli": dev,
            "moduli_event": traj.event,
        });
        Ok((summary, vec![tr, dg]))
    }

    fn analyze(&self) -> Pipeline {
        let traj = self.moduli_traj()?;
        let h = traj.h;
        let frames = curve_frames(&moduli_samples(&traj, &self.md), &self.md);
        let th = ClassifyThresholds::default();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut tr = Table::new(&["t", "x", "y", "z", "speed", "curvature", "siegel", "siegel_motion", "latitude", "energy_delta", "class"]);
        for (k, f) in frames.iter().enumerate() {
            let lo = k.saturating_sub(2);
            let hi = (k + 3).min(frames.len());
            let class = classify_point(f, &frames[lo..hi], &self.md, &th);
            let (code, name) = class_code(&class);
            *counts.entry(name.into()).or_default() += 1;
            let g = f.geometry;
            let sm = f.rho.map_or(f64::NAN, |r| r.powi(3) * f.v * f.v / 4.0);
            tr.push(vec![
                f.t,
                f.p[0],
                f.p[1],
                f.p[2],
                f.v,
                g.map_or(f64::NAN, |g| g.kstar),
                g.map_or(f64::NAN, |g| g.siegel),
                sm,
                m_latitude(&ShapePoint(f.p), &self.md),
                energy_delta(f).unwrap_or(f64::NAN),
                code,
            ]);
        }
        let report = monotonicity_report(&traj, &self.md);
        let segs = fundamental_segments(&traj, &self.md, &report);
        let mut dg = Table::new(&["t", "latitude", "kind", "phi", "theta", "s0", "s1", "eps"]);
        for e in &report.extrema {
            let seg = segs.iter().find(|s| s.start.t == e.t || s.end.t == e.t);
            let tup = seg.and_then(|s| if s.start.t == e.t { s.start.tuple } else { s.end.tuple });
            let kind = if e.kind == ExtremumKind::Max { 1.0 } else { -1.0 };
            let (phi, theta, s0, s1, eps) =
                tup.map_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN), |t| (t.phi, t.theta, t.s0, t.s1, t.eps as f64));
            dg.push(vec![e.t, e.lambda, kind, phi, theta, s0, s1, eps]);
        }
        if dg.rows.is_empty() {
            dg.push(vec![f64::NAN; 8]);
        }
        let band = 1e-4;
        let sign = match energy_sign(&frames, band) {
            Ok(s) => json!({ "sign": s.sign, "consistent": true }),
            Err(e) => json!({ "consistent": false, "error": e.to_string() }),
        };
        let pts = densify(&traj, 1e-2);
        let ch: Vec<Value> = [16usize, 32, 64]
            .iter()
            .map(|&n| {
                let c = chaoticity(&pts, n);
                json!({ "resolution": n, "fraction": c.fraction, "cells": c.cells_visited })
            })
            .collect();
        let summary = json!({
            "h": h,
            "samples": frames.len(),
            "event": traj.event,
            "energy_residual_max": traj.max_energy_residual,
            "classification": counts,
            "energy_sign": sign,
            "extrema": report.extrema.len(),
            "equator_crossings": report.equator_crossings.len(),
            "monotonicity_violations": report.violations,
            "inconclusive": report.inconclusive.len(),
            "segments": segs.len(),
            "complete_segments": segs.iter().filter(|s| s.is_complete() && !s.flagged).count(),
            "chaoticity": ch,
        });
        Ok((summary, vec![tr, dg]))
    }

    fn series(&self) -> Pipeline {
        let c = self.sc.series.expect("validated");
        let p = ShapePoint::from_angles(c.phi, c.theta);
        let east = east_direction(&p.0, &self.md);
        let north = cross(&p.0, &east);
        let dir: [f64; 3] = std::array::from_fn(|i| c.heading.cos() * east[i] + c.heading.sin() * north[i]);
        let d = IntrinsicData::new(&p, &dir, c.s0, c.s1, c.h, &self.md)?;
        let rec = initial_data_from_intrinsics(&d)?;
        let lift = match (rec.unique(), c.rho0) {
            (Some(l), _) => l,
            (None, Some(r)) => rec.with_size(r)?,
            (None, None) => unreachable!("validated"),
        };
        let coef = series_coefficients(&d, &lift, c.order, &self.md)?;
        let s0 = lift.to_moduli(&d);
        let opts = ModuliOptions { step: self.step, guards: self.guards(), ..ModuliOptions::default() };
        let traj = integrate_moduli(&s0, &self.md, 0.0, c.t_eval, &opts)?;
        let mut tr = Table::new(&["t", "rho_series", "rho_integrated", "x_series", "y_series", "z_series", "x", "y", "z", "shape_error"]);
        let (_, t_end) = traj.t_range();
        for k in 0..c.points {
            let t = t_end * k as f64 / (c.points - 1) as f64;
            let st = traj.state_at(t).expect("inside");
            let ps = coef.shape_at(t, &d.chart);
            let pi = st.shape().0;
            tr.push(vec![t, coef.rho_at(t), st.rho, ps[0], ps[1], ps[2], pi[0], pi[1], pi[2], dist(&ps, &pi)]);
        }
        let mut dg = Table::new(&["order", "rho", "phi", "theta", "u", "mu", "eta"]);
        for k in 0..=c.order {
            dg.push(vec![k as f64, coef.rho[k], coef.phi[k], coef.theta[k], coef.u[k], coef.mu[k], coef.eta[k]]);
        }
        let summary = json!({
            "lift": lift,
            "expansion_ratio": d.expansion_ratio(),
            "coefficients": coef,
            "energy_residual_coefficients_max": coef.energy_residual.iter().fold(0.0f64, |a, x| a.max(x.abs())),
            "integration_event": traj.event,
        });
        Ok((summary, vec![tr, dg]))
    }

    fn ray(&self) -> Pipeline {
        let r = self.sc.ray.expect("validated");
        let grid: Vec<f64> =
            (0..r.points).map(|k| r.t_min * (r.t_max / r.t_min).powf(k as f64 / (r.points - 1) as f64)).collect();
        let sol = ray_solution(r.point.kind(), r.h, &grid, &self.md)?;
        let p = &sol.profile;
        let mut tr = Table::new(&["t", "inertia", "inertia_dot", "inertia_ddot", "lj_residual", "power_law"]);
        for (k, &t) in grid.iter().enumerate() {
            tr.push(vec![t, p.inertia[k], p.inertia_dot[k], p.inertia_ddot[k], p.lj_residual[k], ray_derivative(sol.k, t, 0)]);
        }
        let mut dg = Table::new(&["t", "ratio0", "ratio1", "ratio2"]);
        for (k, &t) in grid.iter().enumerate() {
            dg.push(vec![
                t,
                p.inertia[k] / ray_derivative(sol.k, t, 0),
                p.inertia_dot[k] / ray_derivative(sol.k, t, 1),
                p.inertia_ddot[k] / ray_derivative(sol.k, t, 2),
            ]);
        }
        let apex = if r.h < 0.0 { ray_apex(sol.mu, r.h).ok() } else { None };
        let summary = json!({
            "point": r.point,
            "shape": sol.point.0,
            "mu": sol.mu,
            "k": sol.k,
            "h": r.h,
            "lj_residual_max": p.lj_residual.iter().cloned().fold(0.0, f64::max),
            "apex": apex.map(|(t, rho)| json!({ "t": t, "rho": rho })),
        });
        Ok((summary, vec![tr, dg]))
    }

    fn collision(&self) -> Pipeline {
        let c = self.sc.collision.expect("validated");
        let spec = CollisionOrbitSpec { h: c.h, t0: c.t0, t_end: c.t_end, amplitudes: c.amplitudes };
        let orb = collision_orbit(&spec, &self.md)?;
        let prof = asymptotic_profile(&orb.approach, &self.md)?;
        let mut tr = Table::new(&["tau", "rho", "ratio0", "ratio1", "ratio2", "ratio3", "siegel", "wedge", "x", "y", "z"]);
        for s in &prof.samples {
            tr.push(vec![s.tau, s.rho, s.ratios[0], s.ratios[1], s.ratios[2], s.ratios[3], s.siegel, s.wedge, s.shape[0], s.shape[1], s.shape[2]]);
        }
        let tc = orb.t_collision;
        let s = orb
            .approach
            .state_at(tc - c.tau0)
            .ok_or_else(|| Error::Config("`collision.tau0` is outside the approach".into()))?;
        let lt = log_time_integrate(&triangle_of(&s, &self.md)?, c.tau0, &self.md, c.u_span, collision_step_options())?;
        let mut dg = Table::new(&["u", "rho_hat", "rho_hat_prime", "energy_residual", "x", "y", "z"]);
        for k in 0..lt.u.len() {
            let p = lt.shapes[k];
            dg.push(vec![lt.u[k], lt.rho_hat[k], lt.rho_hat_prime[k], lt.energy_residual[k], p[0], p[1], p[2]]);
        }
        let psi: Vec<Value> = rotation_taus(c.tau0)
            .into_iter()
            .filter_map(|tau| collision_rotation(&orb.approach, tc - tau, &self.md).ok().map(|p| json!({ "tau": tau, "psi": p })))
            .collect();
        let last_decade = prof.window(10.0 * prof.tau_min(), 100.0 * prof.tau_min());
        let (mut r0, mut r1) = (0.0f64, 0.0f64);
        for s in last_decade {
            r0 = r0.max((s.ratios[0] - 1.0).abs());
            r1 = r1.max((s.ratios[1] - 1.0).abs());
        }
        let summary = json!({
            "t_collision": tc,
            "t_collision_fit": prof.t_collision,
            "mu": prof.mu,
            "mu_fit": prof.mu_fit,
            "k": prof.k,
            "exponents": orb.exponents,
            "ratio0_deviation_max": r0,
            "ratio1_deviation_max": r1,
            "rho_hat_final": lt.rho_hat.last(),
            "sqrt_k": prof.k.sqrt(),
            "log_time_energy_residual_max": lt.energy_residual.iter().cloned().fold(0.0, f64::max),
            "rotation": psi,
        });
        Ok((summary, vec![tr, dg]))
    }
}

/// Times before collision at which the rotation angle is reported.
pub fn rotation_taus(tau0: f64) -> Vec<f64> {
    (0..6).map(|k| tau0 * 10f64.powf(-0.5 * k as f64)).collect()
}

fn class_code(c: &PointClass) -> (f64, &'static str) {
    match c {
        PointClass::Regular { .. } => (0.0, "regular"),
        PointClass::Cusp { .. } => (1.0, "cusp"),
        PointClass::BinaryCollision { .. } => (2.0, "binary_collision"),
        PointClass::TripleCollision => (3.0, "triple_collision"),
        PointClass::Escape => (4.0, "escape"),
        PointClass::Inconclusive => (5.0, "inconclusive"),
    }
}
