//! Same motion three ways: Newton in the plane, the moduli system and the
//! third-order shape equation.

use shapesphere::newton_dynamics::{integrate_newton, NewtonOptions, SystemState};
use shapesphere::ode::StepOptions;
use shapesphere::reduced_dynamics::{integrate_moduli, integrate_shape_ode, ModuliOptions, ModuliState, ShapeState3};
use shapesphere::shape_geometry::{lift_motion, MassDistribution, ShapeMotion, ShapePoint};

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.45, 0.33, 0.22)?;
    let p = ShapePoint::from_angles(1.1, 0.9);
    let s = ModuliState::with_energy(0.2, &p, &[0.3, 0.8, -0.2], 0.05, -0.5, &md)?;
    let step = StepOptions { rtol: 1e-12, atol: 1e-14, ..StepOptions::default() };

    let mt = integrate_moduli(&s, &md, 0.0, 2.0, &ModuliOptions { step, ..ModuliOptions::default() })?;
    let motion = ShapeMotion { rho: s.rho, rho_dot: s.rho1, p: s.shape().0, p_dot: s.shape_velocity() };
    let tri = lift_motion(&motion, &md)?;
    let nt = integrate_newton(&SystemState { t: 0.0, tri }, &md, 2.0, &NewtonOptions { step, ..NewtonOptions::default() })?;
    let st = integrate_shape_ode(&ShapeState3::from_moduli(&s, &md), &md, 0.0, 2.0, step)?;
    println!("shape solver crossed {} inflection(s) via the moduli system", st.bridges.len());

    for t in [0.25, 0.5, 1.0, 2.0] {
        let a = mt.state_at(t).expect("inside").shape();
        let b = ModuliState::from_triangle(&nt.state_at(t).expect("inside").tri, &md)?.shape();
        let c = ShapePoint(st.point_at(t).expect("inside"));
        println!("t = {t}: |newton - moduli| = {:.2e}, |shape ode - moduli| = {:.2e}", a.distance(&b), a.distance(&c));
    }
    Ok(())
}
