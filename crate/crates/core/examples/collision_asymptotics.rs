//! Homothetic rays and a perturbed total collision: asymptotic ratios,
//! the log-time frame and the rotation angle.

use shapesphere::collision::{
    asymptotic_profile, collision_orbit, collision_rotation, collision_step_options, log_time_integrate, ray_constant,
    ray_solution, triangle_of, CollisionOrbitSpec,
};
use shapesphere::potential::CriticalKind;
use shapesphere::shape_geometry::MassDistribution;

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.5, 0.3, 0.2)?;
    let grid: Vec<f64> = (0..=6).map(|k| 1e-3 * 10f64.powf(k as f64 / 2.0)).collect();
    let ray = ray_solution(CriticalKind::LagrangeNorth, 0.0, &grid, &md)?;
    println!("Lagrange ray: mu = {:.8}, K = {:.8}", ray.mu, ray.k);

    let orb = collision_orbit(&CollisionOrbitSpec::default(), &md)?;
    println!("collision at t = {:.6}, exponents {:?}", orb.t_collision, orb.exponents);
    let prof = asymptotic_profile(&orb.approach, &md)?;
    for s in prof.window(prof.tau_min(), 10.0 * prof.tau_min()).step_by(40) {
        println!("tau = {:.3e}: R0 = {:.6}, R1 = {:.6}, Siegel = {:.4e}", s.tau, s.ratios[0], s.ratios[1], s.siegel);
    }

    let tau0 = 1e-2;
    let tri = triangle_of(&orb.approach.state_at(orb.t_collision - tau0).expect("inside"), &md)?;
    let lt = log_time_integrate(&tri, tau0, &md, 8.0, collision_step_options())?;
    let k = ray_constant(prof.mu);
    println!("log time: rho_hat = {:.6}, sqrt(K) = {:.6}", lt.rho_hat.last().expect("non-empty"), k.sqrt());

    for tau in [1e-2, 1e-3, 1e-4, 1e-5] {
        println!("psi(t_c - {tau:e}) = {:.4e}", collision_rotation(&orb.approach, orb.t_collision - tau, &md)?);
    }
    Ok(())
}
