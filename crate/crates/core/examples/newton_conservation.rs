//! Integrate a random zero angular momentum triangle and report the
//! conserved quantities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shapesphere::cli::random_triangle;
use shapesphere::newton_dynamics::{diagnostics_along, energy, integrate_newton, GuardOptions, NewtonOptions, SystemState};
use shapesphere::ode::StepOptions;
use shapesphere::shape_geometry::MassDistribution;

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.4, 0.35, 0.25)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let tri = random_triangle(&mut rng, &md, 0.0)?;
    let opts = NewtonOptions {
        step: StepOptions { rtol: 1e-12, atol: 1e-14, ..StepOptions::default() },
        guards: GuardOptions { r_min: 1e-3, ..GuardOptions::default() },
    };
    let traj = integrate_newton(&SystemState { t: 0.0, tri }, &md, 5.0, &opts)?;
    let e0 = energy(&tri, &md);
    println!("steps {}, reached t = {:.4}, event {:?}", traj.samples.len(), traj.last().t, traj.event);
    for t in [0.5, 1.0, 2.0, 4.0] {
        if let Some(d) = diagnostics_along(&traj, t, &md) {
            println!(
                "t = {t}: dE = {:.2e}  Omega = {:.2e}  LJ residual = {:.2e}",
                d.energy - e0,
                d.angular_momentum,
                d.lj_residual.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
