//! Recover a motion from the intrinsic data of its shape curve at one point
//! and expand it in time.

use shapesphere::local_series::{initial_data_from_intrinsics, series_coefficients, IntrinsicData};
use shapesphere::reduced_dynamics::{integrate_moduli, ModuliOptions, ModuliState};
use shapesphere::jet::{cross, dot};
use shapesphere::shape_analysis::{curve_frames, east_direction, moduli_samples};
use shapesphere::shape_geometry::{MassDistribution, ShapePoint};

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.5, 0.3, 0.2)?;
    let h = -0.5;
    let p = ShapePoint::from_angles(1.2, 0.5);
    let truth = ModuliState::with_energy(0.2, &p, &[0.1, 0.4, 0.9], 0.05, h, &md)?;
    let traj = integrate_moduli(&truth, &md, 0.0, 0.1, &ModuliOptions::default())?;
    let frame = &curve_frames(&moduli_samples(&traj, &md), &md)[0];

    let d = IntrinsicData::from_frame(frame, h, &md)?;
    let (east, tau) = (east_direction(&p.0, &md), d.tangent());
    let north = cross(&p.0, &east);
    let heading = dot(&tau, &north).atan2(dot(&tau, &east));
    println!("intrinsic data: heading = {heading:.10}, S0 = {:.10}, S1 = {:.10}", d.siegel0, d.siegel1);
    let lift = initial_data_from_intrinsics(&d)?.unique().expect("h != 0");
    println!("recovered rho0 = {:.10} (true {:.10})", lift.rho0, truth.rho);
    println!("recovered v0   = {:.10} (true {:.10})", lift.v0, truth.speed());
    println!("recovered rho1 = {:.10} (true {:.10})", lift.rho1, truth.rho1);

    let coef = series_coefficients(&d, &lift, 4, &md)?;
    for t in [1e-3, 1e-2] {
        let rho = traj.state_at(t).expect("inside").rho;
        println!("t = {t}: series rho = {:.12}, integrated {:.12}", coef.rho_at(t), rho);
    }
    Ok(())
}
