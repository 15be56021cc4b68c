//! Geometry of a shape curve: Siegel function, latitude monotonicity,
//! fundamental segments and the sign of the energy.

use shapesphere::reduced_dynamics::{integrate_moduli, ModuliOptions, ModuliState};
use shapesphere::shape_analysis::{curve_frames, energy_sign, fundamental_segments, moduli_samples, monotonicity_report};
use shapesphere::shape_geometry::{MassDistribution, ShapePoint};

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.4, 0.35, 0.25)?;
    let p = ShapePoint::from_angles(1.0, 0.8);
    let s = ModuliState::with_energy(0.12, &p, &[0.2, 0.9, -0.3], 0.0, -1.0, &md)?;
    let traj = integrate_moduli(&s, &md, 0.0, 2.0, &ModuliOptions::default())?;

    let frames = curve_frames(&moduli_samples(&traj, &md), &md);
    let worst = frames
        .iter()
        .filter_map(|f| Some((f.geometry?, f.rho?, f.v)))
        .map(|(g, rho, v)| (g.siegel - rho.powi(3) * v * v / 4.0).abs() / g.siegel)
        .fold(0.0, f64::max);
    println!("{} frames, worst Siegel identity defect {worst:.2e}", frames.len());

    let rep = monotonicity_report(&traj, &md);
    println!("{} latitude extrema, {} equator crossings, {} violations", rep.extrema.len(), rep.equator_crossings.len(), rep.violations.len());
    for seg in fundamental_segments(&traj, &md, &rep).iter().filter(|s| s.is_complete()) {
        println!("  segment t in [{:.4}, {:.4}]", seg.start.t, seg.end.t);
    }
    let sign = energy_sign(&frames, 1e-4)?;
    println!("energy sign read off the curve: {}", sign.sign);
    Ok(())
}
