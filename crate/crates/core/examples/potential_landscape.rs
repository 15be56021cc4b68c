//! Critical points of the shape potential and the gradient geometry
//! around the Lagrange points.

use shapesphere::potential::{b_field, critical_points, gradient, u_star};
use shapesphere::shape_geometry::{MassDistribution, ShapePoint};

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.5, 0.3, 0.2)?;
    let cs = critical_points(&md)?;
    println!("Lagrange point {:?}  U* = {:.10}", cs.lagrange_north.0, cs.lagrange_value);
    for (e, u) in cs.euler.iter().zip(cs.euler_values) {
        println!("Euler point    {:?}  U* = {:.10}", e.0, u);
    }
    let p = ShapePoint::from_angles(1.2, 2.0);
    let g = gradient(&p.0, &md);
    let b = b_field(&p.0, &md);
    println!("at {:?}: U* = {:.6}", p.0, u_star(&p.0, &md));
    println!("  tangential gradient {g:?}");
    println!("  B field             {b:?}");
    Ok(())
}
