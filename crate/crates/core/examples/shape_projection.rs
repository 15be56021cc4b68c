//! Project a triangle to the shape sphere and back.

use shapesphere::shape_geometry::{lift_point, mutual_distances, project_to_shape, MassDistribution, TriangleState};

fn main() -> shapesphere::Result<()> {
    let md = MassDistribution::new(0.5, 0.3, 0.2)?;
    let tri = TriangleState::centered([[1.0, 0.0], [-0.4, 0.8], [-0.6, -0.9]], [[0.0; 2]; 3], &md);
    let m = project_to_shape(&tri, &md);
    let p = m.shape.expect("not a triple collision");
    println!("rho = {:.6}, shape = {:?}", m.rho, p.0);
    println!("phi = {:.6}, theta = {:.6}", p.phi(), p.theta());

    // distances are determined by (rho, shape)
    println!("distances {:?}", tri.distances());
    println!("from shape {:?}", mutual_distances(&p, m.rho, &md));

    let back = lift_point(m.rho, &p, &md)?;
    println!("lifted distances {:?}", back.distances());
    for (i, b) in md.b().iter().enumerate() {
        println!("binary collision point b{} = {:?}", i + 1, b);
    }
    Ok(())
}
