//! Single Blaschke factors at a point and on a sphere.

use slice_schur::blaschke::{factor_point, factor_point_closed, factor_sphere, factor_sphere_closed};
use slice_schur::{ImagUnit, Quaternion, Result, TwoSphere};

fn main() -> Result<()> {
    let a = Quaternion::new(0.3, 0.2, -0.1, 0.4);
    let b = factor_point(a, 128)?;
    println!("B_a(a) = {:.2e}", b.eval(a).norm());

    let p = Quaternion::new(-0.2, 0.1, 0.5, 0.0);
    println!("series B_a(p) = {:.8}", b.eval(p));
    println!("closed B_a(p) = {:.8}", factor_point_closed(a, p)?);

    // On the boundary the factor has modulus one.
    let u = Quaternion::new(0.6, 0.0, 0.8, 0.0);
    println!("|B_a(u)| on the sphere |u| = 1: {:.12}", factor_point_closed(a, u)?.norm());

    let s = TwoSphere::new(0.1, 0.5)?;
    let bs = factor_sphere(&s, 128)?;
    for dir in [ImagUnit::I, ImagUnit::J, ImagUnit::new(1.0, 1.0, 1.0)?] {
        let z = s.point(dir);
        println!("B_[s] at {z:.4}: {:.2e}", bs.eval(z).norm());
    }
    println!("closed B_[s](p) = {:.8}", factor_sphere_closed(&s, p)?);
    println!("series B_[s](p) = {:.8}", bs.eval(p));
    Ok(())
}
