//! A finite Blaschke product with prescribed zeros, including zeros of
//! higher multiplicity, a zero at the origin and a spherical zero.

use slice_schur::blaschke::{product_build, PointZero, SphereZero, ZeroSet};
use slice_schur::{ImagUnit, Quaternion, Result, TwoSphere};

fn main() -> Result<()> {
    let zeros = ZeroSet {
        points: vec![
            PointZero::new(Quaternion::new(0.3, 0.1, 0.0, 0.0), 2),
            PointZero::new(Quaternion::new(-0.2, 0.0, 0.4, 0.1), 1),
            PointZero::new(Quaternion::ZERO, 1),
        ],
        spheres: vec![SphereZero::new(TwoSphere::new(0.1, 0.4)?, 1)],
    };
    let prod = product_build(&zeros, 96)?;
    println!("{} factors, placements:", prod.factors.len());
    for a in &prod.placements {
        println!("  {a:.6}");
    }
    for z in &zeros.points {
        let (v, bound) = prod.eval(z.a);
        println!("B({:.3}) = {:.2e} (tail bound {bound:.1e})", z.a, v.norm());
    }
    let s = zeros.spheres[0].sphere;
    let z = s.point(ImagUnit::new(0.0, 1.0, -1.0)?);
    println!("B on the zero sphere: {:.2e}", prod.eval_exact(z)?.norm());

    let u = Quaternion::new(0.0, 0.6, 0.0, 0.8);
    println!("|B| on the unit sphere: {:.12}", prod.eval_exact(u)?.norm());
    Ok(())
}
