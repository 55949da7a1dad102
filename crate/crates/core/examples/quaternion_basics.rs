//! Quaternion arithmetic, slice decomposition and 2-spheres.

use slice_schur::quat::{on_slice, same_sphere};
use slice_schur::{ImagUnit, Quaternion, Result};

fn main() -> Result<()> {
    let p = Quaternion::new(0.3, 0.4, -0.2, 0.1);
    let q = Quaternion::new(-0.1, 0.2, 0.5, 0.0);

    println!("p        = {p:.4}");
    println!("q        = {q:.4}");
    println!("pq       = {:.4}", p * q);
    println!("qp       = {:.4}", q * p);
    println!("p^-1 p   = {:.4}", p.inverse()? * p);

    let form = p.decompose()?;
    println!("Re p = {:.4}, |Im p| = {:.4}, I_p = {:?}", form.re, form.im_norm, form.dir.components());

    // Every point of [p] has the same real part and imaginary modulus.
    let sphere = p.sphere()?;
    let other = sphere.point(ImagUnit::K);
    println!("[p] = {{re {:.4}, im {:.4}}}; contains {other:.4}: {}", sphere.re, sphere.im_norm, same_sphere(p, other));

    let on_i = on_slice(0.5, 0.25, ImagUnit::I);
    println!("0.5 + 0.25 i = {on_i}");
    Ok(())
}
