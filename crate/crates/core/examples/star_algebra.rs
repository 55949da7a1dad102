//! The star product on left power series, its inverse and the splitting
//! of a series into two complex functions.

use slice_schur::series::ext_from_slice;
use slice_schur::{ImagUnit, LSeries, Quaternion, Result};

fn main() -> Result<()> {
    let f = LSeries::from_quaternions(&[
        Quaternion::new(1.0, 0.2, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.3, 0.0),
        Quaternion::new(0.1, 0.0, 0.0, -0.2),
    ])?
    .with_degree(32);
    let g = LSeries::from_quaternions(&[Quaternion::new(0.5, 0.0, 0.1, 0.0), Quaternion::new(0.0, 0.4, 0.0, 0.0)])?
        .with_degree(32);

    let p = Quaternion::new(0.2, -0.1, 0.3, 0.25);
    let fg = f.star_mul(&g)?;

    // (f*g)(p) = f(p) g(f(p)^-1 p f(p)) when f(p) is nonzero.
    let fp = f.eval(p);
    let moved = fp.inverse()? * p * fp;
    println!("(f*g)(p)             = {:.6}", fg.eval(p));
    println!("f(p) g(f(p)^-1 p f(p)) = {:.6}", fp * g.eval(moved));

    let inv = f.star_inv()?;
    let unit = f.star_mul(&inv)?;
    println!("f * f^-* at p = {:.6}", unit.eval(p));

    let (i, j) = (ImagUnit::I, ImagUnit::J);
    let (fa, fb) = f.restrict_split(i, j)?;
    let back = LSeries::from_split(&fa, &fb, i, j)?;
    let err = back.try_sub(&f)?.max_coeff();
    println!("split and rebuild error: {err:.2e}");

    // The values on one slice determine the function everywhere.
    let ext = ext_from_slice(i, p, |z| f.eval(z));
    println!("f(p) from the slice C_i: {ext:.6}");
    println!("f(p) directly:           {:.6}", f.eval(p));
    Ok(())
}
