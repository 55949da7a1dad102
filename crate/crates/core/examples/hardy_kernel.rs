//! The reproducing kernel of the quaternionic Hardy space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slice_schur::kernels::{hardy_kernel_forms, kernel_neg_squares, KernelSeries, SamplingConfig};
use slice_schur::{LSeries, Quaternion, Result};

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = Quaternion::random_in_ball(&mut rng, 0.7);
    let q = Quaternion::random_in_ball(&mut rng, 0.7);

    let (left, right) = hardy_kernel_forms(p, q)?;
    let series = LSeries::hardy_column(q, 128).eval(p);
    println!("k(p,q) left form  = {left:.8}");
    println!("k(p,q) right form = {right:.8}");
    println!("sum p^n conj(q)^n = {series:.8}");

    let k = KernelSeries::hardy(64);
    let cfg = SamplingConfig { trials: 5, points: 20, ..Default::default() };
    let ns = kernel_neg_squares(&k, &cfg)?;
    println!("negative squares of the Hardy kernel: {}", ns.kappa);
    let ns = kernel_neg_squares(&k.negated(), &cfg)?;
    println!("negative squares of its negative on {} points: {}", cfg.points, ns.kappa);
    Ok(())
}
