//! Count negative squares of an indefinite kernel by random sampling.

use slice_schur::blaschke::factor_point;
use slice_schur::kernels::{kernel_neg_squares, schur_kernel, SamplingConfig};
use slice_schur::qlinalg::QMatrix;
use slice_schur::{MatrixSeries, Quaternion, Result};

fn main() -> Result<()> {
    let deg = 64;
    let ba = factor_point(Quaternion::new(0.2, 0.3, 0.0, 0.0), deg)?;
    let bb = factor_point(Quaternion::new(-0.1, 0.0, 0.0, 0.4), deg)?;
    // Theta = diag(B_b, B_a) is J-unitary on the boundary for J = diag(1, -1).
    let coeffs = (0..=deg)
        .map(|n| QMatrix::diag(&[bb.coeff(n), ba.coeff(n)]))
        .collect();
    let theta = MatrixSeries::new(coeffs)?;
    let j = QMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])?;
    let k = schur_kernel(&theta, &j, &j)?;

    let cfg = SamplingConfig { trials: 10, points: 30, radius: 0.6, seed: 3 };
    let ns = kernel_neg_squares(&k, &cfg)?;
    println!("kappa >= {} (stable over {} of {} trials)", ns.kappa, ns.stable_trials, cfg.trials);
    println!("per trial: {:?}", ns.per_trial);

    let spec = ns.witness.gram.herm_eigen(1e-9)?;
    println!("witness Gram: {} eigenvalues, min {:.3e}, max {:.3e}", spec.dimension(), spec.min().unwrap_or(0.0), spec.max().unwrap_or(0.0));
    Ok(())
}
