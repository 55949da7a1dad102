//! Carathéodory functions from co-isometric colligations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slice_schur::qlinalg::QMatrix;
use slice_schur::realize::{check_cara_kernel, eval_cara, random_cara_colligation};
use slice_schur::Result;

fn main() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (label, j) in [
        ("J = I", QMatrix::identity(2)),
        ("J = diag(1,-1)", QMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])?),
    ] {
        let col = random_cara_colligation(&mut rng, 3, j, 0.9)?;
        println!("{label}: co-isometry defect {:.2e}", col.coisometry_defect());
        let phi = eval_cara(&col, 4)?;
        for (n, e) in phi.coeff(0).entries().iter().enumerate() {
            println!("  phi_0[{}][{}] = {e:.4}", n / 2, n % 2);
        }
        let check = check_cara_kernel(&col, 40)?;
        println!("  kernel identity residual {:.2e}", check.variant_i);
        println!("  with the trailing J instead  {:.2e}", check.variant_ii);
        println!("  phi_0 consistency            {:.2e}", check.phi0_consistency);
    }
    Ok(())
}
