//! Realize the interpolating multiplier as the transfer function of a
//! unitary colligation and verify the reproducing-kernel identity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slice_schur::interp::{solve, InterpProblem};
use slice_schur::realize::{check_ag_identity, observability_index, random_unitary_colligation, UnitaryColligation};
use slice_schur::Result;

fn main() -> Result<()> {
    let sol = solve(&InterpProblem::canonical_mixed(), 64)?;
    let col = UnitaryColligation::from_interp(&sol)?;
    let rel = col.relation();
    println!("relation residuals: standard {:.2e}, swapped {:?}", rel.standard, rel.swapped);

    let series = col.eval_schur(64)?;
    let same = series.to_scalar_series()? == sol.multiplier;
    println!("transfer function equals the multiplier: {same}");

    let id = check_ag_identity(&col, 40)?;
    println!("kernel identity residual ({:?}): {:.2e}", id.orientation, id.residual);
    println!("observability rank: {} of {}", observability_index(&col.c, &col.a)?, col.a.rows());

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let random = random_unitary_colligation(&mut rng, 3, 2, false)?;
    let id = check_ag_identity(&random, 40)?;
    println!("random colligation identity residual: {:.2e}", id.residual);
    Ok(())
}
