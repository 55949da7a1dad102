//! Solve a mixed interpolation problem: a Schur multiplier vanishing at
//! given points and on given spheres.

use slice_schur::interp::{check_bschurmult, solve, InterpProblem};
use slice_schur::Result;

fn main() -> Result<()> {
    let prob = InterpProblem::canonical_mixed();
    let sol = solve(&prob, 64)?;
    println!("state dimension: {}", sol.a.rows());
    println!("d = {:.6}", sol.d);
    for (name, check) in &sol.diagnostics {
        println!("  {name:<20} {:.2e} <= {:.0e} {}", check.value, check.tol, if check.pass { "ok" } else { "FAIL" });
    }
    for p in sol.check_points() {
        println!("B({p:.3}) = {:.2e}", sol.eval(p)?.norm());
    }
    println!("min eigenvalue of the multiplier kernel: {:.2e}", check_bschurmult(&sol, 30)?);
    println!("{}", serde_json::to_string(&prob).expect("problem serializes"));
    Ok(())
}
