//! Solve a small LP cold, then again from the previous basis after the right-hand side moves.

use dantzig_screen::lp::{solve_lp, warm_start_solve, LpProblem, DEFAULT_FEAS_TOL};
use nalgebra::{DMatrix, DVector};

fn main() -> dantzig_screen::Result<()> {
    // min z1 + z2  s.t.  z1 + 2 z2 >= 2,  3 z1 + z2 >= 3
    let c = DVector::from_vec(vec![1.0, 1.0]);
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 1.0]);
    let p = LpProblem::new(c.clone(), a.clone(), DVector::from_vec(vec![2.0, 3.0]))?;
    let cold = solve_lp(&p, DEFAULT_FEAS_TOL, p.default_max_iters())?;
    println!(
        "cold:  {:?} z = {} objective {:.4} in {} pivots",
        cold.status,
        fmt(cold.z.as_ref().unwrap()),
        cold.objective,
        cold.iterations
    );
    println!("duals: {}", fmt(cold.duals.as_ref().unwrap()));

    let moved = LpProblem::new(c, a, DVector::from_vec(vec![2.5, 3.0]))?;
    let warm = warm_start_solve(
        &moved,
        &cold.basis,
        DEFAULT_FEAS_TOL,
        moved.default_max_iters(),
    )?;
    println!(
        "warm:  {:?} z = {} objective {:.4} in {} pivots",
        warm.status,
        fmt(warm.z.as_ref().unwrap()),
        warm.objective,
        warm.iterations
    );
    Ok(())
}

fn fmt(v: &nalgebra::DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}
