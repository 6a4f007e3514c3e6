//! Re-linearize around the current fit to shrink the exact score residual.

use dantzig_screen::dantzig::{
    delta0, slp_refine, solve_dantzig, DantzigInstance, SLP_MAX_ROUNDS, SLP_STEP_TOL,
};
use dantzig_screen::pipeline::{generate_synthetic, SyntheticSpec};

fn main() -> dantzig_screen::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        n: 80,
        k: 5,
        active: vec![0, 3],
        coefficients: vec![2.0, -1.5],
        intercept: 0.5,
        seed: 11,
    })?;
    let ds = data.standardized()?;
    let inst = DantzigInstance::new(&ds, 0.3 * delta0(&ds))?;
    let linear = solve_dantzig(&inst)?;
    let out = slp_refine(&inst, &linear, SLP_MAX_ROUNDS, SLP_STEP_TOL)?;

    println!("delta            {:.4}", inst.delta());
    println!("linearized beta  {}", fmt(&linear.coefficients));
    println!("refined beta     {}", fmt(&out.model.coefficients));
    println!(
        "exact residual   {:.4} -> {:.4}",
        out.initial_residual, out.final_residual
    );
    println!(
        "stop             {:?} after {} round(s)",
        out.stop, out.rounds
    );
    if out.warning() {
        println!("the refined model still exceeds delta on the exact constraint");
    }
    Ok(())
}

fn fmt(v: &nalgebra::DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}
