//! The two-observation, one-variable dataset whose path is known in closed form: beta(delta) = 2 (1 - delta)+.

use dantzig_screen::path::compute_path;
use dantzig_screen::Dataset;
use nalgebra::DMatrix;

fn main() -> dantzig_screen::Result<()> {
    let ds = Dataset::prestandardized(
        DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
        vec![1, 0],
        vec!["x".into()],
    )?;
    let path = compute_path(&ds, 9)?;
    println!("delta0 = {}, intercept = {}", path.delta0, path.intercept);
    println!("{:>8} {:>10} {:>10}", "delta", "beta", "2(1-d)+");
    for (t, d) in path.grid.iter().enumerate() {
        println!(
            "{d:>8.3} {:>10.6} {:>10.6}",
            path.coefficients[(t, 0)],
            (2.0 * (1.0 - d)).max(0.0)
        );
    }
    Ok(())
}
