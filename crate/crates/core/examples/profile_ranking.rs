//! Coefficient profile on synthetic data and the shrink-to-zero importance ranking read from it.

use dantzig_screen::path::{compute_path, rank_variables, shrink_positions};
use dantzig_screen::pipeline::{generate_synthetic, SyntheticSpec};
use dantzig_screen::ZERO_TOL;

fn main() -> dantzig_screen::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        n: 120,
        k: 10,
        active: vec![2, 7],
        coefficients: vec![2.0, -1.0],
        intercept: 0.0,
        seed: 7,
    })?;
    let ds = data.standardized()?;
    let path = compute_path(&ds, 101)?;
    let positions = shrink_positions(&path, ZERO_TOL);
    let ranking = rank_variables(&positions.position);

    println!("delta0 = {:.4}", path.delta0);
    println!(
        "{:<6} {:>10} {:>5} {:>8}",
        "name", "position", "rank", "reentry"
    );
    for group in &ranking.tie_groups {
        for &j in group {
            println!(
                "{:<6} {:>10.4} {:>5} {:>8}",
                ds.names()[j],
                positions.position[j],
                ranking.rank[j],
                positions.reentry[j]
            );
        }
    }
    Ok(())
}
