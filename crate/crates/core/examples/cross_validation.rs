//! Choose delta by cross-validated AUC among grid points whose selection respects the size cap.

use dantzig_screen::pipeline::{generate_synthetic, SyntheticSpec};
use dantzig_screen::selection::{cross_validate, CvConfig};

fn main() -> dantzig_screen::Result<()> {
    let data = generate_synthetic(&SyntheticSpec {
        n: 100,
        k: 40,
        active: vec![4, 17, 31],
        coefficients: vec![1.5, -1.5, 1.5],
        intercept: 0.0,
        seed: 2,
    })?;
    let ds = data.standardized()?;
    let cv = cross_validate(&ds, &CvConfig::default())?;

    for t in (0..cv.grid.len()).step_by(10) {
        println!(
            "delta {:>8.3}  mean AUC {:.3}  selected {:>2}{}",
            cv.grid[t],
            cv.mean_auc[t],
            cv.support_size[t],
            if cv.admissible[t] { "" } else { "  (over cap)" }
        );
    }
    let names: Vec<&str> = cv
        .selected
        .iter()
        .map(|&j| ds.names()[j].as_str())
        .collect();
    println!(
        "delta* = {:.4} (AUC {:.3}), cap {}, selected {:?}",
        cv.delta_star, cv.mean_auc[cv.delta_star_index], cv.cap, names
    );
    Ok(())
}
