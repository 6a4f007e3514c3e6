//! Write a planted-signal dataset and its ground truth to disk.

use dantzig_screen::pipeline::{generate_synthetic, write_synthetic_csv, SyntheticSpec};

fn main() -> dantzig_screen::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("planted.csv")
            .to_string_lossy()
            .into_owned()
    });
    let data = generate_synthetic(&SyntheticSpec {
        n: 100,
        k: 40,
        active: vec![4, 17, 31],
        coefficients: vec![1.0, -1.0, 1.0],
        intercept: 0.0,
        seed: 20240101,
    })?;
    let truth = write_synthetic_csv(&data, out.as_ref())?;
    let ones = data.response.iter().filter(|&&y| y == 1).count();
    println!(
        "wrote {out} ({} rows, {ones} positives) and {}",
        data.response.len(),
        truth.display()
    );
    Ok(())
}
