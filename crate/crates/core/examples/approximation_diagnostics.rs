//! How good is the linearization? Remainder ratios, probability bands and the brute-force oracle.

use dantzig_screen::dantzig::{delta0, solve_dantzig, DantzigInstance};
use dantzig_screen::diagnostics::{
    band_for, brute_force_dantzig, max_cubic_coefficient, model_report, remainder_ratio,
};
use dantzig_screen::pipeline::{generate_synthetic, SyntheticSpec};

fn main() -> dantzig_screen::Result<()> {
    println!("max |p(1-p)(2p-1)| = {:.6}", max_cubic_coefficient());
    for p in [0.35, 0.5, 0.65] {
        println!(
            "ratio at beta0 = 0, x'b = 0.4, p = {p}: {:+.4}",
            remainder_ratio(0.0, 0.4, p)?
        );
    }
    for beta0 in [0.0, -0.6] {
        let band = band_for(beta0, 0.1);
        println!(
            "beta0 = {beta0}: 10% band ({:.3}, {:.3}) [{:?}]",
            band.low, band.high, band.condition
        );
    }

    let data = generate_synthetic(&SyntheticSpec {
        n: 30,
        k: 2,
        active: vec![0],
        coefficients: vec![1.0],
        intercept: 0.0,
        seed: 4,
    })?;
    let ds = data.standardized()?;
    let delta = 0.5 * delta0(&ds);
    let lp = solve_dantzig(&DantzigInstance::new(&ds, delta)?)?;
    let oracle = brute_force_dantzig(&ds, delta, 5.0, 401)?;
    println!(
        "LP     beta {} support {:?}",
        fmt(&lp.coefficients),
        lp.support
    );
    println!(
        "oracle beta {} support {:?}",
        fmt(&oracle.coefficients),
        oracle.support
    );

    let report = model_report(&ds, &lp, 0.1)?;
    println!(
        "max plug-in |r| {:.4}, max bound {:.4}, all in band: {}, flagged {:?}",
        report.max_abs_ratio, report.max_abs_bound, report.admissible, report.flagged
    );
    Ok(())
}

fn fmt(v: &nalgebra::DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", parts.join(", "))
}
