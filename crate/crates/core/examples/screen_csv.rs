//! Full screening run on a CSV: `cargo run --example screen_csv -- data.csv diagnosis out/`.
//!
//! Without arguments a demo file with text labels is generated first.

use std::path::PathBuf;

use dantzig_screen::pipeline::{generate_synthetic, run_screen, RunConfig, SyntheticSpec};

fn main() -> dantzig_screen::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (input, response, out) = match args.as_slice() {
        [i, r, o] => (PathBuf::from(i), r.clone(), PathBuf::from(o)),
        _ => {
            let dir = std::env::temp_dir().join("dantzig-screen-demo");
            std::fs::create_dir_all(&dir)?;
            (demo_file(&dir)?, "diagnosis".into(), dir.join("out"))
        }
    };
    let mut config = RunConfig::new(&input, response, &out);
    config.svg = true;
    config.slp = true;
    let outcome = run_screen(&config)?;

    let names = outcome.ingested.dataset.names();
    println!("top of the ranking:");
    for group in outcome.ranking.tie_groups.iter().take(5) {
        let members: Vec<&str> = group.iter().map(|&j| names[j].as_str()).collect();
        println!(
            "  rank {:>2}: {}",
            outcome.ranking.rank[group[0]],
            members.join(" = ")
        );
    }
    let cv = &outcome.cv;
    println!(
        "delta* = {:.4}, mean AUC {:.3}",
        cv.delta_star, cv.mean_auc[cv.delta_star_index]
    );
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn demo_file(dir: &std::path::Path) -> dantzig_screen::Result<PathBuf> {
    let data = generate_synthetic(&SyntheticSpec {
        n: 120,
        k: 10,
        active: vec![0, 1, 5],
        coefficients: vec![1.2, 1.2, -0.8],
        intercept: 0.0,
        seed: 5,
    })?;
    let path = dir.join("lipids.csv");
    let mut w = csv::Writer::from_path(&path)?;
    let mut header = vec!["diagnosis".to_string()];
    header.extend(
        [
            "TG", "Cer", "GlcCer", "GalCer", "GM3", "PS", "dhSulf", "PE", "DG", "LPI",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for i in 0..data.response.len() {
        let mut rec = vec![if data.response[i] == 1 { "PD" } else { "HC" }.to_string()];
        rec.extend(data.design.row(i).iter().map(|v| format!("{:.6}", v + 5.0)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(path)
}
