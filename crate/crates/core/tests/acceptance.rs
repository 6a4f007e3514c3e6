//! Acceptance suite: one test per exit criterion, each printing a PASS/FAIL line.

mod common;

use std::fs;
use std::io::Write;
use std::time::{Duration, Instant};

use common::{brute_auc, planted, random_lp, rng, vertex_enumeration, Enumerated};
use dantzig_screen::dantzig::{
    self, slp_refine, solve_dantzig, DantzigInstance, SLP_MAX_ROUNDS, SLP_STEP_TOL,
};
use dantzig_screen::diagnostics::{
    brute_force_dantzig, max_cubic_coefficient, remainder_ratio, DEFAULT_ORACLE_BOX,
    DEFAULT_ORACLE_POINTS,
};
use dantzig_screen::lp::{solve_lp, LpProblem, LpStatus, DEFAULT_FEAS_TOL};
use dantzig_screen::path::{compute_path, rank_variables, shrink_positions};
use dantzig_screen::pipeline::{
    generate_synthetic, run_screen, write_synthetic_csv, RunConfig, SyntheticSpec,
};
use dantzig_screen::selection::{auc, cross_validate, CvConfig};
use dantzig_screen::{logistic, Dataset, ZERO_TOL};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Written straight to stderr so the line shows up even when the harness captures output.
fn verdict(id: u32, name: &str, pass: bool, detail: &str) {
    let line = format!(
        "[{}] criterion {id:>2}: {name} ({detail})\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {name} ({detail})");
}

fn within(id: u32, start: Instant, limit: Duration) {
    let spent = start.elapsed();
    assert!(
        spent < limit,
        "criterion {id} exceeded its time budget: {spent:?} >= {limit:?}"
    );
}

#[derive(Debug, PartialEq)]
enum Oracle {
    Infeasible,
    Unbounded,
    Optimal(f64),
}

/// Vertex enumeration, plus a recession-direction check for unboundedness:
/// minimize `c'd` over `{Ad >= 0, d >= 0, 1'd <= 1}`.
fn lp_oracle(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Oracle {
    let best = match vertex_enumeration(c, a, b) {
        Enumerated::Infeasible => return Oracle::Infeasible,
        Enumerated::Optimal(v) => v,
    };
    let (r, m) = a.shape();
    let mut ra = DMatrix::zeros(r + 1, m);
    ra.view_mut((0, 0), (r, m)).copy_from(a);
    ra.row_mut(r).fill(-1.0);
    let mut rb = DVector::zeros(r + 1);
    rb[r] = -1.0;
    match vertex_enumeration(c, &ra, &rb) {
        Enumerated::Optimal(v) if v < -1e-9 => Oracle::Unbounded,
        _ => Oracle::Optimal(best),
    }
}

#[test]
fn c01_lp_matches_vertex_enumeration() {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst: f64 = 0.0;
    let mut agree = 0;
    let mut counts = [0usize; 3];
    for _ in 0..50 {
        let m = rng.random_range(1..=6);
        let r = rng.random_range(1..=8);
        let (c, a, b) = random_lp(&mut rng, m, r);
        let oracle = lp_oracle(&c, &a, &b);
        let p = LpProblem::new(c, a, b).unwrap();
        let sol = solve_lp(&p, DEFAULT_FEAS_TOL, p.default_max_iters()).unwrap();
        let ok = match (&oracle, sol.status) {
            (Oracle::Optimal(v), LpStatus::Optimal) => {
                counts[0] += 1;
                worst = worst.max((v - sol.objective).abs());
                (v - sol.objective).abs() <= 1e-6
            }
            (Oracle::Infeasible, LpStatus::Infeasible) => {
                counts[1] += 1;
                true
            }
            (Oracle::Unbounded, LpStatus::Unbounded) => {
                counts[2] += 1;
                true
            }
            _ => false,
        };
        agree += usize::from(ok);
    }
    within(1, start, Duration::from_secs(5));
    verdict(
        1,
        "LP oracle equivalence",
        agree == 50 && worst <= 1e-6,
        &format!(
            "{agree}/50 agree; optimal {} infeasible {} unbounded {}; max objective error {worst:.2e}",
            counts[0], counts[1], counts[2]
        ),
    );
}

fn two_point() -> Dataset {
    Dataset::prestandardized(
        DMatrix::from_column_slice(2, 1, &[1.0, -1.0]),
        vec![1, 0],
        vec!["x1".into()],
    )
    .unwrap()
}

#[test]
fn c02_analytic_path() {
    let start = Instant::now();
    let ds = two_point();
    let mut worst: f64 = 0.0;
    for m in [5, 101] {
        let path = compute_path(&ds, m).unwrap();
        for (t, &d) in path.grid.iter().enumerate() {
            let want = (2.0 * (1.0 - d)).max(0.0);
            worst = worst.max((path.coefficients[(t, 0)] - want).abs());
        }
    }
    within(2, start, Duration::from_secs(1));
    verdict(
        2,
        "analytic two-point path",
        worst <= 1e-8,
        &format!("max deviation {worst:.2e}"),
    );
}

#[test]
fn c03_path_feasibility_and_termination() {
    let start = Instant::now();
    let (mut worst_band, mut worst_u) = (f64::NEG_INFINITY, 0.0f64);
    let mut last_rows_zero = true;
    for seed in 0..20u64 {
        let ds = planted(60, 25, &[0, 5, 12], &[1.0, -1.0, 0.5], 0.0, 300 + seed);
        let path = compute_path(&ds, 101).unwrap();
        let x = ds.design();
        let yc = ds.response().add_scalar(-ds.base_rate());
        let xty = x.tr_mul(&yc);
        let gram = x.tr_mul(x) * 0.25;
        for t in 0..path.len() {
            let beta = path.coefficients.row(t).transpose();
            let excess = (&xty - &gram * &beta).amax() - path.grid[t];
            worst_band = worst_band.max(excess);
        }
        worst_u = path.u_gap.iter().fold(worst_u, |a, &g| a.max(g));
        last_rows_zero &= path
            .coefficients
            .row(path.len() - 1)
            .iter()
            .all(|&b| b == 0.0);
    }
    within(3, start, Duration::from_secs(120));
    verdict(
        3,
        "path feasibility and termination",
        worst_band <= 1e-6 && last_rows_zero && worst_u <= 1e-8,
        &format!("max band excess {worst_band:.2e}, delta0 rows zero: {last_rows_zero}, max |u - |beta|| {worst_u:.2e}"),
    );
}

const PLANTED: [usize; 3] = [4, 17, 31];

#[test]
fn c04_planted_signal_recovery() {
    let start = Instant::now();
    let (mut ranked, mut selected) = (0, 0);
    for seed in 0..20u64 {
        let ds = planted(100, 40, &PLANTED, &[1.0, -1.0, 1.0], 0.0, 1000 + seed);
        let path = compute_path(&ds, 101).unwrap();
        let ranking = rank_variables(&shrink_positions(&path, ZERO_TOL).position);
        if PLANTED.iter().all(|&j| ranking.rank[j] <= 10) {
            ranked += 1;
        }
        let cv = cross_validate(
            &ds,
            &CvConfig {
                seed,
                ..CvConfig::default()
            },
        )
        .unwrap();
        if PLANTED.iter().all(|j| cv.selected.contains(j)) {
            selected += 1;
        }
    }
    within(4, start, Duration::from_secs(600));
    verdict(
        4,
        "planted-signal recovery",
        ranked >= 18 && selected >= 18,
        &format!("top-10 ranks in {ranked}/20 seeds, delta* support in {selected}/20 seeds"),
    );
}

#[test]
fn c05_null_control() {
    let start = Instant::now();
    let mut below = 0;
    let mut aucs = Vec::new();
    for seed in 0..20u64 {
        let ds = planted(100, 20, &[], &[], 0.0, 5000 + seed);
        let cv = cross_validate(
            &ds,
            &CvConfig {
                seed,
                ..CvConfig::default()
            },
        )
        .unwrap();
        let a = cv.mean_auc[cv.delta_star_index];
        aucs.push(a);
        below += usize::from(a < 0.65);
    }
    within(5, start, Duration::from_secs(300));
    let max = aucs.iter().cloned().fold(0.0, f64::max);
    verdict(
        5,
        "null control",
        below >= 16,
        &format!("mean CV-AUC at delta* below 0.65 in {below}/20 seeds, largest {max:.3}"),
    );
}

#[test]
fn c06_auc_oracle() {
    let start = Instant::now();
    let mut rng = rng(6);
    let mut exact = 0;
    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(2..=30);
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        if !labels.contains(&0) || !labels.contains(&1) {
            continue;
        }
        // few distinct values so ties are common
        let levels = rng.random_range(1..=6);
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 * 0.1)
            .collect();
        done += 1;
        exact += usize::from(auc(&scores, &labels).unwrap() == brute_auc(&scores, &labels));
    }
    within(6, start, Duration::from_secs(5));
    verdict(
        6,
        "AUC equals all-pairs count",
        exact == 200,
        &format!("{exact}/200 exact"),
    );
}

#[test]
fn c07_remainder_constants() {
    let start = Instant::now();
    let c = max_cubic_coefficient();
    let in_range = (0.0962..=0.0963).contains(&c);
    let zero_at_half = [-4.0, -0.3, 0.0, 2.5]
        .iter()
        .all(|&t| remainder_ratio(0.7, t, 0.5).unwrap() == 0.0);

    let mut rng = rng(7);
    let (mut qualifying, mut all_small, mut worst) = (0, true, 0.0f64);
    for seed in 0..200u64 {
        let coefficients: Vec<f64> = (0..5).map(|_| rng.random_range(-0.6..0.6)).collect();
        let intercept = rng.random_range(-0.4..0.6);
        let ds = planted(
            50,
            5,
            &[0, 1, 2, 3, 4],
            &coefficients,
            intercept,
            7000 + seed,
        );
        let d0 = dantzig::delta0(&ds);
        let inst = DantzigInstance::new(&ds, 0.5 * d0).unwrap();
        let lin = solve_dantzig(&inst).unwrap();
        let fit = slp_refine(&inst, &lin, SLP_MAX_ROUNDS, SLP_STEP_TOL)
            .unwrap()
            .model;
        let p = fit.fitted_probabilities(ds.design());
        let base = logistic(fit.intercept).unwrap();
        if base < 0.35 || p.iter().any(|&pi| !(pi > 0.302 && pi < 0.698)) {
            continue;
        }
        qualifying += 1;
        for (i, &pi) in p.iter().enumerate() {
            let linear = (ds.design().row(i) * &fit.coefficients)[0];
            let r = remainder_ratio(fit.intercept, linear, pi).unwrap().abs();
            worst = worst.max(r);
            all_small &= r < 0.1;
        }
    }
    within(7, start, Duration::from_secs(10));
    verdict(
        7,
        "remainder-ratio constants",
        in_range && zero_at_half && qualifying > 0 && all_small,
        &format!(
            "max cubic {c:.6}, zero at 1/2: {zero_at_half}, {qualifying} qualifying instances, max plug-in |r| {worst:.4}"
        ),
    );
}

const ORACLE_STEP: f64 = 2.0 * DEFAULT_ORACLE_BOX / (DEFAULT_ORACLE_POINTS - 1) as f64;

#[test]
fn c08_linearization_vs_brute_force() {
    let start = Instant::now();
    let mut rng = rng(8);
    let (mut used, mut matched, mut slp_monotone) = (0, 0, true);
    let mut seed = 0u64;
    let mut mismatches = Vec::new();
    while used < 20 {
        seed += 1;
        assert!(seed < 2000, "not enough qualifying tiny instances");
        let k = rng.random_range(1..=2);
        let n = rng.random_range(16..=30);
        let coefficients: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let active: Vec<usize> = (0..k).collect();
        let ds = planted(n, k, &active, &coefficients, 0.0, 8000 + seed);
        let delta = 0.5 * dantzig::delta0(&ds);
        // No grid point feasible: there is no oracle fit to qualify the instance.
        let Ok(oracle) = brute_force_dantzig(&ds, delta, DEFAULT_ORACLE_BOX, DEFAULT_ORACLE_POINTS)
        else {
            continue;
        };
        let p = oracle.fitted_probabilities(ds.design());
        if p.iter().any(|&pi| !(pi > 0.3 && pi < 0.7)) {
            continue;
        }
        used += 1;
        let inst = DantzigInstance::new(&ds, delta).unwrap();
        let lin = solve_dantzig(&inst).unwrap();
        // The oracle cannot tell a coefficient within one grid cell of zero from zero.
        let oracle_support: Vec<usize> = (0..k)
            .filter(|&j| oracle.coefficients[j].abs() > ORACLE_STEP * 1.5)
            .collect();
        if lin.support == oracle_support {
            matched += 1;
        } else {
            mismatches.push(format!(
                "seed {seed}: lp {:?} oracle {:?}",
                lin.coefficients.as_slice(),
                oracle.coefficients.as_slice()
            ));
        }
        let refined = slp_refine(&inst, &lin, SLP_MAX_ROUNDS, SLP_STEP_TOL).unwrap();
        slp_monotone &= refined.final_residual <= refined.initial_residual;
    }
    within(8, start, Duration::from_secs(300));
    for m in &mismatches {
        let _ = writeln!(std::io::stderr(), "    mismatch {m}");
    }
    verdict(
        8,
        "linearization vs brute-force oracle",
        matched >= 19 && slp_monotone,
        &format!("support agreement {matched}/20, SLP never worsens residual: {slp_monotone}"),
    );
}

#[test]
fn c09_real_data_mode_and_tie_structure() {
    // Ten lipid subclasses ordered TG=Cer>GlcCer>GalCer=GM3=PS>dhSulf=PE>DG=LPI.
    let (a, b, c, d, e) = (0.9, 0.8, 0.6, 0.4, 0.2);
    let ranking = rank_variables(&[a, a, b, c, c, c, d, d, e, e]);
    let ties_ok =
        ranking.rank == vec![1, 1, 3, 4, 4, 4, 7, 7, 9, 9] && ranking.tie_groups.len() == 5;

    // Real-data mode: textual diagnosis labels, arbitrary column names.
    let data = generate_synthetic(&SyntheticSpec {
        n: 80,
        k: 12,
        active: vec![2, 7],
        coefficients: vec![1.5, -1.5],
        intercept: 0.3,
        seed: 9,
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("lipids.csv");
    let mut w = csv::Writer::from_path(&input).unwrap();
    let mut header: Vec<String> = (0..12).map(|j| format!("LIPID_{j}")).collect();
    header.insert(0, "diagnosis".into());
    w.write_record(&header).unwrap();
    for i in 0..80 {
        let mut rec = vec![if data.response[i] == 1 { "PD" } else { "HC" }.to_string()];
        rec.extend(data.design.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec).unwrap();
    }
    w.flush().unwrap();
    let out = dir.path().join("out");
    let outcome = run_screen(&RunConfig::new(&input, "diagnosis", &out)).unwrap();
    let tables_ok = ["ranking.csv", "cv_auc.csv", "selected.csv"]
        .iter()
        .all(|f| out.join(f).exists())
        && outcome.ingested.label_map == Some(("HC".into(), "PD".into()));
    verdict(
        9,
        "real-data mode and subclass tie structure",
        ties_ok && tables_ok,
        &format!("ranks {:?}, tables written: {tables_ok}", ranking.rank),
    );
}

#[test]
fn c10_pipeline_determinism() {
    let start = Instant::now();
    let data = generate_synthetic(&SyntheticSpec {
        n: 100,
        k: 40,
        active: PLANTED.to_vec(),
        coefficients: vec![1.0, -1.0, 1.0],
        intercept: 0.0,
        seed: 10,
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("synthetic.csv");
    write_synthetic_csv(&data, &input).unwrap();
    let mut runs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let mut cfg = RunConfig::new(&input, "y", &out);
        cfg.svg = true;
        cfg.slp = true;
        let outcome = run_screen(&cfg).unwrap();
        let bytes: Vec<(String, Vec<u8>)> = outcome
            .files
            .iter()
            .map(|f| {
                (
                    f.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(f).unwrap(),
                )
            })
            .collect();
        runs.push(bytes);
    }
    // run.json echoes the output directory, which differs between the two runs.
    let same = runs[0].len() == runs[1].len()
        && runs[0]
            .iter()
            .zip(&runs[1])
            .all(|((na, a), (nb, b))| na == nb && (na == "run.json" || a == b));
    let manifest_same = {
        let strip = |b: &[u8]| {
            String::from_utf8_lossy(b)
                .lines()
                .filter(|l| !l.contains("\"out\""))
                .collect::<Vec<_>>()
                .join("\n")
        };
        let a = runs[0].iter().find(|(n, _)| n == "run.json").unwrap();
        let b = runs[1].iter().find(|(n, _)| n == "run.json").unwrap();
        strip(&a.1) == strip(&b.1)
    };
    within(10, start, Duration::from_secs(60));
    verdict(
        10,
        "pipeline determinism",
        same && manifest_same,
        &format!("{} files compared byte for byte", runs[0].len()),
    );
}
