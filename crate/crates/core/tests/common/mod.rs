//! Independent oracles and data generators shared by the integration tests.
#![allow(dead_code)]

use dantzig_screen::pipeline::{generate_synthetic, SyntheticSpec};
use dantzig_screen::Dataset;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enumerated {
    Infeasible,
    Optimal(f64),
}

/// Minimum of `c'z` over all basic feasible solutions of `Az >= b, z >= 0`.
///
/// Every choice of `m` tight constraints among the `r + m` inequalities is
/// solved as a square system; feasible points are kept.
pub fn vertex_enumeration(c: &DVector<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> Enumerated {
    let m = c.len();
    let r = b.len();
    let mut rows = DMatrix::zeros(r + m, m);
    let mut rhs = DVector::zeros(r + m);
    rows.view_mut((0, 0), (r, m)).copy_from(a);
    rhs.rows_mut(0, r).copy_from(b);
    for j in 0..m {
        rows[(r + j, j)] = 1.0;
    }
    let mut best: Option<f64> = None;
    for subset in combinations(r + m, m) {
        let sys = rows.select_rows(&subset);
        let sub_rhs = rhs.select_rows(&subset);
        let lu = sys.clone().lu();
        let Some(z) = lu.solve(&sub_rhs) else {
            continue;
        };
        if (&sys * &z - &sub_rhs).amax() > 1e-9 || z.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let slack = &rows * &z - &rhs;
        if slack.iter().all(|&s| s >= -1e-9) {
            let obj = c.dot(&z);
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best.map_or(Enumerated::Infeasible, Enumerated::Optimal)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All-pairs Mann-Whitney count.
pub fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut twice, mut pairs) = (0u64, 0u64);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1;
                if scores[i] > scores[j] {
                    twice += 2;
                } else if scores[i] == scores[j] {
                    twice += 1;
                }
            }
        }
    }
    twice as f64 / (2 * pairs) as f64
}

/// Random LP with `m` variables, `r` rows and entries in `[-5, 5]`.
pub fn random_lp(
    rng: &mut ChaCha8Rng,
    m: usize,
    r: usize,
) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let c = DVector::from_fn(m, |_, _| rng.random_range(-5.0..5.0));
    let a = DMatrix::from_fn(r, m, |_, _| rng.random_range(-5.0..5.0));
    let b = DVector::from_fn(r, |_, _| rng.random_range(-5.0..5.0));
    (c, a, b)
}

/// Standardized planted-signal data; redraws with shifted seeds until both classes appear.
pub fn planted(
    n: usize,
    k: usize,
    active: &[usize],
    coefficients: &[f64],
    intercept: f64,
    seed: u64,
) -> Dataset {
    for attempt in 0..100 {
        let spec = SyntheticSpec {
            n,
            k,
            active: active.to_vec(),
            coefficients: coefficients.to_vec(),
            intercept,
            seed: seed.wrapping_add(attempt * 1_000_003),
        };
        if let Ok(ds) = generate_synthetic(&spec).unwrap().standardized() {
            return ds;
        }
    }
    panic!("could not draw a two-class dataset");
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
