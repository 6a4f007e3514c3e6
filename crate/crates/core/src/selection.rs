//! Cross-validated choice of `delta` under a cap on the selected-set size.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, ScreenError};
use crate::path::{compute_path, shrink_positions, ShrinkPositions, SolutionPath};
use crate::types::{
    logistic_unchecked, logit, standardize, ColumnTransform, Dataset, ScreeningModel, ZERO_TOL,
};

pub const DEFAULT_FOLDS: usize = 5;
pub const DEFAULT_CAP_FRACTION: f64 = 0.25;
pub const REFIT_MAX_ITERS: usize = 50;
pub const REFIT_TOL: f64 = 1e-8;

/// Stratified `K`-fold partition of `0..labels.len()`, deterministic per seed.
///
/// Each class is shuffled and dealt round-robin; the second class continues
/// from the fold where the first stopped so fold sizes differ by at most one.
pub fn kfold_split(labels: &[u8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = labels.len();
    if folds < 2 || n < folds {
        return Err(ScreenError::InvalidArgument(format!(
            "need 2 <= folds <= n, got folds = {folds}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for class in [1u8, 0u8] {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(ScreenError::StratificationInfeasible {
                folds,
                class,
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            out[next].push(i);
            next = (next + 1) % folds;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Mann-Whitney AUC: `(concordant + tied / 2) / (positives * negatives)`.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(ScreenError::InvalidArgument(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(ScreenError::InvalidArgument("NaN score".into()));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Integer pair counts keep the result exact up to the final division.
    let (mut neg_below, mut concordant2, mut pos, mut neg) = (0u64, 0u64, 0u64, 0u64);
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        let (mut gp, mut gn) = (0u64, 0u64);
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            if labels[idx[j]] == 1 {
                gp += 1;
            } else {
                gn += 1;
            }
            j += 1;
        }
        concordant2 += 2 * gp * neg_below + gp * gn;
        neg_below += gn;
        pos += gp;
        neg += gn;
        i = j;
    }
    if pos == 0 || neg == 0 {
        return Err(ScreenError::UndefinedAuc);
    }
    Ok(concordant2 as f64 / (2 * pos * neg) as f64)
}

/// `logistic(beta0 + x' beta*)` for raw rows under the training transform.
pub fn predict_prob(
    model: &ScreeningModel,
    new_design: &DMatrix<f64>,
    training_transform: &ColumnTransform,
) -> Result<DVector<f64>> {
    if new_design.ncols() != model.coefficients.len() {
        return Err(ScreenError::InvalidArgument(format!(
            "model has {} coefficients, design has {} columns",
            model.coefficients.len(),
            new_design.ncols()
        )));
    }
    let z = training_transform.apply(new_design)?;
    Ok(model.fitted_probabilities(&z))
}

/// Unpenalized logistic maximum likelihood on `support` by Newton/IRLS.
///
/// The returned model has zeros off the support and `delta` 0.
pub fn refit_logistic(
    dataset: &Dataset,
    support: &[usize],
    max_iters: usize,
    tol: f64,
) -> Result<ScreeningModel> {
    let n = dataset.n();
    let s = support.len();
    if s >= n {
        return Err(ScreenError::InvalidArgument(format!(
            "support of size {s} needs more than {n} observations"
        )));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= dataset.k()) {
        return Err(ScreenError::InvalidArgument(format!(
            "support index {bad} out of range"
        )));
    }
    let y = dataset.response();
    let mut z = DMatrix::from_element(n, s + 1, 1.0);
    for (c, &j) in support.iter().enumerate() {
        z.set_column(c + 1, &dataset.design().column(j));
    }
    let mut theta = DVector::zeros(s + 1);
    theta[0] = logit(dataset.base_rate())?;
    for _ in 0..max_iters {
        let eta = &z * &theta;
        let p = eta.map(logistic_unchecked);
        let grad = z.tr_mul(&(y - &p));
        if grad.amax() < tol {
            let mut coefficients = DVector::zeros(dataset.k());
            for (c, &j) in support.iter().enumerate() {
                coefficients[j] = theta[c + 1];
            }
            return Ok(ScreeningModel::new(theta[0], coefficients, 0.0, ZERO_TOL));
        }
        if y.iter()
            .zip(p.iter())
            .all(|(yi, pi)| (yi - pi).abs() < 1e-6)
            || theta.amax() > 50.0
        {
            return Err(ScreenError::RefitFailed(
                "coefficients diverge (separated data)".into(),
            ));
        }
        let mut zw = z.clone();
        for (i, mut row) in zw.row_iter_mut().enumerate() {
            row *= p[i] * (1.0 - p[i]);
        }
        let hessian = z.tr_mul(&zw);
        let Some(chol) = hessian.cholesky() else {
            return Err(ScreenError::RefitFailed(
                "singular information matrix".into(),
            ));
        };
        theta += chol.solve(&grad);
    }
    Err(ScreenError::RefitFailed(format!(
        "no convergence in {max_iters} Newton steps"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scoring {
    /// Held-out rows are scored with the LP coefficients directly.
    #[default]
    PlugIn,
    /// Unpenalized refit on the fold's support; falls back to plug-in on failure.
    Refit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criterion {
    #[default]
    Auc,
    /// Stored as accuracy, `1 - misclassification rate` at threshold 1/2.
    Misclassification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub grid_size: usize,
    pub folds: usize,
    pub seed: u64,
    pub cap_fraction: f64,
    pub scoring: Scoring,
    pub criterion: Criterion,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            grid_size: crate::path::DEFAULT_GRID_SIZE,
            folds: DEFAULT_FOLDS,
            seed: crate::DEFAULT_SEED,
            cap_fraction: DEFAULT_CAP_FRACTION,
            scoring: Scoring::PlugIn,
            criterion: Criterion::Auc,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub grid: Vec<f64>,
    /// `folds x m`; holds accuracy instead of AUC under [`Criterion::Misclassification`].
    pub fold_auc: DMatrix<f64>,
    pub mean_auc: Vec<f64>,
    /// Inclusion-rule selection size on the full data at each grid point.
    pub support_size: Vec<usize>,
    pub admissible: Vec<bool>,
    pub delta_star: f64,
    pub delta_star_index: usize,
    pub cap: usize,
    /// Variables selected at `delta_star` by the inclusion rule.
    pub selected: Vec<usize>,
    pub criterion: Criterion,
}

/// Full-data path, then fold paths scored at matching relative grid positions.
pub fn cross_validate(dataset: &Dataset, config: &CvConfig) -> Result<CvResult> {
    let path = compute_path(dataset, config.grid_size)?;
    let positions = shrink_positions(&path, ZERO_TOL);
    cross_validate_on_path(dataset, &path, &positions, config)
}

/// [`cross_validate`] reusing a full-data path already computed with the same grid size.
pub fn cross_validate_on_path(
    dataset: &Dataset,
    path: &SolutionPath,
    positions: &ShrinkPositions,
    config: &CvConfig,
) -> Result<CvResult> {
    if !(config.cap_fraction > 0.0 && config.cap_fraction <= 1.0) {
        return Err(ScreenError::InvalidArgument(format!(
            "cap fraction must lie in (0, 1], got {}",
            config.cap_fraction
        )));
    }
    if !dataset.is_standardized() {
        return Err(ScreenError::InvalidArgument(
            "cross-validation expects standardized data".into(),
        ));
    }
    let m = path.len();
    let k = dataset.k();
    let cap = (config.cap_fraction * k as f64 + 1e-9).floor() as usize;
    let support_size: Vec<usize> = path
        .grid
        .iter()
        .map(|&d| positions.selected_at(d).len())
        .collect();
    let admissible: Vec<bool> = support_size.iter().map(|&s| s <= cap).collect();

    let labels = dataset.labels();
    let folds = kfold_split(&labels, config.folds, config.seed)?;
    let per_fold: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|test| score_fold(dataset, test, m, config))
        .collect::<Result<_>>()?;

    let mut fold_auc = DMatrix::zeros(folds.len(), m);
    for (f, row) in per_fold.iter().enumerate() {
        for (t, &v) in row.iter().enumerate() {
            fold_auc[(f, t)] = v;
        }
    }
    let mean_auc: Vec<f64> = (0..m).map(|t| fold_auc.column(t).mean()).collect();

    let mut best: Option<usize> = None;
    for t in 0..m {
        if admissible[t] && best.is_none_or(|b| mean_auc[t] >= mean_auc[b]) {
            best = Some(t);
        }
    }
    let Some(star) = best else {
        return Err(ScreenError::NoAdmissibleDelta { cap });
    };
    let delta_star = path.grid[star];
    Ok(CvResult {
        grid: path.grid.clone(),
        fold_auc,
        mean_auc,
        support_size,
        admissible,
        delta_star,
        delta_star_index: star,
        cap,
        selected: positions.selected_at(delta_star),
        criterion: config.criterion,
    })
}

fn score_fold(dataset: &Dataset, test: &[usize], m: usize, config: &CvConfig) -> Result<Vec<f64>> {
    let n = dataset.n();
    let mut in_test = vec![false; n];
    for &i in test {
        in_test[i] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    let (train_std, transform) = standardize(&dataset.subset(&train)?)?;
    // Fold paths live on their own grids; index t means the same fraction of each fold's delta0.
    let fold_path = compute_path(&train_std, m)?;
    let test_design = dataset.design().select_rows(test);
    let test_labels: Vec<u8> = test.iter().map(|&i| dataset.response()[i] as u8).collect();

    (0..m)
        .map(|t| {
            let plug_in = fold_path.model_at(t);
            let model = match config.scoring {
                Scoring::PlugIn => plug_in,
                Scoring::Refit => {
                    match refit_logistic(&train_std, &plug_in.support, REFIT_MAX_ITERS, REFIT_TOL) {
                        Ok(refit) => refit,
                        Err(e) => {
                            log::debug!(
                                "refit at grid point {t} failed ({e}); using LP coefficients"
                            );
                            plug_in
                        }
                    }
                }
            };
            let scores = predict_prob(&model, &test_design, &transform)?;
            match config.criterion {
                Criterion::Auc => auc(scores.as_slice(), &test_labels),
                Criterion::Misclassification => Ok(accuracy(scores.as_slice(), &test_labels)),
            }
        })
        .collect()
}

fn accuracy(scores: &[f64], labels: &[u8]) -> f64 {
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| (s > 0.5) == (y == 1))
        .count();
    hits as f64 / labels.len() as f64
}
