//! End-to-end screening: CSV in, ranking/profile/CV tables out.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};
use serde::Serialize;

use crate::dantzig::{slp_refine, DantzigInstance, SlpStop, SLP_MAX_ROUNDS, SLP_STEP_TOL};
use crate::diagnostics::{model_report, ApproxReport};
use crate::error::{Result, ScreenError};
use crate::path::{
    compute_path, rank_variables, shrink_positions, Ranking, ShrinkPositions, SolutionPath,
};
use crate::selection::{cross_validate_on_path, Criterion, CvConfig, CvResult, Scoring};
use crate::svg::{line_chart, Series};
use crate::types::{logistic_unchecked, standardize, ColumnTransform, Dataset, ZERO_TOL};

/// Remainder-ratio threshold used for the diagnostics table.
pub const DIAGNOSTIC_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: PathBuf,
    pub response: String,
    pub grid: usize,
    pub folds: usize,
    pub seed: u64,
    pub cap_fraction: f64,
    #[serde(serialize_with = "scoring_name")]
    pub scoring: Scoring,
    pub zero_tol: f64,
    pub slp: bool,
    pub out: PathBuf,
    pub svg: bool,
}

fn scoring_name<S: serde::Serializer>(s: &Scoring, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(match s {
        Scoring::PlugIn => "plugin",
        Scoring::Refit => "refit",
    })
}

impl RunConfig {
    pub fn new(
        input: impl Into<PathBuf>,
        response: impl Into<String>,
        out: impl Into<PathBuf>,
    ) -> Self {
        Self {
            input: input.into(),
            response: response.into(),
            grid: crate::path::DEFAULT_GRID_SIZE,
            folds: crate::selection::DEFAULT_FOLDS,
            seed: crate::DEFAULT_SEED,
            cap_fraction: crate::selection::DEFAULT_CAP_FRACTION,
            scoring: Scoring::PlugIn,
            zero_tol: ZERO_TOL,
            slp: false,
            out: out.into(),
            svg: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(ScreenError::InvalidArgument(format!(
                "grid must be >= 2, got {}",
                self.grid
            )));
        }
        if self.folds < 2 {
            return Err(ScreenError::InvalidArgument(format!(
                "folds must be >= 2, got {}",
                self.folds
            )));
        }
        if !(self.cap_fraction > 0.0 && self.cap_fraction <= 1.0) {
            return Err(ScreenError::InvalidArgument(format!(
                "cap must lie in (0, 1], got {}",
                self.cap_fraction
            )));
        }
        if !(self.zero_tol >= 0.0) {
            return Err(ScreenError::InvalidArgument(
                "zero tolerance must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// A standardized dataset read from CSV, with what was done to get there.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    pub transform: ColumnTransform,
    pub dropped_rows: usize,
    /// `(label mapped to 0, label mapped to 1)` when the response was textual.
    pub label_map: Option<(String, String)>,
}

const MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "null"];

/// Reads a headed CSV; rows with a missing value are dropped.
///
/// The response may be 0/1 or any two distinct labels, in which case the
/// lexicographically larger label becomes 1.
pub fn ingest_csv(path: &Path, response_column: &str) -> Result<Ingested> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let Some(yc) = headers.iter().position(|h| h == response_column) else {
        return Err(ScreenError::BadInput(format!(
            "response column '{response_column}' not found"
        )));
    };
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != yc)
        .map(|(_, h)| h.to_string())
        .collect();
    if names.is_empty() {
        return Err(ScreenError::BadInput("no predictor columns".into()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut dropped = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut values = Vec::with_capacity(names.len());
        let mut missing = false;
        for (i, field) in record.iter().enumerate() {
            if i == yc {
                continue;
            }
            if MISSING.contains(&field) {
                missing = true;
                continue;
            }
            let v: f64 = field.parse().map_err(|_| {
                ScreenError::BadInput(format!(
                    "row {}: column '{}' has non-numeric value '{field}'",
                    line + 2,
                    headers.get(i).unwrap_or("?")
                ))
            })?;
            values.push(v);
        }
        let label = record.get(yc).unwrap_or("");
        if missing || MISSING.contains(&label) {
            dropped += 1;
            continue;
        }
        rows.push(values);
        labels.push(label.to_string());
    }
    if dropped > 0 {
        log::info!("dropped {dropped} row(s) with missing values");
    }

    let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(ScreenError::BadInput(format!(
            "response must take exactly two values, found {}",
            distinct.len()
        )));
    }
    let (lo, hi): (&str, &str) = {
        let mut it = distinct.iter();
        (
            it.next().copied().unwrap_or_default(),
            it.next().copied().unwrap_or_default(),
        )
    };
    let numeric = distinct
        .iter()
        .all(|s| s.parse::<f64>().is_ok_and(|v| v == 0.0 || v == 1.0));
    let label_map = if numeric {
        None
    } else {
        log::info!("response labels mapped: '{lo}' -> 0, '{hi}' -> 1");
        Some((lo.to_string(), hi.to_string()))
    };
    let response: Vec<u8> = labels
        .iter()
        .map(|s| {
            if numeric {
                u8::from(s.parse::<f64>().is_ok_and(|v| v == 1.0))
            } else {
                u8::from(s == hi)
            }
        })
        .collect();
    let ones = response.iter().filter(|&&y| y == 1).count();
    if ones < 2 || response.len() - ones < 2 {
        return Err(ScreenError::BadInput(format!(
            "need at least 2 rows per class, got {} and {ones}",
            response.len() - ones
        )));
    }

    let n = rows.len();
    let design = DMatrix::from_fn(n, names.len(), |i, j| rows[i][j]);
    let raw = Dataset::new(design, response, names)?;
    let (dataset, transform) = standardize(&raw)?;
    Ok(Ingested {
        dataset,
        transform,
        dropped_rows: dropped,
        label_map,
    })
}

/// Ground truth for a simulated logistic dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub k: usize,
    pub active: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub spec: SyntheticSpec,
    pub design: DMatrix<f64>,
    pub response: Vec<u8>,
    pub probabilities: Vec<f64>,
    pub names: Vec<String>,
}

impl SyntheticData {
    /// Raw dataset; fails if the draw produced a single class.
    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::new(
            self.design.clone(),
            self.response.clone(),
            self.names.clone(),
        )
    }

    pub fn standardized(&self) -> Result<Dataset> {
        Ok(standardize(&self.dataset()?)?.0)
    }
}

/// Independent standard normal predictors, `p_i = logistic(intercept + sum b_j x_ij)`,
/// Bernoulli responses.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.n < 2 || spec.k < 1 {
        return Err(ScreenError::InvalidArgument(format!(
            "degenerate size n = {}, k = {}",
            spec.n, spec.k
        )));
    }
    if spec.active.len() != spec.coefficients.len() {
        return Err(ScreenError::InvalidArgument(
            "active set and coefficients differ in length".into(),
        ));
    }
    if spec.active.iter().any(|&j| j >= spec.k) {
        return Err(ScreenError::InvalidArgument(
            "active index out of range".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let design = DMatrix::from_fn(spec.n, spec.k, |_, _| 0.0);
    let mut design = design;
    // Row-major draw order so the stream does not depend on storage layout.
    for i in 0..spec.n {
        for j in 0..spec.k {
            design[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let mut probabilities = Vec::with_capacity(spec.n);
    let mut response = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let eta = spec.intercept
            + spec
                .active
                .iter()
                .zip(&spec.coefficients)
                .map(|(&j, &b)| b * design[(i, j)])
                .sum::<f64>();
        let p = logistic_unchecked(eta);
        probabilities.push(p);
        let draw = Bernoulli::new(p).map_err(|e| ScreenError::InvalidArgument(e.to_string()))?;
        response.push(u8::from(draw.sample(&mut rng)));
    }
    Ok(SyntheticData {
        spec: spec.clone(),
        design,
        response,
        probabilities,
        names: (1..=spec.k).map(|j| format!("x{j}")).collect(),
    })
}

/// Writes `data` as CSV with columns `x1..xk,y` and its ground truth as `<path>.truth.json`.
pub fn write_synthetic_csv(data: &SyntheticData, path: &Path) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = data.names.clone();
    header.push("y".into());
    w.write_record(&header)?;
    for i in 0..data.design.nrows() {
        let mut rec: Vec<String> = data.design.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(data.response[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    let truth = path.with_extension("truth.json");
    fs::write(&truth, serde_json::to_string_pretty(&data.spec)? + "\n")?;
    Ok(truth)
}

/// Everything a screening run produced, in memory.
#[derive(Debug, Clone)]
pub struct ScreenOutcome {
    pub ingested: Ingested,
    pub path: SolutionPath,
    pub positions: ShrinkPositions,
    pub ranking: Ranking,
    pub cv: CvResult,
    pub report: ApproxReport,
    pub slp_stop: Option<SlpStop>,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    n: usize,
    k: usize,
    dropped_rows: usize,
    label_map: Option<[&'a str; 2]>,
    delta0: f64,
    delta_star: f64,
    cap: usize,
    selected: Vec<&'a str>,
    criterion: &'static str,
    slp: Option<String>,
    diagnostics_admissible: bool,
    max_abs_remainder_ratio: f64,
}

/// Runs path, ranking, cross-validation and diagnostics and writes the tables to `config.out`.
pub fn run_screen(config: &RunConfig) -> Result<ScreenOutcome> {
    config.validate()?;
    let ingested = ingest_csv(&config.input, &config.response)?;
    let ds = &ingested.dataset;
    log::info!("screening n = {}, k = {}", ds.n(), ds.k());

    let path = compute_path(ds, config.grid)?;
    let positions = shrink_positions(&path, config.zero_tol);
    let ranking = rank_variables(&positions.position);
    let cv_config = CvConfig {
        grid_size: config.grid,
        folds: config.folds,
        seed: config.seed,
        cap_fraction: config.cap_fraction,
        scoring: config.scoring,
        criterion: Criterion::Auc,
    };
    let cv = cross_validate_on_path(ds, &path, &positions, &cv_config)?;

    let mut model = path.model_at(cv.delta_star_index);
    let mut slp_stop = None;
    if config.slp {
        let inst = DantzigInstance::new(ds, cv.delta_star)?;
        let out = slp_refine(&inst, &model, SLP_MAX_ROUNDS, SLP_STEP_TOL)?;
        if out.warning() {
            log::warn!("SLP stopped early at delta* after {} round(s)", out.rounds);
        }
        slp_stop = Some(out.stop);
        model = out.model;
    }
    let report = model_report(ds, &model, DIAGNOSTIC_EPSILON)?;

    fs::create_dir_all(&config.out)?;
    let names = ds.names();
    let mut files = Vec::new();

    let f = config.out.join("path.csv");
    let mut w = csv::Writer::from_path(&f)?;
    w.write_record(std::iter::once("delta").chain(names.iter().map(String::as_str)))?;
    for t in 0..path.len() {
        let mut rec = vec![path.grid[t].to_string()];
        rec.extend(path.coefficients.row(t).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    files.push(f);

    let f = config.out.join("ranking.csv");
    let mut w = csv::Writer::from_path(&f)?;
    w.write_record(["variable", "shrink_position", "rank", "reentry"])?;
    for &j in ranking.tie_groups.iter().flatten() {
        w.write_record([
            names[j].clone(),
            ranking.shrink_position[j].to_string(),
            ranking.rank[j].to_string(),
            u8::from(positions.reentry[j]).to_string(),
        ])?;
    }
    w.flush()?;
    files.push(f);

    let f = config.out.join("cv_auc.csv");
    let mut w = csv::Writer::from_path(&f)?;
    let mut header = vec!["delta".to_string()];
    header.extend((1..=cv.fold_auc.nrows()).map(|i| format!("fold_{i}")));
    header.extend(["mean_auc", "support_size", "admissible", "delta_star"].map(String::from));
    w.write_record(&header)?;
    for t in 0..cv.grid.len() {
        let mut rec = vec![cv.grid[t].to_string()];
        rec.extend(cv.fold_auc.column(t).iter().map(|v| v.to_string()));
        rec.push(cv.mean_auc[t].to_string());
        rec.push(cv.support_size[t].to_string());
        rec.push(u8::from(cv.admissible[t]).to_string());
        rec.push(u8::from(t == cv.delta_star_index).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    files.push(f);

    let f = config.out.join("selected.csv");
    let mut w = csv::Writer::from_path(&f)?;
    w.write_record(["variable", "shrink_position", "rank", "coefficient"])?;
    let mut selected = cv.selected.clone();
    selected.sort_by_key(|&j| (ranking.rank[j], j));
    for &j in &selected {
        w.write_record([
            names[j].clone(),
            positions.position[j].to_string(),
            ranking.rank[j].to_string(),
            model.coefficients[j].to_string(),
        ])?;
    }
    w.flush()?;
    files.push(f);

    let f = config.out.join("diagnostics.csv");
    let mut w = csv::Writer::from_path(&f)?;
    w.write_record([
        "observation",
        "fitted_probability",
        "ratio_plug_in",
        "ratio_bound",
        "in_region",
    ])?;
    let flagged: BTreeSet<usize> = report.flagged.iter().copied().collect();
    for i in 0..report.fitted.len() {
        w.write_record([
            (i + 1).to_string(),
            report.fitted[i].to_string(),
            report.plug_in[i].to_string(),
            report.bound[i].to_string(),
            u8::from(!flagged.contains(&i)).to_string(),
        ])?;
    }
    w.flush()?;
    files.push(f);

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        n: ds.n(),
        k: ds.k(),
        dropped_rows: ingested.dropped_rows,
        label_map: ingested
            .label_map
            .as_ref()
            .map(|(a, b)| [a.as_str(), b.as_str()]),
        delta0: path.delta0,
        delta_star: cv.delta_star,
        cap: cv.cap,
        selected: selected.iter().map(|&j| names[j].as_str()).collect(),
        criterion: "auc",
        slp: slp_stop.map(|s| format!("{s:?}")),
        diagnostics_admissible: report.admissible,
        max_abs_remainder_ratio: report.max_abs_ratio,
    };
    let f = config.out.join("run.json");
    fs::write(&f, serde_json::to_string_pretty(&manifest)? + "\n")?;
    files.push(f);

    if config.svg {
        let cols: Vec<Vec<f64>> = (0..ds.k())
            .map(|j| path.column(j).as_slice().to_vec())
            .collect();
        let series: Vec<Series<'_>> = cols
            .iter()
            .zip(names)
            .map(|(c, n)| Series {
                label: n,
                values: c,
                dashed: false,
            })
            .collect();
        let f = config.out.join("profile.svg");
        fs::write(
            &f,
            line_chart(
                "Coefficient profile",
                &path.grid,
                &series,
                Some(cv.delta_star),
            ),
        )?;
        files.push(f);

        let folds: Vec<(String, Vec<f64>)> = (0..cv.fold_auc.nrows())
            .map(|i| {
                (
                    format!("fold {}", i + 1),
                    cv.fold_auc.row(i).iter().copied().collect(),
                )
            })
            .collect();
        let mut series: Vec<Series<'_>> = folds
            .iter()
            .map(|(l, v)| Series {
                label: l,
                values: v,
                dashed: false,
            })
            .collect();
        series.push(Series {
            label: "mean",
            values: &cv.mean_auc,
            dashed: true,
        });
        let f = config.out.join("cv_auc.svg");
        fs::write(
            &f,
            line_chart(
                "Cross-validated AUC",
                &cv.grid,
                &series,
                Some(cv.delta_star),
            ),
        )?;
        files.push(f);
    }

    Ok(ScreenOutcome {
        ingested,
        path,
        positions,
        ranking,
        cv,
        report,
        slp_stop,
        files,
    })
}
