//! Shared domain types, the logistic link and column standardization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, ScreenError};

/// Magnitude below which a standardized coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-8;

const CENTER_TOL: f64 = 1e-10;
const SCALE_TOL: f64 = 1e-8;

/// Inverse logit, `e^eta / (1 + e^eta)`, without overflow for large `|eta|`.
pub fn logistic(eta: f64) -> Result<f64> {
    if !eta.is_finite() {
        return Err(ScreenError::InvalidArgument(format!(
            "logistic of non-finite value {eta}"
        )));
    }
    Ok(logistic_unchecked(eta))
}

#[inline]
pub(crate) fn logistic_unchecked(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Canonical link for a Bernoulli mean.
pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ScreenError::Domain(format!(
            "logit requires 0 < p < 1, got {p}"
        )));
    }
    Ok((p / (1.0 - p)).ln())
}

/// Design matrix, binary response and variable labels.
///
/// The design never carries an intercept column; the intercept lives in
/// [`ScreeningModel::intercept`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    design: DMatrix<f64>,
    response: DVector<f64>,
    names: Vec<String>,
    standardized: bool,
}

impl Dataset {
    /// Builds a raw (unstandardized) dataset.
    pub fn new(design: DMatrix<f64>, response: Vec<u8>, names: Vec<String>) -> Result<Self> {
        let n = design.nrows();
        let k = design.ncols();
        if n < 2 {
            return Err(ScreenError::InvalidArgument(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if k < 1 {
            return Err(ScreenError::InvalidArgument(
                "need at least one predictor".into(),
            ));
        }
        if response.len() != n {
            return Err(ScreenError::InvalidArgument(format!(
                "response has {} entries but design has {n} rows",
                response.len()
            )));
        }
        if names.len() != k {
            return Err(ScreenError::InvalidArgument(format!(
                "{} names supplied for {k} columns",
                names.len()
            )));
        }
        if let Some(bad) = response.iter().find(|&&y| y > 1) {
            return Err(ScreenError::InvalidArgument(format!(
                "response value {bad} is not 0 or 1"
            )));
        }
        let ones = response.iter().filter(|&&y| y == 1).count();
        if ones == 0 || ones == n {
            return Err(ScreenError::InvalidArgument(
                "response must contain both classes".into(),
            ));
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(ScreenError::InvalidArgument(
                "design contains non-finite values".into(),
            ));
        }
        let response = DVector::from_iterator(n, response.iter().map(|&y| f64::from(y)));
        Ok(Self {
            design,
            response,
            names,
            standardized: false,
        })
    }

    /// Builds a dataset whose columns the caller has already transformed.
    ///
    /// Columns must be centered (`|mean| < 1e-10`) and non-constant. Their
    /// scale is taken as given, which lets hand-built designs such as a
    /// single `(1, -1)` column enter the LP directly.
    pub fn prestandardized(
        design: DMatrix<f64>,
        response: Vec<u8>,
        names: Vec<String>,
    ) -> Result<Self> {
        let mut ds = Self::new(design, response, names)?;
        for (j, col) in ds.design.column_iter().enumerate() {
            let mean = col.mean();
            if mean.abs() >= CENTER_TOL {
                return Err(ScreenError::InvalidArgument(format!(
                    "column {} is not centered (mean {mean})",
                    ds.names[j]
                )));
            }
            if col.iter().all(|v| v.abs() < CENTER_TOL) {
                return Err(ScreenError::ConstantColumns(vec![ds.names[j].clone()]));
            }
        }
        ds.standardized = true;
        Ok(ds)
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_standardized(&self) -> bool {
        self.standardized
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn k(&self) -> usize {
        self.design.ncols()
    }

    /// Fraction of observations with response 1.
    pub fn base_rate(&self) -> f64 {
        self.response.mean()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.response.iter().filter(|&&y| y == 1.0).count();
        (self.n() - ones, ones)
    }

    pub fn labels(&self) -> Vec<u8> {
        self.response.iter().map(|&y| y as u8).collect()
    }

    /// Row subset; the result is unstandardized because subset moments differ.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        let design = self.design.select_rows(rows);
        let response = rows.iter().map(|&i| self.response[i] as u8).collect();
        Self::new(design, response, self.names.clone())
    }

    /// Same data with labels 0 and 1 exchanged.
    pub fn relabeled(&self) -> Self {
        let mut out = self.clone();
        out.response.apply(|y| *y = 1.0 - *y);
        out
    }

    /// Same data with columns reordered so new column `j` is old column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.k() {
            return Err(ScreenError::InvalidArgument(
                "permutation length differs from column count".into(),
            ));
        }
        let mut out = self.clone();
        out.design = self.design.select_columns(order);
        out.names = order.iter().map(|&j| self.names[j].clone()).collect();
        Ok(out)
    }
}

/// Column means and standard deviations captured at standardization time.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnTransform {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl ColumnTransform {
    pub fn identity(k: usize) -> Self {
        Self {
            means: vec![0.0; k],
            sds: vec![1.0; k],
        }
    }

    /// Applies the stored transform to raw rows with the training column layout.
    pub fn apply(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.means.len() {
            return Err(ScreenError::InvalidArgument(format!(
                "expected {} columns, got {}",
                self.means.len(),
                raw.ncols()
            )));
        }
        let mut out = raw.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.means[j], self.sds[j]);
            col.apply(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }
}

/// Centers every column to mean 0 and scales it to sample sd 1 (n − 1 denominator).
///
/// Constant columns are rejected by name.
pub fn standardize(raw: &Dataset) -> Result<(Dataset, ColumnTransform)> {
    let n = raw.n() as f64;
    let mut means = Vec::with_capacity(raw.k());
    let mut sds = Vec::with_capacity(raw.k());
    let mut constant = Vec::new();
    for (j, col) in raw.design.column_iter().enumerate() {
        let mean = col.mean();
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = (ss / (n - 1.0)).sqrt();
        if !(sd > f64::EPSILON * mean.abs().max(1.0)) {
            constant.push(raw.names[j].clone());
        }
        means.push(mean);
        sds.push(sd);
    }
    if !constant.is_empty() {
        return Err(ScreenError::ConstantColumns(constant));
    }
    let transform = ColumnTransform { means, sds };
    let mut design = transform.apply(&raw.design)?;
    // Remove the rounding residue of the first pass so the mean is exactly ~0.
    for mut col in design.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    let out = Dataset {
        design,
        response: raw.response.clone(),
        names: raw.names.clone(),
        standardized: true,
    };
    debug_assert!(out.design.column_iter().all(|c| {
        let sd = (c.iter().map(|v| v * v).sum::<f64>() / (n - 1.0)).sqrt();
        c.mean().abs() < CENTER_TOL && (sd - 1.0).abs() < SCALE_TOL
    }));
    Ok((out, transform))
}

/// Intercept plus standardized-scale coefficients fitted at a given `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningModel {
    pub intercept: f64,
    pub coefficients: DVector<f64>,
    pub support: Vec<usize>,
    pub delta: f64,
}

impl ScreeningModel {
    pub fn new(intercept: f64, coefficients: DVector<f64>, delta: f64, zero_tol: f64) -> Self {
        let support = coefficients
            .iter()
            .enumerate()
            .filter(|(_, b)| b.abs() > zero_tol)
            .map(|(j, _)| j)
            .collect();
        Self {
            intercept,
            coefficients,
            support,
            delta,
        }
    }

    /// Intercept-only model.
    pub fn null(intercept: f64, k: usize, delta: f64) -> Self {
        Self::new(intercept, DVector::zeros(k), delta, ZERO_TOL)
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|b| b.abs()).sum()
    }

    /// Fitted probabilities `logistic(intercept + x_i' beta)` on standardized rows.
    pub fn fitted_probabilities(&self, design: &DMatrix<f64>) -> DVector<f64> {
        let eta = design * &self.coefficients;
        eta.map(|e| logistic_unchecked(self.intercept + e))
    }
}
