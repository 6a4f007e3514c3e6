//! The binary-response Dantzig selector as a linear program.
//!
//! Expanding the logistic mean to first order around `beta = (beta0, 0)` with
//! `beta0 = logit(ybar)` replaces the nonlinear score constraint by the band
//!
//! ```text
//! || X'(y - ybar) - 1/4 X'X beta* ||_inf <= delta
//! ```
//!
//! and minimizing `||beta*||_1` over that band is an LP in `(u, v)` with
//! `v = u + beta*`:
//!
//! ```text
//! min 1'u  s.t.  [ G  -G] (u, v) >= -t - delta
//!                [-G   G] (u, v) >=  t - delta
//!                [2I  -I] (u, v) >= 0,        u, v >= 0
//! ```
//!
//! where `G = X'X / 4` and `t = X'(y - ybar)`. Successive linear programming
//! replaces `G` and `t` by the expansion at the previous iterate.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, ScreenError};
use crate::lp::{self, Basis, LpProblem, LpStatus, DEFAULT_FEAS_TOL};
use crate::types::{logit, Dataset, ScreeningModel, ZERO_TOL};

/// Slope of the logistic mean at the expansion point used by the LP.
pub const LINEAR_SLOPE: f64 = 0.25;

pub const SLP_MAX_ROUNDS: usize = 20;
pub const SLP_STEP_TOL: f64 = 1e-6;

/// A standardized dataset paired with one value of the tuning parameter.
#[derive(Debug, Clone)]
pub struct DantzigInstance<'a> {
    dataset: &'a Dataset,
    delta: f64,
    centered_response: DVector<f64>,
    intercept0: f64,
}

impl<'a> DantzigInstance<'a> {
    pub fn new(dataset: &'a Dataset, delta: f64) -> Result<Self> {
        if !dataset.is_standardized() {
            return Err(ScreenError::InvalidArgument(
                "the Dantzig LP needs a standardized dataset".into(),
            ));
        }
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(ScreenError::InvalidArgument(format!(
                "delta must be finite and non-negative, got {delta}"
            )));
        }
        let ybar = dataset.base_rate();
        let centered_response = dataset.response().add_scalar(-ybar);
        Ok(Self {
            dataset,
            delta,
            centered_response,
            intercept0: logit(ybar)?,
        })
    }

    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn centered_response(&self) -> &DVector<f64> {
        &self.centered_response
    }

    pub fn intercept0(&self) -> f64 {
        self.intercept0
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.dataset, delta)
    }
}

/// Smallest `delta` at which `beta* = 0` is feasible: `max_j |X_j'(y - ybar)|`.
pub fn delta0(dataset: &Dataset) -> f64 {
    let yc = dataset.response().add_scalar(-dataset.base_rate());
    dataset.design().tr_mul(&yc).amax()
}

/// `min ||beta||_1  s.t.  ||target - gram * beta||_inf <= delta`, for any `delta`.
#[derive(Debug, Clone)]
pub(crate) struct Band {
    gram: DMatrix<f64>,
    target: DVector<f64>,
    constraints: DMatrix<f64>,
    cost: DVector<f64>,
}

/// Solved band LP: coefficients plus the basis for warm starts.
#[derive(Debug, Clone)]
pub(crate) struct BandSolution {
    pub beta: DVector<f64>,
    pub u: DVector<f64>,
    pub basis: Basis,
    pub iterations: usize,
}

impl Band {
    pub fn new(gram: DMatrix<f64>, target: DVector<f64>) -> Self {
        let k = target.len();
        let mut a = DMatrix::zeros(3 * k, 2 * k);
        a.view_mut((0, 0), (k, k)).copy_from(&gram);
        a.view_mut((0, k), (k, k)).copy_from(&(-&gram));
        a.view_mut((k, 0), (k, k)).copy_from(&(-&gram));
        a.view_mut((k, k), (k, k)).copy_from(&gram);
        for j in 0..k {
            a[(2 * k + j, j)] = 2.0;
            a[(2 * k + j, k + j)] = -1.0;
        }
        let mut cost = DVector::zeros(2 * k);
        cost.rows_mut(0, k).fill(1.0);
        Self {
            gram,
            target,
            constraints: a,
            cost,
        }
    }

    /// Linearization at `beta = (logit(ybar), 0)` with the fixed slope 1/4.
    pub fn linearized(dataset: &Dataset, centered_response: &DVector<f64>) -> Self {
        let x = dataset.design();
        Self::new(x.tr_mul(x) * LINEAR_SLOPE, x.tr_mul(centered_response))
    }

    pub fn k(&self) -> usize {
        self.target.len()
    }

    pub fn problem(&self, delta: f64) -> Result<LpProblem> {
        let k = self.k();
        let mut b = DVector::zeros(3 * k);
        for j in 0..k {
            b[j] = -self.target[j] - delta;
            b[k + j] = self.target[j] - delta;
        }
        LpProblem::new(self.cost.clone(), self.constraints.clone(), b)
    }

    pub fn solve(&self, delta: f64, hint: &Basis) -> Result<BandSolution> {
        let problem = self.problem(delta)?;
        let sol = lp::warm_start_solve(
            &problem,
            hint,
            DEFAULT_FEAS_TOL,
            problem.default_max_iters(),
        )?;
        match (sol.status, sol.z) {
            (LpStatus::Optimal, Some(z)) => {
                let k = self.k();
                let u = z.rows(0, k).into_owned();
                let v = z.rows(k, k).into_owned();
                let mut beta = v - &u;
                // Nonbasic pairs come back as exact zeros; rounding residue is snapped.
                beta.apply(|b| {
                    if b.abs() <= 1e-13 {
                        *b = 0.0
                    }
                });
                Ok(BandSolution {
                    beta,
                    u,
                    basis: sol.basis,
                    iterations: sol.iterations,
                })
            }
            (status, _) => Err(ScreenError::SolverFailure { delta, status }),
        }
    }

    /// `||target - gram * beta||_inf`.
    pub fn violation(&self, beta: &DVector<f64>) -> f64 {
        (&self.target - &self.gram * beta).amax()
    }
}

/// Emits the canonical-form LP for this instance.
pub fn build_lp(instance: &DantzigInstance<'_>) -> Result<LpProblem> {
    Band::linearized(instance.dataset, &instance.centered_response).problem(instance.delta)
}

/// Linearized Dantzig fit at the instance's `delta`.
pub fn solve_dantzig(instance: &DantzigInstance<'_>) -> Result<ScreeningModel> {
    let band = Band::linearized(instance.dataset, &instance.centered_response);
    let sol = band.solve(instance.delta, &Basis::empty())?;
    Ok(ScreeningModel::new(
        instance.intercept0,
        sol.beta,
        instance.delta,
        ZERO_TOL,
    ))
}

/// `||X'y_c - 1/4 X'X beta*||_inf`, the quantity the LP bounds by `delta`.
pub fn linearized_violation(dataset: &Dataset, coefficients: &DVector<f64>) -> Result<f64> {
    check_width(dataset, coefficients)?;
    let yc = dataset.response().add_scalar(-dataset.base_rate());
    Ok(Band::linearized(dataset, &yc).violation(coefficients))
}

/// Exact score vector `X'(y - p)` with `p_i = logistic(beta0 + x_i' beta*)`.
pub fn score_residual(dataset: &Dataset, model: &ScreeningModel) -> Result<DVector<f64>> {
    check_width(dataset, &model.coefficients)?;
    let p = model.fitted_probabilities(dataset.design());
    Ok(dataset.design().tr_mul(&(dataset.response() - p)))
}

fn check_width(dataset: &Dataset, coefficients: &DVector<f64>) -> Result<()> {
    if coefficients.len() != dataset.k() {
        return Err(ScreenError::InvalidArgument(format!(
            "model has {} coefficients, dataset has {} columns",
            coefficients.len(),
            dataset.k()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlpStop {
    /// The starting model already met the exact constraint.
    FixedPoint,
    /// Successive iterates moved less than the step tolerance.
    Converged,
    /// The next iterate would have increased the exact score residual.
    Rejected,
    MaxRounds,
    /// An LP in the sequence failed; the best iterate so far is returned.
    SolverFailure,
}

#[derive(Debug, Clone)]
pub struct SlpOutcome {
    pub model: ScreeningModel,
    /// Accepted re-expansion rounds.
    pub rounds: usize,
    pub converged: bool,
    pub stop: SlpStop,
    pub initial_residual: f64,
    pub final_residual: f64,
}

impl SlpOutcome {
    pub fn warning(&self) -> bool {
        self.stop == SlpStop::SolverFailure
    }
}

/// Successive linear programming toward the exact (nonlinear) Dantzig constraint.
///
/// Each round expands the logistic mean at the current iterate `b`:
/// `p(beta) ~ p_b + W_b X (beta - b)`, giving the band with
/// `gram = X' W_b X` and `target = X'(y - p_b) + gram * b`. The intercept
/// stays at the instance's `logit(ybar)`. A step that raises
/// `||X'(y - p)||_inf` is discarded and ends the sequence.
pub fn slp_refine(
    instance: &DantzigInstance<'_>,
    initial: &ScreeningModel,
    max_rounds: usize,
    step_tol: f64,
) -> Result<SlpOutcome> {
    let dataset = instance.dataset;
    let x = dataset.design();
    let y = dataset.response();
    let delta = instance.delta;
    let mut current = ScreeningModel::new(
        instance.intercept0,
        initial.coefficients.clone(),
        delta,
        ZERO_TOL,
    );
    let initial_residual = score_residual(dataset, &current)?.amax();
    let mut residual = initial_residual;
    let done = |model, rounds, stop, residual| {
        Ok(SlpOutcome {
            model,
            rounds,
            converged: matches!(stop, SlpStop::Converged | SlpStop::FixedPoint),
            stop,
            initial_residual,
            final_residual: residual,
        })
    };
    if residual <= delta {
        return done(current, 0, SlpStop::FixedPoint, residual);
    }
    let mut hint = Basis::empty();
    for round in 0..max_rounds {
        let p = current.fitted_probabilities(x);
        let w = p.map(|pi| pi * (1.0 - pi));
        let mut xw = x.clone();
        for (i, mut row) in xw.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let gram = x.tr_mul(&xw);
        let target = x.tr_mul(&(y - &p)) + &gram * &current.coefficients;
        let band = Band::new(gram, target);
        let sol = match band.solve(delta, &hint) {
            Ok(sol) => sol,
            Err(e) => {
                log::warn!("SLP round {} failed: {e}", round + 1);
                return done(current, round, SlpStop::SolverFailure, residual);
            }
        };
        hint = sol.basis;
        let step = (&sol.beta - &current.coefficients).amax();
        let candidate = ScreeningModel::new(instance.intercept0, sol.beta, delta, ZERO_TOL);
        let next_residual = score_residual(dataset, &candidate)?.amax();
        if next_residual > residual {
            return done(current, round, SlpStop::Rejected, residual);
        }
        current = candidate;
        residual = next_residual;
        if step < step_tol {
            return done(current, round + 1, SlpStop::Converged, residual);
        }
    }
    done(current, max_rounds, SlpStop::MaxRounds, residual)
}
