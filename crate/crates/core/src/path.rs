//! Coefficient paths over a uniform `delta` grid, shrink-to-zero positions
//! and the importance ranking derived from them.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dantzig::{self, Band};
use crate::error::{Result, ScreenError};
use crate::lp::Basis;
use crate::types::{logit, Dataset, ScreeningModel, ZERO_TOL};

pub const DEFAULT_GRID_SIZE: usize = 101;

/// `m` equally spaced points from 0 to `delta0` inclusive.
pub fn make_grid(delta0: f64, m: usize) -> Result<Vec<f64>> {
    if !(delta0 > 0.0) || !delta0.is_finite() {
        return Err(ScreenError::DegenerateData(format!(
            "delta0 = {delta0}: the response is uncorrelated with every predictor"
        )));
    }
    if m < 2 {
        return Err(ScreenError::InvalidArgument(format!(
            "grid needs at least 2 points, got {m}"
        )));
    }
    let last = (m - 1) as f64;
    let mut grid: Vec<f64> = (0..m).map(|t| delta0 * t as f64 / last).collect();
    grid[m - 1] = delta0;
    Ok(grid)
}

/// How grid points are distributed over workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathMode {
    /// One downward sweep from `delta0`, each solve warm-started from its neighbour.
    #[default]
    Sequential,
    /// Contiguous chunks solved concurrently, each with its own downward sweep.
    Chunked(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub grid: Vec<f64>,
    /// Row `t` holds the coefficients at `grid[t]`.
    pub coefficients: DMatrix<f64>,
    pub delta0: f64,
    pub intercept: f64,
    /// `max_j | u_j - |beta_j| |` of the LP optimum at each grid point.
    pub u_gap: Vec<f64>,
    pub iterations: Vec<usize>,
}

impl SolutionPath {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn k(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn model_at(&self, t: usize) -> ScreeningModel {
        ScreeningModel::new(
            self.intercept,
            self.coefficients.row(t).transpose(),
            self.grid[t],
            ZERO_TOL,
        )
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.coefficients.column(j).into_owned()
    }
}

/// Linearized Dantzig path on the default sequential sweep.
pub fn compute_path(dataset: &Dataset, m: usize) -> Result<SolutionPath> {
    compute_path_with(dataset, m, PathMode::Sequential)
}

pub fn compute_path_with(dataset: &Dataset, m: usize, mode: PathMode) -> Result<SolutionPath> {
    if !dataset.is_standardized() {
        return Err(ScreenError::InvalidArgument(
            "paths are computed on standardized data".into(),
        ));
    }
    let ybar = dataset.base_rate();
    let yc = dataset.response().add_scalar(-ybar);
    let band = Band::linearized(dataset, &yc);
    let mut d0 = dantzig::delta0(dataset);
    // Correlations at rounding level carry no signal.
    let noise = 1e-12 * (dataset.n() as f64) * yc.amax().max(1.0);
    if d0 <= noise {
        d0 = 0.0;
    }
    let grid = make_grid(d0, m)?;
    sweep(&band, grid, d0, dataset, mode)
}

/// Linearized Dantzig solutions at caller-chosen `delta` values (ascending, nonnegative).
///
/// Points at or above the dataset's own `delta0` get the zero solution.
pub fn compute_path_on_grid(
    dataset: &Dataset,
    grid: &[f64],
    mode: PathMode,
) -> Result<SolutionPath> {
    if !dataset.is_standardized() {
        return Err(ScreenError::InvalidArgument(
            "paths are computed on standardized data".into(),
        ));
    }
    if grid.is_empty()
        || grid.iter().any(|d| !(*d >= 0.0) || !d.is_finite())
        || grid.windows(2).any(|w| w[0] > w[1])
    {
        return Err(ScreenError::InvalidArgument(
            "grid must be nonempty, finite, nonnegative and ascending".into(),
        ));
    }
    let yc = dataset.response().add_scalar(-dataset.base_rate());
    let band = Band::linearized(dataset, &yc);
    let d0 = dantzig::delta0(dataset);
    sweep(&band, grid.to_vec(), d0, dataset, mode)
}

/// Grid index, coefficients, `u` gap and pivot count.
type SolvedPoint = (usize, DVector<f64>, f64, usize);

fn sweep(
    band: &Band,
    grid: Vec<f64>,
    d0: f64,
    dataset: &Dataset,
    mode: PathMode,
) -> Result<SolutionPath> {
    let m = grid.len();
    let k = dataset.k();
    let ybar = dataset.base_rate();

    let chunks: Vec<(usize, usize)> = match mode {
        PathMode::Sequential => vec![(0, m)],
        PathMode::Chunked(c) => {
            let c = c.clamp(1, m);
            let size = m.div_ceil(c);
            (0..m)
                .step_by(size)
                .map(|s| (s, (s + size).min(m)))
                .collect()
        }
    };
    let solved: Vec<Vec<SolvedPoint>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut hint = Basis::empty();
            let mut rows = Vec::with_capacity(hi - lo);
            for t in (lo..hi).rev() {
                let sol = band.solve(grid[t], &hint)?;
                let gap = sol
                    .u
                    .iter()
                    .zip(sol.beta.iter())
                    .map(|(u, b)| (u - b.abs()).abs())
                    .fold(0.0, f64::max);
                rows.push((t, sol.beta, gap, sol.iterations));
                hint = sol.basis;
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut coefficients = DMatrix::zeros(m, k);
    let mut u_gap = vec![0.0; m];
    let mut iterations = vec![0; m];
    for (t, beta, gap, iters) in solved.into_iter().flatten() {
        coefficients.set_row(t, &beta.transpose());
        u_gap[t] = gap;
        iterations[t] = iters;
    }
    Ok(SolutionPath {
        grid,
        coefficients,
        delta0: d0,
        intercept: logit(ybar)?,
        u_gap,
        iterations,
    })
}

/// Per-variable shrink-to-zero positions read off a path.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkPositions {
    /// Largest grid `delta` with a nonzero coefficient; 0 when never nonzero.
    pub position: Vec<f64>,
    /// Whether the variable is nonzero anywhere on the grid.
    pub ever_active: Vec<bool>,
    /// Nonzero, then zero, then nonzero again along the grid.
    pub reentry: Vec<bool>,
}

impl ShrinkPositions {
    /// Inclusion rule: variables whose shrink position is at least `delta`.
    pub fn selected_at(&self, delta: f64) -> Vec<usize> {
        (0..self.position.len())
            .filter(|&j| self.ever_active[j] && self.position[j] >= delta)
            .collect()
    }
}

pub fn shrink_positions(path: &SolutionPath, zero_tol: f64) -> ShrinkPositions {
    let k = path.k();
    let mut position = vec![0.0; k];
    let mut ever_active = vec![false; k];
    let mut reentry = vec![false; k];
    for j in 0..k {
        let nz: Vec<usize> = (0..path.len())
            .filter(|&t| path.coefficients[(t, j)].abs() > zero_tol)
            .collect();
        if let (Some(&first), Some(&last)) = (nz.first(), nz.last()) {
            ever_active[j] = true;
            position[j] = path.grid[last];
            reentry[j] = last - first + 1 != nz.len();
        }
    }
    ShrinkPositions {
        position,
        ever_active,
        reentry,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub shrink_position: Vec<f64>,
    /// 1 is most important; tied positions share a rank.
    pub rank: Vec<usize>,
    /// Variables grouped by equal position, best group first.
    pub tie_groups: Vec<Vec<usize>>,
}

/// Competition ranking by descending shrink position.
pub fn rank_variables(positions: &[f64]) -> Ranking {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| positions[b].total_cmp(&positions[a]).then(a.cmp(&b)));
    let mut rank = vec![0; positions.len()];
    let mut tie_groups: Vec<Vec<usize>> = Vec::new();
    for (i, &j) in order.iter().enumerate() {
        match tie_groups.last_mut() {
            Some(group) if positions[group[0]] == positions[j] => {
                rank[j] = rank[group[0]];
                group.push(j);
            }
            _ => {
                rank[j] = i + 1;
                tie_groups.push(vec![j]);
            }
        }
    }
    Ranking {
        shrink_position: positions.to_vec(),
        rank,
        tie_groups,
    }
}
