//! Dense revised simplex for `min c'z  s.t.  Az >= b, z >= 0`.
//!
//! Internally each row gets a surplus column, `Az - s = b`, and rows with a
//! positive right-hand side get an artificial column for phase one. Columns
//! of the working problem are numbered `0..m` (structural), `m..m+r`
//! (surplus of row `i`) and `m+r..m+2r` (artificial of row `i`); a [`Basis`]
//! refers to that numbering.
//!
//! Entering columns are priced by most negative reduced cost; after a run of
//! degenerate pivots the solver switches to Bland's rule until progress
//! resumes. Ratio-test ties always go to the lowest column index.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, ScreenError};

pub const DEFAULT_FEAS_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN: usize = 30;
/// Dual repair of a warm start is abandoned for a cold start after this many pivots per row.
const DUAL_BUDGET_PER_ROW: usize = 2;

/// `min c'z` subject to `Az >= b`, `z >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    c: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl LpProblem {
    pub fn new(c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.ncols() != c.len() || a.nrows() != b.len() {
            return Err(ScreenError::InvalidArgument(format!(
                "LP dimensions disagree: c has {}, A is {}x{}, b has {}",
                c.len(),
                a.nrows(),
                a.ncols(),
                b.len()
            )));
        }
        if c.is_empty() {
            return Err(ScreenError::InvalidArgument("LP has no variables".into()));
        }
        if c.iter()
            .chain(a.iter())
            .chain(b.iter())
            .any(|v| !v.is_finite())
        {
            return Err(ScreenError::InvalidArgument(
                "LP data must be finite".into(),
            ));
        }
        Ok(Self { c, a, b })
    }

    pub fn cost(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn constraints(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn default_max_iters(&self) -> usize {
        50 * (self.num_vars() + self.num_rows())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Basic column indices in the working numbering described at module level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Basis(pub Vec<usize>);

impl Basis {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal optimum; present iff `status` is optimal.
    pub z: Option<DVector<f64>>,
    pub objective: f64,
    pub iterations: usize,
    /// Row multipliers `y >= 0` with `A'y <= c` at the final basis.
    pub duals: Option<DVector<f64>>,
    /// Final basis, reusable as a warm-start hint for a problem with the same `A` and `c`.
    pub basis: Basis,
}

impl LpSolution {
    fn failed(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            z: None,
            objective: f64::NAN,
            iterations,
            duals: None,
            basis: Basis::empty(),
        }
    }
}

/// Solves from scratch with the two-phase method.
pub fn solve_lp(problem: &LpProblem, feas_tol: f64, max_iters: usize) -> Result<LpSolution> {
    check_tol(feas_tol)?;
    Ok(cold_solve(problem, feas_tol, max_iters, 0))
}

/// Solves starting from `hint`; unusable hints fall back to a cold start.
///
/// A hint that is primal feasible goes straight to phase two. A hint that is
/// only dual feasible (the usual case after changing `b`) is repaired with
/// dual simplex pivots first.
pub fn warm_start_solve(
    problem: &LpProblem,
    hint: &Basis,
    feas_tol: f64,
    max_iters: usize,
) -> Result<LpSolution> {
    check_tol(feas_tol)?;
    if hint.is_empty() {
        return Ok(cold_solve(problem, feas_tol, max_iters, 0));
    }
    let mut s = match Simplex::from_basis(problem, &hint.0, feas_tol, max_iters) {
        Some(s) => s,
        None => {
            log::debug!("warm start: hint rejected, cold start");
            return Ok(cold_solve(problem, feas_tol, max_iters, 0));
        }
    };
    let primal_ok = s.xb.iter().all(|&v| v >= -feas_tol);
    if !primal_ok {
        if !s.dual_feasible() {
            let used = s.iters;
            return Ok(cold_solve(problem, feas_tol, max_iters, used));
        }
        match s.dual_simplex(DUAL_BUDGET_PER_ROW * problem.num_rows()) {
            Outcome::Done => {}
            _ => {
                log::debug!("warm start: dual simplex gave up after {} pivots", s.iters);
                return Ok(cold_solve(problem, feas_tol, max_iters, s.iters));
            }
        }
    }
    match s.primal(Phase::Two) {
        Outcome::Done => Ok(s.finish()),
        Outcome::Unbounded => Ok(LpSolution::failed(LpStatus::Unbounded, s.iters)),
        Outcome::Stalled => {
            let used = s.iters;
            Ok(cold_solve(problem, feas_tol, max_iters, used))
        }
        Outcome::IterationLimit => Ok(LpSolution::failed(LpStatus::IterationLimit, s.iters)),
    }
}

fn check_tol(feas_tol: f64) -> Result<()> {
    if !(feas_tol > 0.0) {
        return Err(ScreenError::InvalidArgument(format!(
            "feasibility tolerance must be positive, got {feas_tol}"
        )));
    }
    Ok(())
}

fn cold_solve(problem: &LpProblem, feas_tol: f64, max_iters: usize, used: usize) -> LpSolution {
    let mut s = Simplex::phase_one_start(problem, feas_tol, max_iters.saturating_sub(used));
    match s.primal(Phase::One) {
        Outcome::Done => {}
        Outcome::IterationLimit | Outcome::Stalled => {
            return LpSolution::failed(LpStatus::IterationLimit, used + s.iters)
        }
        // Phase one is bounded below by zero.
        Outcome::Unbounded => unreachable!("phase one cannot be unbounded"),
    }
    let infeasibility: f64 = s
        .basis
        .iter()
        .zip(s.xb.iter())
        .filter(|(&j, _)| s.is_artificial(j))
        .map(|(_, &v)| v.max(0.0))
        .sum();
    if infeasibility > feas_tol {
        return LpSolution::failed(LpStatus::Infeasible, used + s.iters);
    }
    s.drive_out_artificials();
    let out = match s.primal(Phase::Two) {
        Outcome::Done => s.finish(),
        Outcome::Unbounded => LpSolution::failed(LpStatus::Unbounded, s.iters),
        Outcome::IterationLimit | Outcome::Stalled => {
            LpSolution::failed(LpStatus::IterationLimit, s.iters)
        }
    };
    LpSolution {
        iterations: out.iterations + used,
        ..out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Done,
    Unbounded,
    IterationLimit,
    /// Numerical trouble (singular refactorization); callers restart cold.
    Stalled,
}

struct Simplex<'a> {
    p: &'a LpProblem,
    m: usize,
    r: usize,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    binv: DMatrix<f64>,
    xb: DVector<f64>,
    iters: usize,
    max_iters: usize,
    feas_tol: f64,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn phase_one_start(p: &'a LpProblem, feas_tol: f64, max_iters: usize) -> Self {
        let (m, r) = (p.num_vars(), p.num_rows());
        let mut basis = Vec::with_capacity(r);
        let mut binv = DMatrix::zeros(r, r);
        let mut xb = DVector::zeros(r);
        for i in 0..r {
            if p.b[i] > 0.0 {
                basis.push(m + r + i);
                binv[(i, i)] = 1.0;
                xb[i] = p.b[i];
            } else {
                basis.push(m + i);
                binv[(i, i)] = -1.0;
                xb[i] = -p.b[i];
            }
        }
        let mut position = vec![None; m + 2 * r];
        for (i, &j) in basis.iter().enumerate() {
            position[j] = Some(i);
        }
        Self {
            p,
            m,
            r,
            basis,
            position,
            binv,
            xb,
            iters: 0,
            max_iters,
            feas_tol,
            since_refactor: 0,
        }
    }

    fn from_basis(
        p: &'a LpProblem,
        hint: &[usize],
        feas_tol: f64,
        max_iters: usize,
    ) -> Option<Self> {
        let (m, r) = (p.num_vars(), p.num_rows());
        if hint.len() != r || hint.iter().any(|&j| j >= m + r) {
            return None;
        }
        let mut position = vec![None; m + 2 * r];
        for (i, &j) in hint.iter().enumerate() {
            if position[j].is_some() {
                return None;
            }
            position[j] = Some(i);
        }
        let mut s = Self {
            p,
            m,
            r,
            basis: hint.to_vec(),
            position,
            binv: DMatrix::zeros(r, r),
            xb: DVector::zeros(r),
            iters: 0,
            max_iters,
            feas_tol,
            since_refactor: 0,
        };
        if s.refactor() {
            Some(s)
        } else {
            None
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.m + self.r
    }

    fn cost(&self, j: usize, phase: Phase) -> f64 {
        match phase {
            Phase::One => {
                if self.is_artificial(j) {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j < self.m {
                    self.p.c[j]
                } else {
                    0.0
                }
            }
        }
    }

    fn column(&self, j: usize) -> DVector<f64> {
        if j < self.m {
            self.p.a.column(j).into_owned()
        } else if j < self.m + self.r {
            let mut e = DVector::zeros(self.r);
            e[j - self.m] = -1.0;
            e
        } else {
            let mut e = DVector::zeros(self.r);
            e[j - self.m - self.r] = 1.0;
            e
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> DVector<f64> {
        if j < self.m {
            &self.binv * self.p.a.column(j)
        } else if j < self.m + self.r {
            -self.binv.column(j - self.m)
        } else {
            self.binv.column(j - self.m - self.r).into_owned()
        }
    }

    fn duals(&self, phase: Phase) -> DVector<f64> {
        let cb = DVector::from_iterator(self.r, self.basis.iter().map(|&j| self.cost(j, phase)));
        self.binv.tr_mul(&cb)
    }

    fn reduced_cost(&self, j: usize, y: &DVector<f64>, phase: Phase) -> f64 {
        let c = self.cost(j, phase);
        if j < self.m {
            c - self.p.a.column(j).dot(y)
        } else if j < self.m + self.r {
            c + y[j - self.m]
        } else {
            c - y[j - self.m - self.r]
        }
    }

    fn refactor(&mut self) -> bool {
        let mut bmat = DMatrix::zeros(self.r, self.r);
        for (i, &j) in self.basis.iter().enumerate() {
            bmat.set_column(i, &self.column(j));
        }
        let lu = bmat.lu();
        match lu.try_inverse() {
            Some(inv) if inv.iter().all(|v| v.is_finite()) => {
                self.binv = inv;
                self.xb = &self.binv * &self.p.b;
                self.since_refactor = 0;
                true
            }
            _ => false,
        }
    }

    fn pivot(&mut self, row: usize, entering: usize, w: &DVector<f64>) {
        let piv = w[row];
        let theta = self.xb[row] / piv;
        for i in 0..self.r {
            if i != row {
                self.xb[i] -= theta * w[i];
            }
        }
        self.xb[row] = theta;

        let mut prow = self.binv.row(row).into_owned();
        prow /= piv;
        for c in 0..self.r {
            let pv = prow[c];
            if pv == 0.0 {
                continue;
            }
            let mut col = self.binv.column_mut(c);
            for i in 0..self.r {
                if i != row {
                    col[i] -= w[i] * pv;
                }
            }
        }
        self.binv.set_row(row, &prow);

        let leaving = self.basis[row];
        self.position[leaving] = None;
        self.position[entering] = Some(row);
        self.basis[row] = entering;
        self.iters += 1;
        self.since_refactor += 1;
    }

    fn maybe_refactor(&mut self) -> bool {
        if self.since_refactor >= REFACTOR_EVERY {
            return self.refactor();
        }
        true
    }

    fn primal(&mut self, phase: Phase) -> Outcome {
        let mut degenerate = 0usize;
        loop {
            if !self.maybe_refactor() {
                return Outcome::Stalled;
            }
            let y = self.duals(phase);
            let bland = degenerate >= DEGENERATE_RUN;
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..self.m + 2 * self.r {
                if self.position[j].is_some() || self.is_artificial(j) {
                    continue;
                }
                let d = self.reduced_cost(j, &y, phase);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                return Outcome::Done;
            };
            if self.iters >= self.max_iters {
                return Outcome::IterationLimit;
            }
            let w = self.ftran(q);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.r {
                if w[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / w[i];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, ratio)) = leave else {
                return Outcome::Unbounded;
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, q, &w);
            for v in self.xb.iter_mut() {
                if *v < 0.0 && *v > -1e-13 {
                    *v = 0.0;
                }
            }
        }
    }

    fn dual_feasible(&self) -> bool {
        let y = self.duals(Phase::Two);
        (0..self.m + self.r)
            .filter(|&j| self.position[j].is_none())
            .all(|j| self.reduced_cost(j, &y, Phase::Two) >= -OPT_TOL)
    }

    /// Dual simplex pivots until primal feasible, at most `budget` of them.
    fn dual_simplex(&mut self, budget: usize) -> Outcome {
        let limit = self.iters.saturating_add(budget).min(self.max_iters);
        let mut degenerate = 0usize;
        loop {
            if !self.maybe_refactor() {
                return Outcome::Stalled;
            }
            let bland = degenerate >= DEGENERATE_RUN;
            let mut leave: Option<usize> = None;
            let mut worst = -self.feas_tol;
            for i in 0..self.r {
                if self.xb[i] >= -self.feas_tol {
                    continue;
                }
                if bland {
                    if leave.is_none_or(|l| self.basis[i] < self.basis[l]) {
                        leave = Some(i);
                    }
                } else if self.xb[i] < worst {
                    worst = self.xb[i];
                    leave = Some(i);
                }
            }
            let Some(row) = leave else {
                return Outcome::Done;
            };
            if self.iters >= limit {
                return Outcome::IterationLimit;
            }
            let y = self.duals(Phase::Two);
            let brow = self.binv.row(row).into_owned();
            let arow = &brow * &self.p.a;
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.m + self.r {
                if self.position[j].is_some() {
                    continue;
                }
                let alpha = if j < self.m {
                    arow[j]
                } else {
                    -brow[j - self.m]
                };
                if alpha < -PIVOT_TOL {
                    let d = self.reduced_cost(j, &y, Phase::Two).max(0.0);
                    let ratio = d / -alpha;
                    match entering {
                        None => entering = Some((j, ratio, -alpha)),
                        Some((_, er, ea)) => {
                            let tie = (ratio - er).abs() <= 1e-12 * (1.0 + er.abs());
                            // Among ties prefer the larger pivot unless cycling is suspected.
                            if ratio < er && !tie || tie && !bland && -alpha > ea {
                                entering = Some((j, ratio, -alpha));
                            }
                        }
                    }
                }
            }
            // No entering column means the row proves primal infeasibility;
            // the caller confirms with a cold start.
            let Some((q, ratio, _)) = entering else {
                return Outcome::Stalled;
            };
            let w = self.ftran(q);
            if w[row].abs() <= PIVOT_TOL {
                return Outcome::Stalled;
            }
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(row, q, &w);
        }
    }

    /// Pivots zero-valued artificials out of the basis where a replacement exists.
    fn drive_out_artificials(&mut self) {
        for row in 0..self.r {
            if !self.is_artificial(self.basis[row]) {
                continue;
            }
            let brow = self.binv.row(row).into_owned();
            let arow = &brow * &self.p.a;
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.m + self.r {
                if self.position[j].is_some() {
                    continue;
                }
                let alpha = if j < self.m {
                    arow[j]
                } else {
                    -brow[j - self.m]
                };
                if alpha.abs() > 1e-7 && best.is_none_or(|(_, a)| alpha.abs() > a) {
                    best = Some((j, alpha.abs()));
                }
            }
            if let Some((q, _)) = best {
                self.xb[row] = 0.0;
                let w = self.ftran(q);
                self.pivot(row, q, &w);
            }
        }
    }

    fn finish(mut self) -> LpSolution {
        // Fresh factorization for the reported point.
        if !self.refactor() {
            return LpSolution::failed(LpStatus::IterationLimit, self.iters);
        }
        let mut z = DVector::zeros(self.m);
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.m {
                let v = self.xb[i];
                z[j] = if v < 0.0 && v >= -self.feas_tol {
                    0.0
                } else {
                    v
                };
            }
        }
        let objective = self.p.c.dot(&z);
        let duals = self.duals(Phase::Two).map(|v| v.max(0.0));
        let basis = if self.basis.iter().any(|&j| self.is_artificial(j)) {
            Basis::empty()
        } else {
            Basis(self.basis.clone())
        };
        LpSolution {
            status: LpStatus::Optimal,
            z: Some(z),
            objective,
            iterations: self.iters,
            duals: Some(duals),
            basis,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lp(c: &[f64], rows: usize, a: &[f64], b: &[f64]) -> LpProblem {
        LpProblem::new(
            DVector::from_column_slice(c),
            DMatrix::from_row_slice(rows, c.len(), a),
            DVector::from_column_slice(b),
        )
        .unwrap()
    }

    #[test]
    fn single_variable_box() {
        let p = lp(&[-1.0], 1, &[-1.0], &[-1.0]);
        let s = solve_lp(&p, DEFAULT_FEAS_TOL, 100).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.z.unwrap()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.objective, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn active_constraint() {
        let p = lp(&[1.0, 1.0], 1, &[1.0, 1.0], &[2.0]);
        let s = solve_lp(&p, DEFAULT_FEAS_TOL, 100).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_reported() {
        // z1 >= 2 and -z1 >= -1
        let p = lp(&[1.0], 2, &[1.0, -1.0], &[2.0, -1.0]);
        let s = solve_lp(&p, DEFAULT_FEAS_TOL, 100).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(s.z.is_none());
    }

    #[test]
    fn unbounded_reported() {
        let p = lp(&[-1.0, 0.0], 1, &[1.0, -1.0], &[0.0]);
        let s = solve_lp(&p, DEFAULT_FEAS_TOL, 100).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_limit_is_a_status() {
        let p = lp(&[1.0, 1.0], 2, &[1.0, 2.0, 3.0, 1.0], &[2.0, 3.0]);
        let s = solve_lp(&p, DEFAULT_FEAS_TOL, 0).unwrap();
        assert_eq!(s.status, LpStatus::IterationLimit);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = LpProblem::new(
            DVector::from_vec(vec![1.0, 2.0]),
            DMatrix::zeros(1, 3),
            DVector::from_vec(vec![0.0]),
        );
        assert!(matches!(err, Err(ScreenError::InvalidArgument(_))));
        let p = lp(&[1.0], 1, &[1.0], &[1.0]);
        assert!(solve_lp(&p, 0.0, 10).is_err());
    }

    #[test]
    fn warm_start_matches_cold_and_survives_bad_hints() {
        let p = lp(
            &[1.0, 2.0, 1.5],
            3,
            &[1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0],
            &[2.0, 1.0, 1.5],
        );
        let cold = solve_lp(&p, DEFAULT_FEAS_TOL, 1000).unwrap();
        for hint in [
            Basis::empty(),
            cold.basis.clone(),
            Basis(vec![0, 0, 1]),
            Basis(vec![99]),
            Basis(vec![3, 4, 5]),
            Basis(vec![0, 1, 2]),
        ] {
            let warm = warm_start_solve(&p, &hint, DEFAULT_FEAS_TOL, 1000).unwrap();
            assert_eq!(warm.status, cold.status);
            assert_abs_diff_eq!(warm.objective, cold.objective, epsilon = 1e-9);
        }
    }

    #[test]
    fn duals_certify_optimum() {
        let p = lp(
            &[2.0, 3.0, 1.0],
            2,
            &[1.0, 1.0, 1.0, 2.0, -1.0, 1.0],
            &[4.0, 1.0],
        );
        let s = solve_lp(&p, DEFAULT_FEAS_TOL, 1000).unwrap();
        let y = s.duals.unwrap();
        assert!(y.iter().all(|&v| v >= 0.0));
        let aty = p.constraints().tr_mul(&y);
        for j in 0..3 {
            assert!(aty[j] <= p.cost()[j] + 1e-9);
        }
        assert_abs_diff_eq!(p.rhs().dot(&y), s.objective, epsilon = 1e-9);
    }
}
