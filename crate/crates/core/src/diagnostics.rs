//! How far the first-order expansion of the logistic mean can be trusted.
//!
//! The second-order expansion of `logistic(beta0 + x*'beta*)` around
//! `beta* = 0` is
//!
//! ```text
//! logistic(beta0) + logistic(beta0) x*'beta* - 1/2 p(1-p)(2p-1) (x*'beta*)^2
//! ```
//!
//! with `p` the mean at an unknown intermediate point. The remainder ratio
//! compares the quadratic term to the linear one. Reports carry two
//! evaluations per observation: `plug_in` uses the fitted probability as `p`,
//! `bound` uses the global maximum of `|p(1-p)(2p-1)|`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dantzig::score_residual;
use crate::error::{Result, ScreenError};
use crate::types::{logistic_unchecked, logit, Dataset, ScreeningModel, ZERO_TOL};

pub const DEFAULT_ORACLE_BOX: f64 = 5.0;
pub const DEFAULT_ORACLE_POINTS: usize = 401;

/// `p (1 - p) (2p - 1)`.
pub fn cubic_coefficient(p: f64) -> f64 {
    p * (1.0 - p) * (2.0 * p - 1.0)
}

/// `max |p(1-p)(2p-1)|` on `[0, 1]`: `1 / (6 sqrt 3)`, reached at `p = 1/2 +- sqrt(3)/6`.
///
/// Often quoted rounded up to 0.1.
pub fn max_cubic_coefficient() -> f64 {
    1.0 / (6.0 * 3f64.sqrt())
}

/// Quadratic remainder over the linear term for one observation.
///
/// `linear_term` is `x*'beta*`; a zero linear term gives 0 by convention.
pub fn remainder_ratio(beta0: f64, linear_term: f64, p_mid: f64) -> Result<f64> {
    if !(p_mid > 0.0 && p_mid < 1.0) {
        return Err(ScreenError::Domain(format!(
            "intermediate probability must lie in (0, 1), got {p_mid}"
        )));
    }
    if linear_term == 0.0 {
        return Ok(0.0);
    }
    let remainder = 0.5 * cubic_coefficient(p_mid) * linear_term * linear_term;
    let leading = logistic_unchecked(beta0) * linear_term;
    Ok(remainder / leading)
}

/// Mean at the intermediate point `t` of the expansion, `logistic(t (beta0 + x*'beta*))`.
pub fn mean_value_probability(beta0: f64, linear_term: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(ScreenError::Domain(format!(
            "t must lie in (0, 1), got {t}"
        )));
    }
    Ok(logistic_unchecked(t * (beta0 + linear_term)))
}

/// A probability interval inside which the remainder ratio stays below `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBand {
    pub epsilon: f64,
    pub low: f64,
    pub high: f64,
    pub condition: BandCondition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandCondition {
    /// Requires `logistic(beta0) >= value`.
    MinBaseProbability(f64),
    /// Tabulated for this intercept only.
    Intercept(f64),
    /// Computed for the supplied intercept.
    Derived,
}

/// The two reference bands: `(0.302, 0.698)` for 0.1 when `logistic(beta0) >= 0.35`,
/// and `(0.29, 0.71)` for 0.01 at `beta0 = 0`.
pub const TABULATED_BANDS: [ProbabilityBand; 2] = [
    ProbabilityBand {
        epsilon: 0.1,
        low: 0.302,
        high: 0.698,
        condition: BandCondition::MinBaseProbability(0.35),
    },
    ProbabilityBand {
        epsilon: 0.01,
        low: 0.29,
        high: 0.71,
        condition: BandCondition::Intercept(0.0),
    },
];

impl ProbabilityBand {
    fn applies(&self, beta0: f64, epsilon: f64) -> bool {
        self.epsilon <= epsilon
            && match self.condition {
                BandCondition::MinBaseProbability(q) => logistic_unchecked(beta0) >= q,
                BandCondition::Intercept(b) => (beta0 - b).abs() < 1e-12,
                BandCondition::Derived => true,
            }
    }

    pub fn contains(&self, p: f64) -> bool {
        p > self.low && p < self.high
    }
}

/// Widest interval around `logistic(beta0)` on which the plug-in ratio stays below `epsilon`.
pub fn derived_band(beta0: f64, epsilon: f64) -> ProbabilityBand {
    let centre = logistic_unchecked(beta0);
    let plug_in = |p: f64| {
        remainder_ratio(beta0, logit(p).unwrap_or(0.0) - beta0, p)
            .map(f64::abs)
            .unwrap_or(f64::INFINITY)
    };
    let edge = |toward: f64| {
        const STEPS: usize = 20_000;
        let mut inside = centre;
        for s in 1..STEPS {
            let p = centre + (toward - centre) * s as f64 / STEPS as f64;
            if plug_in(p) >= epsilon {
                break;
            }
            inside = p;
        }
        inside
    };
    ProbabilityBand {
        epsilon,
        low: edge(0.0),
        high: edge(1.0),
        condition: BandCondition::Derived,
    }
}

/// Picks the reference band for `epsilon` when its condition holds, narrowed to
/// where the plug-in ratio for this intercept really stays below `epsilon`;
/// otherwise the derived band.
pub fn band_for(beta0: f64, epsilon: f64) -> ProbabilityBand {
    let exact = derived_band(beta0, epsilon);
    TABULATED_BANDS
        .iter()
        .filter(|b| b.applies(beta0, epsilon))
        .max_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .map(|b| ProbabilityBand {
            low: b.low.max(exact.low),
            high: b.high.min(exact.high),
            ..*b
        })
        .unwrap_or(exact)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxReport {
    pub fitted: Vec<f64>,
    /// Ratio with the fitted probability as the intermediate point.
    pub plug_in: Vec<f64>,
    /// Worst case over the intermediate point.
    pub bound: Vec<f64>,
    /// `max |plug_in|`.
    pub max_abs_ratio: f64,
    pub max_abs_bound: f64,
    pub region: (f64, f64),
    pub band: ProbabilityBand,
    pub admissible: bool,
    /// Observations outside the region.
    pub flagged: Vec<usize>,
}

/// Evaluates every observation's remainder ratio and checks the probability region.
pub fn region_check(beta0: f64, fitted_probs: &[f64], epsilon: f64) -> Result<ApproxReport> {
    if let Some(p) = fitted_probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(ScreenError::Domain(format!(
            "fitted probability {p} outside (0, 1)"
        )));
    }
    let band = band_for(beta0, epsilon);
    let base = logistic_unchecked(beta0);
    let mut plug_in = Vec::with_capacity(fitted_probs.len());
    let mut bound = Vec::with_capacity(fitted_probs.len());
    for &p in fitted_probs {
        let linear = logit(p)? - beta0;
        plug_in.push(remainder_ratio(beta0, linear, p)?);
        bound.push(0.5 * max_cubic_coefficient() * linear.abs() / base);
    }
    let flagged: Vec<usize> = (0..fitted_probs.len())
        .filter(|&i| !band.contains(fitted_probs[i]))
        .collect();
    Ok(ApproxReport {
        fitted: fitted_probs.to_vec(),
        max_abs_ratio: plug_in.iter().fold(0.0, |a: f64, r| a.max(r.abs())),
        max_abs_bound: bound.iter().fold(0.0, |a: f64, r| a.max(*r)),
        plug_in,
        bound,
        region: (band.low, band.high),
        band,
        admissible: flagged.is_empty(),
        flagged,
    })
}

/// Report for a fitted model on its own data.
pub fn model_report(
    dataset: &Dataset,
    model: &ScreeningModel,
    epsilon: f64,
) -> Result<ApproxReport> {
    let p = model.fitted_probabilities(dataset.design());
    region_check(model.intercept, p.as_slice(), epsilon)
}

/// Exhaustive search for the minimum-l1 point satisfying the exact constraint
/// `||X'(y - p)||_inf <= delta` on a grid over `[-box, box]^k`, `k <= 3`.
///
/// The intercept is held at `logit(ybar)`. Among equal l1 norms the
/// lexicographically smallest coefficient vector wins.
pub fn brute_force_dantzig(
    dataset: &Dataset,
    delta: f64,
    box_bound: f64,
    grid_points_per_dim: usize,
) -> Result<ScreeningModel> {
    let k = dataset.k();
    if k > 3 {
        return Err(ScreenError::InvalidArgument(format!(
            "brute-force search is limited to 3 variables, got {k}"
        )));
    }
    if !(box_bound > 0.0) || grid_points_per_dim < 2 {
        return Err(ScreenError::InvalidArgument(
            "need a positive box and at least 2 grid points".into(),
        ));
    }
    let beta0 = logit(dataset.base_rate())?;
    let g = grid_points_per_dim;
    let step = 2.0 * box_bound / (g - 1) as f64;
    let value = |i: usize| {
        // exact zero when the grid has a midpoint
        if 2 * i + 1 == g {
            0.0
        } else {
            -box_bound + step * i as f64
        }
    };
    let x = dataset.design();
    let y = dataset.response();
    let total = g.pow(k as u32);
    let decode = |mut idx: usize| {
        let mut beta = DVector::zeros(k);
        for j in (0..k).rev() {
            beta[j] = value(idx % g);
            idx /= g;
        }
        beta
    };
    let feasible = |beta: &DVector<f64>| {
        let eta = x * beta;
        let mut worst: f64 = 0.0;
        for j in 0..k {
            let mut s = 0.0;
            for i in 0..x.nrows() {
                s += x[(i, j)] * (y[i] - logistic_unchecked(beta0 + eta[i]));
            }
            worst = worst.max(s.abs());
        }
        worst <= delta
    };
    // Lexicographic index order equals lexicographic value order.
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let beta = decode(idx);
            let l1: f64 = beta.iter().map(|b| b.abs()).sum();
            (l1, idx, beta)
        })
        .filter(|(_, _, beta)| feasible(beta))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    match best {
        Some((_, _, beta)) => Ok(ScreeningModel::new(beta0, beta, delta, ZERO_TOL)),
        None => Err(ScreenError::InfeasibleAtResolution),
    }
}

/// `||X'(y - p)||_inf` for a model.
pub fn exact_violation(dataset: &Dataset, model: &ScreeningModel) -> Result<f64> {
    Ok(score_residual(dataset, model)?.amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn ratio_examples() {
        assert_eq!(remainder_ratio(0.3, 0.0, 0.8).unwrap(), 0.0);
        assert!(remainder_ratio(0.0, 1e-9, 0.8).unwrap().abs() < 1e-9);
        for t in [-3.0, 0.5, 7.0] {
            assert_eq!(remainder_ratio(1.0, t, 0.5).unwrap(), 0.0);
        }
        let p = 0.5 + 3f64.sqrt() / 6.0;
        let r = remainder_ratio(0.0, 1.0, p).unwrap();
        assert_abs_diff_eq!(r, max_cubic_coefficient(), epsilon = 1e-15);
        let r = remainder_ratio(0.0, 1.0, 0.7887).unwrap();
        assert!((r - 0.0962).abs() < 1e-4);
        assert!(remainder_ratio(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn max_cubic_value() {
        let c = max_cubic_coefficient();
        assert!((0.0962..=0.0963).contains(&c));
        assert!(cubic_coefficient(0.5).abs() < c);
    }

    #[test]
    fn half_probabilities_are_admissible() {
        for eps in [0.1, 0.01, 0.001] {
            let rep = region_check(0.0, &[0.5; 6], eps).unwrap();
            assert!(rep.admissible);
            assert_eq!(rep.max_abs_ratio, 0.0);
        }
    }

    #[test]
    fn outlier_flagged() {
        let rep = region_check(0.0, &[0.5, 0.6, 0.95, 0.4], 0.1).unwrap();
        assert!(!rep.admissible);
        assert_eq!(rep.flagged, vec![2]);
        assert_eq!(rep.region, (0.302, 0.698));
    }

    #[test]
    fn band_at_zero_intercept_keeps_ratio_small() {
        let probs: Vec<f64> = (1..400).map(|i| 0.30 + 0.4 * i as f64 / 400.0).collect();
        let rep = region_check(0.0, &probs, 0.1).unwrap();
        assert!(rep.max_abs_ratio < 0.1);
        // plug-in evaluation is stricter than the reference 1% band
        let band = band_for(0.0, 0.01);
        assert_eq!(band.condition, BandCondition::Intercept(0.0));
        assert!(band.low > 0.29 && band.high < 0.71);
    }

    #[test]
    fn reference_one_percent_band_at_small_t() {
        // beta0 = 0, intermediate point t = 0.1: |r| < 0.01 on (0.29, 0.71)
        let worst = (1..10_000)
            .map(|i| 0.29 + 0.42 * i as f64 / 10_000.0)
            .map(|p| {
                let linear = logit(p).unwrap();
                let mid = mean_value_probability(0.0, linear, 0.1).unwrap();
                remainder_ratio(0.0, linear, mid).unwrap().abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 0.01, "{worst}");
        assert!(mean_value_probability(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn narrowed_band_respects_epsilon() {
        let beta0 = logit(0.4).unwrap();
        let band = band_for(beta0, 0.1);
        assert!(band.high < 0.698);
        let probs: Vec<f64> = (1..200)
            .map(|i| band.low + (band.high - band.low) * i as f64 / 200.0)
            .collect();
        let rep = region_check(beta0, &probs, 0.1).unwrap();
        assert!(rep.admissible);
        assert!(rep.max_abs_ratio < 0.1);
    }

    #[test]
    fn oracle_zero_when_delta_large() {
        let ds = Dataset::prestandardized(
            DMatrix::from_column_slice(4, 1, &[-1.5, -0.5, 0.5, 1.5]),
            vec![0, 1, 0, 1],
            vec!["x".into()],
        )
        .unwrap();
        let d0 = crate::dantzig::delta0(&ds);
        let m = brute_force_dantzig(&ds, d0, 5.0, 401).unwrap();
        assert_eq!(m.coefficients[0], 0.0);
        assert!(matches!(
            brute_force_dantzig(&ds, -1.0, 5.0, 11),
            Err(ScreenError::InfeasibleAtResolution)
        ));
    }
}
