//! Ranking pipelines: exact (optionally after a correlation pre-filter) and
//! support-sequence approximate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approximation::{
    approximate_order, max_error_ratio, score_features_bounded, true_error_ratio, BoundedScore, ErrorReport,
    SupportSequence,
};
use crate::discriminability::{score_features, FeatureScore};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::order::ascending_by;

/// Parameters shared by the selection pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Number of features to select.
    pub budget: usize,
    /// Features to drop by correlation before scoring.
    pub correlation_discard: Option<usize>,
    /// Requested support length; `None` means exact scoring.
    pub support_length: Option<usize>,
    pub seed: Option<u64>,
    /// Also compute exact scores and the true error ratio in approximate runs.
    #[serde(default)]
    pub verify_exact: bool,
}

impl SelectionConfig {
    pub fn exact(budget: usize) -> Self {
        Self { budget, correlation_discard: None, support_length: None, seed: None, verify_exact: false }
    }

    pub fn approximate(budget: usize, support_length: usize) -> Self {
        Self { support_length: Some(support_length), ..Self::exact(budget) }
    }

    pub fn with_discard(mut self, n_c: usize) -> Self {
        self.correlation_discard = Some(n_c);
        self
    }
}

/// Per-feature scores attached to a ranking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "entries", rename_all = "snake_case")]
pub enum RankedScores {
    Exact(Vec<FeatureScore>),
    Bounded(Vec<BoundedScore>),
}

impl RankedScores {
    pub fn len(&self) -> usize {
        match self {
            RankedScores::Exact(v) => v.len(),
            RankedScores::Bounded(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Features ordered by ascending (approximated) intrinsic dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub ordered_features: Vec<usize>,
    /// Aligned with `ordered_features`.
    pub scores: RankedScores,
    pub discarded_by_correlation: Vec<usize>,
    /// `|ρ|` of the last pair that caused a discard.
    pub last_discard_correlation: Option<f64>,
}

impl Ranking {
    /// The first `budget` features.
    pub fn selected(&self, budget: usize) -> &[usize] {
        &self.ordered_features[..budget.min(self.ordered_features.len())]
    }
}

/// Outcome of the correlation pre-filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Prefilter {
    /// Survivors in original order.
    pub kept: Vec<usize>,
    /// In discard order.
    pub discarded: Vec<usize>,
    pub last_discard_correlation: Option<f64>,
}

/// Sample variance (divisor `n - 1`).
pub fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Sample Pearson correlation of two columns; 0 when either column is constant.
pub fn pearson_columns(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0f64, 0.0f64, 0.0f64);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Pearson correlation between features `i` and `j`.
pub fn pearson(matrix: &DataMatrix, i: usize, j: usize) -> Result<f64> {
    Ok(pearson_columns(matrix.try_column(i)?, matrix.try_column(j)?))
}

/// Upper triangle of `|ρ|`, row-major over pairs `i < j`.
struct AbsCorrelations {
    d: usize,
    values: Vec<f64>,
}

impl AbsCorrelations {
    fn compute(matrix: &DataMatrix) -> Self {
        let d = matrix.d();
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        let values =
            pairs.par_iter().map(|&(i, j)| pearson_columns(matrix.column(i), matrix.column(j)).abs()).collect();
        Self { d, values }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.values[i * (2 * self.d - i - 1) / 2 + (j - i - 1)]
    }
}

/// Drops `n_c` features one at a time: among the remaining features, the pair with the
/// largest `|ρ|` loses its lower-variance member (the larger index on equal variance).
pub fn correlation_prefilter(matrix: &DataMatrix, n_c: usize) -> Result<Prefilter> {
    let d = matrix.d();
    if n_c >= d {
        return Err(Error::DiscardCount { discard: n_c, d });
    }
    if n_c == 0 {
        return Ok(Prefilter { kept: (0..d).collect(), discarded: vec![], last_discard_correlation: None });
    }
    let corr = AbsCorrelations::compute(matrix);
    let variances: Vec<f64> = (0..d).into_par_iter().map(|j| variance(matrix.column(j))).collect();
    let mut alive = vec![true; d];
    let mut discarded = Vec::with_capacity(n_c);
    let mut last = None;
    for _ in 0..n_c {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in (0..d).filter(|&i| alive[i]) {
            for j in (i + 1..d).filter(|&j| alive[j]) {
                let r = corr.get(i, j);
                if best.is_none_or(|(_, _, b)| r > b) {
                    best = Some((i, j, r));
                }
            }
        }
        let (i, j, r) = best.expect("at least two features remain");
        let drop = if variances[i] < variances[j] { i } else { j };
        alive[drop] = false;
        discarded.push(drop);
        last = Some(r);
    }
    let kept = (0..d).filter(|&j| alive[j]).collect();
    Ok(Prefilter { kept, discarded, last_discard_correlation: last })
}

fn check_budget(budget: usize, available: usize) -> Result<()> {
    if budget == 0 || budget > available {
        return Err(Error::Budget { budget, available });
    }
    Ok(())
}

fn survivors(matrix: &DataMatrix, config: &SelectionConfig) -> Result<Prefilter> {
    let pre = correlation_prefilter(matrix, config.correlation_discard.unwrap_or(0))?;
    check_budget(config.budget, pre.kept.len())?;
    Ok(pre)
}

/// Exact ranking by ascending intrinsic dimension; with `correlation_discard` set the
/// pre-filter runs first and only survivors are ranked.
pub fn fsd(matrix: &DataMatrix, config: &SelectionConfig) -> Result<Ranking> {
    let pre = survivors(matrix, config)?;
    let scores = score_features(matrix, &pre.kept)?;
    let order = ascending_by(&scores, |s| (s.partial_dim, s.feature_index));
    let scores: Vec<FeatureScore> = order.iter().map(|&i| scores[i]).collect();
    Ok(Ranking {
        ordered_features: scores.iter().map(|s| s.feature_index).collect(),
        scores: RankedScores::Exact(scores),
        discarded_by_correlation: pre.discarded,
        last_discard_correlation: pre.last_discard_correlation,
    })
}

/// Approximate ranking by ascending approximated dimension under a log-spaced support.
///
/// The true error ratio is only computed when `verify_exact` is set, since it needs the
/// quadratic exact scores.
pub fn lsfsd(matrix: &DataMatrix, config: &SelectionConfig) -> Result<(Ranking, ErrorReport)> {
    let length = config.support_length.ok_or(Error::SupportLength(0))?;
    let support = SupportSequence::logarithmic(matrix.n(), length)?;
    lsfsd_with_support(matrix, config, &support)
}

/// [`lsfsd`] with an explicit support sequence.
pub fn lsfsd_with_support(
    matrix: &DataMatrix,
    config: &SelectionConfig,
    support: &SupportSequence,
) -> Result<(Ranking, ErrorReport)> {
    let pre = survivors(matrix, config)?;
    let bounds = score_features_bounded(matrix, &pre.kept, support)?;
    let order = approximate_order(&bounds);
    let bounds: Vec<BoundedScore> = order.iter().map(|&i| bounds[i]).collect();
    let ordered_features: Vec<usize> = bounds.iter().map(|b| b.feature_index).collect();

    // a single survivor has no pairs to misorder
    let max_error = if bounds.len() < 2 { 0.0 } else { max_error_ratio(&bounds)? };
    let true_error = if config.verify_exact && bounds.len() >= 2 {
        Some(true_error_ratio(&score_features(matrix, &pre.kept)?, &ordered_features)?)
    } else if config.verify_exact {
        Some(0.0)
    } else {
        None
    };
    Ok((
        Ranking {
            ordered_features,
            scores: RankedScores::Bounded(bounds),
            discarded_by_correlation: pre.discarded,
            last_discard_correlation: pre.last_discard_correlation,
        },
        ErrorReport { max_error_ratio: max_error, true_error_ratio: true_error },
    ))
}

/// `⌈p·d⌉` with a floor of 1.
pub fn fraction_budget(fraction: f64, d: usize) -> usize {
    ((fraction * d as f64).ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(columns: Vec<Vec<f64>>) -> DataMatrix {
        DataMatrix::from_columns(columns).unwrap()
    }

    #[test]
    fn pearson_examples() {
        let f = vec![1.0, 2.0, 3.0, 4.0];
        let lin: Vec<f64> = f.iter().map(|v| 2.0 * v + 3.0).collect();
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        let m = matrix(vec![f.clone(), lin, neg, vec![1.0, 0.0, 2.0, 1.0], vec![2.0; 4]]);
        assert!((pearson(&m, 0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&m, 0, 2).unwrap() + 1.0).abs() < 1e-15);
        // cov = 1.5/3, sd = sqrt(5/3)·sqrt(2/3)  →  ρ = 1/sqrt(10)
        assert!((pearson(&m, 0, 3).unwrap() - 0.1f64.sqrt()).abs() < 1e-12);
        assert_eq!(pearson(&m, 0, 4).unwrap(), 0.0);
        assert_eq!(pearson(&m, 0, 0).unwrap(), 1.0);
        assert!(pearson(&m, 0, 5).is_err());
    }

    #[test]
    fn variance_is_sample_variance() {
        assert!((variance(&[1.0, 2.0, 3.0, 4.0]) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(variance(&[3.0; 5]), 0.0);
    }

    #[test]
    fn prefilter_examples() {
        let m = matrix(vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0], vec![1.0, 0.0, 2.0, 1.0]]);
        let p = correlation_prefilter(&m, 1).unwrap();
        assert_eq!(p.discarded, vec![0]);
        assert_eq!(p.kept, vec![1, 2]);
        assert!((p.last_discard_correlation.unwrap() - 1.0).abs() < 1e-15);

        let noop = correlation_prefilter(&m, 0).unwrap();
        assert_eq!(noop.kept, vec![0, 1, 2]);
        assert!(noop.discarded.is_empty());
        assert_eq!(noop.last_discard_correlation, None);

        assert!(matches!(correlation_prefilter(&m, 3), Err(Error::DiscardCount { discard: 3, d: 3 })));
    }

    #[test]
    fn prefilter_breaks_identical_pair_at_larger_index() {
        let a = vec![0.0, 1.0, 5.0, 2.0];
        let m = matrix(vec![vec![3.0, 1.0, 0.0, 2.0], a.clone(), a]);
        let p = correlation_prefilter(&m, 1).unwrap();
        assert_eq!(p.discarded, vec![2]);
        assert_eq!(p.kept, vec![0, 1]);
    }

    #[test]
    fn prefilter_uses_absolute_correlation() {
        let f = vec![0.0, 1.0, 5.0, 2.0, 7.0];
        let neg: Vec<f64> = f.iter().map(|v| -3.0 * v).collect();
        let m = matrix(vec![f, vec![1.0, 0.0, 1.0, 0.0, 1.0], neg]);
        let p = correlation_prefilter(&m, 1).unwrap();
        assert_eq!(p.discarded, vec![0]);
    }

    #[test]
    fn constant_column_is_never_redundant() {
        let m = matrix(vec![vec![1.0; 4], vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 1.1, 2.0, 3.9]]);
        let p = correlation_prefilter(&m, 1).unwrap();
        assert!(p.kept.contains(&0));
    }

    #[test]
    fn fsd_examples() {
        let f = vec![0.0, 1.0, 3.0, 7.0];
        let r = fsd(&matrix(vec![f.clone(), vec![5.0; 4]]), &SelectionConfig::exact(1)).unwrap();
        assert_eq!(r.selected(1), &[0]);
        assert_eq!(r.ordered_features, vec![0, 1]);

        let g: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let r = fsd(&matrix(vec![f, g]), &SelectionConfig::exact(1)).unwrap();
        assert_eq!(r.selected(1), &[1]);
        match &r.scores {
            RankedScores::Exact(s) => {
                assert_eq!(s[0].delta, 2.0 * s[1].delta);
                assert_eq!(s[1].partial_dim, 4.0 * s[0].partial_dim);
            }
            _ => panic!("expected exact scores"),
        }
    }

    #[test]
    fn fsd_budget_checks() {
        let m = matrix(vec![vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0], vec![4.0, 0.0, 1.0]]);
        assert!(matches!(fsd(&m, &SelectionConfig::exact(0)), Err(Error::Budget { .. })));
        assert!(matches!(fsd(&m, &SelectionConfig::exact(4)), Err(Error::Budget { .. })));
        assert!(matches!(
            fsd(&m, &SelectionConfig::exact(3).with_discard(1)),
            Err(Error::Budget { budget: 3, available: 2 })
        ));
        let r = fsd(&m, &SelectionConfig::exact(2).with_discard(1)).unwrap();
        assert_eq!(r.ordered_features.len(), 2);
        assert_eq!(r.discarded_by_correlation.len(), 1);
    }

    #[test]
    fn lsfsd_full_support_matches_fsd() {
        let cols: Vec<Vec<f64>> =
            (0..4).map(|j| (0..40).map(|i| ((i * (2 * j + 3)) % 17) as f64 * (j + 1) as f64).collect()).collect();
        let m = matrix(cols);
        let exact = fsd(&m, &SelectionConfig::exact(2)).unwrap();
        let (approx, report) = lsfsd(&m, &SelectionConfig::approximate(2, 39)).unwrap();
        assert_eq!(approx.ordered_features, exact.ordered_features);
        assert_eq!(report.max_error_ratio, 0.0);
        assert_eq!(report.true_error_ratio, None);
    }

    #[test]
    fn lsfsd_verification_is_opt_in() {
        let cols: Vec<Vec<f64>> =
            (0..5).map(|j| (0..80).map(|i| ((i * i + 7 * j) % (13 + j)) as f64).collect()).collect();
        let m = matrix(cols);
        let mut config = SelectionConfig::approximate(3, 4);
        config.verify_exact = true;
        let (_, report) = lsfsd(&m, &config).unwrap();
        let t = report.true_error_ratio.unwrap();
        assert!(t <= report.max_error_ratio);
    }

    #[test]
    fn lsfsd_rejects_missing_or_short_support() {
        let m = matrix(vec![vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]]);
        assert!(lsfsd(&m, &SelectionConfig::exact(1)).is_err());
        assert!(matches!(lsfsd(&m, &SelectionConfig::approximate(1, 1)), Err(Error::SupportLength(1))));
    }

    #[test]
    fn fraction_budgets() {
        assert_eq!(fraction_budget(0.1, 76), 8);
        assert_eq!(fraction_budget(0.1, 5), 1);
        assert_eq!(fraction_budget(0.001, 5), 1);
        assert_eq!(fraction_budget(1.0, 50), 50);
    }

    proptest! {
        #[test]
        fn prefilter_conserves_features(
            cols in prop::collection::vec(prop::collection::vec(-10i32..10, 6), 2..8),
            frac in 0.0f64..1.0,
        ) {
            let d = cols.len();
            let n_c = ((d - 1) as f64 * frac) as usize;
            let m = matrix(cols.into_iter().map(|c| c.into_iter().map(f64::from).collect()).collect());
            let p = correlation_prefilter(&m, n_c).unwrap();
            prop_assert_eq!(p.discarded.len(), n_c);
            prop_assert_eq!(p.kept.len() + p.discarded.len(), d);
            let mut all: Vec<usize> = p.kept.iter().chain(&p.discarded).copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..d).collect::<Vec<_>>());
        }

        #[test]
        fn ranking_is_sorted_and_budgeted(
            cols in prop::collection::vec(prop::collection::vec(-10i32..10, 8), 1..6),
            b in 1usize..6,
        ) {
            let d = cols.len();
            let budget = b.min(d);
            let m = matrix(cols.into_iter().map(|c| c.into_iter().map(f64::from).collect()).collect());
            let r = fsd(&m, &SelectionConfig::exact(budget)).unwrap();
            prop_assert_eq!(r.selected(budget).len(), budget);
            if let RankedScores::Exact(s) = &r.scores {
                prop_assert!(s.windows(2).all(|w| w[0].partial_dim <= w[1].partial_dim));
            }
        }
    }
}
