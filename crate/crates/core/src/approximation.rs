//! Support-sequence approximation of the normalized discriminability.
//!
//! `phi` is only evaluated at the points of a support sequence `2 = s_1 < … < s_l = n`.
//! Because `phi(k)` is nondecreasing in `k`, substituting the left or right support
//! value for every `k` strictly between two support points yields a lower and an upper
//! bound on the exact score. Those bounds also yield a computable bound on how many
//! feature pairs the approximate ranking can have out of order.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discriminability::{dimension_from_delta, FeatureScore, SortedFeature, WindowScan};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::order::ascending_by;

/// Strictly increasing subset sizes from 2 to `n` at which `phi` is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSequence {
    points: Vec<usize>,
    n: usize,
}

impl SupportSequence {
    pub fn new(points: Vec<usize>, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        match (points.first(), points.last()) {
            (Some(2), Some(&last)) if last == n => {}
            _ => return Err(Error::InvalidSupport(format!("must start at 2 and end at {n}, got {points:?}"))),
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSupport("points must be strictly increasing".into()));
        }
        Ok(Self { points, n })
    }

    /// Every size `2, 3, …, n`; the bounds then coincide with the exact score.
    pub fn full(n: usize) -> Result<Self> {
        Self::new((2..=n).collect(), n)
    }

    /// Log-spaced support built from a geometric sequence running from `n` down to 2.
    ///
    /// With `g_1 = n > g_2 > … > g_l = 2` geometric, the points are `⌊n + 2 - g_i⌋` with
    /// duplicates dropped, so the support is dense near `n` where `phi` is cheap to
    /// evaluate. Lengths of `n - 1` or more give the full sequence.
    pub fn logarithmic(n: usize, length: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        if length < 2 {
            return Err(Error::SupportLength(length));
        }
        let nf = n as f64;
        let log_ratio = (2.0 / nf).ln() / (length - 1) as f64;
        let mut points = Vec::with_capacity(length.min(n));
        for i in 0..length {
            let geometric = if i == 0 {
                nf
            } else if i == length - 1 {
                2.0
            } else {
                nf * (log_ratio * i as f64).exp()
            };
            let point = ((nf + 2.0 - geometric).floor() as usize).clamp(2, n);
            if points.last().is_none_or(|&last| point > last) {
                points.push(point);
            }
        }
        Self::new(points, n)
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ 1/j` over the sizes `j` strictly between consecutive support points.
    pub fn interior_weights(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| (w[0] + 1..w[1]).map(|j| 1.0 / j as f64).sum()).collect()
    }
}

/// Free-function form of [`SupportSequence::logarithmic`].
pub fn make_log_support_sequence(n: usize, length: usize) -> Result<SupportSequence> {
    SupportSequence::logarithmic(n, length)
}

/// Support length for a relative length `r`: `⌊r·n⌋`, raised to the minimum of 2.
pub fn support_length_for(relative: f64, n: usize) -> usize {
    ((relative * n as f64).floor() as usize).max(2)
}

/// Bounds on a feature's normalized discriminability and dimension under a support
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedScore {
    pub feature_index: usize,
    pub delta_lower: f64,
    pub delta_upper: f64,
    /// `1 / delta_upper²`.
    #[serde(with = "crate::serde_float")]
    pub id_lower: f64,
    /// `1 / delta_lower²`.
    #[serde(with = "crate::serde_float")]
    pub id_upper: f64,
    /// Midpoint of the dimension bounds; the ranking key.
    #[serde(with = "crate::serde_float")]
    pub id_approx: f64,
}

impl BoundedScore {
    /// Combines `phi` values taken at every support point.
    ///
    /// Terms are added in ascending subset size, so on the full sequence both bounds
    /// repeat the exact accumulation bit for bit.
    fn from_support_phis(feature_index: usize, support: &[usize], weights: &[f64], phis: &[f64], n: usize) -> Self {
        let mut lower = 0.0f64;
        let mut upper = 0.0f64;
        for (i, (&point, &phi)) in support.iter().zip(phis).enumerate() {
            let term = phi / point as f64;
            lower += term;
            upper += term;
            if let Some(&w) = weights.get(i) {
                lower += w * phi;
                upper += w * phis[i + 1];
            }
        }
        let delta_lower = lower / n as f64;
        let delta_upper = upper / n as f64;
        let id_lower = dimension_from_delta(delta_upper);
        let id_upper = dimension_from_delta(delta_lower);
        Self { feature_index, delta_lower, delta_upper, id_lower, id_upper, id_approx: (id_lower + id_upper) / 2.0 }
    }
}

/// A support sequence prepared for repeated scoring.
#[derive(Debug, Clone)]
pub struct PreparedSupport {
    support: SupportSequence,
    weights: Vec<f64>,
}

impl PreparedSupport {
    pub fn new(support: SupportSequence) -> Self {
        let weights = support.interior_weights();
        Self { support, weights }
    }

    pub fn support(&self) -> &SupportSequence {
        &self.support
    }

    pub fn score(&self, sf: &SortedFeature) -> Result<BoundedScore> {
        if sf.n() != self.support.n() {
            return Err(Error::SupportMismatch { support: self.support.n(), feature: sf.n() });
        }
        let mut scan = WindowScan::new(sf.values());
        let phis: Vec<f64> = self.support.points().iter().map(|&k| scan.width(k)).collect();
        Ok(self.score_phis(sf.feature_index(), &phis))
    }

    fn score_phis(&self, feature_index: usize, phis: &[f64]) -> BoundedScore {
        BoundedScore::from_support_phis(feature_index, self.support.points(), &self.weights, phis, self.support.n())
    }
}

/// Bounds for one feature; `phi` is evaluated only at the support points.
pub fn bounded_score(sf: &SortedFeature, support: &SupportSequence) -> Result<BoundedScore> {
    PreparedSupport::new(support.clone()).score(sf)
}

/// Bounds for the listed features, in the listed order, scored in parallel.
pub fn score_features_bounded(
    matrix: &DataMatrix,
    features: &[usize],
    support: &SupportSequence,
) -> Result<Vec<BoundedScore>> {
    if support.n() != matrix.n() {
        return Err(Error::SupportMismatch { support: support.n(), feature: matrix.n() });
    }
    for &j in features {
        matrix.try_column(j)?;
    }
    let prepared = PreparedSupport::new(support.clone());
    features.par_iter().map(|&j| prepared.score(&SortedFeature::new(j, matrix.column(j)))).collect()
}

/// Approximation diagnostics for one support sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// Fraction of pairs whose dimension intervals could be out of order.
    pub max_error_ratio: f64,
    /// Fraction of pairs actually out of order; needs exact scores.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_error_ratio: Option<f64>,
}

/// Feature positions (into `bounds`) ordered by ascending approximated dimension.
pub fn approximate_order(bounds: &[BoundedScore]) -> Vec<usize> {
    ascending_by(bounds, |b| (b.id_approx, b.feature_index))
}

fn pair_ratio(count: usize, d: usize) -> f64 {
    2.0 * count as f64 / (d * (d - 1)) as f64
}

/// Share of ordered pairs in the approximate ranking whose exact dimensions are inverted.
///
/// `approx_order` lists feature indices by ascending approximated dimension; `exact`
/// must hold a score for each of them.
pub fn true_error_ratio(exact: &[FeatureScore], approx_order: &[usize]) -> Result<f64> {
    if exact.len() != approx_order.len() {
        return Err(Error::LengthMismatch { left: exact.len(), right: approx_order.len() });
    }
    let d = approx_order.len();
    if d < 2 {
        return Err(Error::TooFewFeatures(d));
    }
    let dims = approx_order
        .iter()
        .map(|&f| exact.iter().find(|s| s.feature_index == f).map(|s| s.partial_dim).ok_or(Error::MissingScore(f)))
        .collect::<Result<Vec<f64>>>()?;
    let inverted = (0..d).map(|a| dims[a + 1..].iter().filter(|&&later| dims[a] > later).count()).sum();
    Ok(pair_ratio(inverted, d))
}

/// Share of ordered pairs `(earlier, later)` in the approximate ranking with
/// `earlier.id_upper > later.id_lower`; an upper bound on [`true_error_ratio`].
///
/// Equal endpoints do not count.
pub fn max_error_ratio(bounds: &[BoundedScore]) -> Result<f64> {
    let d = bounds.len();
    if d < 2 {
        return Err(Error::TooFewFeatures(d));
    }
    let ordered: Vec<&BoundedScore> = approximate_order(bounds).into_iter().map(|i| &bounds[i]).collect();
    let overlapping =
        (0..d).map(|a| ordered[a + 1..].iter().filter(|later| ordered[a].id_upper > later.id_lower).count()).sum();
    Ok(pair_ratio(overlapping, d))
}

/// One row of a support-length sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub relative_length: f64,
    pub requested_length: usize,
    /// Points left after duplicate removal.
    pub support_length: usize,
    pub max_error_ratio: f64,
}

/// Bounds for several support sequences at once.
///
/// `phi` is evaluated once per feature at the union of all support points, so
/// overlapping sequences share work. Returns one bound vector per sequence, each in
/// `features` order.
pub fn score_features_multi(
    matrix: &DataMatrix,
    features: &[usize],
    supports: &[SupportSequence],
) -> Result<Vec<Vec<BoundedScore>>> {
    for s in supports {
        if s.n() != matrix.n() {
            return Err(Error::SupportMismatch { support: s.n(), feature: matrix.n() });
        }
    }
    for &j in features {
        matrix.try_column(j)?;
    }
    let union: Vec<usize> =
        supports.iter().flat_map(|s| s.points().iter().copied()).collect::<BTreeSet<_>>().into_iter().collect();
    let prepared: Vec<(PreparedSupport, Vec<usize>)> = supports
        .iter()
        .map(|s| {
            let slots = s.points().iter().map(|k| union.binary_search(k).unwrap()).collect();
            (PreparedSupport::new(s.clone()), slots)
        })
        .collect();

    let per_feature: Vec<Vec<BoundedScore>> = features
        .par_iter()
        .map(|&j| {
            let sf = SortedFeature::new(j, matrix.column(j));
            let mut scan = WindowScan::new(sf.values());
            let phis: Vec<f64> = union.iter().map(|&k| scan.width(k)).collect();
            prepared
                .iter()
                .map(|(p, slots)| {
                    let picked: Vec<f64> = slots.iter().map(|&i| phis[i]).collect();
                    p.score_phis(j, &picked)
                })
                .collect()
        })
        .collect();

    Ok((0..supports.len()).map(|s| per_feature.iter().map(|scores| scores[s]).collect()).collect())
}

/// Relative lengths `0.01, 0.02, …, 0.20`.
pub fn default_sweep() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 100.0).collect()
}

/// A support-length sweep together with the bounds behind each row.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub supports: Vec<SupportSequence>,
    /// One vector per sweep row, in feature order.
    pub bounds: Vec<Vec<BoundedScore>>,
}

/// Scores the log-spaced support for every relative length.
pub fn sweep_with_bounds(matrix: &DataMatrix, features: &[usize], relative_lengths: &[f64]) -> Result<Sweep> {
    if features.len() < 2 {
        return Err(Error::TooFewFeatures(features.len()));
    }
    let n = matrix.n();
    let requested: Vec<usize> = relative_lengths.iter().map(|&r| support_length_for(r, n)).collect();
    let supports = requested.iter().map(|&l| SupportSequence::logarithmic(n, l)).collect::<Result<Vec<_>>>()?;
    let bounds = score_features_multi(matrix, features, &supports)?;
    let points = relative_lengths
        .iter()
        .zip(&requested)
        .zip(supports.iter().zip(&bounds))
        .map(|((&relative_length, &requested_length), (support, b))| {
            Ok(SweepPoint {
                relative_length,
                requested_length,
                support_length: support.len(),
                max_error_ratio: max_error_ratio(b)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep { points, supports, bounds })
}

/// Maximal error ratio for the log-spaced support at each relative length.
pub fn max_error_sweep(matrix: &DataMatrix, features: &[usize], relative_lengths: &[f64]) -> Result<Vec<SweepPoint>> {
    Ok(sweep_with_bounds(matrix, features, relative_lengths)?.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminability::{feature_discriminability, phi_oracle};
    use proptest::prelude::*;

    fn bounds(feature_index: usize, id_lower: f64, id_upper: f64) -> BoundedScore {
        BoundedScore {
            feature_index,
            delta_lower: 1.0 / id_upper.sqrt(),
            delta_upper: 1.0 / id_lower.sqrt(),
            id_lower,
            id_upper,
            id_approx: (id_lower + id_upper) / 2.0,
        }
    }

    fn exact(feature_index: usize, partial_dim: f64) -> FeatureScore {
        FeatureScore { feature_index, delta_star: 0.0, delta: 0.0, partial_dim }
    }

    #[test]
    fn log_support_examples() {
        assert_eq!(SupportSequence::logarithmic(10, 4).unwrap().points(), &[2, 6, 8, 10]);
        assert_eq!(SupportSequence::logarithmic(5, 4).unwrap().points(), &[2, 3, 4, 5]);
        assert_eq!(SupportSequence::logarithmic(5, 50).unwrap().points(), &[2, 3, 4, 5]);
        for l in [2, 3, 10] {
            assert_eq!(SupportSequence::logarithmic(2, l).unwrap().points(), &[2]);
        }
        assert_eq!(SupportSequence::logarithmic(100, 2).unwrap().points(), &[2, 100]);
        assert!(matches!(SupportSequence::logarithmic(10, 1), Err(Error::SupportLength(1))));
        assert!(matches!(SupportSequence::logarithmic(1, 4), Err(Error::TooFewRows(1))));
    }

    #[test]
    fn log_support_is_valid_for_many_sizes() {
        for n in [2usize, 3, 7, 100, 1000, 12_345, 1_000_000] {
            for l in [2usize, 3, 10, 100, 10_000] {
                let s = SupportSequence::logarithmic(n, l).unwrap();
                assert_eq!(s.points()[0], 2);
                assert_eq!(*s.points().last().unwrap(), n);
                assert!(s.len() <= l.max(1));
                assert!(n == 2 || s.len() >= 2);
            }
        }
    }

    #[test]
    fn rejects_malformed_support() {
        assert!(SupportSequence::new(vec![3, 5], 5).is_err());
        assert!(SupportSequence::new(vec![2, 4], 5).is_err());
        assert!(SupportSequence::new(vec![2, 4, 4, 5], 5).is_err());
        assert!(SupportSequence::new(vec![], 5).is_err());
        assert!(SupportSequence::new(vec![2], 2).is_ok());
    }

    #[test]
    fn interior_weights_are_harmonic_gaps() {
        let s = SupportSequence::new(vec![2, 4, 5, 8], 8).unwrap();
        let w = s.interior_weights();
        assert_eq!(w[0], 1.0 / 3.0);
        assert_eq!(w[1], 0.0);
        assert!((w[2] - (1.0 / 6.0 + 1.0 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn bounded_score_example() {
        let col = [0.0, 1.0, 3.0, 7.0];
        let phi2 = phi_oracle(&col, 2).unwrap();
        let phi4 = phi_oracle(&col, 4).unwrap();
        let upper = (phi2 / 2.0 + phi4 / 4.0 + phi4 / 3.0) / 4.0;
        let lower = (phi2 / 2.0 + phi4 / 4.0 + phi2 / 3.0) / 4.0;
        let s = SupportSequence::new(vec![2, 4], 4).unwrap();
        let b = bounded_score(&SortedFeature::new(0, &col), &s).unwrap();
        assert!((b.delta_upper - upper).abs() < 1e-15);
        assert!((b.delta_lower - lower).abs() < 1e-15);
        assert!((b.delta_upper - 1.145_833_333).abs() < 1e-9);
        assert!((b.delta_lower - 0.645_833_333).abs() < 1e-9);
        assert!((b.id_upper - 2.397_510).abs() < 1e-5);
        assert!((b.id_lower - 0.761_653).abs() < 1e-5);
        assert!((b.id_approx - 1.579_582).abs() < 1e-5);
    }

    #[test]
    fn mismatched_support_is_rejected() {
        let s = SupportSequence::full(5).unwrap();
        let err = bounded_score(&SortedFeature::new(0, &[0.0, 1.0, 2.0]), &s).unwrap_err();
        assert!(matches!(err, Error::SupportMismatch { support: 5, feature: 3 }));
    }

    #[test]
    fn constant_feature_bounds_are_infinite() {
        let s = SupportSequence::logarithmic(6, 3).unwrap();
        let b = bounded_score(&SortedFeature::new(0, &[1.0; 6]), &s).unwrap();
        assert_eq!(b.delta_upper, 0.0);
        assert_eq!(b.id_lower, f64::INFINITY);
        assert_eq!(b.id_approx, f64::INFINITY);
    }

    #[test]
    fn true_error_examples() {
        let scores = [exact(0, 1.0), exact(1, 2.0), exact(2, 3.0)];
        assert_eq!(true_error_ratio(&scores, &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(true_error_ratio(&scores[..2], &[1, 0]).unwrap(), 1.0);
        assert!((true_error_ratio(&scores, &[1, 0, 2]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(true_error_ratio(&scores, &[0, 1]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(true_error_ratio(&scores, &[0, 1, 7]), Err(Error::MissingScore(7))));
    }

    #[test]
    fn max_error_examples() {
        assert_eq!(max_error_ratio(&[bounds(0, 1.0, 2.0), bounds(1, 3.0, 4.0)]).unwrap(), 0.0);
        assert_eq!(max_error_ratio(&[bounds(0, 1.0, 3.0), bounds(1, 2.0, 4.0)]).unwrap(), 1.0);
        // touching endpoints are not a potential error
        assert_eq!(max_error_ratio(&[bounds(0, 1.0, 2.0), bounds(1, 2.0, 3.0)]).unwrap(), 0.0);
        assert!(matches!(max_error_ratio(&[bounds(0, 1.0, 2.0)]), Err(Error::TooFewFeatures(1))));
    }

    #[test]
    fn max_error_orders_by_midpoint() {
        // given out of order; ranking puts feature 1 first
        assert_eq!(max_error_ratio(&[bounds(0, 3.0, 4.0), bounds(1, 1.0, 2.0)]).unwrap(), 0.0);
    }

    #[test]
    fn multi_support_matches_single_scoring() {
        let cols: Vec<Vec<f64>> =
            (0..3).map(|j| (0..60).map(|i| ((i * 7 + j * 13) % 31) as f64 * (j + 1) as f64).collect()).collect();
        let m = DataMatrix::from_columns(cols).unwrap();
        let supports: Vec<SupportSequence> =
            [3, 7, 20].iter().map(|&l| SupportSequence::logarithmic(60, l).unwrap()).collect();
        let multi = score_features_multi(&m, &[0, 1, 2], &supports).unwrap();
        for (s, b) in supports.iter().zip(&multi) {
            assert_eq!(b, &score_features_bounded(&m, &[0, 1, 2], s).unwrap());
        }
    }

    #[test]
    fn sweep_shape() {
        let cols: Vec<Vec<f64>> = (0..4).map(|j| (0..500).map(|i| ((i * (j + 3)) % 101) as f64).collect()).collect();
        let m = DataMatrix::from_columns(cols).unwrap();
        let sweep = max_error_sweep(&m, &[0, 1, 2, 3], &default_sweep()).unwrap();
        assert_eq!(sweep.len(), 20);
        assert_eq!(sweep[0].requested_length, 5);
        assert_eq!(sweep[19].requested_length, 100);
        assert!(sweep.iter().all(|p| (0.0..=1.0).contains(&p.max_error_ratio)));
    }

    fn arb_support(n: usize) -> impl Strategy<Value = SupportSequence> {
        prop::collection::btree_set(3..n.max(4), 0..n.max(1)).prop_map(move |inner| {
            let mut points = vec![2];
            points.extend(inner.into_iter().filter(|&k| k < n));
            if n > 2 {
                points.push(n);
            }
            SupportSequence::new(points, n).unwrap()
        })
    }

    proptest! {
        #[test]
        fn bounds_sandwich_exact(
            (col, support) in prop::collection::vec(-50f64..50., 2..120)
                .prop_flat_map(|c| { let n = c.len(); (Just(c), arb_support(n)) })
        ) {
            let sf = SortedFeature::new(0, &col);
            let e = feature_discriminability(&sf);
            let b = bounded_score(&sf, &support).unwrap();
            let slack = 1e-9 * e.delta.abs().max(1e-300);
            prop_assert!(b.delta_lower <= e.delta + slack);
            prop_assert!(e.delta <= b.delta_upper + slack);
            prop_assert!(b.id_lower <= b.id_approx && b.id_approx <= b.id_upper);
        }

        #[test]
        fn refinement_tightens(
            (col, coarse, extra) in prop::collection::vec(-50f64..50., 3..100)
                .prop_flat_map(|c| { let n = c.len(); (Just(c), arb_support(n), prop::collection::vec(2..=n, 0..10)) })
        ) {
            let n = col.len();
            let mut finer: BTreeSet<usize> = coarse.points().iter().copied().collect();
            finer.extend(extra);
            let finer = SupportSequence::new(finer.into_iter().collect(), n).unwrap();
            let sf = SortedFeature::new(0, &col);
            let a = bounded_score(&sf, &coarse).unwrap();
            let b = bounded_score(&sf, &finer).unwrap();
            let slack = 1e-12 * a.delta_upper.max(1e-300);
            prop_assert!(b.delta_lower + slack >= a.delta_lower);
            prop_assert!(b.delta_upper <= a.delta_upper + slack);
        }

        #[test]
        fn full_support_collapses(col in prop::collection::vec(-50f64..50., 2..150)) {
            let sf = SortedFeature::new(3, &col);
            let e = feature_discriminability(&sf);
            let b = bounded_score(&sf, &SupportSequence::full(col.len()).unwrap()).unwrap();
            prop_assert_eq!(b.delta_lower, e.delta);
            prop_assert_eq!(b.delta_upper, e.delta);
            prop_assert_eq!(b.id_approx, e.partial_dim);
        }
    }
}
