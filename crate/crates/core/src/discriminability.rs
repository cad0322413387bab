//! Exact partial diameters and feature-wise discriminability scores.
//!
//! For a feature `f` over `n` points, `phi(k)` is the smallest spread
//! `max |f(x) - f(y)|` over all `k`-subsets of the points. On sorted values an optimal
//! subset is always `k` consecutive values, so `phi(k)` is the narrowest window of
//! length `k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Largest column the exhaustive oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 20;

/// Windows checked per pruning block.
const BLOCK: usize = 32;
/// Blocks per outer pruning group.
const GROUP: usize = 32;

/// One feature's values in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedFeature {
    feature_index: usize,
    sorted_values: Vec<f64>,
}

impl SortedFeature {
    /// Sorts `column` ascending, keeping equal values in input order.
    pub fn new(feature_index: usize, column: &[f64]) -> Self {
        let mut sorted_values = column.to_vec();
        sorted_values.sort_by(f64::total_cmp);
        Self { feature_index, sorted_values }
    }

    pub fn feature_index(&self) -> usize {
        self.feature_index
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn n(&self) -> usize {
        self.sorted_values.len()
    }

    /// Partial diameter for subsets of size `k`.
    pub fn phi(&self, k: usize) -> Result<f64> {
        check_subset_size(k, self.n())?;
        Ok(narrowest_window(&self.sorted_values, k, (self.n() - k) / 2).0)
    }

    /// `phi(k)` for every `k` in `2..=n`, element `i` holding `phi(i + 2)`.
    pub fn phi_profile(&self) -> Vec<f64> {
        let mut scan = WindowScan::new(&self.sorted_values);
        (2..=self.n()).map(|k| scan.width(k)).collect()
    }
}

/// Sorts column `j` of `matrix`.
pub fn sort_feature(matrix: &DataMatrix, j: usize) -> Result<SortedFeature> {
    Ok(SortedFeature::new(j, matrix.try_column(j)?))
}

/// Free-function form of [`SortedFeature::phi`].
pub fn phi(sf: &SortedFeature, k: usize) -> Result<f64> {
    sf.phi(k)
}

fn check_subset_size(k: usize, n: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::SubsetSize { k, n });
    }
    Ok(())
}

/// Exhaustive evaluation of the subset definition of `phi(k)` over all `C(n, k)` subsets.
///
/// Exponential; only meant as an independent check of [`phi`].
pub fn phi_oracle(column: &[f64], k: usize) -> Result<f64> {
    let n = column.len();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_POINTS });
    }
    check_subset_size(k, n)?;
    let mut best = f64::INFINITY;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let members: Vec<f64> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| column[i]).collect();
        let mut spread = 0.0f64;
        for (a, x) in members.iter().enumerate() {
            for y in &members[a + 1..] {
                spread = spread.max((x - y).abs());
            }
        }
        best = best.min(spread);
    }
    Ok(best)
}

/// Narrowest window of `k` consecutive sorted values, returned with its start index.
///
/// `hint` is a window start used as the initial bound. Blocks of windows whose smallest
/// possible width already reaches the current best are skipped: for starts in
/// `lo..hi`, every width is at least `values[lo + k - 1] - values[hi - 1]`. Rounding is
/// monotone, so the skipped blocks can never hold a strictly smaller float, and the
/// result is identical to a full scan.
fn narrowest_window(values: &[f64], k: usize, hint: usize) -> (f64, usize) {
    let span = k - 1;
    let windows = values.len() - span;
    let hint = hint.min(windows - 1);
    let mut best = values[hint + span] - values[hint];
    let mut arg = hint;

    let mut group = 0;
    while group < windows {
        let group_end = (group + BLOCK * GROUP).min(windows);
        if values[group + span] - values[group_end - 1] < best {
            let mut block = group;
            while block < group_end {
                let block_end = (block + BLOCK).min(group_end);
                if values[block + span] - values[block_end - 1] < best {
                    let lo = &values[block..block_end];
                    let hi = &values[block + span..block_end + span];
                    let width = hi.iter().zip(lo).fold(f64::INFINITY, |m, (h, l)| m.min(h - l));
                    if width < best {
                        best = width;
                        arg = block + hi.iter().zip(lo).position(|(h, l)| h - l == width).unwrap();
                    }
                }
                block = block_end;
            }
        }
        group = group_end;
    }
    (best, arg)
}

/// Successive `phi` evaluations over one sorted feature, seeding each scan with the
/// previous optimum.
pub(crate) struct WindowScan<'a> {
    values: &'a [f64],
    hint: usize,
}

impl<'a> WindowScan<'a> {
    pub(crate) fn new(values: &'a [f64]) -> Self {
        Self { values, hint: values.len() / 2 }
    }

    /// `phi(k)`; `k` must lie in `2..=n`.
    pub(crate) fn width(&mut self, k: usize) -> f64 {
        debug_assert!(k >= 2 && k <= self.values.len());
        let (width, arg) = narrowest_window(self.values, k, self.hint.saturating_sub(1));
        self.hint = arg;
        width
    }
}

/// Exact discriminability scores of a single feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature_index: usize,
    /// Mean of `phi(k)` over `k = 2..=n`, divided by `n`.
    pub delta_star: f64,
    /// As `delta_star` with each term weighted by `1/k`.
    pub delta: f64,
    /// `1 / delta²`; infinite for a constant feature.
    #[serde(with = "crate::serde_float")]
    pub partial_dim: f64,
}

/// `1 / delta²`, or `+inf` when `delta` is zero.
pub fn dimension_from_delta(delta: f64) -> f64 {
    if delta > 0.0 {
        1.0 / (delta * delta)
    } else {
        f64::INFINITY
    }
}

/// Exact scores of one feature. Terms are accumulated in ascending `k`.
pub fn feature_discriminability(sf: &SortedFeature) -> FeatureScore {
    let n = sf.n();
    let mut scan = WindowScan::new(sf.values());
    let mut plain = 0.0f64;
    let mut weighted = 0.0f64;
    for k in 2..=n {
        let phi = scan.width(k);
        plain += phi;
        weighted += phi / k as f64;
    }
    let delta = weighted / n as f64;
    FeatureScore {
        feature_index: sf.feature_index(),
        delta_star: plain / n as f64,
        delta,
        partial_dim: dimension_from_delta(delta),
    }
}

/// Exact scores for the listed features, in the listed order. Features are scored in
/// parallel on the current rayon pool.
pub fn score_features(matrix: &DataMatrix, features: &[usize]) -> Result<Vec<FeatureScore>> {
    for &j in features {
        matrix.try_column(j)?;
    }
    Ok(features.par_iter().map(|&j| feature_discriminability(&SortedFeature::new(j, matrix.column(j)))).collect())
}

/// Discriminability of the whole feature set: `(1/n) Σ_k max_f phi_f(k)`.
///
/// The maximum is taken per `k` before summing.
pub fn dataset_discriminability(matrix: &DataMatrix) -> f64 {
    let n = matrix.n();
    let envelope = (0..matrix.d())
        .into_par_iter()
        .map(|j| SortedFeature::new(j, matrix.column(j)).phi_profile())
        .reduce_with(|mut acc, profile| {
            for (a, p) in acc.iter_mut().zip(profile) {
                *a = a.max(p);
            }
            acc
        })
        .unwrap_or_default();
    envelope.iter().sum::<f64>() / n as f64
}
