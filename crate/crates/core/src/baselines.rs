//! Reference selectors: random, variance, correlation-only and RRFS.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::order::descending_then_index;
use crate::selection::{correlation_prefilter, pearson_columns, variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Random,
    Variance,
    Correlation,
    Rrfs,
}

/// Method-specific details of a baseline run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineAux {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// RRFS ran out of candidates and filled the budget by variance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backfilled: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub discarded: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub method: BaselineMethod,
    pub selected: Vec<usize>,
    pub aux: BaselineAux,
}

fn check_budget(budget: usize, d: usize) -> Result<()> {
    if budget > d {
        return Err(Error::Budget { budget, available: d });
    }
    Ok(())
}

/// Uniform sample of `budget` distinct features out of `d`, reproducible from `seed`.
pub fn select_random(d: usize, budget: usize, seed: u64) -> Result<BaselineResult> {
    check_budget(budget, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let selected = sample(&mut rng, d, budget).into_vec();
    Ok(BaselineResult {
        method: BaselineMethod::Random,
        selected,
        aux: BaselineAux { seed: Some(seed), ..Default::default() },
    })
}

fn by_descending_variance(matrix: &DataMatrix) -> (Vec<usize>, Vec<f64>) {
    let variances: Vec<f64> = (0..matrix.d()).into_par_iter().map(|j| variance(matrix.column(j))).collect();
    let mut order: Vec<usize> = (0..matrix.d()).collect();
    order.sort_by(|&a, &b| descending_then_index((variances[a], a), (variances[b], b)));
    (order, variances)
}

/// The `budget` highest-variance features, ties by ascending index.
pub fn select_by_variance(matrix: &DataMatrix, budget: usize) -> Result<BaselineResult> {
    check_budget(budget, matrix.d())?;
    let (mut order, _) = by_descending_variance(matrix);
    order.truncate(budget);
    Ok(BaselineResult { method: BaselineMethod::Variance, selected: order, aux: BaselineAux::default() })
}

/// Correlation pre-filter run until `budget` features remain.
pub fn select_by_correlation(matrix: &DataMatrix, budget: usize) -> Result<BaselineResult> {
    check_budget(budget, matrix.d())?;
    if budget == 0 {
        return Err(Error::Budget { budget, available: matrix.d() });
    }
    let pre = correlation_prefilter(matrix, matrix.d() - budget)?;
    Ok(BaselineResult {
        method: BaselineMethod::Correlation,
        selected: pre.kept,
        aux: BaselineAux { threshold: pre.last_discard_correlation, discarded: pre.discarded, ..Default::default() },
    })
}

/// Relevance-redundancy selection with variance as relevance and `|ρ|` as similarity.
///
/// Candidates are visited by descending variance; a candidate is kept when its `|ρ|`
/// with the most recently kept feature is below `threshold`. If the candidates run out
/// first, the highest-variance skipped features fill the remaining slots.
pub fn select_rrfs(matrix: &DataMatrix, budget: usize, threshold: f64) -> Result<BaselineResult> {
    check_budget(budget, matrix.d())?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Threshold(threshold));
    }
    let (order, _) = by_descending_variance(matrix);
    let mut selected = Vec::with_capacity(budget);
    let mut skipped = Vec::new();
    for &candidate in &order {
        if selected.len() == budget {
            break;
        }
        let keep = match selected.last() {
            None => true,
            Some(&last) => pearson_columns(matrix.column(candidate), matrix.column(last)).abs() < threshold,
        };
        if keep {
            selected.push(candidate);
        } else {
            skipped.push(candidate);
        }
    }
    let backfilled = selected.len() < budget;
    if backfilled {
        let missing = budget - selected.len();
        selected.extend(skipped.into_iter().take(missing));
    }
    Ok(BaselineResult {
        method: BaselineMethod::Rrfs,
        selected,
        aux: BaselineAux { threshold: Some(threshold), backfilled: Some(backfilled), ..Default::default() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(columns: Vec<Vec<f64>>) -> DataMatrix {
        DataMatrix::from_columns(columns).unwrap()
    }

    #[test]
    fn random_is_reproducible_and_exhaustive() {
        let all = select_random(10, 10, 3).unwrap();
        let mut s = all.selected.clone();
        s.sort();
        assert_eq!(s, (0..10).collect::<Vec<_>>());
        assert_eq!(select_random(50, 7, 42).unwrap(), select_random(50, 7, 42).unwrap());
        assert_ne!(select_random(50, 7, 42).unwrap().selected, select_random(50, 7, 43).unwrap().selected);
        assert!(select_random(5, 6, 0).is_err());
    }

    #[test]
    fn random_inclusion_frequency_is_uniform() {
        let (d, budget, draws) = (1000, 100, 10_000u64);
        let mut hits = vec![0u32; d];
        for seed in 0..draws {
            for j in select_random(d, budget, seed).unwrap().selected {
                hits[j] += 1;
            }
        }
        for h in hits {
            let freq = h as f64 / draws as f64;
            assert!((freq - 0.1).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn variance_examples() {
        let f = vec![0.0, 1.0, 3.0, 7.0];
        let g: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        assert_eq!(select_by_variance(&matrix(vec![vec![1.0; 4], f.clone()]), 1).unwrap().selected, vec![1]);
        assert_eq!(select_by_variance(&matrix(vec![f.clone(), g.clone()]), 1).unwrap().selected, vec![1]);
        let h = vec![0.0, 0.0, 0.0, 1.0];
        let all = select_by_variance(&matrix(vec![h, f, g]), 3).unwrap();
        assert_eq!(all.selected, vec![2, 1, 0]);
        assert!(select_by_variance(&matrix(vec![vec![1.0, 2.0]]), 2).is_err());
    }

    #[test]
    fn correlation_examples() {
        let m = matrix(vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0], vec![1.0, 0.0, 2.0, 1.0]]);
        assert_eq!(select_by_correlation(&m, 3).unwrap().selected, vec![0, 1, 2]);
        assert_eq!(select_by_correlation(&m, 2).unwrap().selected, vec![1, 2]);
        let a = vec![0.0, 1.0, 5.0, 2.0];
        let twins = matrix(vec![vec![3.0, 1.0, 0.0, 2.0], a.clone(), a]);
        assert_eq!(select_by_correlation(&twins, 2).unwrap().selected, vec![0, 1]);
    }

    #[test]
    fn rrfs_examples() {
        let f = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let g: Vec<f64> = f.iter().map(|v| 2.0 * v).collect();
        let h = vec![1.0, -1.0, 0.0, 0.0, -1.0, 1.0];
        let m = matrix(vec![f.clone(), g, h.clone()]);
        // h is uncorrelated with f and g
        let r = select_rrfs(&m, 2, 0.5).unwrap();
        assert_eq!(r.selected, vec![1, 2]);
        assert_eq!(r.aux.backfilled, Some(false));

        let q = vec![0.0, 3.0, 1.0, 0.0, 2.0, 1.0];
        let independent = matrix(vec![f, h, q]);
        let loose = select_rrfs(&independent, 3, 1.0).unwrap();
        assert_eq!(loose.selected, select_by_variance(&independent, 3).unwrap().selected);
        assert_eq!(loose.aux.backfilled, Some(false));

        let strict = select_rrfs(&m, 3, 0.0).unwrap();
        assert_eq!(strict.selected, vec![1, 0, 2]);
        assert_eq!(strict.aux.backfilled, Some(true));
        assert!(select_rrfs(&m, 2, 1.5).is_err());
    }
}
