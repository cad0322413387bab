//! Synthetic datasets with planted discriminative features.
//!
//! Planted columns are spread uniformly over an interval. All other columns are
//! concentrated: a narrow normal bump around a center, plus a handful of far outliers
//! that stretch the full range without making the feature discriminative.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// A generated matrix with the indices of its planted columns.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub matrix: DataMatrix,
    /// Ascending.
    pub planted: Vec<usize>,
}

impl SyntheticData {
    /// Share of planted features found in `selected`; `None` without planted features.
    pub fn recall(&self, selected: &[usize]) -> Option<f64> {
        if self.planted.is_empty() {
            return None;
        }
        let hits = selected.iter().filter(|j| self.planted.binary_search(j).is_ok()).count();
        Some(hits as f64 / self.planted.len() as f64)
    }
}

fn fill_spread(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let width = rng.random_range(0.0f64..3f64.ln()).exp();
    let offset = rng.random_range(-5.0..5.0);
    for v in out {
        *v = offset + width * rng.random::<f64>();
    }
}

fn fill_concentrated(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let n = out.len();
    let center = rng.random_range(-5.0..5.0);
    let sigma = rng.random_range(1e-3f64.ln()..3e-2f64.ln()).exp();
    for v in out.iter_mut() {
        *v = center + sigma * rng.sample::<f64, _>(StandardNormal);
    }
    let outliers = (n / 1000).clamp(1, n - 1);
    for row in sample(rng, n, outliers) {
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        out[row] = center + side * rng.random_range(10.0..20.0);
    }
}

/// An `n × d` dataset whose `planted` spread columns are placed at random indices.
///
/// Each column draws from its own stream of a seeded ChaCha generator, so the output
/// depends only on the arguments and not on thread count.
pub fn generate_synthetic(n: usize, d: usize, planted: usize, seed: u64) -> Result<SyntheticData> {
    if planted > d {
        return Err(Error::Planted { planted, d });
    }
    if d == 0 {
        return Err(Error::NoFeatures);
    }
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let mut planted_indices = sample(&mut ChaCha8Rng::seed_from_u64(seed), d, planted).into_vec();
    planted_indices.sort_unstable();

    let mut values = vec![0.0f64; n * d];
    values.par_chunks_mut(n).enumerate().for_each(|(j, column)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64 + 1);
        if planted_indices.binary_search(&j).is_ok() {
            fill_spread(&mut rng, column);
        } else {
            fill_concentrated(&mut rng, column);
        }
    });
    let names = (0..d).map(|j| format!("f{j}")).collect();
    Ok(SyntheticData { matrix: DataMatrix::from_column_major(n, d, values, names)?, planted: planted_indices })
}
