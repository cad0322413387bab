//! Column-major storage for a finite dataset of `n` points and `d` real features.

use crate::error::{Error, Result};

/// An `n × d` grid of finite reals stored column-contiguous.
///
/// Rows are data points and columns are features. Every algorithm in this crate scans
/// whole columns, so each column is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
    names: Vec<String>,
}

impl DataMatrix {
    /// Builds a matrix from feature columns. Column names default to their indices.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (0..columns.len()).map(|j| j.to_string()).collect();
        Self::from_named_columns(columns, names)
    }

    pub fn from_named_columns(columns: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::NoFeatures);
        }
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch { left: names.len(), right: columns.len() });
        }
        let n = columns[0].len();
        let d = columns.len();
        let mut values = Vec::with_capacity(n * d);
        for (col, column) in columns.into_iter().enumerate() {
            if column.len() != n {
                return Err(Error::RaggedColumn { col, len: column.len(), expected: n });
            }
            values.extend(column);
        }
        Self::from_column_major(n, d, values, names)
    }

    /// Builds a matrix from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (row_index, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::RaggedColumn { col: row_index, len: row.len(), expected: d });
            }
            for (column, &v) in columns.iter_mut().zip(row) {
                column.push(v);
            }
        }
        Self::from_columns(columns)
    }

    /// Takes ownership of a column-major buffer of length `n * d`.
    pub fn from_column_major(n: usize, d: usize, values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        if d == 0 {
            return Err(Error::NoFeatures);
        }
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        if values.len() != n * d {
            return Err(Error::LengthMismatch { left: values.len(), right: n * d });
        }
        if names.len() != d {
            return Err(Error::LengthMismatch { left: names.len(), right: d });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos % n, col: pos / n, value: values[pos] });
        }
        Ok(Self { n, d, values, names })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, j: usize) -> &str {
        &self.names[j]
    }

    /// The `j`-th feature column.
    ///
    /// Panics if `j >= d`; use [`DataMatrix::try_column`] for a checked lookup.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn try_column(&self, j: usize) -> Result<&[f64]> {
        if j >= self.d {
            return Err(Error::FeatureOutOfRange { index: j, d: self.d });
        }
        Ok(self.column(j))
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[col * self.n + row]
    }

    /// A new matrix holding the given columns in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n);
        let mut names = Vec::with_capacity(indices.len());
        for &j in indices {
            values.extend_from_slice(self.try_column(j)?);
            names.push(self.names[j].clone());
        }
        Self::from_column_major(self.n, indices.len(), values, names)
    }

    /// Applies `f` to every entry of column `j`. The result is re-validated.
    pub fn map_column(&self, j: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.try_column(j)?;
        let mut values = self.values.clone();
        for v in &mut values[j * self.n..(j + 1) * self.n] {
            *v = f(*v);
        }
        Self::from_column_major(self.n, self.d, values, self.names.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_major_layout() {
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(m.n(), 3);
        assert_eq!(m.d(), 2);
        assert_eq!(m.column(0), &[1.0, 3.0, 5.0]);
        assert_eq!(m.column(1), &[2.0, 4.0, 6.0]);
        assert_eq!(m.value(2, 1), 6.0);
        assert_eq!(m.names(), &["0".to_string(), "1".to_string()]);
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(matches!(DataMatrix::from_columns(vec![]), Err(Error::NoFeatures)));
        assert!(matches!(DataMatrix::from_columns(vec![vec![1.0]]), Err(Error::TooFewRows(1))));
        assert!(matches!(
            DataMatrix::from_columns(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(Error::RaggedColumn { col: 1, .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::from_columns(vec![vec![1.0, 2.0], vec![0.0, f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, col: 1, .. }));
        let err = DataMatrix::from_columns(vec![vec![f64::INFINITY, 2.0]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 0, .. }));
    }

    #[test]
    fn select_and_map() {
        let m = DataMatrix::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let swapped = m.select_columns(&[1, 0]).unwrap();
        assert_eq!(swapped.column(0), &[3.0, 4.0]);
        assert_eq!(swapped.name(0), "1");
        assert!(m.select_columns(&[2]).is_err());
        let shifted = m.map_column(0, |v| v + 10.0).unwrap();
        assert_eq!(shifted.column(0), &[11.0, 12.0]);
        assert_eq!(shifted.column(1), m.column(1));
    }
}
