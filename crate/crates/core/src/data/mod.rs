//! Dataset representation with explicit missingness, CSV ingestion, masked
//! standardization, and pairwise-deletion correlation diagnostics.
//!
//! A missing component is carried as an explicit hole in the observation and
//! is never read by any distance, update, or statistic. Column statistics are
//! available-case: each column's mean and standard deviation are computed
//! over its present values only.

mod correlation;
mod csv_io;

pub use correlation::{
    correlation_matrix, correlation_summary, CorrelationMatrix, CorrelationSummary,
};
pub use csv_io::{load_csv, save_csv, write_csv_with_comment, CsvOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A fixed-length real vector in which any component may be missing, plus an
/// optional display label.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedObservation {
    cells: Vec<Option<f64>>,
    label: Option<String>,
}

impl MaskedObservation {
    pub fn new(cells: Vec<Option<f64>>, label: Option<String>) -> Self {
        Self { cells, label }
    }

    /// A fully present observation.
    pub fn complete(values: Vec<f64>, label: Option<String>) -> Self {
        Self {
            cells: values.into_iter().map(Some).collect(),
            label,
        }
    }

    /// Builds an observation from a dense value vector and the set of
    /// component indices to treat as missing. Masked values are discarded.
    pub fn from_parts(values: &[f64], mask: &[usize], label: Option<String>) -> Self {
        let cells = values
            .iter()
            .enumerate()
            .map(|(k, &v)| if mask.contains(&k) { None } else { Some(v) })
            .collect();
        Self { cells, label }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    /// Value of component `k`, or `None` if missing.
    pub fn get(&self, k: usize) -> Option<f64> {
        self.cells[k]
    }

    pub fn set(&mut self, k: usize, value: Option<f64>) {
        self.cells[k] = value;
    }

    pub fn is_present(&self, k: usize) -> bool {
        self.cells[k].is_some()
    }

    pub fn present_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn present_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, c)| c.map(|_| k))
    }

    /// The missingness mask: indices of the missing components.
    pub fn missing_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(|(k, c)| if c.is_none() { Some(k) } else { None })
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.is_some())
    }

    pub fn is_all_missing(&self) -> bool {
        self.cells.iter().all(|c| c.is_none())
    }
}

/// An ordered collection of equally long observations with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<MaskedObservation>,
    column_names: Vec<String>,
    label_name: Option<String>,
}

impl Dataset {
    /// Validates that every observation has exactly `column_names.len()`
    /// components.
    pub fn new(observations: Vec<MaskedObservation>, column_names: Vec<String>) -> Result<Self> {
        let p = column_names.len();
        for (row, obs) in observations.iter().enumerate() {
            if obs.len() != p {
                return Err(Error::RowLength {
                    row,
                    expected: p,
                    found: obs.len(),
                });
            }
        }
        Ok(Self {
            observations,
            column_names,
            label_name: None,
        })
    }

    pub fn with_label_name(mut self, name: Option<String>) -> Self {
        self.label_name = name;
        self
    }

    /// Number of columns (the dimension p).
    pub fn dim(&self) -> usize {
        self.column_names.len()
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[MaskedObservation] {
        &self.observations
    }

    pub fn obs(&self, row: usize) -> &MaskedObservation {
        &self.observations[row]
    }

    pub(crate) fn obs_mut(&mut self, row: usize) -> &mut MaskedObservation {
        &mut self.observations[row]
    }

    /// Overwrites one cell; `None` masks it.
    pub fn set_cell(&mut self, row: usize, column: usize, value: Option<f64>) {
        self.observations[row].set(column, value);
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn label_name(&self) -> Option<&str> {
        self.label_name.as_deref()
    }

    /// Rows whose components are all missing.
    pub fn all_missing_rows(&self) -> Vec<usize> {
        self.observations
            .iter()
            .enumerate()
            .filter_map(|(i, o)| if o.is_all_missing() { Some(i) } else { None })
            .collect()
    }

    pub fn complete_row_indices(&self) -> Vec<usize> {
        self.observations
            .iter()
            .enumerate()
            .filter_map(|(i, o)| if o.is_complete() { Some(i) } else { None })
            .collect()
    }

    /// Splits row indices by a minimum-present-components threshold:
    /// `(training, supplementary)`. Rows with fewer than `min_present`
    /// present components go to the supplementary side.
    pub fn split_min_present(&self, min_present: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut supplementary = Vec::new();
        for (i, o) in self.observations.iter().enumerate() {
            if o.present_count() >= min_present {
                train.push(i);
            } else {
                supplementary.push(i);
            }
        }
        (train, supplementary)
    }

    /// A new dataset containing the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            observations: rows.iter().map(|&i| self.observations[i].clone()).collect(),
            column_names: self.column_names.clone(),
            label_name: self.label_name.clone(),
        }
    }
}

/// Available-case mean, standard deviation (population convention), and
/// present count for one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStat {
    pub column: String,
    pub mean: f64,
    pub std: f64,
    pub present_count: usize,
}

/// Per-column statistics, in column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColumnStats {
    columns: Vec<ColumnStat>,
}

impl ColumnStats {
    pub fn new(columns: Vec<ColumnStat>) -> Self {
        Self { columns }
    }

    pub fn columns(&self) -> &[ColumnStat] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Computes per-column available-case statistics. Every column must have at
/// least two present values and nonzero spread, otherwise standardization
/// would be ill-defined.
pub fn column_stats(d: &Dataset) -> Result<ColumnStats> {
    let mut columns = Vec::with_capacity(d.dim());
    for k in 0..d.dim() {
        let values: Vec<f64> = d
            .observations()
            .iter()
            .filter_map(|o| o.get(k))
            .collect();
        if values.len() < 2 {
            return Err(Error::ColumnTooSparse {
                column: k,
                present: values.len(),
            });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        if std == 0.0 {
            return Err(Error::ZeroStd { column: k });
        }
        columns.push(ColumnStat {
            column: d.column_names()[k].clone(),
            mean,
            std,
            present_count: values.len(),
        });
    }
    Ok(ColumnStats::new(columns))
}

/// Centers and reduces every present cell as `(x - mean) / std`. Masks are
/// untouched; the input dataset is left as is.
pub fn standardize(d: &Dataset, stats: &ColumnStats) -> Result<Dataset> {
    transform(d, stats, |v, s| (v - s.mean) / s.std)
}

/// Inverse of [`standardize`]: maps present cells back to original units as
/// `mean + std * x`.
pub fn destandardize(d: &Dataset, stats: &ColumnStats) -> Result<Dataset> {
    transform(d, stats, |v, s| s.mean + s.std * v)
}

fn transform(d: &Dataset, stats: &ColumnStats, f: impl Fn(f64, &ColumnStat) -> f64) -> Result<Dataset> {
    if stats.len() != d.dim() {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: stats.len(),
        });
    }
    let observations = d
        .observations()
        .iter()
        .map(|o| {
            let cells = o
                .cells()
                .iter()
                .enumerate()
                .map(|(k, c)| c.map(|v| f(v, &stats.columns()[k])))
                .collect();
            MaskedObservation::new(cells, o.label().map(str::to_string))
        })
        .collect();
    Ok(Dataset {
        observations,
        column_names: d.column_names().to_vec(),
        label_name: d.label_name().map(str::to_string),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(rows: Vec<Vec<Option<f64>>>) -> Dataset {
        let p = rows[0].len();
        let names = (0..p).map(|k| format!("x{}", k + 1)).collect();
        let obs = rows
            .into_iter()
            .map(|cells| MaskedObservation::new(cells, None))
            .collect();
        Dataset::new(obs, names).unwrap()
    }

    #[test]
    fn stats_ignore_missing_values() {
        let d = toy(vec![
            vec![Some(1.0), Some(0.0)],
            vec![Some(3.0), None],
            vec![None, Some(4.0)],
            vec![Some(2.0), None],
        ]);
        let s = column_stats(&d).unwrap();
        assert_eq!(s.columns()[0].present_count, 3);
        assert!((s.columns()[0].mean - 2.0).abs() < 1e-12);
        // population convention over {1, 3, 2}
        let expected_std = ((1.0 + 1.0 + 0.0) / 3.0f64).sqrt();
        assert!((s.columns()[0].std - expected_std).abs() < 1e-12);
        // column {0, 4}
        assert_eq!(s.columns()[1].present_count, 2);
        assert!((s.columns()[1].mean - 2.0).abs() < 1e-12);
        assert!((s.columns()[1].std - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_present_values_population_std() {
        let d = toy(vec![vec![Some(1.0)], vec![Some(3.0)], vec![None]]);
        let s = column_stats(&d).unwrap();
        assert!((s.columns()[0].mean - 2.0).abs() < 1e-12);
        assert!((s.columns()[0].std - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_column_is_an_error() {
        let d = toy(vec![vec![Some(2.0)], vec![Some(2.0)], vec![Some(2.0)]]);
        assert!(matches!(
            column_stats(&d),
            Err(Error::ZeroStd { column: 0 })
        ));
    }

    #[test]
    fn sparse_column_is_an_error() {
        let d = toy(vec![vec![Some(2.0)], vec![None], vec![None]]);
        assert!(matches!(
            column_stats(&d),
            Err(Error::ColumnTooSparse { column: 0, present: 1 })
        ));
    }

    #[test]
    fn standardize_centers_and_reduces_present_cells() {
        let d = toy(vec![
            vec![Some(3.0), Some(1.0)],
            vec![Some(1.0), None],
            vec![None, Some(5.0)],
        ]);
        let s = column_stats(&d).unwrap();
        let z = standardize(&d, &s).unwrap();
        // masks unchanged
        assert!(z.obs(1).get(1).is_none());
        assert!(z.obs(2).get(0).is_none());
        // re-run stats: mean 0, std 1 per column
        let zs = column_stats(&z).unwrap();
        for c in zs.columns() {
            assert!(c.mean.abs() < 1e-10);
            assert!((c.std - 1.0).abs() < 1e-10);
        }
        // input untouched
        assert_eq!(d.obs(0).get(0), Some(3.0));
    }

    #[test]
    fn destandardize_round_trips_present_values() {
        let d = toy(vec![
            vec![Some(3.5), Some(-1.0)],
            vec![Some(0.25), Some(2.0)],
            vec![None, Some(7.5)],
            vec![Some(-2.0), None],
        ]);
        let s = column_stats(&d).unwrap();
        let z = standardize(&d, &s).unwrap();
        let back = destandardize(&z, &s).unwrap();
        for (o, b) in d.observations().iter().zip(back.observations()) {
            for k in 0..d.dim() {
                match (o.get(k), b.get(k)) {
                    (Some(a), Some(c)) => assert!((a - c).abs() < 1e-10),
                    (None, None) => {}
                    _ => panic!("mask changed"),
                }
            }
        }
    }

    #[test]
    fn standardize_rejects_mismatched_stats() {
        let d = toy(vec![vec![Some(1.0), Some(2.0)], vec![Some(3.0), Some(4.0)]]);
        let narrow = toy(vec![vec![Some(1.0)], vec![Some(3.0)]]);
        let s = column_stats(&narrow).unwrap();
        assert!(matches!(
            standardize(&d, &s),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn row_length_is_validated() {
        let obs = vec![
            MaskedObservation::complete(vec![1.0, 2.0], None),
            MaskedObservation::complete(vec![1.0], None),
        ];
        let err = Dataset::new(obs, vec!["a".into(), "b".into()]);
        assert!(matches!(err, Err(Error::RowLength { row: 1, .. })));
    }

    #[test]
    fn min_present_split() {
        let d = toy(vec![
            vec![Some(1.0), Some(2.0), Some(3.0)],
            vec![Some(1.0), None, None],
            vec![None, None, None],
        ]);
        let (train, sup) = d.split_min_present(2);
        assert_eq!(train, vec![0]);
        assert_eq!(sup, vec![1, 2]);
        assert_eq!(d.all_missing_rows(), vec![2]);
    }

    #[test]
    fn stats_json_schema() {
        let d = toy(vec![vec![Some(1.0)], vec![Some(3.0)]]);
        let s = column_stats(&d).unwrap();
        let json = serde_json::to_value(&s).unwrap();
        let first = &json[0];
        assert_eq!(first["column"], "x1");
        assert!(first["mean"].is_number());
        assert!(first["std"].is_number());
        assert_eq!(first["present_count"], 2);
        let back: ColumnStats = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }
}
