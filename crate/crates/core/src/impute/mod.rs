//! A-posteriori estimation of missing values from a trained codebook.
//!
//! For an observation x with missing set M, the winning unit's components
//! give the hard estimates. Softmax membership probabilities
//! `exp(-d_i) / sum_k exp(-d_k)` over the masked squared distances d_i give
//! a probability-weighted estimate and, through the discrete distribution
//! of (probability, component value) pairs, interval bounds for each
//! missing component.

use serde::{Deserialize, Serialize};

use crate::data::{ColumnStats, Dataset, MaskedObservation};
use crate::error::{Error, Result};
use crate::som::{find_winner, masked_sq_distance, Codebook};

/// Soft class assignment of one observation: nonnegative probabilities over
/// all units, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipProfile {
    probs: Vec<f64>,
    winner: usize,
}

impl MembershipProfile {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Index of the most probable unit; coincides with the masked-distance
    /// winner whenever that winner is unique.
    pub fn winner(&self) -> usize {
        self.winner
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Membership probabilities of `x` over the units of `cb`, computed from
/// masked squared distances.
pub fn membership(x: &MaskedObservation, cb: &Codebook) -> Result<MembershipProfile> {
    let mut dists = Vec::with_capacity(cb.units());
    for v in cb.vectors() {
        dists.push(masked_sq_distance(x, v)?);
    }
    membership_from_sq_distances(&dists)
}

/// Membership probabilities from precomputed squared distances. The
/// computation subtracts the minimal distance before exponentiating, which
/// changes nothing mathematically and keeps the exponentials in range; as a
/// consequence, shifting every distance by the same constant leaves the
/// probabilities bitwise unchanged.
pub fn membership_from_sq_distances(sq_distances: &[f64]) -> Result<MembershipProfile> {
    if sq_distances.is_empty() {
        return Err(Error::TooFewUnits(0));
    }
    let mut min = f64::INFINITY;
    let mut winner = 0usize;
    for (i, &d) in sq_distances.iter().enumerate() {
        if d < min {
            min = d;
            winner = i;
        }
    }
    let weights: Vec<f64> = sq_distances.iter().map(|&d| (-(d - min)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let probs = weights.iter().map(|w| w / total).collect();
    Ok(MembershipProfile { probs, winner })
}

/// The discrete distribution of one missing component's estimator:
/// (membership probability, code-vector component) pairs over all units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorDistribution {
    pairs: Vec<(f64, f64)>,
}

impl EstimatorDistribution {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        Self { pairs }
    }

    /// (probability, value) pairs in unit order.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn mean(&self) -> f64 {
        self.pairs.iter().map(|(p, v)| p * v).sum()
    }

    /// Central interval at the given coverage level, from the discrete
    /// distribution itself. With alpha = 1 - level, the lower bound is the
    /// innermost value leaving at most alpha/2 probability strictly below
    /// it, and the upper bound the innermost value accumulating at least
    /// 1 - alpha/2; each tail outside the interval then carries at most
    /// alpha/2. A point mass at v yields (v, v) at every level, and
    /// widening the level never narrows the interval.
    pub fn interval(&self, level: f64) -> Result<(f64, f64)> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::BadLevel(level));
        }
        let half_alpha = (1.0 - level) / 2.0;

        // collapse duplicate values so tail masses are well defined
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(self.pairs.len());
        let mut order: Vec<(f64, f64)> = self.pairs.iter().map(|&(p, v)| (v, p)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (v, p) in order {
            match sorted.last_mut() {
                Some((lv, lp)) if *lv == v => *lp += p,
                _ => sorted.push((v, p)),
            }
        }

        let mut low = sorted[0].0;
        let mut below = 0.0;
        for &(v, p) in &sorted {
            if below <= half_alpha {
                low = v;
            } else {
                break;
            }
            below += p;
        }

        let target = 1.0 - half_alpha;
        let mut high = sorted[sorted.len() - 1].0;
        let mut cumulative = 0.0;
        for &(v, p) in &sorted {
            cumulative += p;
            if cumulative >= target {
                high = v;
                break;
            }
        }
        Ok((low, high))
    }
}

/// Estimates for one missing component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellEstimate {
    pub column: usize,
    /// Winning unit's component value.
    pub hard: f64,
    /// Membership-probability-weighted mean of the component over all units.
    pub weighted: f64,
    pub distribution: EstimatorDistribution,
}

/// Everything estimated for one observation's missing components. An
/// observation without missing components yields an empty cell list.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputationResult {
    pub winner: usize,
    pub membership: MembershipProfile,
    pub cells: Vec<CellEstimate>,
}

/// Computes hard and weighted estimates, plus the estimator distribution,
/// for every missing component of `x`.
pub fn impute_observation(x: &MaskedObservation, cb: &Codebook) -> Result<ImputationResult> {
    let profile = membership(x, cb)?;
    let winner = find_winner(x, cb)?.unit;
    let cells = x
        .missing_indices()
        .map(|k| {
            let pairs: Vec<(f64, f64)> = profile
                .probs()
                .iter()
                .zip(cb.vectors())
                .map(|(&p, v)| (p, v[k]))
                .collect();
            let distribution = EstimatorDistribution::new(pairs);
            CellEstimate {
                column: k,
                hard: cb.vector(winner)[k],
                weighted: distribution.mean(),
                distribution,
            }
        })
        .collect();
    Ok(ImputationResult {
        winner,
        membership: profile,
        cells,
    })
}

/// Which estimator fills the dataset in [`impute_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeMode {
    Hard,
    Weighted,
}

impl std::fmt::Display for ImputeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImputeMode::Hard => write!(f, "hard"),
            ImputeMode::Weighted => write!(f, "weighted"),
        }
    }
}

/// One filled cell in an imputation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputedCellRecord {
    pub row: usize,
    pub column: usize,
    pub estimate: f64,
    pub interval_low: f64,
    pub interval_high: f64,
    pub winner_unit: usize,
}

/// Per-cell record of what was filled in and from where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputationReport {
    pub mode: ImputeMode,
    pub level: f64,
    pub entries: Vec<ImputedCellRecord>,
    /// Rows that could not be imputed because nothing was present.
    pub all_missing_rows: Vec<usize>,
}

impl ImputationReport {
    /// CSV rendering with columns row, column, mode, estimate,
    /// interval_low, interval_high, winner_unit.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("row,column,mode,estimate,interval_low,interval_high,winner_unit\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.row, e.column, self.mode, e.estimate, e.interval_low, e.interval_high, e.winner_unit
            ));
        }
        out
    }

    /// The same report mapped back to original units via the stored
    /// standardization statistics.
    pub fn destandardized(&self, stats: &ColumnStats) -> Result<ImputationReport> {
        let map = |column: usize, v: f64| -> Result<f64> {
            let s = stats
                .columns()
                .get(column)
                .ok_or(Error::DimensionMismatch {
                    expected: stats.len(),
                    found: column + 1,
                })?;
            Ok(s.mean + s.std * v)
        };
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(ImputedCellRecord {
                    estimate: map(e.column, e.estimate)?,
                    interval_low: map(e.column, e.interval_low)?,
                    interval_high: map(e.column, e.interval_high)?,
                    ..e.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ImputationReport {
            entries,
            ..self.clone()
        })
    }
}

/// Fills every missing cell of `d` from the codebook, per `mode`, and
/// reports each filled cell with its interval at the given level. Rows with
/// every component missing are left incomplete and flagged. Safe to run
/// concurrently per observation; results are order-independent.
pub fn impute_dataset(
    d: &Dataset,
    cb: &Codebook,
    mode: ImputeMode,
    level: f64,
) -> Result<(Dataset, ImputationReport)> {
    #[cfg(feature = "parallel")]
    let rows: Vec<RowFill> = {
        use rayon::prelude::*;
        d.observations()
            .par_iter()
            .map(|x| fill_row(x, cb, mode, level))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<RowFill> = d
        .observations()
        .iter()
        .map(|x| fill_row(x, cb, mode, level))
        .collect::<Result<_>>()?;

    assemble(d, mode, level, rows)
}

/// Single-threaded [`impute_dataset`], kept available for comparison runs.
pub fn impute_dataset_seq(
    d: &Dataset,
    cb: &Codebook,
    mode: ImputeMode,
    level: f64,
) -> Result<(Dataset, ImputationReport)> {
    let rows: Vec<RowFill> = d
        .observations()
        .iter()
        .map(|x| fill_row(x, cb, mode, level))
        .collect::<Result<_>>()?;
    assemble(d, mode, level, rows)
}

enum RowFill {
    AllMissing,
    Untouched,
    Filled {
        observation: MaskedObservation,
        winner: usize,
        cells: Vec<(usize, f64, (f64, f64))>,
    },
}

fn fill_row(x: &MaskedObservation, cb: &Codebook, mode: ImputeMode, level: f64) -> Result<RowFill> {
    if x.is_all_missing() {
        return Ok(RowFill::AllMissing);
    }
    if x.is_complete() {
        return Ok(RowFill::Untouched);
    }
    let result = impute_observation(x, cb)?;
    let mut filled = x.clone();
    let mut cells = Vec::with_capacity(result.cells.len());
    for cell in &result.cells {
        let estimate = match mode {
            ImputeMode::Hard => cell.hard,
            ImputeMode::Weighted => cell.weighted,
        };
        filled.set(cell.column, Some(estimate));
        cells.push((cell.column, estimate, cell.distribution.interval(level)?));
    }
    Ok(RowFill::Filled {
        observation: filled,
        winner: result.winner,
        cells,
    })
}

fn assemble(
    d: &Dataset,
    mode: ImputeMode,
    level: f64,
    rows: Vec<RowFill>,
) -> Result<(Dataset, ImputationReport)> {
    let mut observations = Vec::with_capacity(d.len());
    let mut entries = Vec::new();
    let mut all_missing_rows = Vec::new();
    for (row, fill) in rows.into_iter().enumerate() {
        match fill {
            RowFill::AllMissing => {
                all_missing_rows.push(row);
                observations.push(d.obs(row).clone());
            }
            RowFill::Untouched => observations.push(d.obs(row).clone()),
            RowFill::Filled {
                observation,
                winner,
                cells,
            } => {
                for (column, estimate, (lo, hi)) in cells {
                    entries.push(ImputedCellRecord {
                        row,
                        column,
                        estimate,
                        interval_low: lo,
                        interval_high: hi,
                        winner_unit: winner,
                    });
                }
                observations.push(observation);
            }
        }
    }
    let completed = Dataset::new(observations, d.column_names().to_vec())?
        .with_label_name(d.label_name().map(str::to_string));
    Ok((
        completed,
        ImputationReport {
            mode,
            level,
            entries,
            all_missing_rows,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::som::GridTopology;

    fn codebook(vectors: Vec<Vec<f64>>) -> Codebook {
        let g = GridTopology::new(1, vectors.len()).unwrap();
        Codebook::new(g, vectors).unwrap()
    }

    #[test]
    fn single_unit_gets_probability_one() {
        let cb = codebook(vec![vec![0.0, 0.0]]);
        let x = MaskedObservation::complete(vec![1.0, 1.0], None);
        let m = membership(&x, &cb).unwrap();
        assert_eq!(m.probs(), &[1.0]);
        assert_eq!(m.winner(), 0);
    }

    #[test]
    fn equidistant_units_split_evenly() {
        let cb = codebook(vec![vec![-1.0], vec![1.0]]);
        let x = MaskedObservation::complete(vec![0.0], None);
        let m = membership(&x, &cb).unwrap();
        assert!((m.probs()[0] - 0.5).abs() < 1e-15);
        assert!((m.probs()[1] - 0.5).abs() < 1e-15);
        assert_eq!(m.winner(), 0); // tie goes to the lowest index
    }

    #[test]
    fn softmax_of_hand_computed_distances() {
        // distances^2 {0, 1}: probabilities e^0 and e^-1 over their sum
        let m = membership_from_sq_distances(&[0.0, 1.0]).unwrap();
        assert!((m.probs()[0] - 0.7310585786300049).abs() < 1e-15);
        assert!((m.probs()[1] - 0.2689414213699951).abs() < 1e-15);
    }

    #[test]
    fn shift_stability_is_exact() {
        let base = [3.0, 5.5, 4.25, 9.0];
        let shifted: Vec<f64> = base.iter().map(|d| d + 123.25).collect();
        let a = membership_from_sq_distances(&base).unwrap();
        let b = membership_from_sq_distances(&shifted).unwrap();
        assert_eq!(a.probs(), b.probs());
    }

    #[test]
    fn masked_components_are_ignored_in_membership() {
        let cb = codebook(vec![vec![0.0, 100.0], vec![4.0, -100.0]]);
        let x = MaskedObservation::from_parts(&[1.0, 0.0], &[1], None);
        let m = membership(&x, &cb).unwrap();
        // distances restricted to component 0: 1 and 9
        let expected = membership_from_sq_distances(&[1.0, 9.0]).unwrap();
        assert_eq!(m.probs(), expected.probs());
    }

    #[test]
    fn hard_estimate_reads_the_winning_component() {
        let cb = codebook(vec![vec![0.0, 10.0], vec![5.0, 20.0]]);
        let x = MaskedObservation::from_parts(&[0.5, 0.0], &[1], None);
        let r = impute_observation(&x, &cb).unwrap();
        assert_eq!(r.winner, 0);
        assert_eq!(r.cells.len(), 1);
        assert_eq!(r.cells[0].column, 1);
        assert_eq!(r.cells[0].hard, 10.0);
    }

    #[test]
    fn complete_observation_is_a_no_op() {
        let cb = codebook(vec![vec![0.0], vec![1.0]]);
        let x = MaskedObservation::complete(vec![0.3], None);
        let r = impute_observation(&x, &cb).unwrap();
        assert!(r.cells.is_empty());
    }

    #[test]
    fn two_unit_hand_fixture_matches_table_lookup() {
        let cb = codebook(vec![vec![0.0, -3.0], vec![2.0, 7.0]]);
        // present component 0 = 1.9 is nearer unit 1
        let x = MaskedObservation::from_parts(&[1.9, 0.0], &[1], None);
        let r = impute_observation(&x, &cb).unwrap();
        assert_eq!(r.winner, 1);
        assert_eq!(r.cells[0].hard, 7.0);
    }

    #[test]
    fn weighted_equals_midpoint_for_even_split() {
        let cb = codebook(vec![vec![-1.0, 0.0], vec![1.0, 2.0]]);
        let x = MaskedObservation::from_parts(&[0.0, 0.0], &[1], None);
        let r = impute_observation(&x, &cb).unwrap();
        assert!((r.cells[0].weighted - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weighted_matches_independent_dot_product() {
        let cb = codebook(vec![
            vec![0.0, 1.0],
            vec![1.0, -2.0],
            vec![2.5, 4.0],
            vec![-1.0, 0.5],
        ]);
        let x = MaskedObservation::from_parts(&[0.8, 0.0], &[1], None);
        let r = impute_observation(&x, &cb).unwrap();
        // second, straightforward route: softmax by hand, then dot product
        let dists: Vec<f64> = cb
            .vectors()
            .iter()
            .map(|v| (0.8 - v[0]) * (0.8 - v[0]))
            .collect();
        let weights: Vec<f64> = dists.iter().map(|d| (-d).exp()).collect();
        let total: f64 = weights.iter().sum();
        let expected: f64 = weights
            .iter()
            .zip(cb.vectors())
            .map(|(w, v)| w / total * v[1])
            .sum();
        assert!((r.cells[0].weighted - expected).abs() < 1e-12);
    }

    #[test]
    fn weighted_collapses_onto_hard_as_one_distance_vanishes() {
        // unit 0 approaches the observation; the others sit far enough that
        // their weight is dominated by the winner's growing share
        let x = MaskedObservation::from_parts(&[1.0, 0.0], &[1], None);
        let mut gap = f64::INFINITY;
        for delta in [1.0, 0.5, 0.25, 0.1] {
            let cb = codebook(vec![vec![1.0 + delta, -4.0], vec![5.0, 8.0], vec![-3.0, 5.0]]);
            let r = impute_observation(&x, &cb).unwrap();
            let next = (r.cells[0].weighted - r.cells[0].hard).abs();
            assert!(next < gap, "gap must shrink with the distance");
            gap = next;
        }
        assert!(gap < 1e-4);
    }

    #[test]
    fn point_mass_interval_is_degenerate() {
        let dist = EstimatorDistribution::new(vec![(1.0, 4.5)]);
        assert_eq!(dist.interval(0.5).unwrap(), (4.5, 4.5));
        assert_eq!(dist.interval(0.99).unwrap(), (4.5, 4.5));
    }

    #[test]
    fn uniform_four_point_interval_at_half_level() {
        let dist = EstimatorDistribution::new(vec![
            (0.25, 0.0),
            (0.25, 1.0),
            (0.25, 2.0),
            (0.25, 3.0),
        ]);
        assert_eq!(dist.interval(0.5).unwrap(), (1.0, 2.0));
    }

    #[test]
    fn widening_level_never_narrows() {
        let dist = EstimatorDistribution::new(vec![
            (0.1, -2.0),
            (0.4, 0.0),
            (0.3, 1.0),
            (0.2, 5.0),
        ]);
        let mut prev = dist.interval(0.05).unwrap();
        for level in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let (lo, hi) = dist.interval(level).unwrap();
            assert!(lo <= prev.0 && hi >= prev.1, "level {level}");
            prev = (lo, hi);
        }
    }

    #[test]
    fn interval_level_is_validated() {
        let dist = EstimatorDistribution::new(vec![(1.0, 0.0)]);
        assert!(matches!(dist.interval(0.0), Err(Error::BadLevel(_))));
        assert!(matches!(dist.interval(1.0), Err(Error::BadLevel(_))));
    }

    #[test]
    fn dataset_imputation_composes_with_single_rows() {
        use crate::data::Dataset;
        let cb = codebook(vec![vec![0.0, 0.0], vec![4.0, 4.0]]);
        let rows = vec![
            MaskedObservation::from_parts(&[3.9, 0.0], &[1], None),
            MaskedObservation::complete(vec![0.1, 0.1], None),
            MaskedObservation::new(vec![None, None], None),
        ];
        let d = Dataset::new(rows, vec!["a".into(), "b".into()]).unwrap();
        let (completed, report) = impute_dataset(&d, &cb, ImputeMode::Hard, 0.9).unwrap();
        let direct = impute_observation(d.obs(0), &cb).unwrap();
        assert_eq!(completed.obs(0).get(1), Some(direct.cells[0].hard));
        assert_eq!(completed.obs(1), d.obs(1));
        assert!(completed.obs(2).is_all_missing());
        assert_eq!(report.all_missing_rows, vec![2]);
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.entries[0].winner_unit, 1);
    }

    #[test]
    fn dataset_without_masks_is_returned_unchanged() {
        use crate::data::Dataset;
        let cb = codebook(vec![vec![0.0], vec![1.0]]);
        let rows = vec![
            MaskedObservation::complete(vec![0.2], None),
            MaskedObservation::complete(vec![0.9], None),
        ];
        let d = Dataset::new(rows, vec!["a".into()]).unwrap();
        let (completed, report) = impute_dataset(&d, &cb, ImputeMode::Weighted, 0.9).unwrap();
        assert_eq!(completed, d);
        assert!(report.entries.is_empty());
        assert!(report.all_missing_rows.is_empty());
    }

    #[test]
    fn report_destandardizes_estimates() {
        use crate::data::{ColumnStat, ColumnStats};
        let report = ImputationReport {
            mode: ImputeMode::Hard,
            level: 0.9,
            entries: vec![ImputedCellRecord {
                row: 0,
                column: 1,
                estimate: 2.0,
                interval_low: 1.0,
                interval_high: 3.0,
                winner_unit: 4,
            }],
            all_missing_rows: vec![],
        };
        let stats = ColumnStats::new(vec![
            ColumnStat {
                column: "a".into(),
                mean: 0.0,
                std: 1.0,
                present_count: 5,
            },
            ColumnStat {
                column: "b".into(),
                mean: 10.0,
                std: 2.0,
                present_count: 5,
            },
        ]);
        let raw = report.destandardized(&stats).unwrap();
        assert_eq!(raw.entries[0].estimate, 14.0);
        assert_eq!(raw.entries[0].interval_low, 12.0);
        assert_eq!(raw.entries[0].interval_high, 16.0);
    }
}
