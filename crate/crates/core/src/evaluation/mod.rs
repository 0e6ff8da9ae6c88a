//! Mask-and-recover evaluation: suppress known values, retrain, impute, and
//! measure recovery error and super-class stability against a baseline run
//! with the same seeds. Includes a seeded synthetic-data generator standing
//! in for unpublished real datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{column_stats, standardize, Dataset, MaskedObservation};
use crate::error::{Error, Result};
use crate::impute::{impute_dataset_seq, ImputeMode};
use crate::som::{train, Codebook, GridTopology, InitPolicy, TrainingSchedule};
use crate::superclass::{agglomerate, cut, observation_superclasses, SuperClassing};

/// Shape and structure of a generated dataset: Gaussian clusters whose
/// separation rides a single shared factor, so `correlation` directly sets
/// the strength of every pairwise column correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub rows: usize,
    pub cols: usize,
    pub clusters: usize,
    /// Within-cluster standard deviation per column.
    pub spread: f64,
    /// Cross-column correlation strength in [0, 1].
    pub correlation: f64,
    pub seed: u64,
}

/// Generates a complete, labeled, seed-deterministic dataset.
///
/// Row r belongs to cluster r mod `clusters`. Cluster levels are evenly
/// spaced along the shared factor, 8 spreads apart so the planted clusters
/// stay separated well beyond the shared-factor stretch, with a small
/// per-column jitter so clusters are not exactly collinear.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err(Error::InvalidParameter(
            "synthetic data needs at least one row and one column".into(),
        ));
    }
    if spec.clusters == 0 || spec.clusters > spec.rows {
        return Err(Error::InvalidParameter(format!(
            "cannot place {} clusters in {} rows",
            spec.clusters, spec.rows
        )));
    }
    if !(0.0..=1.0).contains(&spec.correlation) {
        return Err(Error::InvalidParameter(format!(
            "correlation strength must lie in [0, 1], got {}",
            spec.correlation
        )));
    }
    if spec.spread <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "spread must be positive, got {}",
            spec.spread
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shared = spec.correlation.sqrt();
    let independent = (1.0 - spec.correlation).sqrt();

    let jitter: Vec<Vec<f64>> = (0..spec.clusters)
        .map(|_| {
            (0..spec.cols)
                .map(|_| 0.25 * spec.spread * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    let levels: Vec<f64> = (0..spec.clusters)
        .map(|j| 8.0 * spec.spread * (j as f64 - (spec.clusters as f64 - 1.0) / 2.0))
        .collect();

    let mut observations = Vec::with_capacity(spec.rows);
    for r in 0..spec.rows {
        let j = r % spec.clusters;
        let z: f64 = rng.sample(StandardNormal);
        let values: Vec<f64> = (0..spec.cols)
            .map(|k| {
                let eps: f64 = rng.sample(StandardNormal);
                shared * (levels[j] + spec.spread * z)
                    + jitter[j][k]
                    + independent * spec.spread * eps
            })
            .collect();
        observations.push(MaskedObservation::complete(values, Some(format!("r{r}"))));
    }

    let names = (0..spec.cols).map(|k| format!("x{}", k + 1)).collect();
    Dataset::new(observations, names)
}

/// A cell that was present and got artificially masked, with its true value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressedCell {
    pub row: usize,
    pub column: usize,
    pub value: f64,
}

/// Which cells [`suppress`] masked, and the ground truth it withheld. The
/// plan is the only place the truth survives; the returned dataset carries
/// holes where these cells were.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuppressionPlan {
    pub per_row: usize,
    pub seed: u64,
    pub cells: Vec<SuppressedCell>,
}

/// Masks exactly `m` present cells per row, chosen uniformly without
/// replacement among that row's present cells. Already-missing cells are
/// never chosen, and no row is left without present components.
pub fn suppress(d: &Dataset, m: usize, seed: u64) -> Result<(Dataset, SuppressionPlan)> {
    if m >= d.dim() && m > 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot suppress {m} of {} components per row",
            d.dim()
        )));
    }
    let mut out = d.clone();
    let mut cells = Vec::with_capacity(d.len() * m);
    if m > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for row in 0..d.len() {
            let present: Vec<usize> = d.obs(row).present_indices().collect();
            if present.len() <= m {
                return Err(Error::SuppressTooMany {
                    row,
                    requested: m,
                    present: present.len(),
                });
            }
            let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, present.len(), m)
                .iter()
                .map(|i| present[i])
                .collect();
            chosen.sort_unstable();
            for column in chosen {
                let value = d.obs(row).get(column).unwrap();
                out.obs_mut(row).set(column, None);
                cells.push(SuppressedCell { row, column, value });
            }
        }
    }
    Ok((
        out,
        SuppressionPlan {
            per_row: m,
            seed,
            cells,
        },
    ))
}

/// Adjusted Rand index between two labelings of the same elements, via the
/// contingency table.
pub fn adjusted_rand(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LeafCountMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot compare empty partitions".into(),
        ));
    }
    fn comb2(x: usize) -> f64 {
        (x * x.saturating_sub(1)) as f64 / 2.0
    }
    let mut table: std::collections::HashMap<(usize, usize), usize> = Default::default();
    let mut rows: std::collections::HashMap<usize, usize> = Default::default();
    let mut cols: std::collections::HashMap<usize, usize> = Default::default();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let index: f64 = table.values().map(|&c| comb2(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| comb2(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| comb2(c)).sum();
    let expected = sum_a * sum_b / comb2(a.len());
    let max_index = (sum_a + sum_b) / 2.0;
    if (max_index - expected).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((index - expected) / (max_index - expected))
}

/// Adjusted Rand index between two super-classings over the same units,
/// clamped to [0, 1].
pub fn superclass_stability(base: &SuperClassing, variant: &SuperClassing) -> Result<f64> {
    if base.n_leaves() != variant.n_leaves() {
        return Err(Error::LeafCountMismatch {
            left: base.n_leaves(),
            right: variant.n_leaves(),
        });
    }
    Ok(adjusted_rand(base.labels(), variant.labels())?.clamp(0.0, 1.0))
}

/// Mean quadratic error of plain column-mean imputation over the plan's
/// cells, using the column means of the present values of `d` (what a mean
/// imputer would actually see). `None` when the plan is empty.
pub fn baseline_mean_impute_mqe(d: &Dataset, plan: &SuppressionPlan) -> Result<Option<f64>> {
    if plan.cells.is_empty() {
        return Ok(None);
    }
    let mut means = vec![None; d.dim()];
    for cell in &plan.cells {
        if means[cell.column].is_none() {
            let values: Vec<f64> = d
                .observations()
                .iter()
                .filter_map(|o| o.get(cell.column))
                .collect();
            if values.is_empty() {
                return Err(Error::EmptyColumn {
                    column: cell.column,
                });
            }
            means[cell.column] = Some(values.iter().sum::<f64>() / values.len() as f64);
        }
    }
    let sum: f64 = plan
        .cells
        .iter()
        .map(|c| {
            let e = means[c.column].unwrap() - c.value;
            e * e
        })
        .sum();
    Ok(Some(sum / plan.cells.len() as f64))
}

/// Per-column recovery error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnError {
    pub column: usize,
    pub mqe: f64,
    pub cells: usize,
}

/// Outcome of one suppress-retrain-impute run, in standardized units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub m: usize,
    pub missing_fraction: f64,
    /// Mean quadratic error over the suppressed cells; `None` when m = 0.
    pub mqe: Option<f64>,
    pub per_column: Vec<ColumnError>,
    /// Adjusted-Rand stability of the k super-classes against the
    /// unsuppressed baseline run with the same seeds.
    pub stability: f64,
    pub baseline_mqe: Option<f64>,
    pub suppressed_cells: usize,
}

/// The fixed ingredients of one suppress-retrain-impute protocol run.
#[derive(Clone, Copy)]
struct ProtocolSetup<'a> {
    topo: GridTopology,
    schedule: &'a TrainingSchedule,
    init: InitPolicy,
    mode: ImputeMode,
    k: usize,
}

/// Trains on `standardized` and returns the super-class partition of the
/// observations: row -> winning unit -> unit's super-class. Unit indices of
/// two separately trained maps do not correspond, so stability is always
/// measured on this observation-level partition.
fn baseline_row_superclasses(
    standardized: &Dataset,
    setup: &ProtocolSetup<'_>,
) -> Result<SuperClassing> {
    let cb = train(standardized, setup.topo, setup.schedule, setup.init)?;
    let units = cut(&agglomerate(&cb)?, setup.k)?;
    observation_superclasses(standardized, &cb, &units)
}

fn suppressed_run(
    standardized: &Dataset,
    setup: &ProtocolSetup<'_>,
    base: &SuperClassing,
    m: usize,
    suppression_seed: u64,
) -> Result<RecoveryReport> {
    let (suppressed, plan) = suppress(standardized, m, suppression_seed)?;
    let cb: Codebook = train(&suppressed, setup.topo, setup.schedule, setup.init)?;
    let (completed, _) = impute_dataset_seq(&suppressed, &cb, setup.mode, 0.9)?;

    let mut per_column: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    let mut sum = 0.0;
    for cell in &plan.cells {
        let estimate = completed.obs(cell.row).get(cell.column).ok_or(Error::AllMissing)?;
        let e = (estimate - cell.value) * (estimate - cell.value);
        sum += e;
        let entry = per_column.entry(cell.column).or_insert((0.0, 0));
        entry.0 += e;
        entry.1 += 1;
    }
    let mqe = if plan.cells.is_empty() {
        None
    } else {
        Some(sum / plan.cells.len() as f64)
    };

    let variant_units = cut(&agglomerate(&cb)?, setup.k)?;
    let variant = observation_superclasses(&suppressed, &cb, &variant_units)?;
    let stability = superclass_stability(base, &variant)?;
    let baseline_mqe = baseline_mean_impute_mqe(&suppressed, &plan)?;

    Ok(RecoveryReport {
        m,
        missing_fraction: m as f64 / standardized.dim() as f64,
        mqe,
        per_column: per_column
            .into_iter()
            .map(|(column, (s, n))| ColumnError {
                column,
                mqe: s / n as f64,
                cells: n,
            })
            .collect(),
        stability,
        baseline_mqe,
        suppressed_cells: plan.cells.len(),
    })
}

/// The full protocol for a single m: standardize, train an unsuppressed
/// baseline, suppress m values per row, retrain on the suppressed data,
/// impute the suppressed cells, and compare. Ground truth never reaches
/// training or imputation; it lives only in the suppression plan.
pub fn recovery_experiment(
    d: &Dataset,
    topo: GridTopology,
    schedule: &TrainingSchedule,
    m: usize,
    mode: ImputeMode,
    k: usize,
    suppression_seed: u64,
) -> Result<RecoveryReport> {
    let stats = column_stats(d)?;
    let standardized = standardize(d, &stats)?;
    let setup = ProtocolSetup {
        topo,
        schedule,
        init: InitPolicy::UniformInRange,
        mode,
        k,
    };
    let base = baseline_row_superclasses(&standardized, &setup)?;
    suppressed_run(&standardized, &setup, &base, m, suppression_seed)
}

/// One replicate's outcome for one m.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub m: usize,
    pub replicate: usize,
    pub train_seed: u64,
    pub suppression_seed: u64,
    pub mqe: Option<f64>,
    pub stability: f64,
    pub baseline_mqe: Option<f64>,
}

/// Aggregate over replicates for one m.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub percent_missing: u32,
    pub mqe: f64,
    pub stability: f64,
    pub baseline_mqe: f64,
    pub mqe_sd: f64,
    pub stability_sd: f64,
}

/// Sweep of m = 1..=m_max with replicate runs and their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub replicates: Vec<ReplicateRecord>,
}

impl SweepReport {
    /// CSV rendering mirroring the evaluation table layout, one row per m.
    pub fn to_csv_string(&self) -> String {
        let mut out =
            String::from("m,percent_missing,mqe,stability,baseline_mqe,mqe_sd,stability_sd\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.m, r.percent_missing, r.mqe, r.stability, r.baseline_mqe, r.mqe_sd, r.stability_sd
            ));
        }
        out
    }
}

fn replicate_records(
    standardized: &Dataset,
    topo: GridTopology,
    schedule: &TrainingSchedule,
    k: usize,
    mode: ImputeMode,
    m_max: usize,
    replicate: usize,
) -> Result<Vec<ReplicateRecord>> {
    let train_seed = schedule.rng_seed.wrapping_add(2 * replicate as u64);
    let suppression_seed = schedule.rng_seed.wrapping_add(2 * replicate as u64 + 1);
    let schedule_r = TrainingSchedule {
        rng_seed: train_seed,
        ..schedule.clone()
    };
    let setup = ProtocolSetup {
        topo,
        schedule: &schedule_r,
        init: InitPolicy::UniformInRange,
        mode,
        k,
    };
    let base = baseline_row_superclasses(standardized, &setup)?;
    (1..=m_max)
        .map(|m| {
            let report = suppressed_run(standardized, &setup, &base, m, suppression_seed)?;
            Ok(ReplicateRecord {
                m,
                replicate,
                train_seed,
                suppression_seed,
                mqe: report.mqe,
                stability: report.stability,
                baseline_mqe: report.baseline_mqe,
            })
        })
        .collect()
}

fn aggregate(d: &Dataset, m_max: usize, records: Vec<Vec<ReplicateRecord>>) -> SweepReport {
    let replicates: Vec<ReplicateRecord> = {
        // deterministic order: by m, then replicate (seed order)
        let mut flat: Vec<ReplicateRecord> = records.into_iter().flatten().collect();
        flat.sort_by_key(|r| (r.m, r.replicate));
        flat
    };
    let rows = (1..=m_max)
        .map(|m| {
            let group: Vec<&ReplicateRecord> =
                replicates.iter().filter(|r| r.m == m).collect();
            let mqes: Vec<f64> = group.iter().filter_map(|r| r.mqe).collect();
            let stabs: Vec<f64> = group.iter().map(|r| r.stability).collect();
            let bases: Vec<f64> = group.iter().filter_map(|r| r.baseline_mqe).collect();
            SweepRow {
                m,
                percent_missing: (100.0 * m as f64 / d.dim() as f64).round() as u32,
                mqe: mean(&mqes),
                stability: mean(&stabs),
                baseline_mqe: mean(&bases),
                mqe_sd: sample_sd(&mqes),
                stability_sd: sample_sd(&stabs),
            }
        })
        .collect();
    SweepReport { rows, replicates }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn validate_sweep(d: &Dataset, m_max: usize, replicates: usize) -> Result<()> {
    if m_max == 0 || m_max >= d.dim() {
        return Err(Error::InvalidParameter(format!(
            "m_max must lie in 1..{} for {} columns, got {m_max}",
            d.dim(),
            d.dim()
        )));
    }
    if replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    Ok(())
}

/// Sweeps m = 1..=m_max with `replicates` independent suppression and
/// training seeds per m. Replicate runs are independent and execute on the
/// rayon pool when the `parallel` feature is on; results are merged in seed
/// order either way.
pub fn run_sweep(
    d: &Dataset,
    topo: GridTopology,
    schedule: &TrainingSchedule,
    k: usize,
    mode: ImputeMode,
    m_max: usize,
    replicates: usize,
) -> Result<SweepReport> {
    validate_sweep(d, m_max, replicates)?;
    let stats = column_stats(d)?;
    let standardized = standardize(d, &stats)?;

    #[cfg(feature = "parallel")]
    let records: Vec<Vec<ReplicateRecord>> = {
        use rayon::prelude::*;
        (0..replicates)
            .into_par_iter()
            .map(|r| replicate_records(&standardized, topo, schedule, k, mode, m_max, r))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let records: Vec<Vec<ReplicateRecord>> = (0..replicates)
        .map(|r| replicate_records(&standardized, topo, schedule, k, mode, m_max, r))
        .collect::<Result<_>>()?;

    Ok(aggregate(d, m_max, records))
}

/// Single-threaded [`run_sweep`], kept available for comparison runs.
pub fn run_sweep_seq(
    d: &Dataset,
    topo: GridTopology,
    schedule: &TrainingSchedule,
    k: usize,
    mode: ImputeMode,
    m_max: usize,
    replicates: usize,
) -> Result<SweepReport> {
    validate_sweep(d, m_max, replicates)?;
    let stats = column_stats(d)?;
    let standardized = standardize(d, &stats)?;
    let records: Vec<Vec<ReplicateRecord>> = (0..replicates)
        .map(|r| replicate_records(&standardized, topo, schedule, k, mode, m_max, r))
        .collect::<Result<_>>()?;
    Ok(aggregate(d, m_max, records))
}
