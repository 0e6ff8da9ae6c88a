//! Masked distances, winner search, online updates, and the training loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::data::MaskedObservation;
use crate::error::{Error, Result};

use super::{Assignment, Codebook, GridTopology, InitPolicy, TrainingSchedule};

/// Squared Euclidean distance restricted to the observation's present
/// components: `sum over k not masked of (x_k - c_k)^2`.
pub fn masked_sq_distance(x: &MaskedObservation, code_vector: &[f64]) -> Result<f64> {
    if x.len() != code_vector.len() {
        return Err(Error::DimensionMismatch {
            expected: code_vector.len(),
            found: x.len(),
        });
    }
    let mut sum = 0.0;
    let mut present = 0usize;
    for (cell, c) in x.cells().iter().zip(code_vector) {
        if let Some(v) = cell {
            let d = v - c;
            sum += d * d;
            present += 1;
        }
    }
    if present == 0 {
        return Err(Error::AllMissing);
    }
    Ok(sum)
}

/// The unit whose code-vector minimizes the masked squared distance; ties
/// go to the lowest linear index.
pub fn find_winner(x: &MaskedObservation, cb: &Codebook) -> Result<Assignment> {
    let mut best = Assignment {
        unit: 0,
        sq_distance: f64::INFINITY,
    };
    for (unit, v) in cb.vectors().iter().enumerate() {
        let d = masked_sq_distance(x, v)?;
        if d < best.sq_distance {
            best = Assignment {
                unit,
                sq_distance: d,
            };
        }
    }
    Ok(best)
}

/// One online step: finds the winner for `x` and moves the present
/// components of every code-vector within `radius` (grid Chebyshev
/// distance) of it by `eps` toward `x`. Missing components of `x` touch
/// nothing. Returns the winner.
pub fn update_step(
    cb: &mut Codebook,
    x: &MaskedObservation,
    eps: f64,
    radius: usize,
) -> Result<Assignment> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    let winner = find_winner(x, cb)?;
    let topology = cb.topology();
    for unit in topology.neighborhood(winner.unit, radius) {
        let v = cb.vector_mut(unit);
        for (k, cell) in x.cells().iter().enumerate() {
            if let Some(value) = cell {
                v[k] += eps * (value - v[k]);
            }
        }
    }
    Ok(winner)
}

fn seed_codebook(
    d: &Dataset,
    topology: GridTopology,
    init: InitPolicy,
    rng: &mut ChaCha8Rng,
) -> Result<Codebook> {
    let p = d.dim();
    let n = topology.units();
    match init {
        InitPolicy::UniformInRange => {
            let mut ranges = Vec::with_capacity(p);
            for k in 0..p {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for o in d.observations() {
                    if let Some(v) = o.get(k) {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if lo > hi {
                    return Err(Error::EmptyColumn { column: k });
                }
                ranges.push((lo, hi));
            }
            let vectors = (0..n)
                .map(|_| {
                    ranges
                        .iter()
                        .map(|&(lo, hi)| if lo < hi { rng.random_range(lo..hi) } else { lo })
                        .collect()
                })
                .collect();
            Codebook::new(topology, vectors)
        }
        InitPolicy::SampleCompleteRows => {
            let complete = d.complete_row_indices();
            if complete.len() < n {
                return Err(Error::NotEnoughCompleteRows {
                    needed: n,
                    found: complete.len(),
                });
            }
            let mut pool = complete;
            let vectors = (0..n)
                .map(|_| {
                    let pick = rng.random_range(0..pool.len());
                    let row = pool.swap_remove(pick);
                    d.obs(row).cells().iter().map(|c| c.unwrap()).collect()
                })
                .collect();
            Codebook::new(topology, vectors)
        }
    }
}

/// Quantization error checkpoint recorded during training.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub quantization_error: f64,
}

/// Trains a map on `d` by drawing observations uniformly at random with
/// replacement for `schedule.total_iterations` steps. Deterministic: the
/// same seed reproduces the same codebook bit for bit.
///
/// Rows with every component missing are rejected up front, listed by row
/// index; dropping them silently would hide exactly the data this map is
/// meant to handle.
pub fn train(
    d: &Dataset,
    topology: GridTopology,
    schedule: &TrainingSchedule,
    init: InitPolicy,
) -> Result<Codebook> {
    train_with_checkpoints(d, topology, schedule, init, 0).map(|(cb, _)| cb)
}

/// [`train`], recording the masked quantization error at `checkpoints`
/// evenly spaced points (plus the initial state when `checkpoints > 0`).
pub fn train_with_checkpoints(
    d: &Dataset,
    topology: GridTopology,
    schedule: &TrainingSchedule,
    init: InitPolicy,
    checkpoints: usize,
) -> Result<(Codebook, Vec<Checkpoint>)> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let bad = d.all_missing_rows();
    if !bad.is_empty() {
        return Err(Error::AllMissingRows { rows: bad });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(schedule.rng_seed);
    let mut cb = seed_codebook(d, topology, init, &mut rng)?;

    let total = schedule.total_iterations;
    let every = total.checked_div(checkpoints).map_or(0, |v| v.max(1));
    let mut log = Vec::new();
    let record = |cb: &Codebook, t: usize, log: &mut Vec<Checkpoint>| -> Result<()> {
        let qe = quantization_error(d, cb)?;
        log.push(Checkpoint {
            iteration: t,
            quantization_error: qe.mean.unwrap_or(f64::NAN),
        });
        Ok(())
    };
    if checkpoints > 0 {
        record(&cb, 0, &mut log)?;
    }

    for t in 0..total {
        let row = rng.random_range(0..d.len());
        update_step(&mut cb, d.obs(row), schedule.eps(t), schedule.radius(t))?;
        if every > 0 && ((t + 1) % every == 0 || t + 1 == total) {
            record(&cb, t + 1, &mut log)?;
        }
    }
    Ok((cb, log))
}

/// Assigns every observation to its nearest unit under the masked distance,
/// without touching the codebook. Rows with all components missing are
/// reported per row; the batch is never aborted. Results do not depend on
/// evaluation order.
pub fn classify(d: &Dataset, cb: &Codebook) -> Vec<Result<Assignment>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        d.observations()
            .par_iter()
            .map(|x| find_winner(x, cb))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        classify_seq(d, cb)
    }
}

/// Single-threaded [`classify`], kept available for comparison runs.
pub fn classify_seq(d: &Dataset, cb: &Codebook) -> Vec<Result<Assignment>> {
    d.observations().iter().map(|x| find_winner(x, cb)).collect()
}

/// Mean winning masked squared distance, each term divided by the row's
/// present-component count so complete and incomplete rows weigh alike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationReport {
    /// `None` when no row contributed.
    pub mean: Option<f64>,
    pub rows_used: usize,
    pub all_missing_rows: usize,
}

pub fn quantization_error(d: &Dataset, cb: &Codebook) -> Result<QuantizationReport> {
    let per_row = |x: &MaskedObservation| -> Result<Option<f64>> {
        match find_winner(x, cb) {
            Ok(a) => Ok(Some(a.sq_distance / x.present_count() as f64)),
            Err(Error::AllMissing) => Ok(None),
            Err(e) => Err(e),
        }
    };
    #[cfg(feature = "parallel")]
    let terms: Vec<Option<f64>> = {
        use rayon::prelude::*;
        d.observations()
            .par_iter()
            .map(per_row)
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let terms: Vec<Option<f64>> = d
        .observations()
        .iter()
        .map(per_row)
        .collect::<Result<_>>()?;

    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for t in terms {
        match t {
            Some(v) => {
                sum += v;
                used += 1;
            }
            None => skipped += 1,
        }
    }
    Ok(QuantizationReport {
        mean: if used > 0 { Some(sum / used as f64) } else { None },
        rows_used: used,
        all_missing_rows: skipped,
    })
}
