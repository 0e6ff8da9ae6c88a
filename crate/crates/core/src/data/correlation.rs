//! Pairwise-deletion Pearson correlation: each coefficient is computed over
//! the rows where both columns are present, the practice that lets a
//! correlation matrix be read off a dataset that still contains holes.

use serde::Serialize;

use crate::error::Result;

use super::Dataset;

/// Symmetric correlation matrix with unit diagonal. Entries for column pairs
/// with fewer than two common present rows (or no spread over them) are
/// explicitly undefined rather than silently zeroed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.dim + j]
    }

    /// Upper-triangle pairs whose coefficient could not be computed.
    pub fn undefined_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if self.get(i, j).is_none() {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Counts over the p(p-1)/2 upper-triangle coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub pairs: usize,
    pub above_threshold: usize,
    pub min_abs: Option<f64>,
    pub undefined: usize,
}

/// Computes the pairwise-deletion correlation matrix.
pub fn correlation_matrix(d: &Dataset) -> Result<CorrelationMatrix> {
    let p = d.dim();
    let mut entries = vec![None; p * p];
    for i in 0..p {
        entries[i * p + i] = Some(1.0);
        for j in (i + 1)..p {
            let r = pairwise_pearson(d, i, j);
            entries[i * p + j] = r;
            entries[j * p + i] = r;
        }
    }
    Ok(CorrelationMatrix { dim: p, entries })
}

fn pairwise_pearson(d: &Dataset, i: usize, j: usize) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = d
        .observations()
        .iter()
        .filter_map(|o| match (o.get(i), o.get(j)) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        })
        .collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|(a, _)| a).sum::<f64>() / n;
    let my = pairs.iter().map(|(_, b)| b).sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Summarizes the upper triangle: coefficients strictly above `threshold`
/// and the minimum absolute off-diagonal coefficient.
pub fn correlation_summary(m: &CorrelationMatrix, threshold: f64) -> CorrelationSummary {
    let p = m.dim();
    let mut pairs = 0;
    let mut above = 0;
    let mut undefined = 0;
    let mut min_abs: Option<f64> = None;
    for i in 0..p {
        for j in (i + 1)..p {
            pairs += 1;
            match m.get(i, j) {
                Some(r) => {
                    if r > threshold {
                        above += 1;
                    }
                    let a = r.abs();
                    min_abs = Some(min_abs.map_or(a, |m| m.min(a)));
                }
                None => undefined += 1,
            }
        }
    }
    CorrelationSummary {
        pairs,
        above_threshold: above,
        min_abs,
        undefined,
    }
}
