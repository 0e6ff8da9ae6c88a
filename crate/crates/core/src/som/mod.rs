//! The Kohonen map: grid topology, codebook, training schedule, masked
//! winner selection, masked online updates, and supplementary
//! classification.
//!
//! Distances to code-vectors are always restricted to an observation's
//! present components, and an update step touches only those components,
//! so incomplete observations participate in training without any prior
//! imputation. Code-vectors themselves are always fully defined.

mod model;
mod train;

pub use model::SomModel;
pub use train::{
    classify, classify_seq, find_winner, masked_sq_distance, quantization_error, train,
    train_with_checkpoints, update_step, Checkpoint, QuantizationReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rectangular grid of units addressed row-major; grid distance is the
/// Chebyshev distance, so a radius-1 neighborhood is 8-connected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridTopology {
    rows: usize,
    cols: usize,
}

impl GridTopology {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "grid must have positive extent, got {rows}x{cols}"
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of units.
    pub fn units(&self) -> usize {
        self.rows * self.cols
    }

    /// `(row, col)` of a linear unit index.
    pub fn coords(&self, unit: usize) -> (usize, usize) {
        (unit / self.cols, unit % self.cols)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Chebyshev distance between two units on the grid.
    pub fn grid_distance(&self, a: usize, b: usize) -> usize {
        let (ar, ac) = self.coords(a);
        let (br, bc) = self.coords(b);
        ar.abs_diff(br).max(ac.abs_diff(bc))
    }

    /// Linear indices of every unit within `radius` of `center`, in
    /// row-major order. Radius 0 is the center alone.
    pub fn neighborhood(&self, center: usize, radius: usize) -> Vec<usize> {
        let (cr, cc) = self.coords(center);
        let r0 = cr.saturating_sub(radius);
        let r1 = (cr + radius).min(self.rows - 1);
        let c0 = cc.saturating_sub(radius);
        let c1 = (cc + radius).min(self.cols - 1);
        let mut out = Vec::with_capacity((r1 - r0 + 1) * (c1 - c0 + 1));
        for r in r0..=r1 {
            for c in c0..=c1 {
                out.push(self.index(r, c));
            }
        }
        out
    }

    /// Default initial neighborhood radius, half the larger grid extent.
    pub fn default_radius(&self) -> usize {
        self.rows.max(self.cols) / 2
    }
}

/// The map's code-vectors. Every vector is fully defined, even when the
/// map was trained on incomplete data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    topology: GridTopology,
    vectors: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn new(topology: GridTopology, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() != topology.units() {
            return Err(Error::InvalidParameter(format!(
                "{} code-vectors for a {}x{} grid",
                vectors.len(),
                topology.rows(),
                topology.cols()
            )));
        }
        let p = vectors.first().map_or(0, Vec::len);
        if p == 0 {
            return Err(Error::InvalidParameter(
                "code-vectors must have positive dimension".into(),
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != p {
                return Err(Error::RowLength {
                    row: i,
                    expected: p,
                    found: v.len(),
                });
            }
        }
        Ok(Self { topology, vectors })
    }

    pub fn topology(&self) -> GridTopology {
        self.topology
    }

    /// Component count of each code-vector.
    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn units(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, unit: usize) -> &[f64] {
        &self.vectors[unit]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub(crate) fn vector_mut(&mut self, unit: usize) -> &mut [f64] {
        &mut self.vectors[unit]
    }
}

/// Learning-rate and neighborhood-radius sequences for online training.
///
/// The learning rate follows a 1/t law, `eps0 * t0 / (t0 + t)` with
/// `t0 = T/10`, starting at `eps0` and strictly decreasing. The radius is
/// an integer staircase from `radius0` down to 0, reaching 0 at
/// `radius_decay * T` so the run ends with a 0-neighbor phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSchedule {
    pub total_iterations: usize,
    pub eps0: f64,
    pub radius0: usize,
    pub radius_decay: f64,
    pub rng_seed: u64,
}

impl TrainingSchedule {
    pub const DEFAULT_EPS0: f64 = 0.5;
    pub const DEFAULT_RADIUS_DECAY: f64 = 0.8;

    pub fn new(
        total_iterations: usize,
        eps0: f64,
        radius0: usize,
        radius_decay: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        if total_iterations == 0 {
            return Err(Error::InvalidParameter(
                "total_iterations must be positive".into(),
            ));
        }
        if !(eps0 > 0.0 && eps0 <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps0 must lie in (0, 1], got {eps0}"
            )));
        }
        if !(0.0..=1.0).contains(&radius_decay) {
            return Err(Error::InvalidParameter(format!(
                "radius_decay must lie in [0, 1], got {radius_decay}"
            )));
        }
        Ok(Self {
            total_iterations,
            eps0,
            radius0,
            radius_decay,
            rng_seed,
        })
    }

    /// Schedule with default learning rate, decay fraction, and the grid's
    /// default initial radius.
    pub fn for_grid(total_iterations: usize, topology: GridTopology, rng_seed: u64) -> Self {
        Self {
            total_iterations,
            eps0: Self::DEFAULT_EPS0,
            radius0: topology.default_radius(),
            radius_decay: Self::DEFAULT_RADIUS_DECAY,
            rng_seed,
        }
    }

    /// Learning rate at step `t`.
    pub fn eps(&self, t: usize) -> f64 {
        let t0 = self.total_iterations as f64 / 10.0;
        self.eps0 * t0 / (t0 + t as f64)
    }

    /// Neighborhood radius at step `t`.
    pub fn radius(&self, t: usize) -> usize {
        if self.radius0 == 0 {
            return 0;
        }
        let cutoff = self.radius_decay * self.total_iterations as f64;
        if (t as f64) >= cutoff {
            return 0;
        }
        (self.radius0 as f64 * (1.0 - t as f64 / cutoff)).ceil() as usize
    }
}

/// How the code-vectors are seeded before training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// Uniform draws within each column's present-value range.
    #[default]
    UniformInRange,
    /// Distinct complete rows sampled from the dataset; errors when the
    /// dataset has fewer complete rows than the map has units.
    SampleCompleteRows,
}

/// The winning unit for one observation and its masked squared distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub unit: usize,
    pub sq_distance: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_distance_is_chebyshev() {
        let g = GridTopology::new(3, 4).unwrap();
        let a = g.index(0, 0);
        let b = g.index(2, 3);
        assert_eq!(g.grid_distance(a, b), 3);
        assert_eq!(g.grid_distance(a, a), 0);
        assert_eq!(g.grid_distance(g.index(1, 1), g.index(2, 2)), 1);
    }

    #[test]
    fn neighborhood_counts() {
        let g = GridTopology::new(3, 3).unwrap();
        let center = g.index(1, 1);
        assert_eq!(g.neighborhood(center, 0), vec![center]);
        assert_eq!(g.neighborhood(center, 1).len(), 9);
        let corner = g.index(0, 0);
        assert_eq!(g.neighborhood(corner, 1).len(), 4);
        assert_eq!(g.neighborhood(corner, 5).len(), 9);
    }

    #[test]
    fn eps_starts_at_eps0_and_decreases() {
        let s = TrainingSchedule::new(1500, 0.5, 3, 0.8, 1).unwrap();
        assert_eq!(s.eps(0), 0.5);
        let mut prev = f64::INFINITY;
        for t in 0..1500 {
            let e = s.eps(t);
            assert!(e > 0.0 && e <= 0.5);
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn radius_staircase_hits_zero_at_decay_fraction() {
        let s = TrainingSchedule::new(1000, 0.5, 3, 0.8, 1).unwrap();
        assert_eq!(s.radius(0), 3);
        let mut prev = usize::MAX;
        for t in 0..1000 {
            let r = s.radius(t);
            assert!(r <= prev);
            prev = r;
        }
        assert_eq!(s.radius(799), 1);
        assert_eq!(s.radius(800), 0);
        assert_eq!(s.radius(999), 0);
    }

    #[test]
    fn zero_radius_everywhere_when_radius0_is_zero() {
        let s = TrainingSchedule::new(100, 0.5, 0, 0.8, 1).unwrap();
        assert!((0..100).all(|t| s.radius(t) == 0));
    }

    #[test]
    fn schedule_validation() {
        assert!(TrainingSchedule::new(0, 0.5, 1, 0.8, 1).is_err());
        assert!(TrainingSchedule::new(10, 0.0, 1, 0.8, 1).is_err());
        assert!(TrainingSchedule::new(10, 1.5, 1, 0.8, 1).is_err());
        assert!(TrainingSchedule::new(10, 0.5, 1, 1.2, 1).is_err());
    }

    #[test]
    fn codebook_shape_checks() {
        let g = GridTopology::new(2, 2).unwrap();
        assert!(Codebook::new(g, vec![vec![0.0]; 3]).is_err());
        assert!(Codebook::new(g, vec![vec![0.0], vec![0.0], vec![0.0], vec![0.0, 1.0]]).is_err());
        let cb = Codebook::new(g, vec![vec![0.0]; 4]).unwrap();
        assert_eq!(cb.units(), 4);
        assert_eq!(cb.dim(), 1);
    }
}
