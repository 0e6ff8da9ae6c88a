//! Trained-map persistence: codebook, column statistics, and the schedule
//! that produced it, as one JSON document.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::ColumnStats;
use crate::error::{Error, Result};

use super::{Codebook, GridTopology, InitPolicy, TrainingSchedule};

/// A trained map plus everything needed to apply it to new data: the
/// standardization statistics and an echo of the training configuration.
/// Serialization is deterministic, and numeric values reload bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SomModel {
    pub rows: usize,
    pub cols: usize,
    pub p: usize,
    pub column_names: Vec<String>,
    pub stats: ColumnStats,
    pub vectors: Vec<Vec<f64>>,
    pub schedule: TrainingSchedule,
    pub seed: u64,
    pub init: InitPolicy,
    /// Front-end run configuration, carried verbatim for reproducibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

impl SomModel {
    pub fn new(
        codebook: &Codebook,
        column_names: Vec<String>,
        stats: ColumnStats,
        schedule: TrainingSchedule,
        init: InitPolicy,
    ) -> Self {
        let topology = codebook.topology();
        Self {
            rows: topology.rows(),
            cols: topology.cols(),
            p: codebook.dim(),
            column_names,
            stats,
            vectors: codebook.vectors().to_vec(),
            seed: schedule.rng_seed,
            schedule,
            init,
            config: None,
        }
    }

    pub fn codebook(&self) -> Result<Codebook> {
        let topology = GridTopology::new(self.rows, self.cols)?;
        let cb = Codebook::new(topology, self.vectors.clone())?;
        if cb.dim() != self.p {
            return Err(Error::ModelMismatch(format!(
                "model declares p={} but vectors have {} components",
                self.p,
                cb.dim()
            )));
        }
        Ok(cb)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnStat, Dataset, MaskedObservation};
    use crate::som::{train, InitPolicy};

    fn toy_model(seed: u64) -> SomModel {
        let rows: Vec<MaskedObservation> = (0..12)
            .map(|i| {
                let v = i as f64 * 0.37 - 2.0;
                MaskedObservation::complete(vec![v, v * v * 0.1], None)
            })
            .collect();
        let d = Dataset::new(rows, vec!["a".into(), "b".into()]).unwrap();
        let topo = GridTopology::new(2, 2).unwrap();
        let schedule = TrainingSchedule::new(150, 0.5, 1, 0.8, seed).unwrap();
        let cb = train(&d, topo, &schedule, InitPolicy::UniformInRange).unwrap();
        let stats = ColumnStats::new(vec![
            ColumnStat {
                column: "a".into(),
                mean: 0.0,
                std: 1.0,
                present_count: 12,
            },
            ColumnStat {
                column: "b".into(),
                mean: 0.0,
                std: 1.0,
                present_count: 12,
            },
        ]);
        SomModel::new(&cb, vec!["a".into(), "b".into()], stats, schedule, InitPolicy::UniformInRange)
    }

    #[test]
    fn json_round_trip_is_exact() {
        let m = toy_model(7);
        let text = m.to_json().unwrap();
        let back = SomModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.vectors, m.vectors);
    }

    #[test]
    fn same_seed_serializes_byte_identically() {
        let a = toy_model(42).to_json().unwrap();
        let b = toy_model(42).to_json().unwrap();
        assert_eq!(a, b);
        let c = toy_model(43).to_json().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn file_round_trip() {
        let m = toy_model(3);
        let f = tempfile::NamedTempFile::new().unwrap();
        m.save(f.path()).unwrap();
        let back = SomModel::load(f.path()).unwrap();
        assert_eq!(back, m);
        let cb = back.codebook().unwrap();
        assert_eq!(cb.vectors(), m.vectors.as_slice());
    }
}
