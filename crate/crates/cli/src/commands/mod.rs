//! Subcommand implementations. Each command is a thin shell over the
//! library: it resolves its configuration, loads inputs, calls the library,
//! and writes artifacts with the configuration echoed into them.

mod classify;
mod evaluate;
mod impute;
mod render;
mod superclass;
mod train;

pub use classify::run as classify;
pub use evaluate::run as evaluate;
pub use impute::run as impute;
pub use render::run as render;
pub use superclass::run as superclass;
pub use train::run as train;

use std::path::Path;

use somna::data::{load_csv, CsvOptions, Dataset};
use somna::som::SomModel;

use crate::error::{CliError, Result};

pub(crate) fn load_dataset(
    path: &Path,
    missing_marker: &str,
    has_header: bool,
    label_column: Option<&str>,
) -> Result<Dataset> {
    let options = CsvOptions {
        missing_marker: missing_marker.to_string(),
        has_header,
        label_column: label_column.map(str::to_string),
    };
    Ok(load_csv(path, &options)?)
}

pub(crate) fn load_model(path: &Path) -> Result<SomModel> {
    Ok(SomModel::load(path)?)
}

/// The data file must match the model's dimension; anything else is a
/// model/data mismatch, not a data error.
pub(crate) fn check_dims(model: &SomModel, d: &Dataset) -> Result<()> {
    if d.dim() != model.p {
        return Err(CliError::Mismatch(format!(
            "model expects {} columns, data has {}",
            model.p,
            d.dim()
        )));
    }
    Ok(())
}

/// Pulls a string field out of a model's echoed training config.
pub(crate) fn model_config_str(model: &SomModel, key: &str) -> Option<String> {
    model
        .config
        .as_ref()
        .and_then(|c| c.get(key))
        .and_then(|v| v.as_str())
        .map(str::to_string)
}

pub(crate) fn model_config_u64(model: &SomModel, key: &str) -> Option<u64> {
    model
        .config
        .as_ref()
        .and_then(|c| c.get(key))
        .and_then(|v| v.as_u64())
}

pub(crate) fn model_config_bool(model: &SomModel, key: &str) -> Option<bool> {
    model
        .config
        .as_ref()
        .and_then(|c| c.get(key))
        .and_then(|v| v.as_bool())
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Data(e.into()))
}
