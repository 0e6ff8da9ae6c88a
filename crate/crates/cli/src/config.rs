//! Run configurations: every subcommand's options parse from flags and,
//! optionally, from a JSON config file (`--config`), with explicit flags
//! taking precedence. The resolved configuration is echoed into every
//! output artifact, and any echoed configuration can be fed back through
//! `--config` to reproduce a run.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use somna::impute::ImputeMode;
use somna::som::InitPolicy;

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "somna",
    version,
    about = "Self-organizing maps for data with missing values"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a map on a CSV file and write a model JSON
    Train(TrainArgs),
    /// Classify rows against a trained model as supplementary observations
    Classify(ClassifyArgs),
    /// Fill missing cells from a trained model
    Impute(ImputeArgs),
    /// Group map units into super-classes by hierarchical clustering
    Superclass(SuperclassArgs),
    /// Mask-and-recover evaluation sweep over m = 1..m_max
    Evaluate(EvaluateArgs),
    /// Render a labeled map figure as SVG and a text grid
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsScopeArg {
    /// Standardization statistics from every row's present values
    All,
    /// Statistics from the training rows only
    Training,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    /// Uniform draws within each column's present-value range
    Range,
    /// Sample distinct complete rows
    CompleteRows,
}

impl From<InitArg> for InitPolicy {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Range => InitPolicy::UniformInRange,
            InitArg::CompleteRows => InitPolicy::SampleCompleteRows,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Hard,
    Weighted,
}

impl From<ModeArg> for ImputeMode {
    fn from(v: ModeArg) -> Self {
        match v {
            ModeArg::Hard => ImputeMode::Hard,
            ModeArg::Weighted => ImputeMode::Weighted,
        }
    }
}

/// Reads a config file, tolerating (and checking) an echoed `command` tag.
fn load_config<T: DeserializeOwned>(path: &Path, command: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config JSON: {e}")))?;
    if let Some(tag) = value.get("command").and_then(|v| v.as_str()) {
        if tag != command {
            return Err(CliError::Config(format!(
                "config file is for `{tag}`, expected `{command}`"
            )));
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

/// Serializes a resolved configuration with its command tag. Key order is
/// sorted, so the echo is deterministic.
pub fn echo_json<T: Serialize>(command: &str, cfg: &T) -> String {
    let mut value = serde_json::to_value(cfg).expect("config serializes");
    value
        .as_object_mut()
        .expect("config is an object")
        .insert("command".into(), command.into());
    serde_json::to_string(&value).expect("config echo serializes")
}

pub(crate) fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Config(format!("missing required option --{flag}")))
}

macro_rules! merge_opt {
    ($self:ident, $file:ident, $($field:ident),+ $(,)?) => {
        $( if $self.$field.is_none() { $self.$field = $file.$field; } )+
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainArgs {
    /// Input CSV file
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output model JSON
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Map rows [default: 7]
    #[arg(long)]
    pub rows: Option<usize>,
    /// Map columns [default: 7]
    #[arg(long)]
    pub cols: Option<usize>,
    /// Training iterations (single-observation steps) [default: 1500]
    #[arg(long)]
    pub iters: Option<usize>,
    /// Initial learning rate in (0, 1] [default: 0.5]
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Initial neighborhood radius [default: max(rows, cols) / 2]
    #[arg(long)]
    pub radius0: Option<usize>,
    /// Fraction of iterations after which the radius reaches 0 [default: 0.8]
    #[arg(long)]
    pub radius_decay: Option<f64>,
    /// RNG seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cell text marking a missing value [default: NA]
    #[arg(long)]
    pub missing_marker: Option<String>,
    /// Treat the first row as data, not a header
    #[arg(long)]
    pub no_header: bool,
    /// Column holding row labels (header name, or 0-based index without a header)
    #[arg(long)]
    pub label_column: Option<String>,
    /// Rows with fewer present components become supplementary-only
    #[arg(long)]
    pub min_present: Option<usize>,
    /// Which rows feed the standardization statistics [default: all]
    #[arg(long, value_enum)]
    pub stats_scope: Option<StatsScopeArg>,
    /// Code-vector initialization [default: range]
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Quantization-error checkpoints in the log [default: 10]
    #[arg(long)]
    pub checkpoints: Option<usize>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl TrainArgs {
    pub fn resolve(mut self) -> Result<ResolvedTrain> {
        if let Some(path) = self.config.take() {
            let file: TrainArgs = load_config(&path, "train")?;
            merge_opt!(
                self, file, input, model, rows, cols, iters, eps0, radius0, radius_decay, seed,
                missing_marker, label_column, min_present, stats_scope, init, checkpoints
            );
            self.no_header = self.no_header || file.no_header;
        }
        let rows = self.rows.unwrap_or(7);
        let cols = self.cols.unwrap_or(7);
        Ok(ResolvedTrain {
            input: require(self.input, "input")?,
            model: require(self.model, "model")?,
            rows,
            cols,
            iters: self.iters.unwrap_or(1500),
            eps0: self.eps0.unwrap_or(0.5),
            radius0: self.radius0.unwrap_or(rows.max(cols) / 2),
            radius_decay: self.radius_decay.unwrap_or(0.8),
            seed: self.seed.unwrap_or(42),
            missing_marker: self.missing_marker.unwrap_or_else(|| "NA".into()),
            no_header: self.no_header,
            label_column: self.label_column,
            min_present: self.min_present,
            stats_scope: self.stats_scope.unwrap_or(StatsScopeArg::All),
            init: self.init.unwrap_or(InitArg::Range),
            checkpoints: self.checkpoints.unwrap_or(10),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedTrain {
    pub input: PathBuf,
    pub model: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub iters: usize,
    pub eps0: f64,
    pub radius0: usize,
    pub radius_decay: f64,
    pub seed: u64,
    pub missing_marker: String,
    pub no_header: bool,
    pub label_column: Option<String>,
    pub min_present: Option<usize>,
    pub stats_scope: StatsScopeArg,
    pub init: InitArg,
    pub checkpoints: usize,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyArgs {
    /// Trained model JSON
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Input CSV file
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output assignment CSV
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Also write membership probabilities (one column per unit)
    #[arg(long, value_name = "PATH")]
    pub probs: Option<PathBuf>,
    /// Cell text marking a missing value [default: model's, else NA]
    #[arg(long)]
    pub missing_marker: Option<String>,
    /// Treat the first row as data, not a header
    #[arg(long)]
    pub no_header: bool,
    /// Column holding row labels
    #[arg(long)]
    pub label_column: Option<String>,
    /// Rows with fewer present components are marked supplementary
    /// [default: model's]
    #[arg(long)]
    pub min_present: Option<usize>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl ClassifyArgs {
    pub fn resolve(mut self) -> Result<ClassifyArgs> {
        if let Some(path) = self.config.take() {
            let file: ClassifyArgs = load_config(&path, "classify")?;
            merge_opt!(self, file, model, input, output, probs, missing_marker, label_column, min_present);
            self.no_header = self.no_header || file.no_header;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputeArgs {
    /// Trained model JSON
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Input CSV file
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output CSV with every missing cell filled
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Per-cell report CSV
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Per-cell report JSON
    #[arg(long, value_name = "PATH")]
    pub report_json: Option<PathBuf>,
    /// Estimator filling the cells [default: hard]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Coverage level for the reported intervals [default: 0.9]
    #[arg(long)]
    pub level: Option<f64>,
    /// Write original units instead of standardized ones
    #[arg(long)]
    pub raw_units: bool,
    /// Cell text marking a missing value [default: model's, else NA]
    #[arg(long)]
    pub missing_marker: Option<String>,
    /// Treat the first row as data, not a header
    #[arg(long)]
    pub no_header: bool,
    /// Column holding row labels
    #[arg(long)]
    pub label_column: Option<String>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl ImputeArgs {
    pub fn resolve(mut self) -> Result<ImputeArgs> {
        if let Some(path) = self.config.take() {
            let file: ImputeArgs = load_config(&path, "impute")?;
            merge_opt!(self, file, model, input, output, report, report_json, mode, level, missing_marker, label_column);
            self.no_header = self.no_header || file.no_header;
            self.raw_units = self.raw_units || file.raw_units;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SuperclassArgs {
    /// Trained model JSON
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Number of super-classes [default: 3]
    #[arg(long)]
    pub k: Option<usize>,
    /// Output CSV (unit_row, unit_col, superclass_id)
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Dendrogram JSON (full merge list)
    #[arg(long, value_name = "PATH")]
    pub dendrogram: Option<PathBuf>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl SuperclassArgs {
    pub fn resolve(mut self) -> Result<SuperclassArgs> {
        if let Some(path) = self.config.take() {
            let file: SuperclassArgs = load_config(&path, "superclass")?;
            merge_opt!(self, file, model, k, output, dendrogram);
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateArgs {
    /// Input CSV file; omit to use the synthetic generator
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Output CSV table
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Raw replicate-level results as JSON
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Map rows [default: 3]
    #[arg(long)]
    pub rows: Option<usize>,
    /// Map columns [default: 3]
    #[arg(long)]
    pub cols: Option<usize>,
    /// Training iterations [default: 1500]
    #[arg(long)]
    pub iters: Option<usize>,
    /// Initial learning rate [default: 0.5]
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Initial neighborhood radius [default: max(rows, cols) / 2]
    #[arg(long)]
    pub radius0: Option<usize>,
    /// Fraction of iterations after which the radius reaches 0 [default: 0.8]
    #[arg(long)]
    pub radius_decay: Option<f64>,
    /// Base RNG seed for replicate derivation [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest per-row suppression count [default: min(8, p - 1)]
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Replicates per m [default: 10]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Estimator for the recovery [default: hard]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Super-classes for the stability score [default: 3]
    #[arg(long)]
    pub k: Option<usize>,
    /// Cell text marking a missing value [default: NA]
    #[arg(long)]
    pub missing_marker: Option<String>,
    /// Treat the first row as data, not a header
    #[arg(long)]
    pub no_header: bool,
    /// Column holding row labels
    #[arg(long)]
    pub label_column: Option<String>,
    /// Synthetic data: rows [default: 200]
    #[arg(long)]
    pub synth_rows: Option<usize>,
    /// Synthetic data: columns [default: 11]
    #[arg(long)]
    pub synth_cols: Option<usize>,
    /// Synthetic data: planted clusters [default: 3]
    #[arg(long)]
    pub synth_clusters: Option<usize>,
    /// Synthetic data: within-cluster spread [default: 1.0]
    #[arg(long)]
    pub synth_spread: Option<f64>,
    /// Synthetic data: cross-column correlation strength [default: 0.9]
    #[arg(long)]
    pub synth_correlation: Option<f64>,
    /// Synthetic data: seed [default: seed]
    #[arg(long)]
    pub synth_seed: Option<u64>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl EvaluateArgs {
    pub fn resolve(mut self) -> Result<EvaluateArgs> {
        if let Some(path) = self.config.take() {
            let file: EvaluateArgs = load_config(&path, "evaluate")?;
            merge_opt!(
                self, file, input, output, json, rows, cols, iters, eps0, radius0, radius_decay,
                seed, m_max, replicates, mode, k, missing_marker, label_column, synth_rows,
                synth_cols, synth_clusters, synth_spread, synth_correlation, synth_seed
            );
            self.no_header = self.no_header || file.no_header;
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderArgs {
    /// Trained model JSON
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Assignment CSV from `classify`
    #[arg(long, value_name = "PATH")]
    pub assignments: Option<PathBuf>,
    /// Super-class CSV from `superclass`, shades cell backgrounds
    #[arg(long, value_name = "PATH")]
    pub superclass: Option<PathBuf>,
    /// Output SVG
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Also write a plain-text grid
    #[arg(long, value_name = "PATH")]
    pub text: Option<PathBuf>,
    /// Labels listed per cell before truncating to "+N more" [default: 4]
    #[arg(long)]
    pub max_labels: Option<usize>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl RenderArgs {
    pub fn resolve(mut self) -> Result<RenderArgs> {
        if let Some(path) = self.config.take() {
            let file: RenderArgs = load_config(&path, "render")?;
            merge_opt!(self, file, model, assignments, superclass, output, text, max_labels);
        }
        Ok(self)
    }
}
