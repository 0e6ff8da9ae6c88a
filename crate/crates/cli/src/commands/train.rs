use somna::data::{column_stats, standardize};
use somna::som::{train_with_checkpoints, GridTopology, SomModel, TrainingSchedule};

use crate::config::{echo_json, StatsScopeArg, TrainArgs};
use crate::error::{CliError, Result};

pub fn run(args: TrainArgs) -> Result<()> {
    let cfg = args.resolve()?;

    let d = super::load_dataset(
        &cfg.input,
        &cfg.missing_marker,
        !cfg.no_header,
        cfg.label_column.as_deref(),
    )?;

    let (train_rows, supplementary_rows) = match cfg.min_present {
        Some(q) => d.split_min_present(q),
        None => ((0..d.len()).collect(), Vec::new()),
    };
    if train_rows.is_empty() {
        return Err(CliError::Data(somna::Error::EmptyDataset));
    }
    println!(
        "{} rows: {} training, {} supplementary",
        d.len(),
        train_rows.len(),
        supplementary_rows.len()
    );
    if !supplementary_rows.is_empty() {
        println!("supplementary rows (0-based): {supplementary_rows:?}");
    }

    let stats = match cfg.stats_scope {
        StatsScopeArg::All => column_stats(&d)?,
        StatsScopeArg::Training => column_stats(&d.select_rows(&train_rows))?,
    };
    let standardized = standardize(&d, &stats)?;
    let training_set = standardized.select_rows(&train_rows);

    let topology = GridTopology::new(cfg.rows, cfg.cols)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let schedule = TrainingSchedule::new(cfg.iters, cfg.eps0, cfg.radius0, cfg.radius_decay, cfg.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let (codebook, log) =
        train_with_checkpoints(&training_set, topology, &schedule, cfg.init.into(), cfg.checkpoints)?;
    for point in &log {
        println!(
            "iteration {:>6}: quantization error {:.6}",
            point.iteration, point.quantization_error
        );
    }

    let mut model = SomModel::new(
        &codebook,
        d.column_names().to_vec(),
        stats,
        schedule,
        cfg.init.into(),
    );
    model.config = Some(
        serde_json::from_str(&echo_json("train", &cfg)).expect("echo is valid JSON"),
    );
    model.save(&cfg.model)?;
    println!(
        "wrote {} ({} units, {} components)",
        cfg.model.display(),
        codebook.units(),
        codebook.dim()
    );
    Ok(())
}
