use somna::data::standardize;
use somna::impute::impute_dataset;

use crate::config::{echo_json, require, ImputeArgs, ModeArg};
use crate::error::{CliError, Result};

pub fn run(args: ImputeArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    let model_path = require(cfg.model.clone(), "model")?;
    let model = super::load_model(&model_path)?;
    if cfg.missing_marker.is_none() {
        cfg.missing_marker = super::model_config_str(&model, "missing_marker");
    }
    if cfg.label_column.is_none() {
        cfg.label_column = super::model_config_str(&model, "label_column");
    }
    if !cfg.no_header {
        cfg.no_header = super::model_config_bool(&model, "no_header").unwrap_or(false);
    }
    let input = require(cfg.input.clone(), "input")?;
    let output = require(cfg.output.clone(), "output")?;
    let mode = cfg.mode.unwrap_or(ModeArg::Hard);
    let level = cfg.level.unwrap_or(0.9);
    let marker = cfg.missing_marker.clone().unwrap_or_else(|| "NA".into());
    cfg.mode = Some(mode);
    cfg.level = Some(level);
    cfg.missing_marker = Some(marker.clone());

    let d = super::load_dataset(&input, &marker, !cfg.no_header, cfg.label_column.as_deref())?;
    super::check_dims(&model, &d)?;
    let codebook = model.codebook()?;
    let standardized = standardize(&d, &model.stats)?;

    let (completed_std, report_std) = impute_dataset(&standardized, &codebook, mode.into(), level)?;
    // with --raw-units, present cells come through bit-identical from the
    // input; only the filled holes carry computed values
    let (completed, report) = if cfg.raw_units {
        let report = report_std.destandardized(&model.stats)?;
        let mut completed = d.clone();
        for entry in &report.entries {
            completed.set_cell(entry.row, entry.column, Some(entry.estimate));
        }
        (completed, report)
    } else {
        (completed_std, report_std)
    };

    // the completed CSV stays ingestible: the echo rides in a comment line
    let echo = echo_json("impute", &cfg);
    let mut buf = Vec::new();
    somna::data::write_csv_with_comment(&completed, &mut buf, &marker, &echo)
        .map_err(CliError::Data)?;
    std::fs::write(&output, buf).map_err(|e| CliError::Data(e.into()))?;
    println!(
        "filled {} cells in {} rows ({} rows fully missing) -> {}",
        report.entries.len(),
        d.len(),
        report.all_missing_rows.len(),
        output.display()
    );

    if let Some(path) = &cfg.report {
        let mut text = format!("# {echo}\n");
        text.push_str(&report.to_csv_string());
        super::write_file(path, &text)?;
        println!("report -> {}", path.display());
    }
    if let Some(path) = &cfg.report_json {
        let mut value = serde_json::to_value(&report).map_err(somna::Error::from)?;
        value
            .as_object_mut()
            .expect("report is an object")
            .insert("config".into(), serde_json::from_str(&echo).expect("echo is JSON"));
        let mut text = serde_json::to_string_pretty(&value).map_err(somna::Error::from)?;
        text.push('\n');
        super::write_file(path, &text)?;
        println!("report json -> {}", path.display());
    }
    Ok(())
}
