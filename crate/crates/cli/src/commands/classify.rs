use std::fmt::Write as _;

use somna::data::standardize;
use somna::impute::membership;
use somna::som::classify;

use crate::config::{echo_json, require, ClassifyArgs};
use crate::error::Result;

pub fn run(args: ClassifyArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    let model_path = require(cfg.model.clone(), "model")?;
    let model = super::load_model(&model_path)?;

    // flags win, then the model's echoed training options, then defaults
    if cfg.missing_marker.is_none() {
        cfg.missing_marker = super::model_config_str(&model, "missing_marker");
    }
    if cfg.label_column.is_none() {
        cfg.label_column = super::model_config_str(&model, "label_column");
    }
    if !cfg.no_header {
        cfg.no_header = super::model_config_bool(&model, "no_header").unwrap_or(false);
    }
    if cfg.min_present.is_none() {
        cfg.min_present = super::model_config_u64(&model, "min_present").map(|v| v as usize);
    }
    let input = require(cfg.input.clone(), "input")?;
    let output = require(cfg.output.clone(), "output")?;
    let marker = cfg.missing_marker.clone().unwrap_or_else(|| "NA".into());
    cfg.missing_marker = Some(marker.clone());

    let d = super::load_dataset(&input, &marker, !cfg.no_header, cfg.label_column.as_deref())?;
    super::check_dims(&model, &d)?;
    let codebook = model.codebook()?;
    let standardized = standardize(&d, &model.stats)?;

    let assignments = classify(&standardized, &codebook);
    let topology = codebook.topology();

    let mut out = String::new();
    writeln!(out, "# {}", echo_json("classify", &cfg)).unwrap();
    writeln!(
        out,
        "row,label,unit,unit_row,unit_col,sq_distance,present_count,supplementary,status"
    )
    .unwrap();
    let mut failed = 0usize;
    for (row, result) in assignments.iter().enumerate() {
        let obs = standardized.obs(row);
        let label = obs.label().unwrap_or("");
        let supplementary = cfg.min_present.is_some_and(|q| obs.present_count() < q);
        match result {
            Ok(a) => {
                let (r, c) = topology.coords(a.unit);
                writeln!(
                    out,
                    "{row},{label},{},{r},{c},{},{},{},ok",
                    a.unit,
                    a.sq_distance,
                    obs.present_count(),
                    supplementary
                )
                .unwrap();
            }
            Err(_) => {
                failed += 1;
                writeln!(out, "{row},{label},,,,,0,{supplementary},all_missing").unwrap();
            }
        }
    }
    super::write_file(&output, &out)?;
    println!(
        "classified {} rows ({failed} with every component missing) -> {}",
        d.len(),
        output.display()
    );

    if let Some(probs_path) = &cfg.probs {
        let mut out = String::new();
        writeln!(out, "# {}", echo_json("classify", &cfg)).unwrap();
        let header: Vec<String> = (0..codebook.units()).map(|u| format!("u{u}")).collect();
        writeln!(out, "row,{}", header.join(",")).unwrap();
        for row in 0..standardized.len() {
            match membership(standardized.obs(row), &codebook) {
                Ok(profile) => {
                    let cells: Vec<String> =
                        profile.probs().iter().map(|p| format!("{p}")).collect();
                    writeln!(out, "{row},{}", cells.join(",")).unwrap();
                }
                Err(_) => {
                    writeln!(out, "{row},{}", vec![""; codebook.units()].join(",")).unwrap();
                }
            }
        }
        super::write_file(probs_path, &out)?;
        println!("membership profiles -> {}", probs_path.display());
    }
    Ok(())
}
