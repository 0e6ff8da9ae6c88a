use somna::evaluation::{generate_synthetic, run_sweep, SyntheticSpec};
use somna::som::{GridTopology, TrainingSchedule};

use crate::config::{echo_json, EvaluateArgs, ModeArg};
use crate::error::{CliError, Result};

pub fn run(args: EvaluateArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    let output = crate::config::require(cfg.output.clone(), "output")?;
    let seed = cfg.seed.unwrap_or(42);
    cfg.seed = Some(seed);

    let d = match &cfg.input {
        Some(path) => super::load_dataset(
            path,
            cfg.missing_marker.as_deref().unwrap_or("NA"),
            !cfg.no_header,
            cfg.label_column.as_deref(),
        )?,
        None => {
            let spec = SyntheticSpec {
                rows: cfg.synth_rows.unwrap_or(200),
                cols: cfg.synth_cols.unwrap_or(11),
                clusters: cfg.synth_clusters.unwrap_or(3),
                spread: cfg.synth_spread.unwrap_or(1.0),
                correlation: cfg.synth_correlation.unwrap_or(0.9),
                seed: cfg.synth_seed.unwrap_or(seed),
            };
            cfg.synth_rows = Some(spec.rows);
            cfg.synth_cols = Some(spec.cols);
            cfg.synth_clusters = Some(spec.clusters);
            cfg.synth_spread = Some(spec.spread);
            cfg.synth_correlation = Some(spec.correlation);
            cfg.synth_seed = Some(spec.seed);
            generate_synthetic(&spec).map_err(|e| CliError::Config(e.to_string()))?
        }
    };

    let m_max = cfg.m_max.unwrap_or_else(|| 8.min(d.dim().saturating_sub(1)));
    if m_max == 0 || m_max >= d.dim() {
        return Err(CliError::Config(format!(
            "m_max must lie in 1..{} for {}-column data, got {m_max}",
            d.dim(),
            d.dim()
        )));
    }
    let replicates = cfg.replicates.unwrap_or(10);
    let k = cfg.k.unwrap_or(3);
    let mode = cfg.mode.unwrap_or(ModeArg::Hard);
    let rows = cfg.rows.unwrap_or(3);
    let cols = cfg.cols.unwrap_or(3);
    let iters = cfg.iters.unwrap_or(1500);
    let eps0 = cfg.eps0.unwrap_or(0.5);
    let radius0 = cfg.radius0.unwrap_or(rows.max(cols) / 2);
    let radius_decay = cfg.radius_decay.unwrap_or(0.8);
    cfg.m_max = Some(m_max);
    cfg.replicates = Some(replicates);
    cfg.k = Some(k);
    cfg.mode = Some(mode);
    cfg.rows = Some(rows);
    cfg.cols = Some(cols);
    cfg.iters = Some(iters);
    cfg.eps0 = Some(eps0);
    cfg.radius0 = Some(radius0);
    cfg.radius_decay = Some(radius_decay);

    let topology = GridTopology::new(rows, cols).map_err(|e| CliError::Config(e.to_string()))?;
    let schedule = TrainingSchedule::new(iters, eps0, radius0, radius_decay, seed)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let report = run_sweep(&d, topology, &schedule, k, mode.into(), m_max, replicates)?;

    let echo = echo_json("evaluate", &cfg);
    let mut text = format!("# {echo}\n");
    text.push_str(&report.to_csv_string());
    super::write_file(&output, &text)?;
    for row in &report.rows {
        println!(
            "m={} ({:>2}% missing): mqe {:.4} (baseline {:.4}), stability {:.3}",
            row.m, row.percent_missing, row.mqe, row.baseline_mqe, row.stability
        );
    }
    println!("wrote {}", output.display());

    if let Some(path) = &cfg.json {
        let mut value = serde_json::to_value(&report).map_err(somna::Error::from)?;
        value
            .as_object_mut()
            .expect("report is an object")
            .insert("config".into(), serde_json::from_str(&echo).expect("echo is JSON"));
        let mut text = serde_json::to_string_pretty(&value).map_err(somna::Error::from)?;
        text.push('\n');
        super::write_file(path, &text)?;
        println!("raw results -> {}", path.display());
    }
    Ok(())
}
