use std::path::Path;

use crate::config::{echo_json, require, RenderArgs};
use crate::error::{CliError, Result};
use crate::render::{render_svg, render_text, CellLabel, MapCell};

/// Reads our own CSV outputs: skips the comment echo, maps columns by the
/// header.
fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(somna::Error::from)?;
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(somna::Error::from)?,
        None => return Err(CliError::Data(somna::Error::EmptyDataset)),
    };
    let names: Vec<String> = header.iter().map(str::to_string).collect();
    let rows = records
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(somna::Error::from)?;
    Ok((names, rows))
}

fn column(names: &[String], want: &str, path: &Path) -> Result<usize> {
    names.iter().position(|n| n == want).ok_or_else(|| {
        CliError::Mismatch(format!("{} has no `{want}` column", path.display()))
    })
}

pub fn run(args: RenderArgs) -> Result<()> {
    let mut cfg = args.resolve()?;
    let model_path = require(cfg.model.clone(), "model")?;
    let assignments_path = require(cfg.assignments.clone(), "assignments")?;
    let output = require(cfg.output.clone(), "output")?;
    let max_labels = cfg.max_labels.unwrap_or(4);
    cfg.max_labels = Some(max_labels);

    let model = super::load_model(&model_path)?;
    let units = model.rows * model.cols;
    let mut cells: Vec<MapCell> = vec![MapCell::default(); units];

    let (names, rows) = read_rows(&assignments_path)?;
    let row_col = column(&names, "row", &assignments_path)?;
    let label_col = column(&names, "label", &assignments_path)?;
    let unit_col = column(&names, "unit", &assignments_path)?;
    let sup_col = column(&names, "supplementary", &assignments_path)?;
    for record in &rows {
        let unit_text = record.get(unit_col).unwrap_or("");
        if unit_text.is_empty() {
            continue; // all-missing rows have no cell
        }
        let unit: usize = unit_text.parse().map_err(|_| {
            CliError::Mismatch(format!("assignment unit {unit_text:?} is not an index"))
        })?;
        if unit >= units {
            return Err(CliError::Mismatch(format!(
                "assignment unit {unit} outside a {}x{} map",
                model.rows, model.cols
            )));
        }
        let label = record.get(label_col).unwrap_or("");
        let text = if label.is_empty() {
            format!("#{}", record.get(row_col).unwrap_or("?"))
        } else {
            label.to_string()
        };
        let supplementary = record.get(sup_col).unwrap_or("false") == "true";
        cells[unit].labels.push(CellLabel {
            text,
            supplementary,
        });
    }

    let superclass: Option<Vec<usize>> = match &cfg.superclass {
        Some(path) => {
            let (names, rows) = read_rows(path)?;
            let r_col = column(&names, "unit_row", path)?;
            let c_col = column(&names, "unit_col", path)?;
            let id_col = column(&names, "superclass_id", path)?;
            if rows.len() != units {
                return Err(CliError::Mismatch(format!(
                    "super-class file covers {} units, model has {units}",
                    rows.len()
                )));
            }
            let mut ids = vec![0usize; units];
            for record in &rows {
                let parse = |i: usize| -> Result<usize> {
                    record
                        .get(i)
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| CliError::Mismatch("bad super-class row".into()))
                };
                let unit = parse(r_col)? * model.cols + parse(c_col)?;
                ids[unit] = parse(id_col)?;
            }
            Some(ids)
        }
        None => None,
    };

    let echo = echo_json("render", &cfg);
    let svg = render_svg(
        model.rows,
        model.cols,
        &cells,
        superclass.as_deref(),
        max_labels,
        &echo,
    );
    super::write_file(&output, &svg)?;
    println!("wrote {}", output.display());

    if let Some(path) = &cfg.text {
        let text = render_text(
            model.rows,
            model.cols,
            &cells,
            superclass.as_deref(),
            max_labels,
            &echo,
        );
        super::write_file(path, &text)?;
        println!("text grid -> {}", path.display());
    }
    Ok(())
}
