//! CSV ingestion and emission. Cells equal to the missing marker, and empty
//! cells, are read as missing components.

use std::path::Path;

use crate::error::{Error, Result};

use super::{Dataset, MaskedObservation};

/// Parsing options for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Cell text marking a missing value. Empty cells are always missing.
    pub missing_marker: String,
    /// Whether the first row carries column names.
    pub has_header: bool,
    /// Column holding row labels rather than data: a header name, or a
    /// 0-based index when there is no header.
    pub label_column: Option<String>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            missing_marker: "NA".to_string(),
            has_header: true,
            label_column: None,
        }
    }
}

/// Reads a dataset from a comma-separated UTF-8 file. Lines starting with
/// `#` are skipped, so files emitted with an embedded config echo re-ingest
/// cleanly. Row order is preserved.
pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path.as_ref())?;

    let mut records = reader.records();
    let mut field_count: Option<usize> = None;
    let mut column_names: Vec<String> = Vec::new();
    let mut label_index: Option<usize> = None;
    let mut label_name: Option<String> = None;

    if options.has_header {
        let header = match records.next() {
            Some(r) => r?,
            None => return Err(Error::EmptyDataset),
        };
        let names: Vec<String> = header.iter().map(str::to_string).collect();
        field_count = Some(names.len());
        if let Some(wanted) = &options.label_column {
            let idx = names
                .iter()
                .position(|n| n == wanted)
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("label column {wanted:?} not in header"))
                })?;
            label_index = Some(idx);
            label_name = Some(names[idx].clone());
        }
        column_names = names
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != label_index)
            .map(|(_, n)| n.clone())
            .collect();
    } else if let Some(wanted) = &options.label_column {
        let idx: usize = wanted.parse().map_err(|_| {
            Error::InvalidParameter(format!(
                "without a header, label column must be a 0-based index, got {wanted:?}"
            ))
        })?;
        label_index = Some(idx);
    }

    let mut observations = Vec::new();
    let mut row = 0usize;
    for record in records {
        let record = record?;
        let found = record.len();
        let expected = *field_count.get_or_insert(found);
        if found != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found,
            });
        }
        if !options.has_header && label_index.is_some_and(|i| i >= found) {
            return Err(Error::InvalidParameter(format!(
                "label column index {} out of range for {} fields",
                label_index.unwrap(),
                found
            )));
        }

        let mut cells = Vec::with_capacity(found.saturating_sub(label_index.is_some() as usize));
        let mut label = None;
        for (i, field) in record.iter().enumerate() {
            if Some(i) == label_index {
                label = Some(field.to_string());
                continue;
            }
            let text = field.trim();
            if text.is_empty() || text == options.missing_marker {
                cells.push(None);
            } else {
                let value: f64 = text.parse().map_err(|_| Error::BadNumericCell {
                    row,
                    column: data_column(i, label_index),
                    value: field.to_string(),
                })?;
                cells.push(Some(value));
            }
        }
        observations.push(MaskedObservation::new(cells, label));
        row += 1;
    }

    if observations.is_empty() {
        return Err(Error::EmptyDataset);
    }

    if column_names.is_empty() {
        let p = observations[0].len();
        column_names = (0..p).map(|k| format!("v{}", k + 1)).collect();
    }

    let dataset = Dataset::new(observations, column_names)?.with_label_name(label_name);
    Ok(dataset)
}

/// Column index within the data vector, skipping the label column.
fn data_column(field_index: usize, label_index: Option<usize>) -> usize {
    match label_index {
        Some(l) if field_index > l => field_index - 1,
        _ => field_index,
    }
}

/// Writes a dataset back to CSV. Missing cells become `missing_marker`; the
/// label column, when present, is emitted first. Values are printed with the
/// shortest representation that round-trips, so a canonical file survives a
/// load/save cycle byte for byte.
pub fn save_csv(d: &Dataset, path: impl AsRef<Path>, missing_marker: &str) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    write_csv(d, &mut writer, missing_marker, true)?;
    writer.flush()?;
    Ok(())
}

/// [`save_csv`] into an arbitrary writer, preceded by one `#` comment line
/// (typically a config echo). Files written this way re-ingest through
/// [`load_csv`], which skips comment lines.
pub fn write_csv_with_comment<W: std::io::Write>(
    d: &Dataset,
    mut out: W,
    missing_marker: &str,
    comment: &str,
) -> Result<()> {
    writeln!(out, "# {comment}")?;
    let mut writer = csv::Writer::from_writer(out);
    write_csv(d, &mut writer, missing_marker, true)?;
    writer.flush()?;
    Ok(())
}

pub(crate) fn write_csv<W: std::io::Write>(
    d: &Dataset,
    writer: &mut csv::Writer<W>,
    missing_marker: &str,
    header: bool,
) -> Result<()> {
    let has_labels = d.observations().iter().any(|o| o.label().is_some());
    if header {
        let mut names: Vec<&str> = Vec::with_capacity(d.dim() + 1);
        if has_labels {
            names.push(d.label_name().unwrap_or("label"));
        }
        names.extend(d.column_names().iter().map(String::as_str));
        writer.write_record(&names)?;
    }
    for obs in d.observations() {
        let mut fields: Vec<String> = Vec::with_capacity(d.dim() + 1);
        if has_labels {
            fields.push(obs.label().unwrap_or("").to_string());
        }
        for cell in obs.cells() {
            fields.push(match cell {
                Some(v) => format!("{v}"),
                None => missing_marker.to_string(),
            });
        }
        writer.write_record(&fields)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_marker_and_empty_cells_as_missing() {
        let f = write_temp("country,a,b,c\nFR,1.2,NA,3\nX,,5,6\n");
        let d = load_csv(
            f.path(),
            &CsvOptions {
                label_column: Some("country".into()),
                ..CsvOptions::default()
            },
        )
        .unwrap();
        assert_eq!(d.dim(), 3);
        assert_eq!(d.len(), 2);
        assert_eq!(d.obs(0).label(), Some("FR"));
        assert_eq!(d.obs(0).get(0), Some(1.2));
        assert!(d.obs(0).get(1).is_none());
        assert_eq!(d.obs(0).get(2), Some(3.0));
        assert_eq!(d.obs(1).missing_indices().collect::<Vec<_>>(), vec![0]);
        assert_eq!(d.obs(1).get(1), Some(5.0));
    }

    #[test]
    fn reports_bad_cell_with_row_and_column() {
        let f = write_temp("label,a,b\nY,abc,1\n");
        let err = load_csv(
            f.path(),
            &CsvOptions {
                label_column: Some("label".into()),
                ..CsvOptions::default()
            },
        )
        .unwrap_err();
        match err {
            Error::BadNumericCell { row, column, value } => {
                assert_eq!((row, column), (0, 0));
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn rejects_ragged_rows_and_empty_files() {
        let f = write_temp("a,b\n1,2\n3\n");
        assert!(matches!(
            load_csv(f.path(), &CsvOptions::default()),
            Err(Error::RaggedRow { row: 1, expected: 2, found: 1 })
        ));
        let f = write_temp("a,b\n");
        assert!(matches!(
            load_csv(f.path(), &CsvOptions::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn no_header_gets_synthetic_names() {
        let f = write_temp("1,2\n3,NA\n");
        let d = load_csv(
            f.path(),
            &CsvOptions {
                has_header: false,
                ..CsvOptions::default()
            },
        )
        .unwrap();
        assert_eq!(d.column_names(), &["v1".to_string(), "v2".to_string()]);
        assert_eq!(d.len(), 2);
        assert!(d.obs(1).get(1).is_none());
    }

    #[test]
    fn canonical_file_round_trips_byte_identically() {
        let text = "town,a,b,c\nParis,1.25,NA,3\nLyon,NA,-0.5,NA\n";
        let f = write_temp(text);
        let d = load_csv(
            f.path(),
            &CsvOptions {
                label_column: Some("town".into()),
                ..CsvOptions::default()
            },
        )
        .unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_csv(&d, out.path(), "NA").unwrap();
        let written = std::fs::read_to_string(out.path()).unwrap();
        assert_eq!(written, text);
    }

    #[test]
    fn comment_lines_are_skipped() {
        let f = write_temp("# config echo\na,b\n1,2\n");
        let d = load_csv(f.path(), &CsvOptions::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.obs(0).get(1), Some(2.0));
    }
}
