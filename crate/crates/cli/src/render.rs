//! Static map figures: an SVG grid with one cell per unit listing the
//! labels classified there, and a plain-text grid for terminals.
//! Supplementary observations are styled distinctly; super-classes shade
//! the cell backgrounds. Output is deterministic byte for byte.

use std::fmt::Write as _;

/// One observation's entry in a cell.
#[derive(Debug, Clone)]
pub struct CellLabel {
    pub text: String,
    pub supplementary: bool,
}

/// Contents of one map unit's cell.
#[derive(Debug, Clone, Default)]
pub struct MapCell {
    pub labels: Vec<CellLabel>,
}

const PALETTE: [&str; 12] = [
    "#cfe8f3", "#fde5c0", "#d3ecd3", "#f3d1e0", "#e5dcf3", "#f3f0c0",
    "#c0ecec", "#f3d8c0", "#d8e2f3", "#e8f3c9", "#f3c9c9", "#d9d9d9",
];

const CELL_W: usize = 130;
const LINE_H: usize = 14;
const MARGIN: usize = 10;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Lines shown in a cell: up to `max_labels` labels, then a "+N more" tail.
fn visible(cell: &MapCell, max_labels: usize) -> (&[CellLabel], usize) {
    if cell.labels.len() <= max_labels {
        (&cell.labels, 0)
    } else {
        (&cell.labels[..max_labels], cell.labels.len() - max_labels)
    }
}

/// Renders the full grid as SVG. `superclass`, when given, maps each unit
/// to a super-class id used for the background shade. `comment` is embedded
/// as an XML comment for reproducibility.
pub fn render_svg(
    rows: usize,
    cols: usize,
    cells: &[MapCell],
    superclass: Option<&[usize]>,
    max_labels: usize,
    comment: &str,
) -> String {
    let cell_h = LINE_H * (max_labels + 1) + 22;
    let width = MARGIN * 2 + CELL_W * cols;
    let height = MARGIN * 2 + cell_h * rows;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    writeln!(svg, "<!-- {} -->", escape(comment)).unwrap();
    svg.push_str(
        "<style>\n\
         .cell { fill: #ffffff; stroke: #444444; stroke-width: 1; }\n\
         .label { font: 11px sans-serif; fill: #111111; }\n\
         .supplementary { font-style: italic; text-decoration: underline; fill: #333333; }\n\
         .more { font: italic 10px sans-serif; fill: #777777; }\n\
         .coord { font: 9px sans-serif; fill: #999999; }\n\
         </style>\n",
    );

    for r in 0..rows {
        for c in 0..cols {
            let unit = r * cols + c;
            let x = MARGIN + c * CELL_W;
            let y = MARGIN + r * cell_h;
            let shade = superclass
                .map(|sc| PALETTE[sc[unit] % PALETTE.len()])
                .unwrap_or("#ffffff");
            writeln!(
                svg,
                "<rect class=\"cell\" x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{cell_h}\" style=\"fill:{shade}\"/>"
            )
            .unwrap();
            writeln!(
                svg,
                "<text class=\"coord\" x=\"{}\" y=\"{}\">({r},{c})</text>",
                x + 3,
                y + 10
            )
            .unwrap();
            let (shown, hidden) = visible(&cells[unit], max_labels);
            for (i, label) in shown.iter().enumerate() {
                let class = if label.supplementary {
                    "label supplementary"
                } else {
                    "label"
                };
                writeln!(
                    svg,
                    "<text class=\"{class}\" x=\"{}\" y=\"{}\">{}</text>",
                    x + 5,
                    y + 22 + i * LINE_H,
                    escape(&label.text)
                )
                .unwrap();
            }
            if hidden > 0 {
                writeln!(
                    svg,
                    "<text class=\"more\" x=\"{}\" y=\"{}\">+{hidden} more</text>",
                    x + 5,
                    y + 22 + shown.len() * LINE_H,
                )
                .unwrap();
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders the grid as fixed-width text. Supplementary labels are wrapped
/// in underscores, super-class ids prefix each cell when given.
pub fn render_text(
    rows: usize,
    cols: usize,
    cells: &[MapCell],
    superclass: Option<&[usize]>,
    max_labels: usize,
    comment: &str,
) -> String {
    let mut rendered: Vec<Vec<String>> = Vec::with_capacity(cells.len());
    for (unit, cell) in cells.iter().enumerate() {
        let mut lines = Vec::new();
        if let Some(sc) = superclass {
            lines.push(format!("[S{}]", sc[unit]));
        }
        let (shown, hidden) = visible(cell, max_labels);
        for label in shown {
            lines.push(if label.supplementary {
                format!("_{}_", label.text)
            } else {
                label.text.clone()
            });
        }
        if hidden > 0 {
            lines.push(format!("+{hidden} more"));
        }
        rendered.push(lines);
    }

    let cell_w = rendered
        .iter()
        .flatten()
        .map(String::len)
        .max()
        .unwrap_or(1)
        .max(4);
    let cell_lines = rendered.iter().map(Vec::len).max().unwrap_or(1).max(1);

    let mut out = format!("# {comment}\n");
    let hline = format!("+{}", format!("{}+", "-".repeat(cell_w + 2)).repeat(cols));
    for r in 0..rows {
        out.push_str(&hline);
        out.push('\n');
        for line in 0..cell_lines {
            out.push('|');
            for c in 0..cols {
                let unit = r * cols + c;
                let text = rendered[unit].get(line).map(String::as_str).unwrap_or("");
                write!(out, " {text:<cell_w$} |").unwrap();
            }
            out.push('\n');
        }
    }
    out.push_str(&hline);
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(names: &[(&str, bool)]) -> MapCell {
        MapCell {
            labels: names
                .iter()
                .map(|(t, s)| CellLabel {
                    text: t.to_string(),
                    supplementary: *s,
                })
                .collect(),
        }
    }

    #[test]
    fn svg_has_one_rect_per_unit_and_keeps_empty_cells() {
        let cells = vec![cell(&[("FR", false)]), MapCell::default(), cell(&[]), cell(&[("X", true)])];
        let svg = render_svg(2, 2, &cells, None, 4, "cfg");
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains(">FR</text>"));
        assert!(svg.contains("label supplementary"));
        assert!(svg.contains("<!-- cfg -->"));
    }

    #[test]
    fn truncation_adds_a_more_line() {
        let cells = vec![cell(&[("a", false), ("b", false), ("c", false)])];
        let svg = render_svg(1, 1, &cells, None, 2, "cfg");
        assert!(svg.contains("+1 more"));
        let text = render_text(1, 1, &cells, None, 2, "cfg");
        assert!(text.contains("+1 more"));
    }

    #[test]
    fn superclass_shades_and_text_tags() {
        let cells = vec![MapCell::default(), MapCell::default()];
        let sc = vec![0usize, 1];
        let svg = render_svg(1, 2, &cells, Some(&sc), 4, "cfg");
        assert!(svg.contains(PALETTE[0]));
        assert!(svg.contains(PALETTE[1]));
        let text = render_text(1, 2, &cells, Some(&sc), 4, "cfg");
        assert!(text.contains("[S0]") && text.contains("[S1]"));
    }

    #[test]
    fn labels_are_escaped() {
        let cells = vec![cell(&[("a<b>&\"c\"", false)])];
        let svg = render_svg(1, 1, &cells, None, 4, "cfg");
        assert!(svg.contains("a&lt;b&gt;&amp;&quot;c&quot;"));
    }
}
