//! Minimal static SVG line charts for report tables — enough to glance at a
//! layer curve or a width sweep without pulling in a plotting stack.

use bullwhip::experiments::Table;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 52.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

/// Column names that behave like sweep axes; the rightmost one present in a
/// table becomes its x axis.
const AXIS_NAMES: [&str; 6] = [
    "layer",
    "width",
    "omega",
    "frequency",
    "lead_time",
    "pattern",
];

/// Columns that carry bookkeeping counts rather than curve values.
const COUNT_NAMES: [&str; 4] = ["replications", "pairs", "reps", "count"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn tick_label(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs();
    if (1e-3..1e5).contains(&magnitude) {
        format!("{x:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{x:.2e}")
    }
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn render(title: &str, x_label: &str, series: &[Series]) -> Option<String> {
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    if finite.len() < 2 {
        return None;
    }
    let (mut x0, mut x1) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    let (mut y0, mut y1) = finite
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    if x1 - x0 < 1e-12 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 1.0;
        y1 += 1.0;
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let sy = |y: f64| HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" fill=\"#222\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"#ddd\"/>\n",
            TOP,
            HEIGHT - BOTTOM
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.1}\" x2=\"{}\" y2=\"{py:.1}\" stroke=\"#ddd\"/>\n",
            LEFT,
            WIDTH - RIGHT
        ));
        out.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            HEIGHT - BOTTOM + 16.0,
            tick_label(fx)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            LEFT - 6.0,
            py + 4.0,
            tick_label(fy)
        ));
    }
    out.push_str(&format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>\n",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222\">{}</text>\n",
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    ));

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .copied()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
            path.join(" ")
        ));
        if pts.len() <= 48 {
            for &(x, y) in &pts {
                out.push_str(&format!(
                    "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.4\" fill=\"{color}\"/>\n",
                    sx(x),
                    sy(y)
                ));
            }
        }
        let ly = TOP + 8.0 + 16.0 * k as f64;
        let lx = WIDTH - RIGHT - 170.0;
        out.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2.5\"/>\n",
            lx + 18.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#222\">{}</text>\n",
            lx + 24.0,
            ly + 4.0,
            escape(&s.name)
        ));
    }
    out.push_str("</svg>\n");
    Some(out)
}

/// Renders a table as a line chart when it has a recognizable shape: an
/// axis-like numeric x column, key columns to its left forming series
/// groups, and numeric value columns to its right. Returns `None` for
/// tables that would not plot meaningfully.
pub fn table_chart(title: &str, table: &Table) -> Option<String> {
    if table.rows.len() < 2 {
        return None;
    }
    let n_cols = table.columns.len();
    let parsed: Vec<Vec<Option<f64>>> = table
        .rows
        .iter()
        .map(|row| row.iter().map(|cell| cell.parse::<f64>().ok()).collect())
        .collect();
    let numeric: Vec<bool> = (0..n_cols)
        .map(|c| {
            parsed
                .iter()
                .all(|row| row.get(c).copied().flatten().is_some())
        })
        .collect();

    let x_idx = AXIS_NAMES
        .iter()
        .filter_map(|&name| table.columns.iter().position(|c| c == name))
        .filter(|&c| numeric[c])
        .max()
        .or_else(|| numeric.iter().position(|&b| b))?;

    let value_cols: Vec<usize> = (x_idx + 1..n_cols)
        .filter(|&c| numeric[c] && !COUNT_NAMES.contains(&table.columns[c].as_str()))
        .collect();
    if value_cols.is_empty() {
        return None;
    }
    let key_cols: Vec<usize> = (0..x_idx).collect();

    let mut group_names: Vec<String> = Vec::new();
    let mut row_group: Vec<usize> = Vec::new();
    for row in &table.rows {
        let key = key_cols
            .iter()
            .map(|&c| row[c].clone())
            .collect::<Vec<_>>()
            .join(" ");
        let gi = group_names
            .iter()
            .position(|g| *g == key)
            .unwrap_or_else(|| {
                group_names.push(key);
                group_names.len() - 1
            });
        row_group.push(gi);
    }

    let mut use_cols = value_cols;
    if group_names.len() * use_cols.len() > 12 {
        use_cols.truncate(1);
    }
    if group_names.len() * use_cols.len() > 16 {
        return None;
    }

    let mut series = Vec::new();
    for (gi, gname) in group_names.iter().enumerate() {
        for &c in &use_cols {
            let name = if group_names.len() == 1 {
                table.columns[c].clone()
            } else if use_cols.len() == 1 {
                gname.clone()
            } else {
                format!("{gname} {}", table.columns[c])
            };
            let points: Vec<(f64, f64)> = table
                .rows
                .iter()
                .enumerate()
                .filter(|(r, _)| row_group[*r] == gi)
                .filter_map(|(r, _)| Some((parsed[r][x_idx]?, parsed[r][c]?)))
                .collect();
            if points.len() >= 2 {
                series.push(Series { name, points });
            }
        }
    }
    if series.is_empty() {
        return None;
    }
    render(title, &table.columns[x_idx], &series)
}
