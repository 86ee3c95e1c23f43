use std::fmt::Write as _;
use std::io::Read;

use crate::error::{CliError, CliResult};
use crate::row::CONFIG_COLUMNS;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRequest {
    pub x: String,
    pub y: Vec<String>,
    pub log_y: bool,
}

#[derive(Debug, Clone, PartialEq)]
struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

/// Renders the CSV in `input` as a standalone SVG 1.1 line chart.
pub fn render_svg<R: Read>(input: R, request: &PlotRequest) -> CliResult<String> {
    let mut reader = csv::Reader::from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown column `{name}`; available columns: {}",
                headers.join(", ")
            ))
        })
    };
    if request.y.is_empty() {
        return Err(CliError::Usage("at least one y column is required".into()));
    }
    let x_idx = column(&request.x)?;
    let y_idx = request.y.iter().map(|y| column(y)).collect::<CliResult<Vec<_>>>()?;
    let records = reader.records().collect::<Result<Vec<_>, _>>()?;
    if records.is_empty() {
        return Err(CliError::Usage("no data rows".into()));
    }

    // group rows by configuration columns other than the x axis and the seed
    let group_idx: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(i, h)| *i != x_idx && *h != "seed" && CONFIG_COLUMNS.contains(&h.as_str()))
        .map(|(i, _)| i)
        .collect();
    let mut groups: Vec<(Vec<String>, Vec<usize>)> = Vec::new();
    for (row, record) in records.iter().enumerate() {
        let key: Vec<String> = group_idx.iter().map(|&i| record[i].to_string()).collect();
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, rows)) => rows.push(row),
            None => groups.push((key, vec![row])),
        }
    }
    let varying: Vec<usize> = (0..group_idx.len())
        .filter(|&j| groups.iter().any(|(k, _)| k[j] != groups[0].0[j]))
        .collect();

    let mut series = Vec::new();
    for (name, &yi) in request.y.iter().zip(&y_idx) {
        for (key, rows) in &groups {
            let mut label = name.clone();
            if !varying.is_empty() {
                let parts: Vec<String> = varying
                    .iter()
                    .map(|&j| format!("{}={}", headers[group_idx[j]], key[j]))
                    .collect();
                let _ = write!(label, " ({})", parts.join(", "));
            }
            let mut points = Vec::with_capacity(rows.len());
            for &row in rows {
                let x = number(&records[row][x_idx], &request.x, row)?;
                let y = number(&records[row][yi], name, row)?;
                if x.is_finite() && y.is_finite() && (!request.log_y || y > 0.0) {
                    points.push((x, y));
                }
            }
            series.push(Series { label, points });
        }
    }
    if series.iter().all(|s| s.points.is_empty()) {
        let why = if request.log_y {
            "no positive finite values to plot"
        } else {
            "no finite values to plot"
        };
        return Err(CliError::Usage(why.into()));
    }
    let y_label = request.y.join(", ");
    Ok(draw(&series, &request.x, &y_label, request.log_y))
}

fn number(text: &str, column: &str, row: usize) -> CliResult<f64> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("column `{column}` row {}: `{text}` is not a number", row + 1)))
}

fn draw(series: &[Series], x_label: &str, y_label: &str, log_y: bool) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x_min, mut x_max, mut y_min, mut y_max) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        let y = if log_y { y.log10() } else { y };
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if log_y {
        y_min = y_min.floor();
        y_max = y_max.ceil();
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| TOP + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let at = px(x);
        let base = TOP + plot_h;
        let _ = writeln!(
            svg,
            r#"<line x1="{at:.2}" y1="{base}" x2="{at:.2}" y2="{:.2}" stroke="black"/>"#,
            base + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{at:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            base + 20.0,
            tick_label(x)
        );
    }
    let y_ticks: Vec<f64> = if log_y {
        let decades = (y_max - y_min) as usize;
        let step = decades.div_ceil(10).max(1);
        (0..=decades).step_by(step).map(|d| y_min + d as f64).collect()
    } else {
        (0..=5).map(|i| y_min + (y_max - y_min) * i as f64 / 5.0).collect()
    };
    for y in y_ticks {
        let at = py(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{at:.2}" x2="{LEFT}" y2="{at:.2}" stroke="black"/>"#,
            LEFT - 5.0
        );
        let label = if log_y {
            format!(r#"10<tspan baseline-shift="super" font-size="9">{}</tspan>"#, y as i64)
        } else {
            tick_label(y)
        };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            LEFT - 8.0,
            at + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let y_title = if log_y {
        format!("{y_label} (log scale)")
    } else {
        y_label.to_string()
    };
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(&y_title)
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(if log_y { y.log10() } else { y })))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            coords.join(" "),
            escape(&s.label)
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.2}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        return format!("{v:.2e}");
    }
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
