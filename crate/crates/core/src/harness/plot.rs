//! SVG line plots of CCDF and BER CSV files, log-scaled on the y axis.
//!
//! One polyline per cell; points with a zero y value are left out since
//! they have no place on a log axis.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::output::csv_error;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Ccdf,
    Ber,
}

impl PlotKind {
    fn columns(self) -> (&'static str, &'static str) {
        match self {
            PlotKind::Ccdf => ("threshold_db", "ccdf"),
            PlotKind::Ber => ("snr_db", "ber"),
        }
    }

    fn axis_labels(self) -> (&'static str, &'static str) {
        match self {
            PlotKind::Ccdf => ("PAPR threshold (dB)", "CCDF"),
            PlotKind::Ber => ("SNR (dB)", "BER"),
        }
    }
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ccdf" => Ok(PlotKind::Ccdf),
            "ber" => Ok(PlotKind::Ber),
            other => Err(Error::Config(format!("kind: expected ccdf or ber, got {other:?}"))),
        }
    }
}

/// Columns that together name a curve, when present.
const SERIES_KEYS: [&str; 5] = ["scheme", "side_info_mode", "V", "W", "pattern"];

type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn read_series(csv_text: &str, kind: PlotKind) -> Result<Series> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (xs, ys) = kind.columns();
    let (xi, yi) = match (find(xs), find(ys)) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::Csv {
                line: 1,
                message: format!("header lacks {xs} and {ys} columns"),
            })
        }
    };
    let key_cols: Vec<usize> = SERIES_KEYS.iter().filter_map(|k| find(k)).collect();
    let mut series = Series::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let number = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field.trim().parse::<f64>().map_err(|_| Error::Csv {
                line,
                message: format!("column {} is not a number: {field:?}", headers[i].to_string()),
            })
        };
        let point = (number(xi)?, number(yi)?);
        let name = key_cols
            .iter()
            .map(|&i| format!("{}={}", &headers[i], record.get(i).unwrap_or("")))
            .collect::<Vec<_>>()
            .join(" ");
        series.entry(name).or_default().push(point);
    }
    if series.is_empty() {
        return Err(Error::Csv {
            line: 2,
            message: "no data rows".into(),
        });
    }
    Ok(series)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render `csv_text` (a CCDF or BER file written by this crate) as SVG.
pub fn render_svg(csv_text: &str, kind: PlotKind) -> Result<String> {
    let series = read_series(csv_text, kind)?;
    let points = series.values().flatten();
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y_min_pos = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &(x, y) in points {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        if y > 0.0 {
            y_min_pos = y_min_pos.min(y);
            y_max = y_max.max(y);
        }
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let (decade_lo, decade_hi) = if y_min_pos.is_finite() {
        (y_min_pos.log10().floor() as i32, (y_max.log10().ceil() as i32).max(y_min_pos.log10().floor() as i32 + 1))
    } else {
        (-1, 0)
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| {
        TOP + (decade_hi as f64 - y.log10()) / (decade_hi - decade_lo) as f64 * plot_h
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for d in decade_lo..=decade_hi {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for i in 0..=5 {
        let x = x_min + (x_max - x_min) * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            TOP + plot_h + 16.0,
            (x * 100.0).round() / 100.0
        );
    }
    let (x_label, y_label) = kind.axis_labels();
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_label}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords = pts
            .iter()
            .filter(|(_, y)| *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>"#
        );
        let ly = TOP + 14.0 * (i as f64 + 1.0);
        let lx = LEFT + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 16.0,
            ly - 4.0,
            lx + 20.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "threshold_db,ccdf,n_trials,scheme,V,W,pattern,seed,config_hash\n\
        4,0.9,10,afdm,1,1,none,1,ab\n\
        5,0.1,10,afdm,1,1,none,1,ab\n\
        4,0.5,10,gps,4,2,adjacent,1,ab\n\
        5,0,10,gps,4,2,adjacent,1,ab\n";

    #[test]
    fn one_polyline_per_cell() {
        let svg = render_svg(TWO, PlotKind::Ccdf).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("scheme=gps V=4 W=2 pattern=adjacent"));
        assert_eq!(svg, render_svg(TWO, PlotKind::Ccdf).unwrap());
    }

    #[test]
    fn empty_body_is_an_error() {
        let header = "threshold_db,ccdf,n_trials,scheme,V,W,pattern,seed,config_hash\n";
        assert!(matches!(render_svg(header, PlotKind::Ccdf), Err(Error::Csv { .. })));
    }

    #[test]
    fn malformed_row_reports_its_line() {
        let bad = "snr_db,ber,scheme\n10,0.1,afdm\n12,oops,afdm\n";
        match render_svg(bad, PlotKind::Ber) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected csv error, got {other:?}"),
        }
        let ragged = "snr_db,ber,scheme\n10,0.1,afdm\n12,0.2\n";
        match render_svg(ragged, PlotKind::Ber) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_kind_is_rejected() {
        assert!(matches!(render_svg(TWO, PlotKind::Ber), Err(Error::Csv { line: 1, .. })));
    }
}
