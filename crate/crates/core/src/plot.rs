//! Standalone SVG line charts of actual vs predicted prices.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;

use crate::harness::PredictionRow;
use crate::{Error, Result};

pub const ACTUAL_COLOR: &str = "#1f77b4";
pub const PREDICTED_COLOR: &str = "#d62728";

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Open,
    Close,
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(Channel::Open),
            "close" => Ok(Channel::Close),
            _ => Err(Error::InvalidConfig(format!("channel must be open or close, got {s:?}"))),
        }
    }
}

/// Reads a predictions file written by the harness.
pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>> {
    let malformed = |reason: String| Error::MalformedPredictions {
        path: path.to_path_buf(),
        reason,
    };
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let expected = ["date", "actual_open", "pred_open", "actual_close", "pred_close"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(malformed(format!("expected header {}", expected.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(format!("bad number {:?}", &rec[i])))
        };
        rows.push(PredictionRow {
            date: NaiveDate::parse_from_str(&rec[0], "%Y-%m-%d")
                .map_err(|_| malformed(format!("bad date {:?}", &rec[0])))?,
            actual_open: num(1)?,
            pred_open: num(2)?,
            actual_close: num(3)?,
            pred_close: num(4)?,
        });
    }
    if rows.is_empty() {
        return Err(malformed("no rows".into()));
    }
    Ok(rows)
}

pub fn channel_series(rows: &[PredictionRow], channel: Channel) -> (Vec<f64>, Vec<f64>) {
    rows.iter()
        .map(|r| match channel {
            Channel::Open => (r.actual_open, r.pred_open),
            Channel::Close => (r.actual_close, r.pred_close),
        })
        .unzip()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn polyline(values: &[f64], x: impl Fn(usize) -> f64, y: impl Fn(f64) -> f64, color: &str) -> String {
    let pts: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", x(i), y(*v)))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        pts.join(" ")
    )
}

/// Renders an SVG 1.1 document: test-day index on x, normalized price on y,
/// actual in blue and predicted in red.
pub fn render_svg(actual: &[f64], predicted: &[f64], title: &str) -> String {
    let n = actual.len().max(predicted.len());
    let (mut lo, mut hi) = actual
        .iter()
        .chain(predicted)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = (hi - lo) * 0.05;
    let (lo, hi) = (lo - pad, hi + pad);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let span = (n.max(2) - 1) as f64;
    let x = |i: usize| LEFT + plot_w * i as f64 / span;
    let y = |v: f64| TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );

    // Axes.
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(s, "<g stroke=\"black\" stroke-width=\"1\">");
    let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y1}\" x2=\"{x1}\" y2=\"{y1}\"/>");
    let _ = writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/>");
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, "<g font-family=\"sans-serif\" font-size=\"11\">");
    for k in 0..=5 {
        let v = lo + (hi - lo) * k as f64 / 5.0;
        let py = y(v);
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/><text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.3}</text>",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
    }
    let ticks = 6.min(n.max(1));
    for k in 0..ticks {
        let i = if ticks > 1 { (n - 1) * k / (ticks - 1) } else { 0 };
        let px = x(i);
        let _ = writeln!(
            s,
            "<line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{i}</text>",
            y1 + 5.0,
            y1 + 18.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">test day</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">normalized price</text>",
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(s, "</g>");

    s.push_str(&polyline(actual, x, y, ACTUAL_COLOR));
    s.push_str(&polyline(predicted, x, y, PREDICTED_COLOR));

    // Legend.
    let lx = WIDTH - RIGHT - 130.0;
    let _ = writeln!(s, "<g font-family=\"sans-serif\" font-size=\"12\">");
    for (k, (label, color)) in [("actual", ACTUAL_COLOR), ("predicted", PREDICTED_COLOR)].iter().enumerate() {
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/><text x=\"{}\" y=\"{}\">{label}</text>",
            lx + 24.0,
            lx + 30.0,
            ly + 4.0
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polylines(svg: &str) -> Vec<(String, Vec<String>)> {
        let doc = roxmltree::Document::parse(svg).expect("well-formed XML");
        doc.descendants()
            .filter(|n| n.has_tag_name("polyline"))
            .map(|n| {
                (
                    n.attribute("stroke").unwrap().to_string(),
                    n.attribute("points").unwrap().split(' ').map(String::from).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn well_formed_with_both_series() {
        let a = [0.1, 0.4, 0.35, 0.8];
        let p = [0.15, 0.3, 0.5, 0.7];
        let svg = render_svg(&a, &p, "STI <open> & close");
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let lines = polylines(&svg);
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].0, ACTUAL_COLOR);
        assert_eq!(lines[1].0, PREDICTED_COLOR);
        assert!(lines.iter().all(|(_, pts)| pts.len() == 4));
    }

    #[test]
    fn identical_series_overlap() {
        let a: Vec<f64> = (0..50).map(|i| (i as f64 / 7.0).sin()).collect();
        let lines = polylines(&render_svg(&a, &a, "same"));
        assert_eq!(lines[0].1, lines[1].1);
        assert_eq!(lines[0].1.len(), 50);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(polylines(&render_svg(&[0.5], &[0.5], "one"))[0].1.len(), 1);
        assert_eq!(polylines(&render_svg(&[0.2; 3], &[0.2; 3], "flat")).len(), 2);
    }

    #[test]
    fn channel_parse() {
        assert_eq!("Open".parse::<Channel>().unwrap(), Channel::Open);
        assert!("high".parse::<Channel>().is_err());
    }

    #[test]
    fn reads_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "date,actual_open,pred_open,actual_close,pred_close\n2020-01-02,0.1,0.2,0.3,0.4\n").unwrap();
        let rows = read_predictions(&path).unwrap();
        assert_eq!(channel_series(&rows, Channel::Close), (vec![0.3], vec![0.4]));

        std::fs::write(&path, "date,a,b\n2020-01-02,1,2\n").unwrap();
        assert!(matches!(read_predictions(&path), Err(Error::MalformedPredictions { .. })));
        std::fs::write(&path, "date,actual_open,pred_open,actual_close,pred_close\n2020-01-02,x,0.2,0.3,0.4\n").unwrap();
        assert!(matches!(read_predictions(&path), Err(Error::MalformedPredictions { .. })));
    }
}
