//! Deterministic standalone SVG scatter plots: fixed palette, fixed layout,
//! byte-identical output for identical input.

use std::path::Path;

use crate::error::{Error, Result};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 46.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Mean-centered rectangle drawn behind a series, sized in data units.
#[derive(Debug, Clone, PartialEq)]
pub struct RectSpec {
    pub center: (f64, f64),
    pub width: f64,
    pub height: f64,
}

/// One labeled point set, optionally with a spread rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub rect: Option<RectSpec>,
}

/// Data-to-pixel affine map for the plot area.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Frame {
    fn from_series(series: &[Series]) -> Frame {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in series {
            for (x, y) in &s.points {
                xs.push(*x);
                ys.push(*y);
            }
            if let Some(r) = &s.rect {
                xs.push(r.center.0 - r.width / 2.0);
                xs.push(r.center.0 + r.width / 2.0);
                ys.push(r.center.1 - r.height / 2.0);
                ys.push(r.center.1 + r.height / 2.0);
            }
        }
        let lo = |v: &Vec<f64>| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = |v: &Vec<f64>| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut x_min, mut x_max) = (lo(&xs), hi(&xs));
        let (mut y_min, mut y_max) = (lo(&ys), hi(&ys));
        let pad = |min: &mut f64, max: &mut f64| {
            if *max - *min < 1e-12 {
                let slack = min.abs().max(0.5) * 0.1;
                *min -= slack;
                *max += slack;
            } else {
                let slack = (*max - *min) * 0.05;
                *min -= slack;
                *max += slack;
            }
        };
        pad(&mut x_min, &mut x_max);
        pad(&mut y_min, &mut y_max);
        Frame { x_min, x_max, y_min, y_max }
    }

    pub fn to_pixel(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * plot_w;
        let py = MARGIN_TOP + (self.y_max - y) / (self.y_max - self.y_min) * plot_h;
        (px, py)
    }
}

fn fmt_px(v: f64) -> String {
    format!("{:.2}", v)
}

fn fmt_tick(v: f64) -> String {
    let rounded = (v * 1e4).round() / 1e4;
    format!("{rounded}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the scatter to an SVG string. At least one point (or rectangle)
/// across all series is required.
pub fn render_scatter_svg(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Analysis("scatter needs at least one series".into()));
    }
    let total: usize = series.iter().map(|s| s.points.len() + s.rect.is_some() as usize).sum();
    if total == 0 {
        return Err(Error::Analysis("scatter needs at least one point".into()));
    }
    let frame = Frame::from_series(series);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // axes
    let (x0, y0) = (MARGIN_LEFT, HEIGHT - MARGIN_BOTTOM);
    let (x1, y1) = (WIDTH - MARGIN_RIGHT, MARGIN_TOP);
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_px(x0), fmt_px(y0), fmt_px(x1), fmt_px(y0)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt_px(x0), fmt_px(y0), fmt_px(x0), fmt_px(y1)
    ));

    // ticks and grid
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = frame.x_min + f * (frame.x_max - frame.x_min);
        let yv = frame.y_min + f * (frame.y_max - frame.y_min);
        let (px, _) = frame.to_pixel((xv, frame.y_min));
        let (_, py) = frame.to_pixel((frame.x_min, yv));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
            fmt_px(px), fmt_px(y0), fmt_px(px), fmt_px(y1)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n",
            fmt_px(x0), fmt_px(py), fmt_px(x1), fmt_px(py)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt_px(px), fmt_px(y0 + 16.0), fmt_tick(xv)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            fmt_px(x0 - 6.0), fmt_px(py + 4.0), fmt_tick(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        fmt_px((x0 + x1) / 2.0), fmt_px(HEIGHT - 8.0), escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        fmt_px((y0 + y1) / 2.0), fmt_px((y0 + y1) / 2.0), escape(y_label)
    ));

    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if let Some(r) = &s.rect {
            let (left, top) =
                frame.to_pixel((r.center.0 - r.width / 2.0, r.center.1 + r.height / 2.0));
            let (right, bottom) =
                frame.to_pixel((r.center.0 + r.width / 2.0, r.center.1 - r.height / 2.0));
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{color}\" fill-opacity=\"0.18\" stroke=\"{color}\"/>\n",
                fmt_px(left), fmt_px(top), fmt_px(right - left), fmt_px(bottom - top)
            ));
        }
        for p in &s.points {
            let (px, py) = frame.to_pixel(*p);
            out.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.8\"/>\n",
                fmt_px(px), fmt_px(py)
            ));
        }
    }

    // legend
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let ly = MARGIN_TOP + 12.0 + si as f64 * 18.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            fmt_px(WIDTH - MARGIN_RIGHT + 12.0), fmt_px(ly - 9.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            fmt_px(WIDTH - MARGIN_RIGHT + 27.0), fmt_px(ly), escape(&s.label)
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Render and write to `path`.
pub fn emit_scatter_svg(
    series: &[Series],
    x_label: &str,
    y_label: &str,
    path: &Path,
) -> Result<()> {
    let svg = render_scatter_svg(series, x_label, y_label)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_series() -> Vec<Series> {
        vec![
            Series {
                label: "alpha".into(),
                points: vec![(0.1, 0.2), (0.4, 0.5), (0.8, 0.3)],
                rect: None,
            },
            Series {
                label: "beta".into(),
                points: vec![(0.2, 0.9)],
                rect: Some(RectSpec { center: (0.6, 0.8), width: 0.1, height: 0.05 }),
            },
        ]
    }

    #[test]
    fn byte_identical_for_identical_input() {
        let a = render_scatter_svg(&demo_series(), "di_bin", "acc").unwrap();
        let b = render_scatter_svg(&demo_series(), "di_bin", "acc").unwrap();
        assert_eq!(a, b);
        let mut different = demo_series();
        different[0].points[0].0 += 0.01;
        let c = render_scatter_svg(&different, "di_bin", "acc").unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(render_scatter_svg(&[], "x", "y").is_err());
        let empty = vec![Series { label: "e".into(), points: vec![], rect: None }];
        assert!(render_scatter_svg(&empty, "x", "y").is_err());
    }

    #[test]
    fn rectangle_spans_std_in_data_coordinates() {
        let series = demo_series();
        let svg = render_scatter_svg(&series, "x", "y").unwrap();
        // the rect pixel width must equal the data width under the same frame
        let frame = Frame::from_series(&series);
        let (left, top) = frame.to_pixel((0.6 - 0.05, 0.8 + 0.025));
        let (right, bottom) = frame.to_pixel((0.6 + 0.05, 0.8 - 0.025));
        let expect = format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"",
            fmt_px(left),
            fmt_px(top),
            fmt_px(right - left),
            fmt_px(bottom - top)
        );
        assert!(svg.contains(&expect), "missing {expect}");
    }

    #[test]
    fn writes_file_and_rejects_bad_paths() {
        let dir = std::env::temp_dir().join("fairbench_svg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plot.svg");
        emit_scatter_svg(&demo_series(), "x", "y", &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert!(content.starts_with("<svg"));
        assert!(content.ends_with("</svg>\n"));
        let bad = dir.join("no_such_dir").join("plot.svg");
        assert!(emit_scatter_svg(&demo_series(), "x", "y", &bad).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn labels_are_escaped() {
        let series = vec![Series { label: "a<b&c".into(), points: vec![(0.0, 0.0)], rect: None }];
        let svg = render_scatter_svg(&series, "x<1", "y&z").unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
        assert!(svg.contains("x&lt;1"));
        assert!(!svg.contains("a<b"));
    }
}
