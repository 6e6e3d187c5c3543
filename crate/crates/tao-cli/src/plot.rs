//! Self-contained SVG charts rendered straight from the CSV tables, so the
//! plots never show anything the CSV does not contain.

use std::path::Path;

use crate::error::CliResult;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 58.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// A polyline chart with optional threshold line and event markers.
#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
    /// Dashed horizontal threshold, e.g. a temperature limit.
    pub h_line: Option<(f64, String)>,
    /// Event times drawn as small ticks along the bottom edge.
    pub v_markers: Vec<f64>,
    /// Force a value into the y range (e.g. 0 for battery plots).
    pub include_y: Option<f64>,
}

/// A grouped-bar histogram chart with optional vertical threshold line.
#[derive(Debug, Clone, Default)]
pub struct HistogramChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// `n_bins + 1` ascending edges shared by all series.
    pub edges: Vec<f64>,
    /// Per-series bin masses.
    pub series: Vec<(String, Vec<f64>)>,
    pub v_line: Option<(f64, String)>,
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Largest "nice" step (1, 2 or 5 times a power of ten) giving at most
/// `target` intervals over `range`.
fn nice_step(range: f64, target: f64) -> f64 {
    let raw = range / target;
    let mag = 10f64.powf(raw.log10().floor());
    for m in [1.0, 2.0, 5.0] {
        if m * mag >= raw {
            return m * mag;
        }
    }
    10.0 * mag
}

fn ticks(min: f64, max: f64, target: f64) -> (Vec<f64>, usize) {
    let step = nice_step(max - min, target);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (min / step).ceil();
    let last = (max / step).floor();
    let mut out = Vec::new();
    let mut k = first;
    while k <= last + 0.5 {
        out.push(k * step);
        k += 1.0;
    }
    (out, decimals)
}

fn fmt_tick(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn pad_range(min: f64, max: f64) -> (f64, f64) {
    if max > min {
        let pad = (max - min) * 0.05;
        (min - pad, max + pad)
    } else {
        (min - 1.0, max + 1.0)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    let (xticks, xdec) = ticks(frame.x_min, frame.x_max, 8.0);
    for t in xticks {
        let px = frame.x(t);
        out.push_str(&format!(
            "<line x1=\"{px:.2}\" y1=\"{y0}\" x2=\"{px:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
             <line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{y0}\" stroke=\"#e5e5e5\" stroke-width=\"0.5\"/>\n\
             <text x=\"{px:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"11\">{}</text>\n",
            y0 + 5.0,
            y0 + 18.0,
            fmt_tick(t, xdec)
        ));
    }
    let (yticks, ydec) = ticks(frame.y_min, frame.y_max, 6.0);
    for t in yticks {
        let py = frame.y(t);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>\n\
             <line x1=\"{x0}\" y1=\"{py:.2}\" x2=\"{x1}\" y2=\"{py:.2}\" stroke=\"#e5e5e5\" stroke-width=\"0.5\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            fmt_tick(t, ydec)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n\
         <text transform=\"translate(16,{}) rotate(-90)\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        escape(y_label)
    ));
    out
}

fn legend(labels: &[String]) -> String {
    let mut out = String::new();
    let x = MARGIN_LEFT + 12.0;
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let color = PALETTE[i % PALETTE.len()];
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            x + 22.0,
            x + 28.0,
            y + 4.0,
            escape(label)
        ));
    }
    out
}

impl LineChart {
    pub fn render(&self) -> String {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for (_, pts) in &self.series {
            for &(x, y) in pts {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if !x_min.is_finite() {
            x_min = 0.0;
            x_max = 1.0;
            y_min = 0.0;
            y_max = 1.0;
        }
        if let Some((v, _)) = self.h_line {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
        if let Some(v) = self.include_y {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
        let (y_min, y_max) = pad_range(y_min, y_max);
        let (x_min, x_max) = if x_max > x_min {
            (x_min, x_max)
        } else {
            (x_min - 1.0, x_max + 1.0)
        };
        let frame = Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        };

        let mut svg = header(&self.title);
        svg.push_str(&axes(&frame, &self.x_label, &self.y_label));
        svg.push_str(
            "<clipPath id=\"plot\"><rect x=\"72\" y=\"44\" width=\"704\" height=\"378\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n",
        );
        if let Some((v, label)) = &self.h_line {
            let py = frame.y(*v);
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT}\" y1=\"{py:.2}\" x2=\"{}\" y2=\"{py:.2}\" \
                 stroke=\"#d62728\" stroke-dasharray=\"6 4\" stroke-width=\"1.2\"/>\n\
                 <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"11\" fill=\"#d62728\">{}</text>\n",
                WIDTH - MARGIN_RIGHT,
                WIDTH - MARGIN_RIGHT - 4.0,
                py - 5.0,
                escape(label)
            ));
        }
        for &t in &self.v_markers {
            let px = frame.x(t);
            let y0 = HEIGHT - MARGIN_BOTTOM;
            svg.push_str(&format!(
                "<line x1=\"{px:.2}\" y1=\"{}\" x2=\"{px:.2}\" y2=\"{y0}\" stroke=\"#7f7f7f\" stroke-width=\"1\"/>\n",
                y0 - 8.0
            ));
        }
        for (i, (_, pts)) in self.series.iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let color = PALETTE[i % PALETTE.len()];
            let mut d = String::new();
            for (j, &(x, y)) in pts.iter().enumerate() {
                let cmd = if j == 0 { 'M' } else { 'L' };
                d.push_str(&format!("{cmd}{:.2} {:.2}", frame.x(x), frame.y(y)));
            }
            svg.push_str(&format!(
                "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
            ));
        }
        svg.push_str("</g>\n");
        let labels: Vec<String> = self.series.iter().map(|(l, _)| l.clone()).collect();
        svg.push_str(&legend(&labels));
        svg.push_str("</svg>\n");
        svg
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_svg(path, &self.render())
    }
}

impl HistogramChart {
    pub fn render(&self) -> String {
        let x_min = self.edges.first().copied().unwrap_or(0.0);
        let x_max = self.edges.last().copied().unwrap_or(1.0);
        let mut y_max = 0.0f64;
        for (_, mass) in &self.series {
            for &m in mass {
                y_max = y_max.max(m);
            }
        }
        let frame = Frame {
            x_min,
            x_max: x_max.max(x_min + 1e-9),
            y_min: 0.0,
            y_max: if y_max > 0.0 { y_max * 1.08 } else { 1.0 },
        };
        let mut svg = header(&self.title);
        svg.push_str(&axes(&frame, &self.x_label, &self.y_label));
        let n_series = self.series.len().max(1) as f64;
        for (si, (_, mass)) in self.series.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            for (bi, &m) in mass.iter().enumerate() {
                if m <= 0.0 || bi + 1 >= self.edges.len() {
                    continue;
                }
                let lo = self.edges[bi];
                let hi = self.edges[bi + 1];
                let w = (frame.x(hi) - frame.x(lo)) / n_series;
                let x = frame.x(lo) + w * si as f64;
                let y = frame.y(m);
                let h = frame.y(0.0) - y;
                svg.push_str(&format!(
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{h:.2}\" \
                     fill=\"{color}\" fill-opacity=\"0.85\"/>\n",
                    (w - 1.0).max(0.5)
                ));
            }
        }
        if let Some((v, label)) = &self.v_line {
            let px = frame.x(*v);
            svg.push_str(&format!(
                "<line x1=\"{px:.2}\" y1=\"{MARGIN_TOP}\" x2=\"{px:.2}\" y2=\"{}\" \
                 stroke=\"#d62728\" stroke-dasharray=\"6 4\" stroke-width=\"1.2\"/>\n\
                 <text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#d62728\">{}</text>\n",
                HEIGHT - MARGIN_BOTTOM,
                px + 4.0,
                MARGIN_TOP + 12.0,
                escape(label)
            ));
        }
        let labels: Vec<String> = self.series.iter().map(|(l, _)| l.clone()).collect();
        svg.push_str(&legend(&labels));
        svg.push_str("</svg>\n");
        svg
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        write_svg(path, &self.render())
    }
}

fn write_svg(path: &Path, svg: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_renders_every_series_and_the_threshold() {
        let chart = LineChart {
            title: "temperature".into(),
            x_label: "time [s]".into(),
            y_label: "degC".into(),
            series: vec![
                ("tao".into(), vec![(0.0, 25.0), (10.0, 30.0)]),
                ("sota".into(), vec![(0.0, 25.0), (10.0, 45.0)]),
            ],
            h_line: Some((43.0, "limit".into())),
            v_markers: vec![2.0, 5.0],
            include_y: None,
        };
        let svg = chart.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("tao"));
        assert!(svg.contains("sota"));
    }

    #[test]
    fn empty_chart_still_renders_axes() {
        let chart = LineChart {
            title: "empty".into(),
            ..Default::default()
        };
        let svg = chart.render();
        assert!(svg.contains("<line"));
    }

    #[test]
    fn histogram_renders_bars_and_limit() {
        let chart = HistogramChart {
            title: "histogram".into(),
            x_label: "degC".into(),
            y_label: "mass".into(),
            edges: vec![25.0, 30.0, 35.0, 40.0, 45.0],
            series: vec![("sota".into(), vec![0.4, 0.3, 0.2, 0.1])],
            v_line: Some((43.0, "43".into())),
        };
        let svg = chart.render();
        assert_eq!(svg.matches("<rect").count(), 1 + 4); // background + bars
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn titles_are_escaped() {
        let chart = LineChart {
            title: "a < b & c".into(),
            ..Default::default()
        };
        assert!(chart.render().contains("a &lt; b &amp; c"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let chart = HistogramChart {
            title: "h".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            edges: vec![0.0, 1.0, 2.0],
            series: vec![("a".into(), vec![0.5, 0.5])],
            v_line: None,
        };
        assert_eq!(chart.render(), chart.render());
    }
}
