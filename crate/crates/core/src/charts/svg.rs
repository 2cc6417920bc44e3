use std::fmt::Write;

use chrono::{Duration, NaiveDate};

use super::{ChartData, HistogramData, SeriesPlotData, XValue, XYSeries, XyKind};
use crate::error::{Error, Result};
use crate::ops::FrequencyTable;

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 48.0;
const N_TICKS: usize = 5;

/// Renders chart data as a standalone SVG 1.1 document. Output depends only
/// on the input.
pub fn render_svg(data: &ChartData, width: u32, height: u32) -> Result<String> {
    let mut canvas = Canvas::new(width as f64, height as f64);
    match data {
        ChartData::Histogram(h) => canvas.histogram(h)?,
        ChartData::Xy(s) => canvas.xy(s)?,
        ChartData::Bar(f) => canvas.bars(f)?,
        ChartData::Series(s) => canvas.series(s)?,
    }
    Ok(canvas.finish())
}

struct Canvas {
    width: f64,
    height: f64,
    body: String,
}

#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        Self { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' && c != '\n' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

fn nice_step(span: f64, n: usize) -> f64 {
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo || !lo.is_finite() || !hi.is_finite() {
        return vec![lo];
    }
    let step = nice_step(hi - lo, N_TICKS);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e6).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        format!("{v:.2e}")
    }
}

fn fmt_day(days: f64) -> String {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid");
    (epoch + Duration::days(days.round() as i64))
        .format("%Y-%m-%d")
        .to_string()
}

impl Canvas {
    fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    fn plot_x(&self) -> (f64, f64) {
        (
            MARGIN_LEFT,
            (self.width - MARGIN_RIGHT).max(MARGIN_LEFT + 1.0),
        )
    }

    fn plot_y(&self) -> (f64, f64) {
        (
            (self.height - MARGIN_BOTTOM).max(MARGIN_TOP + 1.0),
            MARGIN_TOP,
        )
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="black"{extra}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, label: &str, extra: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="11" text-anchor="{anchor}"{extra}>{}</text>"#,
            escape(label)
        );
    }

    /// Axes with numeric ticks; `x_label` formats x tick values.
    fn axes(&mut self, xs: Scale, ys: Scale, x_ticks: &[f64], x_label: &dyn Fn(f64) -> String) {
        let (x0, x1) = self.plot_x();
        let (y0, y1) = self.plot_y();
        self.line(x0, y0, x1, y0, "");
        self.line(x0, y0, x0, y1, "");
        for &t in x_ticks {
            let px = xs.map(t);
            self.line(px, y0, px, y0 + 4.0, "");
            self.text(px, y0 + 16.0, "middle", &x_label(t), "");
        }
        for t in ticks(ys.lo, ys.hi) {
            let py = ys.map(t);
            self.line(x0 - 4.0, py, x0, py, "");
            self.text(x0 - 6.0, py + 4.0, "end", &fmt_num(t), "");
        }
    }

    fn histogram(&mut self, h: &HistogramData) -> Result<()> {
        if h.counts.is_empty() || h.edges.len() != h.counts.len() + 1 {
            return Err(Error::EmptyData);
        }
        let (x0, x1) = self.plot_x();
        let (y0, y1) = self.plot_y();
        let xs = Scale::new(h.edges[0], h.edges[h.edges.len() - 1], x0, x1);
        let top = h.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let ys = Scale::new(0.0, top, y0, y1);
        for (i, &c) in h.counts.iter().enumerate() {
            let left = xs.map(h.edges[i]);
            let right = xs.map(h.edges[i + 1]);
            let y = ys.map(c as f64);
            let _ = writeln!(
                self.body,
                r##"<rect x="{left:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#4682b4" stroke="white"/>"##,
                (right - left).max(0.0),
                (y0 - y).max(0.0)
            );
        }
        self.axes(xs, ys, &h.edges, &|v| fmt_num(v));
        Ok(())
    }

    fn xy(&mut self, s: &XYSeries) -> Result<()> {
        if s.points.is_empty() {
            return Err(Error::EmptyData);
        }
        let (x0, x1) = self.plot_x();
        let (y0, y1) = self.plot_y();
        let px: Vec<f64> = s.points.iter().map(|p| p.x.position()).collect();
        let (xlo, xhi) = min_max(&px);
        let (ylo, yhi) = min_max(&s.points.iter().map(|p| p.y).collect::<Vec<_>>());
        let xs = Scale::new(xlo, xhi, x0, x1);
        let ys = Scale::new(ylo, yhi, y0, y1);
        match s.kind {
            XyKind::Scatter => {
                for (p, x) in s.points.iter().zip(&px) {
                    let _ = writeln!(
                        self.body,
                        r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#4682b4"/>"##,
                        xs.map(*x),
                        ys.map(p.y)
                    );
                }
            }
            XyKind::Line => {
                let coords: Vec<(f64, f64)> = s
                    .points
                    .iter()
                    .zip(&px)
                    .map(|(p, x)| (xs.map(*x), ys.map(p.y)))
                    .collect();
                self.polyline(&coords, "#4682b4");
            }
        }
        let dated = matches!(s.points[0].x, XValue::Date(_));
        let label = move |v: f64| if dated { fmt_day(v) } else { fmt_num(v) };
        self.axes(xs, ys, &ticks(xs.lo, xs.hi), &label);
        Ok(())
    }

    fn polyline(&mut self, coords: &[(f64, f64)], color: &str) {
        let mut pts = String::new();
        for (i, (x, y)) in coords.iter().enumerate() {
            if i > 0 {
                pts.push(' ');
            }
            let _ = write!(pts, "{x:.2},{y:.2}");
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
    }

    fn bars(&mut self, f: &FrequencyTable) -> Result<()> {
        if f.entries.is_empty() {
            return Err(Error::EmptyData);
        }
        let (x0, x1) = self.plot_x();
        let (y0, y1) = self.plot_y();
        let top = f.entries.iter().map(|e| e.count).max().unwrap_or(1).max(1) as f64;
        let ys = Scale::new(0.0, top, y0, y1);
        let slot = (x1 - x0) / f.entries.len() as f64;
        for (i, e) in f.entries.iter().enumerate() {
            let left = x0 + slot * (i as f64 + 0.1);
            let y = ys.map(e.count as f64);
            let _ = writeln!(
                self.body,
                r##"<rect x="{left:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#4682b4"/>"##,
                slot * 0.8,
                (y0 - y).max(0.0)
            );
            let cx = x0 + slot * (i as f64 + 0.5);
            self.text(cx, y0 + 16.0, "middle", &e.level, "");
        }
        self.line(x0, y0, x1, y0, "");
        self.line(x0, y0, x0, y1, "");
        for t in ticks(0.0, top) {
            let py = ys.map(t);
            self.line(x0 - 4.0, py, x0, py, "");
            self.text(x0 - 6.0, py + 4.0, "end", &fmt_num(t), "");
        }
        Ok(())
    }

    fn series(&mut self, s: &SeriesPlotData) -> Result<()> {
        if s.values.is_empty() {
            return Err(Error::EmptyData);
        }
        let (x0, x1) = self.plot_x();
        let (y0, y1) = self.plot_y();
        let n = s.values.len();
        let (mut ylo, mut yhi) = min_max(&s.values);
        if let Some(r) = s.reference_line {
            ylo = ylo.min(r);
            yhi = yhi.max(r);
        }
        let xs = Scale::new(0.0, (n - 1) as f64, x0, x1);
        let ys = Scale::new(ylo, yhi, y0, y1);
        let coords: Vec<(f64, f64)> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (xs.map(i as f64), ys.map(*v)))
            .collect();
        self.polyline(&coords, "#4682b4");
        if let Some(r) = s.reference_line {
            let py = ys.map(r);
            self.line(
                x0,
                py,
                x1,
                py,
                r##" stroke-dasharray="4 3" class="reference-line""##,
            );
            self.text(x1, py - 4.0, "end", &format!("mean = {}", fmt_num(r)), "");
        }
        let step = (n / N_TICKS).max(1);
        let idx: Vec<f64> = (0..n).step_by(step).map(|i| i as f64).collect();
        let times = s.times.clone();
        let label = move |v: f64| times.get(v as usize).cloned().unwrap_or_default();
        self.axes(xs, ys, &idx, &label);
        Ok(())
    }

    fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n\
             {body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}
