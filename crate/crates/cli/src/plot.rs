//! Minimal SVG charts: stacked time series, box plots and line plots.

use std::fmt::Write;

const W: f64 = 800.0;
const PANEL_H: f64 = 180.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
/// Long series are reduced to a min/max envelope with this many buckets.
const MAX_BUCKETS: usize = 1500;

/// Maps data coordinates into one plot rectangle.
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    xr: (f64, f64),
    yr: (f64, f64),
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.xr.0) / (self.xr.1 - self.xr.0) * self.w
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.yr.0) / (self.yr.1 - self.yr.0) * self.h
    }

    fn axes(&self, svg: &mut String, x_label: &str, y_label: &str) {
        let _ = write!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
            self.x0, self.y0, self.w, self.h
        );
        for (v, anchor) in [(self.yr.0, "end"), (self.yr.1, "end")] {
            let _ = write!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="{anchor}">{}</text>"#,
                self.x0 - 5.0,
                self.y(v) + 4.0,
                tick(v)
            );
        }
        for v in [self.xr.0, self.xr.1] {
            let _ = write!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                self.x(v),
                self.y0 + self.h + 15.0,
                tick(v)
            );
        }
        if !x_label.is_empty() {
            let _ = write!(
                svg,
                r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
                self.x0 + self.w / 2.0,
                self.y0 + self.h + 32.0,
                escape(x_label)
            );
        }
        let cy = self.y0 + self.h / 2.0;
        let _ = write!(
            svg,
            r#"<text x="15" y="{cy:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {cy:.1})">{}</text>"#,
            escape(y_label)
        );
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(comment: &str, height: f64, title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(svg, "<!-- {} -->", comment.replace("--", "- -"));
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" viewBox="0 0 {W} {height}" font-family="sans-serif">"#
    );
    let _ = write!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{:.1}" y="18" font-size="14" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    svg
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 * lo.abs().max(1.0) {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Min/max envelope per bucket, as a polyline that visits both extremes.
fn envelope(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    if x.len() <= 2 * MAX_BUCKETS {
        return x.iter().copied().zip(y.iter().copied()).collect();
    }
    let per = x.len().div_ceil(MAX_BUCKETS);
    let mut out = Vec::with_capacity(2 * MAX_BUCKETS);
    for (xs, ys) in x.chunks(per).zip(y.chunks(per)) {
        let (imin, imax) = ys
            .iter()
            .enumerate()
            .fold((0, 0), |(a, b), (i, v)| (if *v < ys[a] { i } else { a }, if *v > ys[b] { i } else { b }));
        let (first, second) = if imin <= imax { (imin, imax) } else { (imax, imin) };
        out.push((xs[first], ys[first]));
        out.push((xs[second], ys[second]));
    }
    out
}

fn polyline(svg: &mut String, f: &Frame, pts: &[(f64, f64)], colour: &str) {
    svg.push_str(r#"<polyline fill="none" stroke-width="1" stroke=""#);
    svg.push_str(colour);
    svg.push_str(r#"" points=""#);
    for (x, y) in pts.iter().filter(|(_, y)| y.is_finite()) {
        let _ = write!(svg, "{:.1},{:.1} ", f.x(*x), f.y(*y));
    }
    svg.push_str(r#""/>"#);
}

/// One panel per series on a shared x axis (the Fig. 2 / Fig. 3 triptych).
pub fn stacked_series(comment: &str, title: &str, x: &[f64], x_label: &str, panels: &[(&str, &[f64])]) -> String {
    let height = MARGIN_T + panels.len() as f64 * (PANEL_H + MARGIN_B);
    let mut svg = open(comment, height, title);
    let xr = range(x.iter().copied());
    for (k, (label, y)) in panels.iter().enumerate() {
        let f = Frame {
            x0: MARGIN_L,
            y0: MARGIN_T + k as f64 * (PANEL_H + MARGIN_B),
            w: W - MARGIN_L - MARGIN_R,
            h: PANEL_H,
            xr,
            yr: range(y.iter().copied()),
        };
        let last = k + 1 == panels.len();
        f.axes(&mut svg, if last { x_label } else { "" }, label);
        polyline(&mut svg, &f, &envelope(x, y), COLOURS[k % COLOURS.len()]);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Quartiles by linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Box plot per group: quartile box, median line, whiskers to the furthest
/// point within 1.5 IQR, remaining points drawn as outliers.
pub fn box_plot(comment: &str, title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let height = MARGIN_T + PANEL_H * 1.5 + MARGIN_B;
    let mut svg = open(comment, height, title);
    let n = groups.len().max(1) as f64;
    let f = Frame {
        x0: MARGIN_L,
        y0: MARGIN_T,
        w: W - MARGIN_L - MARGIN_R,
        h: PANEL_H * 1.5,
        xr: (0.0, n),
        yr: range(groups.iter().flat_map(|(_, v)| v.iter().copied()).chain([0.0])),
    };
    f.axes(&mut svg, "", y_label);
    for (k, (name, values)) in groups.iter().enumerate() {
        let cx = f.x(k as f64 + 0.5);
        let _ = write!(
            svg,
            r#"<text x="{cx:.1}" y="{:.1}" font-size="11" text-anchor="middle">{} (n={})</text>"#,
            f.y0 + f.h + 15.0,
            escape(name),
            values.len()
        );
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            continue;
        }
        v.sort_by(f64::total_cmp);
        let (q1, med, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
        let iqr = q3 - q1;
        let lo = v.iter().copied().find(|x| *x >= q1 - 1.5 * iqr).unwrap_or(q1);
        let hi = v.iter().rev().copied().find(|x| *x <= q3 + 1.5 * iqr).unwrap_or(q3);
        let half = 0.25 * f.w / n;
        let colour = COLOURS[k % COLOURS.len()];
        let _ = write!(
            svg,
            r#"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.1}" y2="{:.1}" stroke="{colour}"/>"#,
            f.y(lo),
            f.y(hi)
        );
        let _ = write!(
            svg,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="white" stroke="{colour}"/>"#,
            cx - half,
            f.y(q3),
            2.0 * half,
            (f.y(q1) - f.y(q3)).max(0.5)
        );
        let _ = write!(
            svg,
            r#"<line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="2"/>"#,
            cx - half,
            cx + half,
            f.y(med),
            f.y(med)
        );
        for x in v.iter().filter(|x| **x < lo || **x > hi) {
            let _ = write!(svg, r#"<circle cx="{cx:.1}" cy="{:.1}" r="2" fill="none" stroke="{colour}"/>"#, f.y(*x));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Line plot with a legend; one panel per entry of `panels`, each holding named series.
/// Named polylines of (x, y) points.
pub type Series = Vec<(String, Vec<(f64, f64)>)>;

pub fn line_panels(comment: &str, title: &str, x_label: &str, panels: &[(&str, Series)]) -> String {
    let height = MARGIN_T + panels.len() as f64 * (PANEL_H + MARGIN_B) + 20.0;
    let mut svg = open(comment, height, title);
    let xr = range(panels.iter().flat_map(|(_, s)| s.iter().flat_map(|(_, p)| p.iter().map(|q| q.0))));
    for (k, (label, series)) in panels.iter().enumerate() {
        let f = Frame {
            x0: MARGIN_L,
            y0: MARGIN_T + k as f64 * (PANEL_H + MARGIN_B),
            w: W - MARGIN_L - MARGIN_R,
            h: PANEL_H,
            xr,
            yr: range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1))),
        };
        f.axes(&mut svg, if k + 1 == panels.len() { x_label } else { "" }, label);
        for (j, (_, pts)) in series.iter().enumerate() {
            let colour = COLOURS[j % COLOURS.len()];
            polyline(&mut svg, &f, pts, colour);
            for (x, y) in pts.iter().filter(|(_, y)| y.is_finite()) {
                let _ = write!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{colour}"/>"#, f.x(*x), f.y(*y));
            }
        }
    }
    if let Some((_, series)) = panels.first() {
        for (j, (name, _)) in series.iter().enumerate() {
            let x = MARGIN_L + j as f64 * 170.0;
            let y = height - 10.0;
            let _ = write!(
                svg,
                r#"<rect x="{x:.1}" y="{:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{y:.1}" font-size="12">{}</text>"#,
                y - 10.0,
                COLOURS[j % COLOURS.len()],
                x + 16.0,
                escape(name)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
