//! Minimal native SVG rendering: line plots, cell grids, grouped bars and
//! contour maps. Coordinates are printed with fixed precision so that
//! identical data always yields identical files.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(out, "<text x=\"{:.1}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>", WIDTH / 2.0, escape(title));
}

/// Tick positions covering `[lo, hi]` with a 1-2-5 step.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Linear map of a data range onto the plot frame.
#[derive(Clone, Copy)]
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
        let _ = writeln!(out, "<rect x=\"{x0:.1}\" y=\"{y1:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>", x1 - x0, y0 - y1);
        for t in ticks(self.x.0, self.x.1) {
            let x = self.px(t);
            let _ = writeln!(out, "<line x1=\"{x:.2}\" y1=\"{y0:.1}\" x2=\"{x:.2}\" y2=\"{:.1}\" stroke=\"black\"/>", y0 + 5.0);
            let _ = writeln!(out, "<text x=\"{x:.2}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", y0 + 18.0, tick_label(t));
        }
        for t in ticks(self.y.0, self.y.1) {
            let y = self.py(t);
            let _ = writeln!(out, "<line x1=\"{:.1}\" y1=\"{y:.2}\" x2=\"{x0:.1}\" y2=\"{y:.2}\" stroke=\"black\"/>", x0 - 5.0);
            let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", x0 - 8.0, y + 4.0, tick_label(t));
        }
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, HEIGHT - 12.0, escape(x_label));
        let _ = writeln!(
            out,
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(y_label)
        );
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = writeln!(out, "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"12\" height=\"4\" fill=\"{}\"/>", y - 4.0, color(i));
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{y:.1}\">{}</text>", x + 18.0, escape(name));
    }
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Line plot of several series on shared axes.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let all = || series.iter().flat_map(|s| s.points.iter());
    let frame = Frame::new(bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1)));
    frame.axes(&mut out, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_down = false;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, frame.px(x), frame.py(y));
            pen_down = true;
        }
        let _ = writeln!(out, "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>", d.trim_end(), color(i));
    }
    let names: Vec<&str> = series.iter().map(|s| s.name.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Cell grid of a matrix modulus (darker is larger), optionally with a phase
/// handle per cell pointing along `arg`.
pub fn cell_plot(title: &str, modulus: &[Vec<f64>], phase: Option<&[Vec<f64>]>) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let rows = modulus.len();
    let cols = modulus.first().map_or(0, Vec::len);
    let peak = bounds(modulus.iter().flatten().copied()).1.max(f64::MIN_POSITIVE);
    let size = ((WIDTH - LEFT - RIGHT) / cols.max(1) as f64).min((HEIGHT - TOP - BOTTOM) / rows.max(1) as f64);
    for (i, row) in modulus.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let shade = (255.0 * (1.0 - (v / peak).clamp(0.0, 1.0))).round() as u8;
            let (x, y) = (LEFT + j as f64 * size, TOP + i as f64 * size);
            let _ = writeln!(
                out,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{size:.2}\" height=\"{size:.2}\" fill=\"rgb({shade},{shade},{shade})\" stroke=\"#cccccc\" stroke-width=\"0.3\"/>"
            );
            if let Some(ph) = phase {
                let r = 0.45 * size * (v / peak).clamp(0.0, 1.0);
                if r > 0.05 * size {
                    let (cx, cy) = (x + size / 2.0, y + size / 2.0);
                    let a = ph[i][j];
                    let _ = writeln!(
                        out,
                        "<line x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#d62728\" stroke-width=\"1\"/>",
                        cx + r * a.cos(),
                        cy - r * a.sin()
                    );
                }
            }
        }
    }
    let _ = writeln!(out, "<text x=\"{LEFT:.1}\" y=\"{:.1}\">rows: {rows}, columns: {cols}, peak {:.4}</text>", HEIGHT - 12.0, peak);
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: one group per category, one bar per named value set.
pub fn bar_chart(title: &str, y_label: &str, categories: &[String], groups: &[(String, Vec<f64>)]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let (lo, hi) = bounds(groups.iter().flat_map(|g| g.1.iter().copied()));
    let frame = Frame::new((0.0, categories.len().max(1) as f64), (lo.min(0.0), hi.max(0.0)));
    frame.axes(&mut out, "mode", y_label);
    let width = 0.8 / groups.len().max(1) as f64;
    for (gi, (_, values)) in groups.iter().enumerate() {
        for (ci, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let x0 = frame.px(ci as f64 + 0.1 + gi as f64 * width);
            let x1 = frame.px(ci as f64 + 0.1 + (gi as f64 + 1.0) * width);
            let (ya, yb) = (frame.py(0.0), frame.py(v));
            let _ = writeln!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                ya.min(yb),
                x1 - x0,
                (ya - yb).abs(),
                color(gi)
            );
        }
    }
    for (ci, c) in categories.iter().enumerate() {
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"9\">{}</text>", frame.px(ci as f64 + 0.5), TOP - 4.0, escape(c));
    }
    let names: Vec<&str> = groups.iter().map(|g| g.0.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Line segments of the `level` isoline of `field[i][j]` sampled at `(x[j], y[i])`
/// (marching squares, saddles resolved by the cell mean).
pub fn marching_squares(x: &[f64], y: &[f64], field: &[Vec<f64>], level: f64) -> Vec<((f64, f64), (f64, f64))> {
    let mut segs = Vec::new();
    for i in 0..y.len().saturating_sub(1) {
        for j in 0..x.len().saturating_sub(1) {
            let corners = [
                (x[j], y[i], field[i][j]),
                (x[j + 1], y[i], field[i][j + 1]),
                (x[j + 1], y[i + 1], field[i + 1][j + 1]),
                (x[j], y[i + 1], field[i + 1][j]),
            ];
            let code = corners.iter().enumerate().fold(0u8, |c, (k, p)| c | (u8::from(p.2 >= level) << k));
            if code == 0 || code == 15 {
                continue;
            }
            let edge = |a: usize, b: usize| {
                let (pa, pb) = (corners[a], corners[b]);
                let t = if pb.2 != pa.2 { (level - pa.2) / (pb.2 - pa.2) } else { 0.5 };
                (pa.0 + t * (pb.0 - pa.0), pa.1 + t * (pb.1 - pa.1))
            };
            // Edges: 0 bottom (0-1), 1 right (1-2), 2 top (2-3), 3 left (3-0).
            let e = [edge(0, 1), edge(1, 2), edge(2, 3), edge(3, 0)];
            let mean = corners.iter().map(|p| p.2).sum::<f64>() / 4.0;
            let pairs: &[(usize, usize)] = match code {
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(2, 3)],
                5 if mean >= level => &[(3, 2), (0, 1)],
                5 => &[(3, 0), (1, 2)],
                10 if mean >= level => &[(3, 0), (1, 2)],
                10 => &[(0, 1), (2, 3)],
                _ => &[],
            };
            segs.extend(pairs.iter().map(|&(a, b)| (e[a], e[b])));
        }
    }
    segs
}

/// Isolines of `field` at each `(label, level)`.
pub fn contour_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    y: &[f64],
    field: &[Vec<f64>],
    levels: &[(String, f64)],
) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let frame = Frame::new(bounds(x.iter().copied()), bounds(y.iter().copied()));
    frame.axes(&mut out, x_label, y_label);
    for (li, (_, level)) in levels.iter().enumerate() {
        let mut d = String::new();
        for (a, b) in marching_squares(x, y, field, *level) {
            let _ = write!(d, "M{:.2},{:.2} L{:.2},{:.2} ", frame.px(a.0), frame.py(a.1), frame.px(b.0), frame.py(b.1));
        }
        let _ = writeln!(out, "<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\"/>", d.trim_end(), color(li));
    }
    let names: Vec<&str> = levels.iter().map(|l| l.0.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_use_round_steps() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(ticks(-3.0, 3.0).len(), 7);
    }

    #[test]
    fn circle_isoline_stays_on_radius() {
        let g: Vec<f64> = (0..41).map(|i| -1.0 + i as f64 * 0.05).collect();
        let field: Vec<Vec<f64>> = g.iter().map(|&y| g.iter().map(|&x| (-(x * x + y * y)).exp()).collect()).collect();
        let level = (-0.25f64).exp();
        let segs = marching_squares(&g, &g, &field, level);
        assert!(segs.len() > 20);
        for (a, b) in segs {
            for p in [a, b] {
                assert!(((p.0 * p.0 + p.1 * p.1).sqrt() - 0.5).abs() < 0.01);
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let s = [Series { name: "a".into(), points: vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 3.0)] }];
        assert_eq!(line_plot("t", "x", "y", &s), line_plot("t", "x", "y", &s));
        assert!(line_plot("t", "x", "y", &s).starts_with("<svg"));
    }
}
