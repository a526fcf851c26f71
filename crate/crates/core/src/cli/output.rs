//! CSV and SVG emitters. Output is byte-deterministic for identical input.

use std::fmt::Write as _;

/// C-style `%.{precision}e`: `1.234567890e-07`.
pub fn sci(v: f64, precision: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.precision$e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Header row plus one row per record, LF line endings, trailing newline.
pub fn columns_csv(header: &[&str], columns: &[&[f64]], precision: usize) -> String {
    let rows = columns.first().map_or(0, |c| c.len());
    debug_assert!(columns.iter().all(|c| c.len() == rows));
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| sci(c[i], precision)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Grid metadata line followed by `ny` rows of `nx` values.
pub fn grid_csv(values: &[f64], nx: usize, ny: usize, pitch: (f64, f64), precision: usize) -> String {
    let mut out = format!(
        "# nx={nx} ny={ny} pitch_x={} pitch_y={}\n",
        sci(pitch.0, precision),
        sci(pitch.1, precision)
    );
    for row in values.chunks(nx).take(ny) {
        let cells: Vec<String> = row.iter().map(|v| sci(*v, precision)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn svg_open(out: &mut String) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of several series over a shared x axis.
pub fn line_plot(x: &[f64], series: &[(String, Vec<f64>)], x_label: &str, y_label: &str) -> String {
    let (x0, x1) = bounds(x.iter().copied());
    let (y0, y1) = bounds(series.iter().flat_map(|(_, v)| v.iter().copied()));
    let (y0, y1) = (y0.min(0.0), if y1 > y0 { y1 } else { y0 + 1.0 });
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    svg_open(&mut out);
    axes(&mut out, (x0, x1), (y0, y1), x_label, y_label);
    for (k, (name, ys)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = x
            .iter()
            .zip(ys)
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
        let ly = MARGIN + 16.0 * k as f64;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            lx + 20.0
        );
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", lx + 26.0, ly + 4.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

/// Grey-scale heat map of a row-major grid; row 0 is drawn at the bottom.
pub fn heat_map(values: &[f64], nx: usize, ny: usize, x_range: (f64, f64), y_range: (f64, f64)) -> String {
    let (lo, hi) = bounds(values.iter().copied());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cw = (WIDTH - 2.0 * MARGIN) / nx as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / ny as f64;
    let mut out = String::new();
    svg_open(&mut out);
    for iy in 0..ny {
        for ix in 0..nx {
            let level = (((values[iy * nx + ix] - lo) / span) * 255.0).round() as u8;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#{level:02x}{level:02x}{level:02x}\"/>",
                MARGIN + ix as f64 * cw,
                HEIGHT - MARGIN - (iy + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    axes(&mut out, x_range, y_range, "x (m)", "y (m)");
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo, lo + 1.0)
    } else {
        (lo, hi)
    }
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        "<path d=\"M{l},{t} L{l},{b} L{r},{b}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(out, "<text x=\"{l}\" y=\"{:.2}\">{}</text>", b + 16.0, sci(x.0, 2));
    let _ = writeln!(out, "<text x=\"{r}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", b + 16.0, sci(x.1, 2));
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{b}\" text-anchor=\"end\">{}</text>", l - 4.0, sci(y.0, 2));
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", l - 4.0, t + 4.0, sci(y.1, 2));
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        0.5 * (l + r),
        b + 36.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        0.5 * (t + b),
        0.5 * (t + b),
        escape(y_label)
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponents() {
        assert_eq!(sci(1.23456789012e-7, 9), "1.234567890e-07");
        assert_eq!(sci(0.0, 3), "0.000e+00");
        assert_eq!(sci(-2.5e123, 1), "-2.5e+123");
        assert_eq!(sci(1.0, 9), "1.000000000e+00");
        assert_eq!(sci(f64::NAN, 9), "nan");
    }

    #[test]
    fn csv_layout() {
        let csv = columns_csv(&["y_m", "rate"], &[&[0.0, 1e-7], &[1.0, 0.5]], 3);
        assert_eq!(csv, "y_m,rate\n0.000e+00,1.000e+00\n1.000e-07,5.000e-01\n");
        let g = grid_csv(&[1.0, 2.0, 3.0, 4.0], 2, 2, (1e-8, 2e-8), 2);
        assert_eq!(g, "# nx=2 ny=2 pitch_x=1.00e-08 pitch_y=2.00e-08\n1.00e+00,2.00e+00\n3.00e+00,4.00e+00\n");
    }

    #[test]
    fn svg_is_well_formed() {
        let s = line_plot(&[0.0, 1.0], &[("a<b".into(), vec![1.0, 0.0])], "y", "I");
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
        assert_eq!(s.matches("<polyline").count(), 1);
        let h = heat_map(&[0.0, 1.0, 0.5, 0.25], 2, 2, (-1.0, 1.0), (-1.0, 1.0));
        assert_eq!(h.matches("<rect").count(), 5);
        assert!(h.contains("#ffffff") && h.contains("#000000"));
    }
}
