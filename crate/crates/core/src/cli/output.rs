//! CSV and SVG emission.

use std::fmt::Write as _;

/// Formats a value with 12 significant digits; `-0` prints as `0`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// A rectangular table with `#` metadata lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(meta: Vec<String>, columns: Vec<String>) -> Self {
        Self { meta, columns, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for m in &self.meta {
            let _ = writeln!(out, "# {m}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Line plot of every column against the first one.
    pub fn to_svg(&self, title: &str) -> String {
        render_svg(title, self)
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn render_svg(title: &str, t: &Table) -> String {
    let (w, h) = (900.0, 540.0);
    let (left, right, top, bottom) = (80.0, 200.0, 40.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;

    let finite = |v: f64| v.is_finite();
    let xs: Vec<f64> = t.rows.iter().map(|r| r[0]).collect();
    let (mut x0, mut x1) = min_max(xs.iter().copied().filter(|v| finite(*v)));
    let (mut y0, mut y1) = min_max(t.rows.iter().flat_map(|r| r[1..].iter().copied()).filter(|v| finite(*v)));
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            sx(xv),
            top + ph + 18.0,
            short(xv)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            sy(yv) + 4.0,
            short(yv)
        );
    }
    if let Some(xl) = t.columns.first() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            h - 16.0,
            escape(xl)
        );
    }
    for (k, name) in t.columns.iter().enumerate().skip(1) {
        let color = PALETTE[(k - 1) % PALETTE.len()];
        let mut pts = String::new();
        for r in &t.rows {
            if r[0].is_finite() && r[k].is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(r[0]), sy(r[k]));
            }
        }
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#, pts.trim_end());
        let ly = top + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            left + pw + 10.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn min_max(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (a, b) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if a.is_finite() {
        (a, b)
    } else {
        (0.0, 1.0)
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-1234.5), "-1.23450000000e3");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn csv_and_svg() {
        let mut t = Table::new(vec!["k = v".into()], vec!["tau".into(), "value_re".into()]);
        t.rows.push(vec![0.0, 0.0]);
        t.rows.push(vec![1.0, 0.5]);
        let csv = t.to_csv();
        assert_eq!(csv, "# k = v\ntau,value_re\n0,0\n1.00000000000e0,5.00000000000e-1\n");
        let svg = t.to_svg("a < b");
        assert!(svg.starts_with("<svg") && svg.contains("polyline") && svg.contains("a &lt; b"));
    }
}
