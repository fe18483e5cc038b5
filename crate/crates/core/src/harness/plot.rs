//! Minimal SVG line charts from CSV columns.

use std::fmt::Write as _;

use super::HarnessError;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse_csv(text: &str) -> Result<Self, HarnessError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| HarnessError::Config("empty CSV".into()))?;
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| HarnessError::Config(format!("CSV line {}: non-numeric value", i + 1)))?;
            if row.len() != header.len() {
                return Err(HarnessError::Config(format!("CSV line {}: {} columns, header has {}", i + 1, row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(hi > lo) {
        return (lo - 0.5, lo + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One polyline per column whose name starts with any of `prefixes` (all
/// non-x columns when empty), against the first column.
pub fn line_chart(table: &Table, prefixes: &[String], title: &str) -> Result<String, HarnessError> {
    if table.header.len() < 2 || table.rows.is_empty() {
        return Err(HarnessError::Config("need at least two columns and one row to plot".into()));
    }
    let x_name = &table.header[0];
    let series: Vec<usize> = (1..table.header.len())
        .filter(|&j| prefixes.is_empty() || prefixes.iter().any(|p| table.header[j].starts_with(p.as_str())))
        .collect();
    if series.is_empty() {
        return Err(HarnessError::Config(format!("no columns match {prefixes:?}")));
    }
    let xs: Vec<f64> = table.rows.iter().map(|r| r[0]).collect();
    let ys = series.iter().flat_map(|&j| table.rows.iter().map(move |r| r[j]));
    let (x0, x1) = nice_range(xs.iter().copied().fold(f64::INFINITY, f64::min), xs.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = {
        let (lo, hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        nice_range(lo, hi)
    };
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let y_label = if prefixes.is_empty() { "value".to_string() } else { prefixes.join(", ") };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<polyline class="axis" points="{l},{t} {l},{b} {r},{b}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{:.3}</text>"#, px(fx), b + 16.0, fx);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{:.3}</text>"#, l - 6.0, py(fy) + 4.0, fy);
    }
    let _ = writeln!(s, r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#, WIDTH / 2.0, HEIGHT - 18.0, escape(x_name));
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&y_label)
    );
    for (k, &j) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = table.rows.iter().map(|row| format!("{:.2},{:.2}", px(row[0]), py(row[j]))).collect();
        let _ = writeln!(s, r#"<polyline class="series" data-column="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, escape(&table.header[j]), pts.join(" "));
        let ly = t + 14.0 * k as f64;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, r + 4.0, ly, escape(&table.header[j]));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polyline_per_column() {
        let t = Table::parse_csv("iteration,best_0,best_1,score_0\n0,0.1,0.2,0.3\n20,0.5,0.4,0.6\n").unwrap();
        let svg = line_chart(&t, &["best_".to_string()], "trace").unwrap();
        assert_eq!(svg.matches("class=\"series\"").count(), 2);
        assert!(svg.contains(">iteration</text>"));
        let all = line_chart(&t, &[], "trace").unwrap();
        assert_eq!(all.matches("class=\"series\"").count(), 3);
    }

    #[test]
    fn rejects_ragged_rows() {
        assert!(Table::parse_csv("a,b\n1,2\n3\n").is_err());
    }
}
