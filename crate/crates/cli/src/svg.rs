//! Minimal SVG charts for the report files.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 64.0;
const PALETTE: [&str; 8] = ["#1b6ca8", "#e07b39", "#3a9d5d", "#c0392b", "#8e6bb8", "#7f6a4f", "#d16fa8", "#7a7a7a"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let step = 10f64.powf(v.log10().floor());
    (v / step).ceil() * step
}

fn frame(title: &str, y_label: &str, y_max: f64, body: &str, legend: &[String]) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    for k in 0..=4 {
        let v = y_max * f64::from(k) / 4.0;
        let y = TOP + plot_h * (1.0 - f64::from(k) / 4.0);
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>",
            LEFT + plot_w
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.0}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text transform="translate(14,{:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        escape(y_label)
    );
    s.push_str(body);
    for (i, name) in legend.iter().enumerate() {
        let y = TOP + 16.0 * i as f64;
        let x = WIDTH - RIGHT + 12.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{y}" width="10" height="10" fill="{}"/>"#, PALETTE[i % PALETTE.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 14.0, y + 9.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

/// Bars grouped by category, one colour per series. `values[c][s]`.
pub fn grouped_bars(title: &str, y_label: &str, categories: &[String], series: &[String], values: &[Vec<Option<f64>>]) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y_max = nice_max(values.iter().flatten().flatten().fold(0.0, |a: f64, &b| a.max(b)));
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    let mut body = String::new();
    for (c, name) in categories.iter().enumerate() {
        let x0 = LEFT + group_w * c as f64 + group_w * 0.1;
        for (k, v) in values[c].iter().enumerate() {
            if let Some(v) = v {
                let h = plot_h * v / y_max;
                let _ = writeln!(
                    body,
                    r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="{}"><title>{v}</title></rect>"#,
                    x0 + bar_w * k as f64,
                    TOP + plot_h - h,
                    bar_w,
                    PALETTE[k % PALETTE.len()]
                );
            }
        }
        let _ = writeln!(
            body,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + group_w * (c as f64 + 0.5),
            TOP + plot_h + 16.0,
            escape(name)
        );
    }
    frame(title, y_label, y_max, &body, series)
}

/// One polyline per series over integer x positions. `values[s][x]`.
pub fn lines(title: &str, y_label: &str, series: &[String], values: &[Vec<f64>]) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y_max = nice_max(values.iter().flatten().fold(0.0, |a: f64, &b| a.max(b)));
    let n = values.iter().map(Vec::len).max().unwrap_or(0);
    let x_of = |i: usize| LEFT + plot_w * (i as f64 + 0.5) / n.max(1) as f64;
    let mut body = String::new();
    for (k, ys) in values.iter().enumerate() {
        let pts: Vec<String> =
            ys.iter().enumerate().map(|(i, y)| format!("{:.1},{:.1}", x_of(i), TOP + plot_h * (1.0 - y / y_max))).collect();
        let _ = writeln!(
            body,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            PALETTE[k % PALETTE.len()]
        );
    }
    for i in 0..n {
        let _ = writeln!(body, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{i}</text>"#, x_of(i), TOP + plot_h + 16.0);
    }
    frame(title, y_label, y_max, &body, series)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed() {
        let bars = grouped_bars("t", "y", &["a".into(), "b<".into()], &["s".into()], &[vec![Some(2.0)], vec![None]]);
        assert!(bars.starts_with("<svg") && bars.trim_end().ends_with("</svg>"));
        assert!(bars.contains("b&lt;"));
        assert_eq!(bars.matches("<title>").count(), 1);
        let l = lines("t", "y", &["s".into()], &[vec![1.0, 2.0, 3.0]]);
        assert_eq!(l.matches("<polyline").count(), 1);
    }
}
