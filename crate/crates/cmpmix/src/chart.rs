//! Observed bars with fitted expected counts overlaid.

use std::fmt::Write as _;

use cmpmix_core::FrequencyTable;

/// One fitted column to overlay.
#[derive(Debug, Clone, Copy)]
pub struct Overlay<'a> {
    pub name: &'a str,
    pub expected: &'a [f64],
}

const MARKERS: [char; 4] = ['●', '◆', '▲', '■'];
const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"];

fn row_label(data: &FrequencyTable, i: usize) -> String {
    data.label_at(i)
}

fn scale_max(data: &FrequencyTable, overlays: &[Overlay]) -> f64 {
    let observed = data.counts().iter().map(|&c| c as f64);
    let fitted = overlays.iter().flat_map(|o| o.expected.iter().copied());
    observed.chain(fitted).fold(0.0, f64::max).max(1.0)
}

/// Unicode chart: one row per support value, a bar for the observed count
/// and one marker per overlay at its expected count.
pub fn text_chart(data: &FrequencyTable, overlays: &[Overlay], width: usize) -> String {
    let max = scale_max(data, overlays);
    let col = |v: f64| ((v / max) * width as f64).round() as usize;
    let label_width = (0..data.counts().len())
        .map(|i| row_label(data, i).chars().count())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (k, o) in overlays.iter().enumerate() {
        let _ = writeln!(out, "{} {}", MARKERS[k % MARKERS.len()], o.name);
    }
    for (i, &count) in data.counts().iter().enumerate() {
        let mut cells: Vec<char> = vec![' '; width + 1];
        for cell in cells.iter_mut().take(col(count as f64)) {
            *cell = '█';
        }
        for (k, o) in overlays.iter().enumerate() {
            cells[col(o.expected[i]).min(width)] = MARKERS[k % MARKERS.len()];
        }
        let bar: String = cells.into_iter().collect();
        let fitted: Vec<String> = overlays
            .iter()
            .map(|o| format!("{:.1}", o.expected[i]))
            .collect();
        let _ = writeln!(
            out,
            "{:>lw$} │{} {}{}",
            row_label(data, i),
            bar.trim_end(),
            count,
            if fitted.is_empty() {
                String::new()
            } else {
                format!(" / {}", fitted.join(" / "))
            },
            lw = label_width
        );
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Standalone SVG document.
pub fn svg_chart(data: &FrequencyTable, overlays: &[Overlay], title: &str) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (50.0, 20.0, 40.0, 60.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let n = data.counts().len().max(1) as f64;
    let slot = plot_w / n;
    let max = scale_max(data, overlays);
    let y = |v: f64| top + plot_h * (1.0 - v / max);
    let x_mid = |i: usize| left + slot * (i as f64 + 0.5);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<line x1="{left}" y1="{}" x2="{}" y2="{}" stroke="#333"/>"##,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    let _ = writeln!(
        s,
        r##"<line x1="{left}" y1="{top}" x2="{left}" y2="{}" stroke="#333"/>"##,
        top + plot_h
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{:.0}</text>"#,
        left - 4.0,
        top + 4.0,
        max
    );
    for (i, &c) in data.counts().iter().enumerate() {
        let bar_w = slot * 0.7;
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#bbbbbb"/>"##,
            x_mid(i) - bar_w / 2.0,
            y(c as f64),
            bar_w,
            top + plot_h - y(c as f64)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
            x_mid(i),
            top + plot_h + 16.0,
            escape(&row_label(data, i))
        );
    }
    for (k, o) in overlays.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = o
            .expected
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", x_mid(i), y(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            points.join(" ")
        );
        for (i, &v) in o.expected.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                x_mid(i),
                y(v)
            );
        }
        let ly = h - 30.0 + 14.0 * k as f64 / 2.0;
        let lx = left + 150.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{lx}" cy="{ly}" r="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            lx + 8.0,
            ly + 4.0,
            escape(o.name)
        );
    }
    s.push_str("</svg>\n");
    s
}
