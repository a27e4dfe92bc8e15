//! Minimal SVG writers for heatmaps and line charts.

use std::fmt::Write;

/// Color stops of a perceptually ordered dark-to-bright map.
const STOPS: [(f64, [u8; 3]); 5] = [
    (0.00, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.50, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.00, [253, 231, 37]),
];

/// Linear interpolation in the color map; `u` is clamped to [0, 1].
pub fn color(u: f64) -> String {
    let u = if u.is_finite() { u.clamp(0.0, 1.0) } else { 0.0 };
    let mut i = 0;
    while i + 2 < STOPS.len() && u > STOPS[i + 1].0 {
        i += 1;
    }
    let (u0, c0) = STOPS[i];
    let (u1, c1) = STOPS[i + 1];
    let w = (u - u0) / (u1 - u0);
    let mix = |a: u8, b: u8| (a as f64 + w * (b as f64 - a as f64)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2]))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Heatmap of `values[j * nx + i]` (row j, column i) over the given axes.
/// `None` cells are drawn white. Scale bounds go into `<metadata>`.
pub fn heatmap(
    title: &str,
    x_label: &str,
    xs: &[f64],
    y_label: &str,
    ys: &[f64],
    values: &[Option<f64>],
) -> String {
    let nx = xs.len();
    let ny = ys.len();
    assert_eq!(values.len(), nx * ny, "heatmap value count");
    let finite: Vec<f64> = values.iter().flatten().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (cell_w, cell_h) = (12.0, 12.0);
    let (left, top) = (70.0, 40.0);
    let width = left + cell_w * nx as f64 + 110.0;
    let height = top + cell_h * ny as f64 + 60.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        s,
        r#"<metadata>{{"title":"{}","scale_min":{},"scale_max":{},"ok_cells":{}}}</metadata>"#,
        escape(title),
        if finite.is_empty() { "null".into() } else { format!("{lo:e}") },
        if finite.is_empty() { "null".into() } else { format!("{hi:e}") },
        finite.len()
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="24" font-family="sans-serif" font-size="14">{}</text>"#,
        escape(title)
    );
    for j in 0..ny {
        for i in 0..nx {
            let fill = match values[j * nx + i] {
                Some(v) if v.is_finite() => {
                    let u = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                    color(u)
                }
                _ => "#ffffff".to_string(),
            };
            // Row 0 at the bottom.
            let x = left + cell_w * i as f64;
            let y = top + cell_h * (ny - 1 - j) as f64;
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" fill="{fill}"/>"#
            );
        }
    }
    let bottom = top + cell_h * ny as f64;
    let right = left + cell_w * nx as f64;
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    if let (Some(x0), Some(x1)) = (xs.first(), xs.last()) {
        let _ = writeln!(s, r#"<text x="{left}" y="{}" font-family="sans-serif" font-size="11">{x0:.3}</text>"#, bottom + 14.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{x1:.3}</text>"#, right, bottom + 14.0);
    }
    if let (Some(y0), Some(y1)) = (ys.first(), ys.last()) {
        let _ = writeln!(s, r#"<text x="{}" y="{bottom}" font-family="sans-serif" font-size="11" text-anchor="end">{y0:.3}</text>"#, left - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{y1:.3}</text>"#, left - 4.0, top + 10.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        0.5 * (left + right),
        bottom + 32.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom),
        escape(y_label)
    );
    // Color bar.
    let bx = right + 20.0;
    for k in 0..50 {
        let u = k as f64 / 49.0;
        let y = bottom - (bottom - top) * (k + 1) as f64 / 50.0;
        let _ = writeln!(
            s,
            r#"<rect x="{bx}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            (bottom - top) / 50.0 + 0.5,
            color(u)
        );
    }
    if !finite.is_empty() {
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{hi:.4}</text>"#, bx + 20.0, top + 10.0);
        let _ = writeln!(s, r#"<text x="{}" y="{bottom}" font-family="sans-serif" font-size="11">{lo:.4}</text>"#, bx + 20.0);
    }
    s.push_str("</svg>\n");
    s
}

/// One curve of a [`line_chart`]; `None` points break the line.
pub struct Curve<'a> {
    pub label: &'a str,
    pub ys: &'a [Option<f64>],
    pub color: &'a str,
}

/// Line chart with optional dashed horizontal reference lines.
pub fn line_chart(
    title: &str,
    x_label: &str,
    xs: &[f64],
    curves: &[Curve<'_>],
    references: &[(&str, f64)],
) -> String {
    let all: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.ys.iter().flatten().copied())
        .chain(references.iter().map(|r| r.1))
        .filter(|v| v.is_finite())
        .collect();
    let mut lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        lo = if lo.is_finite() { lo - 0.5 } else { 0.0 };
        hi = lo + 1.0;
    }
    let x0 = xs.first().copied().unwrap_or(0.0);
    let x1 = xs.last().copied().unwrap_or(1.0);
    let (left, top, w, h) = (70.0, 40.0, 480.0, 300.0);
    let px = |x: f64| left + if x1 > x0 { (x - x0) / (x1 - x0) * w } else { 0.5 * w };
    let py = |y: f64| top + h - (y - lo) / (hi - lo) * h;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#,
        left + w + 180.0,
        top + h + 60.0
    );
    let _ = writeln!(
        s,
        r#"<metadata>{{"title":"{}","y_min":{lo:e},"y_max":{hi:e}}}</metadata>"#,
        escape(title)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="24" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{w}" height="{h}" fill="none" stroke="black"/>"#);
    for (k, c) in curves.iter().enumerate() {
        let mut seg: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                    c.color,
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for (x, y) in xs.iter().zip(c.ys) {
            match y {
                Some(y) if y.is_finite() => seg.push(format!("{:.2},{:.2}", px(*x), py(*y))),
                _ => flush(&mut seg, &mut s),
            }
        }
        flush(&mut seg, &mut s);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{}">{}</text>"#,
            left + w + 10.0,
            top + 14.0 * (k + 1) as f64,
            c.color,
            escape(c.label)
        );
    }
    for (k, (label, v)) in references.iter().enumerate() {
        let y = py(*v);
        let _ = writeln!(
            s,
            r#"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="gray" stroke-dasharray="5,4"/>"#,
            left + w
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="gray">{}</text>"#,
            left + w + 10.0,
            top + 14.0 * (curves.len() + k + 1) as f64,
            escape(label)
        );
    }
    let _ = writeln!(s, r#"<text x="{left}" y="{}" font-family="sans-serif" font-size="11">{x0:.3}</text>"#, top + h + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{x1:.3}</text>"#, left + w, top + h + 14.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{lo:.4}</text>"#, left - 4.0, top + h);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{hi:.4}</text>"#, left - 4.0, top + 10.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        left + 0.5 * w,
        top + h + 34.0,
        escape(x_label)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fills(svg: &str) -> Vec<String> {
        svg.lines()
            .filter(|l| l.starts_with("<rect x=") && l.contains(r#"width="12""#))
            .map(|l| {
                let i = l.find("fill=\"").unwrap() + 6;
                l[i..i + 7].to_string()
            })
            .collect()
    }

    fn luminance(hex: &str) -> f64 {
        let c = |i| u8::from_str_radix(&hex[i..i + 2], 16).unwrap() as f64;
        0.2126 * c(1) + 0.7152 * c(3) + 0.0722 * c(5)
    }

    #[test]
    fn color_map_is_monotone_in_luminance() {
        let l: Vec<f64> = (0..=20).map(|k| luminance(&color(k as f64 / 20.0))).collect();
        assert!(l.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fill_ranks_follow_values() {
        let v = [Some(3.0), Some(1.0), Some(4.0), Some(2.0)];
        let svg = heatmap("t", "x", &[0.0, 1.0], "y", &[0.0, 1.0], &v);
        let f = fills(&svg);
        assert_eq!(f.len(), 4);
        let lum: Vec<f64> = f.iter().map(|c| luminance(c)).collect();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| lum[a].total_cmp(&lum[b]));
        assert_eq!(order, vec![1, 3, 0, 2]);
    }

    #[test]
    fn blank_heatmap() {
        let svg = heatmap("t", "x", &[0.0, 1.0], "y", &[0.0], &[None, None]);
        assert!(fills(&svg).iter().all(|f| f == "#ffffff"));
        assert!(svg.contains(r#""scale_min":null"#));
    }
}
