//! Self-contained SVG figures: Wigner heatmaps with the `W = 0` contour and
//! simple line charts.

use std::fmt::Write;

use catforge_core::phase_space::WignerGrid;

const PLOT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const LEGEND: f64 = 110.0;
/// Heatmap cells per axis at most; the contour uses the full grid.
const MAX_CELLS: usize = 160;
/// Corners below this fraction of `max |W|` do not seed contour segments.
const CONTOUR_FLOOR: f64 = 1e-6;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Blue for negative, white at zero, red for positive; `t ∈ [−1, 1]`.
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let s = -t;
        (
            255.0 - s * (255.0 - 33.0),
            255.0 - s * (255.0 - 102.0),
            255.0 - s * (255.0 - 172.0),
        )
    } else {
        (
            255.0 - t * (255.0 - 178.0),
            255.0 - t * (255.0 - 24.0),
            255.0 - t * (255.0 - 43.0),
        )
    };
    format!(
        "#{:02x}{:02x}{:02x}",
        r.round() as u8,
        g.round() as u8,
        b.round() as u8
    )
}

fn header(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        MARGIN + PLOT / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Linear-interpolated `W = 0` crossings of every grid cell, as pixel segments.
fn zero_contour(grid: &WignerGrid, px: impl Fn(f64) -> f64, py: impl Fn(f64) -> f64) -> String {
    let (nx, ny) = (grid.axes.nx, grid.axes.ny);
    let floor = CONTOUR_FLOOR * grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut path = String::new();
    for i in 0..nx.saturating_sub(1) {
        for j in 0..ny.saturating_sub(1) {
            // corners counter-clockwise from (i, j)
            let c = [
                (i, j, grid.value(i, j)),
                (i + 1, j, grid.value(i + 1, j)),
                (i + 1, j + 1, grid.value(i + 1, j + 1)),
                (i, j + 1, grid.value(i, j + 1)),
            ];
            if c.iter().all(|p| p.2.abs() < floor) {
                continue;
            }
            let mut cross = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (c[e], c[(e + 1) % 4]);
                if (a.2 > 0.0) != (b.2 > 0.0) {
                    let s = a.2 / (a.2 - b.2);
                    let x = grid.axes.x(a.0) + s * (grid.axes.x(b.0) - grid.axes.x(a.0));
                    let y = grid.axes.y(a.1) + s * (grid.axes.y(b.1) - grid.axes.y(a.1));
                    cross.push((px(x), py(y)));
                }
            }
            let pairs: &[(usize, usize)] = match cross.len() {
                2 => &[(0, 1)],
                4 => {
                    // saddle: connect according to the sign of the cell centre
                    let centre = c.iter().map(|p| p.2).sum::<f64>() / 4.0;
                    if (centre > 0.0) == (c[0].2 > 0.0) {
                        &[(0, 3), (1, 2)]
                    } else {
                        &[(0, 1), (2, 3)]
                    }
                }
                _ => &[],
            };
            for (a, b) in pairs {
                let _ = write!(
                    path,
                    "M{:.2} {:.2}L{:.2} {:.2}",
                    cross[*a].0, cross[*a].1, cross[*b].0, cross[*b].1
                );
            }
        }
    }
    path
}

/// Heatmap of `W(x, y)` on a symmetric colour scale with its zero contour
/// and a legend annotated with the extreme values.
pub fn wigner_heatmap(grid: &WignerGrid, title: &str) -> String {
    let a = grid.axes;
    let vmax = grid
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let (x0, x1, y0, y1) = (a.x0, a.x_end(), a.y0, a.y_end());
    let px = move |x: f64| MARGIN + (x - x0) / (x1 - x0) * PLOT;
    let py = move |y: f64| MARGIN + (y1 - y) / (y1 - y0) * PLOT;
    let width = MARGIN + PLOT + LEGEND;
    let height = 2.0 * MARGIN + PLOT;
    let mut out = String::new();
    header(&mut out, width, height, title);

    let sx = a.nx.div_ceil(MAX_CELLS).max(1);
    let sy = a.ny.div_ceil(MAX_CELLS).max(1);
    let cells_x = a.nx.div_ceil(sx);
    let cells_y = a.ny.div_ceil(sy);
    let cw = PLOT / cells_x as f64;
    let ch = PLOT / cells_y as f64;
    let _ = writeln!(out, r#"<g shape-rendering="crispEdges">"#);
    for ci in 0..cells_x {
        for cj in 0..cells_y {
            let v = grid.value((ci * sx).min(a.nx - 1), (cj * sy).min(a.ny - 1));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                MARGIN + ci as f64 * cw,
                MARGIN + PLOT - (cj + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05,
                diverging(v / vmax)
            );
        }
    }
    let _ = writeln!(out, "</g>");
    let contour = zero_contour(grid, px, py);
    if !contour.is_empty() {
        let _ = writeln!(
            out,
            r#"<path d="{contour}" fill="none" stroke="black" stroke-width="0.8"/>"#
        );
    }
    axes_frame(&mut out, (x0, x1), (y0, y1), "X", "Y");

    // colour bar
    let bx = MARGIN + PLOT + 30.0;
    let steps = 64;
    for s in 0..steps {
        let t = 1.0 - 2.0 * (s as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{bx:.1}" y="{:.2}" width="18" height="{:.2}" fill="{}"/>"#,
            MARGIN + s as f64 * PLOT / steps as f64,
            PLOT / steps as f64 + 0.05,
            diverging(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{bx:.1}" y="{MARGIN}" width="18" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    let label = |out: &mut String, y: f64, text: String| {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{y:.1}">{text}</text>"#,
            bx + 24.0
        );
    };
    label(&mut out, MARGIN + 10.0, format!("+{vmax:.3e}"));
    label(&mut out, MARGIN + PLOT / 2.0 + 4.0, "0".into());
    label(&mut out, MARGIN + PLOT, format!("-{vmax:.3e}"));
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}">min {:.4e}</text>"#,
        MARGIN + PLOT + 10.0,
        height - 30.0,
        grid.min()
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}">max {:.4e}</text>"#,
        MARGIN + PLOT + 10.0,
        height - 14.0,
        grid.max()
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}">black line: W = 0</text>"#,
        MARGIN,
        height - 14.0
    );
    out.push_str("</svg>\n");
    out
}

fn axes_frame(out: &mut String, (x0, x1): (f64, f64), (y0, y1): (f64, f64), xl: &str, yl: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT}" height="{PLOT}" fill="none" stroke="black"/>"#
    );
    let bottom = MARGIN + PLOT;
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{:.1}">{x0:.3}</text>"#,
        bottom + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{x1:.3}</text>"#,
        MARGIN + PLOT,
        bottom + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        MARGIN + PLOT / 2.0,
        bottom + 32.0,
        escape(xl)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{bottom:.1}" text-anchor="end">{y0:.3}</text>"#,
        MARGIN - 4.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{y1:.3}</text>"#,
        MARGIN - 4.0,
        MARGIN + 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">{}</text>"#,
        MARGIN + PLOT / 2.0,
        MARGIN + PLOT / 2.0,
        escape(yl)
    );
}

/// A named curve for [`line_chart`].
pub struct Series<'a> {
    pub label: &'a str,
    pub points: &'a [(f64, f64)],
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * PLOT;
    let py = |y: f64| MARGIN + (y1 - y) / (y1 - y0) * PLOT;
    let width = MARGIN + PLOT + LEGEND;
    let mut out = String::new();
    header(&mut out, width, 2.0 * MARGIN + PLOT, title);
    for (idx, s) in series.iter().enumerate() {
        let colour = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN + 16.0 * idx as f64 + 8.0;
        let lx = MARGIN + PLOT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 22.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    axes_frame(&mut out, (x0, x1), (y0, y1), x_label, y_label);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use catforge_core::phase_space::{wigner, GridAxes, GridSpec};
    use catforge_core::OpticalState;

    #[test]
    fn colour_scale_endpoints() {
        assert_eq!(diverging(0.0), "#ffffff");
        assert_eq!(diverging(-1.0), "#2166ac");
        assert_eq!(diverging(1.0), "#b2182b");
    }

    #[test]
    fn fock_one_contour_is_the_zero_circle() {
        let spec = GridSpec::Fixed(GridAxes::centered(0.0, 0.0, 5.0, 101).unwrap());
        let grid = wigner(&OpticalState::fock(1, 10), &spec).unwrap();
        let px = |x: f64| x;
        let path = zero_contour(&grid, px, px);
        assert!(!path.is_empty());
        let r0 = std::f64::consts::FRAC_1_SQRT_2;
        for seg in path.split('M').filter(|s| !s.is_empty()) {
            for pt in seg.split('L') {
                let v: Vec<f64> = pt.split(' ').map(|t| t.parse().unwrap()).collect();
                let r = (v[0] * v[0] + v[1] * v[1]).sqrt();
                assert!((r - r0).abs() < 0.02, "{r}");
            }
        }
        let svg = wigner_heatmap(&grid, "Fock 1");
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("min -3.1831e-1"));
    }

    #[test]
    fn line_chart_has_one_polyline_per_series() {
        let a = [(0.0, 0.0), (1.0, 1.0)];
        let b = [(0.0, 1.0), (1.0, 0.0)];
        let svg = line_chart(
            "t",
            "x",
            "y",
            &[
                Series {
                    label: "a",
                    points: &a,
                },
                Series {
                    label: "b",
                    points: &b,
                },
            ],
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
