//! Three-panel line chart: one panel per noise kind, one polyline per motion
//! length with a ±1 std band, ζ on the x axis at evenly spaced grid points.

use std::fmt::Write;

use super::report::{ExperimentReport, ReportCell};

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 270.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 14.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

fn short(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&x.abs()) {
        format!("{}", (x * 1e4).round() / 1e4)
    } else {
        format!("{x:.2e}")
    }
}

pub fn render_svg(report: &ExperimentReport) -> String {
    let kinds = report.kinds();
    let lengths = report.lengths();
    let width = PANEL_W * kinds.len().max(1) as f64;
    let height = PANEL_H + 24.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (p, kind) in kinds.iter().enumerate() {
        let x0 = p as f64 * PANEL_W;
        let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
        let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
        let (left, top) = (x0 + MARGIN_L, MARGIN_T);

        let mut zetas: Vec<f64> = report
            .cells()
            .iter()
            .filter(|c| c.kind == *kind)
            .map(|c| c.zeta)
            .collect();
        zetas.sort_by(f64::total_cmp);
        zetas.dedup();
        let y_max = report
            .cells()
            .iter()
            .filter(|c| c.kind == *kind)
            .map(|c| c.mean_fmd + c.std_fmd)
            .fold(0.0f64, f64::max);
        let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
        let px = |z: f64| {
            let i = zetas.iter().position(|v| *v == z).unwrap_or(0);
            let span = (zetas.len().max(2) - 1) as f64;
            left + plot_w * i as f64 / span
        };
        let py = |v: f64| top + plot_h * (1.0 - (v / y_max).clamp(0.0, 1.0));

        let _ = writeln!(s, r#"<g class="panel" id="panel-{kind}">"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="18" text-anchor="middle" font-size="13" font-weight="bold">{kind}</text>"#,
            left + plot_w / 2.0
        );
        let _ = writeln!(
            s,
            r##"<path d="M{left},{top} V{} H{}" fill="none" stroke="#333"/>"##,
            top + plot_h,
            left + plot_w
        );
        for z in &zetas {
            let x = px(*z);
            let _ = writeln!(
                s,
                r#"<text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
                top + plot_h + 14.0,
                short(*z)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">ζ</text>"#,
            left + plot_w / 2.0,
            top + plot_h + 32.0
        );
        for frac in [0.0, 0.5, 1.0] {
            let v = y_max * frac;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                left - 4.0,
                py(v) + 4.0,
                short(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<text transform="translate({},{}) rotate(-90)" text-anchor="middle">mean FMD</text>"#,
            x0 + 14.0,
            top + plot_h / 2.0
        );

        for (li, &length) in lengths.iter().enumerate() {
            let series: Vec<&ReportCell> = report.series(*kind, length);
            if series.is_empty() {
                continue;
            }
            let color = PALETTE[li % PALETTE.len()];
            let upper: Vec<String> = series
                .iter()
                .map(|c| format!("{:.2},{:.2}", px(c.zeta), py(c.mean_fmd + c.std_fmd)))
                .collect();
            let lower: Vec<String> = series
                .iter()
                .rev()
                .map(|c| format!("{:.2},{:.2}", px(c.zeta), py((c.mean_fmd - c.std_fmd).max(0.0))))
                .collect();
            let _ = writeln!(
                s,
                r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
            let line: Vec<String> = series
                .iter()
                .map(|c| format!("{:.2},{:.2}", px(c.zeta), py(c.mean_fmd)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline class="series" data-length="{length}" points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                line.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" fill="{color}">L={length}</text>"#,
                left + 8.0,
                top + 12.0 + 13.0 * li as f64
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
