//! Plain SVG figures: class-coloured cells, a legend and, when diagrams are
//! supplied, hole-centre markers plus a birth-death scatter inset.

use std::fmt::Write;

use cellscape::CellLayout;

use crate::report::DiagramJson;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const PLOT: f64 = 600.0;
const MARGIN: f64 = 20.0;
const SIDE_PANEL: f64 = 220.0;
const INSET: f64 = 160.0;
const CELL_RADIUS: f64 = 3.0;

pub fn class_color(class_id: usize) -> &'static str {
    PALETTE[class_id % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn render(layout: &CellLayout, diagrams: Option<&[DiagramJson]>) -> String {
    let d = layout.domain();
    let scale = PLOT / d.width().max(d.height());
    let (pw, ph) = (d.width() * scale, d.height() * scale);
    let to_px = |x: f64, y: f64| (MARGIN + (x - d.x_min) * scale, MARGIN + (d.y_max - y) * scale);

    let legend_rows = layout.num_classes().max(1) as f64;
    let inset_top = MARGIN + 30.0 + 20.0 * legend_rows;
    let width = MARGIN * 2.0 + pw + SIDE_PANEL;
    let height = (MARGIN * 2.0 + ph).max(inset_top + INSET + 40.0);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        "<rect class=\"canvas\" x=\"{MARGIN:.1}\" y=\"{MARGIN:.1}\" width=\"{pw:.1}\" height=\"{ph:.1}\" fill=\"none\" stroke=\"#333333\"/>"
    );

    let _ = writeln!(s, r#"<g class="cells">"#);
    for c in layout.cells() {
        let (x, y) = to_px(c.pos.x, c.pos.y);
        let _ = writeln!(
            s,
            r#"<circle class="cell" cx="{x:.2}" cy="{y:.2}" r="{CELL_RADIUS}" fill="{}"/>"#,
            class_color(c.class_id)
        );
    }
    let _ = writeln!(s, "</g>");

    let lx = MARGIN * 2.0 + pw;
    let _ = writeln!(s, r#"<g class="legend">"#);
    let _ = writeln!(
        s,
        r#"<text x="{lx:.1}" y="{:.1}" font-family="sans-serif" font-size="13">classes</text>"#,
        MARGIN + 12.0
    );
    for (i, name) in layout.class_names().iter().enumerate() {
        let y = MARGIN + 30.0 + 20.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{y:.1}" r="5" fill="{}"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 5.0,
            class_color(i),
            lx + 16.0,
            y + 4.0,
            escape(name)
        );
    }
    let _ = writeln!(s, "</g>");

    if let Some(diagrams) = diagrams {
        let _ = writeln!(s, r#"<g class="holes">"#);
        for diagram in diagrams {
            for hole in &diagram.holes {
                let (x, y) = to_px(hole.center[0], hole.center[1]);
                let _ = writeln!(
                    s,
                    r#"<path class="hole-marker" d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{}" stroke-width="2"/>"#,
                    x - 5.0,
                    y - 5.0,
                    x + 5.0,
                    y + 5.0,
                    x - 5.0,
                    y + 5.0,
                    x + 5.0,
                    y - 5.0,
                    diagram.class_id.map_or("#000000", class_color)
                );
            }
        }
        let _ = writeln!(s, "</g>");
        render_inset(&mut s, diagrams, lx, inset_top);
    }
    s.push_str("</svg>\n");
    s
}

fn render_inset(s: &mut String, diagrams: &[DiagramJson], x0: f64, y0: f64) {
    let max = diagrams
        .iter()
        .flat_map(|d| d.holes.iter().map(|h| h.death))
        .fold(0.0f64, f64::max);
    let max = if max > 0.0 { max } else { 1.0 };
    let px = |b: f64, d: f64| (x0 + b / max * INSET, y0 + INSET - d / max * INSET);
    let _ = writeln!(s, r#"<g class="diagram-inset">"#);
    let _ = writeln!(
        s,
        "<rect x=\"{x0:.1}\" y=\"{y0:.1}\" width=\"{INSET}\" height=\"{INSET}\" fill=\"none\" stroke=\"#333333\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{x0:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{y0:.1}\" stroke=\"#999999\" stroke-dasharray=\"3,3\"/>",
        y0 + INSET,
        x0 + INSET
    );
    let _ = writeln!(
        s,
        r#"<text x="{x0:.1}" y="{:.1}" font-family="sans-serif" font-size="11">birth</text><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">death</text>"#,
        y0 + INSET + 14.0,
        x0 - 2.0,
        y0 - 4.0
    );
    for diagram in diagrams {
        for hole in &diagram.holes {
            let (x, y) = px(hole.birth, hole.death);
            let _ = writeln!(
                s,
                r#"<circle class="bd-point" cx="{x:.2}" cy="{y:.2}" r="3" fill="{}"/>"#,
                diagram.class_id.map_or("#000000", class_color)
            );
        }
    }
    let _ = writeln!(s, "</g>");
}
