//! Standalone SVG output.
//!
//! The document uses presentational attributes only: no scripts, no style
//! sheets, no `class` attributes and no external references. Element order is
//! fixed (background, band, sectors with their group labels, polygons oldest
//! first, points oldest first, measurement labels, legend) and every number is
//! written with exactly three decimals, so equal scenes give byte-identical
//! documents. Attributes are written in a fixed order per element: `id`,
//! geometry, then paint.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::layout::{ColorClass, LayoutConfig, Scene, TextAnchor};
use crate::scalar::{half, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SvgDocument {
    pub text: String,
    pub width: f64,
    pub height: f64,
    /// Number of elements per tag name.
    pub counts: BTreeMap<&'static str, usize>,
}

impl SvgDocument {
    pub fn count(&self, tag: &str) -> usize {
        self.counts.get(tag).copied().unwrap_or(0)
    }
}

/// Formats with three decimals, never producing `-0.000`.
pub fn fmt3<T: Real>(v: T) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_owned()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Moves a `#rrggbb` color toward white by `amount` in `[0, 1]`. Colors in
/// any other notation are returned unchanged.
pub fn lighten(color: &str, amount: f64) -> String {
    let hex = color
        .strip_prefix('#')
        .filter(|h| h.len() == 6 && h.bytes().all(|b| b.is_ascii_hexdigit()));
    let Some(hex) = hex else {
        return color.to_owned();
    };
    let channel = |i: usize| {
        let c = f64::from(u8::from_str_radix(&hex[i..i + 2], 16).expect("validated hex"));
        (c + (255.0 - c) * amount.clamp(0.0, 1.0)).round() as u8
    };
    format!("#{:02x}{:02x}{:02x}", channel(0), channel(2), channel(4))
}

/// Total lightening after `age` steps of `step` each.
pub fn age_lightening(step: f64, age: usize) -> f64 {
    1.0 - (1.0 - step).powi(age as i32)
}

struct Writer {
    out: String,
    counts: BTreeMap<&'static str, usize>,
}

impl Writer {
    fn open(&mut self, tag: &'static str, attrs: &str) {
        *self.counts.entry(tag).or_default() += 1;
        let _ = write!(self.out, "<{tag} {attrs}>");
    }

    fn empty(&mut self, indent: &str, tag: &'static str, attrs: &str) {
        *self.counts.entry(tag).or_default() += 1;
        let _ = writeln!(self.out, "{indent}<{tag} {attrs}/>");
    }

    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }
}

pub fn render_svg<T: Real>(scene: &Scene<T>, config: &LayoutConfig<T>) -> SvgDocument {
    let p = &config.palette;
    let size = fmt3(scene.canvas_size);
    let (cx, cy) = scene.center;
    let step = config.snapshot_lighten_step.to_f64_lossy();
    let mut w = Writer {
        out: String::with_capacity(16 * 1024),
        counts: BTreeMap::new(),
    };

    w.line(r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    w.line(&format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0.000 0.000 {size} {size}" font-family="sans-serif">"#
    ));
    *w.counts.entry("svg").or_default() += 1;
    w.empty(
        "  ",
        "rect",
        &format!(
            r#"id="background" x="0.000" y="0.000" width="{size}" height="{size}" fill="{}""#,
            p.background
        ),
    );

    w.line(r#"  <g id="band">"#);
    for (name, r) in [
        ("band-inner", scene.band.inner),
        ("band-outer", scene.band.outer),
    ] {
        w.empty(
            "    ",
            "circle",
            &format!(
                r#"id="{name}" cx="{}" cy="{}" r="{}" fill="none" stroke="{}" stroke-width="1.000""#,
                fmt3(cx),
                fmt3(cy),
                fmt3(r),
                p.band_stroke
            ),
        );
    }
    w.line("  </g>");

    w.line(r#"  <g id="sectors">"#);
    for arc in &scene.slots.sectors {
        let (lo, hi) = if arc.start_angle <= arc.end_angle {
            (arc.start_angle, arc.end_angle)
        } else {
            (arc.end_angle, arc.start_angle)
        };
        let large = if hi - lo > T::PI() { 1 } else { 0 };
        let (ro, ri) = (scene.band.outer, scene.band.inner);
        let pt = |a: T, r: T| {
            let (x, y) = config.polar_to_cartesian(a, r);
            format!("{} {}", fmt3(x), fmt3(y))
        };
        let d = format!(
            "M {} A {} {} 0 {large} 1 {} L {} A {} {} 0 {large} 0 {} Z",
            pt(lo, ro),
            fmt3(ro),
            fmt3(ro),
            pt(hi, ro),
            pt(hi, ri),
            fmt3(ri),
            fmt3(ri),
            pt(lo, ri),
        );
        w.empty(
            "    ",
            "path",
            &format!(
                r#"id="sector-{}" d="{d}" fill="{}" stroke="{}" stroke-width="1.000""#,
                arc.group_index, p.band_fill, p.band_stroke
            ),
        );
    }
    for label in &scene.sector_labels {
        w.out.push_str("    ");
        w.open(
            "text",
            &format!(
                r#"id="sector-label-{}" x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" font-size="{}" font-weight="bold" fill="{}""#,
                label.group_index,
                fmt3(label.x),
                fmt3(label.y),
                fmt3(config.font_size + T::one()),
                p.text
            ),
        );
        w.line(&format!("{}</text>", escape(&label.text)));
    }
    w.line("  </g>");

    w.line(r#"  <g id="polygons">"#);
    for poly in &scene.polygons {
        if poly.vertices.len() < 2 {
            continue;
        }
        let color = lighten(&p.polygon_stroke, age_lightening(step, poly.age));
        let points: Vec<String> = poly
            .vertices
            .iter()
            .map(|v| format!("{},{}", fmt3(v.x), fmt3(v.y)))
            .collect();
        let points = points.join(" ");
        if poly.closed {
            w.empty(
                "    ",
                "polygon",
                &format!(
                    r#"id="polygon-{}" points="{points}" fill="{color}" fill-opacity="0.080" stroke="{color}" stroke-width="2.000" stroke-linejoin="round""#,
                    poly.snapshot
                ),
            );
        } else {
            w.empty(
                "    ",
                "polyline",
                &format!(
                    r#"id="polygon-{}" points="{points}" fill="none" stroke="{color}" stroke-width="2.000" stroke-linejoin="round""#,
                    poly.snapshot
                ),
            );
        }
    }
    w.line("  </g>");

    w.line(r#"  <g id="points">"#);
    for point in scene.points.iter().filter(|pt| pt.present) {
        let age = scene.legend.len() - 1 - point.snapshot;
        let amount = age_lightening(step, age);
        let base = match point.color.expect("present points are classified") {
            ColorClass::Green => &p.green,
            ColorClass::Yellow => &p.yellow,
            ColorClass::Red => &p.red,
        };
        w.empty(
            "    ",
            "circle",
            &format!(
                r#"id="point-{}-{}" cx="{}" cy="{}" r="{}" fill="{}" stroke="{}" stroke-width="{}""#,
                point.snapshot,
                point.measurement_id,
                fmt3(point.x),
                fmt3(point.y),
                fmt3(config.point_radius),
                lighten(base, amount),
                lighten(&p.point_stroke, amount),
                fmt3(config.point_stroke_width)
            ),
        );
    }
    w.line("  </g>");

    w.line(r#"  <g id="labels">"#);
    let lh = config.label_line_height;
    let baseline = (lh + config.font_size * T::of(0.7)) * half();
    for label in &scene.labels {
        let (x, anchor) = match label.text_anchor {
            TextAnchor::Start => (label.bbox.x, "start"),
            TextAnchor::End => (label.bbox.right(), "end"),
        };
        w.out.push_str("    ");
        w.open(
            "text",
            &format!(
                r#"id="label-{}" x="{}" y="{}" text-anchor="{anchor}" font-size="{}" fill="{}""#,
                label.measurement_id,
                fmt3(x),
                fmt3(label.bbox.y + baseline),
                fmt3(config.font_size),
                p.text
            ),
        );
        for (i, line) in label.lines.iter().enumerate() {
            let y = label.bbox.y + lh * T::of(i as f64) + baseline;
            let weight = if i == 0 { r#" font-weight="bold""# } else { "" };
            w.open(
                "tspan",
                &format!(r#"x="{}" y="{}"{weight}"#, fmt3(x), fmt3(y)),
            );
            let _ = write!(w.out, "{}</tspan>", escape(line));
        }
        w.line("</text>");
    }
    w.line("  </g>");

    w.line(r#"  <g id="legend">"#);
    if let Some(subject) = &scene.subject {
        w.out.push_str("    ");
        w.open(
            "text",
            &format!(
                r#"id="subject" x="16.000" y="28.000" font-size="{}" font-weight="bold" fill="{}""#,
                fmt3(config.font_size * T::of(1.5)),
                p.text
            ),
        );
        w.line(&format!("{}</text>", escape(subject)));
    }
    let row = T::of(18.0);
    let edge = T::of(16.0);
    for entry in &scene.legend {
        let y = scene.canvas_size - edge - row * T::of(entry.age as f64);
        let color = lighten(&p.polygon_stroke, age_lightening(step, entry.age));
        w.empty(
            "    ",
            "line",
            &format!(
                r#"id="legend-swatch-{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="3.000""#,
                entry.snapshot,
                fmt3(edge),
                fmt3(y - T::of(4.0)),
                fmt3(edge + T::of(20.0)),
                fmt3(y - T::of(4.0))
            ),
        );
        w.out.push_str("    ");
        w.open(
            "text",
            &format!(
                r#"id="legend-{}" x="{}" y="{}" font-size="{}" fill="{}""#,
                entry.snapshot,
                fmt3(edge + T::of(28.0)),
                fmt3(y),
                fmt3(config.font_size),
                p.text
            ),
        );
        w.line(&format!("{}</text>", escape(&entry.utc)));
    }
    w.line("  </g>");
    w.line("</svg>");

    let side = scene.canvas_size.to_f64_lossy();
    SvgDocument {
        text: w.out,
        width: side,
        height: side,
        counts: w.counts,
    }
}

/// Finds constructs that would make the document depend on anything outside
/// itself. An empty result means the document is standalone.
pub fn lint_standalone(svg: &str) -> Vec<String> {
    let lower = svg.to_ascii_lowercase();
    let mut findings = Vec::new();
    for (needle, what) in [
        ("<script", "script element"),
        ("<style", "style element"),
        (" style=", "style attribute"),
        (" class=", "class attribute"),
        ("<link", "link element"),
        ("<foreignobject", "foreignObject element"),
        ("@import", "css import"),
        ("<image", "image element"),
        ("javascript:", "javascript url"),
    ] {
        if lower.contains(needle) {
            findings.push(format!("forbidden {what} ({needle})"));
        }
    }
    for (i, _) in lower.match_indices("href=") {
        let rest = &lower[i + 5..];
        let value = rest.trim_start_matches(['"', '\'']);
        if !value.starts_with('#') {
            findings.push(format!("external reference at byte {i}"));
        }
    }
    for (i, _) in lower.match_indices("url(") {
        let value = lower[i + 4..].trim_start_matches(['"', '\'']);
        if !value.starts_with('#') {
            findings.push(format!("external url() at byte {i}"));
        }
    }
    for attr in [" on", ":on"] {
        for (i, _) in lower.match_indices(attr) {
            let name: String = lower[i + 1..]
                .chars()
                .take_while(|c| c.is_ascii_alphabetic() || *c == ':')
                .collect();
            if lower[i + 1 + name.len()..].starts_with('=')
                && name.trim_start_matches(':').starts_with("on")
            {
                findings.push(format!("event handler attribute {name} at byte {i}"));
            }
        }
    }
    findings
}
