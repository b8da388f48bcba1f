//! Text, CSV and SVG renderings of failure maps.

use std::fmt::Write;
use std::str::FromStr;

use crate::analysis::FailureMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Text,
    Csv,
    Svg,
}

impl FromStr for MapFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(MapFormat::Text),
            "csv" => Ok(MapFormat::Csv),
            "svg" => Ok(MapFormat::Svg),
            other => Err(Error::field("format", format!("unknown map format `{other}`"))),
        }
    }
}

pub fn emit_failure_map(map: &FailureMap, format: MapFormat) -> Result<String> {
    match format {
        MapFormat::Text => Ok(text(map)),
        MapFormat::Csv => Ok(csv(map)),
        MapFormat::Svg => svg(map),
    }
}

fn text(map: &FailureMap) -> String {
    let mut out = format!("# {} at tau = {} us\n", map.title, map.tau_us);
    for (q, v) in map.values.iter().enumerate() {
        let mark = if map.compared.contains(&q) { "" } else { "  (spectator)" };
        writeln!(out, "{q:>3} {v:+.4}{mark}").unwrap();
    }
    if let Some((q, v)) = map.worst() {
        writeln!(out, "# worst qubit {q}: {v:+.4}").unwrap();
    }
    out
}

fn csv(map: &FailureMap) -> String {
    let mut out = String::from("qubit,x,y,delta_f,compared\n");
    let coords = map.topology.coords();
    for (q, v) in map.values.iter().enumerate() {
        let (x, y) = coords.map_or((String::new(), String::new()), |c| {
            (c[q][0].to_string(), c[q][1].to_string())
        });
        writeln!(out, "{q},{x},{y},{v},{}", map.compared.contains(&q)).unwrap();
    }
    out
}

/// White at zero, red for positive (worse than reference), blue for negative.
fn color(v: f64, scale: f64) -> String {
    let t = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |t: f64| (255.0 * (1.0 - t.abs())).round() as u8;
    let (r, g, b) = if t >= 0.0 {
        (255, fade(t), fade(t))
    } else {
        (fade(t), fade(t), 255)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn svg(map: &FailureMap) -> Result<String> {
    let coords = map
        .topology
        .coords()
        .ok_or_else(|| Error::field("coords", "SVG rendering needs qubit coordinates"))?;
    let step = 70.0;
    let margin = 50.0;
    let max_x = coords.iter().map(|c| c[0]).fold(0.0, f64::max);
    let max_y = coords.iter().map(|c| c[1]).fold(0.0, f64::max);
    let min_x = coords.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min);
    let min_y = coords.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min);
    let pos = |q: usize| {
        (
            margin + (coords[q][0] - min_x) * step,
            margin + 20.0 + (coords[q][1] - min_y) * step,
        )
    };
    let width = 2.0 * margin + (max_x - min_x) * step;
    let height = 2.0 * margin + 40.0 + (max_y - min_y) * step;
    let scale = map.max_abs();
    let mut out = String::new();
    writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"##
    )
    .unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="white"/>"##).unwrap();
    writeln!(
        out,
        r##"<text x="{margin}" y="24" font-size="14">{} (tau = {:.2} us, max |dF| = {scale:.4})</text>"##,
        escape(&map.title),
        map.tau_us
    )
    .unwrap();
    for &(a, b) in map.topology.edges() {
        let ((x1, y1), (x2, y2)) = (pos(a), pos(b));
        writeln!(out, r##"<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#888" stroke-width="3"/>"##).unwrap();
    }
    for (q, &v) in map.values.iter().enumerate() {
        let (x, y) = pos(q);
        let stroke = if map.compared.contains(&q) { "#000" } else { "#bbb" };
        writeln!(
            out,
            r##"<circle cx="{x}" cy="{y}" r="20" fill="{}" stroke="{stroke}" stroke-width="1.5"><title>qubit {q}: {v:+.4}</title></circle>"##,
            color(v, scale)
        )
        .unwrap();
        writeln!(out, r##"<text x="{x}" y="{}" font-size="11" text-anchor="middle">{q}</text>"##, y - 2.0).unwrap();
        writeln!(out, r##"<text x="{x}" y="{}" font-size="8" text-anchor="middle">{v:+.3}</text>"##, y + 9.0).unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
