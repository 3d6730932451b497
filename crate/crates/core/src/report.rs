//! Report emitters. Every document carries the [`RunManifest`] that produced
//! it: as `#` lines atop CSV, a `manifest` key in JSON, and a comment in SVG.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::cluster::Dendrogram;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputRecord>,
    pub config: serde_json::Value,
    /// Left out unless asked for, so repeated runs stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "vizlearn".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: Vec::new(),
            config: serde_json::Value::Null,
            timestamp: None,
        }
    }

    /// Records an input by its content hash.
    pub fn input(mut self, role: &str, path: &str, content: &[u8]) -> Self {
        self.inputs.push(InputRecord {
            role: role.into(),
            path: path.into(),
            sha256: sha256_hex(content),
        });
        self
    }

    pub fn with_config(mut self, config: &impl Serialize) -> Self {
        self.config = serde_json::to_value(config).expect("config serializes");
        self
    }

    fn comment_lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("tool: {} {}", self.tool, self.version),
            format!("command: {}", self.command),
        ];
        for i in &self.inputs {
            out.push(format!("input {}: {} sha256={}", i.role, i.path, i.sha256));
        }
        if !self.config.is_null() {
            out.push(format!("config: {}", self.config));
        }
        if let Some(t) = &self.timestamp {
            out.push(format!("timestamp: {t}"));
        }
        out
    }
}

/// Shortest text that parses back to the same float.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// CSV with the manifest as leading `#` lines.
pub fn csv_document(manifest: &RunManifest, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for line in manifest.comment_lines() {
        let _ = writeln!(out, "# {line}");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory flush");
    out.push_str(std::str::from_utf8(&body).expect("utf-8 input"));
    out
}

/// Strips `#` lines so the rest parses as plain CSV.
pub fn csv_body(document: &str) -> String {
    document
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

#[derive(Serialize)]
struct JsonDocument<'a, T: Serialize> {
    manifest: &'a RunManifest,
    data: &'a T,
}

pub fn json_document(manifest: &RunManifest, data: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(&JsonDocument { manifest, data })
        .expect("report serializes");
    s.push('\n');
    s
}

/// Plain-text document with the manifest as a `#` header.
pub fn text_document(manifest: &RunManifest, body: &str) -> String {
    let mut out = String::new();
    for line in manifest.comment_lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(body);
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn svg_comment(manifest: &RunManifest) -> String {
    let json = serde_json::to_string(manifest).expect("manifest serializes");
    // `--` may not appear inside an XML comment
    format!("<!-- manifest: {} -->\n", json.replace("--", "- -"))
}

/// Left-to-right dendrogram: leaves on the left, merge height along x.
pub fn svg_dendrogram(manifest: &RunManifest, d: &Dendrogram) -> String {
    let n = d.leaf_count();
    let row = 18.0;
    let label_w = 180.0;
    let plot_w = 420.0;
    let top = 20.0;
    let width = label_w + plot_w + 40.0;
    let height = top * 2.0 + row * n as f64 + 20.0;
    let max_h = d
        .merges
        .iter()
        .map(|m| m.height)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let x_of = |h: f64| label_w + plot_w * h / max_h;

    let order = d.leaf_order();
    let mut y = vec![0.0; n + d.merges.len()];
    let mut x = vec![label_w; n + d.merges.len()];
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"monospace\" font-size=\"12\">"
    );
    out.push_str(&svg_comment(manifest));
    for (pos, &leaf) in order.iter().enumerate() {
        y[leaf] = top + row * (pos as f64 + 0.5);
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
            label_w - 6.0,
            y[leaf],
            xml_escape(&d.leaf_labels[leaf])
        );
    }
    for (i, m) in d.merges.iter().enumerate() {
        let c = n + i;
        let hx = x_of(m.height);
        x[c] = hx;
        y[c] = (y[m.a] + y[m.b]) / 2.0;
        let _ = writeln!(
            out,
            "<path d=\"M{:.1} {:.1}H{:.1}V{:.1}H{:.1}\" fill=\"none\" stroke=\"black\"/>",
            x[m.a], y[m.a], hx, y[m.b], x[m.b]
        );
    }
    let axis_y = top + row * n as f64 + 8.0;
    let _ = writeln!(
        out,
        "<line x1=\"{label_w:.1}\" y1=\"{axis_y:.1}\" x2=\"{:.1}\" y2=\"{axis_y:.1}\" stroke=\"gray\"/>",
        label_w + plot_w
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.4}</text>",
        label_w + plot_w,
        axis_y + 14.0,
        max_h
    );
    out.push_str("</svg>\n");
    out
}

/// Diverging heatmap: blue for negative, red for positive, white for zero.
pub fn svg_heatmap(
    manifest: &RunManifest,
    row_labels: &[String],
    col_labels: &[String],
    values: &[Vec<f64>],
) -> String {
    let cell = 12.0;
    let label_w = 180.0;
    let label_h = 160.0;
    let width = label_w + cell * col_labels.len() as f64 + 10.0;
    let height = label_h + cell * row_labels.len() as f64 + 10.0;
    let scale = values
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"monospace\" font-size=\"10\">"
    );
    out.push_str(&svg_comment(manifest));
    for (j, c) in col_labels.iter().enumerate() {
        let cx = label_w + cell * (j as f64 + 0.5);
        let _ = writeln!(
            out,
            "<text transform=\"translate({cx:.1},{:.1}) rotate(-60)\">{}</text>",
            label_h - 4.0,
            xml_escape(c)
        );
    }
    for (i, r) in row_labels.iter().enumerate() {
        let ry = label_h + cell * i as f64;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>",
            label_w - 4.0,
            ry + cell / 2.0,
            xml_escape(r)
        );
        for (j, v) in values[i].iter().enumerate() {
            let t = (v.abs() / scale).min(1.0);
            let fade = (255.0 * (1.0 - t)).round() as u8;
            let color = if *v > 0.0 {
                format!("rgb(255,{fade},{fade})")
            } else if *v < 0.0 {
                format!("rgb({fade},{fade},255)")
            } else {
                "rgb(255,255,255)".to_string()
            };
            let _ = writeln!(
                out,
                "<rect x=\"{:.1}\" y=\"{ry:.1}\" width=\"{cell}\" height=\"{cell}\" fill=\"{color}\" stroke=\"#ddd\"/>",
                label_w + cell * j as f64
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_manifest_header() {
        let m = RunManifest::new("analyze influence").input("corpus", "c.json", b"{}");
        let doc = csv_document(&m, &["a", "b"], &[vec!["1".into(), "x,y".into()]]);
        assert!(doc.starts_with("# tool: vizlearn"));
        assert!(doc.contains("sha256=44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"));
        assert_eq!(csv_body(&doc), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn float_text_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 123456.789] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
