//! Serialization of [`CurveSample`]s: CSV, JSON (schema version "1") and a
//! minimal static SVG emitter.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{CurveSample, SamplePoint, Status};

pub const SCHEMA_VERSION: &str = "1";

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Header row `t_name, state_names…, diag_names…`, one row per sample.
/// Numbers use Rust's shortest round-trip formatting.
pub fn write_csv<W: Write>(curve: &CurveSample, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec![curve.t_name.clone()];
    header.extend(curve.state_names.iter().cloned());
    header.extend(curve.diag_names.iter().cloned());
    w.write_record(&header).map_err(csv_error)?;
    for s in &curve.points {
        let row = std::iter::once(s.t).chain(s.state.iter().copied()).chain(s.diag.iter().copied());
        w.write_record(row.map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV written by [`write_csv`], given the number of state columns.
pub fn read_csv<R: Read>(input: R, n_state: usize) -> Result<CurveSample> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if header.len() < 1 + n_state {
        return Err(Error::Io(format!("expected at least {} columns, found {}", 1 + n_state, header.len())));
    }
    let mut curve = CurveSample::new(&header[0], header[1..=n_state].to_vec(), header[1 + n_state..].to_vec());
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let values = record
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| Error::Io(format!("bad number `{v}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        curve.points.push(SamplePoint {
            t: values[0],
            state: values[1..=n_state].to_vec(),
            diag: values[1 + n_state..].to_vec(),
        });
    }
    Ok(curve)
}

/// Min/max/max-abs of one diagnostic over the finite samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagSummary {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub max_abs: Option<f64>,
}

pub fn summarize(curve: &CurveSample) -> BTreeMap<String, DiagSummary> {
    let mut out = BTreeMap::new();
    for (i, name) in curve.diag_names.iter().enumerate() {
        let finite: Vec<f64> = curve.points.iter().map(|s| s.diag[i]).filter(|v| v.is_finite()).collect();
        let summary = if finite.is_empty() {
            DiagSummary { min: None, max: None, max_abs: None }
        } else {
            DiagSummary {
                min: Some(finite.iter().copied().fold(f64::INFINITY, f64::min)),
                max: Some(finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                max_abs: Some(finite.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
            }
        };
        out.insert(name.clone(), summary);
    }
    out
}

/// Non-finite values are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JsonSample {
    t: f64,
    state: Vec<Option<f64>>,
    diag: Vec<Option<f64>>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// The JSON document emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument {
    pub schema_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub status: Status,
    pub t_name: String,
    pub state_names: Vec<String>,
    pub diag_names: Vec<String>,
    samples: Vec<JsonSample>,
    pub summary: BTreeMap<String, DiagSummary>,
    pub report: BTreeMap<String, Option<f64>>,
}

impl JsonDocument {
    pub fn new(command: &str, config: serde_json::Value, curve: &CurveSample, report: &BTreeMap<String, f64>) -> Self {
        JsonDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config,
            status: curve.status,
            t_name: curve.t_name.clone(),
            state_names: curve.state_names.clone(),
            diag_names: curve.diag_names.clone(),
            samples: curve
                .points
                .iter()
                .map(|s| JsonSample {
                    t: s.t,
                    state: s.state.iter().map(|v| finite(*v)).collect(),
                    diag: s.diag.iter().map(|v| finite(*v)).collect(),
                })
                .collect(),
            summary: summarize(curve),
            report: report.iter().map(|(k, v)| (k.clone(), finite(*v))).collect(),
        }
    }

    /// The samples as a curve; `null` entries come back as NaN.
    pub fn curve(&self) -> CurveSample {
        let unwrap = |v: &[Option<f64>]| v.iter().map(|x| x.unwrap_or(f64::NAN)).collect();
        let mut curve = CurveSample::new(&self.t_name, self.state_names.clone(), self.diag_names.clone());
        curve.status = self.status;
        curve.points = self
            .samples
            .iter()
            .map(|s| SamplePoint { t: s.t, state: unwrap(&s.state), diag: unwrap(&s.diag) })
            .collect();
        curve
    }

    pub fn to_string_pretty(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let doc: JsonDocument = serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Io(format!("unsupported schema version `{}`", doc.schema_version)));
        }
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub stroke: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub stroke: String,
}

/// A static plot in data coordinates, `y` pointing up.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SvgPlot {
    pub title: String,
    pub width: u32,
    pub height: u32,
    pub polylines: Vec<Polyline>,
    pub segments: Vec<Segment>,
}

impl SvgPlot {
    pub fn new(title: &str) -> Self {
        SvgPlot { title: title.to_string(), width: 640, height: 480, ..SvgPlot::default() }
    }

    pub fn polyline(&mut self, points: Vec<(f64, f64)>, stroke: &str) {
        let points = points.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
        self.polylines.push(Polyline { points, stroke: stroke.to_string() });
    }

    pub fn segment(&mut self, from: (f64, f64), to: (f64, f64), stroke: &str) {
        if [from.0, from.1, to.0, to.1].iter().all(|v| v.is_finite()) {
            self.segments.push(Segment { from, to, stroke: stroke.to_string() });
        }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let all = self
            .polylines
            .iter()
            .flat_map(|l| l.points.iter().copied())
            .chain(self.segments.iter().flat_map(|s| [s.from, s.to]));
        let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (-1.0, -1.0, 1.0, 1.0);
        }
        let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
        (x0 - pad, y0 - pad, x1 + pad, y1 + pad)
    }

    /// SVG 1.1 document; identical inputs give identical bytes.
    pub fn render(&self) -> String {
        let (x0, y0, x1, y1) = self.bounds();
        let (w, h) = (x1 - x0, y1 - y0);
        let stroke_width = 0.003 * w.max(h);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
            self.width, self.height, x0, -y1, w, h
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke-width="{stroke_width:.6}">"#);
        for line in &self.polylines {
            let pts: Vec<String> = line.points.iter().map(|(x, y)| format!("{x:.6},{y:.6}")).collect();
            let _ = writeln!(s, r#"<polyline stroke="{}" points="{}"/>"#, escape(&line.stroke), pts.join(" "));
        }
        for seg in &self.segments {
            let _ = writeln!(
                s,
                r#"<line stroke="{}" x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#,
                escape(&seg.stroke),
                seg.from.0,
                seg.from.1,
                seg.to.0,
                seg.to.1
            );
        }
        s.push_str("</g>\n</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CurveSample {
        let mut c = CurveSample::new("x", vec!["y".into(), "p".into()], vec!["d".into()]);
        c.points.push(SamplePoint { t: 0.0, state: vec![0.1, 1.0 / 3.0], diag: vec![f64::NAN] });
        c.points.push(SamplePoint { t: 0.5, state: vec![-2.5e-17, 7.0], diag: vec![1e300] });
        c
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,y,p,d\n"));
        assert!(!text.contains('\r'));
        let back = read_csv(&buf[..], 2).unwrap();
        assert_eq!(back.points[1], sample().points[1]);
        assert!(back.points[0].diag[0].is_nan());
    }

    #[test]
    fn json_round_trip() {
        let doc = JsonDocument::new("chain", serde_json::json!({"a": 1}), &sample(), &BTreeMap::new());
        let text = doc.to_string_pretty().unwrap();
        let back = JsonDocument::parse(&text).unwrap();
        assert_eq!(back.schema_version, "1");
        let curve = back.curve();
        assert_eq!(curve.points[1], sample().points[1]);
        assert_eq!(curve.points[0].state, sample().points[0].state);
        assert_eq!(back.summary["d"].max_abs, Some(1e300));
    }

    #[test]
    fn svg_is_deterministic() {
        let build = || {
            let mut plot = SvgPlot::new("a < b");
            plot.polyline(vec![(0.0, 0.0), (1.0, 2.0), (f64::NAN, 1.0)], "red");
            plot.segment((0.0, 0.0), (0.1, 0.1), "black");
            plot.render()
        };
        let a = build();
        assert_eq!(a, build());
        assert!(a.contains("<polyline") && a.contains("<line") && a.contains("a &lt; b"));
    }
}
