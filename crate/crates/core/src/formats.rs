//! Ratings and pairwise-matrix files.
//!
//! Ratings CSV: `barrier_id,expert_id,rating` (integer levels resolved
//! through a [`LinguisticScale`]) or `barrier_id,expert_id,l,m,u`.
//! Ratings JSON: `{scale, barriers: [{id, name}], experts, ratings: [{barrier_id, expert_id, rating | tfn}]}`.
//!
//! Matrix CSV: `row_id,col_id,l,m,u`, diagonal and mirrored cells optional.
//! Matrix JSON: `{criteria, mode, cells: [{row, col, tfn}]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::delphi::{Barrier, LinguisticScale, RatingPanel};
use crate::error::{Error, Result};
use crate::fahp::PairwiseMatrix;
use crate::tfn::Tfn;
use crate::validation::ValidationMode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    /// Guesses from the file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(InputFormat::Csv),
            "json" => Ok(InputFormat::Json),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file's text and the SHA-256 of its bytes.
#[derive(Clone, Debug)]
pub struct SourceText {
    pub name: String,
    pub text: String,
    pub sha256: String,
}

pub fn read_source(path: &Path) -> Result<SourceText> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let sha256 = sha256_hex(&bytes);
    let text =
        String::from_utf8(bytes).map_err(|e| Error::parse(path.display().to_string(), 0, format!("not UTF-8: {e}")))?;
    Ok(SourceText { name: path.display().to_string(), text, sha256 })
}

/// Parsed ratings before they are assembled into a panel.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingsSource {
    pub barriers: Vec<Barrier>,
    pub experts: Vec<String>,
    pub cells: Vec<(String, String, Tfn)>,
}

impl RatingsSource {
    pub fn into_panel(self, mode: ValidationMode) -> Result<RatingPanel> {
        RatingPanel::from_cells(self.barriers, self.experts, self.cells, mode)
    }
}

fn push_unique(list: &mut Vec<String>, id: &str) {
    if !list.iter().any(|x| x == id) {
        list.push(id.to_string());
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes())
}

fn csv_headers(reader: &mut csv::Reader<&[u8]>, source: &str) -> Result<Vec<String>> {
    let headers = reader.headers().map_err(|e| Error::parse(source, 1, e.to_string()))?;
    Ok(headers.iter().map(str::to_string).collect())
}

fn field<'r>(record: &'r csv::StringRecord, index: usize, name: &str, source: &str, line: usize) -> Result<&'r str> {
    match record.get(index) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(Error::parse(source, line, format!("missing field `{name}`"))),
    }
}

fn number(record: &csv::StringRecord, index: usize, name: &str, source: &str, line: usize) -> Result<f64> {
    let raw = field(record, index, name, source, line)?;
    raw.parse::<f64>().map_err(|_| Error::parse(source, line, format!("field `{name}`: `{raw}` is not a number")))
}

fn triple(record: &csv::StringRecord, first: usize, source: &str, line: usize) -> Result<Tfn> {
    let l = number(record, first, "l", source, line)?;
    let m = number(record, first + 1, "m", source, line)?;
    let u = number(record, first + 2, "u", source, line)?;
    Tfn::lenient(l, m, u).map_err(|e| Error::parse(source, line, e.to_string()))
}

fn records(reader: &mut csv::Reader<&[u8]>, source: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(source, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        out.push((line, record));
    }
    Ok(out)
}

pub fn parse_ratings_csv(text: &str, source: &str, scale: &LinguisticScale) -> Result<RatingsSource> {
    let mut reader = csv_reader(text);
    let headers = csv_headers(&mut reader, source)?;
    let triples = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["barrier_id", "expert_id", "rating"] => false,
        ["barrier_id", "expert_id", "l", "m", "u"] => true,
        _ => {
            return Err(Error::parse(
                source,
                1,
                "expected header `barrier_id,expert_id,rating` or `barrier_id,expert_id,l,m,u`",
            ))
        }
    };
    let mut barriers = Vec::new();
    let mut experts = Vec::new();
    let mut cells = Vec::new();
    for (line, record) in records(&mut reader, source)? {
        let barrier = field(&record, 0, "barrier_id", source, line)?;
        let expert = field(&record, 1, "expert_id", source, line)?;
        let tfn = if triples {
            triple(&record, 2, source, line)?
        } else {
            let raw = field(&record, 2, "rating", source, line)?;
            let rating: i64 = raw
                .parse()
                .map_err(|_| Error::parse(source, line, format!("field `rating`: `{raw}` is not an integer")))?;
            scale.encode(rating).map_err(|e| Error::parse(source, line, format!("field `rating`: {e}")))?
        };
        push_unique(&mut barriers, barrier);
        push_unique(&mut experts, expert);
        cells.push((barrier.to_string(), expert.to_string(), tfn));
    }
    Ok(RatingsSource { barriers: barriers.into_iter().map(Barrier::bare).collect(), experts, cells })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingsDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<String>,
    pub barriers: Vec<Barrier>,
    pub experts: Vec<String>,
    pub ratings: Vec<RatingEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatingEntry {
    pub barrier_id: String,
    pub expert_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rating: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tfn: Option<[f64; 3]>,
}

fn json_error(source: &str, e: serde_json::Error) -> Error {
    Error::parse(source, e.line(), e.to_string())
}

/// The document's own `scale`, when present, takes precedence over `scale`.
pub fn parse_ratings_json(text: &str, source: &str, scale: &LinguisticScale) -> Result<RatingsSource> {
    let doc: RatingsDocument = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    let own_scale;
    let scale = match &doc.scale {
        Some(name) if name != scale.name() => {
            own_scale =
                LinguisticScale::by_name(name).map_err(|e| Error::parse(source, 0, format!("field `scale`: {e}")))?;
            &own_scale
        }
        _ => scale,
    };
    let mut cells = Vec::with_capacity(doc.ratings.len());
    for (k, entry) in doc.ratings.into_iter().enumerate() {
        let at = |msg: String| Error::parse(source, 0, format!("ratings[{k}]: {msg}"));
        let tfn = match (entry.rating, entry.tfn) {
            (Some(r), None) => scale.encode(r).map_err(|e| at(format!("field `rating`: {e}")))?,
            (None, Some([l, m, u])) => Tfn::lenient(l, m, u).map_err(|e| at(format!("field `tfn`: {e}")))?,
            _ => return Err(at("exactly one of `rating` or `tfn` is required".to_string())),
        };
        cells.push((entry.barrier_id, entry.expert_id, tfn));
    }
    Ok(RatingsSource { barriers: doc.barriers, experts: doc.experts, cells })
}

pub fn parse_ratings(text: &str, format: InputFormat, source: &str, scale: &LinguisticScale) -> Result<RatingsSource> {
    match format {
        InputFormat::Csv => parse_ratings_csv(text, source, scale),
        InputFormat::Json => parse_ratings_json(text, source, scale),
    }
}

/// Triple-path CSV, one line per cell in panel order.
pub fn ratings_to_csv(panel: &RatingPanel) -> String {
    let mut out = String::from("barrier_id,expert_id,l,m,u\n");
    for (barrier, opinions) in panel.rows() {
        for (expert, t) in panel.experts().iter().zip(opinions) {
            out.push_str(&format!("{},{},{},{},{}\n", barrier.id, expert, t.lower(), t.modal(), t.upper()));
        }
    }
    out
}

pub fn ratings_to_json(panel: &RatingPanel, scale: Option<&str>) -> String {
    let ratings = panel
        .rows()
        .flat_map(|(barrier, opinions)| {
            panel.experts().iter().zip(opinions).map(move |(expert, t)| RatingEntry {
                barrier_id: barrier.id.clone(),
                expert_id: expert.clone(),
                rating: None,
                tfn: Some(t.components()),
            })
        })
        .collect();
    let doc = RatingsDocument {
        scale: scale.map(str::to_string),
        barriers: panel.barriers().to_vec(),
        experts: panel.experts().to_vec(),
        ratings,
    };
    serde_json::to_string_pretty(&doc).expect("ratings serialize") + "\n"
}

/// Parsed matrix entries before auto-fill.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSource {
    /// Explicit criteria (JSON) or ids in order of first appearance (CSV).
    pub criteria: Vec<Barrier>,
    pub entries: Vec<(String, String, Tfn)>,
    /// Mode declared by the file itself, if any.
    pub mode: Option<ValidationMode>,
}

impl MatrixSource {
    /// Builds over the file's own criteria. `mode` overrides the file's
    /// declared mode; with neither, strict.
    pub fn into_matrix(self, mode: Option<ValidationMode>) -> Result<PairwiseMatrix> {
        let mode = mode.or(self.mode).unwrap_or_default();
        PairwiseMatrix::build(self.entries, self.criteria, mode)
    }
}

pub fn parse_matrix_csv(text: &str, source: &str) -> Result<MatrixSource> {
    let mut reader = csv_reader(text);
    let headers = csv_headers(&mut reader, source)?;
    if headers != ["row_id", "col_id", "l", "m", "u"] {
        return Err(Error::parse(source, 1, "expected header `row_id,col_id,l,m,u`"));
    }
    let mut ids = Vec::new();
    let mut entries = Vec::new();
    for (line, record) in records(&mut reader, source)? {
        let row = field(&record, 0, "row_id", source, line)?;
        let col = field(&record, 1, "col_id", source, line)?;
        let tfn = triple(&record, 2, source, line)?;
        push_unique(&mut ids, row);
        push_unique(&mut ids, col);
        entries.push((row.to_string(), col.to_string(), tfn));
    }
    Ok(MatrixSource { criteria: ids.into_iter().map(Barrier::bare).collect(), entries, mode: None })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CriterionRef {
    Id(String),
    Full(Barrier),
}

impl From<CriterionRef> for Barrier {
    fn from(c: CriterionRef) -> Self {
        match c {
            CriterionRef::Id(id) => Barrier::bare(id),
            CriterionRef::Full(b) => b,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub criteria: Vec<CriterionRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ValidationMode>,
    pub cells: Vec<MatrixCell>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixCell {
    pub row: String,
    pub col: String,
    pub tfn: [f64; 3],
}

pub fn parse_matrix_json(text: &str, source: &str) -> Result<MatrixSource> {
    let doc: MatrixDocument = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    let entries = doc
        .cells
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let [l, m, u] = c.tfn;
            let t =
                Tfn::lenient(l, m, u).map_err(|e| Error::parse(source, 0, format!("cells[{k}]: field `tfn`: {e}")))?;
            Ok((c.row, c.col, t))
        })
        .collect::<Result<_>>()?;
    Ok(MatrixSource { criteria: doc.criteria.into_iter().map(Barrier::from).collect(), entries, mode: doc.mode })
}

pub fn parse_matrix(text: &str, format: InputFormat, source: &str) -> Result<MatrixSource> {
    match format {
        InputFormat::Csv => parse_matrix_csv(text, source),
        InputFormat::Json => parse_matrix_json(text, source),
    }
}

/// Every cell, row-major.
pub fn matrix_to_csv(m: &PairwiseMatrix) -> String {
    let mut out = String::from("row_id,col_id,l,m,u\n");
    for (i, row) in m.criteria().iter().enumerate() {
        for (j, col) in m.criteria().iter().enumerate() {
            let t = m.cell(i, j);
            out.push_str(&format!("{},{},{},{},{}\n", row.id, col.id, t.lower(), t.modal(), t.upper()));
        }
    }
    out
}

pub fn matrix_to_json(m: &PairwiseMatrix) -> String {
    let n = m.len();
    let cells = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| MatrixCell {
            row: m.criteria()[i].id.clone(),
            col: m.criteria()[j].id.clone(),
            tfn: m.cell(i, j).components(),
        })
        .collect();
    let doc = MatrixDocument {
        criteria: m.criteria().iter().cloned().map(CriterionRef::Full).collect(),
        mode: Some(m.mode()),
        cells,
    };
    serde_json::to_string_pretty(&doc).expect("matrix serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delphi::{screen, ThresholdStrategy};

    fn scale() -> LinguisticScale {
        LinguisticScale::delphi10()
    }

    #[test]
    fn integer_ratings_csv() {
        let text = "barrier_id,expert_id,rating\nB1,E1,7\nB1,E2,8\nB2,E1,1\nB2,E2,10\n";
        let src = parse_ratings_csv(text, "r.csv", &scale()).unwrap();
        assert_eq!(src.experts, vec!["E1", "E2"]);
        let panel = src.into_panel(ValidationMode::Strict).unwrap();
        assert_eq!(panel.opinions(0), &[Tfn::raw(6.0, 7.0, 8.0), Tfn::raw(7.0, 8.0, 9.0)]);
        assert_eq!(panel.opinions(1), &[Tfn::raw(0.0, 0.0, 1.0), Tfn::raw(10.0, 10.0, 10.0)]);
    }

    #[test]
    fn rating_outside_scale_names_line() {
        let text = "barrier_id,expert_id,rating\nB1,E1,7\nB1,E2,11\n";
        match parse_ratings_csv(text, "bad.csv", &scale()) {
            Err(Error::Parse { source_name, line, message }) => {
                assert_eq!(source_name, "bad.csv");
                assert_eq!(line, 3);
                assert!(message.contains("rating"), "{message}");
                assert!(message.contains("11"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_name_line_and_field() {
        let text = "barrier_id,expert_id,l,m,u\nB1,E1,1,2,3\nB1,E2,1,x,3\n";
        match parse_ratings_csv(text, "t.csv", &scale()) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("`m`"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "barrier_id,expert_id,l,m,u\nB1,E1,1,2\n";
        assert!(matches!(parse_ratings_csv(text, "t.csv", &scale()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_ratings_csv("a,b\n", "t.csv", &scale()), Err(Error::Parse { line: 1, .. })));
        let text = "barrier_id,expert_id,l,m,u\nB1,E1,1,NaN,3\n";
        assert!(matches!(parse_ratings_csv(text, "t.csv", &scale()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn ratings_json_both_paths() {
        let text = r#"{
            "scale": "delphi-10",
            "barriers": [{"id": "B1", "name": "Training"}, {"id": "B2", "name": "ROI"}],
            "experts": ["E1"],
            "ratings": [
                {"barrier_id": "B1", "expert_id": "E1", "rating": 5},
                {"barrier_id": "B2", "expert_id": "E1", "tfn": [1, 2, 3]}
            ]
        }"#;
        let panel = parse_ratings_json(text, "r.json", &scale()).unwrap().into_panel(ValidationMode::Strict).unwrap();
        assert_eq!(panel.barriers()[0].name, "Training");
        assert_eq!(panel.opinions(0)[0], Tfn::raw(4.0, 5.0, 6.0));
        assert_eq!(panel.opinions(1)[0], Tfn::raw(1.0, 2.0, 3.0));

        let both = r#"{"barriers": [{"id": "B1", "name": "x"}], "experts": ["E1"],
            "ratings": [{"barrier_id": "B1", "expert_id": "E1", "rating": 5, "tfn": [1,2,3]}]}"#;
        assert!(matches!(parse_ratings_json(both, "r.json", &scale()), Err(Error::Parse { .. })));
        let other_scale = r#"{"scale": "likert", "barriers": [], "experts": [], "ratings": []}"#;
        assert!(parse_ratings_json(other_scale, "r.json", &scale()).is_err());
        assert!(matches!(parse_ratings_json("{", "r.json", &scale()), Err(Error::Parse { .. })));
    }

    #[test]
    fn ratings_round_trip_through_both_formats() {
        let text = "barrier_id,expert_id,l,m,u\nB1,E1,6,7,8\nB1,E2,7,8,9\nB2,E1,2,3,4\nB2,E2,0.5,1.25,2\n";
        let panel = parse_ratings_csv(text, "t.csv", &scale()).unwrap().into_panel(ValidationMode::Strict).unwrap();
        assert_eq!(ratings_to_csv(&panel), text);
        let json = ratings_to_json(&panel, Some("delphi-10"));
        let back = parse_ratings_json(&json, "t.json", &scale()).unwrap().into_panel(ValidationMode::Strict).unwrap();
        assert_eq!(back, panel);
        let a = screen(&panel, ThresholdStrategy::Mean).unwrap();
        let b = screen(&back, ThresholdStrategy::Mean).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matrix_csv_upper_triangle() {
        let text = "row_id,col_id,l,m,u\nA,B,2,3,4\nA,C,4,5,6\nB,C,1,1,1\n";
        let m = parse_matrix_csv(text, "m.csv").unwrap().into_matrix(None).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.mode(), ValidationMode::Strict);
        assert_eq!(m.cell(2, 0), Tfn::raw(1.0 / 6.0, 0.2, 0.25));
        assert_eq!(m.cell(1, 1), Tfn::ONE);
        let csv = matrix_to_csv(&m);
        let again = parse_matrix_csv(&csv, "m.csv").unwrap().into_matrix(None).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn matrix_json_mode_and_override() {
        let text = r#"{"criteria": ["A", {"id": "B", "name": "Bee"}], "mode": "lenient",
            "cells": [{"row": "A", "col": "B", "tfn": [2, 3, 4]}]}"#;
        let src = parse_matrix_json(text, "m.json").unwrap();
        assert_eq!(src.mode, Some(ValidationMode::Lenient));
        let m = src.clone().into_matrix(None).unwrap();
        assert_eq!(m.mode(), ValidationMode::Lenient);
        assert_eq!(m.criteria()[1].name, "Bee");
        let m = src.into_matrix(Some(ValidationMode::Strict)).unwrap();
        assert_eq!(m.mode(), ValidationMode::Strict);
        let back = parse_matrix_json(&matrix_to_json(&m), "m.json").unwrap().into_matrix(None).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn matrix_csv_errors() {
        assert!(parse_matrix_csv("row,col\n", "m.csv").is_err());
        let text = "row_id,col_id,l,m,u\nA,B,2,3\n";
        assert!(matches!(parse_matrix_csv(text, "m.csv"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(InputFormat::from_path(Path::new("x.JSON")), InputFormat::Json);
        assert_eq!(InputFormat::from_path(Path::new("x.csv")), InputFormat::Csv);
        assert_eq!(InputFormat::from_path(Path::new("x")), InputFormat::Csv);
    }
}
