//! The published reference study, embedded verbatim.
//!
//! Inputs (16 barriers rated by 4 experts, the 11x11 judgement matrix) and
//! the printed outputs are kept as text resources under `data/paper/` and
//! compiled into the library. Printed values are stored exactly as
//! published, typos included: they are regression targets, not
//! computations. Known defects are listed in [`PaperStudy::anomalies`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::delphi::{Barrier, LinguisticScale, RatingPanel, ScreeningResult};
use crate::error::{Error, Result};
use crate::fahp::PairwiseMatrix;
use crate::formats::{
    matrix_to_csv, matrix_to_json, parse_matrix, parse_matrix_csv, parse_ratings, parse_ratings_csv, ratings_to_csv,
    ratings_to_json, read_source, sha256_hex, InputFormat, MatrixSource, RatingsSource, SourceText,
};
use crate::validation::ValidationMode;

/// An embedded text file and the SHA-256 it must hash to.
#[derive(Clone, Copy, Debug)]
pub struct Resource {
    pub name: &'static str,
    pub text: &'static str,
    pub sha256: &'static str,
}

impl Resource {
    pub fn verify(&self) -> Result<&'static str> {
        verify_text(self.name, self.text, self.sha256)
    }
}

fn verify_text(name: &'static str, text: &'static str, sha256: &str) -> Result<&'static str> {
    if sha256_hex(text.as_bytes()) == sha256 {
        Ok(text)
    } else {
        Err(Error::Corrupted(name))
    }
}

pub const RATINGS: Resource = Resource {
    name: "ratings.csv",
    text: include_str!("../data/paper/ratings.csv"),
    sha256: "fd1e6d6e23082966d5ea68c33bb8eb3e3c87c7485898b9631db5a7d773f46dc6",
};

pub const MATRIX: Resource = Resource {
    name: "matrix.csv",
    text: include_str!("../data/paper/matrix.csv"),
    sha256: "6d27698b71b1f51f403d3b581243677872f0ac6be61ddc54a95735a0bcade5be",
};

pub const BARRIERS: Resource = Resource {
    name: "barriers.csv",
    text: include_str!("../data/paper/barriers.csv"),
    sha256: "0683f298108ea3214c0be6936b09bfa139aecd02f793df6b9439385e37b3f601",
};

/// FAHP criterion ids, display names and the screening id each one was
/// renumbered from.
pub const CRITERIA: Resource = Resource {
    name: "criteria.csv",
    text: include_str!("../data/paper/criteria.csv"),
    sha256: "30a13114b502cf3f30ac1c2a5096c09ba08f9ef65e97dc005706629703c6a59a",
};

pub const EXPECTED: Resource = Resource {
    name: "expected.json",
    text: include_str!("../data/paper/expected.json"),
    sha256: "2e6d430daa049e98a4a3fed2e230d25f9e1154ac1e1218bd9628980d177b9e60",
};

pub const RESOURCES: [Resource; 5] = [RATINGS, MATRIX, BARRIERS, CRITERIA, EXPECTED];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedScreening {
    pub id: String,
    pub score: f64,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedCriterion {
    pub id: String,
    pub geometric_mean: [f64; 3],
    /// As printed, including the modal-multiplier slip.
    pub fuzzy_weight: [f64; 3],
    pub averaged_weight: f64,
    pub normalized_weight: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedRanking {
    pub criteria: Vec<ExpectedCriterion>,
    pub total: [f64; 3],
    /// The inverse total in the printed (reversed) order `(1/l, 1/m, 1/u)`.
    pub inverse_as_printed: [f64; 3],
    /// The vector the published fuzzy weights were actually multiplied by.
    pub multiplier_as_printed: [f64; 3],
    pub averaged_total: f64,
}

impl ExpectedRanking {
    /// The printed inverse total as an ordered `(1/u, 1/m, 1/l)` triple.
    pub fn inverse(&self) -> [f64; 3] {
        let [a, b, c] = self.inverse_as_printed;
        [c, b, a]
    }

    /// Criterion ids from rank 1 downwards.
    pub fn order(&self) -> Vec<&str> {
        let mut v: Vec<&ExpectedCriterion> = self.criteria.iter().collect();
        v.sort_by_key(|c| c.rank);
        v.into_iter().map(|c| c.id.as_str()).collect()
    }
}

/// A known defect in the published data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub id: String,
    pub resource: String,
    pub location: String,
    pub note: String,
}

#[derive(Deserialize)]
struct ExpectedDocument {
    screening: Vec<ExpectedScreening>,
    ranking: ExpectedRanking,
    renumbering_inferred: bool,
    anomalies: Vec<Anomaly>,
}

/// Maps screening ids to FAHP criterion ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenumberMap {
    /// `(original id, new id)` in original order.
    pub pairs: Vec<(String, String)>,
    /// True when the correspondence was reconstructed rather than published.
    #[serde(default)]
    pub inferred: bool,
}

impl RenumberMap {
    /// `ids[k]` becomes `{prefix}{k + 1}`.
    pub fn sequential<'a>(ids: impl IntoIterator<Item = &'a str>, prefix: &str) -> Self {
        let pairs = ids.into_iter().enumerate().map(|(k, id)| (id.to_string(), format!("{prefix}{}", k + 1))).collect();
        RenumberMap { pairs, inferred: false }
    }

    pub fn identity<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        let pairs = ids.into_iter().map(|id| (id.to_string(), id.to_string())).collect();
        RenumberMap { pairs, inferred: false }
    }

    pub fn get(&self, original: &str) -> Option<&str> {
        self.pairs.iter().find(|(o, _)| o == original).map(|(_, n)| n.as_str())
    }
}

/// The selected barriers relabelled through `map`, in screening order.
/// The map must cover the selected set exactly.
pub fn renumber_selected(screening: &ScreeningResult, map: &RenumberMap) -> Result<Vec<Barrier>> {
    let selected: Vec<&Barrier> = screening.selected().map(|s| &s.barrier).collect();
    if selected.is_empty() {
        return Err(Error::Coverage("no barrier was selected".to_string()));
    }
    if let Some((orig, _)) = map.pairs.iter().find(|(o, _)| !selected.iter().any(|b| &b.id == o)) {
        return Err(Error::Coverage(format!("`{orig}` is mapped but was not selected")));
    }
    selected
        .into_iter()
        .map(|b| {
            let id =
                map.get(&b.id).ok_or_else(|| Error::Coverage(format!("selected barrier `{}` has no new id", b.id)))?;
            Ok(Barrier { id: id.to_string(), ..b.clone() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PaperStudy {
    pub delphi_panel: RatingPanel,
    pub delphi_expected: Vec<ExpectedScreening>,
    /// Lenient: the published matrix breaks ordering and reciprocity.
    pub fahp_matrix: PairwiseMatrix,
    pub fahp_expected: ExpectedRanking,
    pub renumber_map: RenumberMap,
    pub anomalies: Vec<Anomaly>,
}

/// Loads the embedded study after verifying every resource's checksum.
pub fn load_paper_study() -> Result<PaperStudy> {
    for r in RESOURCES {
        r.verify()?;
    }
    study_from_sources(RATINGS.text, MATRIX.text)
}

/// Reads `ratings.csv` and `matrix.csv` (or their `.json` counterparts)
/// from a directory in the [`export_study`] layout.
pub fn study_from_dir(dir: &Path) -> Result<PaperStudy> {
    let pick = |stem: &str| -> Result<(SourceText, InputFormat)> {
        let csv = dir.join(format!("{stem}.csv"));
        let path = if csv.exists() { csv } else { dir.join(format!("{stem}.json")) };
        Ok((read_source(&path)?, InputFormat::from_path(&path)))
    };
    let (ratings, rf) = pick("ratings")?;
    let (matrix, mf) = pick("matrix")?;
    study_from_parts(
        parse_ratings(&ratings.text, rf, &ratings.name, &LinguisticScale::delphi10())?,
        parse_matrix(&matrix.text, mf, &matrix.name)?,
    )
}

/// The embedded study with its ratings and matrix replaced by the given
/// CSV texts (in the [`crate::formats`] layouts). Names, the renumbering
/// and the printed results still come from the embedded resources.
pub fn study_from_sources(ratings_csv: &str, matrix_csv: &str) -> Result<PaperStudy> {
    study_from_parts(
        parse_ratings_csv(ratings_csv, RATINGS.name, &LinguisticScale::delphi10())?,
        parse_matrix_csv(matrix_csv, MATRIX.name)?,
    )
}

fn study_from_parts(mut ratings: RatingsSource, matrix: MatrixSource) -> Result<PaperStudy> {
    let names = read_pairs(BARRIERS.text).map_err(corrupt(BARRIERS.name))?;
    for b in &mut ratings.barriers {
        if let Some((_, name)) = names.iter().find(|(id, _)| *id == b.id) {
            b.name = name.clone();
        }
    }
    let delphi_panel = ratings.into_panel(ValidationMode::Strict)?;

    let mut criteria = Vec::new();
    let mut pairs = Vec::new();
    for record in csv_rows(CRITERIA.text).map_err(corrupt(CRITERIA.name))? {
        let [id, name, original] = <[String; 3]>::try_from(record).map_err(|_| Error::Corrupted(CRITERIA.name))?;
        pairs.push((original, id.clone()));
        criteria.push(Barrier::new(id, name));
    }
    let fahp_matrix = PairwiseMatrix::build(matrix.entries, criteria, ValidationMode::Lenient)?;

    let doc: ExpectedDocument = serde_json::from_str(EXPECTED.text).map_err(corrupt(EXPECTED.name))?;
    Ok(PaperStudy {
        delphi_panel,
        delphi_expected: doc.screening,
        fahp_matrix,
        fahp_expected: doc.ranking,
        renumber_map: RenumberMap { pairs, inferred: doc.renumbering_inferred },
        anomalies: doc.anomalies,
    })
}

/// Writes the study's ratings and matrix in `format`, plus a
/// `pipeline.json` config that runs both stages over them.
pub fn export_study(study: &PaperStudy, dir: &Path, format: InputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (ext, ratings, matrix) = match format {
        InputFormat::Csv => ("csv", ratings_to_csv(&study.delphi_panel), matrix_to_csv(&study.fahp_matrix)),
        InputFormat::Json => (
            "json",
            ratings_to_json(&study.delphi_panel, Some(LinguisticScale::DELPHI_10)),
            matrix_to_json(&study.fahp_matrix),
        ),
    };
    let config = serde_json::json!({
        "ratings": { "path": format!("ratings.{ext}") },
        "scale": LinguisticScale::DELPHI_10,
        "threshold": "mean",
        "matrix": { "path": format!("matrix.{ext}") },
        "mode": "lenient",
        "renumber": "sequential",
        "output": { "format": "json" },
    });
    let config = serde_json::to_string_pretty(&config).expect("config serializes") + "\n";
    let mut written = Vec::new();
    for (name, text) in
        [(format!("ratings.{ext}"), ratings), (format!("matrix.{ext}"), matrix), ("pipeline.json".to_string(), config)]
    {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn corrupt<E>(name: &'static str) -> impl Fn(E) -> Error {
    move |_| Error::Corrupted(name)
}

fn csv_rows(text: &str) -> csv::Result<Vec<Vec<String>>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect()
}

fn read_pairs(text: &str) -> std::result::Result<Vec<(String, String)>, ()> {
    csv_rows(text)
        .map_err(|_| ())?
        .into_iter()
        .map(|r| <[String; 2]>::try_from(r).map(|[a, b]| (a, b)).map_err(|_| ()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delphi::{screen, ThresholdStrategy};
    use crate::tfn::Tfn;

    #[test]
    fn load_shapes() {
        let s = load_paper_study().unwrap();
        assert_eq!(s.delphi_panel.barriers().len(), 16);
        assert_eq!(s.delphi_panel.experts().len(), 4);
        assert_eq!(
            s.delphi_panel.barriers()[14].name,
            "Lack of top management's commitment to implementing new technology"
        );
        assert_eq!(s.fahp_matrix.len(), 11);
        assert_eq!(s.fahp_matrix.mode(), ValidationMode::Lenient);
        let (b2, b5) = (s.fahp_matrix.index_of("B2").unwrap(), s.fahp_matrix.index_of("B5").unwrap());
        assert_eq!(s.fahp_matrix.cell(b2, b5), Tfn::new(9.0, 9.0, 9.0).unwrap());
        let b10 = s.fahp_expected.criteria.iter().find(|c| c.id == "B10").unwrap();
        assert_eq!((b10.rank, b10.normalized_weight), (1, 0.21185));
        assert!(s.renumber_map.inferred);
        assert_eq!(s.delphi_expected.len(), 16);
    }

    #[test]
    fn verbatim_cells() {
        let s = load_paper_study().unwrap();
        let m = &s.fahp_matrix;
        let at = |r: &str, c: &str| m.cell(m.index_of(r).unwrap(), m.index_of(c).unwrap()).components();
        assert_eq!(at("B8", "B4"), [0.17, 0.2, 0.17]);
        assert_eq!(at("B1", "B5"), [0.125, 0.147, 0.17]);
        assert_eq!(at("B1", "B10"), [0.111, 0.111, 0.111]);
        let first_row: Vec<[f64; 3]> = m.row(0).iter().map(Tfn::components).collect();
        assert_eq!(
            first_row,
            vec![
                [1.0, 1.0, 1.0],
                [0.25, 0.33, 0.5],
                [0.17, 0.2, 0.25],
                [2.0, 3.0, 4.0],
                [0.125, 0.147, 0.17],
                [4.0, 5.0, 6.0],
                [1.0, 1.0, 1.0],
                [2.0, 3.0, 4.0],
                [0.17, 0.2, 0.25],
                [0.111, 0.111, 0.111],
                [0.25, 0.33, 0.5],
            ]
        );
        let b7 = s.delphi_panel.opinions(6);
        assert_eq!(b7[2], Tfn::new(2.0, 3.0, 4.0).unwrap());
    }

    #[test]
    fn checksum_detects_tampering() {
        for r in RESOURCES {
            assert!(r.verify().is_ok(), "{}", r.name);
        }
        let tampered = RATINGS.text.replacen("B1,E1,6,7,8", "B1,E1,6,7.5,8", 1);
        let leaked: &'static str = Box::leak(tampered.into_boxed_str());
        assert!(matches!(verify_text("ratings.csv", leaked, RATINGS.sha256), Err(Error::Corrupted("ratings.csv"))));
    }

    #[test]
    fn renumbering_of_published_selection() {
        let s = load_paper_study().unwrap();
        let screening = screen(&s.delphi_panel, ThresholdStrategy::Mean).unwrap();
        let criteria = renumber_selected(&screening, &s.renumber_map).unwrap();
        assert_eq!(criteria.len(), 11);
        let last = criteria.last().unwrap();
        assert_eq!(last.id, "B11");
        assert_eq!(last.name, "Absence of Standardization");
        let expected = [
            ("B1", "B1"),
            ("B2", "B2"),
            ("B4", "B3"),
            ("B5", "B4"),
            ("B9", "B5"),
            ("B10", "B6"),
            ("B11", "B7"),
            ("B13", "B8"),
            ("B14", "B9"),
            ("B15", "B10"),
            ("B16", "B11"),
        ];
        let pairs: Vec<(&str, &str)> = s.renumber_map.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn export_and_reload_in_both_formats() {
        let s = load_paper_study().unwrap();
        for format in [InputFormat::Csv, InputFormat::Json] {
            let dir = tempfile::tempdir().unwrap();
            let written = export_study(&s, dir.path(), format).unwrap();
            assert_eq!(written.len(), 3);
            let back = study_from_dir(dir.path()).unwrap();
            assert_eq!(back.delphi_panel, s.delphi_panel);
            assert_eq!(back.fahp_matrix, s.fahp_matrix);
        }
    }

    #[test]
    fn exported_csv_is_the_embedded_text() {
        let s = load_paper_study().unwrap();
        assert_eq!(ratings_to_csv(&s.delphi_panel), RATINGS.text);
        assert_eq!(matrix_to_csv(&s.fahp_matrix), MATRIX.text);
    }

    #[test]
    fn renumbering_errors_and_identity() {
        let s = load_paper_study().unwrap();
        let none = screen(&s.delphi_panel, ThresholdStrategy::Fixed(100.0)).unwrap();
        assert!(matches!(renumber_selected(&none, &s.renumber_map), Err(Error::Coverage(_))));

        let screening = screen(&s.delphi_panel, ThresholdStrategy::Mean).unwrap();
        let ids: Vec<&str> = screening.selected().map(|b| b.barrier.id.as_str()).collect();
        let same = renumber_selected(&screening, &RenumberMap::identity(ids.clone())).unwrap();
        assert_eq!(same.iter().map(|b| b.id.as_str()).collect::<Vec<_>>(), ids);

        let mut short = s.renumber_map.clone();
        short.pairs.pop();
        assert!(matches!(renumber_selected(&screening, &short), Err(Error::Coverage(_))));
        let mut extra = s.renumber_map.clone();
        extra.pairs.push(("B3".into(), "B12".into()));
        assert!(matches!(renumber_selected(&screening, &extra), Err(Error::Coverage(_))));
    }
}
