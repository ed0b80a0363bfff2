//! Fuzzy Delphi screening.
//!
//! Each barrier's expert opinions are aggregated into one triangular number
//! (min lower bound, geometric mean of modal values, max upper bound), the
//! aggregate is defuzzified by its centroid, and barriers scoring at or
//! above a threshold are kept.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tfn::{aggregate_min_geo_max, Tfn};
use crate::validation::{ValidationMode, Warning};

/// A candidate criterion. Ids are unique within a study and their order is
/// the canonical order of every result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Barrier {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Barrier {
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Barrier { id: id.into(), name: name.into(), description: None }
    }

    /// A barrier whose display name is its id.
    pub fn bare(id: impl Into<String>) -> Self {
        let id = id.into();
        Barrier { name: id.clone(), id, description: None }
    }
}

pub(crate) fn ensure_unique_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
    }
    Ok(())
}

/// Maps integer ratings `1..=len` to triangular numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct LinguisticScale {
    name: String,
    entries: Vec<(String, Tfn)>,
}

impl LinguisticScale {
    pub const DELPHI_10: &'static str = "delphi-10";

    /// Entries are given in rating order starting at 1.
    pub fn new(name: impl Into<String>, entries: Vec<(String, Tfn)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("linguistic scale"));
        }
        for (_, t) in &entries {
            if !t.is_monotone() {
                return Err(Error::NonMonotone { tfn: *t, at: None });
            }
        }
        Ok(LinguisticScale { name: name.into(), entries })
    }

    /// The ten-level expert rating scale, from "Very low" = (0,0,1) to
    /// "Extreme" = (10,10,10).
    pub fn delphi10() -> Self {
        const LEVELS: [(&str, [f64; 3]); 10] = [
            ("Very low", [0.0, 0.0, 1.0]),
            ("Low", [1.0, 2.0, 3.0]),
            ("Low medium", [2.0, 3.0, 4.0]),
            ("Medium", [3.0, 4.0, 5.0]),
            ("Medium High", [4.0, 5.0, 6.0]),
            ("High", [5.0, 6.0, 7.0]),
            ("High-very High", [6.0, 7.0, 8.0]),
            ("Very High", [7.0, 8.0, 9.0]),
            ("Very High-Extreme", [8.0, 9.0, 10.0]),
            ("Extreme", [10.0, 10.0, 10.0]),
        ];
        let entries = LEVELS.iter().map(|(label, [l, m, u])| (label.to_string(), Tfn::raw(*l, *m, *u))).collect();
        LinguisticScale { name: Self::DELPHI_10.to_string(), entries }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            Self::DELPHI_10 => Ok(Self::delphi10()),
            other => Err(Error::UnknownScale(other.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn entry(&self, rating: i64) -> Result<&(String, Tfn)> {
        usize::try_from(rating)
            .ok()
            .and_then(|r| r.checked_sub(1))
            .and_then(|i| self.entries.get(i))
            .ok_or_else(|| Error::UnknownRating { scale: self.name.clone(), rating })
    }

    pub fn encode(&self, rating: i64) -> Result<Tfn> {
        self.entry(rating).map(|(_, t)| *t)
    }

    pub fn label(&self, rating: i64) -> Result<&str> {
        self.entry(rating).map(|(label, _)| label.as_str())
    }
}

/// Barriers x experts grid of opinions for one settled survey round.
#[derive(Clone, Debug, PartialEq)]
pub struct RatingPanel {
    barriers: Vec<Barrier>,
    experts: Vec<String>,
    /// Row-major: one row per barrier, one column per expert.
    ratings: Vec<Tfn>,
    mode: ValidationMode,
    warnings: Vec<Warning>,
}

impl RatingPanel {
    /// `rows[j][i]` is expert `i`'s opinion on barrier `j`.
    pub fn new(
        barriers: Vec<Barrier>,
        experts: Vec<String>,
        rows: Vec<Vec<Tfn>>,
        mode: ValidationMode,
    ) -> Result<Self> {
        if barriers.is_empty() {
            return Err(Error::Empty("barrier list"));
        }
        if experts.is_empty() {
            return Err(Error::Empty("expert list"));
        }
        ensure_unique_ids(barriers.iter().map(|b| b.id.as_str()))?;
        ensure_unique_ids(experts.iter().map(String::as_str))?;
        if rows.len() != barriers.len() {
            return Err(Error::Config(format!("{} rating rows for {} barriers", rows.len(), barriers.len())));
        }
        let mut warnings = Vec::new();
        let mut ratings = Vec::with_capacity(barriers.len() * experts.len());
        for (barrier, row) in barriers.iter().zip(rows) {
            if row.len() != experts.len() {
                let expert = experts.get(row.len()).map(String::as_str).unwrap_or("?");
                return Err(Error::MissingCell(barrier.id.clone(), expert.to_string()));
            }
            for (expert, t) in experts.iter().zip(row) {
                let at = format!("{}/{}", barrier.id, expert);
                warnings.extend(t.check_input(mode, &at)?);
                ratings.push(t);
            }
        }
        Ok(RatingPanel { barriers, experts, ratings, mode, warnings })
    }

    /// Builds a panel from `(barrier_id, expert_id, opinion)` cells. Every
    /// barrier/expert pair must appear exactly once.
    pub fn from_cells(
        barriers: Vec<Barrier>,
        experts: Vec<String>,
        cells: impl IntoIterator<Item = (String, String, Tfn)>,
        mode: ValidationMode,
    ) -> Result<Self> {
        let (nb, ne) = (barriers.len(), experts.len());
        let mut grid: Vec<Option<Tfn>> = vec![None; nb * ne];
        for (b, e, t) in cells {
            let j = barriers.iter().position(|x| x.id == b).ok_or(Error::UnresolvedId(b.clone()))?;
            let i = experts.iter().position(|x| *x == e).ok_or(Error::UnresolvedId(e.clone()))?;
            let slot = &mut grid[j * ne + i];
            if slot.is_some() {
                return Err(Error::DuplicateCell(b, e));
            }
            *slot = Some(t);
        }
        let mut rows = Vec::with_capacity(nb);
        for (j, barrier) in barriers.iter().enumerate() {
            let mut row = Vec::with_capacity(ne);
            for (i, expert) in experts.iter().enumerate() {
                let t = grid[j * ne + i].ok_or_else(|| Error::MissingCell(barrier.id.clone(), expert.clone()))?;
                row.push(t);
            }
            rows.push(row);
        }
        Self::new(barriers, experts, rows, mode)
    }

    pub fn barriers(&self) -> &[Barrier] {
        &self.barriers
    }

    pub fn experts(&self) -> &[String] {
        &self.experts
    }

    pub fn mode(&self) -> ValidationMode {
        self.mode
    }

    /// Lenient-mode violations found while building the panel.
    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// All expert opinions on the barrier at `index`.
    pub fn opinions(&self, index: usize) -> &[Tfn] {
        let n = self.experts.len();
        &self.ratings[index * n..(index + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Barrier, &[Tfn])> {
        self.barriers.iter().zip(self.ratings.chunks(self.experts.len()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdStrategy {
    /// Arithmetic mean of all barrier scores.
    Mean,
    Fixed(f64),
}

impl fmt::Display for ThresholdStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdStrategy::Mean => f.write_str("mean"),
            ThresholdStrategy::Fixed(v) => write!(f, "fixed({v})"),
        }
    }
}

impl FromStr for ThresholdStrategy {
    type Err = String;

    /// Accepts `mean` or a number.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "mean" {
            return Ok(ThresholdStrategy::Mean);
        }
        let s = s.strip_prefix("fixed:").unwrap_or(s);
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(ThresholdStrategy::Fixed(v)),
            _ => Err(format!("invalid threshold `{s}` (expected `mean` or a number)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenedBarrier {
    pub barrier: Barrier,
    pub aggregate: Tfn,
    pub score: f64,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningResult {
    /// In panel order.
    pub barriers: Vec<ScreenedBarrier>,
    pub threshold: f64,
    pub strategy: ThresholdStrategy,
    pub warnings: Vec<Warning>,
}

impl ScreeningResult {
    pub fn selected(&self) -> impl Iterator<Item = &ScreenedBarrier> {
        self.barriers.iter().filter(|b| b.selected)
    }

    pub fn rejected(&self) -> impl Iterator<Item = &ScreenedBarrier> {
        self.barriers.iter().filter(|b| !b.selected)
    }
}

/// One aggregate per barrier, in panel order.
pub fn aggregate_panel(panel: &RatingPanel) -> Result<Vec<Tfn>> {
    (0..panel.barriers().len()).map(|j| aggregate_min_geo_max(panel.opinions(j))).collect()
}

pub fn score_barriers(aggregates: &[Tfn]) -> Result<Vec<f64>> {
    if aggregates.is_empty() {
        return Err(Error::Empty("aggregate list"));
    }
    Ok(aggregates.iter().map(Tfn::centroid).collect())
}

/// The mean strategy divides by the number of barriers. The sum runs over
/// the sorted scores and the result is clamped to the score range, so a
/// permutation of barriers never moves the threshold and at least one
/// barrier always reaches it.
pub fn compute_threshold(scores: &[f64], strategy: ThresholdStrategy) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty("score list"));
    }
    match strategy {
        ThresholdStrategy::Fixed(v) if v.is_finite() => Ok(v),
        ThresholdStrategy::Fixed(v) => Err(Error::NonFinite(format!("fixed threshold {v}"))),
        ThresholdStrategy::Mean => {
            let mut sorted = scores.to_vec();
            sorted.sort_by(f64::total_cmp);
            let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
            Ok(mean.clamp(sorted[0], sorted[sorted.len() - 1]))
        }
    }
}

/// Aggregate, score and threshold a panel. A barrier is selected when its
/// score is at least the threshold.
pub fn screen(panel: &RatingPanel, strategy: ThresholdStrategy) -> Result<ScreeningResult> {
    let aggregates = aggregate_panel(panel)?;
    let scores = score_barriers(&aggregates)?;
    let threshold = compute_threshold(&scores, strategy)?;
    let barriers = panel
        .barriers()
        .iter()
        .zip(aggregates)
        .zip(scores)
        .map(|((barrier, aggregate), score)| ScreenedBarrier {
            barrier: barrier.clone(),
            aggregate,
            score,
            selected: score >= threshold,
        })
        .collect();
    Ok(ScreeningResult { barriers, threshold, strategy, warnings: panel.warnings().to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn t(l: f64, m: f64, u: f64) -> Tfn {
        Tfn::new(l, m, u).unwrap()
    }

    fn panel(rows: Vec<Vec<Tfn>>) -> RatingPanel {
        let barriers = (1..=rows.len()).map(|j| Barrier::bare(format!("B{j}"))).collect();
        let experts = (1..=rows[0].len()).map(|i| format!("E{i}")).collect();
        RatingPanel::new(barriers, experts, rows, ValidationMode::Strict).unwrap()
    }

    #[test]
    fn encode_rating_examples() {
        let scale = LinguisticScale::delphi10();
        assert_eq!(scale.encode(1).unwrap(), t(0.0, 0.0, 1.0));
        assert_eq!(scale.encode(10).unwrap(), t(10.0, 10.0, 10.0));
        assert_eq!(scale.encode(5).unwrap(), t(4.0, 5.0, 6.0));
        assert_eq!(scale.label(5).unwrap(), "Medium High");
        for r in 2..=9 {
            let f = r as f64;
            assert_eq!(scale.encode(r).unwrap(), t(f - 1.0, f, f + 1.0));
        }
    }

    #[test]
    fn encode_rating_unknown() {
        let scale = LinguisticScale::delphi10();
        for bad in [0, 11, -3] {
            match scale.encode(bad) {
                Err(Error::UnknownRating { scale, rating }) => {
                    assert_eq!(scale, "delphi-10");
                    assert_eq!(rating, bad);
                }
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(matches!(LinguisticScale::by_name("likert-5"), Err(Error::UnknownScale(_))));
    }

    #[test]
    fn aggregate_panel_examples() {
        let p = panel(vec![
            vec![t(6.0, 7.0, 8.0), t(6.0, 7.0, 8.0), t(6.0, 7.0, 8.0), t(7.0, 8.0, 9.0)],
            vec![t(10.0, 10.0, 10.0), t(8.0, 9.0, 10.0), t(10.0, 10.0, 10.0), t(10.0, 10.0, 10.0)],
        ]);
        let agg = aggregate_panel(&p).unwrap();
        assert_abs_diff_eq!(agg[0].modal(), 7.237624155400388, epsilon = 1e-12);
        assert_eq!((agg[1].lower(), agg[1].upper()), (8.0, 10.0));
        assert_abs_diff_eq!(agg[1].modal(), 9.740037464252968, epsilon = 1e-12);

        let single = panel(vec![vec![t(3.0, 4.0, 5.0)]]);
        assert_eq!(aggregate_panel(&single).unwrap(), vec![t(3.0, 4.0, 5.0)]);
    }

    #[test]
    fn score_examples() {
        let scores = score_barriers(&[
            Tfn::raw(6.0, 7.237624155400388, 9.0),
            Tfn::raw(8.0, 9.486832980505138, 10.0),
            Tfn::raw(2.0, 3.6628415014847064, 6.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(scores[0], 7.41, epsilon = 0.01);
        assert_abs_diff_eq!(scores[1], 9.16, epsilon = 0.01);
        assert_abs_diff_eq!(scores[2], 3.89, epsilon = 0.01);
        assert!(score_barriers(&[]).is_err());
    }

    #[test]
    fn threshold_examples() {
        let printed = [7.41, 8.07, 5.99, 8.41, 7.62, 5.06, 4.84, 3.89, 9.16, 7.9, 8.06, 3.89, 8.22, 8.07, 9.25, 8.15];
        let s = compute_threshold(&printed, ThresholdStrategy::Mean).unwrap();
        assert_abs_diff_eq!(s, 113.99 / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s, 7.124, epsilon = 0.01);

        for n in 1..20 {
            let v = vec![1.0 / 3.0 + n as f64 * 0.1; n];
            assert_eq!(compute_threshold(&v, ThresholdStrategy::Mean).unwrap(), v[0]);
        }
        assert_eq!(compute_threshold(&printed, ThresholdStrategy::Fixed(5.0)).unwrap(), 5.0);
        assert!(compute_threshold(&[], ThresholdStrategy::Mean).is_err());
        assert!(compute_threshold(&[1.0], ThresholdStrategy::Fixed(f64::NAN)).is_err());
    }

    #[test]
    fn threshold_strategy_parsing() {
        assert_eq!("mean".parse::<ThresholdStrategy>().unwrap(), ThresholdStrategy::Mean);
        assert_eq!("7.5".parse::<ThresholdStrategy>().unwrap(), ThresholdStrategy::Fixed(7.5));
        assert_eq!("fixed:2".parse::<ThresholdStrategy>().unwrap(), ThresholdStrategy::Fixed(2.0));
        assert!("median".parse::<ThresholdStrategy>().is_err());
        assert_eq!(serde_json::to_string(&ThresholdStrategy::Mean).unwrap(), "\"mean\"");
        assert_eq!(serde_json::to_string(&ThresholdStrategy::Fixed(5.0)).unwrap(), "{\"fixed\":5.0}");
    }

    #[test]
    fn single_barrier_is_selected() {
        let result = screen(&panel(vec![vec![t(1.0, 2.0, 3.0), t(0.0, 0.0, 1.0)]]), ThresholdStrategy::Mean).unwrap();
        assert!(result.barriers[0].selected);
        assert_eq!(result.threshold, result.barriers[0].score);
    }

    #[test]
    fn identical_panels_select_everything() {
        let row = vec![t(2.0, 3.0, 4.0), t(4.0, 5.0, 6.0), t(0.0, 0.0, 1.0)];
        let result = screen(&panel(vec![row; 7]), ThresholdStrategy::Mean).unwrap();
        assert!(result.barriers.iter().all(|b| b.selected));
    }

    #[test]
    fn fixed_threshold_can_reject_everything() {
        let result = screen(&panel(vec![vec![t(1.0, 2.0, 3.0)]; 3]), ThresholdStrategy::Fixed(100.0)).unwrap();
        assert_eq!(result.selected().count(), 0);
        assert_eq!(result.rejected().count(), 3);
    }

    #[test]
    fn panel_construction_errors() {
        let b = vec![Barrier::bare("B1"), Barrier::bare("B1")];
        let e = vec!["E1".to_string()];
        let rows = vec![vec![Tfn::ONE], vec![Tfn::ONE]];
        assert!(matches!(RatingPanel::new(b, e.clone(), rows, ValidationMode::Strict), Err(Error::DuplicateId(_))));

        let b = vec![Barrier::bare("B1"), Barrier::bare("B2")];
        let cells = vec![("B1".to_string(), "E1".to_string(), Tfn::ONE)];
        match RatingPanel::from_cells(b.clone(), e.clone(), cells, ValidationMode::Strict) {
            Err(Error::MissingCell(bar, exp)) => assert_eq!((bar.as_str(), exp.as_str()), ("B2", "E1")),
            other => panic!("unexpected {other:?}"),
        }

        let cells =
            vec![("B1".to_string(), "E1".to_string(), Tfn::ONE), ("B1".to_string(), "E1".to_string(), Tfn::ONE)];
        assert!(matches!(
            RatingPanel::from_cells(b.clone(), e.clone(), cells, ValidationMode::Strict),
            Err(Error::DuplicateCell(..))
        ));

        assert!(RatingPanel::new(vec![], e, vec![], ValidationMode::Strict).is_err());
    }

    #[test]
    fn lenient_panel_records_warnings() {
        let odd = Tfn::lenient(3.0, 2.0, 4.0).unwrap();
        let b = vec![Barrier::bare("B1")];
        let e = vec!["E1".to_string(), "E2".to_string()];
        let rows = vec![vec![t(1.0, 2.0, 3.0), odd]];
        assert!(RatingPanel::new(b.clone(), e.clone(), rows.clone(), ValidationMode::Strict).is_err());
        let p = RatingPanel::new(b, e, rows, ValidationMode::Lenient).unwrap();
        assert_eq!(p.warnings().len(), 1);
        assert_eq!(p.warnings()[0].location, "B1/E2");
        let result = screen(&p, ThresholdStrategy::Mean).unwrap();
        assert_eq!(result.warnings.len(), 1);
    }
}
