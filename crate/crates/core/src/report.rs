//! Run reports in JSON, CSV and Markdown.
//!
//! Every float is rounded to 6 significant digits before it is stored, so
//! a JSON report parsed back and re-emitted is byte-identical. Markdown
//! tables use 4 decimals.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::delphi::{ScreeningResult, ThresholdStrategy};
use crate::fahp::RankingResult;
use crate::formats::SourceText;
use crate::tfn::Tfn;
use crate::validation::{Warning, WarningKind};

pub const TOOL: &str = "fdahp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
    Md,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Md),
            other => Err(format!("unknown output format `{other}` (expected json, csv or md)")),
        }
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn sig6(x: f64) -> f64 {
    round_sig(x, 6)
}

fn sig6_tfn(t: &Tfn) -> [f64; 3] {
    t.components().map(sig6)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreenedRow {
    pub id: String,
    pub name: String,
    pub aggregate: [f64; 3],
    pub score: f64,
    pub selected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningSection {
    pub strategy: ThresholdStrategy,
    pub threshold: f64,
    pub selected: usize,
    pub rejected: usize,
    pub barriers: Vec<ScreenedRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub id: String,
    pub name: String,
    pub geometric_mean: [f64; 3],
    pub fuzzy_weight: [f64; 3],
    pub averaged_weight: f64,
    pub normalized_weight: f64,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingSection {
    pub total: [f64; 3],
    pub inverse_total: [f64; 3],
    /// Criterion ids from rank 1 downwards.
    pub order: Vec<String>,
    pub criteria: Vec<RankedRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Renumbered {
    pub original: String,
    pub criterion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageWarning {
    pub stage: String,
    pub kind: WarningKind,
    pub location: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screening: Option<ScreeningSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renumbering: Option<Vec<Renumbered>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<RankingSection>,
    pub warnings: Vec<StageWarning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            inputs: Vec::new(),
            screening: None,
            renumbering: None,
            ranking: None,
            warnings: Vec::new(),
            timing_ms: None,
        }
    }

    pub fn add_input(&mut self, role: &str, source: &SourceText) {
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: source.name.clone(),
            sha256: source.sha256.clone(),
        });
    }

    fn add_warnings(&mut self, stage: &str, warnings: &[Warning]) {
        self.warnings.extend(warnings.iter().map(|w| StageWarning {
            stage: stage.to_string(),
            kind: w.kind,
            location: w.location.clone(),
            message: w.message.clone(),
        }));
    }

    pub fn set_screening(&mut self, result: &ScreeningResult) {
        let barriers = result
            .barriers
            .iter()
            .map(|b| ScreenedRow {
                id: b.barrier.id.clone(),
                name: b.barrier.name.clone(),
                aggregate: sig6_tfn(&b.aggregate),
                score: sig6(b.score),
                selected: b.selected,
            })
            .collect();
        let strategy = match result.strategy {
            ThresholdStrategy::Fixed(v) => ThresholdStrategy::Fixed(sig6(v)),
            s => s,
        };
        self.screening = Some(ScreeningSection {
            strategy,
            threshold: sig6(result.threshold),
            selected: result.selected().count(),
            rejected: result.rejected().count(),
            barriers,
        });
        self.add_warnings("screening", &result.warnings);
    }

    pub fn set_renumbering<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) {
        self.renumbering = Some(
            pairs.into_iter().map(|(o, c)| Renumbered { original: o.to_string(), criterion: c.to_string() }).collect(),
        );
    }

    pub fn set_ranking(&mut self, result: &RankingResult) {
        let criteria = result
            .criteria
            .iter()
            .map(|c| RankedRow {
                id: c.criterion.id.clone(),
                name: c.criterion.name.clone(),
                geometric_mean: sig6_tfn(&c.geometric_mean),
                fuzzy_weight: sig6_tfn(&c.fuzzy_weight),
                averaged_weight: sig6(c.averaged_weight),
                normalized_weight: sig6(c.normalized_weight),
                rank: c.rank,
            })
            .collect();
        self.ranking = Some(RankingSection {
            total: sig6_tfn(&result.total),
            inverse_total: sig6_tfn(&result.inverse_total),
            order: result.by_rank().iter().map(|c| c.criterion.id.clone()).collect(),
            criteria,
        });
        self.add_warnings("ranking", &result.warnings);
    }

    pub fn set_timing(&mut self, millis: f64) {
        self.timing_ms = Some(sig6(millis));
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Md => self.to_markdown(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One table: screening rows, ranking rows, or (when both stages ran)
    /// one row per screened barrier with its criterion columns filled in
    /// for the selected ones.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt3 = |t: &[f64; 3]| t.map(|x| x.to_string());
        match (&self.screening, &self.ranking) {
            (Some(s), Some(r)) => {
                w.write_record([
                    "barrier_id",
                    "name",
                    "score",
                    "decision",
                    "criterion_id",
                    "normalized_weight",
                    "rank",
                ])
                .expect("csv write");
                for b in &s.barriers {
                    let criterion = self
                        .renumbering
                        .iter()
                        .flatten()
                        .find(|p| p.original == b.id)
                        .and_then(|p| r.criteria.iter().find(|c| c.id == p.criterion));
                    let (cid, weight, rank) = match criterion {
                        Some(c) => (c.id.clone(), c.normalized_weight.to_string(), c.rank.to_string()),
                        None => Default::default(),
                    };
                    w.write_record([&b.id, &b.name, &b.score.to_string(), decision(b.selected), &cid, &weight, &rank])
                        .expect("csv write");
                }
            }
            (Some(s), None) => {
                w.write_record(["barrier_id", "name", "l", "m", "u", "score", "decision"]).expect("csv write");
                for b in &s.barriers {
                    let [l, m, u] = fmt3(&b.aggregate);
                    w.write_record([&b.id, &b.name, &l, &m, &u, &b.score.to_string(), decision(b.selected)])
                        .expect("csv write");
                }
            }
            (None, Some(r)) => {
                w.write_record([
                    "criterion_id",
                    "name",
                    "r_l",
                    "r_m",
                    "r_u",
                    "w_l",
                    "w_m",
                    "w_u",
                    "averaged_weight",
                    "normalized_weight",
                    "rank",
                ])
                .expect("csv write");
                for c in &r.criteria {
                    let [rl, rm, ru] = fmt3(&c.geometric_mean);
                    let [wl, wm, wu] = fmt3(&c.fuzzy_weight);
                    w.write_record([
                        &c.id,
                        &c.name,
                        &rl,
                        &rm,
                        &ru,
                        &wl,
                        &wm,
                        &wu,
                        &c.averaged_weight.to_string(),
                        &c.normalized_weight.to_string(),
                        &c.rank.to_string(),
                    ])
                    .expect("csv write");
                }
            }
            (None, None) => {}
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8 csv")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} report\n", self.tool, self.command);
        for input in &self.inputs {
            let _ = writeln!(out, "- {}: `{}` (sha256 `{}`)", input.role, input.path, input.sha256);
        }
        if !self.inputs.is_empty() {
            out.push('\n');
        }
        if let Some(s) = &self.screening {
            let _ = writeln!(out, "## Screening\n");
            let _ = writeln!(
                out,
                "Threshold ({}): {:.4}. Selected {}, rejected {}.\n",
                s.strategy, s.threshold, s.selected, s.rejected
            );
            out.push_str("| Barrier | Name | Defuzzified value | Decision |\n|---|---|---|---|\n");
            for b in &s.barriers {
                let _ = writeln!(out, "| {} | {} | {:.4} | {} |", b.id, b.name, b.score, decision(b.selected));
            }
            out.push('\n');
        }
        if let Some(pairs) = &self.renumbering {
            out.push_str("## Renumbering\n\n| Screening id | Criterion id |\n|---|---|\n");
            for p in pairs {
                let _ = writeln!(out, "| {} | {} |", p.original, p.criterion);
            }
            out.push('\n');
        }
        if let Some(r) = &self.ranking {
            let _ = writeln!(out, "## Ranking\n");
            out.push_str("| Barrier | Name | Weight | Ranking |\n|---|---|---|---|\n");
            for c in &r.criteria {
                let _ = writeln!(out, "| {} | {} | {:.4} | {} |", c.id, c.name, c.normalized_weight, c.rank);
            }
            out.push('\n');
        }
        if !self.warnings.is_empty() {
            out.push_str("## Warnings\n\n");
            for w in &self.warnings {
                let _ = writeln!(out, "- [{}] {}: {}", w.stage, w.location, w.message);
            }
            out.push('\n');
        }
        out
    }
}

fn decision(selected: bool) -> &'static str {
    if selected {
        "Selected"
    } else {
        "Rejected"
    }
}
