//! Regression harness over the embedded case study.
//!
//! [`verify_study`] recomputes both stages, compares every published
//! number at its tolerance, cross-checks the known data defects against
//! what lenient validation reports, and runs seeded property sweeps. Each
//! acceptance criterion becomes one [`Check`].

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::dataset::{Anomaly, PaperStudy};
use crate::delphi::{screen, LinguisticScale, ThresholdStrategy};
use crate::error::Result;
use crate::fahp::{run_fahp, RankingResult};
use crate::sample;
use crate::validation::WarningKind;

pub const SCORE_TOL: f64 = 0.01;
pub const THRESHOLD_RANGE: (f64, f64) = (7.11, 7.14);
pub const GEOMEAN_TOL: f64 = 0.005;
pub const INVERSE_TOL: f64 = 0.0005;
pub const WEIGHT_TOL: f64 = 0.002;
pub const TOP_WEIGHT: f64 = 0.21185;
pub const SUM_TOL: f64 = 1e-9;
pub const INVARIANCE_TOL: f64 = 1e-12;
pub const RECOVERY_TOL: f64 = 1e-9;

/// Sizes of the randomized part of the harness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepConfig {
    pub seed: u64,
    pub matrices: usize,
    pub panels: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { seed: 0x5eed_fa4b, matrices: 1000, panels: 1000 }
    }
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Line {
    pub item: String,
    pub computed: Value,
    pub expected: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Line {
    fn near(item: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        Line {
            item: item.into(),
            computed: json!(computed),
            expected: json!(expected),
            tolerance: Some(tol),
            passed: (computed - expected).abs() <= tol,
        }
    }

    fn exact(item: impl Into<String>, computed: impl Serialize, expected: impl Serialize) -> Self {
        let (computed, expected) = (json!(computed), json!(expected));
        let passed = computed == expected;
        Line { item: item.into(), computed, expected, tolerance: None, passed }
    }

    fn holds(item: impl Into<String>, computed: impl Serialize, expected: &str, passed: bool) -> Self {
        Line { item: item.into(), computed: json!(computed), expected: json!(expected), tolerance: None, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub title: String,
    pub passed: bool,
    pub lines: Vec<Line>,
}

impl Check {
    fn new(criterion: u8, title: &str, lines: Vec<Line>) -> Self {
        let passed = !lines.is_empty() && lines.iter().all(|l| l.passed);
        Check { criterion, title: title.to_string(), passed, lines }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Line> {
        self.lines.iter().filter(|l| !l.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub anomalies: Vec<Anomaly>,
}

impl VerifyReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verify report serializes") + "\n"
    }

    /// Side-by-side tables, the anomaly list, and a verdict.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let tag = if check.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "[{tag}] {}. {}", check.criterion, check.title);
            let _ = writeln!(out, "    {:<28} {:>14} {:>14} {:>10}  ok", "item", "computed", "expected", "tolerance");
            for line in &check.lines {
                let tol = line.tolerance.map(|t| format!("{t}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "    {:<28} {:>14} {:>14} {:>10}  {}",
                    line.item,
                    show(&line.computed),
                    show(&line.expected),
                    tol,
                    if line.passed { "yes" } else { "NO" }
                );
            }
            out.push('\n');
        }
        out.push_str("Known anomalies in the published data:\n");
        for a in &self.anomalies {
            let _ = writeln!(out, "  - {} [{} {}]: {}", a.id, a.resource, a.location, a.note);
        }
        out.push('\n');
        let failed: Vec<String> = self.failed_checks().map(|c| c.criterion.to_string()).collect();
        if failed.is_empty() {
            let _ = writeln!(out, "All {} checks passed.", self.checks.len());
        } else {
            let _ = writeln!(out, "FAILED checks: {}", failed.join(", "));
        }
        out
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Number(n) => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x.fract() == 0.0 && x.abs() < 1e15 {
                format!("{x}")
            } else if x.abs() < 1e-3 {
                format!("{x:.2e}")
            } else {
                format!("{x:.6}")
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn verify_study(study: &PaperStudy, sweep: SweepConfig) -> Result<VerifyReport> {
    let screening = screen(&study.delphi_panel, ThresholdStrategy::Mean)?;
    let ranking = run_fahp(&study.fahp_matrix)?;

    let mut scores = Vec::new();
    let mut partition = Vec::new();
    for exp in &study.delphi_expected {
        let got = screening.barriers.iter().find(|b| b.barrier.id == exp.id);
        scores.push(match got {
            Some(b) => Line::near(&exp.id, b.score, exp.score, SCORE_TOL),
            None => Line::holds(&exp.id, "missing", "present", false),
        });
        let decision = |s: bool| if s { "selected" } else { "rejected" };
        partition.push(Line::exact(
            format!("{} decision", exp.id),
            got.map(|b| decision(b.selected)).unwrap_or("missing"),
            decision(exp.selected),
        ));
    }
    let (lo, hi) = THRESHOLD_RANGE;
    let mut threshold = vec![Line::holds(
        "threshold",
        screening.threshold,
        &format!("[{lo}, {hi}]"),
        (lo..=hi).contains(&screening.threshold),
    )];
    threshold.push(Line::exact(
        "selected count",
        screening.selected().count(),
        study.delphi_expected.iter().filter(|e| e.selected).count(),
    ));
    threshold.extend(partition);

    let checks = vec![
        Check::new(1, "Delphi scores", scores),
        Check::new(2, "Delphi threshold and partition", threshold),
        Check::new(3, "FAHP geometric means and total", geomean_lines(study, &ranking)),
        Check::new(4, "FAHP inverse total", inverse_lines(study, &ranking)),
        Check::new(5, "FAHP normalized weights", weight_lines(study, &ranking)),
        Check::new(6, "FAHP ranking", ranking_lines(study, &ranking)),
        Check::new(7, "Known anomalies detected and listed", anomaly_lines(study, &ranking)),
        Check::new(8, "Property sweeps", property_lines(sweep)?),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { passed, checks, anomalies: study.anomalies.clone() })
}

fn computed<'a>(ranking: &'a RankingResult, id: &str) -> Option<&'a crate::fahp::RankedCriterion> {
    ranking.criteria.iter().find(|c| c.criterion.id == id)
}

fn triple_lines(label: &str, got: [f64; 3], want: [f64; 3], tol: f64) -> Vec<Line> {
    ["l", "m", "u"]
        .iter()
        .zip(got.iter().zip(want))
        .map(|(part, (g, w))| Line::near(format!("{label}.{part}"), *g, w, tol))
        .collect()
}

fn geomean_lines(study: &PaperStudy, ranking: &RankingResult) -> Vec<Line> {
    let mut lines = Vec::new();
    for exp in &study.fahp_expected.criteria {
        match computed(ranking, &exp.id) {
            Some(c) => lines.extend(triple_lines(
                &format!("r({})", exp.id),
                c.geometric_mean.components(),
                exp.geometric_mean,
                GEOMEAN_TOL,
            )),
            None => lines.push(Line::holds(&exp.id, "missing", "present", false)),
        }
    }
    lines.extend(triple_lines("total", ranking.total.components(), study.fahp_expected.total, GEOMEAN_TOL));
    lines
}

fn inverse_lines(study: &PaperStudy, ranking: &RankingResult) -> Vec<Line> {
    triple_lines("inverse", ranking.inverse_total.components(), study.fahp_expected.inverse(), INVERSE_TOL)
}

fn weight_lines(study: &PaperStudy, ranking: &RankingResult) -> Vec<Line> {
    study
        .fahp_expected
        .criteria
        .iter()
        .map(|exp| match computed(ranking, &exp.id) {
            Some(c) => Line::near(format!("N({})", exp.id), c.normalized_weight, exp.normalized_weight, WEIGHT_TOL),
            None => Line::holds(&exp.id, "missing", "present", false),
        })
        .collect()
}

fn ranking_lines(study: &PaperStudy, ranking: &RankingResult) -> Vec<Line> {
    let order: Vec<&str> = ranking.by_rank().iter().map(|c| c.criterion.id.as_str()).collect();
    let expected = study.fahp_expected.order();
    let mut lines = vec![Line::exact("order", order.join(" "), expected.join(" "))];
    let weight = |id: &str| computed(ranking, id).map(|c| c.normalized_weight);
    if let [a, b, c, ..] = expected.as_slice() {
        match (weight(a), weight(b), weight(c)) {
            (Some(wa), Some(wb), Some(wc)) => {
                lines.push(Line::holds(
                    format!("N({a}) > N({b}) > N({c})"),
                    format!("{wa:.6} > {wb:.6} > {wc:.6}"),
                    "strictly decreasing",
                    wa > wb && wb > wc,
                ));
                lines.push(Line::near(format!("N({a})"), wa, TOP_WEIGHT, WEIGHT_TOL));
            }
            _ => lines.push(Line::holds("top three", "missing", "present", false)),
        }
    }
    lines
}

/// The published fuzzy weights were formed with a modal multiplier other
/// than the inverse total; lenient validation must flag exactly the
/// matrix cells the anomaly list names.
fn anomaly_lines(study: &PaperStudy, ranking: &RankingResult) -> Vec<Line> {
    let listed = |id: &str| study.anomalies.iter().any(|a| a.id == id);
    let mut lines = Vec::new();

    let ratios: Vec<f64> = study
        .fahp_expected
        .criteria
        .iter()
        .filter_map(|exp| computed(ranking, &exp.id).map(|c| exp.fuzzy_weight[1] / c.geometric_mean.modal()))
        .collect();
    let observed = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let canonical = ranking.inverse_total.modal();
    let differs = (observed - canonical).abs() > 10.0 * INVERSE_TOL;
    lines.push(Line::holds(
        "modal multiplier",
        format!("{observed:.4} vs {canonical:.6}"),
        "published differs from inverse",
        differs && listed("modal-multiplier"),
    ));

    let mut seen_non_monotone = false;
    let mut seen_reciprocity = false;
    for w in &ranking.warnings {
        seen_non_monotone |= w.kind == WarningKind::NonMonotone;
        seen_reciprocity |= w.kind == WarningKind::Reciprocity;
        let known = study.anomalies.iter().any(|a| a.resource == "matrix.csv" && a.location == w.location);
        let kind = serde_json::to_value(w.kind).ok().and_then(|v| v.as_str().map(str::to_string));
        lines.push(Line::holds(
            format!("{} {}", kind.unwrap_or_default(), w.location),
            "warned",
            "listed anomaly",
            known,
        ));
    }
    lines.push(Line::holds("non-monotone cell warned", seen_non_monotone, "true", seen_non_monotone));
    lines.push(Line::holds("off-reciprocal cell warned", seen_reciprocity, "true", seen_reciprocity));
    lines
}

fn property_lines(sweep: SweepConfig) -> Result<Vec<Line>> {
    let mut rng = sample::rng(sweep.seed);
    let mut worst_sum = 0.0f64;
    let mut worst_relabel = 0.0f64;
    let mut worst_scale = 0.0f64;
    let mut worst_recovery = 0.0f64;
    let mut rank_breaks = 0usize;

    for k in 0..sweep.matrices {
        let n = 2 + k % 11;
        let m = sample::reciprocal_matrix(&mut rng, n);
        let base = run_fahp(&m)?;
        let weights = base.normalized_weights();
        worst_sum = worst_sum.max((weights.iter().sum::<f64>() - 1.0).abs());

        let order = sample::permutation(&mut rng, n);
        let relabeled = run_fahp(&m.permuted(&order)?)?;
        for (pos, &src) in order.iter().enumerate() {
            let (a, b) = (&relabeled.criteria[pos], &base.criteria[src]);
            worst_relabel = worst_relabel.max((a.normalized_weight - b.normalized_weight).abs());
        }
        let by_id = |r: &RankingResult| {
            let mut v: Vec<(String, usize)> = r.criteria.iter().map(|c| (c.criterion.id.clone(), c.rank)).collect();
            v.sort();
            v
        };
        if by_id(&relabeled) != by_id(&base) {
            rank_breaks += 1;
        }

        let c = rand::Rng::gen_range(&mut rng, 0.1..10.0);
        let scaled = run_fahp(&sample::scaled(&m, c)?)?;
        for (a, b) in scaled.criteria.iter().zip(&base.criteria) {
            worst_scale = worst_scale.max((a.normalized_weight - b.normalized_weight).abs());
        }
        if scaled.ranks() != base.ranks() {
            rank_breaks += 1;
        }

        let w = sample::random_weights(&mut rng, n);
        let total: f64 = w.iter().sum();
        let recovered = run_fahp(&sample::consistent_matrix(&w)?)?;
        for (c, wi) in recovered.criteria.iter().zip(&w) {
            let truth = wi / total;
            worst_recovery = worst_recovery.max((c.normalized_weight - truth).abs() / truth);
        }
    }

    let scale = LinguisticScale::delphi10();
    let mut decision_breaks = 0usize;
    for k in 0..sweep.panels {
        let barriers = 1 + k % 16;
        let experts = 2 + (k / 16) % 12;
        let panel = sample::integer_panel(&mut rng, barriers, experts, &scale)?;
        let order = sample::permutation(&mut rng, experts);
        let shuffled = sample::permute_experts(&panel, &order)?;
        let a = screen(&panel, ThresholdStrategy::Mean)?;
        let b = screen(&shuffled, ThresholdStrategy::Mean)?;
        let decisions = |r: &crate::delphi::ScreeningResult| r.barriers.iter().map(|s| s.selected).collect::<Vec<_>>();
        if decisions(&a) != decisions(&b) {
            decision_breaks += 1;
        }
    }

    let m = sweep.matrices;
    Ok(vec![
        Line::holds(
            format!("max |sum N - 1| ({m} matrices)"),
            worst_sum,
            &format!("<= {SUM_TOL:e}"),
            worst_sum <= SUM_TOL,
        ),
        Line::holds(
            "max relabel drift",
            worst_relabel,
            &format!("<= {INVARIANCE_TOL:e}"),
            worst_relabel <= INVARIANCE_TOL,
        ),
        Line::holds("max scale drift", worst_scale, &format!("<= {INVARIANCE_TOL:e}"), worst_scale <= INVARIANCE_TOL),
        Line::exact("rank vector changes", rank_breaks, 0),
        Line::holds(
            "max recovery rel. error",
            worst_recovery,
            &format!("<= {RECOVERY_TOL:e}"),
            worst_recovery <= RECOVERY_TOL,
        ),
        Line::exact(format!("decision changes ({} panels)", sweep.panels), decision_breaks, 0),
    ])
}
