//! Screening, ranking, and the two chained through a config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{renumber_selected, RenumberMap};
use crate::delphi::{screen, LinguisticScale, RatingPanel, ScreeningResult, ThresholdStrategy};
use crate::error::{Error, Result};
use crate::fahp::{run_fahp, PairwiseMatrix, RankingResult};
use crate::formats::{parse_matrix, parse_ratings, read_source, InputFormat, SourceText};
use crate::report::{Report, ReportFormat};
use crate::validation::ValidationMode;

/// A file plus an optional format; without one the extension decides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<InputFormat>,
}

impl InputSpec {
    pub fn format(&self) -> InputFormat {
        self.format.unwrap_or_else(|| InputFormat::from_path(&self.path))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// Equal weights keep their input order.
    #[default]
    Index,
}

/// How selected barriers are relabelled before ranking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Renumbering {
    /// `{prefix}1`, `{prefix}2`, ... in screening order.
    #[default]
    Sequential,
    /// Keep the screening ids.
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub ratings: InputSpec,
    #[serde(default = "default_scale")]
    pub scale: String,
    #[serde(default = "default_threshold")]
    pub threshold: ThresholdStrategy,
    /// Required: pairwise judgements are never synthesized.
    pub matrix: Option<InputSpec>,
    #[serde(default)]
    pub mode: ValidationMode,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub renumber: Renumbering,
    #[serde(default = "default_prefix")]
    pub prefix: String,
}

fn default_scale() -> String {
    LinguisticScale::DELPHI_10.to_string()
}

fn default_threshold() -> ThresholdStrategy {
    ThresholdStrategy::Mean
}

fn default_prefix() -> String {
    "B".to_string()
}

impl PipelineConfig {
    /// Reads a JSON config. Relative paths inside it are taken relative
    /// to the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let source = read_source(path)?;
        let mut config: PipelineConfig =
            serde_json::from_str(&source.text).map_err(|e| Error::parse(&source.name, e.line(), e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.ratings.path = base.join(&config.ratings.path);
        if let Some(m) = &mut config.matrix {
            m.path = base.join(&m.path);
        }
        if let Some(p) = &mut config.output.path {
            *p = base.join(&*p);
        }
        Ok(config)
    }
}

/// Everything a pipeline run produced.
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    pub screening: ScreeningResult,
    pub renumbering: RenumberMap,
    pub ranking: RankingResult,
    pub report: Report,
}

fn load_ratings(spec: &InputSpec, scale: &str, mode: ValidationMode) -> Result<(SourceText, RatingPanel)> {
    let source = read_source(&spec.path)?;
    let scale = LinguisticScale::by_name(scale)?;
    let panel = parse_ratings(&source.text, spec.format(), &source.name, &scale)?.into_panel(mode)?;
    Ok((source, panel))
}

/// Screens one ratings file.
pub fn screen_file(
    spec: &InputSpec,
    scale: &str,
    threshold: ThresholdStrategy,
    mode: ValidationMode,
) -> Result<(ScreeningResult, Report)> {
    let (source, panel) = load_ratings(spec, scale, mode)?;
    let result = screen(&panel, threshold)?;
    let mut report = Report::new("screen");
    report.add_input("ratings", &source);
    report.set_screening(&result);
    Ok((result, report))
}

/// Ranks the criteria of one matrix file. `mode` overrides a mode declared
/// inside the file.
pub fn rank_file(spec: &InputSpec, mode: Option<ValidationMode>) -> Result<(RankingResult, Report)> {
    let source = read_source(&spec.path)?;
    let matrix = parse_matrix(&source.text, spec.format(), &source.name)?.into_matrix(mode)?;
    let result = run_fahp(&matrix)?;
    let mut report = Report::new("rank");
    report.add_input("matrix", &source);
    report.set_ranking(&result);
    Ok((result, report))
}

/// Screens, relabels the selected barriers, then ranks them with the
/// configured matrix. Errors name the stage they came from.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    let mode = config.mode;
    let (ratings_source, panel) =
        load_ratings(&config.ratings, &config.scale, mode).map_err(|e| e.in_stage("screening"))?;
    let screening = screen(&panel, config.threshold).map_err(|e| e.in_stage("screening"))?;

    let selected: Vec<&str> = screening.selected().map(|s| s.barrier.id.as_str()).collect();
    if selected.is_empty() {
        return Err(Error::Coverage(format!(
            "no barrier reached the threshold {:.6}; an empty selection cannot be ranked",
            screening.threshold
        ))
        .in_stage("renumbering"));
    }
    let renumbering = match config.renumber {
        Renumbering::Sequential => RenumberMap::sequential(selected, &config.prefix),
        Renumbering::Identity => RenumberMap::identity(selected),
    };
    let criteria = renumber_selected(&screening, &renumbering).map_err(|e| e.in_stage("renumbering"))?;

    let matrix_spec = config.matrix.as_ref().ok_or_else(|| {
        Error::Config("a pairwise comparison matrix is required; none is derived automatically".to_string())
            .in_stage("ranking")
    })?;
    let (matrix_source, ranking) = (|| {
        let source = read_source(&matrix_spec.path)?;
        let parsed = parse_matrix(&source.text, matrix_spec.format(), &source.name)?;
        let matrix = PairwiseMatrix::build(parsed.entries, criteria, mode)?;
        Ok::<_, Error>((source, run_fahp(&matrix)?))
    })()
    .map_err(|e| e.in_stage("ranking"))?;

    let mut report = Report::new("pipeline");
    report.add_input("ratings", &ratings_source);
    report.add_input("matrix", &matrix_source);
    report.set_screening(&screening);
    report.set_renumbering(renumbering.pairs.iter().map(|(o, n)| (o.as_str(), n.as_str())));
    report.set_ranking(&ranking);
    Ok(PipelineOutcome { screening, renumbering, ranking, report })
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_output(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
