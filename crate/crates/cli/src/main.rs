use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use fdahp::dataset::{export_study, load_paper_study, study_from_dir};
use fdahp::delphi::{LinguisticScale, ThresholdStrategy};
use fdahp::formats::InputFormat;
use fdahp::pipeline::{rank_file, run_pipeline, screen_file, write_output, InputSpec, PipelineConfig};
use fdahp::report::{Report, ReportFormat};
use fdahp::verify::{verify_study, SweepConfig};
use fdahp::{Error, ValidationMode};

const EXIT_VERIFY: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "fdahp", version, about = "Fuzzy Delphi screening and fuzzy AHP ranking")]
struct Cli {
    /// Diagnostics written to stderr.
    #[arg(long, global = true, value_enum, default_value_t = LogLevel::Warn)]
    log_level: LogLevel,
    /// Record the run's wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogLevel {
    Error,
    Warn,
    Info,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate expert ratings and keep the barriers at or above the threshold.
    Screen {
        #[arg(long)]
        ratings: PathBuf,
        /// Input format; defaults to the file extension.
        #[arg(long)]
        format: Option<InputFormat>,
        #[arg(long, default_value = LinguisticScale::DELPHI_10)]
        scale: String,
        /// `mean` or a fixed number.
        #[arg(long, default_value = "mean")]
        threshold: ThresholdStrategy,
        #[arg(long, default_value = "strict")]
        mode: ValidationMode,
        #[arg(long, default_value = "json")]
        emit: ReportFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Weight and rank criteria from a fuzzy pairwise comparison matrix.
    Rank {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        format: Option<InputFormat>,
        /// Overrides a mode declared in the matrix file; strict otherwise.
        #[arg(long)]
        mode: Option<ValidationMode>,
        #[arg(long, default_value = "json")]
        emit: ReportFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Screen, renumber, and rank in one run driven by a JSON config.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output format.
        #[arg(long)]
        emit: Option<ReportFormat>,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute the bundled case study and compare against its published values.
    PaperVerify {
        #[arg(long, value_enum, default_value_t = VerifyEmit::Text)]
        emit: VerifyEmit,
        /// Read ratings and matrix files from here instead of the embedded copies.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Seed for the property sweeps.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the bundled case study as input files plus a pipeline config.
    Export {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "csv")]
        format: InputFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyEmit {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.log_level {
        LogLevel::Error => log::LevelFilter::Error,
        LogLevel::Warn => log::LevelFilter::Warn,
        LogLevel::Info => log::LevelFilter::Info,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    match run(cli.command, cli.timing) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_INVALID })
        }
    }
}

fn run(command: Command, timing: bool) -> Result<ExitCode, Error> {
    let started = Instant::now();
    let finish = |mut report: Report, format: ReportFormat, output: Option<&Path>| -> Result<ExitCode, Error> {
        for w in &report.warnings {
            log::warn!("{} stage: {}: {}", w.stage, w.location, w.message);
        }
        if timing {
            report.set_timing(started.elapsed().as_secs_f64() * 1000.0);
        }
        emit(&report.render(format), output)?;
        Ok(ExitCode::SUCCESS)
    };

    match command {
        Command::Screen { ratings, format, scale, threshold, mode, emit, output } => {
            let spec = InputSpec { path: ratings, format };
            let (result, report) = screen_file(&spec, &scale, threshold, mode)?;
            log::info!(
                "threshold {:.6}: {} selected, {} rejected",
                result.threshold,
                result.selected().count(),
                result.rejected().count()
            );
            finish(report, emit, output.as_deref())
        }
        Command::Rank { matrix, format, mode, emit, output } => {
            let spec = InputSpec { path: matrix, format };
            let (_, report) = rank_file(&spec, mode)?;
            finish(report, emit, output.as_deref())
        }
        Command::Pipeline { config, emit, output } => {
            let config = PipelineConfig::load(&config)?;
            let outcome = run_pipeline(&config)?;
            let format = emit.unwrap_or(config.output.format);
            let output = output.or(config.output.path.clone());
            finish(outcome.report, format, output.as_deref())
        }
        Command::PaperVerify { emit: how, data_dir, seed } => {
            let study = match &data_dir {
                Some(dir) => study_from_dir(dir)?,
                None => load_paper_study()?,
            };
            let mut sweep = SweepConfig::default();
            if let Some(seed) = seed {
                sweep.seed = seed;
            }
            let report = verify_study(&study, sweep)?;
            let text = match how {
                VerifyEmit::Text => report.to_text(),
                VerifyEmit::Json => report.to_json(),
            };
            emit(&text, None)?;
            if report.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                for check in report.failed_checks() {
                    log::error!("check {} ({}) failed", check.criterion, check.title);
                }
                Ok(ExitCode::from(EXIT_VERIFY))
            }
        }
        Command::Export { dir, format } => {
            for path in export_study(&load_paper_study()?, &dir, format)? {
                log::info!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(path) => write_output(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e })
        }
    }
}
