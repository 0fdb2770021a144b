use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qgelab::ensembles::{EnsembleConfig, EnsembleKind, Scaling};
use qgelab::experiments::{self, Command, Format, RunConfig};
use qgelab::laws::{ExperimentReport, Thresholds};

#[derive(Parser)]
#[command(
    name = "qgelab",
    version,
    about = "Quaternionic Ginibre verification batteries"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Squared radii against independent gamma (or Gamma_V) variables
    Kostlan(Common),
    /// High powers of the eigenvalues against independent variables
    Highpowers(Common),
    /// Overlap matrix identities and diagonal overlap laws
    Overlaps(Common),
    /// Angles between eigenvectors
    Angles(Common),
    /// Pfaffian checks and the De Bruijn identity
    Debruijn(Common),
    /// Lack-of-normality central limit theorems
    Normality(Common),
    /// Rerun the configuration embedded in a report and compare
    Replay { report: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Ensemble {
    Ginibre,
    SchurGinibre,
    SchurConditionedZero,
    Truncated,
    Product,
    Spherical,
    ComplexGinibre,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "ginibre")]
    ensemble: Ensemble,
    /// Matrix size N (quaternionic)
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Power for highpowers (default 2N)
    #[arg(long)]
    m: Option<u32>,
    /// Number of factors for the product ensemble
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Truncation size n for truncated unitary minors
    #[arg(long = "trunc-n", default_value_t = 1)]
    trunc_n: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Report eigenvalues of the circularly scaled matrix
    #[arg(long)]
    scaled: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
    /// Threshold override, `name=value`; may be repeated
    #[arg(long = "threshold", value_parser = parse_threshold)]
    thresholds: Vec<(String, f64)>,
}

fn parse_threshold(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected name=value")?;
    let v: f64 = v.parse().map_err(|e| format!("{v}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

impl Common {
    fn into_config(self, command: Command) -> RunConfig {
        let kind = match self.ensemble {
            Ensemble::Ginibre => EnsembleKind::Ginibre,
            Ensemble::SchurGinibre => EnsembleKind::SchurGinibre,
            Ensemble::SchurConditionedZero => EnsembleKind::SchurConditionedZero,
            Ensemble::Truncated => EnsembleKind::TruncatedUnitary { n: self.trunc_n },
            Ensemble::Product => EnsembleKind::Product { k: self.k },
            Ensemble::Spherical => EnsembleKind::Spherical,
            Ensemble::ComplexGinibre => EnsembleKind::ComplexGinibre,
        };
        let scaling = if self.scaled {
            Scaling::Circular
        } else {
            Scaling::Unscaled
        };
        RunConfig {
            command,
            ensemble: EnsembleConfig::new(kind, self.n)
                .with_seed(self.seed)
                .with_scaling(scaling),
            m: self.m,
            trials: self.trials,
            out: self.out,
            format: match self.format {
                OutFormat::Csv => Format::Csv,
                OutFormat::Json => Format::Json,
            },
            thresholds: Thresholds(self.thresholds.into_iter().collect::<BTreeMap<_, _>>()),
        }
    }
}

fn summary(report: &ExperimentReport) -> String {
    let asserted = report.statistics.iter().filter(|s| s.asserted).count()
        + report.checks.iter().filter(|c| c.asserted).count();
    let failed = report
        .statistics
        .iter()
        .filter(|s| s.asserted && !s.verdict.is_pass())
        .count()
        + report
            .checks
            .iter()
            .filter(|c| c.asserted && !c.verdict.is_pass())
            .count();
    format!(
        "{}: {} ({asserted} asserted, {failed} failed, {} excluded, {:.1}s)",
        report.name,
        if failed == 0 { "PASS" } else { "FAIL" },
        report.excluded,
        report.runtime_seconds
    )
}

fn execute(cfg: RunConfig) -> Result<bool, experiments::ExperimentError> {
    let report = experiments::run(&cfg)?;
    let text = experiments::render(&report, cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    eprintln!("{}", summary(&report));
    for note in &report.notes {
        eprintln!("note: {note}");
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Kostlan(c) => execute(c.into_config(Command::Kostlan)),
        Cmd::Highpowers(c) => execute(c.into_config(Command::Highpowers)),
        Cmd::Overlaps(c) => execute(c.into_config(Command::Overlaps)),
        Cmd::Angles(c) => execute(c.into_config(Command::Angles)),
        Cmd::Debruijn(c) => execute(c.into_config(Command::Debruijn)),
        Cmd::Normality(c) => execute(c.into_config(Command::Normality)),
        Cmd::Replay { report } => std::fs::read_to_string(&report)
            .map_err(Into::into)
            .and_then(|text| experiments::replay_rendered(&text))
            .map(|(fresh, same)| {
                eprintln!("{}", summary(&fresh));
                eprintln!("replay: {}", if same { "identical" } else { "DIFFERS" });
                same
            }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
