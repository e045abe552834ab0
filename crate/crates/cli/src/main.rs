use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deltaomics::features::Scenario;
use deltaomics::pipeline::{self, PipelineConfig};
use deltaomics::regression::KernelKind;
use deltaomics::selection::Criterion;
use deltaomics::{Error, Result};

const DEFAULT_OUT: &str = "deltaomics-out";

/// Delta-radiomics/dosiomics regression pipeline.
#[derive(Debug, Parser)]
#[command(name = "deltaomics", version, about)]
struct Cli {
    /// Pipeline configuration (JSON); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for fold plans and synthetic cohorts; overrides cv.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides paths.output_dir.
    #[arg(long, global = true, env = "DELTAOMICS_OUT")]
    out: Option<PathBuf>,

    /// Scenario slug or label (e.g. R_init, RD_all); repeatable.
    #[arg(long, global = true, value_delimiter = ',')]
    scenario: Vec<Scenario>,

    /// X_abs or X_cnt; repeatable.
    #[arg(long, global = true, value_delimiter = ',')]
    criterion: Vec<Criterion>,

    /// linear, rbf, polynomial or sigmoid; repeatable.
    #[arg(long, global = true, value_delimiter = ',')]
    kernel: Vec<KernelKind>,

    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic cohort (feature CSVs or VOL1 volumes plus manifest).
    Synth,
    /// Extract the six feature blocks and labels from the cohort manifest.
    Extract,
    /// Rank features per scenario and criterion.
    Select,
    /// Repeated-CV sweep over feature counts per scenario, criterion and kernel.
    Evaluate,
    /// Consolidate all evaluation reports into report/summary.{json,md}.
    Report,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.cv.seed = Some(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&PipelineConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.paths.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn or_config<T: Copy>(requested: &[T], configured: &[T]) -> Vec<T> {
    if requested.is_empty() {
        configured.to_vec()
    } else {
        requested.to_vec()
    }
}

fn report_written(what: &str, out: &Path, files: &[PathBuf]) {
    println!("{what}: wrote {} file(s) under {}", files.len(), out.display());
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Report = cli.command {
        let cfg = cli.config.as_ref().map(|p| PipelineConfig::load(p)).transpose()?;
        let out = out_dir(cli, cfg.as_ref());
        let summary = pipeline::run_report(&out)?;
        print!("{}", pipeline::summary_markdown(&summary));
        return Ok(());
    }
    let cfg = load_config(cli)?;
    let out = out_dir(cli, Some(&cfg));
    let scenarios = or_config(&cli.scenario, &cfg.scenarios);
    let criteria = or_config(&cli.criterion, &cfg.criteria);
    let kernels = or_config(&cli.kernel, &cfg.kernels);
    match cli.command {
        Command::Synth => {
            let s = pipeline::run_synth(&cfg, &out)?;
            if let Some(m) = &s.manifest {
                println!("synth: cohort manifest at {}", m.display());
            }
            if let Some(d) = &s.features_dir {
                println!("synth: feature blocks in {}", d.display());
            }
            println!("synth: ground truth at {}", s.ground_truth.display());
        }
        Command::Extract => report_written("extract", &out, &pipeline::run_extract(&cfg, &out)?),
        Command::Select => report_written("select", &out, &pipeline::run_select(&cfg, &out, &scenarios, &criteria)?),
        Command::Evaluate => report_written(
            "evaluate",
            &out,
            &pipeline::run_evaluate(&cfg, &out, &scenarios, &criteria, &kernels)?,
        ),
        Command::Report => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    u8::try_from(e.exit_code()).unwrap_or(1)
}
