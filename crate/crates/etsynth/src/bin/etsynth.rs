use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use etsynth::cases::{select_cases, CaseFilter, ViewPosition};
use etsynth::config::{Counts, GenerationConfig};
use etsynth::debug::dump_profiles;
use etsynth::fixture::write_fixture;
use etsynth::{generate_dataset, Error, GenerateOptions, Result};

#[derive(Parser)]
#[command(
    name = "etsynth",
    version,
    about = "Synthetic endotracheal tube radiograph generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate images, masks and manifest.jsonl.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the output directory in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Check inputs and counts without writing anything.
        #[arg(long)]
        dry_run: bool,
    },
    /// Write the ids of cases with the given view position, one per line.
    Select {
        #[arg(long)]
        metadata: PathBuf,
        #[arg(long, default_value = "AP")]
        view: String,
        #[arg(long)]
        out: PathBuf,
        /// Case ids to leave out, one per line.
        #[arg(long)]
        exclude: Option<PathBuf>,
    },
    /// Dump the cross-section, raw projections and sampled profiles.
    Profiles {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a small toy corpus and a matching config.json.
    Fixture {
        #[arg(long)]
        out: PathBuf,
        /// Number of AP cases; half as many PA cases are added.
        #[arg(long, default_value_t = 10)]
        cases: usize,
        #[arg(long, default_value_t = 224)]
        size: u32,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            config,
            seed,
            out,
            workers,
            dry_run,
        } => {
            let mut cfg = GenerationConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if out.is_some() {
                cfg.paths.out_dir = out;
            }
            let report = generate_dataset(&cfg, &GenerateOptions { workers, dry_run })?;
            if dry_run {
                println!(
                    "{} eligible cases for {} requested; nothing written",
                    report.eligible,
                    cfg.counts.total()
                );
            } else {
                println!(
                    "wrote {} cases ({} skipped) to {}",
                    report.entries.len(),
                    report.skipped.len(),
                    cfg.paths
                        .out_dir
                        .as_deref()
                        .unwrap_or_else(|| "".as_ref())
                        .display()
                );
            }
        }
        Command::Select {
            metadata,
            view,
            out,
            exclude,
        } => {
            let mut filter = CaseFilter {
                view: Some(ViewPosition::parse(&view)),
                ..Default::default()
            };
            if let Some(ex) = exclude {
                filter = filter.with_exclusions_from(&ex)?;
            }
            let records = select_cases(&metadata, &filter)?;
            let mut f = fs::File::create(&out).map_err(|e| io_err(&out, e))?;
            for r in &records {
                writeln!(f, "{}", r.case_id).map_err(|e| io_err(&out, e))?;
            }
            println!("{} cases", records.len());
        }
        Command::Profiles { config, out } => {
            let cfg = match config {
                Some(p) => GenerationConfig::load(&p)?,
                None => GenerationConfig::default(),
            };
            cfg.tube.validate()?;
            dump_profiles(&cfg.tube, &cfg.angles, &out)?;
        }
        Command::Fixture { out, cases, size } => {
            let fx = write_fixture(&out, cases, cases / 2, size)?;
            let mut cfg = fx.config(
                0,
                Counts {
                    num_positive: cases / 2,
                    num_negative: cases - cases / 2,
                },
                &out.join("dataset"),
            );
            cfg.working_resolution = size as usize;
            let path = out.join("config.json");
            let text = serde_json::to_string_pretty(&cfg).map_err(|source| Error::Json {
                path: path.clone(),
                source,
            })?;
            fs::write(&path, text).map_err(|e| io_err(&path, e))?;
            println!("fixture with {cases} AP cases at {}", out.display());
        }
    }
    Ok(())
}

fn io_err(path: &std::path::Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
