//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meppm_core::codes::{msequence_difference_set, paley_difference_set, search_ooc, SearchOptions};
use meppm_core::link::Link;

use crate::catalog::{self, CodeFile};
use crate::config::Config;
use crate::error::AppError;
use crate::montecarlo::{run_point, sweep_configs, RunOptions, SweepVariable};
use crate::report::{
    analytic_row, constellation_csv, manifest_path, read_rows, simulation_row, write_rows, Command, Formula,
    Manifest, ResultRow, SweepSpec,
};

#[derive(Debug, Parser)]
#[command(name = "meppm", version, about = "Multi-user MEPPM link simulator and analysis tool")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set users.count=6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Generate and verify code files.
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Inspect modulation alphabets.
    #[command(subcommand)]
    Constellation(ConstellationCmd),
    /// Monte Carlo simulation.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Closed-form error rates.
    Analyze(AnalyzeArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
pub enum CodesCmd {
    /// Cyclic difference-set BIBD.
    GenBibd {
        /// Quadratic residues modulo a prime Q = 3 mod 4.
        #[arg(long, value_name = "Q", conflicts_with = "mseq", required_unless_present = "mseq")]
        paley: Option<u32>,
        /// Support of an m-sequence of length 2^M - 1.
        #[arg(long, value_name = "M")]
        mseq: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optical orthogonal code by randomized search.
    GenOoc {
        #[arg(long)]
        length: usize,
        #[arg(long)]
        weight: usize,
        #[arg(long)]
        alpha: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        local_steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check code files; exits with status 2 when any fails.
    Verify {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConstellationCmd {
    /// One row per slot of every symbol of one user.
    Dump {
        /// One-based user; defaults to `users.desired`.
        #[arg(long)]
        user: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Results CSV; a manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Free-text note stored in the manifest.
    #[arg(long = "note")]
    pub notes: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// users, p0_w, signal_photons or scheme.
    #[arg(long = "var")]
    pub variable: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum SimCmd {
    /// Simulate the configured link.
    Run(OutputArgs),
    /// Simulate one link per value of a swept key.
    Sweep {
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// mai, high-snr, union or dmeppm; defaults by scheme.
    #[arg(long)]
    pub formula: Option<String>,
    #[arg(long = "var", requires = "values")]
    pub variable: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Worker threads for the re-run; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Compare with the recorded results and exit with status 2 on any difference.
    #[arg(long)]
    pub check: bool,
}

/// Parses `args` (program name first), runs, and maps failures to exit codes.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), AppError> {
    let base = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let config = base.with_overrides(&cli.overrides)?;
    match cli.command {
        Cmd::Codes(cmd) => codes(cmd, &config),
        Cmd::Constellation(ConstellationCmd::Dump { user, out }) => {
            let link = Link::new(config.link_spec()?)?;
            let user = user.unwrap_or(config.desired);
            if user == 0 || user > link.users().len() {
                return Err(AppError::Config(format!(
                    "--user: must be between 1 and {}",
                    link.users().len()
                )));
            }
            emit(out.as_deref(), &constellation_csv(&link.users()[user - 1]))
        }
        Cmd::Sim(SimCmd::Run(output)) => record(Command::Run, &config, None, None, output),
        Cmd::Sim(SimCmd::Sweep { sweep, output }) => {
            let spec = SweepSpec {
                variable: sweep.variable,
                values: sweep.values,
            };
            record(Command::Sweep, &config, Some(spec), None, output)
        }
        Cmd::Analyze(args) => {
            let formula = args.formula.as_deref().map(Formula::parse).transpose()?;
            let spec = args.variable.map(|variable| SweepSpec {
                variable,
                values: args.values,
            });
            record(Command::Analyze, &config, spec, formula, args.output)
        }
        Cmd::Replay(args) => replay(args),
    }
}

fn codes(cmd: CodesCmd, config: &Config) -> Result<(), AppError> {
    match cmd {
        CodesCmd::GenBibd { paley, mseq, out } => {
            let code = match (paley, mseq) {
                (Some(q), None) => paley_difference_set(q)?,
                (None, Some(m)) => msequence_difference_set(m)?,
                _ => return Err(AppError::Config("give exactly one of --paley or --mseq".into())),
            };
            emit(out.as_deref(), &catalog::format_code(&CodeFile::Bibd(code)))
        }
        CodesCmd::GenOoc {
            length,
            weight,
            alpha,
            count,
            seed,
            local_steps,
            out,
        } => {
            let options = SearchOptions {
                seed,
                local_steps,
                ..SearchOptions::default()
            };
            let code = search_ooc(length, weight, alpha, count, options)?;
            catalog::check_ooc(&code)?;
            emit(out.as_deref(), &catalog::format_code(&CodeFile::Ooc(code)))
        }
        CodesCmd::Verify { paths } => {
            let _ = config;
            let mut failed = Vec::new();
            for path in &paths {
                match catalog::load_code(path) {
                    Ok(code) => println!("{}: ok ({})", path.display(), describe(&code)),
                    Err(e @ (AppError::Verification(_) | AppError::Malformed { .. })) => {
                        println!("{}: FAILED: {e}", path.display());
                        failed.push(path.display().to_string());
                    }
                    Err(e) => return Err(e),
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(AppError::Verification(failed.join(", ")))
            }
        }
    }
}

fn describe(code: &CodeFile) -> String {
    match code {
        CodeFile::Bibd(c) => format!("({},{},{}) BIBD", c.q(), c.k(), c.lambda()),
        CodeFile::Ooc(c) => format!("({},{},{}) OOC, {} words", c.length(), c.weight(), c.alpha(), c.len()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| AppError::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| AppError::io(Path::new("<stdout>"), e))
        }
    }
}

/// Result rows for a recorded command; depends only on its inputs.
pub fn produce_rows(
    command: &Command,
    config: &Config,
    sweep: Option<&SweepSpec>,
    formula: Option<Formula>,
) -> Result<Vec<ResultRow>, AppError> {
    let configs = match sweep {
        Some(s) => {
            if s.values.is_empty() {
                return Err(AppError::Config("sweep needs at least one value".into()));
            }
            sweep_configs(config, SweepVariable::parse(&s.variable)?, &s.values)?
        }
        None => vec![config.clone()],
    };
    configs
        .iter()
        .map(|c| {
            let link = Link::new(c.link_spec()?)?;
            match command {
                Command::Analyze => {
                    let formula = match formula {
                        Some(f) => f,
                        None => Formula::default_for(link.spec())?,
                    };
                    analytic_row(c, &link, formula)
                }
                Command::Run | Command::Sweep => {
                    let result = run_point(&link, &RunOptions::from_config(c))?;
                    Ok(simulation_row(c, &link, &result))
                }
            }
        })
        .collect()
}

fn record(
    command: Command,
    config: &Config,
    sweep: Option<SweepSpec>,
    formula: Option<Formula>,
    output: OutputArgs,
) -> Result<(), AppError> {
    let results = output.out.clone().unwrap_or_else(|| PathBuf::from("-"));
    let mut manifest = Manifest::new(command, config, Path::new(results.file_name().unwrap_or_default()));
    manifest.sweep = sweep;
    manifest.formula = formula;
    manifest.notes = output.notes;
    let rows = produce_rows(&manifest.command, config, manifest.sweep.as_ref(), formula)?;
    let text = write_rows(&rows)?;
    emit(output.out.as_deref(), &text)?;
    if let Some(out) = &output.out {
        manifest.finish();
        let path = manifest_path(out);
        std::fs::write(&path, manifest.to_json()).map_err(|e| AppError::io(&path, e))?;
    }
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<(), AppError> {
    let text = std::fs::read_to_string(&args.manifest).map_err(|e| AppError::io(&args.manifest, e))?;
    let recorded = Manifest::from_json(&text)?;
    let mut config = recorded.config.clone();
    if let Some(w) = args.workers {
        config.workers = w;
    }
    let rows = produce_rows(&recorded.command, &config, recorded.sweep.as_ref(), recorded.formula)?;
    let text = write_rows(&rows)?;

    if args.check {
        let dir = args.manifest.parent().unwrap_or(Path::new(""));
        let original = dir.join(&recorded.results);
        let before = std::fs::read_to_string(&original).map_err(|e| AppError::io(&original, e))?;
        if before != text {
            let old = read_rows(&before)?;
            let differing = old.iter().zip(&rows).take_while(|(a, b)| a == b).count();
            return Err(AppError::Verification(format!(
                "replayed results differ from {} starting at row {}",
                original.display(),
                differing + 1
            )));
        }
        eprintln!("replay matches {}", original.display());
    }
    match &args.out {
        Some(out) => {
            emit(Some(out), &text)?;
            let mut manifest = recorded;
            manifest.config = config;
            manifest.results = PathBuf::from(out.file_name().unwrap_or_default());
            manifest.finish();
            let path = manifest_path(out);
            std::fs::write(&path, manifest.to_json()).map_err(|e| AppError::io(&path, e))
        }
        None if args.check => Ok(()),
        None => emit(None, &text),
    }
}
