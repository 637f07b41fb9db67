use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metpath::fixtures::FIXTURE_NAMES;
use metpath::report::TheoremId;
use metpath_cli::{md_profile_csv, read_config, run, summary, Settings};

#[derive(Parser)]
#[command(
    name = "metpath",
    version,
    about = "Numeric checks for paths in metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks on a fixture or a sampled CSV path and write reports.
    Run(RunArgs),
    /// Print `x,md,status` on the md grid of the input to stdout; only the
    /// input, grid and config flags matter.
    MdProfile(RunArgs),
    /// List fixtures and theorem ids.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "csv")]
    fixture: Option<String>,
    /// Fixture parameter `key=value`; repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// CSV with header `t,x1,...,xn`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Comma-separated theorem ids or `all`.
    #[arg(long)]
    checks: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_level: Option<u32>,
    /// Cells of the uniform md grid (at least 64).
    #[arg(long)]
    grid: Option<usize>,
    /// Decreasing δ values for cover estimates, comma-separated.
    #[arg(long, value_delimiter = ',')]
    delta_schedule: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// `json`, `csv` or both, comma-separated.
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn settings(self) -> anyhow::Result<Settings> {
        let base = match &self.config {
            Some(file) => read_config(file)?,
            None => Settings::default(),
        };
        let flags = Settings {
            fixture: self.fixture,
            param: self.params,
            csv: self.csv,
            space: None,
            checks: self.checks,
            tol: self.tol,
            max_level: self.max_level,
            grid: self.grid,
            delta_schedule: self.delta_schedule,
            out: self.out,
            format: self.format,
        };
        Ok(flags.over(base))
    }
}

fn fail(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::List => {
            println!("fixtures: {}", FIXTURE_NAMES.join(", "));
            let ids: Vec<_> = TheoremId::ALL.iter().map(|id| id.as_str()).collect();
            println!("checks:   {}", ids.join(", "));
            ExitCode::SUCCESS
        }
        Command::Run(args) => {
            let outcome = args
                .settings()
                .and_then(|s| s.resolve())
                .and_then(|cfg| run(&cfg));
            match outcome {
                Ok(outcome) => {
                    print!("{}", summary(&outcome.reports));
                    for file in &outcome.written {
                        println!("wrote {}", file.display());
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(err) => fail(err),
            }
        }
        Command::MdProfile(args) => match args
            .settings()
            .and_then(|s| s.resolve())
            .and_then(|cfg| md_profile_csv(&cfg))
        {
            Ok(csv) => {
                print!("{csv}");
                ExitCode::SUCCESS
            }
            Err(err) => fail(err),
        },
    }
}
