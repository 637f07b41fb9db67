//! Run configuration and report emission for the `metpath` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use metpath::checks::{run_checks, CheckOptions, Subject};
use metpath::derivative::md_profile;
use metpath::fixtures::{fixture, Params};
use metpath::ingest::read_csv_path_in;
use metpath::metric::{MetricSpace, SpaceDescriptor};
use metpath::numeric::uniform_grid;
use metpath::report::{to_json, CheckReport, TheoremId, Verdict};
use metpath::variation::variation;

/// Where the path comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    Fixture {
        name: String,
        params: Vec<String>,
    },
    /// Sampled path; `space` defaults to Euclidean.
    Csv {
        file: PathBuf,
        space: Option<MetricSpace>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Formats {
    pub fn parse(s: &str) -> Result<Self> {
        let mut f = Formats::default();
        for part in s.split(',').map(str::trim) {
            match part {
                "json" => f.json = true,
                "csv" => f.csv = true,
                other => bail!("unknown format `{other}` (expected json, csv)"),
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Input,
    pub checks: Vec<TheoremId>,
    pub options: CheckOptions,
    pub out: PathBuf,
    pub formats: Formats,
}

/// Settings as given by flags or a config file; unset fields stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    pub fixture: Option<String>,
    #[serde(default)]
    pub param: Vec<String>,
    pub csv: Option<PathBuf>,
    /// Space of a CSV path, e.g. `{ kind = "supnorm", dim = 2 }`.
    pub space: Option<SpaceDescriptor>,
    pub checks: Option<String>,
    pub tol: Option<f64>,
    pub max_level: Option<u32>,
    pub grid: Option<usize>,
    pub delta_schedule: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid config file")
    }

    /// `self` wins wherever it is set; params are merged by key.
    pub fn over(self, base: Settings) -> Settings {
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        for p in base.param.iter().chain(&self.param) {
            let (k, v) = p.split_once('=').unwrap_or((p.as_str(), ""));
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        Settings {
            fixture: self.fixture.or(base.fixture),
            param: params
                .into_iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect(),
            csv: self.csv.or(base.csv),
            space: self.space.or(base.space),
            checks: self.checks.or(base.checks),
            tol: self.tol.or(base.tol),
            max_level: self.max_level.or(base.max_level),
            grid: self.grid.or(base.grid),
            delta_schedule: self.delta_schedule.or(base.delta_schedule),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let input = match (self.fixture, self.csv) {
            (Some(_), Some(_)) => bail!("give either a fixture or a CSV file, not both"),
            (Some(name), None) => {
                if self.space.is_some() {
                    bail!("`space` applies to CSV input only; fixtures fix their own space");
                }
                Input::Fixture {
                    name,
                    params: self.param,
                }
            }
            (None, Some(file)) => {
                if !self.param.is_empty() {
                    bail!("--param applies to fixtures only");
                }
                let space = self
                    .space
                    .as_ref()
                    .map(SpaceDescriptor::build)
                    .transpose()?;
                Input::Csv { file, space }
            }
            (None, None) => bail!("no input: give --fixture NAME or --csv FILE"),
        };
        let checks = TheoremId::parse_list(self.checks.as_deref().unwrap_or("all"))?;
        let defaults = CheckOptions::default();
        let options = CheckOptions {
            tol: self.tol.unwrap_or(defaults.tol),
            max_level: self.max_level.unwrap_or(defaults.max_level),
            grid_cells: self.grid.unwrap_or(defaults.grid_cells),
            delta_schedule: self.delta_schedule,
            ..defaults
        };
        options.validate()?;
        if !(3..=24).contains(&options.max_level) {
            bail!("max level {} must lie in 3..=24", options.max_level);
        }
        Ok(RunConfig {
            input,
            checks,
            options,
            out: self.out.unwrap_or_else(|| PathBuf::from("metpath-out")),
            formats: Formats::parse(self.format.as_deref().unwrap_or("json,csv"))?,
        })
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct Outcome {
    pub reports: Vec<CheckReport>,
    pub written: Vec<PathBuf>,
}

impl Outcome {
    pub fn any_violated(&self) -> bool {
        self.reports.iter().any(|r| r.verdict == Verdict::Violated)
    }

    pub fn exit_code(&self) -> i32 {
        i32::from(self.any_violated())
    }
}

fn subject(input: &Input) -> Result<Subject> {
    Ok(match input {
        Input::Fixture { name, params } => Subject::from(fixture(name, &Params::parse(params)?)?),
        Input::Csv { file, space } => Subject::sampled(read_csv_path_in(file, space.as_ref())?),
    })
}

/// Runs the checks and writes the requested files into `config.out`.
pub fn run(config: &RunConfig) -> Result<Outcome> {
    let subject = subject(&config.input)?;
    let opts = &config.options;
    let reports = run_checks(&config.checks, &subject, opts)?;
    fs::create_dir_all(&config.out)
        .with_context(|| format!("cannot create {}", config.out.display()))?;

    let mut written = Vec::new();
    let mut write = |name: &str, body: String| -> Result<()> {
        let file = config.out.join(name);
        fs::write(&file, body).with_context(|| format!("cannot write {}", file.display()))?;
        written.push(file);
        Ok(())
    };
    if config.formats.json {
        write("report.json", to_json(&reports) + "\n")?;
    }
    if config.formats.csv {
        let path = &subject.path;
        write("md_profile.csv", profile_csv(path, opts)?)?;

        let var = variation(path, opts.variation_tol, opts.max_level)?;
        let mut trace = String::from("level,estimate\n");
        for (k, v) in &var.trace {
            writeln!(trace, "{k},{v}")?;
        }
        write("variation_trace.csv", trace)?;
    }
    Ok(Outcome { reports, written })
}

fn profile_csv(path: &metpath::path::Path, opts: &CheckOptions) -> Result<String> {
    let grid = uniform_grid(path.a(), path.b(), opts.grid_cells);
    let mut md = String::from("x,md,status\n");
    for e in md_profile(path, &grid, &opts.schedule)? {
        writeln!(md, "{},{},{}", e.x, e.value, e.status.as_str())?;
    }
    Ok(md)
}

/// `x,md,status` rows on the uniform grid of the configured input.
pub fn md_profile_csv(config: &RunConfig) -> Result<String> {
    profile_csv(&subject(&config.input)?.path, &config.options)
}

/// One line per report for the terminal.
pub fn summary(reports: &[CheckReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(
            s,
            "{:<20} {:<12} lhs={:<14} rhs={:<14} slack={}",
            r.theorem_id.as_str(),
            r.verdict.as_str(),
            short(r.lhs),
            short(r.rhs),
            short(r.slack)
        );
    }
    s
}

fn short(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        x.to_string()
    }
}

/// Reads a config file into [`Settings`].
pub fn read_config(file: &FsPath) -> Result<Settings> {
    let text =
        fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    Settings::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let file = Settings::from_toml(
            "fixture = \"circle\"\nparam = [\"radius=2\", \"t1=pi\"]\ntol = 0.01\ngrid = 128\nchecks = \"sard\"\n",
        )
        .unwrap();
        let flags = Settings {
            param: vec!["radius=3".into()],
            tol: Some(0.001),
            ..Settings::default()
        };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!(
            cfg.input,
            Input::Fixture {
                name: "circle".into(),
                params: vec!["radius=3".into(), "t1=pi".into()]
            }
        );
        assert_eq!(cfg.options.tol, 0.001);
        assert_eq!(cfg.options.grid_cells, 128);
        assert_eq!(cfg.checks, vec![TheoremId::Sard]);
    }

    #[test]
    fn invalid_settings_are_rejected() {
        assert!(Settings::from_toml("bogus = 1").is_err());
        let base = || Settings {
            fixture: Some("segment".into()),
            ..Settings::default()
        };
        assert!(base().resolve().is_ok());
        assert!(Settings {
            tol: Some(0.0),
            ..base()
        }
        .resolve()
        .is_err());
        assert!(Settings {
            grid: Some(63),
            ..base()
        }
        .resolve()
        .is_err());
        assert!(Settings {
            checks: Some("nope".into()),
            ..base()
        }
        .resolve()
        .is_err());
        assert!(Settings {
            format: Some("xml".into()),
            ..base()
        }
        .resolve()
        .is_err());
        assert!(Settings {
            csv: Some("a.csv".into()),
            ..base()
        }
        .resolve()
        .is_err());
        let flake: SpaceDescriptor =
            toml::from_str("kind = \"snowflake\"\nalpha = 0.5\ndim = 1").unwrap();
        assert!(Settings {
            space: Some(flake.clone()),
            ..base()
        }
        .resolve()
        .is_err());
        let csv = Settings {
            csv: Some("a.csv".into()),
            space: Some(flake),
            ..Settings::default()
        };
        assert!(matches!(
            csv.resolve().unwrap().input,
            Input::Csv { space: Some(_), .. }
        ));
        assert!(Settings::default().resolve().is_err());
    }

    #[test]
    fn formats() {
        assert_eq!(
            Formats::parse("csv").unwrap(),
            Formats {
                json: false,
                csv: true
            }
        );
        assert_eq!(
            Formats::parse("json, csv").unwrap(),
            Formats {
                json: true,
                csv: true
            }
        );
    }
}
