//! The `locfuse` command line.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 when the command ran but
//! its inputs were rejected or an output could not be written.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csvio::{load_dataset_csv, save_dataset_csv, write_dataset_csv};
use crate::decimal;
use crate::error::{Error, Result};
use crate::eval::{run_experiment, write_report, ExperimentConfig};
use crate::forest::{
    fit_forest, predict_class, predict_position, read_forest, write_forest, ForestKind, ForestParams, Targets,
};
use crate::model::{feature_matrix, feature_vector, validate_dataset, zone_of, Dataset, TechSelector};
use crate::service::serve_ingest;
use crate::sim::{generate_dataset, load_scenario, reference_scenario, scenario_to_toml, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "locfuse", version, about = "Indoor localization from 5G and WiFi RSSI")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the reference scenario or check a scenario file.
    Scenario {
        /// Print the reference scenario as a config file.
        #[arg(long, conflicts_with = "check", required_unless_present = "check")]
        reference: bool,
        /// Validate the given scenario file.
        #[arg(long, value_name = "PATH")]
        check: Option<PathBuf>,
    },
    /// Simulate a labelled dataset and write it as CSV.
    Generate {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Output file; standard output when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Train a forest on a dataset and write it to a model file.
    Train {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum)]
        tech: TechArg,
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 100)]
        trees: usize,
    },
    /// Locate every sample of a CSV file with a trained forest.
    Locate {
        #[arg(long, value_name = "PATH")]
        model: PathBuf,
        /// Dataset CSV holding the sample(s) to locate.
        #[arg(long, value_name = "PATH")]
        sample: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Run the Monte Carlo evaluation and write a report directory.
    Eval {
        #[arg(long, value_name = "PATH")]
        dataset: PathBuf,
        /// Experiment config; defaults apply when omitted.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Master seed; replaces the one in the config.
        #[arg(long, env = "LOCFUSE_SEED")]
        seed: Option<u64>,
    },
    /// Run the HTTP sample-ingestion service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Append-only record log.
        #[arg(long, value_name = "PATH")]
        store: PathBuf,
        #[command(flatten)]
        scenario: ScenarioArg,
    },
}

#[derive(Debug, Args)]
struct ScenarioArg {
    /// Scenario config file; the reference scenario when omitted.
    #[arg(long, value_name = "PATH")]
    scenario: Option<PathBuf>,
}

impl ScenarioArg {
    fn load(&self) -> Result<Scenario> {
        match &self.scenario {
            Some(path) => load_scenario(path).map_err(|e| with_path(path, e)),
            None => Ok(reference_scenario()),
        }
    }
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Random seed. LOCFUSE_SEED is used when the flag is absent.
    #[arg(long, env = "LOCFUSE_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Classify,
    Regress,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TechArg {
    #[value(name = "5g")]
    FiveG,
    Wifi,
    Fusion,
}

impl From<TechArg> for TechSelector {
    fn from(t: TechArg) -> Self {
        match t {
            TechArg::FiveG => TechSelector::FiveG,
            TechArg::Wifi => TechSelector::WiFi,
            TechArg::Fusion => TechSelector::Fusion,
        }
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    }
}

fn load_valid_dataset(path: &Path, scenario: &Scenario) -> Result<Dataset> {
    let ds = load_dataset_csv(path, &scenario.roster, &scenario.zones).map_err(|e| with_path(path, e))?;
    validate_dataset(&ds).into_result()?;
    Ok(ds)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn execute(command: Command) -> Result<()> {
    let stdout = io::stdout();
    match command {
        Command::Scenario { check: Some(path), .. } => {
            let sc = load_scenario(&path).map_err(|e| with_path(&path, e))?;
            println!(
                "{}: ok ({} access points, {} zones, {} walls)",
                path.display(),
                sc.roster.len(),
                sc.zones.len(),
                sc.walls.len()
            );
        }
        Command::Scenario { .. } => {
            stdout
                .lock()
                .write_all(scenario_to_toml(&reference_scenario()).as_bytes())?;
        }
        Command::Generate { scenario, n, seed, out } => {
            let ds = generate_dataset(&scenario.load()?, n, seed.seed)?;
            match out {
                Some(path) => save_dataset_csv(&ds, &path).map_err(|e| with_path(&path, e))?,
                None => write_dataset_csv(&ds, stdout.lock())?,
            }
        }
        Command::Train {
            kind,
            tech,
            dataset,
            out,
            scenario,
            seed,
            trees,
        } => {
            let sc = scenario.load()?;
            let ds = load_valid_dataset(&dataset, &sc)?;
            let x = feature_matrix(&ds, tech.into())?;
            let targets = match kind {
                KindArg::Classify => Targets::classes(&ds.samples.iter().map(|s| s.zone.as_str()).collect::<Vec<_>>()),
                KindArg::Regress => Targets::positions(&ds.samples.iter().map(|s| s.truth).collect::<Vec<_>>()),
            };
            let params = ForestParams {
                n_trees: trees,
                seed: seed.seed,
                ..ForestParams::default()
            };
            let forest = fit_forest(&x, &targets, &params)?;
            let mut f = io::BufWriter::new(File::create(&out).map_err(|e| with_path(&out, e.into()))?);
            write_forest(&forest, &mut f)?;
            f.flush()?;
        }
        Command::Locate {
            model,
            sample,
            scenario,
        } => {
            let sc = scenario.load()?;
            let file = File::open(&model).map_err(|e| with_path(&model, e.into()))?;
            let forest = read_forest(BufReader::new(file)).map_err(|e| with_path(&model, e))?;
            let ds = load_dataset_csv(&sample, &sc.roster, &sc.zones).map_err(|e| with_path(&sample, e))?;
            if ds.is_empty() {
                return Err(Error::EmptyInput("sample file has no rows"));
            }
            let mut out = stdout.lock();
            for s in &ds.samples {
                let x = feature_vector(s, forest.columns());
                match forest.kind() {
                    ForestKind::Classifier => writeln!(out, "{} zone={}", s.id, predict_class(&forest, &x)?)?,
                    ForestKind::Regressor2D => {
                        let p = predict_position(&forest, &x)?;
                        let zone = zone_of(&p, &sc.zones)?;
                        writeln!(
                            out,
                            "{} x={} y={} zone={zone}",
                            s.id,
                            decimal::format(p.x),
                            decimal::format(p.y)
                        )?;
                    }
                }
            }
        }
        Command::Eval {
            dataset,
            config,
            out,
            scenario,
            seed,
        } => {
            let sc = scenario.load()?;
            let ds = load_valid_dataset(&dataset, &sc)?;
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path).map_err(|e| with_path(path, e))?,
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let report = run_experiment(&ds, &cfg)?;
            write_report(&report, &out)?;
        }
        Command::Serve { bind, store, scenario } => {
            let sc = scenario.load()?;
            serve_ingest(bind, sc.roster, sc.zones, store)?;
        }
    }
    Ok(())
}
