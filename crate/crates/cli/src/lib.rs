//! Command-line front end: configuration parsing, command dispatch and result files.

pub mod config;
pub mod output;
pub mod plot;
pub mod presets;

use std::ffi::OsString;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plexsim::eom::pathway_phase;
use plexsim::observables::analyze_steady_state;
use plexsim::scenarios::{evaluate, linspace, second_emitter_map, Engine};
use plexsim::spectra::{energy_levels, excitation_spectrum, DEFAULT_MAX_MANIFOLD};
use plexsim::SweepResult;
use serde::Serialize;
use thiserror::Error;

use config::{Energy, Format, RunConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_IO: i32 = 1;

pub const THREADS_ENV: &str = "PLEXSIM_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(#[from] plexsim::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) | CliError::Output(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "plexsim", version, about = "Photon statistics of driven cavity-emitter systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state g2(0), g3(0) and <n> at one drive energy.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Drive energy, e.g. 2eV or 1820meV.
        #[arg(long)]
        omega: Option<Energy>,
    },
    /// One- or two-axis parameter sweep from the `sweep` block.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Eigenenergies of the undriven excitation manifolds.
    Levels {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_manifold: Option<usize>,
    },
    /// Weak-drive excitation spectrum kappa <n> / E^2.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Photon-number distribution and its deviation from Poisson.
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: Option<Energy>,
    },
    /// Phase difference between the two-photon excitation pathways (one emitter).
    Phase {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        omega: Option<Energy>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Composite scenarios: chemical, optical or second-emitter.
    Scenario {
        name: ScenarioName,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioName {
    Chemical,
    Optical,
    SecondEmitter,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<String>,
    /// Built-in configuration: resonant, detuned, two-emitter, chemical, optical.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_parser = parse_engine)]
    pub engine: Option<Engine>,
    /// Overrides `system.n_max`.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Worker threads; defaults to PLEXSIM_THREADS, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Also write an SVG figure, to PATH or next to --out.
    #[arg(long, num_args = 0..=1, default_missing_value = "", value_name = "PATH")]
    pub plot: Option<String>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, requires_all = ["stop", "points"])]
    pub start: Option<Energy>,
    #[arg(long, requires_all = ["start", "points"])]
    pub stop: Option<Energy>,
    #[arg(long, requires_all = ["start", "stop"])]
    pub points: Option<usize>,
}

impl GridArgs {
    fn values(&self) -> Option<Vec<f64>> {
        Some(linspace(self.start?.ev(), self.stop?.ev(), self.points?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse().map_err(|e: plexsim::Error| e.to_string())
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("plexsim: {e}");
            e.exit_code()
        }
    }
}

struct Context {
    config: RunConfig,
    out: Option<String>,
    format: Option<Format>,
    engine: Engine,
    threads: Option<usize>,
    plot: Option<String>,
}

impl Context {
    fn load(common: Common) -> Result<Context, CliError> {
        let text = match (&common.config, &common.preset) {
            (Some(path), _) => std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?,
            (None, Some(name)) => presets::get(name)
                .ok_or_else(|| CliError::Config(format!("unknown preset '{name}'; known: {}", presets::NAMES.join(", "))))?
                .to_string(),
            (None, None) => return Err(CliError::Usage("give --config or --preset".into())),
        };
        let mut config = config::parse_config(&text)?;
        if let Some(n) = common.n_max {
            config.system.n_max = Some(n);
            config.spec().validate_structure().map_err(|e| CliError::Config(format!("--n-max: {e}")))?;
        }
        let output = config.output.clone().unwrap_or_default();
        let format = match common.format {
            Some(FormatArg::Csv) => Some(Format::Csv),
            Some(FormatArg::Json) => Some(Format::Json),
            None => output.format,
        };
        let out = common.out.or(output.path);
        let plot = match common.plot {
            Some(p) => Some(p),
            None if output.plot => Some(String::new()),
            None => None,
        };
        let threads = match common.threads {
            Some(n) => Some(n),
            None => threads_from_env()?,
        };
        Ok(Context {
            engine: common.engine.or(config.engine).unwrap_or(Engine::MasterEquation),
            config,
            out,
            format,
            threads,
            plot,
        })
    }

    /// Explicit format, else the output file's extension, else `fallback`.
    fn format_or(&self, fallback: Format) -> Format {
        self.format.unwrap_or_else(|| {
            match self.out.as_deref().and_then(|p| Path::new(p).extension()).and_then(|e| e.to_str()) {
                Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                _ => fallback,
            }
        })
    }

    fn write(&self, text: &str) -> Result<(), CliError> {
        output::emit(text, self.out.as_deref())
    }

    fn plot_path(&self) -> Result<Option<String>, CliError> {
        match self.plot.as_deref() {
            None => Ok(None),
            Some("") => match &self.out {
                Some(out) => Ok(Some(Path::new(out).with_extension("svg").to_string_lossy().into_owned())),
                None => Err(CliError::Config("--plot without a path needs --out".into())),
            },
            Some(p) => Ok(Some(p.to_string())),
        }
    }

    fn write_plot(&self, svg: impl FnOnce() -> String) -> Result<(), CliError> {
        if let Some(path) = self.plot_path()? {
            std::fs::write(&path, svg()).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        }
        Ok(())
    }

    fn warn_no_plot(&self) {
        if self.plot.is_some() {
            eprintln!("plexsim: this command has no plot; --plot ignored");
        }
    }

    fn write_sweep(&self, result: &SweepResult) -> Result<(), CliError> {
        let text = match self.format_or(Format::Csv) {
            Format::Csv => output::sweep_csv(result)?,
            Format::Json => output::to_json(result)?,
        };
        self.write(&text)?;
        self.write_plot(|| plot::sweep_svg(result))
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon_pool(n)?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

fn rayon_pool(n: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

#[derive(Serialize)]
struct PhasePoint {
    drive_omega: f64,
    delta_theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_code: Option<&'static str>,
}

#[derive(Serialize)]
struct StatsReport<'a> {
    correlations: &'a plexsim::CorrelationResult,
    statistics: &'a plexsim::PhotonStatistics,
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve { common, omega } => {
            let ctx = Context::load(common)?;
            ctx.warn_no_plot();
            let mut spec = ctx.config.spec();
            if let Some(w) = omega {
                spec.drive_omega = w.ev();
            }
            let result = evaluate(&spec, ctx.engine)?;
            let text = match ctx.format_or(Format::Json) {
                Format::Csv => output::correlation_csv(&result, ctx.engine)?,
                Format::Json => output::to_json(&result)?,
            };
            ctx.write(&text)
        }
        Command::Sweep { common } => {
            let ctx = Context::load(common)?;
            let spec = ctx.config.sweep_spec()?;
            let result = plexsim::scenarios::sweep_with_threads(&spec, ctx.engine, ctx.threads)?;
            ctx.write_sweep(&result)
        }
        Command::Levels { common, max_manifold } => {
            let ctx = Context::load(common)?;
            ctx.warn_no_plot();
            let k = max_manifold
                .or(ctx.config.levels.as_ref().map(|l| l.max_manifold))
                .unwrap_or(DEFAULT_MAX_MANIFOLD);
            let levels = energy_levels(&ctx.config.spec(), k)?;
            let text = match ctx.format_or(Format::Json) {
                Format::Csv => output::levels_csv(&levels)?,
                Format::Json => output::to_json(&levels)?,
            };
            ctx.write(&text)
        }
        Command::Spectrum { common, grid } => {
            let ctx = Context::load(common)?;
            let omegas = match grid.values() {
                Some(v) => v,
                None => ctx
                    .config
                    .spectrum
                    .as_ref()
                    .ok_or_else(|| CliError::Config("spectrum needs --start/--stop/--points or a `spectrum` block".into()))?
                    .energies("spectrum")?,
            };
            let spec = ctx.config.spec();
            let spectrum = with_threads(ctx.threads, || excitation_spectrum(&spec, &omegas))??;
            let text = match ctx.format_or(Format::Csv) {
                Format::Csv => output::spectrum_csv(&spectrum)?,
                Format::Json => output::to_json(&spectrum)?,
            };
            ctx.write(&text)?;
            ctx.write_plot(|| plot::spectrum_svg(&spectrum))
        }
        Command::Stats { common, omega } => {
            let ctx = Context::load(common)?;
            ctx.warn_no_plot();
            let mut spec = ctx.config.spec();
            if let Some(w) = omega {
                spec.drive_omega = w.ev();
            }
            let analysis = analyze_steady_state(&spec)?;
            let text = match ctx.format_or(Format::Json) {
                Format::Csv => output::statistics_csv(&analysis.statistics)?,
                Format::Json => output::to_json(&StatsReport {
                    correlations: &analysis.correlations,
                    statistics: &analysis.statistics,
                })?,
            };
            ctx.write(&text)
        }
        Command::Phase { common, omega, grid } => {
            let ctx = Context::load(common)?;
            ctx.warn_no_plot();
            let spec = ctx.config.spec();
            let omegas = match (grid.values(), omega) {
                (Some(v), _) => v,
                (None, Some(w)) => vec![w.ev()],
                (None, None) => vec![spec.drive_omega],
            };
            let mut points = Vec::with_capacity(omegas.len());
            for &w in &omegas {
                match pathway_phase(&spec, w) {
                    Ok(p) => points.push(PhasePoint { drive_omega: w, delta_theta: Some(p), error_code: None }),
                    Err(e @ plexsim::Error::UndefinedPhase) => {
                        points.push(PhasePoint { drive_omega: w, delta_theta: None, error_code: Some(e.code()) })
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let text = match ctx.format_or(Format::Json) {
                Format::Csv => {
                    let phases: Vec<Option<f64>> = points.iter().map(|p| p.delta_theta).collect();
                    output::phase_csv(&omegas, &phases)?
                }
                Format::Json if points.len() == 1 => output::to_json(&points[0])?,
                Format::Json => output::to_json(&points)?,
            };
            ctx.write(&text)
        }
        Command::Scenario { name, common } => {
            let ctx = Context::load(common)?;
            let result = match name {
                ScenarioName::Chemical => {
                    let (scenario, fractions, omegas) = ctx.config.chemical()?;
                    scenario.run(&fractions, &omegas, ctx.threads)?
                }
                ScenarioName::Optical => {
                    let (scenario, alphas, omega) = ctx.config.optical()?;
                    scenario.run(&alphas, omega, ctx.threads)?
                }
                ScenarioName::SecondEmitter => {
                    let (block, detunings, omegas) = ctx.config.second_emitter()?;
                    second_emitter_map(&ctx.config.spec(), &detunings, &omegas, block.coupling.ev(), ctx.engine, ctx.threads)?
                }
            };
            ctx.write_sweep(&result)
        }
    }
}
