mod commands;
mod context;
mod scenarios;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noonsi::config::Scenario;
use noonsi::fisher::SamplingMode;
use noonsi::interference::InterferenceKind;
use noonsi::ErrorCategory;

#[derive(Debug, Parser)]
#[command(
    name = "noonsi",
    version,
    about = "Spectrally resolved NOON-state interference toolkit"
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Run configuration (TOML); the built-in default is used when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Points per frequency axis; overrides `grid.points`.
    #[arg(long, global = true)]
    pub grid_n: Option<usize>,
    /// Worker threads (advisory: outputs do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output formats for maps; repeat or comma-separate. Default: csv,pgm.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Noon,
    Hom,
}

impl From<KindArg> for InterferenceKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Noon => InterferenceKind::Noon,
            KindArg::Hom => InterferenceKind::Hom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    SpectrallyResolved,
    Integrated,
}

impl From<ModeArg> for SamplingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::SpectrallyResolved => SamplingMode::SpectrallyResolved,
            ModeArg::Integrated => SamplingMode::Integrated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ScenarioArg {
    Fig1bEnvelope,
    FigPhaseSweep,
    FigJsiSweep,
    FisherComparison,
    EstimationStudy,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Fig1bEnvelope => Scenario::Fig1bEnvelope,
            ScenarioArg::FigPhaseSweep => Scenario::FigPhaseSweep,
            ScenarioArg::FigJsiSweep => Scenario::FigJsiSweep,
            ScenarioArg::FisherComparison => Scenario::FisherComparison,
            ScenarioArg::EstimationStudy => Scenario::EstimationStudy,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the configured JSA and write it.
    Jsa,
    /// Coincidence-vs-delay scans: the NOON envelope plus fine scans at each
    /// coarse delay, or one custom scan.
    Scan {
        #[arg(long, value_enum, default_value = "noon")]
        kind: KindArg,
        /// Custom scan start (ps); requires --stop and --step.
        #[arg(long, requires_all = ["stop", "step"], allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, requires_all = ["start", "step"], allow_hyphen_values = true)]
        stop: Option<f64>,
        #[arg(long, requires_all = ["start", "stop"])]
        step: Option<f64>,
    },
    /// Frequency-resolved coincidence map at one delay.
    Jsi {
        /// Delay (ps); with --phase-over-pi, the coarse delay.
        #[arg(long, allow_hyphen_values = true)]
        delay: f64,
        /// Park on the carrier fringe nearest --delay at this phase (units of pi).
        #[arg(long, allow_hyphen_values = true)]
        phase_over_pi: Option<f64>,
        #[arg(long, value_enum, default_value = "noon")]
        kind: KindArg,
    },
    /// Integrated vs spectrally resolved Fisher information over the
    /// configured delays.
    Fisher,
    /// Monte-Carlo maximum-likelihood delay estimation against the CRLB.
    Estimate {
        /// Sampling modes; default from the config.
        #[arg(long, value_enum, value_delimiter = ',')]
        mode: Vec<ModeArg>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        events: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        delay: Option<f64>,
    },
    /// Spectrometer simulation: arrival-time blur and Poisson acquisition.
    Instrument {
        /// JSI CSV to observe; otherwise the NOON map at the acquisition
        /// delay and phase of the config.
        #[arg(long)]
        jsi: Option<PathBuf>,
        #[arg(long)]
        duration_s: Option<f64>,
        #[arg(long)]
        rate_cps: Option<f64>,
    },
    /// Fit the Gaussian along-bandwidth to a target envelope FWHM.
    Calibrate {
        #[arg(long, default_value_t = 4.2)]
        target_fwhm_ps: f64,
        #[arg(long, default_value_t = 0.005)]
        scan_step_ps: f64,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
    /// Regenerate the data behind one figure or study.
    Reproduce {
        /// Scenario; defaults to `scenario` in the config.
        #[arg(value_enum)]
        scenario: Option<ScenarioArg>,
    },
    /// Compare two CSV artifacts; exits 1 when they differ beyond tolerance.
    Diff {
        a: PathBuf,
        b: PathBuf,
        /// Relative tolerance per value.
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        /// Lower bound on the denominator of relative differences.
        #[arg(long, default_value_t = 0.0)]
        floor: f64,
    },
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Validation => 2,
        ErrorCategory::Numerical => 3,
        ErrorCategory::Io => 4,
    }
}

fn category_name(category: ErrorCategory) -> &'static str {
    match category {
        ErrorCategory::Validation => "validation",
        ErrorCategory::Numerical => "numerical",
        ErrorCategory::Io => "io",
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::run(&cli.common, &cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let category = e.category();
            eprintln!("error[{}]: {e}", category_name(category));
            ExitCode::from(exit_code(category))
        }
    }
}
