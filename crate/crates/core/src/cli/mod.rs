//! Command-line front end: configuration, table cache, reports and calibration.

pub mod calibration;
pub mod config;
pub mod experiments;
pub mod report;
pub mod store;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::coeffs::{FormKind, FormSpec};
use crate::error::{Error, Result};
use calibration::{calibrate, Calibration, Plan};
use config::{ExperimentConfig, OutputFormat};
use experiments::{run_experiment, Experiment};
use report::Report;
use store::{cache_path, TableStore};

pub const EXIT_OK: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CAPACITY: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) | Error::UnknownExperiment(_) => EXIT_USAGE,
        Error::Capacity { .. } | Error::OutOfRange { .. } => EXIT_CAPACITY,
        Error::Io(_) | Error::CorruptCache { .. } | Error::Serde(_) => EXIT_IO,
        Error::Overflow { .. } | Error::BadPrime(_) | Error::Domain { .. } => EXIT_SOFTWARE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "hsgn", version, about = "Sign experiments for Hecke eigenvalue sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build (or reuse) the cached prime table.
    GenCoeffs {
        #[command(flatten)]
        opts: ConfigArgs,
        /// Largest prime to tabulate; defaults to what every experiment at this X needs.
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Run one experiment and write its report.
    Run {
        experiment: String,
        #[command(flatten)]
        opts: ConfigArgs,
        /// Exit with status 2 when a threshold check fails.
        #[arg(long = "assert")]
        assert: bool,
    },
    /// Pilot sweep over X = 10^4, 10^5, 10^6; writes the calibration file.
    Calibrate {
        #[command(flatten)]
        opts: ConfigArgs,
    },
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// delta, cm, satotate, vanishing or unit
    #[arg(long)]
    form: Option<String>,
    #[arg(long = "X")]
    x: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    /// Vanishing density for the vanishing model.
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Calibration file to use instead of the bundled one.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(name) = &self.form {
            let kind = FormKind::from_name(name).ok_or_else(|| Error::param(format!("unknown form `{name}`")))?;
            cfg.form = FormSpec::new(kind).with_seed(cfg.form.seed);
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
            cfg.form.seed = s;
        }
        if let Some(d) = self.density {
            cfg.form.vanishing_density = d;
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f.clone() { cfg.$g = v; })* };
        }
        set!(x => x, delta => delta, gamma => gamma, h => h, k => big_k, samples => samples, format => format);
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        if self.cache_dir.is_some() {
            cfg.cache_dir = self.cache_dir.clone();
        }
        if self.calibration.is_some() {
            cfg.calibration = self.calibration.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub struct GenOutcome {
    pub path: PathBuf,
    pub primes: usize,
    pub built: bool,
}

/// Default table limit: enough for every experiment at this configuration.
pub fn default_limit(cfg: &ExperimentConfig) -> u64 {
    Experiment::ALL.iter().map(|e| e.table_limit(cfg)).max().unwrap_or(cfg.x)
}

pub fn cmd_gen_coeffs(cfg: &ExperimentConfig, limit: Option<u64>) -> Result<GenOutcome> {
    cfg.validate()?;
    let limit = limit.unwrap_or_else(|| default_limit(cfg));
    let mut store = TableStore::new(cfg.cache_dir());
    let (table, built) = store.ensure(&cfg.form, limit)?;
    Ok(GenOutcome {
        path: cache_path(store.dir(), &cfg.form, table.limit),
        primes: table.len(),
        built,
    })
}

pub fn load_calibration(cfg: &ExperimentConfig) -> Result<Calibration> {
    match &cfg.calibration {
        Some(path) => Calibration::load(path),
        None => Calibration::bundled(),
    }
}

pub fn cmd_run(experiment: &str, cfg: &ExperimentConfig) -> Result<(Report, PathBuf)> {
    let exp: Experiment = experiment.parse()?;
    let cal = load_calibration(cfg)?;
    let mut store = TableStore::new(cfg.cache_dir());
    let out = run_experiment(exp, cfg, &mut store, &cal.constants)?;
    let report = Report::new(exp.name(), cfg, out.result, out.checks, out.summary);
    let path = cfg
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.{}", exp.name(), cfg.format.extension())));
    report.write(&path, cfg.format)?;
    Ok((report, path))
}

pub fn cmd_calibrate(cfg: &ExperimentConfig) -> Result<(Calibration, PathBuf)> {
    cfg.validate()?;
    let plan = Plan {
        form: cfg.form.clone(),
        delta: cfg.delta,
        gamma: cfg.gamma,
        h: cfg.h,
        big_k: cfg.big_k,
        samples: cfg.samples,
        seed: cfg.seed,
        ..Plan::default()
    };
    let mut store = TableStore::new(cfg.cache_dir());
    let cal = calibrate(&mut store, &plan)?;
    let path = cfg.output.clone().unwrap_or_else(|| PathBuf::from("calibration.json"));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&path, cal.to_json()?)?;
    Ok((cal, path))
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::GenCoeffs { opts, limit } => {
            let g = cmd_gen_coeffs(&opts.resolve()?, limit)?;
            let what = if g.built { "built" } else { "reused" };
            println!("{what} {} ({} primes)", g.path.display(), g.primes);
            Ok(EXIT_OK)
        }
        Command::Run { experiment, opts, assert } => {
            let (report, path) = cmd_run(&experiment, &opts.resolve()?)?;
            let verdict = if report.passed { "checks passed" } else { "checks FAILED" };
            println!("{}: {} [{verdict}] -> {}", report.experiment, report.summary, path.display());
            Ok(if assert && !report.passed { EXIT_THRESHOLD } else { EXIT_OK })
        }
        Command::Calibrate { opts } => {
            let (cal, path) = cmd_calibrate(&opts.resolve()?)?;
            let k = &cal.constants;
            println!(
                "C={:.4} c={:.4} c1={:.4} c2={:.4} C2={:.4} variance_c2={:.4} -> {}",
                k.big_c,
                k.c,
                k.c1,
                k.c2,
                k.big_c2,
                k.variance_c2,
                path.display()
            );
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hsgn: error: {e}");
            exit_code(&e)
        }
    }
}
