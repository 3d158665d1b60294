//! Command-line front end: `run`, `preset`, `sweep` and `validate`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical or truncation
//! error, 3 validation failure.

pub mod config;
pub mod output;
pub mod presets;
pub mod sweep;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::dynamics::Engine;
use crate::error::{Error, Result};
use crate::spectral::SpectralCache;

pub use config::{compute, ConfigKeys, Method, RunConfig};
pub use output::{fmt_num, Table};
pub use presets::{run_preset, Detuning, Preset};
pub use sweep::{sweep, SweepArgs};
pub use validate::{validate, Check, Status, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tavis", version, about = "Exact and approximate field dynamics of N two-level molecules in one cavity mode")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one time series from a config file and/or flags.
    Run(RunArgs),
    /// Reproduce a named figure.
    Preset(PresetArgs),
    /// Tabulate a statistic over a grid of (N, nbar, beta).
    Sweep(SweepArgs),
    /// Run the built-in oracle and invariant suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    keys: ConfigKeys,
}

#[derive(Debug, Args)]
struct PresetArgs {
    /// fig1 | fig2 | figE1 | figE2 | figF1 | figB1 | figB2 | figB3 | figB4 | collapse_revival
    name: String,
    /// Directory receiving `<name>.csv` (and `<name>.svg` with --svg).
    #[arg(long = "output-dir", default_value = ".")]
    output_dir: PathBuf,
    /// Also write an SVG rendering.
    #[arg(long)]
    svg: bool,
    /// Override β of the non-resonant curves.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "delta")]
    beta: Option<f64>,
    /// Override Δ of the non-resonant curves.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Negate every odd-indexed eigenvector; all checks must still pass.
    #[arg(long = "flip-signs")]
    flip_signs: bool,
    #[arg(long)]
    threads: Option<usize>,
}

/// Maps a library error onto the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Config(_) => EXIT_CONFIG,
        Error::Numerical { .. } | Error::Truncation(_) => EXIT_NUMERICAL,
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tavis: {e}");
            exit_code(&e)
        }
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    match threads {
        Some(0) => return Err(Error::Config("threads must be at least 1".into())),
        Some(n) => b = b.num_threads(n),
        None => {}
    }
    let pool = b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Error::Config(format!("cannot write to stdout: {e}")))
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Run(a) => {
            let file = match &a.config {
                Some(p) => ConfigKeys::from_file(p)?,
                None => ConfigKeys::default(),
            };
            let cfg = RunConfig::resolve(a.keys.over(file))?;
            let table = with_pool(cfg.threads, || run_table(&cfg))??;
            emit(cfg.output.as_deref(), &table.to_csv())?;
            if let Some(svg) = &cfg.svg {
                write_file(svg, &table.to_svg(&format!("{} ({}), N = {}", cfg.observable, cfg.method, cfg.n_tlm)))?;
            }
            Ok(EXIT_OK)
        }
        Command::Preset(a) => {
            let preset: Preset = a.name.parse()?;
            let det = match (a.beta, a.delta) {
                (Some(b), _) => Some(Detuning { beta: b, delta: None }),
                (None, Some(d)) if d >= 0.0 => Some(Detuning::from_delta(d)),
                (None, Some(_)) => return Err(Error::Config("delta must be non-negative".into())),
                (None, None) => None,
            };
            let table = with_pool(a.threads, || run_preset(preset, det, &Engine::new()))??;
            std::fs::create_dir_all(&a.output_dir)
                .map_err(|e| Error::Config(format!("cannot create {}: {e}", a.output_dir.display())))?;
            write_file(&a.output_dir.join(format!("{}.csv", preset.name())), &table.to_csv())?;
            if a.svg {
                write_file(&a.output_dir.join(format!("{}.svg", preset.name())), &table.to_svg(preset.figure()))?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep(a) => {
            let table = with_pool(a.threads, || sweep(&a, &Engine::with_cache(Arc::new(SpectralCache::new()))))??;
            emit(a.output.as_deref(), &table.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Validate(a) => {
            let checks = with_pool(a.threads, || validate(ValidateOptions { flip_signs: a.flip_signs }))?;
            let mut failed = 0;
            for c in &checks {
                println!("{c}");
                failed += (c.status == Status::Fail) as usize;
            }
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 { EXIT_OK } else { EXIT_VALIDATION })
        }
    }
}

/// The CSV table for a single run.
pub fn run_table(cfg: &RunConfig) -> Result<Table> {
    let engine = Engine::new();
    let density = cfg.density()?;
    let series = compute(cfg, &engine, &density)?;
    let mut meta = vec![format!("tavis {}", env!("CARGO_PKG_VERSION"))];
    meta.extend(cfg.header_lines());
    meta.extend(config::truncation_lines(&density));
    let mut columns = vec!["tau".to_string(), "value_re".to_string()];
    if series.is_complex() {
        columns.push("value_im".to_string());
    }
    let mut t = Table::new(meta, columns);
    let (re, im) = (series.re(), series.im());
    t.rows = series
        .tau
        .iter()
        .enumerate()
        .map(|(i, &tau)| if series.is_complex() { vec![tau, re[i], im[i]] } else { vec![tau, re[i]] })
        .collect();
    Ok(t)
}
