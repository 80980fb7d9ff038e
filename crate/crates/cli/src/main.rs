use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use occloc_core::localization::distance_from_pixels;
use occloc_core::occ::trace::{decode_trace, read_trace, TraceError};
use occloc_core::sim::report::{write_frames, write_fv, write_summary, write_sweep};
use occloc_core::sim::{run_pipeline, sweep, sweep_chart};
use occloc_core::{CameraIntrinsics, ExperimentSpec, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "occloc", version, about = "Vehicle localization from optical camera communication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write per-frame estimates and an error summary.
    Simulate {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Replaces the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the parameter sweep described by a config file's `[experiment]`.
    Sweep {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write an SVG chart of the sweep.
        #[arg(long)]
        plot: bool,
    },
    /// XOR-decode a recorded LED-state trace.
    Decode { trace: PathBuf },
    /// Distance to a panel from the pixel area of its image.
    Distance {
        /// Panel area in cm².
        #[arg(long, value_parser = positive)]
        area_cm2: f64,
        /// Pixels covered by the panel's image.
        #[arg(long, value_parser = positive)]
        pixels: f64,
        #[arg(long, value_parser = positive)]
        focal_mm: f64,
        #[arg(long, value_parser = positive)]
        pixel_um: f64,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("trace error: {0}")]
    Trace(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Trace(_) => 5,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {s}"))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |e| CliError::Io { path: path.to_path_buf(), source: e.into() }
}

fn read_config(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_csv(
    dir: &Path,
    name: &str,
    write: impl FnOnce(BufWriter<File>) -> csv::Result<()>,
) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    write(create(&path)?).map_err(csv_err(&path))?;
    Ok(path)
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = ScenarioConfig::from_toml_str(&read_config(config)?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = seed {
        cfg.rng_seed = seed;
    }
    let run = run_pipeline(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    for (name, path) in [
        ("frames", write_csv(out, "frames.csv", |w| write_frames(w, &run))?),
        ("fv", write_csv(out, "fv.csv", |w| write_fv(w, &run))?),
        ("summary", write_csv(out, "summary.csv", |w| write_summary(w, &run))?),
    ] {
        println!("{name}: {}", path.display());
    }
    Ok(())
}

fn run_sweep(config: &Path, out: &Path, seed: Option<u64>, plot: bool) -> Result<(), CliError> {
    let mut spec = ExperimentSpec::from_toml_str(&read_config(config)?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let table = sweep(&spec).map_err(|e| CliError::Config(e.to_string()))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let name = spec.parameter.name();
    let csv = write_csv(out, &format!("{name}.csv"), |w| write_sweep(w, &table))?;
    println!("table: {}", csv.display());
    if plot {
        let path = out.join(format!("{name}.svg"));
        fs::write(&path, sweep_chart(&table).to_svg()).map_err(io_err(&path))?;
        println!("plot: {}", path.display());
    }
    Ok(())
}

fn decode(trace: &Path) -> Result<(), CliError> {
    let file = File::open(trace).map_err(io_err(trace))?;
    let records = read_trace(file).map_err(|e| match e {
        TraceError::Io(source) => CliError::Io { path: trace.to_path_buf(), source },
        other => CliError::Trace(other.to_string()),
    })?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let emit = |out: &mut io::StdoutLock, line: String| {
        writeln!(out, "{line}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })
    };
    for (id, stream) in decode_trace(&records) {
        let bits: String = stream.bits.iter().map(|b| char::from(b'0' + b)).collect();
        emit(&mut out, format!("beacon {id}: {bits}"))?;
        if let Some(ber) = stream.ber() {
            emit(&mut out, format!("beacon {id} ber: {ber:.6} over {} bits", stream.bits.len()))?;
        }
    }
    Ok(())
}

/// `value` rounded to four significant digits.
fn four_significant(value: f64) -> String {
    let decimals = (3 - value.abs().log10().floor() as i32).max(0) as usize;
    format!("{value:.decimals$}")
}

fn distance(area_cm2: f64, pixels: f64, focal_mm: f64, pixel_um: f64) -> Result<(), CliError> {
    let intr = CameraIntrinsics {
        focal_length: focal_mm * 1e-3,
        pixel_pitch: pixel_um * 1e-6,
        ..CameraIntrinsics::default()
    };
    let d = distance_from_pixels(area_cm2 * 1e-4, pixels, &intr)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{} m", four_significant(d));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, out, seed } => simulate(config, out, *seed),
        Command::Sweep { config, out, seed, plot } => run_sweep(config, out, *seed, *plot),
        Command::Decode { trace } => decode(trace),
        Command::Distance { area_cm2, pixels, focal_mm, pixel_um } => {
            distance(*area_cm2, *pixels, *focal_mm, *pixel_um)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("occloc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
