//! Subcommands of the `rotwave` binary.
//!
//! Each command resolves a configuration, computes its table in memory and
//! only then writes `<command>.csv` plus `<command>.manifest` into the output
//! directory. Nothing is written when the configuration or the computation
//! fails.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use rotwave::analysis::{beat_spectrum_with, revival_times, smooth, SpectrumOptions};
use rotwave::angular::cos2_band;
use rotwave::config::{SpectrumSource, TimeGrid};
use rotwave::observables::{alignment_trace, detector_signal, expectation_cos2, quantum_carpet, ThetaGrid};
use rotwave::rotor::evolve_free;
use rotwave::thermal::{ensemble_from_config, population_table};
use rotwave::{load_config_with_overrides, Config, RotorState, ThermalEnsemble, TimeSeries};

/// Environment variable that fixes the worker thread count.
pub const THREADS_ENV: &str = "ROTWAVE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(rotwave::Error),
    #[error("convergence failure: {0}")]
    Convergence(rotwave::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<rotwave::Error> for CliError {
    fn from(e: rotwave::Error) -> Self {
        if e.is_convergence() {
            CliError::Convergence(e)
        } else {
            CliError::Config(e)
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rotwave",
    version,
    about = "Rotational wavepacket simulation for linear molecules"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thermal population table.
    Populations(OutputArgs),
    /// Thermal ⟨cos²θ⟩ on the run time grid, raw and smoothed.
    Trace(OutputArgs),
    /// Angular density against delay and θ.
    Carpet(OutputArgs),
    /// Beat spectrum of the field-free trace with assigned peaks.
    Spectrum(OutputArgs),
    /// Detector-cone signal at the pump polarization angle.
    Signal(OutputArgs),
    /// Fractional revival times, printed to standard output.
    Revivals(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Configuration file of `section.key = value` lines.
    pub config: PathBuf,
    /// Override a configuration key after the file is parsed.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Directory for the CSV and manifest.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// A computed table waiting to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub name: &'static str,
    pub csv: String,
    pub diagnostics: Vec<(&'static str, String)>,
}

/// Twelve significant digits in scientific notation.
pub fn fmt(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn resolve(args: &ConfigArgs) -> Result<Config, CliError> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    Ok(load_config_with_overrides(&text, &args.overrides)?)
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let (name, args) = match cli.command {
        Command::Revivals(args) => {
            let config = resolve(&args)?;
            let table = revivals(&config)?;
            return stdout.write_all(table.as_bytes()).map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            });
        }
        Command::Populations(a) => ("populations", a),
        Command::Trace(a) => ("trace", a),
        Command::Carpet(a) => ("carpet", a),
        Command::Spectrum(a) => ("spectrum", a),
        Command::Signal(a) => ("signal", a),
    };
    let config = resolve(&args.config)?;
    let started = Instant::now();
    let output = compute(name, &config)?;
    let runtime = started.elapsed().as_secs_f64();
    write_output(&args.out_dir, &config, &output, runtime)
}

/// Run the named table-producing command in memory.
pub fn compute(name: &str, config: &Config) -> Result<Output, CliError> {
    match name {
        "populations" => populations(config),
        "trace" => trace(config),
        "carpet" => carpet(config),
        "spectrum" => spectrum(config),
        "signal" => signal(config),
        other => Err(CliError::Config(rotwave::Error::Domain(format!(
            "unknown command `{other}`"
        )))),
    }
}

pub fn populations(config: &Config) -> Result<Output, CliError> {
    let table = population_table(config)?;
    let mut csv = String::from("J,population,spin_weight,per_M_weight\n");
    for e in &table.entries {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            e.j,
            fmt(e.population),
            e.spin_weight,
            fmt(e.per_m_weight())
        );
    }
    Ok(Output {
        name: "populations",
        csv,
        diagnostics: vec![("temperature", format!("{:?}", table.temperature))],
    })
}

fn ensemble_diagnostics(ensemble: &ThermalEnsemble) -> Vec<(&'static str, String)> {
    vec![
        ("temperature", format!("{:?}", ensemble.temperature())),
        ("ensemble_members", ensemble.members().len().to_string()),
        ("max_norm_drift", format!("{:e}", ensemble.max_norm_drift())),
        ("max_top_occupancy", format!("{:e}", ensemble.max_top_occupancy())),
        (
            "kick_strength",
            format!("{:?}", ensemble.pulse().kick_strength(ensemble.molecule())),
        ),
    ]
}

pub fn trace(config: &Config) -> Result<Output, CliError> {
    let ensemble = ensemble_from_config(config)?;
    let trace = alignment_trace(&ensemble, &config.run.time_grid.points())?;
    let smoothed = smooth(&trace.series, config.run.smoothing_window)?;
    let mut csv = String::from("t_fs,cos2_raw,cos2_smoothed\n");
    for ((t, raw), s) in trace.times().iter().zip(trace.values()).zip(&smoothed.values) {
        let _ = writeln!(csv, "{},{},{}", fmt(*t), fmt(*raw), fmt(*s));
    }
    Ok(Output {
        name: "trace",
        csv,
        diagnostics: ensemble_diagnostics(&ensemble),
    })
}

pub fn carpet(config: &Config) -> Result<Output, CliError> {
    let ensemble = ensemble_from_config(config)?;
    let grid = ThetaGrid::new(config.run.theta_points)?;
    let carpet = quantum_carpet(&ensemble, &config.run.time_grid.points(), grid)?;
    let thetas = carpet.thetas();
    let mut csv = String::from("t_fs,theta_rad,density\n");
    for (ti, t) in carpet.times.iter().enumerate() {
        let t = fmt(*t);
        for (k, theta) in thetas.iter().enumerate() {
            let _ = writeln!(csv, "{t},{},{}", fmt(*theta), fmt(carpet.at(ti, k)));
        }
    }
    let worst = (0..carpet.times.len())
        .map(|ti| (carpet.column_norm(ti) - 1.0).abs())
        .fold(0.0, f64::max);
    let mut diagnostics = ensemble_diagnostics(&ensemble);
    diagnostics.push(("max_column_norm_error", format!("{worst:e}")));
    Ok(Output {
        name: "carpet",
        csv,
        diagnostics,
    })
}

pub fn signal(config: &Config) -> Result<Output, CliError> {
    let ensemble = ensemble_from_config(config)?;
    let grid = ThetaGrid::new(config.run.theta_points)?;
    let carpet = quantum_carpet(&ensemble, &config.run.time_grid.points(), grid)?;
    let series = detector_signal(&carpet, config.pulse.polarization_angle, config.run.detector_half_angle)?;
    let mut csv = String::from("t_fs,signal\n");
    for (t, v) in series.times.iter().zip(&series.values) {
        let _ = writeln!(csv, "{},{}", fmt(*t), fmt(*v));
    }
    let mut diagnostics = ensemble_diagnostics(&ensemble);
    diagnostics.push(("theta_pump", format!("{:?}", config.pulse.polarization_angle)));
    Ok(Output {
        name: "signal",
        csv,
        diagnostics,
    })
}

/// `⟨cos²θ⟩` of `(|0,0⟩ + |2,0⟩)/√2` under free evolution: a single
/// coherence at `6Bc`.
pub fn two_level_series(config: &Config, times: &[f64]) -> Result<TimeSeries, CliError> {
    let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let state = RotorState::new(0, 0, vec![c, c], 0.0)?;
    let band = cos2_band(0, 2)?;
    let values = times
        .iter()
        .map(|&t| expectation_cos2(&evolve_free(&state, t, &config.molecule), &band))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TimeSeries::new(times.to_vec(), values)?)
}

pub fn spectrum(config: &Config) -> Result<Output, CliError> {
    let s = &config.run.spectrum;
    let times = TimeGrid::new(s.t_start, s.t_stop, config.run.time_grid.step)?.points();
    let (series, mut diagnostics) = match s.source {
        SpectrumSource::Simulation => {
            let ensemble = ensemble_from_config(config)?;
            let trace = alignment_trace(&ensemble, &times)?;
            (trace.series, ensemble_diagnostics(&ensemble))
        }
        SpectrumSource::TwoLevel => (two_level_series(config, &times)?, Vec::new()),
    };
    let spectrum = beat_spectrum_with(&series, s.t_start, s.t_stop, &config.molecule, SpectrumOptions::from(s))?;
    let mut csv = String::from("freq_THz,amplitude\n");
    for (f, a) in spectrum.frequencies.iter().zip(&spectrum.amplitudes) {
        let _ = writeln!(csv, "{},{}", fmt(*f), fmt(*a));
    }
    csv.push_str("#peaks\n#freq_THz,amplitude,J_lower,J_upper\n");
    for p in &spectrum.peaks {
        let (lo, hi) = match p.lower_j {
            Some(j) => (j.to_string(), (j + 2).to_string()),
            None => ("unassigned".to_string(), "unassigned".to_string()),
        };
        let _ = writeln!(csv, "#{},{},{lo},{hi}", fmt(p.frequency), fmt(p.amplitude));
    }
    diagnostics.push(("bin_width_thz", format!("{:?}", spectrum.bin_width)));
    diagnostics.push(("short_window", spectrum.short_window.to_string()));
    Ok(Output {
        name: "spectrum",
        csv,
        diagnostics,
    })
}

pub fn revivals(config: &Config) -> Result<String, CliError> {
    let mut out = String::from("fraction,time_fs\n");
    for r in revival_times(&config.molecule, config.run.revival_count)? {
        let _ = writeln!(out, "{},{}", r.label(), fmt(r.time));
    }
    Ok(out)
}

/// Manifest text: the resolved configuration followed by `diagnostics.*`.
pub fn manifest(config: &Config, output: &Output, runtime_s: f64) -> String {
    let mut text = config.to_document();
    let mut diag = |k: &str, v: &str| {
        let _ = writeln!(text, "diagnostics.{k} = {v}");
    };
    diag("tool_version", env!("CARGO_PKG_VERSION"));
    diag("command", output.name);
    diag("data_file", &format!("{}.csv", output.name));
    diag("threads", &rayon::current_num_threads().to_string());
    diag("runtime_s", &format!("{runtime_s:.3}"));
    for (k, v) in &output.diagnostics {
        diag(k, v);
    }
    text
}

fn write_output(dir: &Path, config: &Config, output: &Output, runtime_s: f64) -> Result<(), CliError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let data = dir.join(format!("{}.csv", output.name));
    fs::write(&data, &output.csv).map_err(io_err(&data))?;
    let man = dir.join(format!("{}.manifest", output.name));
    fs::write(&man, manifest(config, output, runtime_s)).map_err(io_err(&man))?;
    log::info!("wrote {} and {}", data.display(), man.display());
    Ok(())
}
