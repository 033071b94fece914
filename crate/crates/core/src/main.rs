use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spin_aniso::commands::{self, parse_formats, Overrides, RunConfig};
use spin_aniso::map::{Quantity, Resolution};
use spin_aniso::noise::DEFAULT_TAU_S;

/// Spin-qubit T1/T2 anisotropy maps from charge noise and Johnson noise.
#[derive(Parser)]
#[command(name = "spin-aniso", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the unknown noise strength against the reference T2.
    Calibrate(RunArgs),
    /// Sweep the field direction and export the map.
    Map(RunArgs),
    /// Count maxima, minima and saddles of an exported map.
    CriticalPoints {
        /// CSV or JSON map file.
        map: PathBuf,
    },
    /// Parse and check a device and model configuration.
    ValidateConfig(RunArgs),
    /// Regenerate the case-study maps and compare against published values.
    ReproducePaper {
        #[arg(long, default_value = "reproduction")]
        out: PathBuf,
        #[arg(long, default_value = "91x180", value_parser = parse_resolution)]
        resolution: Resolution,
        /// Charge-noise switching time, s.
        #[arg(long, default_value_t = DEFAULT_TAU_S)]
        tau: f64,
        /// Comma-separated subset of csv,json,ppm.
        #[arg(long, default_value = "csv")]
        format: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON run file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Device JSON; defaults to the bundled case study.
    #[arg(long)]
    device: Option<PathBuf>,
    /// JSON array of noise models.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long, value_parser = parse_quantity)]
    quantity: Option<Quantity>,
    /// Grid as N_THETAxN_PHI, e.g. 181x360.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<Resolution>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,ppm.
    #[arg(long)]
    format: Option<String>,
    /// Charge-noise switching time, s, for models that do not set one.
    #[arg(long)]
    tau: Option<f64>,
    /// Gate conductivity, S/m.
    #[arg(long)]
    sigma: Option<f64>,
    /// Reference T2, s.
    #[arg(long)]
    reference_t2: Option<f64>,
    /// Isotropic hyperfine dephasing rate, 1/s.
    #[arg(long)]
    hyperfine_rate: Option<f64>,
    /// Use the angle-free direct-magnetic EWJN relaxation term.
    #[arg(long)]
    constant_alpha: bool,
}

fn parse_resolution(s: &str) -> Result<Resolution, String> {
    s.parse().map_err(|e: spin_aniso::Error| e.to_string())
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    s.parse().map_err(|e: spin_aniso::Error| e.to_string())
}

impl RunArgs {
    fn resolve(self) -> spin_aniso::Result<RunConfig> {
        RunConfig::resolve(&Overrides {
            config: self.config,
            device: self.device,
            models: self.models,
            quantity: self.quantity,
            resolution: self.resolution,
            out: self.out,
            formats: self.format.as_deref().map(parse_formats).transpose()?,
            tau: self.tau,
            sigma: self.sigma,
            reference_t2: self.reference_t2,
            hyperfine_rate: self.hyperfine_rate,
            constant_alpha: self.constant_alpha,
        })
    }
}

fn run(cli: Cli) -> spin_aniso::Result<bool> {
    let text = match cli.command {
        Command::Calibrate(a) => commands::cmd_calibrate(&a.resolve()?)?,
        Command::Map(a) => commands::cmd_map(&a.resolve()?)?,
        Command::CriticalPoints { map } => commands::cmd_critical_points(&map)?,
        Command::ValidateConfig(a) => commands::cmd_validate_config(&a.resolve()?)?,
        Command::ReproducePaper { out, resolution, tau, format } => {
            let (text, ok) = commands::cmd_reproduce_paper(&out, resolution, tau, &parse_formats(&format)?)?;
            print!("{text}");
            if !ok {
                eprintln!("some checks failed; see {}", out.join("summary.md").display());
            }
            return Ok(ok);
        }
    };
    println!("{}", text.trim_end());
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
