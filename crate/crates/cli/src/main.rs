//! `leafscale`: command-line front end for the crop-growth pipeline.
//!
//! Subcommands: calibrate, measure, eval-sensors, serve, simulate, train,
//! predict, plot. All diagnostics go to stderr; data goes to stdout or the
//! named output files. Exit code 0 means success, anything else is an error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use leafscale::regress::SplitSpec;

mod config;
mod imaging;
mod net;
mod plot;
mod sensors;
mod training;

use config::{pick, BandFlags, FileConfig};

#[derive(Parser)]
#[command(
    name = "leafscale",
    version,
    about = "Leaf-area measurement, telemetry ingestion, and biomass models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a px/cm^2 calibration profile from a reference image
    Calibrate(CalibrateArgs),
    /// Measure leaf area on one image; optionally append a plant record
    Measure(MeasureArgs),
    /// Percentage-error table for (actual, measured) sensor trials
    EvalSensors(EvalSensorsArgs),
    /// Run the TCP telemetry ingestion server
    Serve(ServeArgs),
    /// Stream simulated sensor nodes at a running server
    Simulate(SimulateArgs),
    /// Train a biomass model from a readings store and plants CSV
    Train(TrainArgs),
    /// Predict weight for one feature row using a saved model
    Predict(PredictArgs),
    /// Render an actual-vs-predicted scatter plot as SVG
    Plot(PlotArgs),
}

#[derive(Args)]
struct CalibrateArgs {
    /// Reference image: binary PPM or scene config text
    #[arg(long)]
    image: PathBuf,
    /// Real area of the reference region in cm^2
    #[arg(long)]
    real_area: f64,
    /// Camera distance in cm at capture time
    #[arg(long)]
    distance: f64,
    /// Output calibration file
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    band: BandFlags,
    /// Optional key=value config file (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    /// Image to measure: binary PPM or scene config text
    #[arg(long)]
    image: PathBuf,
    /// Calibration file written by `calibrate`
    #[arg(long)]
    calib: PathBuf,
    /// Camera distance in cm at capture time
    #[arg(long)]
    distance: f64,
    #[command(flatten)]
    band: BandFlags,
    /// Optional key=value config file (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Plants CSV to append to (requires --plant-id, --date, --measured-weight)
    #[arg(long, requires_all = ["plant_id", "date", "measured_weight"])]
    plants: Option<PathBuf>,
    /// Plant identifier, e.g. B1
    #[arg(long, requires = "plants")]
    plant_id: Option<String>,
    /// Observation date, YYYY-MM-DD
    #[arg(long, requires = "plants")]
    date: Option<String>,
    /// Scale reading in grams
    #[arg(long, requires = "plants")]
    measured_weight: Option<f64>,
    /// Sponge + basket weight subtracted from the scale reading
    #[arg(long, default_value_t = 0.0, requires = "plants")]
    tare: f64,
}

#[derive(Args)]
struct EvalSensorsArgs {
    /// Trials CSV: `label,actual,measured` or `actual,measured`
    #[arg(long)]
    trials: PathBuf,
    /// Denominator convention: `measured` (table reproduction) or `actual`
    #[arg(long, default_value = "measured")]
    convention: String,
}

#[derive(Args)]
struct ServeArgs {
    /// Bind address, e.g. 127.0.0.1:7878 (port 0 picks one)
    #[arg(long)]
    bind: Option<String>,
    /// Append-only readings store
    #[arg(long)]
    store: PathBuf,
    /// Shut down after this many accepted readings (for scripted runs)
    #[arg(long)]
    stop_after: Option<u64>,
    /// Optional key=value config file (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Server address, e.g. 127.0.0.1:7878
    #[arg(long)]
    addr: Option<String>,
    /// Node profile file
    #[arg(long)]
    profiles: PathBuf,
    /// Readings to emit per node
    #[arg(long)]
    count: usize,
    /// One thread per node instead of sequential emission
    #[arg(long)]
    concurrent: bool,
    /// Optional key=value config file (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Readings store written by `serve`
    #[arg(long)]
    readings: PathBuf,
    /// Plants CSV written by `measure`
    #[arg(long)]
    plants: PathBuf,
    /// Model kind: `ols` or `bayes`
    #[arg(long, default_value = "ols")]
    model: String,
    /// Output model file
    #[arg(long)]
    model_out: PathBuf,
    /// Output metrics CSV
    #[arg(long)]
    metrics_out: PathBuf,
    /// Optional test-set predictions CSV (input for `plot`)
    #[arg(long)]
    predictions_out: Option<PathBuf>,
    /// Training fraction
    #[arg(long)]
    train: Option<f64>,
    /// Validation fraction
    #[arg(long)]
    val: Option<f64>,
    /// Test fraction
    #[arg(long)]
    test: Option<f64>,
    /// Shuffle seed
    #[arg(long)]
    seed: Option<u64>,
    /// Ridge prior precision for `bayes`
    #[arg(long)]
    lambda: Option<f64>,
    /// Fixed noise variance for `bayes` (default: OLS residual variance)
    #[arg(long)]
    noise_variance: Option<f64>,
    /// Optional key=value config file (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file written by `train`
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated feature values in model order
    #[arg(long)]
    features: String,
}

#[derive(Args)]
struct PlotArgs {
    /// Predictions CSV (`actual,predicted`) written by `train`
    #[arg(long)]
    predictions: PathBuf,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Calibrate(args) => {
            let cfg = FileConfig::load(args.config.as_deref())?;
            imaging::cmd_calibrate(&imaging::CalibrateRequest {
                image: &args.image,
                real_area_cm2: args.real_area,
                distance_cm: args.distance,
                out: &args.out,
                band: args.band.resolve(&cfg)?,
            })
        }
        Command::Measure(args) => {
            let cfg = FileConfig::load(args.config.as_deref())?;
            let record = match (
                &args.plants,
                &args.plant_id,
                &args.date,
                args.measured_weight,
            ) {
                (Some(plants), Some(plant_id), Some(date), Some(measured_weight)) => {
                    Some(imaging::RecordRequest {
                        plants,
                        plant_id,
                        date,
                        measured_weight_g: measured_weight,
                        tare_g: args.tare,
                    })
                }
                (None, None, None, None) => None,
                _ => bail!("--plants, --plant-id, --date, and --measured-weight go together"),
            };
            imaging::cmd_measure(&imaging::MeasureRequest {
                image: &args.image,
                calib: &args.calib,
                distance_cm: args.distance,
                band: args.band.resolve(&cfg)?,
                record,
            })
        }
        Command::EvalSensors(args) => {
            sensors::cmd_eval_sensors(&args.trials, sensors::parse_convention(&args.convention)?)
        }
        Command::Serve(args) => {
            let cfg = FileConfig::load(args.config.as_deref())?;
            let bind = args
                .bind
                .or_else(|| cfg.get_str("bind").map(str::to_string))
                .unwrap_or_else(|| "127.0.0.1:7878".to_string());
            net::cmd_serve(&bind, &args.store, args.stop_after)
        }
        Command::Simulate(args) => {
            let cfg = FileConfig::load(args.config.as_deref())?;
            let addr = args
                .addr
                .or_else(|| cfg.get_str("addr").map(str::to_string))
                .unwrap_or_else(|| "127.0.0.1:7878".to_string());
            net::cmd_simulate(&addr, &args.profiles, args.count, args.concurrent)
        }
        Command::Train(args) => {
            let cfg = FileConfig::load(args.config.as_deref())?;
            let split = SplitSpec::new(
                pick(args.train, cfg.get_f64("train_fraction")?, 0.6),
                pick(args.val, cfg.get_f64("val_fraction")?, 0.2),
                pick(args.test, cfg.get_f64("test_fraction")?, 0.2),
                pick(args.seed, cfg.get_u64("seed")?, 42),
            )?;
            training::cmd_train(&training::TrainRequest {
                readings: &args.readings,
                plants: &args.plants,
                kind: training::parse_model_kind(&args.model)?,
                split,
                lambda: pick(args.lambda, cfg.get_f64("lambda")?, 1.0),
                noise_variance: args.noise_variance.or(cfg.get_f64("noise_variance")?),
                model_out: &args.model_out,
                metrics_out: &args.metrics_out,
                predictions_out: args.predictions_out.as_deref(),
            })
        }
        Command::Predict(args) => training::cmd_predict(&args.model, &args.features),
        Command::Plot(args) => {
            let points = training::load_predictions(&args.predictions)?;
            let svg = plot::scatter_svg(&points)?;
            std::fs::write(&args.out, svg)?;
            eprintln!("wrote {}", args.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
