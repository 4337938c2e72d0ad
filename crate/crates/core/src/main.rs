use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crossdet::harmonize::{HarmonizeError, DEFAULT_RELATIVE_SPREAD};
use crossdet::ingest::{IngestError, ReportFormat};
use crossdet::kv::{parse_list, KvError};
use crossdet::metrics::{EvalError, MetricKind, DEFAULT_BOX_IOU, DEFAULT_DIM_IOU};
use crossdet::simulate::{SimError, DEFAULT_CENTER_NOISE, DEFAULT_HEADING_JITTER, DEFAULT_YAW_NOISE};

mod commands;

#[derive(Parser)]
#[command(name = "crossdet", version, about = "Cross-domain 3D car detection evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score predictions against ground truth: 3D, BEV, side-view, front-view
    /// and per-dimension AP by difficulty.
    Evaluate(EvaluateArgs),
    /// Run the size-overfit detector simulation and report its AP.
    Simulate(SimulateArgs),
    /// Crop to a point range, shift vertically, drop frames without the class.
    Harmonize(HarmonizeArgs),
    /// Car size statistics and percentage gaps between datasets.
    Stats(StatsArgs),
}

#[derive(Args)]
struct EvalFlags {
    /// Metric rows: comma list of 3d, bev, side, front, length, width,
    /// height, dim (the three dimensions) or all.
    #[arg(long, default_value = "all", value_parser = parse_metrics)]
    metrics: MetricSet,
    /// IoU threshold for 3d, bev, side and front.
    #[arg(long, default_value_t = DEFAULT_BOX_IOU)]
    iou: f64,
    /// IoU threshold for length, width and height.
    #[arg(long, default_value_t = DEFAULT_DIM_IOU)]
    dim_iou: f64,
    /// Easy, moderate and hard depth cutoffs in meters from the sensor.
    #[arg(long, default_value = "30,70,70", value_parser = parse_list::<3>)]
    difficulty_depths: [f64; 3],
    /// Recall positions for interpolated AP.
    #[arg(long, default_value = "40", value_parser = parse_recall_points)]
    recall_points: u32,
    /// Class to evaluate; others are ignored.
    #[arg(long = "class", default_value = "Car")]
    class: String,
}

#[derive(Args)]
struct OutputFlags {
    /// Also write the report here, in --format.
    #[arg(long)]
    out: Option<PathBuf>,
    /// table, csv or json-like. Without --out this applies to stdout.
    #[arg(long, default_value = "table", value_parser = parse_format)]
    format: ReportFormat,
    /// Single-threaded execution (output is identical either way).
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground truth: canonical record file, or a directory of KITTI label
    /// files with --kitti-labels.
    #[arg(long)]
    gt: PathBuf,
    /// Predictions, same layout as --gt with a trailing score column.
    #[arg(long)]
    pred: PathBuf,
    /// Read --gt and --pred as directories of KITTI `<frame>.txt` labels.
    #[arg(long)]
    kitti_labels: bool,
    /// KITTI calibration directory holding `<frame>.txt`; nominal
    /// calibration when omitted.
    #[arg(long, requires = "kitti_labels")]
    calib_dir: Option<PathBuf>,
    #[command(flatten)]
    eval: EvalFlags,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct SimulateArgs {
    /// Training dataset profile: kitti, argoverse, nuscenes, lyft or waymo.
    #[arg(long, default_value = "waymo")]
    source: String,
    /// Evaluation dataset profile.
    #[arg(long, default_value = "kitti")]
    target: String,
    /// Size overfit: 1 predicts source-mean sizes, 0 the true sizes.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 200)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size spread of both profiles as a fraction of each mean.
    #[arg(long, default_value_t = DEFAULT_RELATIVE_SPREAD)]
    spread: f64,
    /// Std of predicted center jitter in meters.
    #[arg(long, default_value_t = DEFAULT_CENTER_NOISE)]
    noise: f64,
    /// Std of predicted heading jitter in radians.
    #[arg(long, default_value_t = DEFAULT_YAW_NOISE)]
    yaw_noise: f64,
    /// Ground-truth headings: road (along the x axis, jittered) or uniform.
    #[arg(long, default_value = "road", value_parser = ["road", "uniform"])]
    heading: String,
    /// Std of road heading jitter in radians.
    #[arg(long, default_value_t = DEFAULT_HEADING_JITTER)]
    heading_jitter: f64,
    /// Inclusive range of cars per frame.
    #[arg(long, default_value = "4,12", value_parser = parse_count_range)]
    cars_per_frame: (usize, usize),
    /// Probability that a car gets no prediction.
    #[arg(long, default_value_t = 0.0)]
    drop_rate: f64,
    /// Probability, per car, of an extra unmatched prediction.
    #[arg(long, default_value_t = 0.0)]
    spawn_rate: f64,
    /// Write gt.txt, pred.txt and sim.cfg here.
    #[arg(long)]
    export_dir: Option<PathBuf>,
    #[command(flatten)]
    output: OutputFlags,
}

#[derive(Args)]
struct HarmonizeArgs {
    /// Point cloud (`.bin`, float32 x y z intensity) or canonical records.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Kept region x0,y0,z0,x1,y1,z1 in meters; boxes are kept by center.
    #[arg(long, default_value = "-75.2,-75.2,-2,75.2,75.2,4", value_parser = parse_list::<6>)]
    range: [f64; 6],
    /// Added to every z before cropping.
    #[arg(long, default_value_t = 0.0, conflicts_with = "dataset", allow_hyphen_values = true)]
    shift_z: f64,
    /// Use the usual vertical shift for kitti, nuscenes or waymo.
    #[arg(long)]
    dataset: Option<String>,
    /// Voxel size recorded in the written config.
    #[arg(long, default_value = "0.1,0.1,0.15", value_parser = parse_list::<3>)]
    voxel_size: [f64; 3],
    /// Frames with no ground truth of this class are dropped.
    #[arg(long = "class", default_value = "Car")]
    class: String,
    #[arg(long)]
    keep_empty_frames: bool,
    /// Also write the harmonization config here.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Built-in profile name or canonical ground-truth file.
    #[arg(long)]
    source: Option<String>,
    /// Built-in profile name or canonical ground-truth file; with --source,
    /// prints the gap source vs target.
    #[arg(long)]
    target: Option<String>,
    #[arg(long = "class", default_value = "Car")]
    class: String,
}

#[derive(Clone, Debug)]
struct MetricSet(Vec<MetricKind>);

fn parse_metrics(s: &str) -> Result<MetricSet, String> {
    let mut picked = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part {
            "all" => picked.extend(MetricKind::ALL),
            "dim" => picked.extend(MetricKind::DIMENSIONS),
            _ => picked.push(part.parse::<MetricKind>()?),
        }
    }
    Ok(MetricSet(
        MetricKind::ALL.into_iter().filter(|k| picked.contains(k)).collect(),
    ))
}

fn parse_recall_points(s: &str) -> Result<u32, String> {
    match s {
        "11" => Ok(11),
        "40" => Ok(40),
        _ => Err("expected 11 or 40".into()),
    }
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn parse_count_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected min,max")?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a count"));
    Ok((p(a)?, p(b)?))
}

/// Bad flag values that clap cannot see on its own.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_IO: u8 = 5;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if cause.is::<IngestError>() || cause.is::<KvError>() {
            return EXIT_PARSE;
        }
        if let Some(e) = cause.downcast_ref::<EvalError>() {
            return eval_code(e);
        }
        if let Some(e) = cause.downcast_ref::<HarmonizeError>() {
            return harmonize_code(e);
        }
        if let Some(e) = cause.downcast_ref::<SimError>() {
            return match e {
                SimError::InvalidConfig(_) => EXIT_USAGE,
                SimError::Eval(e) => eval_code(e),
                SimError::Harmonize(e) => harmonize_code(e),
                SimError::Kv(_) => EXIT_PARSE,
            };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    1
}

fn eval_code(e: &EvalError) -> u8 {
    match e {
        EvalError::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_INPUT,
    }
}

fn harmonize_code(e: &HarmonizeError) -> u8 {
    match e {
        HarmonizeError::InvalidConfig(_) => EXIT_USAGE,
        HarmonizeError::EmptyInput(_) => EXIT_INPUT,
        HarmonizeError::Kv(_) => EXIT_PARSE,
        HarmonizeError::Geom(_) => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Evaluate(a) => commands::evaluate(a, &mut out),
        Command::Simulate(a) => commands::simulate(a, &mut out),
        Command::Harmonize(a) => commands::harmonize(a, &mut out),
        Command::Stats(a) => commands::stats(a, &mut out),
    };
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
