use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crossdet::geom::Box3D;
use crossdet::harmonize::{
    builtin_profile, filter_frames_without_class, harmonize_cloud, percentage_gap,
    size_statistics, suggested_vertical_shift, DatasetProfile, HarmonizeConfig, PointRange,
    VerticalShift, BUILTIN_PROFILES,
};
use crossdet::ingest::{
    parse_canonical, parse_kitti_label, read_pointcloud, write_canonical_gt,
    write_canonical_predictions, write_pointcloud, write_report, IngestError, KittiCalib,
    ParsedFrames, ReportFormat,
};
use crossdet::metrics::{
    evaluate_with, ApReport, EvalConfig, FrameSet, GroundTruthObject, Prediction, RecallPoints,
};
use crossdet::simulate::{run_experiment_with, HeadingMode, SimConfig};
use crossdet::Execution;

use crate::{EvalFlags, EvaluateArgs, HarmonizeArgs, OutputFlags, SimulateArgs, StatsArgs, Usage};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn eval_config(f: &EvalFlags) -> EvalConfig {
    EvalConfig {
        box_iou_threshold: f.iou,
        dim_iou_threshold: f.dim_iou,
        difficulty_depths: f.difficulty_depths,
        recall_points: RecallPoints::from_count(f.recall_points).expect("restricted by clap"),
        target_class: f.class.clone(),
        metrics: f.metrics.0.clone(),
    }
}

fn execution(o: &OutputFlags) -> Execution {
    if o.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

/// Table on stdout, or the chosen format on stdout when there is no file.
fn emit_report(report: &ApReport, o: &OutputFlags, out: &mut dyn Write) -> Result<()> {
    match &o.out {
        Some(path) => {
            write_file(path, &write_report(report, o.format))?;
            out.write_all(&write_report(report, ReportFormat::Table))?;
        }
        None => out.write_all(&write_report(report, o.format))?,
    }
    Ok(())
}

fn canonical_file(path: &Path) -> Result<ParsedFrames> {
    let text = read_text(path)?;
    parse_canonical(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `<frame>.txt` label files of a directory, sorted by name.
fn label_files(dir: &Path) -> Result<Vec<(String, std::path::PathBuf)>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            let stem = path.file_stem().expect("has extension").to_string_lossy().into_owned();
            files.push((stem, path));
        }
    }
    files.sort();
    Ok(files)
}

fn kitti_dir<T>(
    dir: &Path,
    calib_dir: Option<&Path>,
    convert: impl Fn(crossdet::ingest::CanonicalRecord, &Path) -> Result<T>,
) -> Result<FrameSet<T>> {
    let mut frames = FrameSet::new();
    for (frame, path) in label_files(dir)? {
        let calib = match calib_dir {
            Some(c) => {
                let p = c.join(format!("{frame}.txt"));
                KittiCalib::parse(&read_text(&p)?).with_context(|| format!("parsing {}", p.display()))?
            }
            None => KittiCalib::nominal(),
        };
        let labels = parse_kitti_label(&read_text(&path)?, &calib, &frame)
            .with_context(|| format!("parsing {}", path.display()))?;
        if labels.dropped > 0 {
            eprintln!("{}: skipped {} rows with empty boxes", path.display(), labels.dropped);
        }
        let objs = labels
            .records
            .into_iter()
            .map(|r| convert(r, &path))
            .collect::<Result<Vec<_>>>()?;
        frames.insert(frame, objs);
    }
    Ok(frames)
}

pub fn evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = eval_config(&a.eval);
    let (gt, pred) = if a.kitti_labels {
        let calib = a.calib_dir.as_deref();
        let gt = kitti_dir(&a.gt, calib, |r, _| Ok(GroundTruthObject::new(r.bbox, r.class_label)))?;
        let pred = kitti_dir(&a.pred, calib, |r, path| match r.score {
            Some(s) => Ok(Prediction::new(r.bbox, r.class_label, s)),
            None => Err(IngestError::Parse { line: 0, message: "prediction row without score column".into() })
                .with_context(|| format!("parsing {}", path.display())),
        })?;
        (gt, pred)
    } else {
        let gt = canonical_file(&a.gt)?
            .into_ground_truth()
            .ok_or_else(|| IngestError::Parse { line: 1, message: "ground truth records carry scores".into() })
            .with_context(|| format!("parsing {}", a.gt.display()))?;
        let pred = canonical_file(&a.pred)?
            .into_predictions()
            .ok_or_else(|| IngestError::Parse { line: 1, message: "prediction records lack scores".into() })
            .with_context(|| format!("parsing {}", a.pred.display()))?;
        (gt, pred)
    };
    let report = evaluate_with(&gt, &pred, &cfg, execution(&a.output))?;
    emit_report(&report, &a.output, out)
}

fn preset(name: &str) -> Result<DatasetProfile> {
    builtin_profile(name).ok_or_else(|| {
        let names: Vec<&str> = BUILTIN_PROFILES.iter().map(|(n, _)| *n).collect();
        Usage(format!("unknown dataset `{name}` (expected one of {})", names.join(", "))).into()
    })
}

pub fn simulate(a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    if !(a.spread.is_finite() && a.spread >= 0.0) {
        bail!(Usage(format!("--spread must be nonnegative, got {}", a.spread)));
    }
    let mut cfg = SimConfig::new(
        preset(&a.source)?.with_relative_spread(a.spread),
        preset(&a.target)?.with_relative_spread(a.spread),
    );
    cfg.overfit_alpha = a.alpha;
    cfg.frames = a.frames;
    cfg.seed = a.seed;
    cfg.center_noise = a.noise;
    cfg.yaw_noise = a.yaw_noise;
    cfg.heading = match a.heading.as_str() {
        "uniform" => HeadingMode::Uniform,
        _ => HeadingMode::RoadAligned { jitter: a.heading_jitter },
    };
    cfg.cars_per_frame = a.cars_per_frame;
    cfg.drop_rate = a.drop_rate;
    cfg.spawn_rate = a.spawn_rate;

    let eval = EvalConfig::default();
    let result = run_experiment_with(&cfg, &eval, execution(&a.output))?;
    if let Some(dir) = &a.export_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_file(&dir.join("gt.txt"), write_canonical_gt(&result.ground_truth).as_bytes())?;
        write_file(&dir.join("pred.txt"), write_canonical_predictions(&result.predictions).as_bytes())?;
        write_file(&dir.join("sim.cfg"), cfg.to_kv().to_text().as_bytes())?;
    }
    if a.output.format == ReportFormat::Table || a.output.out.is_some() {
        let g = result.realized_gap;
        writeln!(
            out,
            "{} -> {} | alpha {} | {} frames, {} cars | drawn size gap width {:+.1}% height {:+.1}% length {:+.1}%",
            cfg.source.name,
            cfg.target.name,
            cfg.overfit_alpha,
            cfg.frames,
            result.ground_truth.values().map(Vec::len).sum::<usize>(),
            g.width,
            g.height,
            g.length
        )?;
    }
    emit_report(&result.report, &a.output, out)
}

pub fn harmonize(a: HarmonizeArgs, out: &mut dyn Write) -> Result<()> {
    let vertical_shift = match &a.dataset {
        Some(name) => suggested_vertical_shift(name).ok_or_else(|| {
            Usage(format!("no suggested shift for `{name}` (expected kitti, nuscenes or waymo)"))
        })?,
        None => a.shift_z,
    };
    let cfg = HarmonizeConfig {
        point_range: PointRange(a.range),
        vertical_shift,
        voxel_size: a.voxel_size,
    };
    cfg.validate()?;
    if let Some(p) = &a.save_config {
        write_file(p, cfg.to_kv().to_text().as_bytes())?;
    }

    if a.input.extension().is_some_and(|e| e == "bin") {
        let bytes = fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
        let cloud = read_pointcloud(&bytes).with_context(|| format!("parsing {}", a.input.display()))?;
        let kept = harmonize_cloud(&cloud, &cfg);
        write_file(&a.out, &write_pointcloud(&kept))?;
        writeln!(out, "points {} -> {}", cloud.len(), kept.len())?;
        return Ok(());
    }

    let range = cfg.point_range;
    let inside = |b: &Box3D| range.contains(b.cx(), b.cy(), b.cz());
    let count = |n: usize, frames: usize| format!("{n} objects in {frames} frames");
    match canonical_file(&a.input)? {
        ParsedFrames::GroundTruth(mut gt) => {
            let before = count(gt.values().map(Vec::len).sum(), gt.len());
            gt.shift_vertical(cfg.vertical_shift);
            for objs in gt.values_mut() {
                objs.retain(|o| inside(&o.bbox));
            }
            if !a.keep_empty_frames {
                gt = filter_frames_without_class(&gt, &a.class);
            }
            write_file(&a.out, write_canonical_gt(&gt).as_bytes())?;
            let after = count(gt.values().map(Vec::len).sum(), gt.len());
            writeln!(out, "ground truth {before} -> {after}")?;
        }
        ParsedFrames::Predictions(mut pred) => {
            let before = count(pred.values().map(Vec::len).sum(), pred.len());
            pred.shift_vertical(cfg.vertical_shift);
            for objs in pred.values_mut() {
                objs.retain(|o| inside(&o.bbox));
            }
            write_file(&a.out, write_canonical_predictions(&pred).as_bytes())?;
            let after = count(pred.values().map(Vec::len).sum(), pred.len());
            writeln!(out, "predictions {before} -> {after}")?;
        }
    }
    Ok(())
}

/// Built-in name, or a canonical ground-truth file.
fn profile_arg(arg: &str, class: &str) -> Result<DatasetProfile> {
    if let Some(p) = builtin_profile(arg) {
        return Ok(p);
    }
    let path = Path::new(arg);
    if !path.exists() {
        let names: Vec<&str> = BUILTIN_PROFILES.iter().map(|(n, _)| *n).collect();
        bail!(Usage(format!(
            "`{arg}` is neither a file nor a dataset ({})",
            names.join(", ")
        )));
    }
    let gt = canonical_file(path)?
        .into_ground_truth()
        .ok_or_else(|| IngestError::Parse { line: 1, message: "expected ground truth without scores".into() })
        .with_context(|| format!("parsing {}", path.display()))?;
    let name = path.file_stem().map_or(arg.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(size_statistics(&name, &gt, class)?)
}

fn profile_row(out: &mut dyn Write, p: &DatasetProfile) -> Result<()> {
    writeln!(
        out,
        "{:<12}{:>8.2}{:>8.2}{:>8.2}{:>10.3}{:>10.3}{:>10.3}",
        p.name, p.mean_width, p.mean_height, p.mean_length, p.spread_width, p.spread_height, p.spread_length
    )?;
    Ok(())
}

pub fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let mut profiles = Vec::new();
    for arg in [&a.source, &a.target].into_iter().flatten() {
        profiles.push(profile_arg(arg, &a.class)?);
    }
    if profiles.is_empty() {
        profiles = BUILTIN_PROFILES
            .iter()
            .map(|(n, _)| builtin_profile(n).expect("listed"))
            .collect();
    }
    writeln!(
        out,
        "{:<12}{:>8}{:>8}{:>8}{:>10}{:>10}{:>10}",
        "profile", "width", "height", "length", "sd_width", "sd_height", "sd_length"
    )?;
    for p in &profiles {
        profile_row(out, p)?;
    }
    if let (Some(_), Some(_)) = (&a.source, &a.target) {
        let g = percentage_gap(&profiles[0], &profiles[1]);
        writeln!(
            out,
            "gap {} -> {}: width {:+.1}% height {:+.1}% length {:+.1}%",
            profiles[0].name, profiles[1].name, g.width, g.height, g.length
        )?;
    }
    Ok(())
}
