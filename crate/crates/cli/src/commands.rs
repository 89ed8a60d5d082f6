use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use labelnoise::annotation::{parse_midi_with, parse_tsv_with, to_tsv};
use labelnoise::io::{
    eval_rows_csv, experiment_summary_json, experiment_table_csv, feature_matrix_to_csv,
    intervals_path, label_matrix_to_csv, read_label_matrix, sidecar_path, EvalRow, FeatureSidecar,
    MatrixSidecar,
};
use labelnoise::metrics::{
    cell_disagreement, compare_resampled, disagreement, interval_disagreement, prf, EvalProtocol,
};
use labelnoise::quantize::{rasterize_detailed, QuantizedInterval};
use labelnoise::synth::{generate_corpus, render_features_seeded};
use labelnoise::trainer::run_sensitivity_experiment;
use labelnoise::{
    rasterize, validate, Annotation, ExperimentConfig, FrameGrid, LabelMatrix, LabelingFunction,
    PitchMap, SynthConfig,
};
use serde_json::json;

use crate::manifest::{manifest_path, write_atomic, RunManifest};
use crate::{CliError, Command, PitchArgs};

pub fn dispatch(command: Command, args: &[String]) -> Result<(), CliError> {
    match command {
        Command::Rasterize {
            input,
            fps,
            function,
            seed,
            out,
            intervals,
            pitches,
        } => cmd_rasterize(
            RasterizeArgs {
                input,
                fps,
                function,
                seed,
                out,
                intervals,
                pitches,
            },
            args,
        ),
        Command::Eval {
            pred,
            reference,
            annotation,
            function,
            fps,
            seed,
            ref_fps,
            window_sec,
            out,
            pitches,
        } => cmd_eval(
            EvalArgs {
                pred,
                reference,
                annotation,
                function,
                fps,
                seed,
                ref_fps,
                window_sec,
                out,
                pitches,
            },
            args,
        ),
        Command::Disagree {
            annotation,
            fps,
            fn_a,
            fn_b,
            seed_a,
            seed_b,
            a,
            b,
            out,
            pitches,
        } => cmd_disagree(
            DisagreeArgs {
                annotation,
                fps,
                fn_a,
                fn_b,
                seed_a,
                seed_b,
                a,
                b,
                out,
                pitches,
            },
            args,
        ),
        Command::Synth {
            config,
            seed,
            num_pieces,
            fps,
            out,
        } => cmd_synth(config, seed, num_pieces, fps, &out, args),
        Command::Experiment {
            fns,
            seeds,
            config,
            train_fps,
            ref_fps,
            window_sec,
            epochs,
            f32,
            out,
        } => cmd_experiment(
            ExperimentArgs {
                fns,
                seeds,
                config,
                train_fps,
                ref_fps,
                window_sec,
                epochs,
                f32,
                out,
            },
            args,
        ),
        Command::Inspect { input, pitches } => cmd_inspect(&input, &pitches),
        Command::Replay { manifest, out } => cmd_replay(&manifest, out),
    }
}

fn pitch_map(p: &PitchArgs) -> PitchMap {
    PitchMap {
        lowest_pitch: p.lowest_pitch,
        num_labels: p.num_labels,
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

fn is_midi(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("mid" | "midi")
    )
}

/// Parses a `.mid`/`.midi` or TSV annotation, returning its raw bytes for the manifest.
fn read_annotation(path: &Path, pitches: &PitchArgs) -> Result<(Annotation, Vec<u8>), CliError> {
    let bytes = read_bytes(path)?;
    let map = pitch_map(pitches);
    let parsed = if is_midi(path) {
        parse_midi_with(&bytes, map)
    } else {
        let text = std::str::from_utf8(&bytes)
            .map_err(|e| CliError::Input(format!("{}: not UTF-8: {e}", path.display())))?;
        parse_tsv_with(text, map)
    };
    parsed
        .map(|a| (a, bytes))
        .map_err(|e| CliError::in_file(path, e))
}

fn read_matrix(
    path: &Path,
    manifest: &mut RunManifest,
) -> Result<(LabelMatrix, MatrixSidecar), CliError> {
    let csv = read_bytes(path)?;
    let (m, side) = read_label_matrix(path).map_err(|e| CliError::in_file(path, e))?;
    manifest.add_input(path, &csv);
    let side_path = sidecar_path(path);
    manifest.add_input(&side_path, &read_bytes(&side_path)?);
    Ok((m, side))
}

fn read_intervals(
    path: &Path,
    manifest: &mut RunManifest,
) -> Result<Vec<QuantizedInterval>, CliError> {
    let bytes = read_bytes(path)?;
    manifest.add_input(path, &bytes);
    serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn check_rate(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn require_seed(
    function: LabelingFunction,
    seed: Option<u64>,
    flag: &str,
) -> Result<u64, CliError> {
    match (function.is_random(), seed) {
        (true, None) => Err(CliError::Usage(format!(
            "labeling function {function} is random and needs {flag}"
        ))),
        (_, s) => Ok(s.unwrap_or(0)),
    }
}

fn json_line<T: serde::Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string(v).map_err(labelnoise::Error::from)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn json_pretty<T: serde::Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(labelnoise::Error::from)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn write_matrix(
    path: &Path,
    m: &LabelMatrix,
    function: Option<LabelingFunction>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    write_atomic(path, label_matrix_to_csv(m).as_bytes())?;
    write_atomic(
        &sidecar_path(path),
        &json_line(&MatrixSidecar::for_matrix(m, function, seed))?,
    )
}

struct RasterizeArgs {
    input: PathBuf,
    fps: f64,
    function: LabelingFunction,
    seed: Option<u64>,
    out: Option<PathBuf>,
    intervals: bool,
    pitches: PitchArgs,
}

fn cmd_rasterize(r: RasterizeArgs, args: &[String]) -> Result<(), CliError> {
    let RasterizeArgs {
        input,
        fps,
        function,
        seed,
        out,
        intervals,
        pitches,
    } = r;
    let (input, pitches) = (input.as_path(), &pitches);
    check_rate("fps", fps)?;
    let used_seed = require_seed(function, seed, "--seed")?;
    let (annotation, bytes) = read_annotation(input, pitches)?;
    let grid = FrameGrid::covering(fps, annotation.duration_sec())?;
    let r = rasterize_detailed(&annotation, grid, function, used_seed)?;
    let m = &r.matrix;

    let out = out.unwrap_or_else(|| input.with_extension(format!("{function}.csv")));
    let recorded_seed = function.is_random().then_some(used_seed);
    write_matrix(&out, m, Some(function), recorded_seed)?;
    if intervals {
        write_atomic(&intervals_path(&out), &json_pretty(&r.intervals)?)?;
    }

    let mut manifest = RunManifest::new(
        "rasterize",
        args,
        json!({
            "fps": fps,
            "labeling_function": function,
            "num_frames": grid.num_frames(),
            "intervals": intervals,
            "pitch_map": pitch_map(pitches),
        }),
        recorded_seed.into_iter().collect(),
    );
    manifest.add_input(input, &bytes);
    manifest.write(&manifest_path(&out))?;
    println!(
        "{}: {} frames x {} labels",
        out.display(),
        m.num_frames(),
        m.num_labels()
    );
    Ok(())
}

struct EvalArgs {
    pred: Option<PathBuf>,
    reference: Option<PathBuf>,
    annotation: Option<PathBuf>,
    function: Option<LabelingFunction>,
    fps: Option<f64>,
    seed: Option<u64>,
    ref_fps: f64,
    window_sec: f64,
    out: Option<PathBuf>,
    pitches: PitchArgs,
}

fn cmd_eval(a: EvalArgs, args: &[String]) -> Result<(), CliError> {
    check_rate("window-sec", a.window_sec)?;
    check_rate("ref-fps", a.ref_fps)?;
    let mut manifest = RunManifest::new("eval", args, serde_json::Value::Null, Vec::new());

    let annotation = match &a.annotation {
        Some(path) => {
            let (ann, bytes) = read_annotation(path, &a.pitches)?;
            manifest.add_input(path, &bytes);
            Some((path.clone(), ann))
        }
        None => None,
    };

    let (pred, piece, function, seed) = match (&a.pred, &annotation, a.function) {
        (Some(path), _, _) => {
            let (m, side) = read_matrix(path, &mut manifest)?;
            (m, stem(path), side.labeling_function, side.seed)
        }
        (None, Some((path, ann)), Some(function)) => {
            let fps = a
                .fps
                .ok_or_else(|| CliError::Usage("--fn with --annotation needs --fps".into()))?;
            check_rate("fps", fps)?;
            let seed = require_seed(function, a.seed, "--seed")?;
            let grid = FrameGrid::covering(fps, ann.duration_sec())?;
            let m = rasterize(ann, grid, function, seed)?;
            (
                m,
                stem(path),
                Some(function),
                function.is_random().then_some(seed),
            )
        }
        _ => {
            return Err(CliError::Usage(
                "give --pred, or --annotation together with --fn and --fps".into(),
            ))
        }
    };

    let protocol = EvalProtocol {
        reference_fps: a.ref_fps,
        window_sec: a.window_sec,
    };
    let reference = match (&a.reference, &annotation) {
        (Some(path), _) => read_matrix(path, &mut manifest)?.0,
        (None, Some((_, ann))) => protocol.reference(ann)?,
        (None, None) => {
            return Err(CliError::Usage(
                "give --ref or --annotation for the reference".into(),
            ))
        }
    };

    let result = prf(compare_resampled(&pred, &reference, a.window_sec)?);
    let row = EvalRow {
        piece,
        function,
        seed,
        fps: pred.grid().fps(),
        result,
    };
    let csv = eval_rows_csv(std::slice::from_ref(&row));
    print!("{csv}");

    if let Some(out) = &a.out {
        write_atomic(out, csv.as_bytes())?;
        let key = function
            .map(|f| f.to_string())
            .unwrap_or_else(|| "unlabeled".into());
        let summary =
            json!({ key: { "mean_f": result.fmeasure, "per_piece_f": [result.fmeasure] } });
        write_atomic(&out.with_extension("summary.json"), &json_pretty(&summary)?)?;
        manifest.config = json!({
            "reference_fps": reference.grid().fps(),
            "window_sec": a.window_sec,
            "pred_fps": pred.grid().fps(),
            "labeling_function": function,
            "pitch_map": pitch_map(&a.pitches),
        });
        manifest.seeds = seed.into_iter().collect();
        manifest.write(&manifest_path(out))?;
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

struct DisagreeArgs {
    annotation: Option<PathBuf>,
    fps: Option<f64>,
    fn_a: LabelingFunction,
    fn_b: Option<LabelingFunction>,
    seed_a: Option<u64>,
    seed_b: Option<u64>,
    a: Option<PathBuf>,
    b: Option<PathBuf>,
    out: Option<PathBuf>,
    pitches: PitchArgs,
}

fn cmd_disagree(d: DisagreeArgs, args: &[String]) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("disagree", args, serde_json::Value::Null, Vec::new());
    let report = match (&d.a, &d.b, &d.annotation) {
        (Some(pa), Some(pb), None) => {
            let (ma, _) = read_matrix(pa, &mut manifest)?;
            let (mb, _) = read_matrix(pb, &mut manifest)?;
            let (ia, ib) = (intervals_path(pa), intervals_path(pb));
            let stats = if ia.exists() && ib.exists() {
                let ia = read_intervals(&ia, &mut manifest)?;
                let ib = read_intervals(&ib, &mut manifest)?;
                interval_disagreement(&ma, &mb, &ia, &ib)?
            } else {
                cell_disagreement(&ma, &mb)?
            };
            json!({ "a": pa.display().to_string(), "b": pb.display().to_string(), "stats": stats })
        }
        (None, None, Some(path)) => {
            let fps = d
                .fps
                .ok_or_else(|| CliError::Usage("--fps is required".into()))?;
            check_rate("fps", fps)?;
            let fn_b = d
                .fn_b
                .ok_or_else(|| CliError::Usage("--fn-b is required".into()))?;
            let seed_a = require_seed(d.fn_a, d.seed_a, "--seed-a")?;
            let seed_b = require_seed(fn_b, d.seed_b, "--seed-b")?;
            let (ann, bytes) = read_annotation(path, &d.pitches)?;
            manifest.add_input(path, &bytes);
            manifest.seeds = vec![seed_a, seed_b];
            let grid = FrameGrid::covering(fps, ann.duration_sec())?;
            let ra = rasterize_detailed(&ann, grid, d.fn_a, seed_a)?;
            let rb = rasterize_detailed(&ann, grid, fn_b, seed_b)?;
            let stats = disagreement(&ra, &rb, &ann)?;
            json!({
                "annotation": path.display().to_string(),
                "fps": fps,
                "fn_a": d.fn_a,
                "fn_b": fn_b,
                "seed_a": seed_a,
                "seed_b": seed_b,
                "events": ann.len(),
                "stats": stats,
            })
        }
        _ => {
            return Err(CliError::Usage(
                "give either an annotation with --fps and --fn-b, or both --a and --b".into(),
            ))
        }
    };
    let bytes = json_pretty(&report)?;
    match &d.out {
        Some(out) => {
            write_atomic(out, &bytes)?;
            manifest.config = report.clone();
            manifest.write(&manifest_path(out))?;
        }
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

fn read_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
    manifest: &mut RunManifest,
) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(path) => {
            let bytes = read_bytes(path)?;
            manifest.add_input(path, &bytes);
            serde_json::from_slice(&bytes)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
    }
}

fn cmd_synth(
    config: Option<PathBuf>,
    seed: Option<u64>,
    num_pieces: Option<usize>,
    fps: f64,
    out: &Path,
    args: &[String],
) -> Result<(), CliError> {
    check_rate("fps", fps)?;
    let mut manifest = RunManifest::new("synth", args, serde_json::Value::Null, Vec::new());
    let mut cfg: SynthConfig = read_config(config.as_deref(), &mut manifest)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = num_pieces {
        cfg.num_pieces = n;
    }
    if cfg.num_labels > 88 {
        return Err(CliError::Usage(
            "TSV output supports at most 88 labels".into(),
        ));
    }

    let corpus = generate_corpus(&cfg)?;
    let mut pieces = Vec::with_capacity(corpus.len());
    for (i, annotation) in corpus.iter().enumerate() {
        let id = format!("piece_{i:03}");
        let grid = FrameGrid::covering(fps, annotation.duration_sec())?;
        let noise_seed = cfg.noise_seed(i);
        let features = render_features_seeded::<f64>(annotation, grid, &cfg, noise_seed)?;
        let ann_file = format!("{id}.tsv");
        let feat_file = format!("{id}.features.csv");
        write_atomic(&out.join(&ann_file), to_tsv(annotation).as_bytes())?;
        write_atomic(
            &out.join(&feat_file),
            feature_matrix_to_csv(&features).as_bytes(),
        )?;
        let side = FeatureSidecar {
            fps,
            num_frames: grid.num_frames(),
            feature_dim: features.dim(),
            noise_seed,
        };
        write_atomic(&sidecar_path(&out.join(&feat_file)), &json_line(&side)?)?;
        pieces.push(json!({
            "id": id,
            "seed": cfg.piece_seed(i),
            "noise_seed": noise_seed,
            "events": annotation.len(),
            "annotation": ann_file,
            "features": feat_file,
        }));
    }
    let corpus_manifest = json!({ "config": cfg, "fps": fps, "pieces": pieces });
    write_atomic(&out.join("corpus.json"), &json_pretty(&corpus_manifest)?)?;

    manifest.config = json!({ "synth": cfg, "fps": fps });
    manifest.seeds = vec![cfg.seed];
    manifest.write(&out.join("manifest.json"))?;
    println!("{} pieces written to {}", corpus.len(), out.display());
    Ok(())
}

struct ExperimentArgs {
    fns: Vec<LabelingFunction>,
    seeds: Vec<u64>,
    config: Option<PathBuf>,
    train_fps: Option<f64>,
    ref_fps: Option<f64>,
    window_sec: Option<f64>,
    epochs: Option<usize>,
    f32: bool,
    out: PathBuf,
}

fn cmd_experiment(e: ExperimentArgs, args: &[String]) -> Result<(), CliError> {
    let mut manifest =
        RunManifest::new("experiment", args, serde_json::Value::Null, e.seeds.clone());
    let mut cfg: ExperimentConfig = read_config(e.config.as_deref(), &mut manifest)?;
    if let Some(v) = e.train_fps {
        check_rate("train-fps", v)?;
        cfg.train_fps = v;
    }
    if let Some(v) = e.ref_fps {
        check_rate("ref-fps", v)?;
        cfg.eval.reference_fps = v;
    }
    if let Some(v) = e.window_sec {
        check_rate("window-sec", v)?;
        cfg.eval.window_sec = v;
    }
    if let Some(v) = e.epochs {
        cfg.train.epochs = v;
    }

    let table = if e.f32 {
        run_sensitivity_experiment::<f32>(&cfg, &e.fns, &e.seeds)?
    } else {
        run_sensitivity_experiment::<f64>(&cfg, &e.fns, &e.seeds)?
    };

    write_atomic(
        &e.out.join("results.csv"),
        experiment_table_csv(&table).as_bytes(),
    )?;
    let summary = experiment_summary_json(&table)?;
    write_atomic(&e.out.join("summary.json"), summary.as_bytes())?;
    manifest.config = json!({
        "experiment": cfg,
        "fns": e.fns,
        "precision": if e.f32 { "f32" } else { "f64" },
    });
    manifest.write(&e.out.join("manifest.json"))?;
    print!("{summary}");
    Ok(())
}

fn cmd_inspect(input: &Path, pitches: &PitchArgs) -> Result<(), CliError> {
    let is_matrix = input
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let report = if is_matrix {
        let (m, side) = read_label_matrix(input).map_err(|e| CliError::in_file(input, e))?;
        let active = m.count_active();
        let per_label: Vec<usize> = (0..m.num_labels())
            .map(|k| (0..m.num_frames()).filter(|&t| m.get(t, k)).count())
            .collect();
        json!({
            "kind": "label_matrix",
            "fps": side.fps,
            "num_frames": m.num_frames(),
            "num_labels": m.num_labels(),
            "duration_sec": m.grid().duration_sec(),
            "active_cells": active,
            "density": if m.cells().is_empty() { 0.0 } else { active as f64 / m.cells().len() as f64 },
            "active_frames_per_label": per_label,
            "labeling_function": side.labeling_function,
            "seed": side.seed,
        })
    } else {
        let (a, _) = read_annotation(input, pitches)?;
        let mut per_label: BTreeMap<usize, usize> = BTreeMap::new();
        for e in a.events() {
            *per_label.entry(e.label).or_default() += 1;
        }
        let durations: Vec<f64> = a.events().iter().map(|e| e.duration_sec()).collect();
        let mean = if durations.is_empty() {
            0.0
        } else {
            durations.iter().sum::<f64>() / durations.len() as f64
        };
        json!({
            "kind": "annotation",
            "events": a.len(),
            "num_labels": a.num_labels(),
            "duration_sec": a.duration_sec(),
            "labels_used": per_label.len(),
            "events_per_label": per_label,
            "mean_note_duration_sec": mean,
            "min_note_duration_sec": durations.iter().copied().fold(f64::INFINITY, f64::min).min(f64::MAX),
            "violations": validate(&a).violations,
        })
    };
    print!("{}", String::from_utf8_lossy(&json_pretty(&report)?));
    Ok(())
}

fn replace_out(args: &[String], out: &Path) -> Vec<String> {
    let out = out.display().to_string();
    let mut result = Vec::with_capacity(args.len() + 2);
    let mut replaced = false;
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if arg == "--out" {
            result.push(arg.clone());
            result.push(out.clone());
            iter.next();
            replaced = true;
        } else if arg.starts_with("--out=") {
            result.push(format!("--out={out}"));
            replaced = true;
        } else {
            result.push(arg.clone());
        }
    }
    if !replaced {
        result.push("--out".into());
        result.push(out);
    }
    result
}

fn cmd_replay(path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let bytes = read_bytes(path)?;
    let manifest: RunManifest = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    if manifest.args.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Usage(
            "a replay manifest cannot be replayed".into(),
        ));
    }
    manifest.check_inputs()?;
    let args = match out {
        Some(out) => replace_out(&manifest.args, &out),
        None => manifest.args.clone(),
    };
    crate::run(&args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn replace_out_variants() {
        let p = Path::new("/x/y");
        assert_eq!(
            replace_out(&strings(&["experiment", "--out", "old", "--fns", "a"]), p),
            strings(&["experiment", "--out", "/x/y", "--fns", "a"])
        );
        assert_eq!(
            replace_out(&strings(&["rasterize", "--out=old"]), p),
            strings(&["rasterize", "--out=/x/y"])
        );
        assert_eq!(
            replace_out(&strings(&["rasterize", "in.tsv"]), p),
            strings(&["rasterize", "in.tsv", "--out", "/x/y"])
        );
    }

    #[test]
    fn midi_extensions() {
        assert!(is_midi(Path::new("a.MID")));
        assert!(is_midi(Path::new("a.midi")));
        assert!(!is_midi(Path::new("a.tsv")));
        assert!(!is_midi(Path::new("a")));
    }
}
