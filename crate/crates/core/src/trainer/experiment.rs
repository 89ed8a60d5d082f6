//! Labeling-function sensitivity experiment on a synthetic corpus.
//!
//! For each seed a corpus is generated and split by piece into
//! train/validation/test. Each labeling function then supplies the training
//! targets for an otherwise identical run (same corpus, features, split and
//! initialization). Test predictions are resampled to the reference frame
//! rate, cut to the evaluation window, and scored against kind-A labels.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{make_examples, predict, train, Dataset, TrainConfig};
use crate::annotation::Annotation;
use crate::error::{Error, Result};
use crate::metrics::{prf, EvalCounts, EvalProtocol, EvalResult};
use crate::quantize::{rasterize, FrameGrid, LabelingFunction};
use crate::scalar::Scalar;
use crate::synth::{generate_corpus, render_features_seeded, FeatureMatrix, SynthConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub synth: SynthConfig,
    pub train: TrainConfig,
    /// Frame rate of training features and labels.
    pub train_fps: f64,
    pub eval: EvalProtocol,
    pub train_fraction: f64,
    pub valid_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            synth: SynthConfig::default(),
            train: TrainConfig::default(),
            train_fps: FrameGrid::FPS_LOW,
            eval: EvalProtocol::default(),
            train_fraction: 0.6,
            valid_fraction: 0.2,
        }
    }
}

impl ExperimentConfig {
    /// Piece counts `(train, valid, test)`.
    pub fn split_sizes(&self) -> Result<(usize, usize, usize)> {
        let n = self.synth.num_pieces;
        let n_train = (n as f64 * self.train_fraction).round() as usize;
        let n_valid = (n as f64 * self.valid_fraction).round() as usize;
        if n_train == 0 || n_valid == 0 || n_train + n_valid >= n {
            return Err(Error::contract(format!(
                "{n} pieces cannot be split {}/{} with a non-empty test set",
                self.train_fraction, self.valid_fraction
            )));
        }
        Ok((n_train, n_valid, n - n_train - n_valid))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    #[serde(rename = "fn")]
    pub function: LabelingFunction,
    pub seed: u64,
    pub split: String,
    pub result: EvalResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FnSummary {
    pub mean_f: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub per_seed_f: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
    pub summary: BTreeMap<LabelingFunction, FnSummary>,
}

impl ExperimentTable {
    pub fn mean_f(&self, function: LabelingFunction) -> Option<f64> {
        self.summary.get(&function).map(|s| s.mean_f)
    }
}

struct Piece<T> {
    annotation: Annotation,
    features: FeatureMatrix<T>,
    label_seed: u64,
}

struct Corpus<T> {
    train: Vec<Piece<T>>,
    valid: Vec<Piece<T>>,
    test: Vec<Piece<T>>,
}

fn prepare<T: Scalar>(cfg: &ExperimentConfig, seed: u64) -> Result<Corpus<T>> {
    let synth = SynthConfig {
        seed,
        ..cfg.synth.clone()
    };
    let (n_train, n_valid, _) = cfg.split_sizes()?;
    let mut pieces = generate_corpus(&synth)?
        .into_iter()
        .enumerate()
        .map(|(i, annotation)| {
            let grid = FrameGrid::covering(cfg.train_fps, annotation.duration_sec())?;
            let piece_seed = synth.piece_seed(i);
            let features = render_features_seeded(&annotation, grid, &synth, synth.noise_seed(i))?;
            Ok(Piece {
                annotation,
                features,
                label_seed: piece_seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let test = pieces.split_off(n_train + n_valid);
    let valid = pieces.split_off(n_train);
    Ok(Corpus {
        train: pieces,
        valid,
        test,
    })
}

fn labeled_examples<T: Scalar>(
    pieces: &[Piece<T>],
    function: LabelingFunction,
    context: usize,
) -> Result<Dataset<T>> {
    let parts = pieces
        .iter()
        .map(|p| {
            let labels = rasterize(&p.annotation, *p.features.grid(), function, p.label_seed)?;
            make_examples(&p.features, &labels, context)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::concat(&parts)
}

fn run_cell<T: Scalar>(
    cfg: &ExperimentConfig,
    corpus: &Corpus<T>,
    function: LabelingFunction,
    seed: u64,
) -> Result<EvalResult<f64>> {
    let train_cfg = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let train_set = labeled_examples(&corpus.train, function, train_cfg.context)?;
    let valid_set = labeled_examples(&corpus.valid, function, train_cfg.context)?;
    let (params, _) = train(&train_set, &valid_set, &train_cfg)
        .map_err(|e| e.with_context(format!("fn {function}, seed {seed}")))?;

    let mut counts = EvalCounts::default();
    for piece in &corpus.test {
        let pred = predict(&params, &piece.features, train_cfg.threshold)?;
        counts += cfg.eval.counts(&pred, &piece.annotation)?;
    }
    Ok(prf(counts))
}

/// Runs every `(function, seed)` cell. Rows come out function-major in the
/// order given; cells run in parallel and do not share state.
pub fn run_sensitivity_experiment<T: Scalar>(
    cfg: &ExperimentConfig,
    functions: &[LabelingFunction],
    seeds: &[u64],
) -> Result<ExperimentTable> {
    if functions.is_empty() || seeds.is_empty() {
        return Err(Error::contract(
            "need at least one labeling function and one seed",
        ));
    }
    cfg.train.check()?;
    cfg.split_sizes()?;

    let corpora = seeds
        .par_iter()
        .map(|&seed| prepare::<T>(cfg, seed))
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(LabelingFunction, usize)> = functions
        .iter()
        .flat_map(|&f| (0..seeds.len()).map(move |s| (f, s)))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(f, s)| run_cell(cfg, &corpora[s], f, seeds[s]))
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<ExperimentRow> = cells
        .iter()
        .zip(results)
        .map(|(&(function, s), result)| ExperimentRow {
            function,
            seed: seeds[s],
            split: "test".to_string(),
            result,
        })
        .collect();

    let mut summary = BTreeMap::new();
    for &function in functions {
        if summary.contains_key(&function) {
            continue;
        }
        let mine: Vec<&EvalResult<f64>> = rows
            .iter()
            .filter(|r| r.function == function)
            .map(|r| &r.result)
            .take(seeds.len())
            .collect();
        let n = mine.len() as f64;
        summary.insert(
            function,
            FnSummary {
                mean_f: mine.iter().map(|r| r.fmeasure).sum::<f64>() / n,
                mean_precision: mine.iter().map(|r| r.precision).sum::<f64>() / n,
                mean_recall: mine.iter().map(|r| r.recall).sum::<f64>() / n,
                per_seed_f: mine.iter().map(|r| r.fmeasure).collect(),
            },
        );
    }
    Ok(ExperimentTable { rows, summary })
}
