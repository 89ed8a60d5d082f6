//! Framewise multi-label classifier: one linear layer with sigmoid outputs
//! over a context window of feature frames, fit by mini-batch SGD with
//! Nesterov momentum and a step-wise learning-rate schedule.

mod experiment;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{prf, EvalCounts, EvalResult};
use crate::quantize::{FrameGrid, LabelMatrix};
use crate::scalar::{sigmoid, softplus, Scalar};
use crate::synth::FeatureMatrix;

pub use experiment::{
    run_sensitivity_experiment, ExperimentConfig, ExperimentRow, ExperimentTable, FnSummary,
};

/// Windowed examples with binary targets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    inputs: Vec<T>,
    targets: Vec<u8>,
    input_dim: usize,
    num_labels: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn empty(input_dim: usize, num_labels: usize) -> Self {
        Dataset {
            inputs: Vec::new(),
            targets: Vec::new(),
            input_dim,
            num_labels,
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len() / self.num_labels.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn input(&self, i: usize) -> &[T] {
        &self.inputs[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn target(&self, i: usize) -> &[u8] {
        &self.targets[i * self.num_labels..(i + 1) * self.num_labels]
    }

    pub fn append(&mut self, other: &Dataset<T>) -> Result<()> {
        if other.input_dim != self.input_dim || other.num_labels != self.num_labels {
            return Err(Error::contract("cannot append datasets of different shape"));
        }
        self.inputs.extend_from_slice(&other.inputs);
        self.targets.extend_from_slice(&other.targets);
        Ok(())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset<T>>) -> Result<Self> {
        let mut parts = parts.into_iter();
        let first = parts
            .next()
            .ok_or_else(|| Error::contract("nothing to concatenate"))?;
        let mut out = first.clone();
        for p in parts {
            out.append(p)?;
        }
        Ok(out)
    }
}

fn check_context(context: usize) -> Result<()> {
    if context == 0 || context.is_multiple_of(2) {
        return Err(Error::contract(format!(
            "context must be odd, got {context}"
        )));
    }
    Ok(())
}

/// Copies the `context` frames centered on `t` into `out`, zero outside the matrix.
fn fill_window<T: Scalar>(feat: &FeatureMatrix<T>, t: usize, context: usize, out: &mut [T]) {
    let half = context / 2;
    let dim = feat.dim();
    for c in 0..context {
        let dst = &mut out[c * dim..(c + 1) * dim];
        match (t + c).checked_sub(half) {
            Some(src) if src < feat.num_frames() => dst.copy_from_slice(feat.row(src)),
            _ => dst.fill(T::zero()),
        }
    }
}

/// One example per frame: the flattened context window and that frame's label row.
pub fn make_examples<T: Scalar>(
    feat: &FeatureMatrix<T>,
    labels: &LabelMatrix,
    context: usize,
) -> Result<Dataset<T>> {
    check_context(context)?;
    if feat.num_frames() != labels.num_frames() || feat.grid().fps() != labels.grid().fps() {
        return Err(Error::contract(format!(
            "features ({} frames at {} fps) and labels ({} frames at {} fps) disagree",
            feat.num_frames(),
            feat.grid().fps(),
            labels.num_frames(),
            labels.grid().fps()
        )));
    }
    let input_dim = context * feat.dim();
    let mut inputs = vec![T::zero(); feat.num_frames() * input_dim];
    for (t, window) in inputs.chunks_exact_mut(input_dim).enumerate() {
        fill_window(feat, t, context, window);
    }
    Ok(Dataset {
        inputs,
        targets: labels.cells().to_vec(),
        input_dim,
        num_labels: labels.num_labels(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// `(context * feature_dim) x num_labels`, row-major.
    pub weights: Vec<T>,
    pub bias: Vec<T>,
    pub context: usize,
    pub feature_dim: usize,
    pub num_labels: usize,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(context: usize, feature_dim: usize, num_labels: usize) -> Self {
        ModelParams {
            weights: vec![T::zero(); context * feature_dim * num_labels],
            bias: vec![T::zero(); num_labels],
            context,
            feature_dim,
            num_labels,
        }
    }

    /// Gaussian weights with standard deviation `std`, zero bias.
    pub fn init(
        context: usize,
        feature_dim: usize,
        num_labels: usize,
        std: f64,
        seed: u64,
    ) -> Self {
        let mut p = Self::zeros(context, feature_dim, num_labels);
        if std > 0.0 {
            let normal = Normal::new(0.0, std).expect("positive standard deviation");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for w in p.weights.iter_mut() {
                *w = T::from_f64_lossy(normal.sample(&mut rng));
            }
        }
        p
    }

    pub fn input_dim(&self) -> usize {
        self.context * self.feature_dim
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Parameter `i` in weights-then-bias order.
    pub fn get(&self, i: usize) -> T {
        if i < self.weights.len() {
            self.weights[i]
        } else {
            self.bias[i - self.weights.len()]
        }
    }

    pub fn set(&mut self, i: usize, v: T) {
        let n = self.weights.len();
        if i < n {
            self.weights[i] = v;
        } else {
            self.bias[i - n] = v;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    fn logits_into(&self, x: &[T], z: &mut [T]) {
        let k = self.num_labels;
        z.copy_from_slice(&self.bias);
        for (i, &xi) in x.iter().enumerate() {
            let row = &self.weights[i * k..(i + 1) * k];
            for (zk, &w) in z.iter_mut().zip(row) {
                *zk += xi * w;
            }
        }
    }

    fn check_dataset(&self, data: &Dataset<T>) -> Result<()> {
        if data.input_dim != self.input_dim() || data.num_labels != self.num_labels {
            return Err(Error::contract(format!(
                "dataset shape {}→{} does not fit model {}→{}",
                data.input_dim,
                data.num_labels,
                self.input_dim(),
                self.num_labels
            )));
        }
        Ok(())
    }
}

/// Mean binary cross-entropy over the chosen examples and all labels, and its
/// gradient laid out like [`ModelParams`].
pub fn loss_and_gradient<T: Scalar>(
    params: &ModelParams<T>,
    data: &Dataset<T>,
    indices: &[usize],
) -> Result<(T, ModelParams<T>)> {
    params.check_dataset(data)?;
    let k = params.num_labels;
    let mut grad = ModelParams::zeros(params.context, params.feature_dim, k);
    if indices.is_empty() {
        return Ok((T::zero(), grad));
    }
    let scale = T::one() / T::from_count((indices.len() * k) as u64);
    let mut z = vec![T::zero(); k];
    let mut delta = vec![T::zero(); k];
    let mut total = T::zero();
    for &n in indices {
        let x = data.input(n);
        let y = data.target(n);
        params.logits_into(x, &mut z);
        for j in 0..k {
            let yj = if y[j] != 0 { T::one() } else { T::zero() };
            total += softplus(z[j]) - yj * z[j];
            delta[j] = (sigmoid(z[j]) - yj) * scale;
            grad.bias[j] += delta[j];
        }
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut grad.weights[i * k..(i + 1) * k];
            for (g, &d) in row.iter_mut().zip(&delta) {
                *g += xi * d;
            }
        }
    }
    Ok((total * scale, grad))
}

/// Mean binary cross-entropy over the whole dataset.
pub fn dataset_loss<T: Scalar>(params: &ModelParams<T>, data: &Dataset<T>) -> Result<T> {
    params.check_dataset(data)?;
    let k = params.num_labels;
    if data.is_empty() {
        return Ok(T::zero());
    }
    let mut z = vec![T::zero(); k];
    let mut total = T::zero();
    for n in 0..data.len() {
        params.logits_into(data.input(n), &mut z);
        for (zj, &yj) in z.iter().zip(data.target(n)) {
            total += softplus(*zj) - if yj != 0 { *zj } else { T::zero() };
        }
    }
    Ok(total / T::from_count((data.len() * k) as u64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Nesterov momentum coefficient.
    pub momentum: f64,
    /// `(epoch, multiplier)`: at the start of that 0-based epoch the learning
    /// rate is multiplied. `None` halves it at 60% and 85% of the epochs.
    pub lr_schedule: Option<Vec<(usize, f64)>>,
    pub epochs: usize,
    /// Frames per input window; odd.
    pub context: usize,
    pub threshold: f64,
    pub init_std: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 8,
            learning_rate: 0.1,
            momentum: 0.9,
            lr_schedule: None,
            epochs: 10,
            context: 5,
            threshold: 0.5,
            init_std: 0.01,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn check(&self) -> Result<()> {
        check_context(self.context)?;
        if self.batch_size == 0 {
            return Err(Error::contract("batch_size must be at least 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::contract(format!(
                "threshold {} outside (0, 1)",
                self.threshold
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::contract(format!(
                "invalid learning rate {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::contract(format!(
                "momentum {} outside [0, 1)",
                self.momentum
            )));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Vec<(usize, f64)> {
        match &self.lr_schedule {
            Some(s) => s.clone(),
            None => {
                let e = self.epochs as f64;
                vec![
                    ((0.6 * e).round() as usize, 0.5),
                    ((0.85 * e).round() as usize, 0.5),
                ]
            }
        }
    }

    /// Learning rate in effect during `epoch`.
    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.schedule()
            .iter()
            .filter(|(at, _)| *at <= epoch)
            .fold(self.learning_rate, |lr, (_, m)| lr * m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainHistory<T> {
    pub train_loss: Vec<T>,
    pub valid_loss: Vec<T>,
    pub learning_rate: Vec<f64>,
    /// Framewise scores of the final model on the training set at the configured threshold.
    pub final_train: EvalResult<f64>,
}

pub fn train<T: Scalar>(
    train_set: &Dataset<T>,
    valid_set: &Dataset<T>,
    cfg: &TrainConfig,
) -> Result<(ModelParams<T>, TrainHistory<T>)> {
    cfg.check()?;
    if train_set.is_empty() || valid_set.is_empty() {
        return Err(Error::contract(
            "training and validation sets must be non-empty",
        ));
    }
    if !train_set.input_dim.is_multiple_of(cfg.context) {
        return Err(Error::contract(format!(
            "input width {} is not a multiple of context {}",
            train_set.input_dim, cfg.context
        )));
    }
    let feature_dim = train_set.input_dim / cfg.context;
    let k = train_set.num_labels;
    let mut params = ModelParams::<T>::init(cfg.context, feature_dim, k, cfg.init_std, cfg.seed);
    params.check_dataset(valid_set)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let momentum = T::from_f64_lossy(cfg.momentum);
    let mut velocity = ModelParams::<T>::zeros(cfg.context, feature_dim, k);
    let mut lookahead = params.clone();
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut history = TrainHistory {
        train_loss: Vec::with_capacity(cfg.epochs),
        valid_loss: Vec::with_capacity(cfg.epochs),
        learning_rate: Vec::with_capacity(cfg.epochs),
        final_train: prf(EvalCounts::default()),
    };

    for epoch in 0..cfg.epochs {
        let lr_f64 = cfg.learning_rate_at(epoch);
        let lr = T::from_f64_lossy(lr_f64);
        order.shuffle(&mut rng);
        for (batch, idx) in order.chunks(cfg.batch_size).enumerate() {
            for ((la, &p), &v) in lookahead
                .weights
                .iter_mut()
                .chain(lookahead.bias.iter_mut())
                .zip(params.weights.iter().chain(&params.bias))
                .zip(velocity.weights.iter().chain(&velocity.bias))
            {
                *la = p + momentum * v;
            }
            let (loss, grad) = loss_and_gradient(&lookahead, train_set, idx)?;
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch,
                    context: None,
                });
            }
            for ((p, v), &g) in params
                .weights
                .iter_mut()
                .chain(params.bias.iter_mut())
                .zip(velocity.weights.iter_mut().chain(velocity.bias.iter_mut()))
                .zip(grad.weights.iter().chain(&grad.bias))
            {
                *v = momentum * *v - lr * g;
                *p += *v;
            }
        }
        let train_loss = dataset_loss(&params, train_set)?;
        let valid_loss = dataset_loss(&params, valid_set)?;
        if !train_loss.is_finite() || !valid_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                batch: order.len().div_ceil(cfg.batch_size),
                context: None,
            });
        }
        history.train_loss.push(train_loss);
        history.valid_loss.push(valid_loss);
        history.learning_rate.push(lr_f64);
    }

    history.final_train = prf(evaluate_dataset(&params, train_set, cfg.threshold)?);
    Ok((params, history))
}

/// Thresholded predictions on every example of `data` scored against its targets.
pub fn evaluate_dataset<T: Scalar>(
    params: &ModelParams<T>,
    data: &Dataset<T>,
    threshold: f64,
) -> Result<EvalCounts> {
    params.check_dataset(data)?;
    let threshold = T::from_f64_lossy(threshold);
    let mut z = vec![T::zero(); params.num_labels];
    let mut c = EvalCounts::default();
    for n in 0..data.len() {
        params.logits_into(data.input(n), &mut z);
        for (zj, &yj) in z.iter().zip(data.target(n)) {
            match (sigmoid(*zj) >= threshold, yj != 0) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => {}
            }
        }
    }
    Ok(c)
}

/// Label `k` is on at frame `t` when `sigmoid(window_t · W_k + b_k) >= threshold`.
pub fn predict<T: Scalar>(
    params: &ModelParams<T>,
    feat: &FeatureMatrix<T>,
    threshold: f64,
) -> Result<LabelMatrix> {
    if feat.dim() != params.feature_dim {
        return Err(Error::contract(format!(
            "features have {} bins, model expects {}",
            feat.dim(),
            params.feature_dim
        )));
    }
    let grid: FrameGrid = *feat.grid();
    let threshold = T::from_f64_lossy(threshold);
    let mut out = LabelMatrix::zeros(grid, params.num_labels);
    let mut window = vec![T::zero(); params.input_dim()];
    let mut z = vec![T::zero(); params.num_labels];
    for t in 0..grid.num_frames() {
        fill_window(feat, t, params.context, &mut window);
        params.logits_into(&window, &mut z);
        for (k, &zk) in z.iter().enumerate() {
            if sigmoid(zk) >= threshold {
                out.set(t, k, true);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::framewise_counts;

    fn features(rows: &[&[f64]], fps: f64) -> FeatureMatrix<f64> {
        let grid = FrameGrid::new(fps, rows.len()).unwrap();
        FeatureMatrix::from_vec(grid, rows[0].len(), rows.concat()).unwrap()
    }

    fn labels(rows: &[&[u8]], fps: f64) -> LabelMatrix {
        LabelMatrix::from_rows(
            FrameGrid::new(fps, rows.len()).unwrap(),
            rows[0].len(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn single_frame_is_mostly_padding() {
        let f = features(&[&[1.0, 2.0]], 10.0);
        let d = make_examples(&f, &labels(&[&[1]], 10.0), 5).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(
            d.input(0),
            &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(d.target(0), &[1]);
    }

    #[test]
    fn unit_context_reproduces_feature_rows() {
        let rows: Vec<Vec<f64>> = (0..10).map(|t| vec![t as f64, -(t as f64)]).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let f = features(&refs, 100.0);
        let l = LabelMatrix::zeros(*f.grid(), 3);
        let d = make_examples(&f, &l, 1).unwrap();
        for t in 0..10 {
            assert_eq!(d.input(t), f.row(t));
        }
    }

    #[test]
    fn constant_interior_window_repeats_the_row() {
        let row = [0.5, 1.5, 2.5];
        let f = features(&[&row[..]; 9], 100.0);
        let d = make_examples(&f, &LabelMatrix::zeros(*f.grid(), 1), 5).unwrap();
        assert_eq!(d.input(4), row.repeat(5).as_slice());
    }

    #[test]
    fn make_examples_checks_shapes() {
        let f = features(&[&[1.0], &[2.0]], 10.0);
        assert!(make_examples(&f, &labels(&[&[1]], 10.0), 1).is_err());
        assert!(make_examples(&f, &labels(&[&[1], &[0]], 20.0), 1).is_err());
        assert!(make_examples(&f, &labels(&[&[1], &[0]], 10.0), 4).is_err());
    }

    #[test]
    fn zero_model_predicts_everything_at_threshold_half() {
        let f = features(&[&[1.0, -3.0], &[0.0, 2.0]], 10.0);
        let p = ModelParams::<f64>::zeros(3, 2, 4);
        let m = predict(&p, &f, 0.5).unwrap();
        assert_eq!(m.count_active(), 8);
    }

    #[test]
    fn large_negative_bias_predicts_nothing() {
        let f = features(&[&[1.0, -3.0], &[0.0, 2.0]], 10.0);
        let mut p = ModelParams::<f64>::zeros(3, 2, 4);
        p.bias.fill(-50.0);
        assert_eq!(predict(&p, &f, 0.5).unwrap().count_active(), 0);
    }

    /// Two clusters on one label: y = 1 iff x0 > x1.
    fn toy() -> (FeatureMatrix<f64>, LabelMatrix) {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|t| {
                let s = (t % 7) as f64 * 0.1;
                if t % 2 == 0 {
                    vec![1.0 + s, 0.0]
                } else {
                    vec![0.0, 1.0 + s]
                }
            })
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let f = features(&refs, 10.0);
        let l_rows: Vec<[u8; 1]> = (0..40).map(|t| [(t % 2 == 0) as u8]).collect();
        let l = LabelMatrix::from_rows(*f.grid(), 1, &l_rows).unwrap();
        (f, l)
    }

    #[test]
    fn zero_epochs_return_initialization() {
        let (f, l) = toy();
        let d = make_examples(&f, &l, 1).unwrap();
        let cfg = TrainConfig {
            epochs: 0,
            context: 1,
            seed: 9,
            ..TrainConfig::default()
        };
        let (p, h) = train(&d, &d, &cfg).unwrap();
        assert_eq!(p, ModelParams::init(1, 2, 1, 0.01, 9));
        assert!(h.train_loss.is_empty());
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let (f, l) = toy();
        let d = make_examples(&f, &l, 1).unwrap();
        let cfg = TrainConfig {
            epochs: 30,
            context: 1,
            learning_rate: 0.5,
            ..TrainConfig::default()
        };
        let (p, h) = train(&d, &d, &cfg).unwrap();
        assert_eq!(h.final_train.fmeasure, 1.0);
        // The separating direction is (1, -1): the learned weights must point that way.
        assert!(p.weights[0] > 0.0 && p.weights[1] < 0.0);
        let pred = predict(&p, &f, 0.5).unwrap();
        assert_eq!(pred, l);
    }

    #[test]
    fn prediction_agrees_with_reported_training_score() {
        let (f, l) = toy();
        let d = make_examples(&f, &l, 3).unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            context: 3,
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let (p, h) = train(&d, &d, &cfg).unwrap();
        let c = framewise_counts(&predict(&p, &f, cfg.threshold).unwrap(), &l).unwrap();
        assert_eq!(c, h.final_train.counts);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (f, l) = toy();
        let d = make_examples(&f, &l, 3).unwrap();
        let mut p = ModelParams::<f64>::init(3, 2, 1, 0.5, 3);
        p.bias[0] = 0.3;
        let idx: Vec<usize> = (0..d.len()).collect();
        let (_, g) = loss_and_gradient(&p, &d, &idx).unwrap();
        let h = 1e-4;
        for i in 0..p.num_params() {
            let mut plus = p.clone();
            plus.set(i, p.get(i) + h);
            let mut minus = p.clone();
            minus.set(i, p.get(i) - h);
            let fd = (loss_and_gradient(&plus, &d, &idx).unwrap().0
                - loss_and_gradient(&minus, &d, &idx).unwrap().0)
                / (2.0 * h);
            let rel = (fd - g.get(i)).abs() / fd.abs().max(g.get(i).abs()).max(1e-12);
            assert!(
                rel <= 1e-5,
                "param {i}: analytic {} vs numeric {fd}",
                g.get(i)
            );
        }
    }

    #[test]
    fn divergence_is_reported_with_position() {
        let (f, l) = toy();
        let mut big = f.values().to_vec();
        big[0] = 1e300;
        let f = FeatureMatrix::from_vec(*f.grid(), 2, big).unwrap();
        let d = make_examples(&f, &l, 1).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            context: 1,
            learning_rate: 1e10,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&d, &d, &cfg), Err(Error::Divergence { .. })));
    }

    #[test]
    fn default_schedule_halves_twice() {
        let cfg = TrainConfig {
            epochs: 20,
            learning_rate: 1.0,
            ..TrainConfig::default()
        };
        assert_eq!(cfg.schedule(), vec![(12, 0.5), (17, 0.5)]);
        assert_eq!(cfg.learning_rate_at(11), 1.0);
        assert_eq!(cfg.learning_rate_at(12), 0.5);
        assert_eq!(cfg.learning_rate_at(19), 0.25);
    }

    #[test]
    fn invalid_train_configs() {
        for cfg in [
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                context: 4,
                ..TrainConfig::default()
            },
            TrainConfig {
                threshold: 1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                momentum: 1.0,
                ..TrainConfig::default()
            },
        ] {
            assert!(cfg.check().is_err());
        }
    }
}
