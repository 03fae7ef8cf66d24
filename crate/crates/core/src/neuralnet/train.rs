use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::LossReport;
use super::model::{Batch, DropoutMask, Model};
use super::tensor::Tensor;
use crate::dataset::WindowSample;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub dropout_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub min_delta: f64,
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            learning_rate: 0.01,
            dropout_rate: 0.3,
            batch_size: 4096,
            max_epochs: 50,
            plateau_patience: 3,
            plateau_factor: 0.5,
            min_delta: 1e-4,
            early_stop_patience: 5,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail("dropout_rate must lie in [0, 1)");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be at least 1");
        }
        if !(self.plateau_factor > 0.0 && self.plateau_factor <= 1.0) {
            return fail("plateau_factor must lie in (0, 1]");
        }
        if self.min_delta.is_nan() || self.min_delta < 0.0 {
            return fail("min_delta must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Rate used during this epoch.
    pub learning_rate: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainingHistory {
    pub fn best_val_loss(&self) -> Option<f64> {
        self.epochs.iter().find(|e| e.epoch == self.best_epoch).map(|e| e.val_loss)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "epoch,train_loss,val_loss,learning_rate")?;
        for e in &self.epochs {
            writeln!(out, "{},{},{},{}", e.epoch, e.train_loss, e.val_loss, e.learning_rate)?;
        }
        Ok(())
    }
}

/// Samples packed into contiguous buffers for fast batch assembly.
struct SampleMatrix {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    input_row: usize,
    target_row: usize,
    window: usize,
}

impl SampleMatrix {
    fn new(model: &Model, samples: &[WindowSample]) -> Result<Self> {
        let spec = model.spec();
        let window = spec.window_size;
        let input_row = window * spec.input_width;
        let target_row = spec.output_width();
        let mut inputs = Vec::with_capacity(samples.len() * input_row);
        let mut targets = Vec::with_capacity(samples.len() * target_row);
        for s in samples {
            if s.inputs.len() != window || s.target.len() != target_row {
                return Err(Error::Shape {
                    op: "training sample",
                    left: vec![window, target_row],
                    right: vec![s.inputs.len(), s.target.len()],
                });
            }
            inputs.extend(s.inputs.iter().flatten());
            targets.extend(&s.target);
        }
        Ok(SampleMatrix {
            inputs,
            targets,
            input_row,
            target_row,
            window,
        })
    }

    fn len(&self) -> usize {
        self.targets.len() / self.target_row
    }

    fn batch(&self, indices: &[usize]) -> Batch {
        let mut inputs = Vec::with_capacity(indices.len() * self.input_row);
        let mut targets = Vec::with_capacity(indices.len() * self.target_row);
        for &i in indices {
            inputs.extend_from_slice(&self.inputs[i * self.input_row..(i + 1) * self.input_row]);
            targets.extend_from_slice(&self.targets[i * self.target_row..(i + 1) * self.target_row]);
        }
        let b = indices.len();
        Batch {
            inputs: Tensor::new(vec![b, self.window, self.input_row / self.window], inputs)
                .expect("batch buffer matches its shape"),
            targets: Tensor::new(vec![b, self.target_row], targets).expect("batch buffer matches its shape"),
        }
    }

    fn loss(&self, model: &Model) -> Result<LossReport> {
        let order: Vec<usize> = (0..self.len()).collect();
        let mut reports = Vec::new();
        for chunk in order.chunks(EVAL_CHUNK) {
            let batch = self.batch(chunk);
            let pred = model.forward(&batch.inputs)?;
            reports.push(LossReport::from_predictions(&pred, &batch.targets)?);
        }
        LossReport::merge(&reports).ok_or(Error::EmptyInput("samples"))
    }
}

const EVAL_CHUNK: usize = 2048;

/// Codec-space loss of `model` on `samples` with dropout disabled.
pub fn evaluate_loss(model: &Model, samples: &[WindowSample]) -> Result<LossReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("samples"));
    }
    SampleMatrix::new(model, samples)?.loss(model)
}

/// Mini-batch SGD with plateau learning-rate reduction and early stopping.
/// Returns the parameters from the epoch with the lowest validation loss.
pub fn train(
    model: Model,
    train_set: &[WindowSample],
    validation: &[WindowSample],
    config: &TrainingConfig,
) -> Result<(Model, TrainingHistory)> {
    train_with_progress(model, train_set, validation, config, |_| {})
}

pub fn train_with_progress(
    mut model: Model,
    train_set: &[WindowSample],
    validation: &[WindowSample],
    config: &TrainingConfig,
    mut progress: impl FnMut(&EpochRecord),
) -> Result<(Model, TrainingHistory)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyInput("training set"));
    }
    if validation.is_empty() {
        return Err(Error::EmptyInput("validation set"));
    }
    let train_data = SampleMatrix::new(&model, train_set)?;
    let val_data = SampleMatrix::new(&model, validation)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    let mut lr = config.learning_rate;
    let mut history = TrainingHistory::default();
    let mut best: Option<(f64, Model)> = None;
    let mut reference = f64::INFINITY;
    let mut since_improvement = 0;
    let mut since_reduction = 0;

    for epoch in 1..=config.max_epochs {
        let diverged = |e: Error| match e {
            Error::Divergence { .. } | Error::NonFinite(_) => Error::Divergence { epoch: Some(epoch) },
            other => other,
        };
        order.shuffle(&mut rng);
        let mut batch_reports = Vec::new();
        for chunk in order.chunks(config.batch_size) {
            let batch = train_data.batch(chunk);
            let mask = (config.dropout_rate > 0.0)
                .then(|| DropoutMask::sample(&model, chunk.len(), config.dropout_rate, &mut rng));
            let (report, grads) = model.loss_and_gradients(&batch, mask.as_ref()).map_err(diverged)?;
            model.apply_gradients(&grads, lr)?;
            batch_reports.push(report);
        }
        let train_loss = LossReport::merge(&batch_reports).map_or(f64::NAN, |r| r.mse);
        let val_loss = val_data.loss(&model).map_err(diverged)?.mse;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Divergence { epoch: Some(epoch) });
        }

        let record = EpochRecord {
            epoch,
            train_loss,
            val_loss,
            learning_rate: lr,
        };
        progress(&record);
        history.epochs.push(record);

        if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
            best = Some((val_loss, model.clone()));
            history.best_epoch = epoch;
        }
        if val_loss < reference - config.min_delta {
            reference = val_loss;
            since_improvement = 0;
            since_reduction = 0;
        } else {
            since_improvement += 1;
            since_reduction += 1;
            if since_improvement >= config.early_stop_patience {
                history.stopped_early = epoch < config.max_epochs;
                break;
            }
            if since_reduction >= config.plateau_patience {
                lr *= config.plateau_factor;
                since_reduction = 0;
            }
        }
    }

    let (_, best_model) = best.expect("at least one epoch runs");
    Ok((best_model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{encode_angle, CenterResidue};
    use crate::dataset::TargetMode;
    use crate::neuralnet::{Architecture, ModelSpec};

    fn sample(letter_pos: usize, angle: f64, window: usize) -> WindowSample {
        let mut row = [0.0; 21];
        row[letter_pos] = 1.0;
        let (s, c) = encode_angle(Some(angle)).unwrap();
        WindowSample {
            inputs: vec![row; window],
            target: vec![s, c],
            angles: vec![angle],
            center: CenterResidue {
                pdb_id: "SYN".into(),
                chain_id: 'A',
                residue_seq: letter_pos as i32,
            },
        }
    }

    fn model(arch: Architecture, window: usize) -> Model {
        let spec = ModelSpec::new(arch, window, TargetMode::Phi).with_hidden_width(16);
        Model::new(spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(TrainingConfig::default().validate().is_ok());
        for bad in [
            TrainingConfig { learning_rate: 0.0, ..Default::default() },
            TrainingConfig { dropout_rate: 1.0, ..Default::default() },
            TrainingConfig { batch_size: 0, ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))));
        }
        let parsed: TrainingConfig = toml::from_str("batch_size = 32\nmax_epochs = 5").unwrap();
        assert_eq!(parsed.batch_size, 32);
        assert_eq!(parsed.learning_rate, 0.01);
    }

    #[test]
    fn memorizes_single_sample() {
        let data = vec![sample(3, 120.0, 3)];
        let config = TrainingConfig {
            learning_rate: 0.1,
            dropout_rate: 0.0,
            batch_size: 1,
            max_epochs: 400,
            early_stop_patience: 400,
            plateau_patience: 400,
            ..Default::default()
        };
        let (m, history) = train(model(Architecture::Dnn1, 3), &data, &data, &config).unwrap();
        assert!(history.epochs.last().unwrap().train_loss < 1e-3);
        assert!(evaluate_loss(&m, &data).unwrap().mse < 1e-3);
    }

    #[test]
    fn identical_runs_identical_histories() {
        let data: Vec<_> = (0..20).map(|i| sample(i % 5, (i % 5) as f64 * 60.0 - 120.0, 3)).collect();
        let config = TrainingConfig { batch_size: 4, max_epochs: 4, ..Default::default() };
        let a = train(model(Architecture::Lstm1, 3), &data, &data, &config).unwrap();
        let b = train(model(Architecture::Lstm1, 3), &data, &data, &config).unwrap();
        assert_eq!(a.1, b.1);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.epochs.len(), 4);
    }

    #[test]
    fn class_token_task_beats_zero_baseline() {
        let angles = [-150.0, -60.0, 30.0, 100.0];
        let data: Vec<_> = (0..80).map(|i| sample(i % 4, angles[i % 4], 3)).collect();
        // Predicting zero costs mean(sin² + cos²) / 2 = 0.5.
        let baseline = 0.5;
        let config = TrainingConfig {
            learning_rate: 0.05,
            batch_size: 8,
            max_epochs: 60,
            early_stop_patience: 60,
            ..Default::default()
        };
        let (_, history) = train(model(Architecture::Dnn1, 3), &data, &data, &config).unwrap();
        assert!(history.best_val_loss().unwrap() < baseline * 0.5, "{history:?}");
    }

    #[test]
    fn early_stop_and_plateau() {
        let data = vec![sample(0, 10.0, 3), sample(1, 20.0, 3)];
        // A tiny learning rate leaves validation loss flat.
        let config = TrainingConfig {
            learning_rate: 1e-12,
            batch_size: 2,
            max_epochs: 50,
            plateau_patience: 2,
            early_stop_patience: 4,
            ..Default::default()
        };
        let (_, h) = train(model(Architecture::Dnn1, 3), &data, &data, &config).unwrap();
        assert_eq!(h.epochs.len(), 5);
        assert!(h.stopped_early);
        let rates: Vec<f64> = h.epochs.iter().map(|e| e.learning_rate).collect();
        assert_eq!(rates, vec![1e-12, 1e-12, 1e-12, 5e-13, 5e-13]);
    }

    #[test]
    fn empty_sets_rejected() {
        let data = vec![sample(0, 10.0, 3)];
        let m = model(Architecture::Dnn1, 3);
        assert!(matches!(
            train(m.clone(), &[], &data, &TrainingConfig::default()),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            train(m, &data, &[], &TrainingConfig::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn divergence_reports_epoch() {
        let data: Vec<_> = (0..8).map(|i| sample(i % 4, 90.0, 3)).collect();
        let config = TrainingConfig { learning_rate: 1e300, batch_size: 2, ..Default::default() };
        match train(model(Architecture::Dnn1, 3), &data, &data, &config) {
            Err(Error::Divergence { epoch: Some(e) }) => assert!(e >= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn history_csv() {
        let h = TrainingHistory {
            epochs: vec![EpochRecord { epoch: 1, train_loss: 0.5, val_loss: 0.25, learning_rate: 0.01 }],
            best_epoch: 1,
            stopped_early: false,
        };
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "epoch,train_loss,val_loss,learning_rate\n1,0.5,0.25,0.01\n"
        );
    }
}
