use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::{Activation, Dense};
use super::lstm::{LstmParams, LstmTrace};
use super::loss::LossReport;
use super::tensor::Tensor;
use crate::dataset::{decode_angle, TargetMode, WindowSample};
use crate::encoding::ALPHABET_LEN;
use crate::{Error, Result};

/// The seven network layouts compared in the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "DNN1")]
    Dnn1,
    #[serde(rename = "DNN2")]
    Dnn2,
    #[serde(rename = "LSTM1")]
    Lstm1,
    #[serde(rename = "LSTM2")]
    Lstm2,
    #[serde(rename = "LSTM3")]
    Lstm3,
    #[serde(rename = "LSTM4")]
    Lstm4,
    #[serde(rename = "LSTM5")]
    Lstm5,
}

impl Architecture {
    pub const ALL: [Architecture; 7] = [
        Architecture::Dnn1,
        Architecture::Dnn2,
        Architecture::Lstm1,
        Architecture::Lstm2,
        Architecture::Lstm3,
        Architecture::Lstm4,
        Architecture::Lstm5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Dnn1 => "DNN1",
            Architecture::Dnn2 => "DNN2",
            Architecture::Lstm1 => "LSTM1",
            Architecture::Lstm2 => "LSTM2",
            Architecture::Lstm3 => "LSTM3",
            Architecture::Lstm4 => "LSTM4",
            Architecture::Lstm5 => "LSTM5",
        }
    }

    /// `(hidden dense layers, stacked LSTM layers)`. The tanh output layer
    /// comes on top of the hidden dense layers in every layout.
    pub fn layer_counts(self) -> (usize, usize) {
        match self {
            Architecture::Dnn1 => (3, 0),
            Architecture::Dnn2 => (6, 0),
            Architecture::Lstm1 => (2, 1),
            Architecture::Lstm2 => (2, 2),
            Architecture::Lstm3 => (2, 4),
            Architecture::Lstm4 => (2, 8),
            Architecture::Lstm5 => (2, 64),
        }
    }

    pub fn is_recurrent(self) -> bool {
        self.layer_counts().1 > 0
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| !c.is_whitespace() && *c != '_' && *c != '-').collect();
        Architecture::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(&key))
            .ok_or_else(|| Error::Config(format!("unknown model architecture {s:?}")))
    }
}

pub const DEFAULT_HIDDEN_WIDTH: usize = 32;

/// Architecture plus the sizes needed to instantiate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub arch: Architecture,
    /// Hidden dense layers before the output layer.
    pub dense_layers: usize,
    pub lstm_layers: usize,
    pub hidden_width: usize,
    pub window_size: usize,
    pub input_width: usize,
    pub target_mode: TargetMode,
}

impl ModelSpec {
    pub fn new(arch: Architecture, window_size: usize, target_mode: TargetMode) -> Self {
        let (dense_layers, lstm_layers) = arch.layer_counts();
        ModelSpec {
            arch,
            dense_layers,
            lstm_layers,
            hidden_width: DEFAULT_HIDDEN_WIDTH,
            window_size,
            input_width: ALPHABET_LEN,
            target_mode,
        }
    }

    pub fn with_hidden_width(mut self, width: usize) -> Self {
        self.hidden_width = width;
        self
    }

    pub fn output_width(&self) -> usize {
        self.target_mode.output_width()
    }

    pub fn validate(&self) -> Result<()> {
        if (self.dense_layers, self.lstm_layers) != self.arch.layer_counts() {
            return Err(Error::Config(format!(
                "{} expects {:?} (dense, lstm) layers, spec has ({}, {})",
                self.arch,
                self.arch.layer_counts(),
                self.dense_layers,
                self.lstm_layers
            )));
        }
        if self.hidden_width == 0 || self.window_size == 0 || self.input_width == 0 {
            return Err(Error::Config("model widths must be positive".into()));
        }
        Ok(())
    }
}

/// Inverted-dropout scale factors (0 or 1/(1−p)) for the activations that
/// feed each dense layer after the first.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMask {
    masks: Vec<Vec<f64>>,
}

impl DropoutMask {
    pub fn sample<R: Rng + ?Sized>(model: &Model, batch: usize, rate: f64, rng: &mut R) -> Self {
        let keep = 1.0 - rate;
        let masks = model.dense[..model.dense.len() - 1]
            .iter()
            .map(|layer| {
                (0..batch * layer.fan_out())
                    .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect()
            })
            .collect();
        DropoutMask { masks }
    }

    pub fn layers(&self) -> &[Vec<f64>] {
        &self.masks
    }
}

/// Network inputs `(B, window, width)` with targets `(B, outputs)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Tensor,
    pub targets: Tensor,
}

impl Batch {
    pub fn from_samples(samples: &[WindowSample]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyInput("batch"))?;
        let (w, k) = (first.inputs.len(), first.target.len());
        let mut inputs = Vec::with_capacity(samples.len() * w * ALPHABET_LEN);
        let mut targets = Vec::with_capacity(samples.len() * k);
        for s in samples {
            if s.inputs.len() != w || s.target.len() != k {
                return Err(Error::Shape {
                    op: "batch",
                    left: vec![w, k],
                    right: vec![s.inputs.len(), s.target.len()],
                });
            }
            inputs.extend(s.inputs.iter().flatten());
            targets.extend(&s.target);
        }
        Ok(Batch {
            inputs: Tensor::new(vec![samples.len(), w, ALPHABET_LEN], inputs)?,
            targets: Tensor::new(vec![samples.len(), k], targets)?,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parameter gradients in [`Model::parameters`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Tensor>);

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Gradients(model.parameters().iter().map(|p| Tensor::zeros(p.shape())).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|t| t.data())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Stacked LSTM layers (possibly none) followed by dense layers; the last
/// dense layer is the tanh output.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    lstm: Vec<LstmParams>,
    dense: Vec<Dense>,
}

struct ForwardTrace {
    lstm: Vec<LstmTrace>,
    /// Input of each dense layer after dropout.
    dense_inputs: Vec<Tensor>,
    dense_outputs: Vec<Tensor>,
}

impl Model {
    pub fn new<R: Rng + ?Sized>(spec: ModelSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let h = spec.hidden_width;
        let mut lstm = Vec::with_capacity(spec.lstm_layers);
        for l in 0..spec.lstm_layers {
            let input = if l == 0 { spec.input_width } else { h };
            lstm.push(LstmParams::init(rng, input, h));
        }
        let head_input = if spec.lstm_layers > 0 {
            h
        } else {
            spec.window_size * spec.input_width
        };
        let mut dense = Vec::with_capacity(spec.dense_layers + 1);
        for l in 0..spec.dense_layers {
            let fan_in = if l == 0 { head_input } else { h };
            dense.push(Dense::init(rng, fan_in, h, Activation::Relu));
        }
        let fan_in = if spec.dense_layers == 0 { head_input } else { h };
        dense.push(Dense::init(rng, fan_in, spec.output_width(), Activation::Tanh));
        Ok(Model { spec, lstm, dense })
    }

    /// Rebuilds a model from parameter tensors in [`Model::parameters`] order.
    pub fn from_parameters(spec: ModelSpec, params: Vec<Tensor>) -> Result<Self> {
        let mut model = Model::new(spec, &mut rand::rngs::mock::StepRng::new(0, 0))?;
        let expected: Vec<Vec<usize>> = model.parameters().iter().map(|p| p.shape().to_vec()).collect();
        if params.len() != expected.len() {
            return Err(Error::Shape {
                op: "from_parameters",
                left: vec![expected.len()],
                right: vec![params.len()],
            });
        }
        for ((slot, value), shape) in model.parameters_mut().into_iter().zip(params).zip(expected) {
            if value.shape() != shape.as_slice() {
                return Err(Error::Shape {
                    op: "from_parameters",
                    left: shape,
                    right: value.shape().to_vec(),
                });
            }
            *slot = value;
        }
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn lstm_layers(&self) -> &[LstmParams] {
        &self.lstm
    }

    pub fn dense_layers(&self) -> &[Dense] {
        &self.dense
    }

    pub fn output_layer_mut(&mut self) -> &mut Dense {
        self.dense.last_mut().expect("model has an output layer")
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for l in &self.lstm {
            out.extend([&l.w_input, &l.w_hidden, &l.bias]);
        }
        for d in &self.dense {
            out.extend([&d.weights, &d.bias]);
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for l in &mut self.lstm {
            out.extend([&mut l.w_input, &mut l.w_hidden, &mut l.bias]);
        }
        for d in &mut self.dense {
            out.extend([&mut d.weights, &mut d.bias]);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    fn batch_size(&self, inputs: &Tensor) -> Result<usize> {
        let s = &self.spec;
        let shape = inputs.shape();
        let ok = match shape {
            [_, w, c] => *w == s.window_size && *c == s.input_width,
            [_, flat] => !s.arch.is_recurrent() && *flat == s.window_size * s.input_width,
            _ => false,
        };
        if !ok {
            let expected = if s.arch.is_recurrent() {
                vec![0, s.window_size, s.input_width]
            } else {
                vec![0, s.window_size * s.input_width]
            };
            return Err(Error::Shape {
                op: "forward",
                left: shape.to_vec(),
                right: expected,
            });
        }
        Ok(shape[0])
    }

    fn run(&self, inputs: &Tensor, dropout: Option<&DropoutMask>) -> Result<(Tensor, ForwardTrace)> {
        let batch = self.batch_size(inputs)?;
        let (w, c) = (self.spec.window_size, self.spec.input_width);
        let mut trace = ForwardTrace {
            lstm: Vec::with_capacity(self.lstm.len()),
            dense_inputs: Vec::with_capacity(self.dense.len()),
            dense_outputs: Vec::with_capacity(self.dense.len()),
        };

        let mut x = if self.lstm.is_empty() {
            Tensor::new(vec![batch, w * c], inputs.data().to_vec())?
        } else {
            let mut steps: Vec<Vec<f64>> = (0..w).map(|_| Vec::with_capacity(batch * c)).collect();
            for row in inputs.data().chunks(w * c) {
                for (t, step) in steps.iter_mut().enumerate() {
                    step.extend_from_slice(&row[t * c..(t + 1) * c]);
                }
            }
            for layer in &self.lstm {
                let lt = layer.forward_sequence(steps, batch);
                steps = lt.hidden[1..].to_vec();
                trace.lstm.push(lt);
            }
            let last = steps.pop().unwrap_or_default();
            Tensor::new(vec![batch, self.spec.hidden_width], last)?
        };

        for (l, layer) in self.dense.iter().enumerate() {
            if l > 0 {
                if let Some(mask) = dropout {
                    let m = &mask.masks[l - 1];
                    if m.len() != x.len() {
                        return Err(Error::Shape {
                            op: "dropout",
                            left: vec![m.len()],
                            right: x.shape().to_vec(),
                        });
                    }
                    x.data_mut().iter_mut().zip(m).for_each(|(v, s)| *v *= s);
                }
            }
            let y = layer.forward(&x)?;
            trace.dense_inputs.push(x);
            x = y.clone();
            trace.dense_outputs.push(y);
        }
        x.ensure_finite("model output")?;
        Ok((x, trace))
    }

    /// Inference forward pass (no dropout). Accepts `(B, window, width)`;
    /// dense-only models also accept `(B, window·width)`.
    pub fn forward(&self, inputs: &Tensor) -> Result<Tensor> {
        let batch = self.batch_size(inputs)?;
        if batch == 0 {
            return Ok(Tensor::zeros(&[0, self.spec.output_width()]));
        }
        Ok(self.run(inputs, None)?.0)
    }

    /// Mean squared error over all output components and its gradient with
    /// respect to every parameter.
    pub fn loss_and_gradients(
        &self,
        batch: &Batch,
        dropout: Option<&DropoutMask>,
    ) -> Result<(LossReport, Gradients)> {
        if batch.is_empty() {
            return Err(Error::EmptyInput("batch"));
        }
        let (pred, trace) = self.run(&batch.inputs, dropout)?;
        let report = LossReport::from_predictions(&pred, &batch.targets)?;
        if !report.mse.is_finite() {
            return Err(Error::Divergence { epoch: None });
        }

        let n = batch.len();
        let scale = 2.0 / pred.len() as f64;
        let mut grad = Tensor::from_fn(pred.shape(), |i| {
            scale * (pred.data()[i] - batch.targets.data()[i])
        });

        let mut grads = Gradients::zeros_like(self);
        let lstm_slots = 3 * self.lstm.len();
        for l in (0..self.dense.len()).rev() {
            let (gw, rest) = grads.0[lstm_slots + 2 * l..].split_at_mut(1);
            grad = self.dense[l].backward(
                &trace.dense_inputs[l],
                &trace.dense_outputs[l],
                &grad,
                &mut gw[0],
                &mut rest[0],
            );
            if l > 0 {
                if let Some(mask) = dropout {
                    grad.data_mut()
                        .iter_mut()
                        .zip(&mask.masks[l - 1])
                        .for_each(|(g, s)| *g *= s);
                }
            }
        }

        if !self.lstm.is_empty() {
            let w = self.spec.window_size;
            let h = self.spec.hidden_width;
            let mut grad_steps = vec![vec![0.0; n * h]; w];
            grad_steps[w - 1] = grad.into_data();
            for l in (0..self.lstm.len()).rev() {
                grad_steps = self.lstm[l].backward_sequence(
                    &trace.lstm[l],
                    &grad_steps,
                    n,
                    &mut grads.0[3 * l..3 * l + 3],
                );
            }
        }

        for g in &grads.0 {
            if g.data().iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { epoch: None });
            }
        }
        Ok((report, grads))
    }

    /// Takes one gradient-descent step.
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) -> Result<()> {
        for (p, g) in self.parameters_mut().into_iter().zip(&grads.0) {
            p.axpy(-learning_rate, g)?;
        }
        Ok(())
    }
}

/// Predicted angles in degrees; `None` for angles the model does not predict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedAngles {
    pub phi: Option<f64>,
    pub psi: Option<f64>,
}

/// Decodes raw network outputs (`B × 2` or `B × 4`) into angles.
pub fn decode_outputs(outputs: &Tensor, mode: TargetMode) -> Result<Vec<PredictedAngles>> {
    let k = mode.output_width();
    if outputs.cols() != k {
        return Err(Error::Shape {
            op: "decode_outputs",
            left: outputs.shape().to_vec(),
            right: vec![outputs.rows(), k],
        });
    }
    outputs
        .data()
        .chunks(k)
        .map(|row| {
            let first = decode_angle(row[0], row[1])?;
            Ok(match mode {
                TargetMode::Phi => PredictedAngles { phi: Some(first), psi: None },
                TargetMode::Psi => PredictedAngles { phi: None, psi: Some(first) },
                TargetMode::Both => PredictedAngles {
                    phi: Some(first),
                    psi: Some(decode_angle(row[2], row[3])?),
                },
            })
        })
        .collect()
}

const PREDICT_CHUNK: usize = 2048;

/// Runs inference (dropout off) and converts each sin/cos pair to degrees.
pub fn predict_angles(model: &Model, samples: &[WindowSample]) -> Result<Vec<PredictedAngles>> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(PREDICT_CHUNK) {
        let batch = Batch::from_samples(chunk)?;
        let pred = model.forward(&batch.inputs)?;
        out.extend(decode_outputs(&pred, model.spec().target_mode)?);
    }
    Ok(out)
}
