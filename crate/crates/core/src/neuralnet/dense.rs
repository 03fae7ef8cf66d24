use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{matmul_a_bt_acc, matmul_acc, matmul_at_b_acc, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer: `activation(input · weights + bias)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `inputs × outputs`
    pub weights: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

/// Computes `activation(input · weights + bias)` for a batch of row vectors.
pub fn dense_forward(
    weights: &Tensor,
    bias: &Tensor,
    input: &Tensor,
    activation: Activation,
) -> Result<Tensor> {
    let (fan_in, fan_out) = (weights.rows(), weights.cols());
    if weights.shape().len() != 2 || input.cols() != fan_in || bias.len() != fan_out {
        return Err(Error::Shape {
            op: "dense_forward",
            left: input.shape().to_vec(),
            right: weights.shape().to_vec(),
        });
    }
    let batch = if input.shape().len() == 1 { 1 } else { input.rows() };
    let mut out = Tensor::from_fn(&[batch, fan_out], |i| bias.data()[i % fan_out]);
    matmul_acc(input.data(), weights.data(), out.data_mut(), batch, fan_in, fan_out);
    for v in out.data_mut() {
        *v = activation.apply(*v);
    }
    Ok(out)
}

impl Dense {
    /// Uniform fan-in initialization: ±√(6/fan_in) for ReLU layers,
    /// ±√(3/fan_in) otherwise. Biases start at zero.
    pub fn init<R: Rng + ?Sized>(rng: &mut R, fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        let gain = if activation == Activation::Relu { 6.0 } else { 3.0 };
        let limit = (gain / fan_in.max(1) as f64).sqrt();
        Dense {
            weights: Tensor::from_fn(&[fan_in, fan_out], |_| rng.gen_range(-limit..=limit)),
            bias: Tensor::zeros(&[fan_out]),
            activation,
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        dense_forward(&self.weights, &self.bias, input, self.activation)
    }

    /// Backpropagates `grad_output` (∂L/∂output) through the layer,
    /// accumulating parameter gradients and returning ∂L/∂input.
    pub(crate) fn backward(
        &self,
        input: &Tensor,
        output: &Tensor,
        grad_output: &Tensor,
        grad_weights: &mut Tensor,
        grad_bias: &mut Tensor,
    ) -> Tensor {
        let (batch, fan_in, fan_out) = (output.rows(), self.fan_in(), self.fan_out());
        let grad_pre: Vec<f64> = output
            .data()
            .iter()
            .zip(grad_output.data())
            .map(|(&y, &g)| g * self.activation.derivative_from_output(y))
            .collect();
        matmul_at_b_acc(input.data(), &grad_pre, grad_weights.data_mut(), batch, fan_in, fan_out);
        for row in grad_pre.chunks(fan_out) {
            for (b, g) in grad_bias.data_mut().iter_mut().zip(row) {
                *b += g;
            }
        }
        let mut grad_input = Tensor::zeros(&[batch, fan_in]);
        matmul_a_bt_acc(&grad_pre, self.weights.data(), grad_input.data_mut(), batch, fan_out, fan_in);
        grad_input
    }
}
