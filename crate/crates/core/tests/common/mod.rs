#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsion_core::dataset::TargetMode;
use torsion_core::neuralnet::{Architecture, Batch, DropoutMask, Model, ModelSpec, Tensor};

/// Largest mismatch between analytic and central-difference gradients,
/// as |a − n| / max(|a|, |n|), skipping pairs below `floor` in magnitude
/// where rounding noise dominates.
pub fn max_gradient_error(model: &mut Model, batch: &Batch, mask: Option<&DropoutMask>, eps: f64, floor: f64) -> f64 {
    let (_, grads) = model.loss_and_gradients(batch, mask).unwrap();
    let mut worst: f64 = 0.0;
    for pi in 0..grads.0.len() {
        for j in 0..grads.0[pi].len() {
            let orig = model.parameters()[pi].data()[j];
            model.parameters_mut()[pi].data_mut()[j] = orig + eps;
            let up = model.loss_and_gradients(batch, mask).unwrap().0.mse;
            model.parameters_mut()[pi].data_mut()[j] = orig - eps;
            let down = model.loss_and_gradients(batch, mask).unwrap().0.mse;
            model.parameters_mut()[pi].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let analytic = grads.0[pi].data()[j];
            let scale = numeric.abs().max(analytic.abs());
            if scale > floor {
                worst = worst.max((numeric - analytic).abs() / scale);
            }
        }
    }
    worst
}

/// A small randomized model and batch for gradient checks.
pub fn gradient_case(
    arch: Architecture,
    mode: TargetMode,
    window: usize,
    batch: usize,
    hidden: usize,
    dropout: bool,
    seed: u64,
) -> (Model, Batch, Option<DropoutMask>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = ModelSpec::new(arch, window, mode).with_hidden_width(hidden);
    let mut model = Model::new(spec, &mut rng).unwrap();
    // Move biases off zero so ReLU kinks are not sitting at the origin.
    for p in model.parameters_mut() {
        for v in p.data_mut() {
            *v += rng.gen_range(-0.1..0.1);
        }
    }
    let k = mode.output_width();
    let b = Batch {
        inputs: Tensor::from_fn(&[batch, window, 21], |_| rng.gen_range(-1.0..1.0)),
        targets: Tensor::from_fn(&[batch, k], |_| rng.gen_range(-0.9..0.9)),
    };
    let mask = dropout.then(|| DropoutMask::sample(&model, batch, 0.3, &mut rng));
    (model, b, mask)
}
