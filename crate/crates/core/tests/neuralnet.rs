mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsion_core::dataset::TargetMode;
use torsion_core::neuralnet::{
    dense_forward, lstm_step, Activation, Architecture, Batch, DropoutMask, LossReport, LstmParams, Model, ModelSpec,
    Tensor,
};

use common::{gradient_case, max_gradient_error};

#[test]
fn gradients_every_architecture_family() {
    let cases = [
        (Architecture::Dnn1, TargetMode::Phi, false),
        (Architecture::Dnn2, TargetMode::Both, true),
        (Architecture::Lstm1, TargetMode::Psi, true),
        (Architecture::Lstm2, TargetMode::Both, false),
        (Architecture::Lstm3, TargetMode::Phi, true),
    ];
    for (i, (arch, mode, dropout)) in cases.into_iter().enumerate() {
        let (mut model, batch, mask) = gradient_case(arch, mode, 5, 3, 4, dropout, i as u64);
        let err = max_gradient_error(&mut model, &batch, mask.as_ref(), 1e-5, 1e-7);
        assert!(err < 1e-4, "{arch}: {err}");
    }
}

#[test]
fn lstm_states_bounded_over_long_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let params = LstmParams::init(&mut rng, 21, 8);
    let mut h = Tensor::zeros(&[1, 8]);
    let mut c = Tensor::zeros(&[1, 8]);
    for _ in 0..10_000 {
        let x = Tensor::from_fn(&[1, 21], |_| rng.gen_range(-5.0..5.0));
        let (h2, c2) = lstm_step(&params, &x, &h, &c).unwrap();
        assert!(h2.data().iter().all(|v| v.abs() < 1.0));
        assert!(c2.data().iter().all(|v| v.is_finite()));
        h = h2;
        c = c2;
    }
}

#[test]
fn dropout_mean_over_many_masks() {
    let spec = ModelSpec::new(Architecture::Dnn1, 3, TargetMode::Phi).with_hidden_width(8);
    let model = Model::new(spec, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let masks: Vec<DropoutMask> = (0..10_000).map(|_| DropoutMask::sample(&model, 1, 0.3, &mut rng)).collect();
    for layer in 0..masks[0].layers().len() {
        for unit in 0..masks[0].layers()[layer].len() {
            // A unit activation of 1 scaled by the mask.
            let mean = masks.iter().map(|m| m.layers()[layer][unit]).sum::<f64>() / masks.len() as f64;
            assert!((mean - 1.0).abs() < 0.02, "layer {layer} unit {unit}: {mean}");
        }
    }
}

#[test]
fn small_step_does_not_increase_loss() {
    for (i, arch) in [Architecture::Dnn1, Architecture::Dnn2, Architecture::Lstm1, Architecture::Lstm2]
        .into_iter()
        .enumerate()
    {
        let (model, batch, _) = gradient_case(arch, TargetMode::Both, 5, 8, 6, false, 100 + i as u64);
        let (before, grads) = model.loss_and_gradients(&batch, None).unwrap();
        let mut lr = 1.0;
        let mut ok = false;
        for _ in 0..=20 {
            let mut stepped = model.clone();
            stepped.apply_gradients(&grads, lr).unwrap();
            if stepped.loss_and_gradients(&batch, None).unwrap().0.mse <= before.mse {
                ok = true;
                break;
            }
            lr /= 2.0;
        }
        assert!(ok, "{arch}");
    }
}

#[test]
fn outputs_inside_tanh_range() {
    for arch in Architecture::ALL {
        let spec = ModelSpec::new(arch, 3, TargetMode::Both).with_hidden_width(4);
        let model = Model::new(spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let x = Tensor::from_fn(&[5, 3, 21], |i| ((i * 7919) % 13) as f64 - 6.0);
        let y = model.forward(&x).unwrap();
        assert_eq!(y.shape(), &[5, 4]);
        assert!(y.data().iter().all(|v| v.abs() < 1.0), "{arch}");
    }
}

#[test]
fn deep_stack_has_sixty_four_layers() {
    let spec = ModelSpec::new(Architecture::Lstm5, 3, TargetMode::Phi).with_hidden_width(4);
    let model = Model::new(spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(model.lstm_layers().len(), 64);
    assert_eq!(model.dense_layers().len(), 3);
}

#[test]
fn scaled_outputs_decode_identically() {
    use torsion_core::neuralnet::decode_outputs;
    let raw = Tensor::new(vec![2, 4], vec![0.3, -0.8, -0.5, 0.1, 0.9, 0.2, 0.0, -0.7]).unwrap();
    let scaled = Tensor::from_fn(&[2, 4], |i| raw.data()[i] * 0.3);
    let a = decode_outputs(&raw, TargetMode::Both).unwrap();
    let b = decode_outputs(&scaled, TargetMode::Both).unwrap();
    for (p, q) in a.iter().zip(&b) {
        assert!((p.phi.unwrap() - q.phi.unwrap()).abs() < 1e-12);
        assert!((p.psi.unwrap() - q.psi.unwrap()).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn rmse_at_least_mae(values in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..50)) {
        let n = values.len();
        let p = Tensor::new(vec![n, 1], values.iter().map(|v| v.0).collect()).unwrap();
        let t = Tensor::new(vec![n, 1], values.iter().map(|v| v.1).collect()).unwrap();
        let r = LossReport::from_predictions(&p, &t).unwrap();
        prop_assert!(r.rmse + 1e-15 >= r.mae && r.mae >= 0.0);
    }

    #[test]
    fn dense_matches_naive(
        w in prop::collection::vec(-2.0f64..2.0, 6),
        b in prop::collection::vec(-1.0f64..1.0, 2),
        x in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let wt = Tensor::new(vec![3, 2], w.clone()).unwrap();
        let bt = Tensor::new(vec![2], b.clone()).unwrap();
        let xt = Tensor::new(vec![1, 3], x.clone()).unwrap();
        let y = dense_forward(&wt, &bt, &xt, Activation::Relu).unwrap();
        for j in 0..2 {
            let z: f64 = (0..3).map(|i| x[i] * w[i * 2 + j]).sum::<f64>() + b[j];
            prop_assert!((y.data()[j] - z.max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic(seed: u64) {
        let spec = ModelSpec::new(Architecture::Lstm1, 3, TargetMode::Psi).with_hidden_width(4);
        let model = Model::new(spec.clone(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let again = Model::new(spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let x = Tensor::from_fn(&[2, 3, 21], |i| (i % 5) as f64 * 0.2);
        prop_assert_eq!(model.forward(&x).unwrap(), again.forward(&x).unwrap());
        let batch = Batch { inputs: x, targets: Tensor::zeros(&[2, 2]) };
        prop_assert_eq!(
            model.loss_and_gradients(&batch, None).unwrap().1,
            again.loss_and_gradients(&batch, None).unwrap().1
        );
    }
}
