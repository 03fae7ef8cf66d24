use rand::Rng;

use super::tensor::{matmul_a_bt_acc, matmul_acc, matmul_at_b_acc, Tensor};
use crate::{Error, Result};

/// Weights of one LSTM layer. Gate blocks are laid out `[input, forget,
/// candidate, output]` along the last axis, each `hidden` wide.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `inputs × 4·hidden`
    pub w_input: Tensor,
    /// `hidden × 4·hidden`
    pub w_hidden: Tensor,
    /// `4·hidden`
    pub bias: Tensor,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmParams {
    /// Weights uniform in ±1/√hidden, forget-gate bias 1.0, other biases 0.
    pub fn init<R: Rng + ?Sized>(rng: &mut R, input: usize, hidden: usize) -> Self {
        let limit = 1.0 / (hidden.max(1) as f64).sqrt();
        let mut bias = Tensor::zeros(&[4 * hidden]);
        bias.data_mut()[hidden..2 * hidden].fill(1.0);
        LstmParams {
            w_input: Tensor::from_fn(&[input, 4 * hidden], |_| rng.gen_range(-limit..=limit)),
            w_hidden: Tensor::from_fn(&[hidden, 4 * hidden], |_| rng.gen_range(-limit..=limit)),
            bias,
        }
    }

    pub fn zeros(input: usize, hidden: usize) -> Self {
        LstmParams {
            w_input: Tensor::zeros(&[input, 4 * hidden]),
            w_hidden: Tensor::zeros(&[hidden, 4 * hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn input_width(&self) -> usize {
        self.w_input.rows()
    }

    pub fn hidden_width(&self) -> usize {
        self.w_hidden.rows()
    }

    fn check(&self, x: &Tensor, h: &Tensor, c: &Tensor) -> Result<usize> {
        let hidden = self.hidden_width();
        let batch = x.rows();
        let ok = self.w_input.cols() == 4 * hidden
            && self.w_hidden.cols() == 4 * hidden
            && self.bias.len() == 4 * hidden
            && x.cols() == self.input_width()
            && h.rows() == batch
            && c.rows() == batch
            && h.cols() == hidden
            && c.cols() == hidden;
        if ok {
            Ok(batch)
        } else {
            Err(Error::Shape {
                op: "lstm_step",
                left: x.shape().to_vec(),
                right: self.w_input.shape().to_vec(),
            })
        }
    }

    /// Activated gates for one step, `batch × 4·hidden`.
    fn gates(&self, x: &[f64], h_prev: &[f64], batch: usize) -> Vec<f64> {
        let hidden = self.hidden_width();
        let width = 4 * hidden;
        let mut z: Vec<f64> = (0..batch * width).map(|i| self.bias.data()[i % width]).collect();
        matmul_acc(x, self.w_input.data(), &mut z, batch, self.input_width(), width);
        matmul_acc(h_prev, self.w_hidden.data(), &mut z, batch, hidden, width);
        for row in z.chunks_mut(width) {
            let (ifg, o) = row.split_at_mut(3 * hidden);
            let (i_f, g) = ifg.split_at_mut(2 * hidden);
            i_f.iter_mut().for_each(|v| *v = sigmoid(*v));
            g.iter_mut().for_each(|v| *v = v.tanh());
            o.iter_mut().for_each(|v| *v = sigmoid(*v));
        }
        z
    }
}

/// Activated gates and cell state of one step, kept for backpropagation.
fn step_state(gates: &[f64], c_prev: &[f64], hidden: usize) -> (Vec<f64>, Vec<f64>) {
    let batch = c_prev.len() / hidden.max(1);
    let mut c = vec![0.0; batch * hidden];
    let mut h = vec![0.0; batch * hidden];
    for b in 0..batch {
        let g = &gates[b * 4 * hidden..(b + 1) * 4 * hidden];
        for j in 0..hidden {
            let k = b * hidden + j;
            let (ig, fg, cg, og) = (g[j], g[hidden + j], g[2 * hidden + j], g[3 * hidden + j]);
            c[k] = fg * c_prev[k] + ig * cg;
            h[k] = og * c[k].tanh();
        }
    }
    (h, c)
}

/// One LSTM recurrence step: `c_t = f⊙c_{t−1} + i⊙g`, `h_t = o⊙tanh(c_t)`.
pub fn lstm_step(
    params: &LstmParams,
    input_t: &Tensor,
    hidden_prev: &Tensor,
    cell_prev: &Tensor,
) -> Result<(Tensor, Tensor)> {
    let batch = params.check(input_t, hidden_prev, cell_prev)?;
    let hidden = params.hidden_width();
    let gates = params.gates(input_t.data(), hidden_prev.data(), batch);
    let (h, c) = step_state(&gates, cell_prev.data(), hidden);
    let h = Tensor::new(vec![batch, hidden], h)?;
    let c = Tensor::new(vec![batch, hidden], c)?;
    Ok((h, c))
}

/// Forward state of a whole sequence through one layer.
pub(crate) struct LstmTrace {
    /// Layer inputs per step, `batch × input`.
    pub inputs: Vec<Vec<f64>>,
    pub gates: Vec<Vec<f64>>,
    /// Hidden states h_0..h_T (h_0 = 0), `batch × hidden`.
    pub hidden: Vec<Vec<f64>>,
    /// Cell states c_0..c_T.
    pub cells: Vec<Vec<f64>>,
}

impl LstmParams {
    /// Runs the layer over `steps` (each `batch × input`) from zero state.
    pub(crate) fn forward_sequence(&self, steps: Vec<Vec<f64>>, batch: usize) -> LstmTrace {
        let hidden = self.hidden_width();
        let mut trace = LstmTrace {
            gates: Vec::with_capacity(steps.len()),
            hidden: vec![vec![0.0; batch * hidden]],
            cells: vec![vec![0.0; batch * hidden]],
            inputs: steps,
        };
        for t in 0..trace.inputs.len() {
            let gates = self.gates(&trace.inputs[t], &trace.hidden[t], batch);
            let (h, c) = step_state(&gates, &trace.cells[t], hidden);
            trace.gates.push(gates);
            trace.hidden.push(h);
            trace.cells.push(c);
        }
        trace
    }

    /// Backpropagation through time. `grad_hidden[t]` is ∂L/∂h_{t+1} arriving
    /// from outside the recurrence (the layer above or the head); returns
    /// ∂L/∂input for every step.
    pub(crate) fn backward_sequence(
        &self,
        trace: &LstmTrace,
        grad_hidden: &[Vec<f64>],
        batch: usize,
        grads: &mut [Tensor],
    ) -> Vec<Vec<f64>> {
        let hidden = self.hidden_width();
        let input = self.input_width();
        let width = 4 * hidden;
        let steps = trace.gates.len();
        let mut dh_next = vec![0.0; batch * hidden];
        let mut dc_next = vec![0.0; batch * hidden];
        let mut dz = vec![0.0; batch * width];
        let mut grad_inputs = vec![Vec::new(); steps];

        for t in (0..steps).rev() {
            let gates = &trace.gates[t];
            let c_prev = &trace.cells[t];
            let c = &trace.cells[t + 1];
            for b in 0..batch {
                let g = &gates[b * width..(b + 1) * width];
                let dzr = &mut dz[b * width..(b + 1) * width];
                for j in 0..hidden {
                    let k = b * hidden + j;
                    let (ig, fg, cg, og) = (g[j], g[hidden + j], g[2 * hidden + j], g[3 * hidden + j]);
                    let tc = c[k].tanh();
                    let dh = grad_hidden[t][k] + dh_next[k];
                    let dc = dc_next[k] + dh * og * (1.0 - tc * tc);
                    dzr[j] = dc * cg * ig * (1.0 - ig);
                    dzr[hidden + j] = dc * c_prev[k] * fg * (1.0 - fg);
                    dzr[2 * hidden + j] = dc * ig * (1.0 - cg * cg);
                    dzr[3 * hidden + j] = dh * tc * og * (1.0 - og);
                    dc_next[k] = dc * fg;
                }
            }
            let [gw_in, gw_hid, gb] = grads else {
                unreachable!("lstm gradient slots")
            };
            matmul_at_b_acc(&trace.inputs[t], &dz, gw_in.data_mut(), batch, input, width);
            matmul_at_b_acc(&trace.hidden[t], &dz, gw_hid.data_mut(), batch, hidden, width);
            for row in dz.chunks(width) {
                for (acc, v) in gb.data_mut().iter_mut().zip(row) {
                    *acc += v;
                }
            }
            let mut dx = vec![0.0; batch * input];
            matmul_a_bt_acc(&dz, self.w_input.data(), &mut dx, batch, width, input);
            grad_inputs[t] = dx;
            dh_next.fill(0.0);
            matmul_a_bt_acc(&dz, self.w_hidden.data(), &mut dh_next, batch, width, hidden);
        }
        grad_inputs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_give_zero_state() {
        let p = LstmParams::zeros(3, 4);
        let x = Tensor::new(vec![2, 3], vec![0.3, -1.0, 2.0, 0.0, 1.0, 5.0]).unwrap();
        let (h, c) = lstm_step(&p, &x, &Tensor::zeros(&[2, 4]), &Tensor::zeros(&[2, 4])).unwrap();
        assert!(h.data().iter().all(|&v| v == 0.0));
        assert!(c.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturated_forget_gate_keeps_cell() {
        let mut p = LstmParams::zeros(2, 3);
        p.bias.data_mut()[3..6].fill(1000.0);
        let cell = Tensor::new(vec![1, 3], vec![0.7, -2.5, 11.0]).unwrap();
        let (_, c) = lstm_step(&p, &Tensor::zeros(&[1, 2]), &Tensor::zeros(&[1, 3]), &cell).unwrap();
        for (a, b) in c.data().iter().zip(cell.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hidden_state_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = LstmParams::init(&mut rng, 4, 5);
            let x = Tensor::from_fn(&[3, 4], |_| rng.gen_range(-3.0..3.0));
            let h0 = Tensor::from_fn(&[3, 5], |_| rng.gen_range(-1.0..1.0));
            let c0 = Tensor::from_fn(&[3, 5], |_| rng.gen_range(-5.0..5.0));
            let (h, _) = lstm_step(&p, &x, &h0, &c0).unwrap();
            assert!(h.data().iter().all(|v| v.abs() < 1.0));
        }
    }

    #[test]
    fn shape_errors() {
        let p = LstmParams::zeros(3, 4);
        assert!(matches!(
            lstm_step(&p, &Tensor::zeros(&[2, 2]), &Tensor::zeros(&[2, 4]), &Tensor::zeros(&[2, 4])),
            Err(Error::Shape { .. })
        ));
        assert!(matches!(
            lstm_step(&p, &Tensor::zeros(&[2, 3]), &Tensor::zeros(&[1, 4]), &Tensor::zeros(&[2, 4])),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn sequence_matches_stepwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = LstmParams::init(&mut rng, 3, 2);
        let steps: Vec<Vec<f64>> = (0..4).map(|_| (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let trace = p.forward_sequence(steps.clone(), 2);
        let mut h = Tensor::zeros(&[2, 2]);
        let mut c = Tensor::zeros(&[2, 2]);
        for (t, x) in steps.into_iter().enumerate() {
            let x = Tensor::new(vec![2, 3], x).unwrap();
            (h, c) = lstm_step(&p, &x, &h, &c).unwrap();
            assert_eq!(h.data(), trace.hidden[t + 1].as_slice());
            assert_eq!(c.data(), trace.cells[t + 1].as_slice());
        }
    }
}
