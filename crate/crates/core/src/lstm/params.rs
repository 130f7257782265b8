use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Weights of one gate: input weights `w` (hidden × input), recurrent
/// weights `u` (hidden × hidden), bias `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub w: Array2<f64>,
    pub u: Array2<f64>,
    pub b: Array1<f64>,
}

impl GateParams {
    fn zeros(hidden: usize, input: usize) -> Self {
        Self {
            w: Array2::zeros((hidden, input)),
            u: Array2::zeros((hidden, hidden)),
            b: Array1::zeros(hidden),
        }
    }
}

/// One LSTM layer: forget, input, candidate-cell, and output gates.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub forget: GateParams,
    pub input: GateParams,
    pub cell: GateParams,
    pub output: GateParams,
}

impl LayerParams {
    pub fn hidden_size(&self) -> usize {
        self.forget.w.nrows()
    }

    pub fn input_size(&self) -> usize {
        self.forget.w.ncols()
    }

    pub(crate) fn gates(&self) -> [&GateParams; 4] {
        [&self.forget, &self.input, &self.cell, &self.output]
    }

    pub(crate) fn gates_mut(&mut self) -> [&mut GateParams; 4] {
        [&mut self.forget, &mut self.input, &mut self.cell, &mut self.output]
    }
}

/// Full parameter set: stacked layers plus a linear output head.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub layers: Vec<LayerParams>,
    /// Output head weights, `out × hidden`.
    pub head_w: Array2<f64>,
    pub head_b: Array1<f64>,
}

impl LstmParams {
    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn hidden_size(&self) -> usize {
        self.layers[0].hidden_size()
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].input_size()
    }

    pub fn output_size(&self) -> usize {
        self.head_w.nrows()
    }

    /// Zero-valued clone with identical shapes; gradient container.
    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| LayerParams {
                forget: GateParams::zeros(l.hidden_size(), l.input_size()),
                input: GateParams::zeros(l.hidden_size(), l.input_size()),
                cell: GateParams::zeros(l.hidden_size(), l.input_size()),
                output: GateParams::zeros(l.hidden_size(), l.input_size()),
            })
            .collect();
        Self {
            layers,
            head_w: Array2::zeros(self.head_w.raw_dim()),
            head_b: Array1::zeros(self.head_b.raw_dim()),
        }
    }

    pub fn n_params(&self) -> usize {
        let mut n = self.head_w.len() + self.head_b.len();
        for layer in &self.layers {
            for gate in layer.gates() {
                n += gate.w.len() + gate.u.len() + gate.b.len();
            }
        }
        n
    }

    /// Flatten every tensor row-major in a fixed order: per layer the
    /// forget/input/cell/output gates (each w, u, b), then the head.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            for gate in layer.gates() {
                flat.extend(gate.w.iter());
                flat.extend(gate.u.iter());
                flat.extend(gate.b.iter());
            }
        }
        flat.extend(self.head_w.iter());
        flat.extend(self.head_b.iter());
        flat
    }

    /// Inverse of [`to_flat`].
    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params(), "flat vector length mismatch");
        let mut it = flat.iter();
        for layer in &mut self.layers {
            for gate in layer.gates_mut() {
                for v in gate.w.iter_mut() {
                    *v = *it.next().unwrap();
                }
                for v in gate.u.iter_mut() {
                    *v = *it.next().unwrap();
                }
                for v in gate.b.iter_mut() {
                    *v = *it.next().unwrap();
                }
            }
        }
        for v in self.head_w.iter_mut() {
            *v = *it.next().unwrap();
        }
        for v in self.head_b.iter_mut() {
            *v = *it.next().unwrap();
        }
    }

    /// Elementwise accumulate: `self += other`. Shapes must match.
    pub fn add_assign(&mut self, other: &LstmParams) {
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            for (g, og) in mine.gates_mut().into_iter().zip(theirs.gates()) {
                g.w += &og.w;
                g.u += &og.u;
                g.b += &og.b;
            }
        }
        self.head_w += &other.head_w;
        self.head_b += &other.head_b;
    }
}

fn xavier(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..bound))
}

/// Seeded initialization: uniform Xavier weights, zero biases except the
/// forget-gate bias at 1.0 so early training does not forget everything.
pub fn init_params(
    input_dim: usize,
    hidden: usize,
    n_layers: usize,
    out_dim: usize,
    rng: &mut ChaCha8Rng,
) -> LstmParams {
    let mut layers = Vec::with_capacity(n_layers);
    for l in 0..n_layers {
        let in_dim = if l == 0 { input_dim } else { hidden };
        let mut gate = |forget: bool| -> GateParams {
            let w = xavier(rng, hidden, in_dim);
            let u = xavier(rng, hidden, hidden);
            let b = if forget { Array1::ones(hidden) } else { Array1::zeros(hidden) };
            GateParams { w, u, b }
        };
        let forget = gate(true);
        let input = gate(false);
        let cell = gate(false);
        let output = gate(false);
        layers.push(LayerParams { forget, input, cell, output });
    }
    let head_w = xavier(rng, out_dim, hidden);
    let head_b = Array1::zeros(out_dim);
    LstmParams { layers, head_w, head_b }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::seeded_rng;

    #[test]
    fn flat_round_trip() {
        let params = init_params(3, 4, 2, 1, &mut seeded_rng(1));
        let flat = params.to_flat();
        assert_eq!(flat.len(), params.n_params());
        let mut rebuilt = params.zeros_like();
        rebuilt.assign_from_flat(&flat);
        assert_eq!(params, rebuilt);
    }

    #[test]
    fn init_is_seed_deterministic() {
        let a = init_params(2, 8, 1, 1, &mut seeded_rng(42));
        let b = init_params(2, 8, 1, 1, &mut seeded_rng(42));
        let c = init_params(2, 8, 1, 1, &mut seeded_rng(43));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn forget_bias_starts_at_one() {
        let params = init_params(2, 4, 2, 1, &mut seeded_rng(0));
        for layer in &params.layers {
            assert!(layer.forget.b.iter().all(|&b| b == 1.0));
            assert!(layer.input.b.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn second_layer_consumes_hidden_width() {
        let params = init_params(5, 3, 2, 2, &mut seeded_rng(0));
        assert_eq!(params.layers[0].input_size(), 5);
        assert_eq!(params.layers[1].input_size(), 3);
        assert_eq!(params.output_size(), 2);
    }
}
