use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::quantizer::ModelVector;
use crate::rng;
use crate::scalar::Real;

/// Input, hidden and output widths of the classifier.
pub const LAYER_DIMS: [usize; 4] = [784, 32, 64, 10];

/// Parameter count of the default architecture.
pub const PARAM_COUNT: usize = 784 * 32 + 32 + 32 * 64 + 64 + 64 * 10 + 10;

/// Fully connected layer, `z = x W + b`, with `W` of shape `(fan_in, fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub weights: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Real> Dense<T> {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Feed-forward classifier: ReLU on hidden layers, softmax output.
///
/// Flattened parameter order is layer by layer, each layer's weight matrix
/// row-major (`fan_in` rows of `fan_out` entries) followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    layers: Vec<Dense<T>>,
}

/// Numerically stable softmax of one logit row.
pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exp: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum = exp.iter().copied().fold(T::zero(), |a, b| a + b);
    exp.into_iter().map(|e| e / sum).collect()
}

/// Categorical cross-entropy `-ln p_label` from logits, via log-sum-exp.
pub fn cross_entropy<T: Real>(logits: &[T], label: usize) -> T {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = logits
        .iter()
        .map(|&z| (z - max).exp())
        .fold(T::zero(), |a, b| a + b)
        .ln()
        + max;
    lse - logits[label]
}

impl<T: Real> Mlp<T> {
    pub fn zeros(dims: &[usize]) -> Self {
        assert!(dims.len() >= 2, "an MLP needs input and output widths");
        Self {
            layers: dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
        }
    }

    /// Uniform fan-based initialization on `+-sqrt(6 / (fan_in + fan_out))`,
    /// zero biases, deterministic per seed.
    pub fn init(dims: &[usize], seed: u64) -> Self {
        let mut m = Self::zeros(dims);
        let mut rng = rng::stream(seed, &[rng::DOMAIN_INIT]);
        for layer in &mut m.layers {
            let (fan_in, fan_out) = layer.weights.dim();
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            layer
                .weights
                .mapv_inplace(|_| T::of(rng.random_range(-limit..limit)));
        }
        m
    }

    pub fn layers(&self) -> &[Dense<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense<T>] {
        &mut self.layers
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].weights.nrows()];
        d.extend(self.layers.iter().map(|l| l.weights.ncols()));
        d
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Dense::param_count).sum()
    }

    pub fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weights.iter().copied());
            out.extend(l.bias.iter().copied());
        }
        out
    }

    pub fn load_flat(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::domain(format!(
                "{} parameters given, model has {}",
                flat.len(),
                self.param_count()
            )));
        }
        let mut rest = flat;
        for l in &mut self.layers {
            for dst in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *dst = rest[0];
                rest = &rest[1..];
            }
        }
        Ok(())
    }

    pub fn from_flat(dims: &[usize], flat: &[T]) -> Result<Self> {
        let mut m = Self::zeros(dims);
        m.load_flat(flat)?;
        Ok(m)
    }

    pub fn from_model_vector(dims: &[usize], w: &ModelVector) -> Result<Self> {
        let flat: Vec<T> = w.iter().map(|&v| T::of(v)).collect();
        Self::from_flat(dims, &flat)
    }

    pub fn to_model_vector(&self) -> Result<ModelVector> {
        ModelVector::new(self.flatten().into_iter().map(T::to_f64_lossy).collect())
    }

    fn check_batch(&self, x: &ArrayView2<T>) -> Result<()> {
        let width = self.layers[0].weights.nrows();
        if x.ncols() != width {
            return Err(Error::domain(format!(
                "input width {} does not match {width}",
                x.ncols()
            )));
        }
        Ok(())
    }

    /// Output logits for a batch of row vectors.
    pub fn logits(&self, x: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_batch(&x)?;
        let last = self.layers.len() - 1;
        let mut a = x.to_owned();
        for (i, l) in self.layers.iter().enumerate() {
            a = a.dot(&l.weights) + &l.bias;
            if i != last {
                a.mapv_inplace(|v| v.max(T::zero()));
            }
        }
        Ok(a)
    }

    /// Class probabilities of a single input.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let view = ArrayView2::from_shape((1, x.len()), x)
            .map_err(|e| Error::domain(e.to_string()))?;
        let z = self.logits(view)?;
        Ok(softmax(z.row(0).as_slice().expect("row of a standard-layout array")))
    }

    /// Accumulates into `grads` the gradient of the mean cross-entropy of the
    /// batch, overwriting its contents; returns the summed (not mean) loss.
    pub fn backward_into(&self, x: ArrayView2<T>, labels: &[u8], grads: &mut Mlp<T>) -> Result<T> {
        self.check_batch(&x)?;
        let batch = x.nrows();
        if batch == 0 || labels.len() != batch {
            return Err(Error::domain(format!(
                "batch of {batch} inputs with {} labels",
                labels.len()
            )));
        }
        let last = self.layers.len() - 1;
        // activations[i] is the input of layer i
        let mut activations: Vec<Array2<T>> = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = a.dot(&l.weights) + &l.bias;
            if i != last {
                z.mapv_inplace(|v| v.max(T::zero()));
            }
            activations.push(a);
            a = z;
        }

        // a holds logits; delta = (softmax - onehot) / batch
        let inv_batch = T::one() / T::of(batch as f64);
        let mut loss = T::zero();
        for (mut row, &label) in a.axis_iter_mut(Axis(0)).zip(labels) {
            let label = label as usize;
            let slice = row.as_slice_mut().expect("standard layout");
            loss += cross_entropy(slice, label);
            let p = softmax(slice);
            for (k, (dst, pk)) in slice.iter_mut().zip(p).enumerate() {
                let onehot = if k == label { T::one() } else { T::zero() };
                *dst = (pk - onehot) * inv_batch;
            }
        }
        let mut delta = a;

        for i in (0..self.layers.len()).rev() {
            let input = &activations[i];
            let g = &mut grads.layers[i];
            ndarray::linalg::general_mat_mul(T::one(), &input.t(), &delta, T::zero(), &mut g.weights);
            g.bias.assign(&delta.sum_axis(Axis(0)));
            if i > 0 {
                let mut upstream = delta.dot(&self.layers[i].weights.t());
                // input of layer i is relu output of layer i - 1
                Zip::from(&mut upstream)
                    .and(input)
                    .for_each(|d, &act| {
                        if act <= T::zero() {
                            *d = T::zero();
                        }
                    });
                delta = upstream;
            }
        }
        Ok(loss)
    }

    /// Gradient of the mean cross-entropy over the batch, in flatten order.
    pub fn gradient(&self, x: ArrayView2<T>, labels: &[u8]) -> Result<Vec<T>> {
        let mut g = Self::zeros(&self.dims());
        self.backward_into(x, labels, &mut g)?;
        Ok(g.flatten())
    }

    /// Mean cross-entropy over the batch.
    pub fn mean_loss(&self, x: ArrayView2<T>, labels: &[u8]) -> Result<T> {
        let z = self.logits(x)?;
        let total = z
            .axis_iter(Axis(0))
            .zip(labels)
            .map(|(row, &l)| cross_entropy(row.as_slice().expect("standard layout"), l as usize))
            .fold(T::zero(), |a, b| a + b);
        Ok(total / T::of(labels.len() as f64))
    }

    /// `self <- self - lr * grads`.
    pub fn sgd_step(&mut self, grads: &Mlp<T>, lr: T) {
        for (l, g) in self.layers.iter_mut().zip(&grads.layers) {
            l.weights.scaled_add(-lr, &g.weights);
            l.bias.scaled_add(-lr, &g.bias);
        }
    }
}

// A slice view is handy for batched evaluation over large sets.
pub(crate) fn rows<T>(x: &Array2<T>, start: usize, end: usize) -> ArrayView2<'_, T> {
    x.slice(s![start..end, ..])
}
