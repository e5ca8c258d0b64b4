use ndarray::Array2;
use rand::seq::SliceRandom;

use super::mlp::{rows, Mlp};
use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Local training and federation hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs_per_round: usize,
    pub rounds: usize,
    pub n_agents: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// FedAvg weights; `None` means uniform.
    pub agg_weights: Option<Vec<f64>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_per_round: 1,
            rounds: 60,
            n_agents: 4,
            learning_rate: 0.04,
            batch_size: 64,
            seed: 0,
            agg_weights: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 || self.batch_size == 0 || self.epochs_per_round == 0 {
            return Err(Error::Config(
                "n_agents, batch_size and epochs_per_round must be positive".into(),
            ));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate = {} must be a non-negative number",
                self.learning_rate
            )));
        }
        let w = self.weights();
        if w.len() != self.n_agents || w.iter().any(|&a| a.is_nan() || a <= 0.0) {
            return Err(Error::Config("aggregation weights must be positive, one per agent".into()));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("aggregation weights must sum to 1".into()));
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.agg_weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.n_agents as f64; self.n_agents])
    }
}

/// Runs `epochs_per_round` passes of mini-batch SGD over `data`.
///
/// Batches are drawn from a shuffle seeded by `(cfg.seed, round, agent)`.
/// Returns the mean per-sample training loss seen during the pass(es).
pub fn local_train<T: Real>(
    model: &mut Mlp<T>,
    data: &Dataset,
    cfg: &TrainConfig,
    round: u64,
    agent: usize,
) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::domain("local training needs data"));
    }
    let width = data.images().ncols();
    let lr = T::of(cfg.learning_rate);
    let mut grads = Mlp::zeros(&model.dims());
    let mut batch = Array2::<T>::zeros((cfg.batch_size, width));
    let mut labels = Vec::with_capacity(cfg.batch_size);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut total_loss = 0.0;
    let mut seen = 0usize;

    for epoch in 0..cfg.epochs_per_round {
        let mut rng = rng::stream(cfg.seed, &[rng::DOMAIN_TRAIN, round, agent as u64, epoch as u64]);
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            labels.clear();
            for (r, &i) in chunk.iter().enumerate() {
                batch
                    .row_mut(r)
                    .iter_mut()
                    .zip(data.images().row(i))
                    .for_each(|(dst, &src)| *dst = T::of(src));
                labels.push(data.labels()[i]);
            }
            let loss = model.backward_into(rows(&batch, 0, chunk.len()), &labels, &mut grads)?;
            model.sgd_step(&grads, lr);
            total_loss += loss.to_f64_lossy();
            seen += chunk.len();
        }
    }
    Ok(total_loss / seen as f64)
}

/// Fraction of correctly classified samples, evaluated in blocks.
pub fn accuracy<T: Real>(model: &Mlp<T>, data: &Dataset) -> Result<f64> {
    const BLOCK: usize = 2500;
    if data.is_empty() {
        return Err(Error::domain("accuracy of an empty dataset"));
    }
    let mut correct = 0usize;
    let mut start = 0;
    while start < data.len() {
        let end = (start + BLOCK).min(data.len());
        let x = rows(data.images(), start, end).mapv(T::of);
        let z = model.logits(x.view())?;
        for (row, &label) in z.outer_iter().zip(&data.labels()[start..end]) {
            // first maximum wins
            let mut best = 0;
            for k in 1..row.len() {
                if row[k] > row[best] {
                    best = k;
                }
            }
            correct += usize::from(best == label as usize);
        }
        start = end;
    }
    Ok(correct as f64 / data.len() as f64)
}
