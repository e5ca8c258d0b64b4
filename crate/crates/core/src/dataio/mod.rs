//! MNIST loading and agent partitioning.

mod idx;
mod partition;

pub use idx::{images_to_idx, labels_to_idx, load_mnist, parse_idx, IdxData, MnistFiles};
pub use partition::{partition_agents, pooled_test_set, AgentPartition};

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

pub const IMAGE_PIXELS: usize = 784;
pub const NUM_CLASSES: usize = 10;

/// Row-per-sample images in `[0, 1]` with their digit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    images: Array2<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(images: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if images.nrows() != labels.len() {
            return Err(Error::domain(format!(
                "{} images but {} labels",
                images.nrows(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
            return Err(Error::domain(format!("label {l} is not a digit")));
        }
        if images.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::domain("pixel values must lie in [0, 1]"));
        }
        Ok(Self { images, labels })
    }

    pub fn images(&self) -> &Array2<f64> {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            images: self.images.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Row-wise concatenation; all parts must share the image width.
    pub fn concat(parts: &[&Dataset]) -> Result<Dataset> {
        let views: Vec<_> = parts.iter().map(|d| d.images.view()).collect();
        let images = ndarray::concatenate(Axis(0), &views).map_err(|e| Error::domain(e.to_string()))?;
        let labels = parts.iter().flat_map(|d| d.labels.iter().copied()).collect();
        Ok(Dataset { images, labels })
    }

    /// Per-class counts.
    pub fn histogram(&self) -> [usize; NUM_CLASSES] {
        let mut h = [0; NUM_CLASSES];
        for &l in &self.labels {
            h[l as usize] += 1;
        }
        h
    }
}
