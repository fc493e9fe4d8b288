//! Loss functions: orthogonal projection loss and softmax cross-entropy.

pub mod ce;
pub mod opl;

use serde::{Deserialize, Serialize};

/// Class labels for one mini-batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelBatch {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelBatch {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Self {
        assert!(!labels.is_empty(), "label batch must not be empty");
        assert!(num_classes > 0);
        for (i, &y) in labels.iter().enumerate() {
            assert!(
                y < num_classes,
                "label {y} at index {i} out of range for {num_classes} classes"
            );
        }
        Self { labels, num_classes }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false // construction rejects empty batches
    }

    #[inline]
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    #[inline]
    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }
}

/// Weights for the combined objective `ce + lambda * opl`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CombinedLossConfig {
    /// Weight of the orthogonality term in the total objective.
    pub lambda: f64,
    /// Weight of the inter-class term inside the orthogonality loss.
    pub gamma: f64,
}

impl Default for CombinedLossConfig {
    fn default() -> Self {
        // Best held-out pair from the lambda/gamma grid search.
        Self { lambda: 1.0, gamma: 0.5 }
    }
}

impl CombinedLossConfig {
    pub fn validate(&self) {
        assert!(
            self.lambda.is_finite() && self.lambda >= 0.0,
            "lambda must be finite and non-negative"
        );
        assert!(
            self.gamma.is_finite() && self.gamma >= 0.0,
            "gamma must be finite and non-negative"
        );
    }
}

/// Total objective value for one batch.
pub fn combined_loss(ce: f64, opl: &opl::OplOutput, cfg: &CombinedLossConfig) -> f64 {
    ce + cfg.lambda * opl.loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::opl::{OplOutput, OplVariant};

    #[test]
    fn combined_loss_is_weighted_sum() {
        let opl = OplOutput {
            s: 0.5,
            d: 0.25,
            loss: 0.25,
            gamma: 1.0,
            variant: OplVariant::PerPairAbs,
        };
        let cfg = CombinedLossConfig { lambda: 1.0, gamma: 1.0 };
        assert_eq!(combined_loss(0.5, &opl, &cfg), 0.75);

        let off = CombinedLossConfig { lambda: 0.0, gamma: 1.0 };
        assert_eq!(combined_loss(0.5, &opl, &off), 0.5);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn label_batch_rejects_out_of_range() {
        LabelBatch::new(vec![0, 3], 3);
    }
}
