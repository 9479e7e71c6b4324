use crate::error::{Error, Result};

use super::tensor::Tensor;

/// Probability clip for cross entropy.
pub const CCE_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossFn {
    Mse,
    MeanAbsoluteError,
    /// Expects probabilities (e.g. softmax outputs) and one-hot targets.
    CategoricalCrossEntropy,
    /// Targets in {−1, +1}.
    SquaredHinge,
}

fn check(pred: &Tensor, target: &Tensor) -> Result<()> {
    if pred.shape() != target.shape() || pred.shape().len() != 2 {
        return Err(Error::Shape(format!(
            "prediction {:?} vs target {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    Ok(())
}

impl LossFn {
    /// Mean loss over the batch.
    pub fn forward(self, pred: &Tensor, target: &Tensor) -> Result<f64> {
        check(pred, target)?;
        let n = pred.data().len().max(1) as f64;
        let b = pred.rows().max(1) as f64;
        let pairs = pred.data().iter().zip(target.data());
        Ok(match self {
            LossFn::Mse => pairs.map(|(p, t)| (p - t).powi(2)).sum::<f64>() / n,
            LossFn::MeanAbsoluteError => pairs.map(|(p, t)| (p - t).abs()).sum::<f64>() / n,
            LossFn::CategoricalCrossEntropy => {
                -pairs
                    .map(|(p, t)| t * p.clamp(CCE_EPS, 1.0 - CCE_EPS).ln())
                    .sum::<f64>()
                    / b
            }
            LossFn::SquaredHinge => {
                pairs.map(|(p, t)| (1.0 - p * t).max(0.0).powi(2)).sum::<f64>() / n
            }
        })
    }

    /// `dL/dpred`.
    pub fn backward(self, pred: &Tensor, target: &Tensor) -> Result<Tensor> {
        check(pred, target)?;
        let n = pred.data().len().max(1) as f64;
        let b = pred.rows().max(1) as f64;
        let data = pred
            .data()
            .iter()
            .zip(target.data())
            .map(|(&p, &t)| match self {
                LossFn::Mse => 2.0 * (p - t) / n,
                LossFn::MeanAbsoluteError => {
                    if p == t {
                        0.0
                    } else {
                        (p - t).signum() / n
                    }
                }
                LossFn::CategoricalCrossEntropy => {
                    if p <= CCE_EPS || p >= 1.0 - CCE_EPS {
                        0.0
                    } else {
                        -t / p / b
                    }
                }
                LossFn::SquaredHinge => {
                    let m = 1.0 - p * t;
                    if m > 0.0 {
                        -2.0 * m * t / n
                    } else {
                        0.0
                    }
                }
            })
            .collect();
        Tensor::new(pred.shape().to_vec(), data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_entropy_is_nonnegative() {
        let p = Tensor::from_rows(&[vec![0.2, 0.8], vec![1.0, 0.0]]).unwrap();
        let t = Tensor::from_rows(&[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let l = LossFn::CategoricalCrossEntropy.forward(&p, &t).unwrap();
        assert!(l >= 0.0 && l.is_finite());
    }

    #[test]
    fn mse_matches_hand_value() {
        let p = Tensor::from_rows(&[vec![1.0], vec![3.0]]).unwrap();
        let t = Tensor::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(LossFn::Mse.forward(&p, &t).unwrap(), 2.5);
    }
}
