use rand::Rng;

use crate::error::{Error, Result};

use super::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    ReLU,
    Softmax,
    Sigmoid,
}

/// Row-wise softmax of a 2-D tensor.
pub fn softmax(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    for r in 0..x.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// `activation(x·W + b)` with `W: [in, out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

/// Parameter gradients of a dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        if weights.shape().len() != 2 || bias.shape() != [weights.cols()] {
            return Err(Error::Shape(format!(
                "weights {:?} with bias {:?}",
                weights.shape(),
                bias.shape()
            )));
        }
        if !weights.is_finite() || !bias.is_finite() {
            return Err(Error::NonFinite("dense layer parameters".into()));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights and zero bias.
    pub fn glorot(inputs: usize, outputs: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let w = (0..inputs * outputs)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        DenseLayer {
            weights: Tensor::new(vec![inputs, outputs], w).unwrap(),
            bias: Tensor::zeros(vec![outputs]),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.rows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn num_params(&self) -> usize {
        self.weights.data().len() + self.bias.data().len()
    }

    fn affine(&self, x: &Tensor) -> Result<Tensor> {
        if x.shape().len() != 2 || x.cols() != self.inputs() {
            return Err(Error::Shape(format!(
                "dense layer expects [_, {}], got {:?}",
                self.inputs(),
                x.shape()
            )));
        }
        let (b, o) = (x.rows(), self.outputs());
        let mut z = Tensor::zeros(vec![b, o]);
        for r in 0..b {
            let out = z.row_mut(r);
            out.copy_from_slice(self.bias.data());
            for (i, &xi) in x.row(r).iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                for (j, w) in self.weights.row(i).iter().enumerate() {
                    out[j] += xi * w;
                }
            }
        }
        Ok(z)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut z = self.affine(x)?;
        match self.activation {
            Activation::Linear => {}
            Activation::ReLU => z.data_mut().iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Sigmoid => z
                .data_mut()
                .iter_mut()
                .for_each(|v| *v = 1.0 / (1.0 + (-*v).exp())),
            Activation::Softmax => z = softmax(&z),
        }
        Ok(z)
    }

    /// Gradients given the forward input `x`, forward output `y` and `dL/dy`.
    pub fn backward(&self, x: &Tensor, y: &Tensor, upstream: &Tensor) -> Result<DenseGrads> {
        if y.shape() != upstream.shape() {
            return Err(Error::Shape(format!(
                "upstream {:?} vs output {:?}",
                upstream.shape(),
                y.shape()
            )));
        }
        let (b, o) = (y.rows(), y.cols());
        // dL/dz
        let mut dz = upstream.clone();
        match self.activation {
            Activation::Linear => {}
            Activation::ReLU => {
                for (d, &v) in dz.data_mut().iter_mut().zip(y.data()) {
                    if v <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Sigmoid => {
                for (d, &v) in dz.data_mut().iter_mut().zip(y.data()) {
                    *d *= v * (1.0 - v);
                }
            }
            Activation::Softmax => {
                for r in 0..b {
                    let s = y.row(r);
                    let g = upstream.row(r);
                    let dot: f64 = s.iter().zip(g).map(|(a, b)| a * b).sum();
                    let out = dz.row_mut(r);
                    for j in 0..o {
                        out[j] = s[j] * (g[j] - dot);
                    }
                }
            }
        }
        let mut dw = Tensor::zeros(vec![self.inputs(), o]);
        let mut db = Tensor::zeros(vec![o]);
        let mut dx = Tensor::zeros(vec![b, self.inputs()]);
        for r in 0..b {
            let dzr = dz.row(r);
            for (j, &d) in dzr.iter().enumerate() {
                db.data_mut()[j] += d;
            }
            for (i, &xi) in x.row(r).iter().enumerate() {
                let wrow = self.weights.row(i);
                let mut acc = 0.0;
                for j in 0..o {
                    acc += wrow[j] * dzr[j];
                }
                dx.set(r, i, acc);
                let dwrow = dw.row_mut(i);
                for j in 0..o {
                    dwrow[j] += xi * dzr[j];
                }
            }
        }
        Ok(DenseGrads {
            input: dx,
            weights: dw,
            bias: db,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_layer_passes_input() {
        let w = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let layer = DenseLayer::new(w, Tensor::zeros(vec![2]), Activation::Linear).unwrap();
        let x = Tensor::from_rows(&[vec![0.3, -2.0]]).unwrap();
        assert_eq!(layer.forward(&x).unwrap(), x);
    }

    #[test]
    fn softmax_of_zeros_is_uniform() {
        let s = softmax(&Tensor::from_rows(&[vec![0.0, 0.0]]).unwrap());
        assert_eq!(s.data(), &[0.5, 0.5]);
    }
}
