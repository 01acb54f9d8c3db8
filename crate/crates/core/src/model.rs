//! Reference probability providers over hashed features.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::types::{Label, Prediction};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// A differentiable binary classifier with a flat parameter vector.
///
/// The training engine only talks to models through this trait, so any
/// provider exposing `p_vul` and a BCE gradient can be scheduled.
pub trait ProbabilityModel {
    fn input_dim(&self) -> usize;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];

    /// Positive-class probability.
    fn p_vul(&self, x: &FeatureVector) -> Result<f64>;

    /// Adds `scale * d bce(p_vul(x), label) / d theta` into `grad`.
    fn accumulate_gradient(
        &self,
        x: &FeatureVector,
        label: Label,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<()>;

    fn predict(&self, x: &FeatureVector) -> Result<Prediction> {
        Prediction::from_p_vul(self.p_vul(x)?)
    }

    fn gradient(&self, x: &FeatureVector, label: Label) -> Result<Vec<f64>> {
        let mut g = vec![0.0; self.params().len()];
        self.accumulate_gradient(x, label, 1.0, &mut g)?;
        Ok(g)
    }

    fn check_dim(&self, x: &FeatureVector) -> Result<()> {
        if x.dimension != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.dimension,
            });
        }
        Ok(())
    }
}

/// `p = sigmoid(w . x + b)`; parameters laid out as `[w.., b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    dim: usize,
    params: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            dim,
            params: vec![0.0; dim + 1],
        }
    }

    /// Weights uniform in `±1/sqrt(dim)`, bias zero.
    pub fn init<R: Rng>(dim: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (dim as f64).sqrt();
        let mut params: Vec<f64> = (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        params.push(0.0);
        LinearModel { dim, params }
    }

    pub fn from_params(dim: usize, params: Vec<f64>) -> Result<Self> {
        if params.len() != dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: params.len(),
            });
        }
        Ok(LinearModel { dim, params })
    }

    pub fn logit(&self, x: &FeatureVector) -> Result<f64> {
        self.check_dim(x)?;
        Ok(x.dot(&self.params[..self.dim]) + self.params[self.dim])
    }
}

impl ProbabilityModel for LinearModel {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn params(&self) -> &[f64] {
        &self.params
    }
    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn p_vul(&self, x: &FeatureVector) -> Result<f64> {
        Ok(sigmoid(self.logit(x)?))
    }

    fn accumulate_gradient(
        &self,
        x: &FeatureVector,
        label: Label,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        let err = (self.p_vul(x)? - f64::from(label)) * scale;
        for &(i, v) in &x.entries {
            grad[i as usize] += err * v;
        }
        grad[self.dim] += err;
        Ok(())
    }
}

/// One tanh hidden layer and a sigmoid output.
///
/// Layout: `W1` (hidden x dim, row-major), `b1` (hidden), `w2` (hidden), `b2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    dim: usize,
    hidden: usize,
    params: Vec<f64>,
}

impl MlpModel {
    pub fn init<R: Rng>(dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut params = Vec::with_capacity(Self::param_count(dim, hidden));
        let b1 = 1.0 / (dim as f64).sqrt();
        params.extend((0..hidden * dim).map(|_| rng.gen_range(-b1..=b1)));
        params.extend(std::iter::repeat_n(0.0, hidden));
        let b2 = 1.0 / (hidden as f64).sqrt();
        params.extend((0..hidden).map(|_| rng.gen_range(-b2..=b2)));
        params.push(0.0);
        MlpModel {
            dim,
            hidden,
            params,
        }
    }

    pub fn from_params(dim: usize, hidden: usize, params: Vec<f64>) -> Result<Self> {
        let expected = Self::param_count(dim, hidden);
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        Ok(MlpModel {
            dim,
            hidden,
            params,
        })
    }

    pub fn param_count(dim: usize, hidden: usize) -> usize {
        hidden * dim + 2 * hidden + 1
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.dim;
        (b1, b1 + self.hidden, b1 + 2 * self.hidden)
    }

    fn forward(&self, x: &FeatureVector) -> Result<(Vec<f64>, f64)> {
        self.check_dim(x)?;
        let (b1, w2, b2) = self.offsets();
        let h: Vec<f64> = (0..self.hidden)
            .map(|k| {
                let row = &self.params[k * self.dim..(k + 1) * self.dim];
                (x.dot(row) + self.params[b1 + k]).tanh()
            })
            .collect();
        let z = h
            .iter()
            .zip(&self.params[w2..w2 + self.hidden])
            .map(|(a, w)| a * w)
            .sum::<f64>()
            + self.params[b2];
        Ok((h, sigmoid(z)))
    }
}

impl ProbabilityModel for MlpModel {
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn params(&self) -> &[f64] {
        &self.params
    }
    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn p_vul(&self, x: &FeatureVector) -> Result<f64> {
        Ok(self.forward(x)?.1)
    }

    fn accumulate_gradient(
        &self,
        x: &FeatureVector,
        label: Label,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        let (h, p) = self.forward(x)?;
        let (b1, w2, b2) = self.offsets();
        let dz = (p - f64::from(label)) * scale;
        grad[b2] += dz;
        for k in 0..self.hidden {
            grad[w2 + k] += dz * h[k];
            let da = dz * self.params[w2 + k] * (1.0 - h[k] * h[k]);
            grad[b1 + k] += da;
            let row = k * self.dim;
            for &(i, v) in &x.entries {
                grad[row + i as usize] += da * v;
            }
        }
        Ok(())
    }
}

/// Which reference model to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
#[derive(Default)]
pub enum ModelSpec {
    #[default]
    Linear,
    Mlp {
        hidden: usize,
    },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Mlp { hidden: 0 } => Err(Error::config("model.hidden", "must be ≥ 1")),
            _ => Ok(()),
        }
    }

    pub fn init<R: Rng>(&self, dim: usize, rng: &mut R) -> ReferenceModel {
        match *self {
            ModelSpec::Linear => ReferenceModel::Linear(LinearModel::init(dim, rng)),
            ModelSpec::Mlp { hidden } => ReferenceModel::Mlp(MlpModel::init(dim, hidden, rng)),
        }
    }

    pub fn from_params(&self, dim: usize, params: Vec<f64>) -> Result<ReferenceModel> {
        Ok(match *self {
            ModelSpec::Linear => ReferenceModel::Linear(LinearModel::from_params(dim, params)?),
            ModelSpec::Mlp { hidden } => {
                ReferenceModel::Mlp(MlpModel::from_params(dim, hidden, params)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceModel {
    Linear(LinearModel),
    Mlp(MlpModel),
}

impl ProbabilityModel for ReferenceModel {
    fn input_dim(&self) -> usize {
        match self {
            ReferenceModel::Linear(m) => m.input_dim(),
            ReferenceModel::Mlp(m) => m.input_dim(),
        }
    }
    fn params(&self) -> &[f64] {
        match self {
            ReferenceModel::Linear(m) => m.params(),
            ReferenceModel::Mlp(m) => m.params(),
        }
    }
    fn params_mut(&mut self) -> &mut [f64] {
        match self {
            ReferenceModel::Linear(m) => m.params_mut(),
            ReferenceModel::Mlp(m) => m.params_mut(),
        }
    }
    fn p_vul(&self, x: &FeatureVector) -> Result<f64> {
        match self {
            ReferenceModel::Linear(m) => m.p_vul(x),
            ReferenceModel::Mlp(m) => m.p_vul(x),
        }
    }
    fn accumulate_gradient(
        &self,
        x: &FeatureVector,
        label: Label,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        match self {
            ReferenceModel::Linear(m) => m.accumulate_gradient(x, label, scale, grad),
            ReferenceModel::Mlp(m) => m.accumulate_gradient(x, label, scale, grad),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fv(dim: usize, e: &[(u32, f64)]) -> FeatureVector {
        FeatureVector::from_entries(dim, e.to_vec())
    }

    #[test]
    fn zero_model_is_half() {
        let m = LinearModel::zeros(4);
        let p = m.predict(&fv(4, &[(1, 0.6), (3, 0.8)])).unwrap();
        assert_eq!(p.p_vul, 0.5);
        assert_eq!(p.p_safe, 0.5);
    }

    #[test]
    fn logit_ln9_gives_point_nine() {
        let mut m = LinearModel::zeros(2);
        m.params_mut()[2] = 9f64.ln();
        let p = m.p_vul(&fv(2, &[])).unwrap();
        assert!((p - 0.9).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let m = LinearModel::zeros(4);
        assert!(matches!(
            m.p_vul(&fv(8, &[])),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 8
            })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp = MlpModel::init(4, 3, &mut rng);
        assert!(mlp.gradient(&fv(2, &[]), 1).is_err());
    }

    #[test]
    fn linear_bias_gradient() {
        let mut m = LinearModel::zeros(2);
        m.params_mut()[2] = 9f64.ln();
        let g = m.gradient(&fv(2, &[(0, 1.0)]), 1).unwrap();
        assert!((g[2] + 0.1).abs() < 1e-12);
        assert!((g[0] + 0.1).abs() < 1e-12);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn gradient_vanishes_at_optimum() {
        // p == y exactly is only reachable in the saturated limit
        let mut m = LinearModel::zeros(1);
        m.params_mut()[1] = 800.0;
        let g = m.gradient(&fv(1, &[(0, 1.0)]), 1).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn init_is_scaled_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = LinearModel::init(100, &mut rng);
        assert!(m.params()[..100].iter().all(|w| w.abs() <= 0.1));
        assert_eq!(m.params()[100], 0.0);
        let mlp = MlpModel::init(16, 4, &mut rng);
        assert_eq!(mlp.params().len(), MlpModel::param_count(16, 4));
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(0.0), 0.5);
    }
}
