//! Affine cost predictor and the Adam update used to train it.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LpError, Result};

/// Affine predictor `c_hat = W x + bias` from features to cost coefficients.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl LinearModel {
    pub fn zeros(n_costs: usize, n_features: usize) -> Self {
        Self {
            weights: Array2::zeros((n_costs, n_features)),
            bias: Array1::zeros(n_costs),
        }
    }

    /// Uniform init on `[-1/sqrt(p), 1/sqrt(p)]`, so predictions start away
    /// from the zero vector.
    pub fn init_uniform<R: Rng>(n_costs: usize, n_features: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (n_features as f64).sqrt();
        Self {
            weights: Array2::from_shape_fn((n_costs, n_features), |_| {
                rng.random_range(-bound..bound)
            }),
            bias: Array1::from_shape_fn(n_costs, |_| rng.random_range(-bound..bound)),
        }
    }

    pub fn n_costs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.n_features() {
            return Err(LpError::ShapeMismatch {
                context: "feature vector",
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(self.weights.dot(&x) + &self.bias)
    }
}

/// Bias-corrected Adam state over the model's two parameter tensors.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    m_weights: Array2<f64>,
    v_weights: Array2<f64>,
    m_bias: Array1<f64>,
    v_bias: Array1<f64>,
}

impl AdamState {
    pub fn new(model: &LinearModel, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m_weights: Array2::zeros(model.weights.dim()),
            v_weights: Array2::zeros(model.weights.dim()),
            m_bias: Array1::zeros(model.bias.dim()),
            v_bias: Array1::zeros(model.bias.dim()),
        }
    }
}

/// One Adam step on the model, in place. Gradients must be finite.
pub fn adam_step(
    model: &mut LinearModel,
    grad_weights: &Array2<f64>,
    grad_bias: &Array1<f64>,
    state: &mut AdamState,
) -> Result<()> {
    if grad_weights.dim() != model.weights.dim() || grad_bias.dim() != model.bias.dim() {
        return Err(LpError::ShapeMismatch {
            context: "adam gradient shapes",
            expected: model.weights.len(),
            got: grad_weights.len(),
        });
    }
    if grad_weights.iter().chain(grad_bias.iter()).any(|v| !v.is_finite()) {
        return Err(LpError::NonFinite {
            context: "gradient passed to adam_step".to_string(),
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps, lr) = (state.beta1, state.beta2, state.eps, state.lr);

    let mut update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *param -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for ((p, &g), (m, v)) in model
        .weights
        .iter_mut()
        .zip(grad_weights.iter())
        .zip(state.m_weights.iter_mut().zip(state.v_weights.iter_mut()))
    {
        update(p, g, m, v);
    }
    for ((p, &g), (m, v)) in model
        .bias
        .iter_mut()
        .zip(grad_bias.iter())
        .zip(state.m_bias.iter_mut().zip(state.v_bias.iter_mut()))
    {
        update(p, g, m, v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn predict_constant_and_identity() {
        let model = LinearModel {
            weights: Array2::zeros((3, 2)),
            bias: array![1.0, 2.0, 3.0],
        };
        assert_eq!(
            model.predict(array![5.0, -1.0].view()).unwrap(),
            array![1.0, 2.0, 3.0]
        );

        let eye = LinearModel {
            weights: Array2::eye(3),
            bias: Array1::zeros(3),
        };
        assert_eq!(
            eye.predict(array![1.0, 0.0, 0.0].view()).unwrap(),
            array![1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut model = LinearModel::init_uniform(2, 2, &mut ChaCha8Rng::seed_from_u64(1));
        let before = model.clone();
        let mut state = AdamState::new(&model, 0.01);
        adam_step(
            &mut model,
            &Array2::zeros((2, 2)),
            &Array1::zeros(2),
            &mut state,
        )
        .unwrap();
        assert_eq!(model.weights, before.weights);
        assert_eq!(model.bias, before.bias);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_is_signed_lr() {
        // From zero state, one step moves each parameter by
        // -lr * g / (|g| + tiny), i.e. essentially -lr * sign(g).
        let mut model = LinearModel::zeros(1, 1);
        let mut state = AdamState::new(&model, 0.01);
        let g = 0.37;
        adam_step(
            &mut model,
            &array![[g]],
            &array![g],
            &mut state,
        )
        .unwrap();
        let expected = -0.01 * g / (g.abs() + 1e-8 * (1.0 - 0.999f64).sqrt().recip() * 0.0 + 1e-8);
        // Direct evaluation of the bias-corrected formulas at t = 1.
        let m_hat = (1.0 - 0.9) * g / (1.0 - 0.9);
        let v_hat = (1.0 - 0.999) * g * g / (1.0 - 0.999);
        let exact = -0.01 * m_hat / (v_hat.sqrt() + 1e-8);
        assert!((model.weights[[0, 0]] - exact).abs() < 1e-15);
        assert!((model.bias[0] - exact).abs() < 1e-15);
        assert!((exact - expected).abs() < 1e-6);
    }

    #[test]
    fn constant_gradient_approaches_lr_step() {
        let mut model = LinearModel::zeros(1, 1);
        let mut state = AdamState::new(&model, 0.01);
        let g = array![2.5];
        let gw = array![[2.5]];
        let mut prev = 0.0;
        for _ in 0..200 {
            prev = model.bias[0];
            adam_step(&mut model, &gw, &g, &mut state).unwrap();
        }
        let step = (model.bias[0] - prev).abs();
        assert!((step - 0.01).abs() < 1e-3, "asymptotic step {step}");
        assert!(model.bias[0] < 0.0);
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let mut model = LinearModel::zeros(1, 1);
        let mut state = AdamState::new(&model, 0.01);
        assert!(matches!(
            adam_step(&mut model, &array![[f64::NAN]], &array![0.0], &mut state),
            Err(LpError::NonFinite { .. })
        ));
    }
}
