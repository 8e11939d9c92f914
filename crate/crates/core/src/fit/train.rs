use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConvolutionKernel, DeepLinearSsm};
use crate::sample::{eigenvalue, gaussian};
use crate::C64;

use super::gradient::kernel_gradient;

/// Largest eigenvalue modulus kept by the stability projection.
const RADIUS_CAP: f64 = 1.0 - 1e-6;
const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub steps: usize,
    pub seed: u64,
    pub init_scale: f64,
    pub stability_projection: bool,
    /// Keep every parameter real.
    pub real_params: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            steps: 20_000,
            seed: 0,
            init_scale: 0.5,
            stability_projection: true,
            real_params: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be positive".into()));
        }
        if !self.init_scale.is_finite() || self.init_scale <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "init_scale must be positive, got {}",
                self.init_scale
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: DeepLinearSsm,
    /// Loss before the first step and after each step.
    pub trace: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.trace.last().expect("trace holds the initial loss")
    }
}

/// Random starting point: eigenvalue moduli uniform in `[0.5, 0.95]` with
/// uniform phases, couplings Gaussian with scale `init_scale / sqrt(m)`.
pub fn init_model<R: Rng + ?Sized>(rng: &mut R, depth: usize, width: usize, config: &TrainConfig) -> Result<DeepLinearSsm> {
    if depth == 0 || width == 0 {
        return Err(Error::InvalidConfig("depth and width must be positive".into()));
    }
    let real = config.real_params;
    let scale = config.init_scale / (width as f64).sqrt();
    let mut diags = Vec::with_capacity(depth);
    let mut inputs = Vec::with_capacity(depth);
    for i in 0..depth {
        diags.push((0..width).map(|_| eigenvalue(rng, 0.5, 0.95, real)).collect());
        let n = if i == 0 { width } else { width * width };
        inputs.push((0..n).map(|_| gaussian(rng, scale, real)).collect());
    }
    let read_out = (0..width).map(|_| gaussian(rng, scale, real)).collect();
    DeepLinearSsm::from_parts(diags, inputs, read_out)
}

/// Full-batch gradient descent on the kernel squared error.
pub fn train(init: &DeepLinearSsm, target: &ConvolutionKernel, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut model = init.clone();
    let (initial, mut grad) = kernel_gradient(&model, target)?;
    let mut trace = Vec::with_capacity(config.steps + 1);
    trace.push(initial);
    if config.learning_rate == 0.0 {
        trace.resize(config.steps + 1, initial);
        return Ok(TrainOutcome { model, trace });
    }
    let lr = C64::new(config.learning_rate, 0.0);
    for step in 1..=config.steps {
        if config.real_params {
            grad.make_real();
        }
        for (i, layer) in model.layers.iter_mut().enumerate() {
            layer.state_diag -= &grad.state_diag[i] * lr;
            layer.input -= &grad.input[i] * lr;
            if config.stability_projection {
                for a in layer.state_diag.iter_mut() {
                    let r = a.norm();
                    if r > RADIUS_CAP {
                        *a *= RADIUS_CAP / r;
                    }
                }
            }
        }
        model.read_out -= &grad.read_out * lr;

        let diverged = |loss: f64| !loss.is_finite() || loss > DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE);
        let (loss, g) = match kernel_gradient(&model, target) {
            Ok(v) => v,
            Err(Error::NonFinite(_)) => (f64::INFINITY, grad.clone()),
            Err(e) => return Err(e),
        };
        if diverged(loss) {
            return Err(Error::DivergenceDetected { step, loss, initial });
        }
        trace.push(loss);
        grad = g;
        if step % 1000 == 0 {
            debug!("step {step}: loss {loss:.3e}");
        }
    }
    Ok(TrainOutcome { model, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::impulse_target;
    use crate::sample::stream;

    #[test]
    fn zero_learning_rate_is_identity() {
        let config = TrainConfig {
            learning_rate: 0.0,
            steps: 5,
            ..TrainConfig::default()
        };
        let init = init_model(&mut stream(0, 1), 2, 3, &config).unwrap();
        let target = impulse_target(2, 16).unwrap().kernel;
        let out = train(&init, &target, &config).unwrap();
        assert_eq!(out.model, init);
        assert_eq!(out.trace.len(), 6);
        assert!(out.trace.iter().all(|&l| l == out.trace[0]));
    }

    #[test]
    fn absurd_learning_rate_diverges() {
        let config = TrainConfig {
            learning_rate: 1e3,
            steps: 50,
            ..TrainConfig::default()
        };
        let init = init_model(&mut stream(0, 1), 1, 3, &config).unwrap();
        let target = impulse_target(2, 16).unwrap().kernel;
        assert!(matches!(
            train(&init, &target, &config),
            Err(Error::DivergenceDetected { .. })
        ));
    }

    #[test]
    fn fits_a_short_impulse() {
        let config = TrainConfig::default();
        let init = init_model(&mut stream(config.seed, 1), 1, 5, &config).unwrap();
        let target = impulse_target(2, 32).unwrap().kernel;
        let out = train(&init, &target, &config).unwrap();
        assert!(out.final_loss() < 1e-3, "{}", out.final_loss());
        assert!(out.model.spectral_radii()[0] < 1.0);
    }

    #[test]
    fn init_respects_ranges() {
        let config = TrainConfig {
            real_params: true,
            ..TrainConfig::default()
        };
        let model = init_model(&mut stream(9, 0), 3, 4, &config).unwrap();
        assert!(model.is_real());
        for layer in model.layers() {
            assert!(layer.state_diag.iter().all(|a| (0.5..=0.95).contains(&a.norm())));
        }
    }

    #[test]
    fn invalid_configs() {
        let bad = TrainConfig {
            learning_rate: -1.0,
            ..TrainConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let json: TrainConfig = serde_json::from_str(r#"{"steps": 10}"#).unwrap();
        assert_eq!(json.steps, 10);
        assert_eq!(json.learning_rate, TrainConfig::default().learning_rate);
    }
}
