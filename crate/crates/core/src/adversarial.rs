//! Adversarial samples in coordinate space.
//!
//! Starting from a batch of normalised coordinates, each iteration moves every
//! perturbable coordinate by `α · sign(∂L/∂x)` and then clips the cumulative
//! perturbation, first to `[−ε, ε]` and then to the domain. Targets stay those
//! of the original points. The time coordinate is never perturbed.
//!
//! The budget is `ε = κ · Δx` with `Δx` the grid spacing in normalised units.
//!
//! ```
//! use smartpde::adversarial::{clip_physical, AttackConfig};
//! use smartpde::autodiff::Tensor;
//!
//! let cfg = AttackConfig::new(0.01, 0.1, 0.1, 5, vec![(0.0, 1.0); 2], vec![true, false]).unwrap();
//! let orig = Tensor::from_rows(&[vec![0.5, 0.3]]).unwrap();
//! let cand = Tensor::from_rows(&[vec![0.53, 0.9]]).unwrap();
//! let out = clip_physical(&cand, &orig, &cfg).unwrap();
//! assert!((out.get(0, 0) - 0.51).abs() < 1e-15);
//! assert_eq!(out.get(0, 1), 0.3);
//! ```

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor};
use crate::error::{shape_err, Error, Result};
use crate::pde::Dataset;
use crate::surrogate::{loss_on_tape, per_sample_loss, LossKind, ModelParams};

/// Attack settings as they appear in experiment configs; turned into an
/// [`AttackConfig`] once the grid spacing is known.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSettings {
    pub kappa: f64,
    pub iterations: usize,
    /// Step size in normalised units; `ε / iterations` when absent.
    pub alpha: Option<f64>,
}

impl Default for AttackSettings {
    fn default() -> Self {
        Self { kappa: AttackConfig::DEFAULT_KAPPA, iterations: AttackConfig::DEFAULT_ITERATIONS, alpha: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub alpha: f64,
    pub kappa: f64,
    /// Grid spacing in normalised units that `kappa` multiplies.
    pub dx: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub domain_bounds: Vec<(f64, f64)>,
    pub perturb_mask: Vec<bool>,
}

impl AttackConfig {
    pub const DEFAULT_KAPPA: f64 = 0.08;
    pub const DEFAULT_ITERATIONS: usize = 5;

    /// `epsilon = kappa · dx`. `kappa = 0`, `alpha = 0` and `iterations = 0`
    /// are accepted and give the identity attack.
    pub fn new(
        alpha: f64,
        kappa: f64,
        dx: f64,
        iterations: usize,
        domain_bounds: Vec<(f64, f64)>,
        perturb_mask: Vec<bool>,
    ) -> Result<Self> {
        let config =
            Self { alpha, kappa, dx, epsilon: kappa * dx, iterations, domain_bounds, perturb_mask };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.kappa) {
            return Err(Error::InvalidConfig(format!("kappa must lie in [0, 1), got {}", self.kappa)));
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return Err(Error::InvalidConfig(format!("grid spacing must be > 0, got {}", self.dx)));
        }
        if self.domain_bounds.len() != self.perturb_mask.len() {
            return Err(Error::InvalidConfig("one domain bound per input dimension".into()));
        }
        if self.domain_bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::InvalidConfig("domain bounds need min <= max".into()));
        }
        Ok(())
    }

    /// Additional requirements for attacks used during training.
    pub fn validate_for_training(&self) -> Result<()> {
        self.validate()?;
        if !(self.kappa > 0.0) || !(self.alpha > 0.0) || self.iterations == 0 {
            return Err(Error::InvalidConfig(
                "training attacks need kappa > 0, alpha > 0 and at least one iteration".into(),
            ));
        }
        Ok(())
    }

    /// Config for a dataset's normalised coordinates: bounds are `[0, 1]` per
    /// dimension, `dx` is the smallest normalised spacing among the spatial
    /// dimensions, and only spatial dimensions are perturbed.
    pub fn for_dataset(settings: &AttackSettings, dataset: &Dataset) -> Result<Self> {
        Self::for_dataset_with_kappa(settings, settings.kappa, dataset)
    }

    pub fn for_dataset_with_kappa(settings: &AttackSettings, kappa: f64, dataset: &Dataset) -> Result<Self> {
        let spacing = dataset.normalized_spacing()?;
        let dx = spacing
            .iter()
            .zip(&dataset.spatial_mask)
            .filter(|(_, &m)| m)
            .map(|(d, _)| *d)
            .fold(f64::INFINITY, f64::min);
        if !dx.is_finite() {
            return Err(Error::InvalidConfig("dataset has no spatial dimension".into()));
        }
        let epsilon = kappa * dx;
        let alpha = match settings.alpha {
            Some(a) => a,
            None if settings.iterations == 0 => 0.0,
            None => epsilon / settings.iterations as f64,
        };
        Self::new(
            alpha,
            kappa,
            dx,
            settings.iterations,
            vec![(0.0, 1.0); dataset.input_dim()],
            dataset.spatial_mask.clone(),
        )
    }

    fn check_dims(&self, coords: &Tensor) -> Result<()> {
        if coords.rank() != 2 || coords.cols() != self.perturb_mask.len() {
            return Err(shape_err(format!(
                "attack config has {} dimensions, coordinates are {:?}",
                self.perturb_mask.len(),
                coords.shape()
            )));
        }
        Ok(())
    }
}

/// Gradient of the batch-mean loss with respect to every coordinate.
pub fn input_gradient(
    params: &ModelParams,
    coords: &Tensor,
    targets: &Tensor,
    loss_kind: LossKind,
) -> Result<Tensor> {
    let mut tape = Tape::new();
    let vars = params.register(&mut tape, false);
    let x = tape.leaf(coords.clone(), true);
    let y = tape.constant(targets.clone());
    let pred = params.forward(&mut tape, &vars, x)?;
    let loss = loss_on_tape(&mut tape, pred, y, loss_kind)?;
    let mut grads = tape.backward(loss)?;
    Ok(grads.take(x).expect("coordinate leaf requires grad"))
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `x + α · sign(grad)` on perturbable dimensions; `sign(0) = 0`.
pub fn attack_step(coords: &Tensor, grad: &Tensor, config: &AttackConfig) -> Result<Tensor> {
    config.check_dims(coords)?;
    if coords.shape() != grad.shape() {
        return Err(shape_err(format!("coords {:?} vs gradient {:?}", coords.shape(), grad.shape())));
    }
    let d = coords.cols();
    let mut out = coords.clone();
    for (i, (x, g)) in out.data_mut().iter_mut().zip(grad.data()).enumerate() {
        if config.perturb_mask[i % d] {
            *x += config.alpha * sign(*g);
        }
    }
    Ok(out)
}

/// Clips the cumulative perturbation to `[−ε, ε]`, then the result to the
/// domain; masked dimensions are copied from `original`.
pub fn clip_physical(candidate: &Tensor, original: &Tensor, config: &AttackConfig) -> Result<Tensor> {
    config.check_dims(original)?;
    if candidate.shape() != original.shape() {
        return Err(shape_err(format!(
            "candidate {:?} vs original {:?}",
            candidate.shape(),
            original.shape()
        )));
    }
    let d = original.cols();
    let eps = config.epsilon;
    let data = candidate
        .data()
        .iter()
        .zip(original.data())
        .enumerate()
        .map(|(i, (&c, &o))| {
            let j = i % d;
            if !config.perturb_mask[j] {
                return o;
            }
            let (lo, hi) = config.domain_bounds[j];
            (o + (c - o).clamp(-eps, eps)).clamp(lo, hi)
        })
        .collect();
    Tensor::new(original.shape().to_vec(), data)
}

/// Original and attacked coordinates with per-sample losses against the
/// original targets.
#[derive(Clone, Debug, PartialEq)]
pub struct AdversarialBatch {
    pub original: Tensor,
    pub perturbed: Tensor,
    pub loss_before: Vec<f64>,
    pub loss_after: Vec<f64>,
}

impl AdversarialBatch {
    pub fn mean_loss_before(&self) -> f64 {
        mean(&self.loss_before)
    }

    pub fn mean_loss_after(&self) -> f64 {
        mean(&self.loss_after)
    }

    /// Checks the budget, domain and frozen-dimension invariants.
    ///
    /// The budget check allows for the rounding of `o + δ` in floating point.
    pub fn verify(&self, config: &AttackConfig) -> Result<()> {
        verify_perturbation(&self.original, &self.perturbed, config)
    }
}

/// Budget, domain and frozen-dimension checks for any perturbed batch.
pub fn verify_perturbation(original: &Tensor, perturbed: &Tensor, config: &AttackConfig) -> Result<()> {
    config.check_dims(original)?;
    if original.shape() != perturbed.shape() {
        return Err(shape_err("perturbed batch changed shape"));
    }
    let d = original.cols();
    for (i, (&p, &o)) in perturbed.data().iter().zip(original.data()).enumerate() {
        let j = i % d;
        if !config.perturb_mask[j] {
            if p.to_bits() != o.to_bits() {
                return Err(Error::AttackInvariant(format!("frozen dimension {j} moved at row {}", i / d)));
            }
            continue;
        }
        let slack = 4.0 * f64::EPSILON * o.abs().max(1.0);
        if (p - o).abs() > config.epsilon + slack {
            return Err(Error::AttackInvariant(format!(
                "budget: |{p} - {o}| > {} at row {}",
                config.epsilon,
                i / d
            )));
        }
        let (lo, hi) = config.domain_bounds[j];
        if !(lo..=hi).contains(&p) {
            return Err(Error::AttackInvariant(format!("domain: {p} outside [{lo}, {hi}]")));
        }
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Iterative sign-gradient attack: `k` rounds of gradient, step and clip.
pub fn generate_adversarial(
    params: &ModelParams,
    coords: &Tensor,
    targets: &Tensor,
    config: &AttackConfig,
) -> Result<AdversarialBatch> {
    config.check_dims(coords)?;
    let kind = LossKind::for_output_dim(params.config.output_dim);
    let loss_before = per_sample_loss(&params.predict(coords)?, targets)?;
    let mut adv = coords.clone();
    for _ in 0..config.iterations {
        let grad = input_gradient(params, &adv, targets, kind)?;
        let candidate = attack_step(&adv, &grad, config)?;
        adv = clip_physical(&candidate, coords, config)?;
    }
    let loss_after = if config.iterations == 0 {
        loss_before.clone()
    } else {
        per_sample_loss(&params.predict(&adv)?, targets)?
    };
    Ok(AdversarialBatch { original: coords.clone(), perturbed: adv, loss_before, loss_after })
}

/// Uniform noise in `[−ε, ε]` on perturbable dimensions, then domain clip.
pub fn random_perturbation(coords: &Tensor, config: &AttackConfig, seed: u64) -> Result<Tensor> {
    config.check_dims(coords)?;
    let eps = config.epsilon;
    if eps == 0.0 {
        return Ok(coords.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = coords.cols();
    let data = coords
        .data()
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let j = i % d;
            if !config.perturb_mask[j] {
                return o;
            }
            let (lo, hi) = config.domain_bounds[j];
            (o + rng.random_range(-eps..=eps)).clamp(lo, hi)
        })
        .collect();
    Tensor::new(coords.shape().to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::MlpConfig;

    fn cfg(alpha: f64, kappa: f64, k: usize) -> AttackConfig {
        AttackConfig::new(alpha, kappa, 0.1, k, vec![(0.0, 1.0); 2], vec![true, false]).unwrap()
    }

    #[test]
    fn step_follows_sign_and_mask() {
        let c = cfg(0.01, 0.5, 1);
        let x = Tensor::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let g = Tensor::from_rows(&[vec![0.7, -0.2]]).unwrap();
        let out = attack_step(&x, &g, &c).unwrap();
        assert_eq!(out.data(), &[0.51, 0.5]);
        let zero = Tensor::zeros(&[1, 2]);
        assert_eq!(attack_step(&x, &zero, &c).unwrap(), x);
    }

    #[test]
    fn clip_examples() {
        let c = cfg(0.01, 0.1, 1);
        let eps = c.epsilon;
        let o = Tensor::from_rows(&[vec![0.5, 0.2]]).unwrap();
        let inside = Tensor::from_rows(&[vec![0.5 + eps / 2.0, 0.2]]).unwrap();
        assert_eq!(clip_physical(&inside, &o, &c).unwrap(), inside);
        let far = Tensor::from_rows(&[vec![0.5 + 3.0 * eps, 0.2]]).unwrap();
        assert_eq!(clip_physical(&far, &o, &c).unwrap().get(0, 0), 0.5 + eps);
        let edge = Tensor::from_rows(&[vec![1.0 - eps / 2.0, 0.2]]).unwrap();
        let over = Tensor::from_rows(&[vec![1.0 + eps / 2.0, 0.2]]).unwrap();
        assert_eq!(clip_physical(&over, &edge, &c).unwrap().get(0, 0), 1.0);
    }

    #[test]
    fn zero_iterations_is_identity() {
        let p = ModelParams::init(&MlpConfig::new(2, vec![8], 1).unwrap(), 0).unwrap();
        let x = Tensor::from_rows(&[vec![0.1, 0.2], vec![0.7, 0.9]]).unwrap();
        let y = Tensor::from_rows(&[vec![0.3], vec![0.4]]).unwrap();
        let b = generate_adversarial(&p, &x, &y, &cfg(0.01, 0.5, 0)).unwrap();
        assert_eq!(b.perturbed, x);
        assert_eq!(b.loss_before, b.loss_after);
        let b = generate_adversarial(&p, &x, &y, &cfg(0.0, 0.5, 3)).unwrap();
        assert_eq!(b.perturbed, x);
    }

    #[test]
    fn verify_catches_violations() {
        let c = cfg(0.01, 0.1, 1);
        let o = Tensor::from_rows(&[vec![0.5, 0.2]]).unwrap();
        let moved_t = Tensor::from_rows(&[vec![0.5, 0.21]]).unwrap();
        assert!(verify_perturbation(&o, &moved_t, &c).is_err());
        let too_far = Tensor::from_rows(&[vec![0.52, 0.2]]).unwrap();
        assert!(verify_perturbation(&o, &too_far, &c).is_err());
        assert!(verify_perturbation(&o, &o, &c).is_ok());
    }

    #[test]
    fn random_noise_is_seeded() {
        let c = cfg(0.01, 0.5, 1);
        let x = Tensor::from_rows(&vec![vec![0.5, 0.5]; 20]).unwrap();
        let a = random_perturbation(&x, &c, 3).unwrap();
        assert_eq!(a, random_perturbation(&x, &c, 3).unwrap());
        assert!(verify_perturbation(&x, &a, &c).is_ok());
        assert_eq!(random_perturbation(&x, &cfg(0.01, 0.0, 1), 3).unwrap(), x);
    }

    #[test]
    fn kappa_range() {
        assert!(AttackConfig::new(0.1, 1.0, 0.1, 1, vec![(0.0, 1.0)], vec![true]).is_err());
        assert!(cfg(0.0, 0.0, 0).validate_for_training().is_err());
        assert!(cfg(0.01, 0.08, 5).validate_for_training().is_ok());
    }
}
