//! Standard and adversarial training, evaluation on a reference solution,
//! and the coverage measure.
//!
//! Both training modes share one loop. In adversarial mode, once the attack
//! start epoch is reached, every minibatch is supplemented with attacked
//! copies of its first `round(adv_ratio · batch)` samples, paired with the
//! original targets, and the optimiser minimises the loss over the combined
//! batch. Every attacked batch is checked against the budget, domain and
//! frozen-time invariants before it is used.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversarial::{generate_adversarial, AttackConfig, AttackSettings};
use crate::autodiff::{Tape, Tensor};
use crate::error::{Error, Result};
use crate::metrics::FieldErrors;
use crate::pde::{Dataset, SampledSolution};
use crate::surrogate::{loss_on_tape, loss_scalar, per_sample_loss, LossKind, MlpConfig, ModelParams, NormStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    /// Clean samples per minibatch; smaller datasets use a single batch.
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: AdamConfig,
    /// Adversarial samples added per clean sample, in `[0, 1]`.
    pub adv_ratio: f64,
    /// First epoch with attacks; 10% of `epochs` when absent.
    pub adv_start_epoch: Option<usize>,
    pub attack: AttackSettings,
    /// Record elapsed seconds per epoch; off by default so histories are
    /// reproducible byte for byte.
    pub record_wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: MlpConfig::DEFAULT_HIDDEN.to_vec(),
            epochs: 2000,
            batch_size: 64,
            seed: 0,
            optimizer: AdamConfig::default(),
            adv_ratio: 0.5,
            adv_start_epoch: None,
            attack: AttackSettings::default(),
            record_wall_clock: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.adv_ratio) {
            return Err(Error::InvalidConfig(format!("adv_ratio must lie in [0, 1], got {}", self.adv_ratio)));
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0) || !(0.0..1.0).contains(&o.beta1) || !(0.0..1.0).contains(&o.beta2) || !(o.eps > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid optimizer settings {o:?}")));
        }
        Ok(())
    }

    pub fn adv_start(&self) -> usize {
        self.adv_start_epoch.unwrap_or(self.epochs / 10)
    }
}

/// One row of the training history CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Sample-weighted mean loss over the epoch's (combined) batches.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    pub wall_clock_s: f64,
    /// Mean over the epoch's attacks of `loss after / loss before`.
    pub attack_amplification: Option<f64>,
    pub adversarial_samples: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn train_losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.train_loss).collect()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_loss)
    }

    /// Number of attacked batches whose invariants were checked.
    pub fn adversarial_samples(&self) -> usize {
        self.epochs.iter().map(|e| e.adversarial_samples).sum()
    }
}

struct Adam {
    config: AdamConfig,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(config: &AdamConfig, params: &ModelParams) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .layers
            .iter()
            .flat_map(|l| [vec![0.0; l.weight.len()], vec![0.0; l.bias.len()]])
            .collect();
        Self { config: config.clone(), m: zeros.clone(), v: zeros, t: 0 }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &[Tensor]) {
        self.t += 1;
        let c = &self.config;
        let bc1 = 1.0 - c.beta1.powi(self.t);
        let bc2 = 1.0 - c.beta2.powi(self.t);
        let tensors = params.layers.iter_mut().flat_map(|l| [&mut l.weight, &mut l.bias]);
        for (((p, g), m), v) in tensors.zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for (((w, &g), m), v) in p.data_mut().iter_mut().zip(g.data()).zip(m.iter_mut()).zip(v.iter_mut()) {
                *m = c.beta1 * *m + (1.0 - c.beta1) * g;
                *v = c.beta2 * *v + (1.0 - c.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
            }
        }
    }
}

/// Batch loss and its gradient for every parameter tensor (w0, b0, w1, ...).
pub fn loss_and_gradients(
    params: &ModelParams,
    coords: &Tensor,
    targets: &Tensor,
    kind: LossKind,
) -> Result<(f64, Vec<Tensor>)> {
    let mut tape = Tape::new();
    let vars = params.register(&mut tape, true);
    let x = tape.constant(coords.clone());
    let y = tape.constant(targets.clone());
    let pred = params.forward(&mut tape, &vars, x)?;
    let loss = loss_on_tape(&mut tape, pred, y, kind)?;
    let value = tape.value(loss).item()?;
    let mut g = tape.backward(loss)?;
    let grads = vars
        .layers
        .iter()
        .flat_map(|&(w, b)| [w, b])
        .map(|v| g.take(v).expect("parameter leaves require grad"))
        .collect();
    Ok((value, grads))
}

/// Attack config for training on `dataset`: the dataset's budget, with the
/// domain widened to cover any augmented samples outside `[0, 1]`.
pub fn training_attack(settings: &AttackSettings, dataset: &Dataset) -> Result<AttackConfig> {
    let mut attack = AttackConfig::for_dataset(settings, dataset)?;
    let (coords, _) = dataset.normalized()?;
    let d = coords.cols();
    for (i, &v) in coords.data().iter().enumerate() {
        let b = &mut attack.domain_bounds[i % d];
        b.0 = b.0.min(v);
        b.1 = b.1.max(v);
    }
    Ok(attack)
}

/// Trains without attacks.
pub fn train_standard(dataset: &Dataset, config: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    train(dataset, None, config, false)
}

/// Trains with adversarial samples mixed into every batch after the attack
/// start epoch. `adv_ratio = 0` reproduces [`train_standard`] exactly.
pub fn train_smart(dataset: &Dataset, config: &TrainConfig) -> Result<(ModelParams, TrainHistory)> {
    train(dataset, None, config, true)
}

/// Shared loop; `validation` is evaluated after every epoch when given.
pub fn train(
    dataset: &Dataset,
    validation: Option<&Dataset>,
    config: &TrainConfig,
    adversarial: bool,
) -> Result<(ModelParams, TrainHistory)> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InsufficientData { requested: 1, available: 0 });
    }
    let mlp = MlpConfig::new(dataset.input_dim(), config.hidden.clone(), dataset.output_dim())?;
    let kind = LossKind::for_output_dim(dataset.output_dim());
    let mut params = ModelParams::init(&mlp, config.seed)?;
    let (x, y) = dataset.normalized()?;
    let val = match validation {
        Some(v) => Some(v.normalized_with(&dataset.stats)?),
        None => None,
    };
    let attack = if adversarial && config.adv_ratio > 0.0 {
        let a = training_attack(&config.attack, dataset)?;
        a.validate_for_training()?;
        Some(a)
    } else {
        None
    };
    let adv_start = config.adv_start();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(&config.optimizer, &params);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut history = TrainHistory::default();
    let started = Instant::now();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let attacking = attack.as_ref().filter(|_| epoch >= adv_start);
        let (mut weighted, mut rows) = (0.0, 0usize);
        let (mut amp_sum, mut attacks, mut adv_samples) = (0.0, 0usize, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let mut xb = x.select_rows(chunk);
            let mut yb = y.select_rows(chunk);
            if let Some(a) = attacking {
                let n_adv = (config.adv_ratio * chunk.len() as f64).round() as usize;
                if n_adv > 0 {
                    let xs = x.select_rows(&chunk[..n_adv]);
                    let ys = y.select_rows(&chunk[..n_adv]);
                    let batch = generate_adversarial(&params, &xs, &ys, a)?;
                    batch.verify(a)?;
                    let before = batch.mean_loss_before();
                    if before > 0.0 {
                        amp_sum += batch.mean_loss_after() / before;
                        attacks += 1;
                    }
                    adv_samples += n_adv;
                    xb = xb.vstack(&batch.perturbed)?;
                    yb = yb.vstack(&ys)?;
                }
            }
            let (loss, grads) = loss_and_gradients(&params, &xb, &yb, kind)?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::DivergedLoss { epoch });
            }
            adam.step(&mut params, &grads);
            weighted += loss * xb.rows() as f64;
            rows += xb.rows();
        }
        if !params.is_finite() {
            return Err(Error::DivergedLoss { epoch });
        }
        let val_loss = match &val {
            Some((vx, vy)) => Some(loss_scalar(&params.predict(vx)?, vy)?),
            None => None,
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: weighted / rows as f64,
            val_loss,
            wall_clock_s: if config.record_wall_clock { started.elapsed().as_secs_f64() } else { 0.0 },
            attack_amplification: (attacks > 0).then(|| amp_sum / attacks as f64),
            adversarial_samples: adv_samples,
        });
    }
    Ok((params, history))
}

/// Physical-unit predictions for every sample of a solution, channel-major.
pub fn predict_solution<S: SampledSolution + ?Sized>(
    params: &ModelParams,
    stats: &NormStats,
    solution: &S,
) -> Result<Vec<Vec<f64>>> {
    let (coords, _) = solution.all_samples();
    let pred = stats.denormalize_outputs(&params.predict(&stats.normalize_inputs(&coords)?)?)?;
    let c = pred.cols();
    Ok((0..c).map(|j| (0..pred.rows()).map(|r| pred.get(r, j)).collect()).collect())
}

/// Channels whose spatial integral enters RMSE C: the velocity-like
/// outputs `u` and `v`.
pub fn conserved_channels(output_names: &[String]) -> Vec<usize> {
    output_names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.as_str() == "u" || n.as_str() == "v")
        .map(|(i, _)| i)
        .collect()
}

/// Every metric of the model against a reference solution on its full grid,
/// in physical units.
pub fn evaluate<S: SampledSolution + ?Sized>(
    params: &ModelParams,
    stats: &NormStats,
    solution: &S,
) -> Result<FieldErrors> {
    let pred = predict_solution(params, stats, solution)?;
    let truth = solution.channels();
    let pred_refs: Vec<&[f64]> = pred.iter().map(Vec::as_slice).collect();
    FieldErrors::compute(
        &pred_refs,
        &truth,
        &solution.layout(),
        &conserved_channels(&solution.output_names()),
    )
}

/// Measure-weighted mean squared error of the model on normalised points.
pub fn coverage_points(params: &ModelParams, coords: &Tensor, targets: &Tensor, measure: f64) -> Result<f64> {
    let losses = per_sample_loss(&params.predict(coords)?, targets)?;
    if losses.is_empty() {
        return Err(Error::InsufficientData { requested: 1, available: 0 });
    }
    Ok(measure * losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Coverage over a dataset; the normalised domain has unit measure.
pub fn coverage(params: &ModelParams, dataset: &Dataset) -> Result<f64> {
    let (x, y) = dataset.normalized()?;
    coverage_points(params, &x, &y, 1.0)
}

/// Coverage over `S ∪ S_adv`, where the adversarial points carry the
/// targets of the points they were generated from.
pub fn coverage_with_adversarial(params: &ModelParams, dataset: &Dataset, adversarial: &Tensor) -> Result<f64> {
    let (x, y) = dataset.normalized()?;
    coverage_points(params, &x.vstack(adversarial)?, &y.vstack(&y)?, 1.0)
}
