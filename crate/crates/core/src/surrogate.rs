//! The coordinate MLP `f(x, t; θ)`, its supervised losses and min–max
//! normalisation.
//!
//! Training and attacks both run in normalised units: every input and output
//! quantity `q` is mapped to `(q - q_min) / (q_max - q_min)` so that one step
//! size applies to all coordinates.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{shape_err, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl MlpConfig {
    pub const DEFAULT_HIDDEN: [usize; 4] = [64; 4];

    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize) -> Result<Self> {
        let config = Self { input_dim, hidden, output_dim, activation: Activation::Tanh };
        config.validate()?;
        Ok(config)
    }

    /// Four hidden layers of 64 units.
    pub fn with_default_hidden(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: Self::DEFAULT_HIDDEN.to_vec(),
            output_dim,
            activation: Activation::Tanh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::InvalidConfig("MLP needs at least one hidden layer".into()));
        }
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::InvalidConfig(format!("MLP widths must be >= 1: {self:?}")));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every affine layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_dim];
        widths.extend(&self.hidden);
        widths.push(self.output_dim);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// One affine layer: `weight` is `(fan_in, fan_out)`, `bias` is `(1, fan_out)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub weight: Tensor,
    pub bias: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub config: MlpConfig,
    pub layers: Vec<Layer>,
}

/// Tape handles for every parameter tensor of one forward pass.
#[derive(Clone, Debug)]
pub struct ParamVars {
    pub layers: Vec<(Var, Var)>,
}

impl ModelParams {
    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(config: &MlpConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = config
            .layer_dims()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let bound = glorot_bound(fan_in, fan_out);
                let w = (0..fan_in * fan_out).map(|_| rng.random_range(-bound..=bound)).collect();
                Layer {
                    weight: Tensor::matrix(fan_in, fan_out, w).expect("sized"),
                    bias: Tensor::zeros(&[1, fan_out]),
                }
            })
            .collect();
        Ok(Self { config: config.clone(), layers })
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    /// Parameters as one flat vector: w0, b0, w1, b1, ...
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(l.weight.data());
            out.extend_from_slice(l.bias.data());
        }
        out
    }

    pub fn from_flat(config: &MlpConfig, flat: &[f64]) -> Result<Self> {
        config.validate()?;
        let mut layers = Vec::new();
        let mut at = 0;
        for (fan_in, fan_out) in config.layer_dims() {
            let nw = fan_in * fan_out;
            if at + nw + fan_out > flat.len() {
                return Err(shape_err("flat parameter vector too short"));
            }
            layers.push(Layer {
                weight: Tensor::matrix(fan_in, fan_out, flat[at..at + nw].to_vec())?,
                bias: Tensor::matrix(1, fan_out, flat[at + nw..at + nw + fan_out].to_vec())?,
            });
            at += nw + fan_out;
        }
        if at != flat.len() {
            return Err(shape_err(format!("expected {at} parameters, got {}", flat.len())));
        }
        Ok(Self { config: config.clone(), layers })
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| l.weight.is_finite() && l.bias.is_finite())
    }

    /// Records every parameter as a leaf.
    pub fn register(&self, tape: &mut Tape, requires_grad: bool) -> ParamVars {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                (tape.leaf(l.weight.clone(), requires_grad), tape.leaf(l.bias.clone(), requires_grad))
            })
            .collect();
        ParamVars { layers }
    }

    /// Forward pass on the tape; `x` is a `(batch, input_dim)` matrix.
    pub fn forward(&self, tape: &mut Tape, vars: &ParamVars, x: Var) -> Result<Var> {
        let shape = tape.value(x).shape();
        if shape.len() != 2 || shape[1] != self.config.input_dim {
            return Err(shape_err(format!(
                "expected (batch, {}) coordinates, got {shape:?}",
                self.config.input_dim
            )));
        }
        let last = vars.layers.len() - 1;
        let mut h = x;
        for (i, &(w, b)) in vars.layers.iter().enumerate() {
            let z = tape.matmul(h, w)?;
            let z = tape.add(z, b)?;
            h = if i < last {
                match self.config.activation {
                    Activation::Tanh => tape.tanh(z),
                }
            } else {
                z
            };
        }
        Ok(h)
    }

    /// Predictions for a `(batch, input_dim)` batch of normalised coordinates.
    pub fn predict(&self, coords: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let vars = self.register(&mut tape, false);
        let x = tape.constant(coords.clone());
        let out = self.forward(&mut tape, &vars, x)?;
        Ok(tape.value(out).clone())
    }
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Which supervised loss a model is trained with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Batch mean of `‖f − u‖²`.
    #[default]
    Scalar,
    /// Batch mean of `‖(u, v)_pred − (u, v)_true‖²` plus batch mean of
    /// `(p_pred − p_true)²`; needs three outputs.
    VelocityPressure,
}

impl LossKind {
    pub fn for_output_dim(dim: usize) -> Self {
        if dim == 3 {
            LossKind::VelocityPressure
        } else {
            LossKind::Scalar
        }
    }

    pub fn check(self, output_dim: usize) -> Result<()> {
        match self {
            LossKind::VelocityPressure if output_dim != 3 => Err(shape_err(format!(
                "velocity-pressure loss needs 3 outputs, got {output_dim}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Records the batch-mean squared error on the tape.
///
/// Both loss kinds reduce to `Σ (pred − target)² / batch`: splitting the
/// three-channel sum into its velocity and pressure parts changes nothing.
pub fn loss_on_tape(tape: &mut Tape, pred: Var, target: Var, kind: LossKind) -> Result<Var> {
    let (ps, ts) = (tape.value(pred).shape().to_vec(), tape.value(target).shape().to_vec());
    if ps != ts || ps.len() != 2 {
        return Err(shape_err(format!("loss of {ps:?} against {ts:?}")));
    }
    kind.check(ps[1])?;
    let batch = ps[0].max(1) as f64;
    let diff = tape.sub(pred, target)?;
    let sq = tape.square(diff);
    let total = tape.sum(sq);
    Ok(tape.scalar_mul(total, 1.0 / batch))
}

fn check_same(pred: &Tensor, target: &Tensor) -> Result<()> {
    if pred.shape() != target.shape() || pred.rank() != 2 {
        return Err(shape_err(format!("loss of {:?} against {:?}", pred.shape(), target.shape())));
    }
    Ok(())
}

/// Batch mean of the squared error norm.
pub fn loss_scalar(pred: &Tensor, target: &Tensor) -> Result<f64> {
    check_same(pred, target)?;
    let total: f64 = pred.data().iter().zip(target.data()).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(total / pred.rows().max(1) as f64)
}

/// Velocity squared error plus pressure squared error, both batch means;
/// channels are ordered `(u, v, p)`.
pub fn loss_ns(pred: &Tensor, target: &Tensor) -> Result<f64> {
    check_same(pred, target)?;
    LossKind::VelocityPressure.check(pred.cols())?;
    let n = pred.rows().max(1) as f64;
    let (mut vel, mut pres) = (0.0, 0.0);
    for r in 0..pred.rows() {
        let (p, t) = (pred.row(r), target.row(r));
        vel += (p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2);
        pres += (p[2] - t[2]).powi(2);
    }
    Ok(vel / n + pres / n)
}

/// `‖pred_i − target_i‖²` for every row.
pub fn per_sample_loss(pred: &Tensor, target: &Tensor) -> Result<Vec<f64>> {
    check_same(pred, target)?;
    Ok((0..pred.rows())
        .map(|r| pred.row(r).iter().zip(target.row(r)).map(|(p, t)| (p - t) * (p - t)).sum())
        .collect())
}

/// Min/max of one physical quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl QuantityRange {
    pub fn new(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self { name: name.into(), min, max }
    }

    pub fn span(&self) -> Result<f64> {
        let span = self.max - self.min;
        if !(span > 0.0) {
            return Err(Error::DegenerateRange(self.name.clone()));
        }
        Ok(span)
    }

    pub fn normalize(&self, q: f64) -> Result<f64> {
        Ok((q - self.min) / self.span()?)
    }

    pub fn denormalize(&self, q: f64) -> Result<f64> {
        Ok(q * self.span()? + self.min)
    }
}

pub fn normalize(values: &[f64], range: &QuantityRange) -> Result<Vec<f64>> {
    let span = range.span()?;
    Ok(values.iter().map(|q| (q - range.min) / span).collect())
}

pub fn denormalize(values: &[f64], range: &QuantityRange) -> Result<Vec<f64>> {
    let span = range.span()?;
    Ok(values.iter().map(|q| q * span + range.min).collect())
}

/// Per-quantity ranges for the model inputs and outputs, column-ordered.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub inputs: Vec<QuantityRange>,
    pub outputs: Vec<QuantityRange>,
}

impl NormStats {
    pub fn normalize_inputs(&self, t: &Tensor) -> Result<Tensor> {
        map_columns(t, &self.inputs, QuantityRange::normalize)
    }

    pub fn denormalize_inputs(&self, t: &Tensor) -> Result<Tensor> {
        map_columns(t, &self.inputs, QuantityRange::denormalize)
    }

    pub fn normalize_outputs(&self, t: &Tensor) -> Result<Tensor> {
        map_columns(t, &self.outputs, QuantityRange::normalize)
    }

    pub fn denormalize_outputs(&self, t: &Tensor) -> Result<Tensor> {
        map_columns(t, &self.outputs, QuantityRange::denormalize)
    }
}

fn map_columns(
    t: &Tensor,
    ranges: &[QuantityRange],
    f: impl Fn(&QuantityRange, f64) -> Result<f64>,
) -> Result<Tensor> {
    if t.rank() != 2 || t.cols() != ranges.len() {
        return Err(shape_err(format!("{} ranges for tensor {:?}", ranges.len(), t.shape())));
    }
    let c = ranges.len();
    let data = t
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| f(&ranges[i % c], v))
        .collect::<Result<Vec<_>>>()?;
    Tensor::new(t.shape().to_vec(), data)
}
