//! Logistic confidence model `γ = logsig(b + Σ wᵢ zᵢ)` over standardized
//! features, trained by full-batch gradient descent on the mean negative
//! log-likelihood.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{apply_standardizer, fit_standardizer, FeatureSet, FeatureVector, Standardizer};
use crate::pose::ErrorThreshold;

pub const FORMAT_VERSION: u32 = 1;

/// Training also stops once every gradient component is below this.
pub const GRADIENT_TOL: f64 = 1e-10;

const MAX_HALVINGS: u32 = 60;

/// Numerically stable logistic function.
pub fn logsig(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + eˣ)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zero,
    /// Standard-normal weights and bias drawn from the config seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once an accepted epoch lowers the loss by less than this.
    pub convergence_tol: f64,
    /// Squared-norm penalty on the weights, bias excluded.
    pub l2_penalty: f64,
    /// Weight samples so both classes contribute equally.
    pub balance_classes: bool,
    pub init: Init,
    pub seed: u64,
    /// Threshold the labels were produced with; recorded in the model.
    pub label_threshold: ErrorThreshold,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            max_epochs: 5000,
            convergence_tol: 1e-10,
            l2_penalty: 0.0,
            balance_classes: false,
            init: Init::Zero,
            seed: 0,
            label_threshold: ErrorThreshold::standard(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be positive".into()));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol < 0.0 {
            return Err(Error::InvalidConfig("convergence_tol must be >= 0".into()));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(Error::InvalidConfig("l2 penalty must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub threshold: ErrorThreshold,
    pub epochs: usize,
    pub final_loss: f64,
    pub seed: u64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub convergence_tol: f64,
    pub l2_penalty: f64,
    pub balance_classes: bool,
}

impl TrainingMeta {
    /// Config that reproduces this training run on the same data.
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            max_epochs: self.max_epochs,
            convergence_tol: self.convergence_tol,
            l2_penalty: self.l2_penalty,
            balance_classes: self.balance_classes,
            init: Init::Zero,
            seed: self.seed,
            label_threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceModel {
    pub feature_set: FeatureSet,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
    pub training_meta: TrainingMeta,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: ConfidenceModel,
}

impl ConfidenceModel {
    /// Model with the given parameters and no standardization.
    pub fn with_params(feature_set: FeatureSet, weights: Vec<f64>, bias: f64) -> Result<Self> {
        let k = feature_set.len();
        let model = Self {
            feature_set,
            weights,
            bias,
            standardizer: Standardizer::identity(k),
            training_meta: TrainingMeta {
                threshold: ErrorThreshold::standard(),
                epochs: 0,
                final_loss: 0.0,
                seed: 0,
                learning_rate: 0.0,
                max_epochs: 0,
                convergence_tol: 0.0,
                l2_penalty: 0.0,
                balance_classes: false,
            },
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let k = self.feature_set.len();
        for got in [self.weights.len(), self.standardizer.means.len(), self.standardizer.stds.len()] {
            if got != k {
                return Err(Error::DimensionMismatch { expected: k, got });
            }
        }
        let finite = self.weights.iter().chain(&self.standardizer.means).all(|v| v.is_finite())
            && self.bias.is_finite()
            && self.standardizer.stds.iter().all(|s| s.is_finite() && *s > 0.0);
        if !finite {
            return Err(Error::ModelFormat("parameters must be finite, stds positive".into()));
        }
        Ok(())
    }

    /// `b + w·z` for an already standardized vector.
    pub fn margin_standardized(&self, z: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(z).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn standardize(&self, raw: &FeatureVector) -> Result<FeatureVector> {
        apply_standardizer(&self.standardizer, raw)
    }

    /// Confidence γ of a raw feature vector laid out per `feature_set`.
    pub fn predict(&self, raw: &FeatureVector) -> Result<f64> {
        let z = self.standardize(raw)?;
        Ok(logsig(self.margin_standardized(z.values())))
    }

    /// The same model expressed on raw features: `w'ᵢ = wᵢ/sᵢ`,
    /// `b' = b − Σ wᵢ mᵢ / sᵢ`.
    pub fn raw_space_params(&self) -> (Vec<f64>, f64) {
        let s = &self.standardizer;
        let weights: Vec<f64> = self.weights.iter().zip(&s.stds).map(|(w, sd)| w / sd).collect();
        let shift: f64 = weights.iter().zip(&s.means).map(|(w, m)| w * m).sum();
        (weights, self.bias - shift)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile { format_version: FORMAT_VERSION, model: self.clone() };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!("unsupported format_version {}", file.format_version)));
        }
        file.model.check()?;
        Ok(file.model)
    }
}

/// Standardized design matrix with labels and per-sample weights.
struct Objective {
    z: Vec<Vec<f64>>,
    y: Vec<f64>,
    sample_weight: Vec<f64>,
    l2: f64,
}

impl Objective {
    fn new(model: &ConfidenceModel, data: &[(FeatureVector, bool)], l2: f64, balance: bool) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let z = data.iter().map(|(v, _)| model.standardize(v).map(|z| z.0)).collect::<Result<Vec<_>>>()?;
        let y: Vec<f64> = data.iter().map(|(_, l)| if *l { 1.0 } else { 0.0 }).collect();
        let n = y.len() as f64;
        let sample_weight = if balance {
            let pos = y.iter().sum::<f64>();
            let neg = n - pos;
            y.iter().map(|&t| if t > 0.5 { n / (2.0 * pos) } else { n / (2.0 * neg) }).collect()
        } else {
            vec![1.0; y.len()]
        };
        Ok(Self { z, y, sample_weight, l2 })
    }

    fn margin(w: &[f64], b: f64, z: &[f64]) -> f64 {
        b + w.iter().zip(z).map(|(w, x)| w * x).sum::<f64>()
    }

    fn loss(&self, w: &[f64], b: f64) -> f64 {
        let n = self.y.len() as f64;
        let data: f64 = self
            .z
            .iter()
            .zip(&self.y)
            .zip(&self.sample_weight)
            .map(|((z, &y), &sw)| {
                let m = Self::margin(w, b, z);
                // −log γ = softplus(−m), −log(1 − γ) = softplus(m)
                sw * if y > 0.5 { softplus(-m) } else { softplus(m) }
            })
            .sum();
        data / n + 0.5 * self.l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        let n = self.y.len() as f64;
        let mut gw = vec![0.0; w.len()];
        let mut gb = 0.0;
        for ((z, &y), &sw) in self.z.iter().zip(&self.y).zip(&self.sample_weight) {
            let r = sw * (logsig(Self::margin(w, b, z)) - y);
            gb += r;
            for (g, x) in gw.iter_mut().zip(z) {
                *g += r * x;
            }
        }
        for (g, wi) in gw.iter_mut().zip(w) {
            *g = *g / n + self.l2 * wi;
        }
        (gw, gb / n)
    }
}

/// Mean negative log-likelihood plus `(l2/2)·‖w‖²`.
pub fn nll_loss(model: &ConfidenceModel, data: &[(FeatureVector, bool)], l2_penalty: f64) -> Result<f64> {
    let obj = Objective::new(model, data, l2_penalty, false)?;
    Ok(obj.loss(&model.weights, model.bias))
}

/// Gradient of [`nll_loss`] with respect to `(w, b)`.
pub fn gradient(model: &ConfidenceModel, data: &[(FeatureVector, bool)], l2_penalty: f64) -> Result<(Vec<f64>, f64)> {
    let obj = Objective::new(model, data, l2_penalty, false)?;
    Ok(obj.gradient(&model.weights, model.bias))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ConfidenceModel,
    /// Loss after initialization, then after every accepted epoch.
    pub loss_history: Vec<f64>,
}

pub fn train(data: &[(FeatureVector, bool)], set: &FeatureSet, config: &TrainConfig) -> Result<ConfidenceModel> {
    train_with_history(data, set, config).map(|o| o.model)
}

/// Fits the standardizer on `data`, then runs full-batch gradient descent.
/// A step that raises the loss is retried at half the step size, and the
/// smaller step is kept for later epochs.
pub fn train_with_history(
    data: &[(FeatureVector, bool)],
    set: &FeatureSet,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let positives = data.iter().filter(|(_, l)| *l).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::SingleClassData);
    }
    let k = set.len();
    if let Some((v, _)) = data.iter().find(|(v, _)| v.len() != k) {
        return Err(Error::DimensionMismatch { expected: k, got: v.len() });
    }
    let vectors: Vec<FeatureVector> = data.iter().map(|(v, _)| v.clone()).collect();
    let standardizer = fit_standardizer(&vectors)?;

    let (mut w, mut b) = match config.init {
        Init::Zero => (vec![0.0; k], 0.0),
        Init::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let w: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            (w, StandardNormal.sample(&mut rng))
        }
    };

    let mut model = ConfidenceModel {
        feature_set: set.clone(),
        weights: w.clone(),
        bias: b,
        standardizer,
        training_meta: TrainingMeta {
            threshold: config.label_threshold,
            epochs: 0,
            final_loss: f64::NAN,
            seed: config.seed,
            learning_rate: config.learning_rate,
            max_epochs: config.max_epochs,
            convergence_tol: config.convergence_tol,
            l2_penalty: config.l2_penalty,
            balance_classes: config.balance_classes,
        },
    };
    let obj = Objective::new(&model, data, config.l2_penalty, config.balance_classes)?;

    let mut loss = obj.loss(&w, b);
    let mut history = vec![loss];
    let mut step = config.learning_rate;
    let mut epochs = 0;
    'outer: while epochs < config.max_epochs {
        let (gw, gb) = obj.gradient(&w, b);
        let gmax = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gmax < GRADIENT_TOL {
            break;
        }
        let mut halvings = 0;
        let (next_w, next_b, next_loss) = loop {
            let cw: Vec<f64> = w.iter().zip(&gw).map(|(wi, g)| wi - step * g).collect();
            let cb = b - step * gb;
            let cl = obj.loss(&cw, cb);
            if cl <= loss {
                break (cw, cb, cl);
            }
            step /= 2.0;
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break 'outer;
            }
        };
        epochs += 1;
        let decrease = loss - next_loss;
        w = next_w;
        b = next_b;
        loss = next_loss;
        history.push(loss);
        if decrease < config.convergence_tol {
            break;
        }
    }

    model.weights = w;
    model.bias = b;
    model.training_meta.epochs = epochs;
    model.training_meta.final_loss = loss;
    model.check()?;
    Ok(TrainOutcome { model, loss_history: history })
}
