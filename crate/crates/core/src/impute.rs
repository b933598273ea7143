//! Per-indicator standardization and autoencoder completion of missing
//! panel cells.
//!
//! Standardization pools each indicator over countries and years and maps
//! observed cells to `(x - mean) / std` with the population (divisor `n`)
//! deviation. Imputation then treats every `(country, year)` slice as one
//! input row, trains a single-hidden-layer autoencoder under a masked
//! reconstruction loss with full-batch gradient descent, and fills missing
//! cells from the reconstructions. Observed cells are never written.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::panel::IndicatorPanel;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Indicators whose deviation is this small relative to their mean are
/// treated as constant and bypass scaling.
const CONSTANT_STD_EPS: f64 = 1e-12;

/// Per-indicator location/scale recorded by [`standardize`].
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorScale {
    pub indicator: String,
    pub mean: f64,
    pub std: f64,
    pub constant: bool,
}

/// Scales for every indicator of a panel, in panel indicator order.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub scales: Vec<IndicatorScale>,
}

impl StandardizationParams {
    pub fn scale_of(&self, indicator: &str) -> Option<&IndicatorScale> {
        self.scales.iter().find(|s| s.indicator == indicator)
    }
}

/// Standardize each indicator over its observed cells.
///
/// Constant indicators (zero deviation) are flagged and their observed
/// cells map to `0`. Missing cells stay missing.
pub fn standardize(panel: &IndicatorPanel) -> (IndicatorPanel, StandardizationParams) {
    let countries = panel.countries().len();
    let years = panel.years().len();
    let mut out = panel.clone();
    let mut scales = Vec::with_capacity(panel.indicators().len());

    for (ii, indicator) in panel.indicators().iter().enumerate() {
        let mut sum = 0.0;
        let mut count = 0usize;
        for ci in 0..countries {
            for yi in 0..years {
                if let Some(v) = panel.cell(ci, ii, yi) {
                    sum += v;
                    count += 1;
                }
            }
        }
        let mean = if count > 0 { sum / count as f64 } else { 0.0 };
        let mut ssq = 0.0;
        for ci in 0..countries {
            for yi in 0..years {
                if let Some(v) = panel.cell(ci, ii, yi) {
                    ssq += (v - mean) * (v - mean);
                }
            }
        }
        let std = if count > 0 {
            math::sqrt(ssq / count as f64)
        } else {
            0.0
        };
        let constant = std <= CONSTANT_STD_EPS * (1.0 + math::abs(mean));

        for ci in 0..countries {
            for yi in 0..years {
                if let Some(v) = panel.cell(ci, ii, yi) {
                    let scaled = if constant { 0.0 } else { (v - mean) / std };
                    out.set_cell(ci, ii, yi, scaled);
                }
            }
        }
        scales.push(IndicatorScale {
            indicator: indicator.clone(),
            mean,
            std,
            constant,
        });
    }
    (out, StandardizationParams { scales })
}

/// Invert [`standardize`]: observed cells map back to `x * std + mean`
/// (constant indicators back to their mean).
pub fn unstandardize(
    panel: &IndicatorPanel,
    params: &StandardizationParams,
) -> Result<IndicatorPanel> {
    if params.scales.len() != panel.indicators().len() {
        return Err(Error::DimensionMismatch {
            expected: panel.indicators().len(),
            got: params.scales.len(),
        });
    }
    let countries = panel.countries().len();
    let years = panel.years().len();
    let mut out = panel.clone();
    for (ii, scale) in params.scales.iter().enumerate() {
        for ci in 0..countries {
            for yi in 0..years {
                if let Some(v) = panel.cell(ci, ii, yi) {
                    let raw = if scale.constant {
                        scale.mean
                    } else {
                        v * scale.std + scale.mean
                    };
                    out.set_cell(ci, ii, yi, raw);
                }
            }
        }
    }
    Ok(out)
}

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Rectifier,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => math::tanh(z),
            Activation::Rectifier => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative expressed from pre-activation `z` and activation `h`.
    #[inline]
    fn derivative(self, z: f64, h: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - h * h,
            Activation::Rectifier => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Autoencoder training parameters. The seed fully determines the weight
/// initialization; there is no other source of randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderConfig {
    pub hidden_width: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub refinement_rounds: usize,
    pub seed: u64,
    pub init_scale: f64,
}

impl AutoencoderConfig {
    /// Defaults for a given input width: hidden width `max(1, dim / 2)`,
    /// tanh activation, learning rate 0.01, 2000 epochs, 5 refinement
    /// rounds.
    pub fn for_input_dim(input_dim: usize) -> Self {
        Self {
            hidden_width: (input_dim / 2).max(1),
            activation: Activation::Tanh,
            learning_rate: 0.01,
            epochs: 2000,
            refinement_rounds: 5,
            seed: 0,
            init_scale: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_width == 0 {
            return Err(Error::BadConfig("hidden_width must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::BadConfig("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::BadConfig("epochs must be >= 1".into()));
        }
        if self.refinement_rounds == 0 {
            return Err(Error::BadConfig(
                "refinement_rounds must be >= 1".into(),
            ));
        }
        if self.init_scale <= 0.0 || !self.init_scale.is_finite() {
            return Err(Error::BadConfig("init_scale must be positive".into()));
        }
        Ok(())
    }
}

/// One-hidden-layer autoencoder with a linear decoder output.
///
/// Weight layout is row-major: `enc_w` is `hidden_width x input_dim`,
/// `dec_w` is `input_dim x hidden_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    pub input_dim: usize,
    pub hidden_width: usize,
    pub activation: Activation,
    pub enc_w: Vec<f64>,
    pub enc_b: Vec<f64>,
    pub dec_w: Vec<f64>,
    pub dec_b: Vec<f64>,
}

impl AutoencoderModel {
    /// Seeded uniform initialization in `[-init_scale, init_scale)`.
    pub fn init(config: &AutoencoderConfig, input_dim: usize) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 {
            return Err(Error::BadConfig("input_dim must be >= 1".into()));
        }
        let mut rng = SplitMix64::new(config.seed);
        let h = config.hidden_width;
        let s = config.init_scale;
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.next_range(-s, s)).collect()
        };
        Ok(Self {
            input_dim,
            hidden_width: h,
            activation: config.activation,
            enc_w: draw(h * input_dim),
            enc_b: draw(h),
            dec_w: draw(input_dim * h),
            dec_b: draw(input_dim),
        })
    }

    /// `decoder(activation(encoder(row)))`; the decoder output is linear.
    pub fn forward(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: row.len(),
            });
        }
        let hidden = self.encode(row);
        Ok(self.decode(&hidden))
    }

    fn encode(&self, row: &[f64]) -> Vec<f64> {
        let mut hidden = Vec::with_capacity(self.hidden_width);
        for k in 0..self.hidden_width {
            let mut z = self.enc_b[k];
            let w = &self.enc_w[k * self.input_dim..(k + 1) * self.input_dim];
            for (wi, xi) in w.iter().zip(row) {
                z += wi * xi;
            }
            hidden.push(self.activation.apply(z));
        }
        hidden
    }

    fn decode(&self, hidden: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.input_dim);
        for j in 0..self.input_dim {
            let mut y = self.dec_b[j];
            let w = &self.dec_w[j * self.hidden_width..(j + 1) * self.hidden_width];
            for (wi, hi) in w.iter().zip(hidden) {
                y += wi * hi;
            }
            out.push(y);
        }
        out
    }

}

/// Analytic gradient with the same layout as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub enc_w: Vec<f64>,
    pub enc_b: Vec<f64>,
    pub dec_w: Vec<f64>,
    pub dec_b: Vec<f64>,
}

impl Gradient {
    fn zeros(model: &AutoencoderModel) -> Self {
        Self {
            enc_w: vec![0.0; model.enc_w.len()],
            enc_b: vec![0.0; model.enc_b.len()],
            dec_w: vec![0.0; model.dec_w.len()],
            dec_b: vec![0.0; model.dec_b.len()],
        }
    }
}

/// Masked mean squared reconstruction error and its exact gradient.
///
/// `rows` is a flat `n_rows x input_dim` batch whose observed entries are
/// the reconstruction targets; `mask` marks observed cells. The loss is
/// `sum((recon - target)^2) / observed_count` over observed cells only.
pub fn loss_and_gradient(
    model: &AutoencoderModel,
    rows: &[f64],
    mask: &[bool],
) -> Result<(f64, Gradient)> {
    let dim = model.input_dim;
    if rows.is_empty() || rows.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rows.len(),
        });
    }
    if mask.len() != rows.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: mask.len(),
        });
    }
    let observed = mask.iter().filter(|m| **m).count();
    if observed == 0 {
        return Err(Error::EmptyMask);
    }

    let h = model.hidden_width;
    let mut grad = Gradient::zeros(model);
    let mut loss = 0.0;
    let inv = 1.0 / observed as f64;

    let mut pre = vec![0.0; h];
    let mut hidden = vec![0.0; h];
    let mut d_out = vec![0.0; dim];
    let mut d_hidden = vec![0.0; h];

    for (row, row_mask) in rows.chunks_exact(dim).zip(mask.chunks_exact(dim)) {
        for (k, (z_out, h_out)) in pre.iter_mut().zip(hidden.iter_mut()).enumerate() {
            let mut z = model.enc_b[k];
            let w = &model.enc_w[k * dim..(k + 1) * dim];
            for (wi, xi) in w.iter().zip(row) {
                z += wi * xi;
            }
            *z_out = z;
            *h_out = model.activation.apply(z);
        }
        for (j, g_out) in d_out.iter_mut().enumerate() {
            let mut y = model.dec_b[j];
            let w = &model.dec_w[j * h..(j + 1) * h];
            for (wi, hi) in w.iter().zip(&hidden) {
                y += wi * hi;
            }
            if row_mask[j] {
                let err = y - row[j];
                loss += err * err * inv;
                *g_out = 2.0 * err * inv;
            } else {
                *g_out = 0.0;
            }
        }
        for (j, &g) in d_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.dec_b[j] += g;
            let w = &mut grad.dec_w[j * h..(j + 1) * h];
            for (wk, hk) in w.iter_mut().zip(&hidden) {
                *wk += g * hk;
            }
        }
        for (k, d_out_k) in d_hidden.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &g) in d_out.iter().enumerate() {
                acc += model.dec_w[j * h + k] * g;
            }
            *d_out_k = acc * model.activation.derivative(pre[k], hidden[k]);
        }
        for (k, &g) in d_hidden.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.enc_b[k] += g;
            let w = &mut grad.enc_w[k * dim..(k + 1) * dim];
            for (wk, xk) in w.iter_mut().zip(row) {
                *wk += g * xk;
            }
        }
    }
    Ok((loss, grad))
}

fn apply_step(model: &mut AutoencoderModel, grad: &Gradient, lr: f64) {
    for (w, g) in model.enc_w.iter_mut().zip(&grad.enc_w) {
        *w -= lr * g;
    }
    for (w, g) in model.enc_b.iter_mut().zip(&grad.enc_b) {
        *w -= lr * g;
    }
    for (w, g) in model.dec_w.iter_mut().zip(&grad.dec_w) {
        *w -= lr * g;
    }
    for (w, g) in model.dec_b.iter_mut().zip(&grad.dec_b) {
        *w -= lr * g;
    }
}

/// Everything [`train_impute`] produces: the completed panel, the trained
/// model, and the loss trajectory (one entry per epoch across all rounds).
#[derive(Debug, Clone)]
pub struct ImputationOutcome {
    pub panel: IndicatorPanel,
    pub model: AutoencoderModel,
    pub epoch_losses: Vec<f64>,
    /// Final loss of the initial fit and of each refinement round.
    pub round_losses: Vec<f64>,
}

/// Complete a standardized panel by autoencoder reconstruction.
///
/// Rows are per-`(country, year)` indicator vectors; missing cells start
/// at `0` (the standardized column mean). After the initial fit, each
/// refinement round replaces the missing cells with the current
/// reconstructions and retrains. Observed cells pass through untouched.
pub fn train_impute(
    panel: &IndicatorPanel,
    config: &AutoencoderConfig,
) -> Result<ImputationOutcome> {
    config.validate()?;
    let dim = panel.indicators().len();
    let countries = panel.countries().len();
    let years = panel.years().len();
    if dim == 0 || countries == 0 || years == 0 {
        return Err(Error::EmptySequence("train_impute"));
    }

    let n_rows = countries * years;
    let mut data = vec![0.0; n_rows * dim];
    let mut mask = vec![false; n_rows * dim];
    let mut per_indicator = vec![0usize; dim];
    for ci in 0..countries {
        for yi in 0..years {
            let r = ci * years + yi;
            for ii in 0..dim {
                if let Some(v) = panel.cell(ci, ii, yi) {
                    data[r * dim + ii] = v;
                    mask[r * dim + ii] = true;
                    per_indicator[ii] += 1;
                }
            }
        }
    }
    if let Some(ii) = per_indicator.iter().position(|c| *c == 0) {
        return Err(Error::NoObservedCells(panel.indicators()[ii].clone()));
    }

    let mut model = AutoencoderModel::init(config, dim)?;
    let mut epoch_losses = Vec::with_capacity(config.epochs * (config.refinement_rounds + 1));
    let mut round_losses = Vec::with_capacity(config.refinement_rounds + 1);

    let train_once = |model: &mut AutoencoderModel,
                          data: &[f64],
                          losses: &mut Vec<f64>|
     -> Result<f64> {
        let mut last = 0.0;
        for _ in 0..config.epochs {
            let (loss, grad) = loss_and_gradient(model, data, &mask)?;
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch: losses.len(),
                    learning_rate: config.learning_rate,
                });
            }
            apply_step(model, &grad, config.learning_rate);
            losses.push(loss);
            last = loss;
        }
        Ok(last)
    };

    let refill = |model: &AutoencoderModel, data: &mut [f64]| {
        let mut recon_row = vec![0.0; dim];
        for r in 0..n_rows {
            let row = &data[r * dim..(r + 1) * dim];
            let hidden = model.encode(row);
            let recon = model.decode(&hidden);
            recon_row.copy_from_slice(&recon);
            for ii in 0..dim {
                if !mask[r * dim + ii] {
                    data[r * dim + ii] = recon_row[ii];
                }
            }
        }
    };

    round_losses.push(train_once(&mut model, &data, &mut epoch_losses)?);
    for _ in 0..config.refinement_rounds {
        refill(&model, &mut data);
        round_losses.push(train_once(&mut model, &data, &mut epoch_losses)?);
    }
    refill(&model, &mut data);

    let mut completed = panel.clone();
    for ci in 0..countries {
        for yi in 0..years {
            let r = ci * years + yi;
            for ii in 0..dim {
                if !mask[r * dim + ii] {
                    completed.set_cell(ci, ii, yi, data[r * dim + ii]);
                }
            }
        }
    }
    Ok(ImputationOutcome {
        panel: completed,
        model,
        epoch_losses,
        round_losses,
    })
}
