//! Parzen-window density estimation.
//!
//! Numeric domains get a Gaussian-kernel KDE, optionally fitted in log10
//! space; categorical domains get an add-one-smoothed frequency table so
//! every choice keeps positive mass. Fitted estimators are immutable;
//! sampling needs an external random stream.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::space::{ParamDomain, ParamValue};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Standard Gaussian kernel `K(u) = exp(-u^2/2) / sqrt(2*pi)`.
pub fn gaussian_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Errors from fitting estimators.
#[derive(Debug, Clone, thiserror::Error)]
pub enum DensityError {
    #[error("cannot fit a density on an empty sample list")]
    EmptySamples,

    #[error("sample {0} is not finite")]
    NonFiniteSample(f64),

    #[error("bandwidth must be positive (got {0})")]
    NonPositiveBandwidth(f64),

    #[error("smoothing must be positive (got {0})")]
    NonPositiveSmoothing(f64),

    #[error("value `{value}` is not a choice of parameter `{name}`")]
    UnknownCategory { name: String, value: String },

    #[error("parameter `{0}` is not categorical")]
    NotCategorical(String),
}

/// Scale applied to numeric values before density fitting and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Identity,
    Log10,
}

impl Transform {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Log10 => x.log10(),
        }
    }

    pub fn invert(self, y: f64) -> f64 {
        match self {
            Transform::Identity => y,
            Transform::Log10 => 10f64.powf(y),
        }
    }
}

/// Scott's rule `sigma_hat * n^(-1/5)`, floored at `1e-3 * domain_width` so
/// the bandwidth stays positive when all samples coincide.
pub fn select_bandwidth(samples: &[f64], domain_width: f64) -> f64 {
    assert!(!samples.is_empty(), "bandwidth of an empty sample list");
    assert!(domain_width > 0.0, "domain width must be positive");
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = if samples.len() > 1 {
        (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (sd * n.powf(-0.2)).max(1e-3 * domain_width)
}

/// Gaussian-kernel KDE over one numeric parameter. Samples and bounds are
/// stored in the transformed scale; integers are relaxed to reals for
/// fitting and rounded back at sampling time.
#[derive(Debug, Clone)]
pub struct NumericKde {
    samples: Vec<f64>,
    bandwidth: f64,
    transform: Transform,
    bounds: (f64, f64),
    round_to_int: bool,
}

impl NumericKde {
    /// `samples` and `bounds` are in the original scale; they are
    /// transformed here.
    pub fn new(
        samples: &[f64],
        bandwidth: f64,
        transform: Transform,
        bounds: (f64, f64),
        round_to_int: bool,
    ) -> Result<Self, DensityError> {
        if samples.is_empty() {
            return Err(DensityError::EmptySamples);
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(DensityError::NonFiniteSample(*bad));
        }
        if !(bandwidth > 0.0) {
            return Err(DensityError::NonPositiveBandwidth(bandwidth));
        }
        Ok(NumericKde {
            samples: samples.iter().map(|x| transform.apply(*x)).collect(),
            bandwidth,
            transform,
            bounds: (transform.apply(bounds.0), transform.apply(bounds.1)),
            round_to_int,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// `KDE(x) = (1/nh) * sum_i K((x - x_i)/h)`, with `x` given in the
    /// original scale and transformed like the samples first.
    pub fn estimate(&self, x: f64) -> f64 {
        let xt = self.transform.apply(x);
        let n = self.samples.len() as f64;
        let h = self.bandwidth;
        self.samples.iter().map(|s| gaussian_kernel((xt - s) / h)).sum::<f64>() / (n * h)
    }

    /// `ln KDE(x)` via log-sum-exp; stays finite where the direct sum would
    /// underflow to zero.
    pub fn log_estimate(&self, x: f64) -> f64 {
        let xt = self.transform.apply(x);
        let h = self.bandwidth;
        let mut max = f64::NEG_INFINITY;
        for s in &self.samples {
            let u = (xt - s) / h;
            let e = -0.5 * u * u;
            if e > max {
                max = e;
            }
        }
        let sum: f64 = self
            .samples
            .iter()
            .map(|s| {
                let u = (xt - s) / h;
                (-0.5 * u * u - max).exp()
            })
            .sum();
        max + sum.ln() - LN_SQRT_2PI - (self.samples.len() as f64 * h).ln()
    }

    /// Draws one value: pick a sample uniformly, add Gaussian noise of scale
    /// `h`, reflect at the transformed bounds, invert the transform, and for
    /// integer domains round to the nearest in-range integer.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        let center = self.samples[rng.random_range(0..self.samples.len())];
        let noise: f64 = rng.sample(StandardNormal);
        let y = reflect(center + noise * self.bandwidth, self.bounds.0, self.bounds.1);
        let x = self.transform.invert(y);
        if self.round_to_int {
            ParamValue::Int(round_in_range(x, self.bounds))
        } else {
            // The inverse transform can step a hair outside the original
            // bounds through rounding; clamp in the original scale.
            let (lo, hi) = (self.transform.invert(self.bounds.0), self.transform.invert(self.bounds.1));
            ParamValue::Float(x.clamp(lo, hi))
        }
    }
}

/// Folds `y` into `[lo, hi]` by reflection at the bounds.
fn reflect(y: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    let mut t = (y - lo) % (2.0 * width);
    if t < 0.0 {
        t += 2.0 * width;
    }
    if t <= width {
        lo + t
    } else {
        lo + 2.0 * width - t
    }
}

fn round_in_range(x: f64, bounds: (f64, f64)) -> i64 {
    let r = x.round().clamp(bounds.0, bounds.1);
    r as i64
}

/// Uniform density over a (transformed) numeric domain; stands in for a bad
/// estimator when no bad observations exist yet.
#[derive(Debug, Clone)]
pub struct UniformDensity {
    transform: Transform,
    bounds: (f64, f64),
    round_to_int: bool,
}

impl UniformDensity {
    pub fn new(transform: Transform, bounds: (f64, f64), round_to_int: bool) -> Self {
        UniformDensity {
            transform,
            bounds: (transform.apply(bounds.0), transform.apply(bounds.1)),
            round_to_int,
        }
    }

    /// Log density at `x` (original scale); zero mass outside the domain.
    pub fn log_density(&self, x: f64) -> f64 {
        let xt = self.transform.apply(x);
        if xt < self.bounds.0 || xt > self.bounds.1 {
            f64::NEG_INFINITY
        } else {
            -(self.bounds.1 - self.bounds.0).ln()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        let y = rng.random_range(self.bounds.0..=self.bounds.1);
        let x = self.transform.invert(y);
        if self.round_to_int {
            ParamValue::Int(round_in_range(x, self.bounds))
        } else {
            let (lo, hi) = (self.transform.invert(self.bounds.0), self.transform.invert(self.bounds.1));
            ParamValue::Float(x.clamp(lo, hi))
        }
    }
}

/// Parzen estimator used for the optimizer's per-parameter models: one
/// Gaussian component per observation with a neighbor-gap bandwidth, mixed
/// with a uniform component over the domain so unexplored regions keep
/// positive mass and sampling can restart anywhere.
///
/// Per-point bandwidths are the larger gap to the neighboring observations
/// (domain width at the edges), clipped to
/// `[width / min(100, n + 1), width]`; the uniform component carries weight
/// `1 / (n + 1)`.
#[derive(Debug, Clone)]
pub struct AdaptiveKde {
    samples: Vec<f64>,
    sigmas: Vec<f64>,
    prior_weight: f64,
    transform: Transform,
    bounds: (f64, f64),
    round_to_int: bool,
}

impl AdaptiveKde {
    /// `samples` and `bounds` in the original scale.
    pub fn new(
        samples: &[f64],
        transform: Transform,
        bounds: (f64, f64),
        round_to_int: bool,
    ) -> Result<Self, DensityError> {
        if samples.is_empty() {
            return Err(DensityError::EmptySamples);
        }
        if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
            return Err(DensityError::NonFiniteSample(*bad));
        }
        let transformed: Vec<f64> = samples.iter().map(|x| transform.apply(*x)).collect();
        let bounds_t = (transform.apply(bounds.0), transform.apply(bounds.1));
        let width = bounds_t.1 - bounds_t.0;
        let sigmas = neighbor_gap_sigmas(&transformed, width);
        Ok(AdaptiveKde {
            prior_weight: 1.0 / (transformed.len() as f64 + 1.0),
            samples: transformed,
            sigmas,
            transform,
            bounds: bounds_t,
            round_to_int,
        })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Log density of the mixture at `x` (original scale).
    pub fn log_density(&self, x: f64) -> f64 {
        let xt = self.transform.apply(x);
        let n = self.samples.len() as f64;
        let width = self.bounds.1 - self.bounds.0;
        let obs_weight = ((1.0 - self.prior_weight) / n).ln();

        let mut max = f64::NEG_INFINITY;
        let term = |s: f64, sigma: f64| {
            let u = (xt - s) / sigma;
            obs_weight - sigma.ln() - 0.5 * u * u - LN_SQRT_2PI
        };
        for (s, sigma) in self.samples.iter().zip(&self.sigmas) {
            max = max.max(term(*s, *sigma));
        }
        let in_domain = xt >= self.bounds.0 && xt <= self.bounds.1;
        let prior_term = if in_domain {
            (self.prior_weight / width).ln()
        } else {
            f64::NEG_INFINITY
        };
        max = max.max(prior_term);

        let mut sum = 0.0;
        for (s, sigma) in self.samples.iter().zip(&self.sigmas) {
            sum += (term(*s, *sigma) - max).exp();
        }
        if prior_term.is_finite() {
            sum += (prior_term - max).exp();
        }
        max + sum.ln()
    }

    /// Draws one value: the uniform component with probability
    /// `prior_weight`, otherwise a Gaussian bump around a uniformly chosen
    /// observation, reflected at the domain bounds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        let r: f64 = rng.random();
        let y = if r < self.prior_weight {
            rng.random_range(self.bounds.0..=self.bounds.1)
        } else {
            let idx = rng.random_range(0..self.samples.len());
            let noise: f64 = rng.sample(StandardNormal);
            reflect(self.samples[idx] + noise * self.sigmas[idx], self.bounds.0, self.bounds.1)
        };
        let x = self.transform.invert(y);
        if self.round_to_int {
            ParamValue::Int(round_in_range(x, self.bounds))
        } else {
            let (lo, hi) = (self.transform.invert(self.bounds.0), self.transform.invert(self.bounds.1));
            ParamValue::Float(x.clamp(lo, hi))
        }
    }
}

fn neighbor_gap_sigmas(transformed: &[f64], width: f64) -> Vec<f64> {
    let n = transformed.len();
    let clip_lo = width / (n as f64 + 1.0).min(100.0);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| transformed[*a].total_cmp(&transformed[*b]));
    let mut sigmas = vec![0.0; n];
    for (pos, &i) in order.iter().enumerate() {
        let left = if pos > 0 { transformed[i] - transformed[order[pos - 1]] } else { width };
        let right = if pos + 1 < n { transformed[order[pos + 1]] - transformed[i] } else { width };
        sigmas[i] = left.max(right).clamp(clip_lo, width);
    }
    sigmas
}

/// Smoothed frequency table over a categorical domain. Weights follow the
/// domain's choice order and sum to one.
#[derive(Debug, Clone)]
pub struct CategoricalPmf {
    weights: Vec<(String, f64)>,
}

impl CategoricalPmf {
    pub fn weights(&self) -> &[(String, f64)] {
        &self.weights
    }

    pub fn weight(&self, choice: &str) -> Option<f64> {
        self.weights.iter().find(|(c, _)| c == choice).map(|(_, w)| *w)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        let r: f64 = rng.random();
        let mut acc = 0.0;
        for (choice, w) in &self.weights {
            acc += w;
            if r <= acc {
                return ParamValue::Cat(choice.clone());
            }
        }
        // Rounding can leave acc a hair under 1.
        ParamValue::Cat(self.weights.last().expect("non-empty pmf").0.clone())
    }
}

/// Add-`smoothing` frequency fit: `w(c) = (count(c) + s) / (n + s*|choices|)`.
pub fn fit_categorical(
    values: &[&str],
    domain: &ParamDomain,
    smoothing: f64,
) -> Result<CategoricalPmf, DensityError> {
    let choices = domain
        .choices()
        .ok_or_else(|| DensityError::NotCategorical(domain.name().to_owned()))?;
    if !(smoothing > 0.0) {
        return Err(DensityError::NonPositiveSmoothing(smoothing));
    }
    for v in values {
        if !choices.iter().any(|c| c == v) {
            return Err(DensityError::UnknownCategory {
                name: domain.name().to_owned(),
                value: (*v).to_owned(),
            });
        }
    }
    let n = values.len() as f64;
    let denom = n + smoothing * choices.len() as f64;
    let weights = choices
        .iter()
        .map(|c| {
            let count = values.iter().filter(|v| *v == c).count() as f64;
            (c.clone(), (count + smoothing) / denom)
        })
        .collect();
    Ok(CategoricalPmf { weights })
}

/// Per-parameter estimator: a Parzen window for numeric domains (plain or
/// adaptive), a PMF for categorical ones, and a uniform fallback when there
/// is nothing to fit on.
#[derive(Debug, Clone)]
pub enum Estimator {
    Kde(NumericKde),
    Adaptive(AdaptiveKde),
    Pmf(CategoricalPmf),
    Uniform(UniformDensity),
}

impl Estimator {
    /// Log density of `value` under this estimator. Integer values are
    /// relaxed to reals; categorical values take their PMF weight.
    pub fn log_density(&self, value: &ParamValue) -> f64 {
        let numeric = |v: &ParamValue| v.as_f64().expect("numeric estimator got categorical value");
        match (self, value) {
            (Estimator::Kde(kde), v) => kde.log_estimate(numeric(v)),
            (Estimator::Adaptive(kde), v) => kde.log_density(numeric(v)),
            (Estimator::Uniform(u), v) => u.log_density(numeric(v)),
            (Estimator::Pmf(pmf), ParamValue::Cat(c)) => pmf
                .weight(c)
                .expect("categorical value outside fitted domain")
                .ln(),
            (Estimator::Pmf(_), v) => panic!("categorical estimator got numeric value {v}"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        match self {
            Estimator::Kde(kde) => kde.sample(rng),
            Estimator::Adaptive(kde) => kde.sample(rng),
            Estimator::Pmf(pmf) => pmf.sample(rng),
            Estimator::Uniform(u) => u.sample(rng),
        }
    }
}

/// Good/bad estimator pair for one parameter.
#[derive(Debug, Clone)]
pub struct DensityPair {
    pub good: Estimator,
    pub bad: Estimator,
}
