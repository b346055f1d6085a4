//! Hyperparameter domains, search spaces and configurations.
//!
//! A [`SearchSpace`] is an ordered list of named [`ParamDomain`]s; the
//! declaration order is the canonical parameter order used everywhere else
//! (density models, proposals, CSV columns). Spaces and configurations are
//! immutable once built and safe to share across threads.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A single parameter value. Categorical choices are kept as strings so a
/// numeric-looking choice set like `{32, 64, 128, 256}` stays an unordered
/// label set rather than a numeric range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Float(f64),
    Int(i64),
    Cat(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Float(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            ParamValue::Cat(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            ParamValue::Cat(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Float(v) => write!(f, "{v}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Cat(s) => write!(f, "{s}"),
        }
    }
}

/// Value domain of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainSpec {
    /// Real interval `[low, high]`, sampled uniformly.
    Continuous { low: f64, high: f64 },
    /// Positive real interval `[low, high]`, sampled uniformly in log10 space.
    LogContinuous { low: f64, high: f64 },
    /// Integer interval `{low, .., high}`.
    Integer { low: i64, high: i64 },
    /// Finite unordered choice set; declaration order is canonical.
    Categorical { choices: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Continuous,
    LogContinuous,
    Integer,
    Categorical,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParamKind::Continuous => "continuous",
            ParamKind::LogContinuous => "log_continuous",
            ParamKind::Integer => "integer",
            ParamKind::Categorical => "categorical",
        };
        f.write_str(s)
    }
}

/// One hyperparameter: a name, a value domain and an in-domain default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    name: String,
    spec: DomainSpec,
    default: ParamValue,
}

/// Errors from building domains and spaces.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SpaceError {
    #[error("parameter `{name}`: invalid bounds (low {low}, high {high})")]
    InvalidBounds { name: String, low: f64, high: f64 },

    #[error("parameter `{name}`: log-scaled domains require low > 0 (got {low})")]
    NonPositiveLogBound { name: String, low: f64 },

    #[error("parameter `{name}`: choices must be non-empty and distinct")]
    BadChoices { name: String },

    #[error("parameter `{name}`: default {default} is outside the domain")]
    DefaultOutOfDomain { name: String, default: String },

    #[error("duplicate parameter name `{0}`")]
    DuplicateName(String),
}

impl ParamDomain {
    pub fn continuous(name: &str, low: f64, high: f64, default: f64) -> Result<Self, SpaceError> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(SpaceError::InvalidBounds { name: name.to_owned(), low, high });
        }
        Self::checked(name, DomainSpec::Continuous { low, high }, ParamValue::Float(default))
    }

    pub fn log_continuous(name: &str, low: f64, high: f64, default: f64) -> Result<Self, SpaceError> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(SpaceError::InvalidBounds { name: name.to_owned(), low, high });
        }
        if low <= 0.0 {
            return Err(SpaceError::NonPositiveLogBound { name: name.to_owned(), low });
        }
        Self::checked(name, DomainSpec::LogContinuous { low, high }, ParamValue::Float(default))
    }

    pub fn integer(name: &str, low: i64, high: i64, default: i64) -> Result<Self, SpaceError> {
        if low > high {
            return Err(SpaceError::InvalidBounds {
                name: name.to_owned(),
                low: low as f64,
                high: high as f64,
            });
        }
        Self::checked(name, DomainSpec::Integer { low, high }, ParamValue::Int(default))
    }

    pub fn categorical(name: &str, choices: &[&str], default: &str) -> Result<Self, SpaceError> {
        let choices: Vec<String> = choices.iter().map(|c| (*c).to_owned()).collect();
        let distinct = choices
            .iter()
            .all(|c| choices.iter().filter(|o| *o == c).count() == 1);
        if choices.is_empty() || !distinct {
            return Err(SpaceError::BadChoices { name: name.to_owned() });
        }
        Self::checked(name, DomainSpec::Categorical { choices }, ParamValue::Cat(default.to_owned()))
    }

    fn checked(name: &str, spec: DomainSpec, default: ParamValue) -> Result<Self, SpaceError> {
        let domain = ParamDomain { name: name.to_owned(), spec, default };
        if !domain.contains(&domain.default) {
            return Err(SpaceError::DefaultOutOfDomain {
                name: domain.name,
                default: domain.default.to_string(),
            });
        }
        Ok(domain)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn kind(&self) -> ParamKind {
        match self.spec {
            DomainSpec::Continuous { .. } => ParamKind::Continuous,
            DomainSpec::LogContinuous { .. } => ParamKind::LogContinuous,
            DomainSpec::Integer { .. } => ParamKind::Integer,
            DomainSpec::Categorical { .. } => ParamKind::Categorical,
        }
    }

    pub fn default_value(&self) -> &ParamValue {
        &self.default
    }

    /// Numeric bounds for non-categorical domains.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match &self.spec {
            DomainSpec::Continuous { low, high } | DomainSpec::LogContinuous { low, high } => {
                Some((*low, *high))
            }
            DomainSpec::Integer { low, high } => Some((*low as f64, *high as f64)),
            DomainSpec::Categorical { .. } => None,
        }
    }

    pub fn choices(&self) -> Option<&[String]> {
        match &self.spec {
            DomainSpec::Categorical { choices } => Some(choices),
            _ => None,
        }
    }

    /// Domain membership check for a candidate value.
    pub fn contains(&self, value: &ParamValue) -> bool {
        match (&self.spec, value) {
            (DomainSpec::Continuous { low, high }, ParamValue::Float(v))
            | (DomainSpec::LogContinuous { low, high }, ParamValue::Float(v)) => {
                v.is_finite() && *low <= *v && *v <= *high
            }
            (DomainSpec::Integer { low, high }, ParamValue::Int(v)) => *low <= *v && *v <= *high,
            (DomainSpec::Categorical { choices }, ParamValue::Cat(v)) => {
                choices.iter().any(|c| c == v)
            }
            _ => false,
        }
    }

    /// Draws one value from the domain's prior: uniform for continuous,
    /// integer and categorical domains, log10-uniform for log-scaled ones.
    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        match &self.spec {
            DomainSpec::Continuous { low, high } => {
                ParamValue::Float(rng.random_range(*low..=*high))
            }
            DomainSpec::LogContinuous { low, high } => {
                let exp = rng.random_range(low.log10()..=high.log10());
                ParamValue::Float(10f64.powf(exp).clamp(*low, *high))
            }
            DomainSpec::Integer { low, high } => ParamValue::Int(rng.random_range(*low..=*high)),
            DomainSpec::Categorical { choices } => {
                ParamValue::Cat(choices[rng.random_range(0..choices.len())].clone())
            }
        }
    }
}

/// Ordered collection of named parameter domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    params: Vec<ParamDomain>,
}

impl SearchSpace {
    pub fn new(params: Vec<ParamDomain>) -> Result<Self, SpaceError> {
        for (i, p) in params.iter().enumerate() {
            if params[..i].iter().any(|q| q.name() == p.name()) {
                return Err(SpaceError::DuplicateName(p.name().to_owned()));
            }
        }
        Ok(SearchSpace { params })
    }

    pub fn params(&self) -> &[ParamDomain] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ParamDomain> {
        self.params.iter().find(|p| p.name() == name)
    }

    /// Sub-space containing only `names`, preserving the canonical order.
    pub fn restrict_to(&self, names: &[String]) -> SearchSpace {
        let params = self
            .params
            .iter()
            .filter(|p| names.iter().any(|n| n == p.name()))
            .cloned()
            .collect();
        SearchSpace { params }
    }

    /// One full prior draw over the space.
    pub fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration {
        let mut config = Configuration::new();
        for p in &self.params {
            config.set(p.name(), p.sample_prior(rng));
        }
        config
    }
}

/// A full assignment of values to the parameters of a space.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Configuration {
    values: BTreeMap<String, ParamValue>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, name: &str, value: ParamValue) {
        self.values.insert(name.to_owned(), value);
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.get(name)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// New configuration equal to `self` overridden by `other`'s entries.
    pub fn merged_with(&self, other: &Configuration) -> Configuration {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.set(k, v.clone());
        }
        out
    }
}

/// Why a configuration was rejected for a space.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationIssue {
    Missing { name: String },
    Extra { name: String },
    OutOfDomain { name: String, value: ParamValue },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::Missing { name } => write!(f, "missing parameter `{name}`"),
            ValidationIssue::Extra { name } => write!(f, "unknown parameter `{name}`"),
            ValidationIssue::OutOfDomain { name, value } => {
                write!(f, "value {value} of parameter `{name}` is outside its domain")
            }
        }
    }
}

/// Rejection report listing every offending parameter.
#[derive(Debug, Clone, thiserror::Error)]
pub struct ValidationError {
    pub issues: Vec<ValidationIssue>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: ")?;
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Checks that `config` assigns exactly one in-domain value to every
/// parameter of `space`; collects all violations instead of stopping at the
/// first one.
pub fn validate(config: &Configuration, space: &SearchSpace) -> Result<(), ValidationError> {
    let mut issues = Vec::new();
    for p in space.params() {
        match config.get(p.name()) {
            None => issues.push(ValidationIssue::Missing { name: p.name().to_owned() }),
            Some(v) if !p.contains(v) => issues.push(ValidationIssue::OutOfDomain {
                name: p.name().to_owned(),
                value: v.clone(),
            }),
            Some(_) => {}
        }
    }
    for (name, _) in config.iter() {
        if space.get(name).is_none() {
            issues.push(ValidationIssue::Extra { name: name.to_owned() });
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(ValidationError { issues })
    }
}

/// Configuration binding every parameter to its declared default.
pub fn default_config(space: &SearchSpace) -> Configuration {
    let mut config = Configuration::new();
    for p in space.params() {
        config.set(p.name(), p.default_value().clone());
    }
    config
}

/// The built-in 10-parameter CNN search space. `lr` spans five decades and
/// is searched on a log scale; `kernel` and `batch_size` are explicit value
/// sets and therefore categorical.
pub fn cnn_search_space() -> SearchSpace {
    SearchSpace::new(vec![
        ParamDomain::integer("num_conv_layers", 2, 4, 3).unwrap(),
        ParamDomain::log_continuous("lr", 1e-5, 1.0, 0.01).unwrap(),
        ParamDomain::continuous("dropout_rate", 0.0, 0.9, 0.0).unwrap(),
        ParamDomain::categorical("optimizer", &["adam", "sgd"], "adam").unwrap(),
        ParamDomain::integer("epoch", 10, 100, 10).unwrap(),
        ParamDomain::integer("stride", 1, 2, 1).unwrap(),
        ParamDomain::categorical("padding", &["valid", "same"], "same").unwrap(),
        ParamDomain::categorical("kernel", &["3", "5"], "3").unwrap(),
        ParamDomain::integer("num_fc_units", 64, 256, 64).unwrap(),
        ParamDomain::categorical("batch_size", &["32", "64", "128", "256"], "32").unwrap(),
    ])
    .unwrap()
}

/// Space of `d` continuous parameters `x1..xd`, all on `[low, high]` with
/// the midpoint as default.
pub fn continuous_space(d: usize, low: f64, high: f64) -> SearchSpace {
    let mid = 0.5 * (low + high);
    let params = (1..=d)
        .map(|i| ParamDomain::continuous(&format!("x{i}"), low, high, mid).unwrap())
        .collect();
    SearchSpace::new(params).unwrap()
}
