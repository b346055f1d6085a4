//! TOML loaders for the shared configuration-file format: search spaces
//! (one record per parameter), importance tables and group layouts. The
//! canonical CNN files ship under `data/` and are embedded here.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::gsos::{GroupPlan, GsosError, ImportanceTable};
use crate::space::{ParamDomain, SearchSpace, SpaceError};

/// Canonical CNN search-space file, embedded verbatim.
pub const CNN_SPACE_TOML: &str = include_str!("../data/cnn_space.toml");
/// Canonical CNN importance-table file, embedded verbatim.
pub const CNN_IMPORTANCE_TOML: &str = include_str!("../data/cnn_importance.toml");

#[derive(Debug, thiserror::Error)]
pub enum ConfigFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("parameter `{name}`: {message}")]
    BadRecord { name: String, message: String },

    #[error(transparent)]
    Space(#[from] SpaceError),

    #[error(transparent)]
    Groups(#[from] GsosError),
}

#[derive(Debug, Deserialize)]
struct SpaceFile {
    #[serde(rename = "param", default)]
    params: Vec<ParamRecord>,
}

#[derive(Debug, Deserialize)]
struct ParamRecord {
    name: String,
    kind: String,
    low: Option<f64>,
    high: Option<f64>,
    choices: Option<Vec<String>>,
    default: toml::Value,
}

impl ParamRecord {
    fn bounds(&self) -> Result<(f64, f64), ConfigFileError> {
        match (self.low, self.high) {
            (Some(low), Some(high)) => Ok((low, high)),
            _ => Err(self.bad("needs `low` and `high`")),
        }
    }

    fn default_f64(&self) -> Result<f64, ConfigFileError> {
        match &self.default {
            toml::Value::Float(v) => Ok(*v),
            toml::Value::Integer(v) => Ok(*v as f64),
            _ => Err(self.bad("default must be numeric")),
        }
    }

    fn as_i64(&self, v: f64, what: &str) -> Result<i64, ConfigFileError> {
        if v.fract() != 0.0 {
            return Err(self.bad(&format!("{what} must be a whole number (got {v})")));
        }
        Ok(v as i64)
    }

    fn bad(&self, message: &str) -> ConfigFileError {
        ConfigFileError::BadRecord { name: self.name.clone(), message: message.to_owned() }
    }

    fn into_domain(self) -> Result<ParamDomain, ConfigFileError> {
        match self.kind.as_str() {
            "continuous" => {
                let (low, high) = self.bounds()?;
                Ok(ParamDomain::continuous(&self.name, low, high, self.default_f64()?)?)
            }
            "log_continuous" => {
                let (low, high) = self.bounds()?;
                Ok(ParamDomain::log_continuous(&self.name, low, high, self.default_f64()?)?)
            }
            "integer" => {
                let (low, high) = self.bounds()?;
                let low = self.as_i64(low, "low")?;
                let high = self.as_i64(high, "high")?;
                let default = self.as_i64(self.default_f64()?, "default")?;
                Ok(ParamDomain::integer(&self.name, low, high, default)?)
            }
            "categorical" => {
                let choices = self
                    .choices
                    .as_ref()
                    .ok_or_else(|| self.bad("needs `choices`"))?
                    .iter()
                    .map(String::as_str)
                    .collect::<Vec<_>>();
                let default = self
                    .default
                    .as_str()
                    .ok_or_else(|| self.bad("default must be a string choice"))?;
                Ok(ParamDomain::categorical(&self.name, &choices, default)?)
            }
            other => Err(self.bad(&format!("unknown kind `{other}`"))),
        }
    }
}

pub fn parse_space(text: &str) -> Result<SearchSpace, ConfigFileError> {
    let file: SpaceFile = toml::from_str(text)?;
    let params = file
        .params
        .into_iter()
        .map(ParamRecord::into_domain)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SearchSpace::new(params)?)
}

pub fn load_space(path: &Path) -> Result<SearchSpace, ConfigFileError> {
    parse_space(&read(path)?)
}

#[derive(Debug, Deserialize)]
struct ImportanceFile {
    importance: BTreeMap<String, f64>,
}

pub fn parse_importance(text: &str) -> Result<ImportanceTable, ConfigFileError> {
    let file: ImportanceFile = toml::from_str(text)?;
    Ok(ImportanceTable::new(file.importance))
}

pub fn load_importance(path: &Path) -> Result<ImportanceTable, ConfigFileError> {
    parse_importance(&read(path)?)
}

#[derive(Debug, Deserialize)]
struct GroupsFile {
    #[serde(rename = "group", default)]
    groups: Vec<GroupRecord>,
}

#[derive(Debug, Deserialize)]
struct GroupRecord {
    params: Vec<String>,
    ratio: f64,
}

/// Group memberships plus iteration ratios; budgets come from a total at
/// plan-build time.
#[derive(Debug, Clone)]
pub struct GroupLayout {
    pub groups: Vec<Vec<String>>,
    pub ratios: Vec<f64>,
}

impl GroupLayout {
    /// Turns the layout into a validated plan, splitting `total_iters` by
    /// the ratios with the last budget absorbing the rounding remainder.
    pub fn into_plan(
        &self,
        table: &ImportanceTable,
        space: &SearchSpace,
        total_iters: usize,
    ) -> Result<GroupPlan, GsosError> {
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !(*r > 0.0)) {
            return Err(GsosError::BadRatios);
        }
        let ratio_sum: f64 = self.ratios.iter().sum();
        let mut budgets = Vec::with_capacity(self.ratios.len());
        let mut assigned = 0usize;
        for (i, r) in self.ratios.iter().enumerate() {
            let b = if i + 1 == self.ratios.len() {
                total_iters.saturating_sub(assigned)
            } else {
                (total_iters as f64 * r / ratio_sum).round() as usize
            };
            assigned += b;
            budgets.push(b);
        }
        GroupPlan::new(self.groups.clone(), budgets, table, space)
    }
}

pub fn parse_groups(text: &str) -> Result<GroupLayout, ConfigFileError> {
    let file: GroupsFile = toml::from_str(text)?;
    Ok(GroupLayout {
        groups: file.groups.iter().map(|g| g.params.clone()).collect(),
        ratios: file.groups.iter().map(|g| g.ratio).collect(),
    })
}

pub fn load_groups(path: &Path) -> Result<GroupLayout, ConfigFileError> {
    parse_groups(&read(path)?)
}

fn read(path: &Path) -> Result<String, ConfigFileError> {
    std::fs::read_to_string(path)
        .map_err(|source| ConfigFileError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gsos::cnn_importance_table;
    use crate::space::cnn_search_space;

    #[test]
    fn canonical_space_file_matches_builtin() {
        let parsed = parse_space(CNN_SPACE_TOML).unwrap();
        assert_eq!(parsed, cnn_search_space());
    }

    #[test]
    fn canonical_importance_file_matches_builtin() {
        let parsed = parse_importance(CNN_IMPORTANCE_TOML).unwrap();
        assert_eq!(parsed, cnn_importance_table());
    }

    #[test]
    fn rejects_malformed_records() {
        let missing_high = r#"
            [[param]]
            name = "x"
            kind = "continuous"
            low = 0.0
            default = 0.5
        "#;
        assert!(parse_space(missing_high).is_err());

        let fractional_int = r#"
            [[param]]
            name = "n"
            kind = "integer"
            low = 1.5
            high = 4
            default = 2
        "#;
        assert!(parse_space(fractional_int).is_err());

        let unknown_kind = r#"
            [[param]]
            name = "x"
            kind = "boolean"
            default = 1
        "#;
        assert!(parse_space(unknown_kind).is_err());
    }

    #[test]
    fn group_layout_round_trips_to_a_plan() {
        let text = r#"
            [[group]]
            params = ["num_conv_layers", "lr", "dropout_rate"]
            ratio = 4.0

            [[group]]
            params = ["optimizer", "epoch", "stride"]
            ratio = 3.0

            [[group]]
            params = ["padding", "kernel", "num_fc_units", "batch_size"]
            ratio = 3.0
        "#;
        let layout = parse_groups(text).unwrap();
        let plan = layout.into_plan(&cnn_importance_table(), &cnn_search_space(), 100).unwrap();
        assert_eq!(plan.budgets(), &[40, 30, 30]);
    }
}
