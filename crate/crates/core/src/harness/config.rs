use std::path::Path;

use serde::Deserialize;

use super::recipes::{self, Recipe};
use super::trial::TrialSpec;
use crate::error::{DemixError, Result};

/// Optional grid section of a config file.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseSettings {
    pub s_list: Option<Vec<usize>>,
    pub m_list: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub recipe: Option<String>,
}

/// A TOML experiment file: [`TrialSpec`] keys at the top level (with the
/// solver knobs under `[solver]`), an optional `[phase]` table and `workers`.
///
/// When a recipe is named (in `[phase]` or by the caller), the recipe's spec
/// and axes are the starting point and the file's keys override them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentConfig {
    pub spec: TrialSpec,
    pub phase: PhaseSettings,
    pub workers: Option<usize>,
    pub recipe: Option<Recipe>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        Self::parse_with_recipe(text, None)
    }

    /// Like [`parse`](Self::parse), with `recipe` taking precedence over any
    /// recipe named in the file.
    pub fn parse_with_recipe(text: &str, recipe: Option<&str>) -> std::result::Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let phase: PhaseSettings = match table.remove("phase") {
            Some(v) => v.try_into().map_err(|e: toml::de::Error| e.to_string())?,
            None => PhaseSettings::default(),
        };
        let workers = match table.remove("workers") {
            Some(v) => Some(v.try_into().map_err(|e: toml::de::Error| e.to_string())?),
            None => None,
        };
        let recipe = recipe
            .or(phase.recipe.as_deref())
            .map(recipes::recipe)
            .transpose()
            .map_err(|e| e.to_string())?;
        let base = recipe.as_ref().map(|r| r.base.clone()).unwrap_or_default();
        let mut merged = toml::Table::try_from(&base).map_err(|e| e.to_string())?;
        merge(&mut merged, table);
        let spec = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| e.to_string())?;
        Ok(ExperimentConfig {
            spec,
            phase,
            workers,
            recipe,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_recipe(path, None)
    }

    pub fn load_with_recipe(path: &Path, recipe: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| DemixError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_with_recipe(&text, recipe).map_err(|message| DemixError::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Grid axes and trial count: explicit `[phase]` entries, else the
    /// recipe's, else `None`.
    pub fn s_values(&self) -> Option<Vec<usize>> {
        self.phase
            .s_list
            .clone()
            .or_else(|| self.recipe.as_ref().map(|r| r.s_values.clone()))
    }

    pub fn m_values(&self) -> Option<Vec<usize>> {
        self.phase
            .m_list
            .clone()
            .or_else(|| self.recipe.as_ref().map(|r| r.m_values.clone()))
    }

    pub fn trials(&self) -> Option<usize> {
        self.phase.trials.or(self.recipe.as_ref().map(|r| r.trials))
    }
}

// Nested tables merge key by key; anything else is replaced.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}
