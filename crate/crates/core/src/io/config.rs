use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::label::LabelConfig;
use super::page::{from_value_at, parse_json};
use super::read_text;
use crate::constraint::ConstraintConfig;
use crate::error::{Error, Result};
use crate::eval::AdjacencyOptions;
use crate::structure::StructureConfig;

/// All tunables, loadable from one JSON file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub constraint: ConstraintConfig,
    pub structure: StructureConfig,
    pub labeler: LabelConfig,
    pub adjacency: AdjacencyOptions,
}

impl Config {
    pub fn parse(text: &str, source: &str) -> Result<Config> {
        let cfg: Config = from_value_at(parse_json(text, source)?, "")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("constraint", self.constraint.validate()),
            ("structure", self.structure.validate()),
            ("labeler", self.labeler.validate()),
        ];
        for (section, r) in checks {
            r.map_err(|m| Error::Config(format!("{section}: {m}")))?;
        }
        Ok(())
    }

    /// Applies `section.field=value`. The value is read as JSON when it
    /// parses, otherwise as a string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override \"{assignment}\" is not of the form key=value")))?;
        let key = key.trim();
        let value: Value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        let mut tree = serde_json::to_value(&*self).map_err(|e| Error::Invariant(e.to_string()))?;
        let mut slot = &mut tree;
        for part in key.split('.') {
            slot = slot
                .as_object_mut()
                .and_then(|m| m.get_mut(part))
                .ok_or_else(|| Error::Config(format!("unknown configuration key \"{key}\"")))?;
        }
        *slot = value;
        let updated: Config = from_value_at(tree, "").map_err(|e| Error::Config(format!("{key}: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}
