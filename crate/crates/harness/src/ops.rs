//! The operation mix replayed by `measure`, read from a TOML file.

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use crate::{Error, Result};

/// The mix shipped with the harness.
pub const DEFAULT_OPS: &str = include_str!("../ops/four_operations.toml");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operation {
    pub name: String,
    pub user: String,
    pub path: String,
    #[serde(default)]
    pub resolve: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OpsFile {
    #[serde(rename = "operation", default)]
    operations: Vec<Operation>,
}

pub fn parse(text: &str) -> Result<Vec<Operation>> {
    let file: OpsFile = toml::from_str(text).map_err(|e| Error::Ops(e.message().to_string()))?;
    if file.operations.is_empty() {
        return Err(Error::Ops("no [[operation]] entries".into()));
    }
    let mut names = HashSet::new();
    for op in &file.operations {
        let label = &op.name;
        if op.name.is_empty() || !op.name.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_') {
            return Err(Error::Ops(format!("name {label:?} must be lowercase letters, digits and underscores")));
        }
        if !names.insert(op.name.as_str()) {
            return Err(Error::Ops(format!("duplicate operation {label:?}")));
        }
        if op.user.trim().is_empty() {
            return Err(Error::Ops(format!("{label}: user is empty")));
        }
        if !op.path.starts_with('/') || op.path.starts_with("//") {
            return Err(Error::Ops(format!("{label}: path must be server-relative")));
        }
        if op.path.starts_with("/api/") {
            return Err(Error::Ops(format!("{label}: JSON routes have no fragment mode")));
        }
        match (&op.resolve, op.path.contains("{id}")) {
            (None, true) => return Err(Error::Ops(format!("{label}: {{id}} needs a resolve list"))),
            (Some(_), false) => return Err(Error::Ops(format!("{label}: resolve given but path has no {{id}}"))),
            (Some(r), true) if !r.starts_with("/api/") => {
                return Err(Error::Ops(format!("{label}: resolve must be a JSON route")))
            }
            _ => {}
        }
    }
    Ok(file.operations)
}

pub fn load(path: &Path) -> Result<Vec<Operation>> {
    parse(&std::fs::read_to_string(path)?)
}
