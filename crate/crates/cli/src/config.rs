//! TOML run configurations.
//!
//! A configuration mirrors [`Scenario`] field for field. With
//! `base = "table1"` (or the name of a built-in scenario) every field starts
//! from that preset and the document only lists overrides; nested tables are
//! merged key by key. A table-valued `base` is the scenario's per-unit base
//! instead.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use gfmlab::engine::{builtin_scenarios, find_builtin};
use gfmlab::Scenario;
use toml::{Table, Value};

/// Preset named by a `base` key.
pub fn preset(name: &str) -> Option<Scenario> {
    if name == "table1" {
        return Some(Scenario::table1());
    }
    find_builtin(name).map(|b| b.scenario)
}

fn merge(into: &mut Table, overrides: Table) {
    for (k, v) in overrides {
        match (into.get_mut(&k), v) {
            (Some(Value::Table(dst)), Value::Table(src)) => merge(dst, src),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

pub fn scenario_to_table(sc: &Scenario) -> Result<Table> {
    match Value::try_from(sc)? {
        Value::Table(t) => Ok(t),
        _ => unreachable!("a scenario serializes to a table"),
    }
}

/// Deserialize and validate a scenario from a TOML table.
pub fn scenario_from_table(table: Table) -> Result<Scenario> {
    let sc: Scenario = Value::Table(table).try_into()?;
    sc.validate()?;
    Ok(sc)
}

pub fn parse_config(text: &str) -> Result<Scenario> {
    let mut doc: Table = text.parse()?;
    // a string `base` names a preset; a table is the per-unit base field
    let table = match doc.get("base") {
        Some(Value::String(name)) => {
            let base = preset(name).ok_or_else(|| anyhow!("unknown base '{name}'; use table1 or {}", names()))?;
            doc.remove("base");
            let mut t = scenario_to_table(&base)?;
            merge(&mut t, doc);
            t
        }
        Some(Value::Table(_)) | None => doc,
        Some(other) => bail!("base must be a preset name or a table, got {}", other.type_str()),
    };
    scenario_from_table(table)
}

pub fn load_config(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

/// Comma-separated built-in scenario names.
pub fn names() -> String {
    builtin_scenarios()
        .iter()
        .map(|b| b.name)
        .collect::<Vec<_>>()
        .join(", ")
}

/// A built-in name, or else a path to a configuration file.
pub fn resolve(spec: &str) -> Result<Scenario> {
    if let Some(b) = find_builtin(spec) {
        return Ok(b.scenario);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return load_config(path);
    }
    bail!(
        "unknown scenario '{spec}'; available: {}, or a path to a TOML config",
        names()
    )
}

/// Set the numeric field at a dotted `path` (array elements by index).
pub fn set_number(table: &mut Table, path: &str, value: f64) -> Result<()> {
    let missing = || anyhow!("'{path}' is not a numeric scenario field");
    let mut keys = path.split('.');
    let mut node = table.get_mut(keys.next().unwrap()).ok_or_else(missing)?;
    for k in keys {
        node = match node {
            Value::Table(t) => t.get_mut(k),
            Value::Array(a) => k.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(missing)?;
    }
    match node {
        Value::Float(_) | Value::Integer(_) => {
            *node = Value::Float(value);
            Ok(())
        }
        _ => Err(missing()),
    }
}

/// `sc` with the field at `path` set to `value`. `rocof` changes every ramp
/// of the frequency profile.
pub fn with_parameter(sc: &Scenario, path: &str, value: f64) -> Result<Scenario> {
    if path == "rocof" {
        let out = sc.with_ramp_rate(value)?;
        out.validate()?;
        return Ok(out);
    }
    let mut t = scenario_to_table(sc)?;
    set_number(&mut t, path, value)?;
    scenario_from_table(t)
}
