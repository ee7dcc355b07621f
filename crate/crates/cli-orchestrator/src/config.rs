//! Flat key-value configuration: a TOML file with one section per experiment
//! (plus `[common]`), overridden by `--key=value` arguments.

use std::collections::BTreeMap;

use serde_json::Value as Json;
use toml::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Bool,
    Str,
    FloatList,
    IntList,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Int => "int",
            Kind::Float => "float",
            Kind::Bool => "bool",
            Kind::Str => "string",
            Kind::FloatList => "float list",
            Kind::IntList => "int list",
        }
    }
}

/// One configuration key: its type, default (a TOML literal) and the quantity it drives.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub drives: &'static str,
}

pub const fn key(name: &'static str, kind: Kind, default: &'static str, drives: &'static str) -> Key {
    Key { name, kind, default, drives }
}

/// Keys accepted by every experiment.
pub const COMMON: &[Key] = &[
    key("seed", Kind::Int, "1", "master seed; every replica seed is derived from it"),
    key("threads", Kind::Int, "0", "worker threads (0 = one per core); outputs do not depend on it"),
    key("budget", Kind::Float, "5e10", "refusal threshold in projected node visits"),
];

pub const COMMON_SECTION: &str = "common";

fn coerce(k: &Key, v: Value) -> CliResult<Value> {
    let bad = |v: &Value| CliError::Config(format!("key `{}` expects {}, got {v}", k.name, k.kind.name()));
    let num = |v: &Value| match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(f) => Some(*f),
        _ => None,
    };
    Ok(match k.kind {
        Kind::Int => match v {
            Value::Integer(i) if i >= 0 => Value::Integer(i),
            other => return Err(bad(&other)),
        },
        Kind::Float => Value::Float(num(&v).ok_or_else(|| bad(&v))?),
        Kind::Bool => match v {
            Value::Boolean(b) => Value::Boolean(b),
            other => return Err(bad(&other)),
        },
        Kind::Str => match v {
            Value::String(s) => Value::String(s),
            other => return Err(bad(&other)),
        },
        Kind::FloatList => {
            let items = match v {
                Value::Array(a) => a,
                other => vec![other],
            };
            let mut out = Vec::with_capacity(items.len());
            for it in items {
                out.push(Value::Float(num(&it).ok_or_else(|| bad(&it))?));
            }
            Value::Array(out)
        }
        Kind::IntList => {
            let items = match v {
                Value::Array(a) => a,
                other => vec![other],
            };
            let mut out = Vec::with_capacity(items.len());
            for it in items {
                match it {
                    Value::Integer(i) if i >= 0 => out.push(Value::Integer(i)),
                    other => return Err(bad(&other)),
                }
            }
            Value::Array(out)
        }
    })
}

fn parse_literal(s: &str) -> Option<Value> {
    toml::from_str::<toml::Table>(&format!("v = {s}")).ok().and_then(|mut t| t.remove("v"))
}

/// Parses an override value: a TOML literal, a bare comma list for list keys,
/// or a bare string.
fn parse_override(k: &Key, raw: &str) -> CliResult<Value> {
    let v = match parse_literal(raw) {
        Some(v) => v,
        None => match k.kind {
            Kind::FloatList | Kind::IntList => {
                parse_literal(&format!("[{raw}]")).ok_or_else(|| CliError::Config(format!("cannot parse `{raw}` for key `{}`", k.name)))?
            }
            Kind::Str => Value::String(raw.to_string()),
            _ => return Err(CliError::Config(format!("cannot parse `{raw}` for key `{}`", k.name))),
        },
    };
    coerce(k, v)
}

/// Resolved configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub experiment: String,
    values: BTreeMap<String, Value>,
}

impl Config {
    /// Defaults, then the `[common]` and experiment sections of `file`, then `overrides`.
    /// `known_sections` lists the experiment names whose sections are skipped silently.
    pub fn resolve(experiment: &str, keys: &[Key], file: Option<&str>, overrides: &[String], known_sections: &[&str]) -> CliResult<Config> {
        let schema: Vec<&Key> = COMMON.iter().chain(keys).collect();
        let find = |name: &str| -> CliResult<&Key> {
            let norm = name.replace('-', "_");
            schema
                .iter()
                .copied()
                .find(|k| k.name == norm)
                .ok_or_else(|| CliError::Config(format!("unknown key `{name}` for `{experiment}`")))
        };
        let mut values = BTreeMap::new();
        for k in &schema {
            let v = parse_literal(k.default).unwrap_or_else(|| Value::String(k.default.to_string()));
            values.insert(k.name.to_string(), coerce(k, v).expect("defaults are well typed"));
        }
        if let Some(text) = file {
            let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(format!("config file: {e}")))?;
            for section in [COMMON_SECTION, experiment] {
                if let Some(sec) = table.get(section) {
                    let sec = sec.as_table().ok_or_else(|| CliError::Config(format!("`{section}` must be a section")))?;
                    for (name, v) in sec {
                        let k = find(name)?;
                        values.insert(k.name.to_string(), coerce(k, v.clone())?);
                    }
                }
            }
            for (name, v) in &table {
                if !v.is_table() {
                    return Err(CliError::Config(format!("top-level key `{name}` must be inside a section")));
                }
                if name != COMMON_SECTION && name != experiment && !known_sections.contains(&name.as_str()) {
                    return Err(CliError::Config(format!("unknown section `[{name}]`")));
                }
            }
        }
        for o in overrides {
            let body = o.strip_prefix("--").unwrap_or(o);
            let (name, raw) = body
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{o}` must have the form --key=value")))?;
            let k = find(name)?;
            values.insert(k.name.to_string(), parse_override(k, raw)?);
        }
        Ok(Config { experiment: experiment.to_string(), values })
    }

    /// Rebuilds a configuration from its JSON echo in a manifest.
    pub fn from_json(experiment: &str, keys: &[Key], echo: &Json) -> CliResult<Config> {
        let obj = echo.as_object().ok_or_else(|| CliError::Verify("manifest config is not an object".into()))?;
        let overrides: Vec<String> = obj.iter().map(|(k, v)| format!("{k}={v}")).collect();
        Config::resolve(experiment, keys, None, &overrides, &[])
    }

    fn get(&self, name: &str) -> &Value {
        self.values.get(name).unwrap_or_else(|| panic!("key `{name}` is not in the schema"))
    }

    pub fn f64(&self, name: &str) -> f64 {
        self.get(name).as_float().expect("float key")
    }

    pub fn u64(&self, name: &str) -> u64 {
        self.get(name).as_integer().expect("int key") as u64
    }

    pub fn usize(&self, name: &str) -> usize {
        self.u64(name) as usize
    }

    pub fn bool(&self, name: &str) -> bool {
        self.get(name).as_bool().expect("bool key")
    }

    pub fn str(&self, name: &str) -> &str {
        self.get(name).as_str().expect("string key")
    }

    pub fn f64s(&self, name: &str) -> Vec<f64> {
        self.get(name).as_array().expect("list key").iter().map(|v| v.as_float().expect("float item")).collect()
    }

    pub fn u32s(&self, name: &str) -> Vec<u32> {
        self.get(name).as_array().expect("list key").iter().map(|v| v.as_integer().expect("int item") as u32).collect()
    }

    /// The resolved values as a JSON object with sorted keys.
    pub fn to_json(&self) -> Json {
        let mut m = serde_json::Map::new();
        for (k, v) in &self.values {
            m.insert(k.clone(), toml_to_json(v));
        }
        Json::Object(m)
    }
}

fn toml_to_json(v: &Value) -> Json {
    match v {
        Value::Integer(i) => Json::from(*i),
        Value::Float(f) => serde_json::Number::from_f64(*f).map_or(Json::Null, Json::Number),
        Value::Boolean(b) => Json::Bool(*b),
        Value::String(s) => Json::String(s.clone()),
        Value::Array(a) => Json::Array(a.iter().map(toml_to_json).collect()),
        other => Json::String(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[Key] = &[
        key("xi", Kind::Float, "0.2", "metric exponent"),
        key("scales", Kind::FloatList, "[3, 4]", "scales"),
        key("model", Kind::Str, "\"phi\"", "field"),
    ];

    #[test]
    fn layering() {
        let file = "[common]\nseed = 9\n[demo]\nxi = 0.3\n[other]\nfoo = 1\n";
        let c = Config::resolve("demo", KEYS, Some(file), &["--scales=5,6".into(), "model=psi".into()], &["other"]).unwrap();
        assert_eq!(c.u64("seed"), 9);
        assert_eq!(c.f64("xi"), 0.3);
        assert_eq!(c.f64s("scales"), vec![5.0, 6.0]);
        assert_eq!(c.str("model"), "psi");
        assert_eq!(c.usize("threads"), 0);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::resolve("demo", KEYS, None, &["--gamma=1".into()], &[]).is_err());
        assert!(Config::resolve("demo", KEYS, Some("[demo]\nfoo = 1\n"), &[], &[]).is_err());
        assert!(Config::resolve("demo", KEYS, Some("[nope]\nxi = 1\n"), &[], &[]).is_err());
        assert!(Config::resolve("demo", KEYS, Some("xi = 1\n"), &[], &[]).is_err());
        assert!(Config::resolve("demo", KEYS, None, &["--xi=abc".into()], &[]).is_err());
        assert!(Config::resolve("demo", KEYS, None, &["--xi".into()], &[]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = Config::resolve("demo", KEYS, None, &["--xi=0.25".into()], &[]).unwrap();
        let back = Config::from_json("demo", KEYS, &c.to_json()).unwrap();
        assert_eq!(c, back);
    }
}
