//! Resolving command-line references to files, inline JSON and shorthands.

use std::path::Path;

use incidence_core::io::{self, ProsetSource};
use incidence_core::{CoeffRing, Error, ProsetFamily, Result};
use serde_json::Value;

/// Inline JSON, a path to a JSON file, or a bare string (a shorthand).
/// A full report previously printed by this tool is unwrapped to its
/// `result`, so output can be fed straight back in.
pub fn value(arg: &str) -> Result<Value> {
    let t = arg.trim();
    let v = if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') {
        io::parse_json(t)?
    } else if Path::new(t).is_file() {
        let text = std::fs::read_to_string(t).map_err(|e| Error::Format(format!("{t}: {e}")))?;
        io::parse_json(&text)?
    } else {
        return Ok(Value::String(t.to_string()));
    };
    Ok(unwrap_report(v))
}

fn unwrap_report(v: Value) -> Value {
    match v {
        Value::Object(mut m) if m.contains_key("invocation") && m.contains_key("version") && m.contains_key("result") => {
            m.remove("result").expect("checked")
        }
        v => v,
    }
}

pub fn ring(arg: &str) -> Result<CoeffRing> {
    match value(arg)? {
        Value::String(s) => io::parse_ring_str(&s),
        v => io::ring_from_json(&v),
    }
}

pub fn proset(arg: &str) -> Result<ProsetSource> {
    io::proset_from_json(&value(arg)?)
}

/// `--family` takes a family name; `--proset` any proset reference.
pub fn family(family: Option<&str>, proset: Option<&str>) -> Result<ProsetFamily> {
    match (family, proset) {
        (Some(f), _) => match value(f)? {
            Value::String(s) => io::parse_family_str(&s),
            v => Ok(io::proset_from_json(&v)?.family()),
        },
        (None, Some(p)) => Ok(self::proset(p)?.family()),
        (None, None) => Err(Error::Format("one of --family or --proset is required".into())),
    }
}

/// `lo..hi` over integer identifiers, or a comma-separated list of element
/// names.
pub fn window(family: &ProsetFamily, arg: &str) -> Result<Vec<i64>> {
    if let Some((lo, hi)) = arg.split_once("..") {
        let parse = |s: &str| s.trim().parse::<i64>().map_err(|_| Error::Format(format!("bad window bound {s}")));
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        return Ok((lo..=hi).filter(|&x| family.contains(x)).collect());
    }
    arg.split(',').filter(|s| !s.trim().is_empty()).map(|s| family.parse_element(s.trim())).collect()
}

pub fn names(family: &ProsetFamily, ids: &[i64]) -> Vec<String> {
    ids.iter().map(|&x| family.element_name(x)).collect()
}
