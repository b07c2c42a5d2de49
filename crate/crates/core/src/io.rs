//! JSON file formats for rings, prosets, families, matrices, maps and
//! structure-constant bundles. Writers are canonical so that reading back
//! and writing again is byte-identical.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::functor_cat::FccMap;
use crate::incidence::IncMatrix;
use crate::lazy::{Finitary, LazyMatrix};
use crate::proset::{Proset, ProsetFamily};
use crate::recovery::StructureConstants;
use crate::ring::CoeffRing;

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| fmt_err(format!("missing field \"{key}\"")))
}

fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| fmt_err(format!("{what} must be a string")))
}

fn as_u64(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| fmt_err(format!("{what} must be a nonnegative integer")))
}

/// Values are written as strings; plain JSON numbers are accepted on input.
fn value_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(fmt_err("ring values must be strings or integers")),
    }
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))
}

/// `"Z"`, `"Q"`, `"Z/6"`, `"GF(5)"`, `"F5"`, `"mod6"`, `"gf5"`.
pub fn parse_ring_str(s: &str) -> Result<CoeffRing> {
    let t = s.trim();
    let lower = t.to_ascii_lowercase();
    let num = |rest: &str| -> Result<u64> {
        rest.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| Error::InvalidRing(t.to_string()))
    };
    match lower.as_str() {
        "z" => Ok(CoeffRing::Integer),
        "q" => Ok(CoeffRing::Rational),
        _ => {
            if let Some(r) = lower.strip_prefix("z/").or_else(|| lower.strip_prefix("mod")) {
                CoeffRing::mod_n(num(r)?)
            } else if let Some(r) = lower.strip_prefix("gf").or_else(|| lower.strip_prefix('f')) {
                CoeffRing::prime_field(num(r)?)
            } else {
                Err(Error::InvalidRing(t.to_string()))
            }
        }
    }
}

/// A ring descriptor, optionally wrapped as `{"ring": …}`.
pub fn ring_from_json(v: &Value) -> Result<CoeffRing> {
    let inner = v.get("ring").unwrap_or(v);
    match inner {
        Value::String(s) => parse_ring_str(s),
        Value::Object(o) => {
            if let Some(n) = o.get("mod") {
                CoeffRing::mod_n(as_u64(n, "mod")?)
            } else if let Some(p) = o.get("gf") {
                CoeffRing::prime_field(as_u64(p, "gf")?)
            } else {
                Err(Error::InvalidRing(inner.to_string()))
            }
        }
        _ => Err(Error::InvalidRing(inner.to_string())),
    }
}

pub fn ring_to_json(r: CoeffRing) -> Value {
    match r {
        CoeffRing::Integer => json!("Z"),
        CoeffRing::Rational => json!("Q"),
        CoeffRing::ModN(n) => json!({ "mod": n }),
        CoeffRing::PrimeField(p) => json!({ "gf": p }),
    }
}

/// A proset given in a file: finite, or an infinite family.
#[derive(Debug, Clone)]
pub enum ProsetSource {
    Finite(Arc<Proset>),
    Family(ProsetFamily),
}

impl ProsetSource {
    pub fn finite(&self) -> Result<&Arc<Proset>> {
        match self {
            ProsetSource::Finite(p) => Ok(p),
            ProsetSource::Family(f) => match f {
                ProsetFamily::Finite(p) => Ok(p),
                _ => Err(fmt_err("a finite proset is required here; pass a window")),
            },
        }
    }

    pub fn family(&self) -> ProsetFamily {
        match self {
            ProsetSource::Finite(p) => ProsetFamily::Finite(p.clone()),
            ProsetSource::Family(f) => f.clone(),
        }
    }
}

/// `chain:3`, `discrete:2`, `full:2`, `two_block:2,1`.
pub fn parse_proset_shorthand(s: &str) -> Result<Proset> {
    let (kind, args) = s.split_once(':').ok_or_else(|| fmt_err(format!("unknown proset shorthand {s}")))?;
    let nums: Vec<usize> = args
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| fmt_err(format!("bad size in {s}"))))
        .collect::<Result<_>>()?;
    match (kind, nums.as_slice()) {
        ("chain", [n]) => Ok(Proset::chain(*n)),
        ("discrete", [n]) => Ok(Proset::discrete(*n)),
        ("full", [n]) => Ok(Proset::full(*n)),
        ("two_block", [m, n]) => Ok(Proset::two_block(*m, *n)),
        _ => Err(fmt_err(format!("unknown proset shorthand {s}"))),
    }
}

/// `N`, `Z`, `Zig`, `nstar_div`, `two_block:m,n`.
pub fn parse_family_str(s: &str) -> Result<ProsetFamily> {
    match s.trim().to_ascii_lowercase().as_str() {
        "n" => Ok(ProsetFamily::N),
        "z" => Ok(ProsetFamily::Z),
        "zig" => Ok(ProsetFamily::Zig),
        "nstar_div" | "nstardiv" => Ok(ProsetFamily::NStarDiv),
        other => {
            if let Some(args) = other.strip_prefix("two_block:") {
                let p = parse_proset_shorthand(&format!("two_block:{args}"))?;
                let m = p.classes()[p.class_of(0)].len();
                Ok(ProsetFamily::TwoBlock(m, p.len() - m))
            } else {
                Err(fmt_err(format!("unknown family {s}")))
            }
        }
    }
}

fn family_from_value(v: &Value) -> Result<ProsetFamily> {
    match v {
        Value::String(s) => parse_family_str(s),
        Value::Object(o) => {
            if o.get("nstar_div").and_then(Value::as_bool) == Some(true) {
                Ok(ProsetFamily::NStarDiv)
            } else if let Some(tb) = o.get("two_block") {
                let a = tb.as_array().filter(|a| a.len() == 2).ok_or_else(|| fmt_err("two_block takes [m, n]"))?;
                Ok(ProsetFamily::TwoBlock(as_u64(&a[0], "m")? as usize, as_u64(&a[1], "n")? as usize))
            } else {
                Err(fmt_err(format!("unknown family {v}")))
            }
        }
        _ => Err(fmt_err(format!("unknown family {v}"))),
    }
}

/// `{"elements", "relations"}`, `{"family"}`, `{"augment": {"base", "sets"}}`,
/// or a shorthand string such as `"chain:3"`.
pub fn proset_from_json(v: &Value) -> Result<ProsetSource> {
    if let Value::String(s) = v {
        return parse_proset_shorthand(s).map(|p| ProsetSource::Finite(Arc::new(p)));
    }
    if let Some(f) = v.get("family") {
        return Ok(ProsetSource::Family(family_from_value(f)?));
    }
    if let Some(a) = v.get("augment") {
        let base = proset_from_json(field(a, "base")?)?.family();
        let sets = field(a, "sets")?
            .as_array()
            .ok_or_else(|| fmt_err("sets must be an array"))?
            .iter()
            .map(|set| {
                set.as_array()
                    .ok_or_else(|| fmt_err("each set must be an array"))?
                    .iter()
                    .map(|x| base.parse_element(&value_text(x)?))
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(ProsetSource::Family(ProsetFamily::augment(base, sets)?));
    }
    let elements: Vec<String> = field(v, "elements")?
        .as_array()
        .ok_or_else(|| fmt_err("elements must be an array"))?
        .iter()
        .map(value_text)
        .collect::<Result<_>>()?;
    let relations: Vec<(String, String)> = match v.get("relations") {
        None => Vec::new(),
        Some(r) => r
            .as_array()
            .ok_or_else(|| fmt_err("relations must be an array"))?
            .iter()
            .map(|pair| match pair.as_array().map(Vec::as_slice) {
                Some([a, b]) => Ok((value_text(a)?, value_text(b)?)),
                _ => Err(fmt_err("each relation is a pair")),
            })
            .collect::<Result<_>>()?,
    };
    if elements.iter().collect::<std::collections::BTreeSet<_>>().len() != elements.len() {
        return Err(Error::InvalidProset("duplicate element names".into()));
    }
    Ok(ProsetSource::Finite(Arc::new(Proset::from_named(elements, &relations)?)))
}

pub fn proset_to_json(p: &Proset) -> Value {
    let rel: Vec<Value> = p.generating_relations().into_iter().map(|(a, b)| json!([p.name(a), p.name(b)])).collect();
    json!({ "elements": p.names(), "relations": rel })
}

pub fn family_to_json(f: &ProsetFamily) -> Result<Value> {
    Ok(match f {
        ProsetFamily::N => json!({ "family": "N" }),
        ProsetFamily::Z => json!({ "family": "Z" }),
        ProsetFamily::Zig => json!({ "family": "Zig" }),
        ProsetFamily::NStarDiv => json!({ "family": { "nstar_div": true } }),
        ProsetFamily::TwoBlock(m, n) => json!({ "family": { "two_block": [m, n] } }),
        ProsetFamily::Finite(p) => proset_to_json(p),
        ProsetFamily::Augmented(a) => {
            let base = a.base();
            let sets: Vec<Vec<String>> =
                a.sets().iter().map(|s| s.iter().map(|&x| base.element_name(x)).collect()).collect();
            json!({ "augment": { "base": family_to_json(base)?, "sets": sets } })
        }
        ProsetFamily::Custom(_) => return Err(fmt_err("custom families have no file form")),
    })
}

fn entry_triples(v: &Value) -> Result<Vec<(String, String, String)>> {
    match v.get("entries") {
        None => Ok(Vec::new()),
        Some(e) => e
            .as_array()
            .ok_or_else(|| fmt_err("entries must be an array"))?
            .iter()
            .map(|t| match t.as_array().map(Vec::as_slice) {
                Some([a, b, x]) => Ok((value_text(a)?, value_text(b)?, value_text(x)?)),
                _ => Err(fmt_err("each entry is [s1, s2, value]")),
            })
            .collect(),
    }
}

/// `{"proset", "ring", "entries": [["s1", "s2", "value"], …]}`.
pub fn matrix_from_json(v: &Value) -> Result<IncMatrix> {
    let proset = proset_from_json(field(v, "proset")?)?.finite()?.clone();
    let ring = ring_from_json(field(v, "ring")?)?;
    let mut entries = Vec::new();
    for (a, b, x) in entry_triples(v)? {
        entries.push((proset.index_of(&a)?, proset.index_of(&b)?, ring.parse(&x)?));
    }
    IncMatrix::from_entries(&proset, ring, entries)
}

pub fn matrix_to_json(m: &IncMatrix) -> Value {
    let p = m.proset();
    let entries: Vec<Value> = m.entries().map(|(a, b, x)| json!([p.name(a), p.name(b), x.to_string()])).collect();
    json!({ "proset": proset_to_json(p), "ring": ring_to_json(m.ring()), "entries": entries })
}

/// Finitary matrices: `{"family", "ring", "diagonal_default", "entries"}`;
/// named oracles: `{"family", "ring", "oracle": "upper_ones" | "identity" |
/// "random", "seed"}`.
pub fn lazy_from_json(v: &Value) -> Result<LazyMatrix> {
    let family = proset_from_json(v)?.family();
    let ring = ring_from_json(field(v, "ring")?)?;
    if let Some(o) = v.get("oracle") {
        return match as_str(o, "oracle")? {
            "upper_ones" => Ok(LazyMatrix::upper_ones(family, ring)),
            "identity" => Ok(LazyMatrix::identity(family, ring)),
            "random" => Ok(LazyMatrix::random_oracle(family, ring, v.get("seed").and_then(Value::as_u64).unwrap_or(0))),
            other => Err(fmt_err(format!("unknown oracle {other}"))),
        };
    }
    let default = match v.get("diagonal_default") {
        Some(d) => ring.parse(&value_text(d)?)?,
        None => ring.one(),
    };
    let mut off = Vec::new();
    let mut diag = Vec::new();
    for (a, b, x) in entry_triples(v)? {
        let (a, b, x) = (family.parse_element(&a)?, family.parse_element(&b)?, ring.parse(&x)?);
        if a == b {
            diag.push((a, x));
        } else {
            off.push(((a, b), x));
        }
    }
    LazyMatrix::from_finitary(family, ring, Finitary::new(ring, default, off, diag))
}

pub fn lazy_to_json(m: &LazyMatrix) -> Result<Value> {
    let f = m.finitary().ok_or_else(|| fmt_err("oracle matrices have no file form"))?;
    let fam = m.family();
    let mut entries: Vec<(i64, i64, String)> = f.off_diagonal().iter().map(|(&(a, b), x)| (a, b, x.to_string())).collect();
    entries.extend(f.diagonal_exceptions().iter().map(|(&s, x)| (s, s, x.to_string())));
    entries.sort();
    let entries: Vec<Value> =
        entries.into_iter().map(|(a, b, x)| json!([fam.element_name(a), fam.element_name(b), x])).collect();
    let mut out = family_to_json(fam)?;
    let obj = out.as_object_mut().expect("family json is an object");
    obj.insert("ring".into(), ring_to_json(m.ring()));
    obj.insert("diagonal_default".into(), json!(f.diagonal_default().to_string()));
    obj.insert("entries".into(), Value::Array(entries));
    Ok(out)
}

/// `{"domain", "codomain", "map": {"a": "x", …}}`.
pub fn map_from_json(v: &Value) -> Result<FccMap> {
    let dom = proset_from_json(field(v, "domain")?)?.finite()?.clone();
    let cod = proset_from_json(field(v, "codomain")?)?.finite()?.clone();
    let pairs: BTreeMap<String, String> = field(v, "map")?
        .as_object()
        .ok_or_else(|| fmt_err("map must be an object"))?
        .iter()
        .map(|(k, x)| Ok((k.clone(), value_text(x)?)))
        .collect::<Result<_>>()?;
    FccMap::from_names(&dom, &cod, &pairs)
}

pub fn map_to_json(f: &FccMap) -> Value {
    json!({
        "domain": proset_to_json(f.domain()),
        "codomain": proset_to_json(f.codomain()),
        "map": f.named_mapping(),
    })
}

pub fn bundle_from_json(v: &Value) -> Result<StructureConstants> {
    let sc: StructureConstants = serde_json::from_value(v.clone()).map_err(|e| fmt_err(e.to_string()))?;
    sc.validated()
}

pub fn bundle_to_json(sc: &StructureConstants) -> Value {
    serde_json::to_value(sc).expect("plain data")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rings() {
        for s in ["Z", "Q", "Z/6", "GF(5)", "F5", "mod6", "gf7"] {
            let r = parse_ring_str(s).unwrap();
            assert_eq!(ring_from_json(&ring_to_json(r)).unwrap(), r);
        }
        assert_eq!(ring_from_json(&json!({"ring": {"mod": 6}})).unwrap(), CoeffRing::ModN(6));
        assert!(matches!(parse_ring_str("GF(6)"), Err(Error::InvalidRing(_))));
    }

    #[test]
    fn prosets_round_trip() {
        let v = json!({"elements": ["a", "b", "c"], "relations": [["a", "b"], ["b", "c"]]});
        let p = proset_from_json(&v).unwrap().finite().unwrap().clone();
        assert!(p.leq(0, 2));
        let w = proset_to_json(&p);
        let again = proset_to_json(proset_from_json(&w).unwrap().finite().unwrap());
        assert_eq!(w.to_string(), again.to_string());
        for fam in [json!({"family": "N"}), json!({"family": "Zig"}), json!({"family": {"nstar_div": true}}), json!({"family": {"two_block": [2, 1]}})] {
            let f = proset_from_json(&fam).unwrap().family();
            assert_eq!(family_to_json(&f).unwrap(), fam);
        }
        let aug = json!({"augment": {"base": {"family": "N"}, "sets": [["0", "1"]]}});
        let f = proset_from_json(&aug).unwrap().family();
        assert!(f.leq(1, 0));
        assert_eq!(family_to_json(&f).unwrap(), aug);
    }

    #[test]
    fn matrices_round_trip() {
        let v = json!({"proset": "chain:2", "ring": "Q", "entries": [["0", "0", "1/2"], ["0", "1", 3]]});
        let m = matrix_from_json(&v).unwrap();
        let w = matrix_to_json(&m);
        assert_eq!(matrix_to_json(&matrix_from_json(&w).unwrap()).to_string(), w.to_string());
        let bad = json!({"proset": "chain:2", "ring": "Q", "entries": [["1", "0", "1"]]});
        assert!(matrix_from_json(&bad).is_err());
        let lz = json!({"family": "N", "ring": {"gf": 5}, "diagonal_default": "1", "entries": [["0", "3", "2"], ["2", "2", "4"]]});
        let l = lazy_from_json(&lz).unwrap();
        assert_eq!(lazy_to_json(&l).unwrap(), lz);
    }

    #[test]
    fn maps_and_bundles() {
        let v = json!({"domain": "chain:2", "codomain": "chain:3", "map": {"0": "1", "1": "2"}});
        let f = map_from_json(&v).unwrap();
        assert_eq!(map_from_json(&map_to_json(&f)).unwrap(), f);
        let sc = crate::recovery::scramble(&Proset::chain(2), CoeffRing::PrimeField(2), 1).unwrap();
        assert_eq!(bundle_from_json(&bundle_to_json(&sc)).unwrap(), sc);
    }
}
