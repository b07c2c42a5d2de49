//! Experiment suites driven by a JSON config such as
//! `{"experiment": "dickson", "n": 2, "q": 5, "seed": 42}`.

use incidence_core::functor_cat;
use incidence_core::recovery;
use incidence_core::{glgroup, io, lazy, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::load;

fn field<'a>(cfg: &'a Value, key: &str) -> Result<&'a Value> {
    cfg.get(key).ok_or_else(|| Error::Format(format!("experiment config is missing \"{key}\"")))
}

fn uint(cfg: &Value, key: &str, default: Option<u64>) -> Result<u64> {
    match cfg.get(key) {
        Some(v) => v.as_u64().ok_or_else(|| Error::Format(format!("\"{key}\" must be a non-negative integer"))),
        None => default.ok_or_else(|| Error::Format(format!("experiment config is missing \"{key}\""))),
    }
}

fn text(cfg: &Value, key: &str) -> Result<String> {
    match field(cfg, key)? {
        Value::String(s) => Ok(s.clone()),
        v => Ok(v.to_string()),
    }
}

fn ring(cfg: &Value) -> Result<incidence_core::CoeffRing> {
    match field(cfg, "ring")? {
        Value::String(s) => io::parse_ring_str(s),
        v => io::ring_from_json(v),
    }
}

fn proset(cfg: &Value) -> Result<incidence_core::io::ProsetSource> {
    io::proset_from_json(field(cfg, "proset")?)
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("plain data")
}

pub fn run(cfg: &Value, seed_override: Option<u64>) -> Result<Value> {
    let kind = field(cfg, "experiment")?.as_str().ok_or_else(|| Error::Format("\"experiment\" must be a string".into()))?;
    let seed = seed_override.map_or_else(|| uint(cfg, "seed", Some(0)), Ok)?;
    let report = match kind {
        "dickson" => {
            let (n, q) = (uint(cfg, "n", None)? as usize, uint(cfg, "q", None)?);
            to_value(&glgroup::dickson_normal_closure(n, q, seed)?)
        }
        "center" => {
            let p = proset(cfg)?;
            let c = glgroup::center(p.finite()?, ring(cfg)?)?;
            let scalar = c.iter().all(|g| {
                let m = g.matrix();
                let d = m.get(0, 0);
                m.nnz() == m.proset().len() && (0..m.proset().len()).all(|s| m.get(s, s) == d)
            });
            json!({ "size": c.len(), "all_scalar": scalar })
        }
        "commutator" => {
            let p = proset(cfg)?;
            let depth = uint(cfg, "depth", None)? as usize;
            let trials = uint(cfg, "trials", Some(100))? as usize;
            to_value(&glgroup::iterated_commutator_sample(p.finite()?, ring(cfg)?, depth, trials, seed)?)
        }
        "qz" => {
            let fam = proset(cfg)?.family();
            let alpha = load::window(&fam, &text(cfg, "window")?)?;
            let beta = load::window(&fam, &text(cfg, "inner")?)?;
            to_value(&lazy::qz_window_check(&fam, &alpha, &beta, ring(cfg)?)?)
        }
        "recovery" => {
            let p = proset(cfg)?;
            let p = p.finite()?;
            let budget = uint(cfg, "budget", Some(100_000))? as usize;
            let sc = recovery::scramble(p, ring(cfg)?, seed)?;
            let rec = match cfg.get("mode").and_then(Value::as_str).unwrap_or("exhaustive") {
                "witness" => recovery::recover_witness(&sc, budget, seed)?,
                "exhaustive" => recovery::recover_exhaustive(&sc, budget)?,
                other => return Err(Error::Format(format!("unknown recovery mode {other}"))),
            };
            let iso = rec.proset.poset_isomorphic(p).is_some();
            let mut out = to_value(&rec);
            out["isomorphic_to_input"] = json!(iso);
            out
        }
        "generation" => {
            let p = proset(cfg)?;
            let tree = functor_cat::generation_decompose(p.finite()?)?;
            let ok = functor_cat::same_by_names(tree.reassemble()?.as_ref(), p.finite()?);
            json!({ "leaves": tree.leaves(), "reassembles": ok, "tree": tree })
        }
        "windows" => {
            let fam = proset(cfg)?.family();
            let count = uint(cfg, "count", Some(4))? as usize;
            let ws = fam.windows(count).ok_or_else(|| Error::Format("this family has no built-in windows".into()))?;
            to_value(&functor_cat::direct_limit_window_check(&fam, &ws)?)
        }
        "functor" => {
            let p = proset(cfg)?;
            let p = p.finite()?;
            let pairs = uint(cfg, "pairs", Some(50))? as usize;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = ring(cfg)?;
            let f = functor_cat::random_fcc_from(p, &mut rng);
            let g = functor_cat::random_fcc_from(f.codomain(), &mut rng);
            json!({
                "f": io::map_to_json(&f),
                "g": io::map_to_json(&g),
                "homomorphism": to_value(&functor_cat::homomorphism_check(&f, r, pairs, &mut rng)?),
                "functoriality": to_value(&functor_cat::functoriality_check(&f, &g, r, pairs, &mut rng)?),
            })
        }
        other => return Err(Error::Format(format!("unknown experiment {other}"))),
    };
    Ok(json!({ "experiment": kind, "seed": seed, "report": report }))
}
