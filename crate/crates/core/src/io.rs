//! JSON formats for environments, mechanisms and reports.
//!
//! Environment:
//!
//! ```json
//! {"values": ["-100", "-1", "1", "10"],
//!  "agents": [{"name": "high", "probs": {"-100": "1/2", "-1": "0", "1": "0", "10": "1/2"}}]}
//! ```
//!
//! Numbers are JSON integers or `"p/q"` strings. The keys of `probs` must be
//! exactly the strings used in `values`.
//!
//! Mechanisms carry a `kind`: `anonymous` (allocations keyed by the sorted,
//! comma-joined multiset, e.g. `"-100,10,10"`; absent keys mean 0),
//! `ordered_table` (keyed by the ordered profile, absent keys mean 0), `qmr`
//! (`{"k": 3}`) or `wmr` (`{"weights": [...], "quorum": "201", "tie": "1/2"}`).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::env::{AgentDistribution, EnvError, Environment, ValueSet};
use crate::mechanism::{
    AnonymousScf, AnyMechanism, MechanismError, MultisetIndex, OrderedTable, QualifiedMajorityRule,
    WeightedMajorityRule,
};
use crate::rational::{decimal, exact, parse_rational, Rational, RationalParseError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Number {
        path: String,
        #[source]
        source: RationalParseError,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Reads an integer or `"p/q"` string, returning the canonical text as written.
fn number(value: &Value, path: &str) -> Result<(String, Rational), IoError> {
    let text = match value {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) if n.is_i64() || n.is_u64() => n.to_string(),
        Value::Number(n) => {
            return Err(IoError::Number {
                path: path.to_string(),
                source: RationalParseError::Decimal(n.to_string()),
            })
        }
        other => {
            return Err(schema(
                path,
                format!("expected an integer or \"p/q\" string, got {other}"),
            ))
        }
    };
    let r = parse_rational(&text).map_err(|source| IoError::Number {
        path: path.to_string(),
        source,
    })?;
    Ok((text, r))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, IoError> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing field \"{key}\"")))
}

fn object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IoError> {
    value.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, IoError> {
    value.as_array().ok_or_else(|| schema(path, "expected an array"))
}

pub fn parse_environment(text: &str) -> Result<Environment, IoError> {
    environment_from_value(&serde_json::from_str(text)?)
}

pub fn environment_from_value(root: &Value) -> Result<Environment, IoError> {
    let root = object(root, "environment")?;
    let raw_values = array(field(root, "values", "environment")?, "values")?;
    let mut keys = Vec::with_capacity(raw_values.len());
    let mut values = Vec::with_capacity(raw_values.len());
    for (i, v) in raw_values.iter().enumerate() {
        let (text, r) = number(v, &format!("values[{i}]"))?;
        keys.push(text);
        values.push(r);
    }
    let value_set = ValueSet::new(values.clone())?;

    let raw_agents = array(field(root, "agents", "environment")?, "agents")?;
    let mut agents = Vec::with_capacity(raw_agents.len());
    for (a, raw) in raw_agents.iter().enumerate() {
        let path = format!("agents[{a}]");
        let obj = object(raw, &path)?;
        let name = match obj.get("name") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(schema(format!("{path}.name"), "expected a string")),
        };
        let probs_path = format!("{path}.probs");
        let probs = object(field(obj, "probs", &path)?, &probs_path)?;
        let given: BTreeSet<&str> = probs.keys().map(String::as_str).collect();
        let expected: BTreeSet<&str> = keys.iter().map(String::as_str).collect();
        if given != expected {
            let missing: Vec<&str> = expected.difference(&given).copied().collect();
            let extra: Vec<&str> = given.difference(&expected).copied().collect();
            return Err(schema(
                probs_path,
                format!("keys must match \"values\" exactly; missing {missing:?}, unexpected {extra:?}"),
            ));
        }
        // Probabilities in ascending value order.
        let mut by_value: Vec<(Rational, Rational)> = Vec::with_capacity(keys.len());
        for (key, v) in keys.iter().zip(&values) {
            let (_, p) = number(&probs[key], &format!("{probs_path}[\"{key}\"]"))?;
            by_value.push((v.clone(), p));
        }
        by_value.sort_by(|a, b| a.0.cmp(&b.0));
        let probs = by_value.into_iter().map(|(_, p)| p).collect();
        let mut dist = AgentDistribution::new(probs);
        dist.name = name;
        agents.push(dist);
    }
    Ok(Environment::new(value_set, agents)?)
}

pub fn environment_to_value(env: &Environment) -> Value {
    let keys: Vec<String> = env.values().values().iter().map(exact).collect();
    let agents: Vec<Value> = env
        .agents()
        .iter()
        .map(|a| {
            let probs: Map<String, Value> = keys
                .iter()
                .zip(a.probs())
                .map(|(k, p)| (k.clone(), Value::String(exact(p))))
                .collect();
            let mut obj = Map::new();
            if let Some(name) = &a.name {
                obj.insert("name".into(), Value::String(name.clone()));
            }
            obj.insert("probs".into(), Value::Object(probs));
            Value::Object(obj)
        })
        .collect();
    json!({ "values": keys, "agents": agents })
}

/// Splits `"a,b,c"` into support indices.
fn profile_key(key: &str, values: &ValueSet, n: usize, path: &str) -> Result<Vec<usize>, IoError> {
    let parts: Vec<&str> = key.split(',').collect();
    if parts.len() != n {
        return Err(schema(
            path,
            format!("key {key:?} has {} entries, expected {n}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            let r = parse_rational(p).map_err(|source| IoError::Number {
                path: path.to_string(),
                source,
            })?;
            values
                .index_of(&r)
                .map_err(|_| schema(path, format!("key {key:?}: {} is not in the value set", exact(&r))))
        })
        .collect()
}

fn join_profile(values: &ValueSet, profile: &[usize]) -> String {
    profile
        .iter()
        .map(|&v| exact(values.value(v)))
        .collect::<Vec<_>>()
        .join(",")
}

fn allocation_map<'a>(
    obj: &'a Map<String, Value>,
    path: &str,
) -> Result<impl Iterator<Item = (&'a String, &'a Value)>, IoError> {
    Ok(object(field(obj, "allocations", path)?, &format!("{path}.allocations"))?.iter())
}

/// Reads a mechanism for a given environment, whose value set and agent
/// count fix the key space.
pub fn parse_mechanism(text: &str, env: &Environment) -> Result<AnyMechanism, IoError> {
    mechanism_from_value(&serde_json::from_str(text)?, env)
}

pub fn mechanism_from_value(root: &Value, env: &Environment) -> Result<AnyMechanism, IoError> {
    let path = "mechanism";
    let obj = object(root, path)?;
    let kind = field(obj, "kind", path)?
        .as_str()
        .ok_or_else(|| schema("mechanism.kind", "expected a string"))?;
    let (n, k) = (env.n(), env.values().len());
    let mechanism = match kind {
        "qmr" => {
            let k = field(obj, "k", path)?
                .as_u64()
                .and_then(|k| k.to_usize())
                .ok_or_else(|| schema("mechanism.k", "expected a non-negative integer"))?;
            AnyMechanism::Qmr(QualifiedMajorityRule::new(k))
        }
        "wmr" => {
            let weights = array(field(obj, "weights", path)?, "mechanism.weights")?
                .iter()
                .enumerate()
                .map(|(i, w)| number(w, &format!("mechanism.weights[{i}]")).map(|(_, r)| r))
                .collect::<Result<Vec<_>, _>>()?;
            let (_, quorum) = number(field(obj, "quorum", path)?, "mechanism.quorum")?;
            let tie_value = match obj.get("tie") {
                Some(t) => number(t, "mechanism.tie")?.1,
                None => Rational::new(1.into(), 2.into()),
            };
            AnyMechanism::Wmr(WeightedMajorityRule {
                weights,
                quorum,
                tie_value,
            })
        }
        "anonymous" => {
            let index = Arc::new(MultisetIndex::new(n, k));
            let mut f = AnonymousScf::zeros(index.clone());
            let mut seen = BTreeSet::new();
            for (key, v) in allocation_map(obj, path)? {
                let entry = format!("{path}.allocations[\"{key}\"]");
                let mut profile = profile_key(key, env.values(), n, &entry)?;
                profile.sort_unstable();
                if !seen.insert(profile.clone()) {
                    return Err(schema(entry, "multiset listed twice"));
                }
                let (_, a) = number(v, &entry)?;
                let ms = crate::mechanism::ReportMultiset::from_profile(&profile);
                f.set(&ms, a)?;
            }
            AnyMechanism::Anonymous(f)
        }
        "ordered_table" => {
            let total = k.checked_pow(n as u32).ok_or_else(|| schema(path, "table too large"))?;
            let mut table = vec![Rational::zero(); total];
            let probe = OrderedTable::new(n, k, table.clone())?;
            let mut seen = BTreeSet::new();
            for (key, v) in allocation_map(obj, path)? {
                let entry = format!("{path}.allocations[\"{key}\"]");
                let profile = profile_key(key, env.values(), n, &entry)?;
                if !seen.insert(profile.clone()) {
                    return Err(schema(entry, "profile listed twice"));
                }
                table[probe.offset(&profile)] = number(v, &entry)?.1;
            }
            AnyMechanism::OrderedTable(OrderedTable::new(n, k, table)?)
        }
        other => {
            return Err(schema(
                "mechanism.kind",
                format!("unknown kind {other:?}, expected anonymous, qmr, wmr or ordered_table"),
            ))
        }
    };
    Ok(mechanism)
}

/// Complete JSON form; zero allocations are written out too.
pub fn mechanism_to_value(mechanism: &AnyMechanism, env: &Environment) -> Value {
    match mechanism {
        AnyMechanism::Qmr(q) => json!({ "kind": "qmr", "k": q.k }),
        AnyMechanism::Wmr(w) => json!({
            "kind": "wmr",
            "weights": w.weights.iter().map(exact).collect::<Vec<_>>(),
            "quorum": exact(&w.quorum),
            "tie": exact(&w.tie_value),
        }),
        AnyMechanism::Anonymous(f) => json!({
            "kind": "anonymous",
            "allocations": anonymous_allocations(f, env, false),
        }),
        AnyMechanism::OrderedTable(t) => {
            let mut allocations = Map::new();
            crate::env::for_each_profile(t.n(), t.support_size(), |p| {
                allocations.insert(
                    join_profile(env.values(), p),
                    Value::String(exact(&t.entries()[t.offset(p)])),
                );
            });
            json!({ "kind": "ordered_table", "allocations": allocations })
        }
    }
}

/// Multiset key to allocation, optionally dropping zeros.
pub fn anonymous_allocations(f: &AnonymousScf, env: &Environment, nonzero_only: bool) -> Map<String, Value> {
    f.entries()
        .filter(|(_, a)| !(nonzero_only && a.is_zero()))
        .map(|(ms, a)| (join_profile(env.values(), ms.as_slice()), Value::String(exact(a))))
        .collect()
}

/// `{"exact": "21/8", "decimal": "2.625000"}`.
pub fn rational_value(r: &Rational) -> Value {
    json!({ "exact": exact(r), "decimal": decimal(r) })
}

/// Per-agent `(c^-, c^+)` pairs, or the raw interim row when not flat.
pub fn interims_value(env: &Environment, interims: &crate::mechanism::InterimProfile) -> Value {
    let rows: Vec<Value> = (0..env.n())
        .map(|i| {
            let by_report: BTreeMap<String, String> = env
                .values()
                .values()
                .iter()
                .enumerate()
                .map(|(v, value)| (exact(value), exact(interims.get(i, v))))
                .collect();
            let mut obj = json!({ "agent": i + 1, "by_report": by_report });
            if let Some((c_minus, c_plus)) = interims.flat(env, i) {
                obj["c_minus"] = rational_value(&c_minus);
                obj["c_plus"] = rational_value(&c_plus);
            }
            obj
        })
        .collect();
    Value::Array(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{welfare, Mechanism};
    use crate::rational::rat;

    const GAMMA: &str = r#"{
        "values": ["-100", "-1", "1", "10"],
        "agents": [
            {"name": "high", "probs": {"-100": "1/2", "-1": "0", "1": "0", "10": "1/2"}},
            {"name": "high", "probs": {"-100": "1/2", "-1": "0", "1": "0", "10": "1/2"}},
            {"name": "low", "probs": {"-100": 0, "-1": "1/2", "1": "1/2", "10": 0}}
        ]
    }"#;

    #[test]
    fn environment_round_trip() {
        let env = parse_environment(GAMMA).unwrap();
        assert_eq!(env.n(), 3);
        assert_eq!(env.agent(2).prob(1), &rat(1, 2));
        let again = environment_from_value(&environment_to_value(&env)).unwrap();
        assert_eq!(env, again);
    }

    #[test]
    fn values_may_be_listed_in_any_order() {
        let text = r#"{"values": [2, -1], "agents": [
            {"probs": {"2": "1/3", "-1": "2/3"}}, {"probs": {"-1": "1/2", "2": "1/2"}}]}"#;
        let env = parse_environment(text).unwrap();
        assert_eq!(env.values().values(), &[rat(-1, 1), rat(2, 1)]);
        assert_eq!(env.agent(0).probs(), &[rat(2, 3), rat(1, 3)]);
    }

    #[test]
    fn environment_errors_are_specific() {
        let bad_keys = GAMMA.replace(r#""10": "1/2"}},"#, r#""11": "1/2"}},"#);
        let err = parse_environment(&bad_keys).unwrap_err().to_string();
        assert!(err.contains("agents[0].probs") && err.contains("\"10\""), "{err}");

        let unnormalized = GAMMA.replace(r#""-1": "1/2", "1": "1/2""#, r#""-1": "1/2", "1": "1/3""#);
        let err = parse_environment(&unnormalized).unwrap_err().to_string();
        assert!(err.contains("must sum to 1"), "{err}");

        let decimal = GAMMA.replacen("\"1/2\"", "0.5", 1);
        assert!(matches!(parse_environment(&decimal), Err(IoError::Number { .. })));

        let err = parse_environment("").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn anonymous_mechanism_keys_and_defaults() {
        let env = parse_environment(GAMMA).unwrap();
        let text = r#"{"kind": "anonymous", "allocations": {"10,10,-1": "1", "1,-100,1": "1/2"}}"#;
        let AnyMechanism::Anonymous(f) = parse_mechanism(text, &env).unwrap() else {
            panic!("wrong kind");
        };
        let vs = env.values();
        assert_eq!(f.allocation(vs, &[3, 1, 3]), rat(1, 1));
        assert_eq!(f.allocation(vs, &[2, 2, 0]), rat(1, 2));
        assert_eq!(f.allocation(vs, &[0, 0, 0]), rat(0, 1));

        let dup = r#"{"kind": "anonymous", "allocations": {"10,10,-1": "1", "-1,10,10": "0"}}"#;
        assert!(parse_mechanism(dup, &env).unwrap_err().to_string().contains("twice"));
        let foreign = r#"{"kind": "anonymous", "allocations": {"5,10,-1": "1"}}"#;
        assert!(parse_mechanism(foreign, &env).is_err());
    }

    #[test]
    fn mechanism_round_trips_preserve_welfare() {
        let env = parse_environment(GAMMA).unwrap();
        let mechs = [
            r#"{"kind": "qmr", "k": 3}"#,
            r#"{"kind": "wmr", "weights": ["110", "110", "2"], "quorum": "201", "tie": "1/2"}"#,
            r#"{"kind": "anonymous", "allocations": {"10,10,-1": "1", "10,10,10": "1"}}"#,
            r#"{"kind": "ordered_table", "allocations": {"10,-1,1": "1", "-1,10,1": "1/3"}}"#,
        ];
        for text in mechs {
            let m = parse_mechanism(text, &env).unwrap();
            let again = mechanism_from_value(&mechanism_to_value(&m, &env), &env).unwrap();
            assert_eq!(m, again);
            assert_eq!(welfare(&env, &m), welfare(&env, &again));
        }
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let env = parse_environment(GAMMA).unwrap();
        let err = parse_mechanism(r#"{"kind": "dictator"}"#, &env)
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown kind"), "{err}");
    }
}
