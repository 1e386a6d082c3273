//! JSON formats for persuasion instances and schemes.
//!
//! Instance: `{"actions":[{"name":"A","types":[{"name":"1","prob":"1/2",
//! "sender":100,"receiver":2}, ...]}, ...]}` with `"receiver":"-inf"` for
//! minus infinity.
//!
//! Scheme: `{"rules":[{"when":["1","*","2"],"recommend":{"A":"1/2","C":"1/2"}}, ...]}`.
//! `"*"` matches any type; the first matching rule applies and every profile
//! must match some rule. Mass not assigned to an action recommends nothing.

use std::collections::BTreeMap;

use num::{BigRational, Zero};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use wsd_core::io::Number;

use crate::error::{Error, Result};
use crate::instance::{Action, ActionType, Instance, Payoff};
use crate::scheme::{PersuasionCheck, Scheme, SecondOrderRule};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub name: String,
    pub prob: Number,
    pub sender: Number,
    pub receiver: Number,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionEntry {
    pub name: String,
    pub types: Vec<TypeEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub actions: Vec<ActionEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub when: Vec<String>,
    pub recommend: BTreeMap<String, Number>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub rules: Vec<Rule>,
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what} file: {e}")))
}

fn rational(n: &Number, field: &str) -> Result<BigRational> {
    Ok(n.to_rational(field)?)
}

fn payoff(n: &Number, field: &str) -> Result<Payoff> {
    match n {
        Number::Text(t) if matches!(t.trim(), "-inf" | "-infinity" | "-Infinity") => Ok(Payoff::NegInf),
        other => Ok(Payoff::Finite(rational(other, field)?)),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = parse_json(text, "instance")?;
    let actions = file
        .actions
        .iter()
        .map(|a| {
            let types = a
                .types
                .iter()
                .map(|t| {
                    let field = |f: &str| format!("action {:?} type {:?} {f}", a.name, t.name);
                    Ok(ActionType {
                        name: t.name.clone(),
                        prob: rational(&t.prob, &field("prob"))?,
                        sender: rational(&t.sender, &field("sender"))?,
                        receiver: payoff(&t.receiver, &field("receiver"))?,
                    })
                })
                .collect::<Result<_>>()?;
            Ok(Action {
                name: a.name.clone(),
                types,
            })
        })
        .collect::<Result<_>>()?;
    Instance::new(actions)
}

pub fn parse_scheme(instance: &Instance, text: &str) -> Result<Scheme> {
    let file: SchemeFile = parse_json(text, "scheme")?;
    let n = instance.len();
    let mut rows = Vec::new();
    for (r, rule) in file.rules.iter().enumerate() {
        if rule.when.len() != n {
            return Err(Error::Schema(format!(
                "rules[{r}].when has {} entries for {n} actions",
                rule.when.len()
            )));
        }
        for (i, name) in rule.when.iter().enumerate() {
            if name != "*" && !instance.actions()[i].types.iter().any(|t| &t.name == name) {
                return Err(Error::Schema(format!("rules[{r}].when: action {i} has no type {name:?}")));
            }
        }
        let mut row = vec![BigRational::zero(); n];
        for (action, p) in &rule.recommend {
            let i = instance
                .action_index(action)
                .ok_or_else(|| Error::Schema(format!("rules[{r}].recommend: unknown action {action:?}")))?;
            row[i] = rational(p, &format!("rules[{r}].recommend[{action:?}]"))?;
        }
        rows.push(row);
    }
    let probs = instance
        .profiles()
        .iter()
        .map(|p| {
            let names: Vec<&str> = p
                .types
                .iter()
                .enumerate()
                .map(|(i, &t)| instance.action_type(i, t).name.as_str())
                .collect();
            file.rules
                .iter()
                .position(|rule| rule.when.iter().zip(&names).all(|(w, n)| w == "*" || w == n))
                .map(|r| rows[r].clone())
                .ok_or_else(|| Error::Schema(format!("no scheme rule matches profile {names:?}")))
        })
        .collect::<Result<_>>()?;
    Scheme::new(instance, probs)
}

fn q(v: &BigRational) -> Value {
    Value::String(v.to_string())
}

/// Check result and second-order rule as JSON; fractions are `"p/q"` strings.
pub fn write_check(instance: &Instance, check: &PersuasionCheck, rule: &SecondOrderRule, overall: &[BigRational]) -> Value {
    let name = |i: usize| instance.actions()[i].name.clone();
    let violations: Vec<Value> = check
        .violations
        .iter()
        .map(|&(r, a)| serde_json::json!({"recommended": name(r), "alternative": name(a)}))
        .collect();
    let mut second = serde_json::Map::new();
    for (i, row) in rule.x.iter().enumerate() {
        let mut given = serde_json::Map::new();
        for (j, values) in row.iter().enumerate() {
            let by_type: serde_json::Map<String, Value> = values
                .iter()
                .enumerate()
                .map(|(t, v)| (instance.action_type(j, t).name.clone(), q(v)))
                .collect();
            given.insert(name(j), Value::Object(by_type));
        }
        second.insert(name(i), Value::Object(given));
    }
    let overall: serde_json::Map<String, Value> = overall.iter().enumerate().map(|(i, v)| (name(i), q(v))).collect();
    serde_json::json!({
        "persuasive": check.persuasive,
        "violations": violations,
        "recommendation": overall,
        "second_order": second,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::check_persuasive;
    use crate::table1::{table1_instance, table1_scheme};

    pub const TABLE1: &str = r#"{"actions":[
        {"name":"A","types":[{"name":"1","prob":0.5,"sender":100,"receiver":2},{"name":"2","prob":0.5,"sender":100,"receiver":"-inf"}]},
        {"name":"B","types":[{"name":"1","prob":0.99,"sender":1,"receiver":3},{"name":"2","prob":"1/100","sender":1,"receiver":"-inf"}]},
        {"name":"C","types":[{"name":"1","prob":0.5,"sender":0,"receiver":0},{"name":"2","prob":0.5,"sender":0,"receiver":6}]}]}"#;

    pub const SCHEME: &str = r#"{"rules":[
        {"when":["1","*","1"],"recommend":{"A":1}},
        {"when":["1","*","2"],"recommend":{"A":"1/2","C":"1/2"}},
        {"when":["2","1","*"],"recommend":{"B":1}},
        {"when":["*","*","*"],"recommend":{"C":1}}]}"#;

    #[test]
    fn reads_the_table_instance() {
        let inst = parse_instance(TABLE1).unwrap();
        assert_eq!(inst, table1_instance());
        let scheme = parse_scheme(&inst, SCHEME).unwrap();
        assert_eq!(scheme, table1_scheme(&inst));
        assert!(check_persuasive(&inst, &scheme).persuasive);
    }

    #[test]
    fn schema_errors() {
        let inst = parse_instance(TABLE1).unwrap();
        let partial = r#"{"rules":[{"when":["1","*","*"],"recommend":{"A":1}}]}"#;
        assert!(matches!(parse_scheme(&inst, partial), Err(Error::Schema(_))));
        let unknown = r#"{"rules":[{"when":["*","*","*"],"recommend":{"D":1}}]}"#;
        assert!(matches!(parse_scheme(&inst, unknown), Err(Error::Schema(_))));
        let bad = TABLE1.replace("\"sender\":100,\"receiver\":2", "\"sender\":\"x\",\"receiver\":2");
        assert!(matches!(parse_instance(&bad), Err(Error::Core(_))));
    }
}
