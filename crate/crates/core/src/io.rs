//! JSON file formats for environments, interim rules, priors and dice.
//!
//! Numbers may be written as JSON numbers or as `"p/q"` strings. Doubles are
//! written in shortest round-trip form, rationals as `"p/q"` strings. Type keys
//! are `"<candidate>:<type name>"`.

use std::collections::BTreeMap;

use num::BigRational;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::dice::{DiceSystem, Die};
use crate::env::{Environment, TypeLayout};
use crate::error::{Error, Result};
use crate::matroid::{Constraint, Matroid, SetFamily};
use crate::numeric::{parse_rational, Scalar};

/// A number as written in a data file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_rational(&self, field: &str) -> Result<BigRational> {
        match self {
            Number::Float(v) => Ok(BigRational::from_f64_lossy(*v)),
            Number::Text(text) => parse_rational(text)
                .ok_or_else(|| Error::Parse(format!("{field}: {text:?} is not a number or \"p/q\" fraction"))),
        }
    }

    /// Reads the number in the scalar type `S`. Doubles stay doubles in
    /// double mode; fractions are exact in rational mode.
    pub fn to_scalar<S: Scalar>(&self, field: &str) -> Result<S> {
        match self {
            Number::Float(v) if !S::EXACT => Ok(S::from_f64_lossy(*v)),
            _ => Ok(S::from_rational(&self.to_rational(field)?)),
        }
    }
}

/// Serializes a scalar: a JSON number in double mode, a `"p/q"` string when exact.
pub fn scalar_json<S: Scalar>(value: &S) -> Value {
    if S::EXACT {
        Value::String(value.to_string())
    } else {
        float_json(value.to_f64_lossy())
    }
}

/// JSON number for a finite double; non-finite values become strings so the
/// output stays valid JSON.
pub fn float_json(value: f64) -> Value {
    serde_json::Number::from_f64(value)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(value.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntry {
    pub name: String,
    pub prob: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateEntry {
    pub types: Vec<TypeEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConstraintEntry {
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<usize>>, caps: Vec<usize> },
    Explicit { independent: Vec<Vec<usize>> },
    /// Downward-closed family that need not be a matroid.
    Family { sets: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentFile {
    pub candidates: Vec<CandidateEntry>,
    pub matroid: ConstraintEntry,
}

/// Extra top-level fields (such as `"stderr"` in simulation output) are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterimFile {
    pub x: BTreeMap<String, Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiceFile {
    pub dice: BTreeMap<String, Vec<(f64, Number)>>,
}

/// Prior shared by all candidates of an i.i.d. environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorFile {
    pub types: Vec<TypeEntry>,
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what} file: {e}")))
}

impl ConstraintEntry {
    pub fn to_constraint(&self, ground: usize) -> Result<Constraint> {
        Ok(match self {
            ConstraintEntry::Uniform { k } => Constraint::Matroid(Matroid::uniform(ground, *k)?),
            ConstraintEntry::Partition { blocks, caps } => {
                Constraint::Matroid(Matroid::partition(ground, blocks, caps)?)
            }
            ConstraintEntry::Explicit { independent } => {
                Constraint::Matroid(Matroid::explicit(ground, independent)?)
            }
            ConstraintEntry::Family { sets } => Constraint::Family(SetFamily::new(ground, sets)?),
        })
    }

    pub fn from_constraint(constraint: &Constraint) -> Self {
        let members = |set: &crate::sets::CandSet| set.iter().collect::<Vec<_>>();
        match constraint {
            Constraint::Matroid(Matroid::Uniform { k, .. }) => ConstraintEntry::Uniform { k: *k },
            Constraint::Matroid(Matroid::Partition { blocks, caps, .. }) => ConstraintEntry::Partition {
                blocks: blocks.iter().map(members).collect(),
                caps: caps.clone(),
            },
            Constraint::Matroid(Matroid::Explicit(family)) => ConstraintEntry::Explicit {
                independent: family.maximal_sets().iter().map(members).collect(),
            },
            Constraint::Family(family) => ConstraintEntry::Family {
                sets: family.maximal_sets().iter().map(members).collect(),
            },
        }
    }
}

impl EnvironmentFile {
    pub fn to_environment<S: Scalar>(&self) -> Result<Environment<S>> {
        let names = self
            .candidates
            .iter()
            .map(|c| c.types.iter().map(|t| t.name.clone()).collect())
            .collect();
        let layout = TypeLayout::new(names)?;
        let mut prior = Vec::with_capacity(layout.types());
        for (i, candidate) in self.candidates.iter().enumerate() {
            for entry in &candidate.types {
                prior.push(entry.prob.to_scalar(&format!("candidates[{i}] type {:?} prob", entry.name))?);
            }
        }
        let constraint = self.matroid.to_constraint(layout.candidates())?;
        Environment::new(layout, prior, constraint)
    }

    pub fn from_environment<S: Scalar>(env: &Environment<S>) -> Self {
        let layout = env.layout();
        let candidates = (0..layout.candidates())
            .map(|i| CandidateEntry {
                types: layout
                    .range(i)
                    .expect("candidate in range")
                    .map(|t| TypeEntry {
                        name: layout.name(t).to_string(),
                        prob: number_of(env.f(t)),
                    })
                    .collect(),
            })
            .collect();
        EnvironmentFile {
            candidates,
            matroid: ConstraintEntry::from_constraint(env.constraint()),
        }
    }
}

fn number_of<S: Scalar>(value: &S) -> Number {
    match scalar_json(value) {
        Value::Number(n) => Number::Float(n.as_f64().unwrap_or(f64::NAN)),
        other => Number::Text(other.as_str().unwrap_or_default().to_string()),
    }
}

/// Resolves every key to a type index; unknown keys and missing types are
/// schema errors.
fn by_type<V>(layout: &TypeLayout, entries: &BTreeMap<String, V>, what: &str) -> Result<Vec<Option<(String, V)>>>
where
    V: Clone,
{
    let mut slots: Vec<Option<(String, V)>> = vec![None; layout.types()];
    for (key, value) in entries {
        let t = layout
            .lookup(key)
            .ok_or_else(|| Error::Schema(format!("{what}: unknown type key {key:?}")))?;
        slots[t] = Some((key.clone(), value.clone()));
    }
    if let Some(t) = slots.iter().position(Option::is_none) {
        return Err(Error::Schema(format!("{what}: missing type key {:?}", layout.key(t))));
    }
    Ok(slots)
}

pub fn parse_environment<S: Scalar>(text: &str) -> Result<Environment<S>> {
    parse_json::<EnvironmentFile>(text, "environment")?.to_environment()
}

pub fn write_environment<S: Scalar>(env: &Environment<S>) -> Value {
    serde_json::to_value(EnvironmentFile::from_environment(env)).expect("environment serializes")
}

/// Reads an interim rule as a vector indexed by global type index.
pub fn parse_interim<S: Scalar>(layout: &TypeLayout, text: &str) -> Result<Vec<S>> {
    let file: InterimFile = parse_json(text, "interim")?;
    by_type(layout, &file.x, "interim rule")?
        .into_iter()
        .map(|slot| {
            let (key, value) = slot.expect("all slots filled");
            value.to_scalar(&format!("x[{key:?}]"))
        })
        .collect()
}

pub fn write_interim<S: Scalar>(layout: &TypeLayout, x: &[S]) -> Value {
    let map: Map<String, Value> = x
        .iter()
        .enumerate()
        .map(|(t, v)| (layout.key(t), scalar_json(v)))
        .collect();
    serde_json::json!({ "x": map })
}

pub fn parse_dice<S: Scalar>(layout: &TypeLayout, text: &str) -> Result<DiceSystem<S>> {
    let file: DiceFile = parse_json(text, "dice")?;
    let dice = by_type(layout, &file.dice, "dice")?
        .into_iter()
        .map(|slot| {
            let (key, faces) = slot.expect("all slots filled");
            let faces = faces
                .iter()
                .enumerate()
                .map(|(k, (v, p))| Ok((*v, p.to_scalar(&format!("dice[{key:?}][{k}] probability"))?)))
                .collect::<Result<Vec<_>>>()?;
            Die::new(faces).map_err(|e| Error::Parse(format!("dice[{key:?}]: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiceSystem::new(dice))
}

pub fn write_dice<S: Scalar>(layout: &TypeLayout, dice: &DiceSystem<S>) -> Value {
    let map: Map<String, Value> = dice
        .dice
        .iter()
        .enumerate()
        .map(|(t, die)| {
            let faces: Vec<Value> = die
                .faces()
                .iter()
                .map(|(v, p)| Value::Array(vec![float_json(*v), scalar_json(p)]))
                .collect();
            (layout.key(t), Value::Array(faces))
        })
        .collect();
    serde_json::json!({ "dice": map })
}

/// Reads a shared prior: type names and probabilities.
pub fn parse_prior<S: Scalar>(text: &str) -> Result<(Vec<String>, Vec<S>)> {
    let file: PriorFile = parse_json(text, "prior")?;
    let names = file.types.iter().map(|t| t.name.clone()).collect();
    let probs = file
        .types
        .iter()
        .map(|t| t.prob.to_scalar(&format!("prior type {:?} prob", t.name)))
        .collect::<Result<_>>()?;
    Ok((names, probs))
}

/// Reads a symmetric interim rule keyed by type name. Keys of the form
/// `"<candidate>:<name>"` are also accepted, as long as every candidate
/// agrees.
pub fn parse_symmetric_interim<S: Scalar>(names: &[String], text: &str) -> Result<Vec<S>> {
    let file: InterimFile = parse_json(text, "interim")?;
    let mut values: Vec<Option<S>> = vec![None; names.len()];
    for (key, value) in &file.x {
        let name = key.split_once(':').map_or(key.as_str(), |(_, n)| n);
        let t = names
            .iter()
            .position(|n| n == name)
            .or_else(|| names.iter().position(|n| n == key))
            .ok_or_else(|| Error::Schema(format!("interim rule: unknown type key {key:?}")))?;
        let v: S = value.to_scalar(&format!("x[{key:?}]"))?;
        match &values[t] {
            Some(old) if *old != v => {
                return Err(Error::Schema(format!(
                    "interim rule: type {name:?} has different values across candidates"
                )))
            }
            _ => values[t] = Some(v),
        }
    }
    values
        .into_iter()
        .zip(names)
        .map(|(v, n)| v.ok_or_else(|| Error::Schema(format!("interim rule: missing type key {n:?}"))))
        .collect()
}

/// Pretty JSON text with a trailing newline.
pub fn to_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    const ENV: &str = r#"{"candidates":[{"types":[{"name":"lo","prob":0.5},{"name":"hi","prob":"1/2"}]},
        {"types":[{"name":"only","prob":1}]}],"matroid":{"kind":"uniform","k":1}}"#;

    #[test]
    fn reads_environment_in_both_modes() {
        let env: Environment<f64> = parse_environment(ENV).unwrap();
        assert_eq!(env.types(), 3);
        assert_eq!(env.layout().key(1), "0:hi");
        assert!(env.is_single_winner());
        let exact: Environment<BigRational> = parse_environment(ENV).unwrap();
        assert_eq!(exact.f(1), &rational(1, 2));
    }

    #[test]
    fn environment_round_trips() {
        for text in [
            ENV,
            r#"{"candidates":[{"types":[{"name":"a","prob":1}]},{"types":[{"name":"b","prob":1}]},
               {"types":[{"name":"c","prob":1}]}],"matroid":{"kind":"partition","blocks":[[0,1],[2]],"caps":[1,1]}}"#,
            r#"{"candidates":[{"types":[{"name":"a","prob":1}]},{"types":[{"name":"b","prob":1}]}],
               "matroid":{"kind":"explicit","independent":[[0],[1]]}}"#,
            r#"{"candidates":[{"types":[{"name":"a","prob":1}]},{"types":[{"name":"b","prob":1}]}],
               "matroid":{"kind":"family","sets":[[0,1]]}}"#,
        ] {
            let env: Environment<f64> = parse_environment(text).unwrap();
            let again: Environment<f64> = parse_environment(&to_text(&write_environment(&env))).unwrap();
            assert_eq!(env, again);
        }
    }

    #[test]
    fn interim_and_dice_round_trip() {
        let env: Environment<f64> = parse_environment(ENV).unwrap();
        let x: Vec<f64> = parse_interim(env.layout(), r#"{"x":{"0:lo":0.1,"0:hi":"1/3","1:only":0.7}}"#).unwrap();
        assert_eq!(x[1], 1.0 / 3.0);
        let text = to_text(&write_interim(env.layout(), &x));
        assert_eq!(parse_interim::<f64>(env.layout(), &text).unwrap(), x);

        let dice = DiceSystem::new(vec![
            Die::two_sided(2.0, 0.1),
            Die::new(vec![(1.0, 0.25), (3.5, 0.75)]).unwrap(),
            Die::point(0.5),
        ]);
        let text = to_text(&write_dice(env.layout(), &dice));
        assert_eq!(parse_dice::<f64>(env.layout(), &text).unwrap(), dice);
    }

    #[test]
    fn exact_values_are_written_as_fractions() {
        let env: Environment<BigRational> = parse_environment(ENV).unwrap();
        let x = vec![rational(1, 3), rational(0, 1), rational(5, 7)];
        let value = write_interim(env.layout(), &x);
        assert_eq!(value["x"]["0:lo"], Value::String("1/3".into()));
        assert_eq!(parse_interim::<BigRational>(env.layout(), &to_text(&value)).unwrap(), x);
    }

    #[test]
    fn errors_name_the_problem() {
        let env: Environment<f64> = parse_environment(ENV).unwrap();
        let missing = parse_interim::<f64>(env.layout(), r#"{"x":{"0:lo":0.1,"0:hi":0.2}}"#).unwrap_err();
        assert!(matches!(&missing, Error::Schema(m) if m.contains("1:only")), "{missing}");
        let unknown = parse_interim::<f64>(env.layout(), r#"{"x":{"0:lo":0.1,"0:hi":0.2,"1:only":0,"2:x":0}}"#)
            .unwrap_err();
        assert!(matches!(unknown, Error::Schema(_)));
        let bad = parse_interim::<f64>(env.layout(), r#"{"x":{"0:lo":"one","0:hi":0.2,"1:only":0}}"#).unwrap_err();
        assert!(matches!(&bad, Error::Parse(m) if m.contains("0:lo")), "{bad}");
        let no_prob = parse_environment::<f64>(r#"{"candidates":[{"types":[{"name":"a"}]}],"matroid":{"kind":"uniform","k":1}}"#)
            .unwrap_err();
        assert!(matches!(&no_prob, Error::Parse(m) if m.contains("prob")), "{no_prob}");
    }

    #[test]
    fn symmetric_files() {
        let (names, f) = parse_prior::<f64>(r#"{"types":[{"name":"a","prob":0.25},{"name":"b","prob":0.75}]}"#).unwrap();
        assert_eq!(names, ["a", "b"]);
        assert_eq!(f, [0.25, 0.75]);
        let x: Vec<f64> = parse_symmetric_interim(&names, r#"{"x":{"b":0.2,"a":0.9}}"#).unwrap();
        assert_eq!(x, [0.9, 0.2]);
        let x: Vec<f64> = parse_symmetric_interim(&names, r#"{"x":{"0:b":0.2,"1:b":0.2,"0:a":0.9}}"#).unwrap();
        assert_eq!(x, [0.9, 0.2]);
        assert!(parse_symmetric_interim::<f64>(&names, r#"{"x":{"0:b":0.2,"1:b":0.3,"a":1}}"#).is_err());
        assert!(parse_symmetric_interim::<f64>(&names, r#"{"x":{"a":1}}"#).is_err());
    }
}
