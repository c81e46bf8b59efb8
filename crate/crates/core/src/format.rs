//! Instance, interim and dump files. Every rational is a `"p/q"` or integer
//! string; unknown fields are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::constraints::{ConstraintSystem, IndexSet, OracleTable, SubmodularOracle, TableKeying};
use crate::error::{Error, Result};
use crate::model::{Budget, Instance, InterimAllocation, OfflineAllocation, OnlinePolicy, RewardModel};
use crate::scalar::serde_rational;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub rewards: RewardsDoc,
    pub constraints: ConstraintsDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardsDoc {
    Independent { marginals: Vec<Vec<ValueProb>> },
    Joint { table: Vec<ProfileProb> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueProb {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational")]
    pub prob: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileProb {
    #[serde(with = "serde_rational::vec")]
    pub profile: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub prob: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintsDoc {
    Matrix {
        #[serde(rename = "A", with = "serde_rational::matrix")]
        a: Vec<Vec<Rational>>,
        #[serde(with = "serde_rational::vec")]
        b: Vec<Rational>,
    },
    Polymatroid {
        g: OracleDoc,
    },
    OnlinePolymatroid {
        g: OracleDoc,
    },
    Minkowski {
        #[serde(with = "serde_rational::vec")]
        coeffs: Vec<Rational>,
        terms: Vec<ConstraintsDoc>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleDoc {
    Table {
        keying: KeyingDoc,
        entries: Vec<EntryDoc>,
    },
    G1 {
        #[serde(rename = "B", with = "serde_rational")]
        cap: Rational,
    },
    G2 {
        #[serde(rename = "T", with = "serde_rational")]
        threshold: Rational,
    },
    G3 {
        #[serde(rename = "T", with = "serde_rational")]
        threshold: Rational,
    },
    UniformRank {
        #[serde(with = "serde_rational")]
        rank: Rational,
    },
    Contraction {
        base: Box<OracleDoc>,
        base_dim: usize,
        /// 1-based.
        element: usize,
        #[serde(with = "serde_rational")]
        reward: Rational,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyingDoc {
    Static,
    Subset,
    Profile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    /// 1-based indices.
    pub set: Vec<usize>,
    #[serde(default, with = "serde_rational::vec", skip_serializing_if = "Vec::is_empty")]
    pub rewards: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

fn oracle_doc(g: &SubmodularOracle) -> OracleDoc {
    match g {
        SubmodularOracle::Table(t) => OracleDoc::Table {
            keying: match t.keying {
                TableKeying::Static => KeyingDoc::Static,
                TableKeying::OnSubset => KeyingDoc::Subset,
                TableKeying::OnProfile => KeyingDoc::Profile,
            },
            entries: t
                .entries
                .iter()
                .map(|((set, rewards), value)| EntryDoc {
                    set: set.iter().map(|l| l + 1).collect(),
                    rewards: rewards.clone(),
                    value: value.clone(),
                })
                .collect(),
        },
        SubmodularOracle::G1 { cap } => OracleDoc::G1 { cap: cap.clone() },
        SubmodularOracle::G2 { threshold } => OracleDoc::G2 {
            threshold: threshold.clone(),
        },
        SubmodularOracle::G3 { threshold } => OracleDoc::G3 {
            threshold: threshold.clone(),
        },
        SubmodularOracle::UniformRank { rank } => OracleDoc::UniformRank { rank: rank.clone() },
        SubmodularOracle::Contraction {
            base,
            base_dim,
            element,
            reward,
        } => OracleDoc::Contraction {
            base: Box::new(oracle_doc(base)),
            base_dim: *base_dim,
            element: element + 1,
            reward: reward.clone(),
        },
    }
}

fn oracle_from(doc: OracleDoc) -> Result<SubmodularOracle> {
    Ok(match doc {
        OracleDoc::Table { keying, entries } => {
            let keying = match keying {
                KeyingDoc::Static => TableKeying::Static,
                KeyingDoc::Subset => TableKeying::OnSubset,
                KeyingDoc::Profile => TableKeying::OnProfile,
            };
            let mut map = BTreeMap::new();
            for e in entries {
                if e.set.iter().any(|&l| l == 0 || l > crate::constraints::MAX_GROUND) {
                    return Err(Error::Parse(format!("table set {:?} must use indices 1..", e.set)));
                }
                let set = IndexSet::from_indices(e.set.iter().map(|l| l - 1));
                if set.len() != e.set.len() {
                    return Err(Error::Parse(format!("table set {:?} repeats an index", e.set)));
                }
                let expected = match keying {
                    TableKeying::Static => Some(0),
                    TableKeying::OnSubset => Some(set.len()),
                    TableKeying::OnProfile => None,
                };
                if let Some(len) = expected {
                    if e.rewards.len() != len {
                        return Err(Error::Parse(format!(
                            "table entry for {set} has {} rewards, expected {len}",
                            e.rewards.len()
                        )));
                    }
                }
                if map.insert((set, e.rewards), e.value).is_some() {
                    return Err(Error::Parse(format!("duplicate table entry for {set}")));
                }
            }
            SubmodularOracle::Table(OracleTable {
                keying,
                entries: map,
            })
        }
        OracleDoc::G1 { cap } => SubmodularOracle::G1 { cap },
        OracleDoc::G2 { threshold } => SubmodularOracle::G2 { threshold },
        OracleDoc::G3 { threshold } => SubmodularOracle::G3 { threshold },
        OracleDoc::UniformRank { rank } => SubmodularOracle::UniformRank { rank },
        OracleDoc::Contraction {
            base,
            base_dim,
            element,
            reward,
        } => {
            if element == 0 {
                return Err(Error::Parse("contraction element is 1-based".into()));
            }
            SubmodularOracle::Contraction {
                base: Box::new(oracle_from(*base)?),
                base_dim,
                element: element - 1,
                reward,
            }
        }
    })
}

pub fn constraints_doc(cs: &ConstraintSystem) -> ConstraintsDoc {
    match cs {
        ConstraintSystem::Matrix { a, b } => ConstraintsDoc::Matrix {
            a: a.clone(),
            b: b.clone(),
        },
        ConstraintSystem::Polymatroid(g) => ConstraintsDoc::Polymatroid { g: oracle_doc(g) },
        ConstraintSystem::OnlinePolymatroid(g) => ConstraintsDoc::OnlinePolymatroid { g: oracle_doc(g) },
        ConstraintSystem::Minkowski { coeffs, terms } => ConstraintsDoc::Minkowski {
            coeffs: coeffs.clone(),
            terms: terms.iter().map(constraints_doc).collect(),
        },
    }
}

pub fn constraints_from(doc: ConstraintsDoc) -> Result<ConstraintSystem> {
    Ok(match doc {
        ConstraintsDoc::Matrix { a, b } => ConstraintSystem::Matrix { a, b },
        ConstraintsDoc::Polymatroid { g } => ConstraintSystem::Polymatroid(oracle_from(g)?),
        ConstraintsDoc::OnlinePolymatroid { g } => ConstraintSystem::OnlinePolymatroid(oracle_from(g)?),
        ConstraintsDoc::Minkowski { coeffs, terms } => ConstraintSystem::Minkowski {
            coeffs,
            terms: terms.into_iter().map(constraints_from).collect::<Result<_>>()?,
        },
    })
}

pub fn rewards_doc(model: &RewardModel) -> RewardsDoc {
    match model.joint_rows() {
        Some(rows) => RewardsDoc::Joint {
            table: rows
                .iter()
                .map(|(idx, p)| ProfileProb {
                    profile: model.values(idx),
                    prob: p.clone(),
                })
                .collect(),
        },
        None => RewardsDoc::Independent {
            marginals: (0..model.n())
                .map(|j| {
                    model
                        .support(j)
                        .iter()
                        .zip(model.marginal(j))
                        .map(|(v, p)| ValueProb {
                            value: v.clone(),
                            prob: p.clone(),
                        })
                        .collect()
                })
                .collect(),
        },
    }
}

pub fn rewards_from(doc: RewardsDoc) -> Result<RewardModel> {
    match doc {
        RewardsDoc::Independent { marginals } => RewardModel::independent(
            marginals
                .into_iter()
                .map(|m| m.into_iter().map(|vp| (vp.value, vp.prob)).collect())
                .collect(),
        ),
        RewardsDoc::Joint { table } => {
            RewardModel::joint(table.into_iter().map(|r| (r.profile, r.prob)).collect())
        }
    }
}

impl InstanceFile {
    pub fn from_instance(instance: &Instance) -> Self {
        InstanceFile {
            n: instance.n(),
            rewards: rewards_doc(&instance.rewards),
            constraints: constraints_doc(&instance.constraints),
        }
    }

    pub fn into_instance(self, budget: Budget) -> Result<Instance> {
        let rewards = rewards_from(self.rewards)?;
        if rewards.n() != self.n {
            return Err(Error::Structural(format!(
                "\"n\" is {} but the reward model has {} coordinates",
                self.n,
                rewards.n()
            )));
        }
        Instance::with_budget(rewards, constraints_from(self.constraints)?, budget)
    }
}

fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_instance(text: &str, budget: Budget) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(json_error)?;
    file.into_instance(budget)
}

pub fn instance_value(instance: &Instance) -> Value {
    serde_json::to_value(InstanceFile::from_instance(instance)).expect("instance documents serialize")
}

pub fn instance_from_value(value: Value, budget: Budget) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_value(value).map_err(json_error)?;
    file.into_instance(budget)
}

pub fn emit_instance(instance: &Instance) -> String {
    let mut text = serde_json::to_string_pretty(&InstanceFile::from_instance(instance))
        .expect("instance documents serialize");
    text.push('\n');
    text
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterimFile {
    pub interim: Vec<Vec<LevelDoc>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelDoc {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    #[serde(with = "serde_rational")]
    pub level: Rational,
}

/// Reads `Q_j(r_j)` keyed by reward value; every support value of every
/// coordinate must appear exactly once.
pub fn parse_interim(text: &str, model: &RewardModel) -> Result<InterimAllocation> {
    let file: InterimFile = serde_json::from_str(text).map_err(json_error)?;
    if file.interim.len() != model.n() {
        return Err(Error::Structural(format!(
            "interim file has {} coordinates, model has {}",
            file.interim.len(),
            model.n()
        )));
    }
    let mut levels = Vec::with_capacity(model.n());
    for (j, entries) in file.interim.into_iter().enumerate() {
        let support = model.support(j);
        let mut row: Vec<Option<Rational>> = vec![None; support.len()];
        for e in entries {
            let k = support.iter().position(|v| *v == e.value).ok_or_else(|| {
                Error::Structural(format!("coordinate {}: {} is not a support value", j + 1, e.value))
            })?;
            if row[k].replace(e.level).is_some() {
                return Err(Error::Structural(format!(
                    "coordinate {}: value {} listed twice",
                    j + 1,
                    e.value
                )));
            }
        }
        let row = row
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or_else(|| {
                    Error::Structural(format!("coordinate {}: missing value {}", j + 1, support[k]))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        levels.push(row);
    }
    InterimAllocation::from_levels(model, levels)
}

pub fn emit_interim(q: &InterimAllocation, model: &RewardModel) -> String {
    let file = InterimFile {
        interim: (0..model.n())
            .map(|j| {
                model
                    .support(j)
                    .iter()
                    .zip(q.coordinate(j))
                    .map(|(v, l)| LevelDoc {
                        value: v.clone(),
                        level: l.clone(),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("interim documents serialize")
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

/// Off-line allocation keyed by reward profile.
pub fn dump_offline(model: &RewardModel, w: &OfflineAllocation) -> Value {
    Value::Array(
        w.by_profile
            .iter()
            .map(|(idx, alloc)| {
                serde_json::json!({
                    "profile": strings(&model.values(idx)),
                    "w": strings(alloc),
                })
            })
            .collect(),
    )
}

/// On-line decisions keyed by history.
pub fn dump_policy(model: &RewardModel, policy: &OnlinePolicy) -> Value {
    Value::Array(
        policy
            .stages
            .iter()
            .flat_map(|stage| stage.iter())
            .map(|(idx, q)| {
                serde_json::json!({
                    "history": strings(&model.values(idx)),
                    "q": q.to_string(),
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: &str = r#"{
        "n": 2,
        "rewards": {"type": "independent", "marginals": [
            [{"value": "1", "prob": "1"}],
            [{"value": "0", "prob": "1/2"}, {"value": "2", "prob": "1/2"}]
        ]},
        "constraints": {"type": "matrix", "A": [["1", "1"]], "b": ["1"]}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let inst = parse_instance(E1, Budget::default()).unwrap();
        assert_eq!(inst.n(), 2);
        let again = parse_instance(&emit_instance(&inst), Budget::default()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = E1.replace("\"n\": 2,", "\"n\": 2, \"extra\": 1,");
        assert!(matches!(parse_instance(&bad, Budget::default()), Err(Error::Parse(_))));
        let bad = E1.replace("\"b\": [\"1\"]", "\"b\": [\"1\"], \"c\": []");
        assert!(matches!(parse_instance(&bad, Budget::default()), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_decimals_and_mismatched_n() {
        let bad = E1.replace("\"1/2\"", "\"0.5\"");
        assert!(matches!(parse_instance(&bad, Budget::default()), Err(Error::Parse(_))));
        let bad = E1.replace("\"n\": 2", "\"n\": 3");
        assert!(matches!(parse_instance(&bad, Budget::default()), Err(Error::Structural(_))));
    }

    #[test]
    fn oracle_documents_round_trip() {
        let text = r#"{
            "n": 2,
            "rewards": {"type": "joint", "table": [
                {"profile": ["1", "2"], "prob": "1/2"},
                {"profile": ["1", "0"], "prob": "1/2"}
            ]},
            "constraints": {"type": "minkowski", "coeffs": ["1", "1/2"], "terms": [
                {"type": "online_polymatroid", "g": {"kind": "g1", "B": "3"}},
                {"type": "polymatroid", "g": {"kind": "table", "keying": "static", "entries": [
                    {"set": [], "value": "0"}, {"set": [1], "value": "1"},
                    {"set": [2], "value": "1"}, {"set": [1, 2], "value": "1"}
                ]}}
            ]}
        }"#;
        let inst = parse_instance(text, Budget::default()).unwrap();
        assert!(!inst.rewards.is_independent());
        let again = parse_instance(&emit_instance(&inst), Budget::default()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn interim_files() {
        let inst = parse_instance(E1, Budget::default()).unwrap();
        let text = r#"{"interim": [[{"value": "1", "level": "1/4"}],
            [{"value": "2", "level": "1/2"}, {"value": "0", "level": "0"}]]}"#;
        let q = parse_interim(text, &inst.rewards).unwrap();
        assert_eq!(q.coordinate(1), &[Rational::from_integer(0.into()), crate::rat(1, 2)]);
        assert_eq!(parse_interim(&emit_interim(&q, &inst.rewards), &inst.rewards).unwrap(), q);
        let missing = r#"{"interim": [[{"value": "1", "level": "1/4"}], [{"value": "2", "level": "1/2"}]]}"#;
        assert!(parse_interim(missing, &inst.rewards).is_err());
    }
}
