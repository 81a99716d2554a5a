//! Versioned JSON artifacts passed between pipeline stages.
//!
//! Every file is an envelope `{schema_version, kind, payload}`; loading
//! checks both fields so stale model files fail loudly instead of
//! misbehaving. The garrote file embeds its group rules, so `predict` needs
//! no side channel.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::data::ColumnInfo;
use crate::error::{Error, Result};
use crate::forest::Forest;
use crate::garrote::GarroteModel;
use crate::ruleens::LassoModel;
use crate::ruleset::{ExtractStats, GroupFit, InteractionPattern, WeightedRule};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: u32,
    kind: String,
    payload: T,
}

fn save<T: Serialize>(path: &Path, kind: &str, payload: &T) -> Result<()> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_string(),
        payload,
    };
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = std::io::BufWriter::new(file);
    serde_json::to_writer(&mut writer, &envelope)?;
    use std::io::Write;
    writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn load<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    // Peek at the header first so version errors beat payload parse errors.
    #[derive(Deserialize)]
    struct Header {
        schema_version: u32,
        kind: String,
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_slice(&bytes)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION,
            found: header.schema_version,
        });
    }
    if header.kind != kind {
        return Err(Error::ArtifactKind {
            expected: kind.to_string(),
            found: header.kind,
        });
    }
    let envelope: Envelope<T> = serde_json::from_slice(&bytes)?;
    Ok(envelope.payload)
}

/// Read only the artifact kind (used by `predict` to accept either model).
pub fn peek_kind(path: &Path) -> Result<String> {
    #[derive(Deserialize)]
    struct Header {
        kind: String,
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_slice(&bytes)?;
    Ok(header.kind)
}

pub fn save_forest(path: impl AsRef<Path>, forest: &Forest) -> Result<()> {
    save(path.as_ref(), "forest", forest)
}

pub fn load_forest(path: impl AsRef<Path>) -> Result<Forest> {
    load(path.as_ref(), "forest")
}

/// Canonical rule set plus the pattern grouping, as produced by
/// `rules extract`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RulesFile {
    pub columns: Vec<ColumnInfo>,
    pub rules: Vec<WeightedRule>,
    pub groups: Vec<GroupEntry>,
    pub stats: ExtractStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupEntry {
    pub signs: Vec<i8>,
    pub rule_ids: Vec<usize>,
}

impl RulesFile {
    pub fn from_groups(columns: &[ColumnInfo], groups: &[GroupFit], stats: ExtractStats) -> Self {
        let mut rules = Vec::new();
        let mut entries = Vec::new();
        for g in groups {
            let mut rule_ids = Vec::with_capacity(g.rules.len());
            for r in &g.rules {
                rule_ids.push(rules.len());
                rules.push(r.clone());
            }
            entries.push(GroupEntry {
                signs: g.pattern.signs.clone(),
                rule_ids,
            });
        }
        RulesFile {
            columns: columns.to_vec(),
            rules,
            groups: entries,
            stats,
        }
    }

    pub fn to_groups(&self) -> Result<Vec<GroupFit>> {
        self.groups
            .iter()
            .map(|entry| {
                let rules = entry
                    .rule_ids
                    .iter()
                    .map(|&id| {
                        self.rules
                            .get(id)
                            .cloned()
                            .ok_or_else(|| Error::Other(format!("rule id {id} out of range")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(GroupFit {
                    pattern: InteractionPattern {
                        signs: entry.signs.clone(),
                    },
                    rules,
                })
            })
            .collect()
    }
}

pub fn save_rules(path: impl AsRef<Path>, rules: &RulesFile) -> Result<()> {
    save(path.as_ref(), "rules", rules)
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RulesFile> {
    load(path.as_ref(), "rules")
}

/// Self-contained garrote model: selected patterns with their multipliers
/// and the rules behind each selected group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarroteFile {
    pub intercept: f64,
    pub groups: Vec<GarroteGroupEntry>,
    pub lambda: f64,
    pub budget_used: f64,
    pub training_sse: f64,
    pub group_count: usize,
    pub columns: Vec<ColumnInfo>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarroteGroupEntry {
    pub signs: Vec<i8>,
    pub gamma: f64,
    pub rules: Vec<WeightedRule>,
}

impl GarroteFile {
    pub fn new(model: &GarroteModel, groups: &[GroupFit], columns: &[ColumnInfo]) -> Self {
        let entries = model
            .gamma
            .iter()
            .map(|(pattern, &gamma)| {
                let rules = groups
                    .iter()
                    .find(|g| &g.pattern == pattern)
                    .map(|g| g.rules.clone())
                    .unwrap_or_default();
                GarroteGroupEntry {
                    signs: pattern.signs.clone(),
                    gamma,
                    rules,
                }
            })
            .collect();
        GarroteFile {
            intercept: model.intercept,
            groups: entries,
            lambda: model.lambda,
            budget_used: model.budget_used,
            training_sse: model.training_sse,
            group_count: model.group_count,
            columns: columns.to_vec(),
        }
    }

    pub fn model(&self) -> GarroteModel {
        let mut gamma = BTreeMap::new();
        for entry in &self.groups {
            gamma.insert(
                InteractionPattern {
                    signs: entry.signs.clone(),
                },
                entry.gamma,
            );
        }
        GarroteModel {
            gamma,
            intercept: self.intercept,
            budget_used: self.budget_used,
            lambda: self.lambda,
            training_sse: self.training_sse,
            group_count: self.group_count,
        }
    }

    pub fn group_fits(&self) -> Vec<GroupFit> {
        self.groups
            .iter()
            .map(|entry| GroupFit {
                pattern: InteractionPattern {
                    signs: entry.signs.clone(),
                },
                rules: entry.rules.clone(),
            })
            .collect()
    }
}

pub fn save_garrote(path: impl AsRef<Path>, file: &GarroteFile) -> Result<()> {
    save(path.as_ref(), "garrote", file)
}

pub fn load_garrote(path: impl AsRef<Path>) -> Result<GarroteFile> {
    load(path.as_ref(), "garrote")
}

/// Rule-lasso baseline model, stored with the rules it references.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LassoFile {
    pub model: LassoModel,
    pub rules: Vec<WeightedRule>,
    pub columns: Vec<ColumnInfo>,
}

pub fn save_lasso(path: impl AsRef<Path>, file: &LassoFile) -> Result<()> {
    save(path.as_ref(), "rule-lasso", file)
}

pub fn load_lasso(path: impl AsRef<Path>) -> Result<LassoFile> {
    load(path.as_ref(), "rule-lasso")
}
