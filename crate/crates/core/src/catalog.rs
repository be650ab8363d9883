//! Threat dictionary: a JSON catalog of known threat patterns mapped to
//! security requirement templates, and the matcher that ranks entries
//! against a threat.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    id_number, RequirementOrigin, SecurityRequirement, Stride, StrideSet, Threat,
};
use crate::risk::{self, RiskError};
use crate::workflow::StepStatus;
use crate::Project;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    SyntaxError {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate catalog entry id {0:?}")]
    DuplicateEntryId(String),
    #[error("catalog entry {entry:?} has an empty {field}")]
    EmptyField { entry: String, field: &'static str },
    #[error("elicitation needs step 7 complete (step 7 is {0})")]
    StepNotReady(StepStatus),
    #[error(transparent)]
    Risk(#[from] RiskError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights {
    pub stride: u32,
    pub keyword: u32,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            stride: 3,
            keyword: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub title: String,
    pub keywords: Vec<String>,
    pub stride_tags: StrideSet,
    pub requirement_text: String,
    #[serde(default)]
    pub references: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub catalog_id: String,
    pub version: u32,
    #[serde(default)]
    pub weights: Weights,
    pub entries: Vec<CatalogEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub threat_id: String,
    pub entry_id: String,
    pub score: u32,
    pub rank: u32,
}

// On-disk shape. Free-text `notes` are accepted and dropped.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    catalog_id: String,
    version: u32,
    #[serde(default)]
    weights: Option<Weights>,
    entries: Vec<RawEntry>,
    #[serde(default, rename = "notes")]
    _notes: Option<serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    title: String,
    keywords: Vec<String>,
    stride_tags: Vec<Stride>,
    requirement_text: String,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default, rename = "notes")]
    _notes: Option<serde_json::Value>,
}

/// Lowercased, punctuation-stripped, whitespace-split, deduplicated tokens.
/// Only ASCII is case-folded and only ASCII punctuation is removed.
pub fn tokenize(text: &str) -> BTreeSet<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| !c.is_ascii_punctuation())
                .map(|c| c.to_ascii_lowercase())
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

pub fn parse_catalog(text: &str) -> Result<Catalog, CatalogError> {
    let raw: RawCatalog = serde_json::from_str(text).map_err(|e| CatalogError::SyntaxError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(raw.entries.len());
    for e in raw.entries {
        if e.id.trim().is_empty() {
            return Err(CatalogError::EmptyField {
                entry: e.id,
                field: "id",
            });
        }
        if !seen.insert(e.id.clone()) {
            return Err(CatalogError::DuplicateEntryId(e.id));
        }
        let empty = |field| CatalogError::EmptyField {
            entry: e.id.clone(),
            field,
        };
        if e.title.trim().is_empty() {
            return Err(empty("title"));
        }
        if e.requirement_text.trim().is_empty() {
            return Err(empty("requirement_text"));
        }
        if e.stride_tags.is_empty() {
            return Err(empty("stride_tags"));
        }
        // Keywords go through the same normalization as threat text so a
        // keyword can only ever match a token.
        let mut keywords = Vec::new();
        for token in e.keywords.iter().flat_map(|k| tokenize(k)) {
            if !keywords.contains(&token) {
                keywords.push(token);
            }
        }
        if keywords.is_empty() {
            return Err(empty("keywords"));
        }
        entries.push(CatalogEntry {
            stride_tags: e.stride_tags.iter().copied().collect(),
            id: e.id,
            title: e.title,
            keywords,
            requirement_text: e.requirement_text,
            references: e.references,
        });
    }
    Ok(Catalog {
        catalog_id: raw.catalog_id,
        version: raw.version,
        weights: raw.weights.unwrap_or_default(),
        entries,
    })
}

fn threat_tokens(threat: &Threat) -> BTreeSet<String> {
    tokenize(&format!("{} {}", threat.title, threat.description))
}

fn score_with(tokens: &BTreeSet<String>, stride: StrideSet, entry: &CatalogEntry, w: Weights) -> u32 {
    let tags = stride.intersection(entry.stride_tags).len() as u32;
    let words = entry.keywords.iter().filter(|k| tokens.contains(*k)).count() as u32;
    w.stride * tags + w.keyword * words
}

/// Default-weighted score: 3 per shared STRIDE tag plus 1 per shared keyword.
pub fn match_score(threat: &Threat, entry: &CatalogEntry) -> u32 {
    match_score_weighted(threat, entry, Weights::default())
}

pub fn match_score_weighted(threat: &Threat, entry: &CatalogEntry, weights: Weights) -> u32 {
    score_with(&threat_tokens(threat), threat.stride, entry, weights)
}

/// Entries scoring above zero, best first (score desc, entry id asc),
/// truncated to `limit`.
pub fn suggest(threat: &Threat, catalog: &Catalog, limit: usize) -> Vec<Suggestion> {
    let tokens = threat_tokens(threat);
    let mut scored: Vec<(u32, &str)> = catalog
        .entries
        .iter()
        .map(|e| (score_with(&tokens, threat.stride, e, catalog.weights), e.id.as_str()))
        .filter(|(s, _)| *s > 0)
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    scored
        .into_iter()
        .take(limit)
        .enumerate()
        .map(|(i, (score, id))| Suggestion {
            threat_id: threat.id.clone(),
            entry_id: id.to_owned(),
            score,
            rank: i as u32 + 1,
        })
        .collect()
}

impl Catalog {
    pub fn entry(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElicitOutcome {
    pub project: Project,
    /// (threat id, requirement id) in creation order.
    pub created: Vec<(String, String)>,
    /// Threats no catalog entry matched; they need a manual requirement.
    pub manual: Vec<String>,
}

/// Walks threats from highest to lowest risk and attaches the rank-1
/// catalog requirement to every non-excluded threat that has none yet.
pub fn elicit_all(project: &Project, catalog: &Catalog) -> Result<ElicitOutcome, CatalogError> {
    let step7 = project.step_status(7).unwrap_or(StepStatus::Locked);
    if step7 != StepStatus::Complete {
        return Err(CatalogError::StepNotReady(step7));
    }
    let order = risk::prioritize(project)?;
    let mut next = project.clone();
    let mut next_number = next
        .requirements
        .iter()
        .filter_map(|r| id_number(&r.id))
        .max()
        .unwrap_or(0)
        + 1;
    let mut created = Vec::new();
    let mut manual = Vec::new();
    for (threat_id, _) in order {
        if next.assessment(&threat_id).is_some_and(|a| a.excluded)
            || next.requirements_for(&threat_id).next().is_some()
        {
            continue;
        }
        let threat = next.threat(&threat_id).expect("ranked threat exists");
        let Some(best) = suggest(threat, catalog, 1).into_iter().next() else {
            manual.push(threat_id);
            continue;
        };
        let entry = catalog.entry(&best.entry_id).expect("suggested entry exists");
        let id = format!("SR{next_number}");
        next_number += 1;
        next.requirements.push(SecurityRequirement {
            id: id.clone(),
            text: entry.requirement_text.clone(),
            threat_refs: vec![threat_id.clone()],
            origin: RequirementOrigin::Catalog {
                entry_id: entry.id.clone(),
            },
        });
        created.push((threat_id, id));
    }
    Ok(ElicitOutcome {
        project: next,
        created,
        manual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn threat(stride: &str, title: &str, description: &str) -> Threat {
        Threat {
            id: "T1".into(),
            title: title.into(),
            description: description.into(),
            stride: StrideSet::parse_letters(stride).unwrap(),
            asset_refs: vec!["A1".into()],
            point_refs: vec![],
            mitigated: false,
        }
    }

    fn entry(id: &str, stride: &str, keywords: &[&str]) -> CatalogEntry {
        CatalogEntry {
            id: id.into(),
            title: id.into(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            stride_tags: StrideSet::parse_letters(stride).unwrap(),
            requirement_text: format!("requirement {id}"),
            references: vec![],
        }
    }

    #[test]
    fn tokenizer() {
        let t = tokenize("The attacker might try to inject SQL commands into the application via Login.");
        assert!(t.contains("login"));
        assert!(t.contains("sql"));
        assert!(!t.contains("login."));
        assert_eq!(tokenize("person's data"), ["data", "persons"].map(String::from).into());
        assert!(tokenize("  ... ").is_empty());
    }

    #[test]
    fn score_examples() {
        let t1 = threat(
            "TE",
            "Malicious SQL data in user input",
            "The attacker might try to inject SQL commands into the application via Login.",
        );
        // Tag overlap {T} and keywords {sql, inject, input}.
        assert_eq!(match_score(&t1, &entry("sqli", "T", &["sql", "inject", "input"])), 6);
        assert_eq!(match_score(&t1, &entry("x", "R", &["firewall"])), 0);
        assert_eq!(match_score(&t1, &entry("y", "TE", &["nothing"])), 6);
    }

    #[test]
    fn suggestion_tie_break_is_lexicographic() {
        let t = threat("E", "a", "b");
        let cat = Catalog {
            catalog_id: "c".into(),
            version: 1,
            weights: Weights::default(),
            entries: vec![entry("a2", "E", &["zzz"]), entry("a10", "E", &["zzz"])],
        };
        let s = suggest(&t, &cat, 5);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].entry_id, "a10");
        assert_eq!(s[0].rank, 1);
        assert_eq!(s[1].entry_id, "a2");
        assert_eq!(s[1].rank, 2);
        assert_eq!(suggest(&t, &cat, 1).len(), 1);

        let none = Catalog {
            entries: vec![entry("x", "S", &["qqq"])],
            ..cat
        };
        assert!(suggest(&t, &none, 3).is_empty());
    }

    #[test]
    fn parse_errors() {
        let dup = r#"{"catalog_id":"c","version":1,"entries":[
            {"id":"sqli","title":"a","keywords":["sql"],"stride_tags":["T"],"requirement_text":"x"},
            {"id":"sqli","title":"b","keywords":["sql"],"stride_tags":["T"],"requirement_text":"y"}]}"#;
        assert_eq!(parse_catalog(dup), Err(CatalogError::DuplicateEntryId("sqli".into())));

        let empty = r#"{"catalog_id":"c","version":1,"entries":[
            {"id":"e1","title":"a","keywords":["sql"],"stride_tags":["T"],"requirement_text":"  "}]}"#;
        assert_eq!(
            parse_catalog(empty),
            Err(CatalogError::EmptyField {
                entry: "e1".into(),
                field: "requirement_text"
            })
        );

        let broken = "{\n  \"catalog_id\": \"c\",\n  \"version\": }";
        match parse_catalog(broken) {
            Err(CatalogError::SyntaxError { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn keywords_are_normalized() {
        let text = r#"{"catalog_id":"c","version":2,"weights":{"stride":5,"keyword":2},
            "notes":"hand curated",
            "entries":[{"id":"e1","title":"a","keywords":["SQL","sql","Inject!"],
            "stride_tags":["T","E"],"requirement_text":"x","references":["OWASP"]}]}"#;
        let c = parse_catalog(text).unwrap();
        assert_eq!(c.entries[0].keywords, ["sql", "inject"]);
        assert_eq!(c.entries[0].stride_tags.letters(), "TE");
        assert_eq!(c.weights, Weights { stride: 5, keyword: 2 });
    }
}
