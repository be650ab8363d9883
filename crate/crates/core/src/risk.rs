//! Threat risk scoring and prioritization.
//!
//! Scores are kept as integer tenths on a 0..=100 scale so that DREAD
//! averages (sum / 5) are exact: `sum / 5 == 2 * sum / 10`.

use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{id_number, Project};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RiskError {
    #[error("{field} = {value} is out of range {min}..={max}")]
    OutOfRange {
        field: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },
    #[error("missing risk assessment for {}", .0.join(", "))]
    MissingAssessment(Vec<String>),
    #[error("{0} not found")]
    NotFound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMethod {
    SimpleRisk,
    Dread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RiskBand {
    Low,
    Medium,
    High,
}

impl fmt::Display for RiskBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RiskBand::Low => "Low",
            RiskBand::Medium => "Medium",
            RiskBand::High => "High",
        })
    }
}

/// Damage, Reproducibility, Exploitability, Affected users, Discoverability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DreadComponents(pub [u8; 5]);

impl DreadComponents {
    pub const NAMES: [&'static str; 5] = [
        "damage",
        "reproducibility",
        "exploitability",
        "affected_users",
        "discoverability",
    ];

    pub fn sum(&self) -> u32 {
        self.0.iter().map(|&c| u32::from(c)).sum()
    }
}

/// Inputs of one assessment; exactly the fields of the chosen method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum RiskInput {
    SimpleRisk { probability: u8, damage_potential: u8 },
    Dread { components: DreadComponents },
}

impl RiskInput {
    pub fn method(&self) -> RiskMethod {
        match self {
            RiskInput::SimpleRisk { .. } => RiskMethod::SimpleRisk,
            RiskInput::Dread { .. } => RiskMethod::Dread,
        }
    }

    pub fn score_tenths(&self) -> Result<u8, RiskError> {
        match *self {
            RiskInput::SimpleRisk {
                probability,
                damage_potential,
            } => simple_risk(probability, damage_potential),
            RiskInput::Dread { components } => dread_score(components.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskAssessment {
    pub threat_id: String,
    pub input: RiskInput,
    pub score_tenths: u8,
    pub band: RiskBand,
    /// Deliberately not mitigated; lifts the elicitation obligation.
    #[serde(default)]
    pub excluded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_rationale: Option<String>,
}

impl RiskAssessment {
    pub fn new(threat_id: impl Into<String>, input: RiskInput) -> Result<Self, RiskError> {
        let score_tenths = input.score_tenths()?;
        Ok(RiskAssessment {
            threat_id: threat_id.into(),
            input,
            score_tenths,
            band: risk_band(score_tenths),
            excluded: false,
            exclusion_rationale: None,
        })
    }
}

fn check_range(field: &'static str, value: u8, min: u8, max: u8) -> Result<(), RiskError> {
    if (min..=max).contains(&value) {
        Ok(())
    } else {
        Err(RiskError::OutOfRange {
            field,
            value: value.into(),
            min: min.into(),
            max: max.into(),
        })
    }
}

/// Probability × damage potential, both on a 1..=10 scale, read as a
/// percentage. On the tenths scale 50% displays as 5.0.
pub fn simple_risk(probability: u8, damage_potential: u8) -> Result<u8, RiskError> {
    check_range("probability", probability, 1, 10)?;
    check_range("damage_potential", damage_potential, 1, 10)?;
    Ok(probability * damage_potential)
}

/// DREAD average in tenths: exactly `2 * sum`.
pub fn dread_score(components: [u8; 5]) -> Result<u8, RiskError> {
    for (name, &c) in DreadComponents::NAMES.iter().zip(components.iter()) {
        check_range(name, c, 0, 10)?;
    }
    Ok(2 * components.iter().sum::<u8>())
}

pub fn risk_band(score_tenths: u8) -> RiskBand {
    match score_tenths {
        70.. => RiskBand::High,
        40..=69 => RiskBand::Medium,
        _ => RiskBand::Low,
    }
}

/// Renders tenths with one decimal place, e.g. `92` → `"9.2"`.
pub fn format_tenths(score_tenths: u8) -> String {
    format!("{}.{}", score_tenths / 10, score_tenths % 10)
}

pub(crate) fn assessment_violations(a: &RiskAssessment) -> Vec<&'static str> {
    let mut out = Vec::new();
    match a.input.score_tenths() {
        Err(_) => out.push("inputs in range"),
        Ok(score) => {
            if score != a.score_tenths {
                out.push("score consistent with inputs");
            }
        }
    }
    if risk_band(a.score_tenths) != a.band {
        out.push("band consistent with score");
    }
    out
}

/// Threat ids ordered by descending risk; ties by ascending numeric id.
pub fn prioritize(project: &Project) -> Result<Vec<(String, u8)>, RiskError> {
    let missing: Vec<String> = project
        .threats
        .iter()
        .filter(|t| project.assessment(&t.id).is_none())
        .map(|t| t.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(RiskError::MissingAssessment(missing));
    }
    let mut ranked: Vec<(String, u8)> = project
        .threats
        .iter()
        .map(|t| {
            let score = project.assessment(&t.id).map_or(0, |a| a.score_tenths);
            (t.id.clone(), score)
        })
        .collect();
    ranked.sort_by_key(|(id, score)| (Reverse(*score), id_number(id), id.clone()));
    Ok(ranked)
}

/// Creates or replaces the assessment of a threat, keeping any exclusion.
pub fn assess(project: &Project, threat_id: &str, input: RiskInput) -> Result<Project, RiskError> {
    if project.threat(threat_id).is_none() {
        return Err(RiskError::NotFound(threat_id.to_owned()));
    }
    let mut fresh = RiskAssessment::new(threat_id, input)?;
    let mut next = project.clone();
    match next.assessments.iter_mut().find(|a| a.threat_id == threat_id) {
        Some(slot) => {
            fresh.excluded = slot.excluded;
            fresh.exclusion_rationale = slot.exclusion_rationale.take();
            *slot = fresh;
        }
        None => next.assessments.push(fresh),
    }
    Ok(next)
}

pub fn set_excluded(
    project: &Project,
    threat_id: &str,
    excluded: bool,
    rationale: &str,
) -> Result<Project, RiskError> {
    if project.threat(threat_id).is_none() {
        return Err(RiskError::NotFound(threat_id.to_owned()));
    }
    let mut next = project.clone();
    let slot = next
        .assessments
        .iter_mut()
        .find(|a| a.threat_id == threat_id)
        .ok_or_else(|| RiskError::MissingAssessment(vec![threat_id.to_owned()]))?;
    slot.excluded = excluded;
    slot.exclusion_rationale = if excluded && !rationale.is_empty() {
        Some(rationale.to_owned())
    } else {
        None
    };
    Ok(next)
}
