//! Response shapes shared by the CLI's JSON output and the HTTP API.

use serde::Serialize;
use store_core::catalog::{suggest, Catalog, ElicitOutcome};
use store_core::model::{Project, Threat};
use store_core::risk::{format_tenths, prioritize, RiskBand};
use store_core::workflow::{current_step, exit_checks, step_name, ExitCheck, StepStatus};
use store_core::analysis::stride_suggest;

#[derive(Debug, Clone, Serialize)]
pub struct RankRow {
    pub rank: usize,
    pub threat_id: String,
    pub title: String,
    pub score_tenths: u8,
    pub score: String,
    pub band: RiskBand,
    pub excluded: bool,
}

pub fn ranking(project: &Project) -> store_core::Result<Vec<RankRow>> {
    Ok(prioritize(project)?
        .into_iter()
        .enumerate()
        .map(|(i, (threat_id, score_tenths))| {
            let a = project.assessment(&threat_id);
            RankRow {
                rank: i + 1,
                title: project.threat(&threat_id).map(|t| t.title.clone()).unwrap_or_default(),
                score: format_tenths(score_tenths),
                band: a.map_or(RiskBand::Low, |a| a.band),
                excluded: a.is_some_and(|a| a.excluded),
                threat_id,
                score_tenths,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct StepView {
    pub step: u8,
    pub name: &'static str,
    pub status: StepStatus,
    pub checks: Vec<ExitCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkflowView {
    pub current_step: u8,
    pub steps: Vec<StepView>,
}

pub fn workflow(project: &Project) -> WorkflowView {
    WorkflowView {
        current_step: current_step(project),
        steps: (1..=10)
            .map(|step| StepView {
                step,
                name: step_name(step),
                status: project.step_status(step).unwrap_or(StepStatus::Locked),
                checks: exit_checks(project, step).unwrap_or_default(),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuggestionView {
    pub rank: u32,
    pub entry_id: String,
    pub score: u32,
    pub title: String,
    pub requirement_text: String,
}

pub fn requirement_suggestions(threat: &Threat, catalog: &Catalog, limit: usize) -> Vec<SuggestionView> {
    suggest(threat, catalog, limit)
        .into_iter()
        .filter_map(|s| {
            let e = catalog.entry(&s.entry_id)?;
            Some(SuggestionView {
                rank: s.rank,
                entry_id: s.entry_id,
                score: s.score,
                title: e.title.clone(),
                requirement_text: e.requirement_text.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StrideView {
    pub letters: String,
    pub categories: Vec<&'static str>,
}

pub fn stride(text: &str) -> StrideView {
    let set = stride_suggest(text, "");
    StrideView {
        letters: set.letters(),
        categories: set.iter().map(|s| s.name()).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Created {
    pub threat_id: String,
    pub requirement_id: String,
    pub entry_id: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElicitView {
    pub created: Vec<Created>,
    pub manual: Vec<String>,
}

pub fn elicit(outcome: &ElicitOutcome) -> ElicitView {
    let created = outcome
        .created
        .iter()
        .filter_map(|(threat_id, requirement_id)| {
            let r = outcome.project.requirement(requirement_id)?;
            Some(Created {
                threat_id: threat_id.clone(),
                requirement_id: requirement_id.clone(),
                entry_id: match &r.origin {
                    store_core::model::RequirementOrigin::Catalog { entry_id } => Some(entry_id.clone()),
                    store_core::model::RequirementOrigin::Manual => None,
                },
                text: r.text.clone(),
            })
        })
        .collect();
    ElicitView {
        created,
        manual: outcome.manual.clone(),
    }
}
