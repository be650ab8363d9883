//! The ten-step sequential process: gating, exit checks and staleness.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::docgen;
use crate::model::{EntityKind, PointKind, Project, StakeholderPriority, ValidationVerdict, Verdict};

pub const STEP_COUNT: u8 = 10;

pub const STEP_NAMES: [&str; STEP_COUNT as usize] = [
    "Identify System Goals",
    "Identify and Prioritize Stakeholders",
    "Agreed upon Goals",
    "Asset Identification",
    "Security Attack Analysis",
    "Threat Identification and Categorization",
    "Risk Evaluation and Prioritization",
    "Security Requirements Elicitation",
    "Security Requirements Validation",
    "Security Requirements Specification Document",
];

/// Documentation only; never enforced.
pub const STEP_PARTICIPANTS: [&str; STEP_COUNT as usize] = [
    "Requirement Engineer, Client",
    "Requirement Engineer",
    "Requirement Engineer, Stakeholders",
    "Requirement Engineer, Stakeholders",
    "Requirement Engineer, Security Expert",
    "Requirement Engineer",
    "Requirement Engineer, Risk Manager",
    "Requirement Engineer",
    "Requirement Engineer, Security Expert",
    "Requirement Engineer",
];

pub fn step_name(step: u8) -> &'static str {
    STEP_NAMES
        .get(usize::from(step).wrapping_sub(1))
        .copied()
        .unwrap_or("unknown step")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Locked,
    InProgress,
    Complete,
    Stale,
}

impl fmt::Display for StepStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepStatus::Locked => "Locked",
            StepStatus::InProgress => "InProgress",
            StepStatus::Complete => "Complete",
            StepStatus::Stale => "Stale",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepState {
    pub step: u8,
    pub status: StepStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitCheck {
    pub step: u8,
    pub rule_id: String,
    pub description: String,
    pub satisfied: bool,
    pub details: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("step {0} is out of range 1..=10")]
    StepOutOfRange(u8),
    #[error("step {step} is not the current step (current is {current})")]
    StepNotCurrent { step: u8, current: u8 },
    #[error("exit checks failed for step {step}: {}", rules.join(", "))]
    ExitChecksFailed { step: u8, rules: Vec<String> },
    #[error("step {0} has not been started")]
    StepNotStarted(u8),
}

fn check_range(step: u8) -> Result<(), WorkflowError> {
    if (1..=STEP_COUNT).contains(&step) {
        Ok(())
    } else {
        Err(WorkflowError::StepOutOfRange(step))
    }
}

fn status(project: &Project, step: u8) -> StepStatus {
    project.step_status(step).unwrap_or(StepStatus::Locked)
}

fn set_status(project: &mut Project, step: u8, status: StepStatus) {
    if let Some(s) = project.step_states.iter_mut().find(|s| s.step == step) {
        s.status = status;
    }
}

/// Lowest step that is not Complete, or 10 when every step is.
pub fn current_step(project: &Project) -> u8 {
    (1..=STEP_COUNT)
        .find(|&k| status(project, k) != StepStatus::Complete)
        .unwrap_or(STEP_COUNT)
}

/// Step whose output an entity kind is.
pub fn mutation_step_of(kind: EntityKind) -> u8 {
    match kind {
        EntityKind::Goal => 1,
        EntityKind::Stakeholder => 2,
        EntityKind::Agreement => 3,
        EntityKind::Asset => 4,
        EntityKind::AttackPoint => 5,
        EntityKind::Threat => 6,
        EntityKind::RiskAssessment => 7,
        EntityKind::SecurityRequirement => 8,
        EntityKind::ValidationRecord => 9,
        EntityKind::SrsRecord => 10,
    }
}

struct Checks {
    step: u8,
    out: Vec<ExitCheck>,
}

impl Checks {
    fn push(&mut self, rule_id: &str, description: &str, failures: Vec<String>) {
        self.out.push(ExitCheck {
            step: self.step,
            rule_id: rule_id.to_owned(),
            description: description.to_owned(),
            satisfied: failures.is_empty(),
            details: failures.join(", "),
        });
    }

    fn require(&mut self, rule_id: &str, description: &str, ok: bool, detail: &str) {
        let failures = if ok { Vec::new() } else { vec![detail.to_owned()] };
        self.push(rule_id, description, failures);
    }
}

/// The completion rules of a step, each with whether it currently holds.
pub fn exit_checks(project: &Project, step: u8) -> Result<Vec<ExitCheck>, WorkflowError> {
    check_range(step)?;
    let mut c = Checks {
        step,
        out: Vec::new(),
    };
    let p = project;
    match step {
        1 => c.require(
            "goals-nonempty",
            "at least one system goal",
            !p.goals.is_empty(),
            "no goals",
        ),
        2 => {
            c.require(
                "stakeholders-nonempty",
                "at least one stakeholder",
                !p.stakeholders.is_empty(),
                "no stakeholders",
            );
            // Priority is a closed enum, so it is always present.
            c.push(
                "stakeholders-prioritized",
                "every stakeholder has a priority",
                Vec::new(),
            );
        }
        3 => {
            let mut missing = Vec::new();
            for g in &p.goals {
                for s in p
                    .stakeholders
                    .iter()
                    .filter(|s| s.priority == StakeholderPriority::Critical)
                {
                    let agreed = p
                        .agreement(&g.id, &s.id)
                        .is_some_and(|a| a.verdict == Verdict::Agreed);
                    if !agreed {
                        missing.push(format!("({}, {})", g.id, s.id));
                    }
                }
            }
            c.push(
                "goals-agreed-by-critical",
                "every goal agreed by every critical stakeholder",
                missing,
            );
            let objections = p
                .agreements
                .iter()
                .filter(|a| a.verdict == Verdict::Objected)
                .map(|a| format!("({}, {})", a.goal_id, a.stakeholder_id))
                .collect();
            c.push(
                "no-unresolved-objections",
                "no goal has an outstanding objection",
                objections,
            );
        }
        4 => {
            c.require(
                "assets-nonempty",
                "at least one asset",
                !p.assets.is_empty(),
                "no assets",
            );
            c.push(
                "assets-cia-nonempty",
                "every asset has at least one CIA facet",
                p.assets
                    .iter()
                    .filter(|a| a.cia.is_empty())
                    .map(|a| a.id.clone())
                    .collect(),
            );
            c.push("assets-prioritized", "every asset has a priority", Vec::new());
        }
        5 => {
            let has = |k: PointKind| p.attack_points.iter().any(|pt| pt.kind == k);
            let declared =
                |k: PointKind| has(k) || p.acknowledged_empty_points.contains(&k);
            c.require(
                "points-poa-nonempty",
                "at least one point of attack",
                has(PointKind::PoA),
                "no PoA",
            );
            c.require(
                "points-pob-nonempty",
                "at least one point of belief",
                has(PointKind::PoB),
                "no PoB",
            );
            c.require(
                "points-poc-declared",
                "points of conjecture listed or acknowledged as none",
                declared(PointKind::PoC),
                "no PoC and none declared",
            );
            c.require(
                "points-pod-declared",
                "points of dependency listed or acknowledged as none",
                declared(PointKind::PoD),
                "no PoD and none declared",
            );
        }
        6 => {
            c.require(
                "threats-nonempty",
                "at least one threat",
                !p.threats.is_empty(),
                "no threats",
            );
            c.push(
                "threats-stride-nonempty",
                "every threat has a STRIDE category",
                p.threats
                    .iter()
                    .filter(|t| t.stride.is_empty())
                    .map(|t| t.id.clone())
                    .collect(),
            );
            c.push(
                "threats-assets-nonempty",
                "every threat references an asset",
                p.threats
                    .iter()
                    .filter(|t| t.asset_refs.is_empty())
                    .map(|t| t.id.clone())
                    .collect(),
            );
        }
        7 => c.push(
            "threats-assessed-once",
            "every threat has exactly one risk assessment",
            p.threats
                .iter()
                .filter(|t| p.assessments.iter().filter(|a| a.threat_id == t.id).count() != 1)
                .map(|t| t.id.clone())
                .collect(),
        ),
        8 => c.push(
            "threats-have-requirements",
            "every non-excluded threat has a security requirement",
            p.threats
                .iter()
                .filter(|t| !p.assessment(&t.id).is_some_and(|a| a.excluded))
                .filter(|t| p.requirements_for(&t.id).next().is_none())
                .map(|t| t.id.clone())
                .collect(),
        ),
        9 => {
            c.push(
                "requirements-validated",
                "every requirement has a validation record",
                p.requirements
                    .iter()
                    .filter(|r| !p.validations.iter().any(|v| v.requirement_id == r.id))
                    .map(|r| r.id.clone())
                    .collect(),
            );
            let accepted = p
                .requirements
                .iter()
                .any(|r| p.requirement_verdict(&r.id) == Some(ValidationVerdict::Accepted));
            c.require(
                "requirements-accepted",
                "at least one requirement accepted",
                accepted,
                "no accepted requirement",
            );
        }
        10 => {
            c.require(
                "srs-present",
                "specification document generated",
                p.srs_record.is_some(),
                "no document generated",
            );
            let current = p
                .srs_record
                .as_ref()
                .is_some_and(|r| r.checksum == docgen::srs_checksum(p));
            c.require(
                "srs-checksum-current",
                "recorded checksum matches a fresh rendering",
                current,
                "document out of date",
            );
        }
        _ => unreachable!("range checked"),
    }
    Ok(c.out)
}

/// Marks the current step Complete once its exit checks hold and opens the
/// next one.
pub fn complete_step(project: &Project, step: u8) -> Result<Project, WorkflowError> {
    check_range(step)?;
    let current = current_step(project);
    if step != current || status(project, step) == StepStatus::Complete {
        return Err(WorkflowError::StepNotCurrent { step, current });
    }
    let failed: Vec<String> = exit_checks(project, step)?
        .into_iter()
        .filter(|c| !c.satisfied)
        .map(|c| c.rule_id)
        .collect();
    if !failed.is_empty() {
        return Err(WorkflowError::ExitChecksFailed {
            step,
            rules: failed,
        });
    }
    let mut next = project.clone();
    set_status(&mut next, step, StepStatus::Complete);
    if step < STEP_COUNT {
        set_status(&mut next, step + 1, StepStatus::InProgress);
    }
    Ok(next)
}

/// Re-opens a finished step. Later Complete steps become Stale and a later
/// in-progress step is locked again.
pub fn reopen_step(project: &Project, step: u8) -> Result<Project, WorkflowError> {
    check_range(step)?;
    match status(project, step) {
        StepStatus::Complete | StepStatus::Stale => {}
        StepStatus::Locked | StepStatus::InProgress => {
            return Err(WorkflowError::StepNotStarted(step))
        }
    }
    let current = current_step(project);
    if current < step {
        // A stale step ahead of unfinished work cannot jump the queue.
        return Err(WorkflowError::StepNotCurrent { step, current });
    }
    let mut next = project.clone();
    set_status(&mut next, step, StepStatus::InProgress);
    for k in step + 1..=STEP_COUNT {
        let new = match status(project, k) {
            StepStatus::Complete => StepStatus::Stale,
            StepStatus::InProgress => StepStatus::Locked,
            other => other,
        };
        set_status(&mut next, k, new);
    }
    Ok(next)
}

/// Applies the staleness rule after an entity of `kind` changed: a Complete
/// owning step is re-opened.
pub fn note_mutation(project: Project, kind: EntityKind) -> Project {
    let step = mutation_step_of(kind);
    if status(&project, step) == StepStatus::Complete {
        reopen_step(&project, step).unwrap_or(project)
    } else {
        project
    }
}
