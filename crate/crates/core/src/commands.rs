//! Workflow-aware mutations shared by every front end.
//!
//! Each command applies one change and then re-opens the owning step if it
//! was already Complete, so downstream work is marked Stale.

use crate::catalog::{self, Catalog, ElicitOutcome};
use crate::docgen::{self, SrsOutput};
use crate::error::Result;
use crate::model::{
    self, Agreement, Entity, EntityKey, EntityKind, ModelError, PointKind, Project, StrideSet,
    ValidationRecord, Violation,
};
use crate::risk::{self, RiskInput};
use crate::workflow::{self, note_mutation};
use serde::de::Error as _;
use serde_json::{json, Value};

/// Builds an entity from client JSON. Optional fields get their defaults and
/// a missing id is allocated the same way the CLI does.
pub fn entity_from_json(
    project: &Project,
    kind: EntityKind,
    mut value: Value,
) -> std::result::Result<Entity, serde_json::Error> {
    let obj = value
        .as_object_mut()
        .ok_or_else(|| serde_json::Error::custom("expected a JSON object"))?;
    let mut default = |k: &str, v: Value| {
        obj.entry(k.to_owned()).or_insert(v);
    };
    match kind {
        EntityKind::Goal => default("source", json!("interview")),
        EntityKind::Stakeholder => default("group", json!("other")),
        EntityKind::Asset | EntityKind::AttackPoint => default("description", json!("")),
        EntityKind::Threat => {
            default("description", json!(""));
            default("mitigated", json!(false));
        }
        EntityKind::SecurityRequirement => default("origin", json!({ "kind": "manual" })),
        _ => {}
    }
    if !obj.contains_key("id") {
        let point_kind = match kind {
            EntityKind::AttackPoint => {
                let k = obj.get("kind").cloned().unwrap_or(Value::Null);
                Some(serde_json::from_value::<PointKind>(k)?)
            }
            _ => None,
        };
        if let Some(id) = project.next_id(kind, point_kind) {
            obj.insert("id".into(), json!(id));
        }
    }
    let v = value;
    Ok(match kind {
        EntityKind::Goal => Entity::Goal(serde_json::from_value(v)?),
        EntityKind::Stakeholder => Entity::Stakeholder(serde_json::from_value(v)?),
        EntityKind::Agreement => Entity::Agreement(serde_json::from_value(v)?),
        EntityKind::Asset => Entity::Asset(serde_json::from_value(v)?),
        EntityKind::AttackPoint => Entity::AttackPoint(serde_json::from_value(v)?),
        EntityKind::Threat => Entity::Threat(serde_json::from_value(v)?),
        EntityKind::RiskAssessment => Entity::RiskAssessment(serde_json::from_value(v)?),
        EntityKind::SecurityRequirement => Entity::SecurityRequirement(serde_json::from_value(v)?),
        EntityKind::ValidationRecord => Entity::ValidationRecord(serde_json::from_value(v)?),
        EntityKind::SrsRecord => Entity::SrsRecord(serde_json::from_value(v)?),
    })
}

pub fn add(project: &Project, entity: Entity) -> Result<Project> {
    let kind = entity.kind();
    Ok(note_mutation(model::add_entity(project, entity)?, kind))
}

pub fn update(project: &Project, entity: Entity) -> Result<Project> {
    let kind = entity.kind();
    Ok(note_mutation(model::replace_entity(project, entity)?, kind))
}

pub fn remove(project: &Project, key: &EntityKey) -> Result<Project> {
    Ok(note_mutation(model::remove_entity(project, key)?, key.kind()))
}

/// Records or replaces the verdict of a stakeholder on a goal.
pub fn agree(project: &Project, agreement: Agreement) -> Result<Project> {
    if project
        .agreement(&agreement.goal_id, &agreement.stakeholder_id)
        .is_some()
    {
        update(project, Entity::Agreement(agreement))
    } else {
        add(project, Entity::Agreement(agreement))
    }
}

/// Records or replaces a reviewer's verdict on a requirement.
pub fn validate_requirement(project: &Project, record: ValidationRecord) -> Result<Project> {
    let exists = project
        .validations
        .iter()
        .any(|v| v.requirement_id == record.requirement_id && v.reviewer == record.reviewer);
    if exists {
        update(project, Entity::ValidationRecord(record))
    } else {
        add(project, Entity::ValidationRecord(record))
    }
}

/// Replaces the STRIDE categories of a threat.
pub fn tag_threat(project: &Project, threat_id: &str, stride: StrideSet) -> Result<Project> {
    let mut t = project
        .threat(threat_id)
        .cloned()
        .ok_or_else(|| ModelError::NotFound(threat_id.to_owned()))?;
    t.stride = stride;
    update(project, Entity::Threat(t))
}

/// Adds asset and attack-point references to a threat.
pub fn link_threat(
    project: &Project,
    threat_id: &str,
    assets: &[String],
    points: &[String],
) -> Result<Project> {
    let mut t = project
        .threat(threat_id)
        .cloned()
        .ok_or_else(|| ModelError::NotFound(threat_id.to_owned()))?;
    for a in assets {
        if !t.asset_refs.contains(a) {
            t.asset_refs.push(a.clone());
        }
    }
    for p in points {
        if !t.point_refs.contains(p) {
            t.point_refs.push(p.clone());
        }
    }
    update(project, Entity::Threat(t))
}

/// Declares that a project has no points of the given kind. Only PoC and
/// PoD may be declared empty.
pub fn acknowledge_no_points(project: &Project, kind: PointKind) -> Result<Project> {
    if matches!(kind, PointKind::PoA | PointKind::PoB) {
        return Err(ModelError::InvariantViolation(vec![Violation::new(
            "project",
            "only PoC/PoD may be acknowledged empty",
        )])
        .into());
    }
    let mut next = project.clone();
    if !next.acknowledged_empty_points.contains(&kind) {
        next.acknowledged_empty_points.push(kind);
    }
    Ok(note_mutation(next, EntityKind::AttackPoint))
}

pub fn assess(project: &Project, threat_id: &str, input: RiskInput) -> Result<Project> {
    Ok(note_mutation(
        risk::assess(project, threat_id, input)?,
        EntityKind::RiskAssessment,
    ))
}

pub fn set_excluded(
    project: &Project,
    threat_id: &str,
    excluded: bool,
    rationale: &str,
) -> Result<Project> {
    Ok(note_mutation(
        risk::set_excluded(project, threat_id, excluded, rationale)?,
        EntityKind::RiskAssessment,
    ))
}

pub fn elicit(project: &Project, catalog: &Catalog) -> Result<ElicitOutcome> {
    let mut outcome = catalog::elicit_all(project, catalog)?;
    if !outcome.created.is_empty() {
        outcome.project = note_mutation(outcome.project, EntityKind::SecurityRequirement);
    }
    Ok(outcome)
}

pub fn generate_srs(project: &Project, document_path: &str, generated_at: &str) -> Result<SrsOutput> {
    Ok(docgen::generate_srs(project, document_path, generated_at)?)
}

pub fn complete_step(project: &Project, step: u8) -> Result<Project> {
    Ok(workflow::complete_step(project, step)?)
}

pub fn reopen_step(project: &Project, step: u8) -> Result<Project> {
    Ok(workflow::reopen_step(project, step)?)
}
