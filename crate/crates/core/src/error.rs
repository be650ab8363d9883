use serde_json::{json, Value};
use thiserror::Error;

use crate::catalog::CatalogError;
use crate::docgen::DocError;
use crate::model::ModelError;
use crate::persistence::PersistError;
use crate::risk::RiskError;
use crate::workflow::WorkflowError;

/// Any failure surfaced by the workbench, with a stable machine code.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Doc(#[from] DocError),
    #[error(transparent)]
    Persist(#[from] PersistError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Error name, e.g. `"ExitChecksFailed"`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Model(e) => match e {
                ModelError::DuplicateId(_) => "DuplicateId",
                ModelError::DanglingReference(_) => "DanglingReference",
                ModelError::NotFound(_) => "NotFound",
                ModelError::StillReferenced { .. } => "StillReferenced",
                ModelError::InvariantViolation(_) => "InvariantViolation",
            },
            Error::Workflow(e) => match e {
                WorkflowError::StepOutOfRange(_) => "StepOutOfRange",
                WorkflowError::StepNotCurrent { .. } => "StepNotCurrent",
                WorkflowError::ExitChecksFailed { .. } => "ExitChecksFailed",
                WorkflowError::StepNotStarted(_) => "StepNotStarted",
            },
            Error::Risk(e) => risk_code(e),
            Error::Catalog(e) => match e {
                CatalogError::SyntaxError { .. } => "SyntaxError",
                CatalogError::DuplicateEntryId(_) => "DuplicateEntryId",
                CatalogError::EmptyField { .. } => "EmptyField",
                CatalogError::StepNotReady(_) => "StepNotReady",
                CatalogError::Risk(r) => risk_code(r),
            },
            Error::Doc(e) => match e {
                DocError::StepNotReady(_) => "StepNotReady",
                DocError::NothingToExport(_) => "NothingToExport",
                DocError::Risk(r) => risk_code(r),
            },
            Error::Persist(e) => match e {
                PersistError::InvalidProject(_) => "InvalidProject",
                PersistError::IoFailure(_) => "IoFailure",
                PersistError::ParseError(_) => "ParseError",
                PersistError::IntegrityMismatch { .. } => "IntegrityMismatch",
                PersistError::UnsupportedSchemaVersion(_) => "UnsupportedSchemaVersion",
            },
        }
    }

    /// Structured context for API clients.
    pub fn details(&self) -> Value {
        match self {
            Error::Model(ModelError::DuplicateId(id))
            | Error::Model(ModelError::DanglingReference(id))
            | Error::Model(ModelError::NotFound(id)) => json!({ "id": id }),
            Error::Model(ModelError::StillReferenced { id, by }) => {
                json!({ "id": id, "referenced_by": by })
            }
            Error::Model(ModelError::InvariantViolation(v))
            | Error::Persist(PersistError::InvalidProject(v)) => json!({ "violations": v }),
            Error::Workflow(WorkflowError::StepNotCurrent { step, current }) => {
                json!({ "step": step, "current": current })
            }
            Error::Workflow(WorkflowError::ExitChecksFailed { step, rules }) => {
                json!({ "step": step, "failed_rules": rules })
            }
            Error::Workflow(WorkflowError::StepOutOfRange(s))
            | Error::Workflow(WorkflowError::StepNotStarted(s)) => json!({ "step": s }),
            Error::Risk(RiskError::MissingAssessment(ids))
            | Error::Catalog(CatalogError::Risk(RiskError::MissingAssessment(ids)))
            | Error::Doc(DocError::Risk(RiskError::MissingAssessment(ids))) => {
                json!({ "threats": ids })
            }
            Error::Risk(RiskError::OutOfRange {
                field,
                value,
                min,
                max,
            }) => json!({ "field": field, "value": value, "min": min, "max": max }),
            Error::Catalog(CatalogError::SyntaxError { line, column, .. }) => {
                json!({ "line": line, "column": column })
            }
            Error::Catalog(CatalogError::EmptyField { entry, field }) => {
                json!({ "entry": entry, "field": field })
            }
            Error::Doc(DocError::StepNotReady(steps)) => json!({ "steps": steps }),
            _ => Value::Null,
        }
    }
}

fn risk_code(e: &RiskError) -> &'static str {
    match e {
        RiskError::OutOfRange { .. } => "OutOfRange",
        RiskError::MissingAssessment(_) => "MissingAssessment",
        RiskError::NotFound(_) => "NotFound",
    }
}
