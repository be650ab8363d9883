//! Python bindings. Entities cross the boundary as plain dicts and lists in
//! the same JSON shapes the project file and HTTP API use.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use serde_json::Value;
use store_core::analysis::{cia_summary, coverage_report, stride_suggest as suggest_stride, surface_summary};
use store_core::catalog::{parse_catalog, suggest, Catalog as CoreCatalog};
use store_core::docgen::{export_table, ExportKind};
use store_core::fixtures::erp;
use store_core::model::{Entity, EntityKey, EntityKind, PointKind, StrideSet};
use store_core::risk::{self, DreadComponents, RiskInput};
use store_core::workflow::{current_step, exit_checks, step_name};
use store_core::{commands, persistence, Error};

create_exception!(store_py, StoreError, PyException, "A workbench operation failed; see `code` and `details`.");

fn coded(code: &str, message: String, details: &Value) -> PyErr {
    let err = StoreError::new_err(format!("{code}: {message}"));
    Python::attach(|py| {
        let value = err.value(py);
        let _ = value.setattr("code", code);
        if let Ok(details) = to_py(py, details) {
            let _ = value.setattr("details", details);
        }
    });
    err
}

fn store_err(e: impl Into<Error>) -> PyErr {
    let e = e.into();
    coded(e.code(), e.to_string(), &e.details())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn entity_kind(kind: &str) -> PyResult<EntityKind> {
    Ok(match kind {
        "goal" => EntityKind::Goal,
        "stakeholder" => EntityKind::Stakeholder,
        "agreement" => EntityKind::Agreement,
        "asset" => EntityKind::Asset,
        "point" => EntityKind::AttackPoint,
        "threat" => EntityKind::Threat,
        "requirement" => EntityKind::SecurityRequirement,
        "validation" => EntityKind::ValidationRecord,
        other => return Err(PyValueError::new_err(format!("unknown entity kind {other:?}"))),
    })
}

fn point_kind(kind: &str) -> PyResult<PointKind> {
    PointKind::parse(kind).ok_or_else(|| PyValueError::new_err(format!("unknown point kind {kind:?}")))
}

fn export_kind(kind: &str) -> PyResult<ExportKind> {
    ExportKind::parse(kind).ok_or_else(|| PyValueError::new_err(format!("unknown export kind {kind:?}")))
}

/// A requirements catalog used for elicitation and suggestions.
#[pyclass(module = "store_py", frozen)]
pub struct Catalog {
    inner: CoreCatalog,
}

#[pymethods]
impl Catalog {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Catalog { inner: parse_catalog(text).map_err(store_err)? })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| coded("IoFailure", format!("{path}: {e}"), &Value::Null))?;
        Self::from_json(&text)
    }

    /// The catalog bundled with the college ERP case study.
    #[staticmethod]
    fn erp() -> Self {
        Catalog { inner: erp::catalog() }
    }

    #[getter]
    fn catalog_id(&self) -> String {
        self.inner.catalog_id.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }

    fn entries<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.entries)
    }
}

/// One engagement. Mutating methods update the project in place and leave
/// it unchanged when they raise.
#[pyclass(module = "store_py")]
pub struct Project {
    inner: store_core::Project,
}

impl Project {
    fn apply(&mut self, next: store_core::Result<store_core::Project>) -> PyResult<()> {
        self.inner = next.map_err(store_err)?;
        Ok(())
    }
}

#[pymethods]
impl Project {
    #[new]
    fn new(project_id: &str, name: &str) -> Self {
        Project { inner: store_core::Project::new(project_id, name) }
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Project { inner: persistence::load(path.as_ref()).map_err(store_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Project { inner: persistence::from_bytes(text.as_bytes()).map_err(store_err)? })
    }

    /// The college ERP case study, complete through `through` (default 7).
    #[staticmethod]
    #[pyo3(signature = (through = 7))]
    fn erp(through: u8) -> PyResult<Self> {
        if !(7..=10).contains(&through) {
            return Err(PyValueError::new_err("the case study is available through steps 7 to 10"));
        }
        Ok(Project { inner: erp::project_through(through) })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        persistence::save(&self.inner, path.as_ref()).map_err(store_err)?;
        Ok(())
    }

    /// Canonical project file text.
    fn to_json(&self) -> PyResult<String> {
        let bytes = persistence::to_bytes(&self.inner).map_err(store_err)?;
        Ok(String::from_utf8(bytes).expect("canonical output is UTF-8"))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    #[getter]
    fn project_id(&self) -> String {
        self.inner.project_id.clone()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn current_step(&self) -> u8 {
        current_step(&self.inner)
    }

    /// `(step, name, status)` for all ten steps.
    fn steps(&self) -> Vec<(u8, &'static str, String)> {
        self.inner
            .step_states
            .iter()
            .map(|s| (s.step, step_name(s.step), format!("{:?}", s.status)))
            .collect()
    }

    fn exit_checks<'py>(&self, py: Python<'py>, step: u8) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &exit_checks(&self.inner, step).map_err(store_err)?)
    }

    fn complete_step(&mut self, step: u8) -> PyResult<()> {
        let next = commands::complete_step(&self.inner, step);
        self.apply(next)
    }

    fn reopen_step(&mut self, step: u8) -> PyResult<()> {
        let next = commands::reopen_step(&self.inner, step);
        self.apply(next)
    }

    /// Adds a goal, stakeholder, agreement, asset, point, threat,
    /// requirement or validation and returns it as stored. Agreements and
    /// validations replace an earlier record for the same pair.
    fn add<'py>(&mut self, py: Python<'py>, kind: &str, data: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let value = from_py(data)?;
        let entity = commands::entity_from_json(&self.inner, entity_kind(kind)?, value)
            .map_err(|e| coded("ParseError", e.to_string(), &Value::Null))?;
        let tagged = serde_json::to_value(&entity).expect("entities serialize");
        let echo = to_py(py, &tagged["value"])?;
        let next = match entity {
            Entity::Agreement(a) => commands::agree(&self.inner, a),
            Entity::ValidationRecord(r) => commands::validate_requirement(&self.inner, r),
            other => commands::add(&self.inner, other),
        };
        self.apply(next)?;
        Ok(echo)
    }

    fn remove(&mut self, kind: &str, id: &str) -> PyResult<()> {
        let id = id.to_owned();
        let key = match entity_kind(kind)? {
            EntityKind::Goal => EntityKey::Goal(id),
            EntityKind::Stakeholder => EntityKey::Stakeholder(id),
            EntityKind::Asset => EntityKey::Asset(id),
            EntityKind::AttackPoint => EntityKey::AttackPoint(id),
            EntityKind::Threat => EntityKey::Threat(id),
            EntityKind::SecurityRequirement => EntityKey::SecurityRequirement(id),
            _ => return Err(PyValueError::new_err(format!("{kind} records are replaced, not removed"))),
        };
        let next = commands::remove(&self.inner, &key);
        self.apply(next)
    }

    /// Entities of one kind as a list of dicts.
    fn list<'py>(&self, py: Python<'py>, kind: &str) -> PyResult<Bound<'py, PyAny>> {
        let p = &self.inner;
        match entity_kind(kind)? {
            EntityKind::Goal => to_py(py, &p.goals),
            EntityKind::Stakeholder => to_py(py, &p.stakeholders),
            EntityKind::Agreement => to_py(py, &p.agreements),
            EntityKind::Asset => to_py(py, &p.assets),
            EntityKind::AttackPoint => to_py(py, &p.attack_points),
            EntityKind::Threat => to_py(py, &p.threats),
            EntityKind::SecurityRequirement => to_py(py, &p.requirements),
            _ => to_py(py, &p.validations),
        }
    }

    /// Records that a project has no points of the given kind (PoC or PoD).
    fn acknowledge_no_points(&mut self, kind: &str) -> PyResult<()> {
        let next = commands::acknowledge_no_points(&self.inner, point_kind(kind)?);
        self.apply(next)
    }

    /// Replaces a threat's STRIDE tags, given as letters such as `"TE"`.
    fn tag_threat(&mut self, threat_id: &str, letters: &str) -> PyResult<()> {
        let stride = StrideSet::parse_letters(letters).map_err(PyValueError::new_err)?;
        let next = commands::tag_threat(&self.inner, threat_id, stride);
        self.apply(next)
    }

    fn assess_dread(&mut self, threat_id: &str, components: [u8; 5]) -> PyResult<()> {
        let input = RiskInput::Dread { components: DreadComponents(components) };
        let next = commands::assess(&self.inner, threat_id, input);
        self.apply(next)
    }

    fn assess_simple(&mut self, threat_id: &str, probability: u8, damage_potential: u8) -> PyResult<()> {
        let input = RiskInput::SimpleRisk { probability, damage_potential };
        let next = commands::assess(&self.inner, threat_id, input);
        self.apply(next)
    }

    #[pyo3(signature = (threat_id, excluded = true, rationale = ""))]
    fn set_excluded(&mut self, threat_id: &str, excluded: bool, rationale: &str) -> PyResult<()> {
        let next = commands::set_excluded(&self.inner, threat_id, excluded, rationale);
        self.apply(next)
    }

    /// `(threat id, score in tenths)` from highest risk to lowest.
    fn ranking(&self) -> PyResult<Vec<(String, u8)>> {
        risk::prioritize(&self.inner).map_err(store_err)
    }

    /// Attaches the best catalog requirement to each threat in risk order.
    /// Returns `{"created": [(threat, requirement)], "manual": [threat]}`.
    fn elicit<'py>(&mut self, py: Python<'py>, catalog: &Catalog) -> PyResult<Bound<'py, PyAny>> {
        let outcome = commands::elicit(&self.inner, &catalog.inner).map_err(store_err)?;
        self.inner = outcome.project;
        let out = serde_json::json!({ "created": outcome.created, "manual": outcome.manual });
        to_py(py, &out)
    }

    #[pyo3(signature = (threat_id, catalog, limit = 3))]
    fn suggest_requirements<'py>(
        &self,
        py: Python<'py>,
        threat_id: &str,
        catalog: &Catalog,
        limit: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let threat = self
            .inner
            .threat(threat_id)
            .ok_or_else(|| store_err(store_core::model::ModelError::NotFound(threat_id.to_owned())))?;
        to_py(py, &suggest(threat, &catalog.inner, limit))
    }

    /// Renders the specification, records it in the project and returns the
    /// document text. Writing the text to disk is left to the caller.
    #[pyo3(signature = (generated_at, document_path = "srs.md"))]
    fn generate_srs(&mut self, generated_at: &str, document_path: &str) -> PyResult<String> {
        let out = commands::generate_srs(&self.inner, document_path, generated_at).map_err(store_err)?;
        self.inner = out.project;
        Ok(out.text)
    }

    /// Checksum of the current specification body.
    fn srs_checksum(&self) -> String {
        store_core::docgen::srs_checksum(&self.inner)
    }

    /// CSV export: goals, stakeholders, assets, points, threats, risk or
    /// requirements.
    fn export(&self, kind: &str) -> PyResult<String> {
        export_table(&self.inner, export_kind(kind)?).map_err(store_err)
    }

    /// Report by name: coverage, surface or cia.
    fn report<'py>(&self, py: Python<'py>, kind: &str) -> PyResult<Bound<'py, PyAny>> {
        match kind {
            "coverage" => to_py(py, &coverage_report(&self.inner)),
            "surface" => to_py(py, &surface_summary(&self.inner)),
            "cia" => to_py(py, &cia_summary(&self.inner)),
            other => Err(PyValueError::new_err(format!("unknown report {other:?}"))),
        }
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Project(id={:?}, name={:?}, current_step={})",
            self.inner.project_id,
            self.inner.name,
            current_step(&self.inner)
        )
    }
}

/// p × d as a percentage; both factors are 1 to 10.
#[pyfunction]
fn simple_risk(probability: u8, damage_potential: u8) -> PyResult<u8> {
    risk::simple_risk(probability, damage_potential).map_err(store_err)
}

/// DREAD average in tenths; each component is 0 to 10.
#[pyfunction]
fn dread_score(components: [u8; 5]) -> PyResult<u8> {
    risk::dread_score(components).map_err(store_err)
}

#[pyfunction]
fn risk_band(score_tenths: u8) -> String {
    format!("{:?}", risk::risk_band(score_tenths))
}

#[pyfunction]
fn format_tenths(score_tenths: u8) -> String {
    risk::format_tenths(score_tenths)
}

/// STRIDE letters suggested by keywords in a threat's text.
#[pyfunction]
#[pyo3(signature = (title, description = ""))]
fn stride_suggest(title: &str, description: &str) -> String {
    suggest_stride(title, description).letters()
}

/// Registers the module contents; shared by the extension entry point and
/// embedded use.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("StoreError", m.py().get_type::<StoreError>())?;
    m.add_class::<Project>()?;
    m.add_class::<Catalog>()?;
    m.add_function(wrap_pyfunction!(simple_risk, m)?)?;
    m.add_function(wrap_pyfunction!(dread_score, m)?)?;
    m.add_function(wrap_pyfunction!(risk_band, m)?)?;
    m.add_function(wrap_pyfunction!(format_tenths, m)?)?;
    m.add_function(wrap_pyfunction!(stride_suggest, m)?)?;
    Ok(())
}

#[pymodule]
fn store_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
