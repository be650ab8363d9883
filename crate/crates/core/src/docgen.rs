//! Security Requirements Specification rendering and tabular exports.
//!
//! The rendered body is deterministic in project content; the generation
//! timestamp is inserted only into the full text and never hashed.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{
    id_number, Project, RequirementOrigin, SecurityRequirement, SrsRecord, Stride,
    ValidationVerdict,
};
use crate::risk::{self, format_tenths, RiskError, RiskInput};
use crate::workflow::{self, StepStatus};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocError {
    #[error("steps not complete: {0:?}")]
    StepNotReady(Vec<u8>),
    #[error("nothing to export for {0:?}")]
    NothingToExport(ExportKind),
    #[error(transparent)]
    Risk(#[from] RiskError),
}

pub const SECTION_HEADINGS: [&str; 9] = [
    "System Goals",
    "Stakeholders",
    "Agreed Goals",
    "Assets",
    "Attack Surface",
    "Threats",
    "Risk Ranking",
    "Security Requirements",
    "Validation Summary",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsDocument {
    pub title: String,
    pub generated_at: String,
    pub sections: Vec<Section>,
    pub checksum: String,
}

impl SrsDocument {
    /// Title and sections without the timestamp; this is what the checksum
    /// covers.
    pub fn body(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for (i, s) in self.sections.iter().enumerate() {
            let _ = write!(out, "\n## {}. {}\n\n{}", i + 1, s.heading, s.body);
        }
        out
    }

    pub fn render(&self) -> String {
        let body = self.body();
        let (title, rest) = body.split_once('\n').unwrap_or((&body, ""));
        format!("{title}\n\n_Generated at {}_\n{rest}", self.generated_at)
    }
}

fn cell(text: &str) -> String {
    text.replace('\\', "\\\\")
        .replace('|', "\\|")
        .replace(['\r', '\n'], " ")
}

fn table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| cell(c)).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
}

fn yes_no(b: bool) -> String {
    if b { "Yes" } else { "No" }.to_owned()
}

fn debug_snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

// Risk order when every threat is assessed; otherwise declaration order
// with unassessed threats scored 0.
fn ranking(project: &Project) -> Vec<(String, u8)> {
    risk::prioritize(project).unwrap_or_else(|_| {
        project
            .threats
            .iter()
            .map(|t| {
                let s = project.assessment(&t.id).map_or(0, |a| a.score_tenths);
                (t.id.clone(), s)
            })
            .collect()
    })
}

/// Requirements sorted by the rank of their highest-risk linked threat, then
/// by id.
fn risk_ordered<'a>(
    project: &'a Project,
    reqs: impl Iterator<Item = &'a SecurityRequirement>,
) -> Vec<&'a SecurityRequirement> {
    let order = ranking(project);
    let rank_of = |r: &SecurityRequirement| {
        r.threat_refs
            .iter()
            .filter_map(|t| order.iter().position(|(id, _)| id == t))
            .min()
            .unwrap_or(usize::MAX)
    };
    let mut v: Vec<_> = reqs.collect();
    v.sort_by_key(|r| (rank_of(r), id_number(&r.id), r.id.clone()));
    v
}

fn build_sections(p: &Project) -> Vec<Section> {
    let mut sections = Vec::with_capacity(SECTION_HEADINGS.len());
    let mut push = |i: usize, body: String| {
        sections.push(Section {
            heading: SECTION_HEADINGS[i].to_owned(),
            body,
        })
    };

    let mut b = String::new();
    table(
        &mut b,
        &["ID", "Description", "Source"],
        p.goals
            .iter()
            .map(|g| vec![g.id.clone(), g.description.clone(), debug_snake(&g.source)]),
    );
    push(0, b);

    let mut b = String::new();
    table(
        &mut b,
        &["ID", "Name", "Priority", "Group"],
        p.stakeholders.iter().map(|s| {
            vec![
                s.id.clone(),
                s.name.clone(),
                debug_snake(&s.priority),
                debug_snake(&s.group),
            ]
        }),
    );
    push(1, b);

    let mut b = String::new();
    table(
        &mut b,
        &["Goal", "Stakeholder", "Verdict", "Note"],
        p.agreements.iter().map(|a| {
            vec![
                a.goal_id.clone(),
                a.stakeholder_id.clone(),
                debug_snake(&a.verdict),
                a.note.clone().unwrap_or_default(),
            ]
        }),
    );
    push(2, b);

    let mut b = String::new();
    table(
        &mut b,
        &["ID", "Name", "Description", "CIA", "Priority", "Identified by"],
        p.assets.iter().map(|a| {
            vec![
                a.id.clone(),
                a.name.clone(),
                a.description.clone(),
                a.cia.iter().map(|f| f.letter()).collect(),
                debug_snake(&a.priority),
                a.identified_by.join(", "),
            ]
        }),
    );
    push(3, b);

    let mut b = String::new();
    for (i, kind) in crate::model::PointKind::ALL.into_iter().enumerate() {
        if i > 0 {
            b.push('\n');
        }
        let _ = writeln!(b, "### {} ({:?})\n", kind.label(), kind);
        let points: Vec<_> = p.attack_points.iter().filter(|x| x.kind == kind).collect();
        if points.is_empty() {
            if p.acknowledged_empty_points.contains(&kind) {
                b.push_str("None declared.\n");
            } else {
                b.push_str("None listed.\n");
            }
        } else {
            table(
                &mut b,
                &["ID", "Name", "Description"],
                points
                    .iter()
                    .map(|x| vec![x.id.clone(), x.name.clone(), x.description.clone()]),
            );
        }
    }
    push(4, b);

    let mut b = String::new();
    table(
        &mut b,
        &[
            "ID", "Threat", "Description", "S", "T", "R", "I", "D", "E", "Mitigated", "Assets",
            "Points",
        ],
        p.threats.iter().map(|t| {
            let mut row = vec![t.id.clone(), t.title.clone(), t.description.clone()];
            row.extend(Stride::ALL.iter().map(|s| check(t.stride.contains(*s))));
            row.push(yes_no(t.mitigated));
            row.push(t.asset_refs.join(", "));
            row.push(t.point_refs.join(", "));
            row
        }),
    );
    push(5, b);

    let mut b = String::new();
    table(
        &mut b,
        &[
            "Rank", "Threat ID", "Threat", "Method", "Inputs", "Risk", "Band", "Mitigated",
            "Excluded",
        ],
        ranking(p).iter().enumerate().map(|(i, (tid, score))| {
            let t = p.threat(tid);
            let a = p.assessment(tid);
            let (method, inputs) = match a.map(|a| a.input) {
                Some(RiskInput::Dread { components }) => (
                    "DREAD".to_owned(),
                    components
                        .0
                        .iter()
                        .map(u8::to_string)
                        .collect::<Vec<_>>()
                        .join(", "),
                ),
                Some(RiskInput::SimpleRisk {
                    probability,
                    damage_potential,
                }) => (
                    "Simple".to_owned(),
                    format!("{probability} x {damage_potential}"),
                ),
                None => ("-".to_owned(), "-".to_owned()),
            };
            let excluded = match a {
                Some(a) if a.excluded => match &a.exclusion_rationale {
                    Some(r) => format!("Yes: {r}"),
                    None => "Yes".to_owned(),
                },
                _ => "No".to_owned(),
            };
            vec![
                (i + 1).to_string(),
                tid.clone(),
                t.map(|t| t.title.clone()).unwrap_or_default(),
                method,
                inputs,
                format_tenths(*score),
                risk::risk_band(*score).to_string(),
                yes_no(t.is_some_and(|t| t.mitigated)),
                excluded,
            ]
        }),
    );
    push(6, b);

    let accepted = risk_ordered(
        p,
        p.requirements
            .iter()
            .filter(|r| p.requirement_verdict(&r.id) == Some(ValidationVerdict::Accepted)),
    );
    let mut b = String::new();
    table(
        &mut b,
        &["ID", "Security Requirement", "Threats", "Origin"],
        accepted.iter().map(|r| {
            vec![
                r.id.clone(),
                r.text.clone(),
                r.threat_refs.join(", "),
                origin_text(&r.origin),
            ]
        }),
    );
    push(7, b);

    let mut b = String::new();
    table(
        &mut b,
        &["Requirement", "Reviewer", "Verdict", "Rationale"],
        p.validations.iter().map(|v| {
            vec![
                v.requirement_id.clone(),
                v.reviewer.clone(),
                debug_snake(&v.verdict),
                v.rationale.clone().unwrap_or_default(),
            ]
        }),
    );
    let pending = risk_ordered(
        p,
        p.requirements
            .iter()
            .filter(|r| p.requirement_verdict(&r.id) != Some(ValidationVerdict::Accepted)),
    );
    if !pending.is_empty() {
        b.push_str("\n### Not accepted\n\n");
        table(
            &mut b,
            &["ID", "Security Requirement", "Threats", "Status"],
            pending.iter().map(|r| {
                let status = match p.requirement_verdict(&r.id) {
                    Some(v) => debug_snake(&v),
                    None => "unreviewed".to_owned(),
                };
                vec![r.id.clone(), r.text.clone(), r.threat_refs.join(", "), status]
            }),
        );
    }
    push(8, b);

    sections
}

fn check(b: bool) -> String {
    if b { "✓" } else { "" }.to_owned()
}

fn origin_text(o: &RequirementOrigin) -> String {
    match o {
        RequirementOrigin::Catalog { entry_id } => format!("catalog:{entry_id}"),
        RequirementOrigin::Manual => "manual".to_owned(),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds the document without checking workflow preconditions.
pub fn render_srs(project: &Project, generated_at: &str) -> SrsDocument {
    let mut doc = SrsDocument {
        title: format!("Security Requirements Specification: {}", project.name),
        generated_at: generated_at.to_owned(),
        sections: build_sections(project),
        checksum: String::new(),
    };
    doc.checksum = sha256_hex(doc.body().as_bytes());
    doc
}

pub fn srs_checksum(project: &Project) -> String {
    render_srs(project, "").checksum
}

#[derive(Debug, Clone)]
pub struct SrsOutput {
    pub document: SrsDocument,
    pub text: String,
    pub project: Project,
}

/// Step 10: renders the document and records its checksum in the project.
pub fn generate_srs(
    project: &Project,
    document_path: &str,
    generated_at: &str,
) -> Result<SrsOutput, DocError> {
    let incomplete: Vec<u8> = (1..=9)
        .filter(|&k| project.step_status(k) != Some(StepStatus::Complete))
        .collect();
    if !incomplete.is_empty() {
        return Err(DocError::StepNotReady(incomplete));
    }
    let document = render_srs(project, generated_at);
    let text = document.render();
    let mut next = workflow::note_mutation(project.clone(), crate::model::EntityKind::SrsRecord);
    next.srs_record = Some(SrsRecord {
        generated_at: generated_at.to_owned(),
        checksum: document.checksum.clone(),
        document_path: document_path.to_owned(),
    });
    Ok(SrsOutput {
        document,
        text,
        project: next,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportKind {
    Goals,
    Stakeholders,
    Assets,
    Points,
    Threats,
    Risk,
    Requirements,
}

impl ExportKind {
    pub const ALL: [ExportKind; 7] = [
        ExportKind::Goals,
        ExportKind::Stakeholders,
        ExportKind::Assets,
        ExportKind::Points,
        ExportKind::Threats,
        ExportKind::Risk,
        ExportKind::Requirements,
    ];

    pub fn parse(text: &str) -> Option<ExportKind> {
        ExportKind::ALL
            .into_iter()
            .find(|k| debug_snake(k) == text.to_ascii_lowercase())
    }
}

/// CSV export mirroring the case-study table layouts.
pub fn export_table(project: &Project, kind: ExportKind) -> Result<String, DocError> {
    let p = project;
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match kind {
        ExportKind::Goals => (
            vec!["Goal ID", "Description"],
            p.goals
                .iter()
                .map(|g| vec![g.id.clone(), g.description.clone()])
                .collect(),
        ),
        ExportKind::Stakeholders => (
            vec!["ID", "Name", "Significance", "Type"],
            p.stakeholders
                .iter()
                .map(|s| {
                    vec![
                        s.id.clone(),
                        s.name.clone(),
                        capitalize(&debug_snake(&s.priority)),
                        debug_snake(&s.group),
                    ]
                })
                .collect(),
        ),
        ExportKind::Assets => (
            vec!["Asset ID", "Name", "Description", "CIA", "Priority"],
            p.assets
                .iter()
                .map(|a| {
                    vec![
                        a.id.clone(),
                        a.name.clone(),
                        a.description.clone(),
                        a.cia.iter().map(|f| f.letter()).collect(),
                        capitalize(&debug_snake(&a.priority)),
                    ]
                })
                .collect(),
        ),
        ExportKind::Points => (
            vec!["ID", "Kind", "Name", "Description"],
            p.attack_points
                .iter()
                .map(|x| {
                    vec![
                        x.id.clone(),
                        format!("{:?}", x.kind),
                        x.name.clone(),
                        x.description.clone(),
                    ]
                })
                .collect(),
        ),
        ExportKind::Threats => (
            vec![
                "ID", "Threat", "Description", "S", "T", "R", "I", "D", "E", "Mitigated", "Assets",
            ],
            p.threats
                .iter()
                .map(|t| {
                    let mut row = vec![t.id.clone(), t.title.clone(), t.description.clone()];
                    row.extend(Stride::ALL.iter().map(|s| check(t.stride.contains(*s))));
                    row.push(yes_no(t.mitigated));
                    row.push(t.asset_refs.join(", "));
                    row
                })
                .collect(),
        ),
        ExportKind::Risk => {
            let rows = if p.threats.is_empty() {
                Vec::new()
            } else {
                risk::prioritize(p)?
                    .into_iter()
                    .map(|(id, score)| {
                        let t = p.threat(&id).expect("ranked threat exists");
                        vec![id, t.title.clone(), format_tenths(score), yes_no(t.mitigated)]
                    })
                    .collect()
            };
            (vec!["Threat ID", "Threat", "Risk Value", "Mitigated"], rows)
        }
        ExportKind::Requirements => {
            let mut rows = Vec::new();
            for (tid, _) in ranking(p) {
                for r in p.requirements_for(&tid) {
                    rows.push(vec![tid.clone(), r.id.clone(), r.text.clone()]);
                }
            }
            (
                vec!["Threat ID", "Security Requirement ID", "Security Requirement"],
                rows,
            )
        }
    };
    if rows.is_empty() {
        return Err(DocError::NothingToExport(kind));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let bytes = w.into_inner().expect("in-memory flush");
    Ok(String::from_utf8(bytes).expect("utf-8 input yields utf-8 csv"))
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_to_export_on_fresh_project() {
        let p = Project::new("p", "x");
        for k in ExportKind::ALL {
            assert_eq!(export_table(&p, k), Err(DocError::NothingToExport(k)));
        }
    }

    #[test]
    fn srs_needs_steps_one_to_nine() {
        let mut p = Project::new("p", "x");
        for s in p.step_states.iter_mut().take(8) {
            s.status = StepStatus::Complete;
        }
        p.step_states[8].status = StepStatus::InProgress;
        assert_eq!(
            generate_srs(&p, "srs.md", "t").unwrap_err(),
            DocError::StepNotReady(vec![9])
        );
    }

    #[test]
    fn checksum_ignores_timestamp() {
        let p = Project::new("p", "x");
        let a = render_srs(&p, "2024-01-01T00:00:00Z");
        let b = render_srs(&p, "2030-06-01T12:00:00Z");
        assert_eq!(a.checksum, b.checksum);
        assert_eq!(a.body(), b.body());
        assert_ne!(a.render(), b.render());
        assert!(a.render().contains("_Generated at 2024-01-01T00:00:00Z_"));
        let headings: Vec<_> = a.sections.iter().map(|s| s.heading.as_str()).collect();
        assert_eq!(headings, SECTION_HEADINGS);
    }

    #[test]
    fn table_cells_are_escaped() {
        let mut out = String::new();
        table(&mut out, &["a"], [vec!["x|y\nz".to_owned()]]);
        assert!(out.contains("x\\|y z"));
    }

    #[test]
    fn export_kind_names() {
        assert_eq!(ExportKind::parse("Threats"), Some(ExportKind::Threats));
        assert_eq!(ExportKind::parse("nope"), None);
    }
}
