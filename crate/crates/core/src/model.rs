//! Domain entities of a threat-oriented security requirements engagement,
//! plus the entity-level CRUD that keeps cross-references intact.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::risk::{self, RiskAssessment};
use crate::workflow::{StepState, StepStatus, STEP_COUNT};

pub const CURRENT_SCHEMA_VERSION: u32 = 1;

/// The six STRIDE threat categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stride {
    #[serde(rename = "S")]
    Spoofing,
    #[serde(rename = "T")]
    Tampering,
    #[serde(rename = "R")]
    Repudiation,
    #[serde(rename = "I")]
    InformationDisclosure,
    #[serde(rename = "D")]
    DenialOfService,
    #[serde(rename = "E")]
    ElevationOfPrivilege,
}

impl Stride {
    pub const ALL: [Stride; 6] = [
        Stride::Spoofing,
        Stride::Tampering,
        Stride::Repudiation,
        Stride::InformationDisclosure,
        Stride::DenialOfService,
        Stride::ElevationOfPrivilege,
    ];

    pub fn letter(self) -> char {
        match self {
            Stride::Spoofing => 'S',
            Stride::Tampering => 'T',
            Stride::Repudiation => 'R',
            Stride::InformationDisclosure => 'I',
            Stride::DenialOfService => 'D',
            Stride::ElevationOfPrivilege => 'E',
        }
    }

    pub fn from_letter(c: char) -> Option<Stride> {
        Stride::ALL
            .into_iter()
            .find(|s| s.letter() == c.to_ascii_uppercase())
    }

    pub fn name(self) -> &'static str {
        match self {
            Stride::Spoofing => "Spoofing",
            Stride::Tampering => "Tampering",
            Stride::Repudiation => "Repudiation",
            Stride::InformationDisclosure => "Information disclosure",
            Stride::DenialOfService => "Denial of service",
            Stride::ElevationOfPrivilege => "Elevation of privilege",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A set of STRIDE categories, always enumerated in S,T,R,I,D,E order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Stride>", into = "Vec<Stride>")]
pub struct StrideSet(u8);

impl StrideSet {
    pub const fn empty() -> Self {
        StrideSet(0)
    }

    pub fn insert(&mut self, s: Stride) {
        self.0 |= s.bit();
    }

    pub fn contains(self, s: Stride) -> bool {
        self.0 & s.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn intersection(self, other: StrideSet) -> StrideSet {
        StrideSet(self.0 & other.0)
    }

    pub fn union(self, other: StrideSet) -> StrideSet {
        StrideSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Stride> {
        Stride::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    /// Parses `"T,E"`, `"TE"` or `"t, e"`.
    pub fn parse_letters(text: &str) -> Result<StrideSet, String> {
        let mut set = StrideSet::empty();
        for c in text.chars().filter(|c| !c.is_whitespace() && *c != ',') {
            let s = Stride::from_letter(c).ok_or_else(|| format!("unknown STRIDE letter '{c}'"))?;
            set.insert(s);
        }
        Ok(set)
    }

    pub fn letters(self) -> String {
        self.iter().map(Stride::letter).collect()
    }
}

impl FromIterator<Stride> for StrideSet {
    fn from_iter<I: IntoIterator<Item = Stride>>(iter: I) -> Self {
        let mut set = StrideSet::empty();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl From<Vec<Stride>> for StrideSet {
    fn from(v: Vec<Stride>) -> Self {
        v.into_iter().collect()
    }
}

impl From<StrideSet> for Vec<Stride> {
    fn from(s: StrideSet) -> Self {
        s.iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CiaFacet {
    #[serde(rename = "C")]
    Confidentiality,
    #[serde(rename = "I")]
    Integrity,
    #[serde(rename = "A")]
    Availability,
}

impl CiaFacet {
    pub const ALL: [CiaFacet; 3] = [
        CiaFacet::Confidentiality,
        CiaFacet::Integrity,
        CiaFacet::Availability,
    ];

    pub fn letter(self) -> char {
        match self {
            CiaFacet::Confidentiality => 'C',
            CiaFacet::Integrity => 'I',
            CiaFacet::Availability => 'A',
        }
    }

    pub fn from_letter(c: char) -> Option<CiaFacet> {
        CiaFacet::ALL
            .into_iter()
            .find(|f| f.letter() == c.to_ascii_uppercase())
    }
}

/// Parses `"C,I,A"` style facet lists into a sorted set.
pub fn parse_cia(text: &str) -> Result<BTreeSet<CiaFacet>, String> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| CiaFacet::from_letter(c).ok_or_else(|| format!("unknown CIA letter '{c}'")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalSource {
    Interview,
    Brainstorming,
    Review,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub description: String,
    pub source: GoalSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StakeholderGroup {
    Managerial,
    Marketing,
    InformationSystem,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StakeholderPriority {
    Critical,
    Major,
    Minor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub id: String,
    pub name: String,
    pub group: StakeholderGroup,
    pub priority: StakeholderPriority,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agreed,
    Objected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Agreement {
    pub goal_id: String,
    pub stakeholder_id: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetPriority {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Asset {
    pub id: String,
    pub name: String,
    pub description: String,
    pub cia: BTreeSet<CiaFacet>,
    pub priority: AssetPriority,
    #[serde(default)]
    pub identified_by: Vec<String>,
}

/// The four points of security attack analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PointKind {
    PoA,
    PoB,
    PoC,
    PoD,
}

impl PointKind {
    pub const ALL: [PointKind; 4] = [PointKind::PoA, PointKind::PoB, PointKind::PoC, PointKind::PoD];

    pub fn id_prefix(self) -> &'static str {
        match self {
            PointKind::PoA => "PA",
            PointKind::PoB => "PB",
            PointKind::PoC => "PC",
            PointKind::PoD => "PD",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PointKind::PoA => "Point of Attack",
            PointKind::PoB => "Point of Belief",
            PointKind::PoC => "Point of Conjecture",
            PointKind::PoD => "Point of Dependency",
        }
    }

    pub fn parse(text: &str) -> Option<PointKind> {
        match text.to_ascii_lowercase().as_str() {
            "poa" => Some(PointKind::PoA),
            "pob" => Some(PointKind::PoB),
            "poc" => Some(PointKind::PoC),
            "pod" => Some(PointKind::PoD),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackPoint {
    pub id: String,
    pub kind: PointKind,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threat {
    pub id: String,
    pub title: String,
    pub description: String,
    pub stride: StrideSet,
    pub asset_refs: Vec<String>,
    #[serde(default)]
    pub point_refs: Vec<String>,
    pub mitigated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RequirementOrigin {
    Catalog { entry_id: String },
    Manual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityRequirement {
    pub id: String,
    pub text: String,
    pub threat_refs: Vec<String>,
    pub origin: RequirementOrigin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationVerdict {
    Accepted,
    Rejected,
    NeedsRework,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRecord {
    pub requirement_id: String,
    pub reviewer: String,
    pub verdict: ValidationVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrsRecord {
    pub generated_at: String,
    pub checksum: String,
    pub document_path: String,
}

/// The aggregate of every artifact in one engagement plus per-step workflow
/// state. Mutating operations return a new value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    pub project_id: String,
    pub name: String,
    pub schema_version: u32,
    pub goals: Vec<Goal>,
    pub stakeholders: Vec<Stakeholder>,
    pub agreements: Vec<Agreement>,
    pub assets: Vec<Asset>,
    pub attack_points: Vec<AttackPoint>,
    /// Point kinds explicitly declared to have no entries (PoC/PoD only).
    #[serde(default)]
    pub acknowledged_empty_points: Vec<PointKind>,
    pub threats: Vec<Threat>,
    pub assessments: Vec<RiskAssessment>,
    pub requirements: Vec<SecurityRequirement>,
    pub validations: Vec<ValidationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub srs_record: Option<SrsRecord>,
    pub step_states: Vec<StepState>,
}

impl Project {
    pub fn new(project_id: impl Into<String>, name: impl Into<String>) -> Self {
        let step_states = (1..=STEP_COUNT)
            .map(|step| StepState {
                step,
                status: if step == 1 {
                    StepStatus::InProgress
                } else {
                    StepStatus::Locked
                },
            })
            .collect();
        Project {
            project_id: project_id.into(),
            name: name.into(),
            schema_version: CURRENT_SCHEMA_VERSION,
            goals: Vec::new(),
            stakeholders: Vec::new(),
            agreements: Vec::new(),
            assets: Vec::new(),
            attack_points: Vec::new(),
            acknowledged_empty_points: Vec::new(),
            threats: Vec::new(),
            assessments: Vec::new(),
            requirements: Vec::new(),
            validations: Vec::new(),
            srs_record: None,
            step_states,
        }
    }

    pub fn goal(&self, id: &str) -> Option<&Goal> {
        self.goals.iter().find(|g| g.id == id)
    }

    pub fn stakeholder(&self, id: &str) -> Option<&Stakeholder> {
        self.stakeholders.iter().find(|s| s.id == id)
    }

    pub fn asset(&self, id: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.id == id)
    }

    pub fn attack_point(&self, id: &str) -> Option<&AttackPoint> {
        self.attack_points.iter().find(|p| p.id == id)
    }

    pub fn threat(&self, id: &str) -> Option<&Threat> {
        self.threats.iter().find(|t| t.id == id)
    }

    pub fn assessment(&self, threat_id: &str) -> Option<&RiskAssessment> {
        self.assessments.iter().find(|a| a.threat_id == threat_id)
    }

    pub fn requirement(&self, id: &str) -> Option<&SecurityRequirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn agreement(&self, goal_id: &str, stakeholder_id: &str) -> Option<&Agreement> {
        self.agreements
            .iter()
            .find(|a| a.goal_id == goal_id && a.stakeholder_id == stakeholder_id)
    }

    pub fn step_status(&self, step: u8) -> Option<StepStatus> {
        self.step_states
            .iter()
            .find(|s| s.step == step)
            .map(|s| s.status)
    }

    pub fn requirements_for(&self, threat_id: &str) -> impl Iterator<Item = &SecurityRequirement> {
        let threat_id = threat_id.to_owned();
        self.requirements
            .iter()
            .filter(move |r| r.threat_refs.contains(&threat_id))
    }

    /// Validation outcome of a requirement: `None` when never reviewed,
    /// otherwise the most severe verdict recorded by any reviewer.
    pub fn requirement_verdict(&self, requirement_id: &str) -> Option<ValidationVerdict> {
        let mut verdict = None;
        for v in self
            .validations
            .iter()
            .filter(|v| v.requirement_id == requirement_id)
        {
            verdict = Some(match (verdict, v.verdict) {
                (_, ValidationVerdict::Rejected) | (Some(ValidationVerdict::Rejected), _) => {
                    ValidationVerdict::Rejected
                }
                (_, ValidationVerdict::NeedsRework) | (Some(ValidationVerdict::NeedsRework), _) => {
                    ValidationVerdict::NeedsRework
                }
                _ => ValidationVerdict::Accepted,
            });
        }
        verdict
    }
}

/// Kinds of entity housed in a project, in workflow order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Goal,
    Stakeholder,
    Agreement,
    Asset,
    AttackPoint,
    Threat,
    RiskAssessment,
    SecurityRequirement,
    ValidationRecord,
    SrsRecord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Entity {
    Goal(Goal),
    Stakeholder(Stakeholder),
    Agreement(Agreement),
    Asset(Asset),
    AttackPoint(AttackPoint),
    Threat(Threat),
    RiskAssessment(RiskAssessment),
    SecurityRequirement(SecurityRequirement),
    ValidationRecord(ValidationRecord),
    SrsRecord(SrsRecord),
}

impl Entity {
    pub fn kind(&self) -> EntityKind {
        match self {
            Entity::Goal(_) => EntityKind::Goal,
            Entity::Stakeholder(_) => EntityKind::Stakeholder,
            Entity::Agreement(_) => EntityKind::Agreement,
            Entity::Asset(_) => EntityKind::Asset,
            Entity::AttackPoint(_) => EntityKind::AttackPoint,
            Entity::Threat(_) => EntityKind::Threat,
            Entity::RiskAssessment(_) => EntityKind::RiskAssessment,
            Entity::SecurityRequirement(_) => EntityKind::SecurityRequirement,
            Entity::ValidationRecord(_) => EntityKind::ValidationRecord,
            Entity::SrsRecord(_) => EntityKind::SrsRecord,
        }
    }

    pub fn key(&self) -> EntityKey {
        match self {
            Entity::Goal(g) => EntityKey::Goal(g.id.clone()),
            Entity::Stakeholder(s) => EntityKey::Stakeholder(s.id.clone()),
            Entity::Agreement(a) => EntityKey::Agreement {
                goal_id: a.goal_id.clone(),
                stakeholder_id: a.stakeholder_id.clone(),
            },
            Entity::Asset(a) => EntityKey::Asset(a.id.clone()),
            Entity::AttackPoint(p) => EntityKey::AttackPoint(p.id.clone()),
            Entity::Threat(t) => EntityKey::Threat(t.id.clone()),
            Entity::RiskAssessment(r) => EntityKey::RiskAssessment(r.threat_id.clone()),
            Entity::SecurityRequirement(r) => EntityKey::SecurityRequirement(r.id.clone()),
            Entity::ValidationRecord(v) => EntityKey::ValidationRecord {
                requirement_id: v.requirement_id.clone(),
                reviewer: v.reviewer.clone(),
            },
            Entity::SrsRecord(_) => EntityKey::SrsRecord,
        }
    }
}

/// Identifies one entity. Agreements, assessments and validation records
/// are keyed by the references they join.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntityKey {
    Goal(String),
    Stakeholder(String),
    Agreement { goal_id: String, stakeholder_id: String },
    Asset(String),
    AttackPoint(String),
    Threat(String),
    RiskAssessment(String),
    SecurityRequirement(String),
    ValidationRecord { requirement_id: String, reviewer: String },
    SrsRecord,
}

impl EntityKey {
    pub fn kind(&self) -> EntityKind {
        match self {
            EntityKey::Goal(_) => EntityKind::Goal,
            EntityKey::Stakeholder(_) => EntityKind::Stakeholder,
            EntityKey::Agreement { .. } => EntityKind::Agreement,
            EntityKey::Asset(_) => EntityKind::Asset,
            EntityKey::AttackPoint(_) => EntityKind::AttackPoint,
            EntityKey::Threat(_) => EntityKind::Threat,
            EntityKey::RiskAssessment(_) => EntityKind::RiskAssessment,
            EntityKey::SecurityRequirement(_) => EntityKind::SecurityRequirement,
            EntityKey::ValidationRecord { .. } => EntityKind::ValidationRecord,
            EntityKey::SrsRecord => EntityKind::SrsRecord,
        }
    }
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityKey::Goal(id)
            | EntityKey::Stakeholder(id)
            | EntityKey::Asset(id)
            | EntityKey::AttackPoint(id)
            | EntityKey::Threat(id)
            | EntityKey::SecurityRequirement(id) => f.write_str(id),
            EntityKey::Agreement {
                goal_id,
                stakeholder_id,
            } => write!(f, "agreement({goal_id},{stakeholder_id})"),
            EntityKey::RiskAssessment(t) => write!(f, "risk({t})"),
            EntityKey::ValidationRecord {
                requirement_id,
                reviewer,
            } => write!(f, "validation({requirement_id},{reviewer})"),
            EntityKey::SrsRecord => f.write_str("srs"),
        }
    }
}

/// One broken invariant: the offending entity and the rule it breaks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl Violation {
    pub fn new(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            entity: entity.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("dangling reference {0}")]
    DanglingReference(String),
    #[error("{0} not found")]
    NotFound(String),
    #[error("{id} is still referenced by {}", by.join(", "))]
    StillReferenced { id: String, by: Vec<String> },
    #[error("invariant violated: {}", join_violations(.0))]
    InvariantViolation(Vec<Violation>),
}

pub(crate) fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Checks `<prefix><n>` with n a positive decimal number.
pub fn is_numbered_id(id: &str, prefix: &str) -> bool {
    id.strip_prefix(prefix)
        .map(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) && !n.starts_with('0'))
        .unwrap_or(false)
}

/// Numeric suffix of a `<letters><n>` id, used for ordering.
pub fn id_number(id: &str) -> Option<u64> {
    let digits = id.trim_start_matches(|c: char| !c.is_ascii_digit());
    digits.parse().ok()
}

/// The id after the highest `<prefix><n>` in use, e.g. `G8` after `G7`.
pub fn next_numbered_id<'a>(ids: impl IntoIterator<Item = &'a str>, prefix: &str) -> String {
    let max = ids
        .into_iter()
        .filter(|id| is_numbered_id(id, prefix))
        .filter_map(id_number)
        .max()
        .unwrap_or(0);
    format!("{prefix}{}", max + 1)
}

impl Project {
    /// Next free id for a new entity of `kind`. Points need their kind for
    /// the prefix; stakeholders use `SH`.
    pub fn next_id(&self, kind: EntityKind, point_kind: Option<PointKind>) -> Option<String> {
        let ids = |v: Vec<&'_ str>, prefix: &str| next_numbered_id(v, prefix);
        Some(match kind {
            EntityKind::Goal => ids(self.goals.iter().map(|x| x.id.as_str()).collect(), "G"),
            EntityKind::Stakeholder => {
                ids(self.stakeholders.iter().map(|x| x.id.as_str()).collect(), "SH")
            }
            EntityKind::Asset => ids(self.assets.iter().map(|x| x.id.as_str()).collect(), "A"),
            EntityKind::AttackPoint => ids(
                self.attack_points.iter().map(|x| x.id.as_str()).collect(),
                point_kind?.id_prefix(),
            ),
            EntityKind::Threat => ids(self.threats.iter().map(|x| x.id.as_str()).collect(), "T"),
            EntityKind::SecurityRequirement => {
                ids(self.requirements.iter().map(|x| x.id.as_str()).collect(), "SR")
            }
            _ => return None,
        })
    }
}

fn is_opaque_id(id: &str) -> bool {
    !id.is_empty() && !id.chars().any(char::is_whitespace)
}

// Field-level invariants of a single entity, independent of the rest of the
// project.
fn entity_violations(entity: &Entity) -> Vec<Violation> {
    let mut out = Vec::new();
    match entity {
        Entity::Goal(g) => {
            if !is_numbered_id(&g.id, "G") {
                out.push(Violation::new(&g.id, "id format G<n>"));
            }
            if g.description.trim().is_empty() {
                out.push(Violation::new(&g.id, "description nonempty"));
            }
        }
        Entity::Stakeholder(s) => {
            if !is_opaque_id(&s.id) {
                out.push(Violation::new(&s.id, "id nonempty without whitespace"));
            }
        }
        Entity::Agreement(_) => {}
        Entity::Asset(a) => {
            if !is_numbered_id(&a.id, "A") {
                out.push(Violation::new(&a.id, "id format A<n>"));
            }
            if a.cia.is_empty() {
                out.push(Violation::new(&a.id, "cia nonempty"));
            }
        }
        Entity::AttackPoint(p) => {
            let known = PointKind::ALL
                .into_iter()
                .any(|k| is_numbered_id(&p.id, k.id_prefix()));
            if !known {
                out.push(Violation::new(&p.id, "id format PA<n>|PB<n>|PC<n>|PD<n>"));
            } else if !is_numbered_id(&p.id, p.kind.id_prefix()) {
                out.push(Violation::new(&p.id, "id prefix matches kind"));
            }
        }
        Entity::Threat(t) => {
            if !is_numbered_id(&t.id, "T") {
                out.push(Violation::new(&t.id, "id format T<n>"));
            }
            if t.stride.is_empty() {
                out.push(Violation::new(&t.id, "stride nonempty"));
            }
            if t.asset_refs.is_empty() {
                out.push(Violation::new(&t.id, "asset_refs nonempty"));
            }
        }
        Entity::RiskAssessment(r) => {
            out.extend(
                risk::assessment_violations(r)
                    .into_iter()
                    .map(|rule| Violation::new(format!("risk({})", r.threat_id), rule)),
            );
        }
        Entity::SecurityRequirement(r) => {
            if !is_numbered_id(&r.id, "SR") {
                out.push(Violation::new(&r.id, "id format SR<n>"));
            }
            if r.text.trim().is_empty() {
                out.push(Violation::new(&r.id, "text nonempty"));
            }
            if r.threat_refs.is_empty() {
                out.push(Violation::new(&r.id, "threat_refs nonempty"));
            }
            if let RequirementOrigin::Catalog { entry_id } = &r.origin {
                if entry_id.is_empty() {
                    out.push(Violation::new(&r.id, "catalog entry id nonempty"));
                }
            }
        }
        Entity::ValidationRecord(_) => {}
        Entity::SrsRecord(s) => {
            if s.checksum.is_empty() {
                out.push(Violation::new("srs", "checksum nonempty"));
            }
        }
    }
    out
}

// References an entity makes to other entities, as (key, rendered id).
fn outgoing_refs(entity: &Entity) -> Vec<EntityKey> {
    match entity {
        Entity::Agreement(a) => vec![
            EntityKey::Goal(a.goal_id.clone()),
            EntityKey::Stakeholder(a.stakeholder_id.clone()),
        ],
        Entity::Asset(a) => a
            .identified_by
            .iter()
            .cloned()
            .map(EntityKey::Stakeholder)
            .collect(),
        Entity::Threat(t) => t
            .asset_refs
            .iter()
            .cloned()
            .map(EntityKey::Asset)
            .chain(t.point_refs.iter().cloned().map(EntityKey::AttackPoint))
            .collect(),
        Entity::RiskAssessment(r) => vec![EntityKey::Threat(r.threat_id.clone())],
        Entity::SecurityRequirement(r) => r
            .threat_refs
            .iter()
            .cloned()
            .map(EntityKey::Threat)
            .collect(),
        Entity::ValidationRecord(v) => vec![
            EntityKey::SecurityRequirement(v.requirement_id.clone()),
            EntityKey::Stakeholder(v.reviewer.clone()),
        ],
        Entity::Goal(_) | Entity::Stakeholder(_) | Entity::AttackPoint(_) | Entity::SrsRecord(_) => {
            Vec::new()
        }
    }
}

fn exists(project: &Project, key: &EntityKey) -> bool {
    match key {
        EntityKey::Goal(id) => project.goal(id).is_some(),
        EntityKey::Stakeholder(id) => project.stakeholder(id).is_some(),
        EntityKey::Agreement {
            goal_id,
            stakeholder_id,
        } => project.agreement(goal_id, stakeholder_id).is_some(),
        EntityKey::Asset(id) => project.asset(id).is_some(),
        EntityKey::AttackPoint(id) => project.attack_point(id).is_some(),
        EntityKey::Threat(id) => project.threat(id).is_some(),
        EntityKey::RiskAssessment(id) => project.assessment(id).is_some(),
        EntityKey::SecurityRequirement(id) => project.requirement(id).is_some(),
        EntityKey::ValidationRecord {
            requirement_id,
            reviewer,
        } => project
            .validations
            .iter()
            .any(|v| v.requirement_id == *requirement_id && v.reviewer == *reviewer),
        EntityKey::SrsRecord => project.srs_record.is_some(),
    }
}

/// Every entity currently in the project, in kind order then insertion order.
pub fn entities(project: &Project) -> Vec<Entity> {
    let mut out = Vec::new();
    out.extend(project.goals.iter().cloned().map(Entity::Goal));
    out.extend(project.stakeholders.iter().cloned().map(Entity::Stakeholder));
    out.extend(project.agreements.iter().cloned().map(Entity::Agreement));
    out.extend(project.assets.iter().cloned().map(Entity::Asset));
    out.extend(project.attack_points.iter().cloned().map(Entity::AttackPoint));
    out.extend(project.threats.iter().cloned().map(Entity::Threat));
    out.extend(project.assessments.iter().cloned().map(Entity::RiskAssessment));
    out.extend(
        project
            .requirements
            .iter()
            .cloned()
            .map(Entity::SecurityRequirement),
    );
    out.extend(project.validations.iter().cloned().map(Entity::ValidationRecord));
    out.extend(project.srs_record.iter().cloned().map(Entity::SrsRecord));
    out
}

/// Ids of the entities that reference `key`.
pub fn referrers(project: &Project, key: &EntityKey) -> Vec<String> {
    entities(project)
        .iter()
        .filter(|e| outgoing_refs(e).contains(key))
        .map(|e| e.key().to_string())
        .collect()
}

fn check_insertable(project: &Project, entity: &Entity) -> Result<(), ModelError> {
    let key = entity.key();
    if exists(project, &key) {
        return Err(ModelError::DuplicateId(key.to_string()));
    }
    check_refs_and_fields(project, entity)
}

fn check_refs_and_fields(project: &Project, entity: &Entity) -> Result<(), ModelError> {
    if let Some(missing) = outgoing_refs(entity).iter().find(|k| !exists(project, k)) {
        return Err(ModelError::DanglingReference(missing.to_string()));
    }
    let violations = entity_violations(entity);
    if !violations.is_empty() {
        return Err(ModelError::InvariantViolation(violations));
    }
    Ok(())
}

fn push(project: &mut Project, entity: Entity) {
    match entity {
        Entity::Goal(g) => project.goals.push(g),
        Entity::Stakeholder(s) => project.stakeholders.push(s),
        Entity::Agreement(a) => project.agreements.push(a),
        Entity::Asset(a) => project.assets.push(a),
        Entity::AttackPoint(p) => project.attack_points.push(p),
        Entity::Threat(t) => project.threats.push(t),
        Entity::RiskAssessment(r) => project.assessments.push(r),
        Entity::SecurityRequirement(r) => project.requirements.push(r),
        Entity::ValidationRecord(v) => project.validations.push(v),
        Entity::SrsRecord(s) => project.srs_record = Some(s),
    }
}

/// Appends an entity after checking its id is free, its references resolve
/// and its own field invariants hold.
pub fn add_entity(project: &Project, entity: Entity) -> Result<Project, ModelError> {
    check_insertable(project, &entity)?;
    let mut next = project.clone();
    push(&mut next, entity);
    Ok(next)
}

/// Replaces an existing entity in place, keeping its position.
pub fn replace_entity(project: &Project, entity: Entity) -> Result<Project, ModelError> {
    let key = entity.key();
    if !exists(project, &key) {
        return Err(ModelError::NotFound(key.to_string()));
    }
    check_refs_and_fields(project, &entity)?;
    let mut next = project.clone();
    macro_rules! swap {
        ($list:expr, $value:expr, $pred:expr) => {{
            let slot = $list.iter_mut().find($pred).expect("checked above");
            *slot = $value;
        }};
    }
    match entity {
        Entity::Goal(g) => swap!(next.goals, g.clone(), |x| x.id == g.id),
        Entity::Stakeholder(s) => swap!(next.stakeholders, s.clone(), |x| x.id == s.id),
        Entity::Agreement(a) => swap!(next.agreements, a.clone(), |x| x.goal_id == a.goal_id
            && x.stakeholder_id == a.stakeholder_id),
        Entity::Asset(a) => swap!(next.assets, a.clone(), |x| x.id == a.id),
        Entity::AttackPoint(p) => swap!(next.attack_points, p.clone(), |x| x.id == p.id),
        Entity::Threat(t) => swap!(next.threats, t.clone(), |x| x.id == t.id),
        Entity::RiskAssessment(r) => {
            swap!(next.assessments, r.clone(), |x| x.threat_id == r.threat_id)
        }
        Entity::SecurityRequirement(r) => swap!(next.requirements, r.clone(), |x| x.id == r.id),
        Entity::ValidationRecord(v) => swap!(next.validations, v.clone(), |x| x.requirement_id
            == v.requirement_id
            && x.reviewer == v.reviewer),
        Entity::SrsRecord(s) => next.srs_record = Some(s),
    }
    Ok(next)
}

/// Removes an entity unless something still references it.
pub fn remove_entity(project: &Project, key: &EntityKey) -> Result<Project, ModelError> {
    if !exists(project, key) {
        return Err(ModelError::NotFound(key.to_string()));
    }
    let by = referrers(project, key);
    if !by.is_empty() {
        return Err(ModelError::StillReferenced {
            id: key.to_string(),
            by,
        });
    }
    let mut next = project.clone();
    match key {
        EntityKey::Goal(id) => next.goals.retain(|x| x.id != *id),
        EntityKey::Stakeholder(id) => next.stakeholders.retain(|x| x.id != *id),
        EntityKey::Agreement {
            goal_id,
            stakeholder_id,
        } => next
            .agreements
            .retain(|x| !(x.goal_id == *goal_id && x.stakeholder_id == *stakeholder_id)),
        EntityKey::Asset(id) => next.assets.retain(|x| x.id != *id),
        EntityKey::AttackPoint(id) => next.attack_points.retain(|x| x.id != *id),
        EntityKey::Threat(id) => next.threats.retain(|x| x.id != *id),
        EntityKey::RiskAssessment(id) => next.assessments.retain(|x| x.threat_id != *id),
        EntityKey::SecurityRequirement(id) => next.requirements.retain(|x| x.id != *id),
        EntityKey::ValidationRecord {
            requirement_id,
            reviewer,
        } => next
            .validations
            .retain(|x| !(x.requirement_id == *requirement_id && x.reviewer == *reviewer)),
        EntityKey::SrsRecord => next.srs_record = None,
    }
    Ok(next)
}

/// Reports every broken invariant. An empty list means the project is valid.
pub fn validate_project(project: &Project) -> Vec<Violation> {
    let mut out = Vec::new();

    if project.schema_version < 1 {
        out.push(Violation::new("project", "schema_version >= 1"));
    }

    // Uniqueness per kind.
    let all = entities(project);
    let mut seen: HashSet<EntityKey> = HashSet::new();
    for e in &all {
        let key = e.key();
        if !seen.insert(key.clone()) {
            let rule = match e.kind() {
                EntityKind::Agreement => "one agreement per (goal, stakeholder)",
                EntityKind::ValidationRecord => "one record per (requirement, reviewer)",
                EntityKind::RiskAssessment => "one assessment per threat",
                _ => "id unique",
            };
            let v = Violation::new(key.to_string(), rule);
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }

    for e in &all {
        out.extend(entity_violations(e));
        for target in outgoing_refs(e) {
            if !seen.contains(&target) {
                out.push(Violation::new(
                    e.key().to_string(),
                    format!("dangling reference {target}"),
                ));
            }
        }
    }

    for kind in &project.acknowledged_empty_points {
        if matches!(kind, PointKind::PoA | PointKind::PoB) {
            out.push(Violation::new(
                "project",
                "only PoC/PoD may be acknowledged empty",
            ));
        }
    }

    out.extend(step_state_violations(&project.step_states));
    out
}

fn step_state_violations(states: &[StepState]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut by_step: BTreeMap<u8, Vec<StepStatus>> = BTreeMap::new();
    for s in states {
        by_step.entry(s.step).or_default().push(s.status);
    }
    let exact = states.len() == STEP_COUNT as usize
        && (1..=STEP_COUNT).all(|k| by_step.get(&k).map(Vec::len) == Some(1));
    if !exact {
        out.push(Violation::new("project", "steps 1..10 exactly once"));
        return out;
    }
    let status = |k: u8| by_step[&k][0];
    if status(1) == StepStatus::Locked {
        out.push(Violation::new("step 1", "step 1 never locked"));
    }
    for k in 2..=STEP_COUNT {
        if matches!(status(k), StepStatus::InProgress | StepStatus::Complete) {
            let bad = (1..k).any(|j| !matches!(status(j), StepStatus::Complete | StepStatus::Stale));
            if bad {
                out.push(Violation::new(
                    format!("step {k}"),
                    "predecessors complete or stale",
                ));
            }
        }
    }
    out
}
