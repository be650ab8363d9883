//! Attack-surface summaries, advisory STRIDE suggestions and traceability
//! reports.

use serde::{Deserialize, Serialize};

use crate::catalog::tokenize;
use crate::model::{AssetPriority, CiaFacet, PointKind, Project, Stride, StrideSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceGroup {
    pub kind: PointKind,
    pub count: usize,
    pub ids: Vec<String>,
    /// Kind explicitly declared to have no points.
    pub acknowledged_empty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSummary {
    pub groups: Vec<SurfaceGroup>,
}

impl SurfaceSummary {
    pub fn count(&self, kind: PointKind) -> usize {
        self.groups
            .iter()
            .find(|g| g.kind == kind)
            .map_or(0, |g| g.count)
    }

    pub fn total(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }
}

pub fn surface_summary(project: &Project) -> SurfaceSummary {
    let groups = PointKind::ALL
        .into_iter()
        .map(|kind| {
            let ids: Vec<String> = project
                .attack_points
                .iter()
                .filter(|p| p.kind == kind)
                .map(|p| p.id.clone())
                .collect();
            SurfaceGroup {
                kind,
                count: ids.len(),
                ids,
                acknowledged_empty: project.acknowledged_empty_points.contains(&kind),
            }
        })
        .collect();
    SurfaceSummary { groups }
}

/// Word stems that hint at a STRIDE category. A stem fires when any token
/// of the input starts with it.
pub const STRIDE_RULES: &[(Stride, &[&str])] = &[
    (Stride::Spoofing, &["credential", "password", "impersonat", "spoof"]),
    (Stride::Tampering, &["inject", "modify", "tamper"]),
    (Stride::Repudiation, &["deny", "claim", "audit", "log", "repudiat"]),
    (Stride::InformationDisclosure, &["disclos", "leak", "reveal"]),
    (Stride::DenialOfService, &["crash", "flood", "prevent", "block"]),
    (Stride::ElevationOfPrivilege, &["privilege", "admin", "unauthorized"]),
];

/// Advisory STRIDE categories for a threat description. Never applied
/// automatically.
pub fn stride_suggest(title: &str, description: &str) -> StrideSet {
    let tokens = tokenize(&format!("{title} {description}"));
    STRIDE_RULES
        .iter()
        .filter(|(_, stems)| {
            tokens
                .iter()
                .any(|t| stems.iter().any(|stem| t.starts_with(stem)))
        })
        .map(|(s, _)| *s)
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub assets_without_threats: Vec<String>,
    pub threats_without_points: Vec<String>,
    /// Excluded threats are not listed.
    pub threats_without_requirements: Vec<String>,
    pub unvalidated_requirements: Vec<String>,
    pub orphan_points: Vec<String>,
}

impl CoverageReport {
    pub fn is_fully_traced(&self) -> bool {
        self.assets_without_threats.is_empty()
            && self.threats_without_points.is_empty()
            && self.threats_without_requirements.is_empty()
            && self.unvalidated_requirements.is_empty()
            && self.orphan_points.is_empty()
    }
}

pub fn coverage_report(project: &Project) -> CoverageReport {
    let p = project;
    CoverageReport {
        assets_without_threats: p
            .assets
            .iter()
            .filter(|a| !p.threats.iter().any(|t| t.asset_refs.contains(&a.id)))
            .map(|a| a.id.clone())
            .collect(),
        threats_without_points: p
            .threats
            .iter()
            .filter(|t| t.point_refs.is_empty())
            .map(|t| t.id.clone())
            .collect(),
        threats_without_requirements: p
            .threats
            .iter()
            .filter(|t| !p.assessment(&t.id).is_some_and(|a| a.excluded))
            .filter(|t| p.requirements_for(&t.id).next().is_none())
            .map(|t| t.id.clone())
            .collect(),
        unvalidated_requirements: p
            .requirements
            .iter()
            .filter(|r| !p.validations.iter().any(|v| v.requirement_id == r.id))
            .map(|r| r.id.clone())
            .collect(),
        orphan_points: p
            .attack_points
            .iter()
            .filter(|pt| !p.threats.iter().any(|t| t.point_refs.contains(&pt.id)))
            .map(|pt| pt.id.clone())
            .collect(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiaSummary {
    pub confidentiality: usize,
    pub integrity: usize,
    pub availability: usize,
    pub high: usize,
    pub medium: usize,
    pub low: usize,
}

impl CiaSummary {
    pub fn facet(&self, f: CiaFacet) -> usize {
        match f {
            CiaFacet::Confidentiality => self.confidentiality,
            CiaFacet::Integrity => self.integrity,
            CiaFacet::Availability => self.availability,
        }
    }
}

pub fn cia_summary(project: &Project) -> CiaSummary {
    let mut s = CiaSummary::default();
    for a in &project.assets {
        for f in &a.cia {
            match f {
                CiaFacet::Confidentiality => s.confidentiality += 1,
                CiaFacet::Integrity => s.integrity += 1,
                CiaFacet::Availability => s.availability += 1,
            }
        }
        match a.priority {
            AssetPriority::High => s.high += 1,
            AssetPriority::Medium => s.medium += 1,
            AssetPriority::Low => s.low += 1,
        }
    }
    s
}
