//! Random project construction and independent oracles shared by the
//! property and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use store_core::catalog::{Catalog, CatalogEntry, Weights};
use store_core::model::{
    id_number, Agreement, Asset, AssetPriority, AttackPoint, CiaFacet, Entity, EntityKey, Goal,
    GoalSource, PointKind, Project, RequirementOrigin, SecurityRequirement, Stakeholder,
    StakeholderGroup, StakeholderPriority, Stride, StrideSet, Threat, ValidationRecord,
    ValidationVerdict, Verdict,
};
use store_core::risk::{DreadComponents, RiskInput};
use store_core::workflow::{current_step, exit_checks, mutation_step_of, StepStatus};
use store_core::{commands, model, Result};

const WORDS: &[&str] = &[
    "sql", "injection", "login", "password", "session", "token", "admin", "crash", "flood",
    "leak", "disclose", "tamper", "audit", "log", "server", "database", "user", "data", "web",
    "privilege", "spoof", "deny", "block", "record", "student",
];

const ODD: &[&str] = &[
    "é", "✓", "\"", "\\", "\n", "\t", ",", "'", "日本", "🔒", "|", "#", "*", "<b>", "&amp;", "",
];

/// Free text mixing ordinary words with characters that stress escaping.
pub fn text(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..6);
    let mut parts = Vec::new();
    for _ in 0..n {
        if rng.random_bool(0.2) {
            parts.push(ODD.choose(rng).unwrap().to_string());
        } else {
            let w = WORDS.choose(rng).unwrap();
            parts.push(if rng.random_bool(0.2) { w.to_uppercase() } else { w.to_string() });
        }
    }
    let s = parts.join(" ");
    if s.trim().is_empty() {
        "x".into()
    } else {
        s
    }
}

pub fn stride_set(rng: &mut impl Rng) -> StrideSet {
    let mut bits: u8 = rng.random_range(1..64);
    let mut set = StrideSet::default();
    for s in Stride::ALL {
        if bits & 1 == 1 {
            set.insert(s);
        }
        bits >>= 1;
    }
    set
}

fn next_id(ids: impl Iterator<Item = String>, prefix: &str) -> String {
    let max = ids
        .filter(|i| i.starts_with(prefix))
        .filter_map(|i| id_number(&i))
        .max()
        .unwrap_or(0);
    format!("{prefix}{}", max + 1)
}

fn pick<'a, T>(rng: &mut impl Rng, items: &'a [T]) -> Option<&'a T> {
    items.choose(rng)
}

pub fn random_catalog(rng: &mut impl Rng, entries: usize) -> Catalog {
    let entries = (0..entries)
        .map(|i| {
            let mut keywords = Vec::new();
            for _ in 0..rng.random_range(1..5) {
                let w = WORDS.choose(rng).unwrap().to_string();
                if !keywords.contains(&w) {
                    keywords.push(w);
                }
            }
            CatalogEntry {
                id: format!("e{:02}", rng.random_range(0..100) * 100 + i),
                title: text(rng),
                keywords,
                stride_tags: stride_set(rng),
                requirement_text: format!("Requirement {i}: {}", text(rng)),
                references: Vec::new(),
            }
        })
        .collect();
    Catalog {
        catalog_id: "random".into(),
        version: 1,
        weights: Weights::default(),
        entries,
    }
}

/// One user-level command against a project.
#[derive(Debug, Clone)]
pub enum Op {
    Add(Entity),
    Remove(EntityKey),
    Agree(Agreement),
    AcknowledgeNone(PointKind),
    Tag(String, StrideSet),
    Assess(String, RiskInput),
    Exclude(String, bool),
    Elicit,
    Validate(ValidationRecord),
    GenerateSrs,
    Complete(u8),
    Reopen(u8),
}

fn random_input(rng: &mut impl Rng) -> RiskInput {
    // Mostly in range; an occasional out-of-range value exercises rejection.
    let hi = if rng.random_bool(0.05) { 12 } else { 10 };
    if rng.random_bool(0.5) {
        RiskInput::Dread {
            components: DreadComponents(std::array::from_fn(|_| rng.random_range(0..=hi))),
        }
    } else {
        RiskInput::SimpleRisk {
            probability: rng.random_range(1..=hi),
            damage_potential: rng.random_range(1..=hi),
        }
    }
}

fn ids<T>(items: &[T], f: impl Fn(&T) -> &String) -> Vec<String> {
    items.iter().map(|x| f(x).clone()).collect()
}

fn random_add(rng: &mut impl Rng, p: &Project, kind: u8) -> Op {
    let goals = ids(&p.goals, |g| &g.id);
    let shs = ids(&p.stakeholders, |s| &s.id);
    let assets = ids(&p.assets, |a| &a.id);
    let points = ids(&p.attack_points, |a| &a.id);
    let threats = ids(&p.threats, |t| &t.id);
    let reqs = ids(&p.requirements, |r| &r.id);
    // Now and then reuse an existing id or reference a missing one.
    let dup = rng.random_bool(0.05);
    let fresh = |rng: &mut dyn rand::RngCore, existing: &[String], prefix: &str| -> String {
        if dup && !existing.is_empty() {
            existing.choose(rng).unwrap().clone()
        } else {
            next_id(existing.iter().cloned(), prefix)
        }
    };
    let dangling = rng.random_bool(0.05);
    let some_ref = |rng: &mut dyn rand::RngCore, existing: &[String], prefix: &str| -> Option<String> {
        if dangling || existing.is_empty() {
            Some(format!("{prefix}999"))
        } else {
            existing.choose(rng).cloned()
        }
    };
    match kind {
        0 => Op::Add(Entity::Goal(Goal {
            id: fresh(rng, &goals, "G"),
            description: text(rng),
            source: *[GoalSource::Interview, GoalSource::Review, GoalSource::Other]
                .choose(rng)
                .unwrap(),
        })),
        1 => Op::Add(Entity::Stakeholder(Stakeholder {
            id: fresh(rng, &shs, "SH"),
            name: text(rng),
            group: *[StakeholderGroup::Managerial, StakeholderGroup::InformationSystem]
                .choose(rng)
                .unwrap(),
            priority: *[
                StakeholderPriority::Critical,
                StakeholderPriority::Major,
                StakeholderPriority::Minor,
            ]
            .choose(rng)
            .unwrap(),
        })),
        2 => Op::Agree(Agreement {
            goal_id: some_ref(rng, &goals, "G").unwrap(),
            stakeholder_id: some_ref(rng, &shs, "SH").unwrap(),
            verdict: if rng.random_bool(0.85) { Verdict::Agreed } else { Verdict::Objected },
            note: rng.random_bool(0.3).then(|| text(rng)),
        }),
        3 => {
            let mut cia = BTreeSet::new();
            for f in CiaFacet::ALL {
                if rng.random_bool(0.5) {
                    cia.insert(f);
                }
            }
            if cia.is_empty() {
                cia.insert(CiaFacet::Integrity);
            }
            Op::Add(Entity::Asset(Asset {
                id: fresh(rng, &assets, "A"),
                name: text(rng),
                description: text(rng),
                cia,
                priority: *[AssetPriority::Low, AssetPriority::Medium, AssetPriority::High]
                    .choose(rng)
                    .unwrap(),
                identified_by: if rng.random_bool(0.3) {
                    some_ref(rng, &shs, "SH").into_iter().collect()
                } else {
                    Vec::new()
                },
            }))
        }
        4 => {
            let kind = *PointKind::ALL.choose(rng).unwrap();
            let existing: Vec<String> = points
                .iter()
                .filter(|i| i.starts_with(kind.id_prefix()))
                .cloned()
                .collect();
            Op::Add(Entity::AttackPoint(AttackPoint {
                id: fresh(rng, &existing, kind.id_prefix()),
                kind,
                name: text(rng),
                description: text(rng),
            }))
        }
        5 => Op::Add(Entity::Threat(Threat {
            id: fresh(rng, &threats, "T"),
            title: text(rng),
            description: text(rng),
            stride: stride_set(rng),
            asset_refs: some_ref(rng, &assets, "A").into_iter().collect(),
            point_refs: if rng.random_bool(0.4) && !points.is_empty() {
                some_ref(rng, &points, "PA").into_iter().collect()
            } else {
                Vec::new()
            },
            mitigated: rng.random_bool(0.3),
        })),
        6 => Op::Assess(some_ref(rng, &threats, "T").unwrap(), random_input(rng)),
        7 => {
            let threat_refs: Vec<String> = some_ref(rng, &threats, "T").into_iter().collect();
            Op::Add(Entity::SecurityRequirement(SecurityRequirement {
                id: fresh(rng, &reqs, "SR"),
                text: text(rng),
                threat_refs,
                origin: RequirementOrigin::Manual,
            }))
        }
        _ => Op::Validate(ValidationRecord {
            requirement_id: some_ref(rng, &reqs, "SR").unwrap(),
            reviewer: some_ref(rng, &shs, "SH").unwrap(),
            verdict: if rng.random_bool(0.8) {
                ValidationVerdict::Accepted
            } else {
                *[ValidationVerdict::Rejected, ValidationVerdict::NeedsRework]
                    .choose(rng)
                    .unwrap()
            },
            rationale: rng.random_bool(0.3).then(|| text(rng)),
        }),
    }
}

fn random_remove(rng: &mut impl Rng, p: &Project) -> Option<Op> {
    let all = model::entities(p);
    pick(rng, &all).map(|e| Op::Remove(e.key()))
}

// An operation that moves the current step toward its exit criteria.
fn helpful(rng: &mut impl Rng, p: &Project) -> Op {
    let step = current_step(p);
    let done = exit_checks(p, step).unwrap().iter().all(|c| c.satisfied);
    if done && p.step_status(step) != Some(StepStatus::Complete) {
        return Op::Complete(step);
    }
    match step {
        1 => random_add(rng, p, 0),
        2 => random_add(rng, p, 1),
        3 => {
            let crit: Vec<&Stakeholder> = p
                .stakeholders
                .iter()
                .filter(|s| s.priority == StakeholderPriority::Critical)
                .collect();
            let open = p.agreements.iter().find(|a| a.verdict == Verdict::Objected);
            if let Some(a) = open {
                return Op::Agree(Agreement {
                    verdict: Verdict::Agreed,
                    ..a.clone()
                });
            }
            match (pick(rng, &p.goals), pick(rng, &crit)) {
                (Some(g), Some(s)) => Op::Agree(Agreement {
                    goal_id: g.id.clone(),
                    stakeholder_id: s.id.clone(),
                    verdict: Verdict::Agreed,
                    note: None,
                }),
                _ => random_add(rng, p, 2),
            }
        }
        4 => random_add(rng, p, 3),
        5 => {
            let has = |k| p.attack_points.iter().any(|a| a.kind == k);
            if !has(PointKind::PoA) || !has(PointKind::PoB) || rng.random_bool(0.5) {
                random_add(rng, p, 4)
            } else if rng.random_bool(0.5) {
                Op::AcknowledgeNone(PointKind::PoC)
            } else {
                Op::AcknowledgeNone(PointKind::PoD)
            }
        }
        6 => random_add(rng, p, 5),
        7 => match p.threats.iter().find(|t| p.assessment(&t.id).is_none()) {
            Some(t) => Op::Assess(t.id.clone(), random_input(rng)),
            None => random_add(rng, p, 6),
        },
        8 => {
            if rng.random_bool(0.6) {
                Op::Elicit
            } else {
                random_add(rng, p, 7)
            }
        }
        9 => match p
            .requirements
            .iter()
            .find(|r| !p.validations.iter().any(|v| v.requirement_id == r.id))
        {
            Some(r) if !p.stakeholders.is_empty() => Op::Validate(ValidationRecord {
                requirement_id: r.id.clone(),
                reviewer: p.stakeholders[0].id.clone(),
                verdict: ValidationVerdict::Accepted,
                rationale: None,
            }),
            _ => random_add(rng, p, 8),
        },
        _ => Op::GenerateSrs,
    }
}

/// A random command, biased toward making progress through the steps.
pub fn random_op(rng: &mut impl Rng, p: &Project) -> Op {
    match rng.random_range(0..100) {
        0..=54 => helpful(rng, p),
        55..=74 => {
            let kind = rng.random_range(0..9);
            random_add(rng, p, kind)
        }
        75..=80 => random_remove(rng, p).unwrap_or(Op::Elicit),
        81..=84 => Op::Complete(rng.random_range(0..=11)),
        85..=90 => Op::Reopen(rng.random_range(1..=10)),
        91..=93 => match pick(rng, &p.threats) {
            Some(t) => Op::Tag(t.id.clone(), stride_set(rng)),
            None => Op::Elicit,
        },
        94..=96 => match pick(rng, &p.threats) {
            Some(t) => Op::Exclude(t.id.clone(), rng.random_bool(0.5)),
            None => Op::GenerateSrs,
        },
        _ => Op::GenerateSrs,
    }
}

pub const SRS_TIMESTAMP: &str = "2020-01-01T00:00:00Z";

pub fn apply(p: &Project, op: &Op, catalog: &Catalog) -> Result<Project> {
    match op {
        Op::Add(e) => commands::add(p, e.clone()),
        Op::Remove(k) => commands::remove(p, k),
        Op::Agree(a) => commands::agree(p, a.clone()),
        Op::AcknowledgeNone(k) => commands::acknowledge_no_points(p, *k),
        Op::Tag(t, s) => commands::tag_threat(p, t, *s),
        Op::Assess(t, i) => commands::assess(p, t, *i),
        Op::Exclude(t, x) => commands::set_excluded(p, t, *x, "accepted"),
        Op::Elicit => commands::elicit(p, catalog).map(|o| o.project),
        Op::Validate(v) => commands::validate_requirement(p, v.clone()),
        Op::GenerateSrs => commands::generate_srs(p, "srs.md", SRS_TIMESTAMP).map(|o| o.project),
        Op::Complete(s) => commands::complete_step(p, *s),
        Op::Reopen(s) => commands::reopen_step(p, *s),
    }
}

/// Walks `len` random commands from a fresh project and returns the result.
pub fn random_project(rng: &mut impl Rng, len: usize) -> Project {
    let catalog = random_catalog(rng, 6);
    let mut p = Project::new(format!("p-{}", rng.random_range(0..1000)), text(rng));
    for _ in 0..len {
        let op = random_op(rng, &p);
        if let Ok(next) = apply(&p, &op, &catalog) {
            p = next;
        }
    }
    p
}

fn statuses(p: &Project) -> Vec<StepStatus> {
    (1..=10).map(|k| p.step_status(k).unwrap()).collect()
}

// Reference statuses after reopening `step` (1-based).
fn reopened(mut s: Vec<StepStatus>, step: u8) -> Vec<StepStatus> {
    let i = usize::from(step - 1);
    s[i] = StepStatus::InProgress;
    for later in &mut s[i + 1..] {
        *later = match *later {
            StepStatus::Complete => StepStatus::Stale,
            StepStatus::InProgress => StepStatus::Locked,
            other => other,
        };
    }
    s
}

fn first_incomplete(s: &[StepStatus]) -> u8 {
    s.iter()
        .position(|x| *x != StepStatus::Complete)
        .map_or(10, |i| i as u8 + 1)
}

/// Step statuses the workflow rules predict for `op`, given whether the
/// command succeeded. `None` means the command must have been rejected.
pub fn expected_statuses(before: &Project, op: &Op, after: Option<&Project>) -> Option<Vec<StepStatus>> {
    let s = statuses(before);
    let mutated = |step: u8, s: Vec<StepStatus>| {
        if s[usize::from(step - 1)] == StepStatus::Complete {
            reopened(s, step)
        } else {
            s
        }
    };
    match op {
        Op::Complete(step) => {
            let step = *step;
            if !(1..=10).contains(&step) {
                return None;
            }
            let i = usize::from(step - 1);
            let checks_ok = exit_checks(before, step).unwrap().iter().all(|c| c.satisfied);
            if first_incomplete(&s) != step || s[i] == StepStatus::Complete || !checks_ok {
                return None;
            }
            let mut s = s;
            s[i] = StepStatus::Complete;
            if step < 10 {
                s[i + 1] = StepStatus::InProgress;
            }
            Some(s)
        }
        Op::Reopen(step) => {
            let i = usize::from(step - 1);
            if !matches!(s[i], StepStatus::Complete | StepStatus::Stale) || first_incomplete(&s) < *step {
                return None;
            }
            Some(reopened(s, *step))
        }
        Op::Elicit => {
            let after = after?;
            if after.requirements.len() > before.requirements.len() {
                Some(mutated(8, s))
            } else {
                Some(s)
            }
        }
        Op::GenerateSrs => {
            after?;
            Some(mutated(10, s))
        }
        Op::AcknowledgeNone(_) => after.map(|_| mutated(5, s)),
        Op::Tag(..) => after.map(|_| mutated(6, s)),
        Op::Assess(..) | Op::Exclude(..) => after.map(|_| mutated(7, s)),
        Op::Agree(_) => after.map(|_| mutated(3, s)),
        Op::Validate(_) => after.map(|_| mutated(9, s)),
        Op::Add(e) => after.map(|_| mutated(mutation_step_of(e.kind()), s)),
        Op::Remove(k) => after.map(|_| mutated(mutation_step_of(k.kind()), s)),
    }
}

/// Structural invariants that must hold after every command.
pub fn workflow_invariants(p: &Project) -> Vec<String> {
    let mut out: Vec<String> = model::validate_project(p)
        .into_iter()
        .map(|v| format!("{}: {}", v.entity, v.rule))
        .collect();
    let s = statuses(p);
    if s[0] == StepStatus::Locked {
        out.push("step 1 locked".into());
    }
    let cur = current_step(p);
    if cur != first_incomplete(&s) {
        out.push("current step is not the first incomplete step".into());
    }
    if s.iter().any(|x| *x != StepStatus::Complete) && s[usize::from(cur - 1)] == StepStatus::Locked {
        out.push(format!("current step {cur} locked"));
    }
    for (i, st) in s.iter().enumerate() {
        let active = matches!(st, StepStatus::Complete | StepStatus::InProgress);
        if active && s[..i].iter().any(|x| *x != StepStatus::Complete) {
            out.push(format!("step {} {st} ahead of an unfinished step", i + 1));
        }
    }
    if s.iter().filter(|x| **x == StepStatus::InProgress).count() > 1 {
        out.push("more than one step in progress".into());
    }
    out
}

// ---- independent oracles ----

/// DREAD average computed in floating point, exactly as the method defines
/// it: the mean of five 0..=10 ratings.
pub fn oracle_dread_average(c: [u8; 5]) -> f64 {
    c.iter().map(|&x| f64::from(x)).sum::<f64>() / 5.0
}

fn oracle_tokens(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_whitespace() {
            if !cur.is_empty() {
                out.insert(std::mem::take(&mut cur));
            }
        } else if !ch.is_ascii_punctuation() {
            cur.push(if ch.is_ascii_uppercase() {
                (ch as u8 + 32) as char
            } else {
                ch
            });
        }
    }
    if !cur.is_empty() {
        out.insert(cur);
    }
    out
}

pub fn oracle_score(threat: &Threat, entry: &CatalogEntry, w: Weights) -> u32 {
    let a = threat.stride.letters();
    let b = entry.stride_tags.letters();
    let shared = a.chars().filter(|c| b.contains(*c)).count() as u32;
    let tokens = oracle_tokens(&format!("{}\n{}", threat.title, threat.description));
    let mut seen = BTreeSet::new();
    let words = entry
        .keywords
        .iter()
        .filter(|k| seen.insert(k.as_str()) && tokens.contains(k.as_str()))
        .count() as u32;
    w.stride * shared + w.keyword * words
}

/// Exhaustive ranking: every positive-scoring entry, best first.
pub fn oracle_ranking(threat: &Threat, catalog: &Catalog) -> Vec<(String, u32)> {
    let mut all: Vec<(String, u32)> = catalog
        .entries
        .iter()
        .map(|e| (e.id.clone(), oracle_score(threat, e, catalog.weights)))
        .filter(|(_, s)| *s > 0)
        .collect();
    // Selection sort: pick the maximum each time.
    let mut out = Vec::new();
    while !all.is_empty() {
        let mut best = 0;
        for i in 1..all.len() {
            let (ref id, s) = all[i];
            let (ref bid, bs) = all[best];
            if s > bs || (s == bs && id < bid) {
                best = i;
            }
        }
        out.push(all.remove(best));
    }
    out
}

pub fn random_threat(rng: &mut impl Rng) -> Threat {
    Threat {
        id: format!("T{}", rng.random_range(1..50)),
        title: text(rng),
        description: text(rng),
        stride: stride_set(rng),
        asset_refs: vec!["A1".into()],
        point_refs: Vec::new(),
        mitigated: false,
    }
}
