//! Argument grammar and dispatch for the `store` binary.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use store_core::analysis::{cia_summary, coverage_report, surface_summary};
use store_core::catalog::{parse_catalog, Catalog};
use store_core::docgen::{export_table, ExportKind};
use store_core::model::{
    parse_cia, Agreement, Asset, AssetPriority, AttackPoint, CiaFacet, Entity, EntityKey,
    EntityKind, Goal, GoalSource, PointKind, Project, RequirementOrigin, SecurityRequirement,
    Stakeholder, StakeholderGroup, StakeholderPriority, StrideSet, Threat, ValidationRecord,
    ValidationVerdict, Verdict,
};
use store_core::persistence::{self, PersistError, DEFAULT_FILE_NAME};
use store_core::risk::{DreadComponents, RiskInput};
use store_core::workflow::step_name;
use store_core::{commands, Error};

use crate::{view, FrontendError};

#[derive(Debug, Parser)]
#[command(name = "store", version, about = "Security requirements engineering workbench")]
pub struct Cli {
    /// Project file.
    #[arg(long, global = true, default_value = DEFAULT_FILE_NAME)]
    pub project: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a new project file.
    Init {
        name: String,
        #[arg(long)]
        id: Option<String>,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    #[command(subcommand)]
    Goal(GoalCmd),
    #[command(subcommand)]
    Stakeholder(StakeholderCmd),
    /// Record a stakeholder's verdict on a goal.
    Agree {
        goal: String,
        stakeholder: String,
        #[arg(long)]
        object: bool,
        #[arg(long)]
        note: Option<String>,
    },
    #[command(subcommand)]
    Asset(AssetCmd),
    #[command(subcommand)]
    Point(PointCmd),
    #[command(subcommand)]
    Threat(ThreatCmd),
    #[command(subcommand)]
    Risk(RiskCmd),
    /// Attach catalog requirements to every threat that lacks one.
    Elicit {
        #[arg(long)]
        catalog: PathBuf,
    },
    #[command(subcommand)]
    Req(ReqCmd),
    #[command(subcommand)]
    Step(StepCmd),
    #[command(subcommand)]
    Report(ReportCmd),
    #[command(subcommand)]
    Doc(DocCmd),
    #[command(subcommand)]
    Suggest(SuggestCmd),
    /// Serve the HTTP JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
        /// Catalog used by elicitation and suggestions (default: the bundled
        /// ERP threat dictionary).
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Directory of static web UI assets served under `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GoalCmd {
    Add {
        description: String,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value_t = SourceArg::Interview)]
        source: SourceArg,
    },
    List,
    Rm { id: String },
}

#[derive(Debug, Subcommand)]
pub enum StakeholderCmd {
    Add {
        name: String,
        #[arg(long, value_enum)]
        priority: PriorityArg,
        #[arg(long, value_enum, default_value_t = GroupArg::Other)]
        group: GroupArg,
        #[arg(long)]
        id: Option<String>,
    },
    List,
    Rm { id: String },
}

#[derive(Debug, Subcommand)]
pub enum AssetCmd {
    Add {
        name: String,
        /// Facets, e.g. `C,I`.
        #[arg(long, value_parser = parse_cia_arg)]
        cia: BTreeSet<CiaFacet>,
        #[arg(long, value_enum)]
        priority: AssetPriorityArg,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long, value_delimiter = ',')]
        identified_by: Vec<String>,
        #[arg(long)]
        id: Option<String>,
    },
    List,
    Rm { id: String },
}

#[derive(Debug, Subcommand)]
pub enum PointCmd {
    Add {
        name: String,
        #[arg(long, value_parser = parse_point_kind)]
        kind: PointKind,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long)]
        id: Option<String>,
    },
    /// Declare that the project has no points of a kind (poc or pod).
    None {
        #[arg(long, value_parser = parse_point_kind)]
        kind: PointKind,
    },
    List,
    Rm { id: String },
}

#[derive(Debug, Subcommand)]
pub enum ThreatCmd {
    Add {
        title: String,
        /// STRIDE letters, e.g. `T,E`.
        #[arg(long, value_parser = parse_stride, default_value = "")]
        stride: StrideSet,
        #[arg(long, value_delimiter = ',')]
        assets: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        points: Vec<String>,
        #[arg(long, default_value = "")]
        description: String,
        #[arg(long)]
        mitigated: bool,
        #[arg(long)]
        id: Option<String>,
    },
    /// Replace the STRIDE categories of a threat.
    Tag {
        id: String,
        #[arg(value_parser = parse_stride)]
        stride: StrideSet,
    },
    /// Add asset and attack-point references.
    Link {
        id: String,
        #[arg(long, value_delimiter = ',')]
        assets: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        points: Vec<String>,
    },
    List,
    Rm { id: String },
}

#[derive(Debug, Subcommand)]
pub enum RiskCmd {
    Set {
        threat: String,
        #[command(flatten)]
        method: RiskMethodArgs,
    },
    /// Threats by descending risk.
    Rank,
    /// Mark a threat as deliberately not mitigated.
    Exclude {
        threat: String,
        #[arg(long, default_value = "")]
        rationale: String,
        /// Clear the exclusion instead.
        #[arg(long)]
        undo: bool,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct RiskMethodArgs {
    /// Damage, reproducibility, exploitability, affected users,
    /// discoverability (0..=10 each).
    #[arg(long, value_parser = parse_dread)]
    dread: Option<[u8; 5]>,
    /// Probability and damage potential (1..=10 each).
    #[arg(long, value_parser = parse_simple)]
    simple: Option<[u8; 2]>,
}

#[derive(Debug, Subcommand)]
pub enum ReqCmd {
    Add {
        text: String,
        #[arg(long, value_delimiter = ',', required = true)]
        threats: Vec<String>,
        #[arg(long)]
        id: Option<String>,
    },
    Validate {
        requirement: String,
        #[arg(long)]
        reviewer: String,
        #[arg(long, value_enum)]
        verdict: VerdictArg,
        #[arg(long)]
        rationale: Option<String>,
    },
    List,
    Rm { id: String },
}

#[derive(Debug, Subcommand)]
pub enum StepCmd {
    Status,
    Complete { step: u8 },
    Reopen { step: u8 },
    /// Exit checks of a step.
    Checks { step: u8 },
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    Coverage,
    Surface,
    Cia,
}

#[derive(Debug, Subcommand)]
pub enum DocCmd {
    /// Generate the specification document and record its checksum.
    Srs {
        #[arg(long, default_value = "srs.md")]
        out: PathBuf,
        /// Timestamp printed in the document (default: now, UTC).
        #[arg(long)]
        generated_at: Option<String>,
    },
    /// CSV table.
    Export {
        #[arg(value_parser = parse_export_kind)]
        kind: ExportKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SuggestCmd {
    /// Advisory STRIDE categories for a description.
    Stride {
        #[arg(required = true, num_args = 1..)]
        text: Vec<String>,
    },
    /// Ranked catalog requirements for a threat.
    Req {
        threat: String,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, default_value_t = 3)]
        limit: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SourceArg {
    Interview,
    Brainstorming,
    Review,
    Other,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PriorityArg {
    Critical,
    Major,
    Minor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GroupArg {
    Managerial,
    Marketing,
    InformationSystem,
    Other,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AssetPriorityArg {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VerdictArg {
    Accepted,
    Rejected,
    NeedsRework,
}

impl From<SourceArg> for GoalSource {
    fn from(v: SourceArg) -> Self {
        match v {
            SourceArg::Interview => GoalSource::Interview,
            SourceArg::Brainstorming => GoalSource::Brainstorming,
            SourceArg::Review => GoalSource::Review,
            SourceArg::Other => GoalSource::Other,
        }
    }
}

impl From<PriorityArg> for StakeholderPriority {
    fn from(v: PriorityArg) -> Self {
        match v {
            PriorityArg::Critical => StakeholderPriority::Critical,
            PriorityArg::Major => StakeholderPriority::Major,
            PriorityArg::Minor => StakeholderPriority::Minor,
        }
    }
}

impl From<GroupArg> for StakeholderGroup {
    fn from(v: GroupArg) -> Self {
        match v {
            GroupArg::Managerial => StakeholderGroup::Managerial,
            GroupArg::Marketing => StakeholderGroup::Marketing,
            GroupArg::InformationSystem => StakeholderGroup::InformationSystem,
            GroupArg::Other => StakeholderGroup::Other,
        }
    }
}

impl From<AssetPriorityArg> for AssetPriority {
    fn from(v: AssetPriorityArg) -> Self {
        match v {
            AssetPriorityArg::Low => AssetPriority::Low,
            AssetPriorityArg::Medium => AssetPriority::Medium,
            AssetPriorityArg::High => AssetPriority::High,
        }
    }
}

impl From<VerdictArg> for ValidationVerdict {
    fn from(v: VerdictArg) -> Self {
        match v {
            VerdictArg::Accepted => ValidationVerdict::Accepted,
            VerdictArg::Rejected => ValidationVerdict::Rejected,
            VerdictArg::NeedsRework => ValidationVerdict::NeedsRework,
        }
    }
}

fn parse_stride(s: &str) -> Result<StrideSet, String> {
    StrideSet::parse_letters(&s.to_ascii_uppercase())
}

fn parse_cia_arg(s: &str) -> Result<BTreeSet<CiaFacet>, String> {
    parse_cia(&s.to_ascii_uppercase())
}

fn parse_point_kind(s: &str) -> Result<PointKind, String> {
    PointKind::parse(s).ok_or_else(|| format!("expected poa, pob, poc or pod, got {s:?}"))
}

fn parse_export_kind(s: &str) -> Result<ExportKind, String> {
    ExportKind::parse(s).ok_or_else(|| {
        "expected one of goals, stakeholders, assets, points, threats, risk, requirements".into()
    })
}

fn parse_numbers<const N: usize>(s: &str) -> Result<[u8; N], String> {
    let parts: Vec<u8> = s
        .split(',')
        .map(|p| p.trim().parse::<u8>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<u8>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_dread(s: &str) -> Result<[u8; 5], String> {
    parse_numbers(s)
}

fn parse_simple(s: &str) -> Result<[u8; 2], String> {
    parse_numbers(s)
}

/// Outcome of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dispatch {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Output {
    text: String,
    json: Value,
}

impl Output {
    fn new(text: impl Into<String>, json: impl Serialize) -> Self {
        Output {
            text: text.into(),
            json: serde_json::to_value(json).expect("view types serialize"),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I) -> Dispatch
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Dispatch {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Dispatch {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    run(&cli)
}

pub fn run(cli: &Cli) -> Dispatch {
    match execute(cli) {
        Ok(out) => {
            let mut stdout = match cli.format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("json"),
            };
            if !stdout.is_empty() && !stdout.ends_with('\n') {
                stdout.push('\n');
            }
            Dispatch {
                code: 0,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => {
            let stderr = match cli.format {
                Format::Text => format!("error: {}: {}\n", e.code(), e),
                Format::Json => format!(
                    "{}\n",
                    json!({ "code": e.code(), "message": e.to_string(), "details": e.details() })
                ),
            };
            Dispatch {
                code: 1,
                stdout: String::new(),
                stderr,
            }
        }
    }
}

fn load(path: &Path) -> store_core::Result<Project> {
    persistence::load(path).map_err(|e| match e {
        PersistError::IoFailure(io) if io.kind() == io::ErrorKind::NotFound => {
            PersistError::IoFailure(io::Error::new(
                io::ErrorKind::NotFound,
                format!("{} not found; run `store init <name>` first", path.display()),
            ))
            .into()
        }
        other => other.into(),
    })
}

fn save(path: &Path, project: &Project) -> store_core::Result<()> {
    persistence::save(project, path)?;
    Ok(())
}

fn read_catalog(path: &Path) -> store_core::Result<Catalog> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        PersistError::IoFailure(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    Ok(parse_catalog(&text)?)
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    let out = out.trim_end_matches('-').to_owned();
    if out.is_empty() {
        "project".into()
    } else {
        out
    }
}

fn now() -> String {
    chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

fn join(ids: &[String]) -> String {
    if ids.is_empty() {
        "-".into()
    } else {
        ids.join(", ")
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn id_or_next(project: &Project, id: &Option<String>, kind: EntityKind, point: Option<PointKind>) -> String {
    id.clone()
        .unwrap_or_else(|| project.next_id(kind, point).expect("numbered kind"))
}

// Loads, applies one mutation, saves, and reports the affected entity.
fn mutate(
    path: &Path,
    f: impl FnOnce(&Project) -> store_core::Result<(Project, Output)>,
) -> store_core::Result<Output> {
    let project = load(path)?;
    let (next, out) = f(&project)?;
    save(path, &next)?;
    Ok(out)
}

fn added(entity: Entity) -> impl FnOnce(&Project) -> store_core::Result<(Project, Output)> {
    move |p| {
        let key = entity.key();
        let next = commands::add(p, entity.clone())?;
        Ok((next, Output::new(format!("added {key}"), entity)))
    }
}

fn removed(key: EntityKey) -> impl FnOnce(&Project) -> store_core::Result<(Project, Output)> {
    move |p| {
        let next = commands::remove(p, &key)?;
        Ok((next, Output::new(format!("removed {key}"), json!({ "removed": key.to_string() }))))
    }
}

fn execute(cli: &Cli) -> Result<Output, FrontendError> {
    let Command::Serve { bind, catalog, ui } = &cli.command else {
        return Ok(execute_core(cli)?);
    };
    let catalog = match catalog {
        Some(c) => read_catalog(c)?,
        None => store_core::fixtures::erp::catalog(),
    };
    let project = load(&cli.project)?;
    crate::api::serve_blocking(cli.project.clone(), project, catalog, bind, ui.clone())?;
    Ok(Output::new("server stopped", json!({ "stopped": true })))
}

fn execute_core(cli: &Cli) -> store_core::Result<Output> {
    let path = cli.project.as_path();
    match &cli.command {
        Command::Init { name, id, force } => {
            if path.exists() && !force {
                return Err(PersistError::IoFailure(io::Error::new(
                    io::ErrorKind::AlreadyExists,
                    format!("{} already exists; pass --force to overwrite", path.display()),
                ))
                .into());
            }
            let project = Project::new(id.clone().unwrap_or_else(|| slug(name)), name.clone());
            save(path, &project)?;
            Ok(Output::new(
                format!("initialized {} at {}", project.project_id, path.display()),
                json!({ "project_id": project.project_id, "name": project.name, "path": path }),
            ))
        }
        Command::Goal(cmd) => match cmd {
            GoalCmd::Add { description, id, source } => mutate(path, |p| {
                added(Entity::Goal(Goal {
                    id: id_or_next(p, id, EntityKind::Goal, None),
                    description: description.clone(),
                    source: (*source).into(),
                }))(p)
            }),
            GoalCmd::List => {
                let p = load(path)?;
                let text = p.goals.iter().fold(String::new(), |mut s, g| {
                    let _ = writeln!(s, "{}\t{}", g.id, one_line(&g.description));
                    s
                });
                Ok(Output::new(text, &p.goals))
            }
            GoalCmd::Rm { id } => mutate(path, removed(EntityKey::Goal(id.clone()))),
        },
        Command::Stakeholder(cmd) => match cmd {
            StakeholderCmd::Add { name, priority, group, id } => mutate(path, |p| {
                added(Entity::Stakeholder(Stakeholder {
                    id: id_or_next(p, id, EntityKind::Stakeholder, None),
                    name: name.clone(),
                    group: (*group).into(),
                    priority: (*priority).into(),
                }))(p)
            }),
            StakeholderCmd::List => {
                let p = load(path)?;
                let text = p.stakeholders.iter().fold(String::new(), |mut s, x| {
                    let _ = writeln!(s, "{}\t{:?}\t{:?}\t{}", x.id, x.priority, x.group, x.name);
                    s
                });
                Ok(Output::new(text, &p.stakeholders))
            }
            StakeholderCmd::Rm { id } => mutate(path, removed(EntityKey::Stakeholder(id.clone()))),
        },
        Command::Agree { goal, stakeholder, object, note } => mutate(path, |p| {
            let a = Agreement {
                goal_id: goal.clone(),
                stakeholder_id: stakeholder.clone(),
                verdict: if *object { Verdict::Objected } else { Verdict::Agreed },
                note: note.clone(),
            };
            let next = commands::agree(p, a.clone())?;
            let word = if *object { "objected" } else { "agreed" };
            Ok((next, Output::new(format!("{stakeholder} {word} on {goal}"), a)))
        }),
        Command::Asset(cmd) => match cmd {
            AssetCmd::Add { name, cia, priority, description, identified_by, id } => mutate(path, |p| {
                added(Entity::Asset(Asset {
                    id: id_or_next(p, id, EntityKind::Asset, None),
                    name: name.clone(),
                    description: description.clone(),
                    cia: cia.clone(),
                    priority: (*priority).into(),
                    identified_by: identified_by.clone(),
                }))(p)
            }),
            AssetCmd::List => {
                let p = load(path)?;
                let text = p.assets.iter().fold(String::new(), |mut s, a| {
                    let cia: String = a.cia.iter().map(|f| f.letter()).collect();
                    let _ = writeln!(s, "{}\t{}\t{:?}\t{}", a.id, cia, a.priority, a.name);
                    s
                });
                Ok(Output::new(text, &p.assets))
            }
            AssetCmd::Rm { id } => mutate(path, removed(EntityKey::Asset(id.clone()))),
        },
        Command::Point(cmd) => match cmd {
            PointCmd::Add { name, kind, description, id } => mutate(path, |p| {
                added(Entity::AttackPoint(AttackPoint {
                    id: id_or_next(p, id, EntityKind::AttackPoint, Some(*kind)),
                    kind: *kind,
                    name: name.clone(),
                    description: description.clone(),
                }))(p)
            }),
            PointCmd::None { kind } => mutate(path, |p| {
                let next = commands::acknowledge_no_points(p, *kind)?;
                Ok((
                    next,
                    Output::new(
                        format!("recorded: no {} ({})", kind.label(), kind.id_prefix()),
                        json!({ "acknowledged_empty": kind }),
                    ),
                ))
            }),
            PointCmd::List => {
                let p = load(path)?;
                let text = p.attack_points.iter().fold(String::new(), |mut s, x| {
                    let _ = writeln!(s, "{}\t{:?}\t{}", x.id, x.kind, x.name);
                    s
                });
                Ok(Output::new(text, &p.attack_points))
            }
            PointCmd::Rm { id } => mutate(path, removed(EntityKey::AttackPoint(id.clone()))),
        },
        Command::Threat(cmd) => threat(path, cmd),
        Command::Risk(cmd) => risk(path, cmd),
        Command::Elicit { catalog } => {
            let catalog = read_catalog(catalog)?;
            mutate(path, |p| {
                let outcome = commands::elicit(p, &catalog)?;
                let v = view::elicit(&outcome);
                let mut text = String::new();
                for c in &v.created {
                    let _ = writeln!(text, "{} -> {}\t{}", c.threat_id, c.requirement_id, c.text);
                }
                for t in &v.manual {
                    let _ = writeln!(text, "{t}: no catalog match; add a requirement manually");
                }
                let _ = write!(text, "{} created, {} need manual entry", v.created.len(), v.manual.len());
                Ok((outcome.project, Output::new(text, v)))
            })
        }
        Command::Req(cmd) => match cmd {
            ReqCmd::Add { text, threats, id } => mutate(path, |p| {
                added(Entity::SecurityRequirement(SecurityRequirement {
                    id: id_or_next(p, id, EntityKind::SecurityRequirement, None),
                    text: text.clone(),
                    threat_refs: threats.clone(),
                    origin: RequirementOrigin::Manual,
                }))(p)
            }),
            ReqCmd::Validate { requirement, reviewer, verdict, rationale } => mutate(path, |p| {
                let record = ValidationRecord {
                    requirement_id: requirement.clone(),
                    reviewer: reviewer.clone(),
                    verdict: (*verdict).into(),
                    rationale: rationale.clone(),
                };
                let next = commands::validate_requirement(p, record.clone())?;
                Ok((
                    next,
                    Output::new(format!("{reviewer}: {requirement} {:?}", record.verdict), record),
                ))
            }),
            ReqCmd::List => {
                let p = load(path)?;
                let text = p.requirements.iter().fold(String::new(), |mut s, r| {
                    let verdict = p
                        .requirement_verdict(&r.id)
                        .map_or("unreviewed".to_owned(), |v| format!("{v:?}"));
                    let _ = writeln!(s, "{}\t{}\t{}\t{}", r.id, r.threat_refs.join(","), verdict, one_line(&r.text));
                    s
                });
                Ok(Output::new(text, &p.requirements))
            }
            ReqCmd::Rm { id } => mutate(path, removed(EntityKey::SecurityRequirement(id.clone()))),
        },
        Command::Step(cmd) => step(path, cmd),
        Command::Report(cmd) => report(path, cmd),
        Command::Doc(cmd) => doc(path, cmd),
        Command::Suggest(cmd) => match cmd {
            SuggestCmd::Stride { text } => {
                let v = view::stride(&text.join(" "));
                let text = if v.letters.is_empty() {
                    "no suggestion".to_owned()
                } else {
                    format!("{}\t{}", v.letters, v.categories.join(", "))
                };
                Ok(Output::new(text, v))
            }
            SuggestCmd::Req { threat, catalog, limit } => {
                let catalog = read_catalog(catalog)?;
                let p = load(path)?;
                let t = p
                    .threat(threat)
                    .ok_or_else(|| store_core::model::ModelError::NotFound(threat.clone()))?;
                let v = view::requirement_suggestions(t, &catalog, *limit);
                let text = v.iter().fold(String::new(), |mut s, x| {
                    let _ = writeln!(s, "{}. [{}] {}\t{}", x.rank, x.score, x.entry_id, x.requirement_text);
                    s
                });
                Ok(Output::new(text, v))
            }
        },
        Command::Serve { .. } => unreachable!("handled by execute"),
    }
}

fn threat(path: &Path, cmd: &ThreatCmd) -> store_core::Result<Output> {
    match cmd {
        ThreatCmd::Add { title, stride, assets, points, description, mitigated, id } => mutate(path, |p| {
            added(Entity::Threat(Threat {
                id: id_or_next(p, id, EntityKind::Threat, None),
                title: title.clone(),
                description: description.clone(),
                stride: *stride,
                asset_refs: assets.clone(),
                point_refs: points.clone(),
                mitigated: *mitigated,
            }))(p)
        }),
        ThreatCmd::Tag { id, stride } => mutate(path, |p| {
            let next = commands::tag_threat(p, id, *stride)?;
            let t = next.threat(id).cloned();
            Ok((next, Output::new(format!("{id}: {}", stride.letters()), t)))
        }),
        ThreatCmd::Link { id, assets, points } => mutate(path, |p| {
            let next = commands::link_threat(p, id, assets, points)?;
            let t = next.threat(id).cloned().expect("linked threat exists");
            let text = format!("{id}: assets {}; points {}", join(&t.asset_refs), join(&t.point_refs));
            Ok((next, Output::new(text, t)))
        }),
        ThreatCmd::List => {
            let p = load(path)?;
            let text = p.threats.iter().fold(String::new(), |mut s, t| {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}\t{}\t{}",
                    t.id,
                    t.stride.letters(),
                    join(&t.asset_refs),
                    if t.mitigated { "mitigated" } else { "open" },
                    t.title
                );
                s
            });
            Ok(Output::new(text, &p.threats))
        }
        ThreatCmd::Rm { id } => mutate(path, removed(EntityKey::Threat(id.clone()))),
    }
}

fn risk(path: &Path, cmd: &RiskCmd) -> store_core::Result<Output> {
    match cmd {
        RiskCmd::Set { threat, method } => mutate(path, |p| {
            let input = match (method.dread, method.simple) {
                (Some(c), _) => RiskInput::Dread {
                    components: DreadComponents(c),
                },
                (None, Some([probability, damage_potential])) => RiskInput::SimpleRisk {
                    probability,
                    damage_potential,
                },
                (None, None) => unreachable!("clap requires one method"),
            };
            let next = commands::assess(p, threat, input)?;
            let a = next.assessment(threat).cloned().expect("assessment recorded");
            let text = format!(
                "{threat}: {} ({})",
                store_core::risk::format_tenths(a.score_tenths),
                a.band
            );
            Ok((next, Output::new(text, a)))
        }),
        RiskCmd::Rank => {
            let p = load(path)?;
            let rows = view::ranking(&p)?;
            let text = rows.iter().fold(String::new(), |mut s, r| {
                let flag = if r.excluded { "\texcluded" } else { "" };
                let _ = writeln!(s, "{}\t{}\t{}\t{}{}", r.threat_id, r.score, r.band, r.title, flag);
                s
            });
            Ok(Output::new(text, rows))
        }
        RiskCmd::Exclude { threat, rationale, undo } => mutate(path, |p| {
            let next = commands::set_excluded(p, threat, !undo, rationale)?;
            let a = next.assessment(threat).cloned();
            let word = if *undo { "included" } else { "excluded" };
            Ok((next, Output::new(format!("{threat} {word}"), a)))
        }),
    }
}

fn step(path: &Path, cmd: &StepCmd) -> store_core::Result<Output> {
    let status_text = |p: &Project| {
        let v = view::workflow(p);
        let mut text = String::new();
        for s in &v.steps {
            let marker = if s.step == v.current_step { "*" } else { " " };
            let _ = writeln!(text, "{marker}{:>2}  {:<10}  {}", s.step, s.status.to_string(), s.name);
        }
        (text, v)
    };
    match cmd {
        StepCmd::Status => {
            let (text, v) = status_text(&load(path)?);
            Ok(Output::new(text, v))
        }
        StepCmd::Complete { step } => mutate(path, |p| {
            let next = commands::complete_step(p, *step)?;
            let (mut text, v) = status_text(&next);
            text.insert_str(0, &format!("step {step} complete: {}\n", step_name(*step)));
            Ok((next, Output::new(text, v)))
        }),
        StepCmd::Reopen { step } => mutate(path, |p| {
            let next = commands::reopen_step(p, *step)?;
            let (mut text, v) = status_text(&next);
            text.insert_str(0, &format!("step {step} reopened\n"));
            Ok((next, Output::new(text, v)))
        }),
        StepCmd::Checks { step } => {
            let p = load(path)?;
            let checks = store_core::workflow::exit_checks(&p, *step).map_err(Error::from)?;
            let text = checks.iter().fold(String::new(), |mut s, c| {
                let mark = if c.satisfied { "x" } else { " " };
                let _ = write!(s, "[{mark}] {}\t{}", c.rule_id, c.description);
                if !c.satisfied && !c.details.is_empty() {
                    let _ = write!(s, " ({})", c.details);
                }
                s.push('\n');
                s
            });
            Ok(Output::new(text, checks))
        }
    }
}

fn report(path: &Path, cmd: &ReportCmd) -> store_core::Result<Output> {
    let p = load(path)?;
    Ok(match cmd {
        ReportCmd::Coverage => {
            let c = coverage_report(&p);
            let text = format!(
                "assets without threats: {}\nthreats without attack points: {}\nthreats without requirements: {}\nunvalidated requirements: {}\norphan attack points: {}\nfully traced: {}\n",
                join(&c.assets_without_threats),
                join(&c.threats_without_points),
                join(&c.threats_without_requirements),
                join(&c.unvalidated_requirements),
                join(&c.orphan_points),
                if c.is_fully_traced() { "yes" } else { "no" },
            );
            Output::new(text, c)
        }
        ReportCmd::Surface => {
            let s = surface_summary(&p);
            let mut text = String::new();
            for g in &s.groups {
                let note = if g.acknowledged_empty { " (declared none)" } else { "" };
                let _ = writeln!(text, "{:?}\t{}\t{}{}", g.kind, g.count, g.kind.label(), note);
            }
            let _ = writeln!(text, "total\t{}", s.total());
            Output::new(text, s)
        }
        ReportCmd::Cia => {
            let c = cia_summary(&p);
            let text = format!(
                "C\t{}\nI\t{}\nA\t{}\nhigh\t{}\nmedium\t{}\nlow\t{}\n",
                c.confidentiality, c.integrity, c.availability, c.high, c.medium, c.low
            );
            Output::new(text, c)
        }
    })
}

fn doc(path: &Path, cmd: &DocCmd) -> store_core::Result<Output> {
    match cmd {
        DocCmd::Srs { out, generated_at } => mutate(path, |p| {
            let at = generated_at.clone().unwrap_or_else(now);
            let result = commands::generate_srs(p, &out.to_string_lossy(), &at)?;
            std::fs::write(out, &result.text).map_err(PersistError::IoFailure)?;
            let checksum = result.document.checksum.clone();
            Ok((
                result.project,
                Output::new(
                    format!("wrote {} (sha256 {checksum})", out.display()),
                    json!({ "path": out, "checksum": checksum, "generated_at": at }),
                ),
            ))
        }),
        DocCmd::Export { kind, out } => {
            let p = load(path)?;
            let csv = export_table(&p, *kind)?;
            match out {
                Some(out) => {
                    std::fs::write(out, &csv).map_err(PersistError::IoFailure)?;
                    Ok(Output::new(
                        format!("wrote {}", out.display()),
                        json!({ "path": out, "rows": csv.lines().count().saturating_sub(1) }),
                    ))
                }
                None => Ok(Output::new(csv.clone(), json!({ "csv": csv }))),
            }
        }
    }
}
