//! The college ERP case study as executable data.
//!
//! Tables are transcribed verbatim; DREAD component vectors are chosen so
//! each average equals the published value exactly.

use crate::catalog::Catalog;
use crate::commands;
use crate::model::{
    parse_cia, Agreement, Asset, AssetPriority, AttackPoint, Entity, Goal, GoalSource, PointKind,
    Project, Stakeholder, StakeholderGroup, StakeholderPriority, StrideSet, Threat,
    ValidationRecord, ValidationVerdict, Verdict,
};
use crate::risk::{DreadComponents, RiskInput};

pub const PROJECT_ID: &str = "erp-college";
pub const PROJECT_NAME: &str = "College ERP System";
/// Reviewer who accepts every requirement during validation.
pub const REVIEWER: &str = "SH8";
pub const SRS_PATH: &str = "srs.md";
pub const SRS_TIMESTAMP: &str = "2020-01-01T00:00:00Z";

pub const GOALS: &[(&str, &str)] = &[
    ("G1", "The college ERP system will be installed on a web server that has been secured to protect confidential information. All security patches for the web server must be enabled"),
    ("G2", "The college ERP system will also be installed on a database server that has been secured. All security patches for the database server must be enabled"),
    ("G3", "The database server must be protected from the direct access from the internet by a firewall"),
    ("G4", "The Web server should be protected from direct access from the internet by a firewall"),
    ("G5", "Only HTTP and HTTPS ports allowed direct access from the internet"),
    ("G6", "Communication between the web server and database server should be conducted over a private network"),
    ("G7", "The college ERP system should be deployed over HTTPS"),
];

/// (id, name, priority, group). The source numbering repeats "10"; ids here are
/// sequential.
pub const STAKEHOLDERS: &[(&str, &str, StakeholderPriority, StakeholderGroup)] = &[
    ("SH1", "President", StakeholderPriority::Critical, StakeholderGroup::Managerial),
    ("SH2", "Director", StakeholderPriority::Critical, StakeholderGroup::Managerial),
    ("SH3", "Senior Executives", StakeholderPriority::Major, StakeholderGroup::Managerial),
    ("SH4", "Internal Auditor", StakeholderPriority::Critical, StakeholderGroup::Marketing),
    ("SH5", "Purchasing Manager", StakeholderPriority::Critical, StakeholderGroup::Marketing),
    ("SH6", "Key users", StakeholderPriority::Major, StakeholderGroup::InformationSystem),
    ("SH7", "End users", StakeholderPriority::Critical, StakeholderGroup::InformationSystem),
    ("SH8", "ERP Project manager", StakeholderPriority::Critical, StakeholderGroup::InformationSystem),
    ("SH9", "Database administrator", StakeholderPriority::Critical, StakeholderGroup::InformationSystem),
    ("SH10", "Developer", StakeholderPriority::Critical, StakeholderGroup::InformationSystem),
    ("SH11", "Networking team", StakeholderPriority::Major, StakeholderGroup::InformationSystem),
];

/// (id, name, description, CIA letters, priority). The source table gives
/// neither facets nor priorities; both are assigned here so step 4 can close.
pub const ASSETS: &[(&str, &str, &str, &str, AssetPriority)] = &[
    ("A1", "Student, staff, and admin", "An asset that relates to a student, staff or admin", "CI", AssetPriority::High),
    ("A2", "Student's login data", "The student's credentials: username and password", "CI", AssetPriority::High),
    ("A3", "Staff login data", "The staff's credentials: username and password", "CI", AssetPriority::High),
    ("A4", "Admin login data", "The admin's credentials: username and password", "CI", AssetPriority::High),
    ("A5", "Student's personal data", "The personal data that the student enters, such as student record and assets", "CI", AssetPriority::High),
    ("A6", "Staff's personal data", "The personal data that the staff enters, such as staff record and assets", "CI", AssetPriority::High),
    ("A7", "System", "Assets that relate to the essential system", "IA", AssetPriority::Medium),
    ("A8", "Availability of ERP System", "If the college ERP system goes down, student/and staff cannot request or receive quotes", "A", AssetPriority::High),
    ("A9", "Process", "Assets that relate to the process of running the web application", "IA", AssetPriority::Medium),
    ("A10", "Application", "Assets that relate to the web application", "IA", AssetPriority::Medium),
    ("A11", "Login Session", "The web session associated with a logged in student, staff or admin", "CI", AssetPriority::High),
    ("A12", "Backend database access", "The ability to interact with the database that stores, student's data, staff data, and login credentials", "CIA", AssetPriority::High),
    ("A13", "Student fee details", "The student's fee record must be secure. Tampering with this data could cause the loss of college", "CI", AssetPriority::Medium),
    ("A14", "Staff salary details", "The staff salary record must be secure. Tampering with this data could cause the loss of college", "CI", AssetPriority::Medium),
    ("A15", "Message Notification", "The message notification contains the information for students and staff", "A", AssetPriority::Low),
    ("A16", "Audit data", "Attackers might try to attack the system without being logged or audited", "I", AssetPriority::Medium),
    ("A17", "Access to the record", "Only authorized people should be able to view his/her record", "C", AssetPriority::Medium),
];

pub const ATTACK_POINTS: &[(&str, PointKind, &str, &str)] = &[
    ("PA1", PointKind::PoA, "Web Server Listening Port (HTTPS)", "The port (HTTPS) that the web server listens on"),
    ("PA2", PointKind::PoA, "Login Page", "Page for students or staff to create a login and perform a login to the site to begin requesting or reviewing records"),
    ("PA3", PointKind::PoA, "CreateLogin function", "Creates a new student or staff login (Admin login must be created directly through the database stored procedures.)"),
    ("PA4", PointKind::PoA, "LoginToSite function", "Compares authorized person credentials to those in the database and if credentials match, create a new session"),
    ("PA5", PointKind::PoA, "Data entry page", "Page used to enter student or staff personal data into the database so that the admin can review it"),
    ("PA6", PointKind::PoA, "RetrieveData function", "Allow the authorized person to view his/her records from the database"),
    ("PA7", PointKind::PoA, "SubmitData function", "Submits student or staff data to be reviewed by the admin"),
    ("PA8", PointKind::PoA, "Admin Review page", "This page used by the admin to review the student or staff request"),
    ("PA9", PointKind::PoA, "RetrieveData function", "Retrieves student or staff data"),
    ("PA10", PointKind::PoA, "SubmitData function", "Submits any information for the student or staff"),
    ("PA11", PointKind::PoA, "ListRequests function", "Lists requests ready for review."),
    ("PA12", PointKind::PoA, "Database Listening Port", "Enables the database to be used remotely by the authorized persons"),
    ("PA13", PointKind::PoA, "Database stored procedures", "Store and retrieve records in the database"),
    ("PA14", PointKind::PoA, "CreateLogin procedure", "Create a login for the authorized person"),
    ("PA15", PointKind::PoA, "RemoveLogin procedure", "Logout from the college ERP system"),
    ("PA16", PointKind::PoA, "StoreUserData procedure", "Used to store user data from the data entry page of the ERP system"),
    ("PA17", PointKind::PoA, "RetrieveUserData procedure", "Retrieves the user's data and request"),
    ("PB1", PointKind::PoB, "Unauthorized remote user", "A user who has connected to the ERP system, but has not provided valid credentials yet"),
    ("PB2", PointKind::PoB, "Authorized remote user", "An authorized user who has created an account and has valid login credentials"),
    ("PB3", PointKind::PoB, "Admin", "Admin uses login credentials to access and modify the database"),
    ("PB4", PointKind::PoB, "HTTP user", "A remote user that accesses a page via HTTP"),
    ("PB5", PointKind::PoB, "HTTPS user", "A remote user that accesses a page via HTTPS"),
    ("PB6", PointKind::PoB, "Web server process identity", "Used to authenticate the web server to the database when storing or retrieving information"),
    ("PB7", PointKind::PoB, "Database server process identity", "The account that the database server process runs as, represented by its process token"),
    ("PC1", PointKind::PoC, "Online payment", "The online payment system can be another function for this ERP system. If this functionality added, this function should not provide a way for attackers to attack existing security features"),
    ("PC2", PointKind::PoC, "Payment Gateway", "If added payment gateway in future, ERP system must comply with PCI DSS or other security standards"),
    ("PC3", PointKind::PoC, "Encrypted Communication", "If encrypted communication functionality is added to the ERP system in the future, message exchange should be completed according to standards"),
    ("PD1", PointKind::PoD, "Database Server", "The ERP system depends on the security of the database server"),
    ("PD2", PointKind::PoD, "Web Server", "The ERP system depends on the security of the web server"),
    ("PD3", PointKind::PoD, "Network", "The ERP system depends on the security of the network between the web server and database server"),
    ("PD4", PointKind::PoD, "External SMTP", "The ERP system depends on an external SMTP server to deliver any message"),
    ("PD5", PointKind::PoD, "Session Management", "The ERP system depends on the session management of the web server being secure"),
];

/// (id, title, description, STRIDE letters, mitigated, assets).
pub type ThreatRow = (&'static str, &'static str, &'static str, &'static str, bool, &'static [&'static str]);

pub const THREATS: &[ThreatRow] = &[
    ("T1", "Malicious SQL data in user input", "The attacker might try to inject SQL commands into the application via Login.", "TE", false, &["A12"]),
    ("T2", "Login Information Disclosure", "The attacker gets the login credentials of the authorized user.", "IE", false, &["A2", "A3", "A4"]),
    ("T3", "Session Id Theft", "The attacker gets the session ID of another authorized user.", "E", false, &["A11"]),
    ("T4", "User Data Disclosure", "Disclosing another authorized user data raises privacy issues.", "SI", false, &["A5", "A6"]),
    ("T5", "Access to the Database", "The Attacker attacks to the database of the ERP system.", "TRIE", true, &["A1", "A2", "A3", "A4", "A5", "A6"]),
    ("T6", "Attack on Admin Login", "The attacker performs as an admin of the ERP system.", "E", true, &["A4"]),
    ("T7", "Blocking Message Notification", "The attacker prevents an authorized user from receiving any notification.", "E", true, &["A15"]),
    ("T8", "User Data Tampering", "The attacker modifies the authorized person's data.", "STE", false, &["A5", "A6"]),
    ("T9", "User Account Deletion", "The attacker deletes an authorized user account.", "E", true, &["A2", "A3", "A4"]),
    ("T10", "Crashing the ERP system", "The attacker crashes the ERP web application.", "E", true, &["A8"]),
    ("T11", "Unauthorized access", "The attacker access the ERP system without valid credentials.", "E", true, &["A5", "A6"]),
    ("T12", "Access without Login", "The attacker access the information of authorized person without being logged.", "R", false, &["A16"]),
];

/// Published DREAD averages in tenths, highest risk first.
pub const RISK_RANKING: &[(&str, u8)] = &[
    ("T1", 100),
    ("T5", 100),
    ("T10", 100),
    ("T4", 92),
    ("T8", 92),
    ("T6", 76),
    ("T9", 76),
    ("T12", 76),
    ("T2", 66),
    ("T7", 64),
    ("T11", 52),
    ("T3", 38),
];

/// (threat, requirement id, requirement text) in published order.
pub const REQUIREMENTS: &[(&str, &str, &str)] = &[
    ("T1", "SR1", "Use of prepared statements with parameterized queries"),
    ("T5", "SR2", "Use of Access control, Auditing, Authentication, Encryption, Integrity controls, Backups techniques"),
    ("T10", "SR3", "Upgrade to the new version by fixing all identified flaws"),
    ("T4", "SR4", "Use of complex encryption methods that limits the risks of user data disclosure of ERP system"),
    ("T8", "SR5", "Use a firewall and proper authorization technique for granting the access right to use of the software system"),
    ("T6", "SR6", "Implement account lockout procedure, captcha and enforce the user of the ERP system to use strong passwords"),
    ("T9", "SR7", "Complex security password and account lockout should be used which locked the account after some failed login attempts"),
    ("T12", "SR8", "Use firewalls, VPN and SSL techniques"),
    ("T2", "SR9", "The database server of ERP system should be protected from the direct internet access by a firewall"),
    ("T7", "SR10", "Ensure the proper security of SMTP server"),
    ("T11", "SR11", "Implement two-factor authentication, i.e. strong password and one-time passcode"),
    ("T3", "SR12", "Use SSL/HTTPS encryption for the ERP system"),
];

/// Component vectors (damage, reproducibility, exploitability, affected
/// users, discoverability) whose average reproduces the ranking above.
pub const DREAD_VECTORS: &[(&str, [u8; 5])] = &[
    ("T1", [10, 10, 10, 10, 10]),
    ("T2", [7, 7, 6, 7, 6]),
    ("T3", [4, 4, 4, 4, 3]),
    ("T4", [10, 9, 9, 9, 9]),
    ("T5", [10, 10, 10, 10, 10]),
    ("T6", [8, 8, 7, 8, 7]),
    ("T7", [7, 6, 7, 6, 6]),
    ("T8", [9, 10, 9, 9, 9]),
    ("T9", [8, 7, 8, 7, 8]),
    ("T10", [10, 10, 10, 10, 10]),
    ("T11", [6, 5, 5, 5, 5]),
    ("T12", [7, 8, 8, 8, 7]),
];

pub const CATALOG_JSON: &str = include_str!("../../fixtures/erp/catalog.json");
pub const PROJECT_FILE: &str = include_str!("../../fixtures/erp/project.store.json");
pub const SRS_GOLDEN: &str = include_str!("../../fixtures/erp/srs.golden.md");

pub fn catalog() -> Catalog {
    crate::catalog::parse_catalog(CATALOG_JSON).expect("bundled catalog parses")
}

/// The bundled project file: steps 1..=7 complete, ready for elicitation.
pub fn project() -> Project {
    crate::persistence::from_bytes(PROJECT_FILE.as_bytes()).expect("bundled project loads")
}

fn step_entities(step: u8) -> Vec<Entity> {
    match step {
        1 => GOALS
            .iter()
            .map(|(id, d)| {
                Entity::Goal(Goal {
                    id: (*id).into(),
                    description: (*d).into(),
                    source: GoalSource::Interview,
                })
            })
            .collect(),
        2 => STAKEHOLDERS
            .iter()
            .map(|(id, name, priority, group)| {
                Entity::Stakeholder(Stakeholder {
                    id: (*id).into(),
                    name: (*name).into(),
                    group: *group,
                    priority: *priority,
                })
            })
            .collect(),
        3 => GOALS
            .iter()
            .flat_map(|(g, _)| {
                STAKEHOLDERS.iter().map(move |(s, ..)| {
                    Entity::Agreement(Agreement {
                        goal_id: (*g).into(),
                        stakeholder_id: (*s).into(),
                        verdict: Verdict::Agreed,
                        note: None,
                    })
                })
            })
            .collect(),
        4 => ASSETS
            .iter()
            .map(|(id, name, description, cia, priority)| {
                Entity::Asset(Asset {
                    id: (*id).into(),
                    name: (*name).into(),
                    description: (*description).into(),
                    cia: parse_cia(cia).expect("fixture letters"),
                    priority: *priority,
                    identified_by: Vec::new(),
                })
            })
            .collect(),
        5 => ATTACK_POINTS
            .iter()
            .map(|(id, kind, name, description)| {
                Entity::AttackPoint(AttackPoint {
                    id: (*id).into(),
                    kind: *kind,
                    name: (*name).into(),
                    description: (*description).into(),
                })
            })
            .collect(),
        6 => THREATS
            .iter()
            .map(|(id, title, description, stride, mitigated, assets)| {
                Entity::Threat(Threat {
                    id: (*id).into(),
                    title: (*title).into(),
                    description: (*description).into(),
                    stride: StrideSet::parse_letters(stride).expect("fixture letters"),
                    asset_refs: assets.iter().map(|a| (*a).into()).collect(),
                    point_refs: Vec::new(),
                    mitigated: *mitigated,
                })
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Replays the case study from an empty project through `last_step`
/// (1..=10), completing every step on the way.
pub fn project_through(last_step: u8) -> Project {
    let mut p = Project::new(PROJECT_ID, PROJECT_NAME);
    for step in 1..=last_step.min(10) {
        for e in step_entities(step) {
            p = commands::add(&p, e).expect("fixture entity");
        }
        match step {
            7 => {
                for (tid, v) in DREAD_VECTORS {
                    let input = RiskInput::Dread {
                        components: DreadComponents(*v),
                    };
                    p = commands::assess(&p, tid, input).expect("fixture assessment");
                }
            }
            8 => p = commands::elicit(&p, &catalog()).expect("fixture elicitation").project,
            9 => {
                let ids: Vec<String> = p.requirements.iter().map(|r| r.id.clone()).collect();
                for id in ids {
                    let record = ValidationRecord {
                        requirement_id: id,
                        reviewer: REVIEWER.into(),
                        verdict: ValidationVerdict::Accepted,
                        rationale: None,
                    };
                    p = commands::validate_requirement(&p, record).expect("fixture validation");
                }
            }
            10 => {
                p = commands::generate_srs(&p, SRS_PATH, SRS_TIMESTAMP)
                    .expect("fixture document")
                    .project
            }
            _ => {}
        }
        p = commands::complete_step(&p, step).expect("fixture step completes");
    }
    p
}

/// Catalogs for the asset-management and e-health comparison scenarios.
pub mod comparison {
    use crate::catalog::Catalog;

    pub const ASSET_MANAGEMENT_JSON: &str =
        include_str!("../../fixtures/catalogs/asset-management.json");
    pub const EHEALTH_JSON: &str = include_str!("../../fixtures/catalogs/ehealth.json");

    pub const ASSET_MANAGEMENT_REQUIREMENTS: &[(&str, &str)] = &[
        ("SR1", "Use of Access control, Auditing, Authentication, Encryption, Integrity controls, Backups techniques"),
        ("SR2", "Implement account lockout procedure, captcha and enforce the user of the ERP system to use strong passwords"),
        ("SR3", "Use of complex encryption methods that limits the risks of user data disclosure of E-Health system"),
        ("SR4", "Use a firewall and proper authorization technique for granting the access right to use of the software system"),
        ("SR5", "Use HIPAA security standards and policy to ensure proper external security"),
    ];

    pub const EHEALTH_REQUIREMENTS: &[(&str, &str)] = &[
        ("SR1", "Use of Access control, Auditing, Authentication, Encryption, Integrity controls, Backups techniques"),
        ("SR2", "Implement account lockout procedure, captcha and enforce the user of the E-Health system to use strong passwords"),
        ("SR3", "Use of complex encryption methods that limits the risks of user data disclosure of E-Health system"),
        ("SR4", "Use a firewall and proper authorization technique for granting the access right to use of the software system"),
    ];

    pub fn asset_management() -> Catalog {
        crate::catalog::parse_catalog(ASSET_MANAGEMENT_JSON).expect("bundled catalog parses")
    }

    pub fn ehealth() -> Catalog {
        crate::catalog::parse_catalog(EHEALTH_JSON).expect("bundled catalog parses")
    }
}
