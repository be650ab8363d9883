//! The case-study command script and helpers to replay it.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use store_core::fixtures::erp;
use store_core::model::{AssetPriority, PointKind, StakeholderGroup, StakeholderPriority};

pub const SCRIPT_PATH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/erp.replay");
pub const CATALOG_FILE: &str = "catalog.json";
pub const REGENERATE_ENV: &str = "STORE_REGENERATE_FIXTURES";

fn line(args: &[&str]) -> String {
    let mut words = vec!["store"];
    words.extend_from_slice(args);
    shlex::try_join(words).expect("no NUL bytes in fixture text")
}

fn priority(p: StakeholderPriority) -> &'static str {
    match p {
        StakeholderPriority::Critical => "critical",
        StakeholderPriority::Major => "major",
        StakeholderPriority::Minor => "minor",
    }
}

fn group(g: StakeholderGroup) -> &'static str {
    match g {
        StakeholderGroup::Managerial => "managerial",
        StakeholderGroup::Marketing => "marketing",
        StakeholderGroup::InformationSystem => "information-system",
        StakeholderGroup::Other => "other",
    }
}

fn asset_priority(p: AssetPriority) -> &'static str {
    match p {
        AssetPriority::Low => "low",
        AssetPriority::Medium => "medium",
        AssetPriority::High => "high",
    }
}

fn kind(k: PointKind) -> &'static str {
    match k {
        PointKind::PoA => "poa",
        PointKind::PoB => "pob",
        PointKind::PoC => "poc",
        PointKind::PoD => "pod",
    }
}

fn comma(letters: &str) -> String {
    letters.chars().map(String::from).collect::<Vec<_>>().join(",")
}

/// The script text, built from the fixture tables.
pub fn script() -> String {
    let mut out = vec![
        "# College ERP case study, replayed from an empty project through the SRS.".to_owned(),
        format!("# Run from a directory that contains the ERP catalog as {CATALOG_FILE}."),
        line(&["init", erp::PROJECT_NAME, "--id", erp::PROJECT_ID]),
        String::new(),
        "# 1. System goals".into(),
    ];
    let complete = |out: &mut Vec<String>, step: u8| {
        out.push(line(&["step", "complete", &step.to_string()]));
        out.push(String::new());
    };
    for (id, d) in erp::GOALS {
        out.push(line(&["goal", "add", d, "--id", id, "--source", "interview"]));
    }
    complete(&mut out, 1);
    out.push("# 2. Stakeholders".into());
    for (id, name, p, g) in erp::STAKEHOLDERS {
        out.push(line(&["stakeholder", "add", name, "--id", id, "--priority", priority(*p), "--group", group(*g)]));
    }
    complete(&mut out, 2);
    out.push("# 3. Agreement on goals".into());
    for (g, _) in erp::GOALS {
        for (s, ..) in erp::STAKEHOLDERS {
            out.push(line(&["agree", g, s]));
        }
    }
    complete(&mut out, 3);
    out.push("# 4. Assets".into());
    for (id, name, d, cia, p) in erp::ASSETS {
        out.push(line(&[
            "asset", "add", name, "--id", id, "--cia", &comma(cia), "--priority", asset_priority(*p),
            "--description", d,
        ]));
    }
    complete(&mut out, 4);
    out.push("# 5. Security attack analysis".into());
    for (id, k, name, d) in erp::ATTACK_POINTS {
        out.push(line(&["point", "add", name, "--id", id, "--kind", kind(*k), "--description", d]));
    }
    complete(&mut out, 5);
    out.push("# 6. Threats".into());
    for (id, title, d, stride, mitigated, assets) in erp::THREATS {
        let assets = assets.join(",");
        let stride = comma(stride);
        let mut args = vec![
            "threat", "add", title, "--id", id, "--stride", &stride, "--assets", &assets, "--description", d,
        ];
        if *mitigated {
            args.push("--mitigated");
        }
        out.push(line(&args));
    }
    complete(&mut out, 6);
    out.push("# 7. DREAD evaluation".into());
    for (id, v) in erp::DREAD_VECTORS {
        let v = v.map(|c| c.to_string()).join(",");
        out.push(line(&["risk", "set", id, "--dread", &v]));
    }
    out.push(line(&["risk", "rank"]));
    complete(&mut out, 7);
    out.push("# 8. Elicitation".into());
    out.push(line(&["elicit", "--catalog", CATALOG_FILE]));
    complete(&mut out, 8);
    out.push("# 9. Validation".into());
    for (_, sr, _) in erp::REQUIREMENTS {
        out.push(line(&["req", "validate", sr, "--reviewer", erp::REVIEWER, "--verdict", "accepted"]));
    }
    complete(&mut out, 9);
    out.push("# 10. Specification document".into());
    out.push(line(&["doc", "srs", "--out", erp::SRS_PATH, "--generated-at", erp::SRS_TIMESTAMP]));
    out.push(line(&["step", "complete", "10"]));
    out.join("\n") + "\n"
}

/// Argument vectors of the script, without the leading `store`.
pub fn commands(script: &str) -> Vec<Vec<String>> {
    script
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut words = shlex::split(l).expect("well-formed script line");
            assert_eq!(words.remove(0), "store", "{l}");
            words
        })
        .collect()
}

/// A scratch directory holding the ERP catalog. Uses tmpfs when available
/// so timings measure the tool rather than the disk.
pub fn workdir() -> tempfile::TempDir {
    let shm = Path::new("/dev/shm");
    let dir = if shm.is_dir() {
        tempfile::tempdir_in(shm).unwrap()
    } else {
        tempfile::tempdir().unwrap()
    };
    std::fs::write(dir.path().join(CATALOG_FILE), erp::CATALOG_JSON).unwrap();
    dir
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_store"))
}

/// Runs every command through the built binary; panics on the first failure.
pub fn replay_with_binary(dir: &Path, script: &str) {
    for args in commands(script) {
        let out = Command::new(bin()).args(&args).current_dir(dir).output().unwrap();
        assert!(
            out.status.success(),
            "store {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

/// In-process dispatch with the project file under `dir`.
pub fn store(dir: &Path, args: &[&str]) -> store_cli::Dispatch {
    let project = dir.join("project.store.json");
    let catalog_flag: Vec<String> = args
        .iter()
        .map(|a| {
            if *a == CATALOG_FILE {
                dir.join(CATALOG_FILE).to_string_lossy().into_owned()
            } else {
                (*a).to_owned()
            }
        })
        .collect();
    let mut argv = vec!["store".to_owned(), "--project".into(), project.to_string_lossy().into_owned()];
    argv.extend(catalog_flag);
    store_cli::dispatch(argv)
}

pub fn load(dir: &Path) -> store_core::Project {
    store_core::persistence::load(&dir.join("project.store.json")).unwrap()
}
