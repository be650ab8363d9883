//! Rewrites the committed ERP fixture files from the transcribed tables.
//!
//! cargo run -p store-core --example regenerate_fixtures

use std::path::Path;

use store_core::{docgen, fixtures::erp, persistence};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/erp");
    persistence::save(&erp::project_through(7), &dir.join("project.store.json"))?;
    let doc = docgen::render_srs(&erp::project_through(9), erp::SRS_TIMESTAMP);
    std::fs::write(dir.join("srs.golden.md"), doc.body())?;
    println!("srs checksum {}", doc.checksum);
    Ok(())
}
