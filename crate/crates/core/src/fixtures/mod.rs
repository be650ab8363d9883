//! Bundled case-study data and threat dictionaries.

pub mod erp;
