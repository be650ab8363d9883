//! Security requirements engineering workbench.
//!
//! A [`Project`] carries every artifact of a ten-step, threat-driven
//! engagement: goals, stakeholders and their agreement, assets, the four
//! kinds of attack point, STRIDE-tagged threats, risk assessments,
//! elicited requirements, validation records and the generated
//! specification. [`commands`] is the mutation surface used by the CLI,
//! HTTP and Python front ends.

pub mod analysis;
pub mod catalog;
pub mod commands;
pub mod docgen;
mod error;
pub mod fixtures;
pub mod model;
pub mod persistence;
pub mod risk;
pub mod workflow;

pub use error::{Error, Result};
pub use model::Project;
