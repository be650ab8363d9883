//! Command-line and HTTP front ends over `store_core`.

pub mod api;
pub mod cli;
pub mod view;

pub use cli::{dispatch, Dispatch};

/// Failures of the front ends themselves, on top of the core error set.
#[derive(Debug, thiserror::Error)]
pub enum FrontendError {
    #[error(transparent)]
    Core(#[from] store_core::Error),
    #[error("cannot bind {address}: {source}")]
    BindFailure {
        address: String,
        source: std::io::Error,
    },
}

impl FrontendError {
    pub fn code(&self) -> &'static str {
        match self {
            FrontendError::Core(e) => e.code(),
            FrontendError::BindFailure { .. } => "BindFailure",
        }
    }

    pub fn details(&self) -> serde_json::Value {
        match self {
            FrontendError::Core(e) => e.details(),
            FrontendError::BindFailure { address, .. } => serde_json::json!({ "address": address }),
        }
    }
}

impl From<store_core::persistence::PersistError> for FrontendError {
    fn from(e: store_core::persistence::PersistError) -> Self {
        FrontendError::Core(e.into())
    }
}
