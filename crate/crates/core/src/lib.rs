pub mod angles;
pub mod cli;
pub mod envelope;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod subequations;
pub mod transforms;

pub use error::{DslError, Result};

/// Version tag carried by config and report files.
pub const SCHEMA: &str = "dslkit/1";
