//! File formats, configuration, anonymized export and platform ingestion
//! around `supplygraph-core`.

pub mod adapter;
pub mod anonymize;
pub mod config;
pub mod deltaio;
pub mod error;
pub mod fsutil;
pub mod graphio;
pub mod par;
pub mod reportio;
pub mod snapshot;

pub use error::{Error, Result};
