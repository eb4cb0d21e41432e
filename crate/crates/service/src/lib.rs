//! HTTP service and command-line front end for `pneumo-core`.
//!
//! The service keeps draft encounters in memory and appends finalized ones
//! to the journal under the configured data directory. Computation is pure;
//! the journal is the only serialized resource. There is no authentication:
//! the deployment model is a single operator on an offline machine.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;

pub use api::{router, AppState};
pub use config::ServiceConfig;
