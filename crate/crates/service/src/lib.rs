//! HTTP service that runs teaching sessions for human learners: a short
//! tutorial, a teaching phase with label (and optionally explanation)
//! feedback, and a testing phase without feedback.
//!
//! Every session is an append-only JSONL event log under the configured data
//! directory; the in-memory state is a fold over those logs and is rebuilt
//! from them on startup.

pub mod config;
pub mod error;
pub mod http;
pub mod log;
pub mod manager;
pub mod session;

pub use config::ServiceConfig;
pub use error::{Result, ServiceError};
pub use http::{router, serve};
pub use manager::{Clock, CreateRequest, ManualClock, SessionManager, SystemClock};
pub use session::{Event, Phase, Session};
