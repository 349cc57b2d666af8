//! Desk-scale measurement harness for the campus server.
//!
//! `seed` builds a deterministic dataset, `measure` replays an operation mix
//! over HTTP in both render modes, `report` turns a run file into a table and
//! `race` hammers one inventory item with concurrent issuances.

pub mod measure;
pub mod ops;
pub mod race;
pub mod report;
pub mod seed;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("storage is not empty; pass --force to wipe it first")]
    StorageNotEmpty,
    #[error("server unreachable at {url}: {reason}")]
    ServerUnreachable { url: String, reason: String },
    #[error("login failed for {0}")]
    AuthFailure(String),
    #[error("{method} {path} answered {status}")]
    UnexpectedStatus { method: &'static str, path: String, status: u16 },
    #[error("ops file: {0}")]
    Ops(String),
    #[error("run file line {line}: {reason}")]
    RunFile { line: usize, reason: String },
    #[error(transparent)]
    Core(#[from] campus_core::Error),
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
