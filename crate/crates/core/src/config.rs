use std::path::PathBuf;

use chrono::FixedOffset;

use crate::clock;
use crate::error::{Error, Result};

/// Argon2id cost parameters. The defaults are the library's recommended
/// settings; tests drop them to keep hashing cheap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashParams {
    pub memory_kib: u32,
    pub iterations: u32,
    pub parallelism: u32,
}

impl Default for HashParams {
    fn default() -> Self {
        Self {
            memory_kib: argon2::Params::DEFAULT_M_COST,
            iterations: argon2::Params::DEFAULT_T_COST,
            parallelism: argon2::Params::DEFAULT_P_COST,
        }
    }
}

impl HashParams {
    pub fn fast_for_tests() -> Self {
        Self {
            memory_kib: 64,
            iterations: 1,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Config {
    pub database_path: PathBuf,
    pub media_dir: PathBuf,
    pub session_ttl_hours: i64,
    pub secret_seed: String,
    pub max_photo_bytes: u64,
    pub utc_offset: FixedOffset,
    pub hash: HashParams,
}

impl Config {
    /// Config rooted in `dir`: database at `dir/campus.db`, media under `dir/media`.
    pub fn in_dir(dir: impl Into<PathBuf>) -> Self {
        let dir = dir.into();
        Self {
            database_path: dir.join("campus.db"),
            media_dir: dir.join("media"),
            session_ttl_hours: 12,
            secret_seed: String::new(),
            max_photo_bytes: 2_000_000,
            utc_offset: clock::default_offset(),
            hash: HashParams::default(),
        }
    }

    /// Reads `DATABASE_PATH`, `MEDIA_DIR`, `SESSION_TTL_HOURS`, `SECRET_SEED`,
    /// `MAX_PHOTO_BYTES` and `UTC_OFFSET_MINUTES`.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::in_dir(".");
        if let Ok(v) = std::env::var("DATABASE_PATH") {
            cfg.database_path = v.into();
        }
        if let Ok(v) = std::env::var("MEDIA_DIR") {
            cfg.media_dir = v.into();
        }
        if let Ok(v) = std::env::var("SESSION_TTL_HOURS") {
            cfg.session_ttl_hours = parse_env("SESSION_TTL_HOURS", &v)?;
            if cfg.session_ttl_hours <= 0 {
                return Err(Error::Invalid("SESSION_TTL_HOURS must be positive".into()));
            }
        }
        if let Ok(v) = std::env::var("SECRET_SEED") {
            cfg.secret_seed = v;
        }
        if let Ok(v) = std::env::var("MAX_PHOTO_BYTES") {
            cfg.max_photo_bytes = parse_env("MAX_PHOTO_BYTES", &v)?;
        }
        if let Ok(v) = std::env::var("UTC_OFFSET_MINUTES") {
            let minutes: i32 = parse_env("UTC_OFFSET_MINUTES", &v)?;
            cfg.utc_offset = FixedOffset::east_opt(minutes * 60)
                .ok_or_else(|| Error::Invalid("UTC_OFFSET_MINUTES out of range".into()))?;
        }
        Ok(cfg)
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("{name}={value:?} is not a valid number")))
}
