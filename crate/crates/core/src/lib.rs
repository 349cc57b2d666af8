//! Campus operations server: housekeeping task scheduling with photo
//! evidence, half-day attendance, leave approvals and inventory issuance,
//! served as HTML fragments and a parallel JSON namespace.
//!
//! [`Campus`] owns the store, the permission matrix and the clock. Each
//! functional area is reached through an accessor that borrows it:
//!
//! ```no_run
//! # fn main() -> campus_core::Result<()> {
//! let campus = campus_core::Campus::open(campus_core::Config::from_env()?)?;
//! let session = campus.accounts().authenticate("sup1", "secret")?;
//! let today = campus.today();
//! let tasks = campus.scheduling().instantiate_daily_records(today)?;
//! # let _ = (session, tasks); Ok(()) }
//! ```

pub mod admin;
pub mod attendance;
pub mod auth;
pub mod clock;
pub mod config;
pub mod error;
pub mod ids;
pub mod inventory;
pub mod leave;
pub mod photo;
pub mod scheduling;
pub mod store;
pub mod testing;
pub mod web;

use std::sync::Arc;

use chrono::NaiveDate;

pub use auth::{EndpointGroup, PermissionMatrix, Role, Session, UserAccount};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::Config;
pub use error::{Error, Result};
pub use store::Store;

pub struct Campus {
    store: Store,
    perms: PermissionMatrix,
    clock: Arc<dyn Clock>,
    config: Config,
}

impl std::fmt::Debug for Campus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Campus")
            .field("store", &self.store)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl Campus {
    /// Opens the database named by `config` with the system clock.
    pub fn open(config: Config) -> Result<Self> {
        let store = Store::open(&config.database_path)?;
        let clock = Arc::new(SystemClock::new(config.utc_offset));
        Self::from_parts(store, config, clock, PermissionMatrix::builtin())
    }

    pub fn from_parts(
        store: Store,
        config: Config,
        clock: Arc<dyn Clock>,
        perms: PermissionMatrix,
    ) -> Result<Self> {
        std::fs::create_dir_all(&config.media_dir)?;
        let campus = Self {
            store,
            perms,
            clock,
            config,
        };
        campus.scheduling().ensure_area_registry()?;
        Ok(campus)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn permissions(&self) -> &PermissionMatrix {
        &self.perms
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn clock(&self) -> &dyn Clock {
        self.clock.as_ref()
    }

    pub fn today(&self) -> NaiveDate {
        self.clock.today()
    }

    pub fn admin(&self) -> admin::Admin<'_> {
        admin::Admin { campus: self }
    }

    pub fn accounts(&self) -> auth::Accounts<'_> {
        auth::Accounts { campus: self }
    }

    pub fn scheduling(&self) -> scheduling::Scheduling<'_> {
        scheduling::Scheduling { campus: self }
    }

    pub fn attendance(&self) -> attendance::Attendance<'_> {
        attendance::Attendance { campus: self }
    }

    pub fn leave(&self) -> leave::Leave<'_> {
        leave::Leave { campus: self }
    }

    pub fn inventory(&self) -> inventory::Inventory<'_> {
        inventory::Inventory { campus: self }
    }

    pub fn photos(&self) -> photo::Photos<'_> {
        photo::Photos { campus: self }
    }

    pub(crate) fn require(&self, actor: &Session, group: EndpointGroup) -> Result<()> {
        self.perms.check(actor.role(), group)
    }
}
