//! Helpers for building throwaway campuses in tests and tools.

use std::sync::Arc;

use chrono::NaiveDate;

use crate::auth::{NewUser, Role, Session, UserAccount};
use crate::clock::ManualClock;
use crate::config::{Config, HashParams};
use crate::{Campus, PermissionMatrix, Store};

/// Password given to every account created through [`TestCampus::user`].
pub const TEST_PASSWORD: &str = "test-password";

/// A campus on a temporary file database with a manual clock.
pub struct TestCampus {
    pub campus: Arc<Campus>,
    pub clock: Arc<ManualClock>,
    pub dir: tempfile::TempDir,
}

impl TestCampus {
    /// Clock starts at 09:00 local on Monday 2025-03-03.
    pub fn new() -> Self {
        Self::starting(NaiveDate::from_ymd_opt(2025, 3, 3).unwrap())
    }

    pub fn starting(date: NaiveDate) -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let mut config = Config::in_dir(dir.path());
        config.hash = HashParams::fast_for_tests();
        let clock = Arc::new(ManualClock::at(date, 9));
        let store = Store::open(&config.database_path).expect("open store");
        let campus = Campus::from_parts(store, config, clock.clone(), PermissionMatrix::builtin())
            .expect("campus");
        Self {
            campus: Arc::new(campus),
            clock,
            dir,
        }
    }

    pub fn user(&self, username: &str, role: Role) -> UserAccount {
        self.user_named(username, username, role)
    }

    pub fn user_named(&self, username: &str, display_name: &str, role: Role) -> UserAccount {
        self.campus
            .accounts()
            .create_user(NewUser {
                username,
                password: TEST_PASSWORD,
                role,
                display_name,
            })
            .expect("create user")
    }

    pub fn login(&self, username: &str) -> Session {
        self.campus
            .accounts()
            .authenticate(username, TEST_PASSWORD)
            .expect("login")
    }

    /// Creates a user with `role` and logs them in.
    pub fn actor(&self, username: &str, role: Role) -> Session {
        self.user(username, role);
        self.login(username)
    }
}

impl Default for TestCampus {
    fn default() -> Self {
        Self::new()
    }
}
