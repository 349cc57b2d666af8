//! Accounts, sessions and role-based authorization.

mod permissions;
mod role;

use std::sync::OnceLock;

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::{Algorithm, Argon2, Params, Version};
use chrono::{DateTime, Duration, FixedOffset};
use rand::RngCore;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use permissions::{EndpointGroup, PermissionMatrix, DEFAULT_MATRIX, MATRIX_VERSION};
pub use role::{Role, UnknownRole};

use crate::clock::{format_ts, parse_ts};
use crate::config::HashParams;
use crate::error::{Error, Result};
use crate::ids::UserId;
use crate::store::Tx;
use crate::Campus;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UserAccount {
    pub id: UserId,
    pub username: String,
    pub role: Role,
    pub display_name: String,
    pub active: bool,
}

#[derive(Debug, Clone)]
pub struct Session {
    /// The raw token; only its keyed hash is persisted.
    pub token: String,
    pub user: UserAccount,
    pub created_at: DateTime<FixedOffset>,
    pub expires_at: DateTime<FixedOffset>,
}

impl Session {
    pub fn role(&self) -> Role {
        self.user.role
    }

    pub fn user_id(&self) -> UserId {
        self.user.id
    }
}

#[derive(Debug, Clone)]
pub struct NewUser<'a> {
    pub username: &'a str,
    pub password: &'a str,
    pub role: Role,
    pub display_name: &'a str,
}

/// Outcome of an authorization check for an authenticated caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Allow,
    Deny,
}

pub(crate) const USER_COLUMNS: &str = "id, username, role, display_name, active";

pub(crate) fn user_from_row(row: &rusqlite::Row<'_>) -> rusqlite::Result<UserAccount> {
    user_at(row, 0)
}

/// Reads [`USER_COLUMNS`] starting at column `o`.
pub(crate) fn user_at(row: &rusqlite::Row<'_>, o: usize) -> rusqlite::Result<UserAccount> {
    Ok(UserAccount {
        id: row.get(o)?,
        username: row.get(o + 1)?,
        role: row.get(o + 2)?,
        display_name: row.get(o + 3)?,
        active: row.get(o + 4)?,
    })
}

pub(crate) fn load_user(tx: &Tx<'_>, id: UserId) -> Result<UserAccount> {
    tx.query_opt(
        &format!("SELECT {USER_COLUMNS} FROM users WHERE id = ?1"),
        [id],
        user_from_row,
    )?
    .ok_or(Error::NotFound)
}

fn hasher(params: HashParams) -> Result<Argon2<'static>> {
    let params = Params::new(params.memory_kib, params.iterations, params.parallelism, None)
        .map_err(|e| Error::Internal(format!("argon2 params: {e}")))?;
    Ok(Argon2::new(Algorithm::Argon2id, Version::V0x13, params))
}

fn hash_password(params: HashParams, password: &str) -> Result<String> {
    let mut salt = [0u8; 16];
    rand::rng().fill_bytes(&mut salt);
    let salt = SaltString::encode_b64(&salt).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(hasher(params)?
        .hash_password(password.as_bytes(), &salt)
        .map_err(|e| Error::Internal(e.to_string()))?
        .to_string())
}

fn verify_password(hash: &str, password: &str) -> bool {
    match PasswordHash::new(hash) {
        Ok(parsed) => Argon2::default()
            .verify_password(password.as_bytes(), &parsed)
            .is_ok(),
        Err(_) => false,
    }
}

pub struct Accounts<'a> {
    pub(crate) campus: &'a Campus,
}

impl Accounts<'_> {
    fn token_hash(&self, token: &str) -> String {
        let mut h = Sha256::new();
        h.update(self.campus.config.secret_seed.as_bytes());
        h.update([0u8]);
        h.update(token.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn create_user(&self, new: NewUser<'_>) -> Result<UserAccount> {
        let username = new.username.trim();
        if username.is_empty() {
            return Err(Error::Invalid("username must not be empty".into()));
        }
        let hash = hash_password(self.campus.config.hash, new.password)?;
        self.campus.store.write(|tx| {
            let key = username.to_lowercase();
            let taken = tx
                .query_opt("SELECT id FROM users WHERE username_key = ?1", [&key], |r| {
                    r.get::<_, i64>(0)
                })?
                .is_some();
            if taken {
                return Err(Error::Invalid(format!("username {username:?} is taken")));
            }
            tx.execute(
                "INSERT INTO users (username, username_key, password_hash, role, display_name, active)
                 VALUES (?1, ?2, ?3, ?4, ?5, 1)",
                rusqlite::params![username, key, hash, new.role, new.display_name],
            )?;
            Ok(UserAccount {
                id: UserId(tx.last_insert_rowid()),
                username: username.to_string(),
                role: new.role,
                display_name: new.display_name.to_string(),
                active: true,
            })
        })
    }

    /// Returns a fresh session iff the credentials match an active account.
    /// Unknown users, wrong passwords and inactive accounts all fail the same way.
    pub fn authenticate(&self, username: &str, password: &str) -> Result<Session> {
        static DUMMY: OnceLock<String> = OnceLock::new();
        let key = username.trim().to_lowercase();
        let found = self.campus.store.read(|tx| {
            tx.query_opt(
                &format!("SELECT {USER_COLUMNS}, password_hash FROM users WHERE username_key = ?1"),
                [&key],
                |r| Ok((user_from_row(r)?, r.get::<_, String>(5)?)),
            )
        })?;
        let (user, hash) = match found {
            Some(found) => found,
            None => {
                // Spend the same verification work as for a real account.
                let dummy = DUMMY.get_or_init(|| {
                    hash_password(self.campus.config.hash, "unused").unwrap_or_default()
                });
                let _ = verify_password(dummy, password);
                return Err(Error::InvalidCredentials);
            }
        };
        if !verify_password(&hash, password) || !user.active {
            return Err(Error::InvalidCredentials);
        }
        self.open_session(user)
    }

    fn open_session(&self, user: UserAccount) -> Result<Session> {
        let mut raw = [0u8; 32];
        rand::rng().fill_bytes(&mut raw);
        let token = hex::encode(raw);
        let created_at = self.campus.clock.now();
        let expires_at = created_at + Duration::hours(self.campus.config.session_ttl_hours);
        let token_hash = self.token_hash(&token);
        self.campus.store.write(|tx| {
            tx.execute(
                "INSERT INTO sessions (token_hash, user_id, created_at, expires_at) VALUES (?1, ?2, ?3, ?4)",
                rusqlite::params![token_hash, user.id, format_ts(&created_at), format_ts(&expires_at)],
            )
        })?;
        Ok(Session {
            token,
            user,
            created_at,
            expires_at,
        })
    }

    /// Resolves a session token. Unknown, expired and inactive-user sessions
    /// are all reported as [`Error::Unauthenticated`].
    pub fn session(&self, token: &str) -> Result<Session> {
        let token_hash = self.token_hash(token);
        let now = self.campus.clock.now();
        let row = self.campus.store.read(|tx| {
            tx.query_opt(
                "SELECT u.id, u.username, u.role, u.display_name, u.active, s.created_at, s.expires_at
                 FROM sessions s JOIN users u ON u.id = s.user_id
                 WHERE s.token_hash = ?1",
                [&token_hash],
                |r| Ok((user_from_row(r)?, r.get::<_, String>(5)?, r.get::<_, String>(6)?)),
            )
        })?;
        let Some((user, created, expires)) = row else {
            return Err(Error::Unauthenticated);
        };
        let created_at = parse_ts(&created).map_err(|e| Error::Internal(e.to_string()))?;
        let expires_at = parse_ts(&expires).map_err(|e| Error::Internal(e.to_string()))?;
        if expires_at <= now || !user.active {
            self.campus.store.write(|tx| {
                tx.execute("DELETE FROM sessions WHERE token_hash = ?1", [&token_hash])
            })?;
            return Err(Error::Unauthenticated);
        }
        Ok(Session {
            token: token.to_string(),
            user,
            created_at,
            expires_at,
        })
    }

    pub fn logout(&self, token: &str) -> Result<()> {
        let token_hash = self.token_hash(token);
        self.campus.store.write(|tx| {
            tx.execute("DELETE FROM sessions WHERE token_hash = ?1", [&token_hash])
        })?;
        Ok(())
    }

    /// Resolves `token` and checks the caller's role against `group`.
    pub fn authorize(&self, token: Option<&str>, group: EndpointGroup) -> Result<(Session, Decision)> {
        let session = self.session(token.ok_or(Error::Unauthenticated)?)?;
        let decision = if self.campus.perms.allows(session.role(), group) {
            Decision::Allow
        } else {
            Decision::Deny
        };
        Ok((session, decision))
    }

    pub fn set_active(&self, id: UserId, active: bool) -> Result<()> {
        self.campus.store.write(|tx| {
            let n = tx.execute("UPDATE users SET active = ?1 WHERE id = ?2", rusqlite::params![active, id])?;
            if n == 0 {
                return Err(Error::NotFound);
            }
            if !active {
                tx.execute("DELETE FROM sessions WHERE user_id = ?1", [id])?;
            }
            Ok(())
        })
    }

    pub fn get(&self, id: UserId) -> Result<UserAccount> {
        self.campus.store.read(|tx| load_user(tx, id))
    }

    pub fn by_username(&self, username: &str) -> Result<UserAccount> {
        let key = username.trim().to_lowercase();
        self.campus.store.read(|tx| {
            tx.query_opt(
                &format!("SELECT {USER_COLUMNS} FROM users WHERE username_key = ?1"),
                [key],
                user_from_row,
            )?
            .ok_or(Error::NotFound)
        })
    }

    /// Active accounts with `role`, ordered by display name.
    pub fn active_with_role(&self, role: Role) -> Result<Vec<UserAccount>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!(
                    "SELECT {USER_COLUMNS} FROM users WHERE role = ?1 AND active = 1 ORDER BY display_name, id"
                ),
                [role],
                user_from_row,
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::TestCampus;

    fn with_user(t: &TestCampus) -> UserAccount {
        t.campus
            .accounts()
            .create_user(NewUser {
                username: "hk_mgr1",
                password: "correct horse",
                role: Role::HousekeepingManager,
                display_name: "Manager One",
            })
            .unwrap()
    }

    #[test]
    fn authenticate_matches_credentials() {
        let t = TestCampus::new();
        with_user(&t);
        let s = t.campus.accounts().authenticate("hk_mgr1", "correct horse").unwrap();
        assert_eq!(s.role(), Role::HousekeepingManager);
        assert_eq!(s.token.len(), 64);
        assert!(s.expires_at > s.created_at);
        assert!(matches!(
            t.campus.accounts().authenticate("hk_mgr1", "wrong"),
            Err(Error::InvalidCredentials)
        ));
        assert!(matches!(
            t.campus.accounts().authenticate("nobody", "correct horse"),
            Err(Error::InvalidCredentials)
        ));
    }

    #[test]
    fn username_is_case_insensitive_and_unique() {
        let t = TestCampus::new();
        with_user(&t);
        assert!(t.campus.accounts().authenticate("HK_MGR1", "correct horse").is_ok());
        let dup = t.campus.accounts().create_user(NewUser {
            username: "Hk_Mgr1",
            password: "x",
            role: Role::Caretaker,
            display_name: "Dup",
        });
        assert!(matches!(dup, Err(Error::Invalid(_))));
    }

    #[test]
    fn inactive_account_cannot_authenticate_or_keep_sessions() {
        let t = TestCampus::new();
        let user = with_user(&t);
        let s = t.campus.accounts().authenticate("hk_mgr1", "correct horse").unwrap();
        t.campus.accounts().set_active(user.id, false).unwrap();
        assert!(matches!(
            t.campus.accounts().authenticate("hk_mgr1", "correct horse"),
            Err(Error::InvalidCredentials)
        ));
        assert!(matches!(t.campus.accounts().session(&s.token), Err(Error::Unauthenticated)));
    }

    #[test]
    fn sessions_expire_after_ttl() {
        let t = TestCampus::new();
        with_user(&t);
        let s = t.campus.accounts().authenticate("hk_mgr1", "correct horse").unwrap();
        t.clock.advance(Duration::hours(11));
        assert!(t.campus.accounts().session(&s.token).is_ok());
        t.clock.advance(Duration::hours(1));
        assert!(matches!(t.campus.accounts().session(&s.token), Err(Error::Unauthenticated)));
    }

    #[test]
    fn authorize_distinguishes_unauthenticated_from_deny() {
        let t = TestCampus::new();
        with_user(&t);
        let s = t.campus.accounts().authenticate("hk_mgr1", "correct horse").unwrap();
        let acc = t.campus.accounts();
        assert_eq!(acc.authorize(Some(&s.token), EndpointGroup::HousekeepingView).unwrap().1, Decision::Allow);
        assert_eq!(acc.authorize(Some(&s.token), EndpointGroup::InventoryIssue).unwrap().1, Decision::Deny);
        assert!(matches!(acc.authorize(None, EndpointGroup::HousekeepingView), Err(Error::Unauthenticated)));
        t.clock.advance(Duration::hours(13));
        assert!(matches!(
            acc.authorize(Some(&s.token), EndpointGroup::HousekeepingView),
            Err(Error::Unauthenticated)
        ));
    }

    #[test]
    fn logout_invalidates_token() {
        let t = TestCampus::new();
        with_user(&t);
        let s = t.campus.accounts().authenticate("hk_mgr1", "correct horse").unwrap();
        t.campus.accounts().logout(&s.token).unwrap();
        assert!(matches!(t.campus.accounts().session(&s.token), Err(Error::Unauthenticated)));
    }

    #[test]
    fn tokens_are_not_stored_in_clear() {
        let t = TestCampus::new();
        with_user(&t);
        let s = t.campus.accounts().authenticate("hk_mgr1", "correct horse").unwrap();
        let stored: Vec<String> = t
            .campus
            .store()
            .read(|tx| tx.query_all("SELECT token_hash FROM sessions", [], |r| r.get(0)))
            .unwrap();
        assert_eq!(stored.len(), 1);
        assert_ne!(stored[0], s.token);
    }
}
