//! SQLite persistence behind a small connection pool.
//!
//! All access goes through [`Tx`], which counts every statement it issues.
//! The counter backs the bounded-query checks on list endpoints; transaction
//! control statements (`BEGIN`/`COMMIT`) are not counted.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use r2d2::Pool;
use r2d2_sqlite::SqliteConnectionManager;
use rusqlite::{OptionalExtension, Params, Row, TransactionBehavior};

use crate::error::Result;

const SCHEMA: &str = include_str!("schema.sql");

/// Tables in dependency order (children first), used by [`Store::wipe`].
const TABLES: &[&str] = &[
    "notifications",
    "incharge_assignments",
    "leave_transitions",
    "leave_requests",
    "attendance",
    "worker_assignments",
    "daily_records",
    "photos",
    "templates",
    "stock_movements",
    "purchase_requests",
    "items",
    "sessions",
    "users",
];

#[derive(Clone)]
pub struct Store {
    pool: Pool<SqliteConnectionManager>,
    queries: Arc<AtomicU64>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store")
            .field("queries", &self.query_count())
            .finish_non_exhaustive()
    }
}

fn init_connection(conn: &mut rusqlite::Connection) -> rusqlite::Result<()> {
    conn.busy_timeout(Duration::from_secs(30))?;
    conn.execute_batch("PRAGMA foreign_keys = ON; PRAGMA synchronous = NORMAL;")
}

impl Store {
    /// Opens (creating if needed) a WAL-mode database file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        if let Some(parent) = path.as_ref().parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        {
            // journal_mode is persistent; set it once before pooling.
            let conn = rusqlite::Connection::open(path.as_ref())?;
            conn.query_row("PRAGMA journal_mode = WAL", [], |_| Ok(()))?;
        }
        let manager = SqliteConnectionManager::file(path.as_ref()).with_init(init_connection);
        let pool = Pool::builder().max_size(16).build(manager)?;
        Self::with_pool(pool)
    }

    /// Single-connection in-memory database.
    pub fn open_in_memory() -> Result<Self> {
        let manager = SqliteConnectionManager::memory().with_init(init_connection);
        let pool = Pool::builder()
            .max_size(1)
            .idle_timeout(None)
            .max_lifetime(None)
            .build(manager)?;
        Self::with_pool(pool)
    }

    fn with_pool(pool: Pool<SqliteConnectionManager>) -> Result<Self> {
        pool.get()?.execute_batch(SCHEMA)?;
        Ok(Self {
            pool,
            queries: Arc::new(AtomicU64::new(0)),
        })
    }

    /// Runs `f` inside a write transaction (`BEGIN IMMEDIATE`), committing on `Ok`.
    pub fn write<T>(&self, f: impl FnOnce(&Tx<'_>) -> Result<T>) -> Result<T> {
        self.run(TransactionBehavior::Immediate, f)
    }

    /// Runs `f` inside a read transaction; all reads see one snapshot.
    pub fn read<T>(&self, f: impl FnOnce(&Tx<'_>) -> Result<T>) -> Result<T> {
        self.run(TransactionBehavior::Deferred, f)
    }

    fn run<T>(
        &self,
        behavior: TransactionBehavior,
        f: impl FnOnce(&Tx<'_>) -> Result<T>,
    ) -> Result<T> {
        let mut conn = self.pool.get()?;
        let tx = conn.transaction_with_behavior(behavior)?;
        let wrapped = Tx {
            inner: tx,
            counter: &self.queries,
        };
        let out = f(&wrapped)?;
        wrapped.inner.commit()?;
        Ok(out)
    }

    /// Statements issued since the store was opened.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::SeqCst)
    }

    /// Deletes every row except the area registry.
    pub fn wipe(&self) -> Result<()> {
        self.write(|tx| {
            tx.execute_batch("DROP TRIGGER IF EXISTS attendance_submitted_not_deleted;")?;
            for table in TABLES {
                tx.execute(&format!("DELETE FROM {table}"), [])?;
            }
            tx.execute_batch(SCHEMA)?;
            Ok(())
        })
    }
}

/// A transaction handle that counts the statements it runs.
pub struct Tx<'a> {
    inner: rusqlite::Transaction<'a>,
    counter: &'a AtomicU64,
}

impl Tx<'_> {
    fn bump(&self) {
        self.counter.fetch_add(1, Ordering::SeqCst);
    }

    pub fn execute<P: Params>(&self, sql: &str, params: P) -> Result<usize> {
        self.bump();
        Ok(self.inner.prepare_cached(sql)?.execute(params)?)
    }

    pub fn query_row<T, P, F>(&self, sql: &str, params: P, f: F) -> Result<T>
    where
        P: Params,
        F: FnOnce(&Row<'_>) -> rusqlite::Result<T>,
    {
        self.bump();
        Ok(self.inner.prepare_cached(sql)?.query_row(params, f)?)
    }

    pub fn query_opt<T, P, F>(&self, sql: &str, params: P, f: F) -> Result<Option<T>>
    where
        P: Params,
        F: FnOnce(&Row<'_>) -> rusqlite::Result<T>,
    {
        self.bump();
        Ok(self
            .inner
            .prepare_cached(sql)?
            .query_row(params, f)
            .optional()?)
    }

    pub fn query_all<T, P, F>(&self, sql: &str, params: P, f: F) -> Result<Vec<T>>
    where
        P: Params,
        F: FnMut(&Row<'_>) -> rusqlite::Result<T>,
    {
        self.bump();
        let mut stmt = self.inner.prepare_cached(sql)?;
        let rows = stmt.query_map(params, f)?;
        Ok(rows.collect::<rusqlite::Result<Vec<T>>>()?)
    }

    pub fn last_insert_rowid(&self) -> i64 {
        self.inner.last_insert_rowid()
    }

    fn execute_batch(&self, sql: &str) -> Result<()> {
        Ok(self.inner.execute_batch(sql)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_each_statement() {
        let store = Store::open_in_memory().unwrap();
        let before = store.query_count();
        store
            .read(|tx| {
                tx.query_row("SELECT 1", [], |r| r.get::<_, i64>(0))?;
                tx.query_all("SELECT code FROM areas", [], |r| r.get::<_, String>(0))?;
                Ok(())
            })
            .unwrap();
        assert_eq!(store.query_count() - before, 2);
    }

    #[test]
    fn failed_closure_rolls_back() {
        let store = Store::open_in_memory().unwrap();
        let res: Result<()> = store.write(|tx| {
            tx.execute(
                "INSERT INTO items (category, name, unit, initial_quantity, available_quantity) VALUES ('c', 'n', 'u', 0, 0)",
                [],
            )?;
            Err(crate::Error::NotFound)
        });
        assert!(res.is_err());
        let n: i64 = store
            .read(|tx| tx.query_row("SELECT COUNT(*) FROM items", [], |r| r.get(0)))
            .unwrap();
        assert_eq!(n, 0);
    }

    #[test]
    fn negative_stock_rejected_by_schema() {
        let store = Store::open_in_memory().unwrap();
        let res = store.write(|tx| {
            tx.execute(
                "INSERT INTO items (category, name, unit, initial_quantity, available_quantity) VALUES ('c', 'n', 'u', 0, -1)",
                [],
            )
        });
        assert!(res.is_err());
    }
}
