//! Cross-module counts for the admin dashboard.

use chrono::NaiveDate;
use serde::Serialize;

use crate::auth::{EndpointGroup, Session};
use crate::error::Result;
use crate::Campus;

/// Stock at or below this level is listed as low on the dashboard.
pub const LOW_STOCK: i64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub date: NaiveDate,
    pub tasks_by_status: Vec<(String, u64)>,
    pub attendance_recorded: u64,
    pub attendance_submitted: u64,
    pub leave_by_state: Vec<(String, u64)>,
    pub photos: u64,
    pub mean_compression_ratio: Option<f64>,
    pub items: u64,
    pub low_stock: Vec<(String, i64)>,
    pub open_purchase_requests: u64,
    pub users_by_role: Vec<(String, u64)>,
}

pub struct Admin<'a> {
    pub(crate) campus: &'a Campus,
}

impl Admin<'_> {
    pub fn summary(&self, date: NaiveDate, actor: &Session) -> Result<Summary> {
        self.campus.require(actor, EndpointGroup::AdminDashboard)?;
        let day = date.to_string();
        self.campus.store.read(|tx| {
            let counts = |sql: &str| -> Result<Vec<(String, u64)>> {
                tx.query_all(sql, [&day], |r| Ok((r.get(0)?, r.get(1)?)))
            };
            let tasks_by_status =
                counts("SELECT status, COUNT(*) FROM daily_records WHERE date = ?1 GROUP BY status ORDER BY status")?;
            let (attendance_recorded, attendance_submitted) = tx.query_row(
                "SELECT COUNT(*), COALESCE(SUM(is_submitted), 0) FROM attendance WHERE date = ?1",
                [&day],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            let leave_by_state = tx.query_all(
                "SELECT state, COUNT(*) FROM leave_requests GROUP BY state ORDER BY state",
                [],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            let (photos, mean_compression_ratio) = tx.query_row(
                "SELECT COUNT(*), AVG(compression_ratio) FROM photos",
                [],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            let (items, open_purchase_requests) = tx.query_row(
                "SELECT (SELECT COUNT(*) FROM items), (SELECT COUNT(*) FROM purchase_requests WHERE status IN ('open', 'ordered'))",
                [],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            let low_stock = tx.query_all(
                "SELECT name, available_quantity FROM items WHERE available_quantity <= ?1 ORDER BY available_quantity, name",
                [LOW_STOCK],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            let users_by_role = tx.query_all(
                "SELECT role, COUNT(*) FROM users WHERE active = 1 GROUP BY role ORDER BY role",
                [],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            Ok(Summary {
                date,
                tasks_by_status,
                attendance_recorded,
                attendance_submitted,
                leave_by_state,
                photos,
                mean_compression_ratio,
                items,
                low_stock,
                open_purchase_requests,
                users_by_role,
            })
        })
    }
}
