//! Half-day attendance with a one-way submission lock.
//!
//! Records for a `(date, slot)` stay editable until that batch is submitted.
//! After submission the row is frozen: the write path refuses it and a
//! storage trigger rejects any UPDATE or DELETE on a submitted row.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveTime};
use serde::Serialize;

use crate::auth::{user_at, EndpointGroup, Role, Session, UserAccount, USER_COLUMNS};
use crate::clock::{format_ts, parse_ts};
use crate::error::{Error, Result};
use crate::ids::{AttendanceId, UserId};
use crate::store::Tx;
use crate::Campus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfDaySlot {
    FirstHalf,
    SecondHalf,
}

impl HalfDaySlot {
    pub const ALL: [HalfDaySlot; 2] = [HalfDaySlot::FirstHalf, HalfDaySlot::SecondHalf];

    pub fn as_str(self) -> &'static str {
        match self {
            HalfDaySlot::FirstHalf => "first_half",
            HalfDaySlot::SecondHalf => "second_half",
        }
    }

    /// Local start and end of the slot: 08:00-13:00 and 13:00-17:00.
    pub fn bounds(self) -> (NaiveTime, NaiveTime) {
        let t = |h| NaiveTime::from_hms_opt(h, 0, 0).expect("valid hour");
        match self {
            HalfDaySlot::FirstHalf => (t(8), t(13)),
            HalfDaySlot::SecondHalf => (t(13), t(17)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HalfDaySlot::FirstHalf => "First half (08:00-13:00)",
            HalfDaySlot::SecondHalf => "Second half (13:00-17:00)",
        }
    }
}

impl fmt::Display for HalfDaySlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HalfDaySlot {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        HalfDaySlot::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown slot {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AttendanceStatus {
    Present,
    Absent,
    Late,
    Leave,
}

impl AttendanceStatus {
    pub const ALL: [AttendanceStatus; 4] = [
        AttendanceStatus::Present,
        AttendanceStatus::Absent,
        AttendanceStatus::Late,
        AttendanceStatus::Leave,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttendanceStatus::Present => "present",
            AttendanceStatus::Absent => "absent",
            AttendanceStatus::Late => "late",
            AttendanceStatus::Leave => "leave",
        }
    }
}

impl fmt::Display for AttendanceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AttendanceStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        AttendanceStatus::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown attendance status {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttendanceRecord {
    pub id: AttendanceId,
    pub worker: UserId,
    pub date: NaiveDate,
    pub slot: HalfDaySlot,
    pub status: AttendanceStatus,
    pub is_submitted: bool,
    pub recorded_by: UserId,
    pub recorded_at: DateTime<FixedOffset>,
}

/// One caretaker's line on the sheet; `entry` is `None` when unrecorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SheetRow {
    pub worker: UserAccount,
    pub entry: Option<AttendanceRecord>,
}

const COLUMNS: &str = "a.id, a.worker_id, a.date, a.slot, a.status, a.is_submitted, a.recorded_by, a.recorded_at";

fn bad<E: std::error::Error + Send + Sync + 'static>(idx: usize, e: E) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e))
}

fn record_at(r: &rusqlite::Row<'_>, o: usize) -> rusqlite::Result<AttendanceRecord> {
    let date: String = r.get(o + 2)?;
    let slot: String = r.get(o + 3)?;
    let status: String = r.get(o + 4)?;
    let at: String = r.get(o + 7)?;
    Ok(AttendanceRecord {
        id: r.get(o)?,
        worker: r.get(o + 1)?,
        date: date.parse().map_err(|e| bad(o + 2, e))?,
        slot: slot.parse().map_err(|e| bad(o + 3, e))?,
        status: status.parse().map_err(|e| bad(o + 4, e))?,
        is_submitted: r.get(o + 5)?,
        recorded_by: r.get(o + 6)?,
        recorded_at: parse_ts(&at).map_err(|e| bad(o + 7, e))?,
    })
}

fn load(tx: &Tx<'_>, worker: UserId, date: &str, slot: HalfDaySlot) -> Result<Option<AttendanceRecord>> {
    tx.query_opt(
        &format!("SELECT {COLUMNS} FROM attendance a WHERE a.worker_id = ?1 AND a.date = ?2 AND a.slot = ?3"),
        rusqlite::params![worker, date, slot.as_str()],
        |r| record_at(r, 0),
    )
}

pub struct Attendance<'a> {
    pub(crate) campus: &'a Campus,
}

impl Attendance<'_> {
    /// Creates or overwrites the unsubmitted record for `(worker, date, slot)`.
    pub fn record_attendance(
        &self,
        worker: UserId,
        date: NaiveDate,
        slot: HalfDaySlot,
        status: AttendanceStatus,
        actor: &Session,
    ) -> Result<AttendanceRecord> {
        self.campus.require(actor, EndpointGroup::AttendanceManage)?;
        let now = format_ts(&self.campus.clock.now());
        let day = date.to_string();
        self.campus.store.write(|tx| {
            let role: Role = tx
                .query_opt("SELECT role FROM users WHERE id = ?1", [worker], |r| r.get(0))?
                .ok_or(Error::NotFound)?;
            if role != Role::Caretaker {
                return Err(Error::WorkerRoleViolation);
            }
            let changed = tx.execute(
                "INSERT INTO attendance (worker_id, date, slot, status, is_submitted, recorded_by, recorded_at)
                 VALUES (?1, ?2, ?3, ?4, 0, ?5, ?6)
                 ON CONFLICT (worker_id, date, slot) DO UPDATE
                 SET status = excluded.status, recorded_by = excluded.recorded_by, recorded_at = excluded.recorded_at
                 WHERE attendance.is_submitted = 0",
                rusqlite::params![worker, day, slot.as_str(), status.as_str(), actor.user_id(), now],
            )?;
            if changed == 0 {
                return Err(Error::AlreadySubmitted);
            }
            load(tx, worker, &day, slot)?.ok_or_else(|| Error::Internal("upserted row vanished".into()))
        })
    }

    /// Locks every record for `(date, slot)`; returns how many were newly locked.
    pub fn submit_attendance(&self, date: NaiveDate, slot: HalfDaySlot, actor: &Session) -> Result<usize> {
        self.campus.require(actor, EndpointGroup::AttendanceManage)?;
        self.campus.store.write(|tx| {
            tx.execute(
                "UPDATE attendance SET is_submitted = 1 WHERE date = ?1 AND slot = ?2 AND is_submitted = 0",
                rusqlite::params![date.to_string(), slot.as_str()],
            )
        })
    }

    /// One row per active caretaker, ordered by display name. Single query.
    pub fn attendance_sheet(&self, date: NaiveDate, slot: HalfDaySlot) -> Result<Vec<SheetRow>> {
        let user_cols = USER_COLUMNS
            .split(", ")
            .map(|c| format!("u.{c}"))
            .collect::<Vec<_>>()
            .join(", ");
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!(
                    "SELECT {user_cols}, {COLUMNS}
                     FROM users u
                     LEFT JOIN attendance a ON a.worker_id = u.id AND a.date = ?1 AND a.slot = ?2
                     WHERE u.role = 'caretaker' AND u.active = 1
                     ORDER BY u.display_name, u.id"
                ),
                rusqlite::params![date.to_string(), slot.as_str()],
                |r| {
                    let worker = user_at(r, 0)?;
                    let entry = match r.get::<_, Option<i64>>(5)? {
                        Some(_) => Some(record_at(r, 5)?),
                        None => None,
                    };
                    Ok(SheetRow { worker, entry })
                },
            )
        })
    }

    pub fn get(&self, worker: UserId, date: NaiveDate, slot: HalfDaySlot) -> Result<Option<AttendanceRecord>> {
        self.campus.store.read(|tx| load(tx, worker, &date.to_string(), slot))
    }

    pub fn all(&self) -> Result<Vec<AttendanceRecord>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!("SELECT {COLUMNS} FROM attendance a ORDER BY a.id"),
                [],
                |r| record_at(r, 0),
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::TestCampus;

    fn day() -> NaiveDate {
        NaiveDate::from_ymd_opt(2025, 3, 3).unwrap()
    }

    #[test]
    fn slot_bounds_are_fixed() {
        let (a, b) = HalfDaySlot::FirstHalf.bounds();
        assert_eq!((a.to_string(), b.to_string()), ("08:00:00".into(), "13:00:00".into()));
        let (a, b) = HalfDaySlot::SecondHalf.bounds();
        assert_eq!((a.to_string(), b.to_string()), ("13:00:00".into(), "17:00:00".into()));
    }

    #[test]
    fn overwrite_before_submit_keeps_one_row() {
        let t = TestCampus::new();
        let sup = t.actor("sup", Role::Supervisor);
        let w = t.user("w1", Role::Caretaker);
        let att = t.campus.attendance();
        att.record_attendance(w.id, day(), HalfDaySlot::FirstHalf, AttendanceStatus::Present, &sup).unwrap();
        let r = att.record_attendance(w.id, day(), HalfDaySlot::FirstHalf, AttendanceStatus::Late, &sup).unwrap();
        assert_eq!(r.status, AttendanceStatus::Late);
        assert_eq!(att.all().unwrap().len(), 1);
    }

    #[test]
    fn submission_locks_and_is_idempotent() {
        let t = TestCampus::new();
        let sup = t.actor("sup", Role::Supervisor);
        let att = t.campus.attendance();
        for i in 0..5 {
            let w = t.user(&format!("w{i}"), Role::Caretaker);
            att.record_attendance(w.id, day(), HalfDaySlot::FirstHalf, AttendanceStatus::Present, &sup).unwrap();
        }
        assert_eq!(att.submit_attendance(day(), HalfDaySlot::FirstHalf, &sup).unwrap(), 5);
        assert_eq!(att.submit_attendance(day(), HalfDaySlot::FirstHalf, &sup).unwrap(), 0);
        let w0 = t.campus.accounts().by_username("w0").unwrap();
        let before = att.get(w0.id, day(), HalfDaySlot::FirstHalf).unwrap();
        let res = att.record_attendance(w0.id, day(), HalfDaySlot::FirstHalf, AttendanceStatus::Absent, &sup);
        assert!(matches!(res, Err(Error::AlreadySubmitted)));
        assert_eq!(att.get(w0.id, day(), HalfDaySlot::FirstHalf).unwrap(), before);
        // The other slot is unaffected.
        att.record_attendance(w0.id, day(), HalfDaySlot::SecondHalf, AttendanceStatus::Absent, &sup).unwrap();
    }

    #[test]
    fn empty_submission_is_zero() {
        let t = TestCampus::new();
        let sup = t.actor("sup", Role::Supervisor);
        assert_eq!(t.campus.attendance().submit_attendance(day(), HalfDaySlot::SecondHalf, &sup).unwrap(), 0);
    }

    #[test]
    fn caretaker_cannot_record() {
        let t = TestCampus::new();
        let ct = t.actor("ct", Role::Caretaker);
        let res = t.campus.attendance().record_attendance(ct.user_id(), day(), HalfDaySlot::FirstHalf, AttendanceStatus::Present, &ct);
        assert!(matches!(res, Err(Error::Forbidden)));
        assert!(matches!(
            t.campus.attendance().submit_attendance(day(), HalfDaySlot::FirstHalf, &ct),
            Err(Error::Forbidden)
        ));
    }

    #[test]
    fn only_caretakers_have_attendance() {
        let t = TestCampus::new();
        let sup = t.actor("sup", Role::Supervisor);
        let res = t.campus.attendance().record_attendance(sup.user_id(), day(), HalfDaySlot::FirstHalf, AttendanceStatus::Present, &sup);
        assert!(matches!(res, Err(Error::WorkerRoleViolation)));
    }

    #[test]
    fn sheet_lists_every_caretaker_sorted() {
        let t = TestCampus::new();
        let sup = t.actor("sup", Role::Supervisor);
        assert!(t.campus.attendance().attendance_sheet(day(), HalfDaySlot::FirstHalf).unwrap().is_empty());
        let names = ["Meera", "Anil", "Zoya", "Bharat", "Chitra", "Dev", "Esha", "Farid", "Gita", "Hari"];
        let users: Vec<_> = names
            .iter()
            .enumerate()
            .map(|(i, n)| t.user_named(&format!("ct{i}"), n, Role::Caretaker))
            .collect();
        for u in users.iter().take(3) {
            t.campus
                .attendance()
                .record_attendance(u.id, day(), HalfDaySlot::FirstHalf, AttendanceStatus::Present, &sup)
                .unwrap();
        }
        let sheet = t.campus.attendance().attendance_sheet(day(), HalfDaySlot::FirstHalf).unwrap();
        assert_eq!(sheet.len(), 10);
        assert_eq!(sheet.iter().filter(|r| r.entry.is_none()).count(), 7);
        let got: Vec<&str> = sheet.iter().map(|r| r.worker.display_name.as_str()).collect();
        let mut sorted = names.to_vec();
        sorted.sort();
        assert_eq!(got, sorted);
    }

    #[test]
    fn storage_trigger_freezes_submitted_rows() {
        let t = TestCampus::new();
        let sup = t.actor("sup", Role::Supervisor);
        let w = t.user("w", Role::Caretaker);
        t.campus.attendance().record_attendance(w.id, day(), HalfDaySlot::FirstHalf, AttendanceStatus::Present, &sup).unwrap();
        t.campus.attendance().submit_attendance(day(), HalfDaySlot::FirstHalf, &sup).unwrap();
        let res = t.campus.store().write(|tx| tx.execute("UPDATE attendance SET is_submitted = 0", []));
        assert!(res.is_err());
        let res = t.campus.store().write(|tx| tx.execute("UPDATE attendance SET status = 'absent'", []));
        assert!(res.is_err());
    }
}
