//! Housekeeping task templates, per-date daily records, worker assignment,
//! completion evidence and supervisor flagging.
//!
//! A record moves strictly forward: `pending → assigned → completed → flagged`.
//! Every transition is a compare-and-set on the stored status, so a racing
//! or out-of-order request fails with [`Error::WrongStatus`] and changes nothing.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, FixedOffset, NaiveDate, NaiveTime, Weekday};
use serde::Serialize;

use crate::auth::{user_at, EndpointGroup, Role, Session, UserAccount, USER_COLUMNS};
use crate::clock::{format_ts, parse_ts};
use crate::error::{Error, Result};
use crate::ids::{PhotoId, RecordId, TemplateId, UserId};
use crate::photo::PhotoUpload;
use crate::store::Tx;
use crate::Campus;

pub const AREA_REGISTRY: &str = include_str!("../config/areas.txt");
pub const MAX_WORKERS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AreaType {
    pub code: String,
    pub display_name: String,
    pub multi_worker_enabled: bool,
}

/// Parses the `code|display_name|multi_worker_enabled|origin` registry format.
pub fn parse_area_registry(text: &str) -> Result<Vec<AreaType>> {
    let mut out: Vec<AreaType> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { file: "areas", line: idx + 1, message };
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let [code, name, multi, origin] = fields[..] else {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        };
        if code.is_empty() || out.iter().any(|a| a.code == code) {
            return Err(err(format!("empty or duplicate code {code:?}")));
        }
        if !matches!(origin, "named" | "placeholder") {
            return Err(err(format!("origin must be named or placeholder, got {origin:?}")));
        }
        out.push(AreaType {
            code: code.to_string(),
            display_name: name.to_string(),
            multi_worker_enabled: parse_bool(multi).ok_or_else(|| err(format!("bad boolean {multi:?}")))?,
        });
    }
    Ok(out)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Daily,
    SaturdaySpecial,
    SundayExtra,
}

impl Frequency {
    pub const ALL: [Frequency; 3] = [Frequency::Daily, Frequency::SaturdaySpecial, Frequency::SundayExtra];

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Daily => "daily",
            Frequency::SaturdaySpecial => "saturday_special",
            Frequency::SundayExtra => "sunday_extra",
        }
    }

    /// Saturday and Sunday templates run on that weekday only.
    pub fn runs_on(self, date: NaiveDate) -> bool {
        match self {
            Frequency::Daily => true,
            Frequency::SaturdaySpecial => date.weekday() == Weekday::Sat,
            Frequency::SundayExtra => date.weekday() == Weekday::Sun,
        }
    }
}

impl FromStr for Frequency {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Frequency::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown frequency {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Pending,
    Assigned,
    Completed,
    Flagged,
}

impl RecordStatus {
    pub const ALL: [RecordStatus; 4] = [
        RecordStatus::Pending,
        RecordStatus::Assigned,
        RecordStatus::Completed,
        RecordStatus::Flagged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Pending => "pending",
            RecordStatus::Assigned => "assigned",
            RecordStatus::Completed => "completed",
            RecordStatus::Flagged => "flagged",
        }
    }
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RecordStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RecordStatus::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Internal(format!("unknown record status {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gps {
    pub latitude: f64,
    pub longitude: f64,
}

impl Gps {
    pub fn new(latitude: f64, longitude: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::GpsOutOfRange);
        }
        Ok(Self { latitude, longitude })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleTemplate {
    pub id: TemplateId,
    pub name: String,
    pub area_code: String,
    pub frequency: Frequency,
    pub window_start: NaiveTime,
    pub window_end: NaiveTime,
    pub worker_tags: BTreeSet<String>,
    pub requires_photo: bool,
    pub active: bool,
}

/// A template before it is stored; also one line of the fixture format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewTemplate {
    pub name: String,
    pub area_code: String,
    pub frequency: Frequency,
    pub window_start: NaiveTime,
    pub window_end: NaiveTime,
    pub worker_tags: BTreeSet<String>,
    pub requires_photo: bool,
}

/// Parses `name|area_code|frequency|window_start|window_end|requires_photo|tags`,
/// one template per line, tags comma-separated.
pub fn parse_template_fixture(text: &str) -> Result<Vec<NewTemplate>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse { file: "templates", line: idx + 1, message };
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        let [name, area, freq, start, end, photo, tags] = fields[..] else {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        };
        if name.is_empty() || area.is_empty() {
            return Err(err("name and area_code must not be empty".into()));
        }
        let time = |s: &str| {
            NaiveTime::parse_from_str(s, "%H:%M").map_err(|_| err(format!("bad time {s:?}, expected HH:MM")))
        };
        let window_start = time(start)?;
        let window_end = time(end)?;
        if window_start >= window_end {
            return Err(err(format!("window {start}-{end} is empty")));
        }
        out.push(NewTemplate {
            name: name.to_string(),
            area_code: area.to_string(),
            frequency: freq.parse().map_err(|_| err(format!("unknown frequency {freq:?}")))?,
            window_start,
            window_end,
            worker_tags: tags
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect(),
            requires_photo: parse_bool(photo).ok_or_else(|| err(format!("bad boolean {photo:?}")))?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyRecord {
    pub id: RecordId,
    pub template_id: TemplateId,
    pub date: NaiveDate,
    pub status: RecordStatus,
    pub assigned_at: Option<DateTime<FixedOffset>>,
    pub completed_at: Option<DateTime<FixedOffset>>,
    pub photo_id: Option<PhotoId>,
    pub gps: Option<Gps>,
    pub flag_reason: Option<String>,
    pub flagged_by: Option<UserId>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkerAssignment {
    pub record: RecordId,
    pub workers: Vec<UserId>,
}

/// A daily record with everything needed to render its card.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskCard {
    pub record: DailyRecord,
    pub template: ScheduleTemplate,
    pub area: AreaType,
    pub workers: Vec<UserAccount>,
}

const TEMPLATE_COLUMNS: &str =
    "t.id, t.name, t.area_code, t.frequency, t.window_start, t.window_end, t.worker_tags, t.requires_photo, t.active";
const RECORD_COLUMNS: &str =
    "r.id, r.template_id, r.date, r.status, r.assigned_at, r.completed_at, r.photo_id, r.lat, r.lng, r.flag_reason, r.flagged_by";

fn conversion<E: std::error::Error + Send + Sync + 'static>(idx: usize, e: E) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e))
}

fn text_error(msg: String) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg)
}

fn template_from_row(r: &rusqlite::Row<'_>, o: usize) -> rusqlite::Result<ScheduleTemplate> {
    let freq: String = r.get(o + 3)?;
    let time = |i: usize| -> rusqlite::Result<NaiveTime> {
        let s: String = r.get(o + i)?;
        NaiveTime::parse_from_str(&s, "%H:%M").map_err(|e| conversion(o + i, e))
    };
    let tags: String = r.get(o + 6)?;
    Ok(ScheduleTemplate {
        id: r.get(o)?,
        name: r.get(o + 1)?,
        area_code: r.get(o + 2)?,
        frequency: freq.parse().map_err(|_| conversion(o + 3, text_error(freq)))?,
        window_start: time(4)?,
        window_end: time(5)?,
        worker_tags: tags.split(',').filter(|t| !t.is_empty()).map(String::from).collect(),
        requires_photo: r.get(o + 7)?,
        active: r.get(o + 8)?,
    })
}

fn opt_ts(r: &rusqlite::Row<'_>, idx: usize) -> rusqlite::Result<Option<DateTime<FixedOffset>>> {
    r.get::<_, Option<String>>(idx)?
        .map(|s| parse_ts(&s).map_err(|e| conversion(idx, e)))
        .transpose()
}

fn record_from_row(r: &rusqlite::Row<'_>, o: usize) -> rusqlite::Result<DailyRecord> {
    let date: String = r.get(o + 2)?;
    let status: String = r.get(o + 3)?;
    let lat: Option<f64> = r.get(o + 7)?;
    let lng: Option<f64> = r.get(o + 8)?;
    Ok(DailyRecord {
        id: r.get(o)?,
        template_id: r.get(o + 1)?,
        date: date.parse().map_err(|e| conversion(o + 2, e))?,
        status: status.parse().map_err(|_| conversion(o + 3, text_error(status)))?,
        assigned_at: opt_ts(r, o + 4)?,
        completed_at: opt_ts(r, o + 5)?,
        photo_id: r.get(o + 6)?,
        gps: lat.zip(lng).map(|(latitude, longitude)| Gps { latitude, longitude }),
        flag_reason: r.get(o + 9)?,
        flagged_by: r.get(o + 10)?,
    })
}

fn area_from_row(r: &rusqlite::Row<'_>, o: usize) -> rusqlite::Result<AreaType> {
    Ok(AreaType {
        code: r.get(o)?,
        display_name: r.get(o + 1)?,
        multi_worker_enabled: r.get(o + 2)?,
    })
}

fn load_record(tx: &Tx<'_>, id: RecordId) -> Result<DailyRecord> {
    tx.query_opt(
        &format!("SELECT {RECORD_COLUMNS} FROM daily_records r WHERE r.id = ?1"),
        [id],
        |r| record_from_row(r, 0),
    )?
    .ok_or(Error::NotFound)
}

fn materialize(tx: &Tx<'_>, date: NaiveDate) -> Result<usize> {
    let day = date.to_string();
    let frequencies: Vec<&str> = Frequency::ALL
        .into_iter()
        .filter(|f| f.runs_on(date))
        .map(Frequency::as_str)
        .collect();
    let placeholders = vec!["?"; frequencies.len()].join(", ");
    let mut params: Vec<&dyn rusqlite::ToSql> = vec![&day];
    params.extend(frequencies.iter().map(|f| f as &dyn rusqlite::ToSql));
    tx.execute(
        &format!(
            "INSERT OR IGNORE INTO daily_records (template_id, date, status)
             SELECT id, ?1, 'pending' FROM templates WHERE active = 1 AND frequency IN ({placeholders})"
        ),
        params.as_slice(),
    )
}

/// Filter applied to task listings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaskFilter {
    pub date: Option<NaiveDate>,
    pub area: Option<String>,
    pub record: Option<RecordId>,
}

pub struct Scheduling<'a> {
    pub(crate) campus: &'a Campus,
}

impl Scheduling<'_> {
    pub(crate) fn ensure_area_registry(&self) -> Result<()> {
        let areas = parse_area_registry(AREA_REGISTRY)?;
        self.campus.store.write(|tx| {
            for (pos, a) in areas.iter().enumerate() {
                tx.execute(
                    "INSERT OR IGNORE INTO areas (code, display_name, multi_worker_enabled, position) VALUES (?1, ?2, ?3, ?4)",
                    rusqlite::params![a.code, a.display_name, a.multi_worker_enabled, pos as i64],
                )?;
            }
            Ok(())
        })
    }

    pub fn areas(&self) -> Result<Vec<AreaType>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                "SELECT code, display_name, multi_worker_enabled FROM areas ORDER BY position",
                [],
                |r| area_from_row(r, 0),
            )
        })
    }

    pub fn create_template(&self, t: &NewTemplate) -> Result<ScheduleTemplate> {
        if t.window_start >= t.window_end {
            return Err(Error::Invalid("window_start must precede window_end".into()));
        }
        if t.worker_tags.iter().any(|tag| tag.contains(',')) {
            return Err(Error::Invalid("worker tags may not contain commas".into()));
        }
        let tags = t.worker_tags.iter().cloned().collect::<Vec<_>>().join(",");
        self.campus.store.write(|tx| {
            let known = tx
                .query_opt("SELECT 1 FROM areas WHERE code = ?1", [&t.area_code], |_| Ok(()))?
                .is_some();
            if !known {
                return Err(Error::Invalid(format!("unknown area {:?}", t.area_code)));
            }
            tx.execute(
                "INSERT INTO templates (name, area_code, frequency, window_start, window_end, worker_tags, requires_photo, active)
                 VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, 1)",
                rusqlite::params![
                    t.name,
                    t.area_code,
                    t.frequency.as_str(),
                    t.window_start.format("%H:%M").to_string(),
                    t.window_end.format("%H:%M").to_string(),
                    tags,
                    t.requires_photo,
                ],
            )?;
            Ok(ScheduleTemplate {
                id: TemplateId(tx.last_insert_rowid()),
                name: t.name.clone(),
                area_code: t.area_code.clone(),
                frequency: t.frequency,
                window_start: t.window_start,
                window_end: t.window_end,
                worker_tags: t.worker_tags.clone(),
                requires_photo: t.requires_photo,
                active: true,
            })
        })
    }

    /// Creates every template in a fixture file.
    pub fn load_template_fixture(&self, text: &str) -> Result<Vec<ScheduleTemplate>> {
        parse_template_fixture(text)?
            .iter()
            .map(|t| self.create_template(t))
            .collect()
    }

    pub fn set_template_active(&self, id: TemplateId, active: bool) -> Result<()> {
        self.campus.store.write(|tx| {
            match tx.execute("UPDATE templates SET active = ?1 WHERE id = ?2", rusqlite::params![active, id])? {
                0 => Err(Error::NotFound),
                _ => Ok(()),
            }
        })
    }

    pub fn templates(&self) -> Result<Vec<ScheduleTemplate>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!("SELECT {TEMPLATE_COLUMNS} FROM templates t ORDER BY t.id"),
                [],
                |r| template_from_row(r, 0),
            )
        })
    }

    /// Materializes a pending record for every active template that runs on
    /// `date` and returns all records for that date. Safe to call repeatedly
    /// and concurrently; the `(template, date)` unique key absorbs duplicates.
    pub fn instantiate_daily_records(&self, date: NaiveDate) -> Result<Vec<DailyRecord>> {
        let day = date.to_string();
        self.campus.store.write(|tx| {
            materialize(tx, date)?;
            tx.query_all(
                &format!("SELECT {RECORD_COLUMNS} FROM daily_records r WHERE r.date = ?1 ORDER BY r.id"),
                [&day],
                |r| record_from_row(r, 0),
            )
        })
    }

    /// Like [`Self::instantiate_daily_records`] but returns only how many
    /// records were created; one statement.
    pub fn ensure_daily_records(&self, date: NaiveDate) -> Result<usize> {
        self.campus.store.write(|tx| materialize(tx, date))
    }

    pub fn record(&self, id: RecordId) -> Result<DailyRecord> {
        self.campus.store.read(|tx| load_record(tx, id))
    }

    pub fn all_records(&self) -> Result<Vec<DailyRecord>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!("SELECT {RECORD_COLUMNS} FROM daily_records r ORDER BY r.id"),
                [],
                |r| record_from_row(r, 0),
            )
        })
    }

    pub fn assignment(&self, id: RecordId) -> Result<WorkerAssignment> {
        self.campus.store.read(|tx| {
            load_record(tx, id)?;
            let workers = tx.query_all(
                "SELECT worker_id FROM worker_assignments WHERE record_id = ?1 ORDER BY position",
                [id],
                |r| r.get(0),
            )?;
            Ok(WorkerAssignment { record: id, workers })
        })
    }

    pub fn assign_workers(&self, id: RecordId, workers: &[UserId], actor: &Session) -> Result<WorkerAssignment> {
        self.campus.require(actor, EndpointGroup::HousekeepingAssign)?;
        let distinct: BTreeSet<UserId> = workers.iter().copied().collect();
        if workers.is_empty() || workers.len() > MAX_WORKERS || distinct.len() != workers.len() {
            return Err(Error::InvalidWorkerCount);
        }
        let now = self.campus.clock.now();
        self.campus.store.write(|tx| {
            let (status, multi): (String, bool) = tx
                .query_opt(
                    "SELECT r.status, a.multi_worker_enabled
                     FROM daily_records r JOIN templates t ON t.id = r.template_id JOIN areas a ON a.code = t.area_code
                     WHERE r.id = ?1",
                    [id],
                    |r| Ok((r.get(0)?, r.get(1)?)),
                )?
                .ok_or(Error::NotFound)?;
            if status != RecordStatus::Pending.as_str() {
                return Err(Error::WrongStatus);
            }
            if workers.len() > 1 && !multi {
                return Err(Error::MultiWorkerNotAllowed);
            }
            let placeholders = vec!["?"; workers.len()].join(", ");
            let params: Vec<&dyn rusqlite::ToSql> = workers.iter().map(|w| w as &dyn rusqlite::ToSql).collect();
            let eligible: i64 = tx.query_row(
                &format!(
                    "SELECT COUNT(*) FROM users WHERE id IN ({placeholders}) AND role = 'caretaker' AND active = 1"
                ),
                params.as_slice(),
                |r| r.get(0),
            )?;
            if eligible as usize != workers.len() {
                return Err(Error::WorkerRoleViolation);
            }
            let changed = tx.execute(
                "UPDATE daily_records SET status = 'assigned', assigned_at = ?1 WHERE id = ?2 AND status = 'pending'",
                rusqlite::params![format_ts(&now), id],
            )?;
            if changed == 0 {
                return Err(Error::WrongStatus);
            }
            for (pos, w) in workers.iter().enumerate() {
                tx.execute(
                    "INSERT INTO worker_assignments (record_id, position, worker_id) VALUES (?1, ?2, ?3)",
                    rusqlite::params![id, pos as i64, w],
                )?;
            }
            Ok(WorkerAssignment {
                record: id,
                workers: workers.to_vec(),
            })
        })
    }

    /// Marks an assigned record completed, ingesting the photo first when one
    /// is supplied. Caretakers may only complete records they are assigned to.
    pub fn complete_task(
        &self,
        id: RecordId,
        photo: Option<&PhotoUpload>,
        gps: Option<Gps>,
        actor: &Session,
    ) -> Result<DailyRecord> {
        self.campus.require(actor, EndpointGroup::HousekeepingComplete)?;
        let (record, requires_photo, workers) = self.campus.store.read(|tx| {
            let record = load_record(tx, id)?;
            let requires_photo: bool = tx.query_row(
                "SELECT requires_photo FROM templates WHERE id = ?1",
                [record.template_id],
                |r| r.get(0),
            )?;
            let workers: Vec<UserId> = tx.query_all(
                "SELECT worker_id FROM worker_assignments WHERE record_id = ?1",
                [id],
                |r| r.get(0),
            )?;
            Ok((record, requires_photo, workers))
        })?;
        if record.status != RecordStatus::Assigned {
            return Err(Error::WrongStatus);
        }
        if actor.role() == Role::Caretaker && !workers.contains(&actor.user_id()) {
            return Err(Error::Forbidden);
        }
        let gps = gps.map(|g| Gps::new(g.latitude, g.longitude)).transpose()?;
        if requires_photo && photo.is_none() {
            return Err(Error::PhotoRequired);
        }
        let photo_id = match photo {
            Some(upload) => Some(self.campus.photos().ingest(upload, actor)?.id),
            None => None,
        };
        let now = self.campus.clock.now();
        self.campus.store.write(|tx| {
            let changed = tx.execute(
                "UPDATE daily_records SET status = 'completed', completed_at = ?1, photo_id = ?2, lat = ?3, lng = ?4
                 WHERE id = ?5 AND status = 'assigned'",
                rusqlite::params![
                    format_ts(&now),
                    photo_id,
                    gps.map(|g| g.latitude),
                    gps.map(|g| g.longitude),
                    id
                ],
            )?;
            if changed == 0 {
                return Err(Error::WrongStatus);
            }
            load_record(tx, id)
        })
    }

    pub fn flag_record(&self, id: RecordId, reason: &str, actor: &Session) -> Result<DailyRecord> {
        self.campus.require(actor, EndpointGroup::HousekeepingFlag)?;
        let reason = reason.trim();
        if reason.is_empty() {
            return Err(Error::EmptyReason);
        }
        self.campus.store.write(|tx| {
            let changed = tx.execute(
                "UPDATE daily_records SET status = 'flagged', flag_reason = ?1, flagged_by = ?2
                 WHERE id = ?3 AND status = 'completed'",
                rusqlite::params![reason, actor.user_id(), id],
            )?;
            if changed == 0 {
                load_record(tx, id)?;
                return Err(Error::WrongStatus);
            }
            load_record(tx, id)
        })
    }

    /// Task cards matching `filter`, ordered by area then window start.
    /// Runs a fixed number of queries regardless of how many records match.
    pub fn task_cards(&self, filter: &TaskFilter) -> Result<Vec<TaskCard>> {
        let date = filter.date.map(|d| d.to_string());
        self.campus.store.read(|tx| {
            let rows = tx.query_all(
                &format!(
                    "SELECT {RECORD_COLUMNS}, {TEMPLATE_COLUMNS}, a.code, a.display_name, a.multi_worker_enabled
                     FROM daily_records r
                     JOIN templates t ON t.id = r.template_id
                     JOIN areas a ON a.code = t.area_code
                     WHERE (?1 IS NULL OR r.date = ?1) AND (?2 IS NULL OR a.code = ?2) AND (?3 IS NULL OR r.id = ?3)
                     ORDER BY a.position, t.window_start, t.name, r.id"
                ),
                rusqlite::params![date, filter.area, filter.record],
                |r| Ok((record_from_row(r, 0)?, template_from_row(r, 11)?, area_from_row(r, 20)?)),
            )?;
            let mut workers: HashMap<RecordId, Vec<UserAccount>> = HashMap::new();
            let assigned = tx.query_all(
                &format!(
                    "SELECT w.record_id, {cols}
                     FROM worker_assignments w
                     JOIN daily_records r ON r.id = w.record_id
                     JOIN templates t ON t.id = r.template_id
                     JOIN users u ON u.id = w.worker_id
                     WHERE (?1 IS NULL OR r.date = ?1) AND (?2 IS NULL OR t.area_code = ?2) AND (?3 IS NULL OR r.id = ?3)
                     ORDER BY w.record_id, w.position",
                    cols = USER_COLUMNS.split(", ").map(|c| format!("u.{c}")).collect::<Vec<_>>().join(", ")
                ),
                rusqlite::params![date, filter.area, filter.record],
                |r| {
                    let rid: RecordId = r.get(0)?;
                    let user = user_at(r, 1)?;
                    Ok((rid, user))
                },
            )?;
            for (rid, user) in assigned {
                workers.entry(rid).or_default().push(user);
            }
            Ok(rows
                .into_iter()
                .map(|(record, template, area)| TaskCard {
                    workers: workers.remove(&record.id).unwrap_or_default(),
                    record,
                    template,
                    area,
                })
                .collect())
        })
    }

    pub fn task_card(&self, id: RecordId) -> Result<TaskCard> {
        self.task_cards(&TaskFilter {
            record: Some(id),
            ..TaskFilter::default()
        })?
        .pop()
        .ok_or(Error::NotFound)
    }
}
