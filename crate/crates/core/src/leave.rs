//! Leave requests: a five-state machine with incharge coverage, in-app
//! notifications and an append-only transition log.
//!
//! ```text
//! awaiting ──assign──▶ pending_accept ──accept──▶ pending_admin ──approve──▶ approved
//!                        │      ▲                      │
//!                     decline  assign                reject
//!                        ▼      │                      │
//!                     reassign_required ◀──────────────┘
//! ```
//!
//! `approved` is terminal. An admin rejection re-enters the reassignment
//! loop rather than introducing a separate rejected state.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate};
use serde::Serialize;
use uuid::Uuid;

use crate::auth::{load_user, user_at, EndpointGroup, Role, Session, UserAccount, USER_COLUMNS};
use crate::clock::{format_ts, parse_ts};
use crate::error::{Error, Result};
use crate::ids::{LeaveId, NotificationId, UserId};
use crate::store::Tx;
use crate::Campus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaveState {
    Awaiting,
    PendingAccept,
    PendingAdmin,
    Approved,
    ReassignRequired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaveEvent {
    AssignIncharge,
    Accept,
    Decline,
    Approve,
    Reject,
}

impl LeaveEvent {
    pub const ALL: [LeaveEvent; 5] = [
        LeaveEvent::AssignIncharge,
        LeaveEvent::Accept,
        LeaveEvent::Decline,
        LeaveEvent::Approve,
        LeaveEvent::Reject,
    ];
}

impl LeaveState {
    pub const ALL: [LeaveState; 5] = [
        LeaveState::Awaiting,
        LeaveState::PendingAccept,
        LeaveState::PendingAdmin,
        LeaveState::Approved,
        LeaveState::ReassignRequired,
    ];

    /// The transition table. `None` means the event is illegal in this state.
    pub fn on(self, event: LeaveEvent) -> Option<LeaveState> {
        use LeaveEvent::*;
        use LeaveState::*;
        match (self, event) {
            (Awaiting | ReassignRequired, AssignIncharge) => Some(PendingAccept),
            (PendingAccept, Accept) => Some(PendingAdmin),
            (PendingAccept, Decline) => Some(ReassignRequired),
            (PendingAdmin, Approve) => Some(Approved),
            (PendingAdmin, Reject) => Some(ReassignRequired),
            _ => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        LeaveEvent::ALL.iter().all(|e| self.on(*e).is_none())
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LeaveState::Awaiting => "awaiting",
            LeaveState::PendingAccept => "pending_accept",
            LeaveState::PendingAdmin => "pending_admin",
            LeaveState::Approved => "approved",
            LeaveState::ReassignRequired => "reassign_required",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LeaveState::Awaiting => "Awaiting incharge",
            LeaveState::PendingAccept => "Waiting for incharge",
            LeaveState::PendingAdmin => "Waiting for admin",
            LeaveState::Approved => "Approved",
            LeaveState::ReassignRequired => "Needs new incharge",
        }
    }
}

impl fmt::Display for LeaveState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LeaveState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        LeaveState::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Internal(format!("unknown leave state {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    /// `None` only for the creation entry.
    pub from: Option<LeaveState>,
    pub to: LeaveState,
    pub actor: UserId,
    pub at: DateTime<FixedOffset>,
}

/// Folds a transition log from creation; fails if any entry does not
/// continue from the state the previous one left.
pub fn replay(log: &[Transition]) -> Result<LeaveState> {
    let mut iter = log.iter();
    let first = iter.next().ok_or_else(|| Error::Internal("empty transition log".into()))?;
    if first.from.is_some() || first.to != LeaveState::Awaiting {
        return Err(Error::Internal("log does not start with creation".into()));
    }
    let mut state = first.to;
    for t in iter {
        if t.from != Some(state) {
            return Err(Error::Internal(format!("log jumps from {state} via {:?}", t.from)));
        }
        let legal = LeaveEvent::ALL.iter().any(|e| state.on(*e) == Some(t.to));
        if !legal {
            return Err(Error::Internal(format!("illegal edge {state} -> {}", t.to)));
        }
        state = t.to;
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeaveRequest {
    pub id: LeaveId,
    pub requester: UserAccount,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub reason: String,
    pub state: LeaveState,
    pub created_at: DateTime<FixedOffset>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InchargeResponse {
    Pending,
    Accepted,
    Declined,
}

impl InchargeResponse {
    pub fn as_str(self) -> &'static str {
        match self {
            InchargeResponse::Pending => "pending",
            InchargeResponse::Accepted => "accepted",
            InchargeResponse::Declined => "declined",
        }
    }
}

impl FromStr for InchargeResponse {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pending" => Ok(InchargeResponse::Pending),
            "accepted" => Ok(InchargeResponse::Accepted),
            "declined" => Ok(InchargeResponse::Declined),
            _ => Err(Error::Internal(format!("unknown response {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InchargeAssignment {
    pub id: Uuid,
    pub leave: LeaveId,
    pub incharge: UserId,
    pub response: InchargeResponse,
    pub created_at: DateTime<FixedOffset>,
    pub responded_at: Option<DateTime<FixedOffset>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Notification {
    pub id: NotificationId,
    pub recipient: UserId,
    pub leave: LeaveId,
    pub message: String,
    pub created_at: DateTime<FixedOffset>,
    pub read: bool,
}

/// A pending assignment together with the request it covers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InboxItem {
    pub assignment: InchargeAssignment,
    pub request: LeaveRequest,
}

fn bad<E: std::error::Error + Send + Sync + 'static>(idx: usize, e: E) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e))
}

fn ts_at(r: &rusqlite::Row<'_>, idx: usize) -> rusqlite::Result<DateTime<FixedOffset>> {
    let s: String = r.get(idx)?;
    parse_ts(&s).map_err(|e| bad(idx, e))
}

fn state_at(r: &rusqlite::Row<'_>, idx: usize) -> rusqlite::Result<LeaveState> {
    let s: String = r.get(idx)?;
    s.parse().map_err(|e| bad(idx, e))
}

fn user_cols(alias: &str) -> String {
    USER_COLUMNS
        .split(", ")
        .map(|c| format!("{alias}.{c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Loads requests matching `where_sql` (which may reference `l` and `u`),
/// with their transition logs, in two queries.
fn load_requests(tx: &Tx<'_>, where_sql: &str, params: &[&dyn rusqlite::ToSql]) -> Result<Vec<LeaveRequest>> {
    let mut requests = tx.query_all(
        &format!(
            "SELECT l.id, l.start_date, l.end_date, l.reason, l.state, l.created_at, {}
             FROM leave_requests l JOIN users u ON u.id = l.requester_id
             WHERE {where_sql} ORDER BY l.created_at DESC, l.id DESC",
            user_cols("u")
        ),
        params,
        |r| {
            let start: String = r.get(1)?;
            let end: String = r.get(2)?;
            Ok(LeaveRequest {
                id: r.get(0)?,
                start_date: start.parse().map_err(|e| bad(1, e))?,
                end_date: end.parse().map_err(|e| bad(2, e))?,
                reason: r.get(3)?,
                state: state_at(r, 4)?,
                created_at: ts_at(r, 5)?,
                requester: user_at(r, 6)?,
                transitions: Vec::new(),
            })
        },
    )?;
    if requests.is_empty() {
        return Ok(requests);
    }
    let mut logs: HashMap<LeaveId, Vec<Transition>> = HashMap::new();
    let rows = tx.query_all(
        &format!(
            "SELECT t.leave_id, t.from_state, t.to_state, t.actor_id, t.at
             FROM leave_transitions t
             WHERE t.leave_id IN (SELECT l.id FROM leave_requests l JOIN users u ON u.id = l.requester_id WHERE {where_sql})
             ORDER BY t.leave_id, t.id"
        ),
        params,
        |r| {
            let from: Option<String> = r.get(1)?;
            Ok((
                r.get::<_, LeaveId>(0)?,
                Transition {
                    from: from.map(|s| s.parse().map_err(|e| bad(1, e))).transpose()?,
                    to: state_at(r, 2)?,
                    actor: r.get(3)?,
                    at: ts_at(r, 4)?,
                },
            ))
        },
    )?;
    for (id, t) in rows {
        logs.entry(id).or_default().push(t);
    }
    for req in &mut requests {
        req.transitions = logs.remove(&req.id).unwrap_or_default();
    }
    Ok(requests)
}

fn load_request(tx: &Tx<'_>, id: LeaveId) -> Result<LeaveRequest> {
    load_requests(tx, "l.id = ?1", &[&id])?.pop().ok_or(Error::NotFound)
}

const ASSIGNMENT_COLUMNS: &str = "a.id, a.leave_id, a.incharge_id, a.response, a.created_at, a.responded_at";

fn assignment_at(r: &rusqlite::Row<'_>, o: usize) -> rusqlite::Result<InchargeAssignment> {
    let id: String = r.get(o)?;
    let response: String = r.get(o + 3)?;
    let responded: Option<String> = r.get(o + 5)?;
    Ok(InchargeAssignment {
        id: id.parse().map_err(|e| bad(o, e))?,
        leave: r.get(o + 1)?,
        incharge: r.get(o + 2)?,
        response: response.parse().map_err(|e| bad(o + 3, e))?,
        created_at: ts_at(r, o + 4)?,
        responded_at: responded.map(|s| parse_ts(&s).map_err(|e| bad(o + 5, e))).transpose()?,
    })
}

fn load_assignment(tx: &Tx<'_>, id: Uuid) -> Result<InchargeAssignment> {
    tx.query_opt(
        &format!("SELECT {ASSIGNMENT_COLUMNS} FROM incharge_assignments a WHERE a.id = ?1"),
        [id.to_string()],
        |r| assignment_at(r, 0),
    )?
    .ok_or(Error::NotFound)
}

struct Writer<'t, 'c> {
    tx: &'t Tx<'c>,
    now: String,
}

impl Writer<'_, '_> {
    /// Applies `event` as a compare-and-set on the stored state and logs it.
    fn transition(&self, leave: LeaveId, event: LeaveEvent, actor: UserId) -> Result<LeaveState> {
        let current: LeaveState = self
            .tx
            .query_opt("SELECT state FROM leave_requests WHERE id = ?1", [leave], |r| state_at(r, 0))?
            .ok_or(Error::NotFound)?;
        let next = current.on(event).ok_or(Error::WrongState)?;
        let changed = self.tx.execute(
            "UPDATE leave_requests SET state = ?1 WHERE id = ?2 AND state = ?3",
            rusqlite::params![next.as_str(), leave, current.as_str()],
        )?;
        if changed == 0 {
            return Err(Error::WrongState);
        }
        self.log(leave, Some(current), next, actor)?;
        Ok(next)
    }

    fn log(&self, leave: LeaveId, from: Option<LeaveState>, to: LeaveState, actor: UserId) -> Result<()> {
        self.tx.execute(
            "INSERT INTO leave_transitions (leave_id, from_state, to_state, actor_id, at) VALUES (?1, ?2, ?3, ?4, ?5)",
            rusqlite::params![leave, from.map(LeaveState::as_str), to.as_str(), actor, self.now],
        )?;
        Ok(())
    }

    fn notify(&self, recipients: &[UserId], leave: LeaveId, message: &str) -> Result<()> {
        for r in recipients {
            self.tx.execute(
                "INSERT INTO notifications (recipient_id, leave_id, message, created_at, read) VALUES (?1, ?2, ?3, ?4, 0)",
                rusqlite::params![r, leave, message, self.now],
            )?;
        }
        Ok(())
    }

    fn managers(&self) -> Result<Vec<UserId>> {
        self.tx.query_all(
            "SELECT id FROM users WHERE role = 'housekeeping_manager' AND active = 1 ORDER BY id",
            [],
            |r| r.get(0),
        )
    }
}

fn period(req: &LeaveRequest) -> String {
    if req.start_date == req.end_date {
        req.start_date.format("%d %b %Y").to_string()
    } else {
        format!("{} to {}", req.start_date.format("%d %b"), req.end_date.format("%d %b %Y"))
    }
}

pub struct Leave<'a> {
    pub(crate) campus: &'a Campus,
}

impl Leave<'_> {
    fn writer<T>(&self, f: impl FnOnce(&Writer<'_, '_>) -> Result<T>) -> Result<T> {
        let now = format_ts(&self.campus.clock.now());
        self.campus.store.write(|tx| f(&Writer { tx, now }))
    }

    pub fn create_leave_request(
        &self,
        requester: &Session,
        start_date: NaiveDate,
        end_date: NaiveDate,
        reason: &str,
    ) -> Result<LeaveRequest> {
        self.campus.require(requester, EndpointGroup::LeaveRequest)?;
        if start_date > end_date {
            return Err(Error::InvalidRange);
        }
        let reason = reason.trim();
        if reason.is_empty() {
            return Err(Error::EmptyReason);
        }
        let who = requester.user_id();
        self.writer(|w| {
            w.tx.execute(
                "INSERT INTO leave_requests (requester_id, start_date, end_date, reason, state, created_at)
                 VALUES (?1, ?2, ?3, ?4, 'awaiting', ?5)",
                rusqlite::params![who, start_date.to_string(), end_date.to_string(), reason, w.now],
            )?;
            let id = LeaveId(w.tx.last_insert_rowid());
            w.log(id, None, LeaveState::Awaiting, who)?;
            let req = load_request(w.tx, id)?;
            w.notify(&[who], id, &format!("Your leave request for {} was submitted.", period(&req)))?;
            let managers: Vec<UserId> = w.managers()?.into_iter().filter(|m| *m != who).collect();
            w.notify(
                &managers,
                id,
                &format!("{} requested leave for {}; an incharge is needed.", req.requester.display_name, period(&req)),
            )?;
            Ok(req)
        })
    }

    pub fn assign_incharge(&self, leave: LeaveId, incharge: UserId, actor: &Session) -> Result<InchargeAssignment> {
        self.campus.require(actor, EndpointGroup::LeaveAssign)?;
        self.writer(|w| {
            let req = load_request(w.tx, leave)?;
            if req.state.on(LeaveEvent::AssignIncharge).is_none() {
                return Err(Error::WrongState);
            }
            if incharge == req.requester.id {
                return Err(Error::SelfAssignment);
            }
            let cover = load_user(w.tx, incharge)?;
            if !cover.active || !matches!(cover.role, Role::Caretaker | Role::Supervisor) {
                return Err(Error::IneligibleIncharge);
            }
            w.transition(leave, LeaveEvent::AssignIncharge, actor.user_id())?;
            let id = Uuid::new_v4();
            w.tx.execute(
                "INSERT INTO incharge_assignments (id, leave_id, incharge_id, response, created_at) VALUES (?1, ?2, ?3, 'pending', ?4)",
                rusqlite::params![id.to_string(), leave, incharge, w.now],
            )?;
            w.notify(
                &[incharge],
                leave,
                &format!("{} asked you to cover their leave for {}.", req.requester.display_name, period(&req)),
            )?;
            load_assignment(w.tx, id)
        })
    }

    pub fn incharge_respond(&self, assignment: Uuid, accept: bool, actor: &Session) -> Result<LeaveRequest> {
        self.campus.require(actor, EndpointGroup::LeaveRespond)?;
        self.writer(|w| {
            let a = load_assignment(w.tx, assignment)?;
            if a.incharge != actor.user_id() {
                return Err(Error::NotTheIncharge);
            }
            if a.response != InchargeResponse::Pending {
                return Err(Error::AlreadyResponded);
            }
            let response = if accept { InchargeResponse::Accepted } else { InchargeResponse::Declined };
            let changed = w.tx.execute(
                "UPDATE incharge_assignments SET response = ?1, responded_at = ?2 WHERE id = ?3 AND response = 'pending'",
                rusqlite::params![response.as_str(), w.now, assignment.to_string()],
            )?;
            if changed == 0 {
                return Err(Error::AlreadyResponded);
            }
            let event = if accept { LeaveEvent::Accept } else { LeaveEvent::Decline };
            w.transition(a.leave, event, actor.user_id())?;
            let req = load_request(w.tx, a.leave)?;
            let who = &actor.user.display_name;
            let (to_requester, to_managers) = if accept {
                (
                    format!("{who} accepted covering your leave for {}; it now awaits admin approval.", period(&req)),
                    format!("{who} accepted cover for {}'s leave.", req.requester.display_name),
                )
            } else {
                (
                    format!("{who} declined covering your leave for {}; a new incharge will be assigned.", period(&req)),
                    format!("{who} declined cover for {}'s leave; reassignment required.", req.requester.display_name),
                )
            };
            w.notify(&[req.requester.id], a.leave, &to_requester)?;
            let managers: Vec<UserId> = w.managers()?.into_iter().filter(|m| *m != req.requester.id).collect();
            w.notify(&managers, a.leave, &to_managers)?;
            Ok(req)
        })
    }

    /// Approve ends the workflow; reject sends the request back for a new incharge.
    pub fn admin_decide(&self, leave: LeaveId, approve: bool, actor: &Session) -> Result<LeaveRequest> {
        self.campus.require(actor, EndpointGroup::LeaveDecide)?;
        self.writer(|w| {
            let event = if approve { LeaveEvent::Approve } else { LeaveEvent::Reject };
            w.transition(leave, event, actor.user_id())?;
            let req = load_request(w.tx, leave)?;
            let incharge: Option<UserId> = w.tx.query_opt(
                "SELECT incharge_id FROM incharge_assignments WHERE leave_id = ?1 AND response = 'accepted'
                 ORDER BY responded_at DESC LIMIT 1",
                [leave],
                |r| r.get(0),
            )?;
            let (to_requester, to_incharge) = if approve {
                (
                    format!("Your leave for {} was approved.", period(&req)),
                    format!("{}'s leave for {} was approved; you are covering.", req.requester.display_name, period(&req)),
                )
            } else {
                (
                    format!("Your leave for {} was sent back for reassignment.", period(&req)),
                    format!("{}'s leave for {} was sent back; your cover is released.", req.requester.display_name, period(&req)),
                )
            };
            w.notify(&[req.requester.id], leave, &to_requester)?;
            if let Some(incharge) = incharge {
                w.notify(&[incharge], leave, &to_incharge)?;
            }
            Ok(req)
        })
    }

    pub fn get(&self, id: LeaveId) -> Result<LeaveRequest> {
        self.campus.store.read(|tx| load_request(tx, id))
    }

    pub fn assignment(&self, id: Uuid) -> Result<InchargeAssignment> {
        self.campus.store.read(|tx| load_assignment(tx, id))
    }

    pub fn assignments_for(&self, leave: LeaveId) -> Result<Vec<InchargeAssignment>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!("SELECT {ASSIGNMENT_COLUMNS} FROM incharge_assignments a WHERE a.leave_id = ?1 ORDER BY a.created_at, a.rowid"),
                [leave],
                |r| assignment_at(r, 0),
            )
        })
    }

    pub fn all_assignment_ids(&self) -> Result<Vec<Uuid>> {
        self.campus.store.read(|tx| {
            tx.query_all("SELECT id FROM incharge_assignments ORDER BY rowid", [], |r| {
                let s: String = r.get(0)?;
                s.parse().map_err(|e| bad(0, e))
            })
        })
    }

    pub fn my_requests(&self, actor: &Session) -> Result<Vec<LeaveRequest>> {
        self.campus.store.read(|tx| load_requests(tx, "l.requester_id = ?1", &[&actor.user_id()]))
    }

    /// Requests waiting on a manager (incharge needed) or on an admin decision.
    pub fn queue(&self, actor: &Session) -> Result<Vec<LeaveRequest>> {
        let states: &[LeaveState] = match (
            self.campus.perms.allows(actor.role(), EndpointGroup::LeaveAssign),
            self.campus.perms.allows(actor.role(), EndpointGroup::LeaveDecide),
        ) {
            (true, true) => &[LeaveState::Awaiting, LeaveState::ReassignRequired, LeaveState::PendingAdmin],
            (true, false) => &[LeaveState::Awaiting, LeaveState::ReassignRequired],
            (false, true) => &[LeaveState::PendingAdmin],
            (false, false) => return Err(Error::Forbidden),
        };
        let list = states.iter().map(|s| format!("'{}'", s.as_str())).collect::<Vec<_>>().join(", ");
        self.campus
            .store
            .read(|tx| load_requests(tx, &format!("l.state IN ({list})"), &[]))
    }

    /// Pending assignments addressed to `actor`.
    pub fn inbox(&self, actor: &Session) -> Result<Vec<InboxItem>> {
        self.campus.store.read(|tx| {
            let assignments = tx.query_all(
                &format!(
                    "SELECT {ASSIGNMENT_COLUMNS} FROM incharge_assignments a
                     WHERE a.incharge_id = ?1 AND a.response = 'pending' ORDER BY a.created_at DESC"
                ),
                [actor.user_id()],
                |r| assignment_at(r, 0),
            )?;
            let mut requests: HashMap<LeaveId, LeaveRequest> = load_requests(
                tx,
                "l.id IN (SELECT leave_id FROM incharge_assignments WHERE incharge_id = ?1 AND response = 'pending')",
                &[&actor.user_id()],
            )?
            .into_iter()
            .map(|r| (r.id, r))
            .collect();
            Ok(assignments
                .into_iter()
                .filter_map(|a| requests.remove(&a.leave).map(|request| InboxItem { assignment: a, request }))
                .collect())
        })
    }

    /// Active caretakers and supervisors other than the requester.
    pub fn eligible_incharges(&self, requester: UserId) -> Result<Vec<UserAccount>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!(
                    "SELECT {} FROM users u WHERE u.role IN ('caretaker', 'supervisor') AND u.active = 1 AND u.id <> ?1
                     ORDER BY u.display_name, u.id",
                    user_cols("u")
                ),
                [requester],
                |r| user_at(r, 0),
            )
        })
    }

    /// `actor`'s notifications, newest first.
    pub fn list_notifications(&self, actor: &Session, unread_only: bool) -> Result<Vec<Notification>> {
        self.campus.require(actor, EndpointGroup::Notifications)?;
        self.campus.store.read(|tx| {
            tx.query_all(
                "SELECT id, recipient_id, leave_id, message, created_at, read FROM notifications
                 WHERE recipient_id = ?1 AND (?2 = 0 OR read = 0)
                 ORDER BY created_at DESC, id DESC",
                rusqlite::params![actor.user_id(), unread_only],
                |r| {
                    Ok(Notification {
                        id: r.get(0)?,
                        recipient: r.get(1)?,
                        leave: r.get(2)?,
                        message: r.get(3)?,
                        created_at: ts_at(r, 4)?,
                        read: r.get(5)?,
                    })
                },
            )
        })
    }

    /// Marks one notification (or all when `id` is `None`) as read.
    pub fn mark_read(&self, actor: &Session, id: Option<NotificationId>) -> Result<usize> {
        self.campus.require(actor, EndpointGroup::Notifications)?;
        self.campus.store.write(|tx| {
            tx.execute(
                "UPDATE notifications SET read = 1 WHERE recipient_id = ?1 AND (?2 IS NULL OR id = ?2) AND read = 0",
                rusqlite::params![actor.user_id(), id],
            )
        })
    }

    pub fn unread_count(&self, actor: &Session) -> Result<u64> {
        self.campus.store.read(|tx| {
            tx.query_row(
                "SELECT COUNT(*) FROM notifications WHERE recipient_id = ?1 AND read = 0",
                [actor.user_id()],
                |r| r.get(0),
            )
        })
    }

    /// Display names of everyone who acted on `leave`, keyed by user id.
    pub fn actor_names(&self, leave: LeaveId) -> Result<HashMap<UserId, String>> {
        self.campus.store.read(|tx| {
            let rows = tx.query_all(
                "SELECT DISTINCT u.id, u.display_name FROM leave_transitions t JOIN users u ON u.id = t.actor_id
                 WHERE t.leave_id = ?1",
                [leave],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )?;
            Ok(rows.into_iter().collect())
        })
    }

    pub fn notification_count(&self) -> Result<u64> {
        self.campus
            .store
            .read(|tx| tx.query_row("SELECT COUNT(*) FROM notifications", [], |r| r.get(0)))
    }
}
