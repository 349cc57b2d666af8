use axum::extract::Query;
use axum::response::Response;
use axum::Form;
use chrono::NaiveDate;
use maud::{html, Markup};
use serde::Deserialize;

use super::registry::RenderMode;
use super::render::{date_param, day, Ctx};
use crate::attendance::{AttendanceStatus, HalfDaySlot, SheetRow};
use crate::auth::UserAccount;
use crate::error::{Error, Result};
use crate::ids::UserId;
use crate::Campus;

pub(super) fn row(worker: &UserAccount, entry: Option<&crate::attendance::AttendanceRecord>, date: NaiveDate, slot: HalfDaySlot) -> Markup {
    let locked = entry.is_some_and(|e| e.is_submitted);
    let current = entry.map(|e| e.status);
    html! {
        tr id={ "att-" (worker.id) } data-id=(worker.id) {
            td { (worker.display_name) }
            td { @match current { Some(s) => span .badge { (s.as_str()) }, None => span .empty { "not marked" } } }
            td {
                @if locked {
                    span .badge { "locked" }
                } @else {
                    form method="post" action="/housekeeping/attendance/record" hx-post="/housekeeping/attendance/record"
                        hx-target={ "#att-" (worker.id) } hx-swap="outerHTML" {
                        input type="hidden" name="worker" value=(worker.id);
                        input type="hidden" name="date" value=(date);
                        input type="hidden" name="slot" value=(slot.as_str());
                        @for st in AttendanceStatus::ALL {
                            button type="submit" name="status" value=(st.as_str())
                                class=[(current != Some(st)).then_some("secondary")] { (st.as_str()) }
                        }
                    }
                }
            }
        }
    }
}

fn sheet_view(rows: &[SheetRow], date: NaiveDate, slot: HalfDaySlot) -> Markup {
    let submitted = rows.iter().filter(|r| r.entry.as_ref().is_some_and(|e| e.is_submitted)).count();
    let open = rows.iter().filter(|r| r.entry.as_ref().is_some_and(|e| !e.is_submitted)).count();
    html! {
        section #attendance-sheet data-date=(date) data-slot=(slot.as_str()) {
            h2 { (day(date)) ", " (slot.label()) }
            @if rows.is_empty() {
                p .empty { "No active caretakers." }
            } @else {
                table {
                    thead { tr { th { "Worker" } th { "Status" } th { "Mark" } } }
                    tbody { @for r in rows { (row(&r.worker, r.entry.as_ref(), date, slot)) } }
                }
                p .meta { (submitted) " locked, " (open) " open, " (rows.len() - submitted - open) " unmarked" }
                @if open > 0 {
                    form method="post" action="/housekeeping/attendance/submit" hx-post="/housekeeping/attendance/submit"
                        hx-target="#attendance-sheet" hx-swap="outerHTML"
                        hx-confirm="Submitting locks these entries permanently. Continue?" {
                        input type="hidden" name="date" value=(date);
                        input type="hidden" name="slot" value=(slot.as_str());
                        button type="submit" { "Submit and lock" }
                    }
                }
            }
        }
    }
}

#[derive(Deserialize, Default)]
pub(super) struct SheetQuery {
    pub(super) date: Option<String>,
    pub(super) slot: Option<String>,
}

impl SheetQuery {
    pub(super) fn resolve(&self, c: &Campus) -> Result<(NaiveDate, HalfDaySlot)> {
        let date = date_param(self.date.as_deref(), c.today())?;
        let slot = match self.slot.as_deref().map(str::trim).filter(|s| !s.is_empty()) {
            Some(s) => s.parse()?,
            None if c.clock().now().time() < HalfDaySlot::SecondHalf.bounds().0 => HalfDaySlot::FirstHalf,
            None => HalfDaySlot::SecondHalf,
        };
        Ok((date, slot))
    }
}

fn picker(date: NaiveDate, slot: HalfDaySlot) -> Markup {
    html! {
        form .filters method="get" action="/housekeeping/attendance/" hx-get="/housekeeping/attendance/"
            hx-target="#attendance-sheet" hx-swap="outerHTML" hx-trigger="change" {
            label { "Date" input type="date" name="date" value=(date); }
            label { "Slot"
                select name="slot" {
                    @for s in HalfDaySlot::ALL { option value=(s.as_str()) selected[s == slot] { (s.label()) } }
                }
            }
            noscript { button type="submit" { "Show" } }
        }
    }
}

pub(super) async fn sheet(ctx: Ctx, Query(q): Query<SheetQuery>) -> Response {
    ctx.page("Attendance", move |c, _, mode| {
        let (date, slot) = q.resolve(c)?;
        let rows = c.attendance().attendance_sheet(date, slot)?;
        let sheet = sheet_view(&rows, date, slot);
        Ok(match mode {
            RenderMode::FullPage => html! { (picker(date, slot)) (sheet) },
            _ => sheet,
        })
    })
    .await
}

#[derive(Deserialize)]
pub(super) struct RecordForm {
    worker: String,
    date: String,
    slot: String,
    status: String,
}

pub(super) async fn record(ctx: Ctx, Form(f): Form<RecordForm>) -> Response {
    ctx.action("/housekeeping/attendance/", move |c, s| {
        let worker: UserId = f.worker.parse().map_err(|_| Error::NotFound)?;
        let date = date_param(Some(&f.date), c.today())?;
        let slot: HalfDaySlot = f.slot.parse()?;
        let status: AttendanceStatus = f.status.parse()?;
        let rec = c.attendance().record_attendance(worker, date, slot, status, s)?;
        let account = c.accounts().get(worker)?;
        Ok(row(&account, Some(&rec), date, slot))
    })
    .await
}

#[derive(Deserialize)]
pub(super) struct SubmitForm {
    date: String,
    slot: String,
}

pub(super) async fn submit(ctx: Ctx, Form(f): Form<SubmitForm>) -> Response {
    ctx.action("/housekeeping/attendance/", move |c, s| {
        let date = date_param(Some(&f.date), c.today())?;
        let slot: HalfDaySlot = f.slot.parse()?;
        c.attendance().submit_attendance(date, slot, s)?;
        let rows = c.attendance().attendance_sheet(date, slot)?;
        Ok(sheet_view(&rows, date, slot))
    })
    .await
}
