use axum::extract::Path;
use axum::response::Response;
use axum::Form;
use maud::{html, Markup};
use serde::Deserialize;
use uuid::Uuid;

use super::registry::RenderMode;
use super::render::{bell as bell_view, date_param, stamp, Ctx};
use crate::auth::{EndpointGroup, Session, UserAccount};
use crate::error::{Error, Result};
use crate::ids::{LeaveId, UserId};
use crate::leave::{replay, InboxItem, LeaveEvent, LeaveRequest, LeaveState, Notification};
use crate::Campus;

fn period(r: &LeaveRequest) -> String {
    if r.start_date == r.end_date {
        r.start_date.format("%d %b %Y").to_string()
    } else {
        format!("{} to {}", r.start_date.format("%d %b"), r.end_date.format("%d %b %Y"))
    }
}

fn leave_id(raw: &str) -> Result<LeaveId> {
    raw.parse().map_err(|_| Error::NotFound)
}

fn mine_item(r: &LeaveRequest) -> Markup {
    html! {
        li id={ "mine-" (r.id) } data-id=(r.id) {
            strong { (period(r)) } " " span .badge { (r.state.label()) }
            br; span .meta { (r.reason) }
        }
    }
}

fn mine_view(list: &[LeaveRequest]) -> Markup {
    html! {
        section #my-leave {
            h2 { "My requests" }
            ul #my-leave-list .items {
                @for r in list.iter().rev() { (mine_item(r)) }
            }
            @if list.is_empty() { p .empty { "No leave requests yet." } }
        }
    }
}

fn request_form() -> Markup {
    html! {
        section .panel {
            h2 { "Request leave" }
            form method="post" action="/housekeeping/leave/requests" hx-post="/housekeeping/leave/requests"
                hx-target="#my-leave-list" hx-swap="beforeend" hx-on--after-request="if(event.detail.successful) this.reset()" {
                label { "From" input type="date" name="start_date" required; }
                label { "To" input type="date" name="end_date" required; }
                label { "Reason" input name="reason" required; }
                button type="submit" { "Send request" }
            }
        }
    }
}

fn inbox_item(item: &InboxItem) -> Markup {
    let r = &item.request;
    let url = format!("/housekeeping/leave/assignments/{}/respond", item.assignment.id);
    html! {
        li id={ "inbox-" (item.assignment.id) } data-id=(item.assignment.id) {
            strong { (r.requester.display_name) } " asks you to cover " (period(r))
            br; span .meta { (r.reason) }
            br;
            form method="post" action=(url) hx-post=(url) hx-target={ "#inbox-" (item.assignment.id) } hx-swap="outerHTML" {
                button type="submit" name="decision" value="accept" { "Accept" }
                button .secondary type="submit" name="decision" value="decline" { "Decline" }
            }
        }
    }
}

fn inbox_view(items: &[InboxItem]) -> Markup {
    html! {
        section #leave-inbox {
            h2 { "Cover requests for you" }
            @if items.is_empty() { p .empty { "Nothing waiting for you." } }
            ul .items { @for i in items { (inbox_item(i)) } }
        }
    }
}

struct QueueOpts {
    assign: bool,
    decide: bool,
    audit: bool,
    eligible: Vec<UserAccount>,
}

impl QueueOpts {
    fn load(c: &Campus, s: &Session) -> Result<Self> {
        let may = |g| c.permissions().allows(s.role(), g);
        let assign = may(EndpointGroup::LeaveAssign);
        Ok(Self {
            assign,
            decide: may(EndpointGroup::LeaveDecide),
            audit: may(EndpointGroup::LeaveAudit),
            eligible: if assign { c.leave().eligible_incharges(UserId(0))? } else { Vec::new() },
        })
    }
}

fn queue_item(r: &LeaveRequest, o: &QueueOpts) -> Markup {
    let target = format!("#queue-{}", r.id);
    html! {
        li id={ "queue-" (r.id) } data-id=(r.id) {
            strong { (r.requester.display_name) } ", " (period(r)) " " span .badge { (r.state.label()) }
            br; span .meta { (r.reason) }
            @if o.audit { " " a href={ "/admin/leave/" (r.id) "/audit" } { "history" } }
            br;
            @if o.assign && r.state.on(LeaveEvent::AssignIncharge).is_some() {
                form method="post" action={ "/housekeeping/leave/" (r.id) "/assign" } hx-post={ "/housekeeping/leave/" (r.id) "/assign" }
                    hx-target=(target) hx-swap="outerHTML" {
                    select name="incharge" aria-label="Incharge" required {
                        option value="" { "Choose incharge" }
                        @for u in o.eligible.iter().filter(|u| u.id != r.requester.id) {
                            option value=(u.id) { (u.display_name) " (" (u.role.label()) ")" }
                        }
                    }
                    button type="submit" { "Assign" }
                }
            }
            @if o.decide && r.state == LeaveState::PendingAdmin {
                form method="post" action={ "/housekeeping/leave/" (r.id) "/decide" } hx-post={ "/housekeeping/leave/" (r.id) "/decide" }
                    hx-target=(target) hx-swap="outerHTML" {
                    button type="submit" name="decision" value="approve" { "Approve" }
                    button .danger type="submit" name="decision" value="reject" { "Send back" }
                }
            }
        }
    }
}

pub(super) fn queue_view(list: &[LeaveRequest], c: &Campus, s: &Session) -> Result<Markup> {
    let o = QueueOpts::load(c, s)?;
    Ok(html! {
        section #leave-queue {
            h2 { "Leave queue" }
            @if list.is_empty() { p .empty { "No requests waiting." } }
            ul .items { @for r in list { (queue_item(r, &o)) } }
        }
    })
}

pub(super) async fn hub(ctx: Ctx) -> Response {
    ctx.page("Leave", move |c, s, _| {
        let may = |g| c.permissions().allows(s.role(), g);
        let mine = c.leave().my_requests(s)?;
        let inbox = if may(EndpointGroup::LeaveRespond) { Some(c.leave().inbox(s)?) } else { None };
        let queue = if may(EndpointGroup::LeaveAssign) { Some(c.leave().queue(s)?) } else { None };
        Ok(html! {
            div .grid2 {
                div { (request_form()) (mine_view(&mine)) }
                div {
                    @if let Some(i) = &inbox { (inbox_view(i)) }
                    @if let Some(q) = &queue { (queue_view(q, c, s)?) }
                }
            }
        })
    })
    .await
}

pub(super) async fn mine(ctx: Ctx) -> Response {
    ctx.page("My leave requests", |c, s, _| Ok(mine_view(&c.leave().my_requests(s)?))).await
}

#[derive(Deserialize)]
pub(super) struct RequestForm {
    start_date: String,
    end_date: String,
    #[serde(default)]
    reason: String,
}

pub(super) async fn create(ctx: Ctx, Form(f): Form<RequestForm>) -> Response {
    ctx.action("/housekeeping/leave/", move |c, s| {
        let today = c.today();
        let req = c.leave().create_leave_request(
            s,
            date_param(Some(&f.start_date), today)?,
            date_param(Some(&f.end_date), today)?,
            &f.reason,
        )?;
        Ok(mine_item(&req))
    })
    .await
}

pub(super) async fn inbox(ctx: Ctx) -> Response {
    ctx.page("Cover requests", |c, s, _| Ok(inbox_view(&c.leave().inbox(s)?))).await
}

#[derive(Deserialize)]
pub(super) struct DecisionForm {
    decision: String,
}

pub(super) async fn respond(ctx: Ctx, Path(id): Path<String>, Form(f): Form<DecisionForm>) -> Response {
    ctx.action("/housekeeping/leave/", move |c, s| {
        let id: Uuid = id.parse().map_err(|_| Error::NotFound)?;
        let accept = match f.decision.as_str() {
            "accept" => true,
            "decline" => false,
            other => return Err(Error::Invalid(format!("decision must be accept or decline, got {other:?}"))),
        };
        let req = c.leave().incharge_respond(id, accept, s)?;
        Ok(html! {
            li id={ "inbox-" (id) } data-id=(id) {
                "You " (if accept { "accepted" } else { "declined" }) " covering " (req.requester.display_name) ", " (period(&req)) "."
            }
        })
    })
    .await
}

pub(super) async fn queue(ctx: Ctx) -> Response {
    ctx.page("Leave queue", |c, s, _| queue_view(&c.leave().queue(s)?, c, s)).await
}

#[derive(Deserialize)]
pub(super) struct AssignForm {
    incharge: String,
}

pub(super) async fn assign(ctx: Ctx, Path(id): Path<String>, Form(f): Form<AssignForm>) -> Response {
    ctx.action("/housekeeping/leave/", move |c, s| {
        let id = leave_id(&id)?;
        let incharge: UserId = f
            .incharge
            .trim()
            .parse()
            .map_err(|_| Error::Invalid("choose an incharge".into()))?;
        c.leave().assign_incharge(id, incharge, s)?;
        Ok(queue_item(&c.leave().get(id)?, &QueueOpts::load(c, s)?))
    })
    .await
}

pub(super) async fn decide(ctx: Ctx, Path(id): Path<String>, Form(f): Form<DecisionForm>) -> Response {
    ctx.action("/admin/dashboard/", move |c, s| {
        let id = leave_id(&id)?;
        let approve = match f.decision.as_str() {
            "approve" => true,
            "reject" => false,
            other => return Err(Error::Invalid(format!("decision must be approve or reject, got {other:?}"))),
        };
        let req = c.leave().admin_decide(id, approve, s)?;
        Ok(queue_item(&req, &QueueOpts::load(c, s)?))
    })
    .await
}

fn notifications_view(list: &[Notification]) -> Markup {
    let unread = list.iter().filter(|n| !n.read).count();
    html! {
        section #notifications {
            @if unread > 0 {
                form method="post" action="/housekeeping/notifications/read" hx-post="/housekeeping/notifications/read"
                    hx-target="#notifications" hx-swap="outerHTML" {
                    button .secondary type="submit" { "Mark all read" }
                }
            }
            @if list.is_empty() { p .empty { "No notifications." } }
            ul .items {
                @for n in list {
                    li data-id=(n.id) class=[(!n.read).then_some("unread")] {
                        (n.message) br; span .meta { (stamp(&n.created_at)) }
                    }
                }
            }
        }
    }
}

pub(super) async fn notifications(ctx: Ctx) -> Response {
    ctx.page("Notifications", |c, s, _| Ok(notifications_view(&c.leave().list_notifications(s, false)?)))
        .await
}

pub(super) async fn bell(ctx: Ctx) -> Response {
    ctx.page("", |c, s, _| Ok(bell_view(c.leave().unread_count(s)?))).await
}

/// Marks everything read; the refreshed bell rides along out of band.
pub(super) async fn mark_read(ctx: Ctx) -> Response {
    ctx.action("/housekeeping/notifications/", |c, s| {
        c.leave().mark_read(s, None)?;
        let list = c.leave().list_notifications(s, false)?;
        Ok(html! {
            (notifications_view(&list))
            div hx-swap-oob="outerHTML:#bell" { (bell_view(0)) }
        })
    })
    .await
}

pub(super) async fn audit(ctx: Ctx, Path(id): Path<String>) -> Response {
    ctx.page("Leave history", move |c, _, mode| {
        let id = leave_id(&id)?;
        let req = c.leave().get(id)?;
        let names = c.leave().actor_names(id)?;
        let replayed = replay(&req.transitions).ok();
        let table = html! {
            section #leave-audit data-id=(req.id) {
                p { strong { (req.requester.display_name) } ", " (period(&req)) ": " (req.reason) }
                table {
                    thead { tr { th { "When" } th { "From" } th { "To" } th { "By" } } }
                    tbody {
                        @for t in &req.transitions {
                            tr {
                                td { (stamp(&t.at)) }
                                td { (t.from.map(LeaveState::as_str).unwrap_or("created")) }
                                td { (t.to.as_str()) }
                                td { (names.get(&t.actor).map(String::as_str).unwrap_or("unknown")) }
                            }
                        }
                    }
                }
                p .meta {
                    "Current state " strong { (req.state.as_str()) }
                    @if replayed == Some(req.state) { ", consistent with the log." } @else { ", which the log does not reproduce." }
                }
            }
        };
        Ok(match mode {
            RenderMode::FullPage => html! { p { a href="/admin/dashboard/" { "Admin dashboard" } } (table) },
            _ => table,
        })
    })
    .await
}
