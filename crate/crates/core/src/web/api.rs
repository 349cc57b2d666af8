//! Read-only JSON mirrors of the HTML views. Every item carries the same `id`
//! as the matching `data-id` attribute in the markup.

use axum::extract::{Path, Query};
use axum::response::Response;
use chrono::{DateTime, FixedOffset, NaiveDate, NaiveTime};
use serde::Serialize;
use uuid::Uuid;

use super::attendance::SheetQuery;
use super::housekeeping::TaskQuery;
use super::inventory::ReportQuery;
use super::render::{date_param, Ctx};
use crate::error::Error;
use crate::ids::{ItemId, LeaveId, NotificationId, PhotoId, PurchaseRequestId, RecordId, TemplateId, UserId};
use crate::inventory::{Item, PurchaseRequest};
use crate::leave::{replay, InboxItem, LeaveRequest, Notification};
use crate::photo::PhotoAsset;
use crate::scheduling::{TaskCard, TaskFilter};

#[derive(Serialize)]
struct Named {
    id: UserId,
    name: String,
}

#[derive(Serialize)]
pub(super) struct TaskJson {
    id: RecordId,
    date: NaiveDate,
    status: &'static str,
    template_id: TemplateId,
    template_name: String,
    area_code: String,
    area_name: String,
    window_start: NaiveTime,
    window_end: NaiveTime,
    requires_photo: bool,
    assigned_at: Option<DateTime<FixedOffset>>,
    completed_at: Option<DateTime<FixedOffset>>,
    photo_id: Option<PhotoId>,
    latitude: Option<f64>,
    longitude: Option<f64>,
    flag_reason: Option<String>,
    flagged_by: Option<UserId>,
    workers: Vec<Named>,
}

impl From<TaskCard> for TaskJson {
    fn from(c: TaskCard) -> Self {
        let r = c.record;
        TaskJson {
            id: r.id,
            date: r.date,
            status: r.status.as_str(),
            template_id: c.template.id,
            template_name: c.template.name,
            area_code: c.area.code,
            area_name: c.area.display_name,
            window_start: c.template.window_start,
            window_end: c.template.window_end,
            requires_photo: c.template.requires_photo,
            assigned_at: r.assigned_at,
            completed_at: r.completed_at,
            photo_id: r.photo_id,
            latitude: r.gps.map(|g| g.latitude),
            longitude: r.gps.map(|g| g.longitude),
            flag_reason: r.flag_reason,
            flagged_by: r.flagged_by,
            workers: c.workers.into_iter().map(|w| Named { id: w.id, name: w.display_name }).collect(),
        }
    }
}

#[derive(Serialize)]
struct LeaveJson {
    id: LeaveId,
    requester_id: UserId,
    requester_name: String,
    start_date: NaiveDate,
    end_date: NaiveDate,
    reason: String,
    state: &'static str,
    created_at: DateTime<FixedOffset>,
}

impl From<LeaveRequest> for LeaveJson {
    fn from(r: LeaveRequest) -> Self {
        LeaveJson {
            id: r.id,
            requester_id: r.requester.id,
            requester_name: r.requester.display_name,
            start_date: r.start_date,
            end_date: r.end_date,
            reason: r.reason,
            state: r.state.as_str(),
            created_at: r.created_at,
        }
    }
}

#[derive(Serialize)]
struct InboxJson {
    id: Uuid,
    leave: LeaveJson,
    assigned_at: DateTime<FixedOffset>,
}

impl From<InboxItem> for InboxJson {
    fn from(i: InboxItem) -> Self {
        InboxJson { id: i.assignment.id, assigned_at: i.assignment.created_at, leave: i.request.into() }
    }
}

#[derive(Serialize)]
struct NotificationJson {
    id: NotificationId,
    leave_id: LeaveId,
    message: String,
    created_at: DateTime<FixedOffset>,
    read: bool,
}

impl From<Notification> for NotificationJson {
    fn from(n: Notification) -> Self {
        NotificationJson { id: n.id, leave_id: n.leave, message: n.message, created_at: n.created_at, read: n.read }
    }
}

#[derive(Serialize)]
struct ItemJson {
    id: ItemId,
    name: String,
    category: String,
    unit: String,
    initial_quantity: i64,
    available_quantity: i64,
}

impl From<Item> for ItemJson {
    fn from(i: Item) -> Self {
        ItemJson {
            id: i.id,
            name: i.name,
            category: i.category,
            unit: i.unit,
            initial_quantity: i.initial_quantity,
            available_quantity: i.available_quantity,
        }
    }
}

#[derive(Serialize)]
struct PurchaseJson {
    id: PurchaseRequestId,
    item_name: String,
    quantity: i64,
    justification: String,
    status: &'static str,
    created_by: UserId,
    created_at: DateTime<FixedOffset>,
}

impl From<PurchaseRequest> for PurchaseJson {
    fn from(p: PurchaseRequest) -> Self {
        PurchaseJson {
            id: p.id,
            item_name: p.item_name,
            quantity: p.quantity,
            justification: p.justification,
            status: p.status.as_str(),
            created_by: p.created_by,
            created_at: p.created_at,
        }
    }
}

fn into_all<A, B: From<A>>(v: Vec<A>) -> Vec<B> {
    v.into_iter().map(B::from).collect()
}

pub(super) async fn areas(ctx: Ctx) -> Response {
    ctx.json(|c, _| c.scheduling().areas()).await
}

pub(super) async fn templates(ctx: Ctx) -> Response {
    ctx.json(|c, _| c.scheduling().templates()).await
}

pub(super) async fn tasks(ctx: Ctx, Query(q): Query<TaskQuery>) -> Response {
    ctx.json(move |c, _| {
        let f = q.filter(c)?;
        if let Some(d) = f.date {
            c.scheduling().ensure_daily_records(d)?;
        }
        Ok(into_all::<_, TaskJson>(c.scheduling().task_cards(&f)?))
    })
    .await
}

pub(super) async fn task(ctx: Ctx, Path(id): Path<String>) -> Response {
    ctx.json(move |c, _| {
        let id: RecordId = id.parse().map_err(|_| Error::NotFound)?;
        let f = TaskFilter { record: Some(id), ..Default::default() };
        let card = c.scheduling().task_cards(&f)?.into_iter().next().ok_or(Error::NotFound)?;
        Ok(TaskJson::from(card))
    })
    .await
}

#[derive(Serialize)]
struct AttendanceJson {
    id: UserId,
    name: String,
    date: NaiveDate,
    slot: &'static str,
    status: Option<&'static str>,
    is_submitted: bool,
}

pub(super) async fn attendance(ctx: Ctx, Query(q): Query<SheetQuery>) -> Response {
    ctx.json(move |c, _| {
        let (date, slot) = q.resolve(c)?;
        let rows = c.attendance().attendance_sheet(date, slot)?;
        Ok(rows
            .into_iter()
            .map(|r| AttendanceJson {
                id: r.worker.id,
                name: r.worker.display_name,
                date,
                slot: slot.as_str(),
                status: r.entry.as_ref().map(|e| e.status.as_str()),
                is_submitted: r.entry.is_some_and(|e| e.is_submitted),
            })
            .collect::<Vec<_>>())
    })
    .await
}

pub(super) async fn leave_mine(ctx: Ctx) -> Response {
    ctx.json(|c, s| Ok(into_all::<_, LeaveJson>(c.leave().my_requests(s)?))).await
}

pub(super) async fn leave_inbox(ctx: Ctx) -> Response {
    ctx.json(|c, s| Ok(into_all::<_, InboxJson>(c.leave().inbox(s)?))).await
}

pub(super) async fn leave_queue(ctx: Ctx) -> Response {
    ctx.json(|c, s| Ok(into_all::<_, LeaveJson>(c.leave().queue(s)?))).await
}

#[derive(Serialize)]
struct TransitionJson {
    from: Option<&'static str>,
    to: &'static str,
    actor_id: UserId,
    actor_name: Option<String>,
    at: DateTime<FixedOffset>,
}

#[derive(Serialize)]
struct AuditJson {
    id: LeaveId,
    state: &'static str,
    replayed_state: Option<&'static str>,
    transitions: Vec<TransitionJson>,
}

pub(super) async fn leave_audit(ctx: Ctx, Path(id): Path<String>) -> Response {
    ctx.json(move |c, _| {
        let id: LeaveId = id.parse().map_err(|_| Error::NotFound)?;
        let req = c.leave().get(id)?;
        let names = c.leave().actor_names(id)?;
        Ok(AuditJson {
            id: req.id,
            state: req.state.as_str(),
            replayed_state: replay(&req.transitions).ok().map(|s| s.as_str()),
            transitions: req
                .transitions
                .iter()
                .map(|t| TransitionJson {
                    from: t.from.map(|s| s.as_str()),
                    to: t.to.as_str(),
                    actor_id: t.actor,
                    actor_name: names.get(&t.actor).cloned(),
                    at: t.at,
                })
                .collect(),
        })
    })
    .await
}

pub(super) async fn notifications(ctx: Ctx) -> Response {
    ctx.json(|c, s| Ok(into_all::<_, NotificationJson>(c.leave().list_notifications(s, false)?))).await
}

#[derive(serde::Deserialize, Default)]
pub(super) struct ItemQuery {
    category: Option<String>,
}

pub(super) async fn items(ctx: Ctx, Query(q): Query<ItemQuery>) -> Response {
    ctx.json(move |c, _| {
        let category = super::render::nonblank(q.category);
        Ok(into_all::<_, ItemJson>(c.inventory().list_items(category.as_deref())?))
    })
    .await
}

pub(super) async fn purchase_requests(ctx: Ctx) -> Response {
    ctx.json(|c, _| Ok(into_all::<_, PurchaseJson>(c.inventory().purchase_requests()?))).await
}

pub(super) async fn report(ctx: Ctx, Query(q): Query<ReportQuery>) -> Response {
    ctx.json(move |c, s| {
        let r = q.run(c, s)?;
        Ok(serde_json::json!({
            "area": r.area,
            "from": r.from,
            "to": r.to,
            "total_quantity": r.total_quantity(),
            "rows": r.rows,
        }))
    })
    .await
}

#[derive(Serialize)]
struct PhotoJson {
    id: PhotoId,
    original_size: u64,
    compressed_size: u64,
    compression_ratio: f64,
    thumbnail_size: u64,
    content_hash: String,
    uploaded_at: DateTime<FixedOffset>,
    main_url: String,
    thumb_url: String,
}

impl From<PhotoAsset> for PhotoJson {
    fn from(p: PhotoAsset) -> Self {
        PhotoJson {
            main_url: format!("/media/photos/{}/main", p.id),
            thumb_url: format!("/media/photos/{}/thumb", p.id),
            id: p.id,
            original_size: p.original_size,
            compressed_size: p.compressed_size,
            compression_ratio: p.compression_ratio,
            thumbnail_size: p.thumbnail_size,
            content_hash: p.content_hash,
            uploaded_at: p.uploaded_at,
        }
    }
}

pub(super) async fn photo(ctx: Ctx, Path(id): Path<String>) -> Response {
    ctx.json(move |c, _| {
        let id: PhotoId = id.parse().map_err(|_| Error::NotFound)?;
        Ok(PhotoJson::from(c.photos().get(id)?))
    })
    .await
}

#[derive(serde::Deserialize, Default)]
pub(super) struct SummaryQuery {
    date: Option<String>,
}

pub(super) async fn admin_summary(ctx: Ctx, Query(q): Query<SummaryQuery>) -> Response {
    ctx.json(move |c, s| {
        let date = date_param(q.date.as_deref(), c.today())?;
        c.admin().summary(date, s)
    })
    .await
}
