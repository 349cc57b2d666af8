use std::collections::BTreeMap;

use axum::extract::{Multipart, Path, Query};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::Form;
use maud::{html, Markup};
use serde::Deserialize;

use super::registry::RenderMode;
use super::render::{blocking, date_param, hhmm, nonblank, Ctx};
use crate::auth::{EndpointGroup, Role, Session, UserAccount};
use crate::error::{Error, Result};
use crate::ids::{PhotoId, RecordId, UserId};
use crate::photo::{PhotoUpload, Variant};
use crate::scheduling::{Gps, RecordStatus, TaskCard, TaskFilter, MAX_WORKERS};
use crate::Campus;

/// What the viewer may do to a card, resolved once per response.
pub(super) struct CardOpts {
    assign: bool,
    complete: bool,
    flag: bool,
    photos: bool,
    viewer: UserId,
    caretaker: bool,
    caretakers: Vec<UserAccount>,
}

impl CardOpts {
    pub(super) fn load(c: &Campus, s: &Session) -> Result<Self> {
        let may = |g| c.permissions().allows(s.role(), g);
        let assign = may(EndpointGroup::HousekeepingAssign);
        Ok(Self {
            assign,
            complete: may(EndpointGroup::HousekeepingComplete),
            flag: may(EndpointGroup::HousekeepingFlag),
            photos: may(EndpointGroup::PhotosView),
            viewer: s.user_id(),
            caretaker: s.role() == Role::Caretaker,
            caretakers: if assign { c.accounts().active_with_role(Role::Caretaker)? } else { Vec::new() },
        })
    }
}

pub(super) fn card_view(card: &TaskCard, o: &CardOpts) -> Markup {
    let r = &card.record;
    let t = &card.template;
    let base = format!("/housekeeping/tasks/{}", r.id);
    let target = format!("#task-{}", r.id);
    let mine = !o.caretaker || card.workers.iter().any(|w| w.id == o.viewer);
    html! {
        article id={ "task-" (r.id) } class={ "card s-" (r.status.as_str()) } data-id=(r.id) {
            header {
                h3 { (t.name) }
                span .badge { (r.status.as_str()) }
            }
            p .meta { (card.area.display_name) ", " (t.window_start.format("%H:%M")) "-" (t.window_end.format("%H:%M")) }
            @if !card.workers.is_empty() {
                p { "Workers: " @for (i, w) in card.workers.iter().enumerate() { @if i > 0 { ", " } (w.display_name) } }
            }
            @if let Some(at) = &r.completed_at { p { "Completed " (hhmm(at)) } }
            @if let (Some(photo), true) = (r.photo_id, o.photos) {
                p { a href={ "/media/photos/" (photo) "/main" } { "Photo evidence" } }
            }
            @if let Some(g) = &r.gps { p .meta { "GPS " (format!("{:.5}, {:.5}", g.latitude, g.longitude)) } }
            @if let Some(reason) = &r.flag_reason { p { "Flagged: " (reason) } }
            @if r.status == RecordStatus::Pending && o.assign {
                form method="post" action={ (base) "/assign" } hx-post={ (base) "/assign" } hx-target=(target) hx-swap="outerHTML" {
                    @for i in 0..(if card.area.multi_worker_enabled { MAX_WORKERS } else { 1 }) {
                        select name="worker" aria-label="Worker" required[i == 0] {
                            option value="" { "Worker" }
                            @for w in &o.caretakers { option value=(w.id) { (w.display_name) } }
                        }
                    }
                    button type="submit" { "Assign" }
                }
            }
            @if r.status == RecordStatus::Assigned && o.complete && mine {
                form method="post" action={ (base) "/complete" } enctype="multipart/form-data"
                    hx-post={ (base) "/complete" } hx-encoding="multipart/form-data" hx-target=(target) hx-swap="outerHTML"
                    data-camera-capture data-record-id=(r.id) {
                    input type="file" name="photo" accept="image/jpeg" capture="environment" aria-label="Photo" required[t.requires_photo];
                    input type="file" name="thumbnail" accept="image/jpeg" aria-label="Thumbnail";
                    input type="hidden" name="original_size";
                    input type="hidden" name="lat";
                    input type="hidden" name="lng";
                    button type="submit" { "Complete" }
                }
            }
            @if r.status == RecordStatus::Completed && o.flag {
                form method="post" action={ (base) "/flag" } hx-post={ (base) "/flag" } hx-target=(target) hx-swap="outerHTML" {
                    input name="reason" placeholder="Reason" aria-label="Flag reason" required;
                    button .danger type="submit" { "Flag" }
                }
            }
        }
    }
}

fn list_view(cards: &[TaskCard], o: &CardOpts) -> Markup {
    html! {
        section #task-list .cards {
            @if cards.is_empty() { p .empty { "No tasks for this selection." } }
            @for card in cards { (card_view(card, o)) }
        }
    }
}

#[derive(Deserialize, Default)]
pub(super) struct TaskQuery {
    date: Option<String>,
    area: Option<String>,
}

impl TaskQuery {
    pub(super) fn filter(self, c: &Campus) -> Result<TaskFilter> {
        Ok(TaskFilter {
            date: Some(date_param(self.date.as_deref(), c.today())?),
            area: nonblank(self.area),
            record: None,
        })
    }
}

fn filters(c: &Campus, f: &TaskFilter) -> Result<Markup> {
    let areas = c.scheduling().areas()?;
    Ok(html! {
        form .filters method="get" action="/housekeeping/tasks/" hx-get="/housekeeping/tasks/"
            hx-target="#task-list" hx-swap="outerHTML" hx-trigger="change" {
            label { "Date" input type="date" name="date" value=[f.date]; }
            label { "Area"
                select name="area" {
                    option value="" { "All areas" }
                    @for a in &areas { option value=(a.code) selected[f.area.as_deref() == Some(a.code.as_str())] { (a.display_name) } }
                }
            }
            noscript { button type="submit" { "Show" } }
        }
    })
}

/// Loads the cards for `f`, materializing that date's records first.
fn cards(c: &Campus, f: &TaskFilter) -> Result<Vec<TaskCard>> {
    if let Some(date) = f.date {
        c.scheduling().ensure_daily_records(date)?;
    }
    c.scheduling().task_cards(f)
}

pub(super) async fn dashboard(ctx: Ctx, Query(q): Query<TaskQuery>) -> Response {
    ctx.page("Housekeeping", move |c, s, _| {
        let f = q.filter(c)?;
        let cards = cards(c, &f)?;
        let opts = CardOpts::load(c, s)?;
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for card in &cards {
            *counts.entry(card.record.status.as_str()).or_default() += 1;
        }
        Ok(html! {
            p .meta {
                (cards.len()) " tasks"
                @for st in RecordStatus::ALL { ", " (counts.get(st.as_str()).copied().unwrap_or(0)) " " (st.as_str()) }
                " | " a href="/housekeeping/attendance/" { "Attendance" } " | " a href="/housekeeping/leave/" { "Leave" }
            }
            (filters(c, &f)?)
            (list_view(&cards, &opts))
        })
    })
    .await
}

pub(super) async fn task_list(ctx: Ctx, Query(q): Query<TaskQuery>) -> Response {
    ctx.page("Tasks", move |c, s, mode| {
        let f = q.filter(c)?;
        let cards = cards(c, &f)?;
        let list = list_view(&cards, &CardOpts::load(c, s)?);
        Ok(match mode {
            RenderMode::FullPage => html! { (filters(c, &f)?) (list) },
            _ => list,
        })
    })
    .await
}

fn record_id(raw: &str) -> Result<RecordId> {
    raw.parse().map_err(|_| Error::NotFound)
}

fn render_card(c: &Campus, s: &Session, id: RecordId) -> Result<Markup> {
    let card = c.scheduling().task_card(id)?;
    Ok(card_view(&card, &CardOpts::load(c, s)?))
}

pub(super) async fn task_card(ctx: Ctx, Path(id): Path<String>) -> Response {
    ctx.page("Task", move |c, s, mode| {
        let card = render_card(c, s, record_id(&id)?)?;
        Ok(match mode {
            RenderMode::FullPage => html! { p { a href="/housekeeping/dashboard/" { "All tasks" } } (card) },
            _ => card,
        })
    })
    .await
}

pub(super) async fn assign(ctx: Ctx, Path(id): Path<String>, Form(fields): Form<Vec<(String, String)>>) -> Response {
    let back = format!("/housekeeping/tasks/{id}/");
    ctx.action(back, move |c, s| {
        let id = record_id(&id)?;
        let workers = fields
            .iter()
            .filter(|(k, v)| k == "worker" && !v.trim().is_empty())
            .map(|(_, v)| v.trim().parse().map_err(|_| Error::Invalid(format!("bad worker id {v:?}"))))
            .collect::<Result<Vec<UserId>>>()?;
        c.scheduling().assign_workers(id, &workers, s)?;
        render_card(c, s, id)
    })
    .await
}

#[derive(Default)]
struct Completion {
    photo: Option<Vec<u8>>,
    thumbnail: Option<Vec<u8>>,
    original_size: Option<String>,
    lat: Option<String>,
    lng: Option<String>,
}

fn multipart_error(e: axum::extract::multipart::MultipartError, limit: u64) -> Error {
    if e.status() == axum::http::StatusCode::PAYLOAD_TOO_LARGE {
        Error::TooLarge { limit }
    } else {
        Error::Invalid(e.body_text())
    }
}

async fn read_completion(mp: &mut Multipart, limit: u64) -> Result<Completion> {
    let mut out = Completion::default();
    while let Some(field) = mp.next_field().await.map_err(|e| multipart_error(e, limit))? {
        let name = field.name().unwrap_or_default().to_string();
        let bytes = field.bytes().await.map_err(|e| multipart_error(e, limit))?;
        let text = || nonblank(Some(String::from_utf8_lossy(&bytes).into_owned()));
        match name.as_str() {
            "photo" if !bytes.is_empty() => out.photo = Some(bytes.to_vec()),
            "thumbnail" if !bytes.is_empty() => out.thumbnail = Some(bytes.to_vec()),
            "original_size" => out.original_size = text(),
            "lat" => out.lat = text(),
            "lng" => out.lng = text(),
            _ => {}
        }
    }
    Ok(out)
}

impl Completion {
    fn upload(&mut self) -> Result<Option<PhotoUpload>> {
        let Some(main) = self.photo.take() else {
            return Ok(None);
        };
        let thumb = self
            .thumbnail
            .take()
            .ok_or_else(|| Error::Invalid("a thumbnail is required with the photo".into()))?;
        // Without the capture script the browser sends the file as chosen,
        // so its own size is the best available original size.
        let original_size = match &self.original_size {
            Some(v) => v.parse().map_err(|_| Error::Invalid(format!("bad original_size {v:?}")))?,
            None => main.len() as u64,
        };
        Ok(Some(PhotoUpload { main, thumb, original_size }))
    }

    fn gps(&self) -> Result<Option<Gps>> {
        let num = |v: &String| v.parse::<f64>().map_err(|_| Error::Invalid(format!("bad coordinate {v:?}")));
        match (&self.lat, &self.lng) {
            (None, None) => Ok(None),
            (Some(lat), Some(lng)) => Gps::new(num(lat)?, num(lng)?).map(Some),
            _ => Err(Error::Invalid("lat and lng must be sent together".into())),
        }
    }
}

pub(super) async fn complete(ctx: Ctx, Path(id): Path<String>, mut mp: Multipart) -> Response {
    let limit = ctx.campus.config().max_photo_bytes;
    let mut form = match read_completion(&mut mp, limit).await {
        Ok(f) => f,
        Err(e) => return ctx.fail(e),
    };
    let back = format!("/housekeeping/tasks/{id}/");
    ctx.action(back, move |c, s| {
        let id = record_id(&id)?;
        let upload = form.upload()?;
        let gps = form.gps()?;
        c.scheduling().complete_task(id, upload.as_ref(), gps, s)?;
        render_card(c, s, id)
    })
    .await
}

#[derive(Deserialize)]
pub(super) struct FlagForm {
    #[serde(default)]
    reason: String,
}

pub(super) async fn flag(ctx: Ctx, Path(id): Path<String>, Form(form): Form<FlagForm>) -> Response {
    let back = format!("/housekeeping/tasks/{id}/");
    ctx.action(back, move |c, s| {
        let id = record_id(&id)?;
        c.scheduling().flag_record(id, &form.reason, s)?;
        render_card(c, s, id)
    })
    .await
}

pub(super) async fn photo(ctx: Ctx, Path((id, variant)): Path<(String, String)>) -> Response {
    let Some(session) = ctx.session.clone() else {
        return ctx.fail(Error::Unauthenticated);
    };
    let out = blocking(&ctx.campus, move |c| {
        let id: PhotoId = id.parse().map_err(|_| Error::NotFound)?;
        let variant: Variant = variant.parse()?;
        c.photos().serve(id, variant, &session)
    })
    .await;
    match out {
        Ok((bytes, content_type)) => (
            [
                (header::CONTENT_TYPE, content_type),
                (header::CACHE_CONTROL, "private, max-age=31536000, immutable"),
            ],
            bytes,
        )
            .into_response(),
        Err(e) => ctx.fail(e),
    }
}
