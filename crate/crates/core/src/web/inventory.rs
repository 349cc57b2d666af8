use axum::extract::{Path, Query};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::Form;
use maud::{html, Markup};
use serde::Deserialize;

use super::registry::RenderMode;
use super::render::{blocking, date_param, nonblank, Ctx};
use crate::auth::EndpointGroup;
use crate::error::{Error, Result};
use crate::ids::{ItemId, PurchaseRequestId};
use crate::inventory::{AreaReport, Item, PurchaseRequest, PurchaseStatus};
use crate::scheduling::AreaType;
use crate::Campus;

fn catalog_view(items: &[Item], notice: Option<String>) -> Markup {
    html! {
        section #catalog {
            @if let Some(n) = notice { p .notice role="status" { (n) } }
            table {
                thead { tr { th { "Item" } th .hide-narrow { "Category" } th .num { "Available" } th { "Unit" } } }
                tbody {
                    @for i in items {
                        tr id={ "item-" (i.id) } data-id=(i.id) {
                            td { (i.name) } td .hide-narrow { (i.category) } td .num { (i.available_quantity) } td { (i.unit) }
                        }
                    }
                }
            }
            @if items.is_empty() { p .empty { "No items." } }
        }
    }
}

fn item_options(items: &[Item]) -> Markup {
    html! {
        option value="" { "Item" }
        @for i in items { option value=(i.id) { (i.name) " (" (i.available_quantity) " " (i.unit) ")" } }
    }
}

fn area_options(areas: &[AreaType], selected: Option<&str>) -> Markup {
    html! {
        @for a in areas { option value=(a.code) selected[selected == Some(a.code.as_str())] { (a.display_name) } }
    }
}

fn pr_item(p: &PurchaseRequest, can_edit: bool) -> Markup {
    let url = format!("/inventory/mobile/purchase-requests/{}/status", p.id);
    html! {
        li id={ "pr-" (p.id) } data-id=(p.id) {
            strong { (p.item_name) } " x" (p.quantity) " " span .badge { (p.status.as_str()) }
            @if !p.justification.is_empty() { br; span .meta { (p.justification) } }
            @if can_edit {
                @let next: Vec<_> = PurchaseStatus::ALL.into_iter().filter(|n| p.status.can_become(*n)).collect();
                @if !next.is_empty() {
                    br;
                    form method="post" action=(url) hx-post=(url) hx-target={ "#pr-" (p.id) } hx-swap="outerHTML" {
                        @for n in next { button .secondary type="submit" name="status" value=(n.as_str()) { "Mark " (n.as_str()) } }
                    }
                }
            }
        }
    }
}

fn pr_view(list: &[PurchaseRequest], can_edit: bool) -> Markup {
    html! {
        section #purchase-requests {
            ul #pr-list .items { @for p in list { (pr_item(p, can_edit)) } }
            @if list.is_empty() { p .empty { "No purchase requests." } }
        }
    }
}

fn report_view(r: &AreaReport) -> Markup {
    let q = format!("area={}&from={}&to={}", r.area, r.from, r.to);
    html! {
        section #report {
            p {
                (r.rows.len()) " issuances, " (r.total_quantity()) " units. "
                a href={ "/inventory/report.csv?" (q) } download { "CSV" } " | "
                a href={ "/inventory/report.pdf?" (q) } download { "PDF" }
            }
            @if !r.rows.is_empty() {
                table {
                    thead { tr { th { "When" } th { "Item" } th .num { "Qty" } th .hide-narrow { "Issued to" } th .hide-narrow { "By" } } }
                    tbody {
                        @for row in &r.rows {
                            tr { td { (row.timestamp.get(..16).unwrap_or(&row.timestamp).replace('T', " ")) } td { (row.item) }
                                 td .num { (row.quantity) " " (row.unit) } td .hide-narrow { (row.issued_to) } td .hide-narrow { (row.actor) } }
                        }
                    }
                }
            }
        }
    }
}

#[derive(Deserialize, Default)]
pub(super) struct CatalogQuery {
    category: Option<String>,
}

pub(super) async fn hub(ctx: Ctx) -> Response {
    ctx.page("Inventory", |c, s, _| {
        let may = |g| c.permissions().allows(s.role(), g);
        let items = c.inventory().list_items(None)?;
        let areas = c.scheduling().areas()?;
        let today = c.today();
        Ok(html! {
            div .grid2 {
                div {
                    h2 { "Catalog" }
                    (catalog_view(&items, None))
                }
                div {
                    @if may(EndpointGroup::InventoryIssue) {
                        section .panel {
                            h2 { "Issue stock" }
                            form method="post" action="/inventory/mobile/issue" hx-post="/inventory/mobile/issue"
                                hx-target="#catalog" hx-swap="outerHTML" {
                                select name="item" aria-label="Item" required { (item_options(&items)) }
                                input type="number" name="quantity" min="1" value="1" aria-label="Quantity" required;
                                select name="area" aria-label="Area" required { (area_options(&areas, None)) }
                                input name="issued_to" placeholder="Issued to" aria-label="Issued to";
                                button type="submit" { "Issue" }
                            }
                            h2 { "Receive stock" }
                            form method="post" action="/inventory/mobile/stock" hx-post="/inventory/mobile/stock"
                                hx-target="#catalog" hx-swap="outerHTML" {
                                select name="item" aria-label="Item" required { (item_options(&items)) }
                                input type="number" name="quantity" min="1" value="1" aria-label="Quantity" required;
                                button type="submit" { "Add" }
                            }
                        }
                    }
                    @if may(EndpointGroup::InventoryPurchase) {
                        section .panel {
                            h2 { "New item" }
                            form method="post" action="/inventory/mobile/items" hx-post="/inventory/mobile/items"
                                hx-target="#catalog" hx-swap="outerHTML" {
                                input name="name" placeholder="Name" aria-label="Name" required;
                                input name="category" placeholder="Category" aria-label="Category" required;
                                input name="unit" placeholder="Unit" aria-label="Unit" value="piece" required;
                                input type="number" name="quantity" min="0" value="0" aria-label="Opening stock";
                                button type="submit" { "Create" }
                            }
                            h2 { "Purchase requests" }
                            form method="post" action="/inventory/mobile/purchase-requests" hx-post="/inventory/mobile/purchase-requests"
                                hx-target="#pr-list" hx-swap="beforeend" hx-on--after-request="if(event.detail.successful) this.reset()" {
                                input name="item_name" placeholder="Item" aria-label="Item" required;
                                input type="number" name="quantity" min="1" value="1" aria-label="Quantity" required;
                                input name="justification" placeholder="Why" aria-label="Justification";
                                button type="submit" { "Request" }
                            }
                            (pr_view(&c.inventory().purchase_requests()?, true))
                        }
                    }
                    @if may(EndpointGroup::InventoryReport) {
                        section .panel {
                            h2 { "Area report" }
                            form method="get" action="/inventory/mobile/report" hx-get="/inventory/mobile/report"
                                hx-target="#report" hx-swap="outerHTML" {
                                select name="area" aria-label="Area" required { (area_options(&areas, None)) }
                                input type="date" name="from" value=(today) aria-label="From";
                                input type="date" name="to" value=(today) aria-label="To";
                                button type="submit" { "Show" }
                            }
                            section #report {}
                        }
                    }
                }
            }
        })
    })
    .await
}

pub(super) async fn catalog(ctx: Ctx, Query(q): Query<CatalogQuery>) -> Response {
    ctx.page("Catalog", move |c, _, _| {
        let category = nonblank(q.category);
        Ok(catalog_view(&c.inventory().list_items(category.as_deref())?, None))
    })
    .await
}

fn item_id(raw: &str) -> Result<ItemId> {
    raw.trim().parse().map_err(|_| Error::Invalid("choose an item".into()))
}

fn quantity(raw: &str) -> Result<i64> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("bad quantity {raw:?}")))
}

#[derive(Deserialize)]
pub(super) struct NewItemForm {
    name: String,
    category: String,
    unit: String,
    #[serde(default)]
    quantity: String,
}

pub(super) async fn create_item(ctx: Ctx, Form(f): Form<NewItemForm>) -> Response {
    ctx.action("/inventory/mobile/", move |c, s| {
        let qty = if f.quantity.trim().is_empty() { 0 } else { quantity(&f.quantity)? };
        let item = c.inventory().create_item(&f.category, &f.name, &f.unit, qty, s)?;
        let notice = format!("Created {}.", item.name);
        Ok(catalog_view(&c.inventory().list_items(None)?, Some(notice)))
    })
    .await
}

#[derive(Deserialize)]
pub(super) struct StockForm {
    item: String,
    quantity: String,
}

pub(super) async fn add_stock(ctx: Ctx, Form(f): Form<StockForm>) -> Response {
    ctx.action("/inventory/mobile/", move |c, s| {
        let id = item_id(&f.item)?;
        let m = c.inventory().add_stock(id, quantity(&f.quantity)?, s)?;
        let item = c.inventory().item(id)?;
        let notice = format!("Received {} {} of {}.", m.quantity, item.unit, item.name);
        Ok(catalog_view(&c.inventory().list_items(None)?, Some(notice)))
    })
    .await
}

#[derive(Deserialize)]
pub(super) struct IssueForm {
    item: String,
    quantity: String,
    area: String,
    #[serde(default)]
    issued_to: String,
}

pub(super) async fn issue(ctx: Ctx, Form(f): Form<IssueForm>) -> Response {
    ctx.action("/inventory/mobile/", move |c, s| {
        let id = item_id(&f.item)?;
        let m = c.inventory().issue_item(id, quantity(&f.quantity)?, f.area.trim(), &f.issued_to, s)?;
        let item = c.inventory().item(id)?;
        let notice = format!("Issued {} {} of {} to {}.", m.quantity, item.unit, item.name, f.area.trim());
        Ok(catalog_view(&c.inventory().list_items(None)?, Some(notice)))
    })
    .await
}

pub(super) async fn purchase_requests(ctx: Ctx) -> Response {
    ctx.page("Purchase requests", |c, _, _| Ok(pr_view(&c.inventory().purchase_requests()?, true))).await
}

#[derive(Deserialize)]
pub(super) struct PurchaseForm {
    item_name: String,
    quantity: String,
    #[serde(default)]
    justification: String,
}

pub(super) async fn create_purchase_request(ctx: Ctx, Form(f): Form<PurchaseForm>) -> Response {
    ctx.action("/inventory/mobile/", move |c, s| {
        let p = c
            .inventory()
            .create_purchase_request(&f.item_name, quantity(&f.quantity)?, &f.justification, s)?;
        Ok(pr_item(&p, true))
    })
    .await
}

#[derive(Deserialize)]
pub(super) struct StatusForm {
    status: String,
}

pub(super) async fn advance_purchase_request(ctx: Ctx, Path(id): Path<String>, Form(f): Form<StatusForm>) -> Response {
    ctx.action("/inventory/mobile/", move |c, s| {
        let id: PurchaseRequestId = id.parse().map_err(|_| Error::NotFound)?;
        let p = c.inventory().advance_purchase_request(id, f.status.parse()?, s)?;
        Ok(pr_item(&p, true))
    })
    .await
}

#[derive(Deserialize, Default)]
pub(super) struct ReportQuery {
    pub(super) area: Option<String>,
    pub(super) from: Option<String>,
    pub(super) to: Option<String>,
}

impl ReportQuery {
    pub(super) fn run(&self, c: &Campus, s: &crate::auth::Session) -> Result<AreaReport> {
        let area = nonblank(self.area.clone()).ok_or_else(|| Error::Invalid("area is required".into()))?;
        let today = c.today();
        let from = date_param(self.from.as_deref(), today)?;
        let to = date_param(self.to.as_deref(), today)?;
        c.inventory().area_report(&area, from, to, s)
    }
}

pub(super) async fn report(ctx: Ctx, Query(q): Query<ReportQuery>) -> Response {
    ctx.page("Area report", move |c, s, mode| {
        let report = q.run(c, s)?;
        let body = report_view(&report);
        Ok(match mode {
            RenderMode::FullPage => {
                let areas = c.scheduling().areas()?;
                html! {
                    form .filters method="get" action="/inventory/mobile/report" {
                        label { "Area" select name="area" { (area_options(&areas, Some(&report.area))) } }
                        label { "From" input type="date" name="from" value=(report.from); }
                        label { "To" input type="date" name="to" value=(report.to); }
                        button type="submit" { "Show" }
                    }
                    (body)
                }
            }
            _ => body,
        })
    })
    .await
}

async fn export(ctx: Ctx, q: ReportQuery, pdf: bool) -> Response {
    let Some(session) = ctx.session.clone() else {
        return ctx.fail(Error::Unauthenticated);
    };
    let out = blocking(&ctx.campus, move |c| {
        let r = q.run(c, &session)?;
        let name = format!("issuance-{}-{}-{}", r.area, r.from, r.to);
        Ok(if pdf { (r.to_pdf()?, name + ".pdf") } else { (r.to_csv()?, name + ".csv") })
    })
    .await;
    match out {
        Ok((bytes, name)) => (
            [
                (header::CONTENT_TYPE, if pdf { "application/pdf".to_string() } else { "text/csv; charset=utf-8".to_string() }),
                (header::CONTENT_DISPOSITION, format!("attachment; filename=\"{}\"", name.replace(['"', '\\', '\r', '\n'], "_"))),
            ],
            bytes,
        )
            .into_response(),
        Err(e) => ctx.fail(e),
    }
}

pub(super) async fn report_csv(ctx: Ctx, Query(q): Query<ReportQuery>) -> Response {
    export(ctx, q, false).await
}

pub(super) async fn report_pdf(ctx: Ctx, Query(q): Query<ReportQuery>) -> Response {
    export(ctx, q, true).await
}
