use axum::response::Response;
use maud::html;

use super::leave::queue_view;
use super::render::{day, Ctx};
use crate::auth::EndpointGroup;

fn pairs(rows: &[(String, u64)]) -> maud::Markup {
    html! {
        @if rows.is_empty() { span .empty { "none" } }
        @for (k, n) in rows { span .badge { (k) " " (n) } " " }
    }
}

pub(super) async fn dashboard(ctx: Ctx) -> Response {
    ctx.page("Admin dashboard", |c, s, _| {
        let today = c.today();
        let sum = c.admin().summary(today, s)?;
        let may_queue = c.permissions().allows(s.role(), EndpointGroup::LeaveDecide)
            || c.permissions().allows(s.role(), EndpointGroup::LeaveAssign);
        let queue = if may_queue { Some(queue_view(&c.leave().queue(s)?, c, s)?) } else { None };
        Ok(html! {
            section #admin-summary .stats data-date=(sum.date) {
                h2 { (day(today)) }
                dl {
                    dt { "Tasks" } dd { (pairs(&sum.tasks_by_status)) }
                    dt { "Attendance" } dd { (sum.attendance_recorded) " marked, " (sum.attendance_submitted) " locked" }
                    dt { "Leave" } dd { (pairs(&sum.leave_by_state)) }
                    dt { "Photos" } dd {
                        (sum.photos)
                        @if let Some(r) = sum.mean_compression_ratio { ", mean ratio " (format!("{r:.2}")) }
                    }
                    dt { "Items" } dd { (sum.items) ", " (sum.open_purchase_requests) " open purchase requests" }
                    dt { "Users" } dd { (pairs(&sum.users_by_role)) }
                }
                @if !sum.low_stock.is_empty() {
                    h3 { "Low stock" }
                    ul .items { @for (name, n) in &sum.low_stock { li { (name) ": " (n) } } }
                }
            }
            @if let Some(q) = queue {
                h2 { "Leave queue" }
                (q)
            }
        })
    })
    .await
}
