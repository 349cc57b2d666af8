//! The HTTP layer: hypermedia pages and fragments, the JSON mirror under
//! `/api/`, static assets and photo media.
//!
//! Routing is driven by [`registry::ROUTES`]; every guarded route passes the
//! session and permission check in [`guard`] before its handler runs.

pub mod registry;
pub mod render;

mod admin;
mod api;
mod attendance;
mod housekeeping;
mod inventory;
mod leave;
mod session;

use std::sync::Arc;

use axum::extract::{DefaultBodyLimit, MatchedPath, Path, Request, State};
use axum::http::{header, Method, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, MethodRouter};
use axum::Router;

use crate::auth::Decision;
use crate::error::Error;
use crate::Campus;
use registry::{mode_for, RenderMode, RouteSpec, Verb, HX_REQUEST, ROUTES};
use render::{blocking, cookie, error_response, unauthenticated, Ctx, SESSION_COOKIE};

type State_ = Arc<Campus>;

/// The complete application router.
pub fn router(campus: Arc<Campus>) -> Router {
    let mut app: Router<State_> = Router::new();
    let mut seen: Vec<&str> = Vec::new();
    for spec in ROUTES {
        if seen.contains(&spec.path) {
            continue;
        }
        seen.push(spec.path);
        let mut methods: MethodRouter<State_> = MethodRouter::new();
        for s in ROUTES.iter().filter(|s| s.path == spec.path) {
            methods = methods.merge(handler_for(s, &campus));
        }
        app = app.route(spec.path, methods);
    }
    app.route_layer(middleware::from_fn_with_state(campus.clone(), guard))
        .fallback(fallback)
        .with_state(campus)
}

/// Serves the application on `listener`; await the result to run it.
pub fn serve(listener: tokio::net::TcpListener, campus: Arc<Campus>) -> axum::serve::Serve<tokio::net::TcpListener, Router, Router> {
    axum::serve(listener, router(campus))
}

fn handler_for(spec: &RouteSpec, campus: &Campus) -> MethodRouter<State_> {
    let upload_limit = (campus.config().max_photo_bytes as usize).saturating_mul(2) + (1 << 20);
    match (spec.verb, spec.path) {
        (Verb::Get, "/") => get(session::root),
        (Verb::Get, "/login") => get(session::login_page),
        (Verb::Post, "/login") => post(session::login),
        (Verb::Post, "/logout") => post(session::logout),
        (Verb::Get, "/static/{file}") => get(static_asset),

        (Verb::Get, "/housekeeping/dashboard/") => get(housekeeping::dashboard),
        (Verb::Get, "/housekeeping/tasks/") => get(housekeeping::task_list),
        (Verb::Get, "/housekeeping/tasks/{id}/") => get(housekeeping::task_card),
        (Verb::Post, "/housekeeping/tasks/{id}/assign") => post(housekeeping::assign),
        (Verb::Post, "/housekeeping/tasks/{id}/complete") => {
            post(housekeeping::complete).layer(DefaultBodyLimit::max(upload_limit))
        }
        (Verb::Post, "/housekeeping/tasks/{id}/flag") => post(housekeeping::flag),

        (Verb::Get, "/housekeeping/attendance/") => get(attendance::sheet),
        (Verb::Post, "/housekeeping/attendance/record") => post(attendance::record),
        (Verb::Post, "/housekeeping/attendance/submit") => post(attendance::submit),

        (Verb::Get, "/housekeeping/leave/") => get(leave::hub),
        (Verb::Get, "/housekeeping/leave/mine") => get(leave::mine),
        (Verb::Post, "/housekeeping/leave/requests") => post(leave::create),
        (Verb::Get, "/housekeeping/leave/inbox") => get(leave::inbox),
        (Verb::Post, "/housekeeping/leave/assignments/{uuid}/respond") => post(leave::respond),
        (Verb::Get, "/housekeeping/leave/queue") => get(leave::queue),
        (Verb::Post, "/housekeeping/leave/{id}/assign") => post(leave::assign),
        (Verb::Post, "/housekeeping/leave/{id}/decide") => post(leave::decide),
        (Verb::Get, "/housekeeping/notifications/") => get(leave::notifications),
        (Verb::Get, "/housekeeping/notifications/bell") => get(leave::bell),
        (Verb::Post, "/housekeeping/notifications/read") => post(leave::mark_read),

        (Verb::Get, "/inventory/mobile/") => get(inventory::hub),
        (Verb::Get, "/inventory/mobile/catalog") => get(inventory::catalog),
        (Verb::Post, "/inventory/mobile/items") => post(inventory::create_item),
        (Verb::Post, "/inventory/mobile/stock") => post(inventory::add_stock),
        (Verb::Post, "/inventory/mobile/issue") => post(inventory::issue),
        (Verb::Get, "/inventory/mobile/purchase-requests") => get(inventory::purchase_requests),
        (Verb::Post, "/inventory/mobile/purchase-requests") => post(inventory::create_purchase_request),
        (Verb::Post, "/inventory/mobile/purchase-requests/{id}/status") => post(inventory::advance_purchase_request),
        (Verb::Get, "/inventory/mobile/report") => get(inventory::report),
        (Verb::Get, "/inventory/report.csv") => get(inventory::report_csv),
        (Verb::Get, "/inventory/report.pdf") => get(inventory::report_pdf),

        (Verb::Get, "/admin/dashboard/") => get(admin::dashboard),
        (Verb::Get, "/admin/leave/{id}/audit") => get(leave::audit),
        (Verb::Get, "/media/photos/{id}/{variant}") => get(housekeeping::photo),

        (Verb::Get, "/api/housekeeping/areas/") => get(api::areas),
        (Verb::Get, "/api/housekeeping/templates/") => get(api::templates),
        (Verb::Get, "/api/housekeeping/tasks/") => get(api::tasks),
        (Verb::Get, "/api/housekeeping/tasks/{id}/") => get(api::task),
        (Verb::Get, "/api/housekeeping/attendance/") => get(api::attendance),
        (Verb::Get, "/api/housekeeping/leave/mine") => get(api::leave_mine),
        (Verb::Get, "/api/housekeeping/leave/inbox") => get(api::leave_inbox),
        (Verb::Get, "/api/housekeeping/leave/queue") => get(api::leave_queue),
        (Verb::Get, "/api/housekeeping/leave/{id}/audit") => get(api::leave_audit),
        (Verb::Get, "/api/housekeeping/notifications/") => get(api::notifications),
        (Verb::Get, "/api/inventory/items/") => get(api::items),
        (Verb::Get, "/api/inventory/purchase-requests/") => get(api::purchase_requests),
        (Verb::Get, "/api/inventory/report") => get(api::report),
        (Verb::Get, "/api/photos/{id}") => get(api::photo),
        (Verb::Get, "/api/admin/summary") => get(api::admin_summary),
        (verb, path) => panic!("registered route {} {path} has no handler", verb.as_str()),
    }
}

fn verb_of(method: &Method) -> Option<Verb> {
    match *method {
        Method::GET | Method::HEAD => Some(Verb::Get),
        Method::POST => Some(Verb::Post),
        _ => None,
    }
}

fn is_hx(req: &Request) -> bool {
    req.headers().get(HX_REQUEST).is_some_and(|v| v == "true")
}

/// Resolves the route, render mode and session, then enforces the
/// permission matrix. Denials answer exactly like unknown paths.
async fn guard(State(campus): State<State_>, mut req: Request, next: Next) -> Response {
    let pattern = req.extensions().get::<MatchedPath>().map(|m| m.as_str().to_string());
    let route = verb_of(req.method()).zip(pattern).and_then(|(v, p)| registry::spec(v, &p));
    let Some(route) = route else {
        return StatusCode::METHOD_NOT_ALLOWED.into_response();
    };
    let mode = mode_for(route, is_hx(&req), req.uri().query());
    let token = cookie(req.headers(), SESSION_COOKIE).map(str::to_string);
    let session = match route.group {
        None => match token {
            Some(t) => blocking(&campus, move |c| c.accounts().session(&t)).await.ok(),
            None => None,
        },
        Some(group) => {
            let checked = blocking(&campus, move |c| c.accounts().authorize(token.as_deref(), group)).await;
            match checked {
                Ok((s, Decision::Allow)) => Some(s),
                Ok((s, Decision::Deny)) => return error_response(&Error::NotFound, mode, Some(&s), &campus.perms),
                Err(e) => return error_response(&e, mode, None, &campus.perms),
            }
        }
    };
    req.extensions_mut().insert(Ctx { campus, session, mode, route });
    next.run(req).await
}

/// Unregistered paths: unauthenticated callers are sent to log in, exactly
/// as on a real route; authenticated ones get the shared not-found answer.
async fn fallback(State(campus): State<State_>, req: Request) -> Response {
    let api = req.uri().path().starts_with("/api/");
    let mode = if api {
        RenderMode::Json
    } else if is_hx(&req) {
        RenderMode::Fragment
    } else {
        RenderMode::FullPage
    };
    let token = cookie(req.headers(), SESSION_COOKIE).map(str::to_string);
    let session = match token {
        Some(t) => blocking(&campus, move |c| c.accounts().session(&t)).await.ok(),
        None => None,
    };
    match session {
        None => unauthenticated(mode),
        Some(s) => error_response(&Error::NotFound, mode, Some(&s), &campus.perms),
    }
}

pub const HTMX_JS: &[u8] = include_bytes!("../../static/htmx.min.js");
pub const CAMPUS_CSS: &[u8] = include_bytes!("../../static/campus.css");

/// Static assets are versioned by query string, so they may be cached forever.
async fn static_asset(Path(file): Path<String>) -> Response {
    let (body, content_type) = match file.as_str() {
        "htmx.min.js" => (HTMX_JS, "text/javascript; charset=utf-8"),
        "campus.css" => (CAMPUS_CSS, "text/css; charset=utf-8"),
        _ => return StatusCode::NOT_FOUND.into_response(),
    };
    (
        [
            (header::CONTENT_TYPE, content_type),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
        ],
        body,
    )
        .into_response()
}
