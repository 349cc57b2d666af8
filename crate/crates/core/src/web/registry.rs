//! Every route the server exposes, with the endpoint group that guards it,
//! the render modes it can produce and, for fragment routes, how the client
//! swaps the fragment in. The router, the authorization middleware and the
//! measurement harness all read this table.

use std::fmt;

use serde::Serialize;

use crate::auth::EndpointGroup;
use crate::error::{Error, Result};

/// Header set by the htmx client on every request it issues.
pub const HX_REQUEST: &str = "hx-request";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMode {
    FullPage,
    Fragment,
    Json,
}

impl RenderMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RenderMode::FullPage => "full_page",
            RenderMode::Fragment => "fragment",
            RenderMode::Json => "json",
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapDirective {
    /// Replace the target element itself.
    OuterReplace,
    /// Append after the target's existing children.
    AppendEnd,
}

impl SwapDirective {
    /// The `hx-swap` / `HX-Reswap` value.
    pub fn hx_swap(self) -> &'static str {
        match self {
            SwapDirective::OuterReplace => "outerHTML",
            SwapDirective::AppendEnd => "beforeend",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verb {
    Get,
    Post,
}

impl Verb {
    pub fn as_str(self) -> &'static str {
        match self {
            Verb::Get => "GET",
            Verb::Post => "POST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RouteSpec {
    pub verb: Verb,
    /// Router pattern; `{name}` matches one non-empty segment.
    pub path: &'static str,
    pub module: &'static str,
    /// `None` for public routes (login, static assets).
    pub group: Option<EndpointGroup>,
    /// Supported modes; the first is used when the requested one is absent.
    pub modes: &'static [RenderMode],
    pub swap: Option<SwapDirective>,
    /// Whether the route renders a list whose ids the JSON mirror must match.
    pub list: bool,
}

impl RouteSpec {
    pub fn supports(&self, mode: RenderMode) -> bool {
        self.modes.contains(&mode)
    }

    /// Matches a concrete request path against this route's pattern.
    pub fn matches(&self, verb: Verb, path: &str) -> bool {
        if verb != self.verb {
            return false;
        }
        let mut want = self.path.split('/');
        let mut got = path.split('/');
        loop {
            match (want.next(), got.next()) {
                (None, None) => return true,
                (Some(w), Some(g)) if w.starts_with('{') && w.ends_with('}') => {
                    if g.is_empty() {
                        return false;
                    }
                }
                (Some(w), Some(g)) if w == g => {}
                _ => return false,
            }
        }
    }
}

use EndpointGroup as G;
use RenderMode::{Fragment as Frag, FullPage as Full, Json};
use SwapDirective::{AppendEnd, OuterReplace};
use Verb::{Get, Post};

const FULL: &[RenderMode] = &[Full];
const PAGE: &[RenderMode] = &[Full, Frag];
const ACTION: &[RenderMode] = &[Frag, Full];
const FRAG: &[RenderMode] = &[Frag];
const JSON: &[RenderMode] = &[Json];

const fn r(
    verb: Verb,
    path: &'static str,
    module: &'static str,
    group: Option<EndpointGroup>,
    modes: &'static [RenderMode],
    swap: Option<SwapDirective>,
    list: bool,
) -> RouteSpec {
    RouteSpec { verb, path, module, group, modes, swap, list }
}

const O: Option<SwapDirective> = Some(OuterReplace);
const A: Option<SwapDirective> = Some(AppendEnd);

pub static ROUTES: &[RouteSpec] = &[
    r(Get, "/", "auth", None, FULL, None, false),
    r(Get, "/login", "auth", None, FULL, None, false),
    r(Post, "/login", "auth", None, FULL, None, false),
    r(Post, "/logout", "auth", None, FULL, None, false),
    r(Get, "/static/{file}", "static", None, FULL, None, false),
    // housekeeping
    r(Get, "/housekeeping/dashboard/", "scheduling", Some(G::HousekeepingView), FULL, None, false),
    r(Get, "/housekeeping/tasks/", "scheduling", Some(G::HousekeepingView), PAGE, O, true),
    r(Get, "/housekeeping/tasks/{id}/", "scheduling", Some(G::HousekeepingView), PAGE, O, false),
    r(Post, "/housekeeping/tasks/{id}/assign", "scheduling", Some(G::HousekeepingAssign), ACTION, O, false),
    r(Post, "/housekeeping/tasks/{id}/complete", "scheduling", Some(G::HousekeepingComplete), ACTION, O, false),
    r(Post, "/housekeeping/tasks/{id}/flag", "scheduling", Some(G::HousekeepingFlag), ACTION, O, false),
    r(Get, "/housekeeping/attendance/", "attendance", Some(G::AttendanceManage), PAGE, O, true),
    r(Post, "/housekeeping/attendance/record", "attendance", Some(G::AttendanceManage), ACTION, O, false),
    r(Post, "/housekeeping/attendance/submit", "attendance", Some(G::AttendanceManage), ACTION, O, false),
    r(Get, "/housekeeping/leave/", "leave", Some(G::LeaveRequest), FULL, None, false),
    r(Get, "/housekeeping/leave/mine", "leave", Some(G::LeaveRequest), PAGE, O, true),
    r(Post, "/housekeeping/leave/requests", "leave", Some(G::LeaveRequest), ACTION, A, false),
    r(Get, "/housekeeping/leave/inbox", "leave", Some(G::LeaveRespond), PAGE, O, true),
    r(Post, "/housekeeping/leave/assignments/{uuid}/respond", "leave", Some(G::LeaveRespond), ACTION, O, false),
    r(Get, "/housekeeping/leave/queue", "leave", Some(G::LeaveAssign), PAGE, O, true),
    r(Post, "/housekeeping/leave/{id}/assign", "leave", Some(G::LeaveAssign), ACTION, O, false),
    r(Post, "/housekeeping/leave/{id}/decide", "leave", Some(G::LeaveDecide), ACTION, O, false),
    r(Get, "/housekeeping/notifications/", "leave", Some(G::Notifications), PAGE, O, true),
    r(Get, "/housekeeping/notifications/bell", "leave", Some(G::Notifications), FRAG, O, false),
    r(Post, "/housekeeping/notifications/read", "leave", Some(G::Notifications), ACTION, O, false),
    // inventory
    r(Get, "/inventory/mobile/", "inventory", Some(G::InventoryView), FULL, None, false),
    r(Get, "/inventory/mobile/catalog", "inventory", Some(G::InventoryView), PAGE, O, true),
    r(Post, "/inventory/mobile/items", "inventory", Some(G::InventoryPurchase), ACTION, O, false),
    r(Post, "/inventory/mobile/stock", "inventory", Some(G::InventoryIssue), ACTION, O, false),
    r(Post, "/inventory/mobile/issue", "inventory", Some(G::InventoryIssue), ACTION, O, false),
    r(Get, "/inventory/mobile/purchase-requests", "inventory", Some(G::InventoryPurchase), PAGE, O, true),
    r(Post, "/inventory/mobile/purchase-requests", "inventory", Some(G::InventoryPurchase), ACTION, A, false),
    r(Post, "/inventory/mobile/purchase-requests/{id}/status", "inventory", Some(G::InventoryPurchase), ACTION, O, false),
    r(Get, "/inventory/mobile/report", "inventory", Some(G::InventoryReport), PAGE, O, false),
    r(Get, "/inventory/report.csv", "inventory", Some(G::InventoryReport), FULL, None, false),
    r(Get, "/inventory/report.pdf", "inventory", Some(G::InventoryReport), FULL, None, false),
    // admin and media
    r(Get, "/admin/dashboard/", "admin", Some(G::AdminDashboard), FULL, None, false),
    r(Get, "/admin/leave/{id}/audit", "leave", Some(G::LeaveAudit), PAGE, O, false),
    r(Get, "/media/photos/{id}/{variant}", "photo", Some(G::PhotosView), FULL, None, false),
    // JSON mirror
    r(Get, "/api/housekeeping/areas/", "scheduling", Some(G::HousekeepingView), JSON, None, false),
    r(Get, "/api/housekeeping/templates/", "scheduling", Some(G::HousekeepingView), JSON, None, false),
    r(Get, "/api/housekeeping/tasks/", "scheduling", Some(G::HousekeepingView), JSON, None, true),
    r(Get, "/api/housekeeping/tasks/{id}/", "scheduling", Some(G::HousekeepingView), JSON, None, false),
    r(Get, "/api/housekeeping/attendance/", "attendance", Some(G::AttendanceManage), JSON, None, true),
    r(Get, "/api/housekeeping/leave/mine", "leave", Some(G::LeaveRequest), JSON, None, true),
    r(Get, "/api/housekeeping/leave/inbox", "leave", Some(G::LeaveRespond), JSON, None, true),
    r(Get, "/api/housekeeping/leave/queue", "leave", Some(G::LeaveAssign), JSON, None, true),
    r(Get, "/api/housekeeping/leave/{id}/audit", "leave", Some(G::LeaveAudit), JSON, None, false),
    r(Get, "/api/housekeeping/notifications/", "leave", Some(G::Notifications), JSON, None, true),
    r(Get, "/api/inventory/items/", "inventory", Some(G::InventoryView), JSON, None, true),
    r(Get, "/api/inventory/purchase-requests/", "inventory", Some(G::InventoryPurchase), JSON, None, true),
    r(Get, "/api/inventory/report", "inventory", Some(G::InventoryReport), JSON, None, false),
    r(Get, "/api/photos/{id}", "photo", Some(G::PhotosView), JSON, None, false),
    r(Get, "/api/admin/summary", "admin", Some(G::AdminDashboard), JSON, None, false),
];

/// The registered route for a router pattern.
pub fn spec(verb: Verb, pattern: &str) -> Option<&'static RouteSpec> {
    ROUTES.iter().find(|r| r.verb == verb && r.path == pattern)
}

/// The registered route serving a concrete path.
pub fn route_for(verb: Verb, path: &str) -> Option<&'static RouteSpec> {
    ROUTES.iter().find(|r| r.matches(verb, path))
}

/// Whether a query string carries the `fragment=1` fallback marker.
pub fn wants_fragment(query: Option<&str>) -> bool {
    query
        .unwrap_or("")
        .split('&')
        .any(|kv| kv == "fragment=1" || kv == "fragment=true")
}

/// Picks the render mode for a request to `route`: JSON under `/api/`,
/// otherwise a fragment when the htmx marker (or `?fragment=1`) is present,
/// else a full page; clamped to what the route supports.
pub fn mode_for(route: &RouteSpec, hx_request: bool, query: Option<&str>) -> RenderMode {
    let wanted = if route.path.starts_with("/api/") {
        RenderMode::Json
    } else if hx_request || wants_fragment(query) {
        RenderMode::Fragment
    } else {
        RenderMode::FullPage
    };
    if route.supports(wanted) {
        wanted
    } else {
        route.modes[0]
    }
}

/// [`mode_for`] over a concrete path; unregistered paths are not found.
pub fn negotiate_mode(verb: Verb, path: &str, hx_request: bool, query: Option<&str>) -> Result<RenderMode> {
    let route = route_for(verb, path).ok_or(Error::NotFound)?;
    Ok(mode_for(route, hx_request, query))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negotiation_rules() {
        let tasks = "/housekeeping/tasks/";
        assert_eq!(negotiate_mode(Get, tasks, true, None).unwrap(), Frag);
        assert_eq!(negotiate_mode(Get, tasks, false, None).unwrap(), Full);
        assert_eq!(negotiate_mode(Get, tasks, false, Some("date=2025-03-03&fragment=1")).unwrap(), Frag);
        assert_eq!(negotiate_mode(Get, "/api/housekeeping/tasks/", true, None).unwrap(), Json);
        assert_eq!(negotiate_mode(Get, "/api/housekeeping/tasks/", false, None).unwrap(), Json);
        assert!(matches!(negotiate_mode(Get, "/nope", false, None), Err(Error::NotFound)));
    }

    #[test]
    fn patterns_match_one_segment() {
        let card = spec(Get, "/housekeeping/tasks/{id}/").unwrap();
        assert!(card.matches(Get, "/housekeeping/tasks/17/"));
        assert!(!card.matches(Get, "/housekeeping/tasks//"));
        assert!(!card.matches(Get, "/housekeeping/tasks/17"));
        assert!(!card.matches(Post, "/housekeeping/tasks/17/"));
        assert_eq!(route_for(Get, "/housekeeping/tasks/").unwrap().path, "/housekeeping/tasks/");
    }

    #[test]
    fn table_is_well_formed() {
        for (i, r) in ROUTES.iter().enumerate() {
            assert!(!r.modes.is_empty(), "{}", r.path);
            assert_eq!(r.path.starts_with("/api/"), r.modes == JSON, "{}", r.path);
            assert_eq!(r.supports(Frag), r.swap.is_some(), "{} swap declaration", r.path);
            assert!(
                ROUTES[..i].iter().all(|o| (o.verb, o.path) != (r.verb, r.path)),
                "duplicate {}",
                r.path
            );
        }
    }
}
