#![allow(dead_code)]

use std::collections::BTreeSet;

use axum::body::Body;
use axum::http::{HeaderMap, Request, StatusCode};
use axum::Router;
use chrono::NaiveTime;
use http_body_util::BodyExt;
use tower::ServiceExt;

use campus_core::scheduling::{Frequency, NewTemplate};
use campus_core::testing::TestCampus;
use campus_core::web::render::SESSION_COOKIE;
use campus_core::{Role, Session, UserAccount};

pub struct Resp {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub bytes: Vec<u8>,
}

impl Resp {
    pub fn text(&self) -> String {
        String::from_utf8_lossy(&self.bytes).into_owned()
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(name).and_then(|v| v.to_str().ok())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("not json ({e}): {}", self.text()))
    }
}

/// A test campus plus its router, driven in-process.
pub struct Web {
    pub tc: TestCampus,
    pub app: Router,
}

impl Web {
    pub fn new() -> Self {
        Self::from(TestCampus::new())
    }

    pub fn from(tc: TestCampus) -> Self {
        let app = campus_core::web::router(tc.campus.clone());
        Self { tc, app }
    }

    pub async fn send(&self, req: Request<Body>) -> Resp {
        let resp = self.app.clone().oneshot(req).await.expect("infallible");
        let status = resp.status();
        let headers = resp.headers().clone();
        let bytes = resp.into_body().collect().await.expect("body").to_bytes().to_vec();
        Resp { status, headers, bytes }
    }

    fn builder(method: &str, path: &str, session: Option<&Session>, hx: bool) -> axum::http::request::Builder {
        let mut b = Request::builder().method(method).uri(path);
        if let Some(s) = session {
            b = b.header("cookie", format!("{SESSION_COOKIE}={}", s.token));
        }
        if hx {
            b = b.header("hx-request", "true");
        }
        b
    }

    pub async fn get(&self, path: &str, session: Option<&Session>, hx: bool) -> Resp {
        self.send(Self::builder("GET", path, session, hx).body(Body::empty()).unwrap()).await
    }

    pub async fn post(&self, path: &str, session: Option<&Session>, hx: bool, form: &str) -> Resp {
        let req = Self::builder("POST", path, session, hx)
            .header("content-type", "application/x-www-form-urlencoded")
            .body(Body::from(form.to_string()))
            .unwrap();
        self.send(req).await
    }

    pub fn queries(&self) -> u64 {
        self.tc.campus.store().query_count()
    }
}

pub fn template(name: &str, area: &str, frequency: Frequency, requires_photo: bool) -> NewTemplate {
    NewTemplate {
        name: name.to_string(),
        area_code: area.to_string(),
        frequency,
        window_start: NaiveTime::from_hms_opt(8, 0, 0).unwrap(),
        window_end: NaiveTime::from_hms_opt(10, 0, 0).unwrap(),
        worker_tags: BTreeSet::new(),
        requires_photo,
    }
}

/// `n` daily templates spread over the area registry.
pub fn daily_templates(tc: &TestCampus, n: usize) {
    let areas = tc.campus.scheduling().areas().unwrap();
    for i in 0..n {
        let area = &areas[i % areas.len()].code;
        tc.campus
            .scheduling()
            .create_template(&template(&format!("Task {i:03}"), area, Frequency::Daily, false))
            .unwrap();
    }
}

pub fn caretakers(tc: &TestCampus, n: usize) -> Vec<UserAccount> {
    (0..n)
        .map(|i| tc.user_named(&format!("ct{i:03}"), &format!("Caretaker {i:03}"), Role::Caretaker))
        .collect()
}

/// Every `data-id="..."` value in `html`, in document order.
pub fn data_ids(html: &str) -> Vec<String> {
    html.split("data-id=\"").skip(1).map(|s| s[..s.find('"').unwrap()].to_string()).collect()
}

/// The `id` field of every element of a JSON array, as strings.
pub fn json_ids(v: &serde_json::Value) -> Vec<String> {
    v.as_array()
        .expect("json array")
        .iter()
        .map(|o| match &o["id"] {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect()
}

/// Sessions and sizes of a campus populated by [`populate`].
pub struct Fixture {
    pub admin: Session,
    pub hk: Session,
    pub sup: Session,
    pub inv: Session,
    /// First caretaker; holds leave requests and an incharge inbox item.
    pub ct: Session,
    pub date: chrono::NaiveDate,
}

/// Fills every list view with `n` rows of its kind: task cards, caretakers on
/// the attendance sheet, leave requests, notifications, items and purchase
/// requests. Some records are moved along their lifecycles so every card
/// state renders.
pub fn populate(tc: &TestCampus, n: usize) -> Fixture {
    use campus_core::attendance::{AttendanceStatus, HalfDaySlot};
    use campus_core::scheduling::TaskFilter;

    let c = &tc.campus;
    let admin = tc.actor("admin", Role::Admin);
    let hk = tc.actor("hk", Role::HousekeepingManager);
    let sup = tc.actor("sup", Role::Supervisor);
    let inv = tc.actor("inv", Role::InventoryManager);
    let workers = caretakers(tc, n.max(2));
    let ct = tc.login(&workers[0].username);
    let other = tc.login(&workers[1].username);
    let date = c.today();

    daily_templates(tc, n);
    let records = c.scheduling().instantiate_daily_records(date).unwrap();
    for (i, r) in records.iter().enumerate() {
        if i % 4 == 0 {
            continue;
        }
        c.scheduling().assign_workers(r.id, &[workers[i % workers.len()].id], &hk).unwrap();
        if i % 4 >= 2 {
            c.scheduling().complete_task(r.id, None, None, &sup).unwrap();
        }
        if i % 4 == 3 {
            c.scheduling().flag_record(r.id, "redo", &sup).unwrap();
        }
    }
    let _ = c.scheduling().task_cards(&TaskFilter::default()).unwrap();

    for (i, w) in workers.iter().enumerate() {
        let status = AttendanceStatus::ALL[i % 4];
        c.attendance().record_attendance(w.id, date, HalfDaySlot::FirstHalf, status, &sup).unwrap();
    }

    for i in 0..n {
        let start = date + chrono::Duration::days(i as i64 + 1);
        let req = c.leave().create_leave_request(&ct, start, start, &format!("reason {i}")).unwrap();
        let a = c.leave().assign_incharge(req.id, other.user_id(), &hk).unwrap();
        if i % 2 == 1 {
            c.leave().incharge_respond(a.id, true, &other).unwrap();
        }
        let req = c.leave().create_leave_request(&other, start, start, &format!("cover {i}")).unwrap();
        c.leave().assign_incharge(req.id, ct.user_id(), &hk).unwrap();
    }

    for i in 0..n {
        let item = c
            .inventory()
            .create_item(&format!("cat{}", i % 5), &format!("Item {i:03}"), "piece", 100, &inv)
            .unwrap();
        c.inventory().issue_item(item.id, 1, "hostels", "block A", &inv).unwrap();
        c.inventory().create_purchase_request(&format!("Request {i:03}"), 3, "restock", &inv).unwrap();
    }

    Fixture { admin, hk, sup, inv, ct, date }
}
