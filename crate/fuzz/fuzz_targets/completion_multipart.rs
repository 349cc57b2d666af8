#![no_main]

//! Arbitrary multipart bodies posted to the completion endpoint of one
//! assigned task. The server must answer without a 5xx and keep photo
//! storage consistent.

use std::sync::LazyLock;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use campus_core::scheduling::{Frequency, NewTemplate};
use campus_core::testing::TestCampus;
use campus_core::web::render::SESSION_COOKIE;
use campus_core::Role;
use chrono::NaiveTime;
use libfuzzer_sys::fuzz_target;
use tower::ServiceExt;

const BOUNDARY: &str = "fuzzboundary";

struct Fixture {
    tc: TestCampus,
    app: Router,
    cookie: String,
    path: String,
    rt: tokio::runtime::Runtime,
}

static FIXTURE: LazyLock<Fixture> = LazyLock::new(|| {
    let tc = TestCampus::new();
    let hk = tc.actor("hk", Role::HousekeepingManager);
    let ct = tc.actor("ct", Role::Caretaker);
    let sched = tc.campus.scheduling();
    sched
        .create_template(&NewTemplate {
            name: "Lobby".into(),
            area_code: "hostels".into(),
            frequency: Frequency::Daily,
            window_start: chrono_time(8),
            window_end: chrono_time(10),
            worker_tags: Default::default(),
            requires_photo: true,
        })
        .unwrap();
    let record = sched.instantiate_daily_records(tc.campus.today()).unwrap().remove(0);
    sched.assign_workers(record.id, &[ct.user_id()], &hk).unwrap();
    Fixture {
        app: campus_core::web::router(tc.campus.clone()),
        cookie: format!("{SESSION_COOKIE}={}", ct.token),
        path: format!("/housekeeping/tasks/{}/complete", record.id),
        rt: tokio::runtime::Builder::new_current_thread().build().unwrap(),
        tc,
    }
});

fn chrono_time(h: u32) -> NaiveTime {
    NaiveTime::from_hms_opt(h, 0, 0).unwrap()
}

fuzz_target!(|data: &[u8]| {
    let f = &*FIXTURE;
    let req = Request::post(&f.path)
        .header("cookie", &f.cookie)
        .header("hx-request", "true")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(data.to_vec()))
        .unwrap();
    let resp = f.rt.block_on(f.app.clone().oneshot(req)).unwrap();
    assert!(!resp.status().is_server_error(), "{}", resp.status());
    assert!(f.tc.campus.photos().consistency_scan().unwrap().is_empty());
});
