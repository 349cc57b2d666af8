mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use campus_core::photo::sha256_hex;
use campus_core::scheduling::Frequency;
use campus_core::web::render::SESSION_COOKIE;
use campus_core::{Role, Session};
use common::{data_ids, template, Resp, Web};

const BOUNDARY: &str = "----campus-test-boundary";

fn multipart(parts: &[(&str, Option<&str>, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, filename, bytes) in parts {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        match filename {
            Some(f) => body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{f}\"\r\nContent-Type: image/jpeg\r\n\r\n")
                    .as_bytes(),
            ),
            None => body.extend_from_slice(format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes()),
        }
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

async fn post_multipart(web: &Web, path: &str, s: &Session, body: Vec<u8>) -> Resp {
    let req = Request::builder()
        .method("POST")
        .uri(path)
        .header("cookie", format!("{SESSION_COOKIE}={}", s.token))
        .header("hx-request", "true")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(body))
        .unwrap();
    web.send(req).await
}

fn corpus(name: &str) -> Vec<u8> {
    std::fs::read(format!("{}/tests/corpus/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn assert_flash(resp: &Resp, status: StatusCode) {
    assert_eq!(resp.status, status, "{}", resp.text());
    assert_eq!(resp.header("hx-retarget"), Some("#flash"));
    assert_eq!(resp.header("hx-reswap"), Some("outerHTML"));
    let text = resp.text();
    assert!(text.starts_with("<div ") && text.contains("id=\"flash\""), "{text}");
}

struct Setup {
    web: Web,
    hk: Session,
    sup: Session,
    ct: Session,
    ct2: Session,
}

fn setup() -> Setup {
    let web = Web::new();
    let hk = web.tc.actor("hk", Role::HousekeepingManager);
    let sup = web.tc.actor("sup", Role::Supervisor);
    let ct = web.tc.actor("ct", Role::Caretaker);
    let ct2 = web.tc.actor("ct2", Role::Caretaker);
    Setup { web, hk, sup, ct, ct2 }
}

#[tokio::test]
async fn task_card_walks_from_pending_to_flagged_through_fragments() {
    let Setup { web, hk, sup, ct, ct2 } = setup();
    let c = &web.tc.campus;
    c.scheduling().create_template(&template("Mop lobby", "hostels", Frequency::Daily, true)).unwrap();
    let rec = c.scheduling().instantiate_daily_records(c.today()).unwrap()[0].clone();
    let base = format!("/housekeeping/tasks/{}", rec.id);

    let two = format!("worker={}&worker={}", ct.user_id(), ct2.user_id());
    let resp = web.post(&format!("{base}/assign"), Some(&hk), true, &two).await;
    assert_flash(&resp, StatusCode::UNPROCESSABLE_ENTITY);

    let resp = web.post(&format!("{base}/assign"), Some(&hk), true, &format!("worker={}&worker=", ct.user_id())).await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());
    assert_eq!(resp.header("hx-reswap"), Some("outerHTML"));
    let card = resp.text();
    assert!(card.starts_with(&format!("<article id=\"task-{}\" class=\"card s-assigned\"", rec.id)), "{card}");

    // The caretaker's view carries the capture hooks the camera script binds to.
    let view = web.get(&format!("{base}/"), Some(&ct), true).await.text();
    assert!(view.contains("data-camera-capture"));
    assert!(view.contains(&format!("data-record-id=\"{}\"", rec.id)));
    for field in ["photo", "thumbnail", "original_size", "lat", "lng"] {
        assert!(view.contains(&format!("name=\"{field}\"")), "{field}");
    }

    let resp = post_multipart(&web, &format!("{base}/complete"), &ct, multipart(&[])).await;
    assert_flash(&resp, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(resp.text().contains("photo is required"));

    let main = corpus("coffee_main.jpg");
    let thumb = corpus("coffee_thumb.jpg");
    let body = multipart(&[
        ("photo", Some("main.jpg"), &main),
        ("thumbnail", Some("thumb.jpg"), &thumb),
        ("original_size", None, b"3100000"),
        ("lat", None, b"23.21"),
        ("lng", None, b"72.68"),
    ]);
    let resp = post_multipart(&web, &format!("{base}/complete"), &ct, body).await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());
    assert!(resp.text().contains("s-completed"));

    let done = c.scheduling().record(rec.id).unwrap();
    let gps = done.gps.unwrap();
    assert_eq!((gps.latitude, gps.longitude), (23.21, 72.68));
    let photo = done.photo_id.unwrap();
    let asset = c.photos().get(photo).unwrap();
    assert_eq!(asset.original_size, 3_100_000);
    assert_eq!(asset.compressed_size, main.len() as u64);

    let served = web.get(&format!("/media/photos/{photo}/main"), Some(&sup), false).await;
    assert_eq!(served.header("content-type"), Some("image/jpeg"));
    assert_eq!(sha256_hex(&served.bytes), asset.content_hash);
    let thumb_resp = web.get(&format!("/media/photos/{photo}/thumb"), Some(&sup), false).await;
    assert_eq!(thumb_resp.header("content-type"), Some("image/webp"));
    assert_eq!(thumb_resp.bytes.len() as u64, asset.thumbnail_size);
    let meta = web.get(&format!("/api/photos/{photo}"), Some(&sup), false).await.json();
    assert_eq!(meta["content_hash"], asset.content_hash.as_str());
    assert_eq!(web.get("/media/photos/999/main", Some(&sup), false).await.status, StatusCode::NOT_FOUND);
    assert_eq!(web.get(&format!("/media/photos/{photo}/main"), None, false).await.status, StatusCode::SEE_OTHER);

    let denied = web.post(&format!("{base}/flag"), Some(&ct), true, "reason=dirty").await;
    assert_eq!(denied.status, StatusCode::NOT_FOUND);
    assert_flash(&web.post(&format!("{base}/flag"), Some(&sup), true, "reason=+").await, StatusCode::UNPROCESSABLE_ENTITY);
    let resp = web.post(&format!("{base}/flag"), Some(&sup), true, "reason=floor+not+mopped").await;
    assert_eq!(resp.status, StatusCode::OK);
    assert!(resp.text().contains("Flagged: floor not mopped"));
    assert_flash(&web.post(&format!("{base}/flag"), Some(&sup), true, "reason=again").await, StatusCode::CONFLICT);
}

#[tokio::test]
async fn plain_form_posts_redirect_instead_of_returning_fragments() {
    let Setup { web, hk, ct, .. } = setup();
    let c = &web.tc.campus;
    c.scheduling().create_template(&template("Sweep", "roads", Frequency::Daily, false)).unwrap();
    let rec = c.scheduling().instantiate_daily_records(c.today()).unwrap()[0].clone();
    let resp = web.post(&format!("/housekeeping/tasks/{}/assign", rec.id), Some(&hk), false, &format!("worker={}", ct.user_id())).await;
    assert_eq!(resp.status, StatusCode::SEE_OTHER);
    assert_eq!(resp.header("location"), Some(format!("/housekeeping/tasks/{}/", rec.id).as_str()));
}

#[tokio::test]
async fn oversized_uploads_are_rejected_with_413() {
    let Setup { web, hk, ct, .. } = setup();
    let c = &web.tc.campus;
    c.scheduling().create_template(&template("Sweep", "roads", Frequency::Daily, true)).unwrap();
    let rec = c.scheduling().instantiate_daily_records(c.today()).unwrap()[0].clone();
    c.scheduling().assign_workers(rec.id, &[ct.user_id()], &hk).unwrap();
    let big = vec![0xFFu8; 2_500_000];
    let thumb = corpus("coffee_thumb.jpg");
    let body = multipart(&[("photo", Some("a.jpg"), &big), ("thumbnail", Some("t.jpg"), &thumb)]);
    let resp = post_multipart(&web, &format!("/housekeeping/tasks/{}/complete", rec.id), &ct, body).await;
    assert_flash(&resp, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn attendance_rows_lock_after_submission() {
    let Setup { web, sup, ct, .. } = setup();
    let date = web.tc.campus.today();
    let form = |status: &str| format!("worker={}&date={date}&slot=first_half&status={status}", ct.user_id());
    let resp = web.post("/housekeeping/attendance/record", Some(&sup), true, &form("present")).await;
    assert_eq!(resp.status, StatusCode::OK);
    assert!(resp.text().starts_with(&format!("<tr id=\"att-{}\"", ct.user_id())));

    let resp = web.post("/housekeeping/attendance/submit", Some(&sup), true, &format!("date={date}&slot=first_half")).await;
    assert_eq!(resp.status, StatusCode::OK);
    assert!(resp.text().contains("locked"));

    let resp = web.post("/housekeeping/attendance/record", Some(&sup), true, &form("late")).await;
    assert_flash(&resp, StatusCode::CONFLICT);
    let json = web.get(&format!("/api/housekeeping/attendance/?date={date}&slot=first_half"), Some(&sup), false).await.json();
    let row = json.as_array().unwrap().iter().find(|r| r["id"] == ct.user_id().0).unwrap().clone();
    assert_eq!(row["status"], "present");
    assert_eq!(row["is_submitted"], true);

    assert_eq!(web.post("/housekeeping/attendance/record", Some(&ct), true, &form("late")).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn leave_flows_through_fragments_and_notifies() {
    let web = Web::new();
    let admin = web.tc.actor("admin", Role::Admin);
    let hk = web.tc.actor("hk", Role::HousekeepingManager);
    let ct = web.tc.actor("ct", Role::Caretaker);
    let cover = web.tc.actor("cover", Role::Supervisor);

    let resp = web.post("/housekeeping/leave/requests", Some(&ct), true, "start_date=2025-03-10&end_date=2025-03-12&reason=family").await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());
    assert_eq!(resp.header("hx-reswap"), Some("beforeend"));
    let id = data_ids(&resp.text())[0].clone();
    assert!(resp.text().starts_with(&format!("<li id=\"mine-{id}\"")));

    let bad = web.post("/housekeeping/leave/requests", Some(&ct), true, "start_date=2025-03-12&end_date=2025-03-10&reason=x").await;
    assert_flash(&bad, StatusCode::UNPROCESSABLE_ENTITY);

    let self_cover = web.post(&format!("/housekeeping/leave/{id}/assign"), Some(&hk), true, &format!("incharge={}", ct.user_id())).await;
    assert_flash(&self_cover, StatusCode::UNPROCESSABLE_ENTITY);
    let resp = web.post(&format!("/housekeeping/leave/{id}/assign"), Some(&hk), true, &format!("incharge={}", cover.user_id())).await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());

    let inbox = web.get("/housekeeping/leave/inbox", Some(&cover), true).await.text();
    let uuid = data_ids(&inbox)[0].clone();
    assert_eq!(uuid.len(), 36, "{uuid}");
    assert!(inbox.contains(&format!("/housekeeping/leave/assignments/{uuid}/respond")));

    let not_mine = web.post(&format!("/housekeeping/leave/assignments/{uuid}/respond"), Some(&ct), true, "decision=accept").await;
    assert!(not_mine.status.is_client_error());
    let resp = web.post(&format!("/housekeeping/leave/assignments/{uuid}/respond"), Some(&cover), true, "decision=accept").await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());
    let again = web.post(&format!("/housekeeping/leave/assignments/{uuid}/respond"), Some(&cover), true, "decision=accept").await;
    assert_flash(&again, StatusCode::CONFLICT);

    assert_eq!(web.post(&format!("/housekeeping/leave/{id}/decide"), Some(&hk), true, "decision=approve").await.status, StatusCode::NOT_FOUND);
    let resp = web.post(&format!("/housekeeping/leave/{id}/decide"), Some(&admin), true, "decision=approve").await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());

    let audit = web.get(&format!("/api/housekeeping/leave/{id}/audit"), Some(&admin), false).await.json();
    let states: Vec<_> = audit["transitions"].as_array().unwrap().iter().map(|t| t["to"].as_str().unwrap().to_string()).collect();
    assert_eq!(states, ["awaiting", "pending_accept", "pending_admin", "approved"]);
    assert_eq!(audit["replayed_state"], "approved");
    let html = web.get(&format!("/admin/leave/{id}/audit"), Some(&admin), true).await.text();
    assert!(html.contains("consistent with the log"));

    let mine = web.get("/api/housekeeping/notifications/", Some(&ct), false).await.json();
    assert!(mine.as_array().unwrap().len() >= 2);
    let bell = web.get("/housekeeping/notifications/bell", Some(&ct), true).await.text();
    assert!(bell.contains("id=\"bell\""));
    let resp = web.post("/housekeeping/notifications/read", Some(&ct), true, "").await;
    assert_eq!(resp.status, StatusCode::OK);
    assert!(resp.text().contains("hx-swap-oob=\"outerHTML:#bell\""));
    let unread: Vec<_> = web.get("/api/housekeeping/notifications/", Some(&ct), false).await.json().as_array().unwrap()
        .iter().filter(|n| n["read"] == false).cloned().collect();
    assert!(unread.is_empty());
}

#[tokio::test]
async fn inventory_actions_and_exports() {
    let web = Web::new();
    let inv = web.tc.actor("inv", Role::InventoryManager);
    let ct = web.tc.actor("ct", Role::Caretaker);
    let c = &web.tc.campus;

    let resp = web.post("/inventory/mobile/items", Some(&inv), true, "name=Mop&category=cleaning&unit=piece&quantity=2").await;
    assert_eq!(resp.status, StatusCode::OK, "{}", resp.text());
    assert!(resp.text().starts_with("<section id=\"catalog\""));
    let item = c.inventory().list_items(None).unwrap()[0].id;

    let short = web.post("/inventory/mobile/issue", Some(&inv), true, &format!("item={item}&quantity=3&area=hostels")).await;
    assert_flash(&short, StatusCode::CONFLICT);
    let unknown = web.post("/inventory/mobile/issue", Some(&inv), true, &format!("item={item}&quantity=1&area=moon")).await;
    assert_flash(&unknown, StatusCode::UNPROCESSABLE_ENTITY);
    let ok = web.post("/inventory/mobile/issue", Some(&inv), true, &format!("item={item}&quantity=2&area=hostels&issued_to=Block+A")).await;
    assert_eq!(ok.status, StatusCode::OK);
    assert!(ok.text().contains("Issued 2 piece of Mop"));
    let stock = web.post("/inventory/mobile/stock", Some(&inv), true, &format!("item={item}&quantity=5")).await;
    assert_eq!(stock.status, StatusCode::OK);
    assert_eq!(c.inventory().item(item).unwrap().available_quantity, 5);
    assert_eq!(web.post("/inventory/mobile/issue", Some(&ct), true, &format!("item={item}&quantity=1&area=hostels")).await.status, StatusCode::NOT_FOUND);

    let pr = web.post("/inventory/mobile/purchase-requests", Some(&inv), true, "item_name=Bleach&quantity=4&justification=low").await;
    assert_eq!(pr.status, StatusCode::OK);
    assert_eq!(pr.header("hx-reswap"), Some("beforeend"));
    let pr_id = data_ids(&pr.text())[0].clone();
    let path = format!("/inventory/mobile/purchase-requests/{pr_id}/status");
    assert!(web.post(&path, Some(&inv), true, "status=ordered").await.text().contains(">ordered<"));
    assert_flash(&web.post(&path, Some(&inv), true, "status=open").await, StatusCode::CONFLICT);

    let today = c.today();
    let q = format!("area=hostels&from={today}&to={today}");
    let csv = web.get(&format!("/inventory/report.csv?{q}"), Some(&inv), false).await;
    assert_eq!(csv.status, StatusCode::OK);
    assert!(csv.header("content-disposition").unwrap().starts_with("attachment;"));
    let text = csv.text();
    let lines: Vec<_> = text.split('\n').filter(|l| !l.is_empty()).collect();
    assert_eq!(lines[0], "timestamp,item,category,quantity,unit,area,issued_to,actor");
    assert_eq!(lines.len(), 2);
    assert!(!text.contains('\r'));
    let pdf = web.get(&format!("/inventory/report.pdf?{q}"), Some(&inv), false).await;
    assert_eq!(pdf.header("content-type"), Some("application/pdf"));
    assert!(pdf.bytes.starts_with(b"%PDF-"));
    let bad = web.get(&format!("/inventory/report.csv?area=hostels&from={today}&to=2000-01-01"), Some(&inv), false).await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    let json = web.get(&format!("/api/inventory/report?{q}"), Some(&inv), false).await.json();
    assert_eq!(json["total_quantity"], 2);
}

#[tokio::test]
async fn admin_dashboard_summarizes_every_module() {
    let web = Web::new();
    let admin = web.tc.actor("admin", Role::Admin);
    let page = web.get("/admin/dashboard/", Some(&admin), false).await;
    assert_eq!(page.status, StatusCode::OK);
    assert!(page.text().contains("id=\"admin-summary\""));
    let json = web.get("/api/admin/summary", Some(&admin), false).await.json();
    assert_eq!(json["users_by_role"][0][0], "admin");
}
