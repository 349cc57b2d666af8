mod common;

use common::Served;
use rand::SeedableRng;

use campus_core::web::{CAMPUS_CSS, HTMX_JS};
use campus_harness::measure::{images, measure, subresources, Client};
use campus_harness::ops::{parse, DEFAULT_OPS};
use campus_harness::race::race;
use campus_harness::report::{runs, Mode};
use campus_harness::seed::{synthetic_photo, Profile, INVENTORY_MANAGER, SEED_PASSWORD};
use campus_harness::Error;

#[test]
fn subresource_discovery() {
    let html = r#"<html><head>
        <link rel="stylesheet" href="/static/campus.css?v=3">
        <link rel="icon" href="/favicon.ico">
        <link href="/static/print.css" rel="stylesheet" media="print">
        <script src="/static/htmx.min.js?v=3" defer></script>
        <script src="https://cdn.example/x.js"></script>
        <script>inline()</script>
        </head><body>
        <img src="/media/1/thumb?a=1&amp;b=2"><img src="//other.example/p.png">
        <IMG SRC="/media/1/thumb?a=1&amp;b=2">
        <a href="/media/1/main">full</a>
        </body></html>"#;
    assert_eq!(
        subresources(html),
        ["/static/campus.css?v=3", "/static/print.css", "/static/htmx.min.js?v=3", "/media/1/thumb?a=1&b=2"]
    );
    assert_eq!(images(html), ["/media/1/thumb?a=1&b=2"]);
    assert!(subresources("<p>plain</p>").is_empty());
}

#[tokio::test(flavor = "multi_thread")]
async fn cold_loads_count_the_document_and_its_assets() {
    let s = Served::seeded(Profile::Small.scale()).await;
    let agent = s.client.login("housekeeping", SEED_PASSWORD).await.unwrap();

    let js = agent.get("/static/htmx.min.js", false).await.unwrap();
    assert_eq!(js.body, HTMX_JS);
    assert_eq!(HTMX_JS.len() as u64, std::fs::metadata(common::core_dir().join("static/htmx.min.js")).unwrap().len());

    let path = "/housekeeping/tasks/";
    let doc = agent.get(path, false).await.unwrap();
    let cold = agent.load(path, Mode::FullPage, true).await.unwrap();
    assert_eq!(cold.resources.len(), 2, "{:?}", cold.resources);
    assert_eq!(cold.bytes, (doc.body.len() + CAMPUS_CSS.len() + HTMX_JS.len()) as u64);
    let bare = agent.load(path, Mode::FullPage, false).await.unwrap();
    assert_eq!(bare.bytes, doc.body.len() as u64);

    let frag = agent.get(path, true).await.unwrap();
    let warm = agent.load(path, Mode::Fragment, true).await.unwrap();
    assert!(warm.resources.is_empty());
    assert_eq!(warm.bytes, frag.body.len() as u64);
    assert!(frag.body.len() * 4 < doc.body.len() + CAMPUS_CSS.len() + HTMX_JS.len());
}

#[tokio::test(flavor = "multi_thread")]
async fn each_run_holds_exactly_the_requested_samples() {
    let s = Served::seeded(Profile::Small.scale()).await;
    let ops = parse(DEFAULT_OPS).unwrap();
    let samples = measure(&s.client, &ops, SEED_PASSWORD, 3, true).await.unwrap();
    let runs = runs(&samples);
    assert_eq!(runs.len(), ops.len() * 2);
    for r in &runs {
        assert_eq!(r.samples(), 3, "{} {}", r.operation, r.mode);
        assert!(r.payload_bytes.iter().all(|b| *b > 0));
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn failures_are_reported_not_recorded() {
    let s = Served::seeded(Profile::Small.scale()).await;
    let ops = parse(DEFAULT_OPS).unwrap();
    match measure(&s.client, &ops, "wrong password", 1, true).await {
        Err(Error::AuthFailure(user)) => assert_eq!(user, "housekeeping"),
        other => panic!("{other:?}"),
    }

    let closed = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = closed.local_addr().unwrap();
    drop(closed);
    let nowhere = Client::new(&format!("http://{addr}")).unwrap();
    match measure(&nowhere, &ops, SEED_PASSWORD, 1, true).await {
        Err(Error::ServerUnreachable { url, .. }) => assert_eq!(url, format!("http://{addr}")),
        other => panic!("{other:?}"),
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn twenty_requests_for_ten_units() {
    let s = Served::seeded(Profile::Small.scale()).await;
    let inv = s.campus.accounts().authenticate(INVENTORY_MANAGER, SEED_PASSWORD).unwrap();
    let item = s.campus.inventory().create_item("cleaning", "Race soap", "piece", 10, &inv).unwrap();
    let agent = s.client.login(INVENTORY_MANAGER, SEED_PASSWORD).await.unwrap();
    let out = race(&agent, item.id.0, 20, "hostels").await.unwrap();
    assert_eq!((out.succeeded, out.refused, out.before, out.after), (10, 10, 10, 0), "{out:?}");
    assert!(out.consistent());
    assert!(s.campus.inventory().conservation_check().unwrap().is_empty());
}

#[tokio::test(flavor = "multi_thread")]
async fn completion_upload_uses_the_camera_fields() {
    let s = Served::seeded(Profile::Small.scale()).await;
    let (record, username): (i64, String) = s
        .campus
        .store()
        .read(|tx| {
            tx.query_row(
                "SELECT r.id, u.username FROM daily_records r
                 JOIN worker_assignments w ON w.record_id = r.id
                 JOIN users u ON u.id = w.worker_id
                 WHERE r.status = 'assigned' ORDER BY r.id LIMIT 1",
                [],
                |r| Ok((r.get(0)?, r.get(1)?)),
            )
        })
        .unwrap();
    let agent = s.client.login(&username, SEED_PASSWORD).await.unwrap();
    let card = agent.get(&format!("/housekeeping/tasks/{record}/"), true).await.unwrap();
    let card = String::from_utf8(card.body).unwrap();
    assert!(card.contains(&format!("data-camera-capture data-record-id=\"{record}\"")), "{card}");
    for field in ["photo", "thumbnail", "original_size", "lat", "lng"] {
        assert!(card.contains(&format!("name=\"{field}\"")), "{field}");
    }
    let upload = synthetic_photo(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7));
    let resp = agent.complete_with_photo(record, &upload, 12.9701, 79.1602).await.unwrap();
    assert_eq!(resp.status, 200, "{}", String::from_utf8_lossy(&resp.body));
    let swapped = String::from_utf8(resp.body).unwrap();
    assert!(swapped.contains(&format!("id=\"task-{record}\"")) && swapped.contains("s-completed"), "{swapped}");
    assert!(!swapped.contains("data-camera-capture"));

    let done = s.campus.scheduling().record(campus_core::ids::RecordId(record)).unwrap();
    let photo = s.campus.photos().get(done.photo_id.expect("photo attached")).unwrap();
    assert_eq!(photo.original_size, upload.original_size);
    assert_eq!(photo.compressed_size, upload.main.len() as u64);
    assert!(s.campus.photos().consistency_scan().unwrap().is_empty());

    let again = agent.complete_with_photo(record, &upload, 12.9701, 79.1602).await.unwrap();
    assert_eq!(again.status, 409);
}
