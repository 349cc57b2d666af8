#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use campus_core::config::HashParams;
use campus_core::{web, Campus, Config};
use campus_harness::measure::Client;
use campus_harness::seed::{seed_database, Scale, SeedSummary};

pub fn config(dir: &std::path::Path) -> Config {
    let mut c = Config::in_dir(dir);
    c.hash = HashParams::fast_for_tests();
    c
}

pub fn core_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "core"].iter().collect()
}

/// A seeded database served on an ephemeral loopback port.
pub struct Served {
    pub campus: Arc<Campus>,
    pub client: Client,
    pub summary: SeedSummary,
    pub dir: tempfile::TempDir,
}

impl Served {
    pub async fn seeded(scale: Scale) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        let seeding = cfg.clone();
        let summary = tokio::task::spawn_blocking(move || seed_database(seeding, scale, None, false))
            .await
            .unwrap()
            .unwrap();
        let campus = Arc::new(Campus::open(cfg).unwrap());
        let client = serve(campus.clone()).await;
        Self { campus, client, summary, dir }
    }
}

pub async fn serve(campus: Arc<Campus>) -> Client {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { web::serve(listener, campus).await });
    Client::new(&format!("http://{addr}")).unwrap()
}
