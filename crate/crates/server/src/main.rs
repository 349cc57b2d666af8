//! Serves the campus application on `BIND_ADDR` (default 127.0.0.1:8080).
//! Storage and session settings come from the environment; see
//! [`campus_core::Config::from_env`].

use std::sync::Arc;

use anyhow::Context;
use campus_core::{web, Campus, Config};

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt().with_max_level(tracing::Level::INFO).init();

    let config = Config::from_env()?;
    let addr = std::env::var("BIND_ADDR").unwrap_or_else(|_| "127.0.0.1:8080".to_string());
    let campus = Campus::open(config.clone()).with_context(|| format!("opening {}", config.database_path.display()))?;
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, db = %config.database_path.display(), "listening");
    web::serve(listener, Arc::new(campus))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
