//! Concurrent single-unit issuances against one item, over HTTP.

use crate::measure::Agent;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceOutcome {
    pub attempts: usize,
    pub succeeded: usize,
    /// Refused with 409 because the stock ran out.
    pub refused: usize,
    /// Any other status, in request order.
    pub other: Vec<u16>,
    pub before: i64,
    pub after: i64,
}

impl RaceOutcome {
    /// Every success took exactly one unit and nothing went below zero.
    pub fn consistent(&self) -> bool {
        self.other.is_empty() && self.after >= 0 && self.before - self.after == self.succeeded as i64
    }
}

pub async fn available(agent: &Agent, item: i64) -> Result<i64> {
    let items = agent.json("/api/inventory/items/").await?;
    items
        .as_array()
        .and_then(|a| a.iter().find(|i| i.get("id").and_then(|v| v.as_i64()) == Some(item)))
        .and_then(|i| i.get("available_quantity")?.as_i64())
        .ok_or_else(|| Error::Ops(format!("item {item} not found")))
}

/// Fires `concurrency` one-unit issuances at once and reads the result back.
pub async fn race(agent: &Agent, item: i64, concurrency: usize, area: &str) -> Result<RaceOutcome> {
    let before = available(agent, item).await?;
    let item_s = item.to_string();
    let attempts = (0..concurrency).map(|n| {
        let who = format!("race {n}");
        let form = [("item", item_s.clone()), ("quantity", "1".to_string()), ("area", area.to_string()), ("issued_to", who)];
        async move {
            let pairs: Vec<(&str, &str)> = form.iter().map(|(k, v)| (*k, v.as_str())).collect();
            agent.post_form("/inventory/mobile/issue", &pairs, true).await.map(|f| f.status)
        }
    });
    let statuses = futures::future::try_join_all(attempts).await?;
    let after = available(agent, item).await?;
    Ok(RaceOutcome {
        attempts: concurrency,
        succeeded: statuses.iter().filter(|s| **s == 200).count(),
        refused: statuses.iter().filter(|s| **s == 409).count(),
        other: statuses.into_iter().filter(|s| *s != 200 && *s != 409).collect(),
        before,
        after,
    })
}
