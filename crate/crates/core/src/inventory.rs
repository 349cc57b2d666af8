//! Item catalog, stock movements with a guarded decrement, purchase
//! requests and area-wise issuance reports.
//!
//! Every quantity change happens in the same transaction as the movement row
//! that explains it, so `initial + inbound - issued = available` holds for
//! every item at every commit.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate};
use serde::Serialize;

use crate::auth::{EndpointGroup, Session};
use crate::clock::{format_ts, parse_ts};
use crate::error::{Error, Result};
use crate::ids::{ItemId, MovementId, PurchaseRequestId, UserId};
use crate::store::Tx;
use crate::Campus;

pub const CSV_HEADER: [&str; 8] = ["timestamp", "item", "category", "quantity", "unit", "area", "issued_to", "actor"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Item {
    pub id: ItemId,
    pub category: String,
    pub name: String,
    pub unit: String,
    pub initial_quantity: i64,
    pub available_quantity: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MovementKind {
    Inbound,
    Issuance,
}

impl MovementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MovementKind::Inbound => "inbound",
            MovementKind::Issuance => "issuance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StockMovement {
    pub id: MovementId,
    pub item: ItemId,
    pub kind: MovementKind,
    pub quantity: i64,
    pub area: Option<String>,
    pub issued_to: Option<String>,
    pub actor: UserId,
    pub at: DateTime<FixedOffset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PurchaseStatus {
    Open,
    Ordered,
    Received,
    Cancelled,
}

impl PurchaseStatus {
    pub const ALL: [PurchaseStatus; 4] = [
        PurchaseStatus::Open,
        PurchaseStatus::Ordered,
        PurchaseStatus::Received,
        PurchaseStatus::Cancelled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PurchaseStatus::Open => "open",
            PurchaseStatus::Ordered => "ordered",
            PurchaseStatus::Received => "received",
            PurchaseStatus::Cancelled => "cancelled",
        }
    }

    pub fn can_become(self, next: PurchaseStatus) -> bool {
        use PurchaseStatus::*;
        matches!((self, next), (Open, Ordered) | (Ordered, Received) | (Open, Cancelled))
    }
}

impl fmt::Display for PurchaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PurchaseStatus {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PurchaseStatus::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown purchase status {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PurchaseRequest {
    pub id: PurchaseRequestId,
    pub item_name: String,
    pub quantity: i64,
    pub justification: String,
    pub status: PurchaseStatus,
    pub created_by: UserId,
    pub created_at: DateTime<FixedOffset>,
}

/// One issuance line of an area report, already joined to display values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub timestamp: String,
    pub item: String,
    pub category: String,
    pub quantity: i64,
    pub unit: String,
    pub area: String,
    pub issued_to: String,
    pub actor: String,
}

impl ReportRow {
    pub fn cells(&self) -> [String; 8] {
        [
            self.timestamp.clone(),
            self.item.clone(),
            self.category.clone(),
            self.quantity.to_string(),
            self.unit.clone(),
            self.area.clone(),
            self.issued_to.clone(),
            self.actor.clone(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaReport {
    pub area: String,
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub rows: Vec<ReportRow>,
}

/// An item whose stored quantity disagrees with its movement log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Imbalance {
    pub item: ItemId,
    pub expected: i64,
    pub available: i64,
}

fn bad<E: std::error::Error + Send + Sync + 'static>(idx: usize, e: E) -> rusqlite::Error {
    rusqlite::Error::FromSqlConversionFailure(idx, rusqlite::types::Type::Text, Box::new(e))
}

fn ts_at(r: &rusqlite::Row<'_>, idx: usize) -> rusqlite::Result<DateTime<FixedOffset>> {
    let s: String = r.get(idx)?;
    parse_ts(&s).map_err(|e| bad(idx, e))
}

const ITEM_COLUMNS: &str = "id, category, name, unit, initial_quantity, available_quantity";

fn item_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<Item> {
    Ok(Item {
        id: r.get(0)?,
        category: r.get(1)?,
        name: r.get(2)?,
        unit: r.get(3)?,
        initial_quantity: r.get(4)?,
        available_quantity: r.get(5)?,
    })
}

const MOVEMENT_COLUMNS: &str = "id, item_id, kind, quantity, area_code, issued_to, actor_id, at";

fn movement_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<StockMovement> {
    let kind: String = r.get(2)?;
    Ok(StockMovement {
        id: r.get(0)?,
        item: r.get(1)?,
        kind: match kind.as_str() {
            "inbound" => MovementKind::Inbound,
            _ => MovementKind::Issuance,
        },
        quantity: r.get(3)?,
        area: r.get(4)?,
        issued_to: r.get(5)?,
        actor: r.get(6)?,
        at: ts_at(r, 7)?,
    })
}

const PURCHASE_COLUMNS: &str = "id, item_name, quantity, justification, status, created_by, created_at";

fn purchase_row(r: &rusqlite::Row<'_>) -> rusqlite::Result<PurchaseRequest> {
    let status: String = r.get(4)?;
    Ok(PurchaseRequest {
        id: r.get(0)?,
        item_name: r.get(1)?,
        quantity: r.get(2)?,
        justification: r.get(3)?,
        status: status.parse().map_err(|e| bad(4, e))?,
        created_by: r.get(5)?,
        created_at: ts_at(r, 6)?,
    })
}

fn load_item(tx: &Tx<'_>, id: ItemId) -> Result<Item> {
    tx.query_opt(&format!("SELECT {ITEM_COLUMNS} FROM items WHERE id = ?1"), [id], item_row)?
        .ok_or(Error::NotFound)
}

fn load_movement(tx: &Tx<'_>, id: MovementId) -> Result<StockMovement> {
    tx.query_row(&format!("SELECT {MOVEMENT_COLUMNS} FROM stock_movements WHERE id = ?1"), [id], movement_row)
}

fn require_text(field: &str, value: &str) -> Result<String> {
    let v = value.trim();
    if v.is_empty() {
        return Err(Error::Invalid(format!("{field} must not be empty")));
    }
    Ok(v.to_string())
}

pub struct Inventory<'a> {
    pub(crate) campus: &'a Campus,
}

impl Inventory<'_> {
    fn now(&self) -> String {
        format_ts(&self.campus.clock.now())
    }

    pub fn create_item(&self, category: &str, name: &str, unit: &str, initial_quantity: i64, actor: &Session) -> Result<Item> {
        self.campus.require(actor, EndpointGroup::InventoryPurchase)?;
        if initial_quantity < 0 {
            return Err(Error::Invalid("initial quantity must not be negative".into()));
        }
        let (category, name, unit) = (require_text("category", category)?, require_text("name", name)?, require_text("unit", unit)?);
        self.campus.store.write(|tx| {
            tx.execute(
                "INSERT INTO items (category, name, unit, initial_quantity, available_quantity) VALUES (?1, ?2, ?3, ?4, ?4)",
                rusqlite::params![category, name, unit, initial_quantity],
            )?;
            load_item(tx, ItemId(tx.last_insert_rowid()))
        })
    }

    pub fn item(&self, id: ItemId) -> Result<Item> {
        self.campus.store.read(|tx| load_item(tx, id))
    }

    /// The catalog ordered by category then name, optionally one category only.
    pub fn list_items(&self, category: Option<&str>) -> Result<Vec<Item>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!(
                    "SELECT {ITEM_COLUMNS} FROM items WHERE (?1 IS NULL OR category = ?1) ORDER BY category, name, id"
                ),
                [category],
                item_row,
            )
        })
    }

    pub fn categories(&self) -> Result<Vec<String>> {
        self.campus
            .store
            .read(|tx| tx.query_all("SELECT DISTINCT category FROM items ORDER BY category", [], |r| r.get(0)))
    }

    pub fn add_stock(&self, item: ItemId, quantity: i64, actor: &Session) -> Result<StockMovement> {
        self.campus.require(actor, EndpointGroup::InventoryIssue)?;
        if quantity <= 0 {
            return Err(Error::NonPositiveQuantity);
        }
        let now = self.now();
        self.campus.store.write(|tx| {
            let changed = tx.execute(
                "UPDATE items SET available_quantity = available_quantity + ?1 WHERE id = ?2",
                rusqlite::params![quantity, item],
            )?;
            if changed == 0 {
                return Err(Error::NotFound);
            }
            tx.execute(
                "INSERT INTO stock_movements (item_id, kind, quantity, actor_id, at) VALUES (?1, 'inbound', ?2, ?3, ?4)",
                rusqlite::params![item, quantity, actor.user_id(), now],
            )?;
            load_movement(tx, MovementId(tx.last_insert_rowid()))
        })
    }

    /// Decrements stock only if enough remains at commit time. The check and
    /// the decrement are one conditional `UPDATE`, so concurrent issuers can
    /// never both pass a stale read.
    pub fn issue_item(
        &self,
        item: ItemId,
        quantity: i64,
        area: &str,
        issued_to: &str,
        actor: &Session,
    ) -> Result<StockMovement> {
        self.campus.require(actor, EndpointGroup::InventoryIssue)?;
        if quantity <= 0 {
            return Err(Error::NonPositiveQuantity);
        }
        let issued_to = Some(issued_to.trim()).filter(|s| !s.is_empty());
        let now = self.now();
        self.campus.store.write(|tx| {
            let area_known: bool =
                tx.query_row("SELECT EXISTS(SELECT 1 FROM areas WHERE code = ?1)", [area], |r| r.get(0))?;
            if !area_known {
                return Err(Error::Invalid(format!("unknown area {area:?}")));
            }
            let changed = tx.execute(
                "UPDATE items SET available_quantity = available_quantity - ?1 WHERE id = ?2 AND available_quantity >= ?1",
                rusqlite::params![quantity, item],
            )?;
            if changed == 0 {
                let exists: bool = tx.query_row("SELECT EXISTS(SELECT 1 FROM items WHERE id = ?1)", [item], |r| r.get(0))?;
                return Err(if exists { Error::InsufficientStock } else { Error::NotFound });
            }
            tx.execute(
                "INSERT INTO stock_movements (item_id, kind, quantity, area_code, issued_to, actor_id, at)
                 VALUES (?1, 'issuance', ?2, ?3, ?4, ?5, ?6)",
                rusqlite::params![item, quantity, area, issued_to, actor.user_id(), now],
            )?;
            load_movement(tx, MovementId(tx.last_insert_rowid()))
        })
    }

    /// The full movement log in commit order.
    pub fn movements(&self) -> Result<Vec<StockMovement>> {
        self.campus.store.read(|tx| {
            tx.query_all(&format!("SELECT {MOVEMENT_COLUMNS} FROM stock_movements ORDER BY id"), [], movement_row)
        })
    }

    /// Items whose available quantity does not equal their initial quantity
    /// plus inbound minus issued, computed from one snapshot.
    pub fn conservation_check(&self) -> Result<Vec<Imbalance>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                "SELECT i.id,
                        i.initial_quantity
                          + COALESCE(SUM(CASE m.kind WHEN 'inbound' THEN m.quantity ELSE 0 END), 0)
                          - COALESCE(SUM(CASE m.kind WHEN 'issuance' THEN m.quantity ELSE 0 END), 0) AS expected,
                        i.available_quantity
                 FROM items i LEFT JOIN stock_movements m ON m.item_id = i.id
                 GROUP BY i.id HAVING expected <> i.available_quantity
                 ORDER BY i.id",
                [],
                |r| Ok(Imbalance { item: r.get(0)?, expected: r.get(1)?, available: r.get(2)? }),
            )
        })
    }

    pub fn create_purchase_request(
        &self,
        item_name: &str,
        quantity: i64,
        justification: &str,
        actor: &Session,
    ) -> Result<PurchaseRequest> {
        self.campus.require(actor, EndpointGroup::InventoryPurchase)?;
        if quantity <= 0 {
            return Err(Error::NonPositiveQuantity);
        }
        let item_name = require_text("item name", item_name)?;
        let now = self.now();
        self.campus.store.write(|tx| {
            tx.execute(
                "INSERT INTO purchase_requests (item_name, quantity, justification, status, created_by, created_at)
                 VALUES (?1, ?2, ?3, 'open', ?4, ?5)",
                rusqlite::params![item_name, quantity, justification.trim(), actor.user_id(), now],
            )?;
            let id = PurchaseRequestId(tx.last_insert_rowid());
            tx.query_row(&format!("SELECT {PURCHASE_COLUMNS} FROM purchase_requests WHERE id = ?1"), [id], purchase_row)
        })
    }

    /// Moves a purchase request along open→ordered→received or open→cancelled.
    /// Receiving does not touch stock; inbound stock is always explicit.
    pub fn advance_purchase_request(
        &self,
        id: PurchaseRequestId,
        to: PurchaseStatus,
        actor: &Session,
    ) -> Result<PurchaseRequest> {
        self.campus.require(actor, EndpointGroup::InventoryPurchase)?;
        self.campus.store.write(|tx| {
            let current = tx
                .query_opt(&format!("SELECT {PURCHASE_COLUMNS} FROM purchase_requests WHERE id = ?1"), [id], purchase_row)?
                .ok_or(Error::NotFound)?;
            if !current.status.can_become(to) {
                return Err(Error::InvalidTransition { from: current.status.as_str(), to: to.as_str() });
            }
            tx.execute(
                "UPDATE purchase_requests SET status = ?1 WHERE id = ?2 AND status = ?3",
                rusqlite::params![to.as_str(), id, current.status.as_str()],
            )?;
            Ok(PurchaseRequest { status: to, ..current })
        })
    }

    pub fn purchase_requests(&self) -> Result<Vec<PurchaseRequest>> {
        self.campus.store.read(|tx| {
            tx.query_all(
                &format!("SELECT {PURCHASE_COLUMNS} FROM purchase_requests ORDER BY id"),
                [],
                purchase_row,
            )
        })
    }

    /// Issuances to `area` whose local date falls within `from..=to`, oldest first.
    pub fn area_report(&self, area: &str, from: NaiveDate, to: NaiveDate, actor: &Session) -> Result<AreaReport> {
        self.campus.require(actor, EndpointGroup::InventoryReport)?;
        if from > to {
            return Err(Error::InvalidRange);
        }
        let rows = self.campus.store.read(|tx| {
            tx.query_all(
                "SELECT m.at, i.name, i.category, m.quantity, i.unit, m.area_code, COALESCE(m.issued_to, ''), u.username
                 FROM stock_movements m
                 JOIN items i ON i.id = m.item_id
                 JOIN users u ON u.id = m.actor_id
                 WHERE m.kind = 'issuance' AND m.area_code = ?1 AND substr(m.at, 1, 10) BETWEEN ?2 AND ?3
                 ORDER BY m.at, m.id",
                rusqlite::params![area, from.to_string(), to.to_string()],
                |r| {
                    Ok(ReportRow {
                        timestamp: r.get(0)?,
                        item: r.get(1)?,
                        category: r.get(2)?,
                        quantity: r.get(3)?,
                        unit: r.get(4)?,
                        area: r.get(5)?,
                        issued_to: r.get(6)?,
                        actor: r.get(7)?,
                    })
                },
            )
        })?;
        Ok(AreaReport { area: area.to_string(), from, to, rows })
    }
}

impl AreaReport {
    pub fn total_quantity(&self) -> i64 {
        self.rows.iter().map(|r| r.quantity).sum()
    }

    /// Comma-separated, header first, quoted only where needed, LF line ends.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(|e| Error::Internal(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.cells()).map_err(|e| Error::Internal(e.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Internal(e.to_string()))
    }

    /// A landscape A4 table. Each cell is its own text object so extracted
    /// text yields one cell per line; characters outside ASCII print as `?`.
    pub fn to_pdf(&self) -> Result<Vec<u8>> {
        pdf::render(self)
    }
}

mod pdf {
    use lopdf::content::{Content, Operation};
    use lopdf::{dictionary, Document, Object, Stream};

    use super::{AreaReport, CSV_HEADER};
    use crate::error::{Error, Result};

    const PAGE_W: i64 = 842;
    const PAGE_H: i64 = 595;
    const MARGIN: i64 = 36;
    const LINE: i64 = 12;
    const COLUMNS: [i64; 8] = [36, 166, 296, 376, 416, 466, 576, 706];

    fn ascii(s: &str) -> String {
        s.chars()
            .map(|c| if c.is_ascii() && !c.is_ascii_control() { c } else { '?' })
            .collect()
    }

    fn text(ops: &mut Vec<Operation>, font: &str, size: i64, x: i64, y: i64, s: &str) {
        ops.push(Operation::new("BT", vec![]));
        ops.push(Operation::new("Tf", vec![font.into(), size.into()]));
        ops.push(Operation::new("Td", vec![x.into(), y.into()]));
        ops.push(Operation::new("Tj", vec![Object::string_literal(ascii(s))]));
        ops.push(Operation::new("ET", vec![]));
    }

    pub(super) fn render(report: &AreaReport) -> Result<Vec<u8>> {
        let mut doc = Document::with_version("1.5");
        let pages_id = doc.new_object_id();
        let regular = doc.add_object(dictionary! {
            "Type" => "Font", "Subtype" => "Type1", "BaseFont" => "Helvetica", "Encoding" => "WinAnsiEncoding",
        });
        let bold = doc.add_object(dictionary! {
            "Type" => "Font", "Subtype" => "Type1", "BaseFont" => "Helvetica-Bold", "Encoding" => "WinAnsiEncoding",
        });
        let resources = doc.add_object(dictionary! {
            "Font" => dictionary! { "F1" => regular, "F2" => bold },
        });

        let per_page = ((PAGE_H - 2 * MARGIN - 3 * LINE) / LINE) as usize;
        let chunks: Vec<_> = if report.rows.is_empty() {
            vec![&report.rows[..]]
        } else {
            report.rows.chunks(per_page).collect()
        };
        let mut kids = Vec::new();
        for (n, chunk) in chunks.iter().enumerate() {
            let mut ops = Vec::new();
            let mut y = PAGE_H - MARGIN;
            let title = format!(
                "Issuance report: {} from {} to {} (page {} of {})",
                report.area,
                report.from,
                report.to,
                n + 1,
                chunks.len()
            );
            text(&mut ops, "F2", 11, MARGIN, y, &title);
            y -= 2 * LINE;
            for (x, h) in COLUMNS.iter().zip(CSV_HEADER) {
                text(&mut ops, "F2", 8, *x, y, h);
            }
            for row in chunk.iter() {
                y -= LINE;
                for (x, cell) in COLUMNS.iter().zip(row.cells()) {
                    text(&mut ops, "F1", 7, *x, y, &cell);
                }
            }
            let bytes = Content { operations: ops }.encode().map_err(|e| Error::Internal(e.to_string()))?;
            let content = doc.add_object(Stream::new(dictionary! {}, bytes));
            kids.push(Object::from(doc.add_object(dictionary! {
                "Type" => "Page",
                "Parent" => pages_id,
                "Contents" => content,
            })));
        }
        let count = kids.len() as i64;
        doc.objects.insert(
            pages_id,
            Object::Dictionary(dictionary! {
                "Type" => "Pages",
                "Kids" => kids,
                "Count" => count,
                "Resources" => resources,
                "MediaBox" => vec![0.into(), 0.into(), PAGE_W.into(), PAGE_H.into()],
            }),
        );
        let catalog = doc.add_object(dictionary! { "Type" => "Catalog", "Pages" => pages_id });
        doc.trailer.set("Root", catalog);
        let mut out = Vec::new();
        doc.save_to(&mut out).map_err(|e| Error::Internal(e.to_string()))?;
        Ok(out)
    }
}
