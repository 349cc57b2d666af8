use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use campus_core::ids::ItemId;
use campus_core::inventory::{PurchaseStatus, CSV_HEADER};
use campus_core::testing::TestCampus;
use campus_core::{Error, Role, Session};

const AREAS: [&str; 3] = ["hostels", "library", "mess"];

fn campus() -> (TestCampus, Session) {
    let tc = TestCampus::new();
    let inv = tc.actor("inv", Role::InventoryManager);
    (tc, inv)
}

#[test]
fn twenty_threads_racing_for_ten_units() {
    let (tc, inv) = campus();
    for round in 0..100 {
        let item = tc.campus.inventory().create_item("linen", &format!("sheet {round}"), "pcs", 10, &inv).unwrap();
        let outcomes: Vec<_> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..20)
                .map(|_| s.spawn(|| tc.campus.inventory().issue_item(item.id, 1, "hostels", "", &inv)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let ok = outcomes.iter().filter(|r| r.is_ok()).count();
        assert_eq!(ok, 10, "round {round}");
        assert!(outcomes.iter().filter_map(|r| r.as_ref().err()).all(|e| matches!(e, Error::InsufficientStock)));
        assert_eq!(tc.campus.inventory().item(item.id).unwrap().available_quantity, 0);
    }
    assert!(tc.campus.inventory().conservation_check().unwrap().is_empty());
}

#[derive(Debug, Clone)]
enum Op {
    Issue { item: usize, qty: i64, area: usize },
    Stock { item: usize, qty: i64 },
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0usize..3, 1i64..6, 0usize..3).prop_map(|(item, qty, area)| Op::Issue { item, qty, area }),
        1 => (0usize..3, 1i64..4).prop_map(|(item, qty)| Op::Stock { item, qty }),
    ]
}

/// The quantity each item would hold if the operations ran one at a time,
/// and the total issued that way.
fn serial_oracle(initial: &[i64], ops: &[Op]) -> (Vec<i64>, Vec<bool>) {
    let mut q = initial.to_vec();
    let outcomes = ops
        .iter()
        .map(|o| match *o {
            Op::Issue { item, qty, .. } if q[item] >= qty => {
                q[item] -= qty;
                true
            }
            Op::Issue { .. } => false,
            Op::Stock { item, qty } => {
                q[item] += qty;
                true
            }
        })
        .collect();
    (q, outcomes)
}

fn run(tc: &TestCampus, inv: &Session, items: &[ItemId], o: &Op) -> bool {
    let i = tc.campus.inventory();
    match *o {
        Op::Issue { item, qty, area } => i.issue_item(items[item], qty, AREAS[area], "", inv).is_ok(),
        Op::Stock { item, qty } => i.add_stock(items[item], qty, inv).is_ok(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn serial_runs_match_the_oracle(initial in prop::collection::vec(0i64..8, 3), ops in prop::collection::vec(op(), 0..30)) {
        let (tc, inv) = campus();
        let items: Vec<_> = initial.iter().enumerate()
            .map(|(n, q)| tc.campus.inventory().create_item("c", &format!("i{n}"), "u", *q, &inv).unwrap().id)
            .collect();
        let (expected, outcomes) = serial_oracle(&initial, &ops);
        for (o, want) in ops.iter().zip(outcomes) {
            prop_assert_eq!(run(&tc, &inv, &items, o), want);
        }
        let got: Vec<_> = items.iter().map(|id| tc.campus.inventory().item(*id).unwrap().available_quantity).collect();
        prop_assert_eq!(got, expected);
    }

    /// Concurrent runs must equal some serial order: every item's final
    /// quantity equals initial plus inbound minus the issues that succeeded.
    #[test]
    fn concurrent_runs_are_explained_by_their_successes(initial in prop::collection::vec(0i64..8, 3), ops in prop::collection::vec(op(), 4..24)) {
        let (tc, inv) = campus();
        let items: Vec<_> = initial.iter().enumerate()
            .map(|(n, q)| tc.campus.inventory().create_item("c", &format!("i{n}"), "u", *q, &inv).unwrap().id)
            .collect();
        let results: Vec<bool> = std::thread::scope(|s| {
            let handles: Vec<_> = ops.iter().map(|o| s.spawn(|| run(&tc, &inv, &items, o))).collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut q = initial.clone();
        for (o, ok) in ops.iter().zip(&results) {
            match (*o).clone() {
                Op::Issue { item, qty, .. } if *ok => q[item] -= qty,
                Op::Stock { item, qty } => { prop_assert!(*ok); q[item] += qty }
                _ => {}
            }
        }
        for (n, id) in items.iter().enumerate() {
            let now = tc.campus.inventory().item(*id).unwrap().available_quantity;
            prop_assert!(now >= 0);
            prop_assert_eq!(now, q[n]);
        }
        // The movement log, replayed in commit order, never dips below zero.
        let mut level: HashMap<ItemId, i64> = items.iter().copied().zip(initial.iter().copied()).collect();
        for m in tc.campus.inventory().movements().unwrap() {
            let l = level.get_mut(&m.item).unwrap();
            *l += if m.area.is_some() { -m.quantity } else { m.quantity };
            prop_assert!(*l >= 0);
        }
    }
}

#[test]
fn conservation_holds_after_ten_thousand_mixed_operations() {
    let (tc, inv) = campus();
    let mut rng = StdRng::seed_from_u64(7);
    let items: Vec<_> = (0..12)
        .map(|n| tc.campus.inventory().create_item("misc", &format!("item {n}"), "pcs", rng.random_range(0..40), &inv).unwrap().id)
        .collect();
    let ops: Vec<Op> = (0..10_000)
        .map(|_| {
            let item = rng.random_range(0..3) + rng.random_range(0..4) * 3;
            if rng.random_bool(0.7) {
                Op::Issue { item, qty: rng.random_range(1..8), area: rng.random_range(0..3) }
            } else {
                Op::Stock { item, qty: rng.random_range(1..10) }
            }
        })
        .collect();
    let rejected = std::thread::scope(|s| {
        let handles: Vec<_> = ops
            .chunks(1250)
            .map(|chunk| {
                let (tc, inv, items) = (&tc, &inv, &items);
                s.spawn(move || chunk.iter().filter(|o| !run(tc, inv, items, o)).count())
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum::<usize>()
    });
    assert!(rejected > 0, "the mix should exercise insufficient stock");
    assert!(tc.campus.inventory().conservation_check().unwrap().is_empty());
    assert_eq!(tc.campus.inventory().movements().unwrap().len(), 10_000 - rejected);
    for id in &items {
        assert!(tc.campus.inventory().item(*id).unwrap().available_quantity >= 0);
    }
}

#[test]
fn readers_never_see_negative_stock() {
    let (tc, inv) = campus();
    let items: Vec<_> = (0..4).map(|n| tc.campus.inventory().create_item("c", &format!("r{n}"), "u", 50, &inv).unwrap().id).collect();
    let done = AtomicBool::new(false);
    let observations = std::thread::scope(|s| {
        let readers: Vec<_> = (0..4)
            .map(|_| {
                s.spawn(|| {
                    let mut seen = 0;
                    while !done.load(Ordering::Relaxed) {
                        for item in tc.campus.inventory().list_items(None).unwrap() {
                            assert!(item.available_quantity >= 0, "{item:?}");
                            seen += 1;
                        }
                    }
                    seen
                })
            })
            .collect();
        let writers: Vec<_> = (0..8)
            .map(|w| {
                let (tc, inv, items) = (&tc, &inv, &items);
                s.spawn(move || {
                    for k in 0..150 {
                        let _ = tc.campus.inventory().issue_item(items[(w + k) % 4], 1 + (k % 3) as i64, "hostels", "", inv);
                    }
                })
            })
            .collect();
        writers.into_iter().for_each(|h| h.join().unwrap());
        done.store(true, Ordering::Relaxed);
        readers.into_iter().map(|h| h.join().unwrap()).sum::<usize>()
    });
    assert!(observations > 0);
    assert!(items.iter().all(|id| tc.campus.inventory().item(*id).unwrap().available_quantity == 0));
}

#[test]
fn quantities_and_names_are_validated() {
    let (tc, inv) = campus();
    let i = tc.campus.inventory();
    assert!(matches!(i.create_item("c", "n", "u", -1, &inv), Err(Error::NonPositiveQuantity | Error::Invalid(_))));
    assert!(i.create_item("c", "  ", "u", 1, &inv).is_err());
    let item = i.create_item("c", "n", "u", 5, &inv).unwrap();
    assert!(matches!(i.issue_item(item.id, 0, "hostels", "", &inv), Err(Error::NonPositiveQuantity)));
    assert!(matches!(i.add_stock(item.id, -3, &inv), Err(Error::NonPositiveQuantity)));
    assert!(matches!(i.issue_item(item.id, 1, "moon_base", "", &inv), Err(Error::Invalid(_))));
    assert!(matches!(i.issue_item(ItemId(9999), 1, "hostels", "", &inv), Err(Error::NotFound)));
    assert!(matches!(i.issue_item(item.id, 6, "hostels", "", &inv), Err(Error::InsufficientStock)));
    assert!(i.movements().unwrap().is_empty());
}

fn report_fixture() -> (TestCampus, Session) {
    let (tc, inv) = campus();
    let i = tc.campus.inventory();
    let soap = i.create_item("cleaning", "Soap, \"lemon\"", "bar", 100, &inv).unwrap();
    let mop = i.create_item("cleaning", "Mop", "pcs", 100, &inv).unwrap();
    for day in 0..5 {
        for (n, area) in AREAS.iter().enumerate() {
            i.issue_item(soap.id, 1 + n as i64 + day, area, "Block A", &inv).unwrap();
            i.issue_item(mop.id, 2, area, "", &inv).unwrap();
        }
        tc.clock.advance(chrono::Duration::days(1));
    }
    (tc, inv)
}

#[test]
fn csv_export_matches_the_store() {
    let (tc, inv) = report_fixture();
    let start = tc.campus.today() - chrono::Duration::days(5);
    let (from, to) = (start + chrono::Duration::days(1), start + chrono::Duration::days(3));
    let report = tc.campus.inventory().area_report("hostels", from, to, &inv).unwrap();
    let bytes = report.to_csv().unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().next().unwrap(), "timestamp,item,category,quantity,unit,area,issued_to,actor");
    assert_eq!(text.lines().count(), 1 + 3 * 2);

    let mut reader = csv::Reader::from_reader(&bytes[..]);
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.iter().all(|r| &r[5] == "hostels"));
    assert!(rows.iter().any(|r| &r[1] == "Soap, \"lemon\""));
    let csv_sum: i64 = rows.iter().map(|r| r[3].parse::<i64>().unwrap()).sum();

    let stored: i64 = tc
        .campus
        .store()
        .read(|tx| {
            tx.query_row(
                "SELECT COALESCE(SUM(quantity), 0) FROM stock_movements
                 WHERE kind = 'issuance' AND area_code = 'hostels' AND date(substr(at, 1, 10)) BETWEEN ?1 AND ?2",
                [from.to_string(), to.to_string()],
                |r| r.get(0),
            )
        })
        .unwrap();
    assert_eq!(csv_sum, stored);
    assert_eq!(report.total_quantity(), stored);
    assert_eq!(csv_sum, (2 + 3 + 4) + 3 * 2);
}

#[test]
fn pdf_export_carries_the_same_rows() {
    let (tc, inv) = report_fixture();
    let today = tc.campus.today();
    let report = tc.campus.inventory().area_report("library", today - chrono::Duration::days(10), today, &inv).unwrap();
    let pdf = report.to_pdf().unwrap();
    assert!(pdf.starts_with(b"%PDF-"));
    let doc = lopdf::Document::load_mem(&pdf).unwrap();
    let pages: Vec<u32> = doc.get_pages().keys().copied().collect();
    let text = doc.extract_text(&pages).unwrap();
    for h in CSV_HEADER {
        assert!(text.contains(h), "missing header {h}");
    }
    assert_eq!(text.matches("Soap, \"lemon\"").count(), 5);
    assert!(text.contains("library"));
    let quantities: i64 = report.rows.iter().map(|r| r.quantity).sum();
    assert_eq!(quantities, (2 + 3 + 4 + 5 + 6) + 5 * 2);
    assert_eq!(text.matches("Block A").count(), 5);

    let empty = tc.campus.inventory().area_report("roads", today, today, &inv).unwrap();
    assert!(empty.rows.is_empty());
    let doc = lopdf::Document::load_mem(&empty.to_pdf().unwrap()).unwrap();
    assert_eq!(doc.get_pages().len(), 1);
}

#[test]
fn long_reports_paginate() {
    let (tc, inv) = campus();
    let i = tc.campus.inventory();
    let item = i.create_item("c", "Glove", "pair", 1000, &inv).unwrap();
    for _ in 0..120 {
        i.issue_item(item.id, 1, "parking", "", &inv).unwrap();
    }
    let today = tc.campus.today();
    let report = i.area_report("parking", today, today, &inv).unwrap();
    let doc = lopdf::Document::load_mem(&report.to_pdf().unwrap()).unwrap();
    assert!(doc.get_pages().len() > 1);
    let pages: Vec<u32> = doc.get_pages().keys().copied().collect();
    assert_eq!(doc.extract_text(&pages).unwrap().matches("Glove").count(), 120);
}

#[test]
fn report_ranges_and_roles() {
    let (tc, inv) = report_fixture();
    let today = tc.campus.today();
    let i = tc.campus.inventory();
    assert!(matches!(i.area_report("hostels", today, today - chrono::Duration::days(1), &inv), Err(Error::InvalidRange)));
    let ct = tc.actor("ct", Role::Caretaker);
    assert!(matches!(i.area_report("hostels", today, today, &ct), Err(Error::Forbidden)));
    assert!(matches!(i.issue_item(ItemId(1), 1, "hostels", "", &ct), Err(Error::Forbidden)));
}

#[test]
fn purchase_requests_follow_their_lifecycle() {
    let (tc, inv) = campus();
    let i = tc.campus.inventory();
    let item = i.create_item("c", "Bucket", "pcs", 3, &inv).unwrap();
    let allowed = |a: PurchaseStatus, b: PurchaseStatus| {
        use PurchaseStatus::*;
        matches!((a, b), (Open, Ordered) | (Ordered, Received) | (Open, Cancelled))
    };
    for a in PurchaseStatus::ALL {
        for b in PurchaseStatus::ALL {
            assert_eq!(a.can_become(b), allowed(a, b), "{a} -> {b}");
            assert_eq!(a.as_str().parse::<PurchaseStatus>().unwrap(), a);
        }
    }
    assert!(matches!(i.create_purchase_request("Bucket", 0, "", &inv), Err(Error::NonPositiveQuantity)));
    let pr = i.create_purchase_request("Bucket", 20, "monsoon", &inv).unwrap();
    assert_eq!(pr.status, PurchaseStatus::Open);
    assert!(matches!(i.advance_purchase_request(pr.id, PurchaseStatus::Received, &inv), Err(Error::InvalidTransition { .. })));
    i.advance_purchase_request(pr.id, PurchaseStatus::Ordered, &inv).unwrap();
    let done = i.advance_purchase_request(pr.id, PurchaseStatus::Received, &inv).unwrap();
    assert_eq!(done.status, PurchaseStatus::Received);
    assert!(i.advance_purchase_request(pr.id, PurchaseStatus::Cancelled, &inv).is_err());
    // Receiving leaves stock untouched until someone books it in.
    assert_eq!(i.item(item.id).unwrap().available_quantity, 3);
    assert_eq!(i.purchase_requests().unwrap(), vec![done]);
}
