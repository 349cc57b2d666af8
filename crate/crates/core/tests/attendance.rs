mod common;

use std::collections::HashMap;

use chrono::NaiveDate;
use proptest::prelude::*;

use campus_core::attendance::{AttendanceRecord, AttendanceStatus, HalfDaySlot};
use campus_core::ids::UserId;
use campus_core::testing::TestCampus;
use campus_core::{Error, Role};

#[derive(Debug, Clone)]
enum Op {
    Record { worker: usize, day: i64, slot: usize, status: usize },
    Submit { day: i64, slot: usize },
    Advance,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        6 => (0usize..3, 0i64..2, 0usize..2, 0usize..4).prop_map(|(worker, day, slot, status)| Op::Record { worker, day, slot, status }),
        2 => (0i64..2, 0usize..2).prop_map(|(day, slot)| Op::Submit { day, slot }),
        1 => Just(Op::Advance),
    ]
}

type Key = (UserId, NaiveDate, HalfDaySlot);

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Once a record is seen submitted, every later observation is identical.
    #[test]
    fn submitted_records_never_change(ops in prop::collection::vec(op(), 1..40)) {
        let tc = TestCampus::new();
        let sup = tc.actor("sup", Role::Supervisor);
        let workers = common::caretakers(&tc, 3);
        let base = tc.campus.today();
        let a = tc.campus.attendance();
        let mut frozen: HashMap<Key, AttendanceRecord> = HashMap::new();

        for op in ops {
            match op {
                Op::Record { worker, day, slot, status } => {
                    let key = (workers[worker].id, base + chrono::Duration::days(day), HalfDaySlot::ALL[slot]);
                    let r = a.record_attendance(key.0, key.1, key.2, AttendanceStatus::ALL[status], &sup);
                    if frozen.contains_key(&key) {
                        prop_assert!(matches!(r, Err(Error::AlreadySubmitted)), "{:?}", r);
                    } else {
                        prop_assert!(r.is_ok());
                    }
                }
                Op::Submit { day, slot } => {
                    a.submit_attendance(base + chrono::Duration::days(day), HalfDaySlot::ALL[slot], &sup).unwrap();
                }
                Op::Advance => tc.clock.advance(chrono::Duration::minutes(7)),
            }
            let all = a.all().unwrap();
            let mut seen = std::collections::HashSet::new();
            for rec in all {
                let key = (rec.worker, rec.date, rec.slot);
                prop_assert!(seen.insert(key), "duplicate key {:?}", key);
                if let Some(old) = frozen.get(&key) {
                    prop_assert_eq!(old, &rec);
                } else if rec.is_submitted {
                    frozen.insert(key, rec);
                }
            }
        }
    }
}

#[test]
fn concurrent_writers_leave_one_row_per_key() {
    let tc = TestCampus::new();
    let sups: Vec<_> = (0..4).map(|i| tc.actor(&format!("sup{i}"), Role::Supervisor)).collect();
    let workers = common::caretakers(&tc, 3);
    let date = tc.campus.today();
    std::thread::scope(|scope| {
        for (t, sup) in sups.iter().enumerate() {
            let workers = &workers;
            let campus = &tc.campus;
            scope.spawn(move || {
                for i in 0..30 {
                    let w = &workers[(i + t) % workers.len()];
                    let status = AttendanceStatus::ALL[(i * 7 + t) % 4];
                    let _ = campus.attendance().record_attendance(w.id, date, HalfDaySlot::FirstHalf, status, sup);
                }
            });
        }
    });
    let all = tc.campus.attendance().all().unwrap();
    assert_eq!(all.len(), 3);
    let statuses: i64 = tc
        .campus
        .store()
        .read(|tx| tx.query_row("SELECT COUNT(*) FROM attendance WHERE status NOT IN ('present','absent','late','leave')", [], |r| r.get(0)))
        .unwrap();
    assert_eq!(statuses, 0);
}

#[test]
fn submission_racing_with_writes_never_unlocks() {
    let tc = TestCampus::new();
    let sup = tc.actor("sup", Role::Supervisor);
    let workers = common::caretakers(&tc, 6);
    let date = tc.campus.today();
    for w in &workers {
        tc.campus.attendance().record_attendance(w.id, date, HalfDaySlot::SecondHalf, AttendanceStatus::Present, &sup).unwrap();
    }
    let submitted = std::thread::scope(|scope| {
        let writers: Vec<_> = (0..3)
            .map(|t| {
                let (campus, workers, sup) = (&tc.campus, &workers, &sup);
                scope.spawn(move || {
                    for i in 0..40 {
                        let w = &workers[(i + t) % workers.len()];
                        let _ = campus.attendance().record_attendance(w.id, date, HalfDaySlot::SecondHalf, AttendanceStatus::Late, sup);
                    }
                })
            })
            .collect();
        let n = tc.campus.attendance().submit_attendance(date, HalfDaySlot::SecondHalf, &sup).unwrap();
        let snapshot = tc.campus.attendance().all().unwrap();
        for h in writers {
            h.join().unwrap();
        }
        (n, snapshot)
    });
    assert_eq!(submitted.0, 6);
    assert_eq!(tc.campus.attendance().all().unwrap(), submitted.1);
    for w in &workers {
        let r = tc.campus.attendance().record_attendance(w.id, date, HalfDaySlot::SecondHalf, AttendanceStatus::Absent, &sup);
        assert!(matches!(r, Err(Error::AlreadySubmitted)));
    }
    assert_eq!(tc.campus.attendance().submit_attendance(date, HalfDaySlot::SecondHalf, &sup).unwrap(), 0);
}

#[test]
fn sheet_counts_unrecorded_workers() {
    let tc = TestCampus::new();
    let sup = tc.actor("sup", Role::Supervisor);
    let workers = common::caretakers(&tc, 10);
    let date = tc.campus.today();
    for w in &workers[..3] {
        tc.campus.attendance().record_attendance(w.id, date, HalfDaySlot::FirstHalf, AttendanceStatus::Present, &sup).unwrap();
    }
    let sheet = tc.campus.attendance().attendance_sheet(date, HalfDaySlot::FirstHalf).unwrap();
    assert_eq!(sheet.len(), 10);
    assert_eq!(sheet.iter().filter(|r| r.entry.is_none()).count(), 7);
}
