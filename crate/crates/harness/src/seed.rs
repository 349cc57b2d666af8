//! Deterministic desk-scale dataset.
//!
//! Every choice is drawn from one ChaCha stream with a fixed seed, and the
//! timeline is walked day by day on a manual clock, so two seeds on the same
//! date produce the same rows (tokens, salts and UUIDs aside).

use std::collections::BTreeSet;
use std::fmt;
use std::io::Cursor;
use std::sync::Arc;

use campus_core::attendance::{AttendanceStatus, HalfDaySlot};
use campus_core::auth::NewUser;
use campus_core::ids::{ItemId, UserId};
use campus_core::inventory::PurchaseStatus;
use campus_core::photo::PhotoUpload;
use campus_core::scheduling::{Frequency, Gps, NewTemplate};
use campus_core::{Campus, Clock, Config, ManualClock, PermissionMatrix, Role, Session, Store, SystemClock};
use chrono::{DateTime, Duration, FixedOffset, NaiveDate, NaiveTime};
use image::codecs::jpeg::JpegEncoder;
use image::{Rgb, RgbImage};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Password shared by every seeded account.
pub const SEED_PASSWORD: &str = "campus-seed";
pub const ADMIN: &str = "admin";
pub const INVENTORY_MANAGER: &str = "inventory";
pub const HOUSEKEEPING_MANAGER: &str = "housekeeping";
pub const SUPERVISOR: &str = "supervisor";

const RNG_SEED: u64 = 0x5eed_2025;

pub fn caretaker(n: usize) -> String {
    format!("ct{n:03}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Profile {
    Small,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub caretakers: usize,
    pub templates: usize,
    pub days: usize,
    pub items: usize,
}

impl Scale {
    pub fn times(self, k: usize) -> Self {
        Self {
            caretakers: self.caretakers * k,
            templates: self.templates * k,
            days: self.days * k,
            items: self.items * k,
        }
    }
}

impl Profile {
    pub fn scale(self) -> Scale {
        let small = Scale {
            caretakers: 10,
            templates: 8,
            days: 14,
            items: 50,
        };
        match self {
            Profile::Small => small,
            Profile::Demo => small.times(3),
        }
    }
}

/// Row counts after seeding.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedSummary {
    pub users: u64,
    pub caretakers: u64,
    pub templates: u64,
    pub records: u64,
    pub photos: u64,
    pub attendance: u64,
    pub leave_requests: u64,
    pub notifications: u64,
    pub items: u64,
    pub movements: u64,
    pub purchase_requests: u64,
}

impl SeedSummary {
    pub fn count(campus: &Campus) -> Result<Self> {
        Ok(campus.store().read(|tx| {
            let n = |sql: &str| -> campus_core::Result<u64> { tx.query_row(sql, [], |r| r.get(0)) };
            Ok(SeedSummary {
                users: n("SELECT COUNT(*) FROM users")?,
                caretakers: n("SELECT COUNT(*) FROM users WHERE role = 'caretaker'")?,
                templates: n("SELECT COUNT(*) FROM templates")?,
                records: n("SELECT COUNT(*) FROM daily_records")?,
                photos: n("SELECT COUNT(*) FROM photos")?,
                attendance: n("SELECT COUNT(*) FROM attendance")?,
                leave_requests: n("SELECT COUNT(*) FROM leave_requests")?,
                notifications: n("SELECT COUNT(*) FROM notifications")?,
                items: n("SELECT COUNT(*) FROM items")?,
                movements: n("SELECT COUNT(*) FROM stock_movements")?,
                purchase_requests: n("SELECT COUNT(*) FROM purchase_requests")?,
            })
        })?)
    }
}

impl fmt::Display for SeedSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("users", self.users),
            ("caretakers", self.caretakers),
            ("templates", self.templates),
            ("daily records", self.records),
            ("photos", self.photos),
            ("attendance records", self.attendance),
            ("leave requests", self.leave_requests),
            ("notifications", self.notifications),
            ("items", self.items),
            ("stock movements", self.movements),
            ("purchase requests", self.purchase_requests),
        ];
        for (name, n) in rows {
            writeln!(f, "{name:<20} {n}")?;
        }
        Ok(())
    }
}

/// A campus over `config` whose clock the seeder controls. Seeding sessions
/// get a long lifetime and are logged out at the end.
pub fn seeding_campus(mut config: Config, now: DateTime<FixedOffset>) -> Result<(Campus, Arc<ManualClock>)> {
    config.session_ttl_hours = 24 * 366;
    let clock = Arc::new(ManualClock::new(now));
    let store = Store::open(&config.database_path)?;
    let campus = Campus::from_parts(store, config, clock.clone(), PermissionMatrix::builtin())?;
    Ok((campus, clock))
}

/// Seeds the database named by `config`. The last seeded day is `date` at
/// noon, or today at the current time; events never land in the future.
pub fn seed_database(config: Config, scale: Scale, date: Option<NaiveDate>, force: bool) -> Result<SeedSummary> {
    let offset = config.utc_offset;
    let mut now = SystemClock::new(offset).now();
    if let Some(d) = date.filter(|d| *d != now.date_naive()) {
        let noon = d.and_hms_opt(12, 0, 0).expect("valid time");
        now = noon.and_local_timezone(offset).single().expect("fixed offsets are unambiguous");
    }
    let (campus, clock) = seeding_campus(config, now)?;
    seed(&campus, &clock, scale, now, force)
}

struct Staff {
    admin: Session,
    inventory: Session,
    housekeeping: Session,
    supervisor: Session,
    caretakers: Vec<Session>,
}

impl Staff {
    fn sessions(&self) -> impl Iterator<Item = &Session> {
        [&self.admin, &self.inventory, &self.housekeeping, &self.supervisor]
            .into_iter()
            .chain(&self.caretakers)
    }
}

struct Seeder<'a> {
    campus: &'a Campus,
    clock: &'a ManualClock,
    rng: ChaCha8Rng,
    now: DateTime<FixedOffset>,
}

const FIRST_NAMES: [&str; 12] = [
    "Anitha", "Bala", "Chitra", "Devi", "Elango", "Fathima", "Gopal", "Hema", "Irfan", "Jaya", "Kumar", "Lakshmi",
];
const TASKS: [&str; 6] = ["Sweep", "Mop", "Restock", "Inspect", "Clear bins", "Wash"];
const FLAG_REASONS: [&str; 3] = ["Corners missed", "Photo does not show the area", "Bins not emptied"];
const CATEGORIES: [&str; 5] = ["cleaning", "linen", "electrical", "plumbing", "stationery"];
const UNITS: [&str; 4] = ["piece", "box", "litre", "pack"];
const BLOCKS: [&str; 4] = ["Block A", "Block B", "Block C", "Block D"];

/// Seeds `scale` worth of data for the `scale.days` days ending on `now`'s date.
pub fn seed(
    campus: &Campus,
    clock: &ManualClock,
    scale: Scale,
    now: DateTime<FixedOffset>,
    force: bool,
) -> Result<SeedSummary> {
    let existing: u64 = campus.store().read(|tx| tx.query_row("SELECT COUNT(*) FROM users", [], |r| r.get(0)))?;
    if existing > 0 {
        if !force {
            return Err(Error::StorageNotEmpty);
        }
        campus.store().wipe()?;
        let media = &campus.config().media_dir;
        if media.exists() {
            std::fs::remove_dir_all(media)?;
        }
        std::fs::create_dir_all(media)?;
    }
    let mut s = Seeder {
        campus,
        clock,
        rng: ChaCha8Rng::seed_from_u64(RNG_SEED),
        now,
    };
    let first = now.date_naive() - Duration::days(scale.days.max(1) as i64 - 1);
    s.set(first, 6, 0);
    let staff = s.staff(scale.caretakers.max(2))?;
    s.templates(scale.templates)?;
    let items = s.items(scale.items, &staff)?;
    let mut stock: Vec<i64> = items.iter().map(|(_, q)| *q).collect();
    let leave_count = scale.caretakers;
    let purchase_count = (scale.items / 5).max(1);

    for d in 0..scale.days.max(1) {
        let day = first + Duration::days(d as i64);
        s.day_of_tasks(day, &staff)?;
        s.attendance(day, &staff)?;
        s.issuances(day, &items, &mut stock, &staff)?;
        for i in (0..leave_count).filter(|i| i % scale.days.max(1) == d) {
            s.leave(i, day, &staff)?;
        }
        for i in (0..purchase_count).filter(|i| i % scale.days.max(1) == d) {
            s.purchase(i, day, &staff)?;
        }
    }
    s.clock.set(now);
    for session in staff.sessions() {
        campus.accounts().logout(&session.token)?;
    }
    SeedSummary::count(campus)
}

impl Seeder<'_> {
    fn today(&self) -> NaiveDate {
        self.now.date_naive()
    }

    /// Moves the clock to `day` at `h:m`, never past the real present.
    fn set(&self, day: NaiveDate, h: u32, m: u32) {
        let local = day.and_hms_opt(h, m, 0).expect("valid time");
        let at = local
            .and_local_timezone(*self.now.offset())
            .single()
            .expect("fixed offsets are unambiguous");
        self.clock.set(at.min(self.now));
    }

    fn account(&self, username: &str, display: &str, role: Role) -> Result<Session> {
        self.campus.accounts().create_user(NewUser {
            username,
            password: SEED_PASSWORD,
            role,
            display_name: display,
        })?;
        Ok(self.campus.accounts().authenticate(username, SEED_PASSWORD)?)
    }

    fn staff(&mut self, caretakers: usize) -> Result<Staff> {
        let admin = self.account(ADMIN, "Campus Administrator", Role::Admin)?;
        let inventory = self.account(INVENTORY_MANAGER, "Stores Officer", Role::InventoryManager)?;
        let housekeeping = self.account(HOUSEKEEPING_MANAGER, "Housekeeping Manager", Role::HousekeepingManager)?;
        let supervisor = self.account(SUPERVISOR, "Shift Supervisor", Role::Supervisor)?;
        let caretakers = (0..caretakers)
            .map(|n| {
                let name = format!("{} {}", FIRST_NAMES[n % FIRST_NAMES.len()], n / FIRST_NAMES.len() + 1);
                self.account(&caretaker(n), &name, Role::Caretaker)
            })
            .collect::<Result<_>>()?;
        Ok(Staff {
            admin,
            inventory,
            housekeeping,
            supervisor,
            caretakers,
        })
    }

    fn templates(&mut self, n: usize) -> Result<()> {
        let areas = self.campus.scheduling().areas()?;
        for i in 0..n {
            let area = &areas[i % areas.len()];
            let frequency = match i % 8 {
                6 => Frequency::SaturdaySpecial,
                7 => Frequency::SundayExtra,
                _ => Frequency::Daily,
            };
            let start = 6 + (i % 4) as u32 * 2;
            self.campus.scheduling().create_template(&NewTemplate {
                name: format!("{} {}", TASKS[i % TASKS.len()], area.display_name.to_lowercase()),
                area_code: area.code.clone(),
                frequency,
                window_start: NaiveTime::from_hms_opt(start, 0, 0).expect("valid"),
                window_end: NaiveTime::from_hms_opt(start + 2, 0, 0).expect("valid"),
                worker_tags: BTreeSet::from([if area.multi_worker_enabled { "crew" } else { "general" }.to_string()]),
                requires_photo: i % 3 != 2,
            })?;
        }
        Ok(())
    }

    fn items(&mut self, n: usize, staff: &Staff) -> Result<Vec<(ItemId, i64)>> {
        (0..n)
            .map(|i| {
                let category = CATEGORIES[i % CATEGORIES.len()];
                let quantity = self.rng.random_range(20..=200);
                let item = self.campus.inventory().create_item(
                    category,
                    &format!("{} item {:03}", capitalize(category), i),
                    UNITS[i % UNITS.len()],
                    quantity,
                    &staff.inventory,
                )?;
                Ok((item.id, quantity))
            })
            .collect()
    }

    fn day_of_tasks(&mut self, day: NaiveDate, staff: &Staff) -> Result<()> {
        let past = day < self.today();
        let sched = self.campus.scheduling();
        self.set(day, 6, 30);
        let records = sched.instantiate_daily_records(day)?;
        let templates = sched.templates()?;
        let areas = sched.areas()?;
        for r in records {
            let t = templates.iter().find(|t| t.id == r.template_id).expect("record template exists");
            let multi = areas.iter().any(|a| a.code == t.area_code && a.multi_worker_enabled);
            if self.rng.random_bool(if past { 0.05 } else { 0.25 }) {
                continue;
            }
            let crew = if multi { 2 } else { 1 };
            let picked: Vec<&Session> = staff.caretakers.choose_multiple(&mut self.rng, crew).collect();
            let ids: Vec<UserId> = picked.iter().map(|s| s.user_id()).collect();
            let m = self.rng.random_range(0..30);
            self.set(day, 7, m);
            sched.assign_workers(r.id, &ids, &staff.housekeeping)?;
            if !self.rng.random_bool(if past { 0.9 } else { 0.4 }) {
                continue;
            }
            let photo = t.requires_photo.then(|| self.photo());
            let gps = Gps::new(
                12.97 + self.rng.random_range(-0.004..0.004),
                79.16 + self.rng.random_range(-0.004..0.004),
            )?;
            let m = self.rng.random_range(0..60);
            self.set(day, 9, m);
            sched.complete_task(r.id, photo.as_ref(), Some(gps), picked[0])?;
            if past && self.rng.random_bool(0.08) {
                self.set(day, 15, 0);
                let reason = FLAG_REASONS.choose(&mut self.rng).expect("non-empty");
                sched.flag_record(r.id, reason, &staff.supervisor)?;
            }
        }
        Ok(())
    }

    fn attendance(&mut self, day: NaiveDate, staff: &Staff) -> Result<()> {
        let past = day < self.today();
        let slots: &[(HalfDaySlot, u32)] = if past {
            &[(HalfDaySlot::FirstHalf, 8), (HalfDaySlot::SecondHalf, 13)]
        } else {
            &[(HalfDaySlot::FirstHalf, 8)]
        };
        for (slot, hour) in slots {
            self.set(day, *hour, 15);
            for ct in &staff.caretakers {
                let status = match self.rng.random_range(0..100) {
                    0..80 => AttendanceStatus::Present,
                    80..88 => AttendanceStatus::Late,
                    88..94 => AttendanceStatus::Absent,
                    _ => AttendanceStatus::Leave,
                };
                self.campus
                    .attendance()
                    .record_attendance(ct.user_id(), day, *slot, status, &staff.supervisor)?;
            }
            if past {
                self.set(day, hour + 4, 55);
                self.campus.attendance().submit_attendance(day, *slot, &staff.supervisor)?;
            }
        }
        Ok(())
    }

    fn issuances(&mut self, day: NaiveDate, items: &[(ItemId, i64)], stock: &mut [i64], staff: &Staff) -> Result<()> {
        let inv = self.campus.inventory();
        let areas = self.campus.scheduling().areas()?;
        for _ in 0..(items.len() / 10).max(1) {
            let k = self.rng.random_range(0..items.len());
            let qty = self.rng.random_range(1..=5);
            let (h, m) = (self.rng.random_range(10..17), self.rng.random_range(0..60));
            self.set(day, h, m);
            if stock[k] < qty {
                inv.add_stock(items[k].0, 50, &staff.inventory)?;
                stock[k] += 50;
            }
            let area = &areas[self.rng.random_range(0..areas.len())].code;
            let block = BLOCKS.choose(&mut self.rng).expect("non-empty");
            inv.issue_item(items[k].0, qty, area, block, &staff.inventory)?;
            stock[k] -= qty;
        }
        Ok(())
    }

    /// Leave request `i`, driven to one of six outcomes in turn.
    fn leave(&mut self, i: usize, day: NaiveDate, staff: &Staff) -> Result<()> {
        let l = self.campus.leave();
        let k = staff.caretakers.len();
        // Leave and cover stay within a team of up to four caretakers.
        let team = k.min(4);
        let requester = &staff.caretakers[i % team];
        let cover = &staff.caretakers[(i % team + 1 + self.rng.random_range(0..team - 1)) % team];
        let start = self.today() + Duration::days(self.rng.random_range(1..30));
        let end = start + Duration::days(self.rng.random_range(0..3));
        self.set(day, 11, 0);
        let req = l.create_leave_request(requester, start, end, ["Family function", "Medical", "Travel"][i % 3])?;
        if i.is_multiple_of(6) {
            return Ok(());
        }
        self.set(day, 11, 30);
        let a = l.assign_incharge(req.id, cover.user_id(), &staff.housekeeping)?;
        if i % 6 == 1 {
            return Ok(());
        }
        self.set(day, 12, 0);
        l.incharge_respond(a.id, i % 6 != 4, cover)?;
        if matches!(i % 6, 2 | 4) {
            return Ok(());
        }
        self.set(day, 14, 0);
        l.admin_decide(req.id, i % 6 == 3, &staff.admin)?;
        Ok(())
    }

    fn purchase(&mut self, i: usize, day: NaiveDate, staff: &Staff) -> Result<()> {
        let inv = self.campus.inventory();
        self.set(day, 16, 0);
        let category = CATEGORIES[i % CATEGORIES.len()];
        let pr = inv.create_purchase_request(
            &format!("{} restock {i:02}", capitalize(category)),
            self.rng.random_range(5..50),
            "Running low before month end",
            &staff.inventory,
        )?;
        let path: &[PurchaseStatus] = match i % 4 {
            0 => &[],
            1 => &[PurchaseStatus::Ordered],
            2 => &[PurchaseStatus::Ordered, PurchaseStatus::Received],
            _ => &[PurchaseStatus::Cancelled],
        };
        for to in path {
            inv.advance_purchase_request(pr.id, *to, &staff.inventory)?;
        }
        Ok(())
    }

    fn photo(&mut self) -> PhotoUpload {
        synthetic_photo(&mut self.rng)
    }
}

/// A 640x480 JPEG and its 300px thumbnail, shaped like a camera upload.
pub fn synthetic_photo(rng: &mut impl Rng) -> PhotoUpload {
    let base: [u8; 3] = [rng.random(), rng.random(), rng.random()];
    let (cx, cy) = (rng.random_range(100..540), rng.random_range(80..400));
    let main = RgbImage::from_fn(640, 480, |x, y| {
        let d = (x as i32 - cx).abs() + (y as i32 - cy).abs();
        let shade = (d / 6).min(120) as u8;
        Rgb([
            base[0].wrapping_add((x / 5) as u8).saturating_sub(shade),
            base[1].wrapping_add((y / 4) as u8).saturating_sub(shade),
            base[2].saturating_sub(shade / 2),
        ])
    });
    let thumb = image::imageops::resize(&main, 300, 225, image::imageops::FilterType::Triangle);
    let main = jpeg(&main, 85);
    PhotoUpload {
        original_size: main.len() as u64,
        main,
        thumb: jpeg(&thumb, 70),
    }
}

fn jpeg(img: &RgbImage, quality: u8) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    JpegEncoder::new_with_quality(&mut out, quality)
        .encode_image(img)
        .expect("encoding to memory cannot fail");
    out.into_inner()
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}
