//! Static role × endpoint-group permission matrix.
//!
//! The matrix ships as `config/permissions.txt`:
//!
//! ```text
//! # comments and blank lines are ignored
//! version 1
//! caretaker,housekeeping.view,allow
//! ```
//!
//! Pairs that are not listed are denied.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::Role;
use crate::error::{Error, Result};

pub const DEFAULT_MATRIX: &str = include_str!("../../config/permissions.txt");
pub const MATRIX_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EndpointGroup {
    HousekeepingView,
    HousekeepingAssign,
    HousekeepingComplete,
    HousekeepingFlag,
    AttendanceManage,
    LeaveRequest,
    LeaveRespond,
    LeaveAssign,
    LeaveDecide,
    LeaveAudit,
    Notifications,
    PhotosView,
    InventoryView,
    InventoryIssue,
    InventoryPurchase,
    InventoryReport,
    AdminDashboard,
}

impl EndpointGroup {
    pub const ALL: [EndpointGroup; 17] = [
        EndpointGroup::HousekeepingView,
        EndpointGroup::HousekeepingAssign,
        EndpointGroup::HousekeepingComplete,
        EndpointGroup::HousekeepingFlag,
        EndpointGroup::AttendanceManage,
        EndpointGroup::LeaveRequest,
        EndpointGroup::LeaveRespond,
        EndpointGroup::LeaveAssign,
        EndpointGroup::LeaveDecide,
        EndpointGroup::LeaveAudit,
        EndpointGroup::Notifications,
        EndpointGroup::PhotosView,
        EndpointGroup::InventoryView,
        EndpointGroup::InventoryIssue,
        EndpointGroup::InventoryPurchase,
        EndpointGroup::InventoryReport,
        EndpointGroup::AdminDashboard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EndpointGroup::HousekeepingView => "housekeeping.view",
            EndpointGroup::HousekeepingAssign => "housekeeping.assign",
            EndpointGroup::HousekeepingComplete => "housekeeping.complete",
            EndpointGroup::HousekeepingFlag => "housekeeping.flag",
            EndpointGroup::AttendanceManage => "attendance.manage",
            EndpointGroup::LeaveRequest => "leave.request",
            EndpointGroup::LeaveRespond => "leave.respond",
            EndpointGroup::LeaveAssign => "leave.assign",
            EndpointGroup::LeaveDecide => "leave.decide",
            EndpointGroup::LeaveAudit => "leave.audit",
            EndpointGroup::Notifications => "notifications.read",
            EndpointGroup::PhotosView => "photos.view",
            EndpointGroup::InventoryView => "inventory.view",
            EndpointGroup::InventoryIssue => "inventory.issue",
            EndpointGroup::InventoryPurchase => "inventory.purchase",
            EndpointGroup::InventoryReport => "inventory.report",
            EndpointGroup::AdminDashboard => "admin.dashboard",
        }
    }
}

impl fmt::Display for EndpointGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EndpointGroup {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        EndpointGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermissionMatrix {
    version: u32,
    entries: BTreeMap<(Role, EndpointGroup), bool>,
}

impl PermissionMatrix {
    /// The matrix compiled into the binary.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_MATRIX).expect("bundled permission matrix is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            file: "permissions",
            line,
            message,
        };
        let mut version = None;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if version.is_none() {
                let v = line
                    .strip_prefix("version ")
                    .ok_or_else(|| err(lineno, "expected `version N` header".into()))?;
                let v: u32 = v
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno, format!("bad version {v:?}")))?;
                if v != MATRIX_VERSION {
                    return Err(err(lineno, format!("unsupported version {v}")));
                }
                version = Some(v);
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [role, group, decision] = fields[..] else {
                return Err(err(lineno, format!("expected 3 fields, got {}", fields.len())));
            };
            let role: Role = role.parse().map_err(|e| err(lineno, format!("{e}")))?;
            let group: EndpointGroup = group
                .parse()
                .map_err(|_| err(lineno, format!("unknown endpoint group {group:?}")))?;
            let allow = match decision {
                "allow" => true,
                "deny" => false,
                other => return Err(err(lineno, format!("decision must be allow or deny, got {other:?}"))),
            };
            if entries.insert((role, group), allow).is_some() {
                return Err(err(lineno, format!("duplicate entry for {role},{group}")));
            }
        }
        let version = version.ok_or_else(|| err(0, "missing version header".into()))?;
        Ok(Self { version, entries })
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn allows(&self, role: Role, group: EndpointGroup) -> bool {
        self.entries.get(&(role, group)).copied().unwrap_or(false)
    }

    pub fn check(&self, role: Role, group: EndpointGroup) -> Result<()> {
        if self.allows(role, group) {
            Ok(())
        } else {
            Err(Error::Forbidden)
        }
    }
}
