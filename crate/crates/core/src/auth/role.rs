use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Admin,
    InventoryManager,
    HousekeepingManager,
    Supervisor,
    Caretaker,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::Admin,
        Role::InventoryManager,
        Role::HousekeepingManager,
        Role::Supervisor,
        Role::Caretaker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Admin => "admin",
            Role::InventoryManager => "inventory_manager",
            Role::HousekeepingManager => "housekeeping_manager",
            Role::Supervisor => "supervisor",
            Role::Caretaker => "caretaker",
        }
    }

    /// Landing page after login.
    pub fn portal_route(self) -> &'static str {
        match self {
            Role::Admin => "/admin/dashboard/",
            Role::InventoryManager => "/inventory/mobile/",
            Role::HousekeepingManager | Role::Supervisor | Role::Caretaker => {
                "/housekeeping/dashboard/"
            }
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::Admin => "Administrator",
            Role::InventoryManager => "Inventory manager",
            Role::HousekeepingManager => "Housekeeping manager",
            Role::Supervisor => "Supervisor",
            Role::Caretaker => "Caretaker",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownRole(pub String);

impl fmt::Display for UnknownRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown role {:?}", self.0)
    }
}

impl std::error::Error for UnknownRole {}

impl FromStr for Role {
    type Err = UnknownRole;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| UnknownRole(s.to_string()))
    }
}

impl rusqlite::types::FromSql for Role {
    fn column_result(value: rusqlite::types::ValueRef<'_>) -> rusqlite::types::FromSqlResult<Self> {
        value
            .as_str()?
            .parse()
            .map_err(|e| rusqlite::types::FromSqlError::Other(Box::new(e)))
    }
}

impl rusqlite::ToSql for Role {
    fn to_sql(&self) -> rusqlite::Result<rusqlite::types::ToSqlOutput<'_>> {
        Ok(self.as_str().into())
    }
}
