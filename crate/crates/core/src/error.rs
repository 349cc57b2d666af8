use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure an operation can report. Variants map one-to-one onto the
/// error names used by the HTTP layer (see [`Error::code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid credentials")]
    InvalidCredentials,
    #[error("authentication required")]
    Unauthenticated,
    #[error("role not permitted for this operation")]
    Forbidden,
    #[error("not found")]
    NotFound,

    #[error("record is not in the required status")]
    WrongStatus,
    #[error("area does not allow multi-worker assignment")]
    MultiWorkerNotAllowed,
    #[error("assignment needs between 1 and 4 distinct workers")]
    InvalidWorkerCount,
    #[error("assigned workers must be active caretakers")]
    WorkerRoleViolation,
    #[error("a photo is required to complete this task")]
    PhotoRequired,
    #[error("gps coordinates out of range")]
    GpsOutOfRange,
    #[error("reason must not be empty")]
    EmptyReason,

    #[error("attendance already submitted")]
    AlreadySubmitted,

    #[error("start date is after end date")]
    InvalidRange,
    #[error("a requester cannot cover their own leave")]
    SelfAssignment,
    #[error("incharge must be an active caretaker or supervisor")]
    IneligibleIncharge,
    #[error("leave request is not in the required state")]
    WrongState,
    #[error("only the assigned incharge may respond")]
    NotTheIncharge,
    #[error("assignment already answered")]
    AlreadyResponded,

    #[error("quantity must be positive")]
    NonPositiveQuantity,
    #[error("insufficient stock")]
    InsufficientStock,
    #[error("purchase request cannot move from {from} to {to}")]
    InvalidTransition { from: &'static str, to: &'static str },

    #[error("image could not be decoded: {0}")]
    InvalidImage(String),
    #[error("upload exceeds {limit} bytes")]
    TooLarge { limit: u64 },
    #[error("thumbnail exceeds 300 pixels on its longest side")]
    ThumbnailOversized,

    #[error("storage already holds data")]
    StorageNotEmpty,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{file}:{line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Sqlite(#[from] rusqlite::Error),
    #[error(transparent)]
    Pool(#[from] r2d2::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("internal: {0}")]
    Internal(String),
}

impl Error {
    /// Stable kebab-case name, used in JSON error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidCredentials => "invalid-credentials",
            Error::Unauthenticated => "unauthenticated",
            Error::Forbidden => "forbidden-role",
            Error::NotFound => "not-found",
            Error::WrongStatus => "wrong-status",
            Error::MultiWorkerNotAllowed => "multi-worker-not-allowed",
            Error::InvalidWorkerCount => "invalid-worker-count",
            Error::WorkerRoleViolation => "worker-role-violation",
            Error::PhotoRequired => "photo-required",
            Error::GpsOutOfRange => "gps-out-of-range",
            Error::EmptyReason => "empty-reason",
            Error::AlreadySubmitted => "already-submitted",
            Error::InvalidRange => "invalid-range",
            Error::SelfAssignment => "self-assignment",
            Error::IneligibleIncharge => "ineligible-incharge",
            Error::WrongState => "wrong-state",
            Error::NotTheIncharge => "not-the-incharge",
            Error::AlreadyResponded => "already-responded",
            Error::NonPositiveQuantity => "non-positive-quantity",
            Error::InsufficientStock => "insufficient-stock",
            Error::InvalidTransition { .. } => "invalid-transition",
            Error::InvalidImage(_) => "invalid-image",
            Error::TooLarge { .. } => "too-large",
            Error::ThumbnailOversized => "thumbnail-oversized",
            Error::StorageNotEmpty => "storage-not-empty",
            Error::Invalid(_) => "invalid-input",
            Error::Parse { .. } => "parse-error",
            Error::Sqlite(_) | Error::Pool(_) | Error::Io(_) | Error::Internal(_) => "internal",
        }
    }

    /// True for faults of the server rather than of the request.
    pub fn is_internal(&self) -> bool {
        self.code() == "internal"
    }
}
