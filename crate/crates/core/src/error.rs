use thiserror::Error;

use crate::domain::{BidderId, LicenseId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amount {0} is negative")]
    NegativeAmount(String),
    #[error("amount overflow")]
    Overflow,
    #[error("cannot parse amount {0:?}")]
    ParseAmount(String),
    #[error("share {0} outside [0, 1]")]
    ShareOutOfRange(String),
    #[error("bids reference more than one license: {first} and {other}")]
    MixedLicenses { first: LicenseId, other: LicenseId },
    #[error("bid by {bidder} is for license {found}, expected {expected}")]
    WrongLicense {
        bidder: BidderId,
        expected: LicenseId,
        found: LicenseId,
    },
    #[error("duplicate bidder {0}")]
    DuplicateBidder(BidderId),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("scored bid by {0} carries no attributes")]
    MissingAttributes(BidderId),
    #[error("profile has tied bids; anonymity is only defined on tie-free profiles")]
    TiedProfile,
    #[error("{0}")]
    Validation(#[from] ValidationError),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Every problem found while validating a scenario, reported together.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("scenario is invalid: {}", .violations.join("; "))]
pub struct ValidationError {
    pub violations: Vec<String>,
}
