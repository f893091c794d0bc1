//! Spectrum auction mechanisms, bidder models, Monte Carlo evaluation and
//! property checks.
//!
//! Money is fixed-point cents and shares are fixed-point millionths, so every
//! mechanism outcome is exact. Randomness flows only through [`RngStream`].

pub mod agents;
pub mod domain;
pub mod error;
pub mod mechanisms;
pub mod money;
pub mod montecarlo;
pub mod properties;
pub mod ranking;
pub mod rng;

pub use domain::{
    BidderId, BidderProfile, License, LicenseGroup, LicenseId, PriceBid, QualityAttributes,
    ShareBid, Strategy, ValueModel,
};
pub use error::{Error, Result, ValidationError};
pub use money::{Money, Share};
pub use rng::RngStream;
