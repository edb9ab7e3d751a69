//! Verification toolkit for the long-range random-field Ising model in one and
//! two dimensions: the one-dimensional balancing procedure and its Peierls map,
//! dyadic interval and cube machinery, two-dimensional contours, exact small
//! partition functions and a Metropolis sampler.

pub mod balance1d;
pub mod bounds1d;
pub mod calibration;
pub mod coarse2d;
pub mod contour2d;
pub mod disorder;
pub mod entropy1d;
pub mod error;
pub mod intervals1d;
pub mod kernel;
pub mod mcsim;

pub use error::{Error, Result};

/// Relative slack used by every inequality check.
pub const REL_SLACK: f64 = 1e-9;

/// `lhs >= rhs` up to the relative slack.
pub fn geq_slack(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - REL_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

/// `lhs <= rhs` up to the relative slack.
pub fn leq_slack(lhs: f64, rhs: f64) -> bool {
    geq_slack(rhs, lhs)
}
