//! Reliability and performance models for mirrored and hybrid disk arrays.
//!
//! The crate has three layers:
//!
//! - layout algebra: which disk subsets an array survives ([`layout`],
//!   [`gf2`], [`gf16`], [`routing`]);
//! - closed forms: exact no-repair lifetimes, repair chains, queueing and
//!   seek-time results ([`reliability`], [`ctmc`], [`repair_formulas`],
//!   [`queueing`], [`seek`]);
//! - simulation oracles that cross-check the closed forms ([`sim`]).
//!
//! Exact results are kept in rational arithmetic ([`exact`]) until the caller
//! asks for floats.

pub mod ctmc;
pub mod exact;
pub mod gf16;
pub mod gf2;
pub mod layout;
pub mod poly;
pub mod queueing;
pub mod reliability;
pub mod repair_formulas;
pub mod routing;
pub mod seek;
pub mod sim;
