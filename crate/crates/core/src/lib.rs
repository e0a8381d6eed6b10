//! Static arbitrage certification and liability super-replication for
//! fixed-income price systems.
//!
//! A [`Market`] is a price vector `P` together with a cash-flow matrix `C`
//! on a common [`DateGrid`]. The crate answers three questions about it:
//!
//! * is the price system consistent, and if so which discount curve
//!   reproduces it ([`arbitrage`]);
//! * what is the cheapest portfolio whose cash flows dominate a liability
//!   schedule ([`replication`]);
//! * how do swaps combined with rolled repo positions fit into the same
//!   cash-flow framework ([`instruments`]).
//!
//! Every decision is backed by an explicit certificate: either a discount
//! vector or a violating portfolio, either a super-replicating portfolio or
//! an obstruction vector. All certificates come out of the dense simplex
//! kernel in [`lp`].

pub mod arbitrage;
pub mod curve;
pub mod error;
pub mod instruments;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod market;
pub mod replication;
pub mod tolerance;

pub use arbitrage::{
    check_arbitrage, check_law_of_one_price, check_strict_arbitrage, ArbitrageLevel,
    ArbitrageVerdict, LawOfOnePrice, StrictArbitrageCheck,
};
pub use curve::DiscountCurve;
pub use error::{Error, Result};
pub use market::{DateGrid, LiabilitySchedule, Market, Portfolio};
pub use tolerance::TolerancePolicy;
