//! Order-up-to inventory dynamics on layered supply networks, with the
//! bullwhip effect measured three ways: empirically from simulation traces,
//! analytically from frequency-domain amplification rates, and through an
//! absorbing Markov chain when layer positions are ambiguous. The
//! `experiments` module packages the validation suite and the table and
//! figure reproductions behind one configuration type.
//!
//! The crate-level conventions, shared by every module:
//!
//! - Periods are 1-based in formulas; stored sequences are 0-based with
//!   index k holding period t = k + 1.
//! - Order links point downstream to upstream (buyer to supplier); goods
//!   flow the other way. Market nodes form layer 1.
//! - Orders and inventories may go negative (returns and backlogs).

pub mod absorbing;
pub mod demand;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};

// The guide's code blocks compile and run as doctests, keeping the book in
// lockstep with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/topology.md")]
    mod topology {}
    #[doc = include_str!("../../../book/src/demand.md")]
    mod demand {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/frequency.md")]
    mod frequency {}
    #[doc = include_str!("../../../book/src/absorbing.md")]
    mod absorbing {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
