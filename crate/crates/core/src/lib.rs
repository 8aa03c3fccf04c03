//! Rate / detection-error exponent tradeoffs for joint communication and
//! sensing over compound discrete memoryless channels.
//!
//! The state of the channel is drawn from a finite set and stays fixed for
//! a whole block. Sensing either happens at the transmitter through a
//! feedback channel `Z` (mono-static) or at the receiver from the data
//! channel output `Y` (bi-static). The crate computes:
//!
//! | module | contents |
//! |--------|----------|
//! | [`channel`] | channel families, spec parsing, output-symmetry detection |
//! | [`info`] | entropy, KL, mutual information, Chernoff exponents `ψ_s`, `φ` |
//! | [`region`] | open-loop and closed-loop mono-static frontiers, capacities |
//! | [`bistatic`] | successive and joint bi-static exponents and frontiers |
//! | [`sim`] | Monte-Carlo validation with constant-composition codes |
//!
//! All quantities are in nats.

pub mod bistatic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod info;
pub mod optim;
pub mod region;
pub mod sim;

pub use channel::{ChannelFamily, ChannelMode, ConditionalDistribution, Distribution, SymmetryReport};
pub use error::{JcasError, Result};
pub use region::{CapacityResult, CurveKind, RegionCurve};
