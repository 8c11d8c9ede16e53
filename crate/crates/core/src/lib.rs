//! Turnout equilibria in two-candidate elections where voting is costly and
//! voters act on a perceived probability of being pivotal.
//!
//! The crate is organised bottom-up:
//!
//! - [`support`]: support functions, issues, elections and voter sampling;
//! - [`pivotality`]: perceived-pivotality models `p(n, m)`;
//! - [`equilibrium`]: fixed-point thresholds, their classification,
//!   stability and scaling with population size;
//! - [`winprob`]: the popular candidate's winning probability and its limit;
//! - [`mechanism`]: the sortition mechanism with one or two rounds.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod equilibrium;
pub mod error;
pub mod mechanism;
pub mod numeric;
pub mod pivotality;
pub mod support;
pub mod winprob;

pub use equilibrium::{EquilibriumKind, EquilibriumPoint, Family, Stability};
pub use error::{Error, Result};
pub use pivotality::{PivotalityModel, Vanishing};
pub use support::{Candidate, Election, Issue, SupportFunction, VoterDraw};
pub use winprob::{Method, WinProbEstimate};
