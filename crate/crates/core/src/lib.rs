//! Phasor measurement unit (PMU) location selection for line outage detection.
//!
//! A transmission network is modelled with the DC power flow. Every outage
//! event of interest yields a stabilized voltage phase angle vector, its
//! *signature*. Choosing `M` buses to measure projects the signatures onto
//! those buses, and the quality of a choice is the minimum p-norm distance
//! among the projected signatures. This crate finds the choice maximizing that
//! minimum distance:
//!
//! * [`network`] holds the bus/branch model, susceptance matrices and the
//!   island-free single line outage event set.
//! * [`signatures`] solves the DC power flow for every event.
//! * [`separation`] builds the pairwise distance matrix and evaluates the
//!   minimum distance of a bus selection.
//! * [`optimizer`] contains the greedy heuristic, the linear programming
//!   relaxation, branch and bound, and exhaustive enumeration.
//! * [`detection`] is a Monte-Carlo nearest-signature detector used to check
//!   that larger minimum distances do mean better detection.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! multi-threading live in the `pmuplace` crate.
#![no_std]
// dense kernels index several arrays in lockstep; `!(x > 0.0)` rejects NaN on purpose
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod detection;
mod error;
mod linalg;
pub mod lp;
pub mod network;
pub mod optimizer;
pub mod separation;
pub mod signatures;

pub use error::{Error, Result};
pub use network::{
    BMatrix, Branch, BranchRecord, BusRecord, Components, EventSet, OutageEvent, PowerNetwork,
};
pub use separation::{ColumnKey, MinDistance, Selection, ThetaMatrix};
pub use signatures::SignatureSet;
