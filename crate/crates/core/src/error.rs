use alloc::boxed::Box;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network has no buses")]
    EmptyNetwork,
    #[error("bus id {0} appears more than once")]
    DuplicateBus(u64),
    #[error("branch {branch} references unknown bus {bus}")]
    UnknownBus { branch: usize, bus: u64 },
    #[error("branch {branch} connects bus {bus} to itself")]
    SelfLoop { branch: usize, bus: u64 },
    #[error("branch {branch} has non-positive or non-finite reactance {reactance}")]
    InvalidReactance { branch: usize, reactance: f64 },
    #[error("branch {branch} has non-positive or non-finite tap ratio {tap}")]
    InvalidTap { branch: usize, tap: f64 },
    #[error("bus {bus} has a non-finite injection")]
    InvalidInjection { bus: u64 },
    #[error("slack bus {0} is not a bus of the network")]
    UnknownSlack(u64),
    #[error("branch index {0} is out of range")]
    UnknownBranch(usize),
    #[error("bus index {0} is out of range")]
    BusOutOfRange(usize),
    #[error("network is split into {components} islands")]
    IslandingUnsupported {
        components: usize,
        removed: Vec<usize>,
    },
    #[error("reduced susceptance system is numerically singular")]
    SingularSystem,
    #[error("event {event}: {source}")]
    Event { event: usize, source: Box<Error> },
    #[error("at least two events are needed to form a signature pair")]
    EmptyPairSet,
    #[error("signature scenarios disagree on {0}")]
    ScenarioMismatch(&'static str),
    #[error("norm parameter p = {0} is outside [1, inf)")]
    InvalidNorm(f64),
    #[error("noise scale of bus index {bus} is {value}, must be positive and finite")]
    InvalidSigma { bus: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("constraints are infeasible for M = {m}: {reason}")]
    Infeasible { m: usize, reason: &'static str },
    #[error("no free bus is left to choose")]
    NoFreeBus,
    #[error("linear program did not converge after {iterations} pivots")]
    LpNonConvergence { iterations: usize },
    #[error("enumeration of {count} selections exceeds the cap of {cap}")]
    EnumerationCapExceeded { count: u128, cap: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

impl Error {
    pub(crate) fn for_event(self, event: usize) -> Error {
        Error::Event {
            event,
            source: Box::new(self),
        }
    }
}
