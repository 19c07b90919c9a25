//! Solvers for the PMU selection integer program
//!
//! ```text
//! max_w min(wᵀΘ)   s.t. w ∈ {0,1}ᴺ, Σw = M, w_r = 1
//! ```
//!
//! All values are power-domain (`min(wᵀΘ)`).

mod bnb;
mod exhaustive;
mod greedy;
mod reference;

use alloc::vec;
use alloc::vec::Vec;

pub use bnb::{branch_and_bound, BnbConfig, BnbOutcome, BranchAndBound, Leaf, TraceRow};
pub use exhaustive::{
    binomial, exhaustive_constrained, exhaustive_search, ExhaustiveOutcome, DEFAULT_ENUMERATION_CAP,
};
pub use greedy::{greedy_select, next_bus, round_largest};
pub use reference::{optimize_over_reference_buses, ReferenceSweep};

use crate::error::{Error, Result};
use crate::lp;
use crate::separation::{Selection, ThetaMatrix};

/// Relative gap `(U − L) / max(U, 1e-30)`.
pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    (upper - lower) / upper.max(1e-30)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fix {
    Free,
    One,
    Zero,
}

/// Buses whose indicator is pinned to 1 or 0. The reference bus is always
/// pinned to 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    fixes: Vec<Fix>,
    ref_bus: usize,
    created: usize,
}

impl ConstraintSet {
    /// `{w_r = 1}`.
    pub fn root(n_buses: usize, ref_bus: usize) -> Result<Self> {
        if ref_bus >= n_buses {
            return Err(Error::BusOutOfRange(ref_bus));
        }
        let mut fixes = vec![Fix::Free; n_buses];
        fixes[ref_bus] = Fix::One;
        Ok(ConstraintSet {
            fixes,
            ref_bus,
            created: 0,
        })
    }

    /// Root constraints plus explicit pinned buses.
    pub fn new(
        n_buses: usize,
        ref_bus: usize,
        fixed_one: impl IntoIterator<Item = usize>,
        fixed_zero: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let mut set = Self::root(n_buses, ref_bus)?;
        for b in fixed_one {
            *set.fixes.get_mut(b).ok_or(Error::BusOutOfRange(b))? = Fix::One;
        }
        for b in fixed_zero {
            let slot = set.fixes.get_mut(b).ok_or(Error::BusOutOfRange(b))?;
            if *slot == Fix::One {
                return Err(Error::InvalidParameter("bus fixed to both 0 and 1"));
            }
            *slot = Fix::Zero;
        }
        Ok(set)
    }

    /// Copy with `bus` pinned to `fix`, stamped with a creation index.
    pub fn with(&self, bus: usize, fix: Fix, created: usize) -> Self {
        let mut next = self.clone();
        next.fixes[bus] = fix;
        next.created = created;
        next
    }

    pub fn n_buses(&self) -> usize {
        self.fixes.len()
    }

    pub fn ref_bus(&self) -> usize {
        self.ref_bus
    }

    /// Monotone creation counter assigned by branch and bound.
    pub fn creation_index(&self) -> usize {
        self.created
    }

    pub fn fix(&self, bus: usize) -> Fix {
        self.fixes[bus]
    }

    pub fn fixed_one(&self) -> Vec<usize> {
        self.buses_with(Fix::One)
    }

    pub fn fixed_zero(&self) -> Vec<usize> {
        self.buses_with(Fix::Zero)
    }

    pub fn free(&self) -> Vec<usize> {
        self.buses_with(Fix::Free)
    }

    fn buses_with(&self, fix: Fix) -> Vec<usize> {
        self.fixes
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == fix)
            .map(|(b, _)| b)
            .collect()
    }

    fn count(&self, fix: Fix) -> usize {
        self.fixes.iter().filter(|f| **f == fix).count()
    }

    /// Checks `|fixed_one| ≤ M ≤ N − |fixed_zero|`.
    pub fn check(&self, m: usize) -> Result<()> {
        if self.count(Fix::One) > m {
            return Err(Error::Infeasible {
                m,
                reason: "more buses fixed to 1 than M",
            });
        }
        if self.n_buses() - self.count(Fix::Zero) < m {
            return Err(Error::Infeasible {
                m,
                reason: "fewer than M buses not fixed to 0",
            });
        }
        Ok(())
    }

    /// Whether exactly one selection satisfies the constraints for `M = m`.
    pub fn is_determined(&self, m: usize) -> bool {
        let ones = self.count(Fix::One);
        ones == m || ones + self.count(Fix::Free) == m
    }

    /// Whether a 0/1 indicator satisfies every pinned value.
    pub fn admits(&self, mask: &[bool]) -> bool {
        self.fixes.iter().zip(mask).all(|(f, &on)| match f {
            Fix::Free => true,
            Fix::One => on,
            Fix::Zero => !on,
        })
    }
}

/// An integral solution with its power-domain value.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub selection: Selection,
    pub power: f64,
    /// Buses added on top of the fixed ones, in the order they were chosen.
    pub order: Vec<usize>,
}

/// LP relaxation bound of a constrained problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    /// Upper bound (power domain) on the constrained integer optimum.
    pub bound: f64,
    /// Value of `min(wᵀΘ)` at `weights`.
    pub primal_value: f64,
    /// Fractional indicator, one entry per bus; pinned buses hold 0 or 1.
    pub weights: Vec<f64>,
    pub pivots: usize,
}

/// Upper bound from the relaxation `0 ≤ w ≤ 1` under `constraints`.
pub fn lp_upper_bound(
    theta: &ThetaMatrix,
    m: usize,
    constraints: &ConstraintSet,
) -> Result<Relaxation> {
    check_dims(theta, constraints)?;
    constraints.check(m)?;
    let ones = constraints.fixed_one();
    let free = constraints.free();
    let base = theta.column_sums(&ones);
    let rows: Vec<&[f64]> = free.iter().map(|&b| theta.row(b)).collect();
    let sol = lp::solve_max_min(&rows, &base, m - ones.len())?;
    let mut weights = vec![0.0; theta.n_buses()];
    for b in ones {
        weights[b] = 1.0;
    }
    for (&b, w) in free.iter().zip(sol.weights) {
        weights[b] = w;
    }
    Ok(Relaxation {
        bound: sol.bound,
        primal_value: sol.primal_value,
        weights,
        pivots: sol.pivots,
    })
}

pub(crate) fn check_dims(theta: &ThetaMatrix, constraints: &ConstraintSet) -> Result<()> {
    if constraints.n_buses() != theta.n_buses() {
        return Err(Error::DimensionMismatch {
            expected: theta.n_buses(),
            found: constraints.n_buses(),
        });
    }
    if constraints.ref_bus() != theta.ref_bus() {
        return Err(Error::ScenarioMismatch("reference bus"));
    }
    Ok(())
}
