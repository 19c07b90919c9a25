//! Branch and bound over constraint sets.
//!
//! Every leaf carries an LP upper bound and a greedy lower bound. Each
//! iteration splits the leaf with the highest upper bound on the first bus
//! its greedy solution would add, into a `w_n = 0` and a `w_n = 1` child.
//! The global bounds are the maxima of the leaf bounds.

use alloc::vec::Vec;

use super::greedy::greedy_select;
use super::{lp_upper_bound, relative_gap, ConstraintSet, Fix, Incumbent};
use crate::error::{Error, Result};
use crate::separation::{Selection, ThetaMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BnbConfig {
    /// Relative gap `(U − L) / U` at which the incumbent counts as proven.
    pub eps: f64,
    /// Iteration limit, counting the root evaluation as iteration 1.
    pub max_iters: usize,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            eps: 1e-9,
            max_iters: 10_000,
        }
    }
}

/// Global bounds after one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub upper: f64,
    pub lower: f64,
    pub leaf_count: usize,
    /// Bus split on to reach this iteration; `None` for the root.
    pub split_bus: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub constraints: ConstraintSet,
    pub upper: f64,
    pub lower: f64,
    pub incumbent: Incumbent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOutcome {
    pub selection: Selection,
    /// Power-domain value of `selection`; equals `lower`.
    pub power: f64,
    pub upper: f64,
    pub lower: f64,
    pub iterations: usize,
    /// First iteration at which the final lower bound was reached.
    pub i_achieve: usize,
    /// Iteration at which the gap closed; `None` if `max_iters` was hit.
    pub i_prove: Option<usize>,
    pub trace: Vec<TraceRow>,
    pub lp_solves: usize,
    /// Greedy value of the root problem.
    pub root_lower: f64,
    /// LP bound of the root problem.
    pub root_upper: f64,
}

impl BnbOutcome {
    pub fn proven(&self) -> bool {
        self.i_prove.is_some()
    }
}

/// Stepwise branch and bound, for callers that want to inspect the leaves
/// between iterations.
#[derive(Debug, Clone)]
pub struct BranchAndBound<'a> {
    theta: &'a ThetaMatrix,
    m: usize,
    config: BnbConfig,
    leaves: Vec<Leaf>,
    upper: f64,
    lower: f64,
    best: Incumbent,
    iteration: usize,
    created: usize,
    lp_solves: usize,
    trace: Vec<TraceRow>,
    root_lower: f64,
    root_upper: f64,
}

impl<'a> BranchAndBound<'a> {
    /// Evaluates the root `{w_r = 1}` (iteration 1).
    pub fn new(theta: &'a ThetaMatrix, m: usize, config: BnbConfig) -> Result<Self> {
        let n = theta.n_buses();
        if m < 2 || m > n {
            return Err(Error::Infeasible {
                m,
                reason: "M must lie in [2, N]",
            });
        }
        if !(config.eps > 0.0) || config.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "eps must be positive and max_iters at least 1",
            ));
        }
        let root = ConstraintSet::root(n, theta.ref_bus())?;
        let mut lp_solves = 0;
        let leaf = evaluate(theta, m, root, f64::INFINITY, &mut lp_solves)?;
        let mut bnb = BranchAndBound {
            theta,
            m,
            config,
            upper: leaf.upper,
            lower: leaf.lower,
            best: leaf.incumbent.clone(),
            root_lower: leaf.lower,
            root_upper: leaf.upper,
            leaves: alloc::vec![leaf],
            iteration: 1,
            created: 1,
            lp_solves,
            trace: Vec::new(),
        };
        bnb.record(None);
        Ok(bnb)
    }

    fn record(&mut self, split_bus: Option<usize>) {
        self.trace.push(TraceRow {
            iteration: self.iteration,
            upper: self.upper,
            lower: self.lower,
            leaf_count: self.leaves.len(),
            split_bus,
        });
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.upper, self.lower)
    }

    pub fn gap_closed(&self) -> bool {
        relative_gap(self.upper, self.lower) <= self.config.eps
    }

    /// Whether another iteration would run.
    pub fn should_continue(&self) -> bool {
        !self.gap_closed() && self.iteration < self.config.max_iters
    }

    /// Performs one split. Returns `false` without changing anything once
    /// the gap is closed or the iteration limit is reached.
    pub fn step(&mut self) -> Result<bool> {
        if !self.should_continue() {
            return Ok(false);
        }
        // leaf with the highest upper bound, oldest first among ties
        let mut pick = 0;
        for (idx, leaf) in self.leaves.iter().enumerate() {
            let cur = &self.leaves[pick];
            if leaf.upper > cur.upper
                || (leaf.upper == cur.upper
                    && leaf.constraints.creation_index() < cur.constraints.creation_index())
            {
                pick = idx;
            }
        }
        let Some(&bus) = self.leaves[pick].incumbent.order.first() else {
            // a determined leaf has upper == lower <= L, so the gap is closed
            return Ok(false);
        };
        let parent = self.leaves.swap_remove(pick);

        let zero = parent.constraints.with(bus, Fix::Zero, self.created);
        let one = parent.constraints.with(bus, Fix::One, self.created + 1);
        self.created += 2;
        let mut children = Vec::with_capacity(2);
        if zero.check(self.m).is_ok() {
            children.push(evaluate(
                self.theta,
                self.m,
                zero,
                parent.upper,
                &mut self.lp_solves,
            )?);
        }
        children.push(evaluate(
            self.theta,
            self.m,
            one,
            parent.upper,
            &mut self.lp_solves,
        )?);
        for child in children {
            if child.lower > self.lower {
                self.lower = child.lower;
                self.best = child.incumbent.clone();
            }
            self.leaves.push(child);
        }
        // keep leaf order by creation so ties and traces are reproducible
        self.leaves.sort_by_key(|l| l.constraints.creation_index());
        self.upper = self
            .leaves
            .iter()
            .map(|l| l.upper)
            .fold(f64::NEG_INFINITY, f64::max);
        self.iteration += 1;
        self.record(Some(bus));
        Ok(true)
    }

    pub fn run(mut self) -> Result<BnbOutcome> {
        while self.step()? {}
        Ok(self.finish())
    }

    pub fn finish(self) -> BnbOutcome {
        let proven = self.gap_closed();
        let i_achieve = self
            .trace
            .iter()
            .find(|row| row.lower >= self.lower)
            .map_or(self.iteration, |row| row.iteration);
        BnbOutcome {
            selection: self.best.selection,
            power: self.best.power,
            upper: self.upper,
            lower: self.lower,
            iterations: self.iteration,
            i_achieve,
            i_prove: proven.then_some(self.iteration),
            trace: self.trace,
            lp_solves: self.lp_solves,
            root_lower: self.root_lower,
            root_upper: self.root_upper,
        }
    }
}

fn evaluate(
    theta: &ThetaMatrix,
    m: usize,
    constraints: ConstraintSet,
    parent_upper: f64,
    lp_solves: &mut usize,
) -> Result<Leaf> {
    let incumbent = greedy_select(theta, m, &constraints)?;
    let lower = incumbent.power;
    let upper = if constraints.is_determined(m) {
        lower
    } else {
        *lp_solves += 1;
        let bound = lp_upper_bound(theta, m, &constraints)?.bound;
        // a child's region lies inside its parent's, and its greedy
        // solution is feasible, so both clamps keep a valid bound
        bound.min(parent_upper).max(lower)
    };
    Ok(Leaf {
        constraints,
        upper,
        lower,
        incumbent,
    })
}

/// Runs branch and bound for reference bus `theta.ref_bus()` and `M = m`.
pub fn branch_and_bound(theta: &ThetaMatrix, m: usize, config: BnbConfig) -> Result<BnbOutcome> {
    BranchAndBound::new(theta, m, config)?.run()
}
