use alloc::vec;
use alloc::vec::Vec;

use super::{check_dims, ConstraintSet, Fix};
use crate::error::{Error, Result};
use crate::separation::{Selection, ThetaMatrix};

/// Default limit on the number of enumerated selections.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveOutcome {
    pub selection: Selection,
    pub power: f64,
    /// Number of complete selections evaluated.
    pub evaluated: u64,
}

/// `n choose k`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// True optimum over all `C(N−1, M−1)` selections containing `ref_bus`.
/// Ties resolve to the lexicographically smallest selection.
pub fn exhaustive_search(
    theta: &ThetaMatrix,
    m: usize,
    ref_bus: usize,
    cap: u128,
) -> Result<ExhaustiveOutcome> {
    exhaustive_constrained(
        theta,
        m,
        &ConstraintSet::root(theta.n_buses(), ref_bus)?,
        cap,
    )
}

/// Enumerates every selection satisfying `constraints`.
pub fn exhaustive_constrained(
    theta: &ThetaMatrix,
    m: usize,
    constraints: &ConstraintSet,
    cap: u128,
) -> Result<ExhaustiveOutcome> {
    check_dims(theta, constraints)?;
    constraints.check(m)?;
    let ones = constraints.fixed_one();
    let free = constraints.free();
    let k = m - ones.len();
    let count = binomial(free.len(), k);
    if count > cap {
        return Err(Error::EnumerationCapExceeded { count, cap });
    }
    let q = theta.n_cols();
    let base = theta.column_sums(&ones);

    // partial[d] holds the column sums after choosing d free buses
    let mut partial = vec![0.0; (k + 1) * q];
    partial[..q].copy_from_slice(&base);
    let mut picks = vec![0usize; k];
    let mut best_value = f64::NEG_INFINITY;
    let mut best_picks: Vec<usize> = Vec::new();
    let mut evaluated = 0u64;

    if k == 0 {
        evaluated = 1;
    } else {
        // iterative lexicographic enumeration of k-subsets of `free`
        let nf = free.len();
        let mut depth = 0usize;
        let mut next = 0usize;
        loop {
            if depth == k - 1 {
                let prefix = &partial[depth * q..(depth + 1) * q];
                for idx in next..=(nf - 1) {
                    let row = theta.row(free[idx]);
                    let mut value = f64::INFINITY;
                    for (p, v) in prefix.iter().zip(row) {
                        let s = p + v;
                        if s < value {
                            value = s;
                            if value <= best_value {
                                break;
                            }
                        }
                    }
                    evaluated += 1;
                    if value > best_value {
                        best_value = value;
                        picks[depth] = idx;
                        best_picks = picks.clone();
                    }
                }
                // backtrack
                loop {
                    if depth == 0 {
                        return finish(theta, constraints, &free, &best_picks, evaluated);
                    }
                    depth -= 1;
                    let idx = picks[depth] + 1;
                    if idx + (k - depth) <= nf {
                        next = idx;
                        break;
                    }
                }
            }
            // descend: choose picks[depth] = next
            if next + (k - depth) > nf {
                unreachable!("enumeration bounds");
            }
            picks[depth] = next;
            let (head, tail) = partial.split_at_mut((depth + 1) * q);
            let src = &head[depth * q..];
            let dst = &mut tail[..q];
            for ((d, s), v) in dst.iter_mut().zip(src).zip(theta.row(free[next])) {
                *d = s + v;
            }
            depth += 1;
            next = picks[depth - 1] + 1;
        }
    }
    finish(theta, constraints, &free, &best_picks, evaluated)
}

fn finish(
    theta: &ThetaMatrix,
    constraints: &ConstraintSet,
    free: &[usize],
    picks: &[usize],
    evaluated: u64,
) -> Result<ExhaustiveOutcome> {
    let mut mask: Vec<bool> = (0..theta.n_buses())
        .map(|b| constraints.fix(b) == Fix::One)
        .collect();
    for &p in picks {
        mask[free[p]] = true;
    }
    let selection = Selection::from_mask(&mask, constraints.ref_bus());
    let power = theta.power_value(selection.buses());
    Ok(ExhaustiveOutcome {
        selection,
        power,
        evaluated,
    })
}
