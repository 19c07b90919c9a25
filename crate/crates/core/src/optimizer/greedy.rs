use alloc::vec::Vec;

use super::{check_dims, ConstraintSet, Fix, Incumbent};
use crate::error::{Error, Result};
use crate::separation::{add_assign, min_entry, Selection, ThetaMatrix};

/// Relative window within which greedy candidates count as tied.
const TIE_TOLERANCE: f64 = 1e-9;

/// Greedy selection: start from the buses fixed to 1 and repeatedly add the
/// free bus that maximizes the current minimum. Ties go to the lowest index.
pub fn greedy_select(
    theta: &ThetaMatrix,
    m: usize,
    constraints: &ConstraintSet,
) -> Result<Incumbent> {
    check_dims(theta, constraints)?;
    constraints.check(m)?;
    let mut chosen: Vec<bool> = (0..theta.n_buses())
        .map(|b| constraints.fix(b) == Fix::One)
        .collect();
    let mut count = chosen.iter().filter(|c| **c).count();
    let mut sums = theta.column_sums(&constraints.fixed_one());
    let mut order = Vec::new();
    while count < m {
        let bus = best_addition(theta, constraints, &chosen, &sums).ok_or(Error::NoFreeBus)?;
        add_assign(&mut sums, theta.row(bus));
        chosen[bus] = true;
        count += 1;
        order.push(bus);
    }
    let selection = Selection::from_mask(&chosen, constraints.ref_bus());
    let power = theta.power_value(selection.buses());
    Ok(Incumbent {
        selection,
        power,
        order,
    })
}

fn best_addition(
    theta: &ThetaMatrix,
    constraints: &ConstraintSet,
    chosen: &[bool],
    sums: &[f64],
) -> Option<usize> {
    let mut scores: Vec<(usize, f64)> = Vec::new();
    for bus in 0..theta.n_buses() {
        if chosen[bus] || constraints.fix(bus) != Fix::Free {
            continue;
        }
        let row = theta.row(bus);
        let value = sums
            .iter()
            .zip(row)
            .map(|(s, v)| s + v)
            .fold(f64::INFINITY, f64::min);
        scores.push((bus, value));
    }
    let best = scores
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = best - TIE_TOLERANCE * libm::fabs(best);
    scores
        .into_iter()
        .find(|(_, v)| *v >= threshold)
        .map(|(b, _)| b)
}

/// The first bus the greedy heuristic would add under `constraints`.
pub fn next_bus(theta: &ThetaMatrix, m: usize, constraints: &ConstraintSet) -> Result<usize> {
    check_dims(theta, constraints)?;
    constraints.check(m)?;
    if constraints.fixed_one().len() >= m {
        return Err(Error::NoFreeBus);
    }
    let chosen: Vec<bool> = (0..theta.n_buses())
        .map(|b| constraints.fix(b) == Fix::One)
        .collect();
    let sums = theta.column_sums(&constraints.fixed_one());
    best_addition(theta, constraints, &chosen, &sums).ok_or(Error::NoFreeBus)
}

/// Rounds a fractional indicator: the fixed buses, then the free buses with
/// the largest weights (ties to the lowest index) up to `M`.
pub fn round_largest(
    weights: &[f64],
    theta: &ThetaMatrix,
    m: usize,
    constraints: &ConstraintSet,
) -> Result<Incumbent> {
    check_dims(theta, constraints)?;
    constraints.check(m)?;
    if weights.len() != theta.n_buses() {
        return Err(Error::DimensionMismatch {
            expected: theta.n_buses(),
            found: weights.len(),
        });
    }
    let mut chosen: Vec<bool> = (0..theta.n_buses())
        .map(|b| constraints.fix(b) == Fix::One)
        .collect();
    let need = m - constraints.fixed_one().len();
    let mut free = constraints.free();
    // stable sort keeps ascending index among equal weights
    free.sort_by(|a, b| weights[*b].total_cmp(&weights[*a]));
    let order: Vec<usize> = free.into_iter().take(need).collect();
    for &b in &order {
        chosen[b] = true;
    }
    let selection = Selection::from_mask(&chosen, constraints.ref_bus());
    let power = min_entry(&theta.column_sums(selection.buses())).0;
    Ok(Incumbent {
        selection,
        power,
        order,
    })
}
