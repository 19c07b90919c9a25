use alloc::vec::Vec;

use super::bnb::{branch_and_bound, BnbConfig, BnbOutcome};
use crate::error::{Error, Result};
use crate::separation::ThetaMatrix;

/// Branch and bound outcomes for every candidate reference bus.
#[derive(Debug, Clone)]
pub struct ReferenceSweep {
    pub runs: Vec<(usize, Result<BnbOutcome>)>,
    best: usize,
}

impl ReferenceSweep {
    /// Collects per-reference results. Fails only if every run failed.
    pub fn from_runs(runs: Vec<(usize, Result<BnbOutcome>)>) -> Result<Self> {
        let mut best: Option<usize> = None;
        for (idx, (_, run)) in runs.iter().enumerate() {
            if let Ok(out) = run {
                let better = match best {
                    None => true,
                    Some(b) => match &runs[b].1 {
                        Ok(cur) => out.power > cur.power,
                        Err(_) => true,
                    },
                };
                if better {
                    best = Some(idx);
                }
            }
        }
        match best {
            Some(best) => Ok(ReferenceSweep { runs, best }),
            None => Err(runs
                .into_iter()
                .find_map(|(_, run)| run.err())
                .unwrap_or(Error::InvalidParameter("no reference bus to traverse"))),
        }
    }

    pub fn best_ref(&self) -> usize {
        self.runs[self.best].0
    }

    pub fn best(&self) -> &BnbOutcome {
        match &self.runs[self.best].1 {
            Ok(out) => out,
            Err(_) => unreachable!("best always indexes a successful run"),
        }
    }

    /// Whether every successful run proved its optimum.
    pub fn all_proven(&self) -> bool {
        self.runs
            .iter()
            .all(|(_, r)| r.as_ref().is_ok_and(BnbOutcome::proven))
    }
}

/// Runs branch and bound with every bus as the reference and keeps the best.
/// `build` returns the distance matrix pinned at the given reference bus.
/// Ties go to the lowest reference index.
pub fn optimize_over_reference_buses<F>(
    n_buses: usize,
    m: usize,
    config: BnbConfig,
    mut build: F,
) -> Result<ReferenceSweep>
where
    F: FnMut(usize) -> Result<ThetaMatrix>,
{
    let runs = (0..n_buses)
        .map(|r| {
            (
                r,
                build(r).and_then(|theta| branch_and_bound(&theta, m, config)),
            )
        })
        .collect();
    ReferenceSweep::from_runs(runs)
}
