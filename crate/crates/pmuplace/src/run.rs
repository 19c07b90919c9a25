//! The computations behind each command, parallelized over reference buses
//! and `M` with rayon. Results always come back in `(M, r)` order.

use pmuplace_core::detection::{DetectionReport, Detector, NoiseModel};
use pmuplace_core::optimizer::{
    branch_and_bound, exhaustive_search, greedy_select, BnbConfig, BnbOutcome, ConstraintSet,
    ReferenceSweep,
};
use pmuplace_core::{Selection, ThetaMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::study::Study;

/// Which reference buses to traverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefPolicy {
    All,
    /// Internal bus index.
    Fixed(usize),
}

impl RefPolicy {
    pub fn buses(self, n: usize) -> Vec<usize> {
        match self {
            RefPolicy::All => (0..n).collect(),
            RefPolicy::Fixed(r) => vec![r],
        }
    }
}

/// Distance matrices for every reference bus of the policy, in bus order.
pub fn thetas(study: &Study, policy: RefPolicy) -> Result<Vec<(usize, ThetaMatrix)>> {
    policy
        .buses(study.n_buses())
        .into_par_iter()
        .map(|r| Ok((r, study.theta(r)?)))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RefRun {
    pub ref_bus: u64,
    pub d_min: Option<f64>,
    pub upper_bound: Option<f64>,
    pub i_achieve: Option<usize>,
    pub i_prove: Option<usize>,
    pub iterations: Option<usize>,
    pub lp_solves: Option<usize>,
    pub selection: Vec<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub m: usize,
    pub ref_best: u64,
    pub selection: Vec<u64>,
    /// Norm-domain minimum distance of `selection`.
    pub d_min: f64,
    /// Norm-domain global bounds of the best reference bus.
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub power_upper: f64,
    pub power_lower: f64,
    pub i_achieve: usize,
    pub i_prove: Option<usize>,
    /// Whether every traversed reference bus closed its gap.
    pub proven: bool,
    pub lp_solves: usize,
    /// Upper bound on the traversal optimum: the largest per-reference bound.
    pub traversal_upper_bound: f64,
    pub closest_pair: (usize, usize),
    pub per_ref: Vec<RefRun>,
}

/// Branch and bound over the policy's reference buses for one `M`.
pub struct SolveOutcome {
    pub report: SolveReport,
    pub best: BnbOutcome,
    pub theta: ThetaMatrix,
}

fn ref_run(
    study: &Study,
    theta: &ThetaMatrix,
    r: usize,
    run: &pmuplace_core::Result<BnbOutcome>,
) -> RefRun {
    match run {
        Ok(out) => RefRun {
            ref_bus: study.network().bus_id(r),
            d_min: Some(theta.to_distance(out.power)),
            upper_bound: Some(theta.to_distance(out.upper)),
            i_achieve: Some(out.i_achieve),
            i_prove: out.i_prove,
            iterations: Some(out.iterations),
            lp_solves: Some(out.lp_solves),
            selection: study.ids(out.selection.buses()),
            error: None,
        },
        Err(e) => RefRun {
            ref_bus: study.network().bus_id(r),
            d_min: None,
            upper_bound: None,
            i_achieve: None,
            i_prove: None,
            iterations: None,
            lp_solves: None,
            selection: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

pub fn solve_with(
    thetas: &[(usize, ThetaMatrix)],
    study: &Study,
    m: usize,
    cfg: BnbConfig,
) -> Result<SolveOutcome> {
    let runs: Vec<(usize, pmuplace_core::Result<BnbOutcome>)> = thetas
        .par_iter()
        .map(|(r, theta)| (*r, branch_and_bound(theta, m, cfg)))
        .collect();
    let per_ref: Vec<RefRun> = runs
        .iter()
        .zip(thetas)
        .map(|((r, run), (_, theta))| ref_run(study, theta, *r, run))
        .collect();
    let sweep = ReferenceSweep::from_runs(runs)?;
    let best_ref = sweep.best_ref();
    let theta = thetas
        .iter()
        .find(|(r, _)| *r == best_ref)
        .map(|(_, t)| t.clone())
        .expect("best ref has a matrix");
    let best = sweep.best().clone();
    let traversal_upper = sweep
        .runs
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().map(|o| o.upper))
        .fold(f64::NEG_INFINITY, f64::max);
    let min = pmuplace_core::separation::d_min(&best.selection, &theta)?;
    let report = SolveReport {
        m,
        ref_best: study.network().bus_id(best_ref),
        selection: study.ids(best.selection.buses()),
        d_min: min.distance,
        upper_bound: theta.to_distance(best.upper),
        lower_bound: theta.to_distance(best.lower),
        power_upper: best.upper,
        power_lower: best.lower,
        i_achieve: best.i_achieve,
        i_prove: best.i_prove,
        proven: sweep.all_proven() && sweep.runs.iter().all(|(_, r)| r.is_ok()),
        lp_solves: sweep
            .runs
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok())
            .map(|o| o.lp_solves)
            .sum(),
        traversal_upper_bound: theta.to_distance(traversal_upper),
        closest_pair: (min.pair.i, min.pair.j),
        per_ref,
    };
    Ok(SolveOutcome {
        report,
        best,
        theta,
    })
}

pub fn solve(study: &Study, m: usize, policy: RefPolicy, cfg: BnbConfig) -> Result<SolveOutcome> {
    check_m(study, m)?;
    solve_with(&thetas(study, policy)?, study, m, cfg)
}

pub(crate) fn check_m(study: &Study, m: usize) -> Result<()> {
    if m < 2 || m > study.n_buses() {
        return Err(Error::Usage(format!(
            "M = {m} outside [2, {}]",
            study.n_buses()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub ref_best: Option<u64>,
    pub d_min_opt: Option<f64>,
    pub d_min_greedy: Option<f64>,
    pub upper_bound: Option<f64>,
    pub i_achieve: Option<usize>,
    pub i_prove: Option<usize>,
    pub proven: bool,
    pub selection: Vec<u64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Traversal optimum with every bus selected.
    pub d_min_full: f64,
    /// Smallest swept `M` whose optimum reaches `(1 − 1e-6)` of `d_min_full`.
    pub m_star: Option<usize>,
}

/// Relative shortfall from the all-bus value still counted as the plateau.
pub const PLATEAU_TOLERANCE: f64 = 1e-6;

pub fn sweep(
    study: &Study,
    ms: &[usize],
    policy: RefPolicy,
    cfg: BnbConfig,
) -> Result<SweepReport> {
    for &m in ms {
        check_m(study, m)?;
    }
    let thetas = thetas(study, policy)?;
    let n = study.n_buses();
    let jobs: Vec<(usize, usize)> = ms
        .iter()
        .flat_map(|&m| (0..thetas.len()).map(move |t| (m, t)))
        .collect();
    let results: Vec<(pmuplace_core::Result<BnbOutcome>, Option<f64>)> = jobs
        .par_iter()
        .map(|&(m, t)| {
            let (r, theta) = &thetas[t];
            let greedy = ConstraintSet::root(n, *r)
                .and_then(|c| greedy_select(theta, m, &c))
                .ok()
                .map(|g| theta.to_distance(g.power));
            (branch_and_bound(theta, m, cfg), greedy)
        })
        .collect();

    let mut rows = Vec::with_capacity(ms.len());
    let mut results = results.into_iter();
    for &m in ms {
        let mut runs = Vec::with_capacity(thetas.len());
        let mut greedy_best: Option<f64> = None;
        for (r, _) in &thetas {
            let (run, greedy) = results.next().expect("one result per job");
            if let Some(g) = greedy {
                greedy_best = Some(greedy_best.map_or(g, |b: f64| b.max(g)));
            }
            runs.push((*r, run));
        }
        rows.push(sweep_row(study, &thetas, m, runs, greedy_best));
    }

    let full = if ms.contains(&n) {
        rows.iter()
            .find(|row| row.m == n)
            .and_then(|row| row.d_min_opt)
    } else {
        None
    };
    let d_min_full = match full {
        Some(v) => v,
        None => thetas
            .iter()
            .map(|(_, t)| t.to_distance(t.power_value(&(0..n).collect::<Vec<_>>())))
            .fold(f64::NEG_INFINITY, f64::max),
    };
    let m_star = rows
        .iter()
        .find(|row| {
            row.d_min_opt
                .is_some_and(|d| d >= (1.0 - PLATEAU_TOLERANCE) * d_min_full)
        })
        .map(|row| row.m);
    Ok(SweepReport {
        rows,
        d_min_full,
        m_star,
    })
}

fn sweep_row(
    study: &Study,
    thetas: &[(usize, ThetaMatrix)],
    m: usize,
    runs: Vec<(usize, pmuplace_core::Result<BnbOutcome>)>,
    greedy: Option<f64>,
) -> SweepRow {
    let failed = runs
        .iter()
        .find_map(|(_, r)| r.as_ref().err().map(|e| e.to_string()));
    match ReferenceSweep::from_runs(runs) {
        Ok(sw) => {
            let theta = &thetas
                .iter()
                .find(|(r, _)| *r == sw.best_ref())
                .expect("matrix per ref")
                .1;
            let upper = sw
                .runs
                .iter()
                .filter_map(|(_, r)| r.as_ref().ok().map(|o| o.upper))
                .fold(f64::NEG_INFINITY, f64::max);
            let best = sw.best();
            SweepRow {
                m,
                ref_best: Some(study.network().bus_id(sw.best_ref())),
                d_min_opt: Some(theta.to_distance(best.power)),
                d_min_greedy: greedy,
                upper_bound: Some(theta.to_distance(upper)),
                i_achieve: Some(best.i_achieve),
                i_prove: best.i_prove,
                proven: sw.all_proven() && failed.is_none(),
                selection: study.ids(best.selection.buses()),
                error: failed,
            }
        }
        Err(e) => SweepRow {
            m,
            ref_best: None,
            d_min_opt: None,
            d_min_greedy: greedy,
            upper_bound: None,
            i_achieve: None,
            i_prove: None,
            proven: false,
            selection: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub m: usize,
    pub ref_best: u64,
    pub selection: Vec<u64>,
    pub d_min: f64,
    pub power: f64,
    /// Selections evaluated, summed over reference buses.
    pub evaluated: u64,
    pub per_ref: Vec<(u64, f64, u64)>,
}

pub fn oracle(study: &Study, m: usize, policy: RefPolicy, cap: u128) -> Result<OracleReport> {
    check_m(study, m)?;
    let thetas = thetas(study, policy)?;
    let outs = thetas
        .par_iter()
        .map(|(r, theta)| exhaustive_search(theta, m, *r, cap).map(|o| (*r, o)))
        .collect::<pmuplace_core::Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, (_, o)) in outs.iter().enumerate() {
        if o.power > outs[best].1.power {
            best = i;
        }
    }
    let (r, out) = &outs[best];
    let theta = &thetas[best].1;
    Ok(OracleReport {
        m,
        ref_best: study.network().bus_id(*r),
        selection: study.ids(out.selection.buses()),
        d_min: theta.to_distance(out.power),
        power: out.power,
        evaluated: outs.iter().map(|(_, o)| o.evaluated).sum(),
        per_ref: outs
            .iter()
            .zip(&thetas)
            .map(|((r, o), (_, t))| {
                (
                    study.network().bus_id(*r),
                    t.to_distance(o.power),
                    o.evaluated,
                )
            })
            .collect(),
    })
}

/// Detection simulation with events run in parallel; identical to the
/// single-threaded result for the same seed.
pub fn detect(
    study: &Study,
    sel: &Selection,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<DetectionReport> {
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    let sigs = study.signatures(sel.ref_bus());
    let det = Detector::new(&sigs, sel, noise)?;
    let rows = (0..det.n_events())
        .into_par_iter()
        .map(|k| det.simulate_event(k, trials, seed))
        .collect();
    Ok(det.report(rows, trials, seed))
}
