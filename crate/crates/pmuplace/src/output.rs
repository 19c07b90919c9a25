//! CSV writers. Every file starts with a `# pmuplace <version>` line; the
//! rest is byte-stable for identical inputs. Floats carry 12 significant
//! digits.

use std::fmt::Write as _;

use pmuplace_core::detection::DetectionReport;
use pmuplace_core::optimizer::TraceRow;
use pmuplace_core::ThetaMatrix;

use crate::run::{OracleReport, SweepReport};
use crate::study::Study;

pub fn version_line() -> String {
    format!("# pmuplace {}\n", env!("CARGO_PKG_VERSION"))
}

/// 12 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn ids(ids: &[u64]) -> String {
    ids.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

/// `event_id,bus_<id>...`, one row per event, pinned at `r`.
pub fn signatures_csv(study: &Study, r: usize) -> String {
    let sigs = study.signatures(r);
    let mut out = version_line();
    out.push_str("event_id");
    for id in study.network().bus_ids() {
        let _ = write!(out, ",bus_{id}");
    }
    out.push('\n');
    for (k, theta) in sigs.angles().iter().enumerate() {
        let _ = write!(out, "{k}");
        for v in theta {
            let _ = write!(out, ",{}", num(*v));
        }
        out.push('\n');
    }
    out
}

/// `event_id,removed_branches` with branches as `from-to` id pairs.
pub fn events_csv(study: &Study) -> String {
    let net = study.network();
    let mut out = version_line();
    out.push_str("event_id,removed\n");
    for ev in study.events().events() {
        let removed: Vec<String> = ev
            .removed
            .iter()
            .map(|&l| {
                let b = &net.branches()[l];
                format!("{}-{}", net.bus_id(b.from), net.bus_id(b.to))
            })
            .collect();
        let _ = writeln!(out, "{},{}", ev.id, removed.join(" "));
    }
    out
}

/// Branch and bound trace with power-domain and distance-domain bounds.
pub fn trace_csv(study: &Study, theta: &ThetaMatrix, trace: &[TraceRow]) -> String {
    let mut out = version_line();
    out.push_str(
        "iteration,upper_bound,lower_bound,leaf_count,split_bus,upper_distance,lower_distance\n",
    );
    for row in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.iteration,
            num(row.upper),
            num(row.lower),
            row.leaf_count,
            opt(row.split_bus.map(|b| study.network().bus_id(b))),
            num(theta.to_distance(row.upper)),
            num(theta.to_distance(row.lower)),
        );
    }
    out
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = version_line();
    let _ = writeln!(
        out,
        "# m_star={} d_min_full={}",
        opt(report.m_star),
        num(report.d_min_full)
    );
    out.push_str("M,ref_best,d_min_opt,d_min_greedy,upper_bound,i_achieve,i_prove,selection\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.m,
            opt(row.ref_best),
            opt_num(row.d_min_opt),
            opt_num(row.d_min_greedy),
            opt_num(row.upper_bound),
            opt(row.i_achieve),
            opt(row.i_prove),
            ids(&row.selection),
        );
    }
    out
}

pub fn oracle_csv(report: &OracleReport) -> String {
    let mut out = version_line();
    out.push_str("M,ref_best,d_min,evaluated,selection\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{}",
        report.m,
        report.ref_best,
        num(report.d_min),
        report.evaluated,
        ids(&report.selection)
    );
    out
}

/// Confusion matrix: `true_event,classified_0..classified_K`.
pub fn confusion_csv(report: &DetectionReport) -> String {
    let mut out = version_line();
    let _ = writeln!(
        out,
        "# rng={} seed={} trials_per_event={} success_rate={}",
        report.rng,
        report.seed,
        report.trials_per_event,
        num(report.success_rate())
    );
    out.push_str("true_event");
    for k in 0..report.n_events() {
        let _ = write!(out, ",classified_{k}");
    }
    out.push('\n');
    for (k, row) in report.confusion.iter().enumerate() {
        let _ = write!(out, "{k}");
        for c in row {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}
