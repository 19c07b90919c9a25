use pmuplace::run::{self, RefPolicy};
use pmuplace::{cases, Study, StudyOptions};
use pmuplace_core::optimizer::BnbConfig;

/// The LP pricing once let the split free variable of the dual enter against
/// its own basic half on a rounding-level reduced cost, and the solve aborted.
#[test]
fn case30_m17_ref6_solves() {
    let net = cases::bundled("case30").unwrap().unwrap();
    let study = Study::new(net, StudyOptions::default()).unwrap();
    let r = study.index_of(6).unwrap();
    let out = run::solve(&study, 17, RefPolicy::Fixed(r), BnbConfig::default()).unwrap();
    assert!(out.report.proven);
    assert!(out.report.d_min <= 2.44917384977e-3 * (1.0 + 1e-9));
}
