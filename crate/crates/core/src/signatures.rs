//! DC power flow solves for every outage event.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;
use crate::network::{EventSet, PowerNetwork};

/// Voltage angle vector (radians) satisfying `B θ = P` with `θ[ref_bus] = 0`.
///
/// Row/column `ref_bus` is deleted from `B`, the reduced symmetric positive
/// definite system is solved by Cholesky, and a zero is reinserted at
/// `ref_bus`. This is the pseudoinverse solution shifted by a constant.
pub fn solve_dc_angles(net: &PowerNetwork, removed: &[usize], ref_bus: usize) -> Result<Vec<f64>> {
    let n = net.n_buses();
    if ref_bus >= n {
        return Err(Error::BusOutOfRange(ref_bus));
    }
    let comps = net.connected_components(removed)?;
    if comps.count != 1 {
        return Err(Error::IslandingUnsupported {
            components: comps.count,
            removed: removed.to_vec(),
        });
    }
    let b = net.build_b_matrix(removed)?;
    let keep: Vec<usize> = (0..n).filter(|&i| i != ref_bus).collect();
    let m = keep.len();
    let mut reduced = Vec::with_capacity(m * m);
    for &i in &keep {
        for &j in &keep {
            reduced.push(b.get(i, j));
        }
    }
    let scale = b
        .as_slice()
        .iter()
        .fold(0.0f64, |acc, v| acc.max(libm::fabs(*v)));
    if !linalg::cholesky_in_place(&mut reduced, m, scale * 1e-14) {
        return Err(Error::SingularSystem);
    }
    let p = net.injections();
    let mut rhs: Vec<f64> = keep.iter().map(|&i| p[i]).collect();
    linalg::cholesky_solve(&reduced, m, &mut rhs);
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let mut theta = Vec::with_capacity(n);
    let mut solved = rhs.into_iter();
    for i in 0..n {
        theta.push(if i == ref_bus {
            0.0
        } else {
            solved.next().unwrap_or(0.0)
        });
    }
    Ok(theta)
}

/// Outage signatures of an event set, all pinned at one reference bus.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureSet {
    ref_bus: usize,
    angles: Vec<Vec<f64>>,
}

impl SignatureSet {
    /// Wraps precomputed angle vectors; `angles[k]` belongs to event `k`.
    /// Vectors are re-pinned at `ref_bus`.
    pub fn from_angles(angles: Vec<Vec<f64>>, ref_bus: usize) -> Result<Self> {
        let n = angles.first().map_or(0, Vec::len);
        if ref_bus >= n {
            return Err(Error::BusOutOfRange(ref_bus));
        }
        for a in &angles {
            if a.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.len(),
                });
            }
        }
        Ok(SignatureSet { ref_bus: 0, angles }.repin(ref_bus))
    }

    pub fn ref_bus(&self) -> usize {
        self.ref_bus
    }

    pub fn n_buses(&self) -> usize {
        self.angles.first().map_or(0, Vec::len)
    }

    /// Number of signatures, `K + 1`.
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[Vec<f64>] {
        &self.angles
    }

    pub fn signature(&self, event: usize) -> &[f64] {
        &self.angles[event]
    }

    /// Same signatures shifted so that `ref_bus` reads zero.
    pub fn repin(&self, ref_bus: usize) -> SignatureSet {
        let angles = self
            .angles
            .iter()
            .map(|a| {
                let shift = a[ref_bus];
                a.iter().map(|v| v - shift).collect()
            })
            .collect();
        SignatureSet { ref_bus, angles }
    }

    /// Event pairs `(i, j)`, `i < j`, whose signatures differ by at most
    /// `tol` at every bus. Such pairs make the minimum distance zero.
    pub fn collisions(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.angles.len() {
            for j in (i + 1)..self.angles.len() {
                let close = self.angles[i]
                    .iter()
                    .zip(&self.angles[j])
                    .all(|(a, b)| libm::fabs(a - b) <= tol);
                if close {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Solves every event of `events` and pins the results at `ref_bus`.
pub fn compute_signature_set(
    net: &PowerNetwork,
    events: &EventSet,
    ref_bus: usize,
) -> Result<SignatureSet> {
    let angles = events
        .events()
        .iter()
        .map(|ev| solve_dc_angles(net, &ev.removed, ref_bus).map_err(|e| e.for_event(ev.id)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SignatureSet { ref_bus, angles })
}

/// `‖B θ − P‖_∞` for one event.
pub fn residual_inf(net: &PowerNetwork, removed: &[usize], theta: &[f64]) -> Result<f64> {
    let b = net.build_b_matrix(removed)?;
    Ok(b.mul_vec(theta)
        .iter()
        .zip(net.injections())
        .fold(0.0f64, |acc, (lhs, p)| acc.max(libm::fabs(lhs - p))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::*;

    #[test]
    fn two_bus_angles() {
        let net = two_bus();
        let theta = solve_dc_angles(&net, &[], 1).unwrap();
        assert!((theta[0] - 0.1).abs() < 1e-15);
        assert_eq!(theta[1], 0.0);
    }

    #[test]
    fn triangle_angles() {
        let net = triangle([1.0, 0.0, -1.0]);
        let theta = solve_dc_angles(&net, &[], 2).unwrap();
        assert!((theta[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((theta[1] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(theta[2], 0.0);
        assert!(residual_inf(&net, &[], &theta).unwrap() < 1e-12);
    }

    #[test]
    fn islanding_is_rejected() {
        let net = two_bus();
        assert!(matches!(
            solve_dc_angles(&net, &[0], 0),
            Err(Error::IslandingUnsupported { components: 2, .. })
        ));
        let events = EventSet::from_outages([alloc::vec![0]]);
        match compute_signature_set(&net, &events, 0) {
            Err(Error::Event { event: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn base_case_only() {
        let net = triangle([1.0, 0.0, -1.0]);
        let events = EventSet::from_outages([]);
        let sigs = compute_signature_set(&net, &events, 0).unwrap();
        assert_eq!(sigs.len(), 1);
        assert_eq!(
            sigs.signature(0),
            solve_dc_angles(&net, &[], 0).unwrap().as_slice()
        );
    }

    #[test]
    fn repinning_matches_direct_solve() {
        let net = triangle([0.7, -0.2, -0.5]);
        let events = net.enumerate_single_line_outages().unwrap();
        let at0 = compute_signature_set(&net, &events, 0).unwrap();
        let at2 = compute_signature_set(&net, &events, 2).unwrap();
        let moved = at0.repin(2);
        for (a, b) in moved.angles().iter().zip(at2.angles()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_flow_line_collides_with_base_case() {
        // symmetric square 1-2-3-4-1 with load at 3 fed from 1: the diagonal
        // 2-4 carries no flow, so its outage is invisible.
        let bus = |id, p| crate::BusRecord { id, injection: p };
        let br = |a, b| crate::BranchRecord {
            from: a,
            to: b,
            reactance: 0.1,
            tap: None,
            in_service: true,
        };
        let net = PowerNetwork::from_records(
            100.0,
            &[bus(1, 1.0), bus(2, 0.0), bus(3, -1.0), bus(4, 0.0)],
            &[br(1, 2), br(2, 3), br(3, 4), br(4, 1), br(2, 4)],
            1,
        )
        .unwrap();
        let events = net.enumerate_single_line_outages().unwrap();
        let sigs = compute_signature_set(&net, &events, 0).unwrap();
        for (a, b) in sigs.signature(0).iter().zip(sigs.signature(5)) {
            assert!((a - b).abs() < 1e-9);
        }
        assert_eq!(sigs.collisions(1e-9), alloc::vec![(0, 5)]);
    }
}
