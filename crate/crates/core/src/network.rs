//! Bus/branch network model, susceptance matrices and outage events.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest net injection mismatch left after slack balancing, in p.u.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

/// A bus as read from a case file, before renumbering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusRecord {
    pub id: u64,
    /// Net real power injection (generation minus load) in p.u.
    pub injection: f64,
}

/// A branch as read from a case file, before validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRecord {
    pub from: u64,
    pub to: u64,
    /// Series reactance in p.u.
    pub reactance: f64,
    /// Off-nominal tap ratio; `None` (or a literal 0 in case files) means 1.
    pub tap: Option<f64>,
    pub in_service: bool,
}

/// An in-service branch between two internal bus indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub reactance: f64,
    pub tap: f64,
    /// Position of the originating record in the input branch list.
    pub source_row: usize,
}

impl Branch {
    /// DC susceptance `1 / (x * tap)`.
    pub fn susceptance(&self) -> f64 {
        1.0 / (self.reactance * self.tap)
    }
}

/// Transmission network reduced to what the DC power flow needs.
///
/// Buses are renumbered to contiguous indices `0..N` in input order; the
/// original case-file ids stay available through [`PowerNetwork::bus_id`].
/// Only in-service branches are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerNetwork {
    bus_ids: Vec<u64>,
    index_by_id: BTreeMap<u64, usize>,
    branches: Vec<Branch>,
    injections: Vec<f64>,
    slack: usize,
    base_mva: f64,
}

impl PowerNetwork {
    /// Validates and normalizes parsed records.
    ///
    /// Out-of-service branches are dropped and the net injection mismatch is
    /// absorbed at `slack_id`.
    pub fn from_records(
        base_mva: f64,
        buses: &[BusRecord],
        branches: &[BranchRecord],
        slack_id: u64,
    ) -> Result<Self> {
        if buses.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        if !(base_mva > 0.0 && base_mva.is_finite()) {
            return Err(Error::InvalidParameter("baseMVA must be positive"));
        }
        let mut index_by_id = BTreeMap::new();
        let mut bus_ids = Vec::with_capacity(buses.len());
        let mut injections = Vec::with_capacity(buses.len());
        for (idx, bus) in buses.iter().enumerate() {
            if index_by_id.insert(bus.id, idx).is_some() {
                return Err(Error::DuplicateBus(bus.id));
            }
            if !bus.injection.is_finite() {
                return Err(Error::InvalidInjection { bus: bus.id });
            }
            bus_ids.push(bus.id);
            injections.push(bus.injection);
        }
        let slack = *index_by_id
            .get(&slack_id)
            .ok_or(Error::UnknownSlack(slack_id))?;

        let mut kept = Vec::new();
        for (row, rec) in branches.iter().enumerate() {
            let from = *index_by_id.get(&rec.from).ok_or(Error::UnknownBus {
                branch: row,
                bus: rec.from,
            })?;
            let to = *index_by_id.get(&rec.to).ok_or(Error::UnknownBus {
                branch: row,
                bus: rec.to,
            })?;
            if !rec.in_service {
                continue;
            }
            if from == to {
                return Err(Error::SelfLoop {
                    branch: row,
                    bus: rec.from,
                });
            }
            if !(rec.reactance > 0.0 && rec.reactance.is_finite()) {
                return Err(Error::InvalidReactance {
                    branch: row,
                    reactance: rec.reactance,
                });
            }
            let tap = match rec.tap {
                None | Some(0.0) => 1.0,
                Some(t) if t > 0.0 && t.is_finite() => t,
                Some(t) => {
                    return Err(Error::InvalidTap {
                        branch: row,
                        tap: t,
                    })
                }
            };
            kept.push(Branch {
                from,
                to,
                reactance: rec.reactance,
                tap,
                source_row: row,
            });
        }

        let mismatch: f64 = injections.iter().sum();
        injections[slack] -= mismatch;

        Ok(PowerNetwork {
            bus_ids,
            index_by_id,
            branches: kept,
            injections,
            slack,
            base_mva,
        })
    }

    pub fn n_buses(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Per-unit injections after slack balancing.
    pub fn injections(&self) -> &[f64] {
        &self.injections
    }

    pub fn slack(&self) -> usize {
        self.slack
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    pub fn bus_ids(&self) -> &[u64] {
        &self.bus_ids
    }

    /// Original case-file id of an internal bus index.
    pub fn bus_id(&self, index: usize) -> u64 {
        self.bus_ids[index]
    }

    /// Internal index of a case-file bus id.
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index_by_id.get(&id).copied()
    }

    fn removal_mask(&self, removed: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.branches.len()];
        for &l in removed {
            *mask.get_mut(l).ok_or(Error::UnknownBranch(l))? = true;
        }
        Ok(mask)
    }

    /// Susceptance matrix of the network with `removed` branches out.
    pub fn build_b_matrix(&self, removed: &[usize]) -> Result<BMatrix> {
        let mask = self.removal_mask(removed)?;
        let n = self.n_buses();
        let mut data = vec![0.0; n * n];
        for (l, br) in self.branches.iter().enumerate() {
            if mask[l] {
                continue;
            }
            let b = br.susceptance();
            data[br.from * n + br.from] += b;
            data[br.to * n + br.to] += b;
            data[br.from * n + br.to] -= b;
            data[br.to * n + br.from] -= b;
        }
        Ok(BMatrix { n, data })
    }

    /// Connected components using in-service branches not in `removed`.
    pub fn connected_components(&self, removed: &[usize]) -> Result<Components> {
        let mask = self.removal_mask(removed)?;
        let n = self.n_buses();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (l, br) in self.branches.iter().enumerate() {
            if mask[l] {
                continue;
            }
            let a = find(&mut parent, br.from);
            let b = find(&mut parent, br.to);
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut labels = vec![usize::MAX; n];
        let mut count = 0;
        for bus in 0..n {
            let root = find(&mut parent, bus);
            if labels[root] == usize::MAX {
                labels[root] = count;
                count += 1;
            }
            labels[bus] = labels[root];
        }
        Ok(Components { count, labels })
    }

    /// Branch indices whose removal disconnects the network.
    ///
    /// Iterative low-link search over the multigraph; the edge used to enter
    /// a bus is skipped by index, so parallel branches are never bridges.
    pub fn bridges(&self) -> Vec<usize> {
        let n = self.n_buses();
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (l, br) in self.branches.iter().enumerate() {
            adjacency[br.from].push((br.to, l));
            adjacency[br.to].push((br.from, l));
        }
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut bridges = Vec::new();
        let mut time = 0;
        // (bus, entering edge, next adjacency position)
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();
        for start in 0..n {
            if disc[start] != usize::MAX {
                continue;
            }
            disc[start] = time;
            low[start] = time;
            time += 1;
            stack.push((start, usize::MAX, 0));
            while let Some(&mut (bus, via, ref mut pos)) = stack.last_mut() {
                if let Some(&(next, edge)) = adjacency[bus].get(*pos) {
                    *pos += 1;
                    if edge == via {
                        continue;
                    }
                    if disc[next] == usize::MAX {
                        disc[next] = time;
                        low[next] = time;
                        time += 1;
                        stack.push((next, edge, 0));
                    } else {
                        low[bus] = low[bus].min(disc[next]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(parent, _, _)) = stack.last() {
                        low[parent] = low[parent].min(low[bus]);
                        if low[bus] > disc[parent] {
                            bridges.push(via);
                        }
                    }
                }
            }
        }
        bridges.sort_unstable();
        bridges
    }

    /// `E₀` plus one event per in-service branch whose loss keeps the
    /// network connected.
    pub fn enumerate_single_line_outages(&self) -> Result<EventSet> {
        let comps = self.connected_components(&[])?;
        if comps.count != 1 {
            return Err(Error::IslandingUnsupported {
                components: comps.count,
                removed: Vec::new(),
            });
        }
        let mut is_bridge = vec![false; self.branches.len()];
        for l in self.bridges() {
            is_bridge[l] = true;
        }
        let mut events = vec![OutageEvent {
            id: 0,
            removed: Vec::new(),
        }];
        for l in 0..self.branches.len() {
            if !is_bridge[l] {
                events.push(OutageEvent {
                    id: events.len(),
                    removed: vec![l],
                });
            }
        }
        Ok(EventSet { events })
    }
}

/// Dense symmetric susceptance matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct BMatrix {
    n: usize,
    data: Vec<f64>,
}

impl BMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `B x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Component label of each bus, labels numbered by first appearance.
    pub labels: Vec<usize>,
}

/// A set of removed branches. `id` 0 is the non-outage event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutageEvent {
    pub id: usize,
    pub removed: Vec<usize>,
}

/// Outage events indexed `0..=K`; index 0 is always the non-outage event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSet {
    events: Vec<OutageEvent>,
}

impl EventSet {
    /// Builds an event set from explicit removal sets, prepending `E₀`.
    pub fn from_outages(outages: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let mut events = vec![OutageEvent {
            id: 0,
            removed: Vec::new(),
        }];
        for removed in outages {
            events.push(OutageEvent {
                id: events.len(),
                removed,
            });
        }
        EventSet { events }
    }

    pub fn events(&self) -> &[OutageEvent] {
        &self.events
    }

    /// Number of outage events `K`, excluding `E₀`.
    pub fn n_outages(&self) -> usize {
        self.events.len() - 1
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Keeps one event per group of single-branch outages on electrically
    /// identical parallel circuits (same endpoints and susceptance). Such
    /// outages produce identical signatures and cannot be told apart.
    pub fn merge_identical_parallel(&self, net: &PowerNetwork) -> EventSet {
        let mut kept: Vec<OutageEvent> = Vec::new();
        for ev in &self.events {
            let duplicate = match ev.removed.as_slice() {
                [l] => kept.iter().any(|k| match k.removed.as_slice() {
                    [m] => identical_parallel(&net.branches[*l], &net.branches[*m]),
                    _ => false,
                }),
                _ => false,
            };
            if !duplicate {
                kept.push(OutageEvent {
                    id: kept.len(),
                    removed: ev.removed.clone(),
                });
            }
        }
        EventSet { events: kept }
    }
}

fn identical_parallel(a: &Branch, b: &Branch) -> bool {
    let same_ends = (a.from == b.from && a.to == b.to) || (a.from == b.to && a.to == b.from);
    same_ends && a.susceptance() == b.susceptance()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn two_bus() -> PowerNetwork {
        PowerNetwork::from_records(
            100.0,
            &[
                BusRecord {
                    id: 1,
                    injection: 1.0,
                },
                BusRecord {
                    id: 2,
                    injection: -1.0,
                },
            ],
            &[BranchRecord {
                from: 1,
                to: 2,
                reactance: 0.1,
                tap: None,
                in_service: true,
            }],
            1,
        )
        .unwrap()
    }

    pub fn triangle(injections: [f64; 3]) -> PowerNetwork {
        let buses: Vec<_> = (0..3)
            .map(|i| BusRecord {
                id: i as u64 + 1,
                injection: injections[i],
            })
            .collect();
        let br = |a, b| BranchRecord {
            from: a,
            to: b,
            reactance: 1.0,
            tap: None,
            in_service: true,
        };
        PowerNetwork::from_records(100.0, &buses, &[br(1, 2), br(1, 3), br(2, 3)], 1).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn two_bus_matrix() {
        let net = two_bus();
        assert_eq!(net.n_buses(), 2);
        assert_eq!(net.n_branches(), 1);
        assert!((net.branches()[0].susceptance() - 10.0).abs() < 1e-12);
        let b = net.build_b_matrix(&[]).unwrap();
        let expect = [10.0, -10.0, -10.0, 10.0];
        for (a, e) in b.as_slice().iter().zip(expect) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_with_branch_removed() {
        let net = triangle([1.0, 0.0, -1.0]);
        // branch 0 is (1,2)
        let b = net.build_b_matrix(&[0]).unwrap();
        assert_eq!(b.get(0, 0), 1.0);
        assert_eq!(b.get(1, 1), 1.0);
        assert_eq!(b.get(2, 2), 2.0);
        assert_eq!(b.get(0, 1), 0.0);
        assert_eq!(b.get(0, 2), -1.0);
        assert_eq!(b.get(1, 2), -1.0);
    }

    #[test]
    fn removing_every_branch_gives_zero_matrix() {
        let net = triangle([1.0, 0.0, -1.0]);
        let b = net.build_b_matrix(&[0, 1, 2]).unwrap();
        assert!(b.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(net.connected_components(&[0, 1, 2]).unwrap().count, 3);
    }

    #[test]
    fn slack_absorbs_mismatch() {
        let net = PowerNetwork::from_records(
            100.0,
            &[
                BusRecord {
                    id: 10,
                    injection: 0.5,
                },
                BusRecord {
                    id: 20,
                    injection: -0.8,
                },
            ],
            &[BranchRecord {
                from: 10,
                to: 20,
                reactance: 0.2,
                tap: Some(0.0),
                in_service: true,
            }],
            20,
        )
        .unwrap();
        assert!((net.injections()[1] - (-0.5)).abs() < 1e-15);
        assert!(net.injections().iter().sum::<f64>().abs() <= BALANCE_TOLERANCE);
        assert_eq!(net.slack(), 1);
        assert_eq!(net.index_of(20), Some(1));
        assert_eq!(net.bus_id(0), 10);
    }

    #[test]
    fn status_zero_branches_are_dropped() {
        let br = |a, b, s| BranchRecord {
            from: a,
            to: b,
            reactance: 0.1,
            tap: None,
            in_service: s,
        };
        let net = PowerNetwork::from_records(
            100.0,
            &[
                BusRecord {
                    id: 1,
                    injection: 0.0,
                },
                BusRecord {
                    id: 2,
                    injection: 0.0,
                },
            ],
            &[br(1, 2, true), br(1, 2, false)],
            1,
        )
        .unwrap();
        assert_eq!(net.n_branches(), 1);
        assert_eq!(net.branches()[0].source_row, 0);
    }

    #[test]
    fn validation_errors() {
        let bus = |id| BusRecord { id, injection: 0.0 };
        let br = |a, b, x| BranchRecord {
            from: a,
            to: b,
            reactance: x,
            tap: None,
            in_service: true,
        };
        assert_eq!(
            PowerNetwork::from_records(100.0, &[bus(1), bus(1)], &[], 1),
            Err(Error::DuplicateBus(1))
        );
        assert_eq!(
            PowerNetwork::from_records(100.0, &[bus(1), bus(2)], &[br(1, 3, 0.1)], 1),
            Err(Error::UnknownBus { branch: 0, bus: 3 })
        );
        assert!(matches!(
            PowerNetwork::from_records(100.0, &[bus(1), bus(2)], &[br(1, 2, 0.0)], 1),
            Err(Error::InvalidReactance { .. })
        ));
        assert_eq!(
            PowerNetwork::from_records(100.0, &[bus(1), bus(2)], &[], 7),
            Err(Error::UnknownSlack(7))
        );
        assert_eq!(
            PowerNetwork::from_records(100.0, &[], &[], 1),
            Err(Error::EmptyNetwork)
        );
    }

    #[test]
    fn components_and_events() {
        let net = two_bus();
        assert_eq!(net.connected_components(&[]).unwrap().count, 1);
        assert_eq!(net.connected_components(&[0]).unwrap().count, 2);
        let ev = net.enumerate_single_line_outages().unwrap();
        assert_eq!(ev.n_outages(), 0);

        let tri = triangle([1.0, 0.0, -1.0]);
        assert!(tri.bridges().is_empty());
        assert_eq!(tri.enumerate_single_line_outages().unwrap().n_outages(), 3);
    }

    #[test]
    fn parallel_branches_are_not_bridges() {
        let br = |x| BranchRecord {
            from: 1,
            to: 2,
            reactance: x,
            tap: None,
            in_service: true,
        };
        let net = PowerNetwork::from_records(
            100.0,
            &[
                BusRecord {
                    id: 1,
                    injection: 1.0,
                },
                BusRecord {
                    id: 2,
                    injection: -1.0,
                },
            ],
            &[br(0.1), br(0.1), br(0.05)],
            1,
        )
        .unwrap();
        assert!(net.bridges().is_empty());
        let ev = net.enumerate_single_line_outages().unwrap();
        assert_eq!(ev.n_outages(), 3);
        let merged = ev.merge_identical_parallel(&net);
        assert_eq!(merged.n_outages(), 2);
        assert_eq!(merged.events()[2].removed, vec![2]);
        // B sums parallel circuits
        let b = net.build_b_matrix(&[]).unwrap();
        assert!((b.get(0, 0) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_branch_in_removal_set() {
        let net = two_bus();
        assert_eq!(net.build_b_matrix(&[3]), Err(Error::UnknownBranch(3)));
    }

    #[test]
    fn disconnected_network_has_no_event_set() {
        let net = PowerNetwork::from_records(
            100.0,
            &[
                BusRecord {
                    id: 1,
                    injection: 0.0,
                },
                BusRecord {
                    id: 2,
                    injection: 0.0,
                },
            ],
            &[],
            1,
        )
        .unwrap();
        assert!(matches!(
            net.enumerate_single_line_outages(),
            Err(Error::IslandingUnsupported { components: 2, .. })
        ));
    }
}
