#![allow(dead_code)]

use pmuplace_core::network::{BranchRecord, BusRecord, PowerNetwork};
use proptest::prelude::*;

/// Raw description of a random network: a spanning tree plus extra branches.
#[derive(Debug, Clone)]
pub struct RandomNet {
    pub n: usize,
    pub parents: Vec<usize>,
    pub extra: Vec<(usize, usize)>,
    pub reactance: Vec<f64>,
    pub injection: Vec<f64>,
}

impl RandomNet {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i + 1))
            .collect();
        e.extend(self.extra.iter().copied());
        e
    }

    pub fn build(&self) -> PowerNetwork {
        self.build_scaled(1.0)
    }

    /// Same topology with every reactance multiplied by `scale`.
    pub fn build_scaled(&self, scale: f64) -> PowerNetwork {
        let buses: Vec<BusRecord> = (0..self.n)
            .map(|i| BusRecord {
                id: 10 * i as u64 + 1,
                injection: self.injection[i],
            })
            .collect();
        let branches: Vec<BranchRecord> = self
            .edges()
            .iter()
            .zip(&self.reactance)
            .map(|(&(a, b), &x)| BranchRecord {
                from: 10 * a as u64 + 1,
                to: 10 * b as u64 + 1,
                reactance: x * scale,
                tap: None,
                in_service: true,
            })
            .collect();
        PowerNetwork::from_records(100.0, &buses, &branches, 1).unwrap()
    }
}

prop_compose! {
    fn tree(n: usize)(parents in (1..n).map(|i| 0..i).collect::<Vec<_>>()) -> Vec<usize> {
        parents
    }
}

/// Connected networks with `min_n..=max_n` buses and up to `max_extra`
/// non-tree branches (possibly parallel to tree branches).
pub fn random_net(
    min_n: usize,
    max_n: usize,
    max_extra: usize,
) -> impl Strategy<Value = RandomNet> {
    (min_n..=max_n)
        .prop_flat_map(move |n| {
            let extra = prop::collection::vec((0..n, 0..n), 0..=max_extra)
                .prop_map(|v| v.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>());
            (Just(n), tree(n), extra)
        })
        .prop_flat_map(|(n, parents, extra)| {
            let l = parents.len() + extra.len();
            (
                Just(n),
                Just(parents),
                Just(extra),
                prop::collection::vec(0.01f64..0.5, l),
                prop::collection::vec(-2.0f64..2.0, n),
            )
        })
        .prop_map(|(n, parents, extra, reactance, injection)| RandomNet {
            n,
            parents,
            extra,
            reactance,
            injection,
        })
}

/// Random selection containing `r`, from a bitmask over the other buses.
pub fn selection_from_bits(n: usize, r: usize, bits: u64) -> Vec<usize> {
    (0..n).filter(|&b| b == r || (bits >> b) & 1 == 1).collect()
}
