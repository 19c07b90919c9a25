use pmuplace_core::separation::build_theta;
use pmuplace_core::signatures::compute_signature_set;
use pmuplace_core::{EventSet, PowerNetwork, Selection, SignatureSet, ThetaMatrix};

use crate::error::{Error, Result};

/// Modelling choices shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    /// Norm parameter, `p ≥ 1`.
    pub p: f64,
    /// Per-bus noise scale in internal bus order; `None` means unit scale.
    pub sigma: Option<Vec<f64>>,
    /// Keep one event per group of identical parallel circuits.
    pub merge_parallel: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            p: 2.0,
            sigma: None,
            merge_parallel: false,
        }
    }
}

/// A network with its outage events and signatures, ready to be pinned at
/// any reference bus.
#[derive(Debug, Clone)]
pub struct Study {
    net: PowerNetwork,
    events: EventSet,
    signatures: SignatureSet,
    options: StudyOptions,
}

impl Study {
    pub fn new(net: PowerNetwork, options: StudyOptions) -> Result<Self> {
        let mut events = net.enumerate_single_line_outages()?;
        if options.merge_parallel {
            events = events.merge_identical_parallel(&net);
        }
        if let Some(sigma) = &options.sigma {
            if sigma.len() != net.n_buses() {
                return Err(pmuplace_core::Error::DimensionMismatch {
                    expected: net.n_buses(),
                    found: sigma.len(),
                }
                .into());
            }
        }
        let signatures = compute_signature_set(&net, &events, net.slack())?;
        Ok(Study {
            net,
            events,
            signatures,
            options,
        })
    }

    pub fn network(&self) -> &PowerNetwork {
        &self.net
    }

    pub fn events(&self) -> &EventSet {
        &self.events
    }

    pub fn options(&self) -> &StudyOptions {
        &self.options
    }

    pub fn n_buses(&self) -> usize {
        self.net.n_buses()
    }

    /// Signatures pinned at internal bus index `r`.
    pub fn signatures(&self, r: usize) -> SignatureSet {
        self.signatures.repin(r)
    }

    pub fn theta(&self, r: usize) -> Result<ThetaMatrix> {
        if r >= self.n_buses() {
            return Err(pmuplace_core::Error::BusOutOfRange(r).into());
        }
        Ok(build_theta(
            &[self.signatures(r)],
            self.options.p,
            self.options.sigma.as_deref(),
        )?)
    }

    pub fn index_of(&self, id: u64) -> Result<usize> {
        self.net.index_of(id).ok_or(Error::UnknownBusId(id))
    }

    /// Selection from original bus ids; the reference is added if missing.
    pub fn selection(&self, r: usize, ids: &[u64]) -> Result<Selection> {
        let buses = ids
            .iter()
            .map(|&id| self.index_of(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(Selection::new(self.n_buses(), r, buses)?)
    }

    pub fn ids(&self, buses: &[usize]) -> Vec<u64> {
        buses.iter().map(|&b| self.net.bus_id(b)).collect()
    }

    /// Noise scales in internal bus order (unit when not configured).
    pub fn sigma(&self) -> Vec<f64> {
        self.options
            .sigma
            .clone()
            .unwrap_or_else(|| vec![1.0; self.n_buses()])
    }
}
