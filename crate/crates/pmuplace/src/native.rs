//! Native JSON network document:
//!
//! ```json
//! {
//!   "buses": [{"id": 1, "p_injection_pu": 1.0}, {"id": 2, "p_injection_pu": -1.0}],
//!   "branches": [{"from": 1, "to": 2, "x_pu": 0.1, "tap": 1.0, "status": 1}],
//!   "slack": 1
//! }
//! ```
//!
//! `tap` and `status` are optional; a missing status means in service.

use pmuplace_core::{BranchRecord, BusRecord, PowerNetwork};
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    #[serde(default = "default_base")]
    pub base_mva: f64,
    pub buses: Vec<BusEntry>,
    pub branches: Vec<BranchEntry>,
    pub slack: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusEntry {
    pub id: u64,
    pub p_injection_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchEntry {
    pub from: u64,
    pub to: u64,
    pub x_pu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<u8>,
}

fn default_base() -> f64 {
    100.0
}

impl NetworkDocument {
    pub fn to_network(&self) -> Result<PowerNetwork> {
        let buses: Vec<BusRecord> = self
            .buses
            .iter()
            .map(|b| BusRecord {
                id: b.id,
                injection: b.p_injection_pu,
            })
            .collect();
        let branches: Vec<BranchRecord> = self
            .branches
            .iter()
            .map(|b| BranchRecord {
                from: b.from,
                to: b.to,
                reactance: b.x_pu,
                tap: b.tap,
                in_service: !matches!(b.status, Some(0)),
            })
            .collect();
        Ok(PowerNetwork::from_records(
            self.base_mva,
            &buses,
            &branches,
            self.slack,
        )?)
    }

    /// Document describing `net` (in-service branches only).
    pub fn from_network(net: &PowerNetwork) -> Self {
        NetworkDocument {
            base_mva: net.base_mva(),
            buses: (0..net.n_buses())
                .map(|i| BusEntry {
                    id: net.bus_id(i),
                    p_injection_pu: net.injections()[i],
                })
                .collect(),
            branches: net
                .branches()
                .iter()
                .map(|b| BranchEntry {
                    from: net.bus_id(b.from),
                    to: net.bus_id(b.to),
                    x_pu: b.reactance,
                    tap: (b.tap != 1.0).then_some(b.tap),
                    status: None,
                })
                .collect(),
            slack: net.bus_id(net.slack()),
        }
    }
}

pub fn parse_network(text: &str) -> Result<PowerNetwork> {
    serde_json::from_str::<NetworkDocument>(text)?.to_network()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn triangle_document() {
        let text = r#"{
            "buses": [{"id": 1, "p_injection_pu": 1}, {"id": 2, "p_injection_pu": 0}, {"id": 3, "p_injection_pu": -1}],
            "branches": [{"from": 1, "to": 2, "x_pu": 1}, {"from": 1, "to": 3, "x_pu": 1}, {"from": 2, "to": 3, "x_pu": 1}],
            "slack": 3
        }"#;
        let net = parse_network(text).unwrap();
        assert_eq!(net.n_buses(), 3);
        assert_eq!(net.n_branches(), 3);
    }

    #[test]
    fn duplicate_bus_is_rejected() {
        let text = r#"{"buses": [{"id": 1, "p_injection_pu": 0}, {"id": 1, "p_injection_pu": 0}],
                       "branches": [], "slack": 1}"#;
        assert!(matches!(
            parse_network(text),
            Err(Error::Model(pmuplace_core::Error::DuplicateBus(1)))
        ));
    }

    #[test]
    fn empty_branch_list_parses() {
        let text = r#"{"buses": [{"id": 4, "p_injection_pu": 0}], "branches": [], "slack": 4}"#;
        assert_eq!(parse_network(text).unwrap().n_branches(), 0);
    }

    #[test]
    fn status_zero_drops_branch_and_roundtrip() {
        let text = r#"{"buses": [{"id": 1, "p_injection_pu": 0.5}, {"id": 2, "p_injection_pu": -0.5}],
                       "branches": [{"from": 1, "to": 2, "x_pu": 0.2, "tap": 0.98},
                                    {"from": 1, "to": 2, "x_pu": 0.3, "status": 0}],
                       "slack": 1}"#;
        let net = parse_network(text).unwrap();
        assert_eq!(net.n_branches(), 1);
        let doc = NetworkDocument::from_network(&net);
        let again = doc.to_network().unwrap();
        assert_eq!(again.branches(), net.branches());
        assert_eq!(again.injections(), net.injections());
    }
}
