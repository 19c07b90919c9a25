//! Standard test systems bundled with the binary (MATPOWER 8.1 files).

use pmuplace_core::PowerNetwork;

use crate::error::Result;
use crate::matpower;

pub const CASE14: &str = include_str!("../data/case14.m");
pub const CASE24: &str = include_str!("../data/case24_ieee_rts.m");
pub const CASE30: &str = include_str!("../data/case30.m");

/// Names accepted by [`bundled`].
pub const NAMES: [&str; 3] = ["case14", "case24", "case30"];

/// Source text of a bundled case, by name (`case24_ieee_rts` is an alias of
/// `case24`).
pub fn bundled_text(name: &str) -> Option<&'static str> {
    match name {
        "case14" => Some(CASE14),
        "case24" | "case24_ieee_rts" => Some(CASE24),
        "case30" => Some(CASE30),
        _ => None,
    }
}

pub fn bundled(name: &str) -> Option<Result<PowerNetwork>> {
    bundled_text(name).map(matpower::parse_network)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sizes() {
        let sizes: Vec<(usize, usize)> = NAMES
            .iter()
            .map(|n| {
                let net = bundled(n).unwrap().unwrap();
                (net.n_buses(), net.n_branches())
            })
            .collect();
        assert_eq!(sizes, vec![(14, 20), (24, 38), (30, 41)]);
    }

    #[test]
    fn unknown_name() {
        assert!(bundled("case9").is_none());
    }
}
