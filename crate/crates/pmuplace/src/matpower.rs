//! Reader for MATPOWER case files (`mpc.baseMVA`, `mpc.bus`, `mpc.gen`,
//! `mpc.branch`).
//!
//! Only the columns the DC model needs are read:
//!
//! | block    | columns                                 |
//! |----------|-----------------------------------------|
//! | `bus`    | id (1), type (2), Pd (3)                |
//! | `gen`    | bus (1), Pg (2), status (8)             |
//! | `branch` | from (1), to (2), x (4), ratio (9), status (11) |
//!
//! The slack is the bus of type 3. Injections are `(ΣPg − Pd) / baseMVA`
//! over in-service generators.

use std::collections::BTreeMap;

use pmuplace_core::{BranchRecord, BusRecord, PowerNetwork};

use crate::error::{Error, Result};

const REF_BUS_TYPE: f64 = 3.0;

/// Numeric rows of one matrix block, each tagged with its source line.
type Block = Vec<(usize, Vec<f64>)>;

#[derive(Debug, Clone, PartialEq)]
pub struct MatpowerCase {
    pub name: Option<String>,
    pub base_mva: f64,
    pub bus: Block,
    pub gen: Block,
    pub branch: Block,
}

fn strip_comment(line: &str) -> &str {
    // MATPOWER data never contains quoted '%'
    match line.find('%') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// Splits the text into its `mpc.*` assignments.
pub fn parse_case(text: &str) -> Result<MatpowerCase> {
    let mut name = None;
    let mut base_mva = None;
    let mut blocks: BTreeMap<String, Block> = BTreeMap::new();
    let mut open: Option<(String, usize)> = None;
    let mut skipping_cell = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if skipping_cell {
            if line.contains('}') {
                skipping_cell = false;
            }
            continue;
        }
        if let Some((block, _)) = &open {
            let (body, closes) = match line.find(']') {
                Some(pos) => (&line[..pos], true),
                None => (line, false),
            };
            let rows = blocks.get_mut(block).expect("open block is registered");
            for row in body.split(';') {
                let values = parse_row(row, line_no)?;
                if !values.is_empty() {
                    rows.push((line_no, values));
                }
            }
            if closes {
                open = None;
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("function") {
            if let Some((_, n)) = rest.split_once('=') {
                name = Some(n.trim().trim_end_matches(';').to_string());
            }
            continue;
        }
        let Some(rest) = line.strip_prefix("mpc.") else {
            continue;
        };
        let Some((key, value)) = rest.split_once('=') else {
            return Err(Error::parse(
                line_no,
                format!("expected assignment, found `{line}`"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if value.starts_with('{') {
            skipping_cell = !value.contains('}');
            continue;
        }
        if let Some(body) = value.strip_prefix('[') {
            blocks.insert(key.to_string(), Vec::new());
            let (body, closes) = match body.find(']') {
                Some(pos) => (&body[..pos], true),
                None => (body, false),
            };
            let rows = blocks.get_mut(key).expect("just inserted");
            for row in body.split(';') {
                let values = parse_row(row, line_no)?;
                if !values.is_empty() {
                    rows.push((line_no, values));
                }
            }
            if !closes {
                open = Some((key.to_string(), line_no));
            }
            continue;
        }
        if key == "baseMVA" {
            let v = value.trim_end_matches(';').trim();
            base_mva = Some(
                v.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("invalid baseMVA `{v}`")))?,
            );
        }
    }
    if let Some((block, line)) = open {
        return Err(Error::parse(
            line,
            format!("unterminated `mpc.{block}` block"),
        ));
    }
    let mut take = |key: &'static str| blocks.remove(key).ok_or(Error::MissingBlock(key));
    Ok(MatpowerCase {
        name,
        base_mva: base_mva.ok_or(Error::MissingBlock("baseMVA"))?,
        bus: take("bus")?,
        gen: take("gen").unwrap_or_default(),
        branch: take("branch")?,
    })
}

fn parse_row(row: &str, line: usize) -> Result<Vec<f64>> {
    row.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| match t {
            "Inf" | "inf" => Ok(f64::INFINITY),
            "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::parse(line, format!("invalid number `{t}`"))),
        })
        .collect()
}

fn column(row: &(usize, Vec<f64>), col: usize, block: &str) -> Result<f64> {
    row.1.get(col).copied().ok_or_else(|| {
        Error::parse(
            row.0,
            format!(
                "`{block}` row has {} columns, need at least {}",
                row.1.len(),
                col + 1
            ),
        )
    })
}

fn bus_id(value: f64, line: usize) -> Result<u64> {
    if value >= 1.0 && value.fract() == 0.0 && value < u64::MAX as f64 {
        Ok(value as u64)
    } else {
        Err(Error::parse(line, format!("invalid bus id {value}")))
    }
}

impl MatpowerCase {
    pub fn to_network(&self) -> Result<PowerNetwork> {
        let mut buses = Vec::with_capacity(self.bus.len());
        let mut slack = None;
        for row in &self.bus {
            let id = bus_id(column(row, 0, "bus")?, row.0)?;
            if column(row, 1, "bus")? == REF_BUS_TYPE && slack.is_none() {
                slack = Some(id);
            }
            buses.push(BusRecord {
                id,
                injection: -column(row, 2, "bus")? / self.base_mva,
            });
        }
        let slack =
            slack.ok_or_else(|| Error::parse(self.bus[0].0, "no reference (type 3) bus"))?;

        let position: BTreeMap<u64, usize> =
            buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
        for row in &self.gen {
            let id = bus_id(column(row, 0, "gen")?, row.0)?;
            let in_service = row.1.get(7).map_or(true, |s| *s > 0.0);
            if !in_service {
                continue;
            }
            let &at = position.get(&id).ok_or(Error::UnknownBusId(id))?;
            buses[at].injection += column(row, 1, "gen")? / self.base_mva;
        }

        let mut branches = Vec::with_capacity(self.branch.len());
        for row in &self.branch {
            let ratio = row.1.get(8).copied().unwrap_or(0.0);
            branches.push(BranchRecord {
                from: bus_id(column(row, 0, "branch")?, row.0)?,
                to: bus_id(column(row, 1, "branch")?, row.0)?,
                reactance: column(row, 3, "branch")?,
                tap: (ratio != 0.0).then_some(ratio),
                in_service: row.1.get(10).map_or(true, |s| *s != 0.0),
            });
        }
        PowerNetwork::from_records(self.base_mva, &buses, &branches, slack).map_err(|e| match e {
            pmuplace_core::Error::InvalidReactance { branch, .. }
            | pmuplace_core::Error::InvalidTap { branch, .. }
            | pmuplace_core::Error::SelfLoop { branch, .. }
            | pmuplace_core::Error::UnknownBus { branch, .. } => {
                Error::parse(self.branch[branch].0, e.to_string())
            }
            other => other.into(),
        })
    }
}

/// Parses a MATPOWER case file straight into a network.
pub fn parse_network(text: &str) -> Result<PowerNetwork> {
    parse_case(text)?.to_network()
}
