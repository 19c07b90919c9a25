//! Pairwise signature distances and the minimum distance of a bus selection.
//!
//! Everything inside the optimizers works in the *power domain*: for a
//! selection indicator `w`, the value is `min(wᵀΘ)`, the p-th power of the
//! minimum distance. The p-th root is only taken when reporting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::signatures::SignatureSet;

/// Relative size of angle differences treated as rounding noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Identifies one column of the distance matrix: scenario `t`, events `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ColumnKey {
    pub scenario: usize,
    pub i: usize,
    pub j: usize,
}

/// Matrix of elementwise `|θ⁽ⁱ⁾ − θ⁽ʲ⁾|^p / σⁿ^p`, one row per bus and one
/// column per (scenario, event pair).
///
/// Columns are ordered scenario-major, then `(i, j)` lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    n_buses: usize,
    n_cols: usize,
    ref_bus: usize,
    p: f64,
    sigma: Vec<f64>,
    keys: Vec<ColumnKey>,
    /// Row-major, `n_buses × n_cols`.
    data: Vec<f64>,
}

/// Builds the distance matrix from one or more signature scenarios.
///
/// `sigma` defaults to unit noise at every bus. Angle differences within
/// rounding noise of the scenario's largest angle are taken as exactly zero,
/// so signatures that coincide analytically give exactly zero columns.
pub fn build_theta(
    scenarios: &[SignatureSet],
    p: f64,
    sigma: Option<&[f64]>,
) -> Result<ThetaMatrix> {
    let first = scenarios
        .first()
        .ok_or(Error::InvalidParameter("no signature scenario given"))?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidNorm(p));
    }
    let n = first.n_buses();
    let events = first.len();
    for s in scenarios {
        if s.ref_bus() != first.ref_bus() {
            return Err(Error::ScenarioMismatch("reference bus"));
        }
        if s.len() != events {
            return Err(Error::ScenarioMismatch("event set"));
        }
        if s.n_buses() != n {
            return Err(Error::ScenarioMismatch("bus count"));
        }
    }
    if events < 2 {
        return Err(Error::EmptyPairSet);
    }
    let sigma = match sigma {
        Some(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.len(),
                });
            }
            s.to_vec()
        }
        None => vec![1.0; n],
    };
    for (bus, &value) in sigma.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidSigma { bus, value });
        }
    }

    let mut keys = Vec::with_capacity(scenarios.len() * events * (events - 1) / 2);
    for scenario in 0..scenarios.len() {
        for i in 0..events {
            for j in (i + 1)..events {
                keys.push(ColumnKey { scenario, i, j });
            }
        }
    }
    let n_cols = keys.len();
    let weight: Vec<f64> = sigma.iter().map(|s| 1.0 / pow(*s, p)).collect();
    let mut data = vec![0.0; n * n_cols];
    let noise: Vec<f64> = scenarios
        .iter()
        .map(|s| {
            NOISE_FLOOR
                * s.angles()
                    .iter()
                    .flatten()
                    .fold(0.0f64, |m, v| m.max(libm::fabs(*v)))
        })
        .collect();
    for (c, key) in keys.iter().enumerate() {
        let sigs = &scenarios[key.scenario];
        let a = sigs.signature(key.i);
        let b = sigs.signature(key.j);
        for bus in 0..n {
            let diff = libm::fabs(a[bus] - b[bus]);
            if diff > noise[key.scenario] {
                data[bus * n_cols + c] = pow(diff, p) * weight[bus];
            }
        }
    }
    Ok(ThetaMatrix {
        n_buses: n,
        n_cols,
        ref_bus: first.ref_bus(),
        p,
        sigma,
        keys,
        data,
    })
}

pub(crate) fn pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x
    } else {
        libm::pow(x, p)
    }
}

pub(crate) fn root(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        libm::sqrt(x)
    } else if p == 1.0 {
        x
    } else {
        libm::pow(x, 1.0 / p)
    }
}

impl ThetaMatrix {
    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn ref_bus(&self) -> usize {
        self.ref_bus
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn keys(&self) -> &[ColumnKey] {
        &self.keys
    }

    pub fn row(&self, bus: usize) -> &[f64] {
        &self.data[bus * self.n_cols..(bus + 1) * self.n_cols]
    }

    pub fn get(&self, bus: usize, col: usize) -> f64 {
        self.data[bus * self.n_cols + col]
    }

    /// `wᵀΘ` for the 0/1 indicator of `buses`, summed in ascending bus order.
    pub fn column_sums(&self, buses: &[usize]) -> Vec<f64> {
        let mut sorted = buses.to_vec();
        sorted.sort_unstable();
        let mut sums = vec![0.0; self.n_cols];
        for bus in sorted {
            add_assign(&mut sums, self.row(bus));
        }
        sums
    }

    /// `wᵀΘ` for a fractional indicator.
    pub fn weighted_sums(&self, w: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.n_cols];
        for (bus, &wi) in w.iter().enumerate() {
            if wi != 0.0 {
                for (s, v) in sums.iter_mut().zip(self.row(bus)) {
                    *s += wi * v;
                }
            }
        }
        sums
    }

    /// Power-domain value `min(wᵀΘ)` of a set of buses.
    pub fn power_value(&self, buses: &[usize]) -> f64 {
        min_entry(&self.column_sums(buses)).0
    }

    /// Converts a power-domain value to a distance.
    pub fn to_distance(&self, power: f64) -> f64 {
        root(power.max(0.0), self.p)
    }
}

pub(crate) fn add_assign(acc: &mut [f64], row: &[f64]) {
    for (a, v) in acc.iter_mut().zip(row) {
        *a += v;
    }
}

/// Minimum entry and its first position. `(+inf, 0)` when empty.
pub(crate) fn min_entry(values: &[f64]) -> (f64, usize) {
    let mut best = (f64::INFINITY, 0);
    for (c, &v) in values.iter().enumerate() {
        if v < best.0 {
            best = (v, c);
        }
    }
    best
}

/// A set of PMU buses that always contains the reference bus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    n_buses: usize,
    ref_bus: usize,
    buses: Vec<usize>,
}

impl Selection {
    /// Selection of `buses` plus `ref_bus`; duplicates are ignored.
    pub fn new(
        n_buses: usize,
        ref_bus: usize,
        buses: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if ref_bus >= n_buses {
            return Err(Error::BusOutOfRange(ref_bus));
        }
        let mut mask = vec![false; n_buses];
        mask[ref_bus] = true;
        for b in buses {
            *mask.get_mut(b).ok_or(Error::BusOutOfRange(b))? = true;
        }
        Ok(Self::from_mask(&mask, ref_bus))
    }

    /// Every bus selected.
    pub fn all(n_buses: usize, ref_bus: usize) -> Result<Self> {
        Self::new(n_buses, ref_bus, 0..n_buses)
    }

    pub(crate) fn from_mask(mask: &[bool], ref_bus: usize) -> Self {
        let buses = mask
            .iter()
            .enumerate()
            .filter(|(_, &on)| on)
            .map(|(b, _)| b)
            .collect();
        Selection {
            n_buses: mask.len(),
            ref_bus,
            buses,
        }
    }

    pub fn n_buses(&self) -> usize {
        self.n_buses
    }

    pub fn ref_bus(&self) -> usize {
        self.ref_bus
    }

    /// Selected buses in ascending order, reference included.
    pub fn buses(&self) -> &[usize] {
        &self.buses
    }

    /// Number of PMUs `M`.
    pub fn len(&self) -> usize {
        self.buses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buses.is_empty()
    }

    pub fn contains(&self, bus: usize) -> bool {
        self.buses.binary_search(&bus).is_ok()
    }

    /// 0/1 indicator vector `w`.
    pub fn indicator(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_buses];
        for &b in &self.buses {
            w[b] = 1.0;
        }
        w
    }
}

/// Minimum distance of a selection with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinDistance {
    /// `min(wᵀΘ)`.
    pub power: f64,
    /// `power^(1/p)`.
    pub distance: f64,
    pub column: usize,
    /// The closest event pair.
    pub pair: ColumnKey,
}

/// Minimum p-norm distance among the signatures projected onto `sel`.
pub fn d_min(sel: &Selection, theta: &ThetaMatrix) -> Result<MinDistance> {
    if sel.n_buses() != theta.n_buses() {
        return Err(Error::DimensionMismatch {
            expected: theta.n_buses(),
            found: sel.n_buses(),
        });
    }
    if sel.ref_bus() != theta.ref_bus() {
        return Err(Error::ScenarioMismatch("reference bus"));
    }
    let (power, column) = min_entry(&theta.column_sums(sel.buses()));
    Ok(MinDistance {
        power,
        distance: theta.to_distance(power),
        column,
        pair: theta.keys()[column],
    })
}

/// Minimum distance computed literally from projected signature vectors,
/// without the distance matrix. Only the buses of `sel` other than the
/// reference contribute.
pub fn pairwise_min_direct(
    scenarios: &[SignatureSet],
    sel: &Selection,
    p: f64,
    sigma: Option<&[f64]>,
) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidNorm(p));
    }
    let mut best = f64::INFINITY;
    let mut pairs = 0usize;
    for sigs in scenarios {
        let pinned = sigs.repin(sel.ref_bus());
        let projected: Vec<Vec<f64>> = pinned
            .angles()
            .iter()
            .map(|a| {
                sel.buses()
                    .iter()
                    .filter(|&&b| b != sel.ref_bus())
                    .map(|&b| a[b] / sigma.map_or(1.0, |s| s[b]))
                    .collect()
            })
            .collect();
        for i in 0..projected.len() {
            for j in (i + 1)..projected.len() {
                let sum: f64 = projected[i]
                    .iter()
                    .zip(&projected[j])
                    .map(|(a, b)| pow(libm::fabs(a - b), p))
                    .sum();
                best = best.min(root(sum, p));
                pairs += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::EmptyPairSet);
    }
    Ok(best)
}
