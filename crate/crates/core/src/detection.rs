//! Monte-Carlo outage detection with a nearest-signature classifier.
//!
//! For a true event `κ`, one trial draws the pre- and post-outage
//! observations `θ⁽⁰⁾ + z⁰` and `θ⁽κ⁾ + z¹` with independent Gaussian noise
//! `zₙ ~ N(0, σₙ²)`, projects their difference onto the selected buses and
//! picks the event whose signature change `θ⁽ᵏ⁾ − θ⁽⁰⁾` is closest in
//! σ-normalized Euclidean distance.
//!
//! Events whose projected signatures coincide cannot be told apart. They
//! form one collision class and the classifier picks uniformly within it.
//!
//! Randomness comes from ChaCha8 seeded with the user seed, one stream per
//! true event, so events can be simulated in any order or in parallel and
//! merged into a bitwise-identical report.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::separation::{pairwise_min_direct, Selection};
use crate::signatures::SignatureSet;

/// Name of the generator recorded in reports.
pub const RNG_NAME: &str = "ChaCha8";

/// Relative tolerance below which two projected signatures count as equal.
const COLLISION_TOLERANCE: f64 = 1e-9;

/// Independent per-bus Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    sigma: Vec<f64>,
}

impl NoiseModel {
    pub fn uniform(n_buses: usize, sigma: f64) -> Result<Self> {
        Self::per_bus(vec![sigma; n_buses])
    }

    pub fn per_bus(sigma: Vec<f64>) -> Result<Self> {
        if let Some((bus, &value)) = sigma
            .iter()
            .enumerate()
            .find(|(_, s)| !(**s > 0.0 && s.is_finite()))
        {
            return Err(Error::InvalidSigma { bus, value });
        }
        Ok(NoiseModel { sigma })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn n_buses(&self) -> usize {
        self.sigma.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub trials_per_event: u64,
    pub seed: u64,
    pub rng: &'static str,
    /// `confusion[true][classified]`.
    pub confusion: Vec<Vec<u64>>,
    /// Event pairs whose projected signatures coincide.
    pub collisions: Vec<(usize, usize)>,
}

impl DetectionReport {
    pub fn n_events(&self) -> usize {
        self.confusion.len()
    }

    pub fn correct(&self) -> u64 {
        (0..self.confusion.len())
            .map(|k| self.confusion[k][k])
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Fraction of trials classified as their true event.
    pub fn success_rate(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }

    /// Binomial standard error of [`success_rate`](Self::success_rate).
    pub fn standard_error(&self) -> f64 {
        let p = self.success_rate();
        libm::sqrt(p * (1.0 - p) / self.total() as f64)
    }
}

/// Signatures projected onto a selection, with collision classes resolved.
#[derive(Debug, Clone)]
pub struct Detector {
    buses: Vec<usize>,
    sigma: Vec<f64>,
    /// Per event, the normalized change `(θ⁽ᵏ⁾ − θ⁽⁰⁾)ₙ / σₙ` at `buses`.
    changes: Vec<Vec<f64>>,
    base: Vec<f64>,
    truth: Vec<Vec<f64>>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    collisions: Vec<(usize, usize)>,
}

impl Detector {
    pub fn new(sigs: &SignatureSet, sel: &Selection, noise: &NoiseModel) -> Result<Self> {
        if sel.n_buses() != sigs.n_buses() {
            return Err(Error::DimensionMismatch {
                expected: sigs.n_buses(),
                found: sel.n_buses(),
            });
        }
        if noise.n_buses() != sigs.n_buses() {
            return Err(Error::DimensionMismatch {
                expected: sigs.n_buses(),
                found: noise.n_buses(),
            });
        }
        if sigs.len() < 2 {
            return Err(Error::EmptyPairSet);
        }
        let buses = sel.buses().to_vec();
        let sigma: Vec<f64> = buses.iter().map(|&b| noise.sigma()[b]).collect();
        let base: Vec<f64> = buses.iter().map(|&b| sigs.signature(0)[b]).collect();
        let truth: Vec<Vec<f64>> = sigs
            .angles()
            .iter()
            .map(|a| buses.iter().map(|&b| a[b]).collect())
            .collect();
        let changes: Vec<Vec<f64>> = truth
            .iter()
            .map(|t| {
                t.iter()
                    .zip(&base)
                    .zip(&sigma)
                    .map(|((t, b), s)| (t - b) / s)
                    .collect()
            })
            .collect();

        let scale = changes
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        let tol = COLLISION_TOLERANCE * scale;
        let k = changes.len();
        let mut class_of: Vec<usize> = (0..k).collect();
        let mut collisions = Vec::new();
        for i in 0..k {
            for j in (i + 1)..k {
                if changes[i]
                    .iter()
                    .zip(&changes[j])
                    .all(|(a, b)| libm::fabs(a - b) <= tol)
                {
                    collisions.push((i, j));
                    let (ci, cj) = (class_of[i], class_of[j]);
                    let (lo, hi) = (ci.min(cj), ci.max(cj));
                    for c in class_of.iter_mut() {
                        if *c == hi {
                            *c = lo;
                        }
                    }
                }
            }
        }
        let mut classes = vec![Vec::new(); k];
        for (event, &c) in class_of.iter().enumerate() {
            classes[c].push(event);
        }
        Ok(Detector {
            buses,
            sigma,
            changes,
            base,
            truth,
            class_of,
            classes,
            collisions,
        })
    }

    pub fn n_events(&self) -> usize {
        self.changes.len()
    }

    pub fn buses(&self) -> &[usize] {
        &self.buses
    }

    pub fn collisions(&self) -> &[(usize, usize)] {
        &self.collisions
    }

    /// Nearest signature to a normalized observed change, lowest index on
    /// exact ties.
    pub fn nearest(&self, observed: &[f64]) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, change) in self.changes.iter().enumerate() {
            let dist: f64 = change
                .iter()
                .zip(observed)
                .map(|(c, o)| (o - c) * (o - c))
                .sum();
            if dist < best_dist {
                best_dist = dist;
                best = k;
            }
        }
        best
    }

    /// Classifies a noisy observation pair (bus values at the selection).
    pub fn classify<R: Rng + ?Sized>(&self, pre: &[f64], post: &[f64], rng: &mut R) -> usize {
        let observed: Vec<f64> = post
            .iter()
            .zip(pre)
            .zip(&self.sigma)
            .map(|((a, b), s)| (a - b) / s)
            .collect();
        let nearest = self.nearest(&observed);
        let class = &self.classes[self.class_of[nearest]];
        if class.len() == 1 {
            nearest
        } else {
            class[rng.random_range(0..class.len())]
        }
    }

    /// Confusion-matrix row for true event `event`.
    pub fn simulate_event(&self, event: usize, trials: u64, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(event as u64);
        let mut row = vec![0u64; self.n_events()];
        let m = self.buses.len();
        let mut pre = vec![0.0; m];
        let mut post = vec![0.0; m];
        for _ in 0..trials {
            for n in 0..m {
                let g: f64 = rng.sample(StandardNormal);
                pre[n] = self.base[n] + self.sigma[n] * g;
            }
            for n in 0..m {
                let g: f64 = rng.sample(StandardNormal);
                post[n] = self.truth[event][n] + self.sigma[n] * g;
            }
            row[self.classify(&pre, &post, &mut rng)] += 1;
        }
        row
    }

    /// Assembles a report from per-event rows in event order.
    pub fn report(&self, rows: Vec<Vec<u64>>, trials: u64, seed: u64) -> DetectionReport {
        DetectionReport {
            trials_per_event: trials,
            seed,
            rng: RNG_NAME,
            confusion: rows,
            collisions: self.collisions.clone(),
        }
    }
}

/// Runs `trials` trials for every event on a single thread.
pub fn simulate_detection(
    sigs: &SignatureSet,
    sel: &Selection,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<DetectionReport> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1"));
    }
    let det = Detector::new(sigs, sel, noise)?;
    let rows = (0..det.n_events())
        .map(|k| det.simulate_event(k, trials, seed))
        .collect();
    Ok(det.report(rows, trials, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub m: usize,
    pub d_min: f64,
    pub success_rate: f64,
    pub standard_error: f64,
}

/// Minimum distance (σ-normalized, norm `p`) and detection success rate of
/// each selection, in input order.
pub fn success_vs_dmin_curve(
    sigs: &SignatureSet,
    selections: &[Selection],
    p: f64,
    noise: &NoiseModel,
    trials: u64,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    selections
        .iter()
        .map(|sel| {
            let d_min =
                pairwise_min_direct(core::slice::from_ref(sigs), sel, p, Some(noise.sigma()))?;
            let report = simulate_detection(sigs, sel, noise, trials, seed)?;
            Ok(CurveRow {
                m: sel.len(),
                d_min,
                success_rate: report.success_rate(),
                standard_error: report.standard_error(),
            })
        })
        .collect()
}

/// Spearman rank correlation with average ranks for ties. `None` if fewer
/// than two points or either sample is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / libm::sqrt(sxx * syy))
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}
