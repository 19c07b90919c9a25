//! Linear programming relaxation of the max-min selection problem.
//!
//! The relaxation
//!
//! ```text
//! max t   s.t.  t ≤ s_c + Σ_i A_ic w_i   for every column c
//!               Σ_i w_i = k,  0 ≤ w_i ≤ 1
//! ```
//!
//! has one constraint per signature pair (hundreds) but only as many
//! variables as there are free buses (tens). It is solved through its dual
//!
//! ```text
//! min Σ_c s_c λ_c + k μ + Σ_i ν_i
//! s.t. Σ_c λ_c = 1,   μ + ν_i − Σ_c A_ic λ_c ≥ 0,   λ, ν ≥ 0
//! ```
//!
//! with a dense revised simplex whose basis is only `free + 1` square. The
//! primal weights are the simplex multipliers of the final basis.
//!
//! For any `λ` on the unit simplex the dual objective, minimized over `μ`
//! and `ν`, equals `Σ s_c λ_c + (sum of the k largest entries of Aλ)`. That
//! value is a valid upper bound whatever the numerical quality of `λ`, and
//! it is the bound this module reports.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg;

const OPTIMALITY_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_RUN: usize = 50;
/// Primal/dual disagreement (relative) beyond which the solve is rejected.
const ACCEPT_GAP: f64 = 1e-7;
/// Relative margin added to the reported bound to cover rounding in its
/// evaluation.
const BOUND_MARGIN: f64 = 1e-12;
/// Absolute disagreement, relative to the largest data entry, that is
/// always accepted.
const ABSOLUTE_GAP: f64 = 1e-11;

/// Result of [`solve_max_min`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinSolution {
    /// Certified upper bound on the relaxation optimum (dual objective).
    pub bound: f64,
    /// `min_c (s_c + Σ_i A_ic w_i)` at the returned weights.
    pub primal_value: f64,
    /// One optimal fractional `w`, one entry per row of `A`.
    pub weights: Vec<f64>,
    pub pivots: usize,
}

impl MaxMinSolution {
    /// `(bound − primal_value) / max(|bound|, 1e-300)`.
    pub fn relative_gap(&self) -> f64 {
        (self.bound - self.primal_value) / libm::fabs(self.bound).max(1e-300)
    }
}

/// Solves the relaxation for rows `A_i` (one per free bus), base column sums
/// `s` and `k = pick` buses to choose.
pub fn solve_max_min(rows: &[&[f64]], base: &[f64], pick: usize) -> Result<MaxMinSolution> {
    let nf = rows.len();
    let q = base.len();
    if q == 0 {
        return Err(Error::EmptyPairSet);
    }
    if pick > nf {
        return Err(Error::Infeasible {
            m: pick,
            reason: "more buses requested than free",
        });
    }
    if let Some(r) = rows.iter().find(|r| r.len() != q) {
        return Err(Error::DimensionMismatch {
            expected: q,
            found: r.len(),
        });
    }
    if pick == 0 || pick == nf {
        let weights = vec![if pick == 0 { 0.0 } else { 1.0 }; nf];
        let value = evaluate(rows, base, &weights);
        return Ok(MaxMinSolution {
            bound: value,
            primal_value: value,
            weights,
            pivots: 0,
        });
    }

    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .chain(base.iter())
        .fold(0.0f64, |acc, v| acc.max(libm::fabs(*v)));
    if scale == 0.0 {
        let weights = (0..nf).map(|i| if i < pick { 1.0 } else { 0.0 }).collect();
        return Ok(MaxMinSolution {
            bound: 0.0,
            primal_value: 0.0,
            weights,
            pivots: 0,
        });
    }

    let mut lp = DualSimplex::new(rows, base, pick, scale);
    let pivots = lp.run()?;
    let lambda = lp.lambda();
    let bound =
        scale * lp.certified_objective(&lambda).min(lp.best_single_column()) * (1.0 + BOUND_MARGIN);
    let weights: Vec<f64> = lp.multipliers()[1..]
        .iter()
        .map(|w| w.clamp(0.0, 1.0))
        .collect();
    let primal_value = evaluate(rows, base, &weights);
    let sol = MaxMinSolution {
        bound,
        primal_value,
        weights,
        pivots,
    };
    // near-zero optima (colliding signatures) are only resolvable to the
    // absolute precision of the data
    let allowed = (ACCEPT_GAP * libm::fabs(sol.bound)).max(ABSOLUTE_GAP * scale);
    if sol.bound - sol.primal_value > allowed {
        return Err(Error::LpNonConvergence { iterations: pivots });
    }
    Ok(sol)
}

fn evaluate(rows: &[&[f64]], base: &[f64], w: &[f64]) -> f64 {
    let mut sums = base.to_vec();
    for (row, &wi) in rows.iter().zip(w) {
        if wi != 0.0 {
            for (s, v) in sums.iter_mut().zip(row.iter()) {
                *s += wi * v;
            }
        }
    }
    sums.into_iter().fold(f64::INFINITY, f64::min)
}

/// Revised simplex on the dual in equality form. Variable layout:
/// `λ_0..λ_{q-1}, μ⁺, μ⁻, ν_0..ν_{nf-1}, e_0..e_{nf-1}` where `e` are the
/// surplus variables of the `nf` inequality rows.
struct DualSimplex {
    nf: usize,
    q: usize,
    pick: f64,
    /// Scaled data, column-major: `a[c * nf + i]`.
    a: Vec<f64>,
    s: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    /// Row-major `(nf+1)²` inverse of the basis matrix. Since the right-hand
    /// side is the first unit vector, column 0 holds the basic solution.
    binv: Vec<f64>,
}

impl DualSimplex {
    fn new(rows: &[&[f64]], base: &[f64], pick: usize, scale: f64) -> Self {
        let nf = rows.len();
        let q = base.len();
        let mut a = vec![0.0; q * nf];
        for (i, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                a[c * nf + i] = v / scale;
            }
        }
        let s: Vec<f64> = base.iter().map(|v| v / scale).collect();

        // Start from the single column with the cheapest basic solution
        // λ = e_c, μ = 0, ν = A_c.
        let mut start = 0;
        let mut start_cost = f64::INFINITY;
        for c in 0..q {
            let cost = s[c] + a[c * nf..(c + 1) * nf].iter().sum::<f64>();
            if cost < start_cost {
                start_cost = cost;
                start = c;
            }
        }
        let n_vars = q + 2 + 2 * nf;
        let r = nf + 1;
        let mut basis = Vec::with_capacity(r);
        basis.push(start);
        basis.extend((0..nf).map(|i| q + 2 + i));
        let mut is_basic = vec![false; n_vars];
        for &j in &basis {
            is_basic[j] = true;
        }
        // B = [[1, 0], [-A_start, I]]  =>  B⁻¹ = [[1, 0], [A_start, I]]
        let mut binv = vec![0.0; r * r];
        binv[0] = 1.0;
        for i in 0..nf {
            binv[(1 + i) * r] = a[start * nf + i];
            binv[(1 + i) * r + 1 + i] = 1.0;
        }
        DualSimplex {
            nf,
            q,
            pick: pick as f64,
            a,
            s,
            basis,
            is_basic,
            binv,
        }
    }

    fn rows(&self) -> usize {
        self.nf + 1
    }

    fn cost(&self, j: usize) -> f64 {
        let (q, nf) = (self.q, self.nf);
        if j < q {
            self.s[j]
        } else if j == q {
            self.pick
        } else if j == q + 1 {
            -self.pick
        } else if j < q + 2 + nf {
            1.0
        } else {
            0.0
        }
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        let (q, nf) = (self.q, self.nf);
        out.iter_mut().for_each(|v| *v = 0.0);
        if j < q {
            out[0] = 1.0;
            for i in 0..nf {
                out[1 + i] = -self.a[j * nf + i];
            }
        } else if j == q {
            out[1..].iter_mut().for_each(|v| *v = 1.0);
        } else if j == q + 1 {
            out[1..].iter_mut().for_each(|v| *v = -1.0);
        } else if j < q + 2 + nf {
            out[1 + (j - q - 2)] = 1.0;
        } else {
            out[1 + (j - q - 2 - nf)] = -1.0;
        }
    }

    /// Simplex multipliers `y = c_Bᵀ B⁻¹`.
    fn multipliers(&self) -> Vec<f64> {
        let r = self.rows();
        let mut y = vec![0.0; r];
        for (row, &j) in self.basis.iter().enumerate() {
            let c = self.cost(j);
            if c != 0.0 {
                for k in 0..r {
                    y[k] += c * self.binv[row * r + k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let (q, nf) = (self.q, self.nf);
        if j < q {
            let col = &self.a[j * nf..(j + 1) * nf];
            self.s[j] - y[0] + col.iter().zip(&y[1..]).map(|(a, w)| a * w).sum::<f64>()
        } else if j == q {
            self.pick - y[1..].iter().sum::<f64>()
        } else if j == q + 1 {
            -self.pick + y[1..].iter().sum::<f64>()
        } else if j < q + 2 + nf {
            1.0 - y[1 + (j - q - 2)]
        } else {
            y[1 + (j - q - 2 - nf)]
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let r = self.rows();
        let mut b = vec![0.0; r * r];
        let mut col = vec![0.0; r];
        for (k, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for row in 0..r {
                b[row * r + k] = col[row];
            }
        }
        self.binv = linalg::invert(&b, r).ok_or(Error::LpNonConvergence { iterations: 0 })?;
        Ok(())
    }

    fn run(&mut self) -> Result<usize> {
        let r = self.rows();
        let n_vars = self.q + 2 + 2 * self.nf;
        let max_pivots = 50_000 + 20 * n_vars;
        let mut col = vec![0.0; r];
        let mut u = vec![0.0; r];
        let mut degenerate_run = 0usize;
        let mut since_refactor = 0usize;
        for pivots in 0..max_pivots {
            let bland = degenerate_run > DEGENERATE_RUN;
            let y = self.multipliers();
            let mut entering = None;
            let mut best = -OPTIMALITY_TOL;
            for j in 0..n_vars {
                // μ⁺ and μ⁻ are one free variable; with either half basic the
                // other only prices the zero-cost ray between them, and its
                // reduced cost is rounding noise
                if self.is_basic[j]
                    || (j == self.q && self.is_basic[j + 1])
                    || (j == self.q + 1 && self.is_basic[j - 1])
                {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(j) = entering else {
                return Ok(pivots);
            };

            self.column(j, &mut col);
            for row in 0..r {
                u[row] = (0..r).map(|k| self.binv[row * r + k] * col[k]).sum();
            }
            let mut leave: Option<(usize, f64)> = None;
            for row in 0..r {
                if u[row] <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.binv[row * r].max(0.0) / u[row];
                leave = match leave {
                    None => Some((row, ratio)),
                    Some((cur, cur_ratio)) => {
                        let better = if ratio < cur_ratio - 1e-14 {
                            true
                        } else if ratio <= cur_ratio + 1e-14 {
                            if bland {
                                self.basis[row] < self.basis[cur]
                            } else {
                                u[row] > u[cur]
                            }
                        } else {
                            false
                        };
                        if better {
                            Some((row, ratio))
                        } else {
                            Some((cur, cur_ratio))
                        }
                    }
                };
            }
            let Some((pivot_row, step)) = leave else {
                // The dual is bounded below by any primal point, so an
                // unbounded ray can only come from numerical breakdown.
                return Err(Error::LpNonConvergence { iterations: pivots });
            };
            if step <= 1e-13 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            let pr = pivot_row;
            let piv = u[pr];
            for k in 0..r {
                self.binv[pr * r + k] /= piv;
            }
            for row in 0..r {
                if row == pr || u[row] == 0.0 {
                    continue;
                }
                let f = u[row];
                for k in 0..r {
                    self.binv[row * r + k] -= f * self.binv[pr * r + k];
                }
            }
            self.is_basic[self.basis[pr]] = false;
            self.is_basic[j] = true;
            self.basis[pr] = j;

            since_refactor += 1;
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
        }
        Err(Error::LpNonConvergence {
            iterations: max_pivots,
        })
    }

    /// Basic `λ`, clamped and renormalized onto the unit simplex.
    fn lambda(&self) -> Vec<f64> {
        let r = self.rows();
        let mut lambda = vec![0.0; self.q];
        for (row, &j) in self.basis.iter().enumerate() {
            if j < self.q {
                lambda[j] = self.binv[row * r].max(0.0);
            }
        }
        let total: f64 = lambda.iter().sum();
        if total > 0.0 {
            lambda.iter_mut().for_each(|l| *l /= total);
        } else {
            lambda[0] = 1.0;
        }
        lambda
    }

    /// Smallest dual objective over the vertices `λ = e_c` (scaled units).
    fn best_single_column(&self) -> f64 {
        let nf = self.nf;
        let k = self.pick as usize;
        let mut col = vec![0.0; nf];
        let mut best = f64::INFINITY;
        for c in 0..self.q {
            col.copy_from_slice(&self.a[c * nf..(c + 1) * nf]);
            col.sort_unstable_by(|x, y| y.total_cmp(x));
            best = best.min(self.s[c] + col[..k].iter().sum::<f64>());
        }
        best
    }

    /// Dual objective at `λ` with the best `μ, ν` for it (scaled units).
    fn certified_objective(&self, lambda: &[f64]) -> f64 {
        let nf = self.nf;
        let mut load = vec![0.0; nf];
        let mut base = 0.0;
        for (c, &l) in lambda.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            base += l * self.s[c];
            for i in 0..nf {
                load[i] += l * self.a[c * nf + i];
            }
        }
        load.sort_unstable_by(|x, y| y.total_cmp(x));
        base + load[..self.pick as usize].iter().sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(rows: &[&[f64]], base: &[f64], pick: usize) -> f64 {
        // integral optimum over all subsets, a lower bound on the relaxation
        let nf = rows.len();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..(1 << nf) {
            if mask.count_ones() as usize != pick {
                continue;
            }
            let w: Vec<f64> = (0..nf).map(|i| ((mask >> i) & 1) as f64).collect();
            best = best.max(evaluate(rows, base, &w));
        }
        best
    }

    #[test]
    fn two_columns_closed_form() {
        // max min(w1, w2) with w1 + w2 = 1 -> 0.5 at w = (0.5, 0.5)
        let r1 = [1.0, 0.0];
        let r2 = [0.0, 1.0];
        let sol = solve_max_min(&[&r1, &r2], &[0.0, 0.0], 1).unwrap();
        assert!((sol.bound - 0.5).abs() < 1e-12);
        assert!((sol.primal_value - 0.5).abs() < 1e-12);
        assert!((sol.weights[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fully_determined_cases() {
        let r1 = [1.0, 2.0];
        let r2 = [3.0, 0.5];
        let s = [0.1, 0.2];
        let none = solve_max_min(&[&r1, &r2], &s, 0).unwrap();
        assert_eq!(none.bound, 0.1);
        let all = solve_max_min(&[&r1, &r2], &s, 2).unwrap();
        assert!((all.bound - 2.7).abs() < 1e-15);
        assert_eq!(all.weights, vec![1.0, 1.0]);
    }

    #[test]
    fn bound_dominates_integral_optimum() {
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| {
                (0..12)
                    .map(|c| (((i * 7 + c * 3) % 11) as f64) / 10.0)
                    .collect()
            })
            .collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let base: Vec<f64> = (0..12).map(|c| (c % 3) as f64 * 0.05).collect();
        for pick in 1..7 {
            let sol = solve_max_min(&refs, &base, pick).unwrap();
            let ip = brute_force(&refs, &base, pick);
            assert!(sol.bound >= ip - 1e-12, "pick {pick}: {} < {ip}", sol.bound);
            assert!(sol.relative_gap() <= 1e-9);
            let sum: f64 = sol.weights.iter().sum();
            assert!((sum - pick as f64).abs() <= 1e-8);
        }
    }

    #[test]
    fn all_zero_data() {
        let r = [0.0, 0.0];
        let sol = solve_max_min(&[&r, &r, &r], &[0.0, 0.0], 2).unwrap();
        assert_eq!(sol.bound, 0.0);
        assert_eq!(sol.weights.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn rejects_bad_input() {
        let r = [1.0];
        assert!(matches!(
            solve_max_min(&[&r], &[0.0], 2),
            Err(Error::Infeasible { .. })
        ));
        assert_eq!(solve_max_min(&[&r], &[], 1), Err(Error::EmptyPairSet));
    }
}
