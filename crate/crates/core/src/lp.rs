//! Dense revised simplex for `min c'x  s.t.  Ax = b, x >= 0` with sparse
//! columns.
//!
//! Two phases with one artificial per row. The basis inverse is kept
//! explicitly and refactorized periodically. Pricing is Dantzig's rule,
//! falling back to Bland's rule during long runs of degenerate pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STREAK: usize = 32;

#[derive(Clone, Debug, Default)]
pub struct SparseColumn {
    pub entries: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub rows: usize,
    pub columns: Vec<SparseColumn>,
    pub cost: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Row duals `y` with `c_j - y'A_j >= 0` for every column.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    Simplex::new(lp)?.run()
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    ncols: usize,
    /// +1 or -1 per row so the working right-hand side is nonnegative.
    sign: Vec<f64>,
    b: Vec<f64>,
    /// Basic variable per row; indices >= ncols are artificials.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<f64>>,
    xb: Vec<f64>,
    iterations: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Result<Self> {
        let m = lp.rows;
        let ncols = lp.columns.len();
        if lp.cost.len() != ncols || lp.rhs.len() != m {
            return Err(Error::InvalidParameter(
                "linear program dimensions disagree".into(),
            ));
        }
        if lp
            .columns
            .iter()
            .any(|c| c.entries.iter().any(|&(r, _)| r >= m))
        {
            return Err(Error::InvalidParameter(
                "column entry outside the row range".into(),
            ));
        }
        let sign: Vec<f64> = lp
            .rhs
            .iter()
            .map(|&r| if r < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let b: Vec<f64> = lp.rhs.iter().zip(&sign).map(|(r, s)| r * s).collect();
        let mut binv = vec![vec![0.0; m]; m];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Ok(Self {
            lp,
            m,
            ncols,
            basis: (ncols..ncols + m).collect(),
            in_basis: vec![false; ncols + m],
            xb: b.clone(),
            b,
            sign,
            binv,
            iterations: 0,
        }
        .mark_basis())
    }

    fn mark_basis(mut self) -> Self {
        for &j in &self.basis {
            self.in_basis[j] = true;
        }
        self
    }

    /// Working (sign-normalized) column `j` as sparse entries.
    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j >= self.ncols {
            vec![(j - self.ncols, 1.0)]
        } else {
            self.lp.columns[j]
                .entries
                .iter()
                .map(|&(r, v)| (r, v * self.sign[r]))
                .collect()
        }
    }

    fn ftran(&self, col: &[(usize, f64)]) -> Vec<f64> {
        let mut w = vec![0.0; self.m];
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = col.iter().map(|&(r, v)| self.binv[k][r] * v).sum();
        }
        w
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for (k, &j) in self.basis.iter().enumerate() {
            let c = cost(j);
            if c != 0.0 {
                for (r, yr) in y.iter_mut().enumerate() {
                    *yr += c * self.binv[k][r];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: &dyn Fn(usize) -> f64) -> f64 {
        cost(j) - self.column(j).iter().map(|&(r, v)| y[r] * v).sum::<f64>()
    }

    fn pivot(&mut self, p: usize, entering: usize, w: &[f64]) {
        let wp = w[p];
        let theta = self.xb[p] / wp;
        for k in 0..self.m {
            if k != p {
                self.xb[k] -= theta * w[k];
                if self.xb[k] < 0.0 && self.xb[k] > -1e-12 {
                    self.xb[k] = 0.0;
                }
            }
        }
        self.xb[p] = theta;
        let prow: Vec<f64> = self.binv[p].iter().map(|v| v / wp).collect();
        for k in 0..self.m {
            if k != p && w[k] != 0.0 {
                let f = w[k];
                for (x, pr) in self.binv[k].iter_mut().zip(&prow) {
                    *x -= f * pr;
                }
            }
        }
        self.binv[p] = prow;
        self.in_basis[self.basis[p]] = false;
        self.in_basis[entering] = true;
        self.basis[p] = entering;
        self.iterations += 1;
        if self.iterations % REFACTOR_EVERY == 0 {
            self.refactor();
        }
    }

    /// Recomputes the basis inverse by Gauss-Jordan elimination.
    fn refactor(&mut self) {
        let m = self.m;
        let mut a = vec![vec![0.0; 2 * m]; m];
        for (k, &j) in self.basis.iter().enumerate() {
            for (r, v) in self.column(j) {
                a[r][k] = v;
            }
        }
        for (r, row) in a.iter_mut().enumerate() {
            row[m + r] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())
                .unwrap();
            if a[p][c].abs() < 1e-14 {
                // singular in floating point; keep the product-form inverse
                return;
            }
            a.swap(c, p);
            let piv = a[c][c];
            a[c].iter_mut().for_each(|x| *x /= piv);
            let prow = a[c].clone();
            for (r, row) in a.iter_mut().enumerate() {
                if r != c && row[c] != 0.0 {
                    let f = row[c];
                    row.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
                }
            }
        }
        // a = [I | B^-1], row k of B^-1 belongs to basis position k
        self.binv = a.into_iter().map(|row| row[m..].to_vec()).collect();
        self.xb = self
            .binv
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.b)
                    .map(|(x, b)| x * b)
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect();
    }

    fn iterate(&mut self, cost: &dyn Fn(usize) -> f64, allow_artificial: bool) -> Result<()> {
        let cap = 200 * (self.m + self.ncols) + 10_000;
        let mut degenerate = 0usize;
        loop {
            if self.iterations > cap {
                return Err(Error::IterationLimit {
                    iterations: self.iterations,
                });
            }
            let y = self.duals(cost);
            let limit = if allow_artificial {
                self.ncols + self.m
            } else {
                self.ncols
            };
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = -OPT_TOL;
            for j in 0..limit {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y, cost);
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else { return Ok(()) };
            let w = self.ftran(&self.column(q));
            // ratio test, ties broken by smallest basic variable index
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..self.m {
                if w[k] > PIVOT_TOL {
                    let ratio = self.xb[k] / w[k];
                    let better = match leave {
                        None => true,
                        Some((l, r)) => {
                            ratio < r - 1e-15
                                || (ratio <= r + 1e-15 && self.basis[k] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((k, ratio));
                    }
                }
            }
            let Some((p, ratio)) = leave else {
                return Err(Error::Unbounded);
            };
            degenerate = if ratio <= 1e-15 { degenerate + 1 } else { 0 };
            self.pivot(p, q, &w);
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        let ncols = self.ncols;
        // phase 1: minimize the sum of artificials
        let phase1 = move |j: usize| if j >= ncols { 1.0 } else { 0.0 };
        self.iterate(&phase1, true)?;
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&j, _)| j >= ncols)
            .map(|(_, x)| x)
            .sum();
        let scale = 1f64.max(self.b.iter().fold(0.0, |a, x| a.max(*x)));
        if infeas > 1e-9 * scale {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out where a structural column can replace them
        for p in 0..self.m {
            if self.basis[p] < ncols {
                continue;
            }
            let candidate = (0..ncols).filter(|&j| !self.in_basis[j]).find_map(|j| {
                let w = self.ftran(&self.column(j));
                (w[p].abs() > 1e-7).then_some((j, w))
            });
            if let Some((j, w)) = candidate {
                self.pivot(p, j, &w);
            }
        }
        let lp = self.lp;
        let phase2 = move |j: usize| if j >= ncols { 0.0 } else { lp.cost[j] };
        self.iterate(&phase2, false)?;
        self.refactor();

        let mut x = vec![0.0; ncols];
        for (k, &j) in self.basis.iter().enumerate() {
            if j < ncols {
                x[j] = self.xb[k];
            }
        }
        let y = self.duals(&phase2);
        let duals = y.iter().zip(&self.sign).map(|(y, s)| y * s).collect();
        let objective = x.iter().zip(&lp.cost).map(|(x, c)| x * c).sum();
        Ok(LpSolution {
            x,
            duals,
            objective,
            iterations: self.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]], cost: &[f64], rhs: &[f64]) -> LinearProgram {
        let ncols = cost.len();
        let columns = (0..ncols)
            .map(|j| SparseColumn {
                entries: rows
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r[j] != 0.0)
                    .map(|(i, r)| (i, r[j]))
                    .collect(),
            })
            .collect();
        LinearProgram {
            rows: rows.len(),
            columns,
            cost: cost.to_vec(),
            rhs: rhs.to_vec(),
        }
    }

    #[test]
    fn small_standard_form() {
        // min -x1 - 2 x2 s.t. x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6
        // optimum at (3, 1): objective -5
        let lp = dense(
            &[&[1.0, 1.0, 1.0, 0.0], &[1.0, 3.0, 0.0, 1.0]],
            &[-1.0, -2.0, 0.0, 0.0],
            &[4.0, 6.0],
        );
        let sol = solve(&lp).unwrap();
        assert!((sol.objective + 5.0).abs() < 1e-12);
        assert!((sol.x[0] - 3.0).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
        // strong duality: b'y = c'x
        let by: f64 = sol.duals.iter().zip(&lp.rhs).map(|(y, b)| y * b).sum();
        assert!((by - sol.objective).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_and_duals() {
        // min x1 + x2 s.t. -x1 + x2 = -1 -> x1 = 1, x2 = 0
        let lp = dense(&[&[-1.0, 1.0]], &[1.0, 1.0], &[-1.0]);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
        for j in 0..2 {
            let rc = lp.cost[j]
                - lp.columns[j]
                    .entries
                    .iter()
                    .map(|&(r, v)| sol.duals[r] * v)
                    .sum::<f64>();
            assert!(rc > -1e-12);
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x1 = -1 with x1 >= 0
        let lp = dense(&[&[1.0]], &[1.0], &[-1.0]);
        assert!(matches!(solve(&lp), Err(Error::Infeasible)));
        // min -x1 s.t. x1 - x2 = 0
        let lp = dense(&[&[1.0, -1.0]], &[-1.0, 0.0], &[0.0]);
        assert!(matches!(solve(&lp), Err(Error::Unbounded)));
    }

    #[test]
    fn redundant_rows() {
        // second row duplicates the first
        let lp = dense(&[&[1.0, 1.0], &[1.0, 1.0]], &[1.0, 2.0], &[1.0, 1.0]);
        let sol = solve(&lp).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }
}
