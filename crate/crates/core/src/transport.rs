//! Transportation simplex on a dense cost matrix.
//!
//! The basis is kept as a spanning tree of the bipartite row/column graph
//! with `n + m - 1` cells. Initialization is the north-west corner rule on
//! supplies perturbed by `PERTURBATION * i`, entering and leaving cells are
//! chosen by Bland's rule, and once optimal the flows are recomputed on the
//! final tree from the unperturbed marginals.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub const PERTURBATION: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub rows: usize,
    pub cols: usize,
    /// Dense row-major flows.
    pub flows: Vec<f64>,
    /// Basic cells `(row, col)`.
    pub basis: Vec<(usize, usize)>,
    /// Row and column potentials with `u_i + v_j = c_ij` on basic cells
    /// and `u_i + v_j <= c_ij` (up to tolerance) elsewhere.
    pub row_potential: Vec<f64>,
    pub col_potential: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
}

impl TransportSolution {
    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flows[i * self.cols + j]
    }
}

/// Solves `min sum c_ij x_ij` subject to row sums `supply`, column sums
/// `demand`, `x >= 0`. Totals must agree to within `1e-9`.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<TransportSolution> {
    let n = supply.len();
    let m = demand.len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter("empty marginal".into()));
    }
    if cost.len() != n * m {
        return Err(Error::InvalidParameter(format!(
            "cost matrix has {} entries, expected {}",
            cost.len(),
            n * m
        )));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "unbalanced marginals: {total_s} vs {total_d}"
        )));
    }

    let mut s: Vec<f64> = supply
        .iter()
        .enumerate()
        .map(|(i, &a)| a + PERTURBATION * (i + 1) as f64)
        .collect();
    let mut d = demand.to_vec();
    d[m - 1] += s.iter().sum::<f64>() - total_d;

    let mut tree = Tree::new(n, m);
    // north-west corner
    let (mut i, mut j) = (0, 0);
    let mut flows = vec![0.0; n * m];
    loop {
        let x = s[i].min(d[j]);
        flows[i * m + j] = x;
        s[i] -= x;
        d[j] -= x;
        tree.add(i, j);
        if i == n - 1 && j == m - 1 {
            break;
        }
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || s[i] <= d[j] {
            i += 1;
        } else {
            j += 1;
        }
    }

    let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let tol = 1e-12 * cmax.max(1.0);
    let cap = 50 * (n + m) * (n + m) + 1000;
    let mut iterations = 0;
    let (mut u, mut v) = tree.potentials(cost);

    loop {
        // Bland: lowest-index improving cell
        let entering = (0..n * m).find(|&k| {
            let (r, c) = (k / m, k % m);
            !tree.is_basic(r, c) && cost[k] - u[r] - v[c] < -tol
        });
        let Some(k) = entering else { break };
        iterations += 1;
        if iterations > cap {
            return Err(Error::IterationLimit { iterations });
        }
        let (er, ec) = (k / m, k % m);
        let cycle = tree.path(ec, er);
        // cycle[0] touches column ec and is a donor; signs alternate
        let mut theta = f64::INFINITY;
        let mut leaving: Option<(usize, usize)> = None;
        for (pos, &(r, c)) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                let x = flows[r * m + c];
                let better = match leaving {
                    None => true,
                    Some((lr, lc)) => x < theta || (x == theta && r * m + c < lr * m + lc),
                };
                if better {
                    theta = x;
                    leaving = Some((r, c));
                }
            }
        }
        let (lr, lc) = leaving.expect("cycle has a donor cell");
        for (pos, &(r, c)) in cycle.iter().enumerate() {
            if pos % 2 == 0 {
                flows[r * m + c] -= theta;
            } else {
                flows[r * m + c] += theta;
            }
        }
        flows[k] = theta;
        flows[lr * m + lc] = 0.0;
        tree.remove(lr, lc);
        tree.add(er, ec);
        (u, v) = tree.potentials(cost);
    }

    let flows = tree.flows_for(supply, demand);
    let cost_value = tree
        .cells()
        .map(|(r, c)| flows[r * m + c] * cost[r * m + c])
        .sum();
    Ok(TransportSolution {
        rows: n,
        cols: m,
        flows,
        basis: tree.cells().collect(),
        row_potential: u,
        col_potential: v,
        cost: cost_value,
        iterations,
    })
}

/// Spanning tree over `n` row nodes and `m` column nodes (column `j` is
/// node `n + j`).
struct Tree {
    n: usize,
    m: usize,
    basic: Vec<bool>,
    adj: Vec<Vec<usize>>,
}

impl Tree {
    fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            basic: vec![false; n * m],
            adj: vec![Vec::new(); n + m],
        }
    }

    fn is_basic(&self, r: usize, c: usize) -> bool {
        self.basic[r * self.m + c]
    }

    fn add(&mut self, r: usize, c: usize) {
        debug_assert!(!self.is_basic(r, c));
        self.basic[r * self.m + c] = true;
        self.adj[r].push(self.n + c);
        self.adj[self.n + c].push(r);
    }

    fn remove(&mut self, r: usize, c: usize) {
        self.basic[r * self.m + c] = false;
        let cn = self.n + c;
        self.adj[r].retain(|&x| x != cn);
        self.adj[cn].retain(|&x| x != r);
    }

    fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n * self.m)
            .filter(|&k| self.basic[k])
            .map(|k| (k / self.m, k % self.m))
    }

    fn cell(&self, a: usize, b: usize) -> (usize, usize) {
        if a < self.n {
            (a, b - self.n)
        } else {
            (b, a - self.n)
        }
    }

    fn potentials(&self, cost: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pot = vec![f64::NAN; self.n + self.m];
        let mut queue = VecDeque::new();
        pot[0] = 0.0;
        queue.push_back(0);
        while let Some(a) = queue.pop_front() {
            for &b in &self.adj[a] {
                if pot[b].is_nan() {
                    let (r, c) = self.cell(a, b);
                    pot[b] = cost[r * self.m + c] - pot[a];
                    queue.push_back(b);
                }
            }
        }
        let v = pot.split_off(self.n);
        (pot, v)
    }

    /// Cells on the tree path from column `col` to row `row`, starting at
    /// the column end.
    fn path(&self, col: usize, row: usize) -> Vec<(usize, usize)> {
        let start = self.n + col;
        let mut parent = vec![usize::MAX; self.n + self.m];
        parent[start] = start;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            if a == row {
                break;
            }
            for &b in &self.adj[a] {
                if parent[b] == usize::MAX {
                    parent[b] = a;
                    queue.push_back(b);
                }
            }
        }
        let mut out = Vec::new();
        let mut node = row;
        while node != start {
            let p = parent[node];
            out.push(self.cell(p, node));
            node = p;
        }
        out.reverse();
        out
    }

    /// Basic flows for the given marginals by peeling leaves of the tree.
    fn flows_for(&self, supply: &[f64], demand: &[f64]) -> Vec<f64> {
        let (n, m) = (self.n, self.m);
        let mut rem: Vec<f64> = supply.iter().chain(demand).copied().collect();
        let mut degree: Vec<usize> = self.adj.iter().map(Vec::len).collect();
        let mut removed = vec![false; n + m];
        let mut flows = vec![0.0; n * m];
        let mut leaves: VecDeque<usize> = (0..n + m).filter(|&a| degree[a] == 1).collect();
        while let Some(a) = leaves.pop_front() {
            if removed[a] || degree[a] != 1 {
                continue;
            }
            let b = *self.adj[a].iter().find(|&&b| !removed[b]).unwrap();
            let (r, c) = self.cell(a, b);
            let x = rem[a];
            flows[r * m + c] = x;
            rem[b] -= x;
            removed[a] = true;
            degree[b] -= 1;
            if degree[b] == 1 {
                leaves.push_back(b);
            }
        }
        for x in &mut flows {
            if *x < 0.0 && *x > -1e-9 {
                *x = 0.0;
            }
        }
        flows
    }
}
