//! Brute-force reference for tiny transportation problems.
//!
//! Enumerates every set of `n + m - 1` cells, solves the marginal equations
//! restricted to it, and keeps the cheapest nonnegative solution. Every
//! vertex of the transportation polytope arises this way.

use crate::error::{Error, Result};

/// Largest `n * m` accepted; `C(16, 7) = 11440` cell sets.
pub const MAX_CELLS: usize = 16;

/// Optimal cost of the transportation problem by vertex enumeration.
pub fn transport_vertex_min(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<f64> {
    let (n, m) = (supply.len(), demand.len());
    if n == 0 || m == 0 || cost.len() != n * m {
        return Err(Error::InvalidParameter("bad transportation shape".into()));
    }
    if n * m > MAX_CELLS {
        return Err(Error::InvalidParameter(format!(
            "{n}x{m} is too large for enumeration"
        )));
    }
    let k = n + m - 1;
    let cells = n * m;
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..k.min(cells)).collect();
    if k > cells {
        return Err(Error::InvalidParameter("degenerate shape".into()));
    }
    loop {
        if let Some(x) = solve_restricted(supply, demand, m, &subset) {
            let c: f64 = subset
                .iter()
                .zip(&x)
                .map(|(&cell, xi)| cost[cell] * xi)
                .sum();
            best = best.min(c);
        }
        let Some(i) = (0..k).rev().find(|&i| subset[i] < cells - k + i) else {
            break;
        };
        subset[i] += 1;
        for j in (i + 1)..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::Infeasible)
    }
}

/// Unique nonnegative solution of the marginal equations on `cells`, if any.
fn solve_restricted(supply: &[f64], demand: &[f64], m: usize, cells: &[usize]) -> Option<Vec<f64>> {
    let n = supply.len();
    let rows = n + m;
    let k = cells.len();
    // augmented matrix [A | b]
    let mut a = vec![vec![0.0; k + 1]; rows];
    for (col, &cell) in cells.iter().enumerate() {
        a[cell / m][col] = 1.0;
        a[n + cell % m][col] = 1.0;
    }
    for i in 0..n {
        a[i][k] = supply[i];
    }
    for j in 0..m {
        a[n + j][k] = demand[j];
    }
    let mut r = 0;
    for c in 0..k {
        let p = (r..rows).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(r, p);
        let piv = a[r][c];
        a[r].iter_mut().for_each(|x| *x /= piv);
        let prow = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let f = row[c];
                row.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
            }
        }
        r += 1;
    }
    // leftover rows must be consistent
    if a[r..].iter().any(|row| row[k].abs() > 1e-12) {
        return None;
    }
    let x: Vec<f64> = (0..k).map(|c| a[c][k]).collect();
    if x.iter().any(|&v| v < -1e-14) {
        return None;
    }
    Some(x.into_iter().map(|v| v.max(0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_known_optimum() {
        // |i - (2 - j)| with uniform-ish marginals; optimum 0.5
        let cost: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i as f64 - (2 - j) as f64).abs()))
            .collect();
        let v = transport_vertex_min(&[0.25, 0.25, 0.5], &[0.25, 0.25, 0.5], &cost).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_cell_and_rejections() {
        assert_eq!(transport_vertex_min(&[1.0], &[1.0], &[2.5]).unwrap(), 2.5);
        assert!(transport_vertex_min(&[1.0; 5], &[1.0; 5], &[0.0; 25]).is_err());
    }
}
