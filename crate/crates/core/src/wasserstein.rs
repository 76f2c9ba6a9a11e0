//! Wasserstein-1 distance between finitely supported measures.
//!
//! Three independent routes: the transportation simplex on the coupling
//! polytope, the Kantorovich dual as a linear program over potentials on
//! the union support, and the CDF integral on the real line.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipschitz::Table;
use crate::lp::{self, LinearProgram, SparseColumn};
use crate::measure::DiscreteMeasure;
use crate::space::{Ball, MetricSpace, Point};
use crate::transport;

/// A transport plan between the atoms of two measures.
#[derive(Clone, Debug, Serialize)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    /// Row-major `rows x cols` matrix.
    matrix: Vec<f64>,
}

impl Coupling {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.cols + j]
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// Largest marginal defect against `p` (rows) and `q` (columns), or
    /// `+inf` on a shape mismatch or a negative entry.
    pub fn marginal_error(&self, p: &DiscreteMeasure, q: &DiscreteMeasure) -> f64 {
        if p.len() != self.rows || q.len() != self.cols || self.matrix.iter().any(|&x| x < 0.0) {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for (i, w) in p.weights().iter().enumerate() {
            let s: f64 = (0..self.cols).map(|j| self.get(i, j)).sum();
            err = err.max((s - w).abs());
        }
        for (j, w) in q.weights().iter().enumerate() {
            let s: f64 = (0..self.rows).map(|i| self.get(i, j)).sum();
            err = err.max((s - w).abs());
        }
        err
    }
}

#[derive(Clone, Debug)]
pub struct TransportResult {
    pub value: f64,
    pub coupling: Coupling,
    /// 1-Lipschitz potential on the union support attaining the dual.
    pub dual_potential: Table,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `primal_value - dual_value`.
    pub gap: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct DualResult {
    pub value: f64,
    pub potential: Table,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Primal,
    Dual,
    #[serde(rename = "1d")]
    OneD,
    /// Closed form against a Dirac, the CDF route on the real line, the
    /// primal simplex otherwise.
    #[default]
    Auto,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(Method::Primal),
            "dual" => Ok(Method::Dual),
            "1d" => Ok(Method::OneD),
            "auto" => Ok(Method::Auto),
            _ => Err(Error::InvalidParameter(format!("unknown method {s:?}"))),
        }
    }
}

fn same_space(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<()> {
    if p.same_space(q) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// Union of the supports (atoms of `p` first) with signed masses `p - q`.
pub(crate) fn union_support(p: &DiscreteMeasure, q: &DiscreteMeasure) -> (Vec<Point>, Vec<f64>) {
    let mut points: Vec<Point> = p.support().to_vec();
    let mut signed: Vec<f64> = p.weights().to_vec();
    let mut index: HashMap<_, usize> = points
        .iter()
        .enumerate()
        .map(|(i, x)| (x.key(), i))
        .collect();
    for (x, w) in q.atoms() {
        match index.get(&x.key()) {
            Some(&i) => signed[i] -= w,
            None => {
                index.insert(x.key(), points.len());
                points.push(x.clone());
                signed.push(-w);
            }
        }
    }
    (points, signed)
}

/// Optimal coupling by the transportation simplex, with the dual potential
/// `h(x) = min_j (d(x, t_j) - v_j)` built from the column potentials.
pub fn w1_primal(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<TransportResult> {
    same_space(p, q)?;
    let space = p.space();
    let (n, m) = (p.len(), q.len());
    let mut cost = Vec::with_capacity(n * m);
    for s in p.support() {
        for t in q.support() {
            cost.push(space.distance_unchecked(s, t));
        }
    }
    let sol = transport::solve(p.weights(), q.weights(), &cost)?;
    let coupling = Coupling {
        rows: n,
        cols: m,
        matrix: sol.flows,
    };

    let (points, signed) = union_support(p, q);
    let values: Vec<f64> = points
        .iter()
        .map(|x| {
            q.support()
                .iter()
                .zip(&sol.col_potential)
                .map(|(t, v)| space.distance_unchecked(x, t) - v)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let dual_value: f64 = values.iter().zip(&signed).map(|(h, c)| h * c).sum();
    let dual_potential = Table::unverified(points, values)?;
    let primal_value = sol.cost;
    Ok(TransportResult {
        value: primal_value,
        coupling,
        dual_potential,
        primal_value,
        dual_value,
        gap: primal_value - dual_value,
        iterations: sol.iterations,
    })
}

/// Maximizes `sum_k f(u_k) (P - Q)(u_k)` over `f` with
/// `|f(u_k) - f(u_l)| <= d(u_k, u_l)` on the union support.
///
/// Solved through its LP dual, a transshipment problem on the complete
/// graph of the union support: the node potentials of the optimal basis
/// are the optimal `f`, pinned by `f(u_0) = 0`.
pub fn w1_dual(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<DualResult> {
    same_space(p, q)?;
    let space = p.space();
    let (points, signed) = union_support(p, q);
    let k = points.len();
    if k == 1 || signed.iter().all(|&c| c == 0.0) {
        return Ok(DualResult {
            value: 0.0,
            potential: Table::unverified(points, vec![0.0; k])?,
            iterations: 0,
        });
    }
    // row r <-> node r + 1
    let mut columns = Vec::with_capacity(k * (k - 1));
    let mut cost = Vec::with_capacity(k * (k - 1));
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let mut entries = Vec::with_capacity(2);
            if a > 0 {
                entries.push((a - 1, 1.0));
            }
            if b > 0 {
                entries.push((b - 1, -1.0));
            }
            columns.push(SparseColumn { entries });
            cost.push(space.distance_unchecked(&points[a], &points[b]));
        }
    }
    let program = LinearProgram {
        rows: k - 1,
        columns,
        cost,
        rhs: signed[1..].to_vec(),
    };
    let sol = lp::solve(&program)?;
    let mut values = Vec::with_capacity(k);
    values.push(0.0);
    values.extend(sol.duals);
    let value: f64 = values.iter().zip(&signed).map(|(f, c)| f * c).sum();
    Ok(DualResult {
        value,
        potential: Table::unverified(points, values)?,
        iterations: sol.iterations,
    })
}

/// `integral |F_P - F_Q| dx` over the merged jump grid.
pub fn w1_1d(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    same_space(p, q)?;
    let fp = p.cdf()?;
    let fq = q.cdf()?;
    let mut grid: Vec<f64> = fp.jumps().iter().chain(fq.jumps()).copied().collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    Ok(grid
        .windows(2)
        .map(|w| (fp.eval(w[0]) - fq.eval(w[0])).abs() * (w[1] - w[0]))
        .sum())
}

/// `W(P, delta_a)`, which is the first moment of `P` about `a`.
pub fn w1_to_dirac(p: &DiscreteMeasure, a: &Point) -> Result<f64> {
    p.first_moment(a)
}

pub fn w1(p: &DiscreteMeasure, q: &DiscreteMeasure, method: Method) -> Result<f64> {
    same_space(p, q)?;
    match method {
        Method::Primal => Ok(w1_primal(p, q)?.value),
        Method::Dual => Ok(w1_dual(p, q)?.value),
        Method::OneD => w1_1d(p, q),
        Method::Auto => {
            if q.is_dirac() {
                w1_to_dirac(p, &q.support()[0])
            } else if p.is_dirac() {
                w1_to_dirac(q, &p.support()[0])
            } else if matches!(**p.space(), MetricSpace::RealLine) {
                w1_1d(p, q)
            } else {
                Ok(w1_primal(p, q)?.value)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiracEscape {
    /// `P(B(a, M)) < eps / M`
    pub premise: bool,
    /// `W(P, delta_a) > M - eps`
    pub bound_holds: bool,
    pub mass_in_ball: f64,
    pub distance: f64,
}

impl DiracEscape {
    /// The implication `premise => bound_holds`.
    pub fn consistent(&self) -> bool {
        !self.premise || self.bound_holds
    }
}

pub fn check_dirac_escape(p: &DiscreteMeasure, a: &Point, m: f64, eps: f64) -> Result<DiracEscape> {
    if !(m > 0.0 && m.is_finite() && eps > 0.0 && eps <= m) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps <= M, got M = {m}, eps = {eps}"
        )));
    }
    let mass = p.mass_in_ball(&Ball::open(a.clone(), m)?)?;
    let distance = w1_to_dirac(p, a)?;
    Ok(DiracEscape {
        premise: mass < eps / m,
        bound_holds: distance > m - eps,
        mass_in_ball: mass,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lipschitz::{verify_1lipschitz, LipschitzFn, LIPSCHITZ_TOL};

    fn line() -> Arc<MetricSpace> {
        Arc::new(MetricSpace::RealLine)
    }

    fn m(space: &Arc<MetricSpace>, points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(
            space.clone(),
            points.iter().map(|&x| Point::Real(x)).collect(),
            weights.to_vec(),
            false,
        )
        .unwrap()
    }

    #[test]
    fn diracs() {
        let s = line();
        let p = DiscreteMeasure::dirac(s.clone(), 1.0.into()).unwrap();
        let q = DiscreteMeasure::dirac(s.clone(), 4.0.into()).unwrap();
        let r = w1_primal(&p, &q).unwrap();
        assert_eq!(r.value, 3.0);
        assert_eq!(r.coupling.get(0, 0), 1.0);
        assert!(r.gap.abs() < 1e-12);
        assert!((w1_dual(&p, &q).unwrap().value - 3.0).abs() < 1e-12);
        assert_eq!(w1_1d(&p, &q).unwrap(), 3.0);
        assert_eq!(w1(&p, &q, Method::Auto).unwrap(), 3.0);
    }

    #[test]
    fn identical_measures() {
        let s = line();
        let p = m(&s, &[0.0, 1.0, 5.0], &[0.2, 0.3, 0.5]);
        let r = w1_primal(&p, &p).unwrap();
        assert!(r.value.abs() < 1e-12);
        for i in 0..3 {
            assert!((r.coupling.get(i, i) - p.weights()[i]).abs() < 1e-12);
        }
        let d = w1_dual(&p, &p).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(d.potential.values().iter().all(|&v| v == 0.0));
        assert_eq!(w1_1d(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn two_point_versus_dirac() {
        let s = line();
        let p = m(&s, &[0.0, 1.0], &[0.5, 0.5]);
        let q = DiscreteMeasure::dirac(s.clone(), 0.0.into()).unwrap();
        for method in [Method::Primal, Method::Dual, Method::OneD, Method::Auto] {
            assert!(
                (w1(&p, &q, method).unwrap() - 0.5).abs() < 1e-12,
                "{method:?}"
            );
        }
    }

    #[test]
    fn potentials_are_lipschitz_and_attain() {
        let s = line();
        let p = m(&s, &[0.0, 2.0, 3.0, 7.0], &[0.1, 0.4, 0.3, 0.2]);
        let q = m(&s, &[1.0, 3.0, 6.0], &[0.5, 0.25, 0.25]);
        let primal = w1_primal(&p, &q).unwrap();
        let dual = w1_dual(&p, &q).unwrap();
        let oned = w1_1d(&p, &q).unwrap();
        assert!((primal.value - oned).abs() < 1e-12);
        assert!((dual.value - oned).abs() < 1e-12);
        assert!(primal.gap.abs() < 1e-12);
        assert!(primal.coupling.marginal_error(&p, &q) < 1e-12);
        for table in [primal.dual_potential, dual.potential] {
            let dom = table.domain().to_vec();
            let f = LipschitzFn::Tabulated(table);
            assert!(verify_1lipschitz(&f, &s, &dom, LIPSCHITZ_TOL)
                .unwrap()
                .is_ok());
        }
    }

    #[test]
    fn finite_space_routes_agree() {
        let s = Arc::new(
            MetricSpace::finite_checked(vec![
                vec![0.0, 1.0, 2.0, 2.0],
                vec![1.0, 0.0, 1.0, 2.0],
                vec![2.0, 1.0, 0.0, 1.0],
                vec![2.0, 2.0, 1.0, 0.0],
            ])
            .unwrap(),
        );
        let p = DiscreteMeasure::new(
            s.clone(),
            vec![Point::Index(0), Point::Index(1)],
            vec![0.5, 0.5],
            false,
        )
        .unwrap();
        let q = DiscreteMeasure::new(
            s.clone(),
            vec![Point::Index(2), Point::Index(3)],
            vec![0.5, 0.5],
            false,
        )
        .unwrap();
        let a = w1_primal(&p, &q).unwrap().value;
        let b = w1_dual(&p, &q).unwrap().value;
        // 0 -> 3 and 1 -> 2
        assert!((a - 1.5).abs() < 1e-12, "{a}");
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mismatched_spaces() {
        let p = DiscreteMeasure::dirac(line(), 0.0.into()).unwrap();
        let e = Arc::new(MetricSpace::euclidean(1, 2.0).unwrap());
        let q = DiscreteMeasure::dirac(e, Point::Vector(vec![0.0])).unwrap();
        assert!(matches!(w1_primal(&p, &q), Err(Error::SpaceMismatch)));
        assert!(matches!(w1_dual(&p, &q), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn one_dimensional_route_rejects_other_spaces() {
        let e = Arc::new(MetricSpace::euclidean(1, 2.0).unwrap());
        let p = DiscreteMeasure::dirac(e, Point::Vector(vec![0.0])).unwrap();
        assert!(matches!(w1_1d(&p, &p), Err(Error::NotOneDimensional)));
    }

    #[test]
    fn dirac_escape() {
        let s = line();
        let p = DiscreteMeasure::dirac(s.clone(), 2.0.into()).unwrap();
        let e = check_dirac_escape(&p, &0.0.into(), 2.0, 0.5).unwrap();
        assert!(e.premise && e.bound_holds);
        let q = m(&s, &[0.0, 10.0], &[0.5, 0.5]);
        let e = check_dirac_escape(&q, &0.0.into(), 2.0, 0.5).unwrap();
        assert!(!e.premise && e.consistent());
        assert!(check_dirac_escape(&q, &0.0.into(), 2.0, 3.0).is_err());
    }
}
