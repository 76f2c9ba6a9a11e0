//! 1-Lipschitz test functions.
//!
//! Functions are either tabulated on a finite domain or built as expression
//! trees from distance functions with operations that preserve the
//! Lipschitz constant (negation, shifts, pointwise max/min, clamping and
//! truncation). The cutoff `phi_{a,R}` is representable but is not itself
//! 1-Lipschitz; `psi_{a,R} = phi_{a,R} * d(a, .)` is.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{MetricSpace, Point, PointKey};

/// Default relative tolerance for Lipschitz verification.
pub const LIPSCHITZ_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPart {
    /// `(f ^ R) v (-R)`
    Low,
    /// `f - low`
    High,
}

/// Values on a finite set of points.
#[derive(Clone, Debug)]
pub struct Table {
    domain: Vec<Point>,
    values: Vec<f64>,
    certified: bool,
    index: HashMap<PointKey, usize>,
}

impl Table {
    /// A table whose 1-Lipschitz property is checked exhaustively; the
    /// `certified` flag records the outcome.
    pub fn new(
        space: &MetricSpace,
        domain: Vec<Point>,
        values: Vec<f64>,
        tol: f64,
    ) -> Result<Self> {
        let mut t = Self::unverified(domain, values)?;
        for p in &t.domain {
            space.check_point(p)?;
        }
        let f = LipschitzFn::Tabulated(t.clone());
        t.certified = verify_1lipschitz(&f, space, &t.domain, tol)?.is_ok();
        Ok(t)
    }

    /// A table taken at face value, `certified = false`.
    pub fn unverified(domain: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(Error::LengthMismatch {
                points: domain.len(),
                weights: values.len(),
            });
        }
        let mut index = HashMap::with_capacity(domain.len());
        for (i, p) in domain.iter().enumerate() {
            if index.insert(p.key(), i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate domain point {p}"
                )));
            }
        }
        Ok(Self {
            domain,
            values,
            certified: false,
            index,
        })
    }

    pub fn domain(&self) -> &[Point] {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn get(&self, x: &Point) -> Option<f64> {
        self.index.get(&x.key()).map(|&i| self.values[i])
    }
}

#[derive(Clone, Debug)]
pub enum LipschitzFn {
    Tabulated(Table),
    DistanceTo(Point),
    Negate(Box<LipschitzFn>),
    Shift(Box<LipschitzFn>, f64),
    Max(Vec<LipschitzFn>),
    Min(Vec<LipschitzFn>),
    Clamp {
        child: Box<LipschitzFn>,
        lo: f64,
        hi: f64,
    },
    PhiCutoff {
        center: Point,
        radius: f64,
    },
    PsiCutoff {
        center: Point,
        radius: f64,
    },
    Truncation {
        child: Box<LipschitzFn>,
        radius: f64,
        part: TruncationPart,
    },
}

impl LipschitzFn {
    pub fn distance_to(a: Point) -> Self {
        LipschitzFn::DistanceTo(a)
    }

    pub fn negate(self) -> Self {
        LipschitzFn::Negate(Box::new(self))
    }

    pub fn shift(self, c: f64) -> Self {
        LipschitzFn::Shift(Box::new(self), c)
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!(
                "clamp bounds [{lo}, {hi}] are empty"
            )));
        }
        Ok(LipschitzFn::Clamp {
            child: Box::new(self),
            lo,
            hi,
        })
    }

    pub fn evaluate(&self, space: &MetricSpace, x: &Point) -> Result<f64> {
        Ok(match self {
            LipschitzFn::Tabulated(t) => t.get(x).ok_or(Error::OutsideDomain)?,
            LipschitzFn::DistanceTo(a) => space.distance(a, x)?,
            LipschitzFn::Negate(f) => -f.evaluate(space, x)?,
            LipschitzFn::Shift(f, c) => f.evaluate(space, x)? + c,
            LipschitzFn::Max(fs) => {
                let mut best = f64::NEG_INFINITY;
                for f in fs {
                    best = best.max(f.evaluate(space, x)?);
                }
                best
            }
            LipschitzFn::Min(fs) => {
                let mut best = f64::INFINITY;
                for f in fs {
                    best = best.min(f.evaluate(space, x)?);
                }
                best
            }
            LipschitzFn::Clamp { child, lo, hi } => child.evaluate(space, x)?.max(*lo).min(*hi),
            LipschitzFn::PhiCutoff { center, radius } => {
                phi_value(space.distance(center, x)?, *radius)
            }
            LipschitzFn::PsiCutoff { center, radius } => {
                let d = space.distance(center, x)?;
                phi_value(d, *radius) * d
            }
            LipschitzFn::Truncation {
                child,
                radius,
                part,
            } => {
                let v = child.evaluate(space, x)?;
                let low = v.min(*radius).max(-*radius);
                match part {
                    TruncationPart::Low => low,
                    TruncationPart::High => v - low,
                }
            }
        })
    }

    /// Whether the construction alone guarantees membership in the class
    /// of 1-Lipschitz functions. Tabulated leaves count only when
    /// certified, and `PhiCutoff` never does.
    pub fn is_certified_member(&self) -> bool {
        match self {
            LipschitzFn::Tabulated(t) => t.certified,
            LipschitzFn::DistanceTo(_) | LipschitzFn::PsiCutoff { .. } => true,
            LipschitzFn::PhiCutoff { .. } => false,
            LipschitzFn::Negate(f) | LipschitzFn::Shift(f, _) => f.is_certified_member(),
            LipschitzFn::Clamp { child, .. } | LipschitzFn::Truncation { child, .. } => {
                child.is_certified_member()
            }
            LipschitzFn::Max(fs) | LipschitzFn::Min(fs) => {
                fs.iter().all(|f| f.is_certified_member())
            }
        }
    }

    /// McShane extension of a tabulated function: `x -> min_i (f(u_i) + d(u_i, x))`.
    ///
    /// Agrees with the table on its domain when the table is 1-Lipschitz,
    /// and is 1-Lipschitz everywhere as a minimum of shifted distances.
    pub fn min_extension(table: &Table) -> Result<LipschitzFn> {
        if table.domain.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot extend an empty table".into(),
            ));
        }
        Ok(LipschitzFn::Min(
            table
                .domain
                .iter()
                .zip(&table.values)
                .map(|(u, &v)| LipschitzFn::distance_to(u.clone()).shift(v))
                .collect(),
        ))
    }
}

fn phi_value(d: f64, radius: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        (1.0 - radius / d).max(0.0)
    }
}

/// Outcome of an exhaustive pairwise Lipschitz check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LipschitzCheck {
    Ok,
    /// Worst pair; `slack = |f(x_i) - f(x_j)| - d(x_i, x_j)`.
    Violation {
        i: usize,
        j: usize,
        slack: f64,
    },
}

impl LipschitzCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, LipschitzCheck::Ok)
    }
}

/// Checks `|f(x) - f(y)| <= d(x, y)` for every pair of `points`, allowing
/// `tol * max(1, |f(x)|, |f(y)|, d(x, y))` of rounding.
pub fn verify_1lipschitz(
    f: &LipschitzFn,
    space: &MetricSpace,
    points: &[Point],
    tol: f64,
) -> Result<LipschitzCheck> {
    let values: Vec<f64> = points
        .iter()
        .map(|x| f.evaluate(space, x))
        .collect::<Result<_>>()?;
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = space.distance_unchecked(&points[i], &points[j]);
            let diff = (values[i] - values[j]).abs();
            let scale = 1f64.max(d).max(values[i].abs()).max(values[j].abs());
            let slack = diff - d;
            if slack > tol * scale && worst.map_or(true, |w| slack > w.2) {
                worst = Some((i, j, slack));
            }
        }
    }
    Ok(match worst {
        None => LipschitzCheck::Ok,
        Some((i, j, slack)) => LipschitzCheck::Violation { i, j, slack },
    })
}

/// `f - f(a)`, which vanishes at `a` and has the same integral differences.
pub fn normalize_at(f: LipschitzFn, space: &MetricSpace, a: &Point) -> Result<LipschitzFn> {
    let fa = f.evaluate(space, a)?;
    Ok(f.shift(-fa))
}

pub fn pointwise_max(fs: Vec<LipschitzFn>) -> Result<LipschitzFn> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter(
            "pointwise max of an empty family".into(),
        ));
    }
    Ok(LipschitzFn::Max(fs))
}

pub fn pointwise_min(fs: Vec<LipschitzFn>) -> Result<LipschitzFn> {
    if fs.is_empty() {
        return Err(Error::InvalidParameter(
            "pointwise min of an empty family".into(),
        ));
    }
    Ok(LipschitzFn::Min(fs))
}

fn positive_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "cutoff radius {radius} must be positive"
        )))
    }
}

/// `phi_{a,R}(x) = (1 - R / d(a, x))^+`, zero at `a`. Not 1-Lipschitz.
pub fn phi_cutoff(center: Point, radius: f64) -> Result<LipschitzFn> {
    positive_radius(radius)?;
    Ok(LipschitzFn::PhiCutoff { center, radius })
}

/// `psi_{a,R}(x) = phi_{a,R}(x) d(a, x)`, a contraction.
pub fn psi_cutoff(center: Point, radius: f64) -> Result<LipschitzFn> {
    positive_radius(radius)?;
    Ok(LipschitzFn::PsiCutoff { center, radius })
}

/// Checks `(1 - eps) 1[d(a,x) > R/eps] <= phi_{a,R}(x) <= 1[d(a,x) > R]` at `x`.
pub fn phi_sandwich_holds(
    space: &MetricSpace,
    center: &Point,
    radius: f64,
    eps: f64,
    x: &Point,
) -> Result<bool> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps {eps} must lie in (0, 1)"
        )));
    }
    let d = space.distance(center, x)?;
    let phi = phi_value(d, radius);
    let lower = if d > radius / eps { 1.0 - eps } else { 0.0 };
    let upper = if d > radius { 1.0 } else { 0.0 };
    Ok(lower <= phi && phi <= upper)
}

/// Splits `f` (vanishing at `a`) into a part bounded by `R` and a
/// 1-Lipschitz remainder supported outside `B*(a, R)`.
pub fn truncate(
    f: LipschitzFn,
    space: &MetricSpace,
    a: &Point,
    radius: f64,
) -> Result<(LipschitzFn, LipschitzFn)> {
    positive_radius(radius)?;
    let fa = f.evaluate(space, a)?;
    if fa.abs() > 1e-12 {
        return Err(Error::NotNormalized { value: fa });
    }
    let low = LipschitzFn::Truncation {
        child: Box::new(f.clone()),
        radius,
        part: TruncationPart::Low,
    };
    let high = LipschitzFn::Truncation {
        child: Box::new(f),
        radius,
        part: TruncationPart::High,
    };
    Ok((low, high))
}

/// Pointwise audit of the truncation decomposition on a sample.
#[derive(Clone, Debug, Default, Serialize)]
pub struct TruncationReport {
    /// `|f_R| <= R`
    pub bounded: bool,
    /// `g_R` is 1-Lipschitz on the sample and vanishes at `a`
    pub remainder_lipschitz: bool,
    /// `max |f - f_R - g_R|`
    pub decomposition_error: f64,
    /// `|f_R| <= |f|`
    pub dominated: bool,
    /// `g_R = 0` on `B*(a, R)`
    pub vanishes_in_ball: bool,
}

impl TruncationReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.bounded
            && self.remainder_lipschitz
            && self.decomposition_error <= tol
            && self.dominated
            && self.vanishes_in_ball
    }
}

pub fn check_truncation(
    f: &LipschitzFn,
    space: &MetricSpace,
    a: &Point,
    radius: f64,
    points: &[Point],
    tol: f64,
) -> Result<TruncationReport> {
    let (low, high) = truncate(f.clone(), space, a, radius)?;
    let mut report = TruncationReport {
        bounded: true,
        remainder_lipschitz: true,
        decomposition_error: 0.0,
        dominated: true,
        vanishes_in_ball: true,
    };
    for x in points {
        let fx = f.evaluate(space, x)?;
        let lx = low.evaluate(space, x)?;
        let gx = high.evaluate(space, x)?;
        report.bounded &= lx.abs() <= radius;
        report.dominated &= lx.abs() <= fx.abs();
        let scale = 1f64.max(fx.abs());
        report.decomposition_error = report.decomposition_error.max((fx - lx - gx).abs() / scale);
        if space.distance(a, x)? <= radius {
            report.vanishes_in_ball &= gx == 0.0;
        }
    }
    report.remainder_lipschitz =
        high.evaluate(space, a)? == 0.0 && verify_1lipschitz(&high, space, points, tol)?.is_ok();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> MetricSpace {
        MetricSpace::RealLine
    }

    fn pts(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::Real(x)).collect()
    }

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<Point> {
        (0..n)
            .map(|i| Point::Real(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn distance_leaf() {
        let f = LipschitzFn::distance_to(2.0.into());
        assert_eq!(f.evaluate(&line(), &2.0.into()).unwrap(), 0.0);
        assert_eq!(f.evaluate(&line(), &Point::Real(-1.0)).unwrap(), 3.0);
        assert!(
            verify_1lipschitz(&f, &line(), &grid(50, -10.0, 10.0), LIPSCHITZ_TOL)
                .unwrap()
                .is_ok()
        );
    }

    #[test]
    fn phi_values() {
        let phi = phi_cutoff(0.0.into(), 2.0).unwrap();
        assert_eq!(phi.evaluate(&line(), &0.0.into()).unwrap(), 0.0);
        assert_eq!(phi.evaluate(&line(), &1.5.into()).unwrap(), 0.0);
        assert_eq!(phi.evaluate(&line(), &2.0.into()).unwrap(), 0.0);
        assert_eq!(phi.evaluate(&line(), &4.0.into()).unwrap(), 0.5);
        // at d = R / eps the value is exactly 1 - eps
        let eps = 0.25;
        assert_eq!(
            phi.evaluate(&line(), &(2.0 / eps).into()).unwrap(),
            1.0 - eps
        );
        assert!(!phi.is_certified_member());
        assert!(phi_cutoff(0.0.into(), 0.0).is_err());
        assert!(psi_cutoff(0.0.into(), -1.0).is_err());
    }

    #[test]
    fn phi_is_not_a_contraction_for_small_radius() {
        let phi = phi_cutoff(0.0.into(), 0.1).unwrap();
        let check = verify_1lipschitz(&phi, &line(), &pts(&[0.1, 0.2]), LIPSCHITZ_TOL).unwrap();
        assert!(!check.is_ok());
    }

    #[test]
    fn psi_is_a_contraction_and_vanishes_in_ball() {
        let psi = psi_cutoff(1.0.into(), 3.0).unwrap();
        let sample = grid(200, -20.0, 20.0);
        assert!(verify_1lipschitz(&psi, &line(), &sample, LIPSCHITZ_TOL)
            .unwrap()
            .is_ok());
        for x in &sample {
            if line().distance(&1.0.into(), x).unwrap() <= 3.0 {
                assert_eq!(psi.evaluate(&line(), x).unwrap(), 0.0);
            }
        }
        assert!(psi.is_certified_member());
    }

    #[test]
    fn sandwich() {
        for eps in [0.1, 0.5, 0.9] {
            for x in grid(301, -50.0, 50.0) {
                assert!(phi_sandwich_holds(&line(), &0.0.into(), 2.0, eps, &x).unwrap());
            }
        }
        assert!(phi_sandwich_holds(&line(), &0.0.into(), 2.0, 1.0, &1.0.into()).is_err());
    }

    #[test]
    fn truncation_examples() {
        let a = Point::Real(0.0);
        let f = normalize_at(LipschitzFn::distance_to(a.clone()), &line(), &a).unwrap();
        let (low, high) = truncate(f.clone(), &line(), &a, 5.0).unwrap();
        assert_eq!(low.evaluate(&line(), &3.0.into()).unwrap(), 3.0);
        assert_eq!(high.evaluate(&line(), &3.0.into()).unwrap(), 0.0);
        assert_eq!(low.evaluate(&line(), &8.0.into()).unwrap(), 5.0);
        assert_eq!(high.evaluate(&line(), &8.0.into()).unwrap(), 3.0);
        let report =
            check_truncation(&f, &line(), &a, 5.0, &grid(100, -30.0, 30.0), 1e-12).unwrap();
        assert!(report.holds(1e-12), "{report:?}");
        // negative side: f = -d(0, .)
        let g = LipschitzFn::distance_to(a.clone()).negate();
        let (low, high) = truncate(g, &line(), &a, 2.0).unwrap();
        assert_eq!(low.evaluate(&line(), &Point::Real(-7.0)).unwrap(), -2.0);
        assert_eq!(high.evaluate(&line(), &Point::Real(-7.0)).unwrap(), -5.0);
    }

    #[test]
    fn truncation_requires_normalization() {
        let f = LipschitzFn::distance_to(1.0.into());
        assert!(matches!(
            truncate(f, &line(), &0.0.into(), 1.0),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn remainder_vanishes_for_large_radius() {
        let a = Point::Real(0.0);
        let f = LipschitzFn::distance_to(3.0.into()).shift(-3.0);
        for x in grid(40, -10.0, 10.0) {
            let fx = f.evaluate(&line(), &x).unwrap();
            let (_, high) = truncate(f.clone(), &line(), &a, fx.abs() + 0.5).unwrap();
            assert_eq!(high.evaluate(&line(), &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn normalization_preserves_integral_differences() {
        let b = Point::Real(2.0);
        let f = LipschitzFn::distance_to(b.clone());
        let a = Point::Real(-1.0);
        let fa = normalize_at(f.clone(), &line(), &a).unwrap();
        assert_eq!(fa.evaluate(&line(), &a).unwrap(), 0.0);
        for x in grid(20, -5.0, 5.0) {
            let diff = f.evaluate(&line(), &x).unwrap() - fa.evaluate(&line(), &x).unwrap();
            assert!((diff - 3.0).abs() < 1e-15);
        }
        // already normalized: values unchanged
        let g = LipschitzFn::distance_to(a.clone());
        let ga = normalize_at(g.clone(), &line(), &a).unwrap();
        for x in grid(20, -5.0, 5.0) {
            assert_eq!(
                g.evaluate(&line(), &x).unwrap(),
                ga.evaluate(&line(), &x).unwrap()
            );
        }
    }

    #[test]
    fn lattice_operations() {
        let f = LipschitzFn::distance_to(0.0.into());
        let g = LipschitzFn::distance_to(4.0.into());
        let sample = grid(50, -10.0, 10.0);
        let single = pointwise_max(vec![f.clone()]).unwrap();
        let doubled = pointwise_max(vec![f.clone(), f.clone()]).unwrap();
        for x in &sample {
            let fx = f.evaluate(&line(), x).unwrap();
            assert_eq!(single.evaluate(&line(), x).unwrap(), fx);
            assert_eq!(doubled.evaluate(&line(), x).unwrap(), fx);
        }
        let mx = pointwise_max(vec![f.clone(), g.clone()]).unwrap();
        let mn = pointwise_min(vec![f, g]).unwrap();
        assert!(verify_1lipschitz(&mx, &line(), &sample, LIPSCHITZ_TOL)
            .unwrap()
            .is_ok());
        assert!(verify_1lipschitz(&mn, &line(), &sample, LIPSCHITZ_TOL)
            .unwrap()
            .is_ok());
        assert!(pointwise_max(vec![]).is_err());
        assert!(pointwise_min(vec![]).is_err());
    }

    #[test]
    fn tabulated_functions() {
        let s = line();
        let a = Point::Real(0.0);
        let b = Point::Real(1.0);
        let doubled = Table::new(
            &s,
            vec![a.clone(), b.clone()],
            vec![0.0, 2.0],
            LIPSCHITZ_TOL,
        )
        .unwrap();
        assert!(!doubled.certified());
        let f = LipschitzFn::Tabulated(doubled);
        match verify_1lipschitz(&f, &s, &[a.clone(), b.clone()], LIPSCHITZ_TOL).unwrap() {
            LipschitzCheck::Violation { i, j, slack } => {
                assert_eq!((i, j), (0, 1));
                assert_eq!(slack, 1.0);
            }
            LipschitzCheck::Ok => panic!("expected a violation"),
        }
        assert!(matches!(
            f.evaluate(&s, &2.0.into()),
            Err(Error::OutsideDomain)
        ));

        let ok = Table::new(
            &s,
            pts(&[0.0, 1.0, 3.0]),
            vec![0.0, 0.5, 2.0],
            LIPSCHITZ_TOL,
        )
        .unwrap();
        assert!(ok.certified());
        let ext = LipschitzFn::min_extension(&ok).unwrap();
        assert_eq!(ext.evaluate(&s, &1.0.into()).unwrap(), 0.5);
        assert!(
            verify_1lipschitz(&ext, &s, &grid(60, -5.0, 8.0), LIPSCHITZ_TOL)
                .unwrap()
                .is_ok()
        );
        assert!(Table::unverified(pts(&[1.0, 1.0]), vec![0.0, 0.0]).is_err());
    }
}
