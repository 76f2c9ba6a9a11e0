//! Point universes and their distance functions.
//!
//! Four kinds of metric space are supported: the real line, finite
//! dimensional `l_p` spaces, finite spaces given by a distance matrix, and
//! the space of continuous functions on `[0, 1]` under the sup norm,
//! restricted to piecewise-linear elements.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Default absolute tolerance for metric axiom checks.
pub const AXIOM_TOL: f64 = 1e-12;

/// A continuous piecewise-linear function on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PwlFn {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl PwlFn {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidPoint(
                "piecewise-linear function needs at least two breakpoints".into(),
            ));
        }
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidPoint(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidPoint(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPoint(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("values must be finite".into()));
        }
        Ok(Self {
            t: breakpoints,
            v: values,
        })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    /// Value at `t`, clamped to `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        // index of the first breakpoint strictly greater than t
        let hi = self.t.partition_point(|&b| b <= t);
        if hi == 0 {
            return self.v[0];
        }
        if hi == self.t.len() {
            return *self.v.last().unwrap();
        }
        let lo = hi - 1;
        if self.t[lo] == t {
            return self.v[lo];
        }
        let s = (t - self.t[lo]) / (self.t[hi] - self.t[lo]);
        self.v[lo] + (self.v[hi] - self.v[lo]) * s
    }

    /// Sup norm of `self - other`.
    ///
    /// The difference of two piecewise-linear functions is piecewise linear
    /// on the merged breakpoint set, so its extreme values sit on that set.
    pub fn sup_distance(&self, other: &PwlFn) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut best = 0.0f64;
        while i < self.t.len() || j < other.t.len() {
            let t = match (self.t.get(i), other.t.get(j)) {
                (Some(&a), Some(&b)) => match a.partial_cmp(&b).unwrap() {
                    Ordering::Less => {
                        i += 1;
                        a
                    }
                    Ordering::Greater => {
                        j += 1;
                        b
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        a
                    }
                },
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            best = best.max((self.eval(t) - other.eval(t)).abs());
        }
        best
    }

    /// Insert extra breakpoints at the given locations without changing the
    /// function.
    pub fn refined(&self, extra: &[f64]) -> PwlFn {
        let mut t: Vec<f64> = self.t.clone();
        t.extend(extra.iter().copied().filter(|x| (0.0..=1.0).contains(x)));
        t.sort_by(|a, b| a.partial_cmp(b).unwrap());
        t.dedup();
        let v = t.iter().map(|&x| self.eval(x)).collect();
        PwlFn { t, v }
    }

    pub fn zero() -> PwlFn {
        PwlFn {
            t: vec![0.0, 1.0],
            v: vec![0.0, 0.0],
        }
    }
}

/// An element of one of the supported spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Real(f64),
    Vector(Vec<f64>),
    Index(usize),
    Pwl(PwlFn),
}

/// Bitwise identity of a point, usable as a hash key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointKey {
    Real(u64),
    Vector(Vec<u64>),
    Index(usize),
    Pwl(Vec<u64>, Vec<u64>),
}

impl Point {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Point::Real(_) => "real",
            Point::Vector(_) => "vector",
            Point::Index(_) => "index",
            Point::Pwl(_) => "piecewise-linear function",
        }
    }

    pub fn key(&self) -> PointKey {
        fn bits(xs: &[f64]) -> Vec<u64> {
            xs.iter().map(|x| x.to_bits()).collect()
        }
        match self {
            Point::Real(x) => PointKey::Real(x.to_bits()),
            Point::Vector(xs) => PointKey::Vector(bits(xs)),
            Point::Index(i) => PointKey::Index(*i),
            Point::Pwl(f) => PointKey::Pwl(bits(&f.t), bits(&f.v)),
        }
    }

    /// Exact (bitwise) equality.
    pub fn same_as(&self, other: &Point) -> bool {
        self.key() == other.key()
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::Real(x)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Real(x) => write!(f, "{x}"),
            Point::Vector(xs) => write!(f, "{xs:?}"),
            Point::Index(i) => write!(f, "#{i}"),
            Point::Pwl(p) => write!(f, "pwl(t={:?}, v={:?})", p.t, p.v),
        }
    }
}

/// A finite metric given by its full distance matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetric {
    n: usize,
    matrix: Vec<f64>,
}

impl FiniteMetric {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricSpace {
    RealLine,
    /// `R^dim` with the `l_p` norm; `p` may be `f64::INFINITY`.
    Euclidean {
        dim: usize,
        p: f64,
    },
    Finite(FiniteMetric),
    /// `C[0,1]` with the sup norm, piecewise-linear elements only.
    C01Sup,
}

impl MetricSpace {
    pub fn euclidean(dim: usize, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be at least 1".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidSpace(format!("norm exponent {p} < 1")));
        }
        Ok(MetricSpace::Euclidean { dim, p })
    }

    /// Builds a finite space from a square matrix of nonnegative reals.
    ///
    /// Only the shape and sign are checked here; use
    /// [`verify_metric_axioms`] or [`MetricSpace::finite_checked`] to
    /// confirm the matrix is a metric.
    pub fn finite(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSpace("distance matrix is empty".into()));
        }
        let mut matrix = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpace(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::InvalidSpace(format!(
                    "row {i} has entry {x}, expected a finite nonnegative real"
                )));
            }
            matrix.extend(row);
        }
        Ok(MetricSpace::Finite(FiniteMetric { n, matrix }))
    }

    /// Like [`MetricSpace::finite`], additionally rejecting matrices that
    /// violate any metric axiom.
    pub fn finite_checked(rows: Vec<Vec<f64>>) -> Result<Self> {
        let space = Self::finite(rows)?;
        let violations = verify_metric_axioms(&space, None, AXIOM_TOL);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidSpace(format!("{v}")));
        }
        Ok(space)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpace::RealLine => "real_line",
            MetricSpace::Euclidean { .. } => "euclidean",
            MetricSpace::Finite(_) => "finite",
            MetricSpace::C01Sup => "c01_sup",
        }
    }

    /// Whether closed bounded balls are compact in this space.
    pub fn balls_are_compact(&self) -> bool {
        !matches!(self, MetricSpace::C01Sup)
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        match (self, x) {
            (MetricSpace::RealLine, Point::Real(v)) => finite_or(*v),
            (MetricSpace::Euclidean { dim, .. }, Point::Vector(xs)) => {
                if xs.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: xs.len(),
                    });
                }
                xs.iter().try_for_each(|v| finite_or(*v))
            }
            (MetricSpace::Finite(m), Point::Index(i)) => {
                if *i >= m.n {
                    Err(Error::IndexOutOfRange {
                        index: *i,
                        size: m.n,
                    })
                } else {
                    Ok(())
                }
            }
            (MetricSpace::C01Sup, Point::Pwl(_)) => Ok(()),
            _ => Err(Error::KindMismatch {
                expected: self.kind_name(),
                found: x.kind_name(),
            }),
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// Distance between points already known to belong to this space.
    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (MetricSpace::RealLine, Point::Real(a), Point::Real(b)) => (a - b).abs(),
            (MetricSpace::Euclidean { p, .. }, Point::Vector(a), Point::Vector(b)) => {
                lp_distance(a, b, *p)
            }
            (MetricSpace::Finite(m), Point::Index(i), Point::Index(j)) => m.get(*i, *j),
            (MetricSpace::C01Sup, Point::Pwl(f), Point::Pwl(g)) => f.sup_distance(g),
            _ => panic!("distance_unchecked called with points of the wrong kind"),
        }
    }

    /// The origin (zero element), where one exists.
    pub fn origin(&self) -> Option<Point> {
        match self {
            MetricSpace::RealLine => Some(Point::Real(0.0)),
            MetricSpace::Euclidean { dim, .. } => Some(Point::Vector(vec![0.0; *dim])),
            MetricSpace::Finite(_) => Some(Point::Index(0)),
            MetricSpace::C01Sup => Some(Point::Pwl(PwlFn::zero())),
        }
    }
}

fn finite_or(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidPoint(format!("coordinate {v} is not finite")))
    }
}

fn lp_distance(a: &[f64], b: &[f64], p: f64) -> f64 {
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    if p.is_infinite() {
        diffs.fold(0.0, f64::max)
    } else if p == 1.0 {
        diffs.sum()
    } else if p == 2.0 {
        diffs.map(|d| d * d).sum::<f64>().sqrt()
    } else {
        // scale by the largest component to avoid overflow in d^p
        let diffs: Vec<f64> = diffs.collect();
        let scale = diffs.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        scale
            * diffs
                .iter()
                .map(|d| (d / scale).powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
    }
}

/// A failed metric axiom. Indices refer to the checked sample (or to
/// matrix rows for a full finite-space check).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum AxiomViolation {
    /// d(x, x) != 0
    Identity {
        i: usize,
        value: f64,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    Symmetry {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },
    /// d(i, k) > d(i, j) + d(j, k)
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Identity { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            AxiomViolation::Negative { i, j, value } => write!(f, "d({i},{j}) = {value} < 0"),
            AxiomViolation::Symmetry {
                i,
                j,
                forward,
                backward,
            } => write!(f, "d({i},{j}) = {forward} but d({j},{i}) = {backward}"),
            AxiomViolation::Triangle { i, j, k, excess } => {
                write!(f, "triangle inequality fails for ({i},{j},{k}) by {excess}")
            }
        }
    }
}

/// Exhaustively checks identity, symmetry and the triangle inequality.
///
/// With `sample = None` a finite space is checked on its full matrix; for
/// other kinds `None` checks nothing.
pub fn verify_metric_axioms(
    space: &MetricSpace,
    sample: Option<&[Point]>,
    tol: f64,
) -> Vec<AxiomViolation> {
    let n;
    let d: Box<dyn Fn(usize, usize) -> f64 + '_> = match (space, sample) {
        (MetricSpace::Finite(m), None) => {
            n = m.n;
            Box::new(move |i, j| m.get(i, j))
        }
        (_, Some(points)) => {
            n = points.len();
            let mut cache = vec![f64::NAN; n * n];
            for i in 0..n {
                for j in 0..n {
                    cache[i * n + j] = space.distance(&points[i], &points[j]).unwrap_or(f64::NAN);
                }
            }
            Box::new(move |i, j| cache[i * n + j])
        }
        (_, None) => return Vec::new(),
    };

    let mut out = Vec::new();
    for i in 0..n {
        let dii = d(i, i);
        if !(dii.abs() <= tol) {
            out.push(AxiomViolation::Identity { i, value: dii });
        }
        for j in 0..n {
            let dij = d(i, j);
            if !(dij >= -tol) {
                out.push(AxiomViolation::Negative { i, j, value: dij });
            }
            if j > i {
                let dji = d(j, i);
                if !((dij - dji).abs() <= tol) {
                    out.push(AxiomViolation::Symmetry {
                        i,
                        j,
                        forward: dij,
                        backward: dji,
                    });
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let excess = d(i, k) - d(i, j) - d(j, k);
                if !(excess <= tol) {
                    out.push(AxiomViolation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    out
}

/// Open (`closed = false`) or closed ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
    pub closed: bool,
}

impl Ball {
    pub fn open(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, false)
    }

    pub fn closed(center: Point, radius: f64) -> Result<Self> {
        Self::new(center, radius, true)
    }

    pub fn new(center: Point, radius: f64, closed: bool) -> Result<Self> {
        if !(radius >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ball radius {radius} must be nonnegative"
            )));
        }
        Ok(Self {
            center,
            radius,
            closed,
        })
    }

    pub(crate) fn contains_distance(&self, d: f64) -> bool {
        if self.closed {
            d <= self.radius
        } else {
            d < self.radius
        }
    }
}

pub fn in_ball(space: &MetricSpace, ball: &Ball, x: &Point) -> Result<bool> {
    Ok(ball.contains_distance(space.distance(&ball.center, x)?))
}

impl Serialize for PwlFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PwlFn", 2)?;
        st.serialize_field("t", &self.t)?;
        st.serialize_field("v", &self.v)?;
        st.end()
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Real(x) => s.serialize_f64(*x),
            Point::Vector(xs) => xs.serialize(s),
            Point::Index(i) => s.serialize_u64(*i as u64),
            Point::Pwl(f) => f.serialize(s),
        }
    }
}

impl Serialize for MetricSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("kind", self.kind_name())?;
        match self {
            MetricSpace::Euclidean { dim, p } => {
                map.serialize_entry("dim", dim)?;
                map.serialize_entry("p", p)?;
            }
            MetricSpace::Finite(fm) => map.serialize_entry("matrix", &fm.rows())?,
            MetricSpace::RealLine | MetricSpace::C01Sup => {}
        }
        map.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pwl(t: &[f64], v: &[f64]) -> Point {
        Point::Pwl(PwlFn::new(t.to_vec(), v.to_vec()).unwrap())
    }

    #[test]
    fn real_line_distance() {
        let s = MetricSpace::RealLine;
        assert_eq!(s.distance(&1.0.into(), &3.0.into()).unwrap(), 2.0);
        assert_eq!(s.distance(&1.5.into(), &1.5.into()).unwrap(), 0.0);
    }

    #[test]
    fn kind_mismatch_and_range_errors() {
        let s = MetricSpace::RealLine;
        assert!(matches!(
            s.distance(&Point::Index(0), &1.0.into()),
            Err(Error::KindMismatch { .. })
        ));
        let f = MetricSpace::finite(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            f.distance(&Point::Index(0), &Point::Index(2)),
            Err(Error::IndexOutOfRange { index: 2, size: 2 })
        ));
        let e = MetricSpace::euclidean(2, 2.0).unwrap();
        assert!(matches!(
            e.distance(&Point::Vector(vec![0.0]), &Point::Vector(vec![0.0, 1.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lp_norms() {
        let a = Point::Vector(vec![0.0, 0.0]);
        let b = Point::Vector(vec![3.0, 4.0]);
        let d = |p: f64| {
            MetricSpace::euclidean(2, p)
                .unwrap()
                .distance(&a, &b)
                .unwrap()
        };
        assert_eq!(d(1.0), 7.0);
        assert_eq!(d(2.0), 5.0);
        assert_eq!(d(f64::INFINITY), 4.0);
        let d3 = d(3.0);
        assert!((d3 - (27.0f64 + 64.0).powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(MetricSpace::euclidean(2, 0.5).is_err());
        assert!(MetricSpace::euclidean(0, 2.0).is_err());
    }

    #[test]
    fn pwl_validation() {
        assert!(PwlFn::new(vec![0.0, 0.5], vec![1.0, 1.0]).is_err());
        assert!(PwlFn::new(vec![0.0, 0.5, 0.5, 1.0], vec![0.0; 4]).is_err());
        assert!(PwlFn::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(PwlFn::new(vec![0.0, 1.0], vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn pwl_sup_distance_on_merged_breakpoints() {
        let s = MetricSpace::C01Sup;
        let x = pwl(&[0.0, 0.5, 1.0], &[1.0, -1.0, -1.0]);
        let y = pwl(&[0.0, 0.5, 2.0 / 3.0, 1.0], &[1.0, 1.0, -1.0, -1.0]);
        assert_eq!(s.distance(&x, &y).unwrap(), 2.0);
        // a tent against zero: maximum at an interior breakpoint
        let tent = pwl(&[0.0, 0.3, 1.0], &[0.0, 2.5, 0.0]);
        let zero = Point::Pwl(PwlFn::zero());
        assert_eq!(s.distance(&tent, &zero).unwrap(), 2.5);
    }

    #[test]
    fn pwl_refinement_preserves_distance() {
        let f = PwlFn::new(vec![0.0, 0.25, 1.0], vec![0.0, 1.0, -0.5]).unwrap();
        let g = PwlFn::new(vec![0.0, 0.6, 1.0], vec![0.3, 0.2, 0.9]).unwrap();
        let d = f.sup_distance(&g);
        let fr = f.refined(&[0.1, 0.5, 0.9]);
        assert_eq!(fr.breakpoints().len(), 6);
        assert!((fr.sup_distance(&g) - d).abs() < 1e-15);
    }

    #[test]
    fn finite_axiom_checks() {
        let good = MetricSpace::finite(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.5],
            vec![2.0, 1.5, 0.0],
        ])
        .unwrap();
        assert!(verify_metric_axioms(&good, None, AXIOM_TOL).is_empty());

        let bad = MetricSpace::finite(vec![
            vec![0.0, 5.0, 10.0],
            vec![5.0, 0.0, 1.0],
            vec![10.0, 1.0, 0.0],
        ])
        .unwrap();
        let v = verify_metric_axioms(&bad, None, AXIOM_TOL);
        assert!(v.iter().any(|v| matches!(
            v,
            AxiomViolation::Triangle {
                i: 0,
                j: 1,
                k: 2,
                ..
            }
        )));
        assert!(MetricSpace::finite_checked(bad.clone_rows()).is_err());

        let asym = MetricSpace::finite(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(verify_metric_axioms(&asym, None, AXIOM_TOL)
            .iter()
            .any(|v| matches!(v, AxiomViolation::Symmetry { .. })));
        assert!(MetricSpace::finite(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
    }

    impl MetricSpace {
        fn clone_rows(&self) -> Vec<Vec<f64>> {
            match self {
                MetricSpace::Finite(m) => m.rows(),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn balls() {
        let s = MetricSpace::RealLine;
        let open = Ball::open(0.0.into(), 1.0).unwrap();
        let closed = Ball::closed(0.0.into(), 1.0).unwrap();
        assert!(!in_ball(&s, &open, &1.0.into()).unwrap());
        assert!(in_ball(&s, &closed, &1.0.into()).unwrap());
        assert!(in_ball(&s, &open, &0.999.into()).unwrap());
        assert!(Ball::open(0.0.into(), -1.0).is_err());
    }

    #[test]
    fn bitwise_point_identity() {
        assert!(Point::Real(0.1).same_as(&Point::Real(0.1)));
        assert!(!Point::Real(0.0).same_as(&Point::Real(-0.0)));
        assert!(!Point::Real(0.1).same_as(&Point::Real(0.1 + 1e-17 + f64::EPSILON)));
    }
}
