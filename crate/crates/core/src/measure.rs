//! Finitely supported probability measures.

use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{Ball, MetricSpace, Point};

/// Tolerance on the total mass of a measure.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A probability measure with finitely many atoms.
///
/// Atoms are pairwise distinct (bitwise) and carry strictly positive
/// weights summing to one.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    space: Arc<MetricSpace>,
    support: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure, dropping zero weights and merging duplicate points.
    pub fn new(
        space: Arc<MetricSpace>,
        points: Vec<Point>,
        weights: Vec<f64>,
        renormalize: bool,
    ) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                points: points.len(),
                weights: weights.len(),
            });
        }
        for (index, &w) in weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::NegativeWeight { index, weight: w });
            }
        }
        let mut support: Vec<Point> = Vec::with_capacity(points.len());
        let mut merged: Vec<f64> = Vec::with_capacity(points.len());
        let mut seen = HashMap::new();
        for (p, w) in points.into_iter().zip(weights) {
            space.check_point(&p)?;
            if w == 0.0 {
                continue;
            }
            match seen.get(&p.key()) {
                Some(&k) => merged[k] += w,
                None => {
                    seen.insert(p.key(), support.len());
                    support.push(p);
                    merged.push(w);
                }
            }
        }
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let sum: f64 = merged.iter().sum();
        if renormalize {
            merged.iter_mut().for_each(|w| *w /= sum);
        } else if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        Ok(Self {
            space,
            support,
            weights: merged,
        })
    }

    pub fn dirac(space: Arc<MetricSpace>, a: Point) -> Result<Self> {
        space.check_point(&a)?;
        Ok(Self {
            space,
            support: vec![a],
            weights: vec![1.0],
        })
    }

    /// Uniform weights over the given sample; repeated points accumulate.
    pub fn empirical(space: Arc<MetricSpace>, sample: Vec<Point>) -> Result<Self> {
        let n = sample.len();
        Self::new(space, sample, vec![1.0; n], true)
    }

    /// Empirical measure from CSV rows: one column gives a real or an
    /// index (depending on the space), several columns give a vector.
    pub fn from_csv<R: Read>(
        space: Arc<MetricSpace>,
        reader: R,
        has_headers: bool,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(has_headers)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut sample = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let nums: Vec<f64> = record
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::schema(format!("row {row}"), format!("'{s}' is not a number"))
                    })
                })
                .collect::<Result<_>>()?;
            let point = match &*space {
                MetricSpace::RealLine if nums.len() == 1 => Point::Real(nums[0]),
                MetricSpace::Finite(_) if nums.len() == 1 => {
                    let x = nums[0];
                    if x < 0.0 || x.fract() != 0.0 {
                        return Err(Error::schema(
                            format!("row {row}"),
                            "index must be a nonnegative integer",
                        ));
                    }
                    Point::Index(x as usize)
                }
                MetricSpace::Euclidean { .. } => Point::Vector(nums),
                _ => {
                    return Err(Error::schema(
                        format!("row {row}"),
                        format!(
                            "cannot read {} columns as a point of a {} space",
                            nums.len(),
                            space.kind_name()
                        ),
                    ))
                }
            };
            sample.push(point);
        }
        Self::empirical(space, sample)
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.support.iter().zip(self.weights.iter().copied())
    }

    pub fn is_dirac(&self) -> bool {
        self.support.len() == 1
    }

    pub fn same_space(&self, other: &DiscreteMeasure) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Bitwise equality of atoms and weights (order-sensitive).
    pub fn same_as(&self, other: &DiscreteMeasure) -> bool {
        self.support.len() == other.support.len()
            && self
                .atoms()
                .zip(other.atoms())
                .all(|((p, w), (q, v))| p.same_as(q) && w.to_bits() == v.to_bits())
    }

    /// Weight of the atom at `x`, zero if `x` is not in the support.
    pub fn mass_at(&self, x: &Point) -> f64 {
        self.atoms()
            .filter(|(p, _)| p.same_as(x))
            .map(|(_, w)| w)
            .sum()
    }

    /// `sum_i w_i f(s_i)`.
    pub fn integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&Point) -> Result<f64>,
    {
        let mut total = 0.0;
        for (p, w) in self.atoms() {
            total += w * f(p)?;
        }
        Ok(total)
    }

    /// `integral of d(a, .)`.
    pub fn first_moment(&self, a: &Point) -> Result<f64> {
        self.space.check_point(a)?;
        Ok(self
            .atoms()
            .map(|(p, w)| w * self.space.distance_unchecked(a, p))
            .sum())
    }

    /// `integral of d(a, .)` over the complement of the closed ball
    /// `B*(a, r)`.
    pub fn tail_integral(&self, a: &Point, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "radius {r} must be nonnegative"
            )));
        }
        self.space.check_point(a)?;
        Ok(self
            .atoms()
            .map(|(p, w)| (w, self.space.distance_unchecked(a, p)))
            .filter(|&(_, d)| d > r)
            .map(|(w, d)| w * d)
            .sum())
    }

    pub fn mass_in_ball(&self, ball: &Ball) -> Result<f64> {
        self.space.check_point(&ball.center)?;
        Ok(self
            .atoms()
            .filter(|(p, _)| ball.contains_distance(self.space.distance_unchecked(&ball.center, p)))
            .map(|(_, w)| w)
            .sum())
    }

    /// Largest distance from `a` to an atom.
    pub fn max_distance_from(&self, a: &Point) -> Result<f64> {
        self.space.check_point(a)?;
        Ok(self
            .support
            .iter()
            .map(|p| self.space.distance_unchecked(a, p))
            .fold(0.0, f64::max))
    }

    pub fn cdf(&self) -> Result<Cdf> {
        let mut pairs = self.real_atoms()?;
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut acc = 0.0;
        let mut jumps = Vec::with_capacity(pairs.len());
        let mut cumulative = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            acc += w;
            jumps.push(x);
            cumulative.push(acc);
        }
        // pin the final level; accumulated rounding must not leave it off 1
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Cdf { jumps, cumulative })
    }

    pub(crate) fn real_atoms(&self) -> Result<Vec<(f64, f64)>> {
        if !matches!(*self.space, MetricSpace::RealLine) {
            return Err(Error::NotOneDimensional);
        }
        Ok(self
            .atoms()
            .map(|(p, w)| match p {
                Point::Real(x) => (*x, w),
                _ => unreachable!("real line measure with non-real atom"),
            })
            .collect())
    }

    /// A weighted median point: coordinatewise on the real line and in
    /// `R^d`, `None` for other spaces. On the real line this is the point
    /// minimizing the first moment.
    pub fn weighted_median(&self) -> Option<Point> {
        weighted_median_of(&self.space, self.atoms().map(|(p, w)| (p.clone(), w)))
    }
}

/// Coordinatewise weighted median of weighted points.
pub fn weighted_median_of<I>(space: &MetricSpace, atoms: I) -> Option<Point>
where
    I: IntoIterator<Item = (Point, f64)>,
{
    fn median(mut xs: Vec<(f64, f64)>) -> f64 {
        xs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let total: f64 = xs.iter().map(|x| x.1).sum();
        let mut acc = 0.0;
        for (x, w) in &xs {
            acc += w;
            if acc >= 0.5 * total {
                return *x;
            }
        }
        xs.last().unwrap().0
    }
    let atoms: Vec<(Point, f64)> = atoms.into_iter().collect();
    if atoms.is_empty() {
        return None;
    }
    match space {
        MetricSpace::RealLine => Some(Point::Real(median(
            atoms
                .iter()
                .map(|(p, w)| match p {
                    Point::Real(x) => (*x, *w),
                    _ => (f64::NAN, *w),
                })
                .collect(),
        ))),
        MetricSpace::Euclidean { dim, .. } => {
            let coords = (0..*dim)
                .map(|c| {
                    median(
                        atoms
                            .iter()
                            .map(|(p, w)| match p {
                                Point::Vector(xs) => (xs[c], *w),
                                _ => (f64::NAN, *w),
                            })
                            .collect(),
                    )
                })
                .collect();
            Some(Point::Vector(coords))
        }
        _ => None,
    }
}

/// Right-continuous step function of a measure on the real line.
#[derive(Clone, Debug, PartialEq)]
pub struct Cdf {
    jumps: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Cdf {
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.jumps.partition_point(|&j| j <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }
}

impl serde::Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("DiscreteMeasure", 3)?;
        st.serialize_field("space", &*self.space)?;
        st.serialize_field("support", &self.support)?;
        st.serialize_field("weights", &self.weights)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Arc<MetricSpace> {
        Arc::new(MetricSpace::RealLine)
    }

    fn m(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        DiscreteMeasure::new(
            line(),
            points.iter().map(|&x| Point::Real(x)).collect(),
            weights.to_vec(),
            false,
        )
        .unwrap()
    }

    fn spike(n: usize) -> DiscreteMeasure {
        let n = n as f64;
        DiscreteMeasure::new(
            line(),
            vec![0.0.into(), n.into()],
            vec![1.0 - 1.0 / n, 1.0 / n],
            false,
        )
        .unwrap()
    }

    #[test]
    fn construction_merges_and_validates() {
        let p = m(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(p.len(), 2);
        let q = m(&[0.0, 0.0], &[0.3, 0.7]);
        assert_eq!(q.len(), 1);
        assert_eq!(q.weights(), &[1.0]);

        let bad = DiscreteMeasure::new(line(), vec![0.0.into(), 1.0.into()], vec![0.5, 0.6], false);
        assert!(matches!(bad, Err(Error::WeightSum { .. })));
        let ok = DiscreteMeasure::new(line(), vec![0.0.into(), 1.0.into()], vec![0.5, 0.6], true)
            .unwrap();
        assert!((ok.weights()[1] - 0.6 / 1.1).abs() < 1e-15);

        let neg = DiscreteMeasure::new(line(), vec![0.0.into()], vec![-1.0], true);
        assert!(matches!(neg, Err(Error::NegativeWeight { index: 0, .. })));
        let empty = DiscreteMeasure::new(line(), vec![0.0.into()], vec![0.0], true);
        assert!(matches!(empty, Err(Error::EmptySupport)));
        let zero_dropped = m(&[0.0, 5.0], &[1.0, 0.0]);
        assert!(zero_dropped.is_dirac());
        let mism = DiscreteMeasure::new(line(), vec![0.0.into()], vec![0.5, 0.5], false);
        assert!(matches!(mism, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn near_duplicates_are_kept_distinct() {
        let x = 0.1f64;
        let p = m(&[x, f64::from_bits(x.to_bits() + 1)], &[0.5, 0.5]);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn dirac_and_integrals() {
        let d = DiscreteMeasure::dirac(line(), 0.0.into()).unwrap();
        assert_eq!(d.weights(), &[1.0]);
        assert_eq!(
            d.integrate(|x| match x {
                Point::Real(v) => Ok(v + 7.0),
                _ => unreachable!(),
            })
            .unwrap(),
            7.0
        );
        assert_eq!(d.first_moment(&0.0.into()).unwrap(), 0.0);
        assert_eq!(d.first_moment(&2.5.into()).unwrap(), 2.5);

        let p = m(&[0.0, 2.0], &[0.5, 0.5]);
        let s = MetricSpace::RealLine;
        let origin = Point::Real(0.0);
        assert_eq!(
            p.integrate(|x| Ok(s.distance_unchecked(&origin, x)))
                .unwrap(),
            1.0
        );

        let u = m(&[0.0, 1.0, 2.0, 3.0], &[0.25; 4]);
        // direct sum oracle: (0 + 1 + 2 + 3) / 4
        let oracle: f64 = [0.0, 1.0, 2.0, 3.0].iter().sum::<f64>() / 4.0;
        let got = u
            .integrate(|x| match x {
                Point::Real(v) => Ok(*v),
                _ => unreachable!(),
            })
            .unwrap();
        assert_eq!(got, oracle);
        assert_eq!(got, 1.5);

        assert_eq!(
            m(&[-1.0, 1.0], &[0.5, 0.5])
                .first_moment(&0.0.into())
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn spike_moments_and_tails() {
        for n in 1..60 {
            let p = spike(n);
            assert!(
                (p.first_moment(&0.0.into()).unwrap() - 1.0).abs() < 1e-15,
                "n = {n}"
            );
            let nf = n as f64;
            if n > 1 {
                assert!((p.tail_integral(&0.0.into(), nf - 0.5).unwrap() - 1.0).abs() < 1e-15);
            }
            assert_eq!(p.tail_integral(&0.0.into(), nf).unwrap(), 0.0);
            let open = Ball::open(0.0.into(), nf).unwrap();
            assert!((p.mass_in_ball(&open).unwrap() - (1.0 - 1.0 / nf)).abs() < 1e-15);
        }
        let p = m(&[0.0, 2.0], &[0.5, 0.5]);
        assert_eq!(p.tail_integral(&0.0.into(), 1.0).unwrap(), 1.0);
        assert_eq!(p.tail_integral(&0.0.into(), 2.0).unwrap(), 0.0);
        assert!(p.tail_integral(&0.0.into(), -1.0).is_err());
    }

    #[test]
    fn ball_masses() {
        let d = DiscreteMeasure::dirac(line(), 3.0.into()).unwrap();
        assert_eq!(
            d.mass_in_ball(&Ball::closed(3.0.into(), 0.0).unwrap())
                .unwrap(),
            1.0
        );
        assert_eq!(
            d.mass_in_ball(&Ball::open(3.0.into(), 0.0).unwrap())
                .unwrap(),
            0.0
        );
        let p = m(&[-4.0, 0.0, 9.0], &[0.2, 0.3, 0.5]);
        assert_eq!(
            p.mass_in_ball(&Ball::open(0.0.into(), 100.0).unwrap())
                .unwrap(),
            1.0
        );
    }

    #[test]
    fn cdfs() {
        let c = m(&[1.0, 0.0], &[0.5, 0.5]).cdf().unwrap();
        assert_eq!(c.jumps(), &[0.0, 1.0]);
        assert_eq!(c.cumulative(), &[0.5, 1.0]);
        assert_eq!(c.eval(-0.1), 0.0);
        assert_eq!(c.eval(0.0), 0.5);
        assert_eq!(c.eval(0.99), 0.5);
        assert_eq!(c.eval(1.0), 1.0);

        let d = DiscreteMeasure::dirac(line(), 3.0.into())
            .unwrap()
            .cdf()
            .unwrap();
        assert_eq!(d.jumps(), &[3.0]);
        assert_eq!(d.cumulative(), &[1.0]);

        let u = m(&[1.0, 2.0, 3.0, 4.0], &[0.25; 4]).cdf().unwrap();
        assert_eq!(u.cumulative(), &[0.25, 0.5, 0.75, 1.0]);

        let e = DiscreteMeasure::dirac(
            Arc::new(MetricSpace::euclidean(2, 2.0).unwrap()),
            Point::Vector(vec![0.0, 0.0]),
        )
        .unwrap();
        assert!(matches!(e.cdf(), Err(Error::NotOneDimensional)));
    }

    #[test]
    fn csv_ingestion() {
        let data = "x\n1.0\n2.0\n2.0\n5.0\n";
        let p = DiscreteMeasure::from_csv(line(), data.as_bytes(), true).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.mass_at(&2.0.into()), 0.5);

        let e = Arc::new(MetricSpace::euclidean(2, 2.0).unwrap());
        let p = DiscreteMeasure::from_csv(e, "0,1\n1,0\n".as_bytes(), false).unwrap();
        assert_eq!(p.len(), 2);
        assert!(DiscreteMeasure::from_csv(line(), "a\n".as_bytes(), false).is_err());
    }

    #[test]
    fn medians() {
        let p = m(&[0.0, 1.0, 10.0], &[0.2, 0.5, 0.3]);
        assert_eq!(p.weighted_median(), Some(Point::Real(1.0)));
    }
}
