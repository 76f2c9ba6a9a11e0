//! Enumerable families of measures with declared analytic facts.
//!
//! A family is a generator `n -> P_n` (1-based) with a horizon up to which
//! it is enumerated. Statements about members past the horizon come only
//! from certificates declared by the generator; [`MeasureFamily::audit`]
//! spot-checks each of them on the enumerated prefix before use.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::space::{MetricSpace, Point, PwlFn};
use crate::wasserstein::{w1, Method};

/// Tolerance for certificate spot-checks.
pub const CERT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct UniformBound {
    pub center: Point,
    pub radius: f64,
    /// Some member reaches distance `radius` from `center`.
    pub attained: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstantDistance {
    pub measure: DiscreteMeasure,
    pub value: f64,
}

/// `sup_n tail_integral(P_n, center, r) = value` for every `r >= from_radius`.
#[derive(Clone, Debug, Serialize)]
pub struct TailValue {
    pub center: Point,
    pub value: f64,
    pub from_radius: f64,
}

/// Member `n` has mass `mass_coeff * n^mass_exp` at distance
/// `dist_coeff * n^dist_exp` from `center` and the rest of its mass in
/// `B*(center, core_radius)`.
#[derive(Clone, Debug, Serialize)]
pub struct MassOutside {
    pub center: Point,
    pub mass_coeff: f64,
    pub mass_exp: f64,
    pub dist_coeff: f64,
    pub dist_exp: f64,
    pub core_radius: f64,
}

impl MassOutside {
    pub fn mass(&self, n: usize) -> f64 {
        (self.mass_coeff * (n as f64).powf(self.mass_exp)).min(1.0)
    }

    pub fn distance(&self, n: usize) -> f64 {
        self.dist_coeff * (n as f64).powf(self.dist_exp)
    }

    /// `sup_{n > horizon} mass(n)`, or `None` when the mass does not decay.
    pub fn sup_mass_beyond(&self, horizon: usize) -> Option<f64> {
        if self.mass_exp < 0.0 {
            Some(self.mass(horizon + 1))
        } else if self.mass_coeff == 0.0 {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Analytic facts declared for a family.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Certificates {
    /// The family has infinitely many members; the prefix is not all of it.
    pub infinite: bool,
    pub pairwise_separation: Option<f64>,
    pub uniform_bound: Option<UniformBound>,
    pub constant_distance_to: Option<ConstantDistance>,
    pub tail_value: Option<TailValue>,
    pub mass_outside: Option<MassOutside>,
}

type Generator = dyn Fn(usize) -> Result<DiscreteMeasure> + Send + Sync;

#[derive(Clone)]
pub struct MeasureFamily {
    name: String,
    space: Arc<MetricSpace>,
    generator: Arc<Generator>,
    horizon: usize,
    certificates: Certificates,
}

impl fmt::Debug for MeasureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureFamily")
            .field("name", &self.name)
            .field("space", &self.space)
            .field("horizon", &self.horizon)
            .field("certificates", &self.certificates)
            .finish()
    }
}

/// Outcome of spot-checking every declared certificate on the prefix.
#[derive(Clone, Debug, Default, Serialize)]
pub struct CertificateAudit {
    pub prefix: usize,
    /// Smallest pairwise W1 over the prefix, when separation was declared.
    pub min_separation: Option<f64>,
    pub pairs_checked: usize,
    pub max_bound_distance: Option<f64>,
    pub max_distance_defect: Option<f64>,
    pub max_tail_defect: Option<f64>,
    pub max_mass_defect: Option<f64>,
}

impl MeasureFamily {
    pub fn new<F>(
        name: impl Into<String>,
        space: Arc<MetricSpace>,
        horizon: usize,
        certificates: Certificates,
        generator: F,
    ) -> Result<Self>
    where
        F: Fn(usize) -> Result<DiscreteMeasure> + Send + Sync + 'static,
    {
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(Self {
            name: name.into(),
            space,
            generator: Arc::new(generator),
            horizon,
            certificates,
        })
    }

    /// A finite family given by its members.
    pub fn from_members(
        name: impl Into<String>,
        members: Vec<DiscreteMeasure>,
        certificates: Certificates,
    ) -> Result<Self> {
        let first = members.first().ok_or(Error::EmptySupport)?;
        let space = first.space().clone();
        if members.iter().any(|m| !m.same_space(first)) {
            return Err(Error::SpaceMismatch);
        }
        let horizon = members.len();
        let members = Arc::new(members);
        Self::new(name, space, horizon, certificates, move |n| {
            members
                .get(n.wrapping_sub(1))
                .cloned()
                .ok_or(Error::IndexOutOfRange {
                    index: n,
                    size: horizon,
                })
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certificates
    }

    pub fn is_infinite(&self) -> bool {
        self.certificates.infinite
    }

    /// Same generator and certificates, enumerated to a different horizon.
    /// Finite families cannot grow past their member count.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || (!self.is_infinite() && horizon > self.horizon) {
            return Err(Error::InvalidParameter(format!(
                "horizon {horizon} is not available for family {}",
                self.name
            )));
        }
        Ok(Self {
            horizon,
            ..self.clone()
        })
    }

    /// Member `n`, 1-based.
    pub fn member(&self, n: usize) -> Result<DiscreteMeasure> {
        if n == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                size: self.horizon,
            });
        }
        (self.generator)(n)
    }

    /// Members `1..=horizon`.
    pub fn members(&self) -> Result<Vec<DiscreteMeasure>> {
        (1..=self.horizon)
            .into_par_iter()
            .map(|n| self.member(n))
            .collect()
    }

    /// The atom of member `n` when it is a Dirac measure.
    pub fn dirac_location(&self, n: usize) -> Result<Option<Point>> {
        let m = self.member(n)?;
        Ok(m.is_dirac().then(|| m.support()[0].clone()))
    }

    /// Spot-checks every declared certificate on the enumerated prefix.
    pub fn audit(&self) -> Result<CertificateAudit> {
        let members = self.members()?;
        self.audit_members(&members)
    }

    pub(crate) fn audit_members(&self, members: &[DiscreteMeasure]) -> Result<CertificateAudit> {
        let c = &self.certificates;
        let mut audit = CertificateAudit {
            prefix: members.len(),
            ..Default::default()
        };
        let reject = |msg: String| Err(Error::CertificateRejected(format!("{}: {msg}", self.name)));

        if let Some(delta) = c.pairwise_separation {
            if !c.infinite {
                return reject("pairwise separation declared on a finite family".into());
            }
            let (min, pairs) = min_pairwise_distance(members)?;
            audit.min_separation = Some(min);
            audit.pairs_checked = pairs;
            if pairs > 0 && min < delta - CERT_TOL {
                return reject(format!(
                    "pairwise separation {delta} but a prefix pair is {min} apart"
                ));
            }
        }
        if let Some(b) = &c.uniform_bound {
            let dists = members
                .par_iter()
                .map(|m| m.max_distance_from(&b.center))
                .collect::<Result<Vec<f64>>>()?;
            let max = dists.iter().copied().fold(0.0, f64::max);
            audit.max_bound_distance = Some(max);
            if max > b.radius + CERT_TOL {
                return reject(format!(
                    "uniform bound {} exceeded by a member at {max}",
                    b.radius
                ));
            }
            if b.attained && (max - b.radius).abs() > CERT_TOL {
                return reject(format!(
                    "uniform bound {} declared attained, prefix reaches {max}",
                    b.radius
                ));
            }
        }
        if let Some(cd) = &c.constant_distance_to {
            if !cd.measure.same_space(&members[0]) {
                return Err(Error::SpaceMismatch);
            }
            let defect = members
                .par_iter()
                .map(|m| Ok((w1(m, &cd.measure, Method::Auto)? - cd.value).abs()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            audit.max_distance_defect = Some(defect);
            if defect > CERT_TOL {
                return reject(format!(
                    "constant distance {} off by {defect} on the prefix",
                    cd.value
                ));
            }
        }
        if let Some(t) = &c.tail_value {
            let defect = tail_defect(members, t)?;
            audit.max_tail_defect = Some(defect);
            if defect > CERT_TOL {
                return reject(format!(
                    "tail value {} off by {defect} on the prefix",
                    t.value
                ));
            }
        }
        if let Some(mo) = &c.mass_outside {
            let mut defect: f64 = 0.0;
            for (i, m) in members.iter().enumerate() {
                let n = i + 1;
                let mut outside = 0.0;
                for (p, w) in m.atoms() {
                    let d = self.space.distance(&mo.center, p)?;
                    if d > mo.core_radius {
                        outside += w;
                        let want = mo.distance(n);
                        defect = defect.max((d - want).abs() / want.max(1.0));
                    }
                }
                defect = defect.max((outside - mo.mass(n)).abs());
            }
            audit.max_mass_defect = Some(defect);
            if defect > CERT_TOL {
                return reject(format!("mass-outside law off by {defect} on the prefix"));
            }
        }
        Ok(audit)
    }
}

/// Smallest pairwise W1 over a list of measures, with the number of pairs.
pub(crate) fn min_pairwise_distance(members: &[DiscreteMeasure]) -> Result<(f64, usize)> {
    let n = members.len();
    let mins = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut min = f64::INFINITY;
            for j in (i + 1)..n {
                min = min.min(w1(&members[i], &members[j], Method::Auto)?);
            }
            Ok(min)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((
        mins.into_iter().fold(f64::INFINITY, f64::min),
        n * n.saturating_sub(1) / 2,
    ))
}

/// Worst disagreement between the declared tail value and the prefix.
///
/// At `from_radius` the prefix sup may not exceed the value. When the
/// value is positive, every radius `r >= from_radius` below the farthest
/// prefix atom must already see the full value.
fn tail_defect(members: &[DiscreteMeasure], t: &TailValue) -> Result<f64> {
    let sup_at = |r: f64| -> Result<f64> {
        members
            .iter()
            .map(|m| m.tail_integral(&t.center, r))
            .try_fold(0.0, |acc: f64, x| Ok(acc.max(x?)))
    };
    let mut defect = (sup_at(t.from_radius)? - t.value).max(0.0);
    if t.value > 0.0 {
        let reach = members
            .iter()
            .map(|m| m.max_distance_from(&t.center))
            .try_fold(0.0, |acc: f64, x| -> Result<f64> { Ok(acc.max(x?)) })?;
        let mut radii: Vec<f64> = members
            .iter()
            .flat_map(|m| {
                m.support()
                    .iter()
                    .map(|p| m.space().distance_unchecked(&t.center, p))
            })
            .filter(|&d| d >= t.from_radius && d < reach)
            .collect();
        radii.push(t.from_radius);
        radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
        radii.dedup();
        for r in radii.into_iter().filter(|&r| r < reach) {
            defect = defect.max((sup_at(r)? - t.value).abs());
        }
    }
    Ok(defect)
}

/// The piecewise-linear function equal to `M` on `[0, 1 - 1/n]`, falling
/// linearly to `-M` at `1 - 1/(n+1)` and equal to `-M` after.
pub fn counterexample_point(m: f64, n: usize) -> Result<PwlFn> {
    if n == 0 {
        return Err(Error::InvalidParameter("members are indexed from 1".into()));
    }
    let nf = n as f64;
    let a = 1.0 - 1.0 / nf;
    let b = 1.0 - 1.0 / (nf + 1.0);
    if n == 1 {
        PwlFn::new(vec![0.0, b, 1.0], vec![m, -m, -m])
    } else {
        PwlFn::new(vec![0.0, a, b, 1.0], vec![m, m, -m, -m])
    }
}

/// Diracs at the functions of [`counterexample_point`] in `C[0,1]`.
pub fn counterexample_family(m: f64, horizon: usize) -> Result<MeasureFamily> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("M = {m} must be positive")));
    }
    if horizon < 2 {
        return Err(Error::InvalidParameter("horizon must be at least 2".into()));
    }
    let space = Arc::new(MetricSpace::C01Sup);
    let zero = Point::Pwl(PwlFn::zero());
    let certificates = Certificates {
        infinite: true,
        pairwise_separation: Some(2.0 * m),
        uniform_bound: Some(UniformBound {
            center: zero.clone(),
            radius: m,
            attained: true,
        }),
        constant_distance_to: Some(ConstantDistance {
            measure: DiscreteMeasure::dirac(space.clone(), zero.clone())?,
            value: m,
        }),
        tail_value: Some(TailValue {
            center: zero,
            value: 0.0,
            from_radius: m,
        }),
        mass_outside: None,
    };
    let s = space.clone();
    MeasureFamily::new(
        format!("counterexample(M={m})"),
        space,
        horizon,
        certificates,
        move |n| DiscreteMeasure::dirac(s.clone(), Point::Pwl(counterexample_point(m, n)?)),
    )
}

/// `P_n = (1 - 1/n) delta_0 + (1/n) delta_n` on the real line.
pub fn spike_family(horizon: usize) -> Result<MeasureFamily> {
    let space = Arc::new(MetricSpace::RealLine);
    let origin = Point::Real(0.0);
    let certificates = Certificates {
        infinite: true,
        pairwise_separation: None,
        uniform_bound: None,
        constant_distance_to: Some(ConstantDistance {
            measure: DiscreteMeasure::dirac(space.clone(), origin.clone())?,
            value: 1.0,
        }),
        tail_value: Some(TailValue {
            center: origin.clone(),
            value: 1.0,
            from_radius: 0.0,
        }),
        mass_outside: Some(MassOutside {
            center: origin,
            mass_coeff: 1.0,
            mass_exp: -1.0,
            dist_coeff: 1.0,
            dist_exp: 1.0,
            core_radius: 0.0,
        }),
    };
    let s = space.clone();
    MeasureFamily::new("spike", space, horizon, certificates, move |n| {
        if n == 0 {
            return Err(Error::InvalidParameter("members are indexed from 1".into()));
        }
        let nf = n as f64;
        DiscreteMeasure::new(
            s.clone(),
            vec![Point::Real(0.0), Point::Real(nf)],
            vec![1.0 - 1.0 / nf, 1.0 / nf],
            false,
        )
    })
}

/// Built-in point sequences on the real line.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "sequence", rename_all = "snake_case")]
pub enum DiracSequence {
    /// `y_n = center + scale / n`
    Harmonic { center: f64, scale: f64 },
    /// `y_n = start + slope * n`
    Linear { start: f64, slope: f64 },
    /// `y_n = value`
    Constant { value: f64 },
}

impl DiracSequence {
    pub fn point(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            DiracSequence::Harmonic { center, scale } => center + scale / nf,
            DiracSequence::Linear { start, slope } => start + slope * nf,
            DiracSequence::Constant { value } => value,
        }
    }

    /// The analytic facts that hold for the whole sequence.
    pub fn certificates(&self, space: &Arc<MetricSpace>) -> Result<Certificates> {
        let mut c = Certificates {
            infinite: true,
            ..Default::default()
        };
        match *self {
            DiracSequence::Harmonic { center, scale } => {
                // fl(center + scale / n) - center may exceed |scale| / n by a few ulps
                let radius = scale.abs() + 4.0 * f64::EPSILON * (center.abs() + scale.abs());
                c.uniform_bound = Some(UniformBound {
                    center: Point::Real(center),
                    radius,
                    attained: true,
                });
                c.tail_value = Some(TailValue {
                    center: Point::Real(center),
                    value: 0.0,
                    from_radius: radius,
                });
            }
            DiracSequence::Linear { slope, .. } => {
                if slope != 0.0 {
                    c.pairwise_separation = Some(slope.abs());
                }
            }
            DiracSequence::Constant { value } => {
                let y = Point::Real(value);
                c.uniform_bound = Some(UniformBound {
                    center: y.clone(),
                    radius: 0.0,
                    attained: true,
                });
                c.constant_distance_to = Some(ConstantDistance {
                    measure: DiscreteMeasure::dirac(space.clone(), y.clone())?,
                    value: 0.0,
                });
                c.tail_value = Some(TailValue {
                    center: y,
                    value: 0.0,
                    from_radius: 0.0,
                });
            }
        }
        Ok(c)
    }
}

/// `n -> delta_{y_n}` for a built-in sequence on the real line.
pub fn dirac_sequence_family(seq: DiracSequence, horizon: usize) -> Result<MeasureFamily> {
    let space = Arc::new(MetricSpace::RealLine);
    let certificates = seq.certificates(&space)?;
    let s = space.clone();
    let name = match seq {
        DiracSequence::Harmonic { .. } => "dirac_sequence(harmonic)",
        DiracSequence::Linear { .. } => "dirac_sequence(linear)",
        DiracSequence::Constant { .. } => "dirac_sequence(constant)",
    };
    MeasureFamily::new(name, space, horizon, certificates, move |n| {
        DiscreteMeasure::dirac(s.clone(), Point::Real(seq.point(n)))
    })
}

/// Diracs at explicit points, a finite family unless declared otherwise.
pub fn dirac_points_family(
    space: Arc<MetricSpace>,
    points: Vec<Point>,
    certificates: Certificates,
) -> Result<MeasureFamily> {
    let members = points
        .into_iter()
        .map(|p| DiscreteMeasure::dirac(space.clone(), p))
        .collect::<Result<Vec<_>>>()?;
    MeasureFamily::from_members("dirac_points", members, certificates)
}
