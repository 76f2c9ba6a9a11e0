//! Non-uniform integrability, tightness, and the comparison of the two
//! set functionals.
//!
//! The infimum over bounded sets is taken over closed balls around each
//! candidate center: every bounded set sits inside such a ball and tail
//! integrals only shrink as the set grows.

use rayon::prelude::*;
use serde::Serialize;

use crate::bracket::{Bound, Bracket, Evidence, Validity, BRACKET_TOL};
use crate::error::{Error, Result};
use crate::families::MeasureFamily;
use crate::measure::{weighted_median_of, DiscreteMeasure};
use crate::noncompactness::{mnc_bracket, MncOptions, MncResult};
use crate::space::{MetricSpace, Point};

/// Number of radii in the default schedule.
pub const SCHEDULE_LEN: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct CenterCurve {
    pub center: Point,
    /// `sup_n tail_integral(P_n, center, r)` for each scheduled `r`.
    pub sups: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UiEstimate {
    pub bracket: Bracket,
    pub center_used: Point,
    pub radius_schedule: Vec<f64>,
    /// Curve of `center_used`.
    pub per_radius_sups: Vec<f64>,
    pub curves: Vec<CenterCurve>,
    /// Smallest prefix sup at the last radius, over all centers.
    pub prefix_value: f64,
    pub prefix: usize,
}

/// Atoms of the first three members and the pooled weighted median.
pub fn default_centers(members: &[DiscreteMeasure]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    let mut push = |p: &Point| {
        if !out.iter().any(|q| q.same_as(p)) {
            out.push(p.clone());
        }
    };
    for m in members.iter().take(3) {
        for p in m.support() {
            push(p);
        }
    }
    if let Some(first) = members.first() {
        let n = members.len() as f64;
        let pooled = members
            .iter()
            .flat_map(|m| m.atoms().map(|(p, w)| (p.clone(), w / n)));
        if let Some(med) = weighted_median_of(first.space(), pooled) {
            push(&med);
        }
    }
    out
}

/// Geometric schedule from the median atom distance to four times the
/// largest one, measured from `center`.
pub fn default_schedule(members: &[DiscreteMeasure], center: &Point) -> Result<Vec<f64>> {
    let mut dists: Vec<f64> = Vec::new();
    for m in members {
        for p in m.support() {
            dists.push(m.space().distance(center, p)?);
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max = dists.last().copied().unwrap_or(0.0);
    if max == 0.0 {
        return Ok(vec![1.0]);
    }
    let median = dists[dists.len() / 2];
    let lo = if median > 0.0 { median } else { max * 1e-3 };
    let hi = 4.0 * max;
    let ratio = (hi / lo).powf(1.0 / (SCHEDULE_LEN - 1) as f64);
    let mut out: Vec<f64> = (0..SCHEDULE_LEN)
        .map(|i| lo * ratio.powi(i as i32))
        .collect();
    *out.last_mut().unwrap() = hi;
    out.dedup();
    Ok(out)
}

fn check_schedule(radii: &[f64]) -> Result<()> {
    if radii.is_empty()
        || radii.iter().any(|r| !(*r > 0.0 && r.is_finite()))
        || radii.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidParameter(
            "radius schedule must be increasing and positive".into(),
        ));
    }
    Ok(())
}

fn tail_curve(members: &[DiscreteMeasure], center: &Point, radii: &[f64]) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| {
            members
                .par_iter()
                .map(|m| m.tail_integral(center, r))
                .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
        })
        .collect()
}

/// Brackets `inf_a inf_B sup_n integral over S \ B of d(a, .) dP_n`.
///
/// `radii` defaults to [`default_schedule`] around the first center and
/// `horizon` to the family's own.
pub fn mu_ui(
    family: &MeasureFamily,
    centers: &[Point],
    radii: Option<Vec<f64>>,
    horizon: Option<usize>,
) -> Result<UiEstimate> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("center list is empty".into()));
    }
    let family = match horizon {
        Some(h) => family.with_horizon(h)?,
        None => family.clone(),
    };
    let members = family.members()?;
    family.audit_members(&members)?;
    for c in centers {
        family.space().check_point(c)?;
    }
    let radii = match radii {
        Some(r) => r,
        None => default_schedule(&members, &centers[0])?,
    };
    check_schedule(&radii)?;
    let curves = centers
        .iter()
        .map(|c| {
            Ok(CenterCurve {
                center: c.clone(),
                sups: tail_curve(&members, c, &radii)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = curves
        .iter()
        .min_by(|a, b| {
            a.sups
                .last()
                .unwrap()
                .partial_cmp(b.sups.last().unwrap())
                .unwrap()
        })
        .unwrap();
    let prefix_value = *best.sups.last().unwrap();
    let last_radius = *radii.last().unwrap();
    let prefix_tail = Bound::new(
        prefix_value,
        Validity::Certified,
        Evidence::PrefixTail {
            center: best.center.clone(),
            radius: last_radius,
            sup: prefix_value,
        },
    );

    let c = family.certificates();
    let (lower, upper) = if !family.is_infinite() {
        (Bound::trivial_lower(), prefix_tail)
    } else if let Some(t) = &c.tail_value {
        // a shift of center by delta changes tails by at most delta times a
        // tail mass that vanishes as r grows, so the limit is center-free
        let ev = Evidence::TailValue {
            center: t.center.clone(),
            value: t.value,
            from_radius: t.from_radius,
        };
        (
            Bound::new(t.value, Validity::Certified, ev.clone()),
            Bound::new(t.value, Validity::Certified, ev),
        )
    } else if let Some(ub) = &c.uniform_bound {
        let ev = Evidence::UniformBound {
            center: ub.center.clone(),
            radius: ub.radius,
        };
        (
            Bound::trivial_lower(),
            Bound::new(0.0, Validity::Certified, ev),
        )
    } else {
        (Bound::trivial_lower(), Bound::trivial_upper())
    };
    Ok(UiEstimate {
        bracket: Bracket::new(lower, upper)?,
        center_used: best.center.clone(),
        per_radius_sups: best.sups.clone(),
        radius_schedule: radii,
        curves,
        prefix_value,
        prefix: members.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct UiVerdict {
    pub verdict: Verdict,
    /// `(a, r)` with `sup_n tail_integral(P_n, a, r) < eps`, for `Yes`.
    pub witness: Option<(Point, f64)>,
    pub certified_value: Option<f64>,
}

pub fn is_uniformly_integrable(
    family: &MeasureFamily,
    eps: f64,
    horizon: Option<usize>,
) -> Result<UiVerdict> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps {eps} must be positive"
        )));
    }
    let family = match horizon {
        Some(h) => family.with_horizon(h)?,
        None => family.clone(),
    };
    let members = family.members()?;
    family.audit_members(&members)?;
    let c = family.certificates();
    if family.is_infinite() {
        if let Some(t) = &c.tail_value {
            return Ok(if t.value < eps {
                UiVerdict {
                    verdict: Verdict::Yes,
                    witness: Some((t.center.clone(), t.from_radius)),
                    certified_value: Some(t.value),
                }
            } else {
                UiVerdict {
                    verdict: Verdict::No,
                    witness: None,
                    certified_value: Some(t.value),
                }
            });
        }
        if let Some(ub) = &c.uniform_bound {
            return Ok(UiVerdict {
                verdict: Verdict::Yes,
                witness: Some((ub.center.clone(), ub.radius)),
                certified_value: Some(0.0),
            });
        }
        return Ok(UiVerdict {
            verdict: Verdict::Unknown,
            witness: None,
            certified_value: None,
        });
    }
    let centers = default_centers(&members);
    let est = mu_ui(&family, &centers, None, None)?;
    for curve in &est.curves {
        if let Some(i) = curve.sups.iter().position(|&s| s < eps) {
            return Ok(UiVerdict {
                verdict: Verdict::Yes,
                witness: Some((curve.center.clone(), est.radius_schedule[i])),
                certified_value: Some(0.0),
            });
        }
    }
    Ok(UiVerdict {
        verdict: Verdict::Unknown,
        witness: None,
        certified_value: Some(0.0),
    })
}

/// Candidate compact set for a tightness check.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactSet {
    /// A closed ball; compact only where closed balls are.
    Ball { center: Point, radius: f64 },
    /// Closed `radius`-neighbourhood of finitely many points; compact when
    /// `radius` is zero or closed balls are compact.
    FinitePoints { points: Vec<Point>, radius: f64 },
}

impl CompactSet {
    pub fn is_compact(&self, space: &MetricSpace) -> bool {
        match self {
            CompactSet::Ball { .. } => space.balls_are_compact(),
            CompactSet::FinitePoints { radius, .. } => *radius == 0.0 || space.balls_are_compact(),
        }
    }

    pub fn contains(&self, space: &MetricSpace, x: &Point) -> Result<bool> {
        match self {
            CompactSet::Ball { center, radius } => Ok(space.distance(center, x)? <= *radius),
            CompactSet::FinitePoints { points, radius } => {
                for p in points {
                    if space.distance(p, x)? <= *radius {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Whether `B*(c, r)` lies inside the set, by the triangle inequality.
    fn contains_ball(&self, space: &MetricSpace, c: &Point, r: f64) -> Result<bool> {
        match self {
            CompactSet::Ball { center, radius } => Ok(space.distance(center, c)? + r <= *radius),
            CompactSet::FinitePoints { points, radius } => {
                for p in points {
                    if space.distance(p, c)? + r <= *radius {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn mass_outside(&self, space: &MetricSpace, p: &DiscreteMeasure) -> Result<f64> {
        let mut out = 0.0;
        for (x, w) in p.atoms() {
            if !self.contains(space, x)? {
                out += w;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TightnessVerdict {
    /// Every member, enumerated or not, leaves less than `eps` outside K.
    Certified,
    /// The prefix passes; nothing is known past the horizon.
    PrefixOnly,
    /// Some enumerated member leaves at least `eps` outside K.
    Fails,
    /// The prefix passes but K is bounded, not compact.
    BoundedOnly,
}

#[derive(Clone, Debug, Serialize)]
pub struct TightnessReport {
    pub verdict: TightnessVerdict,
    pub worst_member_mass_outside: f64,
    pub worst_member: usize,
    /// Certified bound on the mass outside K for members past the horizon.
    pub beyond_prefix_bound: Option<f64>,
    pub compact: bool,
}

pub fn tightness_check(
    family: &MeasureFamily,
    eps: f64,
    k: &CompactSet,
    horizon: Option<usize>,
) -> Result<TightnessReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps {eps} must be positive"
        )));
    }
    let family = match horizon {
        Some(h) => family.with_horizon(h)?,
        None => family.clone(),
    };
    let space = family.space().clone();
    let members = family.members()?;
    family.audit_members(&members)?;
    let masses = members
        .par_iter()
        .map(|m| k.mass_outside(&space, m))
        .collect::<Result<Vec<f64>>>()?;
    let (worst_member, worst) =
        masses.iter().enumerate().fold(
            (1, 0.0),
            |acc, (i, &m)| if m > acc.1 { (i + 1, m) } else { acc },
        );
    let compact = k.is_compact(&space);
    let mut report = TightnessReport {
        verdict: TightnessVerdict::PrefixOnly,
        worst_member_mass_outside: worst,
        worst_member,
        beyond_prefix_bound: None,
        compact,
    };
    if worst >= eps {
        report.verdict = TightnessVerdict::Fails;
        return Ok(report);
    }
    if !compact {
        report.verdict = TightnessVerdict::BoundedOnly;
        return Ok(report);
    }
    if !family.is_infinite() {
        report.verdict = TightnessVerdict::Certified;
        return Ok(report);
    }
    let c = family.certificates();
    let mut beyond: Option<f64> = None;
    if let Some(ub) = &c.uniform_bound {
        if k.contains_ball(&space, &ub.center, ub.radius)? {
            beyond = Some(0.0);
        }
    }
    if beyond.is_none() {
        if let Some(mo) = &c.mass_outside {
            if k.contains_ball(&space, &mo.center, mo.core_radius)? {
                beyond = mo.sup_mass_beyond(members.len());
            }
        }
    }
    report.beyond_prefix_bound = beyond;
    report.verdict = match beyond {
        Some(b) if b < eps => TightnessVerdict::Certified,
        Some(_) => TightnessVerdict::Fails,
        None => TightnessVerdict::PrefixOnly,
    };
    Ok(report)
}

/// A compact set that certifies tightness at level `eps` from the
/// family's certificates, if they provide one.
pub fn certified_compact_set(family: &MeasureFamily, eps: f64) -> Option<(CompactSet, usize)> {
    let space = family.space();
    if !space.balls_are_compact() {
        return None;
    }
    let c = family.certificates();
    if let Some(ub) = &c.uniform_bound {
        return Some((
            CompactSet::Ball {
                center: ub.center.clone(),
                radius: ub.radius,
            },
            family.horizon(),
        ));
    }
    let mo = c.mass_outside.as_ref()?;
    if mo.mass_exp >= 0.0 || mo.mass_coeff <= 0.0 || mo.dist_exp < 0.0 {
        return None;
    }
    // first index whose escaping mass is below eps; earlier members fit inside
    let n_eps = ((mo.mass_coeff / eps).powf(-1.0 / mo.mass_exp)).floor() as usize + 1;
    let horizon = family.horizon().max(n_eps);
    let radius = mo.core_radius.max(mo.distance(horizon));
    Some((
        CompactSet::Ball {
            center: mo.center.clone(),
            radius,
        },
        horizon,
    ))
}

#[derive(Clone, Debug)]
pub struct Theorem46Options {
    pub mnc: MncOptions,
    pub centers: Vec<Point>,
    /// Levels at which tightness is checked.
    pub tightness_eps: Vec<f64>,
}

impl Default for Theorem46Options {
    fn default() -> Self {
        Self {
            mnc: MncOptions::default(),
            centers: vec![],
            tightness_eps: vec![0.1, 0.01],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem46Report {
    pub ui: UiEstimate,
    pub mnc: MncResult,
    pub tightness: Vec<(f64, TightnessReport)>,
    pub tight: bool,
    /// `ui.lower <= certified mnc upper`
    pub inequality_holds: bool,
    /// `ui.upper <= mnc.upper`, checked when both uppers are certified.
    pub upper_order_holds: Option<bool>,
    /// Bracket overlap, checked when tightness is certified.
    pub equality_holds: Option<bool>,
    /// `mnc.lower - ui.upper`, a certified strict gap when positive.
    pub certified_gap: f64,
    pub passed: bool,
}

pub fn verify_theorem46(
    family: &MeasureFamily,
    options: &Theorem46Options,
) -> Result<Theorem46Report> {
    let members = family.members()?;
    let centers = if options.centers.is_empty() {
        default_centers(&members)
    } else {
        options.centers.clone()
    };
    let ui = mu_ui(family, &centers, None, None)?;
    let mnc = mnc_bracket(family, &options.mnc)?;

    let mut tightness = Vec::new();
    let mut tight = !options.tightness_eps.is_empty();
    for &eps in &options.tightness_eps {
        let candidate = if family.is_infinite() {
            certified_compact_set(family, eps)
        } else {
            // the atoms of finitely many members form a finite set
            let mut points: Vec<Point> = Vec::new();
            for m in &members {
                for p in m.support() {
                    if !points.iter().any(|q| q.same_as(p)) {
                        points.push(p.clone());
                    }
                }
            }
            Some((
                CompactSet::FinitePoints {
                    points,
                    radius: 0.0,
                },
                family.horizon(),
            ))
        };
        match candidate {
            Some((k, horizon)) => {
                let h = family.is_infinite().then_some(horizon);
                let report = tightness_check(family, eps, &k, h)?;
                tight &= report.verdict == TightnessVerdict::Certified;
                tightness.push((eps, report));
            }
            None => tight = false,
        }
    }

    let inequality_holds = ui.bracket.lower <= mnc.bracket.certified_upper() + BRACKET_TOL;
    let upper_order_holds = (ui.bracket.upper_certificate.validity == Validity::Certified
        && mnc.bracket.upper_certificate.validity == Validity::Certified)
        .then(|| ui.bracket.upper <= mnc.bracket.upper + BRACKET_TOL);
    let equality_holds = tight.then(|| {
        ui.bracket.lower.max(mnc.bracket.lower)
            <= ui.bracket.upper.min(mnc.bracket.upper) + BRACKET_TOL
    });
    let passed =
        inequality_holds && upper_order_holds.unwrap_or(true) && equality_holds.unwrap_or(true);
    Ok(Theorem46Report {
        certified_gap: mnc.bracket.certified_lower() - ui.bracket.upper,
        ui,
        mnc,
        tightness,
        tight,
        inequality_holds,
        upper_order_holds,
        equality_holds,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::families::{
        counterexample_family, dirac_sequence_family, spike_family, Certificates, DiracSequence,
    };

    #[test]
    fn counterexample_is_uniformly_integrable() {
        let fam = counterexample_family(1.0, 50).unwrap();
        let est = mu_ui(&fam, &[Point::Pwl(crate::space::PwlFn::zero())], None, None).unwrap();
        assert_eq!((est.bracket.lower, est.bracket.upper), (0.0, 0.0));
        assert_eq!(
            is_uniformly_integrable(&fam, 0.1, None).unwrap().verdict,
            Verdict::Yes
        );
    }

    #[test]
    fn spike_is_not() {
        let fam = spike_family(100).unwrap();
        let est = mu_ui(&fam, &[Point::Real(0.0)], None, None).unwrap();
        assert!((est.bracket.lower - 1.0).abs() < 1e-12 && (est.bracket.upper - 1.0).abs() < 1e-12);
        assert!(est.per_radius_sups.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(
            is_uniformly_integrable(&fam, 0.5, None).unwrap().verdict,
            Verdict::No
        );
    }

    #[test]
    fn linear_dirac_sequence_has_unbounded_tails() {
        let fam = dirac_sequence_family(
            DiracSequence::Linear {
                start: 0.0,
                slope: 1.0,
            },
            30,
        )
        .unwrap();
        let est = mu_ui(&fam, &[Point::Real(0.0)], None, None).unwrap();
        assert_eq!(est.bracket.upper, f64::INFINITY);
        assert_eq!(
            is_uniformly_integrable(&fam, 1e-6, None).unwrap().verdict,
            Verdict::Unknown
        );
    }

    #[test]
    fn finite_family_vanishes() {
        let s = Arc::new(MetricSpace::RealLine);
        let members = vec![
            DiscreteMeasure::new(
                s.clone(),
                vec![Point::Real(0.0), Point::Real(4.0)],
                vec![0.5, 0.5],
                false,
            )
            .unwrap(),
            DiscreteMeasure::dirac(s.clone(), Point::Real(-3.0)).unwrap(),
        ];
        let fam = MeasureFamily::from_members("pair", members, Certificates::default()).unwrap();
        let est = mu_ui(&fam, &[Point::Real(1.0)], None, None).unwrap();
        assert_eq!((est.bracket.lower, est.bracket.upper), (0.0, 0.0));
        let report = verify_theorem46(&fam, &Theorem46Options::default()).unwrap();
        assert!(report.passed && report.tight);
    }

    #[test]
    fn spike_tightness() {
        let fam = spike_family(100).unwrap();
        let k = CompactSet::Ball {
            center: Point::Real(50.0),
            radius: 50.0,
        };
        let r = tightness_check(&fam, 0.01, &k, None).unwrap();
        assert_eq!(r.verdict, TightnessVerdict::Certified);
        assert_eq!(r.beyond_prefix_bound, Some(1.0 / 101.0));
    }

    #[test]
    fn counterexample_is_bounded_but_not_tight() {
        let fam = counterexample_family(1.0, 20).unwrap();
        let k = CompactSet::Ball {
            center: Point::Pwl(crate::space::PwlFn::zero()),
            radius: 1.0,
        };
        let r = tightness_check(&fam, 0.01, &k, None).unwrap();
        assert_eq!(r.verdict, TightnessVerdict::BoundedOnly);
        assert_eq!(r.worst_member_mass_outside, 0.0);
    }

    #[test]
    fn verify_brackets_on_builtins() {
        let spike =
            verify_theorem46(&spike_family(100).unwrap(), &Theorem46Options::default()).unwrap();
        assert!(spike.passed && spike.tight);
        assert_eq!(spike.equality_holds, Some(true));
        let ce = verify_theorem46(
            &counterexample_family(2.0, 20).unwrap(),
            &Theorem46Options::default(),
        )
        .unwrap();
        assert!(ce.passed && !ce.tight);
        assert!((ce.certified_gap - 2.0).abs() < 1e-12);
    }
}
