//! Brackets for the Hausdorff measure of non-compactness of a family of
//! measures under W1.
//!
//! Upper bounds come from covering radii against explicit finite center
//! sets, lower bounds from packing and escaping-Dirac arguments. Anything
//! that speaks about members past the horizon uses a family certificate.

use rayon::prelude::*;
use serde::Serialize;

use crate::bracket::{best_lower, best_upper, Bound, Bracket, Evidence, Validity};
use crate::error::{Error, Result};
use crate::families::{min_pairwise_distance, CertificateAudit, MeasureFamily, CERT_TOL};
use crate::integrability::{default_centers, mu_ui};
use crate::measure::{weighted_median_of, DiscreteMeasure};
use crate::space::{Ball, Point};
use crate::wasserstein::{w1, Method};

/// Largest number of subsets the exact k-center search will enumerate.
pub const EXACT_LIMIT: u128 = 200_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverMode {
    #[default]
    Exact,
    Greedy,
}

impl std::str::FromStr for CoverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CoverMode::Exact),
            "greedy" => Ok(CoverMode::Greedy),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

/// `d[i][j] = W(gamma_i, centers_j)`.
pub fn distance_matrix(
    gamma: &[DiscreteMeasure],
    centers: &[DiscreteMeasure],
) -> Result<Vec<Vec<f64>>> {
    gamma
        .par_iter()
        .map(|p| centers.iter().map(|q| w1(p, q, Method::Auto)).collect())
        .collect()
}

fn radius_of(d: &[Vec<f64>], chosen: &[usize]) -> f64 {
    d.iter()
        .map(|row| chosen.iter().map(|&j| row[j]).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct Covering {
    pub radius: f64,
    /// Index of the nearest center for each member.
    pub assignment: Vec<usize>,
}

/// `max_{P in gamma} min_{Q in centers} W(P, Q)`.
pub fn covering_radius(gamma: &[DiscreteMeasure], centers: &[DiscreteMeasure]) -> Result<Covering> {
    if centers.is_empty() {
        return Err(Error::InvalidParameter("center set is empty".into()));
    }
    let d = distance_matrix(gamma, centers)?;
    let assignment = d
        .iter()
        .map(|row| {
            (0..row.len())
                .min_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap())
                .unwrap()
        })
        .collect();
    Ok(Covering {
        radius: radius_of(&d, &(0..centers.len()).collect::<Vec<_>>()),
        assignment,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KCenter {
    pub radius: f64,
    /// Indices into the pool.
    pub chosen: Vec<usize>,
    pub k_requested: usize,
    /// `k` clamped to the pool size.
    pub k_used: usize,
    pub mode_requested: CoverMode,
    pub mode_used: CoverMode,
    pub subsets_enumerated: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| {
        acc.saturating_mul((n - i) as u128) / (i as u128 + 1)
    })
}

fn exact_centers(d: &[Vec<f64>], pool: usize, k: usize) -> (f64, Vec<usize>, u64) {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = (f64::INFINITY, idx.clone());
    let mut count = 0u64;
    loop {
        count += 1;
        let r = radius_of(d, &idx);
        if r < best.0 {
            best = (r, idx.clone());
        }
        // next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| idx[i] < pool - k + i) else {
            break;
        };
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    (best.0, best.1, count)
}

/// Farthest-first traversal from `seed`: each step adds the pool element
/// nearest to the member currently worst covered.
fn farthest_first(d: &[Vec<f64>], k: usize, seed: usize) -> Vec<usize> {
    let mut chosen = vec![seed];
    let mut cover: Vec<f64> = d.iter().map(|row| row[seed]).collect();
    while chosen.len() < k {
        let (far, &r) = cover
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if r == 0.0 {
            break;
        }
        let row = &d[far];
        let next = (0..row.len())
            .filter(|j| !chosen.contains(j))
            .min_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap());
        let Some(next) = next else { break };
        chosen.push(next);
        for (c, row) in cover.iter_mut().zip(d) {
            *c = c.min(row[next]);
        }
    }
    chosen
}

fn greedy_centers(
    d: &[Vec<f64>],
    pool: usize,
    k: usize,
    member_in_pool: Option<usize>,
) -> (f64, Vec<usize>) {
    // pool element with the smallest worst-case distance
    let one_center = (0..pool)
        .min_by(|&a, &b| {
            let ra = d.iter().map(|row| row[a]).fold(0.0, f64::max);
            let rb = d.iter().map(|row| row[b]).fold(0.0, f64::max);
            ra.partial_cmp(&rb).unwrap()
        })
        .unwrap();
    let mut best = farthest_first(d, k, one_center);
    let mut best_r = radius_of(d, &best);
    // seeding at a member keeps the factor-2 guarantee when the pool contains the family
    if let Some(seed) = member_in_pool {
        let alt = farthest_first(d, k, seed);
        let r = radius_of(d, &alt);
        if r < best_r {
            best = alt;
            best_r = r;
        }
    }
    (best_r, best)
}

/// Best covering radius of `gamma` by at most `k` pool elements.
pub fn rho_k(
    gamma: &[DiscreteMeasure],
    k: usize,
    pool: &[DiscreteMeasure],
    mode: CoverMode,
) -> Result<KCenter> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if pool.is_empty() || gamma.is_empty() {
        return Err(Error::InvalidParameter(
            "family and pool must be nonempty".into(),
        ));
    }
    let d = distance_matrix(gamma, pool)?;
    let k_used = k.min(pool.len());
    let mut result = KCenter {
        radius: 0.0,
        chosen: vec![],
        k_requested: k,
        k_used,
        mode_requested: mode,
        mode_used: mode,
        subsets_enumerated: 0,
    };
    if mode == CoverMode::Exact && binomial(pool.len(), k_used) <= EXACT_LIMIT {
        let (r, chosen, count) = exact_centers(&d, pool.len(), k_used);
        result.radius = r;
        result.chosen = chosen;
        result.subsets_enumerated = count;
    } else {
        let seed = pool.iter().position(|q| q.same_as(&gamma[0]));
        let (r, chosen) = greedy_centers(&d, pool.len(), k_used, seed);
        result.radius = r;
        result.chosen = chosen;
        result.mode_used = CoverMode::Greedy;
    }
    Ok(result)
}

/// Family members, extra centers, and Diracs at coordinatewise weighted
/// medians (of each member and of the pooled atoms), without duplicates.
pub fn default_pool(
    members: &[DiscreteMeasure],
    extra: &[DiscreteMeasure],
) -> Result<Vec<DiscreteMeasure>> {
    let mut pool: Vec<DiscreteMeasure> = Vec::new();
    let mut push = |m: DiscreteMeasure| {
        if !pool.iter().any(|q| q.same_as(&m)) {
            pool.push(m);
        }
    };
    for m in members.iter().chain(extra) {
        push(m.clone());
    }
    if let Some(first) = members.first() {
        let space = first.space().clone();
        let mut medians: Vec<Point> = members.iter().filter_map(|m| m.weighted_median()).collect();
        let n = members.len() as f64;
        if let Some(pooled) = weighted_median_of(
            &space,
            members
                .iter()
                .flat_map(|m| m.atoms().map(|(p, w)| (p.clone(), w / n))),
        ) {
            medians.push(pooled);
        }
        for x in medians {
            push(DiscreteMeasure::dirac(space.clone(), x)?);
        }
    }
    Ok(pool)
}

/// `delta / 2` from infinitely many members pairwise `delta` apart.
pub fn packing_lower_bound(
    family: &MeasureFamily,
    separated: &[usize],
    delta: f64,
) -> Result<Bound> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "separation {delta} must be positive"
        )));
    }
    let declared = family.certificates().pairwise_separation;
    if !family.is_infinite() || declared.map_or(true, |d| d < delta - CERT_TOL) {
        return Err(Error::CertificateRejected(format!(
            "{}: no infinite-family separation certificate covering {delta}",
            family.name()
        )));
    }
    let members = separated
        .iter()
        .map(|&n| family.member(n))
        .collect::<Result<Vec<_>>>()?;
    let (min_pair, pairs) = min_pairwise_distance(&members)?;
    if pairs > 0 && min_pair < delta - CERT_TOL {
        return Err(Error::CertificateRejected(format!(
            "{}: members only {min_pair} apart, separation {delta} claimed",
            family.name()
        )));
    }
    Ok(Bound::new(
        delta / 2.0,
        Validity::Certified,
        Evidence::Packing {
            delta,
            pairs_checked: pairs,
            min_pair,
        },
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct DiracEscapeBound {
    pub bound: Bound,
    /// `M`, the supremum of the bound over `eps`.
    pub analytic_sup: f64,
    pub n0: usize,
    /// `min_Q W(Q, delta_{x_n0})`, which exceeds `M - eps`.
    pub nearest_center_distance: f64,
}

/// Against a challenge center set, finds a Dirac member whose ball
/// `B(x_n0, M)` carries less than `eps / M` of every center's mass, so
/// that every center is more than `M - eps` away from it.
pub fn dirac_escape_lower_bound(
    family: &MeasureFamily,
    m: f64,
    eps: f64,
    challenge: &[DiscreteMeasure],
) -> Result<DiracEscapeBound> {
    if !(m > 0.0 && eps > 0.0 && eps <= m) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps <= M, got M = {m}, eps = {eps}"
        )));
    }
    let declared = family.certificates().pairwise_separation;
    if !family.is_infinite() || declared.map_or(true, |d| d < 2.0 * m - CERT_TOL) {
        return Err(Error::CertificateRejected(format!(
            "{}: escape bound needs an infinite family with separation 2M = {}",
            family.name(),
            2.0 * m
        )));
    }
    let members = family.members()?;
    let locations = members
        .iter()
        .map(|p| p.is_dirac().then(|| p.support()[0].clone()))
        .collect::<Option<Vec<Point>>>()
        .ok_or_else(|| {
            Error::CertificateRejected(format!("{}: members are not Dirac measures", family.name()))
        })?;
    let space = family.space();
    for i in 0..locations.len() {
        for j in (i + 1)..locations.len() {
            let d = space.distance(&locations[i], &locations[j])?;
            if d < 2.0 * m - CERT_TOL {
                return Err(Error::CertificateRejected(format!(
                    "{}: balls around members {} and {} overlap (distance {d})",
                    family.name(),
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    for q in challenge {
        if !q.same_space(&members[0]) {
            return Err(Error::SpaceMismatch);
        }
    }
    let threshold = eps / m;
    for (i, x) in locations.iter().enumerate() {
        let ball = Ball::open(x.clone(), m)?;
        let masses = challenge
            .iter()
            .map(|q| q.mass_in_ball(&ball))
            .collect::<Result<Vec<f64>>>()?;
        let max_mass = masses.iter().copied().fold(0.0, f64::max);
        if max_mass < threshold {
            let nearest = challenge
                .iter()
                .map(|q| q.first_moment(x))
                .try_fold(f64::INFINITY, |acc: f64, d| -> Result<f64> {
                    Ok(acc.min(d?))
                })?;
            return Ok(DiracEscapeBound {
                bound: Bound::new(
                    m - eps,
                    Validity::Challenge,
                    Evidence::DiracEscape {
                        m,
                        eps,
                        n0: Some(i + 1),
                        challenge_size: challenge.len(),
                        max_ball_mass: max_mass,
                    },
                ),
                analytic_sup: m,
                n0: i + 1,
                nearest_center_distance: nearest,
            });
        }
    }
    Err(Error::HorizonInsufficient {
        horizon: family.horizon(),
    })
}

#[derive(Clone, Debug)]
pub struct MncOptions {
    pub k: usize,
    pub mode: CoverMode,
    /// Extra candidate centers, also used as the escape challenge.
    pub centers: Vec<DiscreteMeasure>,
    /// Slack of the escape bound, as a fraction of `M` when `None`.
    pub eps: Option<f64>,
    /// Import the certified lower bound of the integrability bracket.
    pub use_ui_lower: bool,
}

impl Default for MncOptions {
    fn default() -> Self {
        Self {
            k: 2,
            mode: CoverMode::Exact,
            centers: vec![],
            eps: None,
            use_ui_lower: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MncResult {
    pub bracket: Bracket,
    /// Covering by pool elements over the prefix.
    pub prefix_cover: KCenter,
    /// The chosen pool elements.
    pub prefix_centers: Vec<DiscreteMeasure>,
    pub pool_size: usize,
    pub escape: Option<DiracEscapeBound>,
    /// Center set the escape bound was proved against.
    pub challenge: Vec<DiscreteMeasure>,
    pub audit: CertificateAudit,
}

pub fn mnc_bracket(family: &MeasureFamily, options: &MncOptions) -> Result<MncResult> {
    let members = family.members()?;
    let audit = family.audit_members(&members)?;
    let pool = default_pool(&members, &options.centers)?;
    let prefix_cover = rho_k(&members, options.k, &pool, options.mode)?;
    let prefix_centers: Vec<DiscreteMeasure> = prefix_cover
        .chosen
        .iter()
        .map(|&j| pool[j].clone())
        .collect();
    let prefix_bound = Bound::new(
        prefix_cover.radius,
        if family.is_infinite() {
            Validity::PrefixValid
        } else {
            Validity::Certified
        },
        Evidence::CoveringRadius {
            centers: prefix_cover.chosen.len(),
            prefix: members.len(),
            mode: format!("{:?}", prefix_cover.mode_used).to_lowercase(),
            radius: prefix_cover.radius,
        },
    );

    if !family.is_infinite() {
        // the family covers itself
        let upper = Bound::new(
            0.0,
            Validity::Certified,
            Evidence::FiniteFamily {
                members: members.len(),
            },
        );
        return Ok(MncResult {
            bracket: Bracket::new(Bound::trivial_lower(), upper)?,
            prefix_cover,
            prefix_centers,
            pool_size: pool.len(),
            escape: None,
            challenge: vec![],
            audit,
        });
    }

    let c = family.certificates();
    let mut uppers = Vec::new();
    if let Some(cd) = &c.constant_distance_to {
        uppers.push(Bound::new(
            cd.value,
            Validity::Certified,
            Evidence::ConstantDistance { value: cd.value },
        ));
    }
    if let Some(ub) = &c.uniform_bound {
        uppers.push(Bound::new(
            ub.radius,
            Validity::Certified,
            Evidence::UniformBound {
                center: ub.center.clone(),
                radius: ub.radius,
            },
        ));
    }
    let upper = if uppers.is_empty() {
        prefix_bound
    } else {
        best_upper(uppers)
    };

    let mut lowers = Vec::new();
    let mut escape = None;
    let challenge: Vec<DiscreteMeasure> = prefix_centers
        .iter()
        .chain(&options.centers)
        .cloned()
        .collect();
    if let Some(delta) = c.pairwise_separation {
        let all: Vec<usize> = (1..=members.len()).collect();
        lowers.push(packing_lower_bound(family, &all, delta)?);
        let m = delta / 2.0;
        let eps = options.eps.unwrap_or(0.1 * m).min(m);
        match dirac_escape_lower_bound(family, m, eps, &challenge) {
            Ok(e) => {
                lowers.push(e.bound.clone());
                escape = Some(e);
            }
            Err(Error::CertificateRejected(_) | Error::HorizonInsufficient { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    if options.use_ui_lower {
        let centers = default_centers(&members);
        let ui = mu_ui(family, &centers, None, None)?;
        if ui.bracket.lower_certificate.validity == Validity::Certified && ui.bracket.lower > 0.0 {
            lowers.push(Bound::new(
                ui.bracket.lower,
                Validity::Certified,
                Evidence::UniformIntegrability {
                    value: ui.bracket.lower,
                },
            ));
        }
    }
    let lower = best_lower(lowers);
    Ok(MncResult {
        bracket: Bracket::new(lower, upper)?,
        prefix_cover,
        prefix_centers,
        pool_size: pool.len(),
        escape,
        challenge,
        audit,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Replay {
    pub upper_value: f64,
    pub upper_ok: bool,
    pub lower_value: f64,
    pub lower_ok: bool,
}

impl Replay {
    pub fn ok(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

fn replay_bound(
    family: &MeasureFamily,
    result: &MncResult,
    bound: &Bound,
    members: &[DiscreteMeasure],
) -> Result<(f64, bool)> {
    let c = family.certificates();
    Ok(match &bound.evidence {
        Evidence::Trivial => (bound.value, true),
        Evidence::FiniteFamily { .. } => {
            let r = covering_radius(members, members)?.radius;
            (r, r <= CERT_TOL)
        }
        Evidence::CoveringRadius { .. } => {
            let r = covering_radius(members, &result.prefix_centers)?.radius;
            (r, (r - bound.value).abs() <= CERT_TOL)
        }
        Evidence::ConstantDistance { value } => {
            let cd = c.constant_distance_to.as_ref().ok_or_else(|| {
                Error::CertificateRejected("constant distance certificate missing".into())
            })?;
            let r = covering_radius(members, std::slice::from_ref(&cd.measure))?.radius;
            (r, (r - value).abs() <= CERT_TOL)
        }
        Evidence::UniformBound { center, radius } => {
            let q = DiscreteMeasure::dirac(family.space().clone(), center.clone())?;
            let r = covering_radius(members, std::slice::from_ref(&q))?.radius;
            (r, r <= radius + CERT_TOL)
        }
        Evidence::Packing { delta, .. } => {
            let (min, _) = min_pairwise_distance(members)?;
            (min / 2.0, min >= delta - CERT_TOL)
        }
        Evidence::DiracEscape { m, eps, n0, .. } => {
            let e = result
                .escape
                .as_ref()
                .ok_or_else(|| Error::CertificateRejected("escape record missing".into()))?;
            let n0 = n0.unwrap_or(e.n0);
            let x = family
                .dirac_location(n0)?
                .ok_or_else(|| Error::CertificateRejected("escape member is not a Dirac".into()))?;
            let ball = Ball::open(x.clone(), *m)?;
            let mut ok = true;
            let mut nearest = f64::INFINITY;
            for q in &result.challenge {
                ok &= q.mass_in_ball(&ball)? < eps / m;
                nearest = nearest.min(q.first_moment(&x)?);
            }
            (m - eps, ok && nearest > m - eps)
        }
        Evidence::UniformIntegrability { value } => {
            let centers = default_centers(members);
            let ui = mu_ui(family, &centers, None, None)?;
            (
                ui.bracket.lower,
                (ui.bracket.lower - value).abs() <= CERT_TOL,
            )
        }
        Evidence::TailValue { .. } | Evidence::PrefixTail { .. } => (bound.value, false),
    })
}

/// Recomputes both certificates of an `mnc_bracket` result from scratch.
pub fn replay(family: &MeasureFamily, result: &MncResult) -> Result<Replay> {
    let members = family.members()?;
    let (upper_value, upper_ok) =
        replay_bound(family, result, &result.bracket.upper_certificate, &members)?;
    let (lower_value, lower_ok) =
        replay_bound(family, result, &result.bracket.lower_certificate, &members)?;
    Ok(Replay {
        upper_value,
        upper_ok,
        lower_value,
        lower_ok,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::families::{counterexample_family, spike_family, Certificates};
    use crate::space::MetricSpace;

    fn diracs(xs: &[f64]) -> Vec<DiscreteMeasure> {
        let s = Arc::new(MetricSpace::RealLine);
        xs.iter()
            .map(|&x| DiscreteMeasure::dirac(s.clone(), Point::Real(x)).unwrap())
            .collect()
    }

    #[test]
    fn covering_by_midpoint() {
        let g = diracs(&[0.0, 2.0]);
        assert_eq!(covering_radius(&g, &diracs(&[1.0])).unwrap().radius, 1.0);
        assert_eq!(covering_radius(&g, &g).unwrap().radius, 0.0);
    }

    #[test]
    fn k_center_exact() {
        let g = diracs(&[0.0, 1.0, 10.0]);
        let r = rho_k(&g, 2, &g, CoverMode::Exact).unwrap();
        assert_eq!(r.radius, 1.0);
        let mut pool = g.clone();
        pool.extend(diracs(&[0.5]));
        let r = rho_k(&g, 2, &pool, CoverMode::Exact).unwrap();
        assert_eq!(r.radius, 0.5);
        assert_eq!(rho_k(&g, 5, &g, CoverMode::Exact).unwrap().k_used, 3);
        assert_eq!(rho_k(&g, 3, &g, CoverMode::Greedy).unwrap().radius, 0.0);
    }

    #[test]
    fn greedy_keeps_factor_two_with_off_family_pool() {
        // the pool's 1-center is 5, which is useless once two centers are allowed
        let g = diracs(&[0.0, 10.0]);
        let mut pool = g.clone();
        pool.extend(diracs(&[5.0]));
        let r = rho_k(&g, 2, &pool, CoverMode::Greedy).unwrap();
        assert_eq!(r.radius, 0.0);
    }

    #[test]
    fn combinations_counted() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(100, 3), 161_700);
        let d = vec![vec![0.0; 6]];
        assert_eq!(exact_centers(&d, 6, 3).2, 20);
    }

    #[test]
    fn counterexample_bracket() {
        for &m in &[0.5, 1.0, 2.0] {
            let fam = counterexample_family(m, 30).unwrap();
            let res = mnc_bracket(&fam, &MncOptions::default()).unwrap();
            assert!((res.bracket.lower - m).abs() < 1e-12);
            assert!((res.bracket.upper - m).abs() < 1e-12);
            assert!(replay(&fam, &res).unwrap().ok());
            let e = res.escape.unwrap();
            assert!(e.nearest_center_distance > m - 0.1 * m);
        }
    }

    #[test]
    fn escape_against_single_member() {
        let fam = counterexample_family(1.0, 10).unwrap();
        let challenge = vec![fam.member(5).unwrap()];
        let e = dirac_escape_lower_bound(&fam, 1.0, 0.1, &challenge).unwrap();
        assert_ne!(e.n0, 5);
        assert!((e.bound.value - 0.9).abs() < 1e-15);
        let vacuous = dirac_escape_lower_bound(&fam, 1.0, 1.0, &challenge).unwrap();
        assert_eq!(vacuous.bound.value, 0.0);
    }

    #[test]
    fn packing_needs_infinite_flag() {
        let members = diracs(&[0.0, 2.0]);
        let fam = MeasureFamily::from_members("pair", members, Certificates::default()).unwrap();
        assert!(matches!(
            packing_lower_bound(&fam, &[1, 2], 2.0),
            Err(Error::CertificateRejected(_))
        ));
        let ce = counterexample_family(1.0, 10).unwrap();
        assert_eq!(
            packing_lower_bound(&ce, &[1, 2, 3], 2.0).unwrap().value,
            1.0
        );
    }

    #[test]
    fn spike_bracket() {
        let fam = spike_family(200).unwrap();
        let res = mnc_bracket(&fam, &MncOptions::default()).unwrap();
        assert!((res.bracket.lower - 1.0).abs() < 1e-9);
        assert!((res.bracket.upper - 1.0).abs() < 1e-9);
        assert!(replay(&fam, &res).unwrap().ok());
    }

    #[test]
    fn finite_family_is_compact() {
        let fam =
            MeasureFamily::from_members("three", diracs(&[0.0, 3.0, 7.0]), Certificates::default())
                .unwrap();
        let res = mnc_bracket(&fam, &MncOptions::default()).unwrap();
        assert_eq!((res.bracket.lower, res.bracket.upper), (0.0, 0.0));
        assert!(replay(&fam, &res).unwrap().ok());
    }
}
