//! The acceptance suite: eleven numbered criteria with pinned tolerances
//! and runtime budgets. Shared by `wmnc selftest` and the `acceptance`
//! test target.

use std::sync::Arc;
use std::time::Instant;

use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::commands::counterexample_check;
use crate::error::Result;
use crate::families::{
    counterexample_family, dirac_sequence_family, spike_family, DiracSequence, MeasureFamily,
};
use crate::integrability::{verify_theorem46, Theorem46Options};
use crate::limitops::{lambda_kappa_lower, lambda_w, theorem34_gap, SequenceWindow};
use crate::lipschitz::{
    check_truncation, normalize_at, phi_sandwich_holds, pointwise_max, pointwise_min, psi_cutoff,
    verify_1lipschitz, LipschitzFn, TruncationPart,
};
use crate::measure::DiscreteMeasure;
use crate::oracle::transport_vertex_min;
use crate::space::{MetricSpace, Point, PwlFn};
use crate::wasserstein::{check_dirac_escape, w1, w1_1d, w1_dual, w1_primal, Method};

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    /// Correctness and runtime budget both met.
    pub passed: bool,
    pub detail: String,
    pub elapsed: f64,
    pub budget: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {:<28} {:>8.3}s / {:>4.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed,
            self.budget,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: 20240917 }
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

const CRITERIA: [(u32, &str, f64, Check); 11] = [
    (1, "dirac distances", 5.0, c1_dirac),
    (2, "strong duality", 60.0, c2_duality),
    (3, "one-dimensional route", 10.0, c3_one_d),
    (4, "vertex enumeration oracle", 10.0, c4_oracle),
    (5, "bounded non-tight family", 20.0, c5_counterexample),
    (6, "integrability vs compactness", 30.0, c6_inequality),
    (7, "dirac escape implication", 30.0, c7_escape),
    (8, "lipschitz calculus", 10.0, c8_lipschitz),
    (9, "limit operators", 30.0, c9_limits),
    (10, "dual potential enrichment", 30.0, c10_enrichment),
    (11, "w1 metric axioms", 60.0, c11_axioms),
];

pub fn criterion_ids() -> impl Iterator<Item = u32> {
    CRITERIA.iter().map(|c| c.0)
}

pub fn run_criterion(id: u32, options: &SuiteOptions) -> Option<CriterionResult> {
    let &(id, name, budget, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let mut rng =
        ChaCha8Rng::seed_from_u64(options.seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let start = Instant::now();
    let outcome = check(&mut rng);
    let elapsed = start.elapsed().as_secs_f64();
    let (ok, detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionResult {
        id,
        name,
        passed: ok && elapsed < budget,
        detail: if elapsed < budget {
            detail
        } else {
            format!("{detail}; over budget")
        },
        elapsed,
        budget,
    })
}

pub fn run_all(options: &SuiteOptions) -> Vec<CriterionResult> {
    criterion_ids()
        .filter_map(|id| run_criterion(id, options))
        .collect()
}

// ---- random inputs ----

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Line,
    Euclid,
    Finite,
    C01,
}

const ALL_KINDS: [Kind; 4] = [Kind::Line, Kind::Euclid, Kind::Finite, Kind::C01];

/// Shortest-path metric of a random complete graph.
fn random_finite(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
    let w = Uniform::new(0.1, 2.0);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let x = w.sample(rng);
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    MetricSpace::finite(d).expect("valid matrix")
}

fn random_space(rng: &mut ChaCha8Rng, kind: Kind) -> Arc<MetricSpace> {
    Arc::new(match kind {
        Kind::Line => MetricSpace::RealLine,
        Kind::Euclid => {
            let p = *[1.0, 2.0, 3.0, f64::INFINITY].choose(rng).unwrap();
            MetricSpace::euclidean(rng.gen_range(1..=4), p).unwrap()
        }
        Kind::Finite => {
            let n = rng.gen_range(4..=50);
            random_finite(rng, n)
        }
        Kind::C01 => MetricSpace::C01Sup,
    })
}

fn random_point(rng: &mut ChaCha8Rng, space: &MetricSpace) -> Point {
    let u = Uniform::new(-5.0, 5.0);
    match space {
        MetricSpace::RealLine => Point::Real(u.sample(rng)),
        MetricSpace::Euclidean { dim, .. } => {
            Point::Vector((0..*dim).map(|_| u.sample(rng)).collect())
        }
        MetricSpace::Finite(m) => Point::Index(rng.gen_range(0..m.size())),
        MetricSpace::C01Sup => {
            let mut t: Vec<f64> = (0..rng.gen_range(0..4))
                .map(|_| rng.gen_range(0.01..0.99))
                .collect();
            t.sort_by(|a, b| a.partial_cmp(b).unwrap());
            t.dedup();
            t.insert(0, 0.0);
            t.push(1.0);
            let v = t.iter().map(|_| u.sample(rng)).collect();
            Point::Pwl(PwlFn::new(t, v).unwrap())
        }
    }
}

/// Standard exponential by inversion; normalized, these give uniform simplex weights.
fn exp1(rng: &mut ChaCha8Rng) -> f64 {
    -(1.0 - rng.gen::<f64>()).ln()
}

fn random_measure(rng: &mut ChaCha8Rng, space: &Arc<MetricSpace>, atoms: usize) -> DiscreteMeasure {
    let points: Vec<Point> = (0..atoms).map(|_| random_point(rng, space)).collect();
    let weights: Vec<f64> = (0..atoms).map(|_| exp1(rng) + 1e-3).collect();
    DiscreteMeasure::new(space.clone(), points, weights, true).unwrap()
}

fn leaf(rng: &mut ChaCha8Rng, space: &MetricSpace) -> LipschitzFn {
    let a = random_point(rng, space);
    if rng.gen_bool(0.7) {
        LipschitzFn::DistanceTo(a)
    } else {
        psi_cutoff(a, rng.gen_range(0.1..3.0)).unwrap()
    }
}

/// Random expression tree over 1-Lipschitz-preserving nodes.
fn random_tree(rng: &mut ChaCha8Rng, space: &MetricSpace, depth: usize) -> LipschitzFn {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng, space);
    }
    match rng.gen_range(0..6) {
        0 => random_tree(rng, space, depth - 1).negate(),
        1 => random_tree(rng, space, depth - 1).shift(rng.gen_range(-3.0..3.0)),
        2 => LipschitzFn::Max(
            (0..rng.gen_range(2..=3))
                .map(|_| random_tree(rng, space, depth - 1))
                .collect(),
        ),
        3 => LipschitzFn::Min(
            (0..rng.gen_range(2..=3))
                .map(|_| random_tree(rng, space, depth - 1))
                .collect(),
        ),
        4 => {
            let lo = rng.gen_range(-4.0..1.0);
            random_tree(rng, space, depth - 1)
                .clamp(lo, lo + rng.gen_range(0.0..5.0))
                .unwrap()
        }
        _ => LipschitzFn::Truncation {
            child: Box::new(random_tree(rng, space, depth - 1)),
            radius: rng.gen_range(0.5..4.0),
            part: if rng.gen_bool(0.5) {
                TruncationPart::Low
            } else {
                TruncationPart::High
            },
        },
    }
}

// ---- criteria ----

fn c1_dirac(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for kind in ALL_KINDS {
        let space = random_space(rng, kind);
        for _ in 0..200 {
            let (a, b) = (random_point(rng, &space), random_point(rng, &space));
            let d = space.distance(&a, &b)?;
            let v = w1_primal(
                &DiscreteMeasure::dirac(space.clone(), a)?,
                &DiscreteMeasure::dirac(space.clone(), b)?,
            )?
            .value;
            let err = if d == 0.0 { v.abs() } else { (v - d).abs() / d };
            worst = worst.max(err);
            pairs += 1;
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{pairs} pairs, max relative error {worst:.3e}"),
    ))
}

fn c2_duality(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let kinds = [Kind::Line, Kind::Euclid, Kind::Finite];
    let mut worst = 0.0f64;
    let mut largest = 0;
    for i in 0..200 {
        let space = random_space(rng, kinds[i % 3]);
        let (n, m) = (rng.gen_range(1..=40), rng.gen_range(1..=40));
        let p = random_measure(rng, &space, n);
        let q = random_measure(rng, &space, m);
        largest = largest.max(p.len() * q.len());
        let primal = w1_primal(&p, &q)?.value;
        let dual = w1_dual(&p, &q)?.value;
        worst = worst.max((primal - dual).abs() / primal.max(1.0));
    }
    Ok((
        worst <= 1e-8,
        format!("200 instances up to {largest} cells, max |primal - dual| / max(1, primal) = {worst:.3e}"),
    ))
}

fn c3_one_d(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let space = Arc::new(MetricSpace::RealLine);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (n, m) = (rng.gen_range(1..=60), rng.gen_range(1..=60));
        let p = random_measure(rng, &space, n);
        let q = random_measure(rng, &space, m);
        let a = w1_primal(&p, &q)?.value;
        let b = w1_1d(&p, &q)?;
        worst = worst.max((a - b).abs() / a.max(1.0));
    }
    Ok((
        worst <= 1e-9,
        format!("200 instances, max scaled difference {worst:.3e}"),
    ))
}

fn c4_oracle(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for i in 0..500 {
        let space = random_space(rng, ALL_KINDS[i % 4]);
        let p = {
            let k = rng.gen_range(1..=3);
            random_measure(rng, &space, k)
        };
        let q = {
            let k = rng.gen_range(1..=3);
            random_measure(rng, &space, k)
        };
        let cost: Vec<f64> = p
            .support()
            .iter()
            .flat_map(|s| q.support().iter().map(|t| space.distance(s, t).unwrap()))
            .collect();
        let exact = transport_vertex_min(p.weights(), q.weights(), &cost)?;
        let v = w1_primal(&p, &q)?.value;
        worst = worst.max((v - exact).abs());
    }
    Ok((
        worst <= 1e-12,
        format!("500 instances, max |simplex - enumeration| = {worst:.3e}"),
    ))
}

fn c5_counterexample(_rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in [1.0, 0.5, 2.0, 10.0] {
        let start = Instant::now();
        let c = counterexample_check(m, 100)?;
        let secs = start.elapsed().as_secs_f64();
        let run_ok = c.passed && c.replay_ok && secs < 5.0;
        ok &= run_ok;
        parts.push(format!(
            "M={m}: ui [{}, {}] mnc [{}, {}] {:.2}s{}",
            c.ui.0,
            c.ui.1,
            c.mnc.0,
            c.mnc.1,
            secs,
            if run_ok { "" } else { " FAIL" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn random_dirac_family(rng: &mut ChaCha8Rng) -> Result<MeasureFamily> {
    let seq = match rng.gen_range(0..3) {
        0 => DiracSequence::Harmonic {
            center: rng.gen_range(-5.0..5.0),
            scale: rng.gen_range(-3.0..3.0),
        },
        1 => DiracSequence::Linear {
            start: rng.gen_range(-5.0..5.0),
            slope: rng.gen_range(-3.0..3.0),
        },
        _ => DiracSequence::Constant {
            value: rng.gen_range(-5.0..5.0),
        },
    };
    dirac_sequence_family(seq, rng.gen_range(20..=100))
}

fn c6_inequality(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut families = vec![
        counterexample_family(1.0, 100)?,
        spike_family(1000)?,
        dirac_sequence_family(
            DiracSequence::Harmonic {
                center: 0.0,
                scale: 1.0,
            },
            100,
        )?,
        dirac_sequence_family(
            DiracSequence::Linear {
                start: 0.0,
                slope: 1.0,
            },
            100,
        )?,
        dirac_sequence_family(DiracSequence::Constant { value: 0.0 }, 100)?,
    ];
    for _ in 0..50 {
        families.push(random_dirac_family(rng)?);
    }
    let mut failures = Vec::new();
    let mut spike = None;
    for (i, fam) in families.iter().enumerate() {
        let report = verify_theorem46(fam, &Theorem46Options::default())?;
        let holds = report.ui.bracket.lower <= report.mnc.bracket.upper + 1e-9;
        if !(holds && report.passed) {
            failures.push(format!("{} (#{i})", fam.name()));
        }
        if i == 1 {
            spike = Some((
                report.ui.bracket.lower,
                report.ui.bracket.upper,
                report.mnc.bracket.lower,
                report.mnc.bracket.upper,
                report.tight,
            ));
        }
    }
    let (ul, uu, ml, mu, tight) = spike.unwrap();
    let equality = tight && [ul, uu, ml, mu].iter().all(|v| (v - 1.0).abs() <= 1e-9);
    Ok((
        failures.is_empty() && equality,
        format!(
            "{} families, {} failures{}; spike N=1000: ui [{ul}, {uu}] mnc [{ml}, {mu}] tight={tight}",
            families.len(),
            failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!(" ({})", failures.join(", "))
            }
        ),
    ))
}

fn c7_escape(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut premises = 0;
    let mut violations = 0;
    for i in 0..1000 {
        let space = random_space(rng, ALL_KINDS[i % 4]);
        let p = {
            let k = rng.gen_range(1..=8);
            random_measure(rng, &space, k)
        };
        let a = random_point(rng, &space);
        let far = p.max_distance_from(&a)?.max(1e-3);
        let m = far * rng.gen_range(0.05..1.5);
        let eps = m * rng.gen_range(0.01..1.0);
        let e = check_dirac_escape(&p, &a, m, eps)?;
        premises += e.premise as usize;
        violations += !e.consistent() as usize;
    }
    Ok((
        violations == 0 && premises > 0,
        format!("1000 trials, premise held in {premises}, {violations} counterexamples"),
    ))
}

fn c8_lipschitz(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for trial in 0..100 {
        let space = random_space(rng, ALL_KINDS[trial % 4]);
        let points: Vec<Point> = (0..100).map(|_| random_point(rng, &space)).collect();
        let a = points[0].clone();
        let f = normalize_at(random_tree(rng, &space, 3), &space, &a)?;
        let r = rng.gen_range(0.2..5.0);
        if !check_truncation(&f, &space, &a, r, &points, 1e-12)?.holds(1e-12) {
            bad.push(format!("truncation #{trial}"));
        }
        for eps in [0.1, 0.5, 0.9] {
            for x in &points {
                if !phi_sandwich_holds(&space, &a, r, eps, x)? {
                    bad.push(format!("sandwich #{trial}"));
                }
            }
        }
        let fs: Vec<LipschitzFn> = (0..3).map(|_| random_tree(rng, &space, 2)).collect();
        let max = pointwise_max(fs.clone())?;
        let min = pointwise_min(fs.clone())?;
        let lip_ok = verify_1lipschitz(&max, &space, &points, 1e-12)?.is_ok()
            && verify_1lipschitz(&min, &space, &points, 1e-12)?.is_ok();
        let g = &fs[0];
        let single = pointwise_max(vec![g.clone()])?;
        let twice = pointwise_max(vec![g.clone(), g.clone()])?;
        let mut ident_ok = true;
        for x in &points {
            let gx = g.evaluate(&space, x)?;
            ident_ok &= single.evaluate(&space, x)? == gx && twice.evaluate(&space, x)? == gx;
        }
        if !(lip_ok && ident_ok) {
            bad.push(format!("max/min #{trial}"));
        }
    }
    bad.dedup();
    Ok((
        bad.is_empty(),
        if bad.is_empty() {
            "100 trials x 100 points, all checks hold".to_string()
        } else {
            format!("100 trials x 100 points, failing: {}", bad.join(", "))
        },
    ))
}

/// `P_n` with three atoms drifting towards fixed positions; a pure function of `n`.
fn drifting_sequence(
    rng: &mut ChaCha8Rng,
    space: &Arc<MetricSpace>,
) -> impl Fn(usize) -> Result<DiscreteMeasure> + Send + Sync + Clone {
    let base: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let amp: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.2..1.0)).collect();
    let salt: u64 = rng.gen();
    let space = space.clone();
    move |n: usize| {
        let mut r = ChaCha8Rng::seed_from_u64(salt ^ n as u64);
        let pts = (0..3)
            .map(|i| Point::Real(base[i] + amp[i] * r.gen_range(0.5..1.5) / n as f64))
            .collect();
        DiscreteMeasure::new(space.clone(), pts, w.clone(), true)
    }
}

fn c9_limits(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let space = Arc::new(MetricSpace::RealLine);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let gen = drifting_sequence(rng, &space);
        let seq = SequenceWindow::new(60, rng.gen_range(1..=20), gen)?;
        let target = random_measure(rng, &space, 3);
        let fns: Vec<LipschitzFn> = (0..4).map(|_| random_tree(rng, &space, 3)).collect();
        let lw = lambda_w(&seq, &target)?.value;
        let lk = lambda_kappa_lower(&seq, &target, &fns)?.value;
        worst = worst.max(lk - lw);
    }
    let mut dirac_gaps = 0;
    for _ in 0..100 {
        let y = rng.gen_range(-5.0..5.0);
        let s = rng.gen_range(-3.0..3.0);
        let fam = dirac_sequence_family(
            DiracSequence::Harmonic {
                center: y,
                scale: s,
            },
            60,
        )?;
        let seq = SequenceWindow::new(60, rng.gen_range(1..=30), move |n| fam.member(n))?;
        let target = DiscreteMeasure::dirac(space.clone(), Point::Real(y))?;
        let lw = lambda_w(&seq, &target)?.value;
        let lk =
            lambda_kappa_lower(&seq, &target, &[LipschitzFn::DistanceTo(Point::Real(y))])?.value;
        dirac_gaps += (lw != lk) as usize;
    }
    Ok((
        worst <= 1e-9 && dirac_gaps == 0,
        format!("max (lambda_kappa - lambda_w) = {worst:.3e} over 100 sequences; {dirac_gaps}/100 dirac sequences with nonzero gap"),
    ))
}

fn c10_enrichment(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let space = Arc::new(MetricSpace::RealLine);
    let mut single = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let gen = drifting_sequence(rng, &space);
        let seq = SequenceWindow::new(50, 1, gen.clone())?;
        let target = random_measure(rng, &space, 3);
        let mut values: Vec<f64> = (1..=50)
            .map(|n| w1(&target, &gen(n)?, Method::Auto))
            .collect::<Result<_>>()?;
        values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if values[0] - values[1] <= 1e-9 {
            continue;
        }
        single += 1;
        let fns: Vec<LipschitzFn> = target
            .support()
            .iter()
            .cloned()
            .map(LipschitzFn::DistanceTo)
            .collect();
        worst = worst.max(theorem34_gap(&seq, &target, &fns)?.enriched_gap);
    }
    Ok((
        single > 0 && worst < 1e-6,
        format!("{single} single-attaining sequences, max enriched gap {worst:.3e}"),
    ))
}

fn c11_axioms(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst_sym = 0.0f64;
    let mut worst_tri = f64::NEG_INFINITY;
    let mut identity = true;
    for i in 0..200 {
        let space = random_space(rng, ALL_KINDS[i % 4]);
        let ms: Vec<DiscreteMeasure> = (0..3)
            .map(|_| {
                let k = rng.gen_range(1..=15);
                random_measure(rng, &space, k)
            })
            .collect();
        let d = |a: &DiscreteMeasure, b: &DiscreteMeasure| w1_primal(a, b).map(|r| r.value);
        let (pq, qp) = (d(&ms[0], &ms[1])?, d(&ms[1], &ms[0])?);
        let (qr, pr) = (d(&ms[1], &ms[2])?, d(&ms[0], &ms[2])?);
        worst_sym = worst_sym.max((pq - qp).abs());
        worst_tri = worst_tri.max(pr - pq - qr);
        identity &= d(&ms[0], &ms[0])? == 0.0 && pq >= 0.0;
    }
    let ok = worst_sym <= 1e-8 && worst_tri <= 1e-8 && identity;
    Ok((
        ok,
        format!("200 triples, max asymmetry {worst_sym:.3e}, max triangle excess {worst_tri:.3e}, identity {identity}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_finite_is_a_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_finite(&mut rng, 12);
        assert!(crate::space::verify_metric_axioms(&s, None, 1e-12).is_empty());
    }
}
