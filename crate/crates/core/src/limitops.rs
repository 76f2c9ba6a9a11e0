//! Limit operators of sequences, estimated on a finite window.
//!
//! The limsup over a sequence is replaced by the supremum over the window
//! `tail_start..=horizon`; the estimate's kind says whether that is exact.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lipschitz::{verify_1lipschitz, LipschitzCheck, LipschitzFn, LIPSCHITZ_TOL};
use crate::measure::DiscreteMeasure;
use crate::space::{MetricSpace, Point};
use crate::wasserstein::{w1, w1_primal, Method};

type Generator<T> = dyn Fn(usize) -> Result<T> + Send + Sync;

/// Terms `tail_start..=horizon` of a sequence indexed from 1.
pub struct SequenceWindow<T> {
    generator: Arc<Generator<T>>,
    horizon: usize,
    tail_start: usize,
    stationary: bool,
}

impl<T> Clone for SequenceWindow<T> {
    fn clone(&self) -> Self {
        Self {
            generator: self.generator.clone(),
            horizon: self.horizon,
            tail_start: self.tail_start,
            stationary: self.stationary,
        }
    }
}

impl<T: Send> SequenceWindow<T> {
    pub fn new<F>(horizon: usize, tail_start: usize, generator: F) -> Result<Self>
    where
        F: Fn(usize) -> Result<T> + Send + Sync + 'static,
    {
        if tail_start == 0 || tail_start > horizon {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= tail_start <= horizon, got tail_start = {tail_start}, horizon = {horizon}"
            )));
        }
        Ok(Self {
            generator: Arc::new(generator),
            horizon,
            tail_start,
            stationary: false,
        })
    }

    /// Declares the sequence constant from `tail_start` on, which makes
    /// the window supremum the exact limsup.
    pub fn stationary(mut self) -> Self {
        self.stationary = true;
        self
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn tail_start(&self) -> usize {
        self.tail_start
    }

    pub fn with_tail_start(&self, tail_start: usize) -> Result<Self> {
        if tail_start == 0 || tail_start > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "tail_start {tail_start} outside 1..={}",
                self.horizon
            )));
        }
        Ok(Self {
            tail_start,
            ..self.clone()
        })
    }

    pub fn term(&self, n: usize) -> Result<T> {
        (self.generator)(n)
    }

    /// `(n, term)` for the window, in index order.
    pub fn terms(&self) -> Result<Vec<(usize, T)>> {
        (self.tail_start..=self.horizon)
            .into_par_iter()
            .map(|n| Ok((n, self.term(n)?)))
            .collect()
    }

    fn kind(&self) -> LimitKind {
        if self.stationary {
            LimitKind::Exact
        } else {
            LimitKind::TailSupremumAtHorizon
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Exact,
    TailSupremumAtHorizon,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub kind: LimitKind,
    /// First window index attaining the supremum.
    pub attained_at: Option<usize>,
}

/// Maximum of `values` with the first index attaining it.
fn window_sup(values: impl IntoIterator<Item = (usize, f64)>) -> (f64, Option<usize>) {
    values.into_iter().fold((0.0, None), |(best, at), (n, v)| {
        if at.is_none() || v > best {
            (v, Some(n))
        } else {
            (best, at)
        }
    })
}

/// `sup_{tail_start <= n <= horizon} d(x, x_n)`.
pub fn lambda_metric(
    seq: &SequenceWindow<Point>,
    x: &Point,
    space: &MetricSpace,
) -> Result<LimitEstimate> {
    let values = seq
        .terms()?
        .into_iter()
        .map(|(n, xn)| Ok((n, space.distance(x, &xn)?)))
        .collect::<Result<Vec<_>>>()?;
    let (value, attained_at) = window_sup(values);
    Ok(LimitEstimate {
        value,
        kind: seq.kind(),
        attained_at,
    })
}

/// `sup_n W(P, P_n)` over the window.
pub fn lambda_w(
    seq: &SequenceWindow<DiscreteMeasure>,
    p: &DiscreteMeasure,
) -> Result<LimitEstimate> {
    let values = seq
        .terms()?
        .into_par_iter()
        .map(|(n, pn)| Ok((n, w1(p, &pn, Method::Auto)?)))
        .collect::<Result<Vec<_>>>()?;
    let (value, attained_at) = window_sup(values);
    Ok(LimitEstimate {
        value,
        kind: seq.kind(),
        attained_at,
    })
}

fn involved_points(p: &DiscreteMeasure, terms: &[(usize, DiscreteMeasure)]) -> Vec<Point> {
    let mut seen = std::collections::HashSet::new();
    std::iter::once(p)
        .chain(terms.iter().map(|(_, m)| m))
        .flat_map(|m| m.support().iter())
        .filter(|x| seen.insert(x.key()))
        .cloned()
        .collect()
}

fn certify(fns: &[LipschitzFn], space: &MetricSpace, points: &[Point]) -> Result<()> {
    for (index, f) in fns.iter().enumerate() {
        if let LipschitzCheck::Violation { slack, .. } =
            verify_1lipschitz(f, space, points, LIPSCHITZ_TOL)?
        {
            return Err(Error::UncertifiedTestFunction { index, slack });
        }
    }
    Ok(())
}

fn kappa_on_terms(
    terms: &[(usize, DiscreteMeasure)],
    p: &DiscreteMeasure,
    fns: &[LipschitzFn],
) -> Result<(f64, Option<usize>)> {
    let space = p.space();
    let mut best = (0.0, None);
    for f in fns {
        let fp = p.integrate(|x| f.evaluate(space, x))?;
        let values = terms
            .par_iter()
            .map(|(n, pn)| Ok((*n, (fp - pn.integrate(|x| f.evaluate(space, x))?).abs())))
            .collect::<Result<Vec<_>>>()?;
        let (v, at) = window_sup(values);
        if best.1.is_none() || v > best.0 {
            best = (v, at);
        }
    }
    Ok(best)
}

/// `max_f sup_n |int f dP - int f dP_n|` over a finite family of test
/// functions, each verified 1-Lipschitz on every involved support point.
pub fn lambda_kappa_lower(
    seq: &SequenceWindow<DiscreteMeasure>,
    p: &DiscreteMeasure,
    test_fns: &[LipschitzFn],
) -> Result<LimitEstimate> {
    let terms = seq.terms()?;
    if terms.iter().any(|(_, m)| !m.same_space(p)) {
        return Err(Error::SpaceMismatch);
    }
    certify(test_fns, p.space(), &involved_points(p, &terms))?;
    let (value, attained_at) = kappa_on_terms(&terms, p, test_fns)?;
    Ok(LimitEstimate {
        value,
        kind: seq.kind(),
        attained_at,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem34Report {
    pub lambda_w: LimitEstimate,
    pub lambda_kappa_lower: LimitEstimate,
    /// `lambda_w - lambda_kappa_lower`
    pub gap: f64,
    /// The same with the test family enlarged by an optimal potential of
    /// `(P, P_n)` at the index attaining `lambda_w`.
    pub enriched_lambda_kappa_lower: LimitEstimate,
    pub enriched_gap: f64,
}

/// Compares `lambda_w` with the test-function lower bound, before and
/// after adding a dual-optimal potential for the attaining index.
pub fn theorem34_gap(
    seq: &SequenceWindow<DiscreteMeasure>,
    p: &DiscreteMeasure,
    test_fns: &[LipschitzFn],
) -> Result<Theorem34Report> {
    let lw = lambda_w(seq, p)?;
    let lk = lambda_kappa_lower(seq, p, test_fns)?;
    let mut enriched: Vec<LipschitzFn> = test_fns.to_vec();
    if let Some(n) = lw.attained_at {
        let pn = seq.term(n)?;
        let potential = w1_primal(p, &pn)?.dual_potential;
        enriched.push(LipschitzFn::min_extension(&potential)?);
    }
    let ek = lambda_kappa_lower(seq, p, &enriched)?;
    Ok(Theorem34Report {
        gap: lw.value - lk.value,
        enriched_gap: lw.value - ek.value,
        lambda_w: lw,
        lambda_kappa_lower: lk,
        enriched_lambda_kappa_lower: ek,
    })
}

/// The Dirac embedding `n -> delta_{x_n}` of a point sequence.
pub fn dirac_embedding(
    seq: &SequenceWindow<Point>,
    space: Arc<MetricSpace>,
) -> SequenceWindow<DiscreteMeasure> {
    let inner = seq.generator.clone();
    SequenceWindow {
        generator: Arc::new(move |n| DiscreteMeasure::dirac(space.clone(), inner(n)?)),
        horizon: seq.horizon,
        tail_start: seq.tail_start,
        stationary: seq.stationary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Arc<MetricSpace> {
        Arc::new(MetricSpace::RealLine)
    }

    #[test]
    fn constant_sequence_is_exact_zero() {
        let seq = SequenceWindow::new(10, 1, |_| Ok(Point::Real(3.0)))
            .unwrap()
            .stationary();
        let est = lambda_metric(&seq, &Point::Real(3.0), &line()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.kind, LimitKind::Exact);
    }

    #[test]
    fn harmonic_window() {
        let seq = SequenceWindow::new(1000, 100, |n| Ok(Point::Real(1.0 / n as f64))).unwrap();
        let est = lambda_metric(&seq, &Point::Real(0.0), &line()).unwrap();
        assert_eq!(est.value, 1.0 / 100.0);
        assert_eq!(est.attained_at, Some(100));
        assert_eq!(est.kind, LimitKind::TailSupremumAtHorizon);
    }

    #[test]
    fn alternating() {
        let seq = SequenceWindow::new(50, 7, |n| Ok(Point::Real((n % 2) as f64))).unwrap();
        assert_eq!(
            lambda_metric(&seq, &Point::Real(0.0), &line())
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn dirac_embedding_matches_metric() {
        let s = line();
        let pts = SequenceWindow::new(200, 5, |n| {
            Ok(Point::Real(2.0 + ((n as f64).sin()) / n as f64))
        })
        .unwrap();
        let meas = dirac_embedding(&pts, s.clone());
        let y = Point::Real(2.0);
        let target = DiscreteMeasure::dirac(s.clone(), y.clone()).unwrap();
        let lm = lambda_metric(&pts, &y, &s).unwrap();
        let lw = lambda_w(&meas, &target).unwrap();
        assert_eq!(lm.value, lw.value);
        let report = theorem34_gap(&meas, &target, &[LipschitzFn::distance_to(y)]).unwrap();
        assert_eq!(report.gap, 0.0);
    }

    #[test]
    fn uncertified_function_rejected() {
        let s = line();
        let seq = SequenceWindow::new(5, 1, {
            let s = s.clone();
            move |n| DiscreteMeasure::dirac(s.clone(), Point::Real(n as f64))
        })
        .unwrap();
        let target = DiscreteMeasure::dirac(s.clone(), Point::Real(0.0)).unwrap();
        let doubled = LipschitzFn::Tabulated(
            crate::lipschitz::Table::unverified(
                (0..=5).map(|i| Point::Real(i as f64)).collect(),
                (0..=5).map(|i| 2.0 * i as f64).collect(),
            )
            .unwrap(),
        );
        assert!(matches!(
            lambda_kappa_lower(&seq, &target, &[doubled]),
            Err(Error::UncertifiedTestFunction { index: 0, .. })
        ));
    }

    #[test]
    fn empty_family_gives_zero() {
        let s = line();
        let seq = SequenceWindow::new(5, 1, {
            let s = s.clone();
            move |n| DiscreteMeasure::dirac(s.clone(), Point::Real(n as f64))
        })
        .unwrap();
        let target = DiscreteMeasure::dirac(s, Point::Real(0.0)).unwrap();
        assert_eq!(lambda_kappa_lower(&seq, &target, &[]).unwrap().value, 0.0);
    }
}
