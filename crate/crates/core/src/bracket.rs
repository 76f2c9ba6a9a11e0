//! Certified intervals with provenance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::Point;

/// Slack allowed between a lower and an upper bound.
pub const BRACKET_TOL: f64 = 1e-9;

/// How far a bound reaches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Validity {
    /// Holds for the whole (possibly infinite) family.
    Certified,
    /// Holds for the enumerated prefix only.
    PrefixValid,
    /// Holds against the supplied challenge center set only.
    Challenge,
}

/// Where a bound came from. Each variant carries enough data to replay it.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// A finite family is covered by its own members.
    FiniteFamily { members: usize },
    /// `max_P min_Q W(P, Q)` over the prefix against explicit centers.
    CoveringRadius {
        centers: usize,
        prefix: usize,
        mode: String,
        radius: f64,
    },
    /// Every member lies at `W = value` from one measure.
    ConstantDistance { value: f64 },
    /// Every member is supported in `B*(center, radius)`.
    UniformBound { center: Point, radius: f64 },
    /// Infinitely many members pairwise at least `delta` apart.
    Packing {
        delta: f64,
        pairs_checked: usize,
        min_pair: f64,
    },
    /// Dirac members with disjoint balls `B(x_n, M)`; against a challenge
    /// set, member `n0` keeps every center's ball mass below `eps / M`.
    DiracEscape {
        m: f64,
        eps: f64,
        n0: Option<usize>,
        challenge_size: usize,
        max_ball_mass: f64,
    },
    /// Imported from the non-uniform integrability bracket.
    UniformIntegrability { value: f64 },
    /// Tail integrals equal `value` at every radius from `from_radius` on.
    TailValue {
        center: Point,
        value: f64,
        from_radius: f64,
    },
    /// Largest prefix tail integral at the last scheduled radius.
    PrefixTail {
        center: Point,
        radius: f64,
        sup: f64,
    },
    /// Nothing beyond the trivial bound.
    Trivial,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bound {
    pub value: f64,
    pub validity: Validity,
    pub evidence: Evidence,
}

impl Bound {
    pub fn new(value: f64, validity: Validity, evidence: Evidence) -> Self {
        Self {
            value,
            validity,
            evidence,
        }
    }

    pub fn trivial_lower() -> Self {
        Self::new(0.0, Validity::Certified, Evidence::Trivial)
    }

    pub fn trivial_upper() -> Self {
        Self::new(f64::INFINITY, Validity::Certified, Evidence::Trivial)
    }
}

/// `[lower, upper]` with a certificate on each side.
#[derive(Clone, Debug, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_certificate: Bound,
    pub upper_certificate: Bound,
}

impl Bracket {
    pub fn new(lower: Bound, upper: Bound) -> Result<Self> {
        if lower.value > upper.value + BRACKET_TOL {
            return Err(Error::BracketInconsistent {
                lower: lower.value,
                upper: upper.value,
            });
        }
        Ok(Self {
            lower: lower.value,
            upper: upper.value,
            lower_certificate: lower,
            upper_certificate: upper,
        })
    }

    /// The upper bound if it holds for the whole family, `+inf` otherwise.
    pub fn certified_upper(&self) -> f64 {
        match self.upper_certificate.validity {
            Validity::Certified => self.upper,
            _ => f64::INFINITY,
        }
    }

    /// The lower bound if it holds for the whole family, `0` otherwise.
    pub fn certified_lower(&self) -> f64 {
        match self.lower_certificate.validity {
            Validity::Certified => self.lower,
            _ => 0.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn is_point(&self, tol: f64) -> bool {
        self.width() <= tol
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }
}

/// The largest of several lower bounds; the first wins ties.
pub(crate) fn best_lower(bounds: Vec<Bound>) -> Bound {
    bounds.into_iter().fold(Bound::trivial_lower(), |best, b| {
        if b.value > best.value {
            b
        } else {
            best
        }
    })
}

/// The smallest of several upper bounds; the first wins ties.
pub(crate) fn best_upper(bounds: Vec<Bound>) -> Bound {
    bounds.into_iter().fold(Bound::trivial_upper(), |best, b| {
        if b.value < best.value {
            b
        } else {
            best
        }
    })
}
