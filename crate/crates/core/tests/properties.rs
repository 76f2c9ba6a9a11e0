use std::sync::Arc;

use proptest::prelude::*;

use wmnc::io::{lipschitz_to_json, parse_lipschitz};
use wmnc::limitops::{lambda_metric, lambda_w, SequenceWindow};
use wmnc::lipschitz::{phi_cutoff, pointwise_max, pointwise_min, psi_cutoff, LipschitzFn};
use wmnc::measure::DiscreteMeasure;
use wmnc::space::{MetricSpace, Point, PwlFn};
use wmnc::wasserstein::{w1, w1_dual, w1_primal, Method};

fn atoms(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..10.0f64, 0.01..1.0f64), 1..max)
}

fn line_measure(atoms: &[(f64, f64)]) -> DiscreteMeasure {
    let (pts, ws): (Vec<_>, Vec<_>) = atoms.iter().map(|&(x, w)| (Point::Real(x), w)).unzip();
    DiscreteMeasure::new(Arc::new(MetricSpace::RealLine), pts, ws, true).unwrap()
}

fn plane_measure(atoms: &[((f64, f64), f64)]) -> DiscreteMeasure {
    let space = Arc::new(MetricSpace::euclidean(2, 2.0).unwrap());
    let (pts, ws): (Vec<_>, Vec<_>) = atoms
        .iter()
        .map(|&((x, y), w)| (Point::Vector(vec![x, y]), w))
        .unzip();
    DiscreteMeasure::new(space, pts, ws, true).unwrap()
}

fn plane_atoms() -> impl Strategy<Value = Vec<((f64, f64), f64)>> {
    prop::collection::vec(((-5.0..5.0f64, -5.0..5.0f64), 0.01..1.0f64), 1..7)
}

fn pwl() -> impl Strategy<Value = PwlFn> {
    prop::collection::vec((0.0..1.0f64, -3.0..3.0f64), 0..5).prop_map(|inner| {
        let mut ts: Vec<f64> = inner.iter().map(|p| p.0).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut bp = vec![0.0];
        bp.extend(ts.into_iter().filter(|&t| t > 1e-6 && t < 1.0 - 1e-6));
        bp.push(1.0);
        let vals = (0..bp.len())
            .map(|i| inner.get(i).map_or(0.5, |p| p.1))
            .collect();
        PwlFn::new(bp, vals).unwrap()
    })
}

fn lip_tree() -> impl Strategy<Value = LipschitzFn> {
    let leaf = prop_oneof![
        (-5.0..5.0f64).prop_map(|a| LipschitzFn::distance_to(Point::Real(a))),
        (-5.0..5.0f64, 0.1..3.0f64).prop_map(|(a, r)| phi_cutoff(Point::Real(a), r).unwrap()),
        (-5.0..5.0f64, 0.1..3.0f64).prop_map(|(a, r)| psi_cutoff(Point::Real(a), r).unwrap()),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(LipschitzFn::negate),
            (inner.clone(), -2.0..2.0f64).prop_map(|(f, c)| f.shift(c)),
            prop::collection::vec(inner.clone(), 1..3).prop_map(|v| pointwise_max(v).unwrap()),
            prop::collection::vec(inner.clone(), 1..3).prop_map(|v| pointwise_min(v).unwrap()),
            (inner, -1.0..0.0f64, 0.0..1.0f64).prop_map(|(f, lo, hi)| f.clamp(lo, hi).unwrap()),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn w1_symmetric(a in plane_atoms(), b in plane_atoms()) {
        let (p, q) = (plane_measure(&a), plane_measure(&b));
        let pq = w1(&p, &q, Method::Primal).unwrap();
        let qp = w1(&q, &p, Method::Primal).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-9 * (1.0 + pq));
    }

    #[test]
    fn w1_triangle(a in plane_atoms(), b in plane_atoms(), c in plane_atoms()) {
        let (p, q, r) = (plane_measure(&a), plane_measure(&b), plane_measure(&c));
        let pr = w1(&p, &r, Method::Primal).unwrap();
        let pq = w1(&p, &q, Method::Primal).unwrap();
        let qr = w1(&q, &r, Method::Primal).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
    }

    #[test]
    fn primal_and_dual_agree(a in plane_atoms(), b in plane_atoms()) {
        let (p, q) = (plane_measure(&a), plane_measure(&b));
        let primal = w1_primal(&p, &q).unwrap();
        let dual = w1_dual(&p, &q).unwrap();
        prop_assert!((primal.value - dual.value).abs() <= 1e-8 * (1.0 + primal.value));
        prop_assert!(primal.coupling.marginal_error(&p, &q) < 1e-9);
    }

    #[test]
    fn line_methods_agree(a in atoms(8), b in atoms(8)) {
        let (p, q) = (line_measure(&a), line_measure(&b));
        let one = w1(&p, &q, Method::OneD).unwrap();
        let primal = w1(&p, &q, Method::Primal).unwrap();
        prop_assert!((one - primal).abs() <= 1e-9 * (1.0 + one));
    }

    #[test]
    fn integrate_is_linear(a in atoms(8), s in -3.0..3.0f64, t in -3.0..3.0f64, c in -5.0..5.0f64) {
        let p = line_measure(&a);
        let f = |x: &Point| match x { Point::Real(v) => Ok(v.sin()), _ => unreachable!() };
        let g = |x: &Point| match x { Point::Real(v) => Ok((v - c).abs()), _ => unreachable!() };
        let lhs = p.integrate(|x| Ok(s * f(x)? + t * g(x)?)).unwrap();
        let rhs = s * p.integrate(f).unwrap() + t * p.integrate(g).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn refinement_keeps_distance(f in pwl(), g in pwl(), extra in prop::collection::vec(0.0..1.0f64, 0..4)) {
        let space = MetricSpace::C01Sup;
        let d = space.distance(&Point::Pwl(f.clone()), &Point::Pwl(g.clone())).unwrap();
        let fr = f.refined(&extra);
        let dr = space.distance(&Point::Pwl(fr), &Point::Pwl(g)).unwrap();
        prop_assert!((d - dr).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn tail_integral_is_nonincreasing(a in atoms(10), c in -5.0..5.0f64, r in 0.0..10.0f64, dr in 0.0..5.0f64) {
        let p = line_measure(&a);
        let x = Point::Real(c);
        let small = p.tail_integral(&x, r).unwrap();
        let large = p.tail_integral(&x, r + dr).unwrap();
        prop_assert!(large <= small + 1e-12);
        prop_assert!(p.tail_integral(&x, 0.0).unwrap() <= p.first_moment(&x).unwrap() + 1e-12);
    }

    #[test]
    fn lambda_antitone_in_tail_start(seq in prop::collection::vec(-5.0..5.0f64, 3..12), target in -5.0..5.0f64) {
        let horizon = seq.len();
        let terms = seq.clone();
        let window = SequenceWindow::new(horizon, 1, move |n| Ok(Point::Real(terms[n - 1]))).unwrap();
        let x = Point::Real(target);
        let mut prev = f64::INFINITY;
        for start in 1..=horizon {
            let v = lambda_metric(&window.with_tail_start(start).unwrap(), &x, &MetricSpace::RealLine)
                .unwrap()
                .value;
            prop_assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn lambda_w_on_diracs_is_lambda_metric(seq in prop::collection::vec(-5.0..5.0f64, 1..10), target in -5.0..5.0f64) {
        let space = Arc::new(MetricSpace::RealLine);
        let horizon = seq.len();
        let pts = seq.clone();
        let points = SequenceWindow::new(horizon, 1, move |n| Ok(Point::Real(pts[n - 1]))).unwrap();
        let sp = space.clone();
        let measures = SequenceWindow::new(horizon, 1, move |n| {
            DiscreteMeasure::dirac(sp.clone(), Point::Real(seq[n - 1]))
        })
        .unwrap();
        let x = Point::Real(target);
        let lm = lambda_metric(&points, &x, &space).unwrap().value;
        let lw = lambda_w(&measures, &DiscreteMeasure::dirac(space.clone(), x).unwrap()).unwrap().value;
        prop_assert_eq!(lm, lw);
    }

    #[test]
    fn lipschitz_json_roundtrip(f in lip_tree(), xs in prop::collection::vec(-8.0..8.0f64, 1..6)) {
        let space = MetricSpace::RealLine;
        let v = lipschitz_to_json(&f);
        let g = parse_lipschitz(&space, &v, "").unwrap();
        prop_assert_eq!(&lipschitz_to_json(&g), &v);
        for x in xs {
            let x = Point::Real(x);
            prop_assert_eq!(f.evaluate(&space, &x).unwrap(), g.evaluate(&space, &x).unwrap());
        }
    }
}
