//! Property-based invariants for metric projections and derived quantities,
//! over randomized sets, points, and diagonal Gram weights.

use nalgebra::DVector;
use proptest::prelude::*;
use std::sync::Arc;

use stabsqp::{ConvexSet, InnerProductSpace, Vector};

const DIM: usize = 4;
const SLACK: f64 = 1e-10;

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, DIM)
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..20.0f64, DIM)
}

fn boxes() -> impl Strategy<Value = ConvexSet> {
    // per-coordinate bound kind: two-sided, lower-only, upper-only,
    // free, or equality
    let coord = (-10.0..10.0f64, 0.1..5.0f64, 0..5u8).prop_map(|(base, width, kind)| match kind {
        0 => (base, base + width),
        1 => (base, f64::INFINITY),
        2 => (f64::NEG_INFINITY, base + width),
        3 => (f64::NEG_INFINITY, f64::INFINITY),
        _ => (base, base),
    });
    prop::collection::vec(coord, DIM).prop_map(|bounds| {
        let lower = DVector::from_iterator(DIM, bounds.iter().map(|b| b.0));
        let upper = DVector::from_iterator(DIM, bounds.iter().map(|b| b.1));
        ConvexSet::boxed(lower, upper).unwrap()
    })
}

fn sets() -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        boxes(),
        Just(ConvexSet::zero(DIM)),
        Just(ConvexSet::orthant(DIM)),
        (prop::collection::vec(-5.0..5.0f64, DIM), 0.1..10.0f64).prop_map(|(c, r)| {
            ConvexSet::ball(DVector::from_vec(c), r).unwrap()
        }),
        (0.1..5.0f64).prop_map(|r| {
            ConvexSet::product(vec![
                ConvexSet::zero(1),
                ConvexSet::ball(DVector::zeros(2), r).unwrap(),
                ConvexSet::orthant(1),
            ])
            .unwrap()
        }),
    ]
}

fn space(w: &[f64]) -> Arc<InnerProductSpace> {
    InnerProductSpace::diagonal(DVector::from_column_slice(w)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn projection_is_nonexpansive(set in sets(), y in coords(), z in coords(), w in weights()) {
        let s = space(&w);
        let yv = Vector::from_slice(s.clone(), &y).unwrap();
        let zv = Vector::from_slice(s, &z).unwrap();
        let py = set.project(&yv).unwrap();
        let pz = set.project(&zv).unwrap();
        prop_assert!((&py - &pz).norm() <= (&yv - &zv).norm() + SLACK);
    }

    #[test]
    fn projection_is_idempotent(set in sets(), y in coords(), w in weights()) {
        let s = space(&w);
        let yv = Vector::from_slice(s, &y).unwrap();
        let p = set.project(&yv).unwrap();
        let pp = set.project(&p).unwrap();
        // a projected point is already in the set, so projecting again moves
        // it at most by roundoff
        prop_assert!((&pp - &p).norm() <= SLACK * (1.0 + p.norm()));
        prop_assert!(set.contains(&p).unwrap());
    }

    #[test]
    fn variational_inequality(set in sets(), y in coords(), z in coords(), w in weights()) {
        // (y - P(y), z - P(y)) <= 0 for every z in the set
        let s = space(&w);
        let yv = Vector::from_slice(s.clone(), &y).unwrap();
        let zv = Vector::from_slice(s, &z).unwrap();
        let py = set.project(&yv).unwrap();
        let pz = set.project(&zv).unwrap(); // a member of the set
        let lhs = (&yv - &py).inner(&(&pz - &py));
        prop_assert!(lhs <= SLACK * (1.0 + yv.norm()) * (1.0 + pz.norm()));
    }

    #[test]
    fn distance_is_one_lipschitz(set in sets(), y in coords(), z in coords(), w in weights()) {
        let s = space(&w);
        let yv = Vector::from_slice(s.clone(), &y).unwrap();
        let zv = Vector::from_slice(s, &z).unwrap();
        let dy = set.dist(&yv).unwrap();
        let dz = set.dist(&zv).unwrap();
        prop_assert!((dy - dz).abs() <= (&yv - &zv).norm() + SLACK);
        prop_assert!(dy >= 0.0);
    }

    #[test]
    fn normal_cone_roundtrip(set in sets(), y in coords(), w in weights()) {
        // lambda := s - P(s) lies in the normal cone at P(s)
        let sp = space(&w);
        let yv = Vector::from_slice(sp, &y).unwrap();
        let p = set.project(&yv).unwrap();
        let lambda = &yv - &p;
        let res = set.normal_cone_residual(&p, &lambda).unwrap();
        prop_assert!(res <= SLACK * (1.0 + yv.norm()));
    }

    #[test]
    fn membership_iff_zero_distance(set in sets(), y in coords(), w in weights()) {
        let s = space(&w);
        let yv = Vector::from_slice(s, &y).unwrap();
        let d = set.dist(&yv).unwrap();
        let inside = set.contains(&yv).unwrap();
        prop_assert_eq!(inside, d <= 1e-12 * (1.0 + yv.norm()));
    }
}
