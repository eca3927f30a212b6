use ncdf_core::{
    epsilon_max, in_neighborhood, log10_volume_ratio, log_volume, lp_distance, NeighborhoodSpec,
    NormParam,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Euclidean ball volume by the two-step recurrence `V_d = V_{d-2}·2πr²/d`.
fn euclidean_ball(d: usize, r: f64) -> f64 {
    let mut v = vec![1.0, 2.0 * r];
    for k in 2..=d {
        v.push(v[k - 2] * 2.0 * std::f64::consts::PI * r * r / k as f64);
    }
    v[d]
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn log_volume_matches_closed_forms() {
    for d in 1..=20 {
        for eps in [0.25, 1.0, 1.7] {
            let l2 = log_volume(eps, d, NormParam::Finite(2.0)).unwrap().exp();
            assert!(
                rel_err(l2, euclidean_ball(d, eps)) < 1e-10,
                "p=2 d={d} eps={eps}"
            );
            let l1 = log_volume(eps, d, NormParam::Finite(1.0)).unwrap().exp();
            let cross = (2.0 * eps).powi(d as i32) / factorial(d);
            assert!(rel_err(l1, cross) < 1e-10, "p=1 d={d} eps={eps}");
            let cube = log_volume(eps, d, NormParam::Infinity).unwrap().exp();
            assert!(
                rel_err(cube, (2.0 * eps).powi(d as i32)) < 1e-10,
                "p=inf d={d}"
            );
        }
    }
}

#[test]
fn log_volume_increases_with_radius_and_norm() {
    let ps = [0.0625, 0.25, 0.5, 1.0, 2.0, 4.0, 16.0];
    for d in [1, 2, 5, 30] {
        let mut prev = f64::NEG_INFINITY;
        for &p in &ps {
            let v = log_volume(0.5, d, NormParam::Finite(p)).unwrap();
            assert!(v >= prev - 1e-12, "d={d} p={p}");
            prev = v;
        }
        assert!(log_volume(0.5, d, NormParam::Infinity).unwrap() >= prev - 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.01, 0.1, 0.5, 1.0, 3.0] {
            let v = log_volume(eps, d, NormParam::Finite(0.5)).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }
}

#[test]
fn volume_ratio_is_zero_at_the_largest_radius() {
    for d in [1, 3, 10] {
        for p in [
            NormParam::Finite(1.0),
            NormParam::Finite(2.0),
            NormParam::Infinity,
        ] {
            let r = log10_volume_ratio(epsilon_max(d, p), d, p);
            assert!(r.abs() < 1e-12, "d={d} p={p}");
        }
    }
}

/// A point of the unit ball around `center`, radially scaled from a random
/// direction; a quarter of the draws sit just inside the boundary.
fn random_member(rng: &mut ChaCha8Rng, center: &[f64], p: NormParam) -> Vec<f64> {
    let u: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = lp_distance(&u, &vec![0.0; u.len()], p).unwrap();
    let radius = if rng.gen_bool(0.25) {
        1.0 - 1e-12
    } else {
        rng.gen::<f64>()
    };
    center
        .iter()
        .zip(&u)
        .map(|(c, x)| c + x * radius / norm)
        .collect()
}

/// For a norm (`p ≥ 1`) the ball is convex: any convex combination of two
/// members is a member.
#[test]
fn balls_are_convex_for_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [
        NormParam::Finite(1.0),
        NormParam::Finite(2.0),
        NormParam::Infinity,
    ] {
        for d in [2usize, 8] {
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ball = NeighborhoodSpec::new(center.clone(), 1.0).unwrap();
            for _ in 0..10_000 {
                let a = random_member(&mut rng, &center, p);
                let b = random_member(&mut rng, &center, p);
                assert!(in_neighborhood(&a, &ball, p).unwrap());
                assert!(in_neighborhood(&b, &ball, p).unwrap());
                let t: f64 = rng.gen();
                let mix: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .map(|(x, y)| t * x + (1.0 - t) * y)
                    .collect();
                let dist = lp_distance(&mix, &center, p).unwrap();
                assert!(dist <= 1.0 + 1e-12, "p={p} d={d} dist={dist}");
            }
        }
    }
}

#[test]
fn half_norm_ball_is_not_convex() {
    let p = NormParam::Finite(0.5);
    let ball = NeighborhoodSpec::new(vec![0.0, 0.0], 1.0).unwrap();
    assert!(in_neighborhood(&[1.0, 0.0], &ball, p).unwrap());
    assert!(in_neighborhood(&[0.0, 1.0], &ball, p).unwrap());
    let mid = lp_distance(&[0.5, 0.5], &[0.0, 0.0], p).unwrap();
    assert!((mid - 2.0).abs() < 1e-12);
    assert!(!in_neighborhood(&[0.5, 0.5], &ball, p).unwrap());
}

fn norm_strategy() -> impl Strategy<Value = NormParam> {
    prop_oneof![
        Just(NormParam::Finite(1.0)),
        Just(NormParam::Finite(2.0)),
        Just(NormParam::Finite(3.5)),
        Just(NormParam::Infinity),
    ]
}

proptest! {
    #[test]
    fn triangle_inequality(
        p in norm_strategy(),
        pts in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 4), 3),
    ) {
        let ab = lp_distance(&pts[0], &pts[1], p).unwrap();
        let bc = lp_distance(&pts[1], &pts[2], p).unwrap();
        let ac = lp_distance(&pts[0], &pts[2], p).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9 * (1.0 + ab + bc));
    }

    #[test]
    fn distance_is_symmetric(
        m in -6i32..3,
        x in prop::collection::vec(-1.0f64..1.0, 5),
        y in prop::collection::vec(-1.0f64..1.0, 5),
    ) {
        let p = NormParam::dyadic(m);
        prop_assert_eq!(lp_distance(&x, &y, p).unwrap(), lp_distance(&y, &x, p).unwrap());
        prop_assert_eq!(lp_distance(&x, &x, p).unwrap(), 0.0);
    }

    #[test]
    fn norm_literals_round_trip(m in -30i32..30) {
        let p = NormParam::dyadic(m);
        let parsed: NormParam = p.to_string().parse().unwrap();
        prop_assert_eq!(parsed, p);
    }
}
