use std::collections::BTreeSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use selbal::bounds::{
    binomial, binomial_volume_bound_holds, pigeonhole_exceeds_power_bound, prop1_condition,
    prop1_threshold,
};
use selbal::construction::{build_instance, plan_parameters};
use selbal::geometry::{is_strictly_convex, PointSet};
use selbal::solver::{solve_exhaustive_real, structural_verify, RealFamily, RealVerdict};

fn cross(o: &[i64], a: &[i64], b: &[i64]) -> i64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Vertices of the convex hull, dropping points on edges.
fn hull(mut pts: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    pts.sort();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<i64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<i64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[test]
fn strict_convexity_matches_hull_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut convex = 0;
    for _ in 0..2000 {
        let size = rng.random_range(1..=7);
        let mut set = BTreeSet::new();
        while set.len() < size {
            set.insert(vec![
                rng.random_range(-3..=3i64),
                rng.random_range(-3..=3i64),
            ]);
        }
        let pts: Vec<Vec<i64>> = set.into_iter().collect();
        let expected = hull(pts.clone()).len() == pts.len();
        let got = is_strictly_convex(&PointSet::new(2, pts.clone()).unwrap());
        assert_eq!(got, expected, "{pts:?}");
        convex += expected as usize;
    }
    assert!(convex > 100 && convex < 1900);
}

#[test]
fn binomial_volume_bound_sweep() {
    for n in 1..=64u64 {
        let mut m = n;
        while m <= 64 * n {
            assert!(
                binomial_volume_bound_holds(m, n).unwrap(),
                "m = {m}, n = {n}"
            );
            m = m * 5 / 4 + 1;
        }
    }
}

#[test]
fn binomials_match_pascal() {
    let mut row = vec![BigInt::from(1)];
    for n in 1..=60u64 {
        let mut next = vec![BigInt::from(1); n as usize + 1];
        for k in 1..n as usize {
            next[k] = &row[k - 1] + &row[k];
        }
        row = next;
        for k in 0..=n {
            assert_eq!(binomial(n, k), row[k as usize]);
        }
    }
    assert_eq!(binomial(3, 5), BigInt::from(0));
}

#[test]
fn power_bound_crossover() {
    for d in 1..=12u32 {
        let lhs = ((d as f64 + 1.0).exp2() + 1.0).powi(d as i32) - 1.0;
        let float = lhs > (d as f64 * d as f64 + d as f64).exp2();
        let side = (1u64 << d) * 2 + 1;
        let exact = BigInt::from(side).pow(d) - 1u32 > BigInt::from(1) << (d * d + d);
        assert_eq!(pigeonhole_exceeds_power_bound(d), exact, "d = {d}");
        if d > 2 {
            assert_eq!(exact, float, "d = {d}");
        }
    }
}

#[test]
fn threshold_agrees_with_float_margin_away_from_the_boundary() {
    let margin = |m: u64, n: u64| {
        let (m, n) = (m as f64, n as f64);
        m * std::f64::consts::LN_2 - n - n * ((m + 2.0 * n) / n).ln() - 0.5 * n * (n + 1.0).ln()
    };
    for n in [1u64, 2, 3, 7, 25, 100, 999] {
        let t = prop1_threshold(n).unwrap().unwrap();
        assert!(margin(t, n) > 0.0);
        assert!(t == 1 || margin(t - 1, n) <= 0.0);
        for m in [t / 2 + 1, t + 10, 2 * t] {
            assert_eq!(
                prop1_condition(m, n).unwrap(),
                margin(m, n) > 0.0,
                "m = {m}, n = {n}"
            );
        }
    }
}

#[test]
fn planned_constructions_verify() {
    assert!(plan_parameters(1.5, 2).is_err());
    for (lambda, d) in [(2.0, 2), (1.5, 3)] {
        let plan = plan_parameters(lambda, d).unwrap();
        let fam = build_instance(&plan.params().unwrap()).unwrap();
        assert_eq!(fam.len() as u128, plan.vector_count);
        assert_eq!(Some(fam.dim() as u128), plan.ambient_dim);
        assert!(structural_verify(&fam).unwrap().is_not_balancing());
    }
}

#[test]
fn families_at_the_threshold_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=3u64 {
        let m = prop1_threshold(n).unwrap().unwrap();
        for _ in 0..20 {
            let vectors: Vec<Vec<f64>> = (0..m)
                .map(|_| loop {
                    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if len > 0.1 && len <= 1.0 {
                        break v.iter().map(|x| x / len).collect();
                    }
                })
                .collect();
            let fam = RealFamily::new(vectors, 1e-9).unwrap();
            let verdict = solve_exhaustive_real(&fam, 1e-9, u64::MAX).unwrap();
            assert!(
                matches!(verdict, RealVerdict::Balancing { .. }),
                "n = {n}, m = {m}: {}",
                verdict.label()
            );
        }
    }
}
