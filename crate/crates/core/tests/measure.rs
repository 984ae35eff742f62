use std::collections::HashMap;
use std::sync::Arc;

use num_rational::Ratio;
use padic_tree::measure::{eval_on_divisor, HarmonicMeasure, MeasureJson};
use padic_tree::tree::{Ball, BallKind, ExtPoint, TreeEdge, TreeVertex};
use padic_tree::{FieldDesc, Mat2, PadicScalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn k(p: u64, f: usize) -> Arc<FieldDesc> {
    FieldDesc::unramified(p, f, 10).unwrap()
}

/// Random harmonic measure: each edge value is split at random among its
/// continuations, so harmonicity holds by construction.
fn random_explicit(fd: &Arc<FieldDesc>, depth: i64, rng: &mut ChaCha8Rng) -> HarmonicMeasure {
    let mut entries = HashMap::new();
    let out = TreeVertex::base(fd).out_edges();
    let mut vals: Vec<i64> = (0..out.len() - 1).map(|_| rng.gen_range(-5..=5)).collect();
    vals.push(-vals.iter().sum::<i64>());
    let mut stack: Vec<(TreeEdge, i64, i64)> = out.into_iter().zip(vals).map(|(e, v)| (e, v, 1)).collect();
    while let Some((e, v, d)) = stack.pop() {
        entries.insert(e.clone(), vec![v]);
        if d < depth {
            let cont = e.continuations();
            let mut parts: Vec<i64> = (0..cont.len() - 1).map(|_| rng.gen_range(-3..=3)).collect();
            parts.push(v - parts.iter().sum::<i64>());
            for (c, x) in cont.into_iter().zip(parts) {
                stack.push((c, x, d + 1));
            }
        }
    }
    HarmonicMeasure::explicit(fd, 1, depth, entries).unwrap()
}

fn tau_at(p: u64, k_exp: i64) -> ExtPoint {
    // p^k times a Teichmüller generator of the unramified quadratic extension
    let base = k(p, 1);
    let l = k(p, 2);
    let t = PadicScalar::gen(&l).teichmuller().unwrap().mul(&PadicScalar::p_power(&l, k_exp)).unwrap();
    ExtPoint::new(t, &base).unwrap()
}

#[test]
fn tate_measure_values() {
    for f in [1, 2] {
        let fd = k(3, f);
        let mu = HarmonicMeasure::tate(&fd);
        let z = PadicScalar::exact_zero(&fd);
        let one = PadicScalar::one(&fd);
        assert_eq!(mu.measure_of_ball(&Ball::new(BallKind::Interior, &z, 0).unwrap()).unwrap(), vec![1]);
        assert_eq!(mu.measure_of_ball(&Ball::new(BallKind::Interior, &one, 1).unwrap()).unwrap(), vec![0]);
        assert_eq!(mu.measure_of_ball(&Ball::new(BallKind::CoInterior, &z, 0).unwrap()).unwrap(), vec![-1]);
        assert_eq!(mu.measure_of_ball(&Ball::new(BallKind::CoInterior, &one, 2).unwrap()).unwrap(), vec![0]);
        let rep = mu.validate(8).unwrap();
        assert!(rep.ok, "{rep:?}");
    }
}

#[test]
fn tate_pushes() {
    let fd = k(3, 1);
    let mu = HarmonicMeasure::tate(&fd);
    let q = Mat2::from_ints(&fd, [[9, 0], [0, 1]]);
    let w = Mat2::from_ints(&fd, [[0, 1], [1, 0]]);
    let pq = mu.gamma_push(&q).unwrap();
    let pw = mu.gamma_push(&w).unwrap();
    for e in mu.support_edges(5).unwrap() {
        let v = mu.edge_value(&e).unwrap()[0];
        assert_eq!(pq.edge_value(&e).unwrap()[0], v);
        assert_eq!(pw.edge_value(&e).unwrap()[0], -v);
    }
    assert!(pw.validate(6).unwrap().ok);
}

#[test]
fn random_explicit_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (p, f, depth) in [(3, 1, 4), (5, 1, 3), (3, 2, 2)] {
        let fd = k(p, f);
        let mu = random_explicit(&fd, depth, &mut rng);
        assert!(mu.validate(depth).unwrap().ok);
        // additivity on every interior ball above the resolved depth
        for e in mu.support_edges(depth - 1).unwrap() {
            let b = e.ball();
            let total: i64 = b.children().unwrap().iter().map(|c| mu.measure_of_ball(c).unwrap()[0]).sum();
            assert_eq!(total, mu.measure_of_ball(&b).unwrap()[0]);
        }
        // the complement carries the negative mass
        let e = TreeEdge::base(&fd);
        assert_eq!(mu.edge_value(&e.reverse()).unwrap()[0], -mu.edge_value(&e).unwrap()[0]);

        // JSON round trip
        let j = mu.to_json(depth).unwrap();
        let text = serde_json::to_string(&j).unwrap();
        let back = HarmonicMeasure::from_json(&serde_json::from_str::<MeasureJson>(&text).unwrap()).unwrap();
        for e in mu.support_edges(depth).unwrap() {
            assert_eq!(back.edge_value(&e).unwrap(), mu.edge_value(&e).unwrap());
        }

        // a corrupted entry is caught
        let mut bad = j.clone();
        bad.entries[0].1[0] += 1;
        assert!(HarmonicMeasure::from_json(&bad).is_err());
    }
}

#[test]
fn push_round_trip_on_gl2_o() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fd = k(3, 1);
    let mu = random_explicit(&fd, 4, &mut rng);
    let g = Mat2::from_ints(&fd, [[2, 1], [3, 1]]);
    let gi = g.inv().unwrap();
    let back = mu.gamma_push(&g).unwrap().gamma_push(&gi).unwrap();
    for e in mu.support_edges(4).unwrap() {
        assert_eq!(back.edge_value(&e).unwrap(), mu.edge_value(&e).unwrap());
    }
    // γ ∈ GL2(𝒪) fixes v*, so the push stays inside the resolved depth
    assert!(mu.gamma_push(&g).unwrap().validate(4).unwrap().ok);
}

#[test]
fn divisor_evaluation_matches_valuations() {
    let fd = k(3, 1);
    let mu = HarmonicMeasure::tate(&fd);
    for (a, b) in [(2, -1), (0, 3), (-2, -2), (4, 1)] {
        let v = eval_on_divisor(&mu, &tau_at(3, a), &tau_at(3, b)).unwrap();
        assert_eq!(v, vec![Ratio::from_integer(a - b)]);
    }
    // a midpoint: √3 has valuation 1/2
    let l = FieldDesc::ramified(3, 1, &[1], 10).unwrap();
    let s = ExtPoint::new(PadicScalar::uniformizer(&l), &fd).unwrap();
    let v = eval_on_divisor(&mu, &s, &tau_at(3, 0)).unwrap();
    assert_eq!(v, vec![Ratio::new(1, 2)]);
}

#[test]
fn log_kernel_against_tate() {
    // ∫ log_N((t−τ₁)/(t−τ₂)) dμ_T = log_N(τ₁/τ₂): the sample 0 is exact
    let fd = k(3, 1);
    let mu = HarmonicMeasure::tate(&fd);
    let l = k(3, 2);
    let t1 = PadicScalar::from_coeffs(&l, &[1, 3]);
    let t2 = PadicScalar::from_coeffs(&l, &[2, 1]).mul(&PadicScalar::p_power(&l, 2)).unwrap();
    let e1 = ExtPoint::new(t1.clone(), &fd).unwrap();
    let e2 = ExtPoint::new(t2.clone(), &fd).unwrap();
    let r = mu.integrate_log_kernel(&e1, &e2, 8).unwrap();
    let oracle = t1.div(&t2).unwrap().log_norm().unwrap();
    assert!(r.guaranteed_prec >= 5);
    assert!(r.components[0].eq_mod(&oracle, r.guaranteed_prec));
    let ind = mu
        .integrate_locally_constant(4, |b| (b.kind == BallKind::Interior && b.m >= 0) as i64)
        .unwrap();
    assert_eq!(ind, vec![1]);
}
