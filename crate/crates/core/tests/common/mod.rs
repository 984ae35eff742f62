#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use padic_tree::measure::HarmonicMeasure;
use padic_tree::tree::{ExtPoint, TreeEdge, TreeVertex};
use padic_tree::{FieldDesc, PadicScalar};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn k(p: u64, f: usize) -> Arc<FieldDesc> {
    FieldDesc::unramified(p, f, 10).unwrap()
}

/// Random harmonic measure: each edge value is split at random among its
/// continuations, so harmonicity holds by construction.
pub fn random_explicit(fd: &Arc<FieldDesc>, rank: usize, depth: i64, rng: &mut ChaCha8Rng) -> HarmonicMeasure {
    let split = |v: &[i64], n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec<i64>> {
        let mut parts: Vec<Vec<i64>> = (0..n - 1).map(|_| (0..rank).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let last: Vec<i64> = (0..rank).map(|j| v[j] - parts.iter().map(|x| x[j]).sum::<i64>()).collect();
        parts.push(last);
        parts
    };
    let mut entries = HashMap::new();
    let out = TreeVertex::base(fd).out_edges();
    let vals = split(&vec![0; rank], out.len(), rng);
    let mut stack: Vec<(TreeEdge, Vec<i64>, i64)> = out.into_iter().zip(vals).map(|(e, v)| (e, v, 1)).collect();
    while let Some((e, v, d)) = stack.pop() {
        if d < depth {
            let cont = e.continuations();
            for (c, x) in cont.iter().zip(split(&v, cont.len(), rng)) {
                stack.push((c.clone(), x, d + 1));
            }
        }
        entries.insert(e, v);
    }
    HarmonicMeasure::explicit(fd, rank, depth, entries).unwrap()
}

/// A random point a + p^k ξ of the upper half plane over ℚ_{p^{2f}}, or
/// its inverse, so that red(τ) lies within distance 4 of v*.
pub fn random_tau(base: &Arc<FieldDesc>, rng: &mut ChaCha8Rng) -> ExtPoint {
    let l = FieldDesc::unramified(base.p, 2 * base.f, base.n).unwrap();
    loop {
        let a = PadicScalar::random_integer(base, rng).embed_into(&l).unwrap();
        let xi = PadicScalar::random_integer(&l, rng);
        let x = a.add(&xi.mul(&PadicScalar::p_power(&l, rng.gen_range(0..=3))).unwrap()).unwrap();
        let x = if rng.gen_bool(0.3) && !x.is_zero() { x.inv().unwrap() } else { x };
        if let Ok(t) = ExtPoint::new(x, base) {
            return t;
        }
    }
}
