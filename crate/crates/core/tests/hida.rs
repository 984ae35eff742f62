mod common;

use std::collections::HashMap;
use std::sync::Arc;

use padic_tree::hida::*;
use padic_tree::measure::HarmonicMeasure;
use padic_tree::mumford::{build_quotient, canonical_point, SchottkyGroup};
use padic_tree::tree::{reduction, TreeEdge, TreePoint, TreeVertex};
use padic_tree::{Error, FieldDesc, Mat2, PadicScalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn qp(n: i64) -> Arc<FieldDesc> {
    FieldDesc::unramified(3, 1, n).unwrap()
}

fn germ(fd: &Arc<FieldDesc>, c: &[i64]) -> Germ {
    Germ::from_coeffs(c.iter().map(|&x| PadicScalar::from_int(fd, x)).collect()).unwrap()
}

/// Tate curve q = 36 over ℚ₃ with the balanced generator, and its lift.
fn tate_lift() -> (Arc<FormSpace>, LiftedForm) {
    let fd = qp(12);
    let grp = SchottkyGroup::tate_balanced(&PadicScalar::from_int(&fd, 36)).unwrap();
    let q = build_quotient(&grp, 10).unwrap();
    let space = Arc::new(FormSpace::new(&q).unwrap());
    let phi = space.weight_two(&[1, 1]).unwrap();
    let lf = ordinary_lift(&space, &phi, &LiftOptions::default()).unwrap();
    (space, lf)
}

fn nu(fd: &Arc<FieldDesc>, a1: i64) -> NuModel {
    NuModel::new(fd, germ(fd, &[1, a1, 0]), 4, 8).unwrap()
}

#[test]
fn germ_algebra() {
    let fd = qp(10);
    let g = germ(&fd, &[1, 3, 5, -2]);
    let h = germ(&fd, &[2, -1, 7, 4]);
    assert!(g.mul(&h).unwrap().div(&h).unwrap().eq_mod(&g, 9));
    assert!(g.pow(-3).unwrap().mul(&g.pow(3).unwrap()).unwrap().eq_mod(&Germ::one(&fd, 3), 9));
    assert!(g.log().unwrap().exp().unwrap().eq_mod(&g, 8));
    let r = g.root(2, &PadicScalar::one(&fd)).unwrap();
    assert!(r.mul(&r).unwrap().eq_mod(&g, 9));

    // exp(wx) = Σ x^k w^k / k!
    let x = PadicScalar::from_int(&fd, 6);
    let e = Germ::exp_linear(&x, 3).unwrap();
    let want = [1, 6, 18, 36];
    for (c, w) in e.coeffs.iter().zip(want) {
        assert!(c.eq_mod(&PadicScalar::from_int(&fd, w), 9));
    }
    assert!(germ(&fd, &[2, 1]).exp().is_err());

    let j = g.to_json();
    assert!(Germ::from_json(&fd, &j).unwrap().eq_mod(&g, 10));
}

#[test]
fn traces_and_conjugates() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let l = FieldDesc::unramified(3, 2, 10).unwrap();
    let k = l.base();
    for _ in 0..10 {
        let x = PadicScalar::random_integer(&l, &mut rng);
        let conj = x.conjugates().unwrap();
        assert_eq!(conj.len(), 2);
        let tr = x.trace_to_base().unwrap();
        let sum = conj[0].add(&conj[1]).unwrap();
        assert!(sum.restrict_to_base().unwrap().eq_mod(&tr, 9));
        let nm = conj[0].mul(&conj[1]).unwrap().restrict_to_base().unwrap();
        assert!(nm.eq_mod(&x.norm_to_base().unwrap(), 9));
        let a = PadicScalar::random_integer(&k, &mut rng);
        let two_a = a.scale_int(2).unwrap();
        assert!(a.embed_into(&l).unwrap().trace_to_base().unwrap().eq_mod(&two_a, 9));
    }
    // ℚ₃(√3): tr(a + bπ) = 2a
    let r = FieldDesc::ramified(3, 1, &[1], 8).unwrap();
    let a = PadicScalar::from_int(&r, 5);
    let x = a.add(&PadicScalar::uniformizer(&r).scale_int(7).unwrap()).unwrap();
    assert!(x.trace_to_base().unwrap().eq_mod(&PadicScalar::from_int(&r.base(), 10), 7));
}

#[test]
fn tate_lift_eigenvalue() {
    let (space, lf) = tate_lift();
    let fd = space.field().clone();
    assert!(*lf.residual_history.last().unwrap() >= 6, "{:?}", lf.residual_history);
    assert!(lf.eigen_residual().unwrap() >= 6);
    assert!(lf.alpha.value_at_zero().eq_mod(&PadicScalar::one(&fd), 12));
    // α′(0) = −ℒ/2 with ℒ = log q / ord q = log 4 / 2
    let want = PadicScalar::from_int(&fd, 4).iwasawa_log().unwrap().div(&PadicScalar::from_int(&fd, -4)).unwrap();
    assert!(lf.alpha.derivative().eq_mod(&want, 6), "{} vs {want}", lf.alpha.derivative());
    // ρ₂ recovers the input
    let rho = space.specialize(&lf.ctx, &lf.form, 2).unwrap();
    assert!(rho.eq_mod(&lf.weight_two, 6));
    assert!(space.specialize(&lf.ctx, &lf.form, 4).is_err());
}

#[test]
fn weight_two_hecke() {
    let (space, _) = tate_lift();
    let fd = space.field().clone();
    let plus = space.weight_two(&[1, 1]).unwrap();
    assert!(space.hecke_scalar(&plus).unwrap().eq_mod(&PadicScalar::one(&fd), 11));
    let minus = space.weight_two(&[1, -1]).unwrap();
    assert!(space.hecke_scalar(&minus).unwrap().eq_mod(&PadicScalar::from_int(&fd, -1), 11));
    assert!(matches!(space.weight_two(&[1]), Err(Error::RankMismatch { .. })));
}

fn random_int_form(space: &FormSpace, ctx: &SliceCtx, rng: &mut ChaCha8Rng) -> DistForm {
    let fd = &ctx.field;
    let mut out = DistForm::default();
    for r in &space.reps {
        let mut d = SliceDist::default();
        for _ in 0..3 {
            let depth = rng.gen_range(1..=ctx.depth_cap);
            let center = 3 * rng.gen_range(0..3u64.pow(depth as u32 - 1));
            let mom = (0..=ctx.moments)
                .map(|_| Germ::constant(PadicScalar::from_int(fd, rng.gen_range(-20..=20)), 0))
                .collect();
            d.balls.insert((depth, center), mom);
        }
        out.dists.insert(r.clone(), d);
    }
    out
}

#[test]
fn specialization_commutes_with_hecke() {
    let (space, _) = tate_lift();
    let fd = space.field().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in [2i64, 4] {
        let ctx = SliceCtx::new(&fd, 3, 6, Weight::Int(k)).unwrap();
        for _ in 0..3 {
            let d = random_int_form(&space, &ctx, &mut rng);
            let lhs = space.specialize(&ctx, &space.up(&ctx, &d).unwrap(), k).unwrap();
            let rhs = space.hecke_tp(&space.specialize(&ctx, &d, k).unwrap()).unwrap();
            assert!(lhs.eq_mod(&rhs, 8), "k = {k}");
        }
    }
}

#[test]
fn identities_hold() {
    let fd = qp(12);
    let (_, lf) = tate_lift();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sources: Vec<Box<dyn EdgeDistributions>> = vec![Box::new(lf), Box::new(nu(&fd, 0)), Box::new(nu(&fd, 2))];
    for src in &sources {
        for _ in 0..2 {
            let tau = common::random_tau(&fd, &mut rng);
            let th = Theta::new(src.as_ref(), &tau).unwrap();
            for v in [TreeVertex::base(&fd), TreeVertex::base(&fd).out_edges()[2].dst.clone()] {
                for c in check_identities(&th, &Lattice::of(&v), 6).unwrap() {
                    assert!(c.ok, "{}: {}", c.name, c.detail);
                }
            }
        }
    }
}

#[test]
fn lattice_bookkeeping() {
    let fd = qp(8);
    let v = TreeVertex::base(&fd).out_edges()[1].dst.clone();
    let l = Lattice::of(&v).scale(2);
    assert_eq!(l.ordet(), v.n + 4);
    let subs = l.sublattices().unwrap();
    assert_eq!(subs.len(), 4);
    let mut dsts: Vec<_> = subs.iter().map(|s| s.dst.clone()).collect();
    let mut nbrs: Vec<_> = v.out_edges().into_iter().map(|e| e.dst).collect();
    dsts.sort_by_key(|x| x.to_string());
    nbrs.sort_by_key(|x| x.to_string());
    assert_eq!(dsts, nbrs);
    for s in &subs {
        // index p: ord det L₂ = ord det L₁ + 1
        assert_eq!(s.l2().ordet(), l.ordet() + 1);
        assert_eq!(s.back().back(), s.scale(-1));
    }
}

#[test]
fn nu_model_measure_is_tate() {
    let fd = qp(10);
    let mu = measure_from_forms(vec![Arc::new(nu(&fd, 1))]).unwrap();
    assert!(mu.validate(4).unwrap().ok);
    let tate = HarmonicMeasure::tate(&fd);
    let mut stack: Vec<(TreeEdge, i64)> = TreeVertex::base(&fd).out_edges().into_iter().map(|e| (e, 1)).collect();
    while let Some((e, d)) = stack.pop() {
        assert_eq!(mu.edge_value(&e).unwrap(), tate.edge_value(&e).unwrap(), "{e}");
        if d < 4 {
            stack.extend(e.continuations().into_iter().map(|c| (c, d + 1)));
        }
    }
    let bad = NuModel::new(&fd, germ(&fd, &[3, 1]), 2, 4);
    assert!(matches!(bad, Err(Error::NotOrdinary(_))));
    let half = NuModel::new(&fd, germ(&fd, &[2, 0]), 2, 4).unwrap();
    assert!(measure_from_forms(vec![Arc::new(half)]).is_err());
}

#[test]
fn lifted_measure_is_harmonic() {
    let (_, lf) = tate_lift();
    let fd = lf.ctx.field.clone();
    let mu = measure_from_forms(vec![Arc::new(lf)]).unwrap();
    assert!(mu.validate(5).unwrap().ok);
    let tate = HarmonicMeasure::tate(&fd);
    let e = TreeVertex::base(&fd).out_edges()[0].clone();
    let s = mu.edge_value(&e).unwrap()[0] * tate.edge_value(&e).unwrap()[0];
    assert_eq!(s.abs(), 1);
}

#[test]
fn decomposition_of_differences() {
    let fd = qp(12);
    let (_, lf) = tate_lift();
    let base = TreeVertex::base(&fd);
    let far = base.out_edges()[1].dst.out_edges()[2].dst.clone();
    let pts: Vec<_> = [base.clone(), base.out_edges()[0].dst.clone(), far]
        .iter()
        .map(|v| canonical_point(v).unwrap())
        .collect();
    let sources: Vec<Arc<dyn EdgeDistributions>> = vec![Arc::new(lf), Arc::new(nu(&fd, 0)), Arc::new(nu(&fd, 1))];
    for src in sources {
        for (t1, t2) in [(&pts[0], &pts[1]), (&pts[1], &pts[2]), (&pts[2], &pts[0])] {
            let r = decomposition_check(src.clone(), t1, t2, 8).unwrap();
            assert!(r.certified_mod >= 3, "certified only mod p^{}", r.certified_mod);
            assert!(r.vanishes_mod(r.certified_mod), "residual {} (lhs {})", r.residual, r.lhs);
        }
    }
}

#[test]
fn fixed_points() {
    let fd = qp(12);
    let cases = [([[1i64, 3], [1, 1]], 2), ([[0, 3], [1, 0]], 2), ([[1, 2], [1, 1]], 1), ([[1, 1], [-1, 1]], 1)];
    for (m, e_or_f) in cases {
        let mm = Mat2::from_ints(&fd, m);
        let tau = fixed_point_of_embedding(&mm).unwrap();
        let l = tau.field().clone();
        assert_eq!(l.degree(), 2);
        assert_eq!(if e_or_f == 2 { l.e } else { l.f }, 2);
        let c = |x: i64| PadicScalar::from_int(&l, x);
        let t = &tau.tau;
        let val = c(m[1][0]).mul(&t.mul(t).unwrap()).unwrap()
            .add(&c(m[1][1] - m[0][0]).mul(t).unwrap()).unwrap()
            .sub(&c(m[0][1])).unwrap();
        assert!(val.is_zero() || val.ord().unwrap() >= 10.into(), "{m:?}: {val}");
        let lats = embedding_lattices(&tau).unwrap();
        match reduction(&tau).unwrap() {
            TreePoint::Vertex(_) => assert_eq!(lats.len(), 1),
            TreePoint::Midpoint(_) => assert_eq!(lats.len(), 2),
        }
    }
    // Δ = −3⁵: an integer matrix keeps τ at full precision, a 12-digit one cannot
    let m = [[5i64, -7], [9, 2]];
    let exact = fixed_point_of_int_matrix(&fd, m).unwrap();
    let rough = fixed_point_of_embedding(&Mat2::from_ints(&fd, m)).unwrap();
    assert!(exact.tau.abs_prec() > rough.tau.abs_prec());
    let l = exact.field().clone();
    let c = |x: i64| PadicScalar::from_int(&l, x);
    let t = &exact.tau;
    let val = c(9).mul(&t.mul(t).unwrap()).unwrap().add(&c(-3).mul(t).unwrap()).unwrap().add(&c(7)).unwrap();
    assert!(val.eq_mod(&PadicScalar::exact_zero(&l), 12), "{val}");
    assert!(fixed_point_of_int_matrix(&fd, [[1, 1], [0, 2]]).is_err());
    assert!(fixed_point_of_int_matrix(&fd, [[1, 0], [1, 1]]).is_err());
    assert!(fixed_point_of_embedding(&Mat2::from_ints(&fd, [[0, 1], [1, 0]])).is_err());
    assert!(fixed_point_of_embedding(&Mat2::from_ints(&fd, [[1, 1], [0, 2]])).is_err());
}

#[test]
fn partial_lp_germ() {
    let (_, lf) = tate_lift();
    let fd = lf.ctx.field.clone();
    let c = PadicScalar::from_int(&fd, 4);
    let mut seen: HashMap<String, Germ> = HashMap::new();
    for m in [[[1i64, 3], [1, 1]], [[0, 3], [1, 0]], [[1, 2], [1, 1]]] {
        let tau = fixed_point_of_embedding(&Mat2::from_ints(&fd, m)).unwrap();
        let lats = embedding_lattices(&tau).unwrap();
        let lp = partial_lp(&lf, &tau, &lats, &c).unwrap();
        assert!(lp.value_at_zero().eq_mod(&PadicScalar::exact_zero(&fd), 10));
        let th = Theta::new(&lf, &tau).unwrap();
        let want = c.angle().unwrap().mul(&th.i_point().unwrap()).unwrap();
        assert!(lp.derivative().eq_mod(&want, 9));
        if let Some(prev) = seen.get(&tau.tau.to_string()) {
            assert!(prev.eq_mod(&lp, 9));
        }
        seen.insert(tau.tau.to_string(), lp);
    }
    assert!(partial_lp(&lf, &common::random_tau(&fd, &mut ChaCha8Rng::seed_from_u64(1)), &[], &c).is_err());
}
