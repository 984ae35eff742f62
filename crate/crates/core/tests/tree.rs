use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use padic_tree::tree::{
    ball_of_edge, boundary, edge_of_ball, normal_form, reduction, reduction_by_search, Ball, BallKind,
    ExtPoint, TreeEdge, TreePoint, TreeVertex,
};
use padic_tree::{FieldDesc, Mat2, P1Point, PadicScalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn k(p: u64, f: usize) -> Arc<FieldDesc> {
    FieldDesc::unramified(p, f, 10).unwrap()
}

fn random_gl2_o(fd: &Arc<FieldDesc>, rng: &mut ChaCha8Rng) -> Mat2 {
    loop {
        let e = |rng: &mut ChaCha8Rng| PadicScalar::random_integer(fd, rng);
        let m = Mat2::new(e(rng), e(rng), e(rng), e(rng)).unwrap();
        if m.det().is_unit() {
            return m;
        }
    }
}

fn teich_gen(l: &Arc<FieldDesc>) -> PadicScalar {
    PadicScalar::gen(l).teichmuller().unwrap()
}

#[test]
fn neighbors_counts_and_symmetry() {
    let v = TreeVertex::base(&k(3, 1));
    assert_eq!(v.neighbors().len(), 4);
    let v2 = TreeVertex::base(&k(3, 2));
    assert_eq!(v2.neighbors().len(), 10);
    for w in v.neighbors() {
        assert_eq!(v.distance(&w), 1);
        assert!(w.neighbors().contains(&v));
    }
    let distinct: HashSet<_> = v2.neighbors().into_iter().collect();
    assert_eq!(distinct.len(), 10);
}

#[test]
fn distances_and_paths() {
    let fd = k(3, 1);
    let v = TreeVertex::base(&fd);
    let w = TreeVertex::w_star(&fd);
    assert_eq!(v.distance(&w), 1);
    let g = Mat2::from_ints(&fd, [[9, 0], [0, 1]]);
    assert_eq!(v.distance(&v.act(&g).unwrap()), 2);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let verts = v.ball_of_radius(4);
    for _ in 0..100 {
        let a = &verts[rng.gen_range(0..verts.len())];
        let b = &verts[rng.gen_range(0..verts.len())];
        let c = &verts[rng.gen_range(0..verts.len())];
        let path = a.path(b);
        assert_eq!(path.len() as i64, a.distance(b));
        let chain: HashMap<TreeEdge, i64> = path.iter().map(|e| (e.clone(), 1)).collect();
        let mut want: HashMap<TreeVertex, i64> = HashMap::new();
        if a != b {
            want.insert(b.clone(), 1);
            want.insert(a.clone(), -1);
        }
        assert_eq!(boundary(&chain), want);
        let on_path = c == a || path.iter().any(|e| &e.dst == c);
        let sum = a.distance(c) + c.distance(b);
        assert!(a.distance(b) <= sum);
        assert_eq!(a.distance(b) == sum, on_path);
    }
}

#[test]
fn boundary_examples() {
    let fd = k(5, 1);
    let e = TreeEdge::base(&fd);
    let d = boundary(&HashMap::from([(e.clone(), 1)]));
    assert_eq!(d, HashMap::from([(TreeVertex::base(&fd), 1), (TreeVertex::w_star(&fd), -1)]));
    assert!(boundary(&HashMap::from([(e.clone(), 1), (e.reverse(), 1)])).is_empty());
}

#[test]
fn balls_of_edges() {
    let fd = k(3, 1);
    let e = TreeEdge::base(&fd);
    let b = ball_of_edge(&e);
    assert_eq!(b.kind, BallKind::Interior);
    assert_eq!(b.m, 0);
    assert!(b.center.is_zero());
    assert_eq!(ball_of_edge(&e.reverse()), b.complement());
    assert_eq!(edge_of_ball(&b).unwrap(), e);

    // depth-2 edges below v* toward the interior: one ball per class mod p²
    let mut centers = HashSet::new();
    for e1 in e.continuations().into_iter().filter(|x| x.is_descending()) {
        for e2 in e1.continuations().into_iter().filter(|x| x.is_descending()) {
            let bl = ball_of_edge(&e2);
            assert_eq!(bl.m, 2);
            assert_eq!(edge_of_ball(&bl).unwrap(), e2);
            centers.insert(bl.center.to_symmetric_int(2).unwrap().rem_euclid(9));
        }
    }
    assert_eq!(centers, (0..9).collect());
}

#[test]
fn ball_family_partitions_p1() {
    let fd = k(3, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for v in TreeVertex::base(&fd).ball_of_radius(2).iter().take(12) {
        let balls: Vec<Ball> = v.out_edges().iter().map(ball_of_edge).collect();
        let mut pts = vec![P1Point::Infinity];
        for _ in 0..30 {
            let x = PadicScalar::random_integer(&fd, &mut rng).shift_pi(rng.gen_range(-3..3));
            pts.push(P1Point::Finite(x));
        }
        for x in &pts {
            let hits = balls.iter().filter(|b| b.contains(x).unwrap()).count();
            assert_eq!(hits, 1, "{v}");
        }
    }
}

#[test]
fn actions() {
    let fd = k(3, 1);
    let o = Ball::new(BallKind::Interior, &PadicScalar::exact_zero(&fd), 0).unwrap();
    let t = Mat2::from_ints(&fd, [[1, 1], [0, 1]]);
    assert_eq!(o.act(&t).unwrap(), o);
    let v = TreeVertex::base(&fd);
    let d = Mat2::from_ints(&fd, [[3, 0], [0, 1]]);
    assert_eq!(v.act(&d).unwrap().to_string(), "V(1;0)");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let verts = v.ball_of_radius(3);
    for i in 0..40 {
        let g = random_gl2_o(&fd, &mut rng).mul(&Mat2::from_ints(&fd, [[3, i % 5], [0, 1 + 3 * (i % 2)]])).unwrap();
        let gi = g.inv().unwrap();
        let w = &verts[rng.gen_range(0..verts.len())];
        assert_eq!(w.act(&gi).unwrap().act(&g).unwrap(), *w);
        let w2 = &verts[rng.gen_range(0..verts.len())];
        assert_eq!(w.act(&g).unwrap().distance(&w2.act(&g).unwrap()), w.distance(w2));
        // compatibility of balls with the Möbius action on points
        let e = w.out_edges()[0].clone();
        let b = ball_of_edge(&e);
        let gb = ball_of_edge(&e.act(&g).unwrap());
        for _ in 0..5 {
            let x = match b.kind {
                BallKind::Interior => {
                    let c = padic_tree_center(&b);
                    P1Point::Finite(c.add(&PadicScalar::random_integer(&fd, &mut rng).shift_pi(b.m)).unwrap())
                }
                BallKind::CoInterior => P1Point::Infinity,
            };
            assert!(b.contains(&x).unwrap());
            assert!(gb.contains(&g.act(&x).unwrap()).unwrap());
        }
    }
}

fn padic_tree_center(b: &Ball) -> PadicScalar {
    match b.sample() {
        P1Point::Finite(c) => c,
        P1Point::Infinity => unreachable!(),
    }
}

#[test]
fn normal_form_is_coset_invariant() {
    let fd = k(5, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = Mat2::from_ints(&fd, [[25, 7], [5, 3]]);
    let want = normal_form(&g).unwrap();
    for _ in 0..20 {
        let kk = random_gl2_o(&fd, &mut rng);
        assert_eq!(normal_form(&g.mul(&kk).unwrap()).unwrap(), want);
    }
}

#[test]
fn reduction_examples_and_oracle() {
    for f in [1, 2] {
        let fd = k(3, f);
        let l = FieldDesc::unramified(3, 2 * f, 10).unwrap();
        let tau = ExtPoint::new(teich_gen(&l), &fd).unwrap();
        assert_eq!(reduction(&tau).unwrap(), TreePoint::Vertex(TreeVertex::base(&fd)));
        assert_eq!(reduction_by_search(&tau, 3).unwrap(), TreePoint::Vertex(TreeVertex::base(&fd)));
    }
    let fd = k(3, 1);
    let r = FieldDesc::ramified(3, 1, &[1], 10).unwrap();
    let sqrt_p = ExtPoint::new(PadicScalar::uniformizer(&r), &fd).unwrap();
    let want = TreePoint::Midpoint(TreeEdge::new(TreeVertex::base(&fd), TreeVertex::parse(&fd, "V(1;0)").unwrap()).unwrap());
    assert_eq!(reduction(&sqrt_p).unwrap(), want);
    assert_eq!(reduction_by_search(&sqrt_p, 3).unwrap(), want);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l = FieldDesc::unramified(3, 2, 10).unwrap();
    for i in 0..30 {
        let fld = if i % 2 == 0 { &l } else { &r };
        let a = PadicScalar::random_integer(&fd, &mut rng).embed_into(fld).unwrap();
        let base = if i % 2 == 0 { teich_gen(fld) } else { PadicScalar::uniformizer(fld) };
        let t = a.add(&base.shift_pi(fld.e as i64 * rng.gen_range(-1..3))).unwrap();
        let pt = ExtPoint::new(t, &fd).unwrap();
        assert_eq!(reduction(&pt).unwrap(), reduction_by_search(&pt, 4).unwrap());
        // locally constant
        let bump = PadicScalar::random_integer(fld, &mut rng).shift_pi(fld.e as i64 * 6);
        let pt2 = ExtPoint::new(pt.tau.add(&bump).unwrap(), &fd).unwrap();
        assert_eq!(reduction(&pt).unwrap(), reduction(&pt2).unwrap());
    }
}

#[test]
fn reduction_is_equivariant() {
    let fd = k(3, 1);
    let l = FieldDesc::unramified(3, 2, 12).unwrap();
    let l = FieldDesc::unramified(3, 2, 10).map(|_| l).unwrap();
    let r = FieldDesc::ramified(3, 1, &[2], 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..50 {
        let g = random_gl2_o(&fd, &mut rng);
        let (fld, t) = if i % 2 == 0 {
            (&l, teich_gen(&l).add(&PadicScalar::from_int(&l, i)).unwrap())
        } else {
            (&r, PadicScalar::uniformizer(&r).shift_pi(2).add(&PadicScalar::from_int(&r, i)).unwrap())
        };
        let _ = fld;
        let pt = ExtPoint::new(t.clone(), &fd).unwrap();
        let gt = ExtPoint::new(g.act_scalar(&t).unwrap(), &fd).unwrap();
        assert_eq!(reduction(&gt).unwrap(), reduction(&pt).unwrap().act(&g).unwrap());
    }
}

#[test]
fn text_round_trip() {
    for f in [1, 2] {
        let fd = k(5, f);
        for v in TreeVertex::w_star(&fd).ball_of_radius(3) {
            let s = v.to_string();
            assert_eq!(TreeVertex::parse(&fd, &s).unwrap(), v, "{s}");
        }
        let e = TreeEdge::base(&fd);
        assert_eq!(TreeEdge::parse(&fd, &e.to_string()).unwrap(), e);
    }
    let fd = k(3, 1);
    assert_eq!(TreeEdge::base(&fd).to_string(), "E(V(-1;0)->V(0;0))");
    assert!(TreeVertex::parse(&fd, "V(0;").is_err());
    let v = TreeVertex::parse(&fd, "V(0;2/p)").unwrap();
    assert_eq!(v.to_string(), "V(0;2/p)");
}
