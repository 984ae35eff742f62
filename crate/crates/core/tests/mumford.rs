mod common;

use common::{k, random_tau};
use num_rational::Ratio;
use padic_tree::integral::{gamma_invariance_check, mult_integral};
use padic_tree::measure::HarmonicMeasure;
use padic_tree::mumford::{
    build_quotient, l_invariant, log_norm_a, periods, phi_x, universal_measure, GroupPackage, PeriodMap, SchottkyGroup,
};
use padic_tree::tree::{TreeEdge, TreeVertex};
use padic_tree::{FieldDesc, Mat2, PadicScalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tate_group(fd: &std::sync::Arc<FieldDesc>, q: i64) -> SchottkyGroup {
    SchottkyGroup::tate(&PadicScalar::from_int(fd, q)).unwrap()
}

/// γ₁ = diag(9, 1) and its conjugate by z ↦ (2z + 1)/(z + 1), balls
/// ℙ¹∖𝒪, 9𝒪, 2 + 3𝒪, 1 + 9𝒪.
fn standard_pair(fd: &std::sync::Arc<FieldDesc>) -> SchottkyGroup {
    let g1 = Mat2::from_ints(fd, [[9, 0], [0, 1]]);
    let h = Mat2::from_ints(fd, [[2, 1], [1, 1]]);
    let g2 = h.mul(&g1).unwrap().mul(&h.inv().unwrap()).unwrap();
    let e1m = TreeEdge::base(fd).reverse();
    let e1p = e1m.reverse().act(&g1).unwrap();
    let e2m = e1m.act(&h).unwrap();
    let e2p = e1p.act(&h).unwrap();
    SchottkyGroup::new(vec![g1, g2], Some(vec![(e1m, e1p), (e2m, e2p)]), None, None).unwrap()
}

#[test]
fn quotient_shapes() {
    let fd = k(3, 1);
    let q2 = build_quotient(&tate_group(&fd, 9), 6).unwrap();
    assert_eq!((q2.vertices.len(), q2.edges.len(), q2.betti()), (2, 2, 1));
    let q1 = build_quotient(&tate_group(&fd, 3), 6).unwrap();
    assert_eq!((q1.vertices.len(), q1.edges.len(), q1.betti()), (1, 1, 1));
    assert_eq!(q1.edges[0].src, q1.edges[0].dst);
    let g2 = build_quotient(&standard_pair(&fd), 6).unwrap();
    assert_eq!(g2.betti(), 2);
    assert_eq!(g2.vertices.len(), 3);
    assert!(g2.to_dot().contains("->"));
}

#[test]
fn certification_rejects_bad_data() {
    let fd = k(3, 1);
    let ell = Mat2::from_ints(&fd, [[0, -1], [1, 0]]);
    assert!(SchottkyGroup::new(vec![ell], None, None, None).is_err());
    let g1 = Mat2::from_ints(&fd, [[9, 0], [0, 1]]);
    let e = TreeEdge::base(&fd);
    assert!(SchottkyGroup::new(vec![g1.clone()], Some(vec![(e.clone(), e.reverse())]), None, None).is_err());
    // the same generator twice shares its balls
    let ok = tate_group(&fd, 9);
    let pp = ok.pingpong()[0].clone();
    assert!(SchottkyGroup::new(vec![g1.clone(), g1], Some(vec![pp.clone(), pp]), None, None).is_err());
}

#[test]
fn universal_measure_properties() {
    let fd = k(3, 1);
    for grp in [tate_group(&fd, 9), tate_group(&fd, 27), standard_pair(&fd)] {
        let q = build_quotient(&grp, 8).unwrap();
        let mu = universal_measure(&q);
        assert_eq!(mu.rank(), grp.genus());
        let rep = mu.validate(8).unwrap();
        assert!(rep.ok, "{rep:?}");
        // the closing edges carry the identity matrix
        for (i, (_, ep)) in grp.pingpong().iter().enumerate() {
            let v = mu.edge_value(ep).unwrap();
            let unit: Vec<i64> = (0..grp.genus()).map(|j| (i == j) as i64).collect();
            assert_eq!(v, unit);
        }
        for g in grp.generators() {
            let pushed = mu.gamma_push(g).unwrap();
            for e in mu.support_edges(6).unwrap() {
                assert_eq!(pushed.edge_value(&e).unwrap(), mu.edge_value(&e).unwrap());
            }
        }
    }
    // the Tate group recovers δ₀ − δ_∞
    let mu = universal_measure(&build_quotient(&tate_group(&fd, 9), 6).unwrap());
    let t = HarmonicMeasure::tate(&fd);
    for e in TreeVertex::base(&fd).ball_of_radius(4).iter().flat_map(|v| v.out_edges()) {
        assert_eq!(mu.edge_value(&e).unwrap(), t.edge_value(&e).unwrap());
    }
}

#[test]
fn tate_periods_and_l_invariant() {
    let fd = FieldDesc::unramified(3, 1, 12).unwrap();
    let grp = tate_group(&fd, 36);
    let q = build_quotient(&grp, 10).unwrap();
    let per = periods(&q, 10).unwrap();
    assert_eq!(per.ord_matrix(), vec![vec![Ratio::from_integer(2)]]);
    assert!(per.guaranteed_prec >= 8);
    let l = per.field().clone();
    let q11 = &per.rows[0].components[0];
    assert!(q11.eq_mod(&PadicScalar::from_int(&l, 36), 2 + 8));

    let lin = l_invariant(&per, PeriodMap::Log).unwrap();
    let oracle = PadicScalar::from_int(&l, 4).iwasawa_log().unwrap().div(&PadicScalar::from_int(&l, 2)).unwrap();
    assert!(lin.matrix[0][0].eq_mod(&oracle, 8));
    let lord = l_invariant(&per, PeriodMap::Ord).unwrap();
    assert!(lord.matrix[0][0].eq_mod(&PadicScalar::one(&l), 10));

    let per9 = periods(&build_quotient(&tate_group(&fd, 9), 10).unwrap(), 10).unwrap();
    let lin9 = l_invariant(&per9, PeriodMap::Log).unwrap();
    assert!(lin9.matrix[0][0].eq_mod(&PadicScalar::zero(&l, 12), 8));
}

#[test]
fn genus_two_periods() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let fd = FieldDesc::unramified(3, 1, 14).unwrap();
    for grp in [standard_pair(&fd), SchottkyGroup::random(&fd, 2, &mut rng).unwrap()] {
        let q = build_quotient(&grp, 8).unwrap();
        let per = periods(&q, 8).unwrap();
        let o = per.ord_matrix();
        assert!(per.ord_is_symmetric());
        // ord(Q) is the intersection form of the cycle basis
        for i in 0..2 {
            for j in 0..2 {
                let ip: i64 = q.cycles[i].iter().zip(&q.cycles[j]).map(|(a, b)| a * b).sum();
                assert_eq!(o[i][j], Ratio::from_integer(ip));
            }
        }
        let det = o[0][0] * o[1][1] - o[0][1] * o[1][0];
        assert!(det > Ratio::from_integer(0));

        let c = 2;
        for phi in [PeriodMap::Log, PeriodMap::LogNorm, PeriodMap::Ord] {
            let lin = l_invariant(&per, phi).unwrap();
            for row in &per.rows {
                for x in phi_x(&lin, row).unwrap() {
                    assert!(x.eq_mod(&PadicScalar::zero(x.field(), 20), per.guaranteed_prec - c), "{x}");
                }
            }
        }
        // phi_X is constant on lattice cosets
        let mu = universal_measure(&q);
        let a = random_tau(&fd, &mut rng);
        let b = random_tau(&fd, &mut rng);
        let pt = mult_integral(&mu, &a, &b, 8).unwrap();
        let shifted = pt.mul(&per.rows[0]).unwrap().mul(&per.rows[1].inv().unwrap()).unwrap();
        let lin = l_invariant(&per, PeriodMap::LogNorm).unwrap();
        let x = phi_x(&lin, &pt).unwrap();
        let y = phi_x(&lin, &shifted).unwrap();
        let prec = pt.guaranteed_prec.min(per.guaranteed_prec) - c;
        for (u, v) in x.iter().zip(&y) {
            assert!(u.eq_mod(v, prec));
        }
        // log_norm_a on lattice points vanishes, and is linear
        let w = vec![PadicScalar::from_int(&fd, 2), PadicScalar::from_int(&fd, -1)];
        let z = log_norm_a(&[(&lin, &per.rows[0])], &[w.clone()]).unwrap();
        assert!(z.eq_mod(&PadicScalar::zero(z.field(), 20), per.guaranteed_prec - c));
        let s1 = log_norm_a(&[(&lin, &pt)], &[w.clone()]).unwrap();
        let s2 = log_norm_a(&[(&lin, &shifted), (&lin, &pt)], &[w.clone(), w.clone()]).unwrap();
        assert!(s2.eq_mod(&s1.scale_int(2).unwrap(), prec));
        // Γ-invariance of the integral
        for g in grp.generators() {
            let chk = gamma_invariance_check(&mu, g, &a, &b, 9).unwrap();
            assert!(chk.ok, "{:?}", chk.witness);
        }
    }
}

#[test]
fn package_round_trip() {
    let fd = k(3, 1);
    let grp = standard_pair(&fd);
    let text = serde_json::to_string_pretty(&grp.to_package()).unwrap();
    let pkg: GroupPackage = serde_json::from_str(&text).unwrap();
    let back = SchottkyGroup::from_package(&pkg, 10).unwrap();
    assert_eq!(back.generators(), grp.generators());
    assert_eq!(back.pingpong(), grp.pingpong());
    let raw = r#"{"p": 3, "f": 1, "generators": [[[9, 0], [0, 1]]], "pingpong": [], "base_vertex": "V(0;0)"}"#;
    let g: GroupPackage = serde_json::from_str(raw).unwrap();
    let t = SchottkyGroup::from_package(&g, 10).unwrap();
    assert_eq!(build_quotient(&t, 4).unwrap().betti(), 1);
}
