mod common;

use common::{k, random_explicit, random_tau};
use num_rational::Ratio;
use padic_tree::integral::{
    gamma_invariance_check, log_norm_part, log_part, mult_integral, mult_integral_divisor, mult_integral_with, ord_part,
    SampleRule,
};
use padic_tree::measure::{eval_on_divisor, HarmonicMeasure};
use padic_tree::tree::ExtPoint;
use padic_tree::{FieldDesc, Mat2, PadicScalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn teich_point(p: u64) -> ExtPoint {
    let l = k(p, 2);
    ExtPoint::new(PadicScalar::gen(&l).teichmuller().unwrap(), &k(p, 1)).unwrap()
}

#[test]
fn trivial_divisor_is_identity() {
    let mu = HarmonicMeasure::tate(&k(3, 1));
    let t = teich_point(3);
    let v = mult_integral(&mu, &t, &t, 6).unwrap();
    assert_eq!(ord_part(&v), vec![Ratio::from_integer(0)]);
    assert!(log_part(&v).unwrap()[0].is_zero());
}

#[test]
fn tate_closed_form() {
    // μ_T acts as δ₀ − δ_∞, so ×∫ = f_d(0)/f_d(∞) = τ₁/τ₂ = q^{-1}
    let p = 3;
    let base = k(p, 1);
    let l = k(p, 2);
    let mu = HarmonicMeasure::tate(&base);
    let t1 = teich_point(p);
    let q = PadicScalar::from_int(&l, 9 * 4);
    let t2 = ExtPoint::new(t1.tau.mul(&q).unwrap(), &base).unwrap();
    let v = mult_integral(&mu, &t1, &t2, 10).unwrap();
    assert_eq!(v.guaranteed_prec, 8);
    assert_eq!(ord_part(&v), vec![Ratio::from_integer(-2)]);
    let unit = v.units().unwrap().remove(0);
    let expect = PadicScalar::from_int(&l, 4).inv().unwrap();
    assert!(unit.eq_mod(&expect, v.guaranteed_prec));
    let ln = log_norm_part(&v).unwrap().remove(0);
    let oracle = PadicScalar::from_int(&base, 4).iwasawa_log().unwrap().neg();
    assert!(ln.eq_mod(&oracle, v.guaranteed_prec));
    let j = v.to_json().unwrap();
    assert_eq!(j.components[0].val, "-2/1");
}

#[test]
fn ord_part_matches_divisor_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for (p, f) in [(3, 1), (5, 1), (3, 2)] {
        let fd = k(p, f);
        let depth = if f == 1 { 6 } else { 3 };
        for _ in 0..6 {
            let mu = random_explicit(&fd, 2, depth, &mut rng);
            let a = random_tau(&fd, &mut rng);
            let b = random_tau(&fd, &mut rng);
            let v = mult_integral(&mu, &a, &b, depth).unwrap();
            assert_eq!(ord_part(&v), eval_on_divisor(&mu, &a, &b).unwrap());
        }
    }
}

#[test]
fn refinement_and_sample_stability() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fd = k(3, 1);
    let mu = random_explicit(&fd, 1, 8, &mut rng);
    for _ in 0..5 {
        let a = random_tau(&fd, &mut rng);
        let b = random_tau(&fd, &mut rng);
        let v7 = mult_integral(&mu, &a, &b, 7).unwrap();
        let v8 = mult_integral(&mu, &a, &b, 8).unwrap();
        assert!(v7.agrees_with(&v8, v7.guaranteed_prec).unwrap());
        let s8 = mult_integral_with(&mu, &a, &b, 8, SampleRule::Shifted).unwrap();
        assert!(v8.agrees_with(&s8, v8.guaranteed_prec).unwrap());
    }
}

#[test]
fn bilinearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let fd = k(3, 1);
    let mu = random_explicit(&fd, 2, 7, &mut rng);
    let (a, b, c) = (random_tau(&fd, &mut rng), random_tau(&fd, &mut rng), random_tau(&fd, &mut rng));
    let ab = mult_integral(&mu, &a, &b, 7).unwrap();
    let bc = mult_integral(&mu, &b, &c, 7).unwrap();
    let ac = mult_integral(&mu, &a, &c, 7).unwrap();
    let prod = ab.mul(&bc).unwrap();
    assert!(prod.agrees_with(&ac, prod.guaranteed_prec).unwrap());
    let ba = mult_integral(&mu, &b, &a, 7).unwrap();
    assert!(ba.agrees_with(&ab.inv().unwrap(), ab.guaranteed_prec).unwrap());
    let d = mult_integral_divisor(&mu, &[(1, a.clone()), (-2, b.clone()), (1, c.clone())], 7).unwrap();
    let expect = ab.mul(&bc.inv().unwrap()).unwrap();
    assert!(d.agrees_with(&expect, d.guaranteed_prec.min(expect.guaranteed_prec)).unwrap());
}

#[test]
fn log_kernel_agrees_with_log_norm_part() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for f in [1, 2] {
        let fd = k(3, f);
        let depth = if f == 1 { 6 } else { 4 };
        let mu = random_explicit(&fd, 1, depth, &mut rng);
        for _ in 0..3 {
            let a = random_tau(&fd, &mut rng);
            let b = random_tau(&fd, &mut rng);
            let v = mult_integral(&mu, &a, &b, depth).unwrap();
            let lk = mu.integrate_log_kernel(&a, &b, depth).unwrap();
            let ln = log_norm_part(&v).unwrap();
            let prec = lk.guaranteed_prec.max(1);
            assert!(lk.components[0].eq_mod(&ln[0], prec), "{} vs {}", lk.components[0], ln[0]);
        }
    }
}

#[test]
fn tate_invariance_under_its_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let fd = k(3, 1);
    let mu = HarmonicMeasure::tate(&fd);
    let q = Mat2::from_ints(&fd, [[36, 0], [0, 1]]);
    for _ in 0..4 {
        let a = random_tau(&fd, &mut rng);
        let b = random_tau(&fd, &mut rng);
        let chk = gamma_invariance_check(&mu, &q, &a, &b, 10).unwrap();
        assert!(chk.ok, "{:?}", chk.witness);
    }
    // a generic element does not preserve μ_T
    let g = Mat2::from_ints(&fd, [[1, 1], [3, 4]]);
    let a = random_tau(&fd, &mut rng);
    let l = FieldDesc::unramified(3, 2, 10).unwrap();
    let b = ExtPoint::new(PadicScalar::from_coeffs(&l, &[0, 1]).mul(&PadicScalar::p_power(&l, 2)).unwrap(), &fd).unwrap();
    let chk = gamma_invariance_check(&mu, &g, &a, &b, 10).unwrap();
    assert!(!chk.ok);
}
