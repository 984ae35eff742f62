//! θ, θ̄ and the indefinite integrals I, Ī on lattices and lattice pairs,
//! the local ν-model, the measure attached to a form and the decomposition
//! of I_Φ(τ₁) − I_Φ(τ₂).

use std::sync::Arc;

use num_rational::Ratio;
use serde::Serialize;

use super::form::{frame, LiftedForm};
use super::germ::Germ;
use super::slice::{SliceCtx, SliceDist, Weight};
use crate::error::{Error, Result};
use crate::integral::mult_integral;
use crate::measure::{precision_offset, EdgeCocycle, HarmonicMeasure};
use crate::mumford::EdgeClass;
use crate::padic::{FieldDesc, Mat2, P1Point, PadicScalar};
use crate::tree::{ball_of_edge, normal_form, reduction, ExtPoint, TreeEdge, TreePoint, TreeVertex};

/// Per-edge slice distributions D_e (in the frame of e) of a U_p-eigenform
/// with eigenvalue α(w).
pub trait EdgeDistributions: Send + Sync {
    fn ctx(&self) -> &SliceCtx;
    fn alpha(&self) -> &Germ;
    fn edge_dist(&self, e: &TreeEdge) -> Result<SliceDist>;
    /// D vanishes on e and on every edge beyond it.
    fn vanishes_below(&self, e: &TreeEdge) -> Result<bool>;
}

impl EdgeDistributions for LiftedForm {
    fn ctx(&self) -> &SliceCtx {
        &self.ctx
    }

    fn alpha(&self) -> &Germ {
        &self.alpha
    }

    fn edge_dist(&self, e: &TreeEdge) -> Result<SliceDist> {
        let q = &self.space.quotient;
        match q.fold(e)? {
            (EdgeClass::Quotient { index, sign }, gamma) => {
                let target = q.oriented_rep(index, sign);
                let a = self.space.frame_of(e)?.inv()?.mul(&gamma)?.mul(&self.space.frame_of(&target)?)?;
                self.ctx.push(&self.form.dists[&target], &a)
            }
            (EdgeClass::Outside { away: true }, _) => Ok(SliceDist::default()),
            (EdgeClass::Outside { away: false }, _) => {
                // D_e = α^{-1} Σ over continuations; exactly one of them heads inward
                let ge_inv = frame(e)?.inv()?;
                let mut acc = SliceDist::default();
                for c in e.continuations() {
                    let d = self.edge_dist(&c)?;
                    if d.is_empty() {
                        continue;
                    }
                    acc = acc.add(&self.ctx.push(&d, &ge_inv.mul(&frame(&c)?)?)?)?;
                }
                acc.scale(&self.alpha.inv()?)
            }
        }
    }

    fn vanishes_below(&self, e: &TreeEdge) -> Result<bool> {
        Ok(matches!(self.space.quotient.fold(e)?.0, EdgeClass::Outside { away: true }))
    }
}

/// The local model ν = Σ_n α(w)^{-2n} (δ_(0,p^n) − δ_(p^n,0)) with
/// c̄(L₁, L₂) = α^{ord det L₁} ν restricted to L₂ ∖ pL₁. It is an exact
/// eigenform for any germ α; at w = 0 its measure is the Tate measure.
#[derive(Clone, Debug)]
pub struct NuModel {
    pub ctx: SliceCtx,
    pub alpha: Germ,
}

impl NuModel {
    pub fn new(field: &Arc<FieldDesc>, alpha: Germ, moments: usize, depth_cap: i64) -> Result<Self> {
        let ctx = SliceCtx::new(field, moments, depth_cap, Weight::Germ(alpha.order()))?;
        if !alpha.value_at_zero().is_unit() {
            return Err(Error::NotOrdinary("α(0) is not a unit".into()));
        }
        Ok(NuModel { ctx, alpha })
    }
}

impl EdgeDistributions for NuModel {
    fn ctx(&self) -> &SliceCtx {
        &self.ctx
    }

    fn alpha(&self) -> &Germ {
        &self.alpha
    }

    fn edge_dist(&self, e: &TreeEdge) -> Result<SliceDist> {
        let gi = frame(e)?.inv()?;
        let ordet = e.src.n;
        let mut acc = SliceDist::default();
        // (0, p^n) ↦ p^n (b′, d′) with sign +1; (p^n, 0) ↦ p^n (a′, c′) with sign −1
        for (xc, yc, sign) in [(&gi.b, &gi.d, 1i64), (&gi.a, &gi.c, -1i64)] {
            let Some(v) = xc.ord_pi() else { continue };
            let n = -v;
            let x = xc.shift_pi(n);
            let y = yc.shift_pi(n);
            if !y.is_zero() && y.ord_pi().unwrap() < 1 {
                continue;
            }
            let z = y.div(&x)?;
            let chi = Germ::exp_linear(&x.iwasawa_log()?, self.ctx.order())?;
            let coef = self.alpha.pow(ordet - 2 * n)?.mul(&chi)?;
            let coef = if sign < 0 { coef.neg() } else { coef };
            acc = acc.add(&self.ctx.atom(&z, &coef)?)?;
        }
        Ok(acc)
    }

    fn vanishes_below(&self, e: &TreeEdge) -> Result<bool> {
        let b = ball_of_edge(e);
        let zero = P1Point::Finite(PadicScalar::exact_zero(e.src.field()));
        Ok(!b.contains(&zero)? && !b.contains(&P1Point::Infinity)?)
    }
}

/// The lattice p^k·L_v, with L_v spanned by the columns of [[p^n, b], [0, 1]].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    pub v: TreeVertex,
    pub k: i64,
}

/// (L₁, L₂): L₁ and its index-p sublattice in the class of `dst`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePair {
    pub l1: Lattice,
    pub dst: TreeVertex,
}

impl Lattice {
    pub fn of(v: &TreeVertex) -> Self {
        Lattice { v: v.clone(), k: 0 }
    }

    pub fn ordet(&self) -> i64 {
        self.v.n + 2 * self.k
    }

    /// p^j·L
    pub fn scale(&self, j: i64) -> Self {
        Lattice { v: self.v.clone(), k: self.k + j }
    }

    /// The p^f + 1 index-p sublattices, found from the lattice basis rather
    /// than from tree neighbors.
    pub fn sublattices(&self) -> Result<Vec<LatticePair>> {
        let fd = self.v.field().clone();
        let m = Mat2::new(
            PadicScalar::p_power(&fd, self.v.n),
            self.v.center(),
            PadicScalar::exact_zero(&fd),
            PadicScalar::one(&fd),
        )?;
        let mut out = Vec::new();
        let p = PadicScalar::p_power(&fd, 1);
        let z = PadicScalar::exact_zero(&fd);
        let one = PadicScalar::one(&fd);
        let mut bases = vec![Mat2::new(one.clone(), z.clone(), z.clone(), p.clone())?];
        for r in fd.residues() {
            let c = PadicScalar::from_unram_coeffs(&fd, &r, fd.n + 1);
            bases.push(Mat2::new(p.clone(), c, z.clone(), one.clone())?);
        }
        for b in bases {
            out.push(LatticePair { l1: self.clone(), dst: normal_form(&m.mul(&b)?)? });
        }
        Ok(out)
    }
}

impl LatticePair {
    pub fn edge(&self) -> TreeEdge {
        TreeEdge { src: self.l1.v.clone(), dst: self.dst.clone() }
    }

    pub fn scale(&self, j: i64) -> Self {
        LatticePair { l1: self.l1.scale(j), dst: self.dst.clone() }
    }

    /// L₂ itself: p^k L_dst below, p^{k+1} L_dst above.
    pub fn l2(&self) -> Lattice {
        let up = (self.dst.n < self.l1.v.n) as i64;
        Lattice { v: self.dst.clone(), k: self.l1.k + up }
    }

    /// (p^{-1}L₂, L₁).
    pub fn back(&self) -> Self {
        LatticePair { l1: self.l2().scale(-1), dst: self.l1.v.clone() }
    }
}

/// θ and I for one point τ of the upper half plane.
pub struct Theta<'a> {
    pub src: &'a dyn EdgeDistributions,
    pub tau: ExtPoint,
}

impl<'a> Theta<'a> {
    pub fn new(src: &'a dyn EdgeDistributions, tau: &ExtPoint) -> Result<Self> {
        if tau.base.n != src.ctx().field.n || tau.base.degree() != 1 {
            return Err(Error::FieldMismatch);
        }
        if tau.field().n != src.ctx().field.n {
            return Err(Error::FieldMismatch);
        }
        Ok(Theta { src, tau: tau.clone() })
    }

    fn order(&self) -> usize {
        self.src.ctx().order()
    }

    /// ∫ F_s^τ ∘ g_e dD_e, with F_s^τ(x, y) = exp(w·logNorm(x − τy)).
    fn pairing(&self, e: &TreeEdge) -> Result<Germ> {
        let ctx = self.src.ctx();
        let d = self.src.edge_dist(e)?;
        let l = self.tau.field().clone();
        let g = frame(e)?;
        let emb = |x: &PadicScalar| x.embed_into(&l);
        let tau = &self.tau.tau;
        let big_a = emb(&g.a)?.sub(&tau.mul(&emb(&g.c)?)?)?;
        let big_b = emb(&g.b)?.sub(&tau.mul(&emb(&g.d)?)?)?;
        let deg = l.degree() as i64;
        let order = self.order();
        let m = ctx.moments;
        let mut acc = Germ::zero(&ctx.field, order);
        for (&(depth, z0), mom) in &d.balls {
            let z0s = PadicScalar::from_int(&l, z0 as i64);
            let v = big_a.add(&big_b.mul(&z0s)?)?;
            let mut lp = vec![PadicScalar::exact_zero(&ctx.field); m + 1];
            lp[0] = rebase(&v.log_norm()?, &ctx.field)?;
            let higher = mom[1..].iter().any(|x| !x.coeffs.iter().all(PadicScalar::is_exact_zero));
            if higher && !big_b.is_zero() {
                let beta = big_b.div(&v)?;
                let ob = beta.ord().unwrap();
                if Ratio::from_integer(depth) + ob <= Ratio::from_integer(0) {
                    return Err(Error::PrecisionExhausted(format!(
                        "ball of depth {depth} straddles a zero of x − τy; raise the depth"
                    )));
                }
                let mut bj = PadicScalar::one(&l);
                for (j, c) in lp.iter_mut().enumerate().skip(1) {
                    bj = bj.mul(&beta)?;
                    let tr = rebase(&bj.trace_to_base()?, &ctx.field)?;
                    let s = if j % 2 == 1 { 1 } else { -1 };
                    *c = tr.mul(&PadicScalar::from_ratio(&ctx.field, s, j as i64 * deg)?)?;
                }
            }
            // exp(w·Lp(t)) coefficientwise, then pair with the moments
            let mut lk = vec![PadicScalar::exact_zero(&ctx.field); m + 1];
            lk[0] = PadicScalar::one(&ctx.field);
            let mut fact = 1i64;
            let mut series = vec![Germ::zero(&ctx.field, order); m + 1];
            for k in 0..=order {
                if k > 0 {
                    lk = mul_trunc(&lk, &lp)?;
                    fact *= k as i64;
                }
                let inv = PadicScalar::from_ratio(&ctx.field, 1, fact)?;
                for i in 0..=m {
                    series[i].coeffs[k] = lk[i].mul(&inv)?;
                }
            }
            for i in 0..=m {
                if mom[i].coeffs.iter().all(PadicScalar::is_exact_zero) {
                    continue;
                }
                acc = acc.add(&series[i].mul(&mom[i])?)?;
            }
        }
        Ok(acc)
    }

    /// θ̄(w; L₁, L₂) = α(w)^{−ord det L₁} c̄(L₁, L₂)(F_s^τ).
    pub fn theta_bar(&self, pair: &LatticePair) -> Result<Germ> {
        let a = self.src.alpha().pow(-pair.l1.ordet())?;
        // the frame of the edge realizes the normalized pair; scaling by p^k
        // leaves homogeneous test functions unchanged
        a.mul(&self.pairing(&pair.edge())?)
    }

    /// θ(w; L) = Σ over the index-p sublattices L′ of θ̄(w; L, L′).
    pub fn theta(&self, l: &Lattice) -> Result<Germ> {
        let mut acc = Germ::zero(&self.src.ctx().field, self.order());
        for e in l.v.out_edges() {
            acc = acc.add(&self.theta_bar(&LatticePair { l1: l.clone(), dst: e.dst })?)?;
        }
        Ok(acc)
    }

    pub fn i_bar(&self, pair: &LatticePair) -> Result<PadicScalar> {
        Ok(self.theta_bar(pair)?.derivative())
    }

    pub fn i(&self, l: &Lattice) -> Result<PadicScalar> {
        Ok(self.theta(l)?.derivative())
    }

    /// I_Φ(τ) = I^τ(red τ), averaged over the ends of the edge when red τ is
    /// a midpoint.
    pub fn i_point(&self) -> Result<PadicScalar> {
        match reduction(&self.tau)? {
            TreePoint::Vertex(v) => self.i(&Lattice::of(&v)),
            TreePoint::Midpoint(e) => {
                let s = self.i(&Lattice::of(&e.src))?.add(&self.i(&Lattice::of(&e.dst))?)?;
                s.mul(&PadicScalar::from_ratio(s.field(), 1, 2)?)
            }
        }
    }
}

/// Move a ℚ_p scalar onto the given copy of ℚ_p (same p and n).
fn rebase(x: &PadicScalar, base: &Arc<FieldDesc>) -> Result<PadicScalar> {
    if x.field() == base {
        return Ok(x.clone());
    }
    x.embed_into(base)
}

fn mul_trunc(a: &[PadicScalar], b: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
    let m = a.len() - 1;
    let mut out = vec![PadicScalar::exact_zero(a[0].field()); m + 1];
    for i in 0..=m {
        if a[i].is_exact_zero() {
            continue;
        }
        for j in 0..=m - i {
            if b[j].is_exact_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&a[i].mul(&b[j])?)?;
        }
    }
    Ok(out)
}

/// One line of the identity suite.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

fn germ_check(name: &str, lhs: &Germ, rhs: &Germ, k: i64) -> IdentityCheck {
    let ok = lhs.eq_mod(rhs, k);
    IdentityCheck {
        name: name.into(),
        ok,
        detail: if ok { format!("mod p^{k}") } else { format!("{:?} vs {:?}", lhs.coeffs, rhs.coeffs) },
    }
}

fn scalar_check(name: &str, lhs: &PadicScalar, rhs: &PadicScalar, k: i64) -> IdentityCheck {
    let ok = lhs.eq_mod(rhs, k);
    IdentityCheck { name: name.into(), ok, detail: if ok { format!("mod p^{k}") } else { format!("{lhs} vs {rhs}") } }
}

/// The θ and I identities at the lattice L, checked modulo p^k, plus the
/// vanishing of θ at w = 0.
pub fn check_identities(th: &Theta, l: &Lattice, k: i64) -> Result<Vec<IdentityCheck>> {
    let alpha = th.src.alpha();
    let fd = alpha.field().clone();
    let a0 = alpha.value_at_zero().clone();
    let a1 = alpha.derivative();
    let am2 = alpha.pow(-2)?;
    let two = PadicScalar::from_int(&fd, 2);
    // −2α′(0)α^{-3}
    let corr = two.mul(&a1)?.mul(&a0.pow(-3)?)?.neg();
    let a0m2 = a0.pow(-2)?;
    let mut out = Vec::new();

    let theta_l = th.theta(l)?;
    let subs = l.sublattices()?;
    let mut sum = Germ::zero(&fd, alpha.order());
    let mut isum = PadicScalar::exact_zero(&fd);
    for s in &subs {
        sum = sum.add(&th.theta_bar(s)?)?;
        isum = isum.add(&th.i_bar(s)?)?;
    }
    out.push(germ_check("theta-1: θ(L) = Σ θ̄(L, L′)", &theta_l, &sum, k));
    out.push(scalar_check("I-1: I(L) = Σ Ī(L, L′)", &theta_l.derivative(), &isum, k));

    let mut ok2 = true;
    let mut ok2i = true;
    let mut det2 = String::new();
    for s in &subs {
        let rhs = th.theta_bar(s)?.add(&th.theta_bar(&s.back())?)?;
        if !theta_l.eq_mod(&rhs, k) {
            ok2 = false;
            det2 = format!("at L′ = {}: {:?} vs {:?}", s.dst, theta_l.coeffs, rhs.coeffs);
        }
        if !theta_l.derivative().eq_mod(&rhs.derivative(), k) {
            ok2i = false;
        }
    }
    out.push(IdentityCheck {
        name: "theta-2: θ(L) = θ̄(L, L′) + θ̄(p⁻¹L′, L)".into(),
        ok: ok2,
        detail: if ok2 { format!("all {} sublattices, mod p^{k}", subs.len()) } else { det2 },
    });
    out.push(IdentityCheck {
        name: "I-2: I(L) = Ī(L, L′) + Ī(p⁻¹L′, L)".into(),
        ok: ok2i,
        detail: format!("all {} sublattices, mod p^{k}", subs.len()),
    });

    let theta_pl = th.theta(&l.scale(1))?;
    out.push(germ_check("theta-3: θ(pL) = α⁻²θ(L)", &theta_pl, &am2.mul(&theta_l)?, k));
    let i3 = corr.mul(theta_l.value_at_zero())?.add(&a0m2.mul(&theta_l.derivative())?)?;
    out.push(scalar_check("I-3: I(pL) = −2α′α⁻³θ(0; L) + α⁻²I(L)", &theta_pl.derivative(), &i3, k));

    let pair = &subs[0];
    let tb = th.theta_bar(pair)?;
    let tb_p = th.theta_bar(&pair.scale(1))?;
    out.push(germ_check("theta-4: θ̄(pL₁, pL₂) = α⁻²θ̄(L₁, L₂)", &tb_p, &am2.mul(&tb)?, k));
    let i4 = corr.mul(tb.value_at_zero())?.add(&a0m2.mul(&tb.derivative())?)?;
    out.push(scalar_check("I-4: Ī(pL₁, pL₂) = −2α′α⁻³θ̄(0; L₁, L₂) + α⁻²Ī(L₁, L₂)", &tb_p.derivative(), &i4, k));

    out.push(scalar_check(
        "theta(w=0) vanishes",
        theta_l.value_at_zero(),
        &PadicScalar::exact_zero(&fd),
        k,
    ));
    Ok(out)
}

struct FormCocycle {
    forms: Vec<Arc<dyn EdgeDistributions>>,
}

impl EdgeCocycle for FormCocycle {
    fn rank(&self) -> usize {
        self.forms.len()
    }

    fn value(&self, e: &TreeEdge) -> Result<Vec<i64>> {
        let mut out = Vec::with_capacity(self.forms.len());
        for f in &self.forms {
            let ctx = f.ctx();
            let mass = f.edge_dist(e)?.mass(ctx)?;
            let a0 = f.alpha().value_at_zero();
            let v = a0.pow(-e.src.n)?.mul(mass.value_at_zero())?;
            let k = ctx.field.n.min(v.abs_prec());
            let x = v.to_symmetric_int(k)?;
            if x.unsigned_abs() > 1 << 20 {
                return Err(Error::Invalid(format!("mass on {e} is not a small integer")));
            }
            out.push(x);
        }
        Ok(out)
    }

    fn vanishes_below(&self, e: &TreeEdge) -> Result<bool> {
        for f in &self.forms {
            if !f.vanishes_below(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// μ_φ(U_e) = θ̄(0; e), one component per form. Needs α(0)² = 1.
pub fn measure_from_forms(forms: Vec<Arc<dyn EdgeDistributions>>) -> Result<HarmonicMeasure> {
    let first = forms.first().ok_or_else(|| Error::Invalid("no forms".into()))?;
    let fd = first.ctx().field.clone();
    for f in &forms {
        let a0 = f.alpha().value_at_zero();
        if !a0.mul(a0)?.eq_mod(&PadicScalar::one(&fd), fd.n) {
            return Err(Error::Invalid("the measure needs α(0)² = 1".into()));
        }
        if f.ctx().field != fd {
            return Err(Error::FieldMismatch);
        }
    }
    Ok(HarmonicMeasure::from_cocycle(&fd, Arc::new(FormCocycle { forms })))
}

/// I_Φ(τ₁) − I_Φ(τ₂) against (logNorm + 2α(0)α′(0)·ord)(×∫_{[τ₁]−[τ₂]} ω_μ).
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub lhs: PadicScalar,
    pub log_norm_term: PadicScalar,
    pub ord: Ratio<i64>,
    pub residual: PadicScalar,
    /// Congruences below p^(this) are certified by the integral.
    pub certified_mod: i64,
}

impl DecompositionReport {
    pub fn vanishes_mod(&self, k: i64) -> bool {
        self.residual.eq_mod(&PadicScalar::exact_zero(self.residual.field()), k)
    }
}

pub fn decomposition_check(
    src: Arc<dyn EdgeDistributions>,
    tau1: &ExtPoint,
    tau2: &ExtPoint,
    depth: i64,
) -> Result<DecompositionReport> {
    let fd = src.ctx().field.clone();
    let th1 = Theta::new(src.as_ref(), tau1)?;
    let th2 = Theta::new(src.as_ref(), tau2)?;
    let lhs = th1.i_point()?.sub(&th2.i_point()?)?;
    let mu = measure_from_forms(vec![src.clone()])?;
    let x = mult_integral(&mu, tau1, tau2, depth)?;
    let comp = &x.components[0];
    let ord = comp.ord().ok_or(Error::DivisionByZero)?;
    let log_norm_term = rebase(&comp.log_norm()?, &fd)?;
    let alpha = src.alpha();
    let ordterm = PadicScalar::from_int(&fd, 2)
        .mul(alpha.value_at_zero())?
        .mul(&alpha.derivative())?
        .mul(&PadicScalar::from_ratio(&fd, *ord.numer(), *ord.denom())?)?;
    let residual = lhs.sub(&log_norm_term)?.sub(&ordterm)?;
    let c = precision_offset(&[tau1, tau2])?;
    Ok(DecompositionReport { lhs, log_norm_term, ord, residual, certified_mod: x.guaranteed_prec.min(depth - c) })
}
