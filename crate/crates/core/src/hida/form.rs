//! Forms on the edges of 𝒯_Γ: classical (V_{k−2}-valued) ones and
//! distribution-valued ones, with U_p, specialization and the ordinary lift.

use std::collections::HashMap;
use std::sync::Arc;

use super::germ::Germ;
use super::slice::{SliceCtx, SliceDist, Weight};
use crate::error::{Error, Result};
use crate::mumford::{EdgeClass, QuotientGraph};
use crate::padic::{FieldDesc, Mat2, PadicScalar};
use crate::tree::TreeEdge;

/// g_e with g_e·𝒪² = L_src and g_e·(𝒪 × p𝒪) the index-p sublattice in the
/// class of dst; so g_e carries X′ onto L₂ ∖ pL₁.
pub fn frame(e: &TreeEdge) -> Result<Mat2> {
    let s = &e.src;
    let fd = s.field();
    let ms = Mat2::new(
        PadicScalar::p_power(fd, s.n),
        s.center(),
        PadicScalar::exact_zero(fd),
        PadicScalar::one(fd),
    )?;
    if e.is_descending() {
        let c = PadicScalar::from_unram_coeffs(fd, &e.dst.last_digit(), fd.n + 1);
        let h = Mat2::new(c, PadicScalar::one(fd), PadicScalar::one(fd), PadicScalar::exact_zero(fd))?;
        ms.mul(&h)
    } else {
        Ok(ms)
    }
}

/// The oriented representatives of Γ∖𝒯_Γ: each quotient edge and its reverse.
fn oriented_reps(q: &QuotientGraph) -> Vec<TreeEdge> {
    q.edges.iter().flat_map(|e| [e.rep.clone(), e.rep.reverse()]).collect()
}

/// One term of U_p at a representative: the target representative and the
/// matrix carrying its frame into ours.
#[derive(Clone, Debug)]
struct StencilTerm {
    target: TreeEdge,
    matrix: Mat2,
}

/// A quotient graph with precomputed frames and U_p stencils.
#[derive(Clone, Debug)]
pub struct FormSpace {
    pub quotient: Arc<QuotientGraph>,
    pub reps: Vec<TreeEdge>,
    frames: HashMap<TreeEdge, Mat2>,
    stencil: HashMap<TreeEdge, Vec<StencilTerm>>,
}

impl FormSpace {
    pub fn new(q: &QuotientGraph) -> Result<Self> {
        let fd = q.group.field();
        if fd.degree() != 1 {
            return Err(Error::Unsupported("distribution-valued forms over ℚ_p only".into()));
        }
        let reps = oriented_reps(q);
        let mut frames = HashMap::new();
        for r in &reps {
            frames.insert(r.clone(), frame(r)?);
        }
        let mut stencil = HashMap::new();
        for r in &reps {
            let gr_inv = frames[r].inv()?;
            let mut terms = Vec::new();
            for c in r.continuations() {
                match q.fold(&c)? {
                    (EdgeClass::Quotient { index, sign }, gamma) => {
                        let target = q.oriented_rep(index, sign);
                        let matrix = gr_inv.mul(&gamma)?.mul(&frames[&target])?;
                        terms.push(StencilTerm { target, matrix });
                    }
                    (EdgeClass::Outside { away: true }, _) => {}
                    (EdgeClass::Outside { away: false }, _) => {
                        return Err(Error::Invalid(format!("edge {c} leaves and re-enters the hull")));
                    }
                }
            }
            stencil.insert(r.clone(), terms);
        }
        Ok(FormSpace { quotient: Arc::new(q.clone()), reps, frames, stencil })
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        self.quotient.group.field()
    }

    pub fn frame_of(&self, e: &TreeEdge) -> Result<Mat2> {
        match self.frames.get(e) {
            Some(m) => Ok(m.clone()),
            None => frame(e),
        }
    }

    /// The classical form attached to a harmonic cocycle on the quotient
    /// (one value per quotient edge, reverses get the negative).
    pub fn weight_two(&self, values: &[i64]) -> Result<ClassicalForm> {
        if values.len() != self.quotient.edges.len() {
            return Err(Error::RankMismatch { expected: self.quotient.edges.len(), got: values.len() });
        }
        let fd = self.field();
        let mut out = HashMap::new();
        for (qe, &v) in self.quotient.edges.iter().zip(values) {
            out.insert(qe.rep.clone(), vec![PadicScalar::from_int(fd, v)]);
            out.insert(qe.rep.reverse(), vec![PadicScalar::from_int(fd, -v)]);
        }
        Ok(ClassicalForm { k: 2, values: out })
    }

    /// T(𝔭) = U_p on V_{k−2}-valued forms: sum over continuations, each
    /// pulled back by the weight-k action.
    pub fn hecke_tp(&self, form: &ClassicalForm) -> Result<ClassicalForm> {
        let mut out = HashMap::new();
        for r in &self.reps {
            let mut acc = vec![PadicScalar::exact_zero(self.field()); (form.k - 1) as usize];
            for t in &self.stencil[r] {
                let v = form.values.get(&t.target).ok_or_else(|| Error::Invalid(format!("form misses {}", t.target)))?;
                let w = classical_action(&t.matrix, form.k, v)?;
                for (a, x) in acc.iter_mut().zip(&w) {
                    *a = a.add(x)?;
                }
            }
            out.insert(r.clone(), acc);
        }
        Ok(ClassicalForm { k: form.k, values: out })
    }

    /// U_p on distribution forms.
    pub fn up(&self, ctx: &SliceCtx, d: &DistForm) -> Result<DistForm> {
        let mut out = HashMap::new();
        for r in &self.reps {
            let mut acc = SliceDist::default();
            for t in &self.stencil[r] {
                acc = acc.add(&ctx.push(&d.dists[&t.target], &t.matrix)?)?;
            }
            out.insert(r.clone(), acc);
        }
        Ok(DistForm { dists: out })
    }

    /// The scalar α with T(𝔭)φ = αφ, if φ is an eigenform.
    pub fn hecke_scalar(&self, form: &ClassicalForm) -> Result<PadicScalar> {
        let t = self.hecke_tp(form)?;
        let n = self.field().n;
        let mut alpha: Option<PadicScalar> = None;
        for r in &self.reps {
            for (x, y) in form.values[r].iter().zip(&t.values[r]) {
                if x.is_zero() {
                    if !y.is_zero() {
                        return Err(Error::Invalid("form is not a T(𝔭)-eigenform".into()));
                    }
                    continue;
                }
                let a = y.div(x)?;
                match &alpha {
                    None => alpha = Some(a),
                    Some(b) if b.eq_mod(&a, n - 1) => {}
                    Some(_) => return Err(Error::Invalid("form is not a T(𝔭)-eigenform".into())),
                }
            }
        }
        Ok(alpha.unwrap_or_else(|| PadicScalar::exact_zero(self.field())))
    }

    /// ρ_k: the V_{k−2}-valued form (∫ z^i dD_e)_{i ≤ k−2}. Germ-weight
    /// forms specialize only to k = 2, at w = 0.
    pub fn specialize(&self, ctx: &SliceCtx, d: &DistForm, k: i64) -> Result<ClassicalForm> {
        match ctx.weight {
            Weight::Int(kk) if kk == k => {}
            Weight::Germ(_) if k == 2 => {}
            _ => return Err(Error::Invalid(format!("weight {k} is not a specialization of this form"))),
        }
        if (k - 2) as usize > ctx.moments {
            return Err(Error::Invalid(format!("weight {k} needs more than {} moments", ctx.moments)));
        }
        let mut out = HashMap::new();
        for r in &self.reps {
            let pm = d.dists[r].power_moments(ctx, (k - 2) as usize)?;
            out.insert(r.clone(), pm.into_iter().map(|g| g.coeffs[0].clone()).collect());
        }
        Ok(ClassicalForm { k, values: out })
    }
}

/// The weight-k action of A on the vector (∫ z^j)_{j ≤ k−2}:
/// (A·v)_i = ∫ (a + bz)^{k−2−i} (c + dz)^i.
pub fn classical_action(a: &Mat2, k: i64, v: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
    let s = a.a.ord_pi().ok_or_else(|| Error::Invalid("matrix does not preserve X′".into()))?;
    let (aa, bb, cc, dd) = (a.a.shift_pi(-s), a.b.shift_pi(-s), a.c.shift_pi(-s), a.d.shift_pi(-s));
    let n = (k - 2) as usize;
    let fd = aa.field().clone();
    let poly_pow = |x0: &PadicScalar, x1: &PadicScalar, e: usize| -> Result<Vec<PadicScalar>> {
        let mut p = vec![PadicScalar::one(&fd)];
        for _ in 0..e {
            let mut q = vec![PadicScalar::exact_zero(&fd); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                q[i] = q[i].add(&c.mul(x0)?)?;
                q[i + 1] = q[i + 1].add(&c.mul(x1)?)?;
            }
            p = q;
        }
        Ok(p)
    };
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let p1 = poly_pow(&aa, &bb, n - i)?;
        let p2 = poly_pow(&cc, &dd, i)?;
        let mut acc = PadicScalar::exact_zero(&fd);
        for (j1, c1) in p1.iter().enumerate() {
            for (j2, c2) in p2.iter().enumerate() {
                acc = acc.add(&c1.mul(c2)?.mul(&v[j1 + j2])?)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// A V_{k−2}-valued function on the oriented representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalForm {
    pub k: i64,
    pub values: HashMap<TreeEdge, Vec<PadicScalar>>,
}

impl ClassicalForm {
    pub fn is_zero(&self) -> bool {
        self.values.values().all(|v| v.iter().all(PadicScalar::is_zero))
    }

    /// Entrywise congruence modulo p^k.
    pub fn eq_mod(&self, o: &Self, k: i64) -> bool {
        self.k == o.k
            && self.values.len() == o.values.len()
            && self.values.iter().all(|(e, v)| {
                o.values.get(e).is_some_and(|w| v.iter().zip(w).all(|(x, y)| x.eq_mod(y, k)))
            })
    }
}

/// Slice distributions on the oriented representatives, in their frames.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DistForm {
    pub dists: HashMap<TreeEdge, SliceDist>,
}

impl DistForm {
    pub fn scale(&self, g: &Germ) -> Result<Self> {
        let dists = self.dists.iter().map(|(e, d)| Ok((e.clone(), d.scale(g)?))).collect::<Result<_>>()?;
        Ok(DistForm { dists })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut dists = self.dists.clone();
        for (e, d) in &o.dists {
            let cur = dists.remove(e).unwrap_or_default();
            dists.insert(e.clone(), cur.add(d)?);
        }
        Ok(DistForm { dists })
    }

    pub fn sub(&self, o: &Self, ctx: &SliceCtx) -> Result<Self> {
        self.add(&o.scale(&Germ::one(&ctx.field, ctx.order()).neg())?)
    }

    /// Residual is ≡ 0 modulo p^(this).
    pub fn min_ord(&self) -> i64 {
        self.dists.values().map(SliceDist::min_ord).min().unwrap_or(i64::MAX / 8)
    }
}

/// Knobs for the ordinary lift.
#[derive(Clone, Debug)]
pub struct LiftOptions {
    pub iterations: usize,
    pub moments: usize,
    pub depth_cap: i64,
    pub germ_order: usize,
    /// m in the iteration of U_p^m; defaults to the cycle length in genus 1.
    pub period: Option<usize>,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { iterations: 6, moments: 4, depth_cap: 8, germ_order: 2, period: None }
    }
}

/// An ordinary U_p-eigenform with germ eigenvalue α(w).
#[derive(Clone, Debug)]
pub struct LiftedForm {
    pub space: Arc<FormSpace>,
    pub ctx: SliceCtx,
    pub form: DistForm,
    pub alpha: Germ,
    pub weight_two: ClassicalForm,
    /// U_pμ − αμ ≡ 0 modulo p^(entry) after each iteration.
    pub residual_history: Vec<i64>,
}

impl LiftedForm {
    /// U_pμ − α(w)μ ≡ 0 modulo p^(returned value) on every stored moment.
    pub fn eigen_residual(&self) -> Result<i64> {
        residual(&self.space, &self.ctx, &self.form, &self.alpha)
    }
}

fn residual(space: &FormSpace, ctx: &SliceCtx, d: &DistForm, alpha: &Germ) -> Result<i64> {
    let u = space.up(ctx, d)?;
    Ok(u.sub(&d.scale(alpha)?, ctx)?.min_ord().min(ctx.field.n))
}

/// Lift a weight-2 eigenform to a germ-weight ordinary eigenform.
///
/// Starts from the tautological lift (mass φ₂(e) on the slice, higher
/// moments zero), iterates U_p^m normalized by the weight-w mass on a
/// reference edge, takes α as the m-th root of that normalizer and finally
/// applies the projector (1/m) Σ α^{-i} U_p^i.
pub fn ordinary_lift(space: &Arc<FormSpace>, phi2: &ClassicalForm, opts: &LiftOptions) -> Result<LiftedForm> {
    let fd = space.field().clone();
    if phi2.k != 2 {
        return Err(Error::Invalid("the lift starts from a weight-2 form".into()));
    }
    if opts.moments == 0 || opts.iterations == 0 {
        return Err(Error::Invalid("need at least one moment and one iteration".into()));
    }
    let alpha0 = space.hecke_scalar(phi2)?;
    if !alpha0.is_unit() {
        return Err(Error::NotOrdinary(format!("T(𝔭) eigenvalue {alpha0} is not a unit")));
    }
    let ctx = SliceCtx::new(&fd, opts.moments, opts.depth_cap, Weight::Germ(opts.germ_order))?;
    let m = opts.period.unwrap_or(if space.quotient.group.genus() == 1 { space.quotient.edges.len() } else { 1 });

    let mut form = DistForm::default();
    for r in &space.reps {
        let mut d = SliceDist::default();
        let mut mom = vec![ctx.zero_germ(); opts.moments + 1];
        mom[0] = Germ::constant(phi2.values[r][0].clone(), ctx.order());
        d.balls.insert((1, 0), mom);
        form.dists.insert(r.clone(), d);
    }
    let reference = space
        .reps
        .iter()
        .find(|r| !phi2.values[*r][0].is_zero())
        .ok_or_else(|| Error::Invalid("zero form".into()))?
        .clone();
    let target_mass = form.dists[&reference].mass(&ctx)?;
    let alpha0_m = alpha0.pow(m as i64)?;

    let mut history = Vec::new();
    let mut lambda = Germ::constant(alpha0_m.clone(), ctx.order());
    for _ in 0..opts.iterations {
        let mut next = form.clone();
        for _ in 0..m {
            next = space.up(&ctx, &next)?;
        }
        lambda = next.dists[&reference].mass(&ctx)?.div(&target_mass)?;
        if !lambda.coeffs[0].eq_mod(&alpha0_m, fd.n - 1) {
            return Err(Error::Invalid("weight-2 masses drifted: the input is not an eigenform".into()));
        }
        // U_p commutes with ρ₂: the constant term is α₀^m exactly
        lambda.coeffs[0] = alpha0_m.clone();
        form = next.scale(&lambda.inv()?)?;
        let a = lambda.root(m as i64, &alpha0)?;
        history.push(residual(space, &ctx, &form, &a)?);
        if history.len() >= 3 {
            let k = history.len();
            if history[k - 1] < history[k - 3] {
                return Err(Error::Invalid("lift diverges: residual is growing".into()));
            }
        }
    }
    let alpha = lambda.root(m as i64, &alpha0)?;
    if m > 1 {
        let ainv = alpha.inv()?;
        let mut acc = form.clone();
        let mut cur = form.clone();
        let mut coef = Germ::one(&fd, ctx.order());
        for _ in 1..m {
            cur = space.up(&ctx, &cur)?;
            coef = coef.mul(&ainv)?;
            acc = acc.add(&cur.scale(&coef)?)?;
        }
        form = acc.scale(&Germ::constant(PadicScalar::from_ratio(&fd, 1, m as i64)?, ctx.order()))?;
    }
    let mut lifted = LiftedForm {
        space: space.clone(),
        ctx,
        form,
        alpha,
        weight_two: phi2.clone(),
        residual_history: history,
    };
    lifted.residual_history.push(lifted.eigen_residual()?);
    Ok(lifted)
}
