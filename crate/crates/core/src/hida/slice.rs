//! Distributions on the slice p𝒪 = {z = y/x : (x, y) ∈ 𝒪^× × p𝒪}.
//!
//! A distribution on X′ = 𝒪^× × p𝒪, tested only against functions with
//! f(tx, ty) = χ(t) f(x, y), is the same thing as a distribution on the
//! slice: ∫ f dD = ∫ χ(x) f(1, y/x) dD. Balls z₀ + p^d ℤ_p carry the moments
//! ∫ (z − z₀)^j for j ≤ M, each a germ in w (or a plain scalar at an
//! integer weight).

use std::collections::BTreeMap;
use std::sync::Arc;

use super::germ::Germ;
use crate::error::{Error, Result};
use crate::padic::{FieldDesc, Mat2, PadicScalar};

/// How matrices act on slice distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    /// Automorphy χ_w(a + bz) = exp(w·log(a + bz)), germs of this order.
    Germ(usize),
    /// Automorphy (a + bz)^{k−2}; meaningful for k ≡ 2 mod (p − 1).
    Int(i64),
}

/// Shared knobs for slice computations over ℚ_p.
#[derive(Clone, Debug)]
pub struct SliceCtx {
    pub field: Arc<FieldDesc>,
    pub moments: usize,
    /// Balls finer than this are merged into their depth-cap ancestor.
    pub depth_cap: i64,
    pub weight: Weight,
}

/// Ball (depth, canonical center in [0, p^depth)) ↦ moments m₀..m_M.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SliceDist {
    pub balls: BTreeMap<(i64, u64), Vec<Germ>>,
}

/// Power series in t = z − z₀ with germ coefficients, truncated at degree M.
type Ser = Vec<Germ>;

impl SliceCtx {
    pub fn new(field: &Arc<FieldDesc>, moments: usize, depth_cap: i64, weight: Weight) -> Result<Self> {
        if field.degree() != 1 {
            return Err(Error::Unsupported("distribution-valued forms over ℚ_p only".into()));
        }
        if depth_cap < 1 || depth_cap > field.n {
            return Err(Error::Invalid(format!("depth cap {depth_cap} outside 1..={}", field.n)));
        }
        if let Weight::Int(k) = weight {
            if k < 2 {
                return Err(Error::Invalid("weight below 2".into()));
            }
        }
        Ok(SliceCtx { field: field.clone(), moments, depth_cap, weight })
    }

    pub fn order(&self) -> usize {
        match self.weight {
            Weight::Germ(o) => o,
            Weight::Int(_) => 0,
        }
    }

    pub fn zero_germ(&self) -> Germ {
        Germ::zero(&self.field, self.order())
    }

    fn scalar(&self, x: PadicScalar) -> Germ {
        Germ::constant(x, self.order())
    }

    fn ser_zero(&self) -> Ser {
        vec![self.zero_germ(); self.moments + 1]
    }

    fn ser_mul(&self, a: &Ser, b: &Ser) -> Result<Ser> {
        let m = self.moments;
        let mut out = self.ser_zero();
        for i in 0..=m {
            if a[i].is_zero() && a[i].coeffs.iter().all(PadicScalar::is_exact_zero) {
                continue;
            }
            for j in 0..=m - i {
                if b[j].coeffs.iter().all(PadicScalar::is_exact_zero) {
                    continue;
                }
                out[i + j] = out[i + j].add(&a[i].mul(&b[j])?)?;
            }
        }
        Ok(out)
    }

    /// A point mass c·δ_z stored on the depth-cap ball around z.
    pub fn atom(&self, z: &PadicScalar, c: &Germ) -> Result<SliceDist> {
        let d = placed_depth(z, self.depth_cap)?;
        let z0 = center_mod(z, d)?;
        let t = z.sub(&PadicScalar::from_int(&self.field, z0 as i64))?;
        let mut mom = Vec::with_capacity(self.moments + 1);
        let mut tp = PadicScalar::one(&self.field);
        for _ in 0..=self.moments {
            mom.push(c.scale(&tp)?);
            tp = tp.mul(&t)?;
        }
        let mut out = SliceDist::default();
        out.balls.insert((d, z0), mom);
        Ok(out)
    }

    /// The pushforward along (x, y) ↦ (ax + by, cx + dy), read on the slice
    /// as z ↦ (c + dz)/(a + bz) with automorphy factor at a + bz.
    pub fn push(&self, dist: &SliceDist, a: &Mat2) -> Result<SliceDist> {
        let fd = &self.field;
        let m = self.moments;
        // scalars p^s act trivially
        let s = a.a.ord_pi().ok_or_else(|| Error::Invalid("matrix does not preserve X′".into()))?;
        let a1 = Mat2::new(a.a.shift_pi(-s), a.b.shift_pi(-s), a.c.shift_pi(-s), a.d.shift_pi(-s))?;
        if !a1.b.is_zero() && a1.b.ord_pi().unwrap() < 0 {
            return Err(Error::Invalid("matrix does not preserve X′".into()));
        }
        let det_ord = a1.det().ord_pi().ok_or(Error::SingularMatrix)?;
        let mut out = SliceDist::default();
        for (&(d, z0), mom) in &dist.balls {
            let z0s = PadicScalar::from_int(fd, z0 as i64);
            let big_a = a1.a.add(&a1.b.mul(&z0s)?)?;
            let big_c = a1.c.add(&a1.d.mul(&z0s)?)?;
            let ainv = big_a.inv()?;
            let beta = a1.b.mul(&ainv)?;
            let phi0 = big_c.mul(&ainv)?;
            if !phi0.is_zero() && phi0.ord_pi().unwrap() < 1 {
                return Err(Error::Invalid("image leaves the slice p𝒪".into()));
            }
            let d_new = placed_depth(&phi0, (d + det_ord).min(self.depth_cap))?;
            let c_new = center_mod(&phi0, d_new)?;
            // ψ(t) = φ(z₀ + t) − z₀′
            let mut psi = self.ser_zero();
            psi[0] = self.scalar(phi0.sub(&PadicScalar::from_int(fd, c_new as i64))?);
            let nb = beta.neg();
            let mut nbk = PadicScalar::one(fd); // (−β)^{k−1}
            for k in 1..=m {
                let term = big_c.mul(&nbk.mul(&nb)?)?.add(&a1.d.mul(&nbk)?)?.mul(&ainv)?;
                psi[k] = self.scalar(term);
                nbk = nbk.mul(&nb)?;
            }
            let chi = self.automorphy(&big_a, &beta)?;
            // P_j = ψ^j · χ
            let mut pj = chi;
            let mut new_mom = Vec::with_capacity(m + 1);
            for _j in 0..=m {
                let mut acc = self.zero_germ();
                for i in 0..=m {
                    if mom[i].coeffs.iter().all(PadicScalar::is_exact_zero) {
                        continue;
                    }
                    acc = acc.add(&pj[i].mul(&mom[i])?)?;
                }
                new_mom.push(acc);
                pj = self.ser_mul(&pj, &psi)?;
            }
            add_ball(&mut out, (d_new, c_new), new_mom)?;
        }
        Ok(out)
    }

    /// The automorphy factor at A₀ + A₀βt as a series in t.
    fn automorphy(&self, a0: &PadicScalar, beta: &PadicScalar) -> Result<Ser> {
        let fd = &self.field;
        let m = self.moments;
        let mut out = self.ser_zero();
        match self.weight {
            Weight::Germ(order) => {
                // exp(w·L(t)), L(t) = log A₀ + Σ (−1)^{j+1} β^j t^j / j
                let mut l = vec![PadicScalar::exact_zero(fd); m + 1];
                l[0] = a0.iwasawa_log()?;
                let mut bj = PadicScalar::one(fd);
                for (j, lj) in l.iter_mut().enumerate().skip(1) {
                    bj = bj.mul(beta)?;
                    let c = PadicScalar::from_ratio(fd, if j % 2 == 1 { 1 } else { -1 }, j as i64)?;
                    *lj = bj.mul(&c)?;
                }
                // L^k / k! contributes to w^k
                let mut lk = vec![PadicScalar::exact_zero(fd); m + 1];
                lk[0] = PadicScalar::one(fd);
                let mut fact = 1i64;
                for k in 0..=order {
                    if k > 0 {
                        lk = scalar_ser_mul(&lk, &l)?;
                        fact *= k as i64;
                    }
                    let inv = PadicScalar::from_ratio(fd, 1, fact)?;
                    for i in 0..=m {
                        out[i].coeffs[k] = lk[i].mul(&inv)?;
                    }
                }
            }
            Weight::Int(k) => {
                // A₀^{k−2} (1 + βt)^{k−2}
                let e = k - 2;
                let lead = a0.unit_part()?.pow(e)?;
                let mut binom = PadicScalar::one(fd);
                let mut bj = PadicScalar::one(fd);
                for (j, o) in out.iter_mut().enumerate() {
                    if j as i64 > e {
                        break;
                    }
                    if j > 0 {
                        binom = binom.mul(&PadicScalar::from_ratio(fd, e - j as i64 + 1, j as i64)?)?;
                        bj = bj.mul(beta)?;
                    }
                    o.coeffs[0] = lead.mul(&binom)?.mul(&bj)?;
                }
            }
        }
        Ok(out)
    }
}

fn scalar_ser_mul(a: &[PadicScalar], b: &[PadicScalar]) -> Result<Vec<PadicScalar>> {
    let m = a.len() - 1;
    let fd = a[0].field();
    let mut out = vec![PadicScalar::exact_zero(fd); m + 1];
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

/// The depth a ball around z can have: the wanted one, or less when z is
/// only known to lower absolute precision (deep frames lose digits).
fn placed_depth(z: &PadicScalar, want: i64) -> Result<i64> {
    let d = want.min(z.abs_prec());
    if d < 1 {
        return Err(Error::PrecisionExhausted("ball center not known modulo p".into()));
    }
    Ok(d)
}

/// Canonical integer representative of z modulo p^d, z ∈ ℤ_p.
pub(crate) fn center_mod(z: &PadicScalar, d: i64) -> Result<u64> {
    if z.is_zero() {
        if z.abs_prec() < d {
            return Err(Error::PrecisionExhausted("ball center known below its depth".into()));
        }
        return Ok(0);
    }
    if z.abs_prec() < d {
        return Err(Error::PrecisionExhausted("ball center known below its depth".into()));
    }
    Ok(z.coeffs_mod(d)?[0])
}

fn add_ball(out: &mut SliceDist, key: (i64, u64), mom: Vec<Germ>) -> Result<()> {
    match out.balls.get_mut(&key) {
        Some(cur) => {
            for (c, x) in cur.iter_mut().zip(&mom) {
                *c = c.add(x)?;
            }
        }
        None => {
            out.balls.insert(key, mom);
        }
    }
    Ok(())
}

impl SliceDist {
    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (k, m) in &o.balls {
            add_ball(&mut out, *k, m.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, g: &Germ) -> Result<Self> {
        let mut out = SliceDist::default();
        for (k, m) in &self.balls {
            out.balls.insert(*k, m.iter().map(|x| x.mul(g)).collect::<Result<_>>()?);
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let one = match o.balls.values().next() {
            Some(m) => Germ::one(m[0].field(), m[0].order()),
            None => return Ok(self.clone()),
        };
        self.add(&o.scale(&one.neg())?)
    }

    /// Total mass, the pairing with the constant slice function.
    pub fn mass(&self, ctx: &SliceCtx) -> Result<Germ> {
        let mut acc = ctx.zero_germ();
        for m in self.balls.values() {
            acc = acc.add(&m[0])?;
        }
        Ok(acc)
    }

    /// ∫ z^i for i ≤ k, from moments about the ball centers.
    pub fn power_moments(&self, ctx: &SliceCtx, k: usize) -> Result<Vec<Germ>> {
        if k > ctx.moments {
            return Err(Error::Invalid(format!("moment {k} beyond the stored {}", ctx.moments)));
        }
        let fd = &ctx.field;
        let mut out = vec![ctx.zero_germ(); k + 1];
        for (&(_, z0), mom) in &self.balls {
            let z0s = PadicScalar::from_int(fd, z0 as i64);
            for (i, o) in out.iter_mut().enumerate() {
                // z^i = Σ_j C(i,j) z₀^{i−j} (z − z₀)^j
                let mut binom = 1i64;
                for (j, mj) in mom.iter().enumerate().take(i + 1) {
                    if j > 0 {
                        binom = binom * (i - j + 1) as i64 / j as i64;
                    }
                    let c = z0s.pow((i - j) as i64)?.scale_int(binom)?;
                    *o = o.add(&mj.scale(&c)?)?;
                }
            }
        }
        Ok(out)
    }

    /// Smallest valuation over every stored moment coefficient.
    pub fn min_ord(&self) -> i64 {
        self.balls.values().flat_map(|m| m.iter().map(Germ::min_ord)).min().unwrap_or(i64::MAX / 8)
    }
}
