//! Fixed-precision scalars in ℚ_{p^f} and its ramified quadratic extensions.
//!
//! Storage is always normalized by ord(p) = 1 for the public accessors, while
//! valuations are kept internally as integers in π-units.

mod embed;
mod functions;
mod mat2;
pub(crate) mod ring;
mod text;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use embed::FieldEmbedding;
pub use mat2::{Mat2, P1Point};
use ring::{pw, submod};

/// Digits kept beyond the working precision for intermediate computations.
pub const GUARD: i64 = 8;

/// Precision marker used for exact zero.
pub(crate) const EXACT: i64 = i64::MAX / 8;

/// Which normalization of the valuation to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrdNorm {
    /// ord(p) = 1
    P,
    /// ord(π) = 1
    Pi,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FieldSpec {
    p: u64,
    f: usize,
    e: usize,
    #[serde(default)]
    eisenstein_unit: Vec<u64>,
    n: i64,
}

/// A finite extension of ℚ_p: unramified of degree f, optionally followed by
/// the ramified quadratic step π² = u·p.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "FieldSpec", into = "FieldSpec")]
pub struct FieldDesc {
    pub p: u64,
    pub f: usize,
    pub e: usize,
    /// The unit u with π² = u·p, as an element of ℤ_{p^f}; [1] when e = 1.
    pub u: Vec<u64>,
    /// Working precision in powers of p.
    pub n: i64,
    /// Monic defining polynomial of g over 𝔽_p, low degree first (length f + 1).
    pub modulus: Vec<u64>,
    pub(crate) rmax: i64,
    pub(crate) u_inv: Vec<u64>,
    pub(crate) frob_g: Vec<u64>,
    pub(crate) cache: Arc<Mutex<HashMap<(usize, usize), Arc<FieldEmbedding>>>>,
}

impl TryFrom<FieldSpec> for FieldDesc {
    type Error = Error;
    fn try_from(s: FieldSpec) -> Result<Self> {
        let u = if s.eisenstein_unit.is_empty() { vec![1] } else { s.eisenstein_unit };
        FieldDesc::new(s.p, s.f, s.e, &u, s.n)
    }
}

impl From<FieldDesc> for FieldSpec {
    fn from(d: FieldDesc) -> Self {
        FieldSpec { p: d.p, f: d.f, e: d.e, eisenstein_unit: d.u.clone(), n: d.n }
    }
}

impl PartialEq for FieldDesc {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.f == o.f && self.e == o.e && self.u == o.u && self.n == o.n
    }
}
impl Eq for FieldDesc {}

impl Hash for FieldDesc {
    fn hash<H: Hasher>(&self, h: &mut H) {
        (self.p, self.f, self.e, &self.u, self.n).hash(h)
    }
}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "FieldDesc(p={}, f={}, e={}", self.p, self.f, self.e)?;
        if self.e == 2 {
            write!(fm, ", u={:?}", self.u)?;
        }
        write!(fm, ", N={})", self.n)
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// Remainder of a mod b over 𝔽_p, with b monic. Low degree first.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap() % p;
        let shift = r.len() - 1 - db;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = submod(r[shift + j], c * bj % p, p);
        }
        r.pop();
    }
    r
}

fn monic_polys(deg: usize, p: u64) -> impl Iterator<Item = Vec<u64>> {
    let count = pw(p, deg as i64);
    (0..count).map(move |mut idx| {
        let mut v = Vec::with_capacity(deg + 1);
        for _ in 0..deg {
            v.push(idx % p);
            idx /= p;
        }
        v.push(1);
        v
    })
}

/// Smallest monic irreducible polynomial of degree f over 𝔽_p, in the order
/// of its low-first coefficient vector read as a base-p number.
fn conway_free_modulus(f: usize, p: u64) -> Vec<u64> {
    if f == 1 {
        return vec![0, 1];
    }
    'outer: for cand in monic_polys(f, p) {
        for d in 1..=f / 2 {
            for div in monic_polys(d, p) {
                if poly_rem(&cand, &div, p).iter().all(|&c| c == 0) {
                    continue 'outer;
                }
            }
        }
        return cand;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldDesc {
    pub fn new(p: u64, f: usize, e: usize, u: &[u64], n: i64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidField(format!("p = {p} must be an odd prime")));
        }
        if f == 0 || f > 6 {
            return Err(Error::InvalidField(format!("residue degree {f} outside 1..=6")));
        }
        if e != 1 && e != 2 {
            return Err(Error::InvalidField(format!("ramification index {e} not in {{1,2}}")));
        }
        let mut rmax = 0;
        while (p as u128).pow(rmax as u32 + 1) < (1u128 << 62) {
            rmax += 1;
        }
        if n < 1 || n + GUARD > rmax {
            return Err(Error::InvalidField(format!(
                "precision {n} unsupported for p = {p} (max {})",
                rmax - GUARD
            )));
        }
        let modulus = conway_free_modulus(f, p);
        let mut uu = u.to_vec();
        uu.resize(f, 0);
        let m = pw(p, rmax);
        uu.iter_mut().for_each(|c| *c %= m);
        let mut fd = FieldDesc {
            p,
            f,
            e,
            u: if e == 1 { {
                let mut one = vec![0; f];
                one[0] = 1;
                one
            } } else { uu.clone() },
            n,
            modulus,
            rmax,
            u_inv: vec![],
            frob_g: vec![],
            cache: Arc::new(Mutex::new(HashMap::new())),
        };
        if fd.u.iter().all(|c| c % p == 0) {
            return Err(Error::InvalidField("eisenstein unit is not a unit".into()));
        }
        fd.u_inv = fd.uinv(&fd.u, rmax);
        fd.frob_g = fd.frobenius_of_generator();
        Ok(fd)
    }

    pub fn unramified(p: u64, f: usize, n: i64) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(p, f, 1, &[1], n)?))
    }

    pub fn ramified(p: u64, f: usize, u: &[u64], n: i64) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(p, f, 2, u, n)?))
    }

    /// ℚ_p at the same working precision.
    pub fn base(&self) -> Arc<Self> {
        Arc::new(Self::new(self.p, 1, 1, &[1], self.n).expect("base field of a valid field"))
    }

    /// The unramified subfield ℚ_{p^f}.
    pub fn unramified_part(&self) -> Arc<Self> {
        Arc::new(Self::new(self.p, self.f, 1, &[1], self.n).expect("valid"))
    }

    /// Same field at another working precision.
    pub fn with_prec(&self, n: i64) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::new(self.p, self.f, self.e, &self.u, n)?))
    }

    /// [L : ℚ_p]
    pub fn degree(&self) -> usize {
        self.e * self.f
    }

    /// Number of residues, p^f.
    pub fn residue_count(&self) -> u64 {
        pw(self.p, self.f as i64)
    }

    fn frobenius_of_generator(&self) -> Vec<u64> {
        let f = self.f;
        if f == 1 {
            return vec![0];
        }
        let m = pw(self.p, self.rmax);
        let mut g = vec![0u64; f];
        g[1] = 1;
        let mut r = self.upow(&g, self.p, m);
        let deriv: Vec<u64> = (1..=f).map(|i| self.modulus[i] * i as u64).collect();
        for _ in 0..8 {
            let val = self.ueval(&self.modulus, &r, m);
            let d = self.ueval(&deriv, &r, m);
            let dinv = self.uinv(&d, self.rmax);
            r = self.usub(&r, &self.umul(&val, &dinv, m), m);
        }
        r
    }

    /// All residues of 𝔽_{p^f} as coefficient vectors, in base-p order.
    pub fn residues(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        (0..self.residue_count())
            .map(|mut idx| {
                (0..self.f)
                    .map(|_| {
                        let c = idx % p;
                        idx /= p;
                        c
                    })
                    .collect()
            })
            .collect()
    }
}

/// An element of a finite extension at finite precision.
///
/// A nonzero value is π^vpi · unit with the unit known modulo π^rel. A zero
/// value is known modulo π^rel (absolute).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PadicScalar {
    field: Arc<FieldDesc>,
    vpi: Option<i64>,
    unit: Vec<u64>,
    rel: i64,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    (a + b - 1).div_euclid(b)
}

impl PadicScalar {
    // -- construction --------------------------------------------------

    pub(crate) fn canon(field: &FieldDesc, unit: &mut [u64], rel: i64) {
        let p = field.p;
        if field.e == 1 {
            let m = pw(p, rel);
            unit.iter_mut().for_each(|c| *c %= m);
        } else {
            let f = field.f;
            let m0 = pw(p, ceil_div(rel, 2));
            let m1 = pw(p, rel / 2);
            unit[..f].iter_mut().for_each(|c| *c %= m0);
            unit[f..].iter_mut().for_each(|c| *c %= m1);
        }
    }

    /// Build from a coefficient vector known mod p^r, representing
    /// π^shift · a with `pi_prec` known π-digits.
    pub(crate) fn from_raw(
        field: &Arc<FieldDesc>,
        a: &[u64],
        r: i64,
        shift: i64,
        pi_prec: i64,
    ) -> Self {
        let cap = field.e as i64 * field.n;
        let k = field.ord_pi_raw(a, r).min(pi_prec);
        if k >= pi_prec {
            return Self::zero_abs_pi(field, shift.saturating_add(pi_prec));
        }
        let (mut q, _) = field.div_pi_raw(a, k, r);
        let rel = (pi_prec - k).min(cap);
        Self::canon(field, &mut q, rel);
        PadicScalar { field: field.clone(), vpi: Some(shift + k), unit: q, rel }
    }

    pub(crate) fn zero_abs_pi(field: &Arc<FieldDesc>, abs_pi: i64) -> Self {
        PadicScalar {
            field: field.clone(),
            vpi: None,
            unit: vec![0; field.dim()],
            rel: abs_pi.min(EXACT),
        }
    }

    /// Zero known modulo p^abs.
    pub fn zero(field: &Arc<FieldDesc>, abs: i64) -> Self {
        Self::zero_abs_pi(field, abs.saturating_mul(field.e as i64))
    }

    pub fn exact_zero(field: &Arc<FieldDesc>) -> Self {
        Self::zero_abs_pi(field, EXACT)
    }

    pub fn one(field: &Arc<FieldDesc>) -> Self {
        Self::from_int(field, 1)
    }

    /// An integer, stored at full working precision.
    pub fn from_int(field: &Arc<FieldDesc>, k: i64) -> Self {
        if k == 0 {
            return Self::exact_zero(field);
        }
        let e = field.e as i64;
        let v = ring::vp(k.unsigned_abs(), field.p);
        let kv = k / (field.p as i64).pow(v as u32);
        let r = field.n + 1;
        let m = pw(field.p, r);
        let mut a = vec![0u64; field.dim()];
        a[0] = kv.rem_euclid(m as i64) as u64;
        if e == 2 && v > 0 {
            // p^v = π^{2v} · u^{-v}
            let uv = field.upow(&field.u_inv, v as u64, m);
            a = field.from_unram(&field.uscale(&uv, a[0], m));
        }
        let mut x = Self::from_raw(field, &a, r, 0, e * field.n);
        x.vpi = Some(e * v);
        x
    }

    /// A rational number a/b with b prime to p or a power of p times such.
    pub fn from_ratio(field: &Arc<FieldDesc>, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::DivisionByZero);
        }
        Self::from_int(field, num).div(&Self::from_int(field, den))
    }

    /// Integer coefficient vector in the basis 1, g, .. (then π, gπ, .. when e = 2).
    pub fn from_coeffs(field: &Arc<FieldDesc>, coeffs: &[i64]) -> Self {
        let r = field.n + GUARD / 2;
        let m = pw(field.p, r);
        let mut a = vec![0u64; field.dim()];
        for (i, &c) in coeffs.iter().enumerate().take(field.dim()) {
            a[i] = c.rem_euclid(m as i64) as u64;
        }
        Self::from_raw(field, &a, r, 0, field.e as i64 * r)
    }

    /// Build π^vpi · unit from raw unit coefficients known to `rel` π-digits.
    pub fn from_parts(field: &Arc<FieldDesc>, vpi: i64, unit: &[u64], rel: i64) -> Result<Self> {
        if unit.len() != field.dim() {
            return Err(Error::Invalid("unit vector has wrong length".into()));
        }
        if rel < 1 {
            return Err(Error::PrecisionExhausted("relative precision below one digit".into()));
        }
        let r = ceil_div(rel, field.e as i64) + 1;
        let x = Self::from_raw(field, unit, r, vpi, rel.min(field.e as i64 * r));
        if x.vpi != Some(vpi) {
            return Err(Error::NonUnit("leading coefficient is not a unit".into()));
        }
        Ok(x)
    }

    /// The generator g of the unramified part.
    pub fn gen(field: &Arc<FieldDesc>) -> Self {
        let mut c = vec![0i64; field.dim()];
        if field.f > 1 {
            c[1] = 1;
            Self::from_coeffs(field, &c)
        } else {
            // degenerate case: g is a root of x, i.e. 0
            Self::exact_zero(field)
        }
    }

    /// The uniformizer: p when e = 1, π when e = 2.
    pub fn uniformizer(field: &Arc<FieldDesc>) -> Self {
        let one = field.rone(pw(field.p, 1));
        PadicScalar {
            field: field.clone(),
            vpi: Some(1),
            unit: one,
            rel: field.e as i64 * field.n,
        }
    }

    pub fn p_power(field: &Arc<FieldDesc>, k: i64) -> Self {
        Self::from_int(field, field.p as i64).pow(k).expect("p is invertible")
    }

    /// A random unit with full relative precision.
    pub fn random_unit<R: Rng + ?Sized>(field: &Arc<FieldDesc>, rng: &mut R) -> Self {
        let r = field.n + 1;
        let m = pw(field.p, r);
        loop {
            let a: Vec<u64> = (0..field.dim()).map(|_| rng.gen_range(0..m)).collect();
            if a[..field.f].iter().any(|c| c % field.p != 0) {
                return Self::from_raw(field, &a, r, 0, field.e as i64 * field.n);
            }
        }
    }

    /// A random element of 𝒪 (possibly non-unit), full absolute precision.
    pub fn random_integer<R: Rng + ?Sized>(field: &Arc<FieldDesc>, rng: &mut R) -> Self {
        let r = field.n;
        let m = pw(field.p, r);
        let a: Vec<u64> = (0..field.dim()).map(|_| rng.gen_range(0..m)).collect();
        Self::from_raw(field, &a, r, 0, field.e as i64 * r)
    }

    /// Element of the unramified subring with integer coefficients (len f),
    /// at full precision.
    pub fn from_unram_coeffs(field: &Arc<FieldDesc>, a: &[u64], r: i64) -> Self {
        let v = field.from_unram(a);
        Self::from_raw(field, &v, r, 0, field.e as i64 * r)
    }

    // -- accessors -----------------------------------------------------

    pub fn field(&self) -> &Arc<FieldDesc> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.vpi.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.vpi.is_none() && self.rel >= EXACT
    }

    /// Valuation normalized by ord(p) = 1; None for zero.
    pub fn ord(&self) -> Option<Ratio<i64>> {
        self.vpi.map(|v| Ratio::new(v, self.field.e as i64))
    }

    /// Valuation in π-units (ord(π) = 1).
    pub fn ord_pi(&self) -> Option<i64> {
        self.vpi
    }

    pub fn ord_with(&self, norm: OrdNorm) -> Option<Ratio<i64>> {
        match norm {
            OrdNorm::P => self.ord(),
            OrdNorm::Pi => self.vpi.map(Ratio::from_integer),
        }
    }

    /// Relative precision in π-digits (absolute for zero).
    pub fn rel_prec_pi(&self) -> i64 {
        self.rel
    }

    /// Relative precision in powers of p (absolute precision for zero).
    pub fn prec(&self) -> i64 {
        self.rel / self.field.e as i64
    }

    /// Absolute precision in π-units.
    pub fn abs_prec_pi(&self) -> i64 {
        match self.vpi {
            Some(v) => v.saturating_add(self.rel),
            None => self.rel,
        }
    }

    /// Absolute precision in powers of p (floored).
    pub fn abs_prec(&self) -> i64 {
        self.abs_prec_pi().div_euclid(self.field.e as i64)
    }

    /// Raw unit coefficients (meaningful modulo π^rel).
    pub fn unit_coeffs(&self) -> &[u64] {
        &self.unit
    }

    /// The unit part, i.e. self / π^ord.
    pub fn unit_part(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonUnit("zero has no unit part".into()));
        }
        let mut u = self.clone();
        u.vpi = Some(0);
        Ok(u)
    }

    /// Residue in 𝔽_{p^f} of a π-adic unit.
    pub fn residue(&self) -> Option<Vec<u64>> {
        match self.vpi {
            Some(0) => Some(self.field.residue(&self.unit)),
            _ => None,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.vpi == Some(0)
    }

    /// True when the value lies in 𝒪 as far as known.
    pub fn is_integral(&self) -> bool {
        self.vpi.map_or(true, |v| v >= 0)
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.field != o.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// Coefficients of π^{-shift}·self modulo p^r.
    pub(crate) fn raw(&self, shift: i64, r: i64) -> Vec<u64> {
        let m = pw(self.field.p, r);
        match self.vpi {
            None => vec![0; self.field.dim()],
            Some(v) => {
                let k = v - shift;
                debug_assert!(k >= 0);
                if k >= self.field.e as i64 * r {
                    vec![0; self.field.dim()]
                } else {
                    self.field.mul_pi(&self.unit, k, m)
                }
            }
        }
    }

    /// Coefficient vector of an integral element modulo p^r (absolute).
    pub fn coeffs_mod(&self, r: i64) -> Result<Vec<u64>> {
        if !self.is_integral() {
            return Err(Error::Invalid("element is not integral".into()));
        }
        Ok(self.raw(0, r))
    }

    // -- arithmetic ----------------------------------------------------

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let e = self.field.e as i64;
        let a = self.abs_prec_pi().min(o.abs_prec_pi());
        let v = self.vpi.unwrap_or(EXACT).min(o.vpi.unwrap_or(EXACT));
        if v >= a {
            return Ok(Self::zero_abs_pi(&self.field, a));
        }
        let span = a - v;
        let r = ceil_div(span, e) + 1;
        let m = pw(self.field.p, r);
        let s = self.field.radd(&self.raw(v, r), &o.raw(v, r), m);
        Ok(Self::from_raw(&self.field, &s, r, v, span))
    }

    pub fn neg(&self) -> Self {
        let mut x = self.clone();
        if self.vpi.is_some() {
            let e = self.field.e as i64;
            let m = pw(self.field.p, ceil_div(self.rel, e));
            x.unit = self.unit.iter().map(|&c| submod(0, c, m)).collect();
            Self::canon(&self.field, &mut x.unit, self.rel);
        }
        x
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        match (self.vpi, o.vpi) {
            (Some(vx), Some(vy)) => {
                let rel = self.rel.min(o.rel);
                let e = self.field.e as i64;
                let m = pw(self.field.p, ceil_div(rel, e));
                let mut u = self.field.rmul(&self.unit, &o.unit, m);
                Self::canon(&self.field, &mut u, rel);
                Ok(PadicScalar { field: self.field.clone(), vpi: Some(vx + vy), unit: u, rel })
            }
            (None, Some(vy)) => Ok(Self::zero_abs_pi(&self.field, self.rel.saturating_add(vy))),
            (Some(vx), None) => Ok(Self::zero_abs_pi(&self.field, o.rel.saturating_add(vx))),
            (None, None) => Ok(Self::zero_abs_pi(&self.field, self.rel.saturating_add(o.rel))),
        }
    }

    pub fn inv(&self) -> Result<Self> {
        let v = self.vpi.ok_or(Error::DivisionByZero)?;
        let e = self.field.e as i64;
        let mut u = self.field.rinv(&self.unit, ceil_div(self.rel, e));
        Self::canon(&self.field, &mut u, self.rel);
        Ok(PadicScalar { field: self.field.clone(), vpi: Some(-v), unit: u, rel: self.rel })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        if n < 0 {
            return self.inv()?.pow(-n);
        }
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        let mut k = n as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn scale_int(&self, k: i64) -> Result<Self> {
        self.mul(&Self::from_int(&self.field, k))
    }

    /// Multiply by π^k (p^k when e = 1), exactly.
    pub fn shift_pi(&self, k: i64) -> Self {
        let mut x = self.clone();
        match x.vpi {
            Some(v) => x.vpi = Some(v + k),
            None => x.rel = x.rel.saturating_add(k),
        }
        x
    }

    /// Drop precision to at most `abs` powers of p (absolute).
    pub fn truncate_abs(&self, abs: i64) -> Self {
        let a = abs.saturating_mul(self.field.e as i64);
        match self.vpi {
            None => Self::zero_abs_pi(&self.field, self.rel.min(a)),
            Some(v) => {
                if a <= v {
                    Self::zero_abs_pi(&self.field, a)
                } else {
                    let mut x = self.clone();
                    x.rel = x.rel.min(a - v);
                    Self::canon(&self.field, &mut x.unit, x.rel);
                    x
                }
            }
        }
    }

    /// Reduce precision to at most `rel` relative π-digits.
    pub fn with_rel_prec_pi(&self, rel: i64) -> Self {
        let mut x = self.clone();
        if x.vpi.is_some() && rel < x.rel {
            x.rel = rel.max(1);
            Self::canon(&self.field, &mut x.unit, x.rel);
        }
        x
    }

    /// x ≡ y modulo p^k, certified from known digits.
    pub fn eq_mod(&self, o: &Self, k: i64) -> bool {
        match self.sub(o) {
            Ok(d) => match d.vpi {
                None => d.rel >= k * self.field.e as i64,
                Some(v) => v >= k * self.field.e as i64,
            },
            Err(_) => false,
        }
    }

    /// Valuation of the difference (ord(p)=1), or its known lower bound for zero.
    pub fn distance_ord(&self, o: &Self) -> Result<Ratio<i64>> {
        let d = self.sub(o)?;
        Ok(match d.vpi {
            Some(v) => Ratio::new(v, self.field.e as i64),
            None => Ratio::new(d.rel.min(EXACT), self.field.e as i64),
        })
    }

    /// Symmetric integer representative of an element of ℤ_p (e = f = 1 view:
    /// uses only the constant coefficient) modulo p^k.
    pub fn to_symmetric_int(&self, k: i64) -> Result<i64> {
        if !self.is_integral() {
            return Err(Error::Invalid("not integral".into()));
        }
        let c = self.raw(0, k)[0];
        let m = pw(self.field.p, k);
        Ok(if c > m / 2 { c as i64 - m as i64 } else { c as i64 })
    }

    /// True when the element lies in the unramified subring (all π-coefficients vanish).
    pub fn is_unramified_valued(&self) -> bool {
        if self.field.e == 1 {
            return true;
        }
        match self.vpi {
            None => true,
            Some(v) => v % 2 == 0 && self.unit[self.field.f..].iter().all(|&c| c == 0),
        }
    }
}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl std::ops::Add for &PadicScalar {
    type Output = PadicScalar;
    fn add(self, o: &PadicScalar) -> PadicScalar {
        PadicScalar::add(self, o).expect("field mismatch in +")
    }
}

impl std::ops::Sub for &PadicScalar {
    type Output = PadicScalar;
    fn sub(self, o: &PadicScalar) -> PadicScalar {
        PadicScalar::sub(self, o).expect("field mismatch in -")
    }
}

impl std::ops::Mul for &PadicScalar {
    type Output = PadicScalar;
    fn mul(self, o: &PadicScalar) -> PadicScalar {
        PadicScalar::mul(self, o).expect("field mismatch in *")
    }
}

impl std::ops::Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        PadicScalar::neg(self)
    }
}
