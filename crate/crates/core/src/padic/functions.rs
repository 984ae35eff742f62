//! Logarithm, Teichmüller lift, Frobenius, norms and square roots.

use std::sync::Arc;

use super::ring::{ilog, inv_mod, pw, submod, vp};
use super::{ceil_div, FieldDesc, PadicScalar};
use crate::error::{Error, Result};

impl PadicScalar {
    /// Teichmüller representative of a unit: the root of unity of order
    /// dividing p^f - 1 with the same residue. Known to full precision.
    pub fn teichmuller(&self) -> Result<Self> {
        let res = self
            .residue()
            .ok_or_else(|| Error::NonUnit("Teichmüller lift needs a unit".into()))?;
        Ok(Self::teich_of_residue(self.field(), &res))
    }

    /// Teichmüller lift of a residue vector in 𝔽_{p^f}.
    pub fn teich_of_residue(field: &Arc<FieldDesc>, res: &[u64]) -> Self {
        let r = field.n + 1;
        let t = field.teich_raw(res, r);
        let v = field.from_unram(&t);
        Self::from_raw(field, &v, r, 0, field.e as i64 * field.n)
    }

    /// Principal-unit part: x / (π^ord · teich).
    pub fn angle(&self) -> Result<Self> {
        let u = self.unit_part()?;
        u.div(&u.teichmuller()?)
    }

    /// Iwasawa logarithm, log_p(p) = 0.
    pub fn iwasawa_log(&self) -> Result<Self> {
        let fd = self.field().clone();
        let vpi = self.ord_pi().ok_or_else(|| Error::Invalid("logarithm of zero".into()))?;
        let e = fd.e as i64;
        let p = fd.p;
        let rel = self.rel_prec_pi();
        let out_r = ceil_div(rel, e) + 1;

        // 1-unit z = unit / teich
        let res = fd.residue(self.unit_coeffs());
        let mut bound = rel + 2;
        while bound - e * ilog(bound as u64, p) < rel + e + 1 {
            bound += 1;
        }
        let big_k = (1..=bound).filter(|&k| k - e * ilog(k as u64, p) < rel).max().unwrap_or(0);
        let guard = if big_k > 0 { ilog(big_k as u64, p) } else { 0 };
        let r = out_r + guard + 1;
        let m = pw(p, r);
        let t = fd.from_unram(&fd.teich_raw(&res, r));
        let tinv = fd.rinv(&t, r);
        let z = fd.rmul(self.unit_coeffs(), &tinv, m);
        let h = fd.rsub(&z, &fd.rone(m), m);

        let out_m = pw(p, out_r);
        let mut acc = vec![0u64; fd.dim()];
        let mut hk = h.clone();
        for k in 1..=big_k {
            let v = vp(k as u64, p);
            let pv = pw(p, v);
            let ku = (k as u64) / pv;
            let kinv = inv_mod(ku % out_m, out_m).expect("unit part of k is prime to p");
            let term: Vec<u64> = hk
                .iter()
                .map(|&c| super::ring::mulmod((c / pv) % out_m, kinv, out_m))
                .collect();
            acc = if k % 2 == 1 {
                fd.radd(&acc, &term, out_m)
            } else {
                acc.iter().zip(&term).map(|(&a, &b)| submod(a, b, out_m)).collect()
            };
            hk = fd.rmul(&hk, &h, m);
        }
        let mut out = Self::from_raw(&fd, &acc, out_r, 0, rel);

        if e == 2 && vpi != 0 {
            // log π = log(u)/2 since π² = u·p
            let r2 = fd.n + 1;
            let u = Self::from_unram_coeffs(&fd, &fd.u, r2);
            let lu = u.iwasawa_log()?;
            let half = Self::from_ratio(&fd, vpi, 2)?;
            out = out.add(&lu.mul(&half)?)?;
        }
        Ok(out)
    }

    /// Frobenius σ on an element of an unramified field.
    pub fn frobenius(&self) -> Result<Self> {
        let fd = self.field().clone();
        if fd.e != 1 {
            return Err(Error::Unsupported("Frobenius on a ramified field".into()));
        }
        let Some(v) = self.ord_pi() else { return Ok(self.clone()) };
        let rel = self.rel_prec_pi();
        let r = rel + 1;
        let a = fd.ufrob(self.unit_coeffs(), r);
        Ok(Self::from_raw(&fd, &a, r, v, rel))
    }

    /// Relative norm of a unit to the unramified subring, as a vector mod p^r.
    fn norm_to_unramified_raw(&self, r: i64) -> Vec<u64> {
        let fd = self.field();
        let m = pw(fd.p, r);
        let a = self.unit_coeffs();
        if fd.e == 1 {
            return a.iter().map(|c| c % m).collect();
        }
        let (x0, x1) = a.split_at(fd.f);
        let up = fd.uscale(&fd.u, fd.p, m);
        fd.usub(&fd.umul(x0, x0, m), &fd.umul(&up, &fd.umul(x1, x1, m), m), m)
    }

    /// Norm of an unramified vector down to ℤ_p mod p^r.
    fn unram_norm_raw(fd: &FieldDesc, a: &[u64], r: i64) -> u64 {
        let m = pw(fd.p, r);
        let mut acc = fd.uone(m);
        let mut conj: Vec<u64> = a.iter().map(|c| c % m).collect();
        for j in 0..fd.f {
            acc = fd.umul(&acc, &conj, m);
            if j + 1 < fd.f {
                conj = fd.ufrob(&conj, r);
            }
        }
        acc[0]
    }

    /// N_{L/ℚ_p}(x), as a scalar over ℚ_p.
    pub fn norm_to_base(&self) -> Result<Self> {
        let fd = self.field().clone();
        let base = fd.base();
        let e = fd.e as i64;
        let f = fd.f as i64;
        let Some(vpi) = self.ord_pi() else {
            return Ok(Self::zero_abs_pi(&base, self.rel_prec_pi().saturating_mul(f)));
        };
        let rel = self.rel_prec_pi() / e;
        if rel < 1 {
            return Err(Error::PrecisionExhausted("norm of a barely known unit".into()));
        }
        let r = rel + 1;
        let m = pw(fd.p, r);
        let w = self.norm_to_unramified_raw(r);
        let mut c = Self::unram_norm_raw(&fd, &w, r);
        if e == 2 && vpi != 0 {
            // N(π) = p^f · N_K(-u)
            let negu: Vec<u64> = fd.u.iter().map(|&x| submod(0, x, m)).collect();
            let nu = Self::unram_norm_raw(&fd, &negu, r);
            let nuk = if vpi >= 0 {
                super::ring::powmod(nu, vpi as u64, m)
            } else {
                super::ring::powmod(inv_mod(nu, m).unwrap(), (-vpi) as u64, m)
            };
            c = super::ring::mulmod(c, nuk, m);
        }
        let unit = Self::from_raw(&base, &[c], r, 0, rel);
        Ok(unit.shift_pi(f * vpi))
    }

    /// The conjugates of x over ℚ_p (unramified fields, or the ramified
    /// quadratic extension of ℚ_p).
    pub fn conjugates(&self) -> Result<Vec<Self>> {
        let fd = self.field().clone();
        if fd.e == 1 {
            let mut out = vec![self.clone()];
            for _ in 1..fd.f {
                let next = out.last().unwrap().frobenius()?;
                out.push(next);
            }
            return Ok(out);
        }
        if fd.f != 1 {
            return Err(Error::Unsupported("conjugates over a ramified extension of degree above 2".into()));
        }
        let Some(v) = self.ord_pi() else { return Ok(vec![self.clone(), self.clone()]) };
        // π ↦ −π
        let m = pw(fd.p, self.rel_prec_pi() / 2 + 1);
        let u = self.unit_coeffs();
        let bar = Self::from_parts(&fd, v, &[u[0], submod(0, u[1] % m, m)], self.rel_prec_pi())?;
        let bar = if v % 2 != 0 { bar.neg() } else { bar };
        Ok(vec![self.clone(), bar])
    }

    /// An element of L lying in ℚ_p, as a scalar over ℚ_p.
    pub fn restrict_to_base(&self) -> Result<Self> {
        let fd = self.field().clone();
        let base = fd.base();
        let Some(v) = self.ord_pi() else {
            return Ok(Self::zero(&base, self.abs_prec()));
        };
        let e = fd.e as i64;
        if v % e != 0 || !self.is_unramified_valued() {
            return Err(Error::Invalid("element does not lie in ℚ_p".into()));
        }
        let rel = self.rel_prec_pi() / e;
        let u = self.unit_coeffs();
        if u[1..fd.f].iter().any(|&c| c % pw(fd.p, rel) != 0) {
            return Err(Error::Invalid("element does not lie in ℚ_p".into()));
        }
        let mut x = Self::from_parts(&base, 0, &[u[0]], rel.max(1))?;
        if e == 2 {
            // π^v = (u p)^{v/2}
            let up = Self::from_parts(&base, 0, &[fd.u[0]], base.n)?;
            x = x.mul(&up.pow(v / 2)?)?;
        }
        Ok(x.shift_pi(v / e))
    }

    /// Tr_{L/ℚ_p}(x) as a scalar over ℚ_p.
    pub fn trace_to_base(&self) -> Result<Self> {
        let cs = self.conjugates()?;
        let mut acc = cs[0].clone();
        for c in &cs[1..] {
            acc = acc.add(c)?;
        }
        acc.restrict_to_base()
    }

    /// (1 / [L:ℚ_p]) · log_p N_{L/ℚ_p}(x).
    pub fn log_norm(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Invalid("logNorm of zero".into()));
        }
        let fd = self.field();
        let l = self.norm_to_base()?.iwasawa_log()?;
        let deg = fd.degree() as i64;
        l.div(&Self::from_int(l.field(), deg))
    }

    /// Square root, when the valuation is even and the residue is a square.
    pub fn sqrt(&self) -> Result<Self> {
        let fd = self.field().clone();
        let Some(v) = self.ord_pi() else { return Ok(self.clone()) };
        if v % 2 != 0 {
            return Err(Error::Invalid("odd valuation has no square root".into()));
        }
        let u = self.unit_part()?;
        let res = u.residue().unwrap();
        let p = fd.p;
        let target = fd.from_unram(&res);
        let root = fd
            .residues()
            .into_iter()
            .find(|s| {
                let sv = fd.from_unram(s);
                fd.rmul(&sv, &sv, p) == target.iter().map(|c| c % p).collect::<Vec<_>>()
            })
            .ok_or_else(|| Error::Invalid("residue is not a square".into()))?;
        let mut y = Self::from_unram_coeffs(&fd, &root, fd.n + 1);
        let half = Self::from_ratio(&fd, 1, 2)?;
        let steps = 2 + ilog((fd.e as i64 * fd.n) as u64, 2);
        for _ in 0..steps {
            y = y.add(&u.div(&y)?)?.mul(&half)?;
        }
        let y = y.with_rel_prec_pi(u.rel_prec_pi());
        let mut out = y;
        out = out.shift_pi(v / 2);
        Ok(out)
    }
}
