//! Truncated power series in w = s − 2 over ℚ_p.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{FieldDesc, PadicScalar};

/// c₀ + c₁w + … + c_M w^M, with M the order.
#[derive(Clone, Debug, PartialEq)]
pub struct Germ {
    pub coeffs: Vec<PadicScalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GermJson {
    pub coeffs: Vec<String>,
    pub prec: i64,
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

impl Germ {
    pub fn zero(field: &Arc<FieldDesc>, order: usize) -> Self {
        Germ { coeffs: vec![PadicScalar::exact_zero(field); order + 1] }
    }

    pub fn constant(x: PadicScalar, order: usize) -> Self {
        let mut g = Self::zero(x.field(), order);
        g.coeffs[0] = x;
        g
    }

    pub fn one(field: &Arc<FieldDesc>, order: usize) -> Self {
        Self::constant(PadicScalar::one(field), order)
    }

    pub fn from_coeffs(coeffs: Vec<PadicScalar>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Invalid("a germ needs a constant term".into()));
        }
        Ok(Germ { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        self.coeffs[0].field()
    }

    pub fn value_at_zero(&self) -> &PadicScalar {
        &self.coeffs[0]
    }

    /// d/dw at w = 0.
    pub fn derivative(&self) -> PadicScalar {
        self.coeffs.get(1).cloned().unwrap_or_else(|| PadicScalar::zero(self.field(), self.prec()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(PadicScalar::is_zero)
    }

    /// Smallest absolute precision among the coefficients.
    pub fn prec(&self) -> i64 {
        self.coeffs.iter().map(PadicScalar::abs_prec).min().unwrap()
    }

    /// Smallest valuation (or known precision, for zeros) among the coefficients.
    pub fn min_ord(&self) -> i64 {
        self.coeffs
            .iter()
            .map(|c| match c.ord() {
                Some(v) => v.floor().to_integer(),
                None => c.abs_prec(),
            })
            .min()
            .unwrap()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, PadicScalar::exact_zero(self.field()));
        Germ { coeffs: c }
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let n = self.order().min(o.order());
        let coeffs = (0..=n).map(|i| self.coeffs[i].add(&o.coeffs[i])).collect::<Result<_>>()?;
        Ok(Germ { coeffs })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Germ { coeffs: self.coeffs.iter().map(PadicScalar::neg).collect() }
    }

    pub fn scale(&self, s: &PadicScalar) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.mul(s)).collect::<Result<_>>()?;
        Ok(Germ { coeffs })
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let n = self.order().min(o.order());
        let mut coeffs = vec![PadicScalar::exact_zero(self.field()); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_exact_zero() {
                continue;
            }
            for j in 0..=n - i {
                if o.coeffs[j].is_exact_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].add(&self.coeffs[i].mul(&o.coeffs[j])?)?;
            }
        }
        Ok(Germ { coeffs })
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inv(&self) -> Result<Self> {
        let n = self.order();
        let c0inv = self.coeffs[0].inv()?;
        let mut out = vec![c0inv.clone()];
        for k in 1..=n {
            let mut s = PadicScalar::exact_zero(self.field());
            for j in 1..=k {
                s = s.add(&self.coeffs[j].mul(&out[k - j])?)?;
            }
            out.push(s.mul(&c0inv)?.neg());
        }
        Ok(Germ { coeffs: out })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.inv()?)
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut acc = Self::one(self.field(), self.order());
        let mut base = self.clone();
        let mut k = k as u64;
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

    /// exp of a germ with vanishing constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Invalid("exp needs a germ without constant term".into()));
        }
        let n = self.order();
        let mut h = self.clone();
        h.coeffs[0] = PadicScalar::exact_zero(self.field());
        let mut acc = Self::one(self.field(), n);
        let mut pw = Self::one(self.field(), n);
        for k in 1..=n {
            pw = pw.mul(&h)?;
            let inv = PadicScalar::from_ratio(self.field(), 1, factorial(k))?;
            acc = acc.add(&pw.scale(&inv)?)?;
        }
        Ok(acc)
    }

    /// log of a germ with constant term 1.
    pub fn log(&self) -> Result<Self> {
        let n = self.order();
        let one = PadicScalar::one(self.field());
        if !self.coeffs[0].eq_mod(&one, self.coeffs[0].abs_prec()) {
            return Err(Error::Invalid("log needs constant term 1".into()));
        }
        let mut h = self.clone();
        h.coeffs[0] = PadicScalar::exact_zero(self.field());
        let mut acc = Self::zero(self.field(), n);
        let mut pw = Self::one(self.field(), n);
        for k in 1..=n {
            pw = pw.mul(&h)?;
            let c = PadicScalar::from_ratio(self.field(), if k % 2 == 1 { 1 } else { -1 }, k as i64)?;
            acc = acc.add(&pw.scale(&c)?)?;
        }
        Ok(acc)
    }

    /// exp(w·x).
    pub fn exp_linear(x: &PadicScalar, order: usize) -> Result<Self> {
        let mut g = Self::zero(x.field(), order);
        if order >= 1 {
            g.coeffs[1] = x.clone();
        }
        g.exp()
    }

    /// The m-th root whose constant term is c0 (with c0^m equal to the
    /// constant term of self).
    pub fn root(&self, m: i64, c0: &PadicScalar) -> Result<Self> {
        let c0m = Self::constant(c0.pow(m)?, self.order());
        let ratio = self.div(&c0m)?;
        let inv_m = PadicScalar::from_ratio(self.field(), 1, m)?;
        let l = ratio.log()?.scale(&inv_m)?;
        Self::constant(c0.clone(), self.order()).mul(&l.exp()?)
    }

    /// Coefficientwise congruence modulo p^k.
    pub fn eq_mod(&self, o: &Self, k: i64) -> bool {
        let n = self.order().min(o.order());
        (0..=n).all(|i| self.coeffs[i].eq_mod(&o.coeffs[i], k))
    }

    pub fn to_json(&self) -> GermJson {
        let prec = self.prec().min(self.field().n);
        GermJson { coeffs: self.coeffs.iter().map(|c| c.truncate_abs(prec).to_string()).collect(), prec }
    }

    pub fn from_json(field: &Arc<FieldDesc>, j: &GermJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(|s| PadicScalar::parse(field, s)).collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(coeffs)
    }
}
