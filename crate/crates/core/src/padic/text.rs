//! Text form `p^{a} * (c0 + c1*g + c2*g^2 + c3*pi + ...) mod p^N` and JSON.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{FieldDesc, PadicScalar};
use crate::error::{Error, Result};

fn fmt_ratio(r: Ratio<i64>) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
    let bad = || Error::Parse(format!("bad exponent `{s}`"));
    match s.split_once('/') {
        Some((a, b)) => Ok(Ratio::new(
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        )),
        None => Ok(Ratio::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn fmt_exp(r: Ratio<i64>) -> String {
    if *r.denom() == 1 && *r.numer() >= 0 {
        r.numer().to_string()
    } else {
        format!("{{{}}}", fmt_ratio(r))
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.field().e as i64;
        let Some(v) = self.ord_pi() else {
            if self.is_exact_zero() {
                return write!(f, "0");
            }
            return write!(f, "0 mod p^{}", fmt_exp(Ratio::new(self.rel_prec_pi(), e)));
        };
        let fd = self.field();
        let mut terms = Vec::new();
        for (i, &c) in self.unit_coeffs().iter().enumerate() {
            if c == 0 {
                continue;
            }
            let gi = i % fd.f;
            let mut t = c.to_string();
            match gi {
                0 => {}
                1 => t.push_str("*g"),
                k => t.push_str(&format!("*g^{k}")),
            }
            if i >= fd.f {
                t.push_str("*pi");
            }
            terms.push(t);
        }
        write!(
            f,
            "p^{{{}}} * ({}) mod p^{}",
            fmt_ratio(Ratio::new(v, e)),
            terms.join(" + "),
            fmt_exp(Ratio::new(v + self.rel_prec_pi(), e))
        )
    }
}

impl PadicScalar {
    /// Parse the canonical text form in a given field.
    pub fn parse(field: &Arc<FieldDesc>, s: &str) -> Result<Self> {
        let s = s.trim();
        let e = field.e as i64;
        let (body, modp) = match s.rsplit_once(" mod p^") {
            Some((b, m)) => (b.trim(), Some(parse_ratio(m)?)),
            None => (s, None),
        };
        if body == "0" {
            return Ok(match modp {
                Some(m) => Self::zero_abs_pi(field, (m * e).to_integer()),
                None => Self::exact_zero(field),
            });
        }
        let rest = body
            .strip_prefix("p^")
            .ok_or_else(|| Error::Parse(format!("expected `p^` in `{s}`")))?;
        let (exp, rest) = rest
            .split_once('*')
            .ok_or_else(|| Error::Parse(format!("expected `*` in `{s}`")))?;
        let a = parse_ratio(exp)?;
        let inner = rest
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected parenthesized unit in `{s}`")))?;
        let mut unit = vec![0u64; field.dim()];
        for term in inner.split('+') {
            let mut idx = 0usize;
            let mut coeff: Option<u64> = None;
            for fac in term.split('*').map(str::trim) {
                if fac == "g" {
                    idx += 1;
                } else if let Some(k) = fac.strip_prefix("g^") {
                    idx += k.parse::<usize>().map_err(|_| Error::Parse(format!("bad power `{fac}`")))?;
                } else if fac == "pi" {
                    if field.e != 2 {
                        return Err(Error::Parse("`pi` term in an unramified field".into()));
                    }
                    idx += field.f;
                } else {
                    coeff = Some(fac.parse().map_err(|_| Error::Parse(format!("bad coefficient `{fac}`")))?);
                }
            }
            if idx >= field.dim() {
                return Err(Error::Parse(format!("term `{term}` outside the basis")));
            }
            // a bare basis element such as `g` has coefficient 1
            let bare = term.split('*').any(|f| !f.trim().is_empty());
            unit[idx] = match coeff {
                Some(c) => c,
                None if bare => 1,
                None => return Err(Error::Parse(format!("missing coefficient in `{term}`"))),
            };
        }
        let vpi = a * e;
        if !vpi.is_integer() {
            return Err(Error::Parse(format!("valuation {a} not in (1/{e})ℤ")));
        }
        let vpi = vpi.to_integer();
        let rel = match modp {
            Some(m) => (m * e).to_integer() - vpi,
            None => e * field.n,
        };
        Self::from_parts(field, vpi, &unit, rel.min(e * field.n))
    }
}

#[derive(Serialize, Deserialize)]
struct ScalarJson {
    field: FieldDesc,
    value: String,
}

impl Serialize for PadicScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScalarJson { field: (**self.field()).clone(), value: self.to_string() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PadicScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ScalarJson::deserialize(d)?;
        PadicScalar::parse(&Arc::new(j.field), &j.value).map_err(serde::de::Error::custom)
    }
}
