//! Multiplicative integrals ×∫_d ω_μ ∈ L^× ⊗ ℤ^r by cover refinement.

use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{precision_offset, HarmonicMeasure};
use crate::padic::{FieldDesc, Mat2, P1Point, PadicScalar};
use crate::tree::{Ball, BallKind, ExtPoint};

/// Where to evaluate f_d on each ball of the cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SampleRule {
    /// The canonical center; ∞ for co-interior balls.
    #[default]
    Center,
    /// center + p^m for interior balls, center + p^{m-1} for co-interior ones.
    Shifted,
}

fn sample(b: &Ball, rule: SampleRule) -> Result<P1Point> {
    match rule {
        SampleRule::Center => Ok(b.sample()),
        SampleRule::Shifted => {
            let fd = b.center.field();
            let P1Point::Finite(c) = Ball { kind: BallKind::Interior, ..b.clone() }.sample() else { unreachable!() };
            let k = match b.kind {
                BallKind::Interior => b.m,
                BallKind::CoInterior => b.m - 1,
            };
            Ok(P1Point::Finite(c.add(&PadicScalar::p_power(fd, k))?))
        }
    }
}

/// An element of L^× ⊗ ℤ^r, one nonzero scalar per component. Each
/// scalar keeps its valuation apart from its unit, so ord is exact.
#[derive(Clone, Debug)]
pub struct MultIntegralValue {
    pub field: Arc<FieldDesc>,
    pub components: Vec<PadicScalar>,
    /// Units are reliable modulo p^guaranteed_prec.
    pub guaranteed_prec: i64,
}

impl MultIntegralValue {
    pub fn identity(field: &Arc<FieldDesc>, rank: usize) -> Self {
        MultIntegralValue {
            field: field.clone(),
            components: vec![PadicScalar::one(field); rank],
            guaranteed_prec: field.n,
        }
    }

    pub fn rank(&self) -> usize {
        self.components.len()
    }

    pub fn vals(&self) -> Vec<Ratio<i64>> {
        self.components.iter().map(|x| x.ord().expect("nonzero")).collect()
    }

    pub fn units(&self) -> Result<Vec<PadicScalar>> {
        self.components.iter().map(|x| x.unit_part()).collect()
    }

    /// Componentwise group law.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.rank() != o.rank() {
            return Err(Error::RankMismatch { expected: self.rank(), got: o.rank() });
        }
        let components = self.components.iter().zip(&o.components).map(|(a, b)| a.mul(b)).collect::<Result<_>>()?;
        Ok(MultIntegralValue {
            field: self.field.clone(),
            components,
            guaranteed_prec: self.guaranteed_prec.min(o.guaranteed_prec),
        })
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let components = self.components.iter().map(|a| a.pow(k)).collect::<Result<_>>()?;
        Ok(MultIntegralValue { field: self.field.clone(), components, guaranteed_prec: self.guaranteed_prec })
    }

    pub fn inv(&self) -> Result<Self> {
        self.pow(-1)
    }

    /// Equality of vals and of units modulo p^k.
    pub fn agrees_with(&self, o: &Self, k: i64) -> Result<bool> {
        if self.vals() != o.vals() {
            return Ok(false);
        }
        for (a, b) in self.units()?.iter().zip(o.units()?) {
            if !a.eq_mod(&b, k) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn to_json(&self) -> Result<IntegralJson> {
        let mut components = Vec::new();
        for x in &self.components {
            let v = x.ord().expect("nonzero");
            let u = x.unit_part()?.truncate_abs(self.guaranteed_prec.max(0));
            components.push(ComponentJson {
                val: format!("{}/{}", v.numer(), v.denom()),
                unit: u.to_string(),
                prec: self.guaranteed_prec,
            });
        }
        Ok(IntegralJson { components, guaranteed_prec: self.guaranteed_prec })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComponentJson {
    pub val: String,
    pub unit: String,
    pub prec: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IntegralJson {
    pub components: Vec<ComponentJson>,
    pub guaranteed_prec: i64,
}

/// f_d(t) = (t − τ₁)/(t − τ₂), with f_d(∞) = 1.
fn f_d(t: &P1Point, tau1: &PadicScalar, tau2: &PadicScalar) -> Result<PadicScalar> {
    match t {
        P1Point::Infinity => Ok(PadicScalar::one(tau1.field())),
        P1Point::Finite(x) => {
            let x = x.embed_into(tau1.field())?;
            x.sub(tau1)?.div(&x.sub(tau2)?)
        }
    }
}

/// ×∫_{[τ₁]−[τ₂]} ω_μ over the depth-D cover with center samples.
pub fn mult_integral(mu: &HarmonicMeasure, tau1: &ExtPoint, tau2: &ExtPoint, depth: i64) -> Result<MultIntegralValue> {
    mult_integral_with(mu, tau1, tau2, depth, SampleRule::Center)
}

pub fn mult_integral_with(
    mu: &HarmonicMeasure,
    tau1: &ExtPoint,
    tau2: &ExtPoint,
    depth: i64,
    rule: SampleRule,
) -> Result<MultIntegralValue> {
    if tau1.field() != tau2.field() {
        return Err(Error::FieldMismatch);
    }
    if &tau1.base != mu.field() || &tau2.base != mu.field() {
        return Err(Error::FieldMismatch);
    }
    let l = tau1.field();
    let c = precision_offset(&[tau1, tau2])?;
    let mut acc = MultIntegralValue::identity(l, mu.rank());
    if tau1.tau == tau2.tau {
        return Ok(acc);
    }
    for (b, v) in mu.cover(depth)? {
        let y = f_d(&sample(&b, rule)?, &tau1.tau, &tau2.tau)?;
        for (a, &k) in acc.components.iter_mut().zip(&v) {
            if k != 0 {
                *a = a.mul(&y.pow(k)?)?;
            }
        }
    }
    let unit_prec = acc.components.iter().map(|x| x.prec()).min().unwrap_or(l.n);
    acc.guaranteed_prec = (depth - c).min(unit_prec).min(l.n);
    Ok(acc)
}

/// ×∫ over a general degree-0 divisor Σ nᵢ[τᵢ], as Π (×∫_{[τᵢ]−[τ₀]})^{nᵢ}.
pub fn mult_integral_divisor(mu: &HarmonicMeasure, divisor: &[(i64, ExtPoint)], depth: i64) -> Result<MultIntegralValue> {
    if divisor.iter().map(|(n, _)| n).sum::<i64>() != 0 {
        return Err(Error::Invalid("divisor must have degree 0".into()));
    }
    let Some((_, t0)) = divisor.first() else {
        return Err(Error::Invalid("empty divisor".into()));
    };
    let mut acc = MultIntegralValue::identity(t0.field(), mu.rank());
    for (n, t) in &divisor[1..] {
        acc = acc.mul(&mult_integral(mu, t, t0, depth)?.pow(*n)?)?;
    }
    Ok(acc)
}

pub fn ord_part(v: &MultIntegralValue) -> Vec<Ratio<i64>> {
    v.vals()
}

pub fn log_part(v: &MultIntegralValue) -> Result<Vec<PadicScalar>> {
    v.components.iter().map(|x| x.iwasawa_log()).collect()
}

pub fn log_norm_part(v: &MultIntegralValue) -> Result<Vec<PadicScalar>> {
    v.components.iter().map(|x| x.log_norm()).collect()
}

/// Result of comparing ×∫_{γd} with ×∫_d.
#[derive(Clone, Debug)]
pub struct InvarianceCheck {
    pub ok: bool,
    pub compared_mod: i64,
    pub witness: Option<String>,
}

pub fn gamma_invariance_check(
    mu: &HarmonicMeasure,
    g: &Mat2,
    tau1: &ExtPoint,
    tau2: &ExtPoint,
    depth: i64,
) -> Result<InvarianceCheck> {
    let move_pt = |t: &ExtPoint| -> Result<ExtPoint> {
        match g.act(&P1Point::Finite(t.tau.clone()))? {
            P1Point::Finite(x) => ExtPoint::new(x, &t.base),
            P1Point::Infinity => Err(Error::NotInUpperHalfPlane),
        }
    };
    let a = mult_integral(mu, tau1, tau2, depth)?;
    let b = mult_integral(mu, &move_pt(tau1)?, &move_pt(tau2)?, depth)?;
    let k = a.guaranteed_prec.min(b.guaranteed_prec);
    let ok = a.agrees_with(&b, k)?;
    let witness = if ok { None } else { Some(format!("vals {:?} vs {:?}, units {:?} vs {:?}", a.vals(), b.vals(), a.units()?, b.units()?)) };
    Ok(InvarianceCheck { ok, compared_mod: k, witness })
}
