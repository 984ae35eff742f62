use std::fmt;
use std::sync::Arc;

use super::{FieldDesc, PadicScalar};
use crate::error::{Error, Result};

/// A point of ℙ¹ over some field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum P1Point {
    Finite(PadicScalar),
    Infinity,
}

impl P1Point {
    pub fn finite(&self) -> Option<&PadicScalar> {
        match self {
            P1Point::Finite(x) => Some(x),
            P1Point::Infinity => None,
        }
    }
}

/// 2×2 matrix [[a, b], [c, d]] over a common field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: PadicScalar,
    pub b: PadicScalar,
    pub c: PadicScalar,
    pub d: PadicScalar,
}

impl Mat2 {
    pub fn new(a: PadicScalar, b: PadicScalar, c: PadicScalar, d: PadicScalar) -> Result<Self> {
        let fld = a.field();
        if b.field() != fld || c.field() != fld || d.field() != fld {
            return Err(Error::FieldMismatch);
        }
        Ok(Mat2 { a, b, c, d })
    }

    pub fn from_ints(field: &Arc<FieldDesc>, m: [[i64; 2]; 2]) -> Self {
        let s = |k| PadicScalar::from_int(field, k);
        Mat2 { a: s(m[0][0]), b: s(m[0][1]), c: s(m[1][0]), d: s(m[1][1]) }
    }

    pub fn identity(field: &Arc<FieldDesc>) -> Self {
        Self::from_ints(field, [[1, 0], [0, 1]])
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        self.a.field()
    }

    pub fn det(&self) -> PadicScalar {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    pub fn mul(&self, o: &Mat2) -> Result<Mat2> {
        let f = |x: &PadicScalar, y: &PadicScalar, z: &PadicScalar, w: &PadicScalar| {
            x.mul(y)?.add(&z.mul(w)?)
        };
        Ok(Mat2 {
            a: f(&self.a, &o.a, &self.b, &o.c)?,
            b: f(&self.a, &o.b, &self.b, &o.d)?,
            c: f(&self.c, &o.a, &self.d, &o.c)?,
            d: f(&self.c, &o.b, &self.d, &o.d)?,
        })
    }

    /// Adjugate: the inverse up to the scalar det.
    pub fn adjugate(&self) -> Mat2 {
        Mat2 { a: self.d.clone(), b: self.b.neg(), c: self.c.neg(), d: self.a.clone() }
    }

    pub fn inv(&self) -> Result<Mat2> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let di = det.inv()?;
        let adj = self.adjugate();
        Ok(Mat2 { a: adj.a.mul(&di)?, b: adj.b.mul(&di)?, c: adj.c.mul(&di)?, d: adj.d.mul(&di)? })
    }

    pub fn scale(&self, s: &PadicScalar) -> Result<Mat2> {
        Ok(Mat2 { a: self.a.mul(s)?, b: self.b.mul(s)?, c: self.c.mul(s)?, d: self.d.mul(s)? })
    }

    pub fn embed_into(&self, dst: &Arc<FieldDesc>) -> Result<Mat2> {
        Ok(Mat2 {
            a: self.a.embed_into(dst)?,
            b: self.b.embed_into(dst)?,
            c: self.c.embed_into(dst)?,
            d: self.d.embed_into(dst)?,
        })
    }

    pub fn trace(&self) -> PadicScalar {
        &self.a + &self.d
    }

    /// Möbius action z ↦ (az + b)/(cz + d). Entries are embedded into the
    /// point's field when needed.
    pub fn act(&self, z: &P1Point) -> Result<P1Point> {
        if self.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        match z {
            P1Point::Infinity => {
                if self.c.is_zero() {
                    Ok(P1Point::Infinity)
                } else {
                    Ok(P1Point::Finite(self.a.div(&self.c)?))
                }
            }
            P1Point::Finite(x) => {
                let m = if x.field() == self.field() {
                    self.clone()
                } else {
                    self.embed_into(x.field())?
                };
                let num = m.a.mul(x)?.add(&m.b)?;
                let den = m.c.mul(x)?.add(&m.d)?;
                if den.is_zero() {
                    Ok(P1Point::Infinity)
                } else {
                    Ok(P1Point::Finite(num.div(&den)?))
                }
            }
        }
    }

    /// Möbius action on a finite point that must stay finite.
    pub fn act_scalar(&self, x: &PadicScalar) -> Result<PadicScalar> {
        match self.act(&P1Point::Finite(x.clone()))? {
            P1Point::Finite(y) => Ok(y),
            P1Point::Infinity => Err(Error::PrecisionExhausted("point sent to infinity".into())),
        }
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
