//! The reduction map from the upper half plane over an extension to the tree.

use std::sync::Arc;

use super::{TreeEdge, TreePoint, TreeVertex};
use crate::error::{Error, Result};
use crate::padic::{FieldDesc, FieldEmbedding, PadicScalar};

/// A point τ of ℙ¹(L) ∖ ℙ¹(K) for an extension L of K = ℚ_{p^f}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtPoint {
    pub tau: PadicScalar,
    pub base: Arc<FieldDesc>,
}

impl ExtPoint {
    /// Validates that τ is separated from K at working precision.
    pub fn new(tau: PadicScalar, base: &Arc<FieldDesc>) -> Result<Self> {
        let pt = ExtPoint { tau, base: base.clone() };
        reduction(&pt)?;
        Ok(pt)
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        self.tau.field()
    }
}

/// red(τ): peel π-adic digits of τ lying in K; the first digit outside the
/// residue field of K (or a half-integral valuation) locates the point.
pub fn reduction(pt: &ExtPoint) -> Result<TreePoint> {
    let k = &pt.base;
    let l = pt.tau.field();
    let emb = FieldEmbedding::new(k, l)?;
    let el = l.e as i64;
    let mut c = PadicScalar::exact_zero(k);
    let mut y = pt.tau.clone();
    for _ in 0..(4 * el * l.n + 8) {
        let vpi = y.ord_pi().ok_or(Error::NotInUpperHalfPlane)?;
        if vpi % el != 0 {
            let m = vpi.div_euclid(el);
            let lo = TreeVertex::new(m, &c)?;
            let hi = TreeVertex::new(m + 1, &c)?;
            return Ok(TreePoint::Midpoint(TreeEdge { src: lo, dst: hi }));
        }
        let m = vpi / el;
        let res = y.mul(&PadicScalar::p_power(l, -m))?.residue().expect("unit");
        match emb.residue_preimage(&res) {
            None => return Ok(TreePoint::Vertex(TreeVertex::new(m, &c)?)),
            Some(r) => {
                let lift = PadicScalar::from_unram_coeffs(k, &r, k.n + 1).shift_pi(m);
                c = c.add(&lift)?;
                y = y.sub(&emb.apply(&lift)?)?;
            }
        }
    }
    Err(Error::NotInUpperHalfPlane)
}

/// Oracle: minimize n − 2·min(n, ord(τ − b)) over all vertices within
/// `radius` of v*. One minimizer is a vertex; two adjacent ones a midpoint.
pub fn reduction_by_search(pt: &ExtPoint, radius: usize) -> Result<TreePoint> {
    let l = pt.tau.field();
    let el = l.e as i64;
    let score = |v: &TreeVertex| -> Result<i64> {
        let b = super::lift_exact(v.b(), v.n.max(0) + 1).embed_into(l)?;
        let d = pt.tau.sub(&b)?;
        let o = d.ord_pi().unwrap_or(i64::MAX / 4);
        Ok(el * v.n - 2 * o.min(el * v.n))
    };
    let verts = TreeVertex::base(&pt.base).ball_of_radius(radius);
    let mut best = i64::MAX;
    let mut argmin: Vec<TreeVertex> = Vec::new();
    for v in verts {
        let s = score(&v)?;
        if s < best {
            best = s;
            argmin = vec![v];
        } else if s == best {
            argmin.push(v);
        }
    }
    match argmin.len() {
        1 => Ok(TreePoint::Vertex(argmin.pop().unwrap())),
        2 => {
            let (a, b) = (argmin[0].clone(), argmin[1].clone());
            let e = TreeEdge::new(a, b)?;
            Ok(TreePoint::Midpoint(e.descending()))
        }
        _ => Err(Error::DepthExceeded("search radius too small for the reduction".into())),
    }
}
