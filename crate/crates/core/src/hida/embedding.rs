//! Fixed points of non-split embeddings and the partial L-function
//! attached to one of them.

use std::sync::Arc;

use super::germ::Germ;
use super::theta::{EdgeDistributions, Lattice, Theta};
use crate::error::{Error, Result};
use crate::padic::{FieldDesc, Mat2, PadicScalar};
use crate::tree::{reduction, ExtPoint, TreePoint};

/// The fixed point τ of M acting by Möbius maps, with c·τ² + (d − a)τ − b = 0
/// and τ = (a − d + √Δ) / 2c. Inert discriminants land in ℚ_{p²}, ramified
/// ones in ℚ_p(√(u₀p)); split ones are rejected. Digits of M beyond its
/// precision are unknown, so a discriminant of valuation v costs v digits;
/// [`fixed_point_of_int_matrix`] avoids that for integer matrices.
pub fn fixed_point_of_embedding(m: &Mat2) -> Result<ExtPoint> {
    let k0 = m.a.field().clone();
    if k0.degree() != 1 {
        return Err(Error::Unsupported("embeddings over ℚ_p only".into()));
    }
    if m.c.is_zero() {
        return Err(Error::Invalid("lower-left entry vanishes; the fixed points are rational".into()));
    }
    let guard = m.c.ord().map(|o| o.ceil().to_integer()).unwrap_or(0).max(0) + 2;
    fixed_point_at(&m.embed_into(&k0.with_prec(k0.n + guard)?)?, &k0)
}

/// The same for an integer matrix, whose entries are exact: the work is
/// done with enough guard digits that τ is right to the precision of `k`.
pub fn fixed_point_of_int_matrix(k: &Arc<FieldDesc>, m: [[i64; 2]; 2]) -> Result<ExtPoint> {
    if k.degree() != 1 {
        return Err(Error::Unsupported("embeddings over ℚ_p only".into()));
    }
    if m[1][0] == 0 {
        return Err(Error::Invalid("lower-left entry vanishes; the fixed points are rational".into()));
    }
    let tr = m[0][0] as i128 + m[1][1] as i128;
    let disc = tr * tr - 4 * (m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128);
    if disc == 0 {
        return Err(Error::Invalid("discriminant vanishes".into()));
    }
    let vp = |mut x: i128| {
        let mut v = 0;
        while x % k.p as i128 == 0 {
            x /= k.p as i128;
            v += 1;
        }
        v
    };
    let guard = vp(disc) + vp(m[1][0] as i128) + 2;
    fixed_point_at(&Mat2::from_ints(&k.with_prec(k.n + guard)?, m), k)
}

/// τ computed at the precision of `m`, returned over `k0`.
fn fixed_point_at(m: &Mat2, k0: &Arc<FieldDesc>) -> Result<ExtPoint> {
    let k = m.a.field().clone();
    let tr = m.a.add(&m.d)?;
    let disc = tr.mul(&tr)?.sub(&m.det().scale_int(4)?)?;
    let v = disc.ord_pi().ok_or_else(|| Error::Invalid("discriminant vanishes".into()))?;
    let u = disc.unit_part()?;
    let (l, root) = if v % 2 == 0 {
        let res = u.residue().unwrap()[0];
        if is_square_mod(res, k.p) {
            return Err(Error::Invalid("split discriminant: no fixed point in the upper half plane".into()));
        }
        let l = FieldDesc::unramified(k.p, 2, k.n)?;
        let root = disc.embed_into(&l)?.sqrt()?;
        (l, root)
    } else {
        let u0 = u.coeffs_mod(k.n + 1)?[0];
        let l = FieldDesc::ramified(k.p, 1, &[u0], k.n)?;
        // the field keeps u₀ to fewer digits than u; √(u/u₀) ≡ 1 makes up the rest
        let stored = PadicScalar::from_int(&k, l.u[0] as i64);
        let fix = u.div(&stored)?.sqrt()?.embed_into(&l)?;
        let root = PadicScalar::uniformizer(&l).mul(&PadicScalar::p_power(&l, (v - 1) / 2))?.mul(&fix)?;
        (l, root)
    };
    let emb = |x: &PadicScalar| x.embed_into(&l);
    let num = emb(&m.a)?.sub(&emb(&m.d)?)?.add(&root)?;
    let tau = num.div(&emb(&m.c)?.scale_int(2)?)?;
    let l0 = l.with_prec(k0.n)?;
    ExtPoint::new(tau.embed_into(&l0)?, k0)
}

fn is_square_mod(r: u64, p: u64) -> bool {
    r % p == 0 || (1..p).any(|x| x * x % p == r % p)
}

/// The lattices averaged over in the partial L-function: red τ itself, or
/// both ends when red τ is a midpoint.
pub fn embedding_lattices(tau: &ExtPoint) -> Result<Vec<Lattice>> {
    Ok(match reduction(tau)? {
        TreePoint::Vertex(v) => vec![Lattice::of(&v)],
        TreePoint::Midpoint(e) => vec![Lattice::of(&e.src), Lattice::of(&e.dst)],
    })
}

/// L_p(w) = ⟨C⟩ · exp(w·log C / 2) · (mean of θ(w; L) over the lattices).
/// Its constant term vanishes and its derivative is ⟨C⟩·I_Φ(τ).
pub fn partial_lp(src: &dyn EdgeDistributions, tau: &ExtPoint, lattices: &[Lattice], c: &PadicScalar) -> Result<Germ> {
    if lattices.is_empty() {
        return Err(Error::Invalid("no lattices to average over".into()));
    }
    let th = Theta::new(src, tau)?;
    let fd = &src.ctx().field;
    let order = src.ctx().order();
    let mut acc = Germ::zero(fd, order);
    for l in lattices {
        acc = acc.add(&th.theta(l)?)?;
    }
    let mean = acc.scale(&PadicScalar::from_ratio(fd, 1, lattices.len() as i64)?)?;
    let c = if c.field() == fd { c.clone() } else { c.embed_into(fd)? };
    let half_log = c.iwasawa_log()?.mul(&PadicScalar::from_ratio(fd, 1, 2)?)?;
    Germ::exp_linear(&half_log, order)?.mul(&mean)?.scale(&c.angle()?)
}
