use std::collections::HashMap;
use std::sync::Arc;

use super::ring::pw;
use super::{ceil_div, FieldDesc, PadicScalar};
use crate::error::{Error, Result};

/// An embedding K ↪ L of fields sharing p, with f_K | f_L and K either
/// unramified or equal to L up to precision.
#[derive(Debug)]
pub struct FieldEmbedding {
    pub src: Arc<FieldDesc>,
    pub dst: Arc<FieldDesc>,
    rho: Vec<u64>,
    table: HashMap<Vec<u64>, Vec<u64>>,
}

impl FieldEmbedding {
    pub fn new(src: &Arc<FieldDesc>, dst: &Arc<FieldDesc>) -> Result<Arc<Self>> {
        if src.p != dst.p || dst.f % src.f != 0 {
            return Err(Error::FieldMismatch);
        }
        if src.e == 2 && (dst.e != 2 || src.f != dst.f || src.u != dst.u) {
            return Err(Error::Unsupported("embedding of a ramified field".into()));
        }
        let key = (src.f, src.e);
        if let Some(hit) = dst.cache.lock().unwrap().get(&key) {
            if hit.src.n == src.n {
                return Ok(hit.clone());
            }
        }
        let rho = if src.f == 1 {
            vec![0u64; dst.f]
        } else if src.f == dst.f {
            let mut g = vec![0u64; dst.f];
            g[1] = 1;
            g
        } else {
            generator_root(src, dst)
        };
        let mut table = HashMap::new();
        let p = dst.p;
        for s in src.residues() {
            let img = eval_unram(dst, &s, &rho, p);
            table.insert(img, s);
        }
        let emb = Arc::new(FieldEmbedding { src: src.clone(), dst: dst.clone(), rho, table });
        dst.cache.lock().unwrap().insert(key, emb.clone());
        Ok(emb)
    }

    /// Image of an unramified coefficient vector mod p^r.
    fn image_vec(&self, a: &[u64], r: i64) -> Vec<u64> {
        let m = pw(self.dst.p, r);
        let f = self.src.f;
        let mut out = self.dst.from_unram(&eval_unram(&self.dst, &a[..f], &self.rho, m));
        if self.src.e == 2 {
            for (i, &c) in a[f..].iter().enumerate() {
                out[self.dst.f + i] = c % m;
            }
        }
        out
    }

    pub fn apply(&self, x: &PadicScalar) -> Result<PadicScalar> {
        if x.field() != &self.src {
            return Err(Error::FieldMismatch);
        }
        let scale = (self.dst.e / self.src.e) as i64;
        let Some(v) = x.ord_pi() else {
            return Ok(PadicScalar::zero_abs_pi(&self.dst, x.rel_prec_pi().saturating_mul(scale)));
        };
        let rel = (x.rel_prec_pi() * scale).min(self.dst.e as i64 * self.dst.n);
        let r = ceil_div(rel, self.dst.e as i64) + 1;
        let mut a = self.image_vec(x.unit_coeffs(), r);
        if scale == 2 && v != 0 {
            // p^v = π^{2v} · u^{-v}
            let m = pw(self.dst.p, r);
            let base = if v > 0 { self.dst.u_inv.clone() } else { self.dst.u.clone() };
            let w = self.dst.from_unram(&self.dst.upow(&base, v.unsigned_abs(), m));
            a = self.dst.rmul(&a, &w, m);
        }
        Ok(PadicScalar::from_raw(&self.dst, &a, r, v * scale, rel))
    }

    /// The residue of K mapping to the given residue of L, if any.
    pub fn residue_preimage(&self, res: &[u64]) -> Option<Vec<u64>> {
        self.table.get(res).cloned()
    }
}

fn eval_unram(dst: &FieldDesc, a: &[u64], rho: &[u64], m: u64) -> Vec<u64> {
    let mut acc = vec![0u64; dst.f];
    let mut pow = dst.uone(m);
    for &c in a {
        acc = dst.uadd(&acc, &dst.uscale(&pow, c, m), m);
        pow = dst.umul(&pow, rho, m);
    }
    acc
}

/// Root in 𝒪_L of the defining polynomial of K, Hensel-lifted.
fn generator_root(src: &FieldDesc, dst: &FieldDesc) -> Vec<u64> {
    let p = dst.p;
    let poly = &src.modulus;
    let root = dst
        .residues()
        .into_iter()
        .find(|s| dst.ueval(poly, s, p).iter().all(|&c| c == 0))
        .expect("finite fields of the right degree contain every root");
    let deriv: Vec<u64> = (1..poly.len()).map(|i| poly[i] * i as u64).collect();
    let m = pw(p, dst.rmax);
    let mut r = root;
    for _ in 0..8 {
        let val = dst.ueval(poly, &r, m);
        let d = dst.ueval(&deriv, &r, m);
        let dinv = dst.uinv(&d, dst.rmax);
        r = dst.usub(&r, &dst.umul(&val, &dinv, m), m);
    }
    r
}

impl PadicScalar {
    /// Image of this element in a larger field.
    pub fn embed_into(&self, dst: &Arc<FieldDesc>) -> Result<PadicScalar> {
        if self.field() == dst {
            return Ok(self.clone());
        }
        FieldEmbedding::new(self.field(), dst)?.apply(self)
    }
}
