//! Coefficient-level arithmetic on 𝒪_L / p^r.
//!
//! An element of the unramified ring is a vector of `f` residues mod p^r in the
//! basis 1, g, .., g^{f-1}; for a ramified quadratic field the vector has length
//! 2f and stores x0 + x1·π with π² = u·p.

use super::FieldDesc;

pub(crate) fn pw(p: u64, k: i64) -> u64 {
    debug_assert!(k >= 0);
    p.pow(k as u32)
}

#[inline]
pub(crate) fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub(crate) fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % m as u128) as u64
}

#[inline]
pub(crate) fn submod(a: u64, b: u64, m: u64) -> u64 {
    let a = a % m;
    let b = b % m;
    if a >= b {
        a - b
    } else {
        m - (b - a)
    }
}

pub(crate) fn powmod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    let mut base = b % m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if gcd(a, m) = 1.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m as i128) as u64)
}

/// p-adic valuation of a nonzero integer.
pub(crate) fn vp(mut x: u64, p: u64) -> i64 {
    debug_assert!(x != 0);
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// floor(log_p(k)) for k >= 1.
pub(crate) fn ilog(k: u64, p: u64) -> i64 {
    let mut v = 0;
    let mut t = k;
    while t >= p {
        t /= p;
        v += 1;
    }
    v
}

/// Valuation of a coefficient vector known mod p^r (returns r when it vanishes).
pub(crate) fn vec_vp(a: &[u64], p: u64, r: i64) -> i64 {
    let m = pw(p, r);
    a.iter()
        .map(|&c| if c % m == 0 { r } else { vp(c % m, p).min(r) })
        .min()
        .unwrap_or(r)
}

impl FieldDesc {
    pub(crate) fn dim(&self) -> usize {
        self.f * self.e
    }

    /// Product in (ℤ/m)[g]/P.
    pub(crate) fn umul(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        let f = self.f;
        if f == 1 {
            return vec![mulmod(a[0], b[0], m)];
        }
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = addmod(prod[i + j], mulmod(ai, bj, m), m);
            }
        }
        for i in (f..2 * f - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..f {
                let t = mulmod(c, self.modulus[j] % m, m);
                prod[i - f + j] = submod(prod[i - f + j], t, m);
            }
        }
        prod.truncate(f);
        prod
    }

    pub(crate) fn uadd(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| addmod(x, y, m)).collect()
    }

    pub(crate) fn usub(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| submod(x, y, m)).collect()
    }

    pub(crate) fn uscale(&self, a: &[u64], k: u64, m: u64) -> Vec<u64> {
        a.iter().map(|&x| mulmod(x, k % m, m)).collect()
    }

    pub(crate) fn upow(&self, a: &[u64], mut n: u64, m: u64) -> Vec<u64> {
        let mut acc = self.uone(m);
        let mut base = a.to_vec();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.umul(&acc, &base, m);
            }
            base = self.umul(&base, &base, m);
            n >>= 1;
        }
        acc
    }

    pub(crate) fn uone(&self, m: u64) -> Vec<u64> {
        let mut v = vec![0u64; self.f];
        v[0] = 1 % m;
        v
    }

    /// Inverse of an unramified unit mod p^r.
    pub(crate) fn uinv(&self, a: &[u64], r: i64) -> Vec<u64> {
        let p = self.p;
        let q = pw(p, self.f as i64);
        let mut y = self.upow(a, q - 2, p);
        let mut k = 1;
        while k < r {
            k = (2 * k).min(r);
            let m = pw(p, k);
            let xy = self.umul(a, &y, m);
            let two_minus = self.usub(&self.uscale(&self.uone(m), 2, m), &xy, m);
            y = self.umul(&y, &two_minus, m);
        }
        let m = pw(p, r);
        y.iter().map(|c| c % m).collect()
    }

    fn split<'a>(&self, a: &'a [u64]) -> (&'a [u64], &'a [u64]) {
        a.split_at(self.f)
    }

    fn join(x0: Vec<u64>, mut x1: Vec<u64>) -> Vec<u64> {
        let mut v = x0;
        v.append(&mut x1);
        v
    }

    pub(crate) fn rmul(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        if self.e == 1 {
            return self.umul(a, b, m);
        }
        let (a0, a1) = self.split(a);
        let (b0, b1) = self.split(b);
        let a1b1 = self.umul(a1, b1, m);
        let up = self.uscale(&self.u, self.p, m);
        let x0 = self.uadd(&self.umul(a0, b0, m), &self.umul(&up, &a1b1, m), m);
        let x1 = self.uadd(&self.umul(a0, b1, m), &self.umul(a1, b0, m), m);
        Self::join(x0, x1)
    }

    pub(crate) fn radd(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        self.uadd(a, b, m)
    }

    pub(crate) fn rsub(&self, a: &[u64], b: &[u64], m: u64) -> Vec<u64> {
        self.usub(a, b, m)
    }

    pub(crate) fn rone(&self, m: u64) -> Vec<u64> {
        let mut v = vec![0u64; self.dim()];
        v[0] = 1 % m;
        v
    }

    /// Multiply by π^k.
    pub(crate) fn mul_pi(&self, a: &[u64], k: i64, m: u64) -> Vec<u64> {
        if k == 0 {
            return a.iter().map(|c| c % m).collect();
        }
        if self.e == 1 {
            return self.uscale(a, powmod(self.p, k as u64, m), m);
        }
        let (a0, a1) = self.split(a);
        let mut x0 = a0.to_vec();
        let mut x1 = a1.to_vec();
        let up = self.uscale(&self.u, self.p, m);
        for _ in 0..k {
            let nx0 = self.umul(&up, &x1, m);
            x1 = x0;
            x0 = nx0;
        }
        Self::join(x0, x1)
    }

    /// π-adic valuation of a vector known mod p^r, capped at e·r.
    pub(crate) fn ord_pi_raw(&self, a: &[u64], r: i64) -> i64 {
        if self.e == 1 {
            return vec_vp(a, self.p, r);
        }
        let (a0, a1) = self.split(a);
        let v0 = 2 * vec_vp(a0, self.p, r);
        let v1 = 2 * vec_vp(a1, self.p, r) + 1;
        v0.min(v1).min(2 * r)
    }

    /// Divide by π^k a vector known mod p^r with π-valuation at least k.
    /// Returns the quotient and the exponent r' it is known modulo.
    pub(crate) fn div_pi_raw(&self, a: &[u64], k: i64, r: i64) -> (Vec<u64>, i64) {
        let p = self.p;
        if self.e == 1 {
            let pk = pw(p, k);
            let r2 = r - k;
            let m2 = pw(p, r2.max(0));
            return (a.iter().map(|c| (c % pw(p, r)) / pk % m2).collect(), r2);
        }
        let j = k / 2;
        let pj = pw(p, j);
        let mut r2 = r - j;
        let m2 = pw(p, r2.max(0));
        let uinv_j = self.upow(&self.u_inv, j as u64, m2);
        let (a0, a1) = self.split(a);
        let mr = pw(p, r);
        let d0: Vec<u64> = a0.iter().map(|c| (c % mr) / pj % m2).collect();
        let d1: Vec<u64> = a1.iter().map(|c| (c % mr) / pj % m2).collect();
        let mut x0 = self.umul(&d0, &uinv_j, m2);
        let mut x1 = self.umul(&d1, &uinv_j, m2);
        if k % 2 == 1 {
            r2 -= 1;
            let m3 = pw(p, r2.max(0));
            let x0p: Vec<u64> = x0.iter().map(|c| c / p % m3).collect();
            let nx1 = self.umul(&x0p, &self.u_inv, m3);
            x0 = x1.iter().map(|c| c % m3).collect();
            x1 = nx1;
        }
        (Self::join(x0, x1), r2)
    }

    /// Inverse of a π-adic unit mod p^r.
    pub(crate) fn rinv(&self, a: &[u64], r: i64) -> Vec<u64> {
        if self.e == 1 {
            return self.uinv(a, r);
        }
        let m = pw(self.p, r);
        let (a0, a1) = self.split(a);
        let up = self.uscale(&self.u, self.p, m);
        let nrm = self.usub(
            &self.umul(a0, a0, m),
            &self.umul(&up, &self.umul(a1, a1, m), m),
            m,
        );
        let ninv = self.uinv(&nrm, r);
        let neg1: Vec<u64> = a1.iter().map(|&c| submod(0, c, m)).collect();
        Self::join(self.umul(a0, &ninv, m), self.umul(&neg1, &ninv, m))
    }

    /// Residue of a π-adic unit in 𝔽_{p^f}.
    pub(crate) fn residue(&self, a: &[u64]) -> Vec<u64> {
        a[..self.f].iter().map(|c| c % self.p).collect()
    }

    /// Teichmüller representative of a residue, as an unramified vector mod p^r.
    pub(crate) fn teich_raw(&self, res: &[u64], r: i64) -> Vec<u64> {
        let m = pw(self.p, r);
        let q = pw(self.p, self.f as i64);
        let mut y: Vec<u64> = res.iter().map(|c| c % m).collect();
        for _ in 0..r {
            y = self.upow(&y, q, m);
        }
        y
    }

    /// Embed an unramified vector into the full coefficient layout.
    pub(crate) fn from_unram(&self, a: &[u64]) -> Vec<u64> {
        let mut v = a.to_vec();
        v.resize(self.dim(), 0);
        v
    }

    /// σ applied to an unramified vector mod p^r.
    pub(crate) fn ufrob(&self, a: &[u64], r: i64) -> Vec<u64> {
        let m = pw(self.p, r);
        if self.f == 1 {
            return vec![a[0] % m];
        }
        let sg: Vec<u64> = self.frob_g.iter().map(|c| c % m).collect();
        let mut acc = vec![0u64; self.f];
        let mut pow = self.uone(m);
        for &c in a {
            acc = self.uadd(&acc, &self.uscale(&pow, c, m), m);
            pow = self.umul(&pow, &sg, m);
        }
        acc
    }

    /// Evaluate a polynomial with integer coefficients (low to high) at an
    /// unramified vector.
    pub(crate) fn ueval(&self, poly: &[u64], x: &[u64], m: u64) -> Vec<u64> {
        let mut acc = vec![0u64; self.f];
        for &c in poly.iter().rev() {
            acc = self.umul(&acc, x, m);
            acc[0] = addmod(acc[0], c % m, m);
        }
        acc
    }
}
