//! `V(n;b)` and `E(V1->V2)` encodings.

use std::fmt;
use std::sync::Arc;

use super::{lift_exact, TreeEdge, TreeVertex};
use crate::error::{Error, Result};
use crate::padic::{FieldDesc, PadicScalar};

fn fmt_center(b: &PadicScalar, n: i64) -> String {
    let fd = b.field();
    let Some(v) = b.ord_pi() else { return "0".into() };
    let k = (-v).max(0);
    let x = lift_exact(b, n).shift_pi(k);
    let coeffs = x.coeffs_mod(n + k).expect("integral after shift");
    let body = if fd.f == 1 {
        coeffs[0].to_string()
    } else {
        let parts: Vec<String> = coeffs.iter().map(u64::to_string).collect();
        format!("[{}]", parts.join(","))
    };
    match k {
        0 => body,
        1 => format!("{body}/p"),
        _ => format!("{body}/p^{k}"),
    }
}

impl fmt::Display for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V({};{})", self.n, fmt_center(self.b(), self.n))
    }
}

impl fmt::Debug for TreeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for TreeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({}->{})", self.src, self.dst)
    }
}

impl fmt::Debug for TreeEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_center(field: &Arc<FieldDesc>, s: &str) -> Result<PadicScalar> {
    let bad = || Error::Parse(format!("bad vertex center `{s}`"));
    let (body, k) = match s.split_once('/') {
        Some((b, d)) => {
            let d = d.trim();
            let k = if d == "p" {
                1
            } else {
                d.strip_prefix("p^").ok_or_else(bad)?.parse::<i64>().map_err(|_| bad())?
            };
            (b.trim(), k)
        }
        None => (s.trim(), 0),
    };
    let coeffs: Vec<i64> = if let Some(inner) = body.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        inner
            .split(',')
            .map(|c| c.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    } else {
        vec![body.parse::<i64>().map_err(|_| bad())?]
    };
    if coeffs.len() > field.f {
        return Err(bad());
    }
    Ok(PadicScalar::from_coeffs(field, &coeffs).shift_pi(-k))
}

impl TreeVertex {
    pub fn parse(field: &Arc<FieldDesc>, s: &str) -> Result<Self> {
        let s = s.trim();
        let inner = s
            .strip_prefix("V(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected V(n;b), got `{s}`")))?;
        let (n, b) = inner
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("expected `;` in `{s}`")))?;
        let n: i64 = n.trim().parse().map_err(|_| Error::Parse(format!("bad level in `{s}`")))?;
        TreeVertex::new(n, &parse_center(field, b)?)
    }
}

impl TreeEdge {
    pub fn parse(field: &Arc<FieldDesc>, s: &str) -> Result<Self> {
        let s = s.trim();
        let inner = s
            .strip_prefix("E(")
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected E(V->W), got `{s}`")))?;
        let (a, b) = inner
            .split_once("->")
            .ok_or_else(|| Error::Parse(format!("expected `->` in `{s}`")))?;
        TreeEdge::new(TreeVertex::parse(field, a)?, TreeVertex::parse(field, b)?)
    }
}
