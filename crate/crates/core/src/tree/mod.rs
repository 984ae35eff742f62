//! The Bruhat-Tits tree of PGL₂(K) for K = ℚ_{p^f}.
//!
//! A vertex V(n; b) is the class of the lattice spanned by the columns of
//! [[p^n, b], [0, 1]], with b taken modulo p^n 𝒪. Equivalently it is the
//! closed ball b + p^n 𝒪 of K, which is the picture used for children,
//! parents and distances.

mod reduce;
mod text;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{FieldDesc, Mat2, P1Point, PadicScalar};

pub use reduce::{reduction, reduction_by_search, ExtPoint};

/// Canonical representative of b modulo p^n.
pub(crate) fn reduce_mod(b: &PadicScalar, n: i64) -> Result<PadicScalar> {
    let e = b.field().e as i64;
    match b.ord_pi() {
        None => {
            if b.abs_prec_pi() < n * e {
                return Err(Error::PrecisionExhausted(format!("center known below p^{n}")));
            }
            Ok(PadicScalar::zero(b.field(), n))
        }
        Some(v) if v >= n * e => Ok(PadicScalar::zero(b.field(), n)),
        Some(_) => {
            if b.abs_prec_pi() < n * e {
                return Err(Error::PrecisionExhausted(format!("center known below p^{n}")));
            }
            Ok(b.truncate_abs(n))
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TreeVertex {
    pub n: i64,
    b: PadicScalar,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TreeEdge {
    pub src: TreeVertex,
    pub dst: TreeVertex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BallKind {
    Interior,
    CoInterior,
}

/// c + p^m 𝒪 (interior) or its complement in ℙ¹(K) (co-interior).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ball {
    pub kind: BallKind,
    pub center: PadicScalar,
    pub m: i64,
}

/// A point of the geometric tree: a vertex or the midpoint of an edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreePoint {
    Vertex(TreeVertex),
    /// Midpoint of an edge stored with src.n < dst.n.
    Midpoint(TreeEdge),
}

impl TreeVertex {
    pub fn new(n: i64, b: &PadicScalar) -> Result<Self> {
        if b.field().e != 1 {
            return Err(Error::Unsupported("tree over a ramified field".into()));
        }
        Ok(TreeVertex { n, b: reduce_mod(b, n)? })
    }

    /// The base vertex v* = V(0; 0), the class of 𝒪².
    pub fn base(field: &Arc<FieldDesc>) -> Self {
        TreeVertex { n: 0, b: PadicScalar::zero(field, 0) }
    }

    /// w* = V(-1; 0); e* runs from w* to v*.
    pub fn w_star(field: &Arc<FieldDesc>) -> Self {
        TreeVertex { n: -1, b: PadicScalar::zero(field, -1) }
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        self.b.field()
    }

    pub fn b(&self) -> &PadicScalar {
        &self.b
    }

    pub fn matrix(&self) -> Mat2 {
        let fd = self.field();
        Mat2 {
            a: PadicScalar::p_power(fd, self.n),
            b: self.b.clone(),
            c: PadicScalar::exact_zero(fd),
            d: PadicScalar::one(fd),
        }
    }

    pub fn parent(&self) -> TreeVertex {
        TreeVertex { n: self.n - 1, b: reduce_mod(&self.b, self.n - 1).expect("reducing a canonical center") }
    }

    /// Children V(n+1; b + p^n c) for residue lifts c, in residue order.
    pub fn children(&self) -> Vec<TreeVertex> {
        let fd = self.field().clone();
        fd.residues()
            .iter()
            .map(|c| self.child(c))
            .collect()
    }

    /// The child along the residue digit c.
    pub fn child(&self, c: &[u64]) -> TreeVertex {
        let fd = self.field();
        let lift = PadicScalar::from_unram_coeffs(fd, c, fd.n + 1).shift_pi(self.n);
        let b = self.b_lifted(self.n + 1).add(&lift).expect("same field");
        TreeVertex { n: self.n + 1, b: reduce_mod(&b, self.n + 1).expect("exact digits") }
    }

    /// b with absolute precision extended (by zero digits) to p^k.
    /// The canonical center b at full precision (digits past p^n are zero).
    pub fn center(&self) -> PadicScalar {
        lift_exact(&self.b, self.b.field().n)
    }

    pub(crate) fn b_lifted(&self, k: i64) -> PadicScalar {
        lift_exact(&self.b, k)
    }

    pub fn neighbors(&self) -> Vec<TreeVertex> {
        let mut out = self.children();
        out.push(self.parent());
        out
    }

    /// Oriented edges leaving this vertex (children first, then parent).
    pub fn out_edges(&self) -> Vec<TreeEdge> {
        self.neighbors()
            .into_iter()
            .map(|w| TreeEdge { src: self.clone(), dst: w })
            .collect()
    }

    /// The residue digit c with self = parent.child(c).
    pub fn last_digit(&self) -> Vec<u64> {
        let fd = self.field();
        let par = self.parent();
        let x = self.b_lifted(self.n).sub(&par.b_lifted(self.n)).expect("same field");
        let x = x.shift_pi(-(self.n - 1));
        match x.ord_pi() {
            Some(0) => x.residue().unwrap(),
            _ => vec![0; fd.f],
        }
    }

    /// True when the ball of self is inside the ball of o.
    pub fn ball_le(&self, o: &TreeVertex) -> bool {
        self.n >= o.n && center_ord(&self.b, &o.b, o.n) >= o.n
    }

    /// Distance via the smallest ball containing both.
    pub fn distance(&self, o: &TreeVertex) -> i64 {
        let m = self.meet_level(o);
        self.n + o.n - 2 * m
    }

    fn meet_level(&self, o: &TreeVertex) -> i64 {
        let cap = self.n.min(o.n);
        center_ord(&self.b, &o.b, cap).min(cap)
    }

    /// Join of the two balls, i.e. the top of the geodesic.
    pub fn meet(&self, o: &TreeVertex) -> TreeVertex {
        let m = self.meet_level(o);
        let mut v = self.clone();
        while v.n > m {
            v = v.parent();
        }
        v
    }

    /// Geodesic from self to o as a list of oriented edges.
    pub fn path(&self, o: &TreeVertex) -> Vec<TreeEdge> {
        let top = self.meet(o);
        let mut up = Vec::new();
        let mut v = self.clone();
        while v.n > top.n {
            let w = v.parent();
            up.push(TreeEdge { src: v, dst: w.clone() });
            v = w;
        }
        let mut down = Vec::new();
        let mut w = o.clone();
        while w.n > top.n {
            let par = w.parent();
            down.push(TreeEdge { src: par.clone(), dst: w });
            w = par;
        }
        down.reverse();
        up.extend(down);
        up
    }

    /// Möbius action of γ on the lattice class.
    pub fn act(&self, g: &Mat2) -> Result<TreeVertex> {
        let m = g.mul(&self.matrix_lifted())?;
        normal_form(&m)
    }

    fn matrix_lifted(&self) -> Mat2 {
        let mut m = self.matrix();
        m.b = self.b_lifted(self.field().n + self.n.max(0) + 1);
        m
    }

    /// Vertices within distance `radius` of self, breadth first.
    pub fn ball_of_radius(&self, radius: usize) -> Vec<TreeVertex> {
        let mut seen = vec![self.clone()];
        let mut frontier = vec![(self.clone(), None::<TreeVertex>)];
        for _ in 0..radius {
            let mut next = Vec::new();
            for (v, from) in frontier {
                for w in v.neighbors() {
                    if Some(&w) != from.as_ref() {
                        seen.push(w.clone());
                        next.push((w, Some(v.clone())));
                    }
                }
            }
            frontier = next;
        }
        seen
    }
}

/// ord(b1 - b2) capped at `cap` (both known modulo p^cap at least).
fn center_ord(b1: &PadicScalar, b2: &PadicScalar, cap: i64) -> i64 {
    let x = lift_exact(b1, cap);
    let y = lift_exact(b2, cap);
    let d = x.sub(&y).expect("same field");
    match d.ord_pi() {
        Some(v) => v.min(cap),
        None => cap,
    }
}

/// Treat a canonical residue as an exact element and give it absolute
/// precision p^k (digits beyond are zero).
pub(crate) fn lift_exact(b: &PadicScalar, k: i64) -> PadicScalar {
    match b.ord_pi() {
        None => PadicScalar::zero(b.field(), k.max(b.abs_prec())),
        Some(v) => {
            let fd = b.field();
            let rel = (k - v).max(b.rel_prec_pi()).min(fd.n * fd.e as i64).max(1);
            PadicScalar::from_parts(fd, v, b.unit_coeffs(), rel).expect("canonical unit")
        }
    }
}

/// Iwasawa normal form of the lattice spanned by the columns of m.
pub fn normal_form(m: &Mat2) -> Result<TreeVertex> {
    let det = m.det();
    let dv = det.ord_pi().ok_or(Error::SingularMatrix)?;
    let (mut a, mut b, mut c, mut d) = (m.a.clone(), m.b.clone(), m.c.clone(), m.d.clone());
    let oc = c.ord_pi();
    let od = d.ord_pi();
    let swap = match (oc, od) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    };
    if swap {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut c, &mut d);
    }
    if d.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let od = d.ord_pi().unwrap();
    let n = dv - 2 * od;
    let bb = b.div(&d)?;
    let fd = m.field();
    if bb.abs_prec_pi() < n * fd.e as i64 && !bb.is_exact_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "vertex translate needs p^{n}, have p^{}",
            bb.abs_prec()
        )));
    }
    Ok(TreeVertex { n, b: reduce_mod(&bb, n)? })
}

impl TreeEdge {
    pub fn new(src: TreeVertex, dst: TreeVertex) -> Result<Self> {
        if src.distance(&dst) != 1 {
            return Err(Error::Invalid("edge endpoints are not adjacent".into()));
        }
        Ok(TreeEdge { src, dst })
    }

    /// e* = (w*, v*), with U_{e*} = 𝒪.
    pub fn base(field: &Arc<FieldDesc>) -> Self {
        TreeEdge { src: TreeVertex::w_star(field), dst: TreeVertex::base(field) }
    }

    pub fn reverse(&self) -> TreeEdge {
        TreeEdge { src: self.dst.clone(), dst: self.src.clone() }
    }

    /// True when dst is a child of src (the ball U_e is interior).
    pub fn is_descending(&self) -> bool {
        self.dst.n == self.src.n + 1
    }

    /// The same undirected edge with src above dst.
    pub fn descending(&self) -> TreeEdge {
        if self.is_descending() {
            self.clone()
        } else {
            self.reverse()
        }
    }

    pub fn act(&self, g: &Mat2) -> Result<TreeEdge> {
        Ok(TreeEdge { src: self.src.act(g)?, dst: self.dst.act(g)? })
    }

    /// Edges leaving dst other than the reverse of self.
    pub fn continuations(&self) -> Vec<TreeEdge> {
        self.dst
            .out_edges()
            .into_iter()
            .filter(|e| e.dst != self.src)
            .collect()
    }

    pub fn ball(&self) -> Ball {
        ball_of_edge(self)
    }
}

pub fn ball_of_edge(e: &TreeEdge) -> Ball {
    if e.is_descending() {
        Ball { kind: BallKind::Interior, center: e.dst.b.clone(), m: e.dst.n }
    } else {
        Ball { kind: BallKind::CoInterior, center: e.src.b.clone(), m: e.src.n }
    }
}

pub fn edge_of_ball(bl: &Ball) -> Result<TreeEdge> {
    let v = TreeVertex::new(bl.m, &bl.center).map_err(|e| Error::MalformedBall(e.to_string()))?;
    let e = TreeEdge { src: v.parent(), dst: v };
    Ok(match bl.kind {
        BallKind::Interior => e,
        BallKind::CoInterior => e.reverse(),
    })
}

impl Ball {
    pub fn new(kind: BallKind, center: &PadicScalar, m: i64) -> Result<Self> {
        Ok(Ball { kind, center: reduce_mod(center, m).map_err(|e| Error::MalformedBall(e.to_string()))?, m })
    }

    pub fn complement(&self) -> Ball {
        let kind = match self.kind {
            BallKind::Interior => BallKind::CoInterior,
            BallKind::CoInterior => BallKind::Interior,
        };
        Ball { kind, ..self.clone() }
    }

    pub fn contains_infinity(&self) -> bool {
        self.kind == BallKind::CoInterior
    }

    /// Membership of a point of ℙ¹ over K or over an extension of K.
    pub fn contains(&self, x: &P1Point) -> Result<bool> {
        let inside = match x {
            P1Point::Infinity => false,
            P1Point::Finite(t) => {
                let c = lift_exact(&self.center, self.m).embed_into(t.field())?;
                let d = t.sub(&c)?;
                let e = t.field().e as i64;
                match d.ord_pi() {
                    Some(v) => v >= self.m * e,
                    None => {
                        if d.abs_prec_pi() < self.m * e {
                            return Err(Error::PrecisionExhausted("membership undecided".into()));
                        }
                        true
                    }
                }
            }
        };
        Ok(match self.kind {
            BallKind::Interior => inside,
            BallKind::CoInterior => !inside,
        })
    }

    pub fn act(&self, g: &Mat2) -> Result<Ball> {
        Ok(ball_of_edge(&edge_of_ball(self)?.act(g)?))
    }

    /// The p^f sub-balls (interior) or, for a co-interior ball, the
    /// p^f - 1 sibling balls plus the co-interior parent.
    pub fn children(&self) -> Result<Vec<Ball>> {
        Ok(edge_of_ball(self)?.continuations().iter().map(ball_of_edge).collect())
    }

    /// A canonical sample point: the center, or ∞ for co-interior balls.
    pub fn sample(&self) -> P1Point {
        match self.kind {
            BallKind::Interior => P1Point::Finite(lift_exact(&self.center, self.center.field().n)),
            BallKind::CoInterior => P1Point::Infinity,
        }
    }
}

impl TreePoint {
    pub fn vertex(&self) -> Option<&TreeVertex> {
        match self {
            TreePoint::Vertex(v) => Some(v),
            TreePoint::Midpoint(_) => None,
        }
    }

    /// Fraction along the stored edge: 0 for a vertex, 1/2 for a midpoint.
    pub fn fraction(&self) -> num_rational::Ratio<i64> {
        match self {
            TreePoint::Vertex(_) => num_rational::Ratio::from_integer(0),
            TreePoint::Midpoint(_) => num_rational::Ratio::new(1, 2),
        }
    }

    /// Endpoints with their weights (1 for a vertex, ½ each for a midpoint).
    pub fn weighted_vertices(&self) -> Vec<(TreeVertex, num_rational::Ratio<i64>)> {
        match self {
            TreePoint::Vertex(v) => vec![(v.clone(), num_rational::Ratio::from_integer(1))],
            TreePoint::Midpoint(e) => vec![
                (e.src.clone(), num_rational::Ratio::new(1, 2)),
                (e.dst.clone(), num_rational::Ratio::new(1, 2)),
            ],
        }
    }

    /// Distance to a vertex (half-integral for midpoints).
    pub fn distance_to(&self, v: &TreeVertex) -> num_rational::Ratio<i64> {
        match self {
            TreePoint::Vertex(w) => num_rational::Ratio::from_integer(w.distance(v)),
            TreePoint::Midpoint(e) => {
                let a = e.src.distance(v).min(e.dst.distance(v));
                num_rational::Ratio::from_integer(a) + num_rational::Ratio::new(1, 2)
            }
        }
    }

    pub fn act(&self, g: &Mat2) -> Result<TreePoint> {
        Ok(match self {
            TreePoint::Vertex(v) => TreePoint::Vertex(v.act(g)?),
            TreePoint::Midpoint(e) => TreePoint::Midpoint(e.act(g)?.descending()),
        })
    }
}

/// Formal ℤ-combination of oriented edges.
pub type EdgeChain = HashMap<TreeEdge, i64>;
/// Formal ℤ-combination of vertices.
pub type VertexChain = HashMap<TreeVertex, i64>;

/// ∂(e) = t_e - s_e, extended linearly; zero coefficients are dropped.
pub fn boundary(chain: &EdgeChain) -> VertexChain {
    let mut out: VertexChain = HashMap::new();
    for (e, &k) in chain {
        *out.entry(e.dst.clone()).or_default() += k;
        *out.entry(e.src.clone()).or_default() -= k;
    }
    out.retain(|_, k| *k != 0);
    out
}

/// DOT rendering of a finite set of edges (undirected edges are drawn once).
pub fn to_dot(name: &str, edges: &[TreeEdge]) -> String {
    let mut s = format!("graph {name} {{\n");
    let mut seen = std::collections::HashSet::new();
    for e in edges {
        let d = e.descending();
        if seen.insert(d.clone()) {
            s.push_str(&format!("  \"{}\" -- \"{}\";\n", d.src, d.dst));
        }
    }
    s.push_str("}\n");
    s
}
