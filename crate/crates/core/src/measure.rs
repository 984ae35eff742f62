//! ℤ^r-valued harmonic measures on ℙ¹(K), stored as edge cocycles.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{FieldDesc, Mat2, P1Point, PadicScalar};
use crate::tree::{
    ball_of_edge, edge_of_ball, reduction, Ball, BallKind, ExtPoint, TreeEdge, TreePoint, TreeVertex,
};

/// A source of edge values μ(U_e), implemented by quotient-backed measures
/// and by measures derived from automorphic data.
pub trait EdgeCocycle: Send + Sync {
    fn rank(&self) -> usize;
    fn value(&self, e: &TreeEdge) -> Result<Vec<i64>>;
    /// True when μ vanishes on every sub-ball of U_e (so covers may prune).
    fn vanishes_below(&self, e: &TreeEdge) -> Result<bool>;
}

#[derive(Clone)]
enum Backing {
    Explicit { depth: i64, values: Arc<HashMap<TreeEdge, Vec<i64>>>, live: Arc<HashSet<TreeEdge>> },
    Tate,
    Cocycle(Arc<dyn EdgeCocycle>),
    Pushed { g_inv: Mat2, inner: Box<HarmonicMeasure> },
    Mapped { matrix: Vec<Vec<i64>>, inner: Box<HarmonicMeasure> },
}

/// A finitely additive ℤ^r-valued measure of total mass zero.
#[derive(Clone)]
pub struct HarmonicMeasure {
    field: Arc<FieldDesc>,
    rank: usize,
    backing: Backing,
}

impl fmt::Debug for HarmonicMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.backing {
            Backing::Explicit { depth, .. } => format!("explicit(depth {depth})"),
            Backing::Tate => "tate".into(),
            Backing::Cocycle(_) => "cocycle".into(),
            Backing::Pushed { .. } => "pushed".into(),
            Backing::Mapped { .. } => "mapped".into(),
        };
        write!(f, "HarmonicMeasure(rank {}, {kind})", self.rank)
    }
}

/// Outcome of a harmonicity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub vertices_checked: usize,
    pub violation: Option<String>,
}

fn ball_contains_zero(b: &Ball) -> bool {
    let inside = b.center.is_zero();
    match b.kind {
        BallKind::Interior => inside,
        BallKind::CoInterior => !inside,
    }
}

fn add_into(acc: &mut [i64], v: &[i64], k: i64) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += k * x;
    }
}

impl HarmonicMeasure {
    /// μ_T(U) = [0 ∈ U] − [∞ ∈ U].
    pub fn tate(field: &Arc<FieldDesc>) -> Self {
        HarmonicMeasure { field: field.clone(), rank: 1, backing: Backing::Tate }
    }

    pub fn from_cocycle(field: &Arc<FieldDesc>, c: Arc<dyn EdgeCocycle>) -> Self {
        HarmonicMeasure { field: field.clone(), rank: c.rank(), backing: Backing::Cocycle(c) }
    }

    /// Values on edges with both endpoints within `depth` of v*. Missing
    /// edges are taken from their reverse (negated) or as zero.
    pub fn explicit(field: &Arc<FieldDesc>, rank: usize, depth: i64, entries: HashMap<TreeEdge, Vec<i64>>) -> Result<Self> {
        let base = TreeVertex::base(field);
        let mut values = HashMap::new();
        for (e, v) in entries {
            if v.len() != rank {
                return Err(Error::RankMismatch { expected: rank, got: v.len() });
            }
            if base.distance(&e.src) > depth || base.distance(&e.dst) > depth {
                return Err(Error::DepthExceeded(format!("edge {e} beyond depth {depth}")));
            }
            let neg: Vec<i64> = v.iter().map(|x| -x).collect();
            if let Some(old) = values.get(&e.reverse()) {
                if *old != neg {
                    return Err(Error::Invalid(format!("edge {e} and its reverse disagree")));
                }
            }
            values.insert(e.reverse(), neg);
            values.insert(e, v);
        }
        // live: descending edges with a nonzero descending edge at or below
        let mut live = HashSet::new();
        for (e, v) in &values {
            if e.is_descending() && v.iter().any(|&x| x != 0) {
                let mut cur = e.clone();
                while base.distance(&cur.src) <= depth && live.insert(cur.clone()) {
                    let w = cur.src.clone();
                    cur = TreeEdge { src: w.parent(), dst: w };
                }
            }
        }
        Ok(HarmonicMeasure {
            field: field.clone(),
            rank,
            backing: Backing::Explicit { depth, values: Arc::new(values), live: Arc::new(live) },
        })
    }

    /// Copy the values of any measure on all edges within `depth` of v*.
    pub fn unfold(&self, depth: i64) -> Result<Self> {
        let mut entries = HashMap::new();
        let base = TreeVertex::base(&self.field);
        for e in self.support_edges(depth)? {
            if base.distance(&e.src) <= depth && base.distance(&e.dst) <= depth {
                let v = self.edge_value(&e)?;
                if v.iter().any(|&x| x != 0) {
                    entries.insert(e, v);
                }
            }
        }
        Self::explicit(&self.field, self.rank, depth, entries)
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// μ(U_e).
    pub fn edge_value(&self, e: &TreeEdge) -> Result<Vec<i64>> {
        match &self.backing {
            Backing::Tate => {
                let b = ball_of_edge(e);
                let z = ball_contains_zero(&b) as i64;
                let inf = b.contains_infinity() as i64;
                Ok(vec![z - inf])
            }
            Backing::Explicit { depth, values, .. } => match values.get(e) {
                Some(v) => Ok(v.clone()),
                None => {
                    let base = TreeVertex::base(&self.field);
                    if base.distance(&e.src) > *depth || base.distance(&e.dst) > *depth {
                        return Err(Error::DepthExceeded(format!("edge {e} beyond resolved depth {depth}")));
                    }
                    Ok(vec![0; self.rank])
                }
            },
            Backing::Cocycle(c) => c.value(e),
            Backing::Pushed { g_inv, inner } => inner.edge_value(&e.act(g_inv)?),
            Backing::Mapped { matrix, inner } => {
                let v = inner.edge_value(e)?;
                Ok(matrix.iter().map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum()).collect())
            }
        }
    }

    pub fn measure_of_ball(&self, b: &Ball) -> Result<Vec<i64>> {
        self.edge_value(&edge_of_ball(b)?)
    }

    /// True when μ vanishes on all sub-balls of U_e.
    pub fn vanishes_below(&self, e: &TreeEdge) -> Result<bool> {
        match &self.backing {
            Backing::Tate => {
                let b = ball_of_edge(e);
                Ok(!ball_contains_zero(&b) && !b.contains_infinity())
            }
            Backing::Explicit { depth, live, values } => {
                let base = TreeVertex::base(&self.field);
                if base.distance(&e.src) > *depth || base.distance(&e.dst) > *depth {
                    return Err(Error::DepthExceeded(format!("edge {e} beyond resolved depth {depth}")));
                }
                if e.is_descending() {
                    return Ok(!live.contains(e));
                }
                Ok(values.values().all(|v| v.iter().all(|&x| x == 0)))
            }
            Backing::Cocycle(c) => c.vanishes_below(e),
            Backing::Pushed { g_inv, inner } => inner.vanishes_below(&e.act(g_inv)?),
            Backing::Mapped { inner, .. } => inner.vanishes_below(e),
        }
    }

    /// (γ·μ)(U) = μ(γ⁻¹U).
    pub fn gamma_push(&self, g: &Mat2) -> Result<Self> {
        let g_inv = g.inv()?;
        Ok(HarmonicMeasure {
            field: self.field.clone(),
            rank: self.rank,
            backing: Backing::Pushed { g_inv, inner: Box::new(self.clone()) },
        })
    }

    /// Post-compose with an integer matrix ℤ^r → ℤ^s.
    pub fn map_values(&self, matrix: Vec<Vec<i64>>) -> Result<Self> {
        if matrix.iter().any(|row| row.len() != self.rank) {
            return Err(Error::RankMismatch { expected: self.rank, got: matrix.first().map_or(0, Vec::len) });
        }
        Ok(HarmonicMeasure {
            field: self.field.clone(),
            rank: matrix.len(),
            backing: Backing::Mapped { matrix, inner: Box::new(self.clone()) },
        })
    }

    /// Edges reachable from v* within `depth` without entering dead balls.
    pub fn support_edges(&self, depth: i64) -> Result<Vec<TreeEdge>> {
        let base = TreeVertex::base(&self.field);
        let mut out = Vec::new();
        let mut stack: Vec<(TreeEdge, i64)> = base.out_edges().into_iter().map(|e| (e, 1)).collect();
        while let Some((e, d)) = stack.pop() {
            if self.vanishes_below(&e)? {
                continue;
            }
            out.push(e.clone());
            if d < depth {
                for c in e.continuations() {
                    stack.push((c, d + 1));
                }
            }
        }
        Ok(out)
    }

    /// Antisymmetry and vertex-sum-zero on all vertices within `depth` of v*
    /// reached through non-vanishing edges.
    pub fn validate(&self, depth: i64) -> Result<ValidationReport> {
        let base = TreeVertex::base(&self.field);
        let mut seen = HashSet::new();
        let mut queue = vec![(base, 0i64)];
        let mut checked = 0;
        while let Some((v, d)) = queue.pop() {
            if !seen.insert(v.clone()) {
                continue;
            }
            checked += 1;
            let mut sum = vec![0i64; self.rank];
            for e in v.out_edges() {
                let val = self.edge_value(&e)?;
                let rev = self.edge_value(&e.reverse())?;
                if val.iter().zip(&rev).any(|(a, b)| a + b != 0) {
                    return Ok(ValidationReport {
                        ok: false,
                        vertices_checked: checked,
                        violation: Some(format!("antisymmetry fails on {e}: {val:?} vs {rev:?}")),
                    });
                }
                add_into(&mut sum, &val, 1);
                if d + 1 < depth && !self.vanishes_below(&e)? {
                    queue.push((e.dst.clone(), d + 1));
                }
            }
            if sum.iter().any(|&x| x != 0) {
                return Ok(ValidationReport {
                    ok: false,
                    vertices_checked: checked,
                    violation: Some(format!("star sum at {v} is {sum:?}")),
                });
            }
        }
        Ok(ValidationReport { ok: true, vertices_checked: checked, violation: None })
    }

    /// Leaves of the depth-D cover of ℙ¹(K) by balls at distance D from v*,
    /// restricted to balls where μ does not vanish identically.
    pub fn cover(&self, depth: i64) -> Result<Vec<(Ball, Vec<i64>)>> {
        let base = TreeVertex::base(&self.field);
        let mut out = Vec::new();
        let mut stack: Vec<(TreeEdge, i64)> = base.out_edges().into_iter().map(|e| (e, 1)).collect();
        while let Some((e, d)) = stack.pop() {
            if self.vanishes_below(&e)? {
                continue;
            }
            if d >= depth {
                let v = self.edge_value(&e)?;
                if v.iter().any(|&x| x != 0) {
                    out.push((ball_of_edge(&e), v));
                }
            } else {
                for c in e.continuations() {
                    stack.push((c, d + 1));
                }
            }
        }
        Ok(out)
    }

    /// Sum of a ball-indexed step function against μ, over the depth-D cover.
    pub fn integrate_locally_constant<F>(&self, depth: i64, f: F) -> Result<Vec<i64>>
    where
        F: Fn(&Ball) -> i64,
    {
        let mut acc = vec![0i64; self.rank];
        for (b, v) in self.cover(depth)? {
            add_into(&mut acc, &v, f(&b));
        }
        Ok(acc)
    }

    /// Riemann sum of logNorm((t − τ₁)/(t − τ₂)) against μ at depth D.
    pub fn integrate_log_kernel(&self, tau1: &ExtPoint, tau2: &ExtPoint, depth: i64) -> Result<LogKernelValue> {
        let c = precision_offset(&[tau1, tau2])?;
        let base_f = self.field.base();
        let mut acc = vec![PadicScalar::exact_zero(&base_f); self.rank];
        let l1 = tau1.field();
        let l2 = tau2.field();
        for (b, v) in self.cover(depth)? {
            let P1Point::Finite(t) = b.sample() else { continue };
            let n1 = t.embed_into(l1)?.sub(&tau1.tau)?.log_norm()?;
            let n2 = t.embed_into(l2)?.sub(&tau2.tau)?.log_norm()?;
            let lf = n1.sub(&n2)?;
            for (a, &k) in acc.iter_mut().zip(&v) {
                if k != 0 {
                    *a = a.add(&lf.scale_int(k)?)?;
                }
            }
        }
        Ok(LogKernelValue { components: acc, guaranteed_prec: depth - c })
    }

    /// Measure JSON {rank, depth, entries: [[edge, vector]]}.
    pub fn to_json(&self, depth: i64) -> Result<MeasureJson> {
        let m = self.unfold(depth)?;
        let Backing::Explicit { values, .. } = &m.backing else { unreachable!() };
        let mut entries: Vec<(String, Vec<i64>)> = values
            .iter()
            .filter(|(e, _)| e.is_descending())
            .map(|(e, v)| (e.to_string(), v.clone()))
            .collect();
        entries.sort();
        Ok(MeasureJson { field: (*self.field).clone(), rank: self.rank, depth, entries })
    }

    pub fn from_json(j: &MeasureJson) -> Result<Self> {
        let field = Arc::new(j.field.clone());
        let mut entries = HashMap::new();
        for (e, v) in &j.entries {
            entries.insert(TreeEdge::parse(&field, e)?, v.clone());
        }
        let m = Self::explicit(&field, j.rank, j.depth, entries)?;
        let rep = m.validate(j.depth)?;
        if !rep.ok {
            return Err(Error::Invalid(format!("measure is not harmonic: {}", rep.violation.unwrap_or_default())));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureJson {
    pub field: FieldDesc,
    pub rank: usize,
    pub depth: i64,
    pub entries: Vec<(String, Vec<i64>)>,
}

#[derive(Clone, Debug)]
pub struct LogKernelValue {
    pub components: Vec<PadicScalar>,
    pub guaranteed_prec: i64,
}

/// ceil(max over τ of d(v*, red τ)): digits lost by center sampling.
pub fn precision_offset(points: &[&ExtPoint]) -> Result<i64> {
    let mut c = 0;
    for t in points {
        let r = reduction(t)?;
        let d = r.distance_to(&TreeVertex::base(&t.base));
        c = c.max(d.ceil().to_integer());
    }
    Ok(c)
}

/// A point of a divisor: an upper-half-plane point or a tree point.
#[derive(Clone, Debug)]
pub enum DivisorPoint {
    Ext(ExtPoint),
    Tree(TreePoint),
}

impl DivisorPoint {
    pub fn tree_point(&self) -> Result<TreePoint> {
        match self {
            DivisorPoint::Ext(t) => reduction(t),
            DivisorPoint::Tree(p) => Ok(p.clone()),
        }
    }
}

/// μ viewed as a function on divisors through the vertex potential
/// φ(v) = Σ_{e ∈ path(v*, v)} μ(e), interpolated linearly along edges.
pub struct DivisorFunctional<'a> {
    pub measure: &'a HarmonicMeasure,
}

impl<'a> DivisorFunctional<'a> {
    pub fn new(measure: &'a HarmonicMeasure) -> Self {
        DivisorFunctional { measure }
    }

    pub fn vertex_value(&self, v: &TreeVertex) -> Result<Vec<i64>> {
        let base = TreeVertex::base(self.measure.field());
        let mut acc = vec![0i64; self.measure.rank()];
        for e in base.path(v) {
            add_into(&mut acc, &self.measure.edge_value(&e)?, 1);
        }
        Ok(acc)
    }

    pub fn point_value(&self, p: &TreePoint) -> Result<Vec<Ratio<i64>>> {
        let mut acc = vec![Ratio::from_integer(0); self.measure.rank()];
        for (v, w) in p.weighted_vertices() {
            for (a, x) in acc.iter_mut().zip(self.vertex_value(&v)?) {
                *a += w * x;
            }
        }
        Ok(acc)
    }

    /// Σ n_i φ(red P_i).
    pub fn eval(&self, divisor: &[(i64, DivisorPoint)]) -> Result<Vec<Ratio<i64>>> {
        let mut acc = vec![Ratio::from_integer(0); self.measure.rank()];
        for (n, pt) in divisor {
            for (a, x) in acc.iter_mut().zip(self.point_value(&pt.tree_point()?)?) {
                *a += x * *n;
            }
        }
        Ok(acc)
    }
}

/// Convenience: eval_on_divisor for [τ₁] − [τ₂].
pub fn eval_on_divisor(mu: &HarmonicMeasure, tau1: &ExtPoint, tau2: &ExtPoint) -> Result<Vec<Ratio<i64>>> {
    DivisorFunctional::new(mu).eval(&[(1, DivisorPoint::Ext(tau1.clone())), (-1, DivisorPoint::Ext(tau2.clone()))])
}
