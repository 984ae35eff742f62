//! Schottky groups, their quotient graphs, the universal measure, periods
//! and L-invariants.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integral::{mult_integral, MultIntegralValue};
use crate::measure::{EdgeCocycle, HarmonicMeasure};
use crate::padic::{FieldDesc, Mat2, PadicScalar};
use crate::tree::{ball_of_edge, edge_of_ball, Ball, BallKind, ExtPoint, TreeEdge, TreeVertex};

/// True when w lies on the dst side of e.
fn on_dst_side(w: &TreeVertex, e: &TreeEdge) -> bool {
    w.distance(&e.dst) < w.distance(&e.src)
}

/// U_a ⊆ U_b.
fn ball_inside(a: &TreeEdge, b: &TreeEdge) -> bool {
    a == b || (on_dst_side(&a.src, b) && on_dst_side(&a.dst, b) && a.dst.distance(&b.dst) > a.src.distance(&b.dst))
}

/// Both endpoints of e beyond the boundary edge b.
fn beyond(e: &TreeEdge, b: &TreeEdge) -> bool {
    on_dst_side(&e.src, b) && on_dst_side(&e.dst, b)
}

/// Translation length of g on the tree: d(v, g²v) − d(v, gv).
pub fn translation_length(g: &Mat2) -> Result<i64> {
    let v = TreeVertex::base(g.field());
    let gv = v.act(g)?;
    let ggv = gv.act(g)?;
    Ok(v.distance(&ggv) - v.distance(&gv))
}

/// A free discrete subgroup of PGL₂(K), certified by ping-pong: for each
/// generator γᵢ, edges eᵢ⁻ and eᵢ⁺ with γᵢ·ēᵢ⁻ = eᵢ⁺ and the 2g balls
/// U_{eᵢ^±} pairwise disjoint.
#[derive(Clone, Debug)]
pub struct SchottkyGroup {
    field: Arc<FieldDesc>,
    generators: Vec<Mat2>,
    inverses: Vec<Mat2>,
    boundary: Vec<(TreeEdge, TreeEdge)>,
    base_vertex: TreeVertex,
    det_p_element: Option<Mat2>,
}

impl SchottkyGroup {
    /// Certify a group from generators and ping-pong edges. With `pingpong`
    /// absent a single generator gets its boundary from its axis.
    pub fn new(
        generators: Vec<Mat2>,
        pingpong: Option<Vec<(TreeEdge, TreeEdge)>>,
        base_vertex: Option<TreeVertex>,
        det_p_element: Option<Mat2>,
    ) -> Result<Self> {
        let field = generators.first().ok_or_else(|| Error::Invalid("no generators".into()))?.field().clone();
        if generators.iter().any(|g| g.field() != &field) {
            return Err(Error::FieldMismatch);
        }
        for (i, g) in generators.iter().enumerate() {
            if translation_length(g)? == 0 {
                return Err(Error::PingPong(format!("generator {i} is not hyperbolic")));
            }
        }
        let boundary = match pingpong {
            Some(b) => b,
            None if generators.len() == 1 => vec![axis_boundary(&generators[0])?],
            None => return Err(Error::PingPong("ping-pong edges are required for genus above 1".into())),
        };
        if boundary.len() != generators.len() {
            return Err(Error::PingPong("one pair of ping-pong balls per generator".into()));
        }
        let inverses = generators.iter().map(Mat2::inv).collect::<Result<Vec<_>>>()?;
        for (i, (g, (em, ep))) in generators.iter().zip(&boundary).enumerate() {
            if em.reverse().act(g)? != *ep {
                return Err(Error::PingPong(format!("generator {i} does not map the complement of its repelling ball onto its attracting ball")));
            }
        }
        let all: Vec<&TreeEdge> = boundary.iter().flat_map(|(a, b)| [a, b]).collect();
        for i in 0..all.len() {
            for j in 0..i {
                if !ball_inside(all[i], &all[j].reverse()) {
                    return Err(Error::PingPong(format!("balls of {} and {} overlap", all[i], all[j])));
                }
            }
        }
        let base_vertex = base_vertex.unwrap_or_else(|| boundary[0].0.src.clone());
        Ok(SchottkyGroup { field, generators, inverses, boundary, base_vertex, det_p_element })
    }

    /// ⟨[[q, 0], [0, 1]]⟩.
    pub fn tate(q: &PadicScalar) -> Result<Self> {
        let fd = q.field();
        let g = Mat2::new(q.clone(), PadicScalar::exact_zero(fd), PadicScalar::exact_zero(fd), PadicScalar::one(fd))?;
        Self::new(vec![g], None, Some(TreeVertex::base(fd)), None)
    }

    /// The Tate group with the generator diag(p^k √u, 1/√u) for q = p^k u.
    /// Same quotient as `tate`; the unit part of det is 1, which is the
    /// representative the weight actions expect.
    pub fn tate_balanced(q: &PadicScalar) -> Result<Self> {
        let fd = q.field();
        let k = q.ord_pi().ok_or(Error::DivisionByZero)?;
        let s = q.unit_part()?.sqrt()?;
        let z = PadicScalar::exact_zero(fd);
        let g = Mat2::new(s.shift_pi(k), z.clone(), z, s.inv()?)?;
        Self::new(vec![g], None, Some(TreeVertex::base(fd)), None)
    }

    /// A random certified group of genus 1 or 2 conjugated by GL₂(𝒪).
    pub fn random<R: Rng + ?Sized>(field: &Arc<FieldDesc>, genus: usize, rng: &mut R) -> Result<Self> {
        if !(1..=2).contains(&genus) {
            return Err(Error::Unsupported("random groups of genus 1 or 2 only".into()));
        }
        let z = PadicScalar::exact_zero(field);
        let one = PadicScalar::one(field);
        let diag = |k: i64, rng: &mut R| -> Result<Mat2> {
            let u = PadicScalar::random_unit(field, rng);
            Mat2::new(u.mul(&PadicScalar::p_power(field, k))?, z.clone(), z.clone(), one.clone())
        };
        let conj = |h: &Mat2, g: &Mat2| -> Result<Mat2> { h.mul(g)?.mul(&h.inv()?) };
        let k1 = rng.gen_range(1..=3);
        let g1 = diag(k1, rng)?;
        let base = TreeVertex::base(field);
        let e1m = TreeEdge { src: base.clone(), dst: TreeVertex::w_star(field) };
        let e1p = e1m.reverse().act(&g1)?;
        let mut gens = vec![g1];
        let mut bd = vec![(e1m, e1p)];
        if genus == 2 {
            // h(z) = (a z + b)/(z + 1) sends 0 ↦ b and ∞ ↦ a
            let res = field.residues();
            let units: Vec<&Vec<u64>> = res.iter().filter(|r| r.iter().any(|&c| c != 0)).collect();
            if units.len() < 2 {
                return Err(Error::Unsupported("residue field too small".into()));
            }
            let i = rng.gen_range(0..units.len());
            let mut j = rng.gen_range(0..units.len() - 1);
            if j >= i {
                j += 1;
            }
            let a = PadicScalar::teich_of_residue(field, units[i]);
            let b = PadicScalar::teich_of_residue(field, units[j]);
            let h = Mat2::new(a, b, one.clone(), one.clone())?;
            let k2 = rng.gen_range(1..=2);
            let g2 = conj(&h, &diag(k2, rng)?)?;
            let e2m = TreeEdge { src: base.clone(), dst: TreeVertex::w_star(field) }.act(&h)?;
            let e2p = e2m.reverse().act(&g2)?;
            gens.push(g2);
            bd.push((e2m, e2p));
        }
        // a global conjugation by GL₂(𝒪) keeps v* and the certificate shape
        let h = loop {
            let e = |rng: &mut R| PadicScalar::random_integer(field, rng);
            let m = Mat2::new(e(rng), e(rng), e(rng), e(rng))?;
            if m.det().is_unit() {
                break m;
            }
        };
        let gens = gens.iter().map(|g| conj(&h, g)).collect::<Result<Vec<_>>>()?;
        let bd = bd
            .iter()
            .map(|(a, b)| Ok((a.act(&h)?, b.act(&h)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(gens, Some(bd), Some(base), None)
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        &self.field
    }

    pub fn genus(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Mat2] {
        &self.generators
    }

    pub fn inverses(&self) -> &[Mat2] {
        &self.inverses
    }

    /// Pairs (eᵢ⁻, eᵢ⁺).
    pub fn pingpong(&self) -> &[(TreeEdge, TreeEdge)] {
        &self.boundary
    }

    pub fn base_vertex(&self) -> &TreeVertex {
        &self.base_vertex
    }

    pub fn det_p_element(&self) -> Option<&Mat2> {
        self.det_p_element.as_ref()
    }

    /// The matrix of a word given as signed generator indices (1-based).
    pub fn word(&self, w: &[i64]) -> Result<Mat2> {
        let mut m = Mat2::identity(&self.field);
        for &i in w {
            let k = i.unsigned_abs() as usize;
            if k == 0 || k > self.genus() {
                return Err(Error::Invalid(format!("bad letter {i}")));
            }
            let g = if i > 0 { &self.generators[k - 1] } else { &self.inverses[k - 1] };
            m = m.mul(g)?;
        }
        Ok(m)
    }

    pub fn to_package(&self) -> GroupPackage {
        let ent = |x: &PadicScalar| Entry::Text(x.to_string());
        let mat = |g: &Mat2| [[ent(&g.a), ent(&g.b)], [ent(&g.c), ent(&g.d)]];
        let ball = |e: &TreeEdge| {
            let b = ball_of_edge(e);
            BallSpec { kind: b.kind, center: Entry::Text(b.center.to_string()), m: b.m }
        };
        GroupPackage {
            p: self.field.p,
            f: self.field.f,
            generators: self.generators.iter().map(mat).collect(),
            pingpong: self.boundary.iter().flat_map(|(a, b)| [ball(a), ball(b)]).collect(),
            det_p_element: self.det_p_element.as_ref().map(mat),
            base_vertex: self.base_vertex.to_string(),
        }
    }

    pub fn from_package(pkg: &GroupPackage, n: i64) -> Result<Self> {
        let field = FieldDesc::unramified(pkg.p, pkg.f, n)?;
        let mat = |m: &[[Entry; 2]; 2]| -> Result<Mat2> {
            Mat2::new(m[0][0].scalar(&field)?, m[0][1].scalar(&field)?, m[1][0].scalar(&field)?, m[1][1].scalar(&field)?)
        };
        let gens = pkg.generators.iter().map(|m| mat(m)).collect::<Result<Vec<_>>>()?;
        let pingpong = if pkg.pingpong.is_empty() {
            None
        } else {
            if pkg.pingpong.len() % 2 != 0 {
                return Err(Error::PingPong("ping-pong balls come in pairs".into()));
            }
            let edges = pkg
                .pingpong
                .iter()
                .map(|b| edge_of_ball(&Ball::new(b.kind, &b.center.scalar(&field)?, b.m)?))
                .collect::<Result<Vec<_>>>()?;
            Some(edges.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
        };
        let base = TreeVertex::parse(&field, &pkg.base_vertex)?;
        let dp = pkg.det_p_element.as_ref().map(|m| mat(m)).transpose()?;
        Self::new(gens, pingpong, Some(base), dp)
    }
}

/// Boundary edges for one hyperbolic element from a vertex on its axis.
fn axis_boundary(g: &Mat2) -> Result<(TreeEdge, TreeEdge)> {
    let l = translation_length(g)?;
    let v = TreeVertex::base(g.field());
    let path = v.path(&v.act(g)?);
    let h = (path.len() as i64 - l) / 2;
    let x0 = if h == 0 { v.clone() } else { path[h as usize - 1].dst.clone() };
    let ginv = g.inv()?;
    let gx0 = x0.act(g)?;
    let ax = x0.path(&gx0);
    let last = ax.last().expect("positive translation length").clone();
    let xm1 = last.src.act(&ginv)?;
    Ok((TreeEdge { src: x0, dst: xm1 }, last))
}

/// A matrix entry: an integer, a fraction "a/b", or a scalar in text form.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    pub fn scalar(&self, field: &Arc<FieldDesc>) -> Result<PadicScalar> {
        match self {
            Entry::Int(k) => Ok(PadicScalar::from_int(field, *k)),
            Entry::Text(s) => {
                let t = s.trim();
                if t.contains("p^") || t.starts_with('0') && t.contains("mod") {
                    return PadicScalar::parse(field, t);
                }
                let bad = || Error::Parse(format!("bad entry `{t}`"));
                match t.split_once('/') {
                    Some((a, b)) => PadicScalar::from_ratio(
                        field,
                        a.trim().parse().map_err(|_| bad())?,
                        b.trim().parse().map_err(|_| bad())?,
                    ),
                    None => Ok(PadicScalar::from_int(field, t.parse().map_err(|_| bad())?)),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BallSpec {
    pub kind: BallKind,
    pub center: Entry,
    pub m: i64,
}

/// Group package {p, f, generators, pingpong, det_p_element?, base_vertex};
/// pingpong lists B₁⁻, B₁⁺, B₂⁻, B₂⁺, ...
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GroupPackage {
    pub p: u64,
    pub f: usize,
    pub generators: Vec<[[Entry; 2]; 2]>,
    #[serde(default)]
    pub pingpong: Vec<BallSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_p_element: Option<[[Entry; 2]; 2]>,
    pub base_vertex: String,
}

/// One edge of Γ∖𝒯_Γ.
#[derive(Clone, Debug)]
pub struct QuotientEdge {
    pub rep: TreeEdge,
    pub src: usize,
    pub dst: usize,
    /// Generator index for the edges closing the cycles.
    pub pairing: Option<usize>,
}

/// How an edge of 𝒯 sits relative to the fundamental domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    /// Γ-translate of quotient edge `index`, with orientation sign.
    Quotient { index: usize, sign: i64 },
    /// Not in 𝒯_Γ; `away` when U_e misses the limit set.
    Outside { away: bool },
}

/// The finite graph Γ∖𝒯_Γ: the convex hull of the sources of the boundary
/// edges (a spanning tree) plus one closing edge eᵢ⁺ per generator.
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    pub group: SchottkyGroup,
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<QuotientEdge>,
    lookup: HashMap<TreeEdge, (usize, i64)>,
    /// cycles[i][k]: coefficient of edge k in the i-th basis cycle.
    pub cycles: Vec<Vec<i64>>,
}

pub fn build_quotient(group: &SchottkyGroup, depth: i64) -> Result<QuotientGraph> {
    let sources: Vec<TreeVertex> = group.boundary.iter().flat_map(|(a, b)| [a.src.clone(), b.src.clone()]).collect();
    let mut hull_edges: HashSet<TreeEdge> = HashSet::new();
    let mut verts: HashSet<TreeVertex> = sources.iter().cloned().collect();
    for s in &sources[1..] {
        for e in sources[0].path(s) {
            verts.insert(e.dst.clone());
            if !hull_edges.contains(&e.reverse()) {
                hull_edges.insert(e);
            }
        }
    }
    let root = group.base_vertex.clone();
    let mut vertices: Vec<TreeVertex> = verts.into_iter().collect();
    vertices.sort_by_key(|v| (v.distance(&root), v.to_string()));
    let index: HashMap<TreeVertex, usize> = vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
    let mut hull: Vec<TreeEdge> = hull_edges.into_iter().map(|e| e.descending()).collect();
    hull.sort_by_key(|e| (index[&e.src].min(index[&e.dst]), index[&e.src].max(index[&e.dst])));

    let mut edges = Vec::new();
    let mut lookup = HashMap::new();
    for e in hull {
        lookup.insert(e.clone(), (edges.len(), 1));
        lookup.insert(e.reverse(), (edges.len(), -1));
        edges.push(QuotientEdge { src: index[&e.src], dst: index[&e.dst], rep: e, pairing: None });
    }
    let n_tree = edges.len();
    for (i, (em, ep)) in group.boundary.iter().enumerate() {
        lookup.insert(ep.clone(), (edges.len(), 1));
        lookup.insert(ep.reverse(), (edges.len(), -1));
        edges.push(QuotientEdge { src: index[&ep.src], dst: index[&em.src], rep: ep.clone(), pairing: Some(i) });
    }

    // cycle i: eᵢ⁺, then the hull path from src(eᵢ⁻) back to src(eᵢ⁺)
    let mut cycles = vec![vec![0i64; edges.len()]; group.genus()];
    for (i, (em, ep)) in group.boundary.iter().enumerate() {
        cycles[i][n_tree + i] = 1;
        for e in em.src.path(&ep.src) {
            let (k, s) = lookup[&e];
            cycles[i][k] += s;
        }
    }
    let q = QuotientGraph { group: group.clone(), vertices, edges, lookup, cycles };
    if q.betti() != group.genus() as i64 {
        return Err(Error::PingPong("quotient graph has the wrong Betti number".into()));
    }
    // every edge of 𝒯_Γ near v* must fold onto the quotient
    let mu = universal_measure(&q);
    mu.support_edges(depth)?;
    Ok(q)
}

impl QuotientGraph {
    pub fn betti(&self) -> i64 {
        self.edges.len() as i64 - self.vertices.len() as i64 + 1
    }

    /// Fold an edge of 𝒯 into the fundamental domain.
    pub fn classify(&self, e: &TreeEdge) -> Result<EdgeClass> {
        let g = &self.group;
        let mut e = e.clone();
        let limit = 64 + 8 * TreeVertex::base(&g.field).distance(&e.src);
        'outer: for _ in 0..limit {
            if let Some(&(index, sign)) = self.lookup.get(&e) {
                return Ok(EdgeClass::Quotient { index, sign });
            }
            for (i, (em, ep)) in g.boundary.iter().enumerate() {
                if beyond(&e, ep) {
                    e = e.act(&g.inverses[i])?;
                    continue 'outer;
                }
                if beyond(&e, em) || e == *em || e == em.reverse() {
                    e = e.act(&g.generators[i])?;
                    continue 'outer;
                }
            }
            let hv = &self.vertices[0];
            return Ok(EdgeClass::Outside { away: e.dst.distance(hv) > e.src.distance(hv) });
        }
        Err(Error::DepthExceeded(format!("edge {e} did not fold into the fundamental domain")))
    }

    /// Like `classify`, also returning γ with e = γ·rep (or γ·rep̄ when the
    /// sign is −1).
    pub fn fold(&self, e: &TreeEdge) -> Result<(EdgeClass, Mat2)> {
        let g = &self.group;
        let mut e = e.clone();
        // invariant: original edge = gamma · e
        let mut gamma = Mat2::identity(&g.field);
        let limit = 64 + 8 * TreeVertex::base(&g.field).distance(&e.src);
        'outer: for _ in 0..limit {
            if let Some(&(index, sign)) = self.lookup.get(&e) {
                return Ok((EdgeClass::Quotient { index, sign }, gamma));
            }
            for (i, (em, ep)) in g.boundary.iter().enumerate() {
                if beyond(&e, ep) {
                    e = e.act(&g.inverses[i])?;
                    gamma = gamma.mul(&g.generators[i])?;
                    continue 'outer;
                }
                if beyond(&e, em) || e == *em || e == em.reverse() {
                    e = e.act(&g.generators[i])?;
                    gamma = gamma.mul(&g.inverses[i])?;
                    continue 'outer;
                }
            }
            let hv = &self.vertices[0];
            return Ok((EdgeClass::Outside { away: e.dst.distance(hv) > e.src.distance(hv) }, gamma));
        }
        Err(Error::DepthExceeded(format!("edge {e} did not fold into the fundamental domain")))
    }

    /// The oriented representative for a quotient index and sign.
    pub fn oriented_rep(&self, index: usize, sign: i64) -> TreeEdge {
        let r = &self.edges[index].rep;
        if sign > 0 {
            r.clone()
        } else {
            r.reverse()
        }
    }

    /// DOT rendering of the quotient graph.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph quotient {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            s.push_str(&format!("  q{i} [label=\"{v}\"];\n"));
        }
        for (k, e) in self.edges.iter().enumerate() {
            let lab = match e.pairing {
                Some(i) => format!("e{k} (g{})", i + 1),
                None => format!("e{k}"),
            };
            s.push_str(&format!("  q{} -> q{} [label=\"{lab}\"];\n", e.src, e.dst));
        }
        s.push_str("}\n");
        s
    }
}

struct UniversalCocycle {
    q: QuotientGraph,
}

impl EdgeCocycle for UniversalCocycle {
    fn rank(&self) -> usize {
        self.q.group.genus()
    }

    fn value(&self, e: &TreeEdge) -> Result<Vec<i64>> {
        Ok(match self.q.classify(e)? {
            EdgeClass::Quotient { index, sign } => self.q.cycles.iter().map(|c| sign * c[index]).collect(),
            EdgeClass::Outside { .. } => vec![0; self.rank()],
        })
    }

    fn vanishes_below(&self, e: &TreeEdge) -> Result<bool> {
        Ok(matches!(self.q.classify(e)?, EdgeClass::Outside { away: true }))
    }
}

/// The Γ-invariant measure whose value on the closing edge eᵢ⁺ is the i-th
/// unit vector.
pub fn universal_measure(q: &QuotientGraph) -> HarmonicMeasure {
    HarmonicMeasure::from_cocycle(q.group.field(), Arc::new(UniversalCocycle { q: q.clone() }))
}

/// τ_v = b + p^n ζ over ℚ_{p^{2f}}, with ζ a Teichmüller generator; red(τ_v) = v.
pub fn canonical_point(v: &TreeVertex) -> Result<ExtPoint> {
    let k = v.field();
    let l = FieldDesc::unramified(k.p, 2 * k.f, k.n)?;
    let zeta = PadicScalar::gen(&l).teichmuller()?;
    let b = v.center().embed_into(&l)?;
    let tau = b.add(&zeta.mul(&PadicScalar::p_power(&l, v.n))?)?;
    ExtPoint::new(tau, k)
}

/// Q_{ij} = component j of ×∫_{[γᵢτ_v] − [τ_v]} ω_μ.
#[derive(Clone, Debug)]
pub struct PeriodData {
    pub rows: Vec<MultIntegralValue>,
    pub depth: i64,
    pub guaranteed_prec: i64,
}

pub fn periods(q: &QuotientGraph, depth: i64) -> Result<PeriodData> {
    let mu = universal_measure(q);
    let g = &q.group;
    let tv = canonical_point(&g.base_vertex)?;
    let mut rows = Vec::new();
    for gi in &g.generators {
        let moved = gi.act_scalar(&tv.tau)?;
        rows.push(mult_integral(&mu, &ExtPoint::new(moved, &tv.base)?, &tv, depth)?);
    }
    let guaranteed_prec = rows.iter().map(|r| r.guaranteed_prec).min().unwrap_or(0);
    Ok(PeriodData { rows, depth, guaranteed_prec })
}

/// A homomorphism L^× → ℂ_p used to define an L-invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodMap {
    Ord,
    Log,
    LogNorm,
}

impl PeriodMap {
    pub fn apply(self, x: &PadicScalar, out_field: &Arc<FieldDesc>) -> Result<PadicScalar> {
        match self {
            PeriodMap::Ord => {
                let o = x.ord().ok_or_else(|| Error::Invalid("ord of zero".into()))?;
                PadicScalar::from_ratio(out_field, *o.numer(), *o.denom())
            }
            PeriodMap::Log => x.iwasawa_log(),
            PeriodMap::LogNorm => x.log_norm()?.embed_into(out_field),
        }
    }

    pub fn out_field(self, l: &Arc<FieldDesc>) -> Arc<FieldDesc> {
        match self {
            PeriodMap::LogNorm => l.base(),
            _ => l.clone(),
        }
    }
}

impl PeriodData {
    pub fn genus(&self) -> usize {
        self.rows.len()
    }

    pub fn field(&self) -> &Arc<FieldDesc> {
        &self.rows[0].field
    }

    /// ord(Q), exact.
    pub fn ord_matrix(&self) -> Vec<Vec<Ratio<i64>>> {
        self.rows.iter().map(|r| r.vals()).collect()
    }

    pub fn phi_matrix(&self, phi: PeriodMap) -> Result<Vec<Vec<PadicScalar>>> {
        let out = phi.out_field(self.field());
        self.rows
            .iter()
            .map(|r| r.components.iter().map(|x| phi.apply(x, &out)).collect())
            .collect()
    }

    pub fn ord_is_symmetric(&self) -> bool {
        let m = self.ord_matrix();
        (0..m.len()).all(|i| (0..m.len()).all(|j| m[i][j] == m[j][i]))
    }

    /// Largest k with φ(Q) symmetric mod p^k (capped at the guaranteed precision).
    pub fn phi_symmetry(&self, phi: PeriodMap) -> Result<i64> {
        let m = self.phi_matrix(phi)?;
        let mut k = self.guaranteed_prec;
        for i in 0..m.len() {
            for j in 0..i {
                while k > 0 && !m[i][j].eq_mod(&m[j][i], k) {
                    k -= 1;
                }
            }
        }
        Ok(k)
    }
}

/// Inverse of a square rational matrix by Gauss-Jordan.
pub fn rational_inverse(m: &[Vec<Ratio<i64>>]) -> Result<Vec<Vec<Ratio<i64>>>> {
    let n = m.len();
    let zero = Ratio::from_integer(0);
    let mut a: Vec<Vec<Ratio<i64>>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| Ratio::from_integer((i == j) as i64)));
            row
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| a[r][c] != zero).ok_or_else(|| Error::DegenerateOrd)?;
        a.swap(c, piv);
        let inv = Ratio::from_integer(1) / a[c][c];
        for x in a[c].iter_mut() {
            *x *= inv;
        }
        for r in 0..n {
            if r != c && a[r][c] != zero {
                let f = a[r][c];
                let pivot_row = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn ratio_scalar(field: &Arc<FieldDesc>, r: Ratio<i64>) -> Result<PadicScalar> {
    PadicScalar::from_ratio(field, *r.numer(), *r.denom())
}

/// ℒ_φ, acting on column vectors: φ(P̃) = ℒ_φ · ord(P̃) for every P̃ ∈ Λ.
#[derive(Clone, Debug)]
pub struct LInvariant {
    pub phi: PeriodMap,
    pub matrix: Vec<Vec<PadicScalar>>,
}

pub fn l_invariant(per: &PeriodData, phi: PeriodMap) -> Result<LInvariant> {
    let g = per.genus();
    let out = phi.out_field(per.field());
    let oinv = rational_inverse(&per.ord_matrix())?;
    let fq = per.phi_matrix(phi)?;
    // ℒ = φ(Q)ᵀ · ord(Q)ᵀ⁻¹
    let mut matrix = vec![vec![PadicScalar::exact_zero(&out); g]; g];
    for (a, row) in matrix.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let mut acc = PadicScalar::exact_zero(&out);
            for k in 0..g {
                acc = acc.add(&fq[k][a].mul(&ratio_scalar(&out, oinv[b][k])?)?)?;
            }
            *cell = acc;
        }
    }
    Ok(LInvariant { phi, matrix })
}

/// φ(P̃) − ℒ_φ · ord(P̃), well defined modulo Λ.
pub fn phi_x(lin: &LInvariant, point: &MultIntegralValue) -> Result<Vec<PadicScalar>> {
    let g = lin.matrix.len();
    if point.rank() != g {
        return Err(Error::RankMismatch { expected: g, got: point.rank() });
    }
    let out = lin.matrix[0][0].field().clone();
    let vals = point.vals();
    let mut res = Vec::with_capacity(g);
    for a in 0..g {
        let mut acc = lin.phi.apply(&point.components[a], &out)?;
        for (b, v) in vals.iter().enumerate() {
            acc = acc.sub(&lin.matrix[a][b].mul(&ratio_scalar(&out, *v)?)?)?;
        }
        res.push(acc);
    }
    Ok(res)
}

/// Σᵢ ⟨phi_X(Pᵢ, logNorm), wᵢ⟩ over components.
pub fn log_norm_a(parts: &[(&LInvariant, &MultIntegralValue)], weights: &[Vec<PadicScalar>]) -> Result<PadicScalar> {
    if parts.len() != weights.len() {
        return Err(Error::RankMismatch { expected: parts.len(), got: weights.len() });
    }
    let mut acc: Option<PadicScalar> = None;
    for ((lin, pt), w) in parts.iter().zip(weights) {
        if lin.phi != PeriodMap::LogNorm {
            return Err(Error::Invalid("log_norm_a needs logNorm L-invariants".into()));
        }
        let v = phi_x(lin, pt)?;
        if v.len() != w.len() {
            return Err(Error::RankMismatch { expected: v.len(), got: w.len() });
        }
        for (x, y) in v.iter().zip(w) {
            let t = x.mul(&y.embed_into(x.field())?)?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.add(&t)?,
            });
        }
    }
    acc.ok_or_else(|| Error::Invalid("no components".into()))
}
