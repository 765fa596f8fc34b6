//! Stranded configurations of a map: face tracing, degree, exact per-configuration
//! amplitudes for the two explicit projectors, and exact face maximization.
//!
//! A configuration assigns a pairing to every edge `(a, b)` of `map.edges()`,
//! with the in side on half-edge `a` and the out side on half-edge `b`.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{glue_local, greedy_order, plan, tri, Network, Step, OUT};
use crate::diagrams::{all_pairings, classify_pairing, sign, EdgeClass, Pairing};
use crate::exactpoly::{q, RatPolyN};
use crate::maps::{library, FeynmanMap, MapError};
use crate::projectors::{Rep, VertexKernel};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrandedError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("configuration has {found} pairings for {expected} edges")]
    ConfigLength { expected: usize, found: usize },
    #[error("edge pairings must have arity 5")]
    Arity,
    #[error("the graph has external legs; use the internal-face census")]
    Open,
    #[error("a boundary class needs exactly two external legs, found {0}")]
    NotTwoPoint(usize),
    #[error("unknown fragment {0:?}")]
    UnknownFragment(String),
}

/// A map together with one pairing per edge. A map without vertices is the
/// ring graph, whose single edge is closed onto itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrandedGraph {
    pub map: FeynmanMap,
    pub config: Vec<Pairing>,
}

impl StrandedGraph {
    pub fn new(map: FeynmanMap, config: Vec<Pairing>) -> Result<Self, StrandedError> {
        let expected = if map.num_vertices() == 0 { 1 } else { map.num_edges() };
        if config.len() != expected {
            return Err(StrandedError::ConfigLength { expected, found: config.len() });
        }
        if config.iter().any(|p| p.arity() != 5) {
            return Err(StrandedError::Arity);
        }
        Ok(StrandedGraph { map, config })
    }

    pub fn ring(p: Pairing) -> Result<Self, StrandedError> {
        Self::new(FeynmanMap::new(0, &[], &[], None)?, vec![p])
    }

    pub fn is_ring(&self) -> bool {
        self.map.num_vertices() == 0
    }

    /// Numbers of unbroken, broken and doubly-broken edges.
    pub fn edge_counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for p in &self.config {
            match classify_pairing(p) {
                EdgeClass::Unbroken(_) => c.0 += 1,
                EdgeClass::Broken => c.1 += 1,
                EdgeClass::DoublyBroken => c.2 += 1,
            }
        }
        c
    }
}

/// An open strand from one external slot to another.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenStrand {
    /// `(external leg index, slot)` at both ends.
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// Number of internal edges traversed.
    pub length: usize,
}

struct Tracer<'a> {
    g: &'a StrandedGraph,
    vertex: &'a VertexKernel,
    /// Edge index and side of each half-edge (`None` for external legs).
    side: Vec<Option<(usize, bool)>>,
}

impl<'a> Tracer<'a> {
    fn new(g: &'a StrandedGraph, vertex: &'a VertexKernel) -> Self {
        let mut side = vec![None; g.map.num_half_edges()];
        for (e, (a, b)) in g.map.edges().into_iter().enumerate() {
            side[a] = Some((e, false));
            side[b] = Some((e, true));
        }
        Tracer { g, vertex, side }
    }

    fn corner(&self, x: usize) -> usize {
        let base = 30 * (x / 30);
        base + self.vertex.corner(x - base)
    }

    fn across(&self, x: usize) -> Option<usize> {
        let (e, out) = self.side[x / 5]?;
        let (a, b) = self.g.map.edges()[e];
        let local = if out { 5 + x % 5 } else { x % 5 };
        let j = self.g.config[e].partner(local);
        Some(if j < 5 { 5 * a + j } else { 5 * b + j - 5 })
    }

    /// Lengths of closed faces, and open strands.
    fn trace(&self) -> (Vec<usize>, Vec<OpenStrand>) {
        let n = 5 * self.g.map.num_half_edges();
        let mut seen = vec![false; n];
        let leg = |h: usize| self.g.map.externals().iter().position(|&x| x == h).expect("external");
        let mut strands = Vec::new();
        for &h in self.g.map.externals() {
            for k in 0..5 {
                let start = 5 * h + k;
                if seen[start] {
                    continue;
                }
                seen[start] = true;
                let mut z = self.corner(start);
                let mut length = 0;
                loop {
                    seen[z] = true;
                    match self.across(z) {
                        None => break,
                        Some(y) => {
                            seen[y] = true;
                            length += 1;
                            z = self.corner(y);
                        }
                    }
                }
                strands.push(OpenStrand { from: (leg(h), k), to: (leg(z / 5), z % 5), length });
            }
        }
        let mut faces = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut x = s;
            let mut length = 0;
            loop {
                let y = self.across(x).expect("closed faces avoid external legs");
                seen[x] = true;
                seen[y] = true;
                length += 1;
                x = self.corner(y);
                if x == s {
                    break;
                }
            }
            faces.push(length);
        }
        (faces, strands)
    }
}

fn histogram(xs: impl IntoIterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for x in xs {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceCensus {
    pub faces: usize,
    /// `F_p`: faces with `p` corners.
    pub by_length: BTreeMap<usize, usize>,
    pub unbroken: usize,
    pub broken: usize,
    pub doubly_broken: usize,
    pub degree: i64,
    /// The same degree from the face-length form; equal to `degree` by construction of the census.
    pub degree_from_lengths: i64,
}

pub fn faces_and_degree(g: &StrandedGraph, vertex: &VertexKernel) -> Result<FaceCensus, StrandedError> {
    if !g.map.externals().is_empty() {
        return Err(StrandedError::Open);
    }
    let lengths: Vec<usize> = if g.is_ring() { vec![0; g.config[0].closure_cycles()] } else { Tracer::new(g, vertex).trace().0 };
    let (u, b1, b2) = g.edge_counts();
    let f = lengths.len();
    let v = g.map.num_vertices() as i64;
    let degree = 5 + 5 * v + b1 as i64 + 2 * b2 as i64 - f as i64;
    let thrice = 15 + 3 * b1 as i64 + 6 * b2 as i64 + lengths.iter().map(|&p| p as i64 - 3).sum::<i64>();
    debug_assert_eq!(thrice % 3, 0);
    Ok(FaceCensus { faces: f, by_length: histogram(lengths), unbroken: u, broken: b1, doubly_broken: b2, degree, degree_from_lengths: thrice.div_euclid(3) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenCensus {
    pub internal_faces: usize,
    pub by_length: BTreeMap<usize, usize>,
    /// Total length of internal faces.
    pub internal_length: usize,
    pub strands: Vec<OpenStrand>,
    /// `l_i`: open strands traversing `i` internal edges.
    pub strand_lengths: BTreeMap<usize, usize>,
    /// Total length of open strands.
    pub open_length: usize,
    pub internal_edges: usize,
}

pub fn internal_faces(g: &StrandedGraph, vertex: &VertexKernel) -> OpenCensus {
    if g.is_ring() {
        let f = g.config[0].closure_cycles();
        return OpenCensus {
            internal_faces: f,
            by_length: histogram(vec![0; f]),
            internal_length: 0,
            strands: vec![],
            strand_lengths: BTreeMap::new(),
            open_length: 0,
            internal_edges: 0,
        };
    }
    let (faces, strands) = Tracer::new(g, vertex).trace();
    OpenCensus {
        internal_faces: faces.len(),
        internal_length: faces.iter().sum(),
        by_length: histogram(faces),
        strand_lengths: histogram(strands.iter().map(|s| s.length)),
        open_length: strands.iter().map(|s| s.length).sum(),
        strands,
        internal_edges: g.map.num_edges(),
    }
}

/// A bare propagator seen as a two-point graph: five open strands of length zero.
pub fn bare_edge_census() -> OpenCensus {
    OpenCensus {
        internal_faces: 0,
        by_length: BTreeMap::new(),
        internal_length: 0,
        strands: (0..5).map(|k| OpenStrand { from: (0, k), to: (1, k), length: 0 }).collect(),
        strand_lengths: BTreeMap::from([(0, 5)]),
        open_length: 0,
        internal_edges: 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SaAmplitude {
    pub value: RatPolyN,
    /// False when some edge pairing is not a term of the projector.
    pub in_support: bool,
}

/// Exact amplitude `ε 2^{B1} 8^{B2} / (5!^E (1+6/N)^{B1+B2} (1+4/N)^{B2}) N^{-ω}`
/// of a vacuum configuration with propagator `A` or `S`.
pub fn amplitude_coefficient_sa(g: &StrandedGraph, rep: Rep, vertex: &VertexKernel) -> Result<SaAmplitude, StrandedError> {
    let census = faces_and_degree(g, vertex)?;
    let mut eps = if census.broken % 2 == 0 { 1 } else { -1 };
    for p in &g.config {
        match (classify_pairing(p), rep) {
            (EdgeClass::Unbroken(s), Rep::A) => eps *= sign(&s),
            (EdgeClass::Unbroken(_), Rep::S) => {}
            (_, Rep::A) => return Ok(SaAmplitude { value: RatPolyN::zero(), in_support: false }),
            (_, Rep::S) => {}
        }
    }
    let e = g.config.len() as u32;
    let scale = q(eps * 2i64.pow(census.broken as u32) * 8i64.pow(census.doubly_broken as u32), 1);
    let mut value = &RatPolyN::constant(scale) / &RatPolyN::int(120).powi(e as usize);
    let six = &RatPolyN::n_plus(6) * &RatPolyN::n_pow(-1);
    let four = &RatPolyN::n_plus(4) * &RatPolyN::n_pow(-1);
    value = &value / &six.powi(census.broken + census.doubly_broken);
    value = &value / &four.powi(census.doubly_broken);
    value = &value * &RatPolyN::n_pow(-census.degree);
    Ok(SaAmplitude { value, in_support: true })
}

/// `F ≤ ⌊𝓘/(k+1) + Σ_{i≤k} (k+1-i)/(k+1) F_i⌋`.
pub fn check_face_count_bounds(faces: usize, internal_length: usize, by_length: &BTreeMap<usize, usize>, k: usize) -> bool {
    let rhs: usize = internal_length + by_length.iter().filter(|(&i, _)| i <= k).map(|(&i, &f)| (k + 1 - i) * f).sum::<usize>();
    (k + 1) * faces <= rhs
}

/// `5p ≤ ⌊l/(k+1) + Σ_{0≤i≤k} (k+1-i)/(k+1) l_i⌋` for `2p` external legs.
pub fn check_strand_bounds(open_length: usize, strand_lengths: &BTreeMap<usize, usize>, p: usize, k: usize) -> bool {
    let rhs: usize = open_length + strand_lengths.iter().filter(|(&i, _)| i <= k).map(|(&i, &l)| (k + 1 - i) * l).sum::<usize>();
    (k + 1) * 5 * p <= rhs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryClass {
    Unbroken,
    Broken,
    DoublyBroken,
}

impl BoundaryClass {
    /// Strands joining the two external legs.
    pub fn traversing(self) -> u8 {
        match self {
            BoundaryClass::Unbroken => 5,
            BoundaryClass::Broken => 3,
            BoundaryClass::DoublyBroken => 1,
        }
    }
}

impl std::str::FromStr for BoundaryClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "unbroken" => Ok(BoundaryClass::Unbroken),
            "broken" => Ok(BoundaryClass::Broken),
            "doubly_broken" | "doubly-broken" => Ok(BoundaryClass::DoublyBroken),
            _ => Err(format!("unknown boundary class {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeUniverse {
    All945,
    UnbrokenOnly,
}

impl EdgeUniverse {
    pub fn pairings(self) -> Vec<Pairing> {
        let all = all_pairings(5);
        match self {
            EdgeUniverse::All945 => all,
            EdgeUniverse::UnbrokenOnly => all.into_iter().filter(|p| p.same_side_pairs() == 0).collect(),
        }
    }
}

impl std::str::FromStr for EdgeUniverse {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all945" | "all" => Ok(EdgeUniverse::All945),
            "unbroken_only" | "unbroken" => Ok(EdgeUniverse::UnbrokenOnly),
            _ => Err(format!("unknown edge universe {s:?}")),
        }
    }
}

/// What the search maximizes: internal faces, or `F - B1 - 2B2` (which is
/// `5 + 5V - ω` for vacuum graphs).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Faces,
    NegDegree,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    /// Best objective value, `None` if no configuration meets the boundary class.
    pub value: Option<i64>,
    pub witness: Option<StrandedGraph>,
    /// False when the frontier was truncated; `value` is then a lower bound.
    pub exact: bool,
    pub peak_states: usize,
}

#[derive(Clone)]
struct Best {
    score: i64,
    matching: Vec<u8>,
    choice: Vec<u16>,
}

fn counts(m: &[u8]) -> Vec<u8> {
    let blocks = m.len() / 5;
    let mut c = vec![0u8; tri(0, blocks)];
    for (s, &t) in m.iter().enumerate() {
        let t = t as usize;
        if s < t {
            c[tri(s / 5, t / 5)] += 1;
        }
    }
    c
}

/// Exact maximum of the objective over all configurations drawn from `universe`,
/// subject to the boundary class of a two-point fragment. Frontier states that
/// differ by slot relabelings inside a half-edge are merged, which is exact
/// because both universes are closed under such relabelings.
pub fn max_faces_search(
    map: &FeynmanMap,
    class: Option<BoundaryClass>,
    universe: EdgeUniverse,
    objective: Objective,
    vertex: &VertexKernel,
    budget: usize,
) -> Result<SearchResult, StrandedError> {
    if class.is_some() && map.externals().len() != 2 {
        return Err(StrandedError::NotTwoPoint(map.externals().len()));
    }
    if map.num_vertices() == 0 {
        return Err(StrandedError::ConfigLength { expected: 1, found: 0 });
    }
    let terms = universe.pairings();
    let penalty: Vec<i64> = terms.iter().map(|p| if objective == Objective::Faces { 0 } else { p.same_side_pairs().min(2) as i64 }).collect();
    let partners: Vec<Vec<u8>> = terms.iter().map(|p| p.partners().to_vec()).collect();
    let edges = map.edges();
    let net = Network { vertices: map.num_vertices(), edges: edges.clone(), op_of_edge: vec![0; edges.len()] };
    let steps = plan(&net, &greedy_order(&net));
    let mut cache: HashMap<[u8; 10], Vec<(Vec<u8>, i64, u16)>> = HashMap::default();
    let mut open: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u8>, Best> = HashMap::default();
    states.insert(Vec::new(), Best { score: 0, matching: Vec::new(), choice: vec![u16::MAX; edges.len()] });
    let mut exact = true;
    let mut peak = 1;
    let better = |a: &Best, b: &Best| a.score > b.score || (a.score == b.score && a.choice < b.choice);
    for step in steps {
        match step {
            Step::Absorb(v) => {
                let base = open.len();
                open.extend((0..30).map(|s| 30 * v + s));
                let ext: Vec<u8> = (0..30).map(|s| (base + vertex.corner(s)) as u8).collect();
                states = states
                    .into_values()
                    .map(|mut b| {
                        b.matching.extend_from_slice(&ext);
                        (counts(&b.matching), b)
                    })
                    .collect();
            }
            Step::Edge(e) => {
                let (a, b) = edges[e];
                let pos_of = |g: usize| open.iter().position(|&x| x == g).expect("endpoint is open");
                let local: [usize; 10] = std::array::from_fn(|j| if j < 5 { pos_of(5 * a + j) } else { pos_of(5 * b + j - 5) });
                let mut local_of = vec![OUT; open.len()];
                for (j, &p) in local.iter().enumerate() {
                    local_of[p] = j as u8;
                }
                let mut reindex = vec![usize::MAX; open.len()];
                let mut nxt = 0;
                for (p, r) in reindex.iter_mut().enumerate() {
                    if local_of[p] == OUT {
                        *r = nxt;
                        nxt += 1;
                    }
                }
                let mut next: HashMap<Vec<u8>, Best> = HashMap::default();
                for best in states.into_values() {
                    let k = &best.matching;
                    let key: [u8; 10] = std::array::from_fn(|j| local_of[k[local[j]] as usize]);
                    let res = cache.entry(key).or_insert_with(|| {
                        let mut by_out: BTreeMap<Vec<u8>, (i64, u16)> = BTreeMap::new();
                        for (i, p) in partners.iter().enumerate() {
                            let (out, loops) = glue_local(&key, p);
                            let s = loops as i64 - penalty[i];
                            let entry = by_out.entry(out).or_insert((s, i as u16));
                            if s > entry.0 {
                                *entry = (s, i as u16);
                            }
                        }
                        by_out.into_iter().map(|(o, (s, i))| (o, s, i)).collect()
                    });
                    let targets: Vec<usize> = (0..10).filter(|&j| key[j] == OUT).map(|j| k[local[j]] as usize).collect();
                    let mut base: Vec<u8> = vec![0; nxt];
                    for (p, &r) in reindex.iter().enumerate() {
                        if r != usize::MAX {
                            base[r] = reindex[k[p] as usize].min(255) as u8;
                        }
                    }
                    for (pairing, s, idx) in res.iter() {
                        let mut nk = base.clone();
                        for (i, &t) in targets.iter().enumerate() {
                            nk[reindex[t]] = reindex[targets[pairing[i] as usize]] as u8;
                        }
                        let mut choice = best.choice.clone();
                        choice[e] = *idx;
                        let cand = Best { score: best.score + s, matching: nk, choice };
                        let ck = counts(&cand.matching);
                        match next.get_mut(&ck) {
                            Some(cur) => {
                                if better(&cand, cur) {
                                    *cur = cand;
                                }
                            }
                            None => {
                                next.insert(ck, cand);
                            }
                        }
                    }
                }
                if next.len() > budget {
                    exact = false;
                    let mut all: Vec<(Vec<u8>, Best)> = next.into_iter().collect();
                    all.sort_by(|x, y| y.1.score.cmp(&x.1.score).then_with(|| x.0.cmp(&y.0)));
                    all.truncate(budget);
                    next = all.into_iter().collect();
                }
                peak = peak.max(next.len());
                states = next;
                open = open.into_iter().enumerate().filter(|(p, _)| local_of[*p] == OUT).map(|(_, g)| g).collect();
            }
        }
    }
    // The open blocks are now the external legs, in increasing half-edge order.
    let legs: Vec<usize> = (0..open.len() / 5).map(|b| open[5 * b] / 5).collect();
    let winner = states
        .into_iter()
        .filter(|(c, _)| match class {
            None => true,
            Some(cl) => {
                let x = legs.iter().position(|&h| h == map.externals()[0]).expect("leg open");
                let y = legs.iter().position(|&h| h == map.externals()[1]).expect("leg open");
                c[tri(x, y)] == cl.traversing()
            }
        })
        .map(|(_, b)| b)
        .reduce(|a, b| if better(&b, &a) { b } else { a });
    let Some(w) = winner else { return Ok(SearchResult { value: None, witness: None, exact, peak_states: peak }) };
    let config = w.choice.iter().map(|&i| terms[i as usize].clone()).collect();
    let witness = StrandedGraph::new(map.clone(), config)?;
    Ok(SearchResult { value: Some(w.score), witness: Some(witness), exact, peak_states: peak })
}

/// Smallest degree over the configurations of a vacuum map.
pub fn min_degree(map: &FeynmanMap, universe: EdgeUniverse, vertex: &VertexKernel, budget: usize) -> Result<(Option<i64>, SearchResult), StrandedError> {
    if !map.externals().is_empty() {
        return Err(StrandedError::Open);
    }
    let r = max_faces_search(map, None, universe, Objective::NegDegree, vertex, budget)?;
    Ok((r.value.map(|s| 5 + 5 * map.num_vertices() as i64 - s), r))
}

/// Two-point fragments used in the face-count lemmas.
pub fn fragment(name: &str) -> Result<FeynmanMap, StrandedError> {
    let m = match name {
        // Two vertices with a self-loop each, joined by three edges, one leg each.
        "H0" => FeynmanMap::new(2, &[(1, 2), (7, 8), (3, 9), (4, 10), (5, 11)], &[0, 6], Some(0))?,
        // A vertex with a self-loop and four edges to a vertex carrying both legs.
        "H4" => FeynmanMap::new(2, &[(0, 1), (2, 6), (3, 7), (4, 8), (5, 9)], &[10, 11], Some(10))?,
        // A vertex with a self-loop and two edges to each of two vertices, which
        // share three edges and carry one leg each.
        "H5" => FeynmanMap::new(3, &[(0, 1), (2, 6), (3, 7), (4, 12), (5, 13), (8, 14), (9, 15), (10, 16)], &[11, 17], Some(11))?,
        "double_tadpole" => library::double_tadpole(1, [(2, 3), (4, 5)]),
        "melon" => library::melon_two_point(0, &[0, 1, 2, 3, 4]),
        _ => return Err(StrandedError::UnknownFragment(name.to_string())),
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::Pairing;
    use crate::projectors::{build_vertex, VertexFlavor};

    fn cyclic() -> VertexKernel {
        build_vertex(VertexFlavor::Cyclic)
    }

    fn doubly() -> Pairing {
        Pairing::from_pairs(5, &[(0, 1), (2, 3), (5, 6), (7, 8), (4, 9)]).unwrap()
    }

    #[test]
    fn ring_degrees() {
        let v = cyclic();
        let u = faces_and_degree(&StrandedGraph::ring(Pairing::identity(5)).unwrap(), &v).unwrap();
        assert_eq!((u.faces, u.degree, u.degree_from_lengths), (5, 0, 0));
        let d = faces_and_degree(&StrandedGraph::ring(doubly()).unwrap(), &v).unwrap();
        assert_eq!((d.faces, d.degree), (3, 4));
    }

    #[test]
    fn closed_melon_leading_configuration() {
        let v = cyclic();
        let m = library::closed_melon();
        let r = max_faces_search(&m, None, EdgeUniverse::UnbrokenOnly, Objective::Faces, &v, 1 << 20).unwrap();
        assert_eq!(r.value, Some(15));
        let c = faces_and_degree(r.witness.as_ref().unwrap(), &v).unwrap();
        assert_eq!((c.faces, c.degree, c.by_length.get(&2)), (15, 0, Some(&15)));
        assert!(check_face_count_bounds(15, 30, &c.by_length, 2));
    }

    #[test]
    fn sa_amplitude_of_rings() {
        let v = cyclic();
        let id = amplitude_coefficient_sa(&StrandedGraph::ring(Pairing::identity(5)).unwrap(), Rep::A, &v).unwrap();
        assert_eq!(id.value, RatPolyN::constant(q(1, 120)));
        let t = StrandedGraph::ring(Pairing::from_permutation(&[1, 0, 2, 3, 4])).unwrap();
        assert_eq!(amplitude_coefficient_sa(&t, Rep::A, &v).unwrap().value.leading_coefficient(), q(-1, 120));
        let d = amplitude_coefficient_sa(&StrandedGraph::ring(doubly()).unwrap(), Rep::A, &v).unwrap();
        assert!(!d.in_support && d.value.is_zero());
    }

    #[test]
    fn open_census() {
        let v = cyclic();
        let single = StrandedGraph::new(FeynmanMap::new(1, &[], &[0, 1, 2, 3, 4, 5], Some(0)).unwrap(), vec![]).unwrap();
        let c = internal_faces(&single, &v);
        assert_eq!((c.internal_faces, c.internal_length, c.open_length, c.strands.len()), (0, 0, 0, 15));
        let bare = bare_edge_census();
        assert_eq!(bare.strand_lengths.get(&0), Some(&5));
    }

    #[test]
    fn double_tadpole_has_at_most_four_faces() {
        let v = cyclic();
        let m = fragment("double_tadpole").unwrap();
        for class in [BoundaryClass::Unbroken, BoundaryClass::Broken, BoundaryClass::DoublyBroken] {
            let r = max_faces_search(&m, Some(class), EdgeUniverse::All945, Objective::Faces, &v, 1 << 20).unwrap();
            assert!(r.value.unwrap() <= 4);
            let c = internal_faces(r.witness.as_ref().unwrap(), &v);
            assert_eq!(Some(c.internal_faces as i64), r.value);
            assert_eq!(c.internal_length + c.open_length, 5 * c.internal_edges);
        }
    }

    fn ceilings(name: &str, universe: EdgeUniverse) -> Vec<Option<i64>> {
        let v = cyclic();
        let m = fragment(name).unwrap();
        [BoundaryClass::Unbroken, BoundaryClass::Broken, BoundaryClass::DoublyBroken]
            .into_iter()
            .map(|c| {
                let r = max_faces_search(&m, Some(c), universe, Objective::Faces, &v, 1 << 22).unwrap();
                assert!(r.exact);
                if let Some(w) = &r.witness {
                    assert_eq!(Some(internal_faces(w, &v).internal_faces as i64), r.value);
                }
                r.value
            })
            .collect()
    }

    #[test]
    fn fragment_ceilings() {
        assert_eq!(ceilings("H0", EdgeUniverse::UnbrokenOnly), vec![Some(7), Some(8), Some(7)]);
        assert_eq!(ceilings("H4", EdgeUniverse::UnbrokenOnly), vec![Some(7); 3]);
        assert_eq!(ceilings("melon", EdgeUniverse::UnbrokenOnly), vec![Some(10), Some(9), Some(8)]);
        assert_eq!(ceilings("double_tadpole", EdgeUniverse::All945), vec![Some(4); 3]);
    }

    #[test]
    fn double_tadpole_chains_gain_one_power_per_link() {
        let v = cyclic();
        for p in 2..=3 {
            let (d, r) = min_degree(&library::double_tadpole_chain(p), EdgeUniverse::All945, &v, 1 << 22).unwrap();
            assert_eq!(d, Some(4 - p as i64));
            let c = faces_and_degree(r.witness.as_ref().unwrap(), &v).unwrap();
            assert_eq!((c.degree, c.degree_from_lengths), (4 - p as i64, 4 - p as i64));
        }
    }
}
