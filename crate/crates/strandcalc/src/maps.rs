//! Rooted sextic combinatorial maps: enumeration, sub-map patterns and melonic reduction.
//!
//! Half-edge `6v + i` is position `i` in the cyclic order of vertex `v`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("half-edge {0} is out of range or used twice")]
    BadHalfEdge(usize),
    #[error("vertex {0} does not have six half-edges")]
    BadValence(usize),
    #[error("half-edge {0} is neither paired nor external")]
    Dangling(usize),
    #[error("map is not connected")]
    Disconnected,
    #[error("root {0} is not a half-edge of the map")]
    BadRoot(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeynmanMap {
    partner: Vec<Option<usize>>,
    externals: Vec<usize>,
    root: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Vacuum,
    TwoPoint,
}

impl std::str::FromStr for MapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vacuum" => Ok(MapKind::Vacuum),
            "two_point" | "two-point" => Ok(MapKind::TwoPoint),
            _ => Err(format!("unknown map kind {s:?}")),
        }
    }
}

impl FeynmanMap {
    /// Builds a map on `vertices` vertices from half-edge pairs and external legs.
    pub fn new(vertices: usize, edges: &[(usize, usize)], externals: &[usize], root: Option<usize>) -> Result<Self, MapError> {
        let n = 6 * vertices;
        let mut partner = vec![None; n];
        let mut used = vec![false; n];
        for &(a, b) in edges {
            for x in [a, b] {
                if x >= n || used[x] {
                    return Err(MapError::BadHalfEdge(x));
                }
                used[x] = true;
            }
            if a == b {
                return Err(MapError::BadHalfEdge(a));
            }
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        for &x in externals {
            if x >= n || used[x] {
                return Err(MapError::BadHalfEdge(x));
            }
            used[x] = true;
        }
        if let Some(x) = used.iter().position(|u| !u) {
            return Err(MapError::Dangling(x));
        }
        if let Some(r) = root {
            if r >= n {
                return Err(MapError::BadRoot(r));
            }
        }
        let m = FeynmanMap { partner, externals: externals.to_vec(), root };
        if !m.is_connected() {
            return Err(MapError::Disconnected);
        }
        Ok(m)
    }

    pub fn num_vertices(&self) -> usize {
        self.partner.len() / 6
    }

    pub fn num_half_edges(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self, h: usize) -> Option<usize> {
        self.partner[h]
    }

    pub fn externals(&self) -> &[usize] {
        &self.externals
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn kind(&self) -> Option<MapKind> {
        match self.externals.len() {
            0 => Some(MapKind::Vacuum),
            2 => Some(MapKind::TwoPoint),
            _ => None,
        }
    }

    /// Edges `(h, h')` with `h < h'`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.partner.len()).filter_map(|h| self.partner[h].filter(|&p| h < p).map(|p| (h, p))).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.edges().len()
    }

    pub fn vertex_of(h: usize) -> usize {
        h / 6
    }

    pub fn is_self_loop(&self, h: usize) -> bool {
        self.partner[h].is_some_and(|p| p / 6 == h / 6)
    }

    fn is_connected(&self) -> bool {
        let v = self.num_vertices();
        if v == 0 {
            return true;
        }
        let mut seen = vec![false; v];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for h in 6 * u..6 * u + 6 {
                if let Some(p) = self.partner[h] {
                    if !seen[p / 6] {
                        seen[p / 6] = true;
                        stack.push(p / 6);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Checks `6V = 2E + #externals` and connectedness.
    pub fn validate(&self) -> Result<(), MapError> {
        if 6 * self.num_vertices() != 2 * self.num_edges() + self.externals.len() {
            return Err(MapError::BadValence(0));
        }
        if !self.is_connected() {
            return Err(MapError::Disconnected);
        }
        Ok(())
    }

    /// Number of edges joining vertices `u` and `v` (`u != v`).
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        (6 * u..6 * u + 6).filter(|&h| self.partner[h].is_some_and(|p| p / 6 == v)).count()
    }

    /// Self-loop edges at vertex `u`.
    pub fn self_loops(&self, u: usize) -> Vec<(usize, usize)> {
        (6 * u..6 * u + 6).filter_map(|h| self.partner[h].filter(|&p| p / 6 == u && h < p).map(|p| (h, p))).collect()
    }

    /// Edges between distinct vertices `u` and `v`, keyed by the half-edge at `u`.
    pub fn edges_between(&self, u: usize, v: usize) -> Vec<(usize, usize)> {
        (6 * u..6 * u + 6).filter_map(|h| self.partner[h].filter(|&p| p / 6 == v).map(|p| (h.min(p), h.max(p)))).collect()
    }

    /// The edge carrying the root half-edge, if any.
    pub fn root_edge(&self) -> Option<(usize, usize)> {
        let r = self.root?;
        self.partner[r].map(|p| (r.min(p), r.max(p)))
    }

    /// Canonical code of the map rooted at `r`: vertices are relabeled in the order
    /// they are first reached while scanning half-edges, each vertex rotated so that
    /// the half-edge it was reached through sits at position 0.
    pub fn rooted_code(&self, r: usize) -> Vec<u32> {
        let n = self.partner.len();
        let mut vlabel = vec![usize::MAX; n / 6];
        let mut offset = vec![0usize; n / 6];
        let mut order: Vec<usize> = Vec::with_capacity(n / 6);
        vlabel[r / 6] = 0;
        offset[r / 6] = r % 6;
        order.push(r / 6);
        let new_label = |vl: &[usize], off: &[usize], h: usize| 6 * vl[h / 6] + (h % 6 + 6 - off[h / 6]) % 6;
        let mut code = Vec::with_capacity(n);
        let ext_index: HashMap<usize, usize> = self.externals.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let mut l = 0;
        while l < 6 * order.len() {
            let v = order[l / 6];
            let h = 6 * v + (l % 6 + offset[v]) % 6;
            match self.partner[h] {
                Some(p) => {
                    if vlabel[p / 6] == usize::MAX {
                        vlabel[p / 6] = order.len();
                        offset[p / 6] = p % 6;
                        order.push(p / 6);
                    }
                    code.push(new_label(&vlabel, &offset, p) as u32);
                }
                None => code.push(u32::MAX - ext_index[&h] as u32),
            }
            l += 1;
        }
        code
    }

    /// Rebuilds a map from a rooted code (root at half-edge 0).
    pub fn from_code(code: &[u32]) -> FeynmanMap {
        let mut partner = vec![None; code.len()];
        let mut ext: Vec<(u32, usize)> = Vec::new();
        for (h, &c) in code.iter().enumerate() {
            if c >= u32::MAX - 16 {
                ext.push((u32::MAX - c, h));
            } else {
                partner[h] = Some(c as usize);
            }
        }
        ext.sort();
        FeynmanMap { partner, externals: ext.into_iter().map(|e| e.1).collect(), root: Some(0) }
    }

    /// The same map relabeled canonically from its root (or half-edge 0).
    pub fn canonical(&self) -> FeynmanMap {
        FeynmanMap::from_code(&self.rooted_code(self.root.unwrap_or(0)))
    }

    /// Code of the isomorphism class, minimized over root choices. Two-point
    /// maps keep their incoming leg as root.
    pub fn unrooted_code(&self) -> Vec<u32> {
        if let Some(&first) = self.externals.first() {
            return self.rooted_code(first);
        }
        (0..self.partner.len()).map(|r| self.rooted_code(r)).min().unwrap_or_default()
    }

    /// Number of automorphisms of the unrooted map.
    pub fn automorphisms(&self) -> usize {
        if self.partner.is_empty() {
            return 1;
        }
        let base = self.rooted_code(self.root.unwrap_or(0));
        let roots: Vec<usize> = if self.externals.is_empty() { (0..self.partner.len()).collect() } else { vec![self.externals[0]] };
        roots.into_iter().filter(|&r| self.rooted_code(r) == base).count()
    }

    /// Replaces the vertex set `inside` (a two-point region whose two boundary
    /// half-edges are `out1`, `out2` outside it) by a single edge `out1 - out2`.
    fn contract_region(&self, inside: &BTreeSet<usize>, out1: usize, out2: usize) -> FeynmanMap {
        let keep: Vec<usize> = (0..self.num_vertices()).filter(|v| !inside.contains(v)).collect();
        let newv: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let remap = |h: usize| 6 * newv[&(h / 6)] + h % 6;
        let mut partner = vec![None; 6 * keep.len()];
        for &v in &keep {
            for h in 6 * v..6 * v + 6 {
                if let Some(p) = self.partner[h] {
                    if !inside.contains(&(p / 6)) {
                        partner[remap(h)] = Some(remap(p));
                    }
                }
            }
        }
        partner[remap(out1)] = Some(remap(out2));
        partner[remap(out2)] = Some(remap(out1));
        let root = self.root.and_then(|r| newv.contains_key(&(r / 6)).then(|| remap(r)));
        FeynmanMap { partner, externals: self.externals.iter().map(|&h| remap(h)).collect(), root }
    }

    /// Vertex subsets (connected, avoiding `protect`) with exactly two boundary
    /// half-edges, both paired to vertices outside the subset, and not containing
    /// the root edge.
    fn two_point_regions(&self, protect: &BTreeSet<usize>) -> Vec<(BTreeSet<usize>, usize, usize)> {
        let v = self.num_vertices();
        let free: Vec<usize> = (0..v).filter(|u| !protect.contains(u)).collect();
        assert!(free.len() < 24, "two-point region search is exponential in the vertex count");
        let root_edge = self.root_edge();
        let mut out = Vec::new();
        for mask in 1u32..(1u32 << free.len()) {
            let set: BTreeSet<usize> = free.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &u)| u).collect();
            let mut boundary = Vec::new();
            let mut ok = true;
            for &u in &set {
                for h in 6 * u..6 * u + 6 {
                    match self.partner[h] {
                        None => ok = false,
                        Some(p) if !set.contains(&(p / 6)) => boundary.push(p),
                        _ => {}
                    }
                }
            }
            if !ok || boundary.len() != 2 {
                continue;
            }
            if let Some((a, b)) = root_edge {
                if set.contains(&(a / 6)) && set.contains(&(b / 6)) {
                    continue;
                }
            }
            if !self.subset_connected(&set) {
                continue;
            }
            out.push((set, boundary[0], boundary[1]));
        }
        out
    }

    fn subset_connected(&self, set: &BTreeSet<usize>) -> bool {
        let Some(&start) = set.iter().next() else { return false };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for h in 6 * u..6 * u + 6 {
                if let Some(p) = self.partner[h] {
                    if set.contains(&(p / 6)) && seen.insert(p / 6) {
                        stack.push(p / 6);
                    }
                }
            }
        }
        seen.len() == set.len()
    }

    /// Contracts two-point regions avoiding `protect` until none remain; returns
    /// the reduced map and the new indices of the protected vertices.
    pub fn contract_two_point_closure(&self, protect: &[usize]) -> (FeynmanMap, Vec<usize>) {
        let mut map = self.clone();
        let mut ids: Vec<usize> = protect.to_vec();
        loop {
            let prot: BTreeSet<usize> = ids.iter().copied().collect();
            let regions = map.two_point_regions(&prot);
            let Some((set, a, b)) = regions.into_iter().max_by_key(|(s, _, _)| (s.len(), std::cmp::Reverse(s.clone()))) else {
                return (map, ids);
            };
            let shift = |u: usize| u - set.iter().filter(|&&w| w < u).count();
            ids = ids.iter().map(|&u| shift(u)).collect();
            map = map.contract_region(&set, a, b);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    vertices: Vec<[usize; 6]>,
    involution: Vec<[usize; 2]>,
    externals: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<usize>,
}

impl Serialize for FeynmanMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MapRepr {
            vertices: (0..self.num_vertices()).map(|v| std::array::from_fn(|i| 6 * v + i)).collect(),
            involution: self.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            externals: self.externals.clone(),
            root: self.root,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeynmanMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = MapRepr::deserialize(d)?;
        let mut id: HashMap<usize, usize> = HashMap::new();
        for (v, hs) in r.vertices.iter().enumerate() {
            for (i, &h) in hs.iter().enumerate() {
                if id.insert(h, 6 * v + i).is_some() {
                    return Err(D::Error::custom(MapError::BadHalfEdge(h)));
                }
            }
        }
        let look = |h: usize| id.get(&h).copied().ok_or_else(|| D::Error::custom(MapError::BadHalfEdge(h)));
        let edges = r.involution.iter().map(|e| Ok((look(e[0])?, look(e[1])?))).collect::<Result<Vec<_>, D::Error>>()?;
        let ext = r.externals.iter().map(|&h| look(h)).collect::<Result<Vec<_>, D::Error>>()?;
        let root = r.root.map(look).transpose()?;
        FeynmanMap::new(r.vertices.len(), &edges, &ext, root).map_err(D::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFilter {
    NoMelonNoDoubleTadpole,
}

/// Result of an enumeration: maps with their rooted multiplicities.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub maps: Vec<FeynmanMap>,
    /// For unrooted enumeration, the number of rooted maps in each class; all 1 otherwise.
    pub multiplicity: Vec<usize>,
    pub truncated: bool,
}

/// Enumerates connected maps with `v` vertices, each rooted map exactly once
/// (canonical construction), or one representative per isomorphism class.
pub fn enumerate_maps(v: usize, kind: MapKind, rooted: bool, filter: Option<MapFilter>, cap: usize) -> Enumeration {
    assert!(v >= 1, "the ring map is not enumerated");
    let n = 6 * v;
    let mut partner: Vec<u32> = vec![u32::MAX - 100; n];
    let unset = u32::MAX - 100;
    let mut raw: Vec<Vec<u32>> = Vec::new();
    let mut truncated = false;
    let two_point = kind == MapKind::TwoPoint;
    if two_point {
        partner[0] = u32::MAX;
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(h: usize, used_v: usize, v: usize, ext_out: bool, two_point: bool, partner: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, cap: usize, truncated: &mut bool, unset: u32) {
        if out.len() >= cap {
            *truncated = true;
            return;
        }
        if h == 6 * used_v {
            if used_v == v && (!two_point || ext_out) {
                out.push(partner.clone());
            }
            return;
        }
        if partner[h] != unset {
            rec(h + 1, used_v, v, ext_out, two_point, partner, out, cap, truncated, unset);
            return;
        }
        for p in h + 1..6 * used_v {
            if partner[p] == unset {
                partner[h] = p as u32;
                partner[p] = h as u32;
                rec(h + 1, used_v, v, ext_out, two_point, partner, out, cap, truncated, unset);
                partner[p] = unset;
            }
        }
        if used_v < v {
            let p = 6 * used_v;
            partner[h] = p as u32;
            partner[p] = h as u32;
            rec(h + 1, used_v + 1, v, ext_out, two_point, partner, out, cap, truncated, unset);
            partner[p] = unset;
        }
        if two_point && !ext_out {
            partner[h] = u32::MAX - 1;
            rec(h + 1, used_v, v, true, two_point, partner, out, cap, truncated, unset);
        }
        partner[h] = unset;
    }
    rec(0, 1, v, false, two_point, &mut partner, &mut raw, cap, &mut truncated, unset);
    let mut maps: Vec<FeynmanMap> = raw.iter().map(|c| FeynmanMap::from_code(c)).collect();
    if let Some(MapFilter::NoMelonNoDoubleTadpole) = filter {
        maps.retain(|m| {
            let r = detect_patterns(m);
            r.melons.is_empty() && r.double_tadpoles.is_empty()
        });
    }
    if rooted || two_point {
        let k = maps.len();
        return Enumeration { maps, multiplicity: vec![1; k], truncated };
    }
    let mut classes: BTreeMap<Vec<u32>, (FeynmanMap, usize)> = BTreeMap::new();
    for m in maps {
        let c = m.unrooted_code();
        classes.entry(c.clone()).or_insert_with(|| (FeynmanMap::from_code(&c), 0)).1 += 1;
    }
    let (maps, multiplicity) = classes.into_values().unzip();
    Enumeration { maps, multiplicity, truncated }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternType {
    TypeI,
    TypeII,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub location: Location,
    pub tag: T,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternReport {
    pub melons: Vec<Location>,
    pub double_tadpoles: Vec<Location>,
    pub tadpoles: Vec<Tagged<PatternType>>,
    pub dipoles: Vec<Tagged<PatternType>>,
    /// Tag is `true` for separating dipole-tadpoles.
    pub dipole_tadpoles: Vec<Tagged<bool>>,
    pub quartic_rungs: Vec<Location>,
}

fn subsets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut with: Vec<Vec<T>> = subsets(&items[1..], k - 1).into_iter().map(|mut s| {
        s.insert(0, items[0].clone());
        s
    }).collect();
    with.extend(subsets(&items[1..], k));
    with
}

/// Half-edges of `verts` that are not part of `edges`.
fn legs(verts: &[usize], edges: &[(usize, usize)]) -> Vec<usize> {
    let inner: BTreeSet<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    verts.iter().flat_map(|&v| 6 * v..6 * v + 6).filter(|h| !inner.contains(h)).collect()
}

/// Groups the legs of a sub-map by the connected component of the rest of the
/// map they lead into (legs joined directly by an edge share a group).
fn leg_components(m: &FeynmanMap, verts: &[usize], edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let legs = legs(verts, edges);
    let inside: BTreeSet<usize> = verts.iter().copied().collect();
    let nv = m.num_vertices();
    let mut parent: Vec<usize> = (0..nv + legs.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let n = p[y];
            p[y] = r;
            y = n;
        }
        r
    }
    let union = |p: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra] = rb;
        }
    };
    for (u, v) in m.edges() {
        if !inside.contains(&(u / 6)) && !inside.contains(&(v / 6)) {
            union(&mut parent, u / 6, v / 6);
        }
    }
    let leg_index: HashMap<usize, usize> = legs.iter().enumerate().map(|(i, &h)| (h, nv + i)).collect();
    for (i, &h) in legs.iter().enumerate() {
        if let Some(p) = m.partner(h) {
            match leg_index.get(&p) {
                Some(&j) => union(&mut parent, nv + i, j),
                None => union(&mut parent, nv + i, p / 6),
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &h) in legs.iter().enumerate() {
        let r = find(&mut parent, nv + i);
        groups.entry(r).or_default().push(h);
    }
    groups.into_values().collect()
}

fn loc(vertices: Vec<usize>, mut edges: Vec<(usize, usize)>) -> Location {
    edges.sort();
    Location { vertices, edges }
}

/// Basic sub-map shapes, without type tags.
struct Shapes {
    melons: Vec<Location>,
    double_tadpoles: Vec<Location>,
    tadpoles: Vec<Location>,
    dipoles: Vec<Location>,
    dipole_tadpoles: Vec<Location>,
}

fn scan_shapes(m: &FeynmanMap) -> Shapes {
    let nv = m.num_vertices();
    let mut s = Shapes { melons: vec![], double_tadpoles: vec![], tadpoles: vec![], dipoles: vec![], dipole_tadpoles: vec![] };
    for u in 0..nv {
        let loops = m.self_loops(u);
        for l in &loops {
            s.tadpoles.push(loc(vec![u], vec![*l]));
        }
        for pair in subsets(&loops, 2) {
            s.double_tadpoles.push(loc(vec![u], pair));
        }
        for v in u + 1..nv {
            let between = m.edges_between(u, v);
            for five in subsets(&between, 5) {
                s.melons.push(loc(vec![u, v], five));
            }
            for two in subsets(&between, 2) {
                s.dipoles.push(loc(vec![u, v], two.clone()));
                for lu in &loops {
                    for lv in &m.self_loops(v) {
                        let mut e = two.clone();
                        e.push(*lu);
                        e.push(*lv);
                        s.dipole_tadpoles.push(loc(vec![u, v], e));
                    }
                }
            }
        }
    }
    s
}

fn is_separating(m: &FeynmanMap, l: &Location) -> bool {
    let groups = leg_components(m, &l.vertices, &l.edges);
    let legs_of = |v: usize| -> BTreeSet<usize> { legs(&[v], &l.edges).into_iter().collect() };
    let (a, b) = (legs_of(l.vertices[0]), legs_of(l.vertices[1]));
    groups.iter().any(|g| {
        let g: BTreeSet<usize> = g.iter().copied().collect();
        g == a || g == b
    })
}

/// Whether the tadpole or dipole on `verts` is part of a generalized double-tadpole,
/// generalized melon or generalized dipole-tadpole.
fn is_type_two(m: &FeynmanMap, verts: &[usize]) -> bool {
    let (r, ids) = m.contract_two_point_closure(verts);
    let loops = |u: usize| r.self_loops(u).len();
    match ids.as_slice() {
        [u] => {
            if loops(*u) >= 2 {
                return true;
            }
            (0..r.num_vertices()).any(|v| v != *u && loops(v) >= 1 && r.multiplicity(*u, v) >= 2)
        }
        [u, v] => {
            let mult = r.multiplicity(*u, *v);
            mult >= 5 || (loops(*u) >= 1 && loops(*v) >= 1) || (loops(*u) >= 2 || loops(*v) >= 2)
        }
        _ => false,
    }
}

/// Quartic rungs: two vertices joined by four edges (four legs remain).
fn quartic_rungs(m: &FeynmanMap) -> Vec<Location> {
    let nv = m.num_vertices();
    let mut out = Vec::new();
    for u in 0..nv {
        for v in u + 1..nv {
            for four in subsets(&m.edges_between(u, v), 4) {
                out.push(loc(vec![u, v], four));
            }
        }
    }
    out
}

pub fn detect_patterns(m: &FeynmanMap) -> PatternReport {
    let s = scan_shapes(m);
    let tag = |l: &Location| if is_type_two(m, &l.vertices) { PatternType::TypeII } else { PatternType::TypeI };
    PatternReport {
        tadpoles: s.tadpoles.iter().map(|l| Tagged { location: l.clone(), tag: tag(l) }).collect(),
        dipoles: s.dipoles.iter().map(|l| Tagged { location: l.clone(), tag: tag(l) }).collect(),
        dipole_tadpoles: s.dipole_tadpoles.iter().map(|l| Tagged { location: l.clone(), tag: is_separating(m, l) }).collect(),
        melons: s.melons,
        double_tadpoles: s.double_tadpoles,
        quartic_rungs: quartic_rungs(m),
    }
}

/// Removes one melon two-point function; `None` if the map has no melon.
fn remove_melon(m: &FeynmanMap) -> Option<Option<FeynmanMap>> {
    let nv = m.num_vertices();
    for u in 0..nv {
        for v in u + 1..nv {
            match m.multiplicity(u, v) {
                6 => return Some(None),
                5 => {
                    let free = |w: usize, other: usize| (6 * w..6 * w + 6).find(|&h| m.partner(h).map(|p| p / 6) != Some(other)).unwrap();
                    let (hu, hv) = (free(u, v), free(v, u));
                    let (pu, pv) = (m.partner(hu)?, m.partner(hv)?);
                    let set = BTreeSet::from([u, v]);
                    return Some(Some(m.contract_region(&set, pu, pv)));
                }
                _ => {}
            }
        }
    }
    None
}

/// Whether iterated removal of melon two-point functions ends at the ring map.
pub fn is_melonic(m: &FeynmanMap) -> bool {
    let mut cur = m.clone();
    loop {
        match remove_melon(&cur) {
            None => return false,
            Some(None) => return true,
            Some(Some(next)) => cur = next,
        }
    }
}

/// Standard maps used throughout tests and reports.
pub mod library {
    use super::FeynmanMap;

    /// Two vertices joined by six edges, position `i` to position `i`.
    pub fn closed_melon() -> FeynmanMap {
        let edges: Vec<_> = (0..6).map(|i| (i, 6 + i)).collect();
        FeynmanMap::new(2, &edges, &[], Some(0)).unwrap()
    }

    /// One vertex, legs at positions 0 (in) and `out`, remaining four paired by `loops`.
    pub fn double_tadpole(out: usize, loops: [(usize, usize); 2]) -> FeynmanMap {
        FeynmanMap::new(1, &loops, &[0, out], Some(0)).unwrap()
    }

    /// The fifteen two-point maps on one vertex.
    pub fn double_tadpoles() -> Vec<FeynmanMap> {
        let mut out = Vec::new();
        for j in 1..6 {
            let rest: Vec<usize> = (1..6).filter(|&x| x != j).collect();
            let (a, b, c, d) = (rest[0], rest[1], rest[2], rest[3]);
            for loops in [[(a, b), (c, d)], [(a, c), (b, d)], [(a, d), (b, c)]] {
                out.push(double_tadpole(j, loops));
            }
        }
        out
    }

    /// Two-point melon: leg 0 of vertex 0 is the incoming leg, vertex 1 carries
    /// the outgoing leg at position `out`, and `perm` sends positions 1..=5 of
    /// vertex 0 to the remaining positions of vertex 1 in increasing order.
    pub fn melon_two_point(out: usize, perm: &[usize]) -> FeynmanMap {
        let targets: Vec<usize> = (0..6).filter(|&x| x != out).collect();
        let edges: Vec<_> = (0..5).map(|i| (1 + i, 6 + targets[perm[i]])).collect();
        FeynmanMap::new(2, &edges, &[0, 6 + out], Some(0)).unwrap()
    }

    /// A vacuum chain of `k` vertices, each with one self-loop at positions (2, 3),
    /// consecutive vertices joined by two edges, closed cyclically. For `k = 2`
    /// this is two double-tadpole-like vertices joined by a pair of edges.
    pub fn tadpole_necklace(k: usize) -> FeynmanMap {
        let mut edges = Vec::new();
        for v in 0..k {
            edges.push((6 * v + 2, 6 * v + 3));
            let w = (v + 1) % k;
            edges.push((6 * v + 4, 6 * w));
            edges.push((6 * v + 5, 6 * w + 1));
        }
        FeynmanMap::new(k, &edges, &[], Some(0)).unwrap()
    }

    /// Two vertices, each with two self-loops, joined by two edges.
    pub fn two_double_tadpoles() -> FeynmanMap {
        FeynmanMap::new(2, &[(1, 2), (3, 4), (7, 8), (9, 10), (0, 6), (5, 11)], &[], Some(0)).unwrap()
    }

    /// A ring of `k` two-point melons: vertex `2i` sends legs 1..=5 to legs 0..=4
    /// of vertex `2i + 1`, whose leg 5 feeds leg 0 of the next melon.
    pub fn melon_chain(k: usize) -> FeynmanMap {
        let mut edges = Vec::new();
        for i in 0..k {
            let (a, b) = (12 * i, 12 * i + 6);
            edges.extend((1..6).map(|j| (a + j, b + j - 1)));
            edges.push((b + 5, 12 * ((i + 1) % k)));
        }
        FeynmanMap::new(2 * k, &edges, &[], Some(0)).unwrap()
    }

    /// A ring of `k` double-tadpoles, loops at positions (1, 2) and (3, 4),
    /// leg 5 of each vertex joined to leg 0 of the next.
    pub fn double_tadpole_chain(k: usize) -> FeynmanMap {
        let mut edges = Vec::new();
        for v in 0..k {
            edges.push((6 * v + 1, 6 * v + 2));
            edges.push((6 * v + 3, 6 * v + 4));
            edges.push((6 * v + 5, 6 * ((v + 1) % k)));
        }
        FeynmanMap::new(k, &edges, &[], Some(0)).unwrap()
    }

    /// The closed melon with one edge carrying a double-tadpole insertion.
    pub fn melon_with_double_tadpole() -> FeynmanMap {
        let mut edges: Vec<_> = (0..5).map(|i| (i, 6 + i)).collect();
        edges.extend([(5, 12), (13, 14), (15, 16), (17, 11)]);
        FeynmanMap::new(3, &edges, &[], Some(0)).unwrap()
    }

    /// The closed melon with one edge replaced by a two-point melon (four vertices).
    pub fn melon_in_melon() -> FeynmanMap {
        let mut edges: Vec<_> = (0..5).map(|i| (i, 6 + i)).collect();
        edges.push((5, 12));
        edges.extend((1..6).map(|i| (12 + i, 18 + i - 1)));
        edges.push((23, 11));
        FeynmanMap::new(4, &edges, &[], Some(0)).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::library::*;
    use super::*;

    #[test]
    fn one_vertex_vacuum_maps() {
        let e = enumerate_maps(1, MapKind::Vacuum, true, None, usize::MAX);
        assert_eq!(e.maps.len(), 15);
        assert!(!e.truncated);
        let f = enumerate_maps(1, MapKind::Vacuum, true, Some(MapFilter::NoMelonNoDoubleTadpole), usize::MAX);
        assert!(f.maps.is_empty());
    }

    #[test]
    fn two_point_melons_among_two_vertex_maps() {
        let e = enumerate_maps(2, MapKind::TwoPoint, true, None, usize::MAX);
        let melons = e.maps.iter().filter(|m| m.multiplicity(0, 1) == 5).count();
        assert_eq!(melons, 120);
        for m in &e.maps {
            m.validate().unwrap();
        }
    }

    #[test]
    fn unrooted_multiplicities_sum_to_rooted_count() {
        let rooted = enumerate_maps(2, MapKind::Vacuum, true, None, usize::MAX);
        let unrooted = enumerate_maps(2, MapKind::Vacuum, false, None, usize::MAX);
        assert_eq!(unrooted.multiplicity.iter().sum::<usize>(), rooted.maps.len());
        for (m, k) in unrooted.maps.iter().zip(&unrooted.multiplicity) {
            assert_eq!(k * m.automorphisms(), m.num_half_edges());
        }
    }

    #[test]
    fn closed_melon_patterns() {
        let r = detect_patterns(&closed_melon());
        assert_eq!(r.melons.len(), 6);
        assert!(r.double_tadpoles.is_empty());
        assert!(r.dipoles.iter().all(|d| d.tag == PatternType::TypeII));
    }

    #[test]
    fn melonic_reduction() {
        assert!(is_melonic(&closed_melon()));
        assert!(is_melonic(&melon_in_melon()));
        assert!(!is_melonic(&two_double_tadpoles()));
        assert!(!detect_patterns(&two_double_tadpoles()).double_tadpoles.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let m = melon_in_melon();
        let s = serde_json::to_string(&m).unwrap();
        let back: FeynmanMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn library_maps_are_canonical_members() {
        let e = enumerate_maps(2, MapKind::TwoPoint, true, None, usize::MAX);
        let codes: BTreeSet<Vec<u32>> = e.maps.iter().map(|m| m.rooted_code(0)).collect();
        for perm in crate::diagrams::permutations(5).iter().take(10) {
            assert!(codes.contains(&melon_two_point(3, perm).rooted_code(0)));
        }
    }
}
