//! Exact amplitudes of Feynman maps by frontier contraction over pairing diagrams.
//!
//! Strand endpoint `5h + k` is slot `k` of half-edge `h`. Vertices are absorbed
//! lazily; each edge is contracted once both ends are present. The frontier maps
//! matchings of the open endpoints to integer polynomials in `N`, after every
//! operator weight has been scaled to an integer polynomial.

use rustc_hash::FxHashMap as HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagrams::{DiagramOperator, Pairing};
use crate::exactpoly::{QPoly, RatPolyN};
use crate::maps::FeynmanMap;
use crate::projectors::VertexKernel;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmplitudeError {
    #[error("frontier grew to {states} states (budget {budget}) with elimination order {order:?}")]
    Budget { states: usize, budget: usize, order: Vec<usize> },
    #[error("operator arity {0} is not 5")]
    Arity(usize),
    #[error("map must be vacuum or two-point, found {0} external legs")]
    Externals(usize),
    #[error("elimination order is not a permutation of the {0} edges")]
    BadOrder(usize),
    #[error("two-point amplitude is not proportional to the projector: {0}")]
    NotProportional(String),
    #[error("projector has zero trace")]
    ZeroTrace,
}

/// Default cap on the number of simultaneous frontier states.
pub const DEFAULT_MAX_STATES: usize = 4_000_000;

/// Reads the state cap from `STRANDCALC_MAX_STATES`, falling back to the default.
pub fn max_states_from_env() -> usize {
    std::env::var("STRANDCALC_MAX_STATES").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_MAX_STATES)
}

/// An operator whose weights are `scaled[i] / denom`, with integer polynomials `scaled[i]`.
#[derive(Clone, Debug)]
pub struct ScaledOperator {
    pub terms: Vec<(Pairing, Vec<BigInt>)>,
    pub denom: QPoly,
}

pub fn scale_operator(op: &DiagramOperator) -> ScaledOperator {
    let mut d = QPoly::constant(One::one());
    for (_, w) in op.terms() {
        d = QPoly::lcm(&d, w.denominator());
    }
    let polys: Vec<(Pairing, QPoly)> = op
        .terms()
        .map(|(p, w)| {
            let (cof, _) = d.div_rem(w.denominator());
            (p.clone(), w.numerator() * &cof)
        })
        .collect();
    let l = polys.iter().fold(BigInt::one(), |acc, (_, q)| num_integer::lcm(acc, q.denominator_lcm()));
    let lq = num_rational::BigRational::from_integer(l);
    let terms = polys.into_iter().map(|(p, q)| (p, q.scale(&lq).to_bigints().expect("integral after scaling"))).collect();
    ScaledOperator { terms, denom: d.scale(&lq) }
}

trait Coef: Clone + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    /// `acc += a * b`; `false` on overflow.
    fn mul_add(acc: &mut Self, a: &Self, b: &Self) -> bool;
    fn neg(&self) -> Self;
}

impl Coef for i128 {
    fn neg(&self) -> Self {
        -self
    }
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn mul_add(acc: &mut Self, a: &Self, b: &Self) -> bool {
        match a.checked_mul(*b).and_then(|p| acc.checked_add(p)) {
            Some(v) => {
                *acc = v;
                true
            }
            None => false,
        }
    }
}

impl Coef for BigInt {
    fn neg(&self) -> Self {
        -self
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn mul_add(acc: &mut Self, a: &Self, b: &Self) -> bool {
        *acc += a * b;
        true
    }
}

/// `acc += a * b * N^shift`; `false` on overflow.
fn poly_mul_add<C: Coef>(acc: &mut Vec<C>, a: &[C], b: &[C], shift: usize) -> bool {
    if a.is_empty() || b.is_empty() {
        return true;
    }
    let need = a.len() + b.len() - 1 + shift;
    if acc.len() < need {
        acc.resize(need, C::zero());
    }
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !C::mul_add(&mut acc[i + j + shift], x, y) {
                return false;
            }
        }
    }
    true
}

fn trim<C: Coef>(p: &mut Vec<C>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub(crate) const OUT: u8 = u8::MAX;

/// A contraction problem: vertices with the kernel, and oriented edges each
/// carrying one of several operators. Edge `(a, b)` puts the operator's in side
/// on half-edge `a` and its out side on half-edge `b`.
#[derive(Clone, Debug)]
pub struct Network {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub op_of_edge: Vec<usize>,
}

impl Network {
    pub fn from_map(m: &FeynmanMap) -> Result<Network, AmplitudeError> {
        if !m.externals().is_empty() {
            return Err(AmplitudeError::Externals(m.externals().len()));
        }
        let edges = m.edges();
        let k = edges.len();
        Ok(Network { vertices: m.num_vertices(), edges, op_of_edge: vec![0; k] })
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Step {
    Absorb(usize),
    Edge(usize),
}

/// Greedy order: next edge minimizing the peak, then resulting, open endpoint count.
pub fn greedy_order(net: &Network) -> Vec<usize> {
    let mut absorbed = vec![false; net.vertices];
    let mut done = vec![false; net.edges.len()];
    let mut open = 0i64;
    let mut order = Vec::with_capacity(net.edges.len());
    for _ in 0..net.edges.len() {
        let mut best: Option<((i64, i64, usize), usize)> = None;
        for (i, &(a, b)) in net.edges.iter().enumerate() {
            if done[i] {
                continue;
            }
            let mut fresh = vec![a / 6];
            if b / 6 != a / 6 {
                fresh.push(b / 6);
            }
            let new = fresh.iter().filter(|&&v| !absorbed[v]).count() as i64;
            let peak = open + 30 * new;
            let key = (peak, peak - 10, i);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, i));
            }
        }
        let (_, i) = best.expect("edges remain");
        let (a, b) = net.edges[i];
        for v in [a / 6, b / 6] {
            if !absorbed[v] {
                absorbed[v] = true;
                open += 30;
            }
        }
        open -= 10;
        done[i] = true;
        order.push(i);
    }
    order
}

pub(crate) fn plan(net: &Network, order: &[usize]) -> Vec<Step> {
    let mut absorbed = vec![false; net.vertices];
    let mut steps = Vec::new();
    for &i in order {
        let (a, b) = net.edges[i];
        for v in [a / 6, b / 6] {
            if !absorbed[v] {
                absorbed[v] = true;
                steps.push(Step::Absorb(v));
            }
        }
        steps.push(Step::Edge(i));
    }
    for (v, &a) in absorbed.iter().enumerate() {
        if !a {
            steps.push(Step::Absorb(v));
        }
    }
    steps
}

/// Sum over operator terms for one local pattern of the ten contracted endpoints.
type PatternResult<C> = Vec<(Vec<u8>, Vec<C>)>;

/// Glues one operator term onto the ten local endpoints described by `key`
/// (partner among the ten, or `OUT`). Returns the induced matching of the
/// outgoing endpoints (indexed in order) and the number of closed loops.
pub(crate) fn glue_local(key: &[u8; 10], p: &[u8]) -> (Vec<u8>, usize) {
    let outs: Vec<usize> = (0..10).filter(|&j| key[j] == OUT).collect();
    let mut out_index = [OUT; 10];
    for (i, &o) in outs.iter().enumerate() {
        out_index[o] = i as u8;
    }
    let mut visited = [false; 10];
    let mut res = vec![0u8; outs.len()];
    for &o in &outs {
        if visited[o] {
            continue;
        }
        let mut x = o;
        visited[x] = true;
        loop {
            let y = p[x] as usize;
            visited[y] = true;
            if key[y] == OUT {
                res[out_index[o] as usize] = out_index[y];
                res[out_index[y] as usize] = out_index[o];
                break;
            }
            x = key[y] as usize;
            visited[x] = true;
        }
    }
    let mut loops = 0;
    for s in 0..10 {
        if visited[s] {
            continue;
        }
        loops += 1;
        let mut x = s;
        loop {
            visited[x] = true;
            let y = p[x] as usize;
            visited[y] = true;
            x = key[y] as usize;
            if visited[x] {
                break;
            }
        }
    }
    (res, loops)
}

fn pattern_result<C: Coef>(key: &[u8; 10], terms: &[(Vec<u8>, Vec<C>)]) -> PatternResult<C> {
    let mut acc: HashMap<Vec<u8>, Vec<C>> = HashMap::default();
    let one = C::from_big(&BigInt::one()).expect("one fits");
    for (p, w) in terms {
        let (res, loops) = glue_local(key, p);
        let entry = acc.entry(res).or_default();
        let shifted: Vec<C> = std::iter::repeat_n(C::zero(), loops).chain(w.iter().cloned()).collect();
        poly_mul_add(entry, &shifted, std::slice::from_ref(&one), 0);
    }
    let mut v: Vec<(Vec<u8>, Vec<C>)> = acc
        .into_iter()
        .filter_map(|(k, mut w)| {
            trim(&mut w);
            (!w.is_empty()).then_some((k, w))
        })
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

enum Abort {
    Overflow,
    Budget(usize),
}

struct Outcome {
    poly: Vec<BigInt>,
    peak_states: usize,
}

/// Relabels the slots inside each block of five so that the matching depends only
/// on how many strands join each pair of blocks. Returns the sign picked up on
/// blocks of character `-1`, or `None` when such a block holds an internal strand.
fn canonicalize(k: &[u8], chars: &[i8]) -> Option<(Vec<u8>, bool)> {
    let blocks = k.len() / 5;
    let mut perm = vec![0u8; k.len()];
    let mut odd = false;
    for b in 0..blocks {
        let mut keyed: [(usize, usize, u8, usize); 5] = [(0, 0, 0, 0); 5];
        for (j, slot) in keyed.iter_mut().enumerate() {
            let s = 5 * b + j;
            let t = k[s] as usize;
            let c = t / 5;
            *slot = if c == b {
                if chars[b] < 0 {
                    return None;
                }
                (c, s.min(t), (s > t) as u8, j)
            } else if b < c {
                (c, s, 0, j)
            } else {
                (c, t, 0, j)
            };
        }
        keyed.sort_unstable();
        for (r, &(_, _, _, j)) in keyed.iter().enumerate() {
            perm[5 * b + j] = (5 * b + r) as u8;
        }
        if chars[b] < 0 {
            let mut inv = 0;
            for x in 0..5 {
                for y in x + 1..5 {
                    inv += (keyed[x].3 > keyed[y].3) as usize;
                }
            }
            odd ^= inv % 2 == 1;
        }
    }
    let mut out = vec![0u8; k.len()];
    for (s, &t) in k.iter().enumerate() {
        out[perm[s] as usize] = perm[t as usize];
    }
    Some((out, odd))
}

fn run<C: Coef>(net: &Network, ops: &[ScaledOperator], vertex: &VertexKernel, steps: &[Step], budget: usize, chars: Option<&[i8]>) -> Result<Outcome, Abort> {
    let terms: Vec<Vec<(Vec<u8>, Vec<C>)>> = ops
        .iter()
        .map(|op| {
            op.terms
                .iter()
                .map(|(p, w)| {
                    let ws = w.iter().map(C::from_big).collect::<Option<Vec<C>>>().ok_or(Abort::Overflow)?;
                    Ok((p.partners().to_vec(), ws))
                })
                .collect::<Result<Vec<_>, Abort>>()
        })
        .collect::<Result<_, _>>()?;
    let mut caches: Vec<HashMap<[u8; 10], PatternResult<C>>> = vec![HashMap::default(); ops.len()];
    let one = C::from_big(&BigInt::one()).ok_or(Abort::Overflow)?;
    let mut open: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u8>, Vec<C>> = HashMap::from_iter([(Vec::new(), vec![one.clone()])]);
    let mut peak = 1;
    for step in steps {
        match *step {
            Step::Absorb(v) => {
                let base = open.len();
                open.extend((0..30).map(|s| 30 * v + s));
                let ext: Vec<u8> = (0..30).map(|s| (base + vertex.corner(s)) as u8).collect();
                let mut next: HashMap<Vec<u8>, Vec<C>> = HashMap::default();
                let block_chars: Option<Vec<i8>> = chars.map(|c| (0..open.len() / 5).map(|b| c[open[5 * b] / 5]).collect());
                for (mut k, w) in states {
                    k.extend_from_slice(&ext);
                    match &block_chars {
                        None => {
                            next.insert(k, w);
                        }
                        Some(bc) => {
                            if let Some((ck, odd)) = canonicalize(&k, bc) {
                                let w = if odd { w.iter().map(C::neg).collect() } else { w };
                                let entry = next.entry(ck).or_default();
                                if !poly_mul_add(entry, &w, std::slice::from_ref(&one), 0) {
                                    return Err(Abort::Overflow);
                                }
                            }
                        }
                    }
                }
                next.retain(|_, w| {
                    trim(w);
                    !w.is_empty()
                });
                states = next;
            }
            Step::Edge(e) => {
                let (a, b) = net.edges[e];
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
                let cache = &mut caches[net.op_of_edge[e]];
                let op_terms = &terms[net.op_of_edge[e]];
                let block_chars: Option<Vec<i8>> = chars.map(|c| {
                    (0..open.len() / 5).filter(|&b| local_of[5 * b] == OUT).map(|b| c[open[5 * b] / 5]).collect()
                });
                let mut next: HashMap<Vec<u8>, Vec<C>> = HashMap::default();
                for (k, w) in states {
                    let mut w_neg: Option<Vec<C>> = None;
                    let key: [u8; 10] = std::array::from_fn(|j| {
                        let q = k[local[j]] as usize;
                        local_of[q]
                    });
                    let res = cache.entry(key).or_insert_with(|| pattern_result(&key, op_terms));
                    let targets: Vec<usize> = (0..10).filter(|&j| key[j] == OUT).map(|j| k[local[j]] as usize).collect();
                    let mut base: Vec<u8> = vec![0; nxt];
                    for (p, &r) in reindex.iter().enumerate() {
                        if r != usize::MAX {
                            base[r] = reindex[k[p] as usize].min(255) as u8;
                        }
                    }
                    for (pairing, pw) in res.iter() {
                        let mut nk = base.clone();
                        for (i, &t) in targets.iter().enumerate() {
                            nk[reindex[t]] = reindex[targets[pairing[i] as usize]] as u8;
                        }
                        let (nk, odd) = match &block_chars {
                            None => (nk, false),
                            Some(bc) => match canonicalize(&nk, bc) {
                                Some(r) => r,
                                None => continue,
                            },
                        };
                        let ws: &[C] = if odd { w_neg.get_or_insert_with(|| w.iter().map(C::neg).collect()) } else { &w };
                        let entry = next.entry(nk).or_default();
                        if !poly_mul_add(entry, ws, pw, 0) {
                            return Err(Abort::Overflow);
                        }
                    }
                    if next.len() > budget {
                        return Err(Abort::Budget(next.len()));
                    }
                }
                next.retain(|_, w| {
                    trim(w);
                    !w.is_empty()
                });
                peak = peak.max(next.len());
                states = next;
                open = open.into_iter().enumerate().filter(|(p, _)| local_of[*p] == OUT).map(|(_, g)| g).collect();
            }
        }
    }
    let poly = states.remove(&Vec::new()).unwrap_or_default();
    Ok(Outcome { poly: poly.iter().map(C::to_big).collect(), peak_states: peak })
}

/// Index of the pair `{i, j}` of blocks in a packed upper triangle.
pub(crate) fn tri(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Block-pair additions produced by one edge for a local pattern, with labels
/// naming the partner block of each outgoing endpoint.
type LabelResult<C> = Vec<(Vec<(u8, u8)>, Vec<C>)>;

fn label_result<C: Coef>(key: &[u8; 10], labels: &[u8; 10], terms: &[(Vec<u8>, Vec<C>)]) -> Result<LabelResult<C>, Abort> {
    let outs: Vec<usize> = (0..10).filter(|&j| key[j] == OUT).collect();
    let one = C::from_big(&BigInt::one()).ok_or(Abort::Overflow)?;
    let mut acc: HashMap<Vec<(u8, u8)>, Vec<C>> = HashMap::default();
    for (pairing, w) in pattern_result(key, terms) {
        let mut adds: Vec<(u8, u8)> = Vec::new();
        for (i, &t) in pairing.iter().enumerate() {
            if i < t as usize {
                let (x, y) = (labels[outs[i]], labels[outs[t as usize]]);
                adds.push((x.min(y), x.max(y)));
            }
        }
        adds.sort_unstable();
        if !poly_mul_add(acc.entry(adds).or_default(), &w, std::slice::from_ref(&one), 0) {
            return Err(Abort::Overflow);
        }
    }
    let mut v: LabelResult<C> = acc
        .into_iter()
        .filter_map(|(k, mut w)| {
            trim(&mut w);
            (!w.is_empty()).then_some((k, w))
        })
        .collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(v)
}

/// Frontier contraction when every half-edge sees a permutation-invariant
/// operator side: a state is then the symmetric matrix of strand counts between
/// open half-edges.
fn run_counts<C: Coef>(net: &Network, ops: &[ScaledOperator], vertex: &VertexKernel, steps: &[Step], budget: usize) -> Result<Outcome, Abort> {
    let terms: Vec<Vec<(Vec<u8>, Vec<C>)>> = ops
        .iter()
        .map(|op| {
            op.terms
                .iter()
                .map(|(p, w)| {
                    let ws = w.iter().map(C::from_big).collect::<Option<Vec<C>>>().ok_or(Abort::Overflow)?;
                    Ok((p.partners().to_vec(), ws))
                })
                .collect::<Result<Vec<_>, Abort>>()
        })
        .collect::<Result<_, _>>()?;
    let mut caches: Vec<HashMap<([u8; 10], [u8; 10]), LabelResult<C>>> = vec![HashMap::default(); ops.len()];
    let one = C::from_big(&BigInt::one()).ok_or(Abort::Overflow)?;
    let mut blocks: Vec<usize> = Vec::new();
    let mut states: HashMap<Vec<u8>, Vec<C>> = HashMap::from_iter([(Vec::new(), vec![one.clone()])]);
    let mut peak = 1;
    let mut corner_counts = [[0u8; 6]; 6];
    for s in 0..30 {
        corner_counts[s / 5][vertex.corner(s) / 5] += 1;
    }
    for step in steps {
        match *step {
            Step::Absorb(v) => {
                let base = blocks.len();
                blocks.extend(6 * v..6 * v + 6);
                let size = tri(0, blocks.len());
                let mut next: HashMap<Vec<u8>, Vec<C>> = HashMap::with_capacity_and_hasher(states.len(), Default::default());
                for (mut k, w) in states {
                    k.resize(size, 0);
                    for i in 0..6 {
                        for j in i..6 {
                            let c = if i == j { corner_counts[i][i] / 2 } else { corner_counts[i][j] };
                            k[tri(base + i, base + j)] += c;
                        }
                    }
                    next.insert(k, w);
                }
                states = next;
            }
            Step::Edge(e) => {
                let (a, b) = net.edges[e];
                let pa = blocks.iter().position(|&x| x == a).expect("half-edge is open");
                let pb = blocks.iter().position(|&x| x == b).expect("half-edge is open");
                let nb = blocks.len();
                let keep: Vec<usize> = (0..nb).filter(|&x| x != pa && x != pb).collect();
                let cache = &mut caches[net.op_of_edge[e]];
                let op_terms = &terms[net.op_of_edge[e]];
                let mut next: HashMap<Vec<u8>, Vec<C>> = HashMap::default();
                for (k, w) in states {
                    let mut key = [OUT; 10];
                    let mut labels = [OUT; 10];
                    let mut partners: Vec<usize> = Vec::new();
                    let (ia, ib) = (k[tri(pa, pa)] as usize, k[tri(pb, pb)] as usize);
                    let cross = k[tri(pa, pb)] as usize;
                    for i in 0..ia {
                        key[2 * i] = (2 * i + 1) as u8;
                        key[2 * i + 1] = (2 * i) as u8;
                    }
                    for i in 0..ib {
                        key[5 + 2 * i] = (5 + 2 * i + 1) as u8;
                        key[5 + 2 * i + 1] = (5 + 2 * i) as u8;
                    }
                    for i in 0..cross {
                        key[2 * ia + i] = (5 + 2 * ib + i) as u8;
                        key[5 + 2 * ib + i] = (2 * ia + i) as u8;
                    }
                    for (side, p, start) in [(0usize, pa, 2 * ia + cross), (5, pb, 2 * ib + cross)] {
                        let mut slot = side + start;
                        for &j in &keep {
                            let c = k[tri(p, j)];
                            if c == 0 {
                                continue;
                            }
                            let lab = match partners.iter().position(|&x| x == j) {
                                Some(l) => l,
                                None => {
                                    partners.push(j);
                                    partners.len() - 1
                                }
                            };
                            for _ in 0..c {
                                labels[slot] = lab as u8;
                                slot += 1;
                            }
                        }
                    }
                    let res = match cache.get(&(key, labels)) {
                        Some(r) => r,
                        None => {
                            let r = label_result(&key, &labels, op_terms)?;
                            cache.entry((key, labels)).or_insert(r)
                        }
                    };
                    let mut base: Vec<u8> = vec![0; tri(0, keep.len())];
                    for (x, &i) in keep.iter().enumerate() {
                        for (y, &j) in keep.iter().enumerate().skip(x) {
                            base[tri(x, y)] = k[tri(i, j)];
                        }
                    }
                    let local: Vec<usize> = partners.iter().map(|&j| keep.iter().position(|&x| x == j).expect("kept")).collect();
                    for (adds, pw) in res.iter() {
                        let mut nk = base.clone();
                        for &(x, y) in adds {
                            nk[tri(local[x as usize], local[y as usize])] += 1;
                        }
                        if !poly_mul_add(next.entry(nk).or_default(), &w, pw, 0) {
                            return Err(Abort::Overflow);
                        }
                    }
                    if next.len() > budget {
                        return Err(Abort::Budget(next.len()));
                    }
                }
                next.retain(|_, w| {
                    trim(w);
                    !w.is_empty()
                });
                peak = peak.max(next.len());
                states = next;
                blocks = keep.iter().map(|&x| blocks[x]).collect();
            }
        }
    }
    let poly = states.remove(&Vec::new()).unwrap_or_default();
    Ok(Outcome { poly: poly.iter().map(C::to_big).collect(), peak_states: peak })
}

/// The factor `c` with `op(tau . p) = c op(p)` for every transposition `tau` of
/// adjacent slots on one side (`0` in, `1` out), if such a factor exists.
pub fn slot_character(op: &DiagramOperator, side: usize) -> Option<i8> {
    let m = op.arity();
    let mut found: Option<i8> = None;
    for i in 0..m.saturating_sub(1) {
        let (x, y) = (side * m + i, side * m + i + 1);
        let swap = |s: usize| if s == x { y } else if s == y { x } else { s };
        let mut c: Option<i8> = None;
        for (p, w) in op.terms() {
            let pairs: Vec<(usize, usize)> = p.pairs().into_iter().map(|(a, b)| (swap(a), swap(b))).collect();
            let q = Pairing::from_pairs(m, &pairs).ok()?;
            let wq = op.weight(&q)?;
            let this = if wq == w {
                1
            } else if &(wq + w) == &RatPolyN::zero() {
                -1
            } else {
                return None;
            };
            if *c.get_or_insert(this) != this {
                return None;
            }
        }
        let c = c?;
        if *found.get_or_insert(c) != c {
            return None;
        }
    }
    found
}

/// Character of the operator side met by each half-edge, when all are covariant.
fn half_edge_characters(net: &Network, ops: &[&DiagramOperator]) -> Option<Vec<i8>> {
    let sides: Vec<[i8; 2]> = ops.iter().map(|o| Some([slot_character(o, 0)?, slot_character(o, 1)?])).collect::<Option<_>>()?;
    let mut chars = vec![0i8; 6 * net.vertices];
    for (e, &(a, b)) in net.edges.iter().enumerate() {
        let s = sides[net.op_of_edge[e]];
        chars[a] = s[0];
        chars[b] = s[1];
    }
    Some(chars)
}

/// Options for a contraction.
#[derive(Clone, Debug)]
pub struct ContractOptions {
    /// Explicit edge order (indices into the network's edges); greedy if absent.
    pub order: Option<Vec<usize>>,
    pub max_states: usize,
    /// Merge frontier states related by slot relabelings inside a half-edge,
    /// when every operator is covariant under them.
    pub use_symmetry: bool,
}

impl Default for ContractOptions {
    fn default() -> Self {
        ContractOptions { order: None, max_states: max_states_from_env(), use_symmetry: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractStats {
    pub order: Vec<usize>,
    pub peak_states: usize,
}

/// Sums `prod(weights) N^F N^{-5V}` over all stranded configurations of the network.
pub fn contract_network(net: &Network, ops: &[&DiagramOperator], vertex: &VertexKernel, opts: &ContractOptions) -> Result<(RatPolyN, ContractStats), AmplitudeError> {
    for op in ops {
        if op.arity() != 5 {
            return Err(AmplitudeError::Arity(op.arity()));
        }
    }
    let order = match &opts.order {
        Some(o) => {
            let mut s = o.clone();
            s.sort_unstable();
            if s != (0..net.edges.len()).collect::<Vec<_>>() {
                return Err(AmplitudeError::BadOrder(net.edges.len()));
            }
            o.clone()
        }
        None => greedy_order(net),
    };
    let scaled: Vec<ScaledOperator> = ops.iter().map(|o| scale_operator(o)).collect();
    let steps = plan(net, &order);
    let chars: Option<Vec<i8>> = if opts.use_symmetry { half_edge_characters(net, ops) } else { None };
    let chars = chars.as_deref();
    let counts = chars.is_some_and(|c| c.iter().all(|&x| x == 1));
    let attempt = |big: bool| match (counts, big) {
        (true, false) => run_counts::<i128>(net, &scaled, vertex, &steps, opts.max_states),
        (true, true) => run_counts::<BigInt>(net, &scaled, vertex, &steps, opts.max_states),
        (false, false) => run::<i128>(net, &scaled, vertex, &steps, opts.max_states, chars),
        (false, true) => run::<BigInt>(net, &scaled, vertex, &steps, opts.max_states, chars),
    };
    let outcome = match attempt(false) {
        Ok(o) => Ok(o),
        Err(Abort::Overflow) => attempt(true),
        Err(e) => Err(e),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(Abort::Budget(states)) => return Err(AmplitudeError::Budget { states, budget: opts.max_states, order }),
        Err(Abort::Overflow) => unreachable!("arbitrary precision cannot overflow"),
    };
    let mut den = QPoly::constant(One::one());
    for &i in &net.op_of_edge {
        den = &den * &scaled[i].denom;
    }
    let num = QPoly::from_bigints(&outcome.poly);
    let value = &RatPolyN::new(num, den).expect("nonzero denominator") * &RatPolyN::n_pow(-5 * net.vertices as i64);
    Ok((value, ContractStats { order, peak_states: outcome.peak_states }))
}

/// Exact sum over stranded configurations of a vacuum map with propagator `p`.
pub fn contract_map(m: &FeynmanMap, p: &DiagramOperator, vertex: &VertexKernel) -> Result<RatPolyN, AmplitudeError> {
    contract_map_with(m, p, vertex, &ContractOptions::default()).map(|r| r.0)
}

pub fn contract_map_with(m: &FeynmanMap, p: &DiagramOperator, vertex: &VertexKernel, opts: &ContractOptions) -> Result<(RatPolyN, ContractStats), AmplitudeError> {
    if m.num_vertices() == 0 {
        return Ok((p.trace_close(), ContractStats { order: vec![], peak_states: 1 }));
    }
    contract_network(&Network::from_map(m)?, &[p], vertex, opts)
}

/// Largest power of `N` in the amplitude of a vacuum map (`None` if it vanishes).
pub fn leading_power(m: &FeynmanMap, p: &DiagramOperator, vertex: &VertexKernel) -> Result<Option<i64>, AmplitudeError> {
    Ok(contract_map(m, p, vertex)?.leading_power())
}

/// Network closing a two-point map: its edges carry operator 0, and the closing
/// edge from the outgoing leg back to the incoming leg carries operator 1.
pub fn closure_network(m: &FeynmanMap) -> Result<Network, AmplitudeError> {
    let [ext_in, ext_out] = m.externals() else { return Err(AmplitudeError::Externals(m.externals().len())) };
    let mut edges = m.edges();
    let mut op_of_edge = vec![0; edges.len()];
    edges.push((*ext_out, *ext_in));
    op_of_edge.push(1);
    Ok(Network { vertices: m.num_vertices(), edges, op_of_edge })
}

/// Closes two-point maps through a fixed projector `P` and a test operator `P X P`.
#[derive(Clone, Debug)]
pub struct TwoPointCloser {
    p: DiagramOperator,
    pxp: DiagramOperator,
    trace: RatPolyN,
    trace_pxp: RatPolyN,
}

impl TwoPointCloser {
    pub fn new(p: &DiagramOperator) -> Result<Self, AmplitudeError> {
        let trace = p.trace_close();
        if trace.is_zero() {
            return Err(AmplitudeError::ZeroTrace);
        }
        let x = DiagramOperator::single(Pairing::from_permutation(&[1, 2, 0, 3, 4]), RatPolyN::one());
        let pxp = p.compose(&x).and_then(|px| px.compose(p)).map_err(|e| AmplitudeError::NotProportional(e.to_string()))?;
        let trace_pxp = pxp.trace_close();
        Ok(TwoPointCloser { p: p.clone(), pxp, trace, trace_pxp })
    }

    /// The scalar `f` with `A = f P` for a non-amputated two-point map, checked
    /// against the second closure.
    pub fn scalar(&self, m: &FeynmanMap, vertex: &VertexKernel, opts: &ContractOptions) -> Result<RatPolyN, AmplitudeError> {
        let net = closure_network(m)?;
        let (z, _) = contract_network(&net, &[&self.p, &self.p], vertex, opts)?;
        let f = &z / &self.trace;
        let (zx, _) = contract_network(&net, &[&self.p, &self.pxp], vertex, opts)?;
        let expected = &f * &self.trace_pxp;
        if zx != expected {
            return Err(AmplitudeError::NotProportional(format!("closure through test operator gives {zx}, expected {expected}")));
        }
        Ok(f)
    }
}

pub fn two_point_scalar(m: &FeynmanMap, p: &DiagramOperator, vertex: &VertexKernel) -> Result<RatPolyN, AmplitudeError> {
    two_point_scalar_with(m, p, vertex, &ContractOptions::default())
}

pub fn two_point_scalar_with(m: &FeynmanMap, p: &DiagramOperator, vertex: &VertexKernel, opts: &ContractOptions) -> Result<RatPolyN, AmplitudeError> {
    TwoPointCloser::new(p)?.scalar(m, vertex, opts)
}
