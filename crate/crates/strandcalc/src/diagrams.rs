//! Pairing diagrams on `2m` labeled strand endpoints and their weighted sums.
//!
//! Endpoints `0..m` form the in side and `m..2m` the out side. Serialized
//! forms use 1-based endpoint labels.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactpoly::RatPolyN;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("endpoint {0} is out of range or covered twice")]
    BadEndpoint(usize),
    #[error("pairing does not cover all {0} endpoints")]
    Incomplete(usize),
    #[error("operator arities differ: {0} vs {1}")]
    ArityMismatch(usize, usize),
}

/// A perfect matching on `2m` endpoints, stored as a partner table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pairing {
    partner: Vec<u8>,
}

impl Pairing {
    pub fn from_pairs(m: usize, pairs: &[(usize, usize)]) -> Result<Self, DiagramError> {
        let n = 2 * m;
        let mut partner = vec![u8::MAX; n];
        for &(a, b) in pairs {
            for x in [a, b] {
                if x >= n || partner[x] != u8::MAX {
                    return Err(DiagramError::BadEndpoint(x));
                }
            }
            if a == b {
                return Err(DiagramError::BadEndpoint(a));
            }
            partner[a] = b as u8;
            partner[b] = a as u8;
        }
        if partner.contains(&u8::MAX) {
            return Err(DiagramError::Incomplete(n));
        }
        Ok(Pairing { partner })
    }

    pub fn from_partner(partner: Vec<u8>) -> Result<Self, DiagramError> {
        let n = partner.len();
        if n % 2 == 1 {
            return Err(DiagramError::Incomplete(n));
        }
        for (i, &p) in partner.iter().enumerate() {
            let p = p as usize;
            if p >= n || p == i || partner[p] as usize != i {
                return Err(DiagramError::BadEndpoint(i));
            }
        }
        Ok(Pairing { partner })
    }

    /// The crossing pairing `i -> m + sigma(i)`.
    pub fn from_permutation(sigma: &[usize]) -> Self {
        let m = sigma.len();
        let mut partner = vec![0u8; 2 * m];
        for (i, &s) in sigma.iter().enumerate() {
            partner[i] = (m + s) as u8;
            partner[m + s] = i as u8;
        }
        Pairing { partner }
    }

    pub fn identity(m: usize) -> Self {
        Pairing::from_permutation(&(0..m).collect::<Vec<_>>())
    }

    pub fn arity(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn partner(&self, x: usize) -> usize {
        self.partner[x] as usize
    }

    pub fn partners(&self) -> &[u8] {
        &self.partner
    }

    /// Pairs `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.partner.len()).filter(|&a| a < self.partner(a)).map(|a| (a, self.partner(a))).collect()
    }

    /// Swaps the in and out sides.
    pub fn transpose(&self) -> Pairing {
        let m = self.arity();
        let flip = |x: usize| if x < m { x + m } else { x - m };
        let mut partner = vec![0u8; 2 * m];
        for x in 0..2 * m {
            partner[flip(x)] = flip(self.partner(x)) as u8;
        }
        Pairing { partner }
    }

    /// Number of pairs joining two in-side endpoints.
    pub fn same_side_pairs(&self) -> usize {
        let m = self.arity();
        (0..m).filter(|&a| self.partner(a) < m && a < self.partner(a)).count()
    }

    /// Crossing permutation, when every strand crosses.
    pub fn permutation(&self) -> Option<Vec<usize>> {
        let m = self.arity();
        (0..m).map(|i| self.partner(i).checked_sub(m)).collect()
    }

    /// Number of closed cycles when in-point `i` is joined to out-point `i`.
    pub fn closure_cycles(&self) -> usize {
        let m = self.arity();
        let mut seen = vec![false; 2 * m];
        let mut cycles = 0;
        for s in 0..2 * m {
            if seen[s] {
                continue;
            }
            cycles += 1;
            let mut x = s;
            loop {
                seen[x] = true;
                let y = self.partner(x);
                seen[y] = true;
                x = if y < m { y + m } else { y - m };
                if seen[x] {
                    break;
                }
            }
        }
        cycles
    }
}

impl Serialize for Pairing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[usize; 2]> = self.pairs().into_iter().map(|(a, b)| [a + 1, b + 1]).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pairing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v: Vec<[usize; 2]> = Vec::deserialize(d)?;
        let pairs: Vec<(usize, usize)> = v
            .iter()
            .map(|p| match (p[0].checked_sub(1), p[1].checked_sub(1)) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(D::Error::custom("endpoint labels are 1-based")),
            })
            .collect::<Result<_, _>>()?;
        Pairing::from_pairs(v.len(), &pairs).map_err(D::Error::custom)
    }
}

/// Strand structure of a five-strand edge pairing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    Unbroken(Vec<usize>),
    Broken,
    DoublyBroken,
}

pub fn classify_pairing(p: &Pairing) -> EdgeClass {
    match p.same_side_pairs() {
        0 => EdgeClass::Unbroken(p.permutation().expect("all strands cross")),
        1 => EdgeClass::Broken,
        _ => EdgeClass::DoublyBroken,
    }
}

/// All `(2m-1)!!` perfect matchings on `2m` endpoints, in lexicographic order.
pub fn all_pairings(m: usize) -> Vec<Pairing> {
    fn rec(partner: &mut Vec<u8>, out: &mut Vec<Pairing>) {
        let Some(a) = partner.iter().position(|&p| p == u8::MAX) else {
            out.push(Pairing { partner: partner.clone() });
            return;
        };
        for b in a + 1..partner.len() {
            if partner[b] == u8::MAX {
                partner[a] = b as u8;
                partner[b] = a as u8;
                rec(partner, out);
                partner[a] = u8::MAX;
                partner[b] = u8::MAX;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![u8::MAX; 2 * m], &mut out);
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn sign(perm: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                s = -s;
            }
        }
    }
    s
}

/// Glues the out side of `a` onto the in side of `b`; returns the resulting
/// pairing and the number of closed loops.
pub fn glue(a: &Pairing, b: &Pairing) -> (Pairing, usize) {
    let m = a.arity();
    // Points: a-side 0..2m, b-side 2m..4m.
    let step = |x: usize| -> usize {
        if x < 2 * m {
            a.partner(x)
        } else {
            2 * m + b.partner(x - 2 * m)
        }
    };
    // Crossing the seam: a out-point m+j <-> b in-point j.
    let seam = |x: usize| -> Option<usize> {
        if (m..2 * m).contains(&x) {
            Some(2 * m + (x - m))
        } else if (2 * m..3 * m).contains(&x) {
            Some(x - 2 * m + m)
        } else {
            None
        }
    };
    let mut visited = vec![false; 4 * m];
    let mut partner = vec![0u8; 2 * m];
    let ext = |x: usize| -> usize { if x < m { x } else { x - 2 * m } };
    for s in (0..m).chain(3 * m..4 * m) {
        if visited[s] {
            continue;
        }
        let mut x = s;
        loop {
            visited[x] = true;
            let y = step(x);
            visited[y] = true;
            match seam(y) {
                Some(z) => x = z,
                None => {
                    partner[ext(s)] = ext(y) as u8;
                    partner[ext(y)] = ext(s) as u8;
                    break;
                }
            }
        }
    }
    let mut loops = 0;
    for s in m..2 * m {
        if visited[s] {
            continue;
        }
        loops += 1;
        let mut x = s;
        while !visited[x] {
            visited[x] = true;
            let y = step(x);
            visited[y] = true;
            x = seam(y).expect("closed loops stay on the seam");
        }
    }
    (Pairing { partner }, loops)
}

/// A sparse weighted sum of pairings of a fixed arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramOperator {
    arity: usize,
    terms: BTreeMap<Pairing, RatPolyN>,
}

impl DiagramOperator {
    pub fn zero(arity: usize) -> Self {
        DiagramOperator { arity, terms: BTreeMap::new() }
    }

    pub fn single(p: Pairing, w: RatPolyN) -> Self {
        let mut op = DiagramOperator::zero(p.arity());
        op.add_term(p, w);
        op
    }

    pub fn identity(m: usize) -> Self {
        DiagramOperator::single(Pairing::identity(m), RatPolyN::one())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Pairing, &RatPolyN)> {
        self.terms.iter()
    }

    pub fn weight(&self, p: &Pairing) -> Option<&RatPolyN> {
        self.terms.get(p)
    }

    /// Adds `w` to the coefficient of `p`, dropping the term if it cancels.
    pub fn add_term(&mut self, p: Pairing, w: RatPolyN) {
        assert_eq!(p.arity(), self.arity, "pairing arity");
        if w.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&p) {
            Some(old) => &old + &w,
            None => w,
        };
        if !sum.is_zero() {
            self.terms.insert(p, sum);
        }
    }

    pub fn transpose(&self) -> DiagramOperator {
        let mut out = DiagramOperator::zero(self.arity);
        for (p, w) in &self.terms {
            out.add_term(p.transpose(), w.clone());
        }
        out
    }

    pub fn scale(&self, c: &RatPolyN) -> DiagramOperator {
        let mut out = DiagramOperator::zero(self.arity);
        for (p, w) in &self.terms {
            out.add_term(p.clone(), w * c);
        }
        out
    }

    pub fn add(&self, o: &DiagramOperator) -> Result<DiagramOperator, DiagramError> {
        if self.arity != o.arity {
            return Err(DiagramError::ArityMismatch(self.arity, o.arity));
        }
        let mut out = self.clone();
        for (p, w) in &o.terms {
            out.add_term(p.clone(), w.clone());
        }
        Ok(out)
    }

    /// Distinct weights, in first-seen order, and the index of each term's weight.
    fn weight_classes(&self) -> (Vec<RatPolyN>, Vec<(&Pairing, usize)>) {
        let mut distinct: Vec<RatPolyN> = Vec::new();
        let mut index: HashMap<&RatPolyN, usize> = HashMap::new();
        let mut tagged = Vec::with_capacity(self.terms.len());
        for (p, w) in &self.terms {
            let i = *index.entry(w).or_insert_with(|| {
                distinct.push(w.clone());
                distinct.len() - 1
            });
            tagged.push((p, i));
        }
        (distinct, tagged)
    }

    /// Diagrammatic product: the out side of `self` glued to the in side of `o`.
    pub fn compose(&self, o: &DiagramOperator) -> Result<DiagramOperator, DiagramError> {
        if self.arity != o.arity {
            return Err(DiagramError::ArityMismatch(self.arity, o.arity));
        }
        let (wa, ta) = self.weight_classes();
        let (wb, tb) = o.weight_classes();
        // Tally (weight class of a, weight class of b, loops) per result pairing.
        let mut tally: BTreeMap<Pairing, HashMap<(usize, usize, usize), i64>> = BTreeMap::new();
        for &(p, i) in &ta {
            for &(r, j) in &tb {
                let (g, loops) = glue(p, r);
                *tally.entry(g).or_default().entry((i, j, loops)).or_insert(0) += 1;
            }
        }
        let mut out = DiagramOperator::zero(self.arity);
        for (g, counts) in tally {
            let mut w = RatPolyN::zero();
            for ((i, j, loops), c) in counts {
                let t = &(&wa[i] * &wb[j]) * &(&RatPolyN::int(c) * &RatPolyN::n_pow(loops as i64));
                w = &w + &t;
            }
            out.add_term(g, w);
        }
        Ok(out)
    }

    /// Closes in-point `i` onto out-point `i` and sums the weighted loop powers.
    pub fn trace_close(&self) -> RatPolyN {
        let mut acc = RatPolyN::zero();
        for (p, w) in &self.terms {
            acc = &acc + &(w * &RatPolyN::n_pow(p.closure_cycles() as i64));
        }
        acc
    }

    /// Collects the terms into a new operator, validating arity.
    pub fn from_terms(arity: usize, terms: Vec<(Pairing, RatPolyN)>) -> Result<Self, DiagramError> {
        let mut out = DiagramOperator::zero(arity);
        for (p, w) in terms {
            if p.arity() != arity {
                return Err(DiagramError::ArityMismatch(arity, p.arity()));
            }
            out.add_term(p, w);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    pairing: Pairing,
    weight: RatPolyN,
}

impl Serialize for DiagramOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<TermRepr> = self.terms.iter().map(|(p, w)| TermRepr { pairing: p.clone(), weight: w.clone() }).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiagramOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let v: Vec<TermRepr> = Vec::deserialize(d)?;
        let arity = v.first().map_or(5, |t| t.pairing.arity());
        DiagramOperator::from_terms(arity, v.into_iter().map(|t| (t.pairing, t.weight)).collect()).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_of_edge_pairings() {
        let all = all_pairings(5);
        assert_eq!(all.len(), 945);
        let mut counts = [0usize; 3];
        for p in &all {
            counts[match classify_pairing(p) {
                EdgeClass::Unbroken(_) => 0,
                EdgeClass::Broken => 1,
                EdgeClass::DoublyBroken => 2,
            }] += 1;
        }
        assert_eq!(counts, [120, 600, 225]);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_pairing(&Pairing::identity(5)), EdgeClass::Unbroken(vec![0, 1, 2, 3, 4]));
        let broken = Pairing::from_pairs(5, &[(0, 1), (5, 6), (2, 7), (3, 8), (4, 9)]).unwrap();
        assert_eq!(classify_pairing(&broken), EdgeClass::Broken);
    }

    #[test]
    fn gluing_permutations_composes_them() {
        let s = [1, 2, 0, 4, 3];
        let t = [4, 0, 3, 1, 2];
        let (g, loops) = glue(&Pairing::from_permutation(&s), &Pairing::from_permutation(&t));
        let ts: Vec<usize> = (0..5).map(|i| t[s[i]]).collect();
        assert_eq!(loops, 0);
        assert_eq!(g, Pairing::from_permutation(&ts));
    }

    #[test]
    fn traces_count_cycles() {
        assert_eq!(DiagramOperator::identity(5).trace_close(), RatPolyN::n_pow(5));
        let db = Pairing::from_pairs(5, &[(0, 1), (2, 3), (5, 6), (7, 8), (4, 9)]).unwrap();
        assert_eq!(db.closure_cycles(), 3);
    }

    #[test]
    fn identity_is_neutral() {
        let x = DiagramOperator::single(Pairing::from_permutation(&[1, 0, 2, 3, 4]), RatPolyN::n_plus(1));
        assert_eq!(DiagramOperator::identity(5).compose(&x).unwrap(), x);
        assert_eq!(x.compose(&DiagramOperator::identity(5)).unwrap(), x);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let e = DiagramOperator::identity(5).compose(&DiagramOperator::identity(3));
        assert_eq!(e, Err(DiagramError::ArityMismatch(5, 3)));
    }

    #[test]
    fn pairing_json_is_one_based() {
        let p = Pairing::identity(5);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1,6],[2,7],[3,8],[4,9],[5,10]]");
        assert_eq!(serde_json::from_str::<Pairing>(&s).unwrap(), p);
    }
}
