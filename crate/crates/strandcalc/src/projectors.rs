//! The antisymmetric and symmetric traceless projectors, and the sextic vertex kernels.

use serde::{Deserialize, Serialize};

use crate::diagrams::{all_pairings, classify_pairing, permutations, sign, DiagramOperator, EdgeClass, Pairing};
use crate::exactpoly::{q, RatPolyN};

/// Irreducible representations with an explicit projector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rep {
    A,
    S,
}

impl Rep {
    pub fn projector(self) -> DiagramOperator {
        match self {
            Rep::A => build_antisymmetric(),
            Rep::S => build_symmetric_traceless(),
        }
    }
}

impl std::str::FromStr for Rep {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(Rep::A),
            "S" | "s" => Ok(Rep::S),
            _ => Err(format!("unknown representation {s:?} (expected A or S)")),
        }
    }
}

pub fn build_antisymmetric() -> DiagramOperator {
    let mut op = DiagramOperator::zero(5);
    for sigma in permutations(5) {
        let w = RatPolyN::constant(q(sign(&sigma), 120));
        op.add_term(Pairing::from_permutation(&sigma), w);
    }
    op
}

pub fn build_symmetric_traceless() -> DiagramOperator {
    let unbroken = RatPolyN::constant(q(1, 120));
    let broken = &RatPolyN::constant(q(-2, 120)) / &RatPolyN::n_plus(6);
    let doubly = &RatPolyN::constant(q(8, 120)) / &(&RatPolyN::n_plus(4) * &RatPolyN::n_plus(6));
    let mut op = DiagramOperator::zero(5);
    for p in all_pairings(5) {
        let w = match classify_pairing(&p) {
            EdgeClass::Unbroken(_) => unbroken.clone(),
            EdgeClass::Broken => broken.clone(),
            EdgeClass::DoublyBroken => doubly.clone(),
        };
        op.add_term(p, w);
    }
    op
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectorReport {
    pub idempotent: bool,
    pub symmetric: bool,
    pub dimension: RatPolyN,
}

pub fn verify_projector(p: &DiagramOperator) -> ProjectorReport {
    let idempotent = p.compose(p).map(|pp| &pp == p).unwrap_or(false);
    ProjectorReport { idempotent, symmetric: &p.transpose() == p, dimension: p.trace_close() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexFlavor {
    Cyclic,
    Colorable,
}

impl std::str::FromStr for VertexFlavor {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cyclic" => Ok(VertexFlavor::Cyclic),
            "colorable" => Ok(VertexFlavor::Colorable),
            _ => Err(format!("unknown vertex flavor {s:?} (expected cyclic or colorable)")),
        }
    }
}

const CYCLIC: &str = "a1f5 a2e4 a3d3 a4c2 a5b1 b2f4 b3e3 b4d2 b5c1 c3f3 c4e2 c5d1 d4f2 d5e1 e5f1";
const COLORABLE: &str = "a1f1 a2e2 a3d3 a4c4 a5b5 b3f3 b4e4 b2d2 b1c1 c2f2 c3e3 c5d5 d4f4 d1e1 e5f5";

/// Slot `k` (1-based) of half-edge `h` (1-based) is endpoint `5(h-1) + k`;
/// internally both are 0-based, giving `5h + k`.
pub fn slot(h: usize, k: usize) -> usize {
    5 * h + k
}

/// The fifteen corners of a sextic vertex, as a matching on 30 slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexKernel {
    pub matching: Pairing,
    pub flavor: VertexFlavor,
}

impl VertexKernel {
    pub fn corner(&self, s: usize) -> usize {
        self.matching.partner(s)
    }

    /// The kernel after relabeling half-edge `h` as `(h + 1) mod 6`.
    pub fn rotated(&self) -> Pairing {
        let rot = |s: usize| slot((s / 5 + 1) % 6, s % 5);
        let pairs: Vec<(usize, usize)> = self.matching.pairs().into_iter().map(|(a, b)| (rot(a), rot(b))).collect();
        Pairing::from_pairs(15, &pairs).expect("rotation is a bijection")
    }
}

pub fn build_vertex(flavor: VertexFlavor) -> VertexKernel {
    let text = match flavor {
        VertexFlavor::Cyclic => CYCLIC,
        VertexFlavor::Colorable => COLORABLE,
    };
    let parse = |s: &[u8]| slot((s[0] - b'a') as usize, (s[1] - b'1') as usize);
    let pairs: Vec<(usize, usize)> = text.split_whitespace().map(|t| (parse(&t.as_bytes()[..2]), parse(&t.as_bytes()[2..]))).collect();
    VertexKernel { matching: Pairing::from_pairs(15, &pairs).expect("kernel covers all 30 slots"), flavor }
}

/// Binomial coefficient `C(N + shift, k)` as a polynomial in `N`.
pub fn binomial_poly(shift: i64, k: usize) -> RatPolyN {
    let mut acc = RatPolyN::one();
    for i in 0..k as i64 {
        acc = &acc * &RatPolyN::n_plus(shift - i);
    }
    let fact: i64 = (1..=k as i64).product();
    &acc / &RatPolyN::int(fact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactpoly::qi;

    #[test]
    fn antisymmetric_weights() {
        let a = build_antisymmetric();
        assert_eq!(a.len(), 120);
        assert_eq!(a.weight(&Pairing::identity(5)), Some(&RatPolyN::constant(q(1, 120))));
        let t = Pairing::from_permutation(&[1, 0, 2, 3, 4]);
        assert_eq!(a.weight(&t), Some(&RatPolyN::constant(q(-1, 120))));
    }

    #[test]
    fn symmetric_weights() {
        let s = build_symmetric_traceless();
        assert_eq!(s.len(), 945);
        let broken = Pairing::from_pairs(5, &[(0, 1), (5, 6), (2, 7), (3, 8), (4, 9)]).unwrap();
        let w = s.weight(&broken).unwrap();
        assert_eq!(w.eval_int(4).unwrap(), q(-2, 1200));
    }

    #[test]
    fn projector_reports() {
        let a = verify_projector(&build_antisymmetric());
        assert!(a.idempotent && a.symmetric);
        assert_eq!(a.dimension, binomial_poly(0, 5));
        let s = verify_projector(&build_symmetric_traceless());
        assert!(s.idempotent && s.symmetric);
        assert_eq!(s.dimension, &binomial_poly(4, 5) - &binomial_poly(2, 3));
        assert_eq!(s.dimension.eval_int(3).unwrap(), qi(11));
        let z = verify_projector(&DiagramOperator::zero(5));
        assert_eq!((z.idempotent, z.symmetric, z.dimension), (true, true, RatPolyN::zero()));
    }

    #[test]
    fn vertex_kernels() {
        let c = build_vertex(VertexFlavor::Cyclic);
        assert_eq!(c.matching.pairs().len(), 15);
        assert_eq!(c.rotated(), c.matching);
        for (a, b) in c.matching.pairs() {
            assert_ne!(a / 5, b / 5);
        }
        let col = build_vertex(VertexFlavor::Colorable);
        for (a, b) in col.matching.pairs() {
            assert_eq!(a % 5, b % 5);
            assert_ne!(a / 5, b / 5);
        }
    }
}
