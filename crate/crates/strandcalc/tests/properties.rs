use proptest::prelude::*;
use proptest::sample::select;

use strandcalc::amplitude::{contract_map_with, ContractOptions};
use strandcalc::boundary::{flip_distance, flip_neighbors, tadpole_configuration, tadpole_partitions, BoundaryGraph};
use strandcalc::diagrams::{all_pairings, DiagramOperator, Pairing};
use strandcalc::exactpoly::{interpolate_rational, qi, QPoly, RatPolyN};
use std::collections::BTreeMap;

use strandcalc::maps::{enumerate_maps, FeynmanMap, MapKind};
use strandcalc::melonic::{double_tadpole_maps, melon_maps};
use strandcalc::projectors::{build_vertex, Rep, VertexFlavor};
use strandcalc::stranded::{faces_and_degree, StrandedGraph};

fn small_maps() -> Vec<FeynmanMap> {
    (1..=2).flat_map(|v| enumerate_maps(v, MapKind::Vacuum, false, None, usize::MAX).maps).collect()
}

fn configured() -> impl Strategy<Value = StrandedGraph> {
    let pool = all_pairings(5);
    select(small_maps()).prop_flat_map(move |m| {
        let e = m.num_edges();
        proptest::collection::vec(select(pool.clone()), e).prop_map(move |c| StrandedGraph::new(m.clone(), c).unwrap())
    })
}

fn pairing(m: usize) -> impl Strategy<Value = Pairing> {
    Just((0..2 * m).collect::<Vec<usize>>()).prop_shuffle().prop_map(move |xs| {
        let pairs: Vec<(usize, usize)> = xs.chunks(2).map(|c| (c[0], c[1])).collect();
        Pairing::from_pairs(m, &pairs).unwrap()
    })
}

fn poly(deg: usize) -> impl Strategy<Value = QPoly> {
    proptest::collection::vec(-9i64..=9, 1..=deg + 1).prop_map(|c| QPoly::from_ints(&c))
}

/// Graph reached from a tadpole configuration by a few random flips.
fn boundary() -> impl Strategy<Value = BoundaryGraph> {
    let starts: Vec<BoundaryGraph> = tadpole_partitions().iter().map(|p| tadpole_configuration(p).unwrap()).collect();
    (select(starts), proptest::collection::vec(any::<prop::sample::Index>(), 0..4)).prop_map(|(mut g, steps)| {
        for s in steps {
            let n = flip_neighbors(&g);
            g = n[s.index(n.len())].clone();
        }
        g
    })
}

/// Reconnects pairs `(i, p(i))` and `(j, p(j))` as `(i, p(j))` and `(j, p(i))`.
fn two_switch(p: &Pairing, i: usize, j: usize) -> Pairing {
    let (pi, pj) = (p.partner(i), p.partner(j));
    if i == j || pi == j {
        return p.clone();
    }
    let mut pairs: Vec<(usize, usize)> = p.pairs().into_iter().filter(|&(a, b)| ![a, b].contains(&i) && ![a, b].contains(&j)).collect();
    pairs.push((i, pj));
    pairs.push((j, pi));
    Pairing::from_pairs(p.arity(), &pairs).unwrap()
}

fn two_point_sample() -> impl Strategy<Value = StrandedGraph> {
    let pool = all_pairings(5);
    let maps: Vec<FeynmanMap> = double_tadpole_maps().into_iter().chain(melon_maps().into_iter().step_by(7)).collect();
    select(maps).prop_flat_map(move |m| {
        let e = m.num_edges();
        proptest::collection::vec(select(pool.clone()), e).prop_map(move |c| StrandedGraph::new(m.clone(), c).unwrap())
    })
}

/// Stranded graph on `map` whose edges take their pairings from `by_edge`.
fn assemble(map: FeynmanMap, by_edge: &BTreeMap<(usize, usize), Pairing>) -> StrandedGraph {
    let config = map.edges().iter().map(|e| by_edge[e].clone()).collect();
    StrandedGraph::new(map, config).unwrap()
}

/// `s` closed by the unbroken edge that maximizes its faces.
fn best_closure(s: &StrandedGraph, vertex: &strandcalc::projectors::VertexKernel) -> i64 {
    let (x, y) = (s.map.externals()[0], s.map.externals()[1]);
    let mut edges = s.map.edges();
    edges.push((x.min(y), x.max(y)));
    let map = FeynmanMap::new(s.map.num_vertices(), &edges, &[], Some(0)).unwrap();
    let mut by_edge: BTreeMap<_, _> = s.map.edges().into_iter().zip(s.config.iter().cloned()).collect();
    all_pairings(5)
        .into_iter()
        .filter(|p| p.same_side_pairs() == 0)
        .map(|p| {
            by_edge.insert((x.min(y), x.max(y)), p);
            faces_and_degree(&assemble(map.clone(), &by_edge), vertex).unwrap().degree
        })
        .min()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn degree_formulas_agree(g in configured(), colorable in any::<bool>()) {
        let flavor = if colorable { VertexFlavor::Colorable } else { VertexFlavor::Cyclic };
        let c = faces_and_degree(&g, &build_vertex(flavor)).unwrap();
        prop_assert_eq!(c.degree, c.degree_from_lengths);
        let total: usize = c.by_length.iter().map(|(p, f)| p * f).sum();
        prop_assert_eq!(total, 15 * g.map.num_vertices());
        prop_assert_eq!(c.unbroken + c.broken + c.doubly_broken, g.map.num_edges());
    }

    #[test]
    fn face_count_changes_by_at_most_the_number_of_switches(
        g in configured(),
        switches in proptest::collection::vec((any::<prop::sample::Index>(), 0usize..10, 0usize..10), 1..4),
    ) {
        let vertex = build_vertex(VertexFlavor::Cyclic);
        let before = faces_and_degree(&g, &vertex).unwrap().faces as i64;
        let mut config = g.config.clone();
        for (e, i, j) in &switches {
            let e = e.index(config.len());
            config[e] = two_switch(&config[e], *i, *j);
        }
        let after = faces_and_degree(&StrandedGraph::new(g.map.clone(), config).unwrap(), &vertex).unwrap().faces as i64;
        prop_assert!((after - before).abs() <= switches.len() as i64);
    }

    #[test]
    fn elimination_order_does_not_change_amplitudes(m in select(enumerate_maps(1, MapKind::Vacuum, true, None, usize::MAX).maps), seed in any::<u64>()) {
        let vertex = build_vertex(VertexFlavor::Cyclic);
        let p = Rep::A.projector();
        let greedy = contract_map_with(&m, &p, &vertex, &ContractOptions::default()).unwrap().0;
        let mut order: Vec<usize> = (0..m.num_edges()).collect();
        let shift = (seed as usize) % order.len();
        order.rotate_left(shift);
        if seed % 2 == 1 {
            order.reverse();
        }
        let opts = ContractOptions { order: Some(order), use_symmetry: seed % 3 == 0, ..ContractOptions::default() };
        prop_assert_eq!(greedy, contract_map_with(&m, &p, &vertex, &opts).unwrap().0);
    }

    #[test]
    fn flip_distance_is_a_metric(a in boundary(), b in boundary(), c in boundary()) {
        let cap = 12;
        prop_assert_eq!(flip_distance(&a, &a, cap), Some(0));
        let ab = flip_distance(&a, &b, cap);
        prop_assert_eq!(ab, flip_distance(&b, &a, cap));
        if let (Some(ab), Some(bc), Some(ac)) = (ab, flip_distance(&b, &c, cap), flip_distance(&a, &c, cap)) {
            prop_assert!(ac <= ab + bc);
        }
        if a != b {
            prop_assert!(ab.is_some_and(|d| d > 0));
        }
    }

    #[test]
    fn rational_functions_round_trip(num in poly(4), den in poly(3)) {
        prop_assume!(!den.is_zero());
        let f = RatPolyN::new(num, den).unwrap();
        let samples: Vec<(i64, _)> = (20..40).filter_map(|n| f.eval_int(n).ok().map(|v| (n, v))).collect();
        let g = interpolate_rational(&samples, 4, 3).unwrap();
        prop_assert_eq!(&g, &f);
        let h = RatPolyN::new(QPoly::from_ints(&[3, 1]), QPoly::from_ints(&[1, 0, 2])).unwrap();
        prop_assert_eq!(&(&(&f * &h) / &h), &f);
        prop_assert_eq!(&(&(&f + &h) - &h), &f);
        prop_assert_eq!(f.eval_int(17).ok().map(|v| v * qi(2)), (&f + &f).eval_int(17).ok());
    }

    #[test]
    fn composition_is_associative(a in pairing(4), b in pairing(4), c in pairing(4), w in 1i64..5) {
        let op = |p: &Pairing, k: i64| {
            let mut o = DiagramOperator::single(p.clone(), RatPolyN::int(k));
            o.add_term(Pairing::identity(4), RatPolyN::n_plus(-k));
            o
        };
        let (a, b, c) = (op(&a, w), op(&b, 1), op(&c, 2));
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn two_particle_reducible_degree_bound(s1 in two_point_sample(), s2 in two_point_sample(), j1 in select(all_pairings(5)), j2 in select(all_pairings(5))) {
        let vertex = build_vertex(VertexFlavor::Cyclic);
        let shift = 6 * s1.map.num_vertices();
        let mut edges = s1.map.edges();
        edges.extend(s2.map.edges().into_iter().map(|(a, b)| (a + shift, b + shift)));
        let (x1, y1) = (s1.map.externals()[0], s1.map.externals()[1]);
        let (x2, y2) = (s2.map.externals()[0] + shift, s2.map.externals()[1] + shift);
        edges.push((x1, x2));
        edges.push((y1, y2));
        let map = FeynmanMap::new(s1.map.num_vertices() + s2.map.num_vertices(), &edges, &[], Some(0)).unwrap();
        let mut by_edge: BTreeMap<_, _> = s1.map.edges().into_iter().zip(s1.config.iter().cloned()).collect();
        by_edge.extend(s2.map.edges().into_iter().map(|(a, b)| (a + shift, b + shift)).zip(s2.config.iter().cloned()));
        by_edge.insert((x1, x2), j1);
        by_edge.insert((y1, y2), j2);
        let g = faces_and_degree(&assemble(map, &by_edge), &vertex).unwrap().degree;
        let (g1, g2) = (best_closure(&s1, &vertex), best_closure(&s2, &vertex));
        prop_assert!(g >= g1 + g2 - 4, "omega(G) = {g}, omega(G1) = {g1}, omega(G2) = {g2}");
    }
}
