//! The acceptance checks, shared by the command line and the test harness.
//!
//! Reports carry no timings, so equal inputs give byte-identical reports.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::amplitude::{contract_map_with, ContractOptions, TwoPointCloser};
use crate::boundary::verify_deletion_distances;
use crate::diagrams::{all_pairings, classify_pairing, EdgeClass, Pairing};
use crate::exactpoly::{q, qi, rat_to_string, QPoly, RatPolyN};
use crate::maps::{enumerate_maps, library, FeynmanMap, MapFilter, MapKind};
use crate::melonic::{compute_f1, dominance_scan, curated_family, double_tadpole_maps, lo_free_energy, melon_maps, solve_sde};
use crate::projectors::{binomial_poly, build_vertex, verify_projector, Rep, VertexFlavor, VertexKernel};
use crate::stranded::{
    check_face_count_bounds, check_strand_bounds, faces_and_degree, fragment, internal_faces, max_faces_search, min_degree, BoundaryClass, EdgeUniverse,
    Objective, StrandedGraph,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    /// Only the checks that take seconds.
    Quick,
    /// Every check at the documented desk scale.
    Desk,
}

impl std::str::FromStr for Budget {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Budget::Quick),
            "desk" => Ok(Budget::Desk),
            _ => Err(format!("unknown budget {s:?} (expected quick or desk)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Fails against the stated target, by exactly the documented amount.
    DocumentedDiscrepancy,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub status: Status,
    pub details: Value,
}

pub const TITLES: [&str; 12] = [
    "f1 for the antisymmetric projector",
    "f1 for the symmetric traceless projector",
    "melon constant m for A and S",
    "projector identities and dimensions",
    "edge diagram census 945 = 120 + 600 + 225",
    "map enumeration counts",
    "Schwinger-Dyson equation and Fuss-Catalan numbers",
    "degree non-negativity without melons and double-tadpoles",
    "melonic dominance",
    "bad double-tadpole chain cancellation",
    "flip-distance bounds of the deletion lemmas",
    "face-count ceilings and combinatorial bounds",
];

fn s(r: &BigRational) -> String {
    rat_to_string(r)
}

fn poly_json(p: &RatPolyN) -> Value {
    serde_json::to_value(p).expect("serializable")
}

/// `(N-4)²(N²-13N+34) / (115200 N⁵)`.
pub fn f1_antisymmetric_display() -> RatPolyN {
    let num = &QPoly::from_ints(&[-4, 1]).pow(2) * &QPoly::from_ints(&[34, -13, 1]);
    let den = QPoly::monomial(qi(115200), 5);
    RatPolyN::new(num, den).expect("nonzero denominator")
}

/// `(N+8)²(N⁵+19N⁴+50N³-356N²+8N+672) / (960 N⁴ (N+4)² (N+6)²)`.
pub fn f1_symmetric_display() -> RatPolyN {
    let num = &QPoly::from_ints(&[8, 1]).pow(2) * &QPoly::from_ints(&[672, 8, -356, 50, 19, 1]);
    let den = &(&QPoly::monomial(qi(960), 4) * &QPoly::from_ints(&[4, 1]).pow(2)) * &QPoly::from_ints(&[6, 1]).pow(2);
    RatPolyN::new(num, den).expect("nonzero denominator")
}

/// Values shared between criteria.
pub struct Context {
    pub vertex: VertexKernel,
    pub opts: ContractOptions,
    pub budget: Budget,
    pub seed: u64,
    pub samples: usize,
    f2: BTreeMap<&'static str, (RatPolyN, Vec<BigRational>)>,
}

impl Context {
    pub fn new(budget: Budget) -> Self {
        Context {
            vertex: build_vertex(VertexFlavor::Cyclic),
            opts: ContractOptions::default(),
            budget,
            seed: 20_260_101,
            samples: 100_000,
            f2: BTreeMap::new(),
        }
    }

    /// Sum of melon scalars, and each melon's large-`N` limit.
    fn melons(&mut self, rep: Rep) -> Result<&(RatPolyN, Vec<BigRational>), String> {
        let key = if rep == Rep::A { "A" } else { "S" };
        if !self.f2.contains_key(key) {
            let closer = TwoPointCloser::new(&rep.projector()).map_err(|e| e.to_string())?;
            let mut sum = RatPolyN::zero();
            let mut limits = Vec::new();
            for g in melon_maps() {
                let f = closer.scalar(&g, &self.vertex, &self.opts).map_err(|e| e.to_string())?;
                if f.leading_power().is_some_and(|p| p > 0) {
                    return Err(format!("melon scalar grows like N^{:?}", f.leading_power()));
                }
                limits.push(f.coefficient_of_power(0));
                sum = &sum + &f;
            }
            self.f2.insert(key, (sum, limits));
        }
        Ok(&self.f2[key])
    }
}

fn criterion(id: u8, status: Status, details: Value) -> Criterion {
    Criterion { id, title: TITLES[id as usize - 1], status, details }
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn error(id: u8, e: impl ToString) -> Criterion {
    criterion(id, Status::Fail, json!({ "error": e.to_string() }))
}

pub fn criterion_1(ctx: &mut Context) -> Criterion {
    let (f1, n) = match compute_f1(Rep::A, &ctx.vertex, &ctx.opts) {
        Ok(x) => x,
        Err(e) => return error(1, e),
    };
    let display = f1_antisymmetric_display();
    let scaled = &display * &RatPolyN::int(120);
    let status = if f1 == display {
        Status::Pass
    } else if f1 == scaled {
        Status::DocumentedDiscrepancy
    } else {
        Status::Fail
    };
    let details = json!({
        "double_tadpoles": n,
        "computed": poly_json(&f1),
        "target": poly_json(&display),
        "computed_over_target": if display.is_zero() { Value::Null } else { poly_json(&f1.try_div(&display).expect("nonzero")) },
        "computed_leading": s(&f1.leading_coefficient()),
        "note": "the target's denominator 115200 = 120 x 960; the computed value has denominator 960 N^5 and shares its leading term 1/(960 N) with the symmetric traceless function",
    });
    criterion(1, status, details)
}

pub fn criterion_2(ctx: &mut Context) -> Criterion {
    match compute_f1(Rep::S, &ctx.vertex, &ctx.opts) {
        Ok((f1, n)) => {
            let display = f1_symmetric_display();
            criterion(2, pass_if(f1 == display), json!({ "double_tadpoles": n, "computed": poly_json(&f1), "target": poly_json(&display) }))
        }
        Err(e) => error(2, e),
    }
}

pub fn criterion_3(ctx: &mut Context) -> Criterion {
    let each = q(1, 120).pow(5u32);
    let target = q(1, 120).pow(4u32);
    let mut details = serde_json::Map::new();
    let mut ok = true;
    for rep in [Rep::A, Rep::S] {
        match ctx.melons(rep) {
            Ok((f2, limits)) => {
                let m = f2.coefficient_of_power(0);
                let all_equal = limits.iter().all(|l| *l == each);
                ok &= all_equal && limits.len() == 120 && m == target;
                details.insert(
                    format!("{rep:?}"),
                    json!({ "melons": limits.len(), "each_equals_120^-5": all_equal, "m": s(&m), "f2": poly_json(f2) }),
                );
            }
            Err(e) => {
                ok = false;
                details.insert(format!("{rep:?}"), json!({ "error": e }));
            }
        }
    }
    details.insert("target".into(), json!(s(&target)));
    criterion(3, pass_if(ok), Value::Object(details))
}

pub fn criterion_4(_: &mut Context) -> Criterion {
    let a = verify_projector(&Rep::A.projector());
    let s_ = verify_projector(&Rep::S.projector());
    let dim_a = binomial_poly(0, 5);
    let dim_s = &binomial_poly(4, 5) - &binomial_poly(2, 3);
    let at = |p: &RatPolyN, n: i64| p.eval_int(n).map(|x| s(&x)).unwrap_or_default();
    let ok = a.idempotent && a.symmetric && s_.idempotent && s_.symmetric && a.dimension == dim_a && s_.dimension == dim_s;
    let ok = ok && a.dimension.eval_int(5).ok() == Some(qi(1)) && s_.dimension.eval_int(3).ok() == Some(qi(11));
    criterion(
        4,
        pass_if(ok),
        json!({
            "A": { "idempotent": a.idempotent, "symmetric": a.symmetric, "trace": poly_json(&a.dimension), "trace_at_5": at(&a.dimension, 5) },
            "S": { "idempotent": s_.idempotent, "symmetric": s_.symmetric, "trace": poly_json(&s_.dimension), "trace_at_3": at(&s_.dimension, 3) },
        }),
    )
}

pub fn criterion_5(_: &mut Context) -> Criterion {
    let mut c = [0usize; 3];
    for p in all_pairings(5) {
        c[match classify_pairing(&p) {
            EdgeClass::Unbroken(_) => 0,
            EdgeClass::Broken => 1,
            EdgeClass::DoublyBroken => 2,
        }] += 1;
    }
    criterion(5, pass_if(c == [120, 600, 225]), json!({ "unbroken": c[0], "broken": c[1], "doubly_broken": c[2], "total": c.iter().sum::<usize>() }))
}

pub fn criterion_6(_: &mut Context) -> Criterion {
    let vacuum = enumerate_maps(1, MapKind::Vacuum, true, None, usize::MAX);
    let melons = melon_maps().len();
    let dt = double_tadpole_maps().len();
    criterion(
        6,
        pass_if(vacuum.maps.len() == 15 && !vacuum.truncated && melons == 120),
        json!({ "rooted_vacuum_v1": vacuum.maps.len(), "melon_two_point": melons, "double_tadpole_two_point": dt }),
    )
}

fn fuss_catalan(n: u64) -> BigInt {
    // C(6n+1, n) / (6n+1)
    let mut c = BigInt::one();
    for i in 0..n {
        c = c * BigInt::from(6 * n + 1 - i) / BigInt::from(i + 1);
    }
    c / BigInt::from(6 * n + 1)
}

pub fn criterion_7(ctx: &mut Context) -> Criterion {
    let order = 4;
    let expected: Vec<BigRational> = (0..=order as u64).map(|n| BigRational::from_integer(fuss_catalan(n))).collect();
    let listed: Vec<BigRational> = [1, 1, 6, 51, 506].iter().map(|&x| qi(x)).collect();
    let m = q(1, 120).pow(4u32);
    let lo: Vec<BigRational> = lo_free_energy(&m, order).iter().enumerate().map(|(n, c)| c / m.clone().pow(n as u32)).collect();
    // The full equation at large N, with the computed f1 and the melon sum.
    let full = (|| -> Result<Vec<BigRational>, String> {
        let (f1, _) = compute_f1(Rep::A, &ctx.vertex, &ctx.opts).map_err(|e| e.to_string())?;
        let f2 = if ctx.budget == Budget::Desk { ctx.melons(Rep::A)?.0.clone() } else { RatPolyN::constant(m.clone()) };
        let k = solve_sde(&f1, &f2, 2 * order, 2).map_err(|e| e.to_string())?;
        let lim = k.large_n_limit();
        Ok((0..=order).map(|n| &lim[2 * n] / m.clone().pow(n as u32)).collect())
    })();
    let ok = expected == listed && lo == listed && full.as_ref().is_ok_and(|f| *f == listed);
    let strs = |v: &[BigRational]| v.iter().map(s).collect::<Vec<_>>();
    criterion(
        7,
        pass_if(ok),
        json!({
            "fuss_catalan": strs(&expected),
            "leading_order_equation": strs(&lo),
            "full_equation_large_n": full.map(|f| json!(strs(&f))).unwrap_or_else(|e| json!({ "error": e })),
        }),
    )
}

fn random_config(map: &FeynmanMap, pool: &[Pairing], rng: &mut ChaCha8Rng) -> Vec<Pairing> {
    (0..map.num_edges()).map(|_| pool.choose(rng).expect("nonempty").clone()).collect()
}

/// Traces random configurations of `maps`; returns counts of checked samples
/// and of each kind of violation.
fn sample_configurations(maps: &[FeynmanMap], samples: usize, vertex: &VertexKernel, seed: u64) -> BTreeMap<&'static str, usize> {
    let pool: Vec<Pairing> = all_pairings(5).into_iter().filter(|p| p.same_side_pairs() > 0).collect();
    let all = all_pairings(5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: BTreeMap<&'static str, usize> = ["samples", "negative_degree", "degree_forms_disagree", "length_sum", "face_bound", "short_face_free_negative"]
        .into_iter()
        .map(|k| (k, 0))
        .collect();
    for _ in 0..samples {
        let map = maps.choose(&mut rng).expect("nonempty");
        let mut config = random_config(map, &all, &mut rng);
        let e = rng.gen_range(0..config.len());
        config[e] = pool.choose(&mut rng).expect("nonempty").clone();
        let g = StrandedGraph::new(map.clone(), config).expect("valid configuration");
        let c = faces_and_degree(&g, vertex).expect("vacuum");
        let total: usize = c.by_length.iter().map(|(p, f)| p * f).sum();
        *out.get_mut("samples").expect("key") += 1;
        *out.get_mut("negative_degree").expect("key") += usize::from(c.degree < 0);
        *out.get_mut("degree_forms_disagree").expect("key") += usize::from(c.degree != c.degree_from_lengths);
        *out.get_mut("length_sum").expect("key") += usize::from(total != 15 * map.num_vertices());
        let bounds = (2..=3).all(|k| check_face_count_bounds(c.faces, 5 * map.num_edges(), &c.by_length, k));
        *out.get_mut("face_bound").expect("key") += usize::from(!bounds);
        let short_free = !c.by_length.contains_key(&1) && !c.by_length.contains_key(&2);
        *out.get_mut("short_face_free_negative").expect("key") += usize::from(short_free && c.degree < 0);
    }
    out
}

pub fn criterion_8(ctx: &mut Context) -> Criterion {
    let mut details = serde_json::Map::new();
    let mut ok = true;
    let mut maps_all = Vec::new();
    for v in 1..=2 {
        let e = enumerate_maps(v, MapKind::Vacuum, false, Some(MapFilter::NoMelonNoDoubleTadpole), usize::MAX);
        ok &= !e.truncated;
        maps_all.extend(e.maps);
    }
    details.insert("maps".into(), json!(maps_all.len()));
    for flavor in [VertexFlavor::Cyclic, VertexFlavor::Colorable] {
        let vertex = build_vertex(flavor);
        for universe in [EdgeUniverse::UnbrokenOnly, EdgeUniverse::All945] {
            let mut hist: BTreeMap<String, usize> = BTreeMap::new();
            let mut bounds_ok = true;
            for m in &maps_all {
                match min_degree(m, universe, &vertex, ctx.opts.max_states) {
                    Ok((d, r)) => {
                        ok &= r.exact && d.is_some_and(|d| d >= 0);
                        let w = r.witness.as_ref().expect("witness");
                        let c = faces_and_degree(w, &vertex).expect("vacuum");
                        ok &= Some(c.degree) == d && c.degree == c.degree_from_lengths;
                        bounds_ok &= (2..=3).all(|k| check_face_count_bounds(c.faces, 5 * m.num_edges(), &c.by_length, k));
                        *hist.entry(d.map_or("none".into(), |d| d.to_string())).or_insert(0) += 1;
                    }
                    Err(e) => {
                        ok = false;
                        *hist.entry(format!("error: {e}")).or_insert(0) += 1;
                    }
                }
            }
            ok &= bounds_ok;
            details.insert(format!("{flavor:?}_{universe:?}_min_degree"), json!(hist));
        }
    }
    let counts = sample_configurations(&maps_all, ctx.samples, &ctx.vertex, ctx.seed);
    ok &= counts["samples"] >= 100_000.min(ctx.samples) && counts.iter().filter(|(k, _)| **k != "samples").all(|(_, &v)| v == 0);
    details.insert("sampled".into(), json!(counts));
    details.insert("seed".into(), json!(ctx.seed));
    criterion(8, pass_if(ok), Value::Object(details))
}

pub fn criterion_9(ctx: &mut Context) -> Criterion {
    let r = dominance_scan(2, Rep::A, &ctx.vertex, &ctx.opts, &curated_family());
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for e in &r.entries {
        *hist.entry(format!("V={} power={:?} melonic={}", e.vertices, e.leading_power, e.melonic)).or_insert(0) += 1;
    }
    let curated: Vec<Value> = r
        .entries
        .iter()
        .filter(|e| !e.label.starts_with('v'))
        .map(|e| json!({ "label": e.label, "leading_power": e.leading_power, "melonic": e.melonic, "consistent": e.consistent }))
        .collect();
    criterion(
        9,
        pass_if(r.violations == 0 && !r.partial),
        json!({ "maps": r.entries.len(), "violations": r.violations, "partial": r.partial, "histogram": hist, "curated": curated }),
    )
}

/// `p` double-tadpoles joined leg 5 to leg 0, with the two ends left open.
pub fn open_double_tadpole_chain(p: usize) -> FeynmanMap {
    let mut edges = Vec::new();
    for i in 0..p {
        edges.push((6 * i + 1, 6 * i + 2));
        edges.push((6 * i + 3, 6 * i + 4));
        if i + 1 < p {
            edges.push((6 * i + 5, 6 * (i + 1)));
        }
    }
    FeynmanMap::new(p, &edges, &[0, 6 * (p - 1) + 5], Some(0)).expect("valid chain")
}

pub fn criterion_10(ctx: &mut Context) -> Criterion {
    let mut ok = true;
    let mut rows = Vec::new();
    let mut open_powers = Vec::new();
    let mut closed_powers = Vec::new();
    for p in 2..=3usize {
        let open = max_faces_search(&open_double_tadpole_chain(p), Some(BoundaryClass::DoublyBroken), EdgeUniverse::All945, Objective::NegDegree, &ctx.vertex, ctx.opts.max_states);
        let closed = min_degree(&library::double_tadpole_chain(p), EdgeUniverse::All945, &ctx.vertex, ctx.opts.max_states);
        let (Ok(open), Ok((Some(w), closed_r))) = (open, closed) else {
            return error(10, "chain search failed");
        };
        ok &= open.exact && closed_r.exact;
        let open_power = open.value.expect("doubly-broken class reachable") - 5 * p as i64;
        let closed_power = 5 - w;
        let witness = closed_r.witness.expect("witness");
        let census = faces_and_degree(&witness, &ctx.vertex).expect("vacuum");
        let amp = contract_map_with(&library::double_tadpole_chain(p), &Rep::A.projector(), &ctx.vertex, &ctx.opts);
        let full_power = match amp {
            Ok((z, _)) => z.leading_power(),
            Err(e) => return error(10, e),
        };
        open_powers.push(open_power);
        closed_powers.push(closed_power);
        rows.push(json!({
            "p": p,
            "open_chain_max_power": open_power,
            "closed_chain_min_degree": w,
            "closed_chain_max_stranded_power": closed_power,
            "witness_faces": census.faces,
            "witness_edges": [census.unbroken, census.broken, census.doubly_broken],
            "full_amplitude_leading_power": full_power,
        }));
        if p == 2 {
            ok &= full_power.is_none_or(|x| x <= 4);
        }
    }
    // N^{p-1} up to a p-independent factor: one power of N per added link.
    let slope = |v: &[i64]| v.windows(2).all(|w| w[1] - w[0] == 1);
    ok &= slope(&open_powers) && slope(&closed_powers);
    ok &= open_powers[0] == 0 && closed_powers[0] == 3;
    criterion(10, pass_if(ok), json!({ "chains": rows, "open_offset_from_p_minus_1": open_powers[0] - 1, "closed_offset_from_p_minus_1": closed_powers[0] - 1 }))
}

pub fn criterion_11(_: &mut Context) -> Criterion {
    let r = verify_deletion_distances(12);
    let checks: Vec<Value> = r.checks.iter().map(|c| json!({ "check": c.description, "bound": c.bound, "measured": c.measured, "pass": c.pass })).collect();
    criterion(11, pass_if(r.pass), json!({ "checks": checks, "tadpole_adjacency": r.tadpole_adjacency, "dipole_adjacency": r.dipole_adjacency }))
}

pub fn criterion_12(ctx: &mut Context) -> Criterion {
    let classes = [BoundaryClass::Unbroken, BoundaryClass::Broken, BoundaryClass::DoublyBroken];
    let targets: [(&str, EdgeUniverse, [i64; 3]); 5] = [
        ("double_tadpole", EdgeUniverse::All945, [4, 4, 4]),
        ("melon", EdgeUniverse::UnbrokenOnly, [10, 10, 10]),
        ("H0", EdgeUniverse::UnbrokenOnly, [8, 8, 7]),
        ("H4", EdgeUniverse::UnbrokenOnly, [7, 7, 7]),
        ("H5", EdgeUniverse::UnbrokenOnly, [13, 13, 12]),
    ];
    let mut ok = true;
    let mut rows = Vec::new();
    for (name, universe, ceil) in targets {
        let map = fragment(name).expect("known fragment");
        let mut found = Vec::new();
        for (i, class) in classes.into_iter().enumerate() {
            match max_faces_search(&map, Some(class), universe, Objective::Faces, &ctx.vertex, ctx.opts.max_states) {
                Ok(r) => {
                    let value = r.value;
                    ok &= r.exact && value.is_some_and(|v| v <= ceil[i]);
                    if let Some(w) = &r.witness {
                        let c = internal_faces(w, &ctx.vertex);
                        ok &= Some(c.internal_faces as i64) == value && c.internal_length + c.open_length == 5 * c.internal_edges;
                        let internal = 5 * c.internal_edges - c.open_length;
                        ok &= (2..=3).all(|k| check_face_count_bounds(c.internal_faces, internal, &c.by_length, k));
                        ok &= check_strand_bounds(c.open_length, &c.strand_lengths, 1, 1);
                    }
                    found.push(json!({ "class": class, "max_faces": value, "ceiling": ceil[i], "exact": r.exact }));
                }
                Err(e) => {
                    ok = false;
                    found.push(json!({ "class": class, "error": e.to_string() }));
                }
            }
        }
        rows.push(json!({ "fragment": name, "universe": universe, "results": found }));
    }
    // The melon reaches its ceiling with unbroken externals, the double tadpole in every class.
    let melon = max_faces_search(&fragment("melon").expect("known"), Some(BoundaryClass::Unbroken), EdgeUniverse::UnbrokenOnly, Objective::Faces, &ctx.vertex, ctx.opts.max_states);
    ok &= melon.is_ok_and(|r| r.value == Some(10));
    criterion(12, pass_if(ok), json!({ "fragments": rows, "combinatorial_bounds": "checked on every witness here and on every sampled and extremal configuration of criterion 8" }))
}

pub type CriterionFn = fn(&mut Context) -> Criterion;

pub const CRITERIA: [CriterionFn; 12] =
    [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12];

/// Criteria run under the quick budget.
pub const QUICK: [u8; 6] = [1, 2, 4, 5, 6, 7];

pub fn run(ctx: &mut Context, id: u8) -> Criterion {
    if ctx.budget == Budget::Quick && !QUICK.contains(&id) {
        return criterion(id, Status::Skipped, json!({ "reason": "not part of the quick budget" }));
    }
    CRITERIA[id as usize - 1](ctx)
}

pub fn run_all(ctx: &mut Context) -> Vec<Criterion> {
    (1..=12).map(|id| run(ctx, id)).collect()
}
