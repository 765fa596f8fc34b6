//! Two-point subtraction data, the Schwinger-Dyson equation for `K(λ, N)`,
//! the leading-order free energy and the melonic dominance scan.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::{contract_map_with, AmplitudeError, ContractOptions, TwoPointCloser};
use crate::exactpoly::{rat_to_string, RatPolyN};
use crate::maps::{enumerate_maps, is_melonic, library, FeynmanMap, MapKind};
use crate::projectors::{Rep, VertexKernel};

#[derive(Debug, Error)]
pub enum MelonicError {
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error("coefficient grows like N^{0}; a series in 1/N is required")]
    PositivePower(i64),
    #[error("melon map {index} has leading power {power}, expected 0")]
    MelonPower { index: usize, power: i64 },
}

/// Truncated series `Σ c[v][k] λ^v N^{-k}` with `v ≤ vmax`, `k ≤ kmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series2 {
    vmax: usize,
    kmax: usize,
    c: Vec<Vec<BigRational>>,
}

impl Series2 {
    pub fn zero(vmax: usize, kmax: usize) -> Self {
        Series2 { vmax, kmax, c: vec![vec![BigRational::zero(); kmax + 1]; vmax + 1] }
    }

    pub fn one(vmax: usize, kmax: usize) -> Self {
        let mut s = Self::zero(vmax, kmax);
        s.c[0][0] = BigRational::one();
        s
    }

    /// `λ^v` times the large-`N` expansion of `f`.
    pub fn from_ratpoly(f: &RatPolyN, v: usize, vmax: usize, kmax: usize) -> Result<Self, MelonicError> {
        let mut s = Self::zero(vmax, kmax);
        let Some(p) = f.leading_power() else { return Ok(s) };
        if p > 0 {
            return Err(MelonicError::PositivePower(p));
        }
        if v > vmax {
            return Ok(s);
        }
        let lead = (-p) as usize;
        if lead <= kmax {
            for (i, x) in f.large_n_series(kmax + 1 - lead).into_iter().enumerate() {
                s.c[v][lead + i] = x;
            }
        }
        Ok(s)
    }

    pub fn vmax(&self) -> usize {
        self.vmax
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn coeff(&self, v: usize, k: usize) -> &BigRational {
        &self.c[v][k]
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().flatten().all(Zero::is_zero)
    }

    /// The `N → ∞` limit: coefficients of `λ^v` at `N^0`.
    pub fn large_n_limit(&self) -> Vec<BigRational> {
        self.c.iter().map(|row| row[0].clone()).collect()
    }

    pub fn add(&self, o: &Series2) -> Series2 {
        let mut s = self.clone();
        for (row, orow) in s.c.iter_mut().zip(&o.c) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x += y;
            }
        }
        s
    }

    pub fn sub(&self, o: &Series2) -> Series2 {
        let mut s = self.clone();
        for (row, orow) in s.c.iter_mut().zip(&o.c) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x -= y;
            }
        }
        s
    }

    pub fn mul(&self, o: &Series2) -> Series2 {
        let mut s = Self::zero(self.vmax, self.kmax);
        for v1 in 0..=self.vmax {
            for k1 in 0..=self.kmax {
                let a = &self.c[v1][k1];
                if a.is_zero() {
                    continue;
                }
                for v2 in 0..=self.vmax - v1 {
                    for k2 in 0..=self.kmax - k1 {
                        let b = &o.c[v2][k2];
                        if !b.is_zero() {
                            s.c[v1 + v2][k1 + k2] += a * b;
                        }
                    }
                }
            }
        }
        s
    }

    pub fn pow(&self, e: usize) -> Series2 {
        (0..e).fold(Self::one(self.vmax, self.kmax), |acc, _| acc.mul(self))
    }
}

impl Serialize for Series2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            vmax: usize,
            kmax: usize,
            coefficients: Vec<Vec<String>>,
        }
        Repr { vmax: self.vmax, kmax: self.kmax, coefficients: self.c.iter().map(|r| r.iter().map(rat_to_string).collect()).collect() }.serialize(s)
    }
}

/// The two-point data entering the self-energy.
#[derive(Clone, Debug, Serialize)]
pub struct SubtractionData {
    pub rep: Rep,
    /// Sum of the fifteen double-tadpole scalars.
    pub f1: RatPolyN,
    pub double_tadpoles: usize,
    /// Sum of the melon two-point scalars.
    pub f2: RatPolyN,
    /// Large-`N` limit of `f2`.
    #[serde(serialize_with = "ser_rat")]
    pub f2_leading: BigRational,
    pub melons: usize,
}

fn ser_rat<S: serde::Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_string(r))
}

/// The one-vertex two-point maps (all double-tadpoles).
pub fn double_tadpole_maps() -> Vec<FeynmanMap> {
    enumerate_maps(1, MapKind::TwoPoint, true, None, usize::MAX).maps
}

/// The two-vertex two-point maps whose vertices share five edges.
pub fn melon_maps() -> Vec<FeynmanMap> {
    enumerate_maps(2, MapKind::TwoPoint, true, None, usize::MAX).maps.into_iter().filter(|m| m.multiplicity(0, 1) == 5).collect()
}

pub fn compute_f1(rep: Rep, vertex: &VertexKernel, opts: &ContractOptions) -> Result<(RatPolyN, usize), MelonicError> {
    let closer = TwoPointCloser::new(&rep.projector())?;
    let maps = double_tadpole_maps();
    let mut f1 = RatPolyN::zero();
    for m in &maps {
        f1 = &f1 + &closer.scalar(m, vertex, opts)?;
    }
    Ok((f1, maps.len()))
}

/// `f2` as the sum of the melon two-point scalars; each must stay bounded at large `N`.
pub fn compute_f2(rep: Rep, vertex: &VertexKernel, opts: &ContractOptions) -> Result<(RatPolyN, usize), MelonicError> {
    let closer = TwoPointCloser::new(&rep.projector())?;
    let maps = melon_maps();
    let mut f2 = RatPolyN::zero();
    for (index, g) in maps.iter().enumerate() {
        let f = closer.scalar(g, vertex, opts)?;
        if let Some(p) = f.leading_power().filter(|&p| p > 0) {
            return Err(MelonicError::MelonPower { index, power: p });
        }
        f2 = &f2 + &f;
    }
    Ok((f2, maps.len()))
}

/// `m`, the large-`N` limit of `f2`.
pub fn compute_m(rep: Rep, vertex: &VertexKernel, opts: &ContractOptions) -> Result<(BigRational, usize), MelonicError> {
    let (f2, n) = compute_f2(rep, vertex, opts)?;
    Ok((f2.coefficient_of_power(0), n))
}

pub fn compute_f1_f2(rep: Rep, vertex: &VertexKernel, opts: &ContractOptions) -> Result<SubtractionData, MelonicError> {
    let (f1, double_tadpoles) = compute_f1(rep, vertex, opts)?;
    let (f2, melons) = compute_f2(rep, vertex, opts)?;
    Ok(SubtractionData { rep, f1, double_tadpoles, f2_leading: f2.coefficient_of_power(0), f2, melons })
}

/// `1 - K + λ f1 K² + λ² f2 K⁶`, truncated like `k`.
pub fn sde_residual(k: &Series2, f1: &RatPolyN, f2: &RatPolyN) -> Result<Series2, MelonicError> {
    let (vmax, kmax) = (k.vmax, k.kmax);
    let a = Series2::from_ratpoly(f1, 1, vmax, kmax)?;
    let b = Series2::from_ratpoly(f2, 2, vmax, kmax)?;
    let k2 = k.mul(k);
    let k6 = k2.mul(&k2).mul(&k2);
    Ok(Series2::one(vmax, kmax).sub(k).add(&a.mul(&k2)).add(&b.mul(&k6)))
}

/// The formal solution of `1 - K + λ f1 K² + λ² f2 K⁶ = 0` with `K(0) = 1`,
/// by fixed-point substitution (each pass fixes one more power of `λ`).
pub fn solve_sde(f1: &RatPolyN, f2: &RatPolyN, vmax: usize, kmax: usize) -> Result<Series2, MelonicError> {
    let a = Series2::from_ratpoly(f1, 1, vmax, kmax)?;
    let b = Series2::from_ratpoly(f2, 2, vmax, kmax)?;
    let one = Series2::one(vmax, kmax);
    let mut k = one.clone();
    for _ in 0..vmax {
        let k2 = k.mul(&k);
        let k6 = k2.mul(&k2).mul(&k2);
        k = one.add(&a.mul(&k2)).add(&b.mul(&k6));
    }
    Ok(k)
}

/// Coefficients of `λ^{2n}`, `n ≤ order`, in the solution of `1 - X + m λ² X⁶ = 0`.
pub fn lo_free_energy(m: &BigRational, order: usize) -> Vec<BigRational> {
    let mut x = vec![BigRational::zero(); order + 1];
    x[0] = BigRational::one();
    let trunc_mul = |a: &[BigRational], b: &[BigRational]| {
        let mut c = vec![BigRational::zero(); order + 1];
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate().take(order + 1 - i) {
                c[i + j] += ai * bj;
            }
        }
        c
    };
    for _ in 0..order {
        let x2 = trunc_mul(&x, &x);
        let x6 = trunc_mul(&trunc_mul(&x2, &x2), &x2);
        let mut next = vec![BigRational::zero(); order + 1];
        next[0] = BigRational::one();
        for n in 1..=order {
            next[n] = m * &x6[n - 1];
        }
        x = next;
    }
    x
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceEntry {
    pub label: String,
    pub vertices: usize,
    pub leading_power: Option<i64>,
    pub melonic: bool,
    pub consistent: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub rep: Rep,
    pub vmax: usize,
    pub entries: Vec<DominanceEntry>,
    pub violations: usize,
    /// Some contraction exceeded its budget; those maps are unchecked.
    pub partial: bool,
}

/// Hand-picked larger maps: chains of melons and of double-tadpoles.
pub fn curated_family() -> Vec<(String, FeynmanMap)> {
    vec![
        ("melon_chain_2".into(), library::melon_chain(2)),
        ("melon_in_melon".into(), library::melon_in_melon()),
        ("melon_with_double_tadpole".into(), library::melon_with_double_tadpole()),
        ("double_tadpole_chain_3".into(), library::double_tadpole_chain(3)),
        ("double_tadpole_chain_4".into(), library::double_tadpole_chain(4)),
        ("tadpole_necklace_4".into(), library::tadpole_necklace(4)),
    ]
}

/// Checks `leading power = 5 ⇔ melonic` on all vacuum maps up to `vmax` vertices
/// (one per isomorphism class) together with `extra`.
pub fn dominance_scan(vmax: usize, rep: Rep, vertex: &VertexKernel, opts: &ContractOptions, extra: &[(String, FeynmanMap)]) -> DominanceReport {
    let p = rep.projector();
    let mut maps: Vec<(String, FeynmanMap)> = Vec::new();
    for v in 1..=vmax {
        for (i, m) in enumerate_maps(v, MapKind::Vacuum, false, None, usize::MAX).maps.into_iter().enumerate() {
            maps.push((format!("v{v}_{i}"), m));
        }
    }
    maps.extend(extra.iter().cloned());
    let mut entries = Vec::with_capacity(maps.len());
    for (label, m) in maps {
        let melonic = is_melonic(&m);
        let entry = match contract_map_with(&m, &p, vertex, opts) {
            Ok((z, _)) => {
                let lp = z.leading_power();
                let consistent = (lp == Some(5)) == melonic && lp.is_none_or(|x| x <= 5);
                DominanceEntry { label, vertices: m.num_vertices(), leading_power: lp, melonic, consistent, error: None }
            }
            Err(e) => DominanceEntry { label, vertices: m.num_vertices(), leading_power: None, melonic, consistent: true, error: Some(e.to_string()) },
        };
        entries.push(entry);
    }
    let violations = entries.iter().filter(|e| !e.consistent).count();
    let partial = entries.iter().any(|e| e.error.is_some());
    DominanceReport { rep, vmax, entries, violations, partial }
}
