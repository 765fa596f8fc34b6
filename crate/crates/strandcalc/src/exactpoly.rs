//! Exact rational functions of the symbolic size `N`.
//!
//! A [`RatPolyN`] is a ratio of two polynomials with rational coefficients,
//! always kept in canonical form: coprime, with a monic denominator.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("rational function has a pole at N = {0}")]
    Pole(String),
    #[error("need at least {needed} distinct samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("no rational function within degree bounds ({0}, {1}) fits the samples")]
    Inconsistent(usize, usize),
    #[error("samples contain a repeated abscissa N = {0}")]
    RepeatedSample(i64),
    #[error("malformed rational literal {0:?}")]
    Parse(String),
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Formats a rational as `p/q` (always with an explicit denominator).
pub fn rat_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_from_str(s: &str) -> Result<BigRational, PolyError> {
    let err = || PolyError::Parse(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(BigRational::new(n, d))
}

/// Dense univariate polynomial over the rationals, ascending powers, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QPoly(Vec<BigRational>);

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn constant(c: BigRational) -> Self {
        QPoly::new(vec![c])
    }

    /// The monomial `c N^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        QPoly::new(v)
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&c| qi(c)).collect())
    }

    pub fn from_bigints(coeffs: &[BigInt]) -> Self {
        QPoly::new(coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.0.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        QPoly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let lc = self.leading();
        self.scale(&(BigRational::one() / lc))
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = QPoly::constant(BigRational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.0.len() - 1;
        let lc = d.leading();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quo = vec![BigRational::zero(); r.len() - dd];
        for k in (0..quo.len()).rev() {
            let c = &r[k + dd] / &lc;
            if !c.is_zero() {
                for (i, di) in d.0.iter().enumerate() {
                    r[k + i] -= &c * di;
                }
            }
            quo[k] = c;
        }
        r.truncate(dd);
        (QPoly::new(quo), QPoly::new(r))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r.monic();
        }
        x.monic()
    }

    pub fn lcm(a: &QPoly, b: &QPoly) -> QPoly {
        if a.is_zero() || b.is_zero() {
            return QPoly::zero();
        }
        let g = QPoly::gcd(a, b);
        let (quo, _) = (a * b).div_rem(&g);
        quo.monic()
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer coefficients, if every coefficient is an integer.
    pub fn to_bigints(&self) -> Option<Vec<BigInt>> {
        self.0.iter().map(|c| c.is_integer().then(|| c.to_integer())).collect()
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        QPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        QPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        QPoly::new(v)
    }
}

fn fmt_poly(p: &QPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return write!(f, "0");
    }
    let mut first = true;
    for (k, c) in p.0.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let a = c.abs();
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { "-" } else { "+" })?;
        }
        first = false;
        let unit = a.is_one() && k > 0;
        if !unit {
            write!(f, "{}", a)?;
        }
        match k {
            0 => {}
            1 => write!(f, "{}N", if unit { "" } else { "*" })?,
            _ => write!(f, "{}N^{}", if unit { "" } else { "*" }, k)?,
        }
    }
    Ok(())
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_poly(self, f)
    }
}

/// An exact rational function of `N` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatPolyN {
    num: QPoly,
    den: QPoly,
}

impl RatPolyN {
    /// Builds `num/den` and canonicalizes it.
    pub fn new(num: QPoly, den: QPoly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatPolyN::zero());
        }
        let g = QPoly::gcd(&num, &den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        let lc = BigRational::one() / d.leading();
        Ok(RatPolyN { num: n.scale(&lc), den: d.scale(&lc) })
    }

    pub fn from_poly(p: QPoly) -> Self {
        RatPolyN { num: p, den: QPoly::constant(BigRational::one()) }
    }

    pub fn zero() -> Self {
        RatPolyN::from_poly(QPoly::zero())
    }

    pub fn one() -> Self {
        RatPolyN::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        RatPolyN::from_poly(QPoly::constant(c))
    }

    pub fn int(c: i64) -> Self {
        RatPolyN::constant(qi(c))
    }

    /// The variable `N`.
    pub fn n() -> Self {
        RatPolyN::from_poly(QPoly::from_ints(&[0, 1]))
    }

    /// `N^k` for any integer `k`.
    pub fn n_pow(k: i64) -> Self {
        let m = QPoly::monomial(BigRational::one(), k.unsigned_abs() as usize);
        if k >= 0 {
            RatPolyN::from_poly(m)
        } else {
            RatPolyN { num: QPoly::constant(BigRational::one()), den: m }
        }
    }

    /// `N + c`.
    pub fn n_plus(c: i64) -> Self {
        RatPolyN::from_poly(QPoly::from_ints(&[c, 1]))
    }

    pub fn numerator(&self) -> &QPoly {
        &self.num
    }

    pub fn denominator(&self) -> &QPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn try_div(&self, o: &RatPolyN) -> Result<RatPolyN, PolyError> {
        if o.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        RatPolyN::new(&self.num * &o.den, &self.den * &o.num)
    }

    pub fn recip(&self) -> Result<RatPolyN, PolyError> {
        RatPolyN::one().try_div(self)
    }

    pub fn powi(&self, e: usize) -> RatPolyN {
        RatPolyN { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn evaluate_at(&self, n: &BigRational) -> Result<BigRational, PolyError> {
        let d = self.den.eval(n);
        if d.is_zero() {
            return Err(PolyError::Pole(rat_to_string(n)));
        }
        Ok(self.num.eval(n) / d)
    }

    pub fn eval_int(&self, n: i64) -> Result<BigRational, PolyError> {
        self.evaluate_at(&qi(n))
    }

    /// Exponent of the dominant power of `N` at infinity (`None` for zero).
    pub fn leading_power(&self) -> Option<i64> {
        Some(self.num.degree()? as i64 - self.den.degree().unwrap_or(0) as i64)
    }

    /// Coefficient of the dominant power of `N` at infinity.
    pub fn leading_coefficient(&self) -> BigRational {
        self.num.leading() / self.den.leading()
    }

    /// Expansion at large `N`: coefficients of `N^{p}, N^{p-1}, ..., N^{p-terms+1}`
    /// where `p` is the leading power.
    pub fn large_n_series(&self, terms: usize) -> Vec<BigRational> {
        // Reverse both polynomials to expand in 1/N.
        let Some(dn) = self.num.degree() else { return vec![BigRational::zero(); terms] };
        let dd = self.den.degree().unwrap_or(0);
        let a: Vec<BigRational> = (0..terms).map(|i| if i <= dn { self.num.coeff(dn - i) } else { BigRational::zero() }).collect();
        let b: Vec<BigRational> = (0..terms).map(|i| if i <= dd { self.den.coeff(dd - i) } else { BigRational::zero() }).collect();
        let mut c: Vec<BigRational> = Vec::with_capacity(terms);
        for i in 0..terms {
            let mut acc = a[i].clone();
            for j in 1..=i {
                acc -= &b[j] * &c[i - j];
            }
            c.push(acc / &b[0]);
        }
        c
    }

    /// Coefficient of `N^k` in the large-`N` expansion.
    pub fn coefficient_of_power(&self, k: i64) -> BigRational {
        let Some(p) = self.leading_power() else { return BigRational::zero() };
        if k > p {
            return BigRational::zero();
        }
        let idx = (p - k) as usize;
        self.large_n_series(idx + 1).pop().unwrap()
    }
}

impl Add for &RatPolyN {
    type Output = RatPolyN;
    fn add(self, o: &RatPolyN) -> RatPolyN {
        if self.den == o.den {
            return RatPolyN::new(&self.num + &o.num, self.den.clone()).unwrap();
        }
        RatPolyN::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den).unwrap()
    }
}

impl Sub for &RatPolyN {
    type Output = RatPolyN;
    fn sub(self, o: &RatPolyN) -> RatPolyN {
        self + &(-o)
    }
}

impl Mul for &RatPolyN {
    type Output = RatPolyN;
    fn mul(self, o: &RatPolyN) -> RatPolyN {
        RatPolyN::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }
}

impl Neg for &RatPolyN {
    type Output = RatPolyN;
    fn neg(self) -> RatPolyN {
        RatPolyN { num: self.num.scale(&qi(-1)), den: self.den.clone() }
    }
}

/// Panics on division by zero; use [`RatPolyN::try_div`] to handle it.
impl Div for &RatPolyN {
    type Output = RatPolyN;
    fn div(self, o: &RatPolyN) -> RatPolyN {
        self.try_div(o).expect("division by the zero rational function")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatPolyN {
            type Output = RatPolyN;
            fn $m(self, o: RatPolyN) -> RatPolyN {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatPolyN {
    type Output = RatPolyN;
    fn neg(self) -> RatPolyN {
        -&self
    }
}

impl fmt::Display for RatPolyN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) && self.den.leading().is_one() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Applies a binary operation, reporting division by zero as an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn ratpoly_arith(a: &RatPolyN, b: &RatPolyN, op: ArithOp) -> Result<RatPolyN, PolyError> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.try_div(b)?,
    })
}

#[derive(Serialize, Deserialize)]
struct RatPolyRepr {
    numerator: Vec<String>,
    denominator: Vec<String>,
}

impl Serialize for RatPolyN {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RatPolyRepr {
            numerator: self.num.coeffs().iter().map(rat_to_string).collect(),
            denominator: self.den.coeffs().iter().map(rat_to_string).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatPolyN {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = RatPolyRepr::deserialize(d)?;
        let parse = |v: &[String]| -> Result<QPoly, D::Error> {
            v.iter().map(|s| rat_from_str(s).map_err(D::Error::custom)).collect::<Result<Vec<_>, _>>().map(QPoly::new)
        };
        RatPolyN::new(parse(&r.numerator)?, parse(&r.denominator)?).map_err(D::Error::custom)
    }
}

/// Solves a square-or-tall homogeneous system over the rationals, returning a
/// nonzero null vector if one exists.
fn null_vector(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Option<Vec<BigRational>> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = BigRational::one() / &rows[r][c];
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    // Prefer the free column of highest index: it maximizes the degree used.
    let free = (0..ncols).rev().find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); ncols];
    v[free] = BigRational::one();
    for (i, &pc) in pivots.iter().enumerate() {
        v[pc] = -rows[i][free].clone();
    }
    Some(v)
}

/// Reconstructs the rational function with numerator degree at most `d_num`
/// and denominator degree at most `d_den` through the given integer samples.
pub fn interpolate_rational(samples: &[(i64, BigRational)], d_num: usize, d_den: usize) -> Result<RatPolyN, PolyError> {
    let mut xs: Vec<i64> = samples.iter().map(|s| s.0).collect();
    xs.sort_unstable();
    if let Some(w) = xs.windows(2).find(|w| w[0] == w[1]) {
        return Err(PolyError::RepeatedSample(w[0]));
    }
    let needed = d_num + d_den + 2;
    if samples.len() < needed {
        return Err(PolyError::TooFewSamples { needed, got: samples.len() });
    }
    // Unknowns: a_0..a_dnum, b_0..b_dden with p(x) - y q(x) = 0.
    let ncols = d_num + d_den + 2;
    let rows: Vec<Vec<BigRational>> = samples
        .iter()
        .map(|(x, y)| {
            let x = qi(*x);
            let mut row = Vec::with_capacity(ncols);
            let mut pw = BigRational::one();
            for _ in 0..=d_num {
                row.push(pw.clone());
                pw *= &x;
            }
            let mut pw = BigRational::one();
            for _ in 0..=d_den {
                row.push(-(y * &pw));
                pw *= &x;
            }
            row
        })
        .collect();
    let v = null_vector(rows, ncols).ok_or(PolyError::Inconsistent(d_num, d_den))?;
    let num = QPoly::new(v[..=d_num].to_vec());
    let den = QPoly::new(v[d_num + 1..].to_vec());
    if den.is_zero() {
        return Err(PolyError::Inconsistent(d_num, d_den));
    }
    let f = RatPolyN::new(num, den)?;
    for (x, y) in samples {
        match f.eval_int(*x) {
            Ok(v) if &v == y => {}
            _ => return Err(PolyError::Inconsistent(d_num, d_den)),
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1a() -> RatPolyN {
        let n = RatPolyN::n();
        let nm4 = RatPolyN::n_plus(-4);
        let quad = &(&(&n * &n) - &(&RatPolyN::int(13) * &n)) + &RatPolyN::int(34);
        let num = &(&nm4 * &nm4) * &quad;
        &num / &(&RatPolyN::int(115200) * &RatPolyN::n_pow(5))
    }

    #[test]
    fn add_and_mul_examples() {
        let n = RatPolyN::n();
        assert_eq!(&n + &n, &RatPolyN::int(2) * &n);
        let a = RatPolyN::n_plus(6).recip().unwrap();
        let b = RatPolyN::n_plus(4).recip().unwrap();
        let prod = RatPolyN::new(QPoly::from_ints(&[1]), QPoly::from_ints(&[24, 10, 1])).unwrap();
        assert_eq!(&a * &b, prod);
    }

    #[test]
    fn simplification_by_division() {
        let a = RatPolyN::new(QPoly::from_ints(&[-16, 0, 1]), QPoly::from_ints(&[-4, 1])).unwrap();
        let r = ratpoly_arith(&a, &RatPolyN::n_plus(4), ArithOp::Div).unwrap();
        assert_eq!(r, RatPolyN::one());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(ratpoly_arith(&RatPolyN::one(), &RatPolyN::zero(), ArithOp::Div), Err(PolyError::DivisionByZero));
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(f1a().eval_int(10).unwrap(), q(1, 80_000_000));
        assert_eq!(f1a().eval_int(4).unwrap(), qi(0));
        assert!(matches!(f1a().eval_int(0), Err(PolyError::Pole(_))));
        assert_eq!(RatPolyN::one().eval_int(-7).unwrap(), qi(1));
    }

    #[test]
    fn interpolation_recovers_known_functions() {
        let f = f1a();
        let samples: Vec<_> = (6..=20).map(|n| (n, f.eval_int(n).unwrap())).collect();
        assert_eq!(interpolate_rational(&samples, 4, 5).unwrap(), f);
        let ones: Vec<_> = (1..=4).map(|n| (n, qi(1))).collect();
        assert_eq!(interpolate_rational(&ones, 1, 1).unwrap(), RatPolyN::one());
    }

    #[test]
    fn interpolation_errors() {
        let few = vec![(1, qi(1)), (2, qi(2))];
        assert!(matches!(interpolate_rational(&few, 1, 1), Err(PolyError::TooFewSamples { .. })));
        let bad: Vec<_> = (1..=6).map(|n| (n, if n == 6 { qi(100) } else { qi(n) })).collect();
        assert!(matches!(interpolate_rational(&bad, 1, 0), Err(PolyError::Inconsistent(..))));
    }

    #[test]
    fn large_n_expansion() {
        // 1/(N+6) = N^-1 - 6 N^-2 + 36 N^-3 - ...
        let f = RatPolyN::n_plus(6).recip().unwrap();
        assert_eq!(f.leading_power(), Some(-1));
        assert_eq!(f.large_n_series(3), vec![qi(1), qi(-6), qi(36)]);
        assert_eq!(f.coefficient_of_power(-3), qi(36));
        assert_eq!(f.coefficient_of_power(0), qi(0));
    }

    #[test]
    fn serde_round_trip() {
        let f = f1a();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"1/115200\"") || s.contains("/"));
        let g: RatPolyN = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(RatPolyN::n_plus(-4).to_string(), "N - 4");
        assert_eq!(RatPolyN::n_pow(-2).to_string(), "(1) / (N^2)");
    }
}
