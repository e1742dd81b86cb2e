//! Exact integer and rational helpers.

use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use num_bigint::{BigInt, BigUint, Sign};
pub use num_rational::BigRational;

use crate::error::{Error, Result};

/// Trial bound used when presenting factorizations.
pub const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;

/// A p-adic valuation: finite, or `Infinite` for zero.
///
/// `Finite(_) < Infinite`, so `>=` comparisons against a required bound
/// treat zero as divisible by every power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn is_at_least(self, bound: i64) -> bool {
        self >= Valuation::Finite(bound)
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

/// Serializes as an integer, or the string `"inf"`.
impl serde::Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => s.serialize_i64(*v),
            Valuation::Infinite => s.serialize_str("inf"),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int<T: Into<BigInt>>(n: T) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Renders a rational as `num/den`, or `num` when the denominator is 1.
pub fn rat_to_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Always renders `num/den`, the machine-readable form.
pub fn rat_to_fraction(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `num` or `num/den`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::InvalidArgument(format!("zero denominator in {s:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Deterministic primality for the small moduli used throughout.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Guards the `p >= 5 prime` precondition shared by most operations.
pub fn check_prime(p: u64) -> Result<()> {
    if p >= 5 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::BadPrime(p))
    }
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &is_p)| is_p.then_some(i as u64))
        .collect()
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Falling factorial `n (n-1) ... (n-r+1)`.
pub fn falling_factorial(n: u64, r: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..r {
        acc *= n - i;
    }
    acc
}

fn bernoulli_table() -> &'static Mutex<Vec<BigRational>> {
    static TABLE: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(vec![BigRational::one()]))
}

/// Product of primes `q` with `(q - 1) | k`: the denominator of `B_k` for even `k >= 2`.
pub fn von_staudt_clausen_denominator(k: u32) -> BigInt {
    let mut d = BigInt::one();
    for q in primes_up_to(k as u64 + 1) {
        if (k as u64).is_multiple_of(q - 1) {
            d *= q;
        }
    }
    d
}

/// Bernoulli number `B_k` (with `B_1 = -1/2`) from the convolution recurrence
/// `sum_{j<=k} C(k+1, j) B_j = 0`.
pub fn bernoulli(k: u32) -> Result<BigRational> {
    if k > 1 && k % 2 == 1 {
        return Err(Error::OddBernoulli(k));
    }
    let mut table = bernoulli_table().lock().unwrap_or_else(|e| e.into_inner());
    let k = k as usize;
    while table.len() <= k {
        let n = table.len();
        let next = if n > 1 && n % 2 == 1 {
            BigRational::zero()
        } else {
            let mut sum = BigRational::zero();
            for (j, b) in table.iter().enumerate() {
                if !b.is_zero() {
                    sum += b * rat_int(binomial(n as u64 + 1, j as u64));
                }
            }
            -sum / rat_int(n as u64 + 1)
        };
        if n >= 2 && n.is_multiple_of(2) {
            assert_eq!(
                next.denom(),
                &von_staudt_clausen_denominator(n as u32),
                "Bernoulli denominator check failed at {n}"
            );
        }
        table.push(next);
    }
    Ok(table[k].clone())
}

/// `v_p(x)` for a nonzero integer, `None` for zero.
pub fn int_valuation(x: &BigInt, p: u64) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut x = x.abs();
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        x = q;
        v += 1;
    }
}

/// `v_p(num) - v_p(den)`, or `Infinite` for zero.
pub fn padic_valuation(x: &BigRational, p: u64) -> Valuation {
    match int_valuation(x.numer(), p) {
        None => Valuation::Infinite,
        Some(vn) => {
            let vd = int_valuation(x.denom(), p).unwrap_or(0);
            Valuation::Finite(vn as i64 - vd as i64)
        }
    }
}

/// Canonical residue of `x` in `[0, modulus)`, or `None` if the denominator
/// is not invertible.
pub fn rational_residue(x: &BigRational, modulus: &BigInt) -> Option<BigInt> {
    let den = x.denom().mod_floor(modulus);
    let inv = mod_inverse(&den, modulus)?;
    Some((x.numer().mod_floor(modulus) * inv).mod_floor(modulus))
}

pub fn mod_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(modulus).extended_gcd(modulus);
    e.gcd.is_one().then(|| e.x.mod_floor(modulus))
}

/// Result of trial division up to a bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorList {
    pub negative: bool,
    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub factors: Vec<(u64, u32)>,
    /// Leftover with no prime factor below the bound; primality is not claimed.
    pub cofactor: BigInt,
}

impl FactorList {
    pub fn multiply_back(&self) -> BigInt {
        let mut acc = self.cofactor.clone();
        for &(q, e) in &self.factors {
            acc *= num_traits::pow(BigInt::from(q), e as usize);
        }
        if self.negative {
            -acc
        } else {
            acc
        }
    }

    pub fn exponent_of(&self, q: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(r, _)| r == q)
            .map_or(0, |&(_, e)| e)
    }
}

impl fmt::Display for FactorList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        let mut parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(q, e)| if e == 1 { q.to_string() } else { format!("{q}^{e}") })
            .collect();
        if !self.cofactor.is_one() || parts.is_empty() {
            parts.push(self.cofactor.to_string());
        }
        f.write_str(&parts.join(" * "))
    }
}

fn cached_primes(bound: u64) -> Vec<u64> {
    static CACHE: OnceLock<Mutex<(u64, Vec<u64>)>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((1, Vec::new())));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if guard.0 < bound {
        *guard = (bound, primes_up_to(bound));
    }
    guard.1.iter().copied().take_while(|&q| q <= bound).collect()
}

/// Trial division of `x` by every prime up to `bound`.
pub fn factor_bounded(x: &BigInt, bound: u64) -> Result<FactorList> {
    if x.is_zero() {
        return Err(Error::InvalidArgument("cannot factor zero".into()));
    }
    if bound < 2 {
        return Err(Error::InvalidArgument(format!("trial bound {bound} < 2")));
    }
    let mut rest = x.magnitude().clone();
    let mut factors = Vec::new();
    for q in cached_primes(bound) {
        if rest.is_one() {
            break;
        }
        // Everything left is prime once q^2 exceeds it.
        if let Some(r) = rest.to_u64() {
            if q.saturating_mul(q) > r {
                if r <= bound {
                    factors.push((r, 1));
                    rest = BigUint::one();
                }
                break;
            }
        }
        let mut e = 0;
        loop {
            let (quot, r) = rest.div_rem(&BigUint::from(q));
            if !r.is_zero() {
                break;
            }
            rest = quot;
            e += 1;
        }
        if e > 0 {
            factors.push((q, e));
        }
    }
    Ok(FactorList {
        negative: x.is_negative(),
        factors,
        cofactor: BigInt::from(rest),
    })
}
