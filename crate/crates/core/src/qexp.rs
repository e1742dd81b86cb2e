//! Truncated q-expansions over the rationals and over `Z/p^m`.
//!
//! Precision is carried by the value: binary operations truncate to the
//! smaller operand, never grow silently.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{self, check_prime, rat_int, BigInt, BigRational};
use crate::error::{Error, Result};

/// `sum_{d | n} d^k`.
pub fn sigma(k: u32, n: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidArgument("sigma(k, 0) is undefined".into()));
    }
    let mut acc = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            acc += num_traits::pow(BigInt::from(d), k as usize);
            let e = n / d;
            if e != d {
                acc += num_traits::pow(BigInt::from(e), k as usize);
            }
        }
        d += 1;
    }
    Ok(acc)
}

/// `c_0 + c_1 q + ... + c_{N-1} q^{N-1}` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<BigRational>,
}

impl QSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(!coeffs.is_empty(), "precision must be positive");
        QSeries { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    pub fn zero(precision: usize) -> Self {
        Self::new(vec![BigRational::zero(); precision])
    }

    pub fn constant(c: BigRational, precision: usize) -> Self {
        let mut s = Self::zero(precision);
        s.coeffs[0] = c;
        s
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &BigRational {
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn truncate(&self, precision: usize) -> Self {
        Self::new(self.coeffs[..precision.min(self.precision())].to_vec())
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let n = self.precision().min(other.precision());
        QSeries::new((0..n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect())
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        let n = self.precision().min(other.precision());
        QSeries::new((0..n).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect())
    }

    pub fn scale(&self, c: &BigRational) -> QSeries {
        QSeries::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.precision().min(other.precision());
        let mut out = vec![BigRational::zero(); n];
        for (i, a) in self.coeffs[..n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        QSeries::new(out)
    }

    pub fn pow(&self, e: u32) -> QSeries {
        let mut acc = QSeries::constant(BigRational::one(), self.precision());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// The Fourier-side derivative `q d/dq`: `c_n -> n c_n`.
    pub fn derive(&self) -> QSeries {
        QSeries::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * rat_int(n as u64))
                .collect(),
        )
    }

    pub fn derive_n(&self, times: u64) -> QSeries {
        QSeries::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * rat_int(num_traits::pow(BigInt::from(n), times as usize)))
                .collect(),
        )
    }

    /// Reduces every coefficient mod `p^m`.
    pub fn reduce(&self, p: u64, m: u32) -> Result<ModQSeries> {
        check_prime(p)?;
        if m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        let modulus = num_traits::pow(BigInt::from(p), m as usize);
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                arith::rational_residue(c, &modulus).ok_or_else(|| Error::PDivisibleDenominator {
                    p,
                    location: format!("coefficient of q^{i}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModQSeries { p, m, modulus, coeffs })
    }

    /// Evaluates the truncated series at a real `q`.
    pub fn eval_f64(&self, q: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * q + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(n, c)| match n {
                0 => arith::rat_to_string(c),
                1 => format!("{}*q", arith::rat_to_string(c)),
                _ => format!("{}*q^{n}", arith::rat_to_string(c)),
            })
            .collect();
        if parts.is_empty() {
            f.write_str("0")?;
        } else {
            f.write_str(&parts.join(" + "))?;
        }
        write!(f, " + O(q^{})", self.precision())
    }
}

/// `sigma` for the Eisenstein expansions, where `n >= 1` always holds.
fn sigma_pos(k: u32, n: u64) -> BigInt {
    sigma(k, n).expect("n >= 1")
}

/// `E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n` truncated to `precision` terms.
pub fn eisenstein_qexp(k: u32, precision: usize) -> Result<QSeries> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Eisenstein weight {k} must be even and >= 2")));
    }
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    let factor = -rat_int(2 * k as u64) / arith::bernoulli(k)?;
    let mut coeffs = Vec::with_capacity(precision);
    coeffs.push(BigRational::one());
    for n in 1..precision as u64 {
        coeffs.push(&factor * rat_int(sigma_pos(k - 1, n)));
    }
    Ok(QSeries::new(coeffs))
}

/// A truncated series over `Z/p^m`, coefficients stored as canonical residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModQSeries {
    p: u64,
    m: u32,
    modulus: BigInt,
    coeffs: Vec<BigInt>,
}

impl ModQSeries {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn check_compatible(&self, other: &ModQSeries) -> Result<()> {
        if self.p != other.p || self.m != other.m {
            return Err(Error::ModulusMismatch(self.p, self.m, other.p, other.m));
        }
        Ok(())
    }

    fn with_coeffs(&self, coeffs: Vec<BigInt>) -> ModQSeries {
        ModQSeries {
            p: self.p,
            m: self.m,
            modulus: self.modulus.clone(),
            coeffs,
        }
    }

    pub fn add(&self, other: &ModQSeries) -> Result<ModQSeries> {
        self.check_compatible(other)?;
        let n = self.precision().min(other.precision());
        Ok(self.with_coeffs(
            (0..n)
                .map(|i| (&self.coeffs[i] + &other.coeffs[i]).mod_floor(&self.modulus))
                .collect(),
        ))
    }

    pub fn sub(&self, other: &ModQSeries) -> Result<ModQSeries> {
        self.check_compatible(other)?;
        let n = self.precision().min(other.precision());
        Ok(self.with_coeffs(
            (0..n)
                .map(|i| (&self.coeffs[i] - &other.coeffs[i]).mod_floor(&self.modulus))
                .collect(),
        ))
    }

    pub fn mul(&self, other: &ModQSeries) -> Result<ModQSeries> {
        self.check_compatible(other)?;
        let n = self.precision().min(other.precision());
        let mut out = vec![BigInt::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += &self.coeffs[i] * &other.coeffs[j];
            }
        }
        Ok(self.with_coeffs(out.into_iter().map(|c| c.mod_floor(&self.modulus)).collect()))
    }

    pub fn derive(&self) -> ModQSeries {
        self.derive_n(1)
    }

    pub fn derive_n(&self, times: u64) -> ModQSeries {
        let e = BigInt::from(times);
        self.with_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| (c * BigInt::from(n).modpow(&e, &self.modulus)).mod_floor(&self.modulus))
                .collect(),
        )
    }
}
