//! Supersingular polynomials from `E_{p-1}`.
//!
//! Writing `p - 1 = 12n + 4 delta + 6 epsilon`, the form `E_{p-1}` factors as
//! `Delta^n Q^delta R^epsilon f(j)` with `f` of degree `n`, and
//! `ss_p(j) = +- j^delta (j - 1728)^epsilon f(j) mod p`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{ToPrimitive, Zero};

use crate::arith::{self, rat_int, BigInt, BigRational};
use crate::error::{Error, Result};
use crate::linalg;
use crate::qmring::{delta_poly, eisenstein_poly, Kind, Monomial, QmPoly};

/// `E_{p-1} = Delta^n Q^delta R^epsilon ftilde(Q^3 / Delta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KzDecomposition {
    pub p: u64,
    pub n: u32,
    pub delta: u32,
    pub epsilon: u32,
    /// Coefficients of `ftilde`, constant term first.
    pub ftilde: Vec<BigRational>,
}

impl KzDecomposition {
    /// Rebuilds `Delta^n Q^delta R^epsilon ftilde(Q^3/Delta)` as a polynomial in `Q, R`.
    pub fn reassemble(&self) -> QmPoly {
        let q = QmPoly::var_q();
        let r = QmPoly::var_r();
        let delta = delta_poly();
        let weight = 12 * self.n;
        let mut body = QmPoly::zero(weight, Kind::HolomorphicP);
        for (i, a) in self.ftilde.iter().enumerate() {
            let term = (&q.pow(3 * i as u32) * &delta.pow(self.n - i as u32)).scale(a);
            body = &body + &term;
        }
        &(&body * &q.pow(self.delta)) * &r.pow(self.epsilon)
    }
}

/// Splits a weight `w` as `12n + 4 delta + 6 epsilon` with `delta <= 2`, `epsilon <= 1`.
fn split_weight(w: u32) -> Option<(u32, u32, u32)> {
    (0..=1u32)
        .flat_map(|e| (0..=2u32).map(move |d| (d, e)))
        .filter(|&(d, e)| 4 * d + 6 * e <= w && (w - 4 * d - 6 * e).is_multiple_of(12))
        .min_by_key(|&(d, e)| 4 * d + 6 * e)
        .map(|(d, e)| ((w - 4 * d - 6 * e) / 12, d, e))
}

pub fn kz_decompose(p: u64) -> Result<KzDecomposition> {
    arith::check_prime(p)?;
    let w = p as u32 - 1;
    let a = eisenstein_poly(w)?;
    let (n, delta, epsilon) = split_weight(w).expect("p - 1 is even and at least 4");

    let mut quotient = BTreeMap::new();
    for (m, c) in a.terms() {
        assert!(
            m.q >= delta && m.r >= epsilon,
            "E_{w} is not divisible by Q^{delta} R^{epsilon}"
        );
        quotient.insert(Monomial::new(0, m.q - delta, m.r - epsilon), c.clone());
    }

    // Q^{3i} Delta^{n-i} against the weight-12n monomials Q^{3t} R^{2(n-t)}.
    let q = QmPoly::var_q();
    let dl = delta_poly();
    let columns: Vec<QmPoly> = (0..=n).map(|i| &q.pow(3 * i) * &dl.pow(n - i)).collect();
    let rows: Vec<Monomial> = (0..=n).map(|t| Monomial::new(0, 3 * t, 2 * (n - t))).collect();
    let matrix = rows
        .iter()
        .map(|&m| columns.iter().map(|col| col.coeff(m)).collect())
        .collect();
    let rhs = rows
        .iter()
        .map(|m| quotient.get(m).cloned().unwrap_or_else(BigRational::zero))
        .collect();
    let ftilde = linalg::solve_rational(matrix, rhs).expect("Kaneko-Zagier system is nonsingular");

    let out = KzDecomposition {
        p,
        n,
        delta,
        epsilon,
        ftilde,
    };
    assert_eq!(out.reassemble(), a, "Kaneko-Zagier multiply-back failed at p = {p}");
    Ok(out)
}

/// A monic polynomial in `j` over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsPoly {
    p: u64,
    /// Constant term first; the last entry is 1.
    coeffs: Vec<u64>,
}

impl SsPoly {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p as u128;
        let x = x as u128 % p;
        self.coeffs
            .iter()
            .rev()
            .fold(0u128, |acc, &c| (acc * x + c as u128) % p) as u64
    }

    /// Roots in `F_p`, ascending.
    pub fn roots(&self) -> Vec<u64> {
        (0..self.p).filter(|&x| self.eval(x) == 0).collect()
    }
}

impl fmt::Display for SsPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let var = match i {
                0 => String::new(),
                1 => "j".into(),
                _ => format!("j^{i}"),
            };
            parts.push(match (c, var.is_empty()) {
                (_, true) => c.to_string(),
                (1, false) => var,
                _ => format!("{c}*{var}"),
            });
        }
        write!(f, "{} (mod {})", parts.join(" + "), self.p)
    }
}

fn poly_mul_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[i + k] = ((out[i + k] as u128 + x as u128 * y as u128) % p as u128) as u64;
        }
    }
    out
}

/// `ss_p(j)`, normalized monic.
pub fn ss_poly(p: u64) -> Result<SsPoly> {
    let kz = kz_decompose(p)?;
    let modulus = BigInt::from(p);
    let mut poly = kz
        .ftilde
        .iter()
        .enumerate()
        .map(|(i, c)| {
            arith::rational_residue(c, &modulus)
                .and_then(|r| r.to_u64())
                .ok_or_else(|| Error::PDivisibleDenominator {
                    p,
                    location: format!("coefficient of j^{i} in ftilde"),
                })
        })
        .collect::<Result<Vec<u64>>>()?;
    for _ in 0..kz.delta {
        poly = poly_mul_mod(&poly, &[0, 1], p);
    }
    if kz.epsilon == 1 {
        poly = poly_mul_mod(&poly, &[(p - 1728 % p) % p, 1], p);
    }
    let lead = *poly.last().expect("nonempty");
    assert!(lead != 0, "leading coefficient of ss_{p} vanishes mod p");
    let inv = arith::mod_inverse(&BigInt::from(lead), &modulus)
        .and_then(|x| x.to_u64())
        .expect("p is prime");
    let coeffs = poly
        .into_iter()
        .map(|c| ((c as u128 * inv as u128) % p as u128) as u64)
        .collect();
    Ok(SsPoly { p, coeffs })
}

/// Supersingular `j` in `F_p`, by counting points on one curve per `j`.
pub fn brute_force_supersingular(p: u64) -> Result<Vec<u64>> {
    arith::check_prime(p)?;
    if p > 1000 {
        return Err(Error::InvalidArgument(format!("point-counting oracle is limited to p <= 1000, got {p}")));
    }
    let mut chi = vec![-1i64; p as usize];
    chi[0] = 0;
    for x in 1..p {
        chi[(x * x % p) as usize] = 1;
    }
    let inv = |x: u64| -> u64 {
        arith::mod_inverse(&BigInt::from(x), &BigInt::from(p))
            .and_then(|v| v.to_u64())
            .expect("nonzero mod p")
    };
    let j1728 = 1728 % p;
    let mut out = Vec::new();
    for j in 0..p {
        let (a, b) = if j == 0 {
            (0, 1)
        } else if j == j1728 {
            (1, 0)
        } else {
            // a = b = 27j / (4(1728 - j))
            let k = 27 * j % p * inv(4 * ((j1728 + p - j) % p) % p) % p;
            (k, k)
        };
        let trace: i64 = (0..p)
            .map(|x| chi[((x * x % p * x + a * x + b) % p) as usize])
            .sum();
        if trace.rem_euclid(p as i64) == 0 {
            out.push(j);
        }
    }
    Ok(out)
}

/// `j = 1728 Q^3 / (Q^3 - R^2)` of a triple `(P*, Q, R)`.
pub fn j_invariant(triple: &[BigRational; 3]) -> Result<BigRational> {
    let q3 = &triple[1] * &triple[1] * &triple[1];
    let r2 = &triple[2] * &triple[2];
    if q3 == r2 {
        return Err(Error::Degenerate);
    }
    Ok(rat_int(1728) * &q3 / (q3 - r2))
}
