//! The graded ring of quasimodular forms `Q[P, Q, R]`.
//!
//! A [`QmPoly`] is a weight-homogeneous polynomial, where `P` (or `P*`) has
//! weight 2, `Q` weight 4 and `R` weight 6. `P = E_2`, `Q = E_4`, `R = E_6`.
//! The [`Kind`] flag says whether the first variable is the holomorphic `P`
//! or the almost-holomorphic `P*`; the map `phi` only relabels it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, binomial, rat, rat_int, BigInt, BigRational};
use crate::error::{Error, Result};
use crate::intpoly::DerivativeChain;
use crate::linalg;
use crate::qexp::{self, QSeries};

/// Exponents of `(P or P*, Q, R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub p: u32,
    pub q: u32,
    pub r: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { p: 0, q: 0, r: 0 };

    pub const fn new(p: u32, q: u32, r: u32) -> Self {
        Monomial { p, q, r }
    }

    pub fn weight(&self) -> u32 {
        2 * self.p + 4 * self.q + 6 * self.r
    }

    fn mul(self, o: Monomial) -> Monomial {
        Monomial::new(self.p + o.p, self.q + o.q, self.r + o.r)
    }
}

/// Which weight-2 variable the polynomial is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// `P = E_2`: quasimodular forms.
    HolomorphicP,
    /// `P* = P - 3 / (pi Im z)`: almost holomorphic modular forms.
    StarredP,
}

/// A weight-homogeneous polynomial in `(P | P*), Q, R` with rational coefficients.
///
/// Zero coefficients are never stored. The zero polynomial carries a weight
/// label but compares equal to every other zero of the same kind.
#[derive(Clone, Debug)]
pub struct QmPoly {
    terms: BTreeMap<Monomial, BigRational>,
    weight: u32,
    kind: Kind,
}

impl PartialEq for QmPoly {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.terms == other.terms
            && (self.weight == other.weight || self.terms.is_empty())
    }
}

impl Eq for QmPoly {}

impl QmPoly {
    pub fn zero(weight: u32, kind: Kind) -> Self {
        QmPoly {
            terms: BTreeMap::new(),
            weight,
            kind,
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::monomial(Monomial::ONE, c, Kind::HolomorphicP)
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational, kind: Kind) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        QmPoly {
            terms,
            weight: m.weight(),
            kind,
        }
    }

    pub fn var_p() -> Self {
        Self::monomial(Monomial::new(1, 0, 0), BigRational::one(), Kind::HolomorphicP)
    }

    pub fn var_q() -> Self {
        Self::monomial(Monomial::new(0, 1, 0), BigRational::one(), Kind::HolomorphicP)
    }

    pub fn var_r() -> Self {
        Self::monomial(Monomial::new(0, 0, 1), BigRational::one(), Kind::HolomorphicP)
    }

    /// Builds a polynomial from terms, summing repeated monomials and checking
    /// that all surviving monomials share one weight.
    pub fn from_terms<I>(terms: I, kind: Kind) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut map: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(BigRational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        let mut weight = None;
        for m in map.keys() {
            match weight {
                None => weight = Some(m.weight()),
                Some(w) if w != m.weight() => return Err(Error::WeightMismatch(w, m.weight())),
                Some(_) => {}
            }
        }
        Ok(QmPoly {
            terms: map,
            weight: weight.unwrap_or(0),
            kind,
        })
    }

    pub(crate) fn from_map_unchecked(
        terms: BTreeMap<Monomial, BigRational>,
        weight: u32,
        kind: Kind,
    ) -> Self {
        debug_assert!(terms.keys().all(|m| m.weight() == weight));
        debug_assert!(terms.values().all(|c| !c.is_zero()));
        QmPoly { terms, weight, kind }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigRational> {
        &self.terms
    }

    pub fn coeff(&self, m: Monomial) -> BigRational {
        self.terms.get(&m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no monomial contains the weight-2 variable.
    pub fn is_p_free(&self) -> bool {
        self.terms.keys().all(|m| m.p == 0)
    }

    /// Highest power of the weight-2 variable.
    pub fn p_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.p).max().unwrap_or(0)
    }

    pub fn with_kind(mut self, kind: Kind) -> Self {
        self.kind = kind;
        self
    }

    pub fn scale(&self, c: &BigRational) -> QmPoly {
        if c.is_zero() {
            return QmPoly::zero(self.weight, self.kind);
        }
        QmPoly {
            terms: self.terms.iter().map(|(m, x)| (*m, x * c)).collect(),
            weight: self.weight,
            kind: self.kind,
        }
    }

    fn combine_kind(&self, other: &QmPoly, op: &str) -> Kind {
        if self.kind == other.kind || other.is_zero() {
            self.kind
        } else if self.is_zero() {
            other.kind
        } else {
            panic!("{op} of polynomials of different kinds")
        }
    }

    /// Sum; `Err` on a weight mismatch between nonzero operands.
    pub fn try_add(&self, other: &QmPoly) -> Result<QmPoly> {
        if !self.is_zero() && !other.is_zero() && self.weight != other.weight {
            return Err(Error::WeightMismatch(self.weight, other.weight));
        }
        let kind = self.combine_kind(other, "sum");
        let weight = if self.is_zero() { other.weight } else { self.weight };
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let entry = terms.entry(*m).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(m);
            }
        }
        Ok(QmPoly { terms, weight, kind })
    }

    pub fn pow(&self, e: u32) -> QmPoly {
        let mut acc = QmPoly::one().with_kind(self.kind);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to `Q`.
    pub fn partial_q(&self) -> QmPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.q > 0)
            .map(|(m, c)| (Monomial::new(m.p, m.q - 1, m.r), c * rat_int(m.q)))
            .collect();
        QmPoly::from_map_unchecked(terms, self.weight.saturating_sub(4), self.kind)
    }

    /// Formal partial derivative with respect to `R`.
    pub fn partial_r(&self) -> QmPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.r > 0)
            .map(|(m, c)| (Monomial::new(m.p, m.q, m.r - 1), c * rat_int(m.r)))
            .collect();
        QmPoly::from_map_unchecked(terms, self.weight.saturating_sub(6), self.kind)
    }

    /// Coefficient of `P^i` as a P-free polynomial.
    pub fn p_slice(&self, i: u32) -> QmPoly {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.p == i)
            .map(|(m, c)| (Monomial::new(0, m.q, m.r), c.clone()))
            .collect();
        QmPoly::from_map_unchecked(terms, self.weight.saturating_sub(2 * i), self.kind)
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        use num_integer::Integer;
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

impl Add for &QmPoly {
    type Output = QmPoly;
    fn add(self, other: &QmPoly) -> QmPoly {
        self.try_add(other).expect("sum of polynomials of different weights")
    }
}

impl Sub for &QmPoly {
    type Output = QmPoly;
    fn sub(self, other: &QmPoly) -> QmPoly {
        self + &(-other)
    }
}

impl Neg for &QmPoly {
    type Output = QmPoly;
    fn neg(self) -> QmPoly {
        QmPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
            weight: self.weight,
            kind: self.kind,
        }
    }
}

impl Mul for &QmPoly {
    type Output = QmPoly;
    fn mul(self, other: &QmPoly) -> QmPoly {
        let kind = if self.kind == other.kind || other.is_p_free() {
            self.kind
        } else if self.is_p_free() {
            other.kind
        } else {
            panic!("product of polynomials of different kinds")
        };
        let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *terms.entry(ma.mul(*mb)).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        QmPoly {
            terms,
            weight: self.weight + other.weight,
            kind,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for QmPoly {
            type Output = QmPoly;
            fn $method(self, other: QmPoly) -> QmPoly {
                (&self).$method(&other)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for QmPoly {
    /// Canonical form: monomials in descending lexicographic order of
    /// `(p, q, r)` exponents, e.g. `35/1296*P^5*Q - 1/2*R`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let pname = match self.kind {
            Kind::HolomorphicP => "P",
            Kind::StarredP => "(P*)",
        };
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if i == 0 {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mut factors = Vec::new();
            for (name, e) in [(pname, m.p), ("Q", m.q), ("R", m.r)] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            let coeff = arith::rat_to_string(&mag);
            if factors.is_empty() {
                f.write_str(&coeff)?;
            } else if mag.is_one() {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{coeff}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

fn require_holomorphic(f: &QmPoly, op: &'static str) -> Result<()> {
    if f.kind == Kind::StarredP && !f.is_p_free() {
        return Err(Error::WrongKind {
            op,
            expected: "holomorphic-P",
        });
    }
    Ok(())
}

fn require_modular(f: &QmPoly, op: &'static str) -> Result<()> {
    require_holomorphic(f, op)?;
    if !f.is_p_free() {
        return Err(Error::NotModular { op });
    }
    Ok(())
}

/// The Ramanujan derivation: `DP = (P^2 - Q)/12`, `DQ = (PQ - R)/3`, `DR = (PR - Q^2)/2`.
pub fn derive(f: &QmPoly) -> Result<QmPoly> {
    require_holomorphic(f, "derive")?;
    let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    let mut push = |m: Monomial, c: BigRational| {
        *terms.entry(m).or_insert_with(BigRational::zero) += c;
    };
    for (m, x) in &f.terms {
        let Monomial { p: a, q: b, r: c } = *m;
        let up = a + 4 * b + 6 * c;
        if up > 0 {
            push(Monomial::new(a + 1, b, c), x * rat(up as i64, 12));
        }
        if a > 0 {
            push(Monomial::new(a - 1, b + 1, c), -(x * rat(a as i64, 12)));
        }
        if b > 0 {
            push(Monomial::new(a, b - 1, c + 1), -(x * rat(b as i64, 3)));
        }
        if c > 0 {
            push(Monomial::new(a, b + 2, c - 1), -(x * rat(c as i64, 2)));
        }
    }
    terms.retain(|_, c| !c.is_zero());
    let out = QmPoly::from_map_unchecked(terms, f.weight + 2, Kind::HolomorphicP);
    Ok(out)
}

/// `D^n f`.
pub fn derive_n(f: &QmPoly, n: u64) -> Result<QmPoly> {
    require_holomorphic(f, "derive_n")?;
    if n == 0 {
        return Ok(f.clone().with_kind(Kind::HolomorphicP));
    }
    let mut chain = DerivativeChain::new(f);
    chain.advance_to(n);
    Ok(chain.poly(Kind::HolomorphicP))
}

/// `D^0 f, D^1 f, ..., D^n f`.
pub fn derivatives_up_to(f: &QmPoly, n: u64) -> Result<Vec<QmPoly>> {
    require_holomorphic(f, "derive_n")?;
    let mut chain = DerivativeChain::new(f);
    let mut out = vec![chain.poly(Kind::HolomorphicP)];
    for _ in 0..n {
        chain.advance();
        out.push(chain.poly(Kind::HolomorphicP));
    }
    Ok(out)
}

fn modular_basis(weight: u32) -> Vec<Monomial> {
    (0..=weight / 4)
        .filter(|b| (weight - 4 * b).is_multiple_of(6))
        .map(|b| Monomial::new(0, b, (weight - 4 * b) / 6))
        .collect()
}

/// The `E_k` polynomial in `Q, R` (`k` even, `k >= 4`), found by matching
/// q-expansions with one more coefficient than unknowns.
pub fn eisenstein_poly(k: u32) -> Result<QmPoly> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("Eisenstein weight {k} must be even and >= 4")));
    }
    static CACHE: OnceLock<Mutex<HashMap<u32, QmPoly>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&k) {
        return Ok(hit.clone());
    }

    let basis = modular_basis(k);
    let precision = basis.len() + 1;
    let target = qexp::eisenstein_qexp(k, precision)?;
    let e4 = qexp::eisenstein_qexp(4, precision)?;
    let e6 = qexp::eisenstein_qexp(6, precision)?;
    let columns: Vec<QSeries> = basis.iter().map(|m| e4.pow(m.q).mul(&e6.pow(m.r))).collect();
    let matrix: Vec<Vec<BigRational>> = (0..precision)
        .map(|row| columns.iter().map(|col| col.coeff(row).clone()).collect())
        .collect();
    let solution = linalg::solve_rational(matrix, target.coeffs().to_vec())
        .unwrap_or_else(|| panic!("singular Eisenstein system at weight {k}"));
    let poly = QmPoly::from_terms(basis.into_iter().zip(solution), Kind::HolomorphicP)?;
    let poly = QmPoly { weight: k, ..poly };

    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(k, poly.clone());
    Ok(poly)
}

/// `Delta = (Q^3 - R^2) / 1728`.
pub fn delta_poly() -> QmPoly {
    let q3 = QmPoly::var_q().pow(3);
    let r2 = QmPoly::var_r().pow(2);
    (&q3 - &r2).scale(&rat(1, 1728))
}

/// `A = E_{p-1}` and `B = E_{p+1}` for a prime `p >= 5`.
pub fn hasse_pair(p: u64) -> Result<(QmPoly, QmPoly)> {
    arith::check_prime(p)?;
    Ok((eisenstein_poly(p as u32 - 1)?, eisenstein_poly(p as u32 + 1)?))
}

/// `theta f = (BQ - AR)/3 * df/dQ + (BR - AQ^2)/2 * df/dR` with `A = E_{p-1}`, `B = E_{p+1}`.
pub fn theta(f: &QmPoly, p: u64) -> Result<QmPoly> {
    require_modular(f, "theta")?;
    let (a, b) = hasse_pair(p)?;
    let q = QmPoly::var_q();
    let r = QmPoly::var_r();
    let first = (&(&b * &q) - &(&a * &r)).scale(&rat(1, 3));
    let second = (&(&b * &r) - &(&a * &q.pow(2))).scale(&rat(1, 2));
    let out_weight = f.weight + p as u32 + 1;
    let out = (&first * &f.partial_q()).try_add(&(&second * &f.partial_r()))?;
    Ok(QmPoly { weight: out_weight, ..out })
}

pub fn theta_n(f: &QmPoly, p: u64, n: u32) -> Result<QmPoly> {
    let mut g = f.clone();
    for _ in 0..n {
        g = theta(&g, p)?;
    }
    Ok(g)
}

/// The `n`-th Rankin-Cohen bracket
/// `sum_{r+s=n} (-1)^r C(k+n-1, s) C(k'+n-1, r) D^r f D^s g`.
pub fn rankin_cohen(f: &QmPoly, g: &QmPoly, n: u64) -> Result<QmPoly> {
    require_modular(f, "rankin_cohen")?;
    require_modular(g, "rankin_cohen")?;
    let k = f.weight as u64;
    let kp = g.weight as u64;
    let df = derivatives_up_to(f, n)?;
    let dg = derivatives_up_to(g, n)?;
    let out_weight = (k + kp + 2 * n) as u32;
    let mut acc = QmPoly::zero(out_weight, Kind::HolomorphicP);
    for r in 0..=n {
        let s = n - r;
        let mut c = binomial(k + n - 1, s) * binomial(kp + n - 1, r);
        if r % 2 == 1 {
            c = -c;
        }
        let term = (&df[r as usize] * &dg[s as usize]).scale(&rat_int(c));
        acc = acc.try_add(&term)?;
    }
    let acc = QmPoly { weight: out_weight, ..acc };
    assert!(acc.is_p_free(), "Rankin-Cohen bracket retained P");
    Ok(acc)
}

fn substitute_series(kind_series: [&QSeries; 3], f: &QmPoly) -> QSeries {
    let precision = kind_series[0].precision();
    let mut cache: HashMap<(usize, u32), QSeries> = HashMap::new();
    let mut power = |var: usize, e: u32| -> QSeries {
        cache
            .entry((var, e))
            .or_insert_with(|| kind_series[var].pow(e))
            .clone()
    };
    let mut acc = QSeries::zero(precision);
    for (m, c) in &f.terms {
        let s = power(0, m.p).mul(&power(1, m.q)).mul(&power(2, m.r));
        acc = acc.add(&s.scale(c));
    }
    acc
}

/// Substitutes the `E_2, E_4, E_6` expansions for `P, Q, R`.
pub fn to_qseries(f: &QmPoly, precision: usize) -> Result<QSeries> {
    require_holomorphic(f, "to_qseries")?;
    let e2 = qexp::eisenstein_qexp(2, precision)?;
    let e4 = qexp::eisenstein_qexp(4, precision)?;
    let e6 = qexp::eisenstein_qexp(6, precision)?;
    Ok(substitute_series([&e2, &e4, &e6], f))
}

/// The relabeling `P -> P*`.
pub fn phi(f: &QmPoly) -> Result<QmPoly> {
    require_holomorphic(f, "phi")?;
    Ok(f.clone().with_kind(Kind::StarredP))
}

/// Substitutes `(P*, Q, R) <- triple`.
pub fn evaluate(f: &QmPoly, triple: &[BigRational; 3]) -> Result<BigRational> {
    if f.kind == Kind::HolomorphicP && !f.is_p_free() {
        return Err(Error::WrongKind {
            op: "evaluate",
            expected: "starred-P (or P-free)",
        });
    }
    let (num, den) = crate::intpoly::clear_denominators(f);
    Ok(crate::intpoly::evaluate_terms(&num, triple) / BigRational::from_integer(den))
}
