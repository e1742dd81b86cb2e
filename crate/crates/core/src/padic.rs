//! Structure mod `p^m`: reduction of polynomials, divisibility by powers of
//! `A = E_{p-1}`, the filtration, and the valuation with respect to the
//! ideal `(A^p, p)`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{self, check_prime, int_valuation, BigInt, BigRational, Valuation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::qmring::{eisenstein_poly, Kind, Monomial, QmPoly};

/// A weight-homogeneous polynomial over `Z/p^m`, residues in `[0, p^m)`.
#[derive(Clone, Debug)]
pub struct ModPoly {
    p: u64,
    m: u32,
    modulus: BigInt,
    terms: BTreeMap<Monomial, BigInt>,
    weight: u32,
    kind: Kind,
}

impl PartialEq for ModPoly {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.m == other.m
            && self.kind == other.kind
            && self.terms == other.terms
            && (self.weight == other.weight || self.terms.is_empty())
    }
}

impl Eq for ModPoly {}

impl ModPoly {
    fn build(p: u64, m: u32, terms: BTreeMap<Monomial, BigInt>, weight: u32, kind: Kind) -> Self {
        let modulus = num_traits::pow(BigInt::from(p), m as usize);
        let terms = terms
            .into_iter()
            .map(|(k, v)| (k, v.mod_floor(&modulus)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        ModPoly {
            p,
            m,
            modulus,
            terms,
            weight,
            kind,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `p^m`.
    pub fn modulus(&self) -> &BigInt {
        &self.modulus
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_p_free(&self) -> bool {
        self.terms.keys().all(|m| m.p == 0)
    }

    fn check_compatible(&self, other: &ModPoly) -> Result<()> {
        if self.p != other.p || self.m != other.m {
            return Err(Error::ModulusMismatch(self.p, self.m, other.p, other.m));
        }
        Ok(())
    }

    pub fn mul(&self, other: &ModPoly) -> Result<ModPoly> {
        self.check_compatible(other)?;
        let mut terms: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = Monomial::new(ma.p + mb.p, ma.q + mb.q, ma.r + mb.r);
                *terms.entry(m).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        Ok(Self::build(self.p, self.m, terms, self.weight + other.weight, self.kind))
    }

    pub fn sub(&self, other: &ModPoly) -> Result<ModPoly> {
        self.check_compatible(other)?;
        if !self.is_zero() && !other.is_zero() && self.weight != other.weight {
            return Err(Error::WeightMismatch(self.weight, other.weight));
        }
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(*m).or_insert_with(BigInt::zero) -= c;
        }
        let weight = if self.is_zero() { other.weight } else { self.weight };
        Ok(Self::build(self.p, self.m, terms, weight, self.kind))
    }

    pub fn pow(&self, e: u32) -> ModPoly {
        let mut acc = Self::build(
            self.p,
            self.m,
            BTreeMap::from([(Monomial::ONE, BigInt::one())]),
            0,
            self.kind,
        );
        for _ in 0..e {
            acc = acc.mul(self).expect("same modulus");
        }
        acc
    }

    /// Reduction to a smaller exponent `m' <= m`.
    pub fn reduce_to(&self, m: u32) -> ModPoly {
        assert!(m >= 1 && m <= self.m);
        Self::build(self.p, m, self.terms.clone(), self.weight, self.kind)
    }

    /// Lifts residues to integer representatives in `[0, p^m)`.
    pub fn lift(&self) -> QmPoly {
        QmPoly::from_terms(
            self.terms
                .iter()
                .map(|(m, c)| (*m, BigRational::from_integer(c.clone()))),
            self.kind,
        )
        .map(|f| if f.is_zero() { QmPoly::zero(self.weight, self.kind) } else { f })
        .expect("homogeneous by construction")
    }

    /// Coefficient of `P^i`, as a P-free polynomial.
    fn p_slice(&self, i: u32) -> BTreeMap<Monomial, BigInt> {
        self.terms
            .iter()
            .filter(|(m, _)| m.p == i)
            .map(|(m, c)| (Monomial::new(0, m.q, m.r), c.clone()))
            .collect()
    }
}

impl std::fmt::Display for ModPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {}^{})", self.lift(), self.p, self.m)
    }
}

/// Coefficient-wise reduction of `f` into `(Z/p^m)[P, Q, R]`.
pub fn reduce_poly(f: &QmPoly, p: u64, m: u32) -> Result<ModPoly> {
    check_prime(p)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    let modulus = num_traits::pow(BigInt::from(p), m as usize);
    let mut terms = BTreeMap::new();
    for (mono, c) in f.terms() {
        let residue = arith::rational_residue(c, &modulus).ok_or_else(|| {
            Error::PDivisibleDenominator {
                p,
                location: format!("term P^{} Q^{} R^{}", mono.p, mono.q, mono.r),
            }
        })?;
        terms.insert(*mono, residue);
    }
    Ok(ModPoly::build(p, m, terms, f.weight(), f.kind()))
}

/// `A = E_{p-1}` reduced mod `p^m`.
pub fn hasse_mod(p: u64, m: u32) -> Result<ModPoly> {
    check_prime(p)?;
    reduce_poly(&eisenstein_poly(p as u32 - 1)?, p, m)
}

fn qr_basis(weight: u32) -> Vec<Monomial> {
    (0..=weight / 4)
        .filter(|b| (weight - 4 * b).is_multiple_of(6))
        .map(|b| Monomial::new(0, b, (weight - 4 * b) / 6))
        .collect()
}

fn small(x: &BigInt) -> u64 {
    x.to_u64().expect("residue mod p fits in u64")
}

/// Exact division of a P-free weight-graded slice by a P-free divisor over F_p,
/// as a homogeneous linear system on the quotient's monomials.
fn divide_slice_mod_p(
    slice: &BTreeMap<Monomial, BigInt>,
    slice_weight: u32,
    divisor: &ModPoly,
    p: u64,
) -> Option<BTreeMap<Monomial, BigInt>> {
    if slice.is_empty() {
        return Some(BTreeMap::new());
    }
    if slice_weight < divisor.weight {
        return None;
    }
    let unknowns = qr_basis(slice_weight - divisor.weight);
    if unknowns.is_empty() {
        return None;
    }
    let rows = qr_basis(slice_weight);
    let row_index: BTreeMap<Monomial, usize> = rows.iter().enumerate().map(|(i, m)| (*m, i)).collect();
    let mut matrix = vec![vec![0u64; unknowns.len()]; rows.len()];
    for (col, u) in unknowns.iter().enumerate() {
        for (dm, dc) in &divisor.terms {
            let prod = Monomial::new(0, u.q + dm.q, u.r + dm.r);
            let row = row_index[&prod];
            matrix[row][col] = (matrix[row][col] + small(dc)) % p;
        }
    }
    let rhs: Vec<u64> = rows
        .iter()
        .map(|m| slice.get(m).map_or(0, small))
        .collect();
    let x = linalg::solve_mod_p(matrix, rhs, p)?;
    Some(
        unknowns
            .into_iter()
            .zip(x)
            .filter(|(_, c)| *c != 0)
            .map(|(m, c)| (m, BigInt::from(c)))
            .collect(),
    )
}

/// Divides `f` by a P-free `divisor` over F_p, slice by slice in the P-degree.
fn divide_mod_p(f: &ModPoly, divisor: &ModPoly) -> Option<ModPoly> {
    debug_assert_eq!(f.m, 1);
    let p = f.p;
    let max_p = f.terms.keys().map(|m| m.p).max().unwrap_or(0);
    let mut quotient = BTreeMap::new();
    for i in 0..=max_p {
        let slice = f.p_slice(i);
        let slice_weight = f.weight.checked_sub(2 * i)?;
        let q = divide_slice_mod_p(&slice, slice_weight, divisor, p)?;
        for (m, c) in q {
            quotient.insert(Monomial::new(i, m.q, m.r), c);
        }
    }
    let weight = f.weight.checked_sub(divisor.weight)?;
    Some(ModPoly::build(p, 1, quotient, weight, f.kind))
}

/// Divides `f` by a P-free `divisor` over `Z/p^m`: divide mod p, subtract,
/// divide the residual by p, and repeat `m` times.
pub fn divide_by(f: &ModPoly, divisor: &ModPoly) -> Result<Option<ModPoly>> {
    f.check_compatible(divisor)?;
    if !divisor.is_p_free() {
        return Err(Error::NotModular { op: "divide_by" });
    }
    if f.is_zero() {
        let weight = f.weight.saturating_sub(divisor.weight);
        return Ok(Some(ModPoly::build(f.p, f.m, BTreeMap::new(), weight, f.kind)));
    }
    let (p, m) = (f.p, f.m);
    let divisor_mod_p = divisor.reduce_to(1);
    let mut residual: BTreeMap<Monomial, BigInt> = f.terms.clone();
    let mut quotient: BTreeMap<Monomial, BigInt> = BTreeMap::new();
    let mut scale = BigInt::one();
    let Some(weight) = f.weight.checked_sub(divisor.weight) else {
        return Ok(None);
    };
    for stage in 0..m {
        let current = ModPoly::build(p, 1, residual.clone(), f.weight, f.kind);
        let Some(g) = divide_mod_p(&current, &divisor_mod_p) else {
            return Ok(None);
        };
        for (mono, c) in &g.terms {
            *quotient.entry(*mono).or_insert_with(BigInt::zero) += c * &scale;
        }
        if stage + 1 == m {
            break;
        }
        // residual <- (residual - divisor * g) / p, tracked mod p^(m - stage - 1)
        let remaining = num_traits::pow(BigInt::from(p), (m - stage) as usize);
        for (dm, dc) in &divisor.terms {
            for (gm, gc) in &g.terms {
                let mono = Monomial::new(dm.p + gm.p, dm.q + gm.q, dm.r + gm.r);
                *residual.entry(mono).or_insert_with(BigInt::zero) -= dc * gc;
            }
        }
        let mut next = BTreeMap::new();
        for (mono, c) in residual {
            let c = c.mod_floor(&remaining);
            if c.is_zero() {
                continue;
            }
            let (q, r) = c.div_rem(&BigInt::from(p));
            debug_assert!(r.is_zero(), "residual not divisible by p");
            next.insert(mono, q);
        }
        residual = next;
        scale *= p;
    }
    Ok(Some(ModPoly::build(p, m, quotient, weight, f.kind)))
}

/// Whether `A^t` divides `f` in `(Z/p^m)[P, Q, R]`, returning the quotient.
pub fn divides_apow(f: &ModPoly, t: u32) -> Result<Option<ModPoly>> {
    let a = hasse_mod(f.p, f.m)?;
    divide_by(f, &a.pow(t))
}

/// Lowers the weight of a P-free form by stripping factors `A^(p^(m-1))`
/// while they divide it.
pub fn filtration(f: &ModPoly) -> Result<u32> {
    if !f.is_p_free() {
        return Err(Error::NotModular { op: "filtration" });
    }
    if f.is_zero() {
        return Err(Error::InvalidArgument("filtration of zero is undefined".into()));
    }
    let t = f.p.pow(f.m - 1) as u32;
    let step = t * (f.p as u32 - 1);
    let a_t = hasse_mod(f.p, f.m)?.pow(t);
    let mut current = f.clone();
    while current.weight >= step {
        match divide_by(&current, &a_t)? {
            Some(q) => current = q,
            None => break,
        }
    }
    Ok(current.weight)
}

fn check_p_integral(f: &QmPoly, p: u64) -> Result<()> {
    for (m, c) in f.terms() {
        if int_valuation(c.denom(), p).unwrap_or(0) > 0 {
            return Err(Error::PDivisibleDenominator {
                p,
                location: format!("term P^{} Q^{} R^{}", m.p, m.q, m.r),
            });
        }
    }
    Ok(())
}

struct Membership {
    p: u64,
    a: QmPoly,
    a_powers: BTreeMap<u32, QmPoly>,
}

impl Membership {
    fn new(p: u64) -> Result<Self> {
        Ok(Membership {
            p,
            a: eisenstein_poly(p as u32 - 1)?,
            a_powers: BTreeMap::new(),
        })
    }

    fn a_pow(&mut self, e: u32) -> QmPoly {
        if let Some(x) = self.a_powers.get(&e) {
            return x.clone();
        }
        let x = self.a.pow(e);
        self.a_powers.insert(e, x.clone());
        x
    }

    /// `f in (A^p, p)^n`.
    ///
    /// If `f = 0 mod p` then `f/p` must lie in the `(n-1)`-th power, since
    /// F_p[P, Q, R] is a domain and the top term `A^{pn} g_n` must vanish mod p.
    /// Otherwise `A^{pn}` must divide `f` mod p; any lift `g` of that quotient
    /// works, because two lifts differ by `p h` and `p A^{pn} h` already lies in
    /// the `(n-1)`-th power. Lifting with representatives in `[0, p)` is canonical.
    fn member(&mut self, f: &QmPoly, n: u32) -> Result<bool> {
        if n == 0 || f.is_zero() {
            return Ok(true);
        }
        let p = self.p;
        let reduced = reduce_poly(f, p, 1)?;
        let pr = BigRational::from_integer(BigInt::from(p));
        if reduced.is_zero() {
            return self.member(&f.scale(&pr.recip()), n - 1);
        }
        let e = p as u32 * n;
        let a_bar = reduce_poly(&self.a_pow(e), p, 1)?;
        let Some(g) = divide_by(&reduced, &a_bar)? else {
            return Ok(false);
        };
        let lifted = g.lift();
        let diff = f - &(&self.a_pow(e) * &lifted);
        self.member(&diff.scale(&pr.recip()), n - 1)
    }
}

/// `f in (A^p, p)^n` for a p-integral polynomial.
pub fn in_ideal_power(f: &QmPoly, p: u64, n: u32) -> Result<bool> {
    check_prime(p)?;
    check_p_integral(f, p)?;
    Membership::new(p)?.member(f, n)
}

/// `v(f) = sup { n : f in (A^p, p)^n }`.
///
/// The search stops at `c + floor(w / (p (p - 1))) + 1`, `c` the least
/// coefficient valuation: a decomposition `sum p^(n-i) A^(pi) g_i` can only use
/// `i` with `p i (p - 1) <= w`, so `v(f)` never exceeds `c + floor(w/(p(p-1)))`.
pub fn ideal_valuation(f: &QmPoly, p: u64) -> Result<Valuation> {
    check_prime(p)?;
    if f.kind() == Kind::StarredP && !f.is_p_free() {
        return Err(Error::WrongKind {
            op: "ideal_valuation",
            expected: "holomorphic-P",
        });
    }
    check_p_integral(f, p)?;
    if f.is_zero() {
        return Ok(Valuation::Infinite);
    }
    let c = f
        .terms()
        .values()
        .filter_map(|x| int_valuation(x.numer(), p))
        .min()
        .unwrap_or(0) as u32;
    let cap = c + f.weight() / (p as u32 * (p as u32 - 1)) + 1;
    let mut ctx = Membership::new(p)?;
    for n in 1..=cap {
        if !ctx.member(f, n)? {
            return Ok(Valuation::Finite(n as i64 - 1));
        }
    }
    Ok(Valuation::Finite(cap as i64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_int};
    use crate::qmring::{delta_poly, derive, derive_n, theta_n};
    use proptest::prelude::*;

    fn q() -> QmPoly {
        QmPoly::var_q()
    }
    fn r() -> QmPoly {
        QmPoly::var_r()
    }

    #[test]
    fn reduce_examples() {
        let d5 = derive_n(&q(), 5).unwrap();
        assert!(reduce_poly(&d5, 5, 1).unwrap().is_zero());
        assert!(!reduce_poly(&d5, 5, 2).unwrap().is_zero());

        let half_q = q().scale(&rat(1, 2));
        let got = reduce_poly(&half_q, 7, 1).unwrap();
        assert_eq!(got, reduce_poly(&q().scale(&rat_int(4)), 7, 1).unwrap());

        let bad = q().scale(&rat(1, 7));
        match reduce_poly(&bad, 7, 1) {
            Err(Error::PDivisibleDenominator { location, .. }) => assert!(location.contains("Q^1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn divides_examples() {
        let qr = reduce_poly(&(&q() * &r()), 7, 1).unwrap();
        let quotient = divides_apow(&qr, 1).unwrap().unwrap();
        assert_eq!(quotient, reduce_poly(&q(), 7, 1).unwrap());

        assert!(divides_apow(&reduce_poly(&q(), 7, 1).unwrap(), 1).unwrap().is_none());

        let a2 = reduce_poly(&q().pow(2), 5, 1).unwrap();
        let one = divides_apow(&a2, 2).unwrap().unwrap();
        assert_eq!(one, reduce_poly(&QmPoly::one(), 5, 1).unwrap());
    }

    #[test]
    fn division_with_p_bearing_numerator() {
        // P^2 * E_12 * Q is divisible by E_12 mod 13 (A = E_12 for p = 13)
        let a = eisenstein_poly(12).unwrap();
        let f = &(&QmPoly::var_p().pow(2) * &a) * &q();
        for m in [1, 2, 3] {
            let fm = reduce_poly(&f, 13, m).unwrap();
            let quotient = divides_apow(&fm, 1).unwrap().expect("divisible");
            let expected = reduce_poly(&(&QmPoly::var_p().pow(2) * &q()), 13, m).unwrap();
            assert_eq!(quotient, expected, "m = {m}");
        }
        // but Q^3 alone is not
        assert!(divides_apow(&reduce_poly(&q().pow(3), 13, 1).unwrap(), 1).unwrap().is_none());
    }

    #[test]
    fn hensel_detects_higher_obstruction() {
        // QR + 7 P Q^2: divisible by A = R mod 7 but not mod 49
        let p = QmPoly::var_p();
        let f = &(&q() * &r()) + &(&p * &q().pow(2)).scale(&rat_int(7));
        let mod7 = reduce_poly(&f, 7, 1).unwrap();
        assert!(divides_apow(&mod7, 1).unwrap().is_some());
        let mod49 = reduce_poly(&f, 7, 2).unwrap();
        assert!(divides_apow(&mod49, 1).unwrap().is_none());
    }

    #[test]
    fn filtration_examples() {
        assert_eq!(filtration(&reduce_poly(&(&q() * &r()), 7, 1).unwrap()).unwrap(), 4);
        assert_eq!(filtration(&reduce_poly(&r(), 7, 1).unwrap()).unwrap(), 0);
        assert_eq!(filtration(&reduce_poly(&q(), 5, 1).unwrap()).unwrap(), 0);
        assert_eq!(filtration(&reduce_poly(&delta_poly(), 7, 1).unwrap()).unwrap(), 12);
        assert!(filtration(&reduce_poly(&QmPoly::var_p(), 7, 1).unwrap()).is_err());
        assert!(filtration(&reduce_poly(&QmPoly::zero(4, Kind::HolomorphicP), 7, 1).unwrap()).is_err());
    }

    #[test]
    fn filtration_mod_p_squared() {
        // A^7 * Q has filtration 4 mod 49: one strip of A^(p^(m-1)) = A^7
        let f = &r().pow(7) * &q();
        assert_eq!(filtration(&reduce_poly(&f, 7, 2).unwrap()).unwrap(), 4);
        // R * Q is only weight-lowered mod 7, not mod 49
        assert_eq!(filtration(&reduce_poly(&(&r() * &q()), 7, 2).unwrap()).unwrap(), 10);
    }

    #[test]
    fn valuation_examples() {
        let d5 = derive_n(&q(), 5).unwrap();
        assert_eq!(ideal_valuation(&d5, 5).unwrap(), Valuation::Finite(1));
        assert_eq!(ideal_valuation(&q().scale(&rat_int(25)), 5).unwrap(), Valuation::Finite(2));
        assert_eq!(ideal_valuation(&q().pow(5), 5).unwrap(), Valuation::Finite(1));
        assert_eq!(ideal_valuation(&q(), 5).unwrap(), Valuation::Finite(0));
        assert_eq!(
            ideal_valuation(&QmPoly::zero(4, Kind::HolomorphicP), 5).unwrap(),
            Valuation::Infinite
        );
        assert!(ideal_valuation(&q().scale(&rat(1, 5)), 5).is_err());
        // A^10 + 5 A^5 P^10: in (A^p, p)^2
        let p10 = QmPoly::var_p().pow(10);
        let f = &q().pow(10) + &(&q().pow(5) * &p10).scale(&rat_int(5));
        assert_eq!(ideal_valuation(&f, 5).unwrap(), Valuation::Finite(2));
    }

    /// Independent oracle for primes where `A` is a single monomial
    /// (`Q` for 5, `R` for 7, `QR` for 11): the ideal `(A^p, p)^n` is then
    /// generated by `p^(n-i) A^(pi)` times monomials, so membership is termwise and
    /// `v(f) = min over terms of v_p(c) + floor(e / p)`, `e` the exponent of `A`.
    fn monomial_oracle(f: &QmPoly, p: u64) -> Valuation {
        f.terms()
            .iter()
            .map(|(m, c)| {
                let e = match p {
                    5 => m.q,
                    7 => m.r,
                    11 => m.q.min(m.r),
                    _ => unreachable!(),
                };
                crate::arith::padic_valuation(c, p) + Valuation::Finite((e / p as u32) as i64)
            })
            .min()
            .unwrap_or(Valuation::Infinite)
    }

    #[test]
    fn membership_small_cases() {
        let p = 5;
        let pp = QmPoly::var_p();
        let cases = [
            (q().scale(&rat_int(5)), 1),
            (q().pow(5), 1),
            (&q().pow(5) + &(&pp.pow(2) * &q().pow(4)).scale(&rat_int(5)), 1),
            (&q().pow(5) + &(&pp.pow(2) * &q().pow(4)), 0),
            ((&pp * &r()).scale(&rat_int(25)), 2),
            (&(&pp * &q()) + &r(), 0),
        ];
        for (f, v) in &cases {
            assert_eq!(ideal_valuation(f, p).unwrap(), Valuation::Finite(*v), "f = {f}");
            assert_eq!(monomial_oracle(f, p), Valuation::Finite(*v));
        }
    }

    #[test]
    fn valuation_with_two_term_hasse() {
        // p = 13: A = E_12 = (441 Q^3 + 250 R^2) / 691 is not a monomial
        let p = 13;
        let a13 = eisenstein_poly(12).unwrap().pow(13);
        let f = &a13 * &q();
        assert_eq!(ideal_valuation(&f, p).unwrap(), Valuation::Finite(1));
        assert_eq!(ideal_valuation(&f.scale(&rat_int(13)), p).unwrap(), Valuation::Finite(2));
        let g = &f + &QmPoly::var_p().pow(80).scale(&rat_int(13));
        assert_eq!(ideal_valuation(&g, p).unwrap(), Valuation::Finite(1));
        let h = &f + &QmPoly::var_p().pow(80);
        assert_eq!(ideal_valuation(&h, p).unwrap(), Valuation::Finite(0));
    }

    fn random_poly(weight: u32, p: u64) -> impl Strategy<Value = QmPoly> {
        let monos: Vec<Monomial> = (0..=weight / 2)
            .flat_map(|a| (0..=weight / 4).map(move |b| (a, b)))
            .filter_map(|(a, b)| {
                let rest = weight as i64 - 2 * a as i64 - 4 * b as i64;
                (rest >= 0 && rest % 6 == 0).then(|| Monomial::new(a, b, rest as u32 / 6))
            })
            .collect();
        let n = monos.len();
        prop::collection::vec((0i64..4, 0u32..3, prop::bool::weighted(0.3)), n).prop_map(move |cs| {
            QmPoly::from_terms(
                monos.iter().zip(cs).filter(|(_, (_, _, keep))| *keep).map(|(m, (unit, e, _))| {
                    let c = (unit + 1) * (p as i64).pow(e);
                    (*m, rat_int(c))
                }),
                Kind::HolomorphicP,
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn valuation_matches_monomial_oracle_p5(f in (10u32..30).prop_flat_map(|w| random_poly(2 * w, 5))) {
            prop_assert_eq!(ideal_valuation(&f, 5).unwrap(), monomial_oracle(&f, 5));
        }

        #[test]
        fn valuation_matches_monomial_oracle_p7(f in (20u32..50).prop_flat_map(|w| random_poly(2 * w, 7))) {
            prop_assert_eq!(ideal_valuation(&f, 7).unwrap(), monomial_oracle(&f, 7));
        }
    }

    #[test]
    fn corollary_d2a() {
        for p in [5u64, 7, 11] {
            let a = eisenstein_poly(p as u32 - 1).unwrap();
            assert!(reduce_poly(&derive_n(&a, 2).unwrap(), p, 1).unwrap().is_zero(), "p = {p}");
        }
    }

    #[test]
    fn d_p_is_modular_mod_p() {
        for p in [5u64, 7] {
            for f in [q(), r(), delta_poly(), QmPoly::var_p()] {
                let dp = derive_n(&f, p).unwrap();
                assert!(reduce_poly(&dp, p, 1).unwrap().is_p_free(), "p = {p}, f = {f}");
            }
        }
    }

    #[test]
    fn d_rp_matches_a_theta() {
        let p = 5;
        let a = eisenstein_poly(4).unwrap();
        for r_exp in 1..=2u32 {
            let lhs = reduce_poly(&derive_n(&q(), r_exp as u64 * p).unwrap(), p, 1).unwrap();
            let rhs = &a.pow(r_exp) * &theta_n(&q(), p, r_exp).unwrap();
            assert_eq!(lhs, reduce_poly(&rhs, p, 1).unwrap(), "r = {r_exp}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn valuation_monotone_under_d(b in 0i64..3, c in 0i64..3, s in 0i64..3, e in 0u32..2,
                                      p in prop::sample::select(vec![5u64, 7])) {
            let a = eisenstein_poly(p as u32 - 1).unwrap();
            let f = (&(&q().pow(3).scale(&rat_int(b)) + &r().pow(2).scale(&rat_int(c)))
                + &(&QmPoly::var_p() * &(&q() * &r())).scale(&rat_int(s)))
                .scale(&rat_int(num_traits::pow(BigInt::from(p), e as usize)));
            let f = if f.is_zero() { a.clone() } else { f };
            let vf = ideal_valuation(&f, p).unwrap();
            let vdf = ideal_valuation(&derive(&f).unwrap(), p).unwrap();
            prop_assert!(vdf >= vf);
            let g = &a.pow(p as u32) * &q();
            let vg = ideal_valuation(&g, p).unwrap();
            let vfg = ideal_valuation(&(&f * &g), p).unwrap();
            prop_assert!(vfg >= vf + vg);
        }
    }
}
