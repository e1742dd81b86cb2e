//! Integer-coefficient polynomials in `P, Q, R` for long derivative chains.
//!
//! `12 D` maps `Z[P, Q, R]` into itself, so `D^n f` is carried as an integer
//! numerator over `L * 12^n`, where `L` clears the denominators of `f`.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{BigInt, BigRational};
use crate::qmring::{Kind, Monomial, QmPoly};

pub(crate) type IntTerms = BTreeMap<Monomial, BigInt>;

fn bump(out: &mut IntTerms, m: Monomial, delta: BigInt) {
    use std::collections::btree_map::Entry;
    match out.entry(m) {
        Entry::Vacant(v) => {
            v.insert(delta);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += delta;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// One application of `12 D`, using
/// `12 DP = P^2 - Q`, `12 DQ = 4 (PQ - R)`, `12 DR = 6 (PR - Q^2)`.
pub(crate) fn derive12(terms: &IntTerms) -> IntTerms {
    let mut out = IntTerms::new();
    for (m, x) in terms {
        let Monomial { p: a, q: b, r: c } = *m;
        let up = a + 4 * b + 6 * c;
        if up > 0 {
            bump(&mut out, Monomial::new(a + 1, b, c), x * up);
        }
        if a > 0 {
            bump(&mut out, Monomial::new(a - 1, b + 1, c), -(x * a));
        }
        if b > 0 {
            bump(&mut out, Monomial::new(a, b - 1, c + 1), -(x * (4 * b)));
        }
        if c > 0 {
            bump(&mut out, Monomial::new(a, b + 2, c - 1), -(x * (6 * c)));
        }
    }
    out
}

/// Splits a rational polynomial into integer numerators over a common denominator.
pub(crate) fn clear_denominators(f: &QmPoly) -> (IntTerms, BigInt) {
    let den = f
        .terms()
        .values()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let terms = f
        .terms()
        .iter()
        .map(|(m, c)| (*m, c.numer() * (&den / c.denom())))
        .collect();
    (terms, den)
}

pub(crate) fn to_poly(terms: &IntTerms, den: &BigInt, weight: u32, kind: Kind) -> QmPoly {
    QmPoly::from_map_unchecked(
        terms
            .iter()
            .map(|(m, c)| (*m, BigRational::new(c.clone(), den.clone())))
            .collect(),
        weight,
        kind,
    )
}

/// `sum c * x^a y^b z^c` for integer coefficients at a rational point.
pub(crate) fn evaluate_terms(terms: &IntTerms, triple: &[BigRational; 3]) -> BigRational {
    if terms.is_empty() {
        return BigRational::zero();
    }
    let common = triple.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = triple
        .iter()
        .map(|x| x.numer() * (&common / x.denom()))
        .collect();
    let max = |f: fn(&Monomial) -> u32| terms.keys().map(f).max().unwrap_or(0) as usize;
    let powers = |base: &BigInt, top: usize| {
        let mut v = Vec::with_capacity(top + 1);
        v.push(BigInt::one());
        for i in 0..top {
            let next = &v[i] * base;
            v.push(next);
        }
        v
    };
    let px = powers(&scaled[0], max(|m| m.p));
    let py = powers(&scaled[1], max(|m| m.q));
    let pz = powers(&scaled[2], max(|m| m.r));
    let top_degree = max(|m| m.p + m.q + m.r);
    let pl = powers(&common, top_degree);
    let mut acc = BigInt::zero();
    for (m, c) in terms {
        let (a, b, cc) = (m.p as usize, m.q as usize, m.r as usize);
        if (a > 0 && scaled[0].is_zero()) || (b > 0 && scaled[1].is_zero()) || (cc > 0 && scaled[2].is_zero()) {
            continue;
        }
        acc += c * &px[a] * &py[b] * &pz[cc] * &pl[top_degree - (a + b + cc)];
    }
    BigRational::new(acc, pl[top_degree].clone())
}

/// Incremental `D^n f`, one derivation per `advance`.
#[derive(Clone, Debug)]
pub(crate) struct DerivativeChain {
    num: IntTerms,
    den: BigInt,
    steps: u64,
    weight: u32,
}

impl DerivativeChain {
    /// `f` must be of holomorphic kind; callers check.
    pub(crate) fn new(f: &QmPoly) -> Self {
        let (num, den) = clear_denominators(f);
        DerivativeChain {
            num,
            den,
            steps: 0,
            weight: f.weight(),
        }
    }

    pub(crate) fn steps(&self) -> u64 {
        self.steps
    }

    pub(crate) fn numerators(&self) -> &IntTerms {
        &self.num
    }

    /// Denominator of the current derivative: `L * 12^steps`.
    pub(crate) fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub(crate) fn advance(&mut self) {
        self.num = derive12(&self.num);
        self.den *= 12;
        self.steps += 1;
        self.weight += 2;
    }

    pub(crate) fn advance_to(&mut self, n: u64) {
        while self.steps < n {
            self.advance();
        }
    }

    pub(crate) fn poly(&self, kind: Kind) -> QmPoly {
        to_poly(&self.num, &self.den, self.weight, kind)
    }

    pub(crate) fn evaluate(&self, triple: &[BigRational; 3]) -> BigRational {
        evaluate_terms(&self.num, triple) / BigRational::from_integer(self.den.clone())
    }
}
