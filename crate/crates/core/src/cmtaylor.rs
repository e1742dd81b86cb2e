//! Taylor coefficients of modular forms at CM points.
//!
//! For a CM point `tau` with period `Omega`, the normalized values
//! `P*(tau)/Omega^2, Q(tau)/Omega^4, R(tau)/Omega^6` are rational. Since
//! `d^n f = phi(D^n f)`, the algebraic part `t_f(tau; n)` of `d^n f (tau)` is
//! obtained by substituting that triple into `D^n f` with `P` read as `P*`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;
use std::path::Path;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{
    self, binomial, falling_factorial, padic_valuation, parse_rational, rat_to_fraction, BigInt,
    BigRational, Valuation,
};
use crate::error::{Error, Result};
use crate::intpoly::DerivativeChain;
use crate::qmring::{Kind, Monomial, QmPoly};

const BUILTIN_REGISTRY: &str = include_str!("../data/registry.json");

fn check_discriminant(d: u64) -> Result<()> {
    if d == 0 || !(d.is_multiple_of(4) || d % 4 == 3) {
        return Err(Error::NotDiscriminant(d));
    }
    Ok(())
}

/// Jacobi symbol `(a | n)` for odd `n > 0`.
fn jacobi(a: i64, n: i64) -> i8 {
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut sign = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// The Kronecker symbol `(-d | j)`.
pub fn kronecker_chi(d: u64, j: i64) -> Result<i8> {
    check_discriminant(d)?;
    let disc = -(d as i64);
    if j == 0 {
        return Ok(0);
    }
    let mut sign = if j < 0 { -1 } else { 1 };
    let mut j = j.unsigned_abs() as i64;
    while j % 2 == 0 {
        if disc % 2 == 0 {
            return Ok(0);
        }
        if matches!(disc.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
        j /= 2;
    }
    Ok(sign * jacobi(disc, j))
}

/// Class number (by counting reduced primitive forms) and number of units.
///
/// `-d` should be a fundamental discriminant; this is not checked.
pub fn class_data(d: u64) -> (u64, u64) {
    let mut h = 0;
    let mut a: u64 = 1;
    while 3 * a * a <= d {
        let a_i = a as i64;
        for b in (1 - a_i)..=a_i {
            let num = (b * b) as u64 + d;
            if !num.is_multiple_of(4 * a) {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if a.gcd(&b.unsigned_abs()).gcd(&c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    let w = match d {
        3 => 6,
        4 => 4,
        _ => 2,
    };
    (h, w)
}

/// The Chowla-Selberg period
/// `(2 pi d)^(-1/2) * (prod_{j<d} Gamma(j/d)^chi(j))^(w/(4h))`.
pub fn chowla_selberg(d: u64) -> Result<f64> {
    check_discriminant(d)?;
    let (h, w) = class_data(d);
    let mut log_sum = 0.0;
    for j in 1..d {
        let chi = kronecker_chi(d, j as i64)?;
        if chi != 0 {
            log_sum += f64::from(chi) * statrs::function::gamma::ln_gamma(j as f64 / d as f64);
        }
    }
    let exponent = w as f64 / (4 * h) as f64;
    Ok((exponent * log_sum).exp() / (2.0 * std::f64::consts::PI * d as f64).sqrt())
}

/// True iff `(-d | p)` is `0` or `-1`.
pub fn legendre_applicable(d: u64, p: u64) -> Result<bool> {
    arith::check_prime(p)?;
    Ok(kronecker_chi(d, p as i64)? != 1)
}

fn is_six_smooth(n: &BigInt) -> bool {
    let mut n = n.abs();
    for q in [2u32, 3] {
        let q = BigInt::from(q);
        while n.is_multiple_of(&q) && !n.is_zero() {
            n /= &q;
        }
    }
    n.is_one()
}

fn serialize_rational<S: Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_fraction(x))
}

/// A CM point with its normalized triple `(P*, Q, R) / (Omega^2, Omega^4, Omega^6)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint", into = "RawPoint")]
pub struct CmPoint {
    name: String,
    d: u64,
    triple: [BigRational; 3],
    omega_decimal: String,
    scale_note: String,
}

#[derive(Serialize, Deserialize)]
struct RawPoint {
    name: String,
    d: u64,
    pstar: String,
    q: String,
    r: String,
    omega_decimal: String,
    scale_note: String,
}

impl TryFrom<RawPoint> for CmPoint {
    type Error = Error;

    fn try_from(raw: RawPoint) -> Result<Self> {
        let field = |s: &str, label: &str| {
            parse_rational(s).map_err(|e| Error::Registry(format!("point {:?}, {label}: {e}", raw.name)))
        };
        let triple = [field(&raw.pstar, "pstar")?, field(&raw.q, "q")?, field(&raw.r, "r")?];
        CmPoint::new(&raw.name, raw.d, triple, &raw.omega_decimal, &raw.scale_note)
    }
}

impl From<CmPoint> for RawPoint {
    fn from(pt: CmPoint) -> Self {
        let [pstar, q, r] = pt.triple.each_ref().map(rat_to_fraction);
        RawPoint {
            name: pt.name,
            d: pt.d,
            pstar,
            q,
            r,
            omega_decimal: pt.omega_decimal,
            scale_note: pt.scale_note,
        }
    }
}

impl CmPoint {
    pub fn new(
        name: &str,
        d: u64,
        triple: [BigRational; 3],
        omega_decimal: &str,
        scale_note: &str,
    ) -> Result<Self> {
        let bad = |msg: String| Error::Registry(format!("point {name:?}: {msg}"));
        if name.trim().is_empty() {
            return Err(Error::Registry("point with empty name".into()));
        }
        check_discriminant(d).map_err(|e| bad(e.to_string()))?;
        for (label, x) in ["pstar", "q", "r"].iter().zip(&triple) {
            if !is_six_smooth(x.denom()) {
                return Err(bad(format!("{label} = {x} has a denominator outside Z[1/6]")));
            }
        }
        match omega_decimal.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => {}
            _ => return Err(bad(format!("omega_decimal {omega_decimal:?} is not a positive decimal"))),
        }
        Ok(CmPoint {
            name: name.to_string(),
            d,
            triple,
            omega_decimal: omega_decimal.trim().to_string(),
            scale_note: scale_note.to_string(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn triple(&self) -> &[BigRational; 3] {
        &self.triple
    }

    pub fn omega_decimal(&self) -> &str {
        &self.omega_decimal
    }

    pub fn omega(&self) -> f64 {
        self.omega_decimal.parse().expect("validated on construction")
    }

    pub fn scale_note(&self) -> &str {
        &self.scale_note
    }
}

impl fmt::Display for CmPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.triple.each_ref().map(arith::rat_to_string);
        write!(f, "{} (d = {}): (P*, Q, R) = ({a}, {b}, {c}), Omega = {}", self.name, self.d, self.omega_decimal)
    }
}

/// Named CM points. The shipped registry holds `i` and `tau7`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    points: Vec<CmPoint>,
}

impl Registry {
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_REGISTRY).expect("embedded registry is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let points: Vec<CmPoint> =
            serde_json::from_str(text).map_err(|e| Error::Registry(e.to_string()))?;
        let mut reg = Registry::default();
        for pt in points {
            reg.insert(pt)?;
        }
        Ok(reg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Registry(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.points).expect("points serialize")
    }

    pub fn insert(&mut self, pt: CmPoint) -> Result<()> {
        if self.get(pt.name()).is_some() {
            return Err(Error::Registry(format!("duplicate point name {:?}", pt.name())));
        }
        self.points.push(pt);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&CmPoint> {
        self.points.iter().find(|pt| pt.name == name)
    }

    /// Like [`Registry::get`], with an error listing the known names.
    pub fn lookup(&self, name: &str) -> Result<&CmPoint> {
        self.get(name).ok_or_else(|| {
            Error::Registry(format!("unknown point {name:?}; available: {}", self.names().join(", ")))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.points.iter().map(|pt| pt.name.as_str()).collect()
    }

    pub fn points(&self) -> &[CmPoint] {
        &self.points
    }
}

/// `t_f(tau; n)`, with a denominator in `Z[1/6]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaylorCoeff {
    form: String,
    point: String,
    n: u64,
    #[serde(serialize_with = "serialize_rational")]
    value: BigRational,
}

impl TaylorCoeff {
    pub fn new(form: &str, point: &str, n: u64, value: BigRational) -> Result<Self> {
        if !is_six_smooth(value.denom()) {
            return Err(Error::NotSixIntegral { value: value.to_string() });
        }
        Ok(TaylorCoeff {
            form: form.to_string(),
            point: point.to_string(),
            n,
            value,
        })
    }

    pub fn form(&self) -> &str {
        &self.form
    }

    pub fn point(&self) -> &str {
        &self.point
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn valuation(&self, p: u64) -> Valuation {
        padic_valuation(&self.value, p)
    }

    pub fn with_form(self, form: &str) -> Self {
        TaylorCoeff {
            form: form.to_string(),
            ..self
        }
    }
}

fn require_modular(f: &QmPoly, op: &'static str) -> Result<()> {
    if f.kind() != Kind::HolomorphicP {
        return Err(Error::WrongKind {
            op,
            expected: "holomorphic-P",
        });
    }
    if !f.is_p_free() {
        return Err(Error::NotModular { op });
    }
    Ok(())
}

/// Successive `t_f(tau; n)` for `n = 0, 1, 2, ...`, one derivation per step.
#[derive(Clone, Debug)]
pub struct TaylorChain {
    chain: DerivativeChain,
    form: String,
    point: String,
    triple: [BigRational; 3],
}

impl TaylorChain {
    pub fn new(f: &QmPoly, pt: &CmPoint) -> Result<Self> {
        require_modular(f, "taylor_coeff")?;
        Ok(TaylorChain {
            chain: DerivativeChain::new(f),
            form: f.to_string(),
            point: pt.name.clone(),
            triple: pt.triple.clone(),
        })
    }

    pub fn with_form(mut self, form: &str) -> Self {
        self.form = form.to_string();
        self
    }

    /// Index of the coefficient [`TaylorChain::current`] returns.
    pub fn n(&self) -> u64 {
        self.chain.steps()
    }

    pub fn current(&self) -> Result<TaylorCoeff> {
        let value = self.chain.evaluate(&self.triple);
        TaylorCoeff::new(&self.form, &self.point, self.chain.steps(), value)
    }

    pub fn advance(&mut self) {
        self.chain.advance();
    }

    /// Moves forward to index `n`; never moves backward.
    pub fn seek(&mut self, n: u64) {
        self.chain.advance_to(n);
    }
}

/// `t_f(tau; n)` for a modular (P-free) `f`.
pub fn taylor_coeff(f: &QmPoly, pt: &CmPoint, n: u64) -> Result<TaylorCoeff> {
    let mut chain = TaylorChain::new(f, pt)?;
    chain.seek(n);
    chain.current()
}

/// `d^n f` assembled from the non-holomorphic Leibniz expansion
/// `sum_r T^r C(n, r) (k+n-1)!/(k+n-r-1)! D^(n-r) f` with `T = (P* - P)/12`.
///
/// The holomorphic `P` must cancel completely; the result is starred-P.
pub fn nonholo_eq56(f: &QmPoly, n: u64) -> Result<QmPoly> {
    require_modular(f, "nonholo_eq56")?;
    if n == 0 {
        return Ok(f.clone().with_kind(Kind::StarredP));
    }
    let k = f.weight() as u64;
    let mut chain = DerivativeChain::new(f);
    let mut numerators = vec![chain.numerators().clone()];
    for _ in 0..n {
        chain.advance();
        numerators.push(chain.numerators().clone());
    }
    let den = chain.denominator().clone();

    // keys are exponents of (P*, P, Q, R)
    let mut acc: BTreeMap<(u32, u32, u32, u32), BigInt> = BTreeMap::new();
    for r in 0..=n {
        let c = binomial(n, r) * falling_factorial(k + n - 1, r);
        if c.is_zero() {
            continue;
        }
        let g = &numerators[(n - r) as usize];
        for i in 0..=r {
            let mut ci = &c * binomial(r, i);
            if (r - i) % 2 == 1 {
                ci = -ci;
            }
            for (m, x) in g {
                let key = (i as u32, m.p + (r - i) as u32, m.q, m.r);
                *acc.entry(key).or_insert_with(BigInt::zero) += &ci * x;
            }
        }
    }
    acc.retain(|_, c| !c.is_zero());
    assert!(
        acc.keys().all(|&(_, p, _, _)| p == 0),
        "holomorphic P survived the non-holomorphic expansion"
    );
    let terms = acc
        .into_iter()
        .map(|((ps, _, q, r), c)| (Monomial::new(ps, q, r), BigRational::new(c, den.clone())))
        .collect();
    Ok(QmPoly::from_map_unchecked(terms, f.weight() + 2 * n as u32, Kind::StarredP))
}

/// Which bound a sweep checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// `v_p >= m` for `n >= (m-1) p^2`, `m > 1`.
    Weak,
    /// `v_p >= m` for `n >= ceil(m/2) p^2`, with `m <= k-2` and `p >= 2k-2`.
    Sharp,
    /// The sharp bound without its extra hypotheses; nothing is enforced.
    Conjecture,
}

impl SweepMode {
    /// First `n` at which `v_p(t) >= m` is required.
    pub fn threshold(self, p: u64, m: u32) -> u64 {
        let m = m as u64;
        match self {
            SweepMode::Weak => (m.saturating_sub(1)) * p * p,
            SweepMode::Sharp | SweepMode::Conjecture => m.div_ceil(2) * p * p,
        }
    }
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMode::Weak => "weak",
            SweepMode::Sharp => "sharp",
            SweepMode::Conjecture => "conjecture",
        })
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(SweepMode::Weak),
            "sharp" => Ok(SweepMode::Sharp),
            "conjecture" => Ok(SweepMode::Conjecture),
            _ => Err(Error::InvalidArgument(format!(
                "unknown mode {s:?}; expected weak, sharp or conjecture"
            ))),
        }
    }
}

/// One `(n, m)` check. `required` is `None` below the mode's threshold, in
/// which case the row passes vacuously.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub form: String,
    pub point: String,
    pub p: u64,
    pub m: u32,
    pub n: u64,
    pub valuation: Valuation,
    pub required: Option<u32>,
    pub pass: bool,
    pub mode: SweepMode,
    pub hypotheses_hold: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    rows: Vec<ReportRow>,
}

impl Report {
    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
        self.normalize();
    }

    /// Stable sort by `(n, m)`.
    pub fn normalize(&mut self) {
        self.rows.sort_by_key(|row| (row.n, row.m));
    }

    pub fn relabel_form(&mut self, form: &str) {
        for row in &mut self.rows {
            row.form = form.to_string();
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|row| row.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|row| !row.pass)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            out.push_str(&serde_json::to_string(row).expect("rows serialize"));
            out.push('\n');
        }
        out
    }
}

/// Checks the sweep hypotheses for `mode`. Returns whether all of the
/// mode's hypotheses hold; in conjecture mode a violation is reported, not raised.
fn check_hypotheses(k: u32, d: u64, p: u64, m: u32, mode: SweepMode) -> Result<bool> {
    let legendre = legendre_applicable(d, p)?;
    let k = k as u64;
    let m64 = m as u64;
    let legendre_msg = || format!("(-{d}/{p}) = +1, but the bound needs it in {{0, -1}}");
    match mode {
        SweepMode::Weak => {
            if !legendre {
                return Err(Error::Hypothesis(legendre_msg()));
            }
            if m < 2 {
                return Err(Error::Hypothesis(format!("weak mode needs m > 1, got m = {m}")));
            }
            Ok(true)
        }
        SweepMode::Sharp => {
            if !legendre {
                return Err(Error::Hypothesis(legendre_msg()));
            }
            if m < 2 {
                return Err(Error::Hypothesis(format!("sharp mode needs m > 1, got m = {m}")));
            }
            if k < 2 || m64 > k - 2 {
                return Err(Error::Hypothesis(format!("sharp mode needs m <= k - 2, got m = {m}, k = {k}")));
            }
            if p + 2 < 2 * k {
                return Err(Error::Hypothesis(format!("sharp mode needs p >= 2k - 2, got p = {p}, k = {k}")));
            }
            Ok(true)
        }
        SweepMode::Conjecture => Ok(legendre && p >= k && m > 1),
    }
}

/// Sweeps `v_p(t_f(tau; n))` over `range` against the bound `m` for `mode`.
pub fn sweep(
    f: &QmPoly,
    pt: &CmPoint,
    p: u64,
    m: u32,
    range: RangeInclusive<u64>,
    mode: SweepMode,
) -> Result<Report> {
    sweep_levels(f, pt, p, &[m], range, mode)
}

/// [`sweep`] for several `m` at once, sharing one derivative chain.
pub fn sweep_levels(
    f: &QmPoly,
    pt: &CmPoint,
    p: u64,
    levels: &[u32],
    range: RangeInclusive<u64>,
    mode: SweepMode,
) -> Result<Report> {
    arith::check_prime(p)?;
    require_modular(f, "sweep")?;
    if levels.is_empty() || levels.contains(&0) {
        return Err(Error::InvalidArgument("sweep levels must be positive".into()));
    }
    let holds = levels
        .iter()
        .map(|&m| check_hypotheses(f.weight(), pt.d, p, m, mode))
        .collect::<Result<Vec<_>>>()?;
    let form = f.to_string();
    let mut chain = TaylorChain::new(f, pt)?.with_form(&form);
    let mut report = Report::default();
    for n in range {
        chain.seek(n);
        let coeff = chain.current()?;
        let v = coeff.valuation(p);
        for (&m, &hypotheses_hold) in levels.iter().zip(&holds) {
            let required = (n >= mode.threshold(p, m)).then_some(m);
            report.push(ReportRow {
                form: form.clone(),
                point: pt.name.clone(),
                p,
                m,
                n,
                valuation: v,
                required,
                pass: required.is_none_or(|m| v.is_at_least(m as i64)),
                mode,
                hypotheses_hold,
            });
        }
    }
    report.normalize();
    Ok(report)
}
