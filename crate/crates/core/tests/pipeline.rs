use proptest::prelude::*;
use qmlab_core::arith::{rat, rat_int, rational_residue};
use qmlab_core::cmtaylor::{sweep, taylor_coeff};
use qmlab_core::qmring::{delta_poly, derive, rankin_cohen, theta, to_qseries};
use qmlab_core::ssing::{j_invariant, ss_poly};
use qmlab_core::{BigInt, Kind, Monomial, QmPoly, Registry, SweepMode};

const USER_POINTS: &str = r#"[
  {"name": "i2", "d": 4, "pstar": "0/1", "q": "3/1", "r": "0/1",
   "omega_decimal": "0.834626841674073186", "scale_note": "sqrt(2) * Omega*_{-4}"},
  {"name": "tau7", "d": 7, "pstar": "3/1", "q": "105/1", "r": "1323/1",
   "omega_decimal": "0.307696114486338750", "scale_note": ""}
]"#;

#[test]
fn rescaled_point_scales_coefficients() {
    // Omega -> sqrt(2) Omega multiplies t_f(tau; n) by 2^-(k + 2n)/2
    let reg = Registry::from_json(USER_POINTS).unwrap();
    let i = Registry::builtin().get("i").unwrap().clone();
    let i2 = reg.lookup("i2").unwrap();
    let q = QmPoly::var_q();
    for n in [0u64, 2, 4, 10] {
        let base = taylor_coeff(&q, &i, n).unwrap().value().clone();
        let scaled = taylor_coeff(&q, i2, n).unwrap().value().clone();
        let factor = rat(1, 1 << ((4 + 2 * n) / 2));
        assert_eq!(scaled, base * factor, "n = {n}");
    }
}

#[test]
fn cm_values_feed_the_supersingular_check() {
    let reg = Registry::builtin();
    let j = j_invariant(reg.lookup("tau7").unwrap().triple()).unwrap();
    assert_eq!(j, rat_int(-3375));
    for p in [5u64, 7] {
        let r = rational_residue(&j, &BigInt::from(p)).unwrap();
        let r: u64 = r.try_into().unwrap();
        assert!(ss_poly(p).unwrap().roots().contains(&r));
    }
}

#[test]
fn sweep_rows_round_trip_as_json() {
    let reg = Registry::builtin();
    let report = sweep(&delta_poly(), reg.lookup("tau7").unwrap(), 7, 2, 49..=52, SweepMode::Weak).unwrap();
    assert!(report.all_pass());
    for line in report.to_json_lines().lines() {
        let row: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["p"], 7);
        assert_eq!(row["required"], 2);
    }
}

fn modular_form(weight: u32, coeffs: Vec<i64>) -> QmPoly {
    let basis: Vec<Monomial> = (0..=weight / 4)
        .filter(|b| (weight - 4 * b).is_multiple_of(6))
        .map(|b| Monomial::new(0, b, (weight - 4 * b) / 6))
        .collect();
    let terms: Vec<_> = basis
        .iter()
        .zip(coeffs)
        .filter(|(_, c)| *c != 0)
        .map(|(m, c)| (*m, rat_int(c)))
        .collect();
    if terms.is_empty() {
        return QmPoly::monomial(basis[0], rat_int(1), Kind::HolomorphicP);
    }
    QmPoly::from_terms(terms, Kind::HolomorphicP).unwrap()
}

fn arb_form() -> impl Strategy<Value = QmPoly> {
    (2u32..24)
        .prop_map(|h| 2 * h)
        .prop_flat_map(|w| (Just(w), prop::collection::vec(-20i64..20, 4)))
        .prop_map(|(w, c)| modular_form(w, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_matches_derivative_mod_p(f in arb_form(), p in prop::sample::select(vec![5u64, 7, 11])) {
        let n = 25;
        let lhs = to_qseries(&theta(&f, p).unwrap(), n).unwrap().reduce(p, 1).unwrap();
        let rhs = to_qseries(&derive(&f).unwrap(), n).unwrap().reduce(p, 1).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn rankin_cohen_is_modular(f in arb_form(), g in arb_form(), n in 0u64..4) {
        let bracket = rankin_cohen(&f, &g, n).unwrap();
        prop_assert!(bracket.is_p_free());
        prop_assert!(bracket.is_zero() || bracket.weight() == f.weight() + g.weight() + 2 * n as u32);
    }
}
