//! Derivative machinery: modified Lambert series coefficients, the
//! Stirling-number expansions of q^s D^(s)[q^i/(1-q^i)], the coefficient
//! function A_t(n) of the t-th Lambert series derivative, and the three
//! identities of the higher-order derivative factorization theorem.
//!
//! The printed sources for two of these expansions contain defects
//! (verified by exact counterexample against the q-series oracle); the
//! corrected closed forms implemented here are documented per function,
//! and the theorem checker additionally reports the printed final
//! display as an informational entry.

use num::Zero;
use serde::Serialize;

use crate::arith::{
    binomial, divisors, falling, mobius, pentagonal_bound, stirling1_unsigned, stirling2,
};
use crate::factorization;
use crate::qseries::{self, ArithmeticTable, QSeries};
use crate::{rat_int, Int, Rat};

/// Parameters for the t-th derivative factorization machinery.
#[derive(Clone, Debug)]
pub struct DerivParams {
    /// Derivative order, t >= 1.
    pub t: u32,
    /// Truncation order N >= t; all tables and checks run over 1..=N.
    pub order: u64,
    /// The input arithmetic function a, defined on 1..=N.
    pub a: ArithmeticTable,
}

impl DerivParams {
    pub fn new(t: u32, order: u64, a: ArithmeticTable) -> Self {
        assert!(t >= 1 && order >= t as u64 && a.order() >= order);
        DerivParams { t, order, a }
    }
}

/// Modified Lambert series coefficient (closed form):
/// [q^n] sum_{i >= t} a_i q^{mi}/(1-q^i)^{k+1}
///   = sum_{d|n, t <= d <= floor(n/m)} C(n/d - m + k, k) a_d.
pub fn modified_coeff(a: &ArithmeticTable, m: u64, k: u64, t: u64, n: u64) -> Rat {
    assert!(m >= 1 && t >= 1 && n >= 1);
    let mut acc = Rat::zero();
    for d in divisors(n) {
        if d < t || d > n / m {
            continue;
        }
        debug_assert_eq!(n % d, 0);
        let c = binomial((n / d) as i64 - m as i64 + k as i64, k as i64);
        if !c.is_zero() {
            acc += Rat::from_integer(c) * a.get(d);
        }
    }
    acc
}

/// The q-series left side of the modified-coefficient identity:
/// sum_{i=t}^{order} a_i q^{mi}/(1-q^i)^{k+1}, the oracle for
/// [`modified_coeff`].
pub fn modified_series_oracle(
    a: &ArithmeticTable,
    m: u64,
    k: u64,
    t: u64,
    order: u64,
) -> QSeries {
    assert!(m >= 1 && t >= 1);
    let mut s = QSeries::zero(order);
    for i in t..=order {
        if m * i > order {
            break;
        }
        let v = a.get(i);
        if v.is_zero() {
            continue;
        }
        let term = QSeries::monomial(v.clone(), m * i, order)
            .mul(&qseries::geometric_power(i, k + 1, order));
        s = s.add(&term);
    }
    s
}

/// Which closed-form expansion of q^s D^(s)[q^i/(1-q^i)] to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivVariant {
    /// Stirling double sum over 1/(1-q^i)^{k+1} terms.
    I,
    /// Expansion organized by powers q^{(r+1)i}/(1-q^i)^{r+1}.
    II,
}

/// Newton forward-difference weight
/// w_r(x; s) = sum_{l=0}^r (-1)^{r-l} C(r,l) falling(x(l+1), s),
/// the coefficient of q^{(r+1)x}/(1-q^x)^{r+1} in q^s D^(s)[q^x/(1-q^x)].
fn newton_weight(x: u64, r: u64, s: u32) -> Int {
    let mut w = Int::zero();
    for l in 0..=r {
        let sign = if (r - l) % 2 == 0 { 1 } else { -1 };
        w += binomial(r as i64, l as i64)
            * falling((x * (l + 1)) as i64, s)
            * Int::from(sign);
    }
    w
}

/// Closed-form expansion of q^s D^(s)[q^i/(1-q^i)] as a QSeries.
///
/// Variant I is the Stirling-number double sum
///   sum_{m=0}^s sum_{k=0}^m |s(s,m)| S(m,k) (-1)^{s-m} k! i^m
///   q^{ik}/(1-q^i)^{k+1}.
/// (The printed source signs the terms (-1)^{s-k} and omits the q^{ik}
/// numerator; both defects are exact-counterexample-verified and fixed
/// here.)
///
/// Variant II regroups by denominator power:
///   sum_{r=0}^s w_r(i; s) q^{(r+1)i}/(1-q^i)^{r+1}
/// with the Newton forward-difference weights w_r. (Replaces the printed
/// double-Stirling variant, which fails for s >= 2.)
pub fn deriv_term_series(i: u64, s: u32, variant: DerivVariant, order: u64) -> QSeries {
    assert!(i >= 1);
    if s == 0 {
        return qseries::lambert_term(i, order);
    }
    let mut out = QSeries::zero(order);
    match variant {
        DerivVariant::I => {
            for m in 0..=s as u64 {
                let s1 = stirling1_unsigned(s as u64, m);
                if s1.is_zero() {
                    continue;
                }
                let sign_m = if (s as u64 - m) % 2 == 0 { 1 } else { -1 };
                for k in 0..=m {
                    let s2 = stirling2(m, k);
                    if s2.is_zero() {
                        continue;
                    }
                    if i * k > order {
                        continue;
                    }
                    let mut coef = &s1 * &s2 * Int::from(sign_m);
                    coef *= falling(k as i64, k as u32); // k!
                    coef *= Int::from(i).pow(m as u32);
                    let term = QSeries::monomial(Rat::from_integer(coef), i * k, order)
                        .mul(&qseries::geometric_power(i, k + 1, order));
                    out = out.add(&term);
                }
            }
        }
        DerivVariant::II => {
            for r in 0..=s as u64 {
                if (r + 1) * i > order {
                    break;
                }
                let w = newton_weight(i, r, s);
                if w.is_zero() {
                    continue;
                }
                let term = QSeries::monomial(Rat::from_integer(w), (r + 1) * i, order)
                    .mul(&qseries::geometric_power(i, r + 1, order));
                out = out.add(&term);
            }
        }
    }
    out
}

/// A_t(n) = [q^n] q^t D_t[sum_{m >= t} a_m q^m/(1-q^m)], evaluated by the
/// corrected closed form
///   sum_{r=0}^t sum_{d|n} C(n/d - 1, r) w_r(d; t) a_d
///       [t <= d <= floor(n/(r+1))]
/// (variant II of the derivative expansion pushed through the
/// modified-coefficient lemma with m = r+1, k = r). The printed
/// quadruple Stirling sum fails for t >= 2.
pub fn a_t(params: &DerivParams, n: u64) -> Rat {
    assert!(n >= 1);
    let t = params.t;
    let mut acc = Rat::zero();
    for d in divisors(n) {
        if d < t as u64 {
            continue;
        }
        debug_assert_eq!(n % d, 0);
        let q = n / d;
        let mut inner = Int::zero();
        for r in 0..=t as u64 {
            if d > n / (r + 1) {
                break;
            }
            let c = binomial(q as i64 - 1, r as i64);
            if c.is_zero() {
                continue;
            }
            inner += c * newton_weight(d, r, t);
        }
        if !inner.is_zero() {
            acc += Rat::from_integer(inner) * params.a.get(d);
        }
    }
    acc
}

/// Independent evaluation of A_t(n) straight from the definition:
/// falling(n, t) * sum_{d|n, d >= t} a_d.
pub fn a_t_oracle(params: &DerivParams, n: u64) -> Rat {
    let mut acc = Rat::zero();
    for d in divisors(n) {
        if d >= params.t as u64 {
            acc += params.a.get(d);
        }
    }
    acc * Rat::from_integer(falling(n as i64, params.t))
}

/// Full q-series oracle: q^t D_t[sum_{m=t}^{N} a_m q^m/(1-q^m)] to order N.
pub fn a_t_series_oracle(params: &DerivParams) -> QSeries {
    let order = params.order;
    let restricted = ArithmeticTable::from_fn(order, |n| {
        if n >= params.t as u64 {
            params.a.get(n).clone()
        } else {
            Rat::zero()
        }
    });
    qseries::lambert_gf(&restricted, order).q_derivative(params.t)
}

/// (A_t * mu)(n) for n <= N: the Lambert series coefficients whose divisor
/// sums reproduce A_t(n).
pub fn a_t_lambert_coeffs(params: &DerivParams) -> ArithmeticTable {
    let at = ArithmeticTable::from_fn(params.order, |n| a_t(params, n));
    at.mobius_inverted()
}

/// F(k) + sum_{p = +-1} sum_{j=1}^{floor((sqrt(24k-23)-p)/6)} (-1)^j
/// F(k - j(3j+p)/2): the pentagonal bracket applied to a function of k.
/// The floor bound keeps every argument >= 1.
fn pentagonal_bracket(f: &dyn Fn(u64) -> Rat, k: u64) -> Rat {
    let mut acc = f(k);
    for p in [1i64, -1] {
        let bound = pentagonal_bound(24 * k as i64 - 23, p);
        for j in 1..=bound {
            let shift = (j * (3 * j + p) / 2) as u64;
            debug_assert!(shift < k);
            let sign = if j % 2 == 0 { 1 } else { -1 };
            acc += f(k - shift) * rat_int(sign);
        }
    }
    acc
}

/// One identity's verdict inside a theorem verification report.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub id: String,
    pub pass: bool,
    /// Smallest n at which the two sides differ, when they do.
    pub first_failure: Option<u64>,
    /// Rendered values at the first failure, or other context.
    pub note: Option<String>,
}

impl IdentityCheck {
    fn from_scan(
        id: &str,
        order: u64,
        lhs: impl Fn(u64) -> Rat,
        rhs: impl Fn(u64) -> Rat,
    ) -> Self {
        for n in 1..=order {
            let l = lhs(n);
            let r = rhs(n);
            if l != r {
                return IdentityCheck {
                    id: id.to_string(),
                    pass: false,
                    first_failure: Some(n),
                    note: Some(format!("lhs = {l}, rhs = {r}")),
                };
            }
        }
        IdentityCheck {
            id: id.to_string(),
            pass: true,
            first_failure: None,
            note: None,
        }
    }
}

/// Verification report for the higher-order derivative factorization
/// theorem. `all_pass` covers the three theorem identities; the printed
/// form of the final display is evaluated too but reported separately
/// as informational (it is defective for t >= 2).
#[derive(Clone, Debug, Serialize)]
pub struct Theorem34Report {
    pub t: u32,
    pub order: u64,
    pub identities: Vec<IdentityCheck>,
    pub printed_final_display: IdentityCheck,
    pub all_pass: bool,
}

/// Evaluates the theorem's three identities for 1 <= n <= N:
///
/// 1. A_t(n) = [q^n] (1/(q;q)_inf) sum_n sum_k s~_{n,k}(mu) A_t(k) q^n;
/// 2. A_t(n) = sum_k s~_{n,k}^(-1)(mu) [pentagonal bracket of A_t at k];
/// 3. falling(n,t) sum_{d|n} a_d = sum_{i<t} (annihilated-term
///    restoration for i) + A_t(n), where each restoration is the inverse
///    identity (2) applied to B_i(m) = falling(m,t)[i|m] scaled by a_i.
///    (The printed display drops the pentagonal bracket from the
///    restoration; that printed form is evaluated as informational.)
pub fn theorem34_check(params: &DerivParams) -> Theorem34Report {
    let order = params.order;
    let t = params.t;
    let at: Vec<Rat> = (1..=order).map(|n| a_t(params, n)).collect();
    let at_of = |k: u64| at[(k - 1) as usize].clone();

    let stilde_mu = factorization::stilde(&table_mu(order), order);
    let stilde_mu_inv = stilde_mu
        .inverse()
        .expect("stilde(mu) has unit diagonal and is always invertible");

    // identity 1: factorization through 1/(q;q)_inf
    let weighted = QSeries::from_coeffs(
        std::iter::once(Rat::zero())
            .chain((1..=order).map(|n| {
                let mut acc = Rat::zero();
                for k in 1..=n {
                    let s = stilde_mu.get(n, k);
                    if !s.is_zero() {
                        acc += s * at_of(k);
                    }
                }
                acc
            }))
            .collect(),
    );
    let rhs1 = qseries::pochhammer_qq(order)
        .reciprocal()
        .expect("(q;q)_inf has constant term 1")
        .mul(&weighted);
    let id1 = IdentityCheck::from_scan("factorization", order, &at_of, |n| rhs1.coeff(n).clone());

    // identity 2: inverse form with the pentagonal bracket
    let inverse_apply = |f: &dyn Fn(u64) -> Rat, n: u64| -> Rat {
        let mut acc = Rat::zero();
        for k in 1..=n {
            let inv = stilde_mu_inv.get(n, k);
            if !inv.is_zero() {
                acc += inv * pentagonal_bracket(f, k);
            }
        }
        acc
    };
    let id2 = IdentityCheck::from_scan("inverse-form", order, &at_of, |n| {
        inverse_apply(&at_of, n)
    });

    // identity 3 (corrected): full Lambert series t-th derivative formula
    let lhs3 = |n: u64| -> Rat {
        let mut acc = Rat::zero();
        for d in divisors(n) {
            acc += params.a.get(d);
        }
        acc * Rat::from_integer(falling(n as i64, t))
    };
    let rhs3 = |n: u64| -> Rat {
        let mut acc = at_of(n);
        for i in 1..t as u64 {
            let b_i = |m: u64| -> Rat {
                if m % i == 0 {
                    Rat::from_integer(falling(m as i64, t))
                } else {
                    Rat::zero()
                }
            };
            acc += inverse_apply(&b_i, n) * params.a.get(i);
        }
        acc
    };
    let id3 = IdentityCheck::from_scan("final-display", order, lhs3, rhs3);

    // printed final display (no pentagonal bracket on the restoration)
    let rhs3_printed = |n: u64| -> Rat {
        let mut acc = at_of(n);
        for i in 1..t as u64 {
            let mut k = 1u64;
            while i * k <= n {
                let inv = stilde_mu_inv.get(n, i * k);
                if !inv.is_zero() {
                    acc += inv
                        * Rat::from_integer(falling((i * k) as i64, t))
                        * params.a.get(i);
                }
                k += 1;
            }
        }
        acc
    };
    let mut printed = IdentityCheck::from_scan("final-display-printed", order, lhs3, rhs3_printed);
    printed.note = Some(match (&printed.note, printed.pass) {
        (_, true) => "informational: printed form agrees on this input".to_string(),
        (Some(n), false) => format!("informational (known printed defect): {n}"),
        (None, false) => "informational (known printed defect)".to_string(),
    });

    let all_pass = id1.pass && id2.pass && id3.pass;
    Theorem34Report {
        t,
        order,
        identities: vec![id1, id2, id3],
        printed_final_display: printed,
        all_pass,
    }
}

/// b_{n,i} = [a_i] (A_t * mu)(n): the coefficient of a_i in the Lambert
/// coefficients of the t-th derivative factorization,
///   sum_{d|n, i|d} mu(n/d) sum_{r=0}^t C(d/i - 1, r) w_r(i; t)
///       [t <= i <= floor(d/(r+1))].
/// (Built from the corrected A_t closed form; the printed Remark display
/// inherits the defective quadruple Stirling sum.)
pub fn remark_b(n: u64, i: u64, t: u32) -> Rat {
    assert!(n >= 1 && i >= 1 && t >= 1);
    if i > n || i < t as u64 {
        return Rat::zero();
    }
    let mut acc = Int::zero();
    for d in divisors(n) {
        if d % i != 0 {
            continue;
        }
        let mu = mobius(n / d);
        if mu == 0 {
            continue;
        }
        let mut inner = Int::zero();
        for r in 0..=t as u64 {
            if i > d / (r + 1) {
                break;
            }
            let c = binomial((d / i) as i64 - 1, r as i64);
            if c.is_zero() {
                continue;
            }
            inner += c * newton_weight(i, r, t);
        }
        acc += inner * Int::from(mu);
    }
    Rat::from_integer(acc)
}

fn table_mu(order: u64) -> ArithmeticTable {
    ArithmeticTable::from_fn(order, |n| rat_int(mobius(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;
    use crate::factorization::FactorMatrix;
    use num::One;

    fn table_one(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |_| Rat::one())
    }

    fn table_id(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| rat_int(n as i64))
    }

    fn table_phi(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| Rat::from_integer(euler_phi(n)))
    }

    fn table_delta(order: u64, j: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| rat_int(i64::from(n == j)))
    }

    #[test]
    fn modified_coeff_known_values() {
        let a = table_one(12);
        // m=1, k=0, t=1: plain divisor count
        assert_eq!(modified_coeff(&a, 1, 0, 1, 6), rat_int(4));
        // m=2, k=0, t=1: divisors of 6 up to 3
        assert_eq!(modified_coeff(&a, 2, 0, 1, 6), rat_int(3));
        // m=1, k=1, t=1, n=4: 4 + 2 + 1
        assert_eq!(modified_coeff(&a, 1, 1, 1, 4), rat_int(7));
    }

    #[test]
    fn modified_coeff_matches_series_oracle() {
        let order = 30;
        for a in [table_one(order), table_id(order), table_mu(order)] {
            for m in 1..=3u64 {
                for k in 0..=3u64 {
                    for t in 1..=2u64 {
                        let series = modified_series_oracle(&a, m, k, t, order);
                        for n in 1..=order {
                            assert_eq!(
                                modified_coeff(&a, m, k, t, n),
                                *series.coeff(n),
                                "a-table, m={m}, k={k}, t={t}, n={n}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn deriv_term_series_zeroth_and_first() {
        let s0 = deriv_term_series(3, 0, DerivVariant::I, 12);
        assert_eq!(s0, qseries::lambert_term(3, 12));
        // s=1, i=1: q + 2q^2 + 3q^3 + ...
        let s1 = deriv_term_series(1, 1, DerivVariant::I, 5);
        for n in 0..=5u64 {
            assert_eq!(*s1.coeff(n), rat_int(n as i64));
        }
    }

    #[test]
    fn deriv_variants_match_direct_differentiation() {
        let order = 40;
        for i in 1..=6u64 {
            for s in 0..=4u32 {
                let direct = qseries::lambert_term(i, order).q_derivative(s);
                let v1 = deriv_term_series(i, s, DerivVariant::I, order);
                let v2 = deriv_term_series(i, s, DerivVariant::II, order);
                assert_eq!(v1, direct, "variant I, i={i}, s={s}");
                assert_eq!(v2, direct, "variant II, i={i}, s={s}");
            }
        }
    }

    #[test]
    fn a_t_known_values() {
        // t=1, a = 1: A_1(n) = n * d(n)
        let p = DerivParams::new(1, 12, table_one(12));
        assert_eq!(a_t(&p, 4), rat_int(12));
        // n < t leaves no admissible divisor
        let p = DerivParams::new(3, 12, table_one(12));
        assert_eq!(a_t(&p, 2), Rat::zero());
        // t=2, a = delta_2, n=4: oracle [q^4] q^2 D^2[q^2/(1-q^2)]
        let p = DerivParams::new(2, 12, table_delta(12, 2));
        let oracle = qseries::lambert_term(2, 12).q_derivative(2);
        assert_eq!(a_t(&p, 4), *oracle.coeff(4));
    }

    #[test]
    fn a_t_matches_oracles() {
        let order = 30;
        for a in [
            table_one(order),
            table_id(order),
            table_mu(order),
            table_phi(order),
        ] {
            for t in 1..=3u32 {
                let p = DerivParams::new(t, order, a.clone());
                let series = a_t_series_oracle(&p);
                for n in 1..=order {
                    let closed = a_t(&p, n);
                    assert_eq!(closed, a_t_oracle(&p, n), "t={t}, n={n}");
                    assert_eq!(closed, *series.coeff(n), "t={t}, n={n} (series)");
                }
            }
        }
    }

    #[test]
    fn a_t_lambert_coeffs_roundtrip_and_phi() {
        let order = 30;
        // t=1, a = delta_1: A_1(n) = n, so (A_1 * mu) = phi
        let p = DerivParams::new(1, order, table_delta(order, 1));
        let coeffs = a_t_lambert_coeffs(&p);
        for n in 1..=order {
            assert_eq!(coeffs.get(n), &Rat::from_integer(euler_phi(n)));
        }
        // divisor sums reproduce A_t
        let p = DerivParams::new(2, order, table_phi(order));
        let sums = a_t_lambert_coeffs(&p).divisor_sums();
        for n in 1..=order {
            assert_eq!(*sums.get(n), a_t(&p, n));
        }
    }

    #[test]
    fn theorem34_passes_on_reference_cases() {
        let r = theorem34_check(&DerivParams::new(1, 20, table_delta(20, 1)));
        assert!(r.all_pass, "{r:?}");
        assert!(r.printed_final_display.pass); // t=1: printed sum is empty
        let r = theorem34_check(&DerivParams::new(2, 20, table_mu(20)));
        assert!(r.all_pass, "{r:?}");
    }

    #[test]
    fn theorem34_passes_across_t_and_a() {
        let order = 30;
        for a in [
            table_one(order),
            table_id(order),
            table_mu(order),
            table_phi(order),
        ] {
            for t in 1..=3u32 {
                let r = theorem34_check(&DerivParams::new(t, order, a.clone()));
                assert!(r.all_pass, "t={t}: {:?}", r.identities);
            }
        }
    }

    #[test]
    fn printed_final_display_defect_is_reported_not_hidden() {
        // t=2, a = 1 exhibits the printed defect; the corrected identity
        // passes while the informational entry records the counterexample.
        let r = theorem34_check(&DerivParams::new(2, 12, table_one(12)));
        assert!(r.all_pass);
        assert!(!r.printed_final_display.pass);
        assert!(r.printed_final_display.first_failure.is_some());
    }

    #[test]
    fn remark_b_examples_and_linearity() {
        assert_eq!(remark_b(1, 1, 1), Rat::one());
        assert_eq!(remark_b(3, 5, 1), Rat::zero()); // i > n
        let order = 15;
        for t in 1..=2u32 {
            for j in 1..=5u64 {
                let p = DerivParams::new(t, order, table_delta(order, j));
                let coeffs = a_t_lambert_coeffs(&p);
                for n in 1..=order {
                    assert_eq!(
                        remark_b(n, j, t),
                        *coeffs.get(n),
                        "t={t}, j={j}, n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn remark_b_matrix_reproduces_lambert_coeffs() {
        let order = 15;
        let a = table_phi(order);
        for t in 1..=2u32 {
            let p = DerivParams::new(t, order, a.clone());
            let coeffs = a_t_lambert_coeffs(&p);
            for n in 1..=order {
                let mut acc = Rat::zero();
                for i in 1..=n {
                    let b = remark_b(n, i, t);
                    if !b.is_zero() {
                        acc += b * a.get(i);
                    }
                }
                assert_eq!(acc, *coeffs.get(n), "t={t}, n={n}");
            }
        }
    }

    #[test]
    fn remark_gives_related_factorization_matching_deriv_matrix() {
        // s_{t,n,k}(b) with b from the Remark equals the direct derivative
        // factorization matrix restricted to rows/cols >= t... for t=1 the
        // blocks coincide from row 1.
        let order = 12;
        let mut b = FactorMatrix::zero(1, order);
        for n in 1..=order {
            for k in 1..=n {
                b.set(n, k, remark_b(n, k, 1));
            }
        }
        let related = factorization::related_fact_matrix(&b, order);
        let direct = factorization::deriv_matrix(1, order);
        for n in 1..=order {
            for k in 1..=n {
                assert_eq!(related.get(n, k), direct.get(n, k), "(n,k)=({n},{k})");
            }
        }
    }
}
