//! Verification suites: every factorization identity replayed against
//! the independent truncated q-series oracle, plus the closed-form
//! inverse laws and the application-level identities. The CLI `verify`
//! subcommand drives these; failures are data (reported with the first
//! counterexample), not panics.

use num::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::applications::{
    self, ExoticKind, ExoticParams, PartitionIdentity, ZetaVariant,
};
use crate::arith::{omega_distinct, t_div};
use crate::derivatives::{self, DerivParams, DerivVariant};
use crate::error::Error;
use crate::factorization::{self, FactorMatrix};
use crate::qseries::{self, ArithmeticTable, QSeries};
use crate::registry;
use crate::{rat_int, Rat};

/// One named check inside a suite.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn pass(name: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: true,
            detail: None,
        }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: false,
            detail: Some(detail.into()),
        }
    }

    fn of(name: impl Into<String>, ok: bool, detail_if_fail: impl Into<String>) -> Self {
        if ok {
            CheckResult::pass(name)
        } else {
            CheckResult::fail(name, detail_if_fail)
        }
    }
}

/// All checks of one suite, with an aggregate verdict.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub order: u64,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

impl SuiteReport {
    fn new(suite: &str, order: u64, checks: Vec<CheckResult>) -> Self {
        let all_pass = checks.iter().all(|c| c.pass);
        SuiteReport {
            suite: suite.to_string(),
            order,
            checks,
            all_pass,
        }
    }

    /// First failing check, if any.
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}

fn tables(names: &[&str], order: u64) -> Vec<(String, ArithmeticTable)> {
    names
        .iter()
        .map(|n| (n.to_string(), registry::lookup(n, order).unwrap()))
        .collect()
}

/// Coefficient-wise comparison of two series over 1..=order.
fn series_eq(name: &str, lhs: &QSeries, rhs: &QSeries, order: u64) -> CheckResult {
    for n in 1..=order {
        if lhs.coeff(n) != rhs.coeff(n) {
            return CheckResult::fail(
                name,
                format!("first mismatch at q^{n}: {} vs {}", lhs.coeff(n), rhs.coeff(n)),
            );
        }
    }
    CheckResult::pass(name)
}

/// (1/(q;q)_inf) * sum_n (sum_k M(n,k) w_k) q^n, the right side shared by
/// every factorization display.
fn factored_series(m: &FactorMatrix, w: &ArithmeticTable, order: u64) -> QSeries {
    assert_eq!(m.start(), 1);
    let weighted = QSeries::from_coeffs(
        std::iter::once(Rat::zero())
            .chain((1..=order).map(|n| {
                let mut acc = Rat::zero();
                for k in 1..=n.min(w.order()) {
                    let s = m.get(n, k);
                    if !s.is_zero() {
                        acc += s * w.get(k);
                    }
                }
                acc
            }))
            .collect(),
    );
    qseries::pochhammer_qq(order)
        .reciprocal()
        .expect("(q;q)_inf starts with 1")
        .mul(&weighted)
}

/// Base suite: s_{n,k} against the exhaustive combinatorial oracle and
/// the plain factorization display for several test functions.
pub fn suite_base(order: u64) -> SuiteReport {
    let mut checks = Vec::new();
    let m = factorization::s_base(order);

    let oracle_max = order.min(25);
    let mut ok = true;
    let mut detail = String::new();
    'outer: for n in 1..=oracle_max {
        for k in 1..=n {
            let want = factorization::s_base_combinatorial(n, k).unwrap();
            if m.get(n, k) != rat_int(want) {
                ok = false;
                detail = format!("s({n},{k}) != combinatorial oracle value {want}");
                break 'outer;
            }
        }
    }
    checks.push(CheckResult::of(
        format!("s_base == combinatorial oracle (n <= {oracle_max})"),
        ok,
        detail,
    ));

    for (name, a) in tables(&["one", "id", "mu", "phi"], order) {
        let lhs = qseries::lambert_gf(&a, order);
        let rhs = factored_series(&m, &a, order);
        checks.push(series_eq(
            &format!("base factorization display, a = {name}"),
            &lhs,
            &rhs,
            order,
        ));
    }

    checks.push(CheckResult::of(
        "s_base unit diagonal",
        (1..=order).all(|n| m.get(n, n) == Rat::one()),
        "diagonal entry != 1",
    ));
    SuiteReport::new("base", order, checks)
}

/// Hadamard suite: the Hadamard-product factorization display, the
/// closed-form forward entries against the q-series construction, and
/// forward x closed-inverse = identity.
pub fn suite_hadamard(f_name: &str, order: u64) -> Result<SuiteReport, Error> {
    let f = registry::lookup(f_name, order)?;
    let mut checks = Vec::new();

    let fwd = factorization::hadamard_forward(&f, order);
    checks.push(CheckResult::of(
        format!("forward closed form == q-series oracle (f = {f_name})"),
        fwd == factorization::hadamard_forward_oracle(&f, order),
        "entry mismatch",
    ));

    for (g_name, g) in tables(&["one", "id", "phi"], order) {
        let a_fg = qseries::hadamard_coeffs(&f, &g, order);
        let lhs = qseries::lambert_gf(&a_fg, order);
        let rhs = factored_series(&fwd, &g, order);
        checks.push(series_eq(
            &format!("Hadamard factorization display, g = {g_name}"),
            &lhs,
            &rhs,
            order,
        ));
    }

    match factorization::hadamard_inverse(&f, order) {
        Ok(inv) => {
            checks.push(CheckResult::of(
                "forward * closed-form inverse == I",
                fwd.mul(&inv).is_identity(),
                "product differs from identity",
            ));
            checks.push(CheckResult::of(
                "closed-form inverse == substitution inverse",
                inv == fwd.inverse().expect("unit-weighted diagonal"),
                "entry mismatch",
            ));
        }
        Err(e) => checks.push(CheckResult::fail("closed-form inverse exists", e.to_string())),
    }
    Ok(SuiteReport::new("hadamard", order, checks))
}

/// Convolution suite: the product factorization display
/// (1/q) F_L(q) G_L(q) = (1/(q;q)_inf) sum s_{n,k}(g) f_k q^n, the
/// divisor-scaled s~ display, and forward x inverse = identity.
pub fn suite_convolution(g_name: &str, order: u64) -> Result<SuiteReport, Error> {
    let g = registry::lookup(g_name, order + 1)?;
    let mut checks = Vec::new();
    let fwd = factorization::conv_forward(&g, order);

    for (f_name, f) in tables(&["one", "id", "phi", "delta1"], order) {
        // lhs coeff n = [q^{n+1}] F_L G_L
        let fl = qseries::lambert_gf(&f, order + 1);
        let gl = qseries::lambert_gf(&g, order + 1);
        let prod = fl.mul(&gl);
        let lhs = QSeries::from_coeffs((0..=order).map(|n| prod.coeff(n + 1).clone()).collect());
        let rhs = factored_series(&fwd, &f, order);
        checks.push(series_eq(
            &format!("convolution factorization display, f = {f_name}"),
            &lhs,
            &rhs,
            order,
        ));

        // divisor-scaled display: Lambert gf of f*g (Dirichlet convolution)
        // equals the factored series with matrix s~(g) and weights f
        let fg = ArithmeticTable::from_fn(order, |n| {
            let mut acc = Rat::zero();
            for d in crate::arith::divisors(n) {
                acc += f.get(d) * g.get(n / d);
            }
            acc
        });
        let lhs2 = qseries::lambert_gf(&fg, order);
        let rhs2 = factored_series(&factorization::stilde(&g, order), &f, order);
        checks.push(series_eq(
            &format!("divisor-scaled (s~) display, f = {f_name}"),
            &lhs2,
            &rhs2,
            order,
        ));
    }

    match factorization::conv_inverse(&g, order) {
        Ok(inv) => {
            checks.push(CheckResult::of(
                "forward * closed-form inverse == I",
                fwd.mul(&inv).is_identity(),
                "product differs from identity",
            ));
        }
        Err(e) => checks.push(CheckResult::fail("closed-form inverse exists", e.to_string())),
    }
    Ok(SuiteReport::new("convolution", order, checks))
}

/// Derivative suite: the t-th derivative factorization display, the
/// closed-form t=1 and mixed-series inverses, the related-factorization
/// lemma, and the derivative theorem's three identities.
pub fn suite_derivatives(t: u32, order: u64) -> Result<SuiteReport, Error> {
    if t == 0 || (t as u64) > order {
        return Err(Error::InvalidParameter(format!(
            "derivative suite needs 1 <= t <= N, got t = {t}, N = {order}"
        )));
    }
    let mut checks = Vec::new();
    let deriv = factorization::deriv_matrix(t, order);

    for (name, a) in tables(&["one", "id", "mu", "phi"], order) {
        // display (3.1): q^t D_t[sum_{n>=t} a_n q^n/(1-q^n)]
        //   = (1/(q;q)_inf) sum_{n>=t} sum_{k=t}^n s_{t,n,k} a_k q^n
        let restricted = ArithmeticTable::from_fn(order, |n| {
            if n >= t as u64 {
                a.get(n).clone()
            } else {
                Rat::zero()
            }
        });
        let lhs = qseries::lambert_gf(&restricted, order).q_derivative(t);
        let weighted = QSeries::from_coeffs(
            (0..=order)
                .map(|n| {
                    let mut acc = Rat::zero();
                    if n >= t as u64 {
                        for k in t as u64..=n {
                            let s = deriv.get(n, k);
                            if !s.is_zero() {
                                acc += s * a.get(k);
                            }
                        }
                    }
                    acc
                })
                .collect(),
        );
        let rhs = qseries::pochhammer_qq(order)
            .reciprocal()
            .expect("(q;q)_inf starts with 1")
            .mul(&weighted);
        checks.push(series_eq(
            &format!("derivative factorization display, a = {name}"),
            &lhs,
            &rhs,
            order,
        ));

        // derivative theorem identities
        let report = derivatives::theorem34_check(&DerivParams::new(t, order, a.clone()));
        for id in &report.identities {
            checks.push(CheckResult::of(
                format!("derivative theorem '{}', a = {name}", id.id),
                id.pass,
                format!(
                    "first failure at n = {:?}: {:?}",
                    id.first_failure, id.note
                ),
            ));
        }

        // Prop-level A_t closed form against the definitional oracle
        let p = DerivParams::new(t, order, a.clone());
        let series = derivatives::a_t_series_oracle(&p);
        let mut ok = true;
        let mut detail = String::new();
        for n in 1..=order {
            if derivatives::a_t(&p, n) != *series.coeff(n) {
                ok = false;
                detail = format!("A_t({n}) differs from q-series oracle");
                break;
            }
        }
        checks.push(CheckResult::of(
            format!("A_t closed form == oracle, a = {name}"),
            ok,
            detail,
        ));
    }

    if t == 1 {
        checks.push(CheckResult::of(
            "t=1 closed-form inverse == substitution inverse",
            factorization::deriv_inverse_t1(order) == deriv.inverse()?,
            "entry mismatch",
        ));
    }
    for j in [2u32, 3] {
        if (j as u64) < order {
            let fwd = factorization::mixed_deriv_forward(j, order);
            let inv = factorization::mixed_deriv_inverse(j, order);
            checks.push(CheckResult::of(
                format!("mixed series j={j}: forward * closed-form inverse == I"),
                fwd.mul(&inv).is_identity(),
                "product differs from identity",
            ));
        }
    }

    // related factorization (lemma display): s_{n,k}(b) = sum_j s_{n,j} b_{j,k}
    // exercised with b_{j,k} = T_Div(j,k)
    let mut b = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            b.set(n, k, rat_int(t_div(n, k)));
        }
    }
    let related = factorization::related_fact_matrix(&b, order);
    for (name, a) in tables(&["id", "mu"], order) {
        let ba = ArithmeticTable::from_fn(order, |n| {
            let mut acc = Rat::zero();
            for j in 1..=n {
                let v = b.get(n, j);
                if !v.is_zero() {
                    acc += v * a.get(j);
                }
            }
            acc
        });
        let lhs = qseries::lambert_gf(&ba, order);
        let rhs = factored_series(&related, &a, order);
        checks.push(series_eq(
            &format!("related factorization display (b = T_Div), a = {name}"),
            &lhs,
            &rhs,
            order,
        ));
    }

    Ok(SuiteReport::new("derivatives", order, checks))
}

/// Lemma suite: the modified-coefficient lemma and both higher-order
/// derivative expansions against direct q-differentiation.
pub fn suite_lemmas(order: u64) -> SuiteReport {
    let mut checks = Vec::new();

    for (name, a) in tables(&["one", "id", "mu"], order) {
        let mut ok = true;
        let mut detail = String::new();
        'outer: for m in 1..=3u64 {
            for k in 0..=3u64 {
                for t in 1..=2u64 {
                    let series = derivatives::modified_series_oracle(&a, m, k, t, order);
                    for n in 1..=order {
                        if derivatives::modified_coeff(&a, m, k, t, n) != *series.coeff(n) {
                            ok = false;
                            detail =
                                format!("mismatch at m={m}, k={k}, t={t}, n={n}");
                            break 'outer;
                        }
                    }
                }
            }
        }
        checks.push(CheckResult::of(
            format!("modified-coefficient lemma, a = {name}"),
            ok,
            detail,
        ));
    }

    let d_order = order.min(40);
    let mut ok = true;
    let mut detail = String::new();
    'outer: for i in 1..=6u64 {
        for s in 0..=4u32 {
            let direct = qseries::lambert_term(i, d_order).q_derivative(s);
            for v in [DerivVariant::I, DerivVariant::II] {
                if derivatives::deriv_term_series(i, s, v, d_order) != direct {
                    ok = false;
                    detail = format!("variant {v:?} differs at i={i}, s={s}");
                    break 'outer;
                }
            }
        }
    }
    checks.push(CheckResult::of(
        "derivative expansions (i)/(ii) == direct differentiation",
        ok,
        detail,
    ));
    SuiteReport::new("lemmas", order, checks)
}

/// Reconstruction suite: C-matrix reconstruction of divisor sums.
pub fn suite_reconstruction(order: u64) -> SuiteReport {
    let mut checks = Vec::new();
    for (name, a) in tables(&["one", "id", "mu", "phi", "delta1"], order) {
        let b = factorization::reconstruct_b(&a, order);
        let want = a.divisor_sums();
        let mut ok = true;
        let mut detail = String::new();
        for n in 1..=order {
            if b.get(n) != want.get(n) {
                ok = false;
                detail = format!("b({n}) = {} != divisor sum {}", b.get(n), want.get(n));
                break;
            }
        }
        checks.push(CheckResult::of(
            format!("reconstruction b == divisor sums, a = {name}"),
            ok,
            detail,
        ));
    }
    SuiteReport::new("reconstruction", order, checks)
}

/// Zeta suite: term-exactness 1/n^s for each variant, plus report
/// error monotonicity.
pub fn suite_zeta(order: u64) -> SuiteReport {
    let order = order.min(40);
    let mut checks = Vec::new();
    for (variant, s, t) in [
        (ZetaVariant::SigmaSt, 2i64, 1i64),
        (ZetaVariant::SigmaSt, 3, 2),
        (ZetaVariant::SigmaStShifted, 2, 1),
        (ZetaVariant::SigmaStShifted, 3, 2),
        (ZetaVariant::DerivT1, 2, 1),
        (ZetaVariant::DerivT1, 3, 1),
    ] {
        let mut ok = true;
        let mut detail = String::new();
        for n in 1..=order {
            let got = applications::zeta_term(variant, s, t, n).unwrap();
            let want = Rat::new(num::BigInt::one(), num::BigInt::from(n).pow(s as u32));
            if got != want {
                ok = false;
                detail = format!("term at n = {n} is {got}, expected {want}");
                break;
            }
        }
        checks.push(CheckResult::of(
            format!("term-exactness {variant:?}, s={s}, t={t}"),
            ok,
            detail,
        ));
    }
    let report = applications::zeta_partial(ZetaVariant::SigmaSt, 2, 1, order).unwrap();
    checks.push(CheckResult::of(
        "zeta report errors strictly decreasing",
        report.abs_errors.windows(2).all(|w| w[1] < w[0]),
        "errors not monotone",
    ));
    SuiteReport::new("zeta", order, checks)
}

/// Exotic suite: every exotic sum against its classical reference.
pub fn suite_exotic(order: u64) -> SuiteReport {
    let order = order.min(60);
    let mut checks = Vec::new();
    let params = ExoticParams::default();

    let classical: Vec<(&str, ExoticKind, Box<dyn Fn(u64) -> Rat>)> = vec![
        (
            "totient",
            ExoticKind::Totient,
            Box::new(|n| Rat::from_integer(crate::arith::euler_phi(n))),
        ),
        (
            "jordan (t=1)",
            ExoticKind::Jordan,
            Box::new(|n| Rat::from_integer(crate::arith::totients(n, 1))),
        ),
        (
            "power-s (s=2, t=1)",
            ExoticKind::PowerS,
            Box::new(|n| Rat::from_integer(num::BigInt::from(n).pow(2))),
        ),
    ];
    for (name, kind, reference) in classical {
        let mut ok = true;
        let mut detail = String::new();
        for n in 1..=order {
            let got = applications::exotic_sum(kind, n, &params).unwrap();
            if got != reference(n) {
                ok = false;
                detail = format!("mismatch at n = {n}");
                break;
            }
        }
        checks.push(CheckResult::of(format!("exotic {name}"), ok, detail));
    }

    let tol = Rat::new(num::BigInt::one(), num::BigInt::from(10u32).pow(20));
    let mut ok = true;
    let mut detail = String::new();
    for n in 1..=order.min(30) {
        let got = applications::exotic_sum(ExoticKind::VonMangoldt, n, &params).unwrap();
        let want = crate::arith::von_mangoldt(n, params.bits);
        let dev = if got > want { got - want } else { want - got };
        if dev > tol {
            ok = false;
            detail = format!("deviation beyond 1e-20 at n = {n}");
            break;
        }
    }
    checks.push(CheckResult::of("exotic von-mangoldt (128-bit)", ok, detail));
    SuiteReport::new("exotic", order, checks)
}

/// Omega suite: the exact 2^omega formula against direct factorization.
pub fn suite_omega(order: u64) -> SuiteReport {
    let mut checks = Vec::new();
    match applications::omega_exact_upto(order) {
        Ok(values) => {
            let mut ok = true;
            let mut detail = String::new();
            for n in 1..=order {
                if values[(n - 1) as usize] != omega_distinct(n) {
                    ok = false;
                    detail = format!("omega({n}) mismatch");
                    break;
                }
            }
            checks.push(CheckResult::of(
                format!("omega formula == distinct prime count (n <= {order})"),
                ok,
                detail,
            ));
        }
        Err(e) => checks.push(CheckResult::fail("omega inner sum is a power of two", e.to_string())),
    }
    SuiteReport::new("omega", order, checks)
}

/// Partition suite: the three classical recurrences.
pub fn suite_partitions(order: u64) -> SuiteReport {
    let order = order.min(40);
    let mut checks = Vec::new();
    for (which, k) in [
        (PartitionIdentity::PSigma1, None),
        (PartitionIdentity::PkRestricted, Some(3)),
        (PartitionIdentity::PpSigma2, None),
    ] {
        let mut ok = true;
        let mut detail = String::new();
        for n in 1..=order {
            let c = applications::partition_identity_check(which, n, k).unwrap();
            if !c.pass {
                ok = false;
                detail = format!("fails at n = {n}: {} != {}", c.lhs, c.rhs);
                break;
            }
        }
        checks.push(CheckResult::of(format!("partition identity {which:?}"), ok, detail));
    }
    SuiteReport::new("partitions", order, checks)
}

/// Runs every suite (with default parameters) in parallel, merging the
/// reports in a fixed deterministic order.
pub fn suite_all(order: u64) -> Vec<SuiteReport> {
    let jobs: Vec<Box<dyn Fn() -> SuiteReport + Send + Sync>> = vec![
        Box::new(move || suite_base(order)),
        Box::new(move || suite_hadamard("id", order).expect("registry name")),
        Box::new(move || suite_hadamard("phi", order).expect("registry name")),
        Box::new(move || suite_convolution("phi", order).expect("registry name")),
        Box::new(move || suite_convolution("delta1", order).expect("registry name")),
        Box::new(move || suite_derivatives(1, order).expect("valid t")),
        Box::new(move || suite_derivatives(2, order.max(2)).expect("valid t")),
        Box::new(move || suite_lemmas(order)),
        Box::new(move || suite_reconstruction(order)),
        Box::new(move || suite_zeta(order)),
        Box::new(move || suite_exotic(order)),
        Box::new(move || suite_omega(order)),
        Box::new(move || suite_partitions(order)),
    ];
    jobs.par_iter().map(|j| j()).collect()
}
