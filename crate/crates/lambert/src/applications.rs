//! Downstream consequences of the factorization theorems: exotic sums
//! for classical multiplicative functions, convergent series for the
//! Riemann zeta function at integer arguments, the exact 2^omega
//! formula, and the classical partition recurrences.

use num::{One, Signed, Zero};
use serde::Serialize;
use serde_json::json;

use crate::arith::{
    divisors, ln_rational, mobius, partition_p, pentagonal_bound, pentagonal_g, pentagonal_sign,
    sigma,
};
use crate::error::Error;
use crate::factorization;
use crate::qseries::{self, QSeries};
use crate::{rat_int, Int, Rat};

/// Which exotic-sum display to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExoticKind {
    /// n^s from the (n^t, n^s) Hadamard pair. Exact; uses s, t.
    PowerS,
    /// von Mangoldt Lambda(n) from the (phi, Lambda) pair. Fixed-point
    /// real (logarithms); uses bits.
    VonMangoldt,
    /// Jordan totient J_t(n) from the (n^t, J_t) pair. Exact; uses t.
    Jordan,
    /// Euler totient phi(n). Exact.
    Totient,
}

impl ExoticKind {
    pub fn parse(name: &str) -> Result<Self, Error> {
        match name {
            "power_s" | "power-s" => Ok(ExoticKind::PowerS),
            "von_mangoldt" | "von-mangoldt" => Ok(ExoticKind::VonMangoldt),
            "jordan" => Ok(ExoticKind::Jordan),
            "totient" => Ok(ExoticKind::Totient),
            _ => Err(Error::InvalidParameter(format!(
                "unknown exotic kind '{name}' (expected power-s, von-mangoldt, jordan, totient)"
            ))),
        }
    }
}

/// Parameters for [`exotic_sum`]; `s`/`t` feed the exact kinds, `bits`
/// the fixed-point precision of the von Mangoldt logarithms.
#[derive(Clone, Copy, Debug)]
pub struct ExoticParams {
    pub s: u32,
    pub t: u32,
    pub bits: u32,
}

impl Default for ExoticParams {
    fn default() -> Self {
        ExoticParams { s: 2, t: 1, bits: 128 }
    }
}

/// Evaluates the selected exotic double sum literally:
/// sum_{k=1}^n sum_{d|n} p(d-k)/w(d) mu(n/d) [ h(k) + pentagonal
/// correction sum over h(k - j(3j+b)/2) ], with the weight w and bracket
/// function h of the chosen display. Pentagonal shifts that would push
/// h's argument below 1 are excluded (the floor bounds already do this
/// for every display except PowerS at the k - G = 0 boundary, where a
/// sigma argument of 0 is undefined and the term is skipped).
pub fn exotic_sum(kind: ExoticKind, n: u64, params: &ExoticParams) -> Result<Rat, Error> {
    assert!(n >= 1);
    if kind == ExoticKind::PowerS && params.s < 2 {
        return Err(Error::InvalidParameter(
            "power-s exotic sum needs s >= 2".to_string(),
        ));
    }
    // bracket value h(x) per kind
    let h = |x: u64| -> Rat {
        match kind {
            ExoticKind::PowerS => {
                sigma(x, params.t as i64) * sigma(x, params.s as i64)
            }
            ExoticKind::VonMangoldt => {
                rat_int(x as i64) * ln_rational(x, params.bits)
            }
            ExoticKind::Jordan => {
                Rat::from_integer(Int::from(x).pow(2 * params.t))
            }
            ExoticKind::Totient => Rat::from_integer(Int::from(x).pow(2)),
        }
    };
    // discriminant of the printed floor bound: 24k+1 for PowerS (boundary
    // shifts hit argument 0 and are skipped), 24k-23 otherwise
    let radicand = |k: u64| -> i64 {
        match kind {
            ExoticKind::PowerS => 24 * k as i64 + 1,
            _ => 24 * k as i64 - 23,
        }
    };
    let mut acc = Rat::zero();
    for k in 1..=n {
        // bracket = h(k) + sum_b sum_j (-1)^j h(k - j(3j+b)/2)
        let mut bracket = h(k);
        for b in [1i64, -1] {
            for j in 1..=pentagonal_bound(radicand(k), b) {
                let shift = (j * (3 * j + b) / 2) as u64;
                if shift >= k {
                    continue; // argument < 1: sigma/log undefined at 0
                }
                let sign = if j % 2 == 0 { 1 } else { -1 };
                bracket += h(k - shift) * rat_int(sign);
            }
        }
        if bracket.is_zero() {
            continue;
        }
        for d in divisors(n) {
            if d < k {
                continue;
            }
            let mu = mobius(n / d);
            if mu == 0 {
                continue;
            }
            let weight = match kind {
                ExoticKind::PowerS => sigma(d, params.t as i64),
                ExoticKind::VonMangoldt | ExoticKind::Totient => rat_int(d as i64),
                ExoticKind::Jordan => Rat::from_integer(Int::from(d).pow(params.t)),
            };
            acc += Rat::from_integer(partition_p((d - k) as i64) * Int::from(mu)) / weight
                * &bracket;
        }
    }
    Ok(acc)
}

/// Which zeta series to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaVariant {
    /// First Hadamard series: weight p(d-k)/sigma_t(d), inner exponent s.
    SigmaSt,
    /// Second Hadamard series: weight d^t p(d-k)/sigma_t(d), exponent s+t.
    SigmaStShifted,
    /// First-derivative series: weight p(d-k)/d, single sigma_s, exponent s-1.
    DerivT1,
}

impl ZetaVariant {
    pub fn parse(name: &str) -> Result<Self, Error> {
        match name {
            "sigma_st" | "sigma-st" => Ok(ZetaVariant::SigmaSt),
            "sigma_st_shifted" | "sigma-st-shifted" => Ok(ZetaVariant::SigmaStShifted),
            "deriv_t1" | "deriv-t1" => Ok(ZetaVariant::DerivT1),
            _ => Err(Error::InvalidParameter(format!(
                "unknown zeta variant '{name}' (expected sigma-st, sigma-st-shifted, deriv-t1)"
            ))),
        }
    }
}

/// The n-th outer summand of the selected zeta series, exact.
/// Sums over k <= n, d | n, and pentagonal indices j with G_j < k
/// (strict, so every sigma argument stays positive). For integer s >= 2
/// each variant's term collapses to exactly 1/n^s (term-exactness).
pub fn zeta_term(variant: ZetaVariant, s: i64, t: i64, n: u64) -> Result<Rat, Error> {
    if s <= 1 {
        return Err(Error::ZetaDivergent { s });
    }
    assert!(n >= 1);
    let inner = |k: u64| -> Rat {
        let mut acc = Rat::zero();
        // G_j is nondecreasing in j, so the strict bound G_j < k makes
        // this a finite prefix starting at j = 0 (G_0 = 0)
        let mut j = 0u64;
        loop {
            let g = pentagonal_g(j);
            if g >= k {
                break;
            }
            let m = k - g;
            let sign = pentagonal_sign(j);
            let term = match variant {
                ZetaVariant::SigmaSt => {
                    sigma(m, t) * sigma(m, s) / Rat::from_integer(Int::from(m).pow(s as u32))
                }
                ZetaVariant::SigmaStShifted => {
                    sigma(m, t) * sigma(m, s)
                        / Rat::from_integer(Int::from(m).pow((s + t) as u32))
                }
                ZetaVariant::DerivT1 => {
                    sigma(m, s) / Rat::from_integer(Int::from(m).pow((s - 1) as u32))
                }
            };
            acc += term * rat_int(sign);
            j += 1;
        }
        acc
    };
    let mut acc = Rat::zero();
    for k in 1..=n {
        let bracket = inner(k);
        if bracket.is_zero() {
            continue;
        }
        for d in divisors(n) {
            if d < k {
                continue;
            }
            let mu = mobius(n / d);
            if mu == 0 {
                continue;
            }
            let p = partition_p((d - k) as i64);
            let weight = match variant {
                ZetaVariant::SigmaSt => Rat::from_integer(p * Int::from(mu)) / sigma(d, t),
                ZetaVariant::SigmaStShifted => {
                    Rat::from_integer(p * Int::from(mu) * Int::from(d).pow(t as u32)) / sigma(d, t)
                }
                ZetaVariant::DerivT1 => {
                    Rat::new(p * Int::from(mu), Int::from(d))
                }
            };
            acc += weight * &bracket;
        }
    }
    Ok(acc)
}

/// Partial-sum report for a zeta series: exact terms, running sums, and
/// absolute errors against an independently computed reference.
#[derive(Clone, Debug)]
pub struct ZetaReport {
    pub variant: ZetaVariant,
    pub s: i64,
    pub t: i64,
    pub order: u64,
    pub terms: Vec<Rat>,
    pub partial_sums: Vec<Rat>,
    /// Lower bound on zeta(s): sum_{n <= 4N} 1/n^s plus the integral
    /// lower tail bound 1/((s-1)(4N+1)^{s-1}).
    pub reference: Rat,
    /// Width of the bracketing interval around zeta(s) (upper minus
    /// lower integral tail bound at 4N).
    pub reference_gap: Rat,
    pub abs_errors: Vec<Rat>,
}

/// Accumulates [`zeta_term`] for n <= N. The reference zeta(s) value is
/// self-computed: an exact partial sum four times longer plus an
/// integral tail bound — no external constant tables.
pub fn zeta_partial(variant: ZetaVariant, s: i64, t: i64, order: u64) -> Result<ZetaReport, Error> {
    assert!(order >= 1);
    if s <= 1 {
        return Err(Error::ZetaDivergent { s });
    }
    let mut terms = Vec::with_capacity(order as usize);
    let mut partial_sums = Vec::with_capacity(order as usize);
    let mut running = Rat::zero();
    for n in 1..=order {
        let term = zeta_term(variant, s, t, n)?;
        running += &term;
        terms.push(term);
        partial_sums.push(running.clone());
    }
    let m = 4 * order;
    let mut reference = Rat::zero();
    for n in 1..=m {
        reference += Rat::new(Int::one(), Int::from(n).pow(s as u32));
    }
    // integral bounds on the tail sum_{n > m} 1/n^s:
    //   1/((s-1)(m+1)^{s-1}) <= tail <= 1/((s-1) m^{s-1})
    let lower_tail = Rat::new(
        Int::one(),
        Int::from(s - 1) * Int::from(m + 1).pow((s - 1) as u32),
    );
    let upper_tail = Rat::new(
        Int::one(),
        Int::from(s - 1) * Int::from(m).pow((s - 1) as u32),
    );
    let reference_gap = &upper_tail - &lower_tail;
    reference += lower_tail;
    let abs_errors = partial_sums
        .iter()
        .map(|p| (&reference - p).abs())
        .collect();
    Ok(ZetaReport {
        variant,
        s,
        t,
        order,
        terms,
        partial_sums,
        reference,
        reference_gap,
        abs_errors,
    })
}

fn rat_str(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl ZetaReport {
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = (0..self.order as usize)
            .map(|i| {
                json!({
                    "n": i + 1,
                    "term": rat_str(&self.terms[i]),
                    "partial_sum": rat_str(&self.partial_sums[i]),
                    "abs_error": rat_str(&self.abs_errors[i]),
                })
            })
            .collect();
        json!({
            "variant": self.variant,
            "s": self.s,
            "t": self.t,
            "N": self.order,
            "reference": rat_str(&self.reference),
            "reference_gap": rat_str(&self.reference_gap),
            "rows": rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,term,partial_sum,abs_error\n");
        for i in 0..self.order as usize {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                rat_str(&self.terms[i]),
                rat_str(&self.partial_sums[i]),
                rat_str(&self.abs_errors[i]),
            ));
        }
        out
    }
}

/// The inner integer of the exact omega formula:
/// sum_{k=1}^n sum_{j=1}^k C_{k,j} s_{n,k} |mu(j)|, with C the
/// reconstruction kernel. Equals 2^{omega(n)} when the identity holds.
/// Precomputed matrices are shared across n via [`omega_exact_upto`].
fn omega_inner(n: u64, s_base: &factorization::FactorMatrix, c: &factorization::FactorMatrix) -> Int {
    let mut acc = Rat::zero();
    for k in 1..=n {
        let s = s_base.get(n, k);
        if s.is_zero() {
            continue;
        }
        let mut inner = Rat::zero();
        for j in 1..=k {
            if mobius(j) == 0 {
                continue;
            }
            inner += c.get(k, j);
        }
        acc += s * inner;
    }
    debug_assert!(acc.denom().is_one());
    acc.to_integer()
}

/// Exact formula for the number of distinct prime factors:
/// omega(n) = log_2 of the inner triple sum. Errors if the inner sum is
/// not a positive power of two (which would mean the identity — or the
/// implementation — is broken, never expected).
pub fn omega_exact(n: u64) -> Result<u32, Error> {
    omega_exact_upto(n).map(|v| v[(n - 1) as usize])
}

/// omega(n) for every n <= N, sharing the s_{n,k} and C_{n,k} matrices.
pub fn omega_exact_upto(order: u64) -> Result<Vec<u32>, Error> {
    assert!(order >= 1);
    let s = factorization::s_base(order);
    let c = factorization::c_matrix(order);
    let mut out = Vec::with_capacity(order as usize);
    for n in 1..=order {
        let value = omega_inner(n, &s, &c);
        if value.is_positive() && (&value & (&value - Int::one())).is_zero() {
            out.push((value.bits() - 1) as u32);
        } else {
            return Err(Error::OmegaIdentityViolation {
                n,
                value: value.to_string(),
            });
        }
    }
    Ok(out)
}

/// Which classical partition identity to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionIdentity {
    /// n p(n) = sum_{k=0}^{n-1} p(k) sigma_1(n-k). (The printed form has
    /// sigma_1(n) in place of sigma_1(n-k) and fails at n = 2; both
    /// forms are evaluated and reported.)
    PSigma1,
    /// n p_k(n) = sum_{t=1}^n p_k(n-t) sum_{j|t, j<=k} j, where p_k
    /// counts partitions into at most k parts.
    PkRestricted,
    /// n pp(n) = sum_{j=1}^n pp(n-j) sigma_2(j), where pp counts plane
    /// partitions, generated by prod_k (1-q^k)^{-k}.
    PpSigma2,
}

impl PartitionIdentity {
    pub fn parse(name: &str) -> Result<Self, Error> {
        match name {
            "p_sigma1" | "p-sigma1" => Ok(PartitionIdentity::PSigma1),
            "pk_restricted" | "pk-restricted" => Ok(PartitionIdentity::PkRestricted),
            "pp_sigma2" | "pp-sigma2" => Ok(PartitionIdentity::PpSigma2),
            _ => Err(Error::InvalidParameter(format!(
                "unknown partition identity '{name}' (expected p-sigma1, pk-restricted, pp-sigma2)"
            ))),
        }
    }
}

/// Verdict of a partition-identity check. For PSigma1 the defective
/// printed right side is also evaluated (`rhs_printed`), but `pass`
/// refers to the corrected convolution form.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionCheck {
    pub which: PartitionIdentity,
    pub n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs_printed: Option<String>,
    pub pass: bool,
}

/// Partitions of n into at most k parts, via the generating function
/// prod_{j=1}^k 1/(1-q^j) (conjugation: at most k parts = parts <= k).
pub fn p_restricted(n: u64, k: u64) -> Int {
    assert!(k >= 1);
    let mut gf = QSeries::one(n);
    for j in 1..=k.min(n.max(1)) {
        gf = gf.mul(&qseries::geometric_power(j, 1, n));
    }
    let c = gf.coeff(n);
    debug_assert!(c.denom().is_one());
    c.numer().clone()
}

/// Plane partitions of n, via MacMahon's product prod_k (1-q^k)^{-k}.
pub fn plane_partition(n: u64) -> Int {
    let mut gf = QSeries::one(n);
    for k in 1..=n.max(1) {
        gf = gf.mul(&qseries::geometric_power(k, k, n));
    }
    let c = gf.coeff(n);
    debug_assert!(c.denom().is_one());
    c.numer().clone()
}

/// Evaluates both sides of the selected identity exactly.
pub fn partition_identity_check(
    which: PartitionIdentity,
    n: u64,
    k: Option<u64>,
) -> Result<PartitionCheck, Error> {
    assert!(n >= 1);
    let (lhs, rhs, rhs_printed, kk) = match which {
        PartitionIdentity::PSigma1 => {
            let lhs = Int::from(n) * partition_p(n as i64);
            let mut rhs = Rat::zero();
            let mut printed = Rat::zero();
            let sigma_n = sigma(n, 1);
            for j in 0..n {
                let p = Rat::from_integer(partition_p(j as i64));
                rhs += &p * sigma(n - j, 1);
                printed += &p * &sigma_n;
            }
            (Rat::from_integer(lhs), rhs, Some(printed), None)
        }
        PartitionIdentity::PkRestricted => {
            let kk = k.ok_or_else(|| {
                Error::InvalidParameter("pk-restricted needs k >= 1".to_string())
            })?;
            if kk < 1 {
                return Err(Error::InvalidParameter(
                    "pk-restricted needs k >= 1".to_string(),
                ));
            }
            let lhs = Rat::from_integer(Int::from(n) * p_restricted(n, kk));
            let mut rhs = Rat::zero();
            for t in 1..=n {
                let weight: u64 = divisors(t).into_iter().filter(|j| *j <= kk).sum();
                if weight == 0 {
                    continue;
                }
                rhs += Rat::from_integer(p_restricted(n - t, kk) * Int::from(weight));
            }
            (lhs, rhs, None, Some(kk))
        }
        PartitionIdentity::PpSigma2 => {
            let pp: Vec<Int> = (0..=n).map(plane_partition).collect();
            let lhs = Rat::from_integer(Int::from(n) * &pp[n as usize]);
            let mut rhs = Rat::zero();
            for j in 1..=n {
                rhs += Rat::from_integer(&pp[(n - j) as usize] * Int::one()) * sigma(j, 2);
            }
            (lhs, rhs, None, None)
        }
    };
    let pass = lhs == rhs;
    Ok(PartitionCheck {
        which,
        n,
        k: kk,
        lhs: rat_str(&lhs),
        rhs: rat_str(&rhs),
        rhs_printed: rhs_printed.as_ref().map(rat_str),
        pass,
    })
}
