//! Truncated formal power series over exact rationals.
//!
//! This is the independent oracle for every factorization identity: each
//! closed-form matrix construction elsewhere in the crate is replayed as a
//! product of the series built here and compared coefficient-wise.

use num::{One, Zero};

use crate::arith::{self, divisors, mobius};
use crate::error::Error;
use crate::{Int, Rat};

/// An arithmetic function a_1..a_N stored as an exact-rational prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticTable {
    values: Vec<Rat>, // values[i] = a_{i+1}
}

impl ArithmeticTable {
    pub fn from_fn(order: u64, f: impl Fn(u64) -> Rat) -> Self {
        ArithmeticTable {
            values: (1..=order).map(f).collect(),
        }
    }

    pub fn from_values(values: Vec<Rat>) -> Self {
        ArithmeticTable { values }
    }

    /// Largest index the table is defined on.
    pub fn order(&self) -> u64 {
        self.values.len() as u64
    }

    /// a_n for 1 <= n <= order.
    pub fn get(&self, n: u64) -> &Rat {
        assert!(n >= 1 && n <= self.order(), "table index {n} out of range");
        &self.values[(n - 1) as usize]
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// Divisor-sum transform: returns the table n -> sum_{d|n} a_d.
    pub fn divisor_sums(&self) -> ArithmeticTable {
        let n = self.order();
        let mut out = vec![Rat::zero(); n as usize];
        for d in 1..=n {
            let mut m = d;
            while m <= n {
                out[(m - 1) as usize] += self.get(d);
                m += d;
            }
        }
        ArithmeticTable { values: out }
    }

    /// Moebius inversion: returns n -> sum_{d|n} a_d mu(n/d).
    pub fn mobius_inverted(&self) -> ArithmeticTable {
        let n = self.order();
        ArithmeticTable::from_fn(n, |m| {
            divisors(m)
                .into_iter()
                .map(|d| self.get(d) * Rat::from_integer(Int::from(mobius(m / d))))
                .sum()
        })
    }
}

/// Dense truncated power series: coefficients of q^0..q^order are valid,
/// nothing beyond the order is readable. Binary operations truncate to the
/// smaller of the two orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    coeffs: Vec<Rat>, // length order + 1
}

impl QSeries {
    pub fn zero(order: u64) -> Self {
        QSeries {
            coeffs: vec![Rat::zero(); (order + 1) as usize],
        }
    }

    pub fn one(order: u64) -> Self {
        let mut s = QSeries::zero(order);
        s.coeffs[0] = Rat::one();
        s
    }

    pub fn monomial(c: Rat, degree: u64, order: u64) -> Self {
        let mut s = QSeries::zero(order);
        if degree <= order {
            s.coeffs[degree as usize] = c;
        }
        s
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty());
        QSeries { coeffs }
    }

    pub fn order(&self) -> u64 {
        (self.coeffs.len() - 1) as u64
    }

    pub fn coeff(&self, n: u64) -> &Rat {
        assert!(n <= self.order(), "coefficient {n} beyond truncation order");
        &self.coeffs[n as usize]
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn truncate(&self, order: u64) -> QSeries {
        let order = order.min(self.order());
        QSeries {
            coeffs: self.coeffs[..=(order as usize)].to_vec(),
        }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let order = self.order().min(other.order());
        QSeries {
            coeffs: (0..=order as usize)
                .map(|i| &self.coeffs[i] + &other.coeffs[i])
                .collect(),
        }
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        let order = self.order().min(other.order());
        QSeries {
            coeffs: (0..=order as usize)
                .map(|i| &self.coeffs[i] - &other.coeffs[i])
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> QSeries {
        QSeries {
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let order = self.order().min(other.order()) as usize;
        let mut out = vec![Rat::zero(); order + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(order + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order + 1 - i) {
                if b.is_zero() {
                    continue;
                }
                out[i + j] += a * b;
            }
        }
        QSeries { coeffs: out }
    }

    /// q^t d^t/dq^t applied coefficient-wise: q^n picks up n(n-1)...(n-t+1).
    pub fn q_derivative(&self, t: u32) -> QSeries {
        QSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * Rat::from_integer(arith::falling(n as i64, t)))
                .collect(),
        }
    }

    /// Multiplicative inverse to the truncation order, by the linear
    /// recurrence g_n = -(1/f_0) sum_{j=1}^n f_j g_{n-j}.
    pub fn reciprocal(&self) -> Result<QSeries, Error> {
        if self.coeffs[0].is_zero() {
            return Err(Error::NonInvertibleSeries);
        }
        let order = self.order() as usize;
        let inv0 = Rat::one() / &self.coeffs[0];
        let mut g = vec![Rat::zero(); order + 1];
        g[0] = inv0.clone();
        for n in 1..=order {
            let mut acc = Rat::zero();
            for j in 1..=n {
                if self.coeffs[j].is_zero() {
                    continue;
                }
                acc += &self.coeffs[j] * &g[n - j];
            }
            g[n] = -acc * &inv0;
        }
        Ok(QSeries { coeffs: g })
    }
}

/// (q;q)_inf truncated to order N via the pentagonal number theorem:
/// sum_j (-1)^{ceil(j/2)} q^{G_j}.
pub fn pochhammer_qq(order: u64) -> QSeries {
    let mut s = QSeries::zero(order);
    let mut j = 0u64;
    loop {
        let g = arith::pentagonal_g(j);
        if g > order {
            break;
        }
        s.coeffs[g as usize] = Rat::from_integer(Int::from(arith::pentagonal_sign(j)));
        j += 1;
    }
    s
}

/// q^k/(1-q^k) = sum_{r>=1} q^{rk}, truncated to order N.
pub fn lambert_term(k: u64, order: u64) -> QSeries {
    assert!(k >= 1);
    let mut s = QSeries::zero(order);
    let mut m = k;
    while m <= order {
        s.coeffs[m as usize] = Rat::one();
        m += k;
    }
    s
}

/// 1/(1-q^i)^{count} = sum_{r>=0} C(r+count-1, count-1) q^{ir}.
pub fn geometric_power(i: u64, count: u64, order: u64) -> QSeries {
    assert!(i >= 1 && count >= 1);
    let mut s = QSeries::zero(order);
    let mut r = 0u64;
    while i * r <= order {
        s.coeffs[(i * r) as usize] = Rat::from_integer(arith::binomial(
            (r + count - 1) as i64,
            (count - 1) as i64,
        ));
        r += 1;
    }
    s
}

/// Lambert series sum_{n>=1} a_n q^n/(1-q^n) to order N; the q^n
/// coefficient is the divisor sum over a.
pub fn lambert_gf(a: &ArithmeticTable, order: u64) -> QSeries {
    let mut s = QSeries::zero(order);
    for d in 1..=order.min(a.order()) {
        let v = a.get(d);
        if v.is_zero() {
            continue;
        }
        let mut m = d;
        while m <= order {
            s.coeffs[m as usize] += v;
            m += d;
        }
    }
    s
}

/// Coefficients a_fg of the Hadamard product of the Lambert series over f
/// and g: the table whose divisor sums are f~(n) * g~(n).
pub fn hadamard_coeffs(f: &ArithmeticTable, g: &ArithmeticTable, order: u64) -> ArithmeticTable {
    let ft = f.divisor_sums();
    let gt = g.divisor_sums();
    let product = ArithmeticTable::from_fn(order, |n| ft.get(n) * gt.get(n));
    product.mobius_inverted()
}
