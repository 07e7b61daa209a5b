//! Lower-triangular factorization matrices and their exact inverses.
//!
//! Each builder constructs one of the matrix sequences from a Lambert
//! series factorization: the base sequence s_{n,k}, the Hadamard-product
//! sequence s_{n,k}(f) with its closed-form inverse, the derivative
//! sequences s_{t,n,k}, the convolution sequence s_{n,k}(g), and the
//! reconstruction matrix C_{n,k}. Every inverse can be cross-checked
//! against plain forward-substitution inversion.

use num::{One, Zero};
use serde_json::json;

use crate::arith::{
    self, divisors, mobius, partition_p, pentagonal_bound, rat_bits, t_div,
};
use crate::error::Error;
use crate::qseries::{self, ArithmeticTable, QSeries};
use crate::{rat_int, Int, Rat};

/// Exact-rational lower-triangular matrix with rows/columns indexed
/// start..start+dim-1. Entries above the diagonal are identically zero
/// and are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorMatrix {
    start: u64,
    dim: u64,
    entries: Vec<Rat>, // packed rows: row r holds r+1 entries
}

impl FactorMatrix {
    pub fn zero(start: u64, dim: u64) -> Self {
        assert!(start >= 1 && dim >= 1);
        let len = (dim * (dim + 1) / 2) as usize;
        FactorMatrix {
            start,
            dim,
            entries: vec![Rat::zero(); len],
        }
    }

    pub fn identity(start: u64, dim: u64) -> Self {
        let mut m = FactorMatrix::zero(start, dim);
        for i in 0..dim {
            let idx = m.index(i, i);
            m.entries[idx] = Rat::one();
        }
        m
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn dim(&self) -> u64 {
        self.dim
    }

    /// Largest valid row/column index.
    pub fn end(&self) -> u64 {
        self.start + self.dim - 1
    }

    fn index(&self, row: u64, col: u64) -> usize {
        debug_assert!(col <= row && row < self.dim);
        (row * (row + 1) / 2 + col) as usize
    }

    /// Entry (n, k) in absolute indices; zero above the diagonal.
    pub fn get(&self, n: u64, k: u64) -> Rat {
        assert!(
            n >= self.start && n <= self.end() && k >= self.start && k <= self.end(),
            "index ({n},{k}) outside stored block"
        );
        if k > n {
            return Rat::zero();
        }
        self.entries[self.index(n - self.start, k - self.start)].clone()
    }

    pub fn set(&mut self, n: u64, k: u64, v: Rat) {
        assert!(k >= self.start && k <= n && n <= self.end());
        let idx = self.index(n - self.start, k - self.start);
        self.entries[idx] = v;
    }

    /// Exact matrix product; both operands must share start and dim.
    pub fn mul(&self, other: &FactorMatrix) -> FactorMatrix {
        assert_eq!(self.start, other.start);
        assert_eq!(self.dim, other.dim);
        let mut out = FactorMatrix::zero(self.start, self.dim);
        for r in 0..self.dim {
            for c in 0..=r {
                let mut acc = Rat::zero();
                for j in c..=r {
                    let a = &self.entries[self.index(r, j)];
                    if a.is_zero() {
                        continue;
                    }
                    let b = &other.entries[other.index(j, c)];
                    if b.is_zero() {
                        continue;
                    }
                    acc += a * b;
                }
                let idx = out.index(r, c);
                out.entries[idx] = acc;
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        for r in 0..self.dim {
            for c in 0..=r {
                let want = if r == c { Rat::one() } else { Rat::zero() };
                if self.entries[self.index(r, c)] != want {
                    return false;
                }
            }
        }
        true
    }

    /// Exact inverse by forward substitution. Fails naming the first row
    /// whose diagonal entry is zero.
    pub fn inverse(&self) -> Result<FactorMatrix, Error> {
        for r in 0..self.dim {
            if self.entries[self.index(r, r)].is_zero() {
                return Err(Error::SingularMatrix {
                    row: self.start + r,
                });
            }
        }
        let mut inv = FactorMatrix::zero(self.start, self.dim);
        for c in 0..self.dim {
            let idx = inv.index(c, c);
            inv.entries[idx] = Rat::one() / &self.entries[self.index(c, c)];
            for r in (c + 1)..self.dim {
                let mut acc = Rat::zero();
                for j in c..r {
                    let a = &self.entries[self.index(r, j)];
                    if a.is_zero() {
                        continue;
                    }
                    acc += a * &inv.entries[inv.index(j, c)];
                }
                let idx = inv.index(r, c);
                inv.entries[idx] = -acc / &self.entries[self.index(r, r)];
            }
        }
        Ok(inv)
    }

    /// Largest bit size over all stored entries (diagnostics).
    pub fn max_entry_bits(&self) -> u64 {
        self.entries.iter().map(rat_bits).max().unwrap_or(0)
    }

    fn fmt_entry(r: &Rat) -> String {
        if r.denom().is_one() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    /// Full square block as strings, zeros above the diagonal included.
    pub fn rows_as_strings(&self) -> Vec<Vec<String>> {
        (0..self.dim)
            .map(|r| {
                (0..self.dim)
                    .map(|c| {
                        if c <= r {
                            Self::fmt_entry(&self.entries[self.index(r, c)])
                        } else {
                            "0".to_string()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "start": self.start,
            "dim": self.dim,
            "rows": self.rows_as_strings(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.rows_as_strings() {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Base factorization sequence s_{n,k} = [q^n] (q;q)_inf q^k/(1-q^k),
/// built column-by-column from the q-series product. start = 1.
pub fn s_base(order: u64) -> FactorMatrix {
    assert!(order >= 1);
    let poch = qseries::pochhammer_qq(order);
    let mut m = FactorMatrix::zero(1, order);
    for k in 1..=order {
        let col = poch.mul(&qseries::lambert_term(k, order));
        for n in k..=order {
            m.set(n, k, col.coeff(n).clone());
        }
    }
    m
}

/// s_o(n,k) - s_e(n,k): the number of k's among partitions of n into an
/// odd number of distinct parts minus the even count. Exhaustive
/// enumeration; the independent combinatorial oracle for [`s_base`].
pub fn s_base_combinatorial(n: u64, k: u64) -> Result<i64, Error> {
    const MAX: u64 = 40;
    if !(1 <= k && k <= n && n <= MAX) {
        return Err(Error::OracleRange { n, k, max: MAX });
    }
    let mut count = 0i64;
    let mut parts = Vec::new();
    enumerate_distinct(n, 1, &mut parts, &mut |parts: &[u64]| {
        if parts.contains(&k) {
            if parts.len() % 2 == 1 {
                count += 1;
            } else {
                count -= 1;
            }
        }
    });
    Ok(count)
}

fn enumerate_distinct(remaining: u64, min: u64, parts: &mut Vec<u64>, visit: &mut impl FnMut(&[u64])) {
    if remaining == 0 {
        visit(parts);
        return;
    }
    let mut p = min;
    while p <= remaining {
        parts.push(p);
        enumerate_distinct(remaining - p, p + 1, parts, visit);
        parts.pop();
        p += 1;
    }
}

/// Exact inverse of a lower-triangular block (forward substitution).
pub fn invert_lower_triangular(m: &FactorMatrix) -> Result<FactorMatrix, Error> {
    m.inverse()
}

/// Hadamard-product forward sequence s_{n,k}(f): the divisor indicator
/// weighted by f~(n) plus the pentagonal correction sum.
pub fn hadamard_forward(f: &ArithmeticTable, order: u64) -> FactorMatrix {
    assert!(f.order() >= order);
    let ft = f.divisor_sums();
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = rat_int(t_div(n, k)) * ft.get(n);
            for b in [1i64, -1] {
                let bound = pentagonal_bound(24 * (n - k) as i64 + 1, b);
                for j in 1..=bound {
                    let shift = (j * (3 * j + b) / 2) as u64;
                    debug_assert!(shift <= n - k);
                    let arg = n - shift;
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    acc += rat_int(sign * t_div(arg, k)) * ft.get(arg);
                }
            }
            m.set(n, k, acc);
        }
    }
    m
}

/// Hadamard forward matrix rebuilt from the defining q-series product
/// [q^n] (q;q)_inf * sum_m T_Div(m,k) f~(m) q^m. Oracle route for
/// [`hadamard_forward`].
pub fn hadamard_forward_oracle(f: &ArithmeticTable, order: u64) -> FactorMatrix {
    let ft = f.divisor_sums();
    let poch = qseries::pochhammer_qq(order);
    let mut m = FactorMatrix::zero(1, order);
    for k in 1..=order {
        let mut col = QSeries::zero(order);
        let mut idx = k;
        while idx <= order {
            col = col.add(&QSeries::monomial(ft.get(idx).clone(), idx, order));
            idx += k;
        }
        let prod = poch.mul(&col);
        for n in k..=order {
            m.set(n, k, prod.coeff(n).clone());
        }
    }
    m
}

/// Closed-form Hadamard inverse s_{n,k}^(-1)(f) = sum_{d|n} p(d-k)/f~(d) mu(n/d).
/// Fails if any divisor sum f~(d) vanishes for d <= order.
pub fn hadamard_inverse(f: &ArithmeticTable, order: u64) -> Result<FactorMatrix, Error> {
    assert!(f.order() >= order);
    let ft = f.divisor_sums();
    for d in 1..=order {
        if ft.get(d).is_zero() {
            return Err(Error::ZeroDivisorSum { d });
        }
    }
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Rat::zero();
            for d in divisors(n) {
                if d < k {
                    continue;
                }
                let mu = mobius(n / d);
                if mu == 0 {
                    continue;
                }
                acc += Rat::from_integer(partition_p((d - k) as i64) * Int::from(mu)) / ft.get(d);
            }
            m.set(n, k, acc);
        }
    }
    Ok(m)
}

/// Divisor-scaled sequence s~_{n,k}(g) = sum_j s_{n,kj} g(j).
pub fn stilde(g: &ArithmeticTable, order: u64) -> FactorMatrix {
    assert!(g.order() >= order);
    let base = s_base(order);
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Rat::zero();
            let mut j = 1;
            while k * j <= n {
                let b = base.get(n, k * j);
                if !b.is_zero() {
                    acc += b * g.get(j);
                }
                j += 1;
            }
            m.set(n, k, acc);
        }
    }
    m
}

/// Convolution forward sequence s_{n,k}(g), built from the defining
/// product: entry (n,k) = [q^{n+1}] q^k/(1-q^k) (q;q)_inf G_L(q).
/// This is the authoritative (oracle) construction; the closed-form
/// partial sum over s_{j,k} g~(n+1-j) runs j = 1..n only (the empty
/// divisor sum over 0 contributes nothing, not 1).
pub fn conv_forward(g: &ArithmeticTable, order: u64) -> FactorMatrix {
    assert!(g.order() >= order + 1);
    let ext = order + 1;
    let poch = qseries::pochhammer_qq(ext);
    let gl = qseries::lambert_gf(g, ext);
    let mut m = FactorMatrix::zero(1, order);
    for k in 1..=order {
        let prod = poch.mul(&qseries::lambert_term(k, ext)).mul(&gl);
        for n in k..=order {
            m.set(n, k, prod.coeff(n + 1).clone());
        }
    }
    m
}

/// Closed-form convolution inverse
/// s_{n,k}^(-1)(g) = sum_{d|n} [q^d] (q^{k+1} / ((q;q)_inf G_L(q))) mu(n/d).
/// Needs g(1) != 0 so that G_L(q)/q has an invertible constant term.
pub fn conv_inverse(g: &ArithmeticTable, order: u64) -> Result<FactorMatrix, Error> {
    assert!(g.order() >= order + 1);
    if g.get(1).is_zero() {
        return Err(Error::ZeroLeadingConvolution);
    }
    // R = 1 / ((q;q)_inf * G_L/q); then [q^d] q^{k+1}/((q;q)_inf G_L) = R[d-k]
    let gt = g.divisor_sums();
    let glq = QSeries::from_coeffs((0..=order).map(|i| gt.get(i + 1).clone()).collect());
    let recip = qseries::pochhammer_qq(order).mul(&glq).reciprocal()?;
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Rat::zero();
            for d in divisors(n) {
                if d < k {
                    continue;
                }
                let mu = mobius(n / d);
                if mu == 0 {
                    continue;
                }
                acc += recip.coeff(d - k) * rat_int(mu);
            }
            m.set(n, k, acc);
        }
    }
    Ok(m)
}

/// Derivative factorization sequence s_{t,n,k} = [q^n] (q;q)_inf q^t D_t[q^k/(1-q^k)],
/// stored with start = t (rows n < t are dropped to keep the block invertible).
pub fn deriv_matrix(t: u32, order: u64) -> FactorMatrix {
    assert!(t >= 1 && order >= t as u64);
    let start = t as u64;
    let poch = qseries::pochhammer_qq(order);
    let mut m = FactorMatrix::zero(start, order - start + 1);
    for k in start..=order {
        let col = poch.mul(&qseries::lambert_term(k, order).q_derivative(t));
        for n in k..=order {
            m.set(n, k, col.coeff(n).clone());
        }
    }
    m
}

/// Closed-form inverse for the first-order derivative sequence:
/// s_{1,n,k}^(-1) = sum_{d|n} p(d-k)/d mu(n/d).
pub fn deriv_inverse_t1(order: u64) -> FactorMatrix {
    assert!(order >= 1);
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Rat::zero();
            for d in divisors(n) {
                if d < k {
                    continue;
                }
                let mu = mobius(n / d);
                if mu == 0 {
                    continue;
                }
                acc += Rat::new(partition_p((d - k) as i64) * Int::from(mu), Int::from(d));
            }
            m.set(n, k, acc);
        }
    }
    m
}

/// Mixed-series forward sequence s_{j,n,k} for j >= 2: the j-th derivative
/// factorization with the first j-1 Lambert coefficients added back, which
/// makes the matrix invertible from row 1. Entry (n,k) =
/// [q^n] (q;q)_inf ( q^j D_j[q^k/(1-q^k)] + sum_{i<j} T_Div(i,k) q^i ).
pub fn mixed_deriv_forward(j: u32, order: u64) -> FactorMatrix {
    assert!(j >= 2 && order >= 1);
    let poch = qseries::pochhammer_qq(order);
    let mut m = FactorMatrix::zero(1, order);
    for k in 1..=order {
        let mut col = qseries::lambert_term(k, order).q_derivative(j);
        let mut i = k;
        while i < j as u64 && i <= order {
            col = col.add(&QSeries::monomial(Rat::one(), i, order));
            i += k;
        }
        let prod = poch.mul(&col);
        for n in k..=order {
            m.set(n, k, prod.coeff(n).clone());
        }
    }
    m
}

/// Closed-form mixed-series inverse:
/// s_{j,n,k}^(-1) = sum_{d|n} p(d-k) / (C(d,j) j! + [d <= j-1]) mu(n/d).
pub fn mixed_deriv_inverse(j: u32, order: u64) -> FactorMatrix {
    assert!(j >= 2 && order >= 1);
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Rat::zero();
            for d in divisors(n) {
                if d < k {
                    continue;
                }
                let mu = mobius(n / d);
                if mu == 0 {
                    continue;
                }
                // denominator d!/(d-j)! + [1 <= d <= j-1], always positive
                let mut den = arith::falling(d as i64, j);
                if d <= (j - 1) as u64 {
                    den += Int::one();
                }
                acc += Rat::new(partition_p((d - k) as i64) * Int::from(mu), den);
            }
            m.set(n, k, acc);
        }
    }
    m
}

/// Related factorization s_{n,k}(b) = sum_j s_{n,j} b_{j,k} for a
/// lower-triangular coefficient table b (start must be 1).
pub fn related_fact_matrix(b: &FactorMatrix, order: u64) -> FactorMatrix {
    assert_eq!(b.start(), 1);
    assert_eq!(b.dim(), order);
    s_base(order).mul(b)
}

/// Reconstruction kernel C_{n,k} = sum_{d|n} sum_{i=1}^{d} p(d - ik) mu(n/d).
pub fn c_matrix(order: u64) -> FactorMatrix {
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            let mut acc = Int::zero();
            for d in divisors(n) {
                let mu = mobius(n / d);
                if mu == 0 {
                    continue;
                }
                let mut inner = Int::zero();
                for i in 1..=d {
                    let arg = d as i64 - (i * k) as i64;
                    if arg < 0 {
                        break;
                    }
                    inner += partition_p(arg);
                }
                acc += inner * Int::from(mu);
            }
            m.set(n, k, Rat::from_integer(acc));
        }
    }
    m
}

/// b(n) = sum_k sum_j s_{n,k} C_{k,j} a_j, which reproduces the divisor
/// sums (a * 1)(n) of the input table.
pub fn reconstruct_b(a: &ArithmeticTable, order: u64) -> ArithmeticTable {
    assert!(a.order() >= order);
    let base = s_base(order);
    let c = c_matrix(order);
    // inner weights v(k) = sum_j C_{k,j} a_j
    let v: Vec<Rat> = (1..=order)
        .map(|k| {
            let mut acc = Rat::zero();
            for j in 1..=k {
                let cv = c.get(k, j);
                if !cv.is_zero() {
                    acc += cv * a.get(j);
                }
            }
            acc
        })
        .collect();
    ArithmeticTable::from_fn(order, |n| {
        let mut acc = Rat::zero();
        for k in 1..=n {
            let s = base.get(n, k);
            if !s.is_zero() {
                acc += s * &v[(k - 1) as usize];
            }
        }
        acc
    })
}

/// The divisibility-indicator matrix T_Div(n, k).
pub fn t_div_matrix(order: u64) -> FactorMatrix {
    let mut m = FactorMatrix::zero(1, order);
    for n in 1..=order {
        for k in 1..=n {
            m.set(n, k, rat_int(t_div(n, k)));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::euler_phi;
    use num::Signed;

    fn table_id(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| rat_int(n as i64))
    }

    fn table_phi(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| Rat::from_integer(euler_phi(n)))
    }

    fn table_delta1(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| rat_int(i64::from(n == 1)))
    }

    fn table_mu(order: u64) -> ArithmeticTable {
        ArithmeticTable::from_fn(order, |n| rat_int(mobius(n)))
    }

    #[test]
    fn s_base_small_entries() {
        let m = s_base(5);
        assert_eq!(m.get(1, 1), rat_int(1));
        assert_eq!(m.get(2, 1), rat_int(0));
        assert_eq!(m.get(2, 2), rat_int(1));
        assert_eq!(m.get(3, 1), rat_int(-1));
        assert_eq!(m.get(3, 2), rat_int(-1));
        assert_eq!(m.get(3, 3), rat_int(1));
    }

    #[test]
    fn s_base_matches_combinatorial_oracle() {
        let m = s_base(25);
        for n in 1..=25 {
            for k in 1..=n {
                let oracle = s_base_combinatorial(n, k).unwrap();
                assert_eq!(m.get(n, k), rat_int(oracle), "(n,k) = ({n},{k})");
            }
        }
    }

    #[test]
    fn s_base_combinatorial_examples_and_range() {
        assert_eq!(s_base_combinatorial(1, 1).unwrap(), 1);
        assert_eq!(s_base_combinatorial(3, 3).unwrap(), 1);
        assert!(s_base_combinatorial(50, 1).is_err());
        assert!(s_base_combinatorial(5, 6).is_err());
    }

    #[test]
    fn s_base_bounded_by_partition_counts() {
        let order = 30;
        let m = s_base(order);
        for n in 1..=order {
            let bound = Rat::from_integer(partition_p(n as i64));
            for k in 1..=n {
                assert!(m.get(n, k).abs() <= bound, "(n,k) = ({n},{k})");
            }
        }
    }

    #[test]
    fn inverse_of_identity_and_diagonal() {
        let id = FactorMatrix::identity(1, 6);
        assert_eq!(id.inverse().unwrap(), id);
        let mut d = FactorMatrix::zero(1, 3);
        for (i, v) in [(1u64, 1i64), (2, 2), (3, 3)] {
            d.set(i, i, rat_int(v));
        }
        let inv = d.inverse().unwrap();
        assert_eq!(inv.get(2, 2), Rat::new(Int::one(), Int::from(2)));
        assert_eq!(inv.get(3, 3), Rat::new(Int::one(), Int::from(3)));
        assert!(d.mul(&inv).is_identity());
    }

    #[test]
    fn singular_matrix_names_row() {
        let mut m = FactorMatrix::identity(1, 4);
        m.set(3, 3, Rat::zero());
        match m.inverse() {
            Err(Error::SingularMatrix { row }) => assert_eq!(row, 3),
            other => panic!("expected singular-matrix error, got {other:?}"),
        }
    }

    #[test]
    fn hadamard_forward_closed_form_matches_oracle() {
        let order = 24;
        for f in [table_id(order), table_phi(order), table_delta1(order)] {
            assert_eq!(hadamard_forward(&f, order), hadamard_forward_oracle(&f, order));
        }
    }

    #[test]
    fn hadamard_forward_with_unit_divisor_sums_is_s_base() {
        let order = 20;
        let f = table_delta1(order); // f~ = 1
        assert_eq!(hadamard_forward(&f, order), s_base(order));
    }

    #[test]
    fn hadamard_inverse_small_values_and_product() {
        let order = 20;
        let f = table_id(order);
        let inv = hadamard_inverse(&f, order).unwrap();
        // (1,1) = 1/f~(1)
        assert_eq!(inv.get(1, 1), Rat::one());
        // f = id: (2,1) = p(0)/sigma1(1) mu(2) + p(1)/sigma1(2) mu(1) = -1 + 1/3
        assert_eq!(inv.get(2, 1), Rat::new(Int::from(-2), Int::from(3)));
        let n2 = ArithmeticTable::from_fn(order, |n| rat_int((n * n) as i64));
        for f in [table_id(order), table_phi(order), n2] {
            let fwd = hadamard_forward(&f, order);
            let inv = hadamard_inverse(&f, order).unwrap();
            assert!(fwd.mul(&inv).is_identity());
            assert_eq!(inv, fwd.inverse().unwrap());
        }
    }

    #[test]
    fn hadamard_inverse_rejects_zero_divisor_sum() {
        // f = mu has f~(2) = 0
        let f = table_mu(8);
        match hadamard_inverse(&f, 8) {
            Err(Error::ZeroDivisorSum { d }) => assert_eq!(d, 2),
            other => panic!("expected zero-divisor-sum error, got {other:?}"),
        }
    }

    #[test]
    fn stilde_with_delta1_is_s_base() {
        let order = 16;
        assert_eq!(stilde(&table_delta1(order), order), s_base(order));
        let m = stilde(&table_mu(order), order);
        assert_eq!(m.get(1, 1), rat_int(1));
    }

    #[test]
    fn stilde_mu_is_pentagonal_toeplitz() {
        // s~_{n,k}(mu) = [q^{n-k}] (q;q)_inf, since sum_j mu(j) q^{kj}/(1-q^{kj}) = q^k
        let order = 20;
        let m = stilde(&table_mu(order), order);
        let poch = qseries::pochhammer_qq(order);
        for n in 1..=order {
            for k in 1..=n {
                assert_eq!(m.get(n, k), poch.coeff(n - k).clone());
            }
        }
    }

    #[test]
    fn conv_forward_first_entry_and_boundary() {
        let order = 12;
        let g = table_phi(order + 1);
        let m = conv_forward(&g, order);
        // (1,1) = s_{1,1} g(1): the would-be j = n+1 boundary term is absent
        assert_eq!(m.get(1, 1), Rat::one());
        // closed form sum_{j=1}^{n} s_{j,k} g~(n+1-j) matches the oracle build
        let base = s_base(order + 1);
        let gt = g.divisor_sums();
        for n in 1..=order {
            for k in 1..=n {
                let mut acc = Rat::zero();
                for j in k..=n {
                    acc += base.get(j, k) * gt.get(n + 1 - j);
                }
                assert_eq!(m.get(n, k), acc, "(n,k) = ({n},{k})");
            }
        }
    }

    #[test]
    fn conv_inverse_product_is_identity() {
        let order = 16;
        for g in [table_delta1(order + 1), table_phi(order + 1)] {
            let fwd = conv_forward(&g, order);
            let inv = conv_inverse(&g, order).unwrap();
            assert!(fwd.mul(&inv).is_identity());
            assert!(inv.mul(&fwd).is_identity());
        }
        // delta_1 case, entry (1,1): [q^1] q(1-q)/(q;q)_inf = 1
        let inv = conv_inverse(&table_delta1(order + 1), order).unwrap();
        assert_eq!(inv.get(1, 1), Rat::one());
    }

    #[test]
    fn conv_inverse_rejects_zero_g1() {
        let g = ArithmeticTable::from_fn(13, |n| rat_int(i64::from(n == 2)));
        assert!(matches!(
            conv_inverse(&g, 12),
            Err(Error::ZeroLeadingConvolution)
        ));
    }

    #[test]
    fn deriv_matrix_diagonal_and_inverse() {
        let m = deriv_matrix(1, 12);
        assert_eq!(m.start(), 1);
        for n in 1..=12 {
            assert_eq!(m.get(n, n), rat_int(n as i64));
        }
        assert_eq!(m.get(5, 2), rat_int(-4));
        let inv = deriv_inverse_t1(12);
        assert_eq!(inv.get(2, 1), Rat::new(Int::from(-1), Int::from(2)));
        assert_eq!(inv.get(4, 1), Rat::new(Int::from(1), Int::from(4)));
        assert_eq!(inv.get(6, 1), Rat::one());
        assert_eq!(inv.get(5, 2), Rat::new(Int::from(3), Int::from(5)));
        assert_eq!(inv, m.inverse().unwrap());
    }

    #[test]
    fn deriv_matrix_t2_diagonal() {
        let m = deriv_matrix(2, 10);
        assert_eq!(m.start(), 2);
        for n in 2..=10i64 {
            assert_eq!(m.get(n as u64, n as u64), rat_int(n * (n - 1)));
        }
    }

    #[test]
    fn mixed_deriv_closed_form_inverse() {
        // j=2: (1,1) = p(0)/(0+1) mu(1) = 1; (2,1) = -1 + 1/2
        let inv = mixed_deriv_inverse(2, 10);
        assert_eq!(inv.get(1, 1), Rat::one());
        assert_eq!(inv.get(2, 1), Rat::new(Int::from(-1), Int::from(2)));
        for j in [2u32, 3] {
            let fwd = mixed_deriv_forward(j, 10);
            let inv = mixed_deriv_inverse(j, 10);
            assert!(fwd.mul(&inv).is_identity());
            assert_eq!(inv, fwd.inverse().unwrap());
        }
    }

    #[test]
    fn mixed_forward_equals_base_below_j() {
        // s_{j,n,k} = s_{n,k} for 1 <= n < j
        let base = s_base(10);
        for j in [2u32, 3, 4] {
            let fwd = mixed_deriv_forward(j, 10);
            for n in 1..(j as u64) {
                for k in 1..=n {
                    assert_eq!(fwd.get(n, k), base.get(n, k), "j={j} (n,k)=({n},{k})");
                }
            }
        }
    }

    #[test]
    fn related_factorization_identity_cases() {
        let order = 12;
        let id = FactorMatrix::identity(1, order);
        assert_eq!(related_fact_matrix(&id, order), s_base(order));
        // b_{j,k} = [k|j] gives the stilde-style divisor-sum factorization
        let tdiv = t_div_matrix(order);
        let m = related_fact_matrix(&tdiv, order);
        let one = ArithmeticTable::from_fn(order, |_| Rat::one());
        assert_eq!(m, stilde(&one, order));
    }

    #[test]
    fn c_matrix_small_entries() {
        let c = c_matrix(12);
        assert_eq!(c.get(1, 1), Rat::one());
        assert_eq!(c.get(2, 1), Rat::one());
        // derivation via (p(i-j)) matrix algebra from the reconstruction
        // theorem's proof: C = (T_Div)^{-1} ([q^i] q^j/(1-q^j) / (q;q)_inf)
        let order = 12;
        let tdiv_inv = t_div_matrix(order).inverse().unwrap();
        let pgf = qseries::pochhammer_qq(order).reciprocal().unwrap();
        let mut lam = FactorMatrix::zero(1, order);
        for j in 1..=order {
            let col = pgf.mul(&qseries::lambert_term(j, order));
            for i in j..=order {
                lam.set(i, j, col.coeff(i).clone());
            }
        }
        assert_eq!(c, tdiv_inv.mul(&lam));
    }

    #[test]
    fn reconstruct_b_recovers_divisor_sums() {
        let order = 20;
        let a = table_delta1(order);
        let b = reconstruct_b(&a, order);
        for n in 1..=order {
            assert_eq!(b.get(n), &Rat::one());
        }
        let a = table_phi(order);
        let b = reconstruct_b(&a, order);
        for n in 1..=order {
            assert_eq!(b.get(n), &rat_int(n as i64));
        }
        let a = table_mu(order);
        let b = reconstruct_b(&a, order);
        for n in 1..=order {
            assert_eq!(b.get(n), &rat_int(i64::from(n == 1)));
        }
    }

    #[test]
    fn t_div_display_block() {
        let m = t_div_matrix(6);
        let expect = [
            [1, 0, 0, 0, 0, 0],
            [1, 1, 0, 0, 0, 0],
            [1, 0, 1, 0, 0, 0],
            [1, 1, 0, 1, 0, 0],
            [1, 0, 0, 0, 1, 0],
            [1, 1, 1, 0, 0, 1],
        ];
        let inv_expect = [
            [1, 0, 0, 0, 0, 0],
            [-1, 1, 0, 0, 0, 0],
            [-1, 0, 1, 0, 0, 0],
            [0, -1, 0, 1, 0, 0],
            [-1, 0, 0, 0, 1, 0],
            [1, -1, -1, 0, 0, 1],
        ];
        let inv = m.inverse().unwrap();
        for n in 1..=6u64 {
            for k in 1..=n {
                assert_eq!(m.get(n, k), rat_int(expect[(n - 1) as usize][(k - 1) as usize]));
                assert_eq!(
                    inv.get(n, k),
                    rat_int(inv_expect[(n - 1) as usize][(k - 1) as usize])
                );
            }
        }
    }

    #[test]
    fn serialization_roundtrip_shapes() {
        let m = deriv_inverse_t1(4);
        let v = m.to_json();
        assert_eq!(v["start"], 1);
        assert_eq!(v["dim"], 4);
        assert_eq!(v["rows"][1][0], "-1/2");
        let csv = m.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("1,0,0,0"));
    }
}
