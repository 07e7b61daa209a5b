//! Scalar number-theoretic functions consumed by the factorization theorems.
//!
//! Everything here is exact: integers are `BigInt`, ratios are `BigRational`.
//! The one real-valued function, von Mangoldt's Lambda, is returned as a
//! rational approximation correct to a requested number of bits (computed by
//! a fixed-point atanh series, never by floating point).

use std::sync::Mutex;

use num::{One, Signed, Zero};

use crate::{Int, Rat};

/// Memoized partition counts p(0..=N) and the interleaved generalized
/// pentagonal numbers G_0..G_J feeding the Euler recurrence.
///
/// Entries are append-only: once an index is filled it never changes.
pub struct PartitionCache {
    p_table: Vec<Int>,
    pent_table: Vec<i64>,
}

impl PartitionCache {
    pub fn new() -> Self {
        PartitionCache {
            p_table: vec![Int::one()],
            pent_table: vec![0],
        }
    }

    /// p(m); zero for negative m by convention.
    pub fn p(&mut self, m: i64) -> Int {
        if m < 0 {
            return Int::zero();
        }
        self.ensure(m as usize);
        self.p_table[m as usize].clone()
    }

    fn ensure(&mut self, n: usize) {
        while self.p_table.len() <= n {
            let i = self.p_table.len() as i64;
            let mut acc = Int::zero();
            let mut j = 1i64;
            loop {
                // G(2j-1) = j(3j-1)/2, G(2j) = j(3j+1)/2 with sign (-1)^{j+1}
                let g1 = j * (3 * j - 1) / 2;
                if g1 > i {
                    break;
                }
                let g2 = j * (3 * j + 1) / 2;
                let term = {
                    let mut t = self.p_table[(i - g1) as usize].clone();
                    if g2 <= i {
                        t += &self.p_table[(i - g2) as usize];
                    }
                    t
                };
                if j % 2 == 1 {
                    acc += term;
                } else {
                    acc -= term;
                }
                j += 1;
            }
            self.p_table.push(acc);
        }
        while *self.pent_table.last().unwrap() < n as i64 {
            let j = self.pent_table.len() as i64;
            self.pent_table.push(pentagonal_g(j as u64) as i64);
        }
    }

    pub fn p_table(&self) -> &[Int] {
        &self.p_table
    }

    pub fn pent_table(&self) -> &[i64] {
        &self.pent_table
    }
}

impl Default for PartitionCache {
    fn default() -> Self {
        Self::new()
    }
}

static PARTITIONS: Mutex<Option<PartitionCache>> = Mutex::new(None);

fn with_partitions<T>(f: impl FnOnce(&mut PartitionCache) -> T) -> T {
    let mut guard = PARTITIONS.lock().unwrap();
    f(guard.get_or_insert_with(PartitionCache::new))
}

/// Number of integer partitions of n; 0 for n < 0.
pub fn partition_p(n: i64) -> Int {
    with_partitions(|c| c.p(n))
}

/// Copy of the memoized p-table (p(0)..p(max) filled so far).
pub fn partition_table_snapshot() -> Vec<Int> {
    with_partitions(|c| c.p_table.clone())
}

/// Seed the global partition cache from a previously persisted table.
/// Entries that disagree with a freshly computed prefix are rejected.
pub fn seed_partition_table(table: Vec<Int>) -> bool {
    if table.is_empty() || table[0] != Int::one() {
        return false;
    }
    with_partitions(|c| {
        let overlap = c.p_table.len().min(table.len());
        if c.p_table[..overlap] != table[..overlap] {
            return false;
        }
        if table.len() > c.p_table.len() {
            c.p_table = table;
        }
        true
    })
}

/// Generalized pentagonal number G_j = ceil(j/2) * ceil((3j+1)/2) / 2.
pub fn pentagonal_g(j: u64) -> u64 {
    let a = j.div_ceil(2);
    let b = (3 * j + 1).div_ceil(2);
    a * b / 2
}

/// Sign of q^{G_j} in (q;q)_inf = sum_j (-1)^{ceil(j/2)} q^{G_j}.
pub fn pentagonal_sign(j: u64) -> i64 {
    if j.div_ceil(2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exact integer square root (floor). Never touches floating point.
pub fn isqrt(n: i64) -> i64 {
    assert!(n >= 0, "isqrt of negative number");
    if n < 2 {
        return n;
    }
    let mut x = n;
    let mut y = (x + 1) / 2;
    while y < x {
        x = y;
        y = (x + n / x) / 2;
    }
    x
}

/// floor((sqrt(radicand) - b)/6) for the pentagonal correction sums.
/// A negative radicand means the sum is empty (returns 0); a negative
/// quotient is clamped to 0 since loops run j = 1..=bound.
pub fn pentagonal_bound(radicand: i64, b: i64) -> i64 {
    if radicand < 0 {
        return 0;
    }
    let v = isqrt(radicand) - b;
    if v < 0 {
        0
    } else {
        v / 6
    }
}

/// All divisors of n in increasing order. n = 0 is a domain error.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors of 0 are undefined");
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// T_Div(n, k) = 1 iff k | n.
pub fn t_div(n: u64, k: u64) -> i64 {
    assert!(n >= 1 && k >= 1);
    if n % k == 0 {
        1
    } else {
        0
    }
}

/// Prime factorization by trial division, (prime, exponent) pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Moebius mu(n) in {-1, 0, 1}.
pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        return 0;
    }
    if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of distinct prime divisors omega(n).
pub fn omega_distinct(n: u64) -> u32 {
    factorize(n).len() as u32
}

/// Generalized sum of divisors sigma_alpha(n) = sum_{d|n} d^alpha as an
/// exact rational (alpha may be negative).
pub fn sigma(n: u64, alpha: i64) -> Rat {
    divisors(n)
        .into_iter()
        .map(|d| rat_pow(d, alpha))
        .sum()
}

fn rat_pow(base: u64, exp: i64) -> Rat {
    let b = Int::from(base);
    if exp >= 0 {
        Rat::from_integer(b.pow(exp as u32))
    } else {
        Rat::new(Int::one(), b.pow((-exp) as u32))
    }
}

/// Jordan totient J_t(n) = sum_{d|n} d^t mu(n/d); J_1 = Euler phi.
pub fn totients(n: u64, t: u32) -> Int {
    assert!(t >= 1);
    let mut acc = Int::zero();
    for d in divisors(n) {
        let m = mobius(n / d);
        if m != 0 {
            acc += Int::from(d).pow(t) * Int::from(m);
        }
    }
    acc
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> Int {
    totients(n, 1)
}

/// Unsigned Stirling numbers of the first kind c(n, m):
/// c(0,0) = 1, c(n+1,m) = n*c(n,m) + c(n,m-1).
pub fn stirling1_unsigned(n: u64, m: u64) -> Int {
    if m > n {
        return Int::zero();
    }
    let mut row = vec![Int::one()];
    for i in 0..n {
        let mut next = vec![Int::zero(); row.len() + 1];
        for (j, v) in row.iter().enumerate() {
            next[j] += v * Int::from(i);
            next[j + 1] += v;
        }
        row = next;
    }
    row[m as usize].clone()
}

/// Stirling numbers of the second kind S(m, k):
/// S(0,0) = 1, S(m+1,k) = k*S(m,k) + S(m,k-1).
pub fn stirling2(m: u64, k: u64) -> Int {
    if k > m {
        return Int::zero();
    }
    let mut row = vec![Int::one()];
    for _ in 0..m {
        let mut next = vec![Int::zero(); row.len() + 1];
        for (j, v) in row.iter().enumerate() {
            next[j] += v * Int::from(j);
            next[j + 1] += v;
        }
        row = next;
    }
    row[k as usize].clone()
}

/// Binomial coefficient extended to any integer upper argument by the
/// falling factorial a(a-1)...(a-b+1)/b!; zero for b < 0.
pub fn binomial(a: i64, b: i64) -> Int {
    if b < 0 {
        return Int::zero();
    }
    let mut acc = Int::one();
    for i in 0..b {
        acc *= Int::from(a - i);
        // each prefix product of i+1 consecutive integers is divisible
        // by (i+1)!, so the division is exact step by step
        acc /= Int::from(i + 1);
    }
    acc
}

/// Falling factorial n(n-1)...(n-t+1) = n!/(n-t)!; zero when 0 <= n < t.
pub fn falling(n: i64, t: u32) -> Int {
    let mut acc = Int::one();
    for i in 0..t as i64 {
        acc *= Int::from(n - i);
    }
    acc
}

/// von Mangoldt Lambda(n): log p when n = p^k, else 0. Returned as a
/// rational approximation with `bits` fractional bits of accuracy.
pub fn von_mangoldt(n: u64, bits: u32) -> Rat {
    assert!(n >= 1);
    let f = factorize(n);
    if f.len() == 1 {
        ln_rational(f[0].0, bits)
    } else {
        Rat::zero()
    }
}

/// Natural log of a positive integer to `bits` fractional bits, as a
/// rational. Uses ln(x) = ln(x / 2^e) + e ln 2 with x/2^e in [1, 2) and
/// the atanh series 2 * sum y^{2k+1}/(2k+1), y = (r-1)/(r+1) < 1/3, in
/// fixed-point big-integer arithmetic.
pub fn ln_rational(x: u64, bits: u32) -> Rat {
    assert!(x >= 1);
    if x == 1 {
        return Rat::zero();
    }
    let scale_bits = bits + 32;
    let e = 63 - x.leading_zeros() as u64; // floor(log2 x)
    let pow2 = Int::one() << e;
    let num = Int::from(x) - &pow2;
    let den = Int::from(x) + &pow2;
    let atanh = atanh_fixed(&num, &den, scale_bits);
    let ln2 = atanh_fixed(&Int::one(), &Int::from(3), scale_bits);
    let total = (atanh + ln2 * Int::from(e)) * Int::from(2);
    Rat::new(total, Int::one() << scale_bits)
}

/// Fixed-point atanh(num/den) * 2^scale_bits, 0 <= num/den < 1.
fn atanh_fixed(num: &Int, den: &Int, scale_bits: u32) -> Int {
    if num.is_zero() {
        return Int::zero();
    }
    let num2 = num * num;
    let den2 = den * den;
    let mut power = (Int::one() << scale_bits) * num / den;
    let mut acc = Int::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        acc += &power / Int::from(2 * k + 1);
        power = power * &num2 / &den2;
        k += 1;
    }
    acc
}

/// Bit size of a rational: max bit length of numerator and denominator.
/// Used for entry-size diagnostics on the factorization matrices.
pub fn rat_bits(r: &Rat) -> u64 {
    r.numer().abs().bits().max(r.denom().bits())
}
