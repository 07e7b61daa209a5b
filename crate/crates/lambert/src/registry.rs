//! Named arithmetic-function registry: the only way the CLI passes
//! input functions. Keeps the surface total and testable (no
//! expression parser).

use num::One;

use crate::arith::{euler_phi, mobius, sigma};
use crate::error::Error;
use crate::qseries::ArithmeticTable;
use crate::{rat_int, Int, Rat};

/// Names understood: `one`, `id`, `mu`, `phi`, `sigma1`, `delta1`, and
/// `npow:k` for n^k with a non-negative integer k.
pub fn lookup(name: &str, order: u64) -> Result<ArithmeticTable, Error> {
    assert!(order >= 1);
    let table = match name {
        "one" => ArithmeticTable::from_fn(order, |_| Rat::one()),
        "id" => ArithmeticTable::from_fn(order, |n| rat_int(n as i64)),
        "mu" => ArithmeticTable::from_fn(order, |n| rat_int(mobius(n))),
        "phi" => ArithmeticTable::from_fn(order, |n| Rat::from_integer(euler_phi(n))),
        "sigma1" => ArithmeticTable::from_fn(order, |n| sigma(n, 1)),
        "delta1" => ArithmeticTable::from_fn(order, |n| rat_int(i64::from(n == 1))),
        _ => {
            let Some(k) = name.strip_prefix("npow:") else {
                return Err(Error::UnknownFunction {
                    name: name.to_string(),
                });
            };
            let k: u32 = k.parse().map_err(|_| Error::UnknownFunction {
                name: name.to_string(),
            })?;
            ArithmeticTable::from_fn(order, |n| Rat::from_integer(Int::from(n).pow(k)))
        }
    };
    Ok(table)
}

/// All fixed registry names (without the parametric `npow:k`).
pub const FIXED_NAMES: &[&str] = &["one", "id", "mu", "phi", "sigma1", "delta1"];
