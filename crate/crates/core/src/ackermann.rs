//! Ackermann's function in the variant `a(1,j) = 2^j`, `a(i,1) = 2`,
//! `a(i,j) = w * a(i-1, w)` with `w = a(i, j-1)`, and its inverses.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{invalid, Result};

/// A value of `a(i,j)` evaluated against a saturation threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AckValue {
    Exact(u64),
    /// The true value is at least this threshold.
    AtLeast(u64),
}

impl AckValue {
    pub fn exact(self) -> Option<u64> {
        match self {
            AckValue::Exact(v) => Some(v),
            AckValue::AtLeast(_) => None,
        }
    }

    pub fn is_saturated(self) -> bool {
        matches!(self, AckValue::AtLeast(_))
    }
}

impl std::fmt::Display for AckValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AckValue::Exact(v) => write!(f, "{v}"),
            AckValue::AtLeast(t) => write!(f, ">={t}"),
        }
    }
}

/// `a(i,j)` if it is below `t`, `None` otherwise.
fn below(i: u32, j: u64, t: u64) -> Option<u64> {
    if i == 1 {
        return (j < 64 && (1u64 << j) < t).then(|| 1u64 << j);
    }
    if 2 >= t {
        return None;
    }
    // w runs through a(i,1), a(i,2), ...; each step at least doubles it
    let mut w = 2u64;
    for _ in 1..j {
        if w >= 64 {
            return None;
        }
        let inner = below(i - 1, w, t.div_ceil(w))?;
        w *= inner;
    }
    Some(w)
}

/// `a(i,j)` with saturation at `threshold`.
pub fn ackermann(i: u32, j: u64, threshold: u64) -> Result<AckValue> {
    if i < 1 || j < 1 {
        return invalid("ackermann needs i >= 1 and j >= 1");
    }
    Ok(match below(i, j, threshold) {
        Some(v) => AckValue::Exact(v),
        None => AckValue::AtLeast(threshold),
    })
}

/// `alpha(n,m) = min { i : a(i,j) >= m }` with `j = max(ceil(n/m), 3)`.
pub fn alpha2(n: u64, m: u64) -> Result<u32> {
    if n < 1 || m < 1 {
        return invalid("alpha needs n >= 1 and m >= 1");
    }
    let j = n.div_ceil(m).max(3);
    let mut i = 1;
    while below(i, j, m).is_some() {
        i += 1;
    }
    Ok(i)
}

pub fn alpha(n: u64) -> Result<u32> {
    alpha2(n, n)
}

/// Smallest `j` with `m <= a(i,j)^c`.
pub fn min_j(i: u32, c: u32, m: u64) -> u64 {
    let mut j = 1;
    loop {
        match below(i, j, u64::MAX) {
            Some(v) if pow_below(v, c, m) => j += 1,
            _ => return j,
        }
    }
}

/// Whether `v^c < m`.
pub(crate) fn pow_below(v: u64, c: u32, m: u64) -> bool {
    let mut acc: u64 = 1;
    for _ in 0..c {
        match acc.checked_mul(v) {
            Some(x) if x < m => acc = x,
            _ => return false,
        }
    }
    acc < m
}

/// `a(i,j)` computed exactly with big integers, or `None` when the value
/// would need more than `max_bits` bits.
pub fn ackermann_exact(i: u32, j: u64, max_bits: u64) -> Option<BigUint> {
    if i == 1 {
        return (j <= max_bits).then(|| BigUint::one() << j);
    }
    let mut w = BigUint::from(2u32);
    for _ in 1..j {
        // a(i-1, w) >= 2^w
        let wv = w.to_u64().filter(|&x| x <= max_bits)?;
        let inner = ackermann_exact(i - 1, wv, max_bits)?;
        w *= inner;
        if w.bits() > max_bits {
            return None;
        }
    }
    Some(w)
}

/// Inverse Ackermann through the exact route. Entries too large to
/// materialize are at least `2^max_bits`.
pub fn alpha2_exact(n: u64, m: u64) -> u32 {
    const MAX_BITS: u64 = 4096;
    let j = n.div_ceil(m).max(3);
    let m_big = BigUint::from(m);
    let mut i = 1;
    loop {
        match ackermann_exact(i, j, MAX_BITS) {
            Some(v) if v < m_big => i += 1,
            _ => return i,
        }
    }
}

/// Rows `(i, j, a(i,j))` for `i <= imax`, `j <= jmax`.
pub fn table(imax: u32, jmax: u64, threshold: u64) -> Result<Vec<(u32, u64, AckValue)>> {
    let mut rows = Vec::new();
    for i in 1..=imax {
        for j in 1..=jmax {
            rows.push((i, j, ackermann(i, j, threshold)?));
        }
    }
    Ok(rows)
}
