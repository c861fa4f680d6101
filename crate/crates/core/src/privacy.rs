//! Privacy metrics in bits: subspace counts, the conditional-entropy metric
//! and closed-form bounds on the maximal information leakage.

use std::collections::HashSet;
use std::f64::consts::LN_2;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Widest ambient space the brute-force subspace count accepts.
pub const BRUTE_FORCE_MAX_M: usize = 5;

/// `log2(2^a - 2^b)` for `a > b`, without forming either power.
pub fn log2_pow2_diff(a: f64, b: f64) -> f64 {
    debug_assert!(a > b);
    a + (-(b - a).exp2()).ln_1p() / LN_2
}

/// `log2(2^x + 2^y)`.
fn log2_add(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / LN_2
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().expect("fits").to_f64().expect("finite").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits") as f64;
    top.log2() + shift as f64
}

fn check_dims(m: usize, t: usize, k: usize) -> Result<()> {
    if k > t || t > m {
        return Err(Error::invalid(format!("need k <= T <= m, got k={k}, T={t}, m={m}")));
    }
    Ok(())
}

/// `log2` of the number of `T`-dimensional subspaces of `F_2^m` that contain
/// a fixed `k`-dimensional one.
pub fn count_superspaces_log2(m: usize, t: usize, k: usize) -> Result<f64> {
    check_dims(m, t, k)?;
    Ok((k..t)
        .map(|e| log2_pow2_diff(m as f64, e as f64) - log2_pow2_diff(t as f64, e as f64))
        .sum())
}

/// The same count as an exact integer.
pub fn count_superspaces_exact(m: usize, t: usize, k: usize) -> Result<BigUint> {
    check_dims(m, t, k)?;
    let pow = |e: usize| BigUint::one() << e;
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for e in k..t {
        num *= pow(m) - pow(e);
        den *= pow(t) - pow(e);
    }
    Ok(num / den)
}

/// Counts `T`-dimensional subspaces of `F_2^m` containing
/// `span(e_1, ..., e_k)` by extending bases one vector at a time and
/// collecting the distinct spans. Only for `m <= 5`.
pub fn brute_force_superspace_count(m: usize, t: usize, k: usize) -> Result<u64> {
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::Refused(format!(
            "brute-force count supports m <= {BRUTE_FORCE_MAX_M}, got {m}"
        )));
    }
    check_dims(m, t, k)?;
    // A subspace is the bitmask of the points it contains.
    fn extend(space: u32, x: usize) -> u32 {
        let mut out = space;
        let mut rest = space;
        while rest != 0 {
            let y = rest.trailing_zeros() as usize;
            out |= 1 << (y ^ x);
            rest &= rest - 1;
        }
        out
    }
    let points = 1usize << m;
    let mut base = 1u32;
    for i in 0..k {
        base = extend(base, 1 << i);
    }
    let mut level: HashSet<u32> = HashSet::from([base]);
    for _ in k..t {
        let mut next = HashSet::new();
        for &space in &level {
            for x in (1..points).filter(|&x| (space >> x) & 1 == 0) {
                next.insert(extend(space, x));
            }
        }
        level = next;
    }
    Ok(level.len() as u64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyMetric {
    /// Conditional entropy under a uniform prior over feasible codes.
    pub exact: f64,
    /// `m (t - k)`.
    pub approx: f64,
}

/// Uncertainty, in bits, about the `t`-dimensional code space left to a
/// client that sees `k` of its dimensions.
pub fn entropy_metric(m: usize, t: usize, k: usize) -> Result<EntropyMetric> {
    Ok(EntropyMetric {
        exact: count_superspaces_log2(m, t, k)?,
        approx: (m * (t - k)) as f64,
    })
}

/// `log2(2^s * sum_{r=1..k} prod_{j=0..r-2} (2^m - 2^{j+1}))`: leakage bound
/// for a `k`-limited-access client holding `s` messages.
pub fn mil_upper_exact(m: usize, k: usize, s: usize) -> Result<f64> {
    if k == 0 || m < 2 {
        return Err(Error::invalid(format!("need k >= 1 and m >= 2, got k={k}, m={m}")));
    }
    let mut total = f64::NEG_INFINITY;
    let mut term = 0.0;
    // Terms with r > m contain the factor 2^m - 2^m and vanish.
    for r in 1..=k.min(m) {
        if r >= 2 {
            term += log2_pow2_diff(m as f64, (r - 1) as f64);
        }
        total = log2_add(total, term);
    }
    Ok(s as f64 + total)
}

/// `s + log2 k + (k-1) log2(2^m - 2)`, the relaxation of [`mil_upper_exact`].
pub fn mil_upper_asymptotic(m: usize, k: usize, s: usize) -> Result<f64> {
    if k == 0 || m < 2 {
        return Err(Error::invalid(format!("need k >= 1 and m >= 2, got k={k}, m={m}")));
    }
    Ok(s as f64 + (k as f64).log2() + (k - 1) as f64 * log2_pow2_diff(m as f64, 1.0))
}

/// `sum_{j=1..T-1} [log2(2^m - 2^j) - log2(2^T - 2^j)]`: leakage lower bound
/// when the client sees the whole rank-`T` code.
pub fn mil_conventional_lower(m: usize, t: usize) -> Result<f64> {
    if t == 0 || m < t {
        return Err(Error::invalid(format!("need 1 <= T <= m, got T={t}, m={m}")));
    }
    Ok((1..t)
        .map(|j| log2_pow2_diff(m as f64, j as f64) - log2_pow2_diff(t as f64, j as f64))
        .sum())
}

/// Every metric for one `(m, T, k, s)` query.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrivacyReport {
    pub m: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub k: usize,
    pub side_info_size: usize,
    pub entropy_exact: f64,
    pub entropy_approx: f64,
    pub mil_upper_exact: f64,
    pub mil_upper_asymptotic: f64,
    pub mil_conventional_lower: f64,
}

pub fn privacy_report(m: usize, t: usize, k: usize, s: usize) -> Result<PrivacyReport> {
    let entropy = entropy_metric(m, t, k)?;
    Ok(PrivacyReport {
        m,
        t,
        k,
        side_info_size: s,
        entropy_exact: entropy.exact,
        entropy_approx: entropy.approx,
        mil_upper_exact: mil_upper_exact(m, k, s)?,
        mil_upper_asymptotic: mil_upper_asymptotic(m, k, s)?,
        mil_conventional_lower: mil_conventional_lower(m, t)?,
    })
}
