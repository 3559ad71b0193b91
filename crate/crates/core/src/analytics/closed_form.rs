//! Expected generation time of a path and expected swap position of a single
//! opportunistic request, for i.i.d. geometric link generation with infinite
//! lifetime.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::error::check_probability;
use crate::{Error, Result};

/// Relative agreement required between the two evaluations of the expected
/// generation time.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-9;

/// Expected time until all `links` links of a path are generated, i.e. the
/// mean of the maximum of `links` i.i.d. geometric(`p`) variables on {1, 2, ...}.
///
/// Evaluates the inclusion-exclusion sum
/// `sum_k C(M,k) (-1)^(k+1) / (1 - (1-p)^k)` in exact fixed-point arithmetic
/// and cross-checks it against the tail sum `sum_t 1 - (1 - q^t)^M`.
pub fn expected_generation_time(links: usize, p: f64) -> Result<f64> {
    check_links(links)?;
    check_probability(p)?;
    let exact = inclusion_exclusion(links, p);
    let series = tail_sum(links, p);
    if (exact - series).abs() > CROSS_CHECK_TOLERANCE * exact.abs() {
        return Err(Error::NumericalMismatch { exact, series });
    }
    Ok(exact)
}

/// The alternating inclusion-exclusion form, evaluated without cancellation.
///
/// `p` is a dyadic rational `b / 2^s`, hence so is `q = 1 - p = a / 2^s`
/// without rounding, and every term
/// `2^(sk) / (2^(sk) - a^k)` is computed as an integer scaled by `2^FRAC`
/// with one truncating division; the binomial weights are exact.
pub fn inclusion_exclusion(links: usize, p: f64) -> f64 {
    let q = 1.0 - p;
    if q == 0.0 {
        return 1.0;
    }
    let (b, s) = dyadic(p);
    let a = (BigUint::one() << s) - BigUint::from(b);
    // Cancellation grows like 2^links; keep a wide margin beyond f64 precision.
    let frac = links as u64 + 160;

    let mut sum = BigInt::zero();
    let mut binom = BigUint::one();
    let mut a_pow = BigUint::one();
    for k in 1..=links as u64 {
        binom = binom * BigUint::from(links as u64 - k + 1) / BigUint::from(k);
        a_pow *= &a;
        let denom_pow = BigUint::one() << (s * k);
        let term = (&denom_pow << frac) / (&denom_pow - &a_pow);
        let weighted = BigInt::from(&binom * term);
        if k % 2 == 1 {
            sum += weighted;
        } else {
            sum -= weighted;
        }
    }
    fixed_to_f64(&sum, frac)
}

/// `sum_{t>=0} 1 - (1 - q^t)^M`, truncated once a summand drops below 1e-12.
pub fn tail_sum(links: usize, p: f64) -> f64 {
    let q = 1.0 - p;
    let m = links as f64;
    let mut total = 0.0;
    let mut q_t: f64 = 1.0;
    loop {
        let term = -(m * (-q_t).ln_1p()).exp_m1();
        total += term;
        if term < 1e-12 {
            break;
        }
        q_t *= q;
    }
    total
}

/// Expected number of links the swap chain of a single opportunistic request
/// covers by the time the last link of its path is generated.
///
/// Inner series over `i` stop once the remaining tail, bounded by
/// `(M - k + 1) q^I`, is below `tol`.
pub fn expected_swap_position(links: usize, p: f64, tol: f64) -> Result<f64> {
    check_links(links)?;
    check_probability(p)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::NonPositive { name: "tol", value: tol });
    }
    if links == 1 {
        return Ok(1.0);
    }
    let q = 1.0 - p;
    let mut total = 0.0;
    for k in 1..=links {
        let rest = (links - k + 1) as f64;
        let before = (k - 1) as f64;
        let mut q_prev = q.powi(k as i32 - 1); // q^(i-1) at i = k
        loop {
            let q_i = q_prev * q;
            // P(first k-1 links done before slot i)
            let lead = pow_one_minus(q_prev, before);
            // P(max of the remaining links == i) = (1-q^i)^n - (1-q^(i-1))^n
            let upper = rest * (-q_i).ln_1p();
            let lower = rest * (-q_prev).ln_1p();
            let mass = if lower == f64::NEG_INFINITY { upper.exp() } else { lower.exp() * (upper - lower).exp_m1() };
            total += lead * mass;
            if rest * q_i < tol || q_i == 0.0 {
                break;
            }
            q_prev = q_i;
        }
    }
    Ok(total)
}

// (1 - x)^n with 0^0 = 1
fn pow_one_minus(x: f64, n: f64) -> f64 {
    if n == 0.0 {
        1.0
    } else {
        (n * (-x).ln_1p()).exp()
    }
}

fn check_links(links: usize) -> Result<()> {
    if links == 0 {
        return Err(Error::OutOfRange { name: "links", value: 0, min: 1, max: usize::MAX });
    }
    Ok(())
}

/// Decomposes `x` in (0, 1) as `a / 2^s` exactly.
fn dyadic(x: f64) -> (u64, u64) {
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i64;
    let fraction = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exp) =
        if exponent == 0 { (fraction, -1074) } else { (fraction | (1u64 << 52), exponent - 1075) };
    while mantissa % 2 == 0 && exp < 0 {
        mantissa /= 2;
        exp += 1;
    }
    debug_assert!(exp < 0, "x < 1 has a negative binary exponent");
    (mantissa, (-exp) as u64)
}

fn fixed_to_f64(value: &BigInt, frac: u64) -> f64 {
    // Keep 64 fractional bits, which is far below f64 resolution for values >= 1.
    let shifted: BigInt = value >> (frac - 64);
    shifted.to_f64().unwrap_or(f64::NAN) / 2f64.powi(64)
}
