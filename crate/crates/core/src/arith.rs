//! Big-integer helpers shared by the cryptosystem and the proofs.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::RngCore;

use crate::error::{Error, Result};

/// Uniform integer with exactly `bits` random bits (top bit not forced).
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, bits: u64) -> BigUint {
    if bits == 0 {
        return BigUint::zero();
    }
    let bytes = bits.div_ceil(8) as usize;
    let mut buf = vec![0u8; bytes];
    rng.fill_bytes(&mut buf);
    let excess = (bytes as u64) * 8 - bits;
    buf[0] &= 0xffu8 >> excess;
    BigUint::from_bytes_be(&buf)
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub fn random_below<R: RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero(), "empty sampling range");
    let bits = bound.bits();
    loop {
        let candidate = random_bits(rng, bits);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Uniform integer in `[low, high]`.
pub fn random_in_range<R: RngCore + ?Sized>(rng: &mut R, low: &BigUint, high: &BigUint) -> BigUint {
    low + random_below(rng, &(high - low + 1u32))
}

/// Uniform unit of `Z_n^*`.
pub fn random_unit<R: RngCore + ?Sized>(rng: &mut R, n: &BigUint) -> BigUint {
    loop {
        let r = random_below(rng, n);
        if !r.is_zero() && r.gcd(n).is_one() {
            return r;
        }
    }
}

pub fn mod_inv(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    a.modinv(m)
}

/// `x mod m` for a signed `x`, in `[0, m)`.
pub fn reduce_signed(x: &BigInt, m: &BigUint) -> BigUint {
    let m = BigInt::from_biguint(Sign::Plus, m.clone());
    x.mod_floor(&m)
        .to_biguint()
        .expect("mod_floor is non-negative")
}

/// `base^exp mod m` where a negative exponent inverts the base first.
pub fn pow_signed(base: &BigUint, exp: &BigInt, m: &BigUint) -> Option<BigUint> {
    if exp.is_negative() {
        let inv = mod_inv(base, m)?;
        Some(inv.modpow(exp.magnitude(), m))
    } else {
        Some(base.modpow(exp.magnitude(), m))
    }
}

pub fn to_bigint(x: &BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, x.clone())
}

/// Big-endian magnitude left-padded to `width` bytes.
pub fn to_fixed_be(x: &BigUint, width: usize) -> Result<Vec<u8>> {
    let raw = x.to_bytes_be();
    let raw: &[u8] = if x.is_zero() { &[] } else { &raw };
    if raw.len() > width {
        return Err(Error::Internal(format!(
            "value of {} bytes does not fit a {width}-byte field",
            raw.len()
        )));
    }
    let mut out = vec![0u8; width - raw.len()];
    out.extend_from_slice(raw);
    Ok(out)
}

pub fn from_be(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

/// Floor of the integer `k`-th root.
pub fn nth_root_floor(x: &BigUint, k: u32) -> BigUint {
    x.nth_root(k)
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}
