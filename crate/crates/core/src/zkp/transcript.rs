//! Fiat-Shamir transcripts over SHA-256.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::arith::to_fixed_be;

/// Running hash of a domain tag and length-prefixed absorbed messages.
#[derive(Clone)]
pub struct Transcript {
    hasher: Sha256,
}

impl std::fmt::Debug for Transcript {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transcript").finish_non_exhaustive()
    }
}

impl Transcript {
    pub fn new(tag: &str) -> Self {
        let mut t = Transcript {
            hasher: Sha256::new(),
        };
        t.absorb(tag.as_bytes());
        t
    }

    pub fn absorb(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_be_bytes());
        self.hasher.update(bytes);
    }

    /// Absorbs `x` as a fixed-width big-endian field; values wider than `width` are
    /// absorbed at their natural length instead.
    pub fn absorb_uint(&mut self, x: &BigUint, width: usize) {
        match to_fixed_be(x, width) {
            Ok(bytes) => self.absorb(&bytes),
            Err(_) => self.absorb(&x.to_bytes_be()),
        }
    }

    pub fn absorb_u64(&mut self, x: u64) {
        self.absorb(&x.to_be_bytes());
    }

    pub fn digest(&self) -> [u8; 32] {
        self.hasher.clone().finalize().into()
    }

    /// Integer in `[0, bound)` derived from the absorbed data.
    ///
    /// The digest is expanded in counter mode to `bits(bound) + 128` bits before the
    /// reduction, so the bias is below `2^-128`.
    pub fn challenge(&self, bound: &BigUint) -> BigUint {
        assert!(
            bound >= &BigUint::from(2u32),
            "challenge bound must be at least 2"
        );
        let seed = self.digest();
        let want = (bound.bits() + 128).div_ceil(8) as usize;
        let mut stream = Vec::with_capacity(want + 32);
        let mut counter = 0u32;
        while stream.len() < want {
            let mut h = Sha256::new();
            h.update(seed);
            h.update(counter.to_be_bytes());
            stream.extend_from_slice(&h.finalize());
            counter += 1;
        }
        stream.truncate(want);
        BigUint::from_bytes_be(&stream) % bound
    }
}

/// Challenge in `[0, bound)` for the given transcript.
pub fn fiat_shamir_challenge(transcript: &Transcript, bound: &BigUint) -> BigUint {
    transcript.challenge(bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let bound = BigUint::from(1000u32);
        let mut a = Transcript::new("MTP");
        a.absorb(b"x");
        let b = a.clone();
        assert_eq!(a.challenge(&bound), b.challenge(&bound));
        assert!(a.challenge(&bound) < bound);
    }

    #[test]
    fn length_prefix_separates_messages() {
        let mut a = Transcript::new("T");
        a.absorb(b"ab");
        a.absorb(b"c");
        let mut b = Transcript::new("T");
        b.absorb(b"a");
        b.absorb(b"bc");
        assert_ne!(a.digest(), b.digest());
    }
}
