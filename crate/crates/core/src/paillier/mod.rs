//! Threshold Paillier with signed plaintexts and J-of-J distributed decryption.
//!
//! Ciphertexts live in `Z_{n^2}^*` with generator `g = n + 1`, so `g^m = 1 + m·n (mod n^2)`.
//! Plaintexts are signed: residues above `(n-1)/2` decode to `m - n`.
//!
//! Decryption keys are shares `sk_i = f(i) mod n·m'` of a dealer polynomial with
//! `f(0) = d`, `d ≡ 0 (mod m')`, `d ≡ 1 (mod n)`, where `m' = p'q'`. A partial decryption
//! is `c^(2·Δ·sk_i)` with `Δ = J!`; combining all `J` of them with integer Lagrange
//! coefficients yields `c^(4Δ²d) = 1 + 4Δ²·m·n`, from which `m` is read off.

mod keygen;
pub mod primes;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;

use crate::arith::{self, pow_signed, random_unit, reduce_signed, to_bigint};
use crate::error::{Error, Party, Result};
use crate::zkp::pd::{self, PdProof};

pub use keygen::{keygen, keygen_from_primes, SUPPORTED_BITS};

/// Public key material shared by every participant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub n: BigUint,
    pub n_sq: BigUint,
    pub g: BigUint,
    /// Bit length of `n`.
    pub bits: u64,
    /// Number of decryption workers `J`; all of them are needed to decrypt.
    pub workers: usize,
    /// `J!`
    pub delta: BigUint,
    /// Base of the verification keys, a square in `Z_{n^2}^*`.
    pub v: BigUint,
    /// `v^(Δ·sk_j)` for worker `j = 1..=J` (stored at `j - 1`).
    pub verification_keys: Vec<BigUint>,
    half: BigUint,
}

/// A worker's share of the decryption exponent.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKeyShare {
    /// 1-based worker index.
    pub index: usize,
    pub share: BigUint,
}

impl std::fmt::Debug for SecretKeyShare {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKeyShare")
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext(pub(crate) BigUint);

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    /// Wraps a raw residue after checking it is a unit of `Z_{n^2}`.
    pub fn from_value(params: &PublicParams, value: BigUint) -> Result<Self> {
        if value.is_zero() || value >= params.n_sq {
            return Err(Error::Decode("ciphertext outside Z_{n^2}".into()));
        }
        if !value.gcd(&params.n).is_one() {
            return Err(Error::Decode("ciphertext shares a factor with n".into()));
        }
        Ok(Ciphertext(value))
    }
}

/// A signed integer in `[-(n-1)/2, (n-1)/2]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedPlaintext(pub BigInt);

impl SignedPlaintext {
    pub fn value(&self) -> &BigInt {
        &self.0
    }
}

impl From<i64> for SignedPlaintext {
    fn from(v: i64) -> Self {
        SignedPlaintext(BigInt::from(v))
    }
}

impl From<BigInt> for SignedPlaintext {
    fn from(v: BigInt) -> Self {
        SignedPlaintext(v)
    }
}

/// Even multiplier that embeds half-integer guesses into integer plaintexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ScaleFactor(u32);

impl ScaleFactor {
    pub fn new(eta: u32) -> Result<Self> {
        if eta < 2 || !eta.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "scale factor {eta} must be even and >= 2"
            )));
        }
        Ok(ScaleFactor(eta))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl Default for ScaleFactor {
    fn default() -> Self {
        ScaleFactor(2)
    }
}

/// `c^(2·Δ·sk_index)` published by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialDecryption {
    pub index: usize,
    pub share: BigUint,
}

/// Ciphertext together with the plaintext and randomness that open it.
///
/// Provers need both to build proofs about a ciphertext they produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub ciphertext: Ciphertext,
    pub value: BigInt,
    pub randomness: BigUint,
}

impl PublicParams {
    pub(crate) fn new(
        n: BigUint,
        workers: usize,
        v: BigUint,
        verification_keys: Vec<BigUint>,
    ) -> Self {
        let n_sq = &n * &n;
        let half = (&n - 1u32) >> 1u32;
        PublicParams {
            g: &n + 1u32,
            bits: n.bits(),
            delta: arith::factorial(workers),
            n,
            n_sq,
            workers,
            v,
            verification_keys,
            half,
        }
    }

    /// `(n-1)/2`, the largest encodable magnitude.
    pub fn half_range(&self) -> &BigUint {
        &self.half
    }

    /// Bytes occupied by an element of `Z_n`.
    pub fn base_width(&self) -> usize {
        self.bits.div_ceil(8) as usize
    }

    /// Bytes occupied by an element of `Z_{n^2}`.
    pub fn squared_width(&self) -> usize {
        2 * self.base_width()
    }

    pub fn verification_key(&self, index: usize) -> Option<&BigUint> {
        index
            .checked_sub(1)
            .and_then(|i| self.verification_keys.get(i))
    }

    pub fn in_signed_range(&self, m: &BigInt) -> bool {
        m.magnitude() <= &self.half
    }

    /// Maps a signed plaintext into `[0, n)`.
    pub fn encode_signed(&self, m: &BigInt) -> Result<BigUint> {
        if !self.in_signed_range(m) {
            return Err(Error::PlaintextRange(m.to_string()));
        }
        Ok(reduce_signed(m, &self.n))
    }

    /// Inverse of [`encode_signed`](Self::encode_signed) on `[0, n)`.
    pub fn decode_signed(&self, m: &BigUint) -> BigInt {
        let m = m % &self.n;
        if m > self.half {
            to_bigint(&m) - to_bigint(&self.n)
        } else {
            to_bigint(&m)
        }
    }

    /// `g^e mod n^2` for any integer `e`, using `g^e = 1 + e·n`.
    pub fn g_pow(&self, e: &BigInt) -> BigUint {
        let e = reduce_signed(e, &self.n);
        (BigUint::one() + e * &self.n) % &self.n_sq
    }

    pub fn random_unit<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        random_unit(rng, &self.n)
    }

    /// `g^m · r^n mod n^2` with caller-chosen randomness.
    pub fn encrypt_with(&self, m: &BigInt, r: &BigUint) -> Result<Ciphertext> {
        if !self.in_signed_range(m) {
            return Err(Error::PlaintextRange(m.to_string()));
        }
        Ok(Ciphertext(self.encrypt_raw(m, r)))
    }

    /// Encryption without the range check, reducing `m` modulo `n`.
    pub(crate) fn encrypt_raw(&self, m: &BigInt, r: &BigUint) -> BigUint {
        (self.g_pow(m) * r.modpow(&self.n, &self.n_sq)) % &self.n_sq
    }

    pub fn encrypt<R: RngCore + ?Sized>(&self, m: &BigInt, rng: &mut R) -> Result<Ciphertext> {
        Ok(self.encrypt_opening(m, rng)?.ciphertext)
    }

    pub fn encrypt_opening<R: RngCore + ?Sized>(&self, m: &BigInt, rng: &mut R) -> Result<Opening> {
        let r = self.random_unit(rng);
        let ciphertext = self.encrypt_with(m, &r)?;
        Ok(Opening {
            ciphertext,
            value: m.clone(),
            randomness: r,
        })
    }

    /// Deterministic encryption with randomness 1, recomputable by anyone.
    pub fn encrypt_public(&self, m: &BigInt) -> Result<Ciphertext> {
        if !self.in_signed_range(m) {
            return Err(Error::PlaintextRange(m.to_string()));
        }
        Ok(Ciphertext(self.g_pow(m)))
    }

    pub fn check_ciphertext(&self, c: &Ciphertext) -> Result<()> {
        Ciphertext::from_value(self, c.0.clone()).map(|_| ())
    }

    /// Homomorphic addition: `E(a) · E(b)`.
    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Ciphertext {
        Ciphertext((&a.0 * &b.0) % &self.n_sq)
    }

    /// Homomorphic subtraction: `E(a) · E(b)^-1`.
    pub fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        let inv = arith::mod_inv(&b.0, &self.n_sq)
            .ok_or_else(|| Error::InvalidParameter("ciphertext is not invertible".into()))?;
        Ok(Ciphertext((&a.0 * inv) % &self.n_sq))
    }

    /// Homomorphic multiplication by a public integer: `E(a)^k`.
    pub fn scalar_mul(&self, c: &Ciphertext, k: &BigInt) -> Result<Ciphertext> {
        pow_signed(&c.0, k, &self.n_sq)
            .map(Ciphertext)
            .ok_or_else(|| Error::InvalidParameter("ciphertext is not invertible".into()))
    }

    /// Sum of a non-empty list of ciphertexts.
    pub fn sum<'a, I>(&self, items: I) -> Option<Ciphertext>
    where
        I: IntoIterator<Item = &'a Ciphertext>,
    {
        let mut iter = items.into_iter();
        let first = iter.next()?.clone();
        Some(iter.fold(first, |acc, c| self.add(&acc, c)))
    }

    /// `c^(2·Δ·sk)` together with its proof of correctness.
    pub fn partial_decrypt<R: RngCore + ?Sized>(
        &self,
        key: &SecretKeyShare,
        c: &Ciphertext,
        rng: &mut R,
    ) -> (PartialDecryption, PdProof) {
        let part = self.partial_share(key, c);
        let proof = pd::prove_pd(self, key, c, &part, rng);
        (part, proof)
    }

    pub(crate) fn partial_share(&self, key: &SecretKeyShare, c: &Ciphertext) -> PartialDecryption {
        let exponent = BigUint::from(2u32) * &self.delta * &key.share;
        PartialDecryption {
            index: key.index,
            share: c.0.modpow(&exponent, &self.n_sq),
        }
    }

    /// Verifies every part's proof and combines all `J` of them.
    ///
    /// Fails with an abort naming the first worker whose proof does not verify.
    pub fn combine(
        &self,
        c: &Ciphertext,
        parts: &[(PartialDecryption, PdProof)],
    ) -> Result<SignedPlaintext> {
        let mut seen = vec![false; self.workers];
        for (part, _) in parts {
            let slot = part
                .index
                .checked_sub(1)
                .and_then(|i| seen.get_mut(i))
                .ok_or_else(|| Error::InvalidParameter(format!("no worker {}", part.index)))?;
            if *slot {
                return Err(Error::InvalidParameter(format!(
                    "duplicate share from worker {}",
                    part.index
                )));
            }
            *slot = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!(
                "missing share from worker {}",
                missing + 1
            )));
        }
        for (part, proof) in parts {
            if !pd::verify_pd(self, c, part, proof) {
                return Err(Error::abort(
                    Party::Worker(part.index),
                    "partial decryption proof rejected",
                ));
            }
        }
        let shares: Vec<&PartialDecryption> = parts.iter().map(|(p, _)| p).collect();
        Ok(SignedPlaintext(
            self.decode_signed(&self.combine_subset(&shares)?),
        ))
    }

    /// Lagrange combination over an arbitrary subset of shares, without proof checks.
    ///
    /// Returns the residue in `[0, n)`. Only the full set of `J` shares recovers the
    /// plaintext; smaller subsets yield an unrelated value.
    pub fn combine_subset(&self, parts: &[&PartialDecryption]) -> Result<BigUint> {
        let indices: Vec<i64> = parts.iter().map(|p| p.index as i64).collect();
        let delta = to_bigint(&self.delta);
        let mut acc = BigUint::one();
        for part in parts {
            let i = part.index as i64;
            let mut num = delta.clone();
            let mut den = BigInt::one();
            for &j in indices.iter().filter(|&&j| j != i) {
                num *= j;
                den *= j - i;
            }
            // Δ·Π j/(j-i) is an integer for indices in 1..=J.
            let lambda = num / den;
            let exponent = lambda * 2;
            let term = pow_signed(&part.share, &exponent, &self.n_sq)
                .ok_or_else(|| Error::InvalidParameter("share is not invertible".into()))?;
            acc = (acc * term) % &self.n_sq;
        }
        let l = (acc - 1u32) / &self.n;
        let four_delta_sq = BigUint::from(4u32) * &self.delta * &self.delta;
        let inv = arith::mod_inv(&(four_delta_sq % &self.n), &self.n)
            .ok_or_else(|| Error::Internal("4Δ² not invertible modulo n".into()))?;
        Ok((l * inv) % &self.n)
    }
}

/// Multiplies a half-integer by an even scale factor, returning an exact integer.
///
/// The half-integer is given as twice its value (`3.5` is `7`).
pub fn scale_encode(twice_value: i64, eta: ScaleFactor) -> Result<i64> {
    (twice_value)
        .checked_mul(eta.get() as i64 / 2)
        .ok_or_else(|| Error::PlaintextRange(format!("{twice_value}/2 · {}", eta.get())))
}

/// Signed plaintext decoding helper for small values.
pub fn signed_to_i64(m: &SignedPlaintext) -> Option<i64> {
    use num_traits::ToPrimitive;
    m.0.to_i64()
}

pub(crate) fn is_unit(params: &PublicParams, x: &BigUint) -> bool {
    !x.is_zero() && x < &params.n_sq && x.gcd(&params.n).is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (PublicParams, Vec<SecretKeyShare>, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let (pp, keys) = keygen(512, 3, &mut rng).unwrap();
        (pp, keys, rng)
    }

    fn decrypt(
        pp: &PublicParams,
        keys: &[SecretKeyShare],
        c: &Ciphertext,
        rng: &mut ChaCha20Rng,
    ) -> BigInt {
        let parts: Vec<_> = keys.iter().map(|k| pp.partial_decrypt(k, c, rng)).collect();
        pp.combine(c, &parts).unwrap().0
    }

    #[test]
    fn round_trip_and_homomorphism() {
        let (pp, keys, mut rng) = setup();
        assert_eq!(pp.g, &pp.n + 1u32);
        assert_eq!(pp.n.bits(), 512);
        let c = pp.encrypt(&42.into(), &mut rng).unwrap();
        assert_eq!(decrypt(&pp, &keys, &c, &mut rng), 42.into());
        let a = pp.encrypt(&2.into(), &mut rng).unwrap();
        let b = pp.encrypt(&9.into(), &mut rng).unwrap();
        assert_eq!(
            decrypt(&pp, &keys, &pp.sub(&a, &b).unwrap(), &mut rng),
            (-7).into()
        );
        let five = pp.encrypt(&5.into(), &mut rng).unwrap();
        let fifteen = pp.scalar_mul(&five, &3.into()).unwrap();
        assert_eq!(decrypt(&pp, &keys, &fifteen, &mut rng), 15.into());
        let edge = -to_bigint(pp.half_range());
        let c = pp.encrypt(&edge, &mut rng).unwrap();
        assert_eq!(decrypt(&pp, &keys, &c, &mut rng), edge);
    }

    #[test]
    fn subset_does_not_decrypt() {
        let (pp, keys, mut rng) = setup();
        let c = pp.encrypt(&42.into(), &mut rng).unwrap();
        let parts: Vec<_> = keys[..2].iter().map(|k| pp.partial_share(k, &c)).collect();
        let refs: Vec<_> = parts.iter().collect();
        assert_ne!(pp.combine_subset(&refs).unwrap(), BigUint::from(42u32));
    }

    #[test]
    fn forged_share_is_attributed() {
        let (pp, keys, mut rng) = setup();
        let c = pp.encrypt(&7.into(), &mut rng).unwrap();
        let mut parts: Vec<_> = keys
            .iter()
            .map(|k| pp.partial_decrypt(k, &c, &mut rng))
            .collect();
        parts[1].0.share = (&parts[1].0.share * &parts[1].0.share) % &pp.n_sq;
        let err = pp.combine(&c, &parts).unwrap_err();
        assert_eq!(err.as_abort().unwrap().culprit, Party::Worker(2));
    }

    #[test]
    fn scale_encoding() {
        let two = ScaleFactor::new(2).unwrap();
        assert_eq!(scale_encode(7, two).unwrap(), 7);
        assert_eq!(scale_encode(7, ScaleFactor::new(10).unwrap()).unwrap(), 35);
        assert_eq!(scale_encode(-1, two).unwrap(), -1);
        assert!(ScaleFactor::new(3).is_err());
    }
}
