//! Range proof for `x ∈ [0, B]` from a three-squares decomposition of `4x(B-x)+1`.
//!
//! Responses are integers masked by `m_i ∈ [1, B·C·L]` and rejection-sampled into
//! `[B·C, B·C·L]`, so they reveal nothing about `x`. The verifier only checks the
//! looser bound `B·C·(L+1)`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};

use super::squares::{decompose_three_squares, range_target};
use super::{absorb_params, absorb_sq, all_units, challenge_bound, Transcript};
use crate::arith::{mod_inv, pow_signed, random_in_range, to_bigint, to_fixed_be};
use crate::error::{Error, Result};
use crate::paillier::{Ciphertext, PublicParams};

const TAG: &str = "secrank/rg";
const HASH_TAG: &[u8] = b"secrank/rg/commit";

/// log2 of the challenge bound `C`.
pub const CHALLENGE_BITS: u64 = 128;
/// log2 of the masking growth factor `L`.
pub const SLACK_BITS: u64 = 40;

/// Prover restarts allowed before giving up on rejection sampling.
pub const MAX_RESTARTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgProof {
    /// `E(x_0) = g^B·E(x)^-1` followed by `E(x_1..x_3)`.
    pub enc_xs: [BigUint; 4],
    pub digest: [u8; 32],
    pub p: [BigUint; 4],
    pub w: [BigUint; 4],
    pub tau: BigUint,
}

/// `x ∈ [0, B]` with `E(x) = g^x·r^n`.
#[derive(Debug, Clone)]
pub struct RgWitness {
    pub x: BigUint,
    pub r: BigUint,
}

pub struct RgCommit {
    xs: [BigUint; 4],
    rs: [BigUint; 4],
    ms: [BigUint; 4],
    ss: [BigUint; 4],
    rho: BigUint,
    enc_xs: [BigUint; 4],
    digest: [u8; 32],
    bound: BigUint,
}

fn c_bound() -> BigUint {
    BigUint::one() << CHALLENGE_BITS
}

/// `B·C·L`, the largest mask.
fn mask_bound(bound: &BigUint) -> BigUint {
    (bound * c_bound()) << SLACK_BITS
}

/// `B·C·(L+1)`, the largest response a verifier accepts.
pub fn response_bound(bound: &BigUint) -> BigUint {
    bound * c_bound() * ((BigUint::one() << SLACK_BITS) + 1u32)
}

fn commitment_digest(params: &PublicParams, fs: &[BigUint; 4], f: &BigUint) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(HASH_TAG);
    for x in fs.iter().chain(std::iter::once(f)) {
        h.update(to_fixed_be(x, params.squared_width()).expect("group element fits"));
    }
    h.finalize().into()
}

/// Statement binding for a range proof.
pub fn absorb_statement(
    params: &PublicParams,
    t: &mut Transcript,
    x: &Ciphertext,
    bound: &BigUint,
) {
    absorb_sq(t, params, x.value());
    t.absorb(&bound.to_bytes_be());
}

impl RgCommit {
    pub fn new<R: RngCore + ?Sized>(
        params: &PublicParams,
        x: &Ciphertext,
        bound: &BigUint,
        wit: &RgWitness,
        rng: &mut R,
    ) -> Result<Self> {
        if bound.is_zero() {
            return Err(Error::Precondition("range bound must be positive".into()));
        }
        if &wit.x > bound {
            return Err(Error::Precondition(format!(
                "{} exceeds range bound {bound}",
                wit.x
            )));
        }
        if response_bound(bound).bits() > 8 * params.base_width() as u64 {
            return Err(Error::Precondition(
                "range bound too large for the modulus".into(),
            ));
        }
        let n_sq = &params.n_sq;
        let x0 = bound - &wit.x;
        let squares = decompose_three_squares(&range_target(&wit.x, bound), rng)?;
        let [x1, x2, x3] = squares.as_array().map(Clone::clone);
        let r0 = mod_inv(&wit.r, n_sq)
            .ok_or_else(|| Error::Precondition("randomness not a unit".into()))?;
        let rs = [
            r0,
            params.random_unit(rng),
            params.random_unit(rng),
            params.random_unit(rng),
        ];
        let xs = [x0, x1, x2, x3];
        let x_inv = mod_inv(x.value(), n_sq)
            .ok_or_else(|| Error::Precondition("ciphertext not a unit".into()))?;
        let enc_x0 = params.g_pow(&to_bigint(bound)) * x_inv % n_sq;
        let enc_xs = [
            enc_x0,
            params.encrypt_raw(&to_bigint(&xs[1]), &rs[1]),
            params.encrypt_raw(&to_bigint(&xs[2]), &rs[2]),
            params.encrypt_raw(&to_bigint(&xs[3]), &rs[3]),
        ];
        let top = mask_bound(bound);
        let one = BigUint::one();
        let ms: [BigUint; 4] = std::array::from_fn(|_| random_in_range(rng, &one, &top));
        let ss: [BigUint; 4] = std::array::from_fn(|_| params.random_unit(rng));
        let rho = params.random_unit(rng);
        let fs: [BigUint; 4] =
            std::array::from_fn(|i| params.encrypt_raw(&to_bigint(&ms[i]), &ss[i]));
        let mut d = x.value().modpow(&(&ms[0] << 2u32), n_sq) * rho.modpow(&params.n, n_sq) % n_sq;
        for i in 1..4 {
            let term = pow_signed(&enc_xs[i], &-to_bigint(&ms[i]), n_sq).expect("unit");
            d = d * term % n_sq;
        }
        let digest = commitment_digest(params, &fs, &d);
        Ok(RgCommit {
            xs,
            rs,
            ms,
            ss,
            rho,
            enc_xs,
            digest,
            bound: bound.clone(),
        })
    }

    pub fn absorb(&self, params: &PublicParams, t: &mut Transcript) {
        for c in &self.enc_xs {
            absorb_sq(t, params, c);
        }
        t.absorb(&self.digest);
    }

    /// Responds to `e`, or returns `None` when a response falls outside the
    /// acceptance window and the prover must restart with fresh randomness.
    pub fn respond(self, params: &PublicParams, wit: &RgWitness, e: &BigUint) -> Option<RgProof> {
        let n_sq = &params.n_sq;
        let low = &self.bound * c_bound();
        let high = mask_bound(&self.bound);
        let p: [BigUint; 4] = std::array::from_fn(|i| &self.ms[i] + e * &self.xs[i]);
        if p.iter().any(|pi| pi < &low || pi > &high) {
            return None;
        }
        let w: [BigUint; 4] =
            std::array::from_fn(|i| &self.ss[i] * self.rs[i].modpow(e, n_sq) % n_sq);
        let mut tau = self.rho.clone();
        for i in 1..4 {
            tau = tau * self.rs[i].modpow(&(e * &self.xs[i]), n_sq) % n_sq;
        }
        let back = -(BigInt::from(4) * to_bigint(e) * to_bigint(&self.xs[0]));
        tau = tau * pow_signed(&wit.r, &back, n_sq).expect("unit") % n_sq;
        Some(RgProof {
            enc_xs: self.enc_xs,
            digest: self.digest,
            p,
            w,
            tau,
        })
    }
}

impl RgProof {
    pub fn absorb_commitments(&self, params: &PublicParams, t: &mut Transcript) {
        for c in &self.enc_xs {
            absorb_sq(t, params, c);
        }
        t.absorb(&self.digest);
    }

    pub fn check(
        &self,
        params: &PublicParams,
        x: &Ciphertext,
        bound: &BigUint,
        e: &BigUint,
    ) -> bool {
        let n_sq = &params.n_sq;
        let units: Vec<&BigUint> = self
            .enc_xs
            .iter()
            .chain(&self.w)
            .chain([&self.tau, x.value()])
            .collect();
        if !all_units(params, &units) {
            return false;
        }
        let limit = response_bound(bound);
        if self.p.iter().any(|p| p > &limit) {
            return false;
        }
        let Some(x_inv) = mod_inv(x.value(), n_sq) else {
            return false;
        };
        if self.enc_xs[0] != params.g_pow(&to_bigint(bound)) * x_inv % n_sq {
            return false;
        }
        let neg_e = -to_bigint(e);
        let mut fs: [BigUint; 4] = Default::default();
        for i in 0..4 {
            let Some(back) = pow_signed(&self.enc_xs[i], &neg_e, n_sq) else {
                return false;
            };
            fs[i] = params.g_pow(&to_bigint(&self.p[i])) * self.w[i].modpow(&params.n, n_sq) % n_sq
                * back
                % n_sq;
        }
        let mut f = self.tau.modpow(&params.n, n_sq) * params.g_pow(&to_bigint(e)) % n_sq
            * x.value().modpow(&(&self.p[0] << 2u32), n_sq)
            % n_sq;
        for i in 1..4 {
            let Some(term) = pow_signed(&self.enc_xs[i], &-to_bigint(&self.p[i]), n_sq) else {
                return false;
            };
            f = f * term % n_sq;
        }
        commitment_digest(params, &fs, &f) == self.digest
    }
}

fn transcript(params: &PublicParams, x: &Ciphertext, bound: &BigUint) -> Transcript {
    let mut t = Transcript::new(TAG);
    absorb_params(&mut t, params);
    absorb_statement(params, &mut t, x, bound);
    t
}

pub fn prove_rg<R: RngCore + ?Sized>(
    params: &PublicParams,
    x: &Ciphertext,
    bound: &BigUint,
    wit: &RgWitness,
    rng: &mut R,
) -> Result<RgProof> {
    let base = transcript(params, x, bound);
    for _ in 0..MAX_RESTARTS {
        let commit = RgCommit::new(params, x, bound, wit, rng)?;
        let mut t = base.clone();
        commit.absorb(params, &mut t);
        let e = t.challenge(&challenge_bound());
        if let Some(proof) = commit.respond(params, wit, &e) {
            return Ok(proof);
        }
    }
    Err(Error::Internal(
        "range proof rejection sampling did not terminate".into(),
    ))
}

pub fn verify_rg(params: &PublicParams, x: &Ciphertext, bound: &BigUint, proof: &RgProof) -> bool {
    let mut t = transcript(params, x, bound);
    proof.absorb_commitments(params, &mut t);
    let e = t.challenge(&challenge_bound());
    proof.check(params, x, bound, &e)
}
