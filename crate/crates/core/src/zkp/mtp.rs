//! Proof that `E(z)` encrypts `x·y` for a known `y` and an unknown `x`.

use num_bigint::{BigInt, BigUint};
use rand::RngCore;

use super::{absorb_params, absorb_sq, all_units, Transcript};
use crate::arith::{random_below, reduce_signed};
use crate::paillier::{Ciphertext, PublicParams};

const TAG: &str = "secrank/mtp";

/// Public statement: `z = x·y (mod n)`.
#[derive(Debug, Clone, Copy)]
pub struct MtpStatement<'a> {
    pub x: &'a Ciphertext,
    pub y: &'a Ciphertext,
    pub z: &'a Ciphertext,
}

/// `E(y) = g^y·γ^n` and `E(z) = E(x)^y·ν^n`.
#[derive(Debug, Clone)]
pub struct MtpWitness {
    pub y: BigInt,
    pub gamma: BigUint,
    pub nu: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtpProof {
    pub enc_m: BigUint,
    pub enc_xm: BigUint,
    pub p: BigUint,
    pub w: BigUint,
    pub u: BigUint,
}

/// Prover state between commitment and response.
pub struct MtpCommit {
    m: BigUint,
    theta: BigUint,
    lambda: BigUint,
    enc_m: BigUint,
    enc_xm: BigUint,
}

impl<'a> MtpStatement<'a> {
    pub fn absorb(&self, params: &PublicParams, t: &mut Transcript) {
        for c in [self.x, self.y, self.z] {
            absorb_sq(t, params, c.value());
        }
    }
}

impl MtpCommit {
    pub fn new<R: RngCore + ?Sized>(
        params: &PublicParams,
        stmt: &MtpStatement<'_>,
        rng: &mut R,
    ) -> Self {
        let m = random_below(rng, &params.n);
        let theta = params.random_unit(rng);
        let lambda = params.random_unit(rng);
        let enc_m = params.encrypt_raw(&m.clone().into(), &theta);
        let enc_xm = (stmt.x.value().modpow(&m, &params.n_sq)
            * lambda.modpow(&params.n, &params.n_sq))
            % &params.n_sq;
        MtpCommit {
            m,
            theta,
            lambda,
            enc_m,
            enc_xm,
        }
    }

    pub fn absorb(&self, params: &PublicParams, t: &mut Transcript) {
        absorb_sq(t, params, &self.enc_m);
        absorb_sq(t, params, &self.enc_xm);
    }

    pub fn respond(
        self,
        params: &PublicParams,
        stmt: &MtpStatement<'_>,
        wit: &MtpWitness,
        e: &BigUint,
    ) -> MtpProof {
        let n_sq = &params.n_sq;
        let y = reduce_signed(&wit.y, &params.n);
        let full = &self.m + e * &y;
        let t = &full / &params.n;
        let p = full % &params.n;
        let w = (&self.theta * wit.gamma.modpow(e, n_sq)) % n_sq;
        let u =
            (&self.lambda * stmt.x.value().modpow(&t, n_sq) % n_sq * wit.nu.modpow(e, n_sq)) % n_sq;
        MtpProof {
            enc_m: self.enc_m,
            enc_xm: self.enc_xm,
            p,
            w,
            u,
        }
    }
}

impl MtpProof {
    pub fn absorb_commitments(&self, params: &PublicParams, t: &mut Transcript) {
        absorb_sq(t, params, &self.enc_m);
        absorb_sq(t, params, &self.enc_xm);
    }

    /// Verification equations for a given challenge.
    pub fn check(&self, params: &PublicParams, stmt: &MtpStatement<'_>, e: &BigUint) -> bool {
        let n_sq = &params.n_sq;
        if self.p >= params.n
            || !all_units(params, &[&self.enc_m, &self.enc_xm, &self.w, &self.u])
            || !all_units(params, &[stmt.x.value(), stmt.y.value(), stmt.z.value()])
        {
            return false;
        }
        let lhs1 = params.g_pow(&self.p.clone().into()) * self.w.modpow(&params.n, n_sq) % n_sq;
        let rhs1 = &self.enc_m * stmt.y.value().modpow(e, n_sq) % n_sq;
        if lhs1 != rhs1 {
            return false;
        }
        let lhs2 = stmt.x.value().modpow(&self.p, n_sq) * self.u.modpow(&params.n, n_sq) % n_sq;
        let rhs2 = &self.enc_xm * stmt.z.value().modpow(e, n_sq) % n_sq;
        lhs2 == rhs2
    }
}

fn transcript(params: &PublicParams, stmt: &MtpStatement<'_>) -> Transcript {
    let mut t = Transcript::new(TAG);
    absorb_params(&mut t, params);
    stmt.absorb(params, &mut t);
    t
}

pub fn prove_mtp<R: RngCore + ?Sized>(
    params: &PublicParams,
    stmt: &MtpStatement<'_>,
    wit: &MtpWitness,
    rng: &mut R,
) -> MtpProof {
    let mut t = transcript(params, stmt);
    let commit = MtpCommit::new(params, stmt, rng);
    commit.absorb(params, &mut t);
    let e = t.challenge(&params.n);
    commit.respond(params, stmt, wit, &e)
}

pub fn verify_mtp(params: &PublicParams, stmt: &MtpStatement<'_>, proof: &MtpProof) -> bool {
    let mut t = transcript(params, stmt);
    proof.absorb_commitments(params, &mut t);
    let e = t.challenge(&params.n);
    proof.check(params, stmt, &e)
}

/// Computes `E(x)^y·ν^n` with fresh `ν`, returning the ciphertext and `ν`.
///
/// The exponent is `y mod n`, the form the proof's response is computed against.
pub fn scale_by_known<R: RngCore + ?Sized>(
    params: &PublicParams,
    x: &Ciphertext,
    y: &BigInt,
    rng: &mut R,
) -> (Ciphertext, BigUint) {
    let nu = params.random_unit(rng);
    let xy = x.value().modpow(&reduce_signed(y, &params.n), &params.n_sq);
    let z = xy * nu.modpow(&params.n, &params.n_sq) % &params.n_sq;
    (Ciphertext(z), nu)
}
