//! User registration and per-round sign submissions with their proof bundles.

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use rand::RngCore;

use super::search::HalfInt;
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::paillier::{scale_encode, Ciphertext, Opening, PublicParams, ScaleFactor};
use crate::zkp::mbs::MbsCommit;
use crate::zkp::mtp::{scale_by_known, MtpCommit};
use crate::zkp::nz::NzCommit;
use crate::zkp::rg::{self, RgCommit, RgWitness};
use crate::zkp::{
    challenge_bound, MbsProof, MtpProof, MtpStatement, MtpWitness, NzProof, ProofKind, RgProof,
    SigmaProof, Transcript,
};

const L1_TAG: &str = "secrank/l1";
const REG_TAG: &str = "secrank/register";

/// `E(η·(x - m)) = E(x)^η · E(η·m)^-1`, with `E(η·m)` encrypted under randomness 1.
pub fn compute_enc_q(
    params: &PublicParams,
    enc_x: &Ciphertext,
    guess: HalfInt,
    eta: ScaleFactor,
) -> Result<Ciphertext> {
    let scaled = params.scalar_mul(enc_x, &BigInt::from(eta.get()))?;
    let shift = params.encrypt_public(&BigInt::from(scale_encode(guess.twice(), eta)?))?;
    params.sub(&scaled, &shift)
}

/// An input ciphertext with a range proof of `x - low ∈ [0, high - low]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registration {
    pub user: usize,
    pub enc_x: Ciphertext,
    pub proof: RgProof,
}

fn shifted_input(params: &PublicParams, enc_x: &Ciphertext, low: i64) -> Ciphertext {
    Ciphertext(params.g_pow(&BigInt::from(-low)) * enc_x.value() % &params.n_sq)
}

fn registration_transcript(
    params: &PublicParams,
    user: usize,
    shifted: &Ciphertext,
    width: &BigUint,
) -> Transcript {
    let mut t = Transcript::new(REG_TAG);
    t.absorb_uint(&params.n, params.base_width());
    t.absorb_u64(user as u64);
    rg::absorb_statement(params, &mut t, shifted, width);
    t
}

impl Registration {
    /// Encrypts `x` and proves it lies in `[low, high]`.
    ///
    /// With `claimed` set, the range proof is built for that value instead of `x`,
    /// which only verifies when the two coincide.
    pub fn create<R: RngCore + ?Sized>(
        params: &PublicParams,
        user: usize,
        x: i64,
        low: i64,
        high: i64,
        claimed: Option<i64>,
        rng: &mut R,
    ) -> Result<(Self, Opening)> {
        let opening = params.encrypt_opening(&BigInt::from(x), rng)?;
        let width = BigUint::from((high - low) as u64);
        let proved = claimed.unwrap_or(x);
        if !(low..=high).contains(&proved) {
            return Err(Error::Precondition(format!(
                "input {proved} outside [{low}, {high}]"
            )));
        }
        let (target, wit) = if proved == x {
            let wit = RgWitness {
                x: BigUint::from((x - low) as u64),
                r: opening.randomness.clone(),
            };
            (shifted_input(params, &opening.ciphertext, low), wit)
        } else {
            let decoy = params.encrypt_opening(&BigInt::from(proved), rng)?;
            let wit = RgWitness {
                x: BigUint::from((proved - low) as u64),
                r: decoy.randomness.clone(),
            };
            (shifted_input(params, &decoy.ciphertext, low), wit)
        };
        let shifted = shifted_input(params, &opening.ciphertext, low);
        let base = registration_transcript(params, user, &shifted, &width);
        for _ in 0..rg::MAX_RESTARTS {
            let commit = RgCommit::new(params, &target, &width, &wit, rng)?;
            let mut t = base.clone();
            commit.absorb(params, &mut t);
            let e = t.challenge(&challenge_bound());
            if let Some(proof) = commit.respond(params, &wit, &e) {
                return Ok((
                    Registration {
                        user,
                        enc_x: opening.ciphertext.clone(),
                        proof,
                    },
                    opening,
                ));
            }
        }
        Err(Error::Internal(
            "range proof rejection sampling did not terminate".into(),
        ))
    }

    pub fn verify(&self, params: &PublicParams, low: i64, high: i64) -> bool {
        if params.check_ciphertext(&self.enc_x).is_err() {
            return false;
        }
        let width = BigUint::from((high - low) as u64);
        let shifted = shifted_input(params, &self.enc_x, low);
        let mut t = registration_transcript(params, self.user, &shifted, &width);
        self.proof.absorb_commitments(params, &mut t);
        let e = t.challenge(&challenge_bound());
        self.proof.check(params, &shifted, &width, &e)
    }

    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        w.ciphertext(params, &self.enc_x)?;
        SigmaProof::Rg(self.proof.clone()).write_body(params, &mut w)?;
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, user: usize, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let enc_x = r.ciphertext(params)?;
        let SigmaProof::Rg(proof) = SigmaProof::read_body(params, ProofKind::Rg, &mut r)? else {
            unreachable!("kind fixed to rg")
        };
        r.finish()?;
        Ok(Registration { user, enc_x, proof })
    }
}

/// Public data a round's submission is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundContext {
    pub user: usize,
    pub round: u32,
    pub guess: HalfInt,
    pub eta: ScaleFactor,
    /// `high - low`
    pub width: u64,
}

impl RoundContext {
    /// Upper bound on `|q|`.
    pub fn abs_bound(&self) -> BigUint {
        BigUint::from(self.width) * self.eta.get()
    }
}

/// Deliberate deviations used to exercise verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubmissionFault {
    /// Claims the opposite sign, proving the range of a decoy ciphertext.
    FlipSign,
    /// Perturbs one response of the given proof after honest generation.
    Corrupt(ProofKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignSubmission {
    pub user: usize,
    pub enc_q: Ciphertext,
    pub enc_sign: Ciphertext,
    pub enc_abs: Ciphertext,
    pub mbs: MbsProof,
    pub mtp: MtpProof,
    pub rg: RgProof,
    pub nz: NzProof,
}

fn l1_transcript(
    params: &PublicParams,
    ctx: &RoundContext,
    enc_x: &Ciphertext,
    sub: [&Ciphertext; 3],
) -> Transcript {
    let mut t = Transcript::new(L1_TAG);
    t.absorb_uint(&params.n, params.base_width());
    t.absorb_u64(ctx.user as u64);
    t.absorb_u64(ctx.round as u64);
    t.absorb(&ctx.guess.twice().to_be_bytes());
    t.absorb_u64(ctx.eta.get() as u64);
    t.absorb_u64(ctx.width);
    for c in std::iter::once(enc_x).chain(sub) {
        t.absorb_uint(c.value(), params.squared_width());
    }
    t
}

impl SignSubmission {
    /// Builds the round's submission for input `x` registered as `enc_x` with randomness `r_x`.
    pub fn create<R: RngCore + ?Sized>(
        params: &PublicParams,
        ctx: &RoundContext,
        input: &Opening,
        fault: Option<SubmissionFault>,
        rng: &mut R,
    ) -> Result<Self> {
        let twice_x = BigInt::from(2) * &input.value;
        let q: BigInt = (twice_x - ctx.guess.twice()) * (ctx.eta.get() / 2);
        if !params.in_signed_range(&q) {
            return Err(Error::PlaintextRange(q.to_string()));
        }
        let enc_q = compute_enc_q(params, &input.ciphertext, ctx.guess, ctx.eta)?;
        let r_q = input
            .randomness
            .modpow(&BigUint::from(ctx.eta.get()), &params.n_sq);
        let honest_sign: i64 = if q.is_positive() { 1 } else { -1 };
        let sign = match fault {
            Some(SubmissionFault::FlipSign) => -honest_sign,
            _ => honest_sign,
        };
        let sign_opening = params.encrypt_opening(&BigInt::from(sign), rng)?;
        let (enc_abs, nu) = scale_by_known(params, &enc_q, &BigInt::from(sign), rng);
        let sign_residue = crate::arith::reduce_signed(&BigInt::from(sign), &params.n);
        let r_abs = r_q.modpow(&sign_residue, &params.n_sq) * &nu % &params.n_sq;
        let abs_value = &q * sign;
        let abs_opening = Opening {
            ciphertext: enc_abs.clone(),
            value: abs_value.clone(),
            randomness: r_abs,
        };

        // A flipped sign leaves a negative value under enc_abs; the range proof then
        // covers a decoy encryption of |q| instead.
        let (rg_target, rg_wit) = if abs_value.is_negative() {
            let decoy = params.encrypt_opening(&-abs_value.clone(), rng)?;
            let wit = RgWitness {
                x: decoy.value.magnitude().clone(),
                r: decoy.randomness.clone(),
            };
            (decoy.ciphertext, wit)
        } else {
            (
                enc_abs.clone(),
                RgWitness {
                    x: abs_value.magnitude().clone(),
                    r: abs_opening.randomness.clone(),
                },
            )
        };

        let bound = ctx.abs_bound();
        let base = l1_transcript(
            params,
            ctx,
            &input.ciphertext,
            [&enc_q, &sign_opening.ciphertext, &enc_abs],
        );
        let mtp_stmt = MtpStatement {
            x: &enc_q,
            y: &sign_opening.ciphertext,
            z: &enc_abs,
        };
        let mtp_wit = MtpWitness {
            y: BigInt::from(sign),
            gamma: sign_opening.randomness.clone(),
            nu,
        };
        for _ in 0..rg::MAX_RESTARTS {
            let mbs = MbsCommit::new(params, &sign_opening.value, rng);
            let mtp = MtpCommit::new(params, &mtp_stmt, rng);
            let rgc = RgCommit::new(params, &rg_target, &bound, &rg_wit, rng)?;
            let nz = NzCommit::new(params, &abs_opening, rng)?;
            let mut t = base.clone();
            mbs.absorb(params, &mut t);
            mtp.absorb(params, &mut t);
            rgc.absorb(params, &mut t);
            nz.absorb(params, &mut t);
            let e = t.challenge(&challenge_bound());
            let Some(rg) = rgc.respond(params, &rg_wit, &e) else {
                continue;
            };
            let mut sub = SignSubmission {
                user: ctx.user,
                enc_q: enc_q.clone(),
                enc_sign: sign_opening.ciphertext.clone(),
                enc_abs: enc_abs.clone(),
                mbs: mbs.respond(params, &sign_opening, &e),
                mtp: mtp.respond(params, &mtp_stmt, &mtp_wit, &e),
                rg,
                nz: nz.respond(params, &abs_opening, &e),
            };
            if let Some(SubmissionFault::Corrupt(kind)) = fault {
                sub.corrupt(params, kind);
            }
            return Ok(sub);
        }
        Err(Error::Internal(
            "range proof rejection sampling did not terminate".into(),
        ))
    }

    fn corrupt(&mut self, params: &PublicParams, kind: ProofKind) {
        let bump = |x: &mut BigUint| *x = (&*x + 1u32) % &params.n;
        match kind {
            ProofKind::Mbs => bump(&mut self.mbs.p),
            ProofKind::Mtp => bump(&mut self.mtp.p),
            ProofKind::Rg => self.rg.p[1] += 1u32,
            ProofKind::Nz => bump(&mut self.nz.p),
            ProofKind::Pd => {}
        }
    }

    /// Checks the recomputed `enc_q` and the shared-challenge proof bundle.
    pub fn verify(
        &self,
        params: &PublicParams,
        ctx: &RoundContext,
        enc_x: &Ciphertext,
    ) -> Result<()> {
        let reject = |what: &str| Err(Error::Precondition(format!("submission rejected: {what}")));
        if self.user != ctx.user {
            return reject("user mismatch");
        }
        for c in [&self.enc_q, &self.enc_sign, &self.enc_abs] {
            if params.check_ciphertext(c).is_err() {
                return reject("malformed ciphertext");
            }
        }
        if self.enc_q != compute_enc_q(params, enc_x, ctx.guess, ctx.eta)? {
            return reject("encoded difference does not match the registered input");
        }
        let mut t = l1_transcript(
            params,
            ctx,
            enc_x,
            [&self.enc_q, &self.enc_sign, &self.enc_abs],
        );
        self.mbs.absorb_commitments(params, &mut t);
        self.mtp.absorb_commitments(params, &mut t);
        self.rg.absorb_commitments(params, &mut t);
        self.nz.absorb_commitments(params, &mut t);
        let e = t.challenge(&challenge_bound());
        if !self.mbs.check(params, &self.enc_sign, &e) {
            return reject("sign membership proof");
        }
        let stmt = MtpStatement {
            x: &self.enc_q,
            y: &self.enc_sign,
            z: &self.enc_abs,
        };
        if !self.mtp.check(params, &stmt, &e) {
            return reject("multiplication proof");
        }
        if !self.rg.check(params, &self.enc_abs, &ctx.abs_bound(), &e) {
            return reject("range proof");
        }
        if !self.nz.check(params, &self.enc_abs, &e) {
            return reject("non-zero proof");
        }
        Ok(())
    }

    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        for c in [&self.enc_q, &self.enc_sign, &self.enc_abs] {
            w.ciphertext(params, c)?;
        }
        SigmaProof::Mbs(self.mbs.clone()).write_body(params, &mut w)?;
        SigmaProof::Mtp(self.mtp.clone()).write_body(params, &mut w)?;
        SigmaProof::Rg(self.rg.clone()).write_body(params, &mut w)?;
        SigmaProof::Nz(self.nz.clone()).write_body(params, &mut w)?;
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, user: usize, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let enc_q = r.ciphertext(params)?;
        let enc_sign = r.ciphertext(params)?;
        let enc_abs = r.ciphertext(params)?;
        let mbs = match SigmaProof::read_body(params, ProofKind::Mbs, &mut r)? {
            SigmaProof::Mbs(p) => p,
            _ => unreachable!(),
        };
        let mtp = match SigmaProof::read_body(params, ProofKind::Mtp, &mut r)? {
            SigmaProof::Mtp(p) => p,
            _ => unreachable!(),
        };
        let rg = match SigmaProof::read_body(params, ProofKind::Rg, &mut r)? {
            SigmaProof::Rg(p) => p,
            _ => unreachable!(),
        };
        let nz = match SigmaProof::read_body(params, ProofKind::Nz, &mut r)? {
            SigmaProof::Nz(p) => p,
            _ => unreachable!(),
        };
        r.finish()?;
        Ok(SignSubmission {
            user,
            enc_q,
            enc_sign,
            enc_abs,
            mbs,
            mtp,
            rg,
            nz,
        })
    }
}

/// `Σ E(φ(q_i))`, plus `E(offset)` under randomness 1 when the offset is nonzero.
pub fn aggregate_signs(
    params: &PublicParams,
    signs: &[&Ciphertext],
    offset: i64,
) -> Result<Ciphertext> {
    let sum = params
        .sum(signs.iter().copied())
        .ok_or_else(|| Error::InvalidParameter("no submissions to aggregate".into()))?;
    if offset == 0 {
        return Ok(sum);
    }
    Ok(params.add(&sum, &params.encrypt_public(&BigInt::from(offset))?))
}
