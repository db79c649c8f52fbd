//! Preprocessing: the workers jointly build an encrypted random mask `R = Π r_j` and
//! its sign `S = Π φ(r_j)`, then reshare both.
//!
//! Worker `j` publishes `E(r_j)`, `E(φ_j)` and `E(φ_j·r_j) = E(|r_j|)` with a bundle
//! showing `r_j ∈ [-Γ, Γ] \ {0}`, `φ_j = ±1` and that the product is formed correctly
//! and lies in `[0, Γ]`. From the second worker on, the step also extends the running
//! products `E(R)` and `E(S)` with multiplication proofs. All proofs of one step share a
//! single challenge.

use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use rand::RngCore;

use super::reshare::{reshare, ReshareOutput};
use crate::arith::{reduce_signed, to_bigint};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Party, Result};
use crate::masking::{sample_party_randomness, MaskingConfig, PartyRandomness};
use crate::paillier::{Ciphertext, Opening, PublicParams, SecretKeyShare};
use crate::zkp::mbs::MbsCommit;
use crate::zkp::mtp::{scale_by_known, MtpCommit};
use crate::zkp::nz::NzCommit;
use crate::zkp::rg::{self, RgCommit, RgWitness};
use crate::zkp::{
    challenge_bound, MbsProof, MtpProof, MtpStatement, MtpWitness, NzProof, ProofKind, RgProof,
    SigmaProof, Transcript,
};

const L2_TAG: &str = "secrank/l2";

#[derive(Debug, Clone, PartialEq)]
pub struct PrepConfig {
    pub masking: MaskingConfig,
    /// Per-worker magnitude bound `Γ`.
    pub gamma: BigUint,
}

impl PrepConfig {
    pub fn new(params: &PublicParams, masking: MaskingConfig) -> Result<Self> {
        let gamma = masking
            .per_party_bound(params.workers)
            .to_biguint()
            .ok_or_else(|| Error::InvalidParameter("negative randomness bound".into()))?;
        if rg::response_bound(&(&gamma << 1u32)).bits() > 8 * params.base_width() as u64 {
            return Err(Error::InvalidParameter(
                "per-worker bound too large for range proofs".into(),
            ));
        }
        Ok(PrepConfig { masking, gamma })
    }

    fn doubled(&self) -> BigUint {
        &self.gamma << 1u32
    }
}

/// Running products after a step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLink {
    pub enc_r: Ciphertext,
    pub enc_s: Ciphertext,
    pub mtp_r: MtpProof,
    pub mtp_s: MtpProof,
}

/// One worker's published contribution to a triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub worker: usize,
    pub enc_r: Ciphertext,
    pub enc_s: Ciphertext,
    pub enc_abs: Ciphertext,
    /// `r_j + Γ ∈ [0, 2Γ]`
    pub rg_r: RgProof,
    pub nz: NzProof,
    pub mbs: MbsProof,
    pub mtp: MtpProof,
    /// `|r_j| ∈ [0, Γ]`
    pub rg_abs: RgProof,
    /// Absent for the first worker, whose own values start the chain.
    pub link: Option<ChainLink>,
}

/// Secret state a worker keeps from its step.
#[derive(Debug, Clone)]
pub struct StepSecrets {
    pub randomness: PartyRandomness,
    pub r: Opening,
    pub s: Opening,
}

fn shift_up(params: &PublicParams, c: &Ciphertext, by: &BigUint) -> Ciphertext {
    Ciphertext(params.g_pow(&to_bigint(by)) * c.value() % &params.n_sq)
}

fn l2_transcript(
    params: &PublicParams,
    cfg: &PrepConfig,
    triple: u64,
    worker: usize,
    prev: Option<(&Ciphertext, &Ciphertext)>,
    published: &[&Ciphertext],
) -> Transcript {
    let mut t = Transcript::new(L2_TAG);
    t.absorb_uint(&params.n, params.base_width());
    t.absorb_u64(triple);
    t.absorb_u64(worker as u64);
    t.absorb(&cfg.gamma.to_bytes_be());
    for c in prev
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .chain(published.iter().copied())
    {
        t.absorb_uint(c.value(), params.squared_width());
    }
    t
}

impl ChainStep {
    /// The running products after this step.
    pub fn running(&self) -> (&Ciphertext, &Ciphertext) {
        match &self.link {
            Some(l) => (&l.enc_r, &l.enc_s),
            None => (&self.enc_r, &self.enc_s),
        }
    }

    fn published(&self) -> Vec<&Ciphertext> {
        let mut out = vec![&self.enc_r, &self.enc_s, &self.enc_abs];
        if let Some(l) = &self.link {
            out.extend([&l.enc_r, &l.enc_s]);
        }
        out
    }

    /// Builds worker `worker`'s step for triple `triple`, extending `prev` when given.
    pub fn create<R: RngCore + ?Sized>(
        params: &PublicParams,
        cfg: &PrepConfig,
        triple: u64,
        worker: usize,
        prev: Option<(&Ciphertext, &Ciphertext)>,
        rng: &mut R,
    ) -> Result<(Self, StepSecrets)> {
        let randomness = sample_party_randomness(&cfg.masking, &to_bigint(&cfg.gamma), rng)?;
        let phi = BigInt::from(if randomness.r.is_negative() { -1 } else { 1 });
        let r_open = params.encrypt_opening(&randomness.r, rng)?;
        let s_open = params.encrypt_opening(&phi, rng)?;
        let (enc_abs, nu) = scale_by_known(params, &r_open.ciphertext, &phi, rng);
        let abs_rand = r_open
            .randomness
            .modpow(&reduce_signed(&phi, &params.n), &params.n_sq)
            * &nu
            % &params.n_sq;
        let abs_open = Opening {
            ciphertext: enc_abs.clone(),
            value: randomness.r.abs(),
            randomness: abs_rand,
        };

        let link_parts = match prev {
            Some((prev_r, prev_s)) => {
                let (enc_r, nu_r) = scale_by_known(params, prev_r, &randomness.r, rng);
                let (enc_s, nu_s) = scale_by_known(params, prev_s, &phi, rng);
                Some((enc_r, nu_r, enc_s, nu_s))
            }
            None => None,
        };

        let mut published = vec![&r_open.ciphertext, &s_open.ciphertext, &enc_abs];
        if let Some((a, _, b, _)) = &link_parts {
            published.extend([a, b]);
        }
        let base = l2_transcript(params, cfg, triple, worker, prev, &published);

        let shifted = shift_up(params, &r_open.ciphertext, &cfg.gamma);
        let shifted_value = (to_bigint(&cfg.gamma) + &randomness.r)
            .to_biguint()
            .expect("r within bound");
        let rg_r_wit = RgWitness {
            x: shifted_value,
            r: r_open.randomness.clone(),
        };
        let rg_abs_wit = RgWitness {
            x: randomness.r.magnitude().clone(),
            r: abs_open.randomness.clone(),
        };
        let mtp_stmt = MtpStatement {
            x: &r_open.ciphertext,
            y: &s_open.ciphertext,
            z: &enc_abs,
        };
        let mtp_wit = MtpWitness {
            y: phi.clone(),
            gamma: s_open.randomness.clone(),
            nu,
        };
        let doubled = cfg.doubled();

        for _ in 0..rg::MAX_RESTARTS {
            let rg_r = RgCommit::new(params, &shifted, &doubled, &rg_r_wit, rng)?;
            let nz = NzCommit::new(params, &r_open, rng)?;
            let mbs = MbsCommit::new(params, &phi, rng);
            let mtp = MtpCommit::new(params, &mtp_stmt, rng);
            let rg_abs = RgCommit::new(params, &enc_abs, &cfg.gamma, &rg_abs_wit, rng)?;
            let mut t = base.clone();
            rg_r.absorb(params, &mut t);
            nz.absorb(params, &mut t);
            mbs.absorb(params, &mut t);
            mtp.absorb(params, &mut t);
            rg_abs.absorb(params, &mut t);
            let link_commits = match (prev, &link_parts) {
                (Some((prev_r, prev_s)), Some((enc_r, _, enc_s, _))) => {
                    let sr = MtpStatement {
                        x: prev_r,
                        y: &r_open.ciphertext,
                        z: enc_r,
                    };
                    let ss = MtpStatement {
                        x: prev_s,
                        y: &s_open.ciphertext,
                        z: enc_s,
                    };
                    let cr = MtpCommit::new(params, &sr, rng);
                    let cs = MtpCommit::new(params, &ss, rng);
                    cr.absorb(params, &mut t);
                    cs.absorb(params, &mut t);
                    Some((cr, cs))
                }
                _ => None,
            };
            let e = t.challenge(&challenge_bound());
            let Some(rg_r) = rg_r.respond(params, &rg_r_wit, &e) else {
                continue;
            };
            let Some(rg_abs) = rg_abs.respond(params, &rg_abs_wit, &e) else {
                continue;
            };
            let link = match (prev, &link_parts, link_commits) {
                (Some((prev_r, prev_s)), Some((enc_r, nu_r, enc_s, nu_s)), Some((cr, cs))) => {
                    let sr = MtpStatement {
                        x: prev_r,
                        y: &r_open.ciphertext,
                        z: enc_r,
                    };
                    let ss = MtpStatement {
                        x: prev_s,
                        y: &s_open.ciphertext,
                        z: enc_s,
                    };
                    let wr = MtpWitness {
                        y: randomness.r.clone(),
                        gamma: r_open.randomness.clone(),
                        nu: nu_r.clone(),
                    };
                    let ws = MtpWitness {
                        y: phi.clone(),
                        gamma: s_open.randomness.clone(),
                        nu: nu_s.clone(),
                    };
                    Some(ChainLink {
                        enc_r: enc_r.clone(),
                        enc_s: enc_s.clone(),
                        mtp_r: cr.respond(params, &sr, &wr, &e),
                        mtp_s: cs.respond(params, &ss, &ws, &e),
                    })
                }
                _ => None,
            };
            let step = ChainStep {
                worker,
                enc_r: r_open.ciphertext.clone(),
                enc_s: s_open.ciphertext.clone(),
                enc_abs: enc_abs.clone(),
                rg_r,
                nz: nz.respond(params, &r_open, &e),
                mbs: mbs.respond(params, &s_open, &e),
                mtp: mtp.respond(params, &mtp_stmt, &mtp_wit, &e),
                rg_abs,
                link,
            };
            return Ok((
                step,
                StepSecrets {
                    randomness,
                    r: r_open,
                    s: s_open,
                },
            ));
        }
        Err(Error::Internal(
            "range proof rejection sampling did not terminate".into(),
        ))
    }

    /// Perturbs one response after honest generation.
    pub fn corrupt(&mut self, params: &PublicParams, kind: ProofKind) {
        let bump = |x: &mut BigUint| *x = (&*x + 1u32) % &params.n;
        match kind {
            ProofKind::Rg => self.rg_r.p[1] += 1u32,
            ProofKind::Nz => bump(&mut self.nz.p),
            ProofKind::Mbs => bump(&mut self.mbs.p),
            ProofKind::Mtp => bump(&mut self.mtp.p),
            ProofKind::Pd => {}
        }
    }

    /// Checks the step against the previous running products.
    pub fn verify(
        &self,
        params: &PublicParams,
        cfg: &PrepConfig,
        triple: u64,
        prev: Option<(&Ciphertext, &Ciphertext)>,
    ) -> Result<()> {
        let reject = |what: &str| {
            Err(Error::abort(
                Party::Worker(self.worker),
                format!("preprocessing step rejected: {what}"),
            ))
        };
        if prev.is_some() != self.link.is_some() {
            return reject("chain link mismatch");
        }
        for c in self.published() {
            if params.check_ciphertext(c).is_err() {
                return reject("malformed ciphertext");
            }
        }
        let mut t = l2_transcript(params, cfg, triple, self.worker, prev, &self.published());
        self.rg_r.absorb_commitments(params, &mut t);
        self.nz.absorb_commitments(params, &mut t);
        self.mbs.absorb_commitments(params, &mut t);
        self.mtp.absorb_commitments(params, &mut t);
        self.rg_abs.absorb_commitments(params, &mut t);
        if let Some(l) = &self.link {
            l.mtp_r.absorb_commitments(params, &mut t);
            l.mtp_s.absorb_commitments(params, &mut t);
        }
        let e = t.challenge(&challenge_bound());
        let shifted = shift_up(params, &self.enc_r, &cfg.gamma);
        if !self.rg_r.check(params, &shifted, &cfg.doubled(), &e) {
            return reject("range proof on the mask");
        }
        if !self.nz.check(params, &self.enc_r, &e) {
            return reject("non-zero proof");
        }
        if !self.mbs.check(params, &self.enc_s, &e) {
            return reject("sign membership proof");
        }
        let stmt = MtpStatement {
            x: &self.enc_r,
            y: &self.enc_s,
            z: &self.enc_abs,
        };
        if !self.mtp.check(params, &stmt, &e) {
            return reject("multiplication proof");
        }
        if !self.rg_abs.check(params, &self.enc_abs, &cfg.gamma, &e) {
            return reject("range proof on the magnitude");
        }
        if let (Some(l), Some((prev_r, prev_s))) = (&self.link, prev) {
            let sr = MtpStatement {
                x: prev_r,
                y: &self.enc_r,
                z: &l.enc_r,
            };
            let ss = MtpStatement {
                x: prev_s,
                y: &self.enc_s,
                z: &l.enc_s,
            };
            if !l.mtp_r.check(params, &sr, &e) || !l.mtp_s.check(params, &ss, &e) {
                return reject("chained multiplication proof");
            }
        }
        Ok(())
    }

    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        for c in [&self.enc_r, &self.enc_s, &self.enc_abs] {
            w.ciphertext(params, c)?;
        }
        SigmaProof::Rg(self.rg_r.clone()).write_body(params, &mut w)?;
        SigmaProof::Nz(self.nz.clone()).write_body(params, &mut w)?;
        SigmaProof::Mbs(self.mbs.clone()).write_body(params, &mut w)?;
        SigmaProof::Mtp(self.mtp.clone()).write_body(params, &mut w)?;
        SigmaProof::Rg(self.rg_abs.clone()).write_body(params, &mut w)?;
        if let Some(l) = &self.link {
            w.ciphertext(params, &l.enc_r)?;
            w.ciphertext(params, &l.enc_s)?;
            SigmaProof::Mtp(l.mtp_r.clone()).write_body(params, &mut w)?;
            SigmaProof::Mtp(l.mtp_s.clone()).write_body(params, &mut w)?;
        }
        Ok(w.finish())
    }

    /// Decodes a step; `linked` tells whether a chain link follows.
    pub fn decode(
        params: &PublicParams,
        worker: usize,
        linked: bool,
        bytes: &[u8],
    ) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let enc_r = r.ciphertext(params)?;
        let enc_s = r.ciphertext(params)?;
        let enc_abs = r.ciphertext(params)?;
        let rg_r = read_rg(params, &mut r)?;
        let nz = match SigmaProof::read_body(params, ProofKind::Nz, &mut r)? {
            SigmaProof::Nz(p) => p,
            _ => unreachable!(),
        };
        let mbs = match SigmaProof::read_body(params, ProofKind::Mbs, &mut r)? {
            SigmaProof::Mbs(p) => p,
            _ => unreachable!(),
        };
        let mtp = read_mtp(params, &mut r)?;
        let rg_abs = read_rg(params, &mut r)?;
        let link = if linked {
            let enc_r = r.ciphertext(params)?;
            let enc_s = r.ciphertext(params)?;
            let mtp_r = read_mtp(params, &mut r)?;
            let mtp_s = read_mtp(params, &mut r)?;
            Some(ChainLink {
                enc_r,
                enc_s,
                mtp_r,
                mtp_s,
            })
        } else {
            None
        };
        r.finish()?;
        Ok(ChainStep {
            worker,
            enc_r,
            enc_s,
            enc_abs,
            rg_r,
            nz,
            mbs,
            mtp,
            rg_abs,
            link,
        })
    }
}

fn read_rg(params: &PublicParams, r: &mut Reader<'_>) -> Result<RgProof> {
    match SigmaProof::read_body(params, ProofKind::Rg, r)? {
        SigmaProof::Rg(p) => Ok(p),
        _ => unreachable!(),
    }
}

fn read_mtp(params: &PublicParams, r: &mut Reader<'_>) -> Result<MtpProof> {
    match SigmaProof::read_body(params, ProofKind::Mtp, r)? {
        SigmaProof::Mtp(p) => Ok(p),
        _ => unreachable!(),
    }
}

/// A reshared mask and its sign, ready for one online use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepTriple {
    pub index: u64,
    pub enc_r: Ciphertext,
    pub enc_sign: Ciphertext,
    pub shares_r: Vec<ReshareOutput>,
    pub shares_sign: Vec<ReshareOutput>,
}

/// Runs the worker chain for one triple, verifying every step.
pub fn chain_triple<R: RngCore + ?Sized>(
    params: &PublicParams,
    cfg: &PrepConfig,
    triple: u64,
    rng: &mut R,
) -> Result<(Ciphertext, Ciphertext)> {
    let mut running: Option<(Ciphertext, Ciphertext)> = None;
    for worker in 1..=params.workers {
        let prev = running.as_ref().map(|(a, b)| (a, b));
        let (step, _) = ChainStep::create(params, cfg, triple, worker, prev, rng)?;
        step.verify(params, cfg, triple, prev)?;
        let (a, b) = step.running();
        running = Some((a.clone(), b.clone()));
    }
    running.ok_or_else(|| Error::InvalidParameter("no workers".into()))
}

/// Produces `count` triples with indices starting at `first`.
pub fn prep_chain<R: RngCore + ?Sized>(
    params: &PublicParams,
    keys: &[SecretKeyShare],
    cfg: &PrepConfig,
    first: u64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<PrepTriple>> {
    (0..count as u64)
        .map(|i| {
            let index = first + i;
            let (enc_r, enc_sign) = chain_triple(params, cfg, index, rng)?;
            let shares_r = reshare(params, keys, &enc_r, rng)?;
            let shares_sign = reshare(params, keys, &enc_sign, rng)?;
            Ok(PrepTriple {
                index,
                enc_r,
                enc_sign,
                shares_r,
                shares_sign,
            })
        })
        .collect()
}
