//! Non-interactive sigma proofs over Paillier ciphertexts.
//!
//! Every proof exposes a two-phase prover (`*Commit::new`, then `respond` to a
//! challenge) and a `check` against a given challenge, so several proofs can share one
//! Fiat-Shamir challenge. The `prove_*`/`verify_*` functions wrap a single proof.

pub mod mbs;
pub mod mtp;
pub mod nz;
pub mod pd;
pub mod rg;
pub mod squares;
pub mod transcript;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::paillier::{is_unit, PublicParams};

pub use mbs::{prove_mbs, verify_mbs, MbsProof};
pub use mtp::{prove_mtp, verify_mtp, MtpProof, MtpStatement, MtpWitness};
pub use nz::{prove_nz, verify_nz, NzProof};
pub use pd::{prove_pd, verify_pd, PdProof};
pub use rg::{prove_rg, verify_rg, RgProof, RgWitness};
pub use squares::{decompose_three_squares, ThreeSquares};
pub use transcript::{fiat_shamir_challenge, Transcript};

/// Bits of challenges shared across a bundle, and of range and decryption proofs.
pub const CHALLENGE_BITS: u64 = 128;

/// `2^128`
pub fn challenge_bound() -> BigUint {
    BigUint::one() << CHALLENGE_BITS
}

pub(crate) fn absorb_params(t: &mut Transcript, params: &PublicParams) {
    t.absorb_uint(&params.n, params.base_width());
}

pub(crate) fn absorb_sq(t: &mut Transcript, params: &PublicParams, x: &BigUint) {
    t.absorb_uint(x, params.squared_width());
}

pub(crate) fn all_units(params: &PublicParams, xs: &[&BigUint]) -> bool {
    xs.iter().all(|x| is_unit(params, x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofKind {
    Mtp = 1,
    Mbs = 2,
    Rg = 3,
    Nz = 4,
    Pd = 5,
}

impl ProofKind {
    pub const ALL: [ProofKind; 5] = [
        ProofKind::Mtp,
        ProofKind::Mbs,
        ProofKind::Rg,
        ProofKind::Nz,
        ProofKind::Pd,
    ];

    pub fn from_byte(b: u8) -> Result<Self> {
        Ok(match b {
            1 => ProofKind::Mtp,
            2 => ProofKind::Mbs,
            3 => ProofKind::Rg,
            4 => ProofKind::Nz,
            5 => ProofKind::Pd,
            other => return Err(Error::Decode(format!("unknown proof kind {other}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ProofKind::Mtp => "mtp",
            ProofKind::Mbs => "mbs",
            ProofKind::Rg => "rg",
            ProofKind::Nz => "nz",
            ProofKind::Pd => "pd",
        }
    }

    /// Widths of the wire fields in order.
    pub fn field_widths(self, params: &PublicParams) -> Vec<usize> {
        let b = params.base_width();
        let s = params.squared_width();
        match self {
            ProofKind::Mtp => vec![s, s, b, s, s],
            ProofKind::Mbs | ProofKind::Nz => vec![s, s, s, b, s, s],
            ProofKind::Rg => {
                let mut w = vec![s; 4];
                w.extend([b; 5]);
                w.extend([s; 5]);
                w
            }
            ProofKind::Pd => vec![s, s, pd::response_width(params)],
        }
    }

    /// Serialized size without the kind byte.
    pub fn body_len(self, params: &PublicParams) -> usize {
        self.field_widths(params).iter().sum()
    }
}

impl std::fmt::Display for ProofKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProofKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProofKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown proof kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SigmaProof {
    Mtp(MtpProof),
    Mbs(MbsProof),
    Rg(RgProof),
    Nz(NzProof),
    Pd(PdProof),
}

impl SigmaProof {
    pub fn kind(&self) -> ProofKind {
        match self {
            SigmaProof::Mtp(_) => ProofKind::Mtp,
            SigmaProof::Mbs(_) => ProofKind::Mbs,
            SigmaProof::Rg(_) => ProofKind::Rg,
            SigmaProof::Nz(_) => ProofKind::Nz,
            SigmaProof::Pd(_) => ProofKind::Pd,
        }
    }

    /// Kind byte followed by the body.
    pub fn encode(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        w.u8(self.kind() as u8);
        self.write_body(params, &mut w)?;
        Ok(w.finish())
    }

    pub fn decode(params: &PublicParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let kind = ProofKind::from_byte(r.u8()?)?;
        let proof = Self::read_body(params, kind, &mut r)?;
        r.finish()?;
        Ok(proof)
    }

    pub fn encode_body(&self, params: &PublicParams) -> Result<Vec<u8>> {
        let mut w = Writer::new();
        self.write_body(params, &mut w)?;
        Ok(w.finish())
    }

    pub fn decode_body(params: &PublicParams, kind: ProofKind, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let proof = Self::read_body(params, kind, &mut r)?;
        r.finish()?;
        Ok(proof)
    }

    pub fn write_body(&self, params: &PublicParams, w: &mut Writer) -> Result<()> {
        let b = params.base_width();
        let s = params.squared_width();
        match self {
            SigmaProof::Mtp(p) => {
                w.uint(&p.enc_m, s)?
                    .uint(&p.enc_xm, s)?
                    .uint(&p.p, b)?
                    .uint(&p.w, s)?
                    .uint(&p.u, s)?;
            }
            SigmaProof::Mbs(p) => {
                w.uint(&p.enc_m, s)?
                    .uint(&p.enc_2mx, s)?
                    .uint(&p.enc_m2, s)?;
                w.uint(&p.p, b)?.uint(&p.w, s)?.uint(&p.u, s)?;
            }
            SigmaProof::Nz(p) => {
                w.uint(&p.enc_y, s)?.uint(&p.enc_m, s)?.uint(&p.enc_xm, s)?;
                w.uint(&p.p, b)?.uint(&p.w, s)?.uint(&p.u, s)?;
            }
            SigmaProof::Rg(p) => {
                for c in &p.enc_xs {
                    w.uint(c, s)?;
                }
                w.bytes(&vec![0u8; b - p.digest.len()]).bytes(&p.digest);
                for x in &p.p {
                    w.uint(x, b)?;
                }
                for x in &p.w {
                    w.uint(x, s)?;
                }
                w.uint(&p.tau, s)?;
            }
            SigmaProof::Pd(p) => {
                w.uint(&p.a, s)?
                    .uint(&p.b, s)?
                    .uint(&p.p, pd::response_width(params))?;
            }
        }
        Ok(())
    }

    pub fn read_body(params: &PublicParams, kind: ProofKind, r: &mut Reader<'_>) -> Result<Self> {
        let b = params.base_width();
        Ok(match kind {
            ProofKind::Mtp => SigmaProof::Mtp(MtpProof {
                enc_m: r.group(params)?,
                enc_xm: r.group(params)?,
                p: r.uint(b)?,
                w: r.group(params)?,
                u: r.group(params)?,
            }),
            ProofKind::Mbs => SigmaProof::Mbs(MbsProof {
                enc_m: r.group(params)?,
                enc_2mx: r.group(params)?,
                enc_m2: r.group(params)?,
                p: r.uint(b)?,
                w: r.group(params)?,
                u: r.group(params)?,
            }),
            ProofKind::Nz => SigmaProof::Nz(NzProof {
                enc_y: r.group(params)?,
                enc_m: r.group(params)?,
                enc_xm: r.group(params)?,
                p: r.uint(b)?,
                w: r.group(params)?,
                u: r.group(params)?,
            }),
            ProofKind::Rg => {
                let enc_xs = [
                    r.group(params)?,
                    r.group(params)?,
                    r.group(params)?,
                    r.group(params)?,
                ];
                let slot = r.take(b)?;
                let (pad, tail) = slot.split_at(b - 32);
                if pad.iter().any(|&x| x != 0) {
                    return Err(Error::Decode("digest slot padding is not zero".into()));
                }
                let digest: [u8; 32] = tail.try_into().expect("32 bytes");
                let p = [r.uint(b)?, r.uint(b)?, r.uint(b)?, r.uint(b)?];
                let w = [
                    r.group(params)?,
                    r.group(params)?,
                    r.group(params)?,
                    r.group(params)?,
                ];
                let tau = r.group(params)?;
                SigmaProof::Rg(RgProof {
                    enc_xs,
                    digest,
                    p,
                    w,
                    tau,
                })
            }
            ProofKind::Pd => SigmaProof::Pd(PdProof {
                a: r.group(params)?,
                b: r.group(params)?,
                p: r.uint(pd::response_width(params))?,
            }),
        })
    }
}

macro_rules! proof_from {
    ($ty:ty, $variant:ident) => {
        impl From<$ty> for SigmaProof {
            fn from(p: $ty) -> Self {
                SigmaProof::$variant(p)
            }
        }
    };
}

proof_from!(MtpProof, Mtp);
proof_from!(MbsProof, Mbs);
proof_from!(RgProof, Rg);
proof_from!(NzProof, Nz);
proof_from!(PdProof, Pd);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paillier::{keygen, Ciphertext, PublicParams, SecretKeyShare};
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (PublicParams, Vec<SecretKeyShare>, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (pp, keys) = keygen(512, 3, &mut rng).unwrap();
        (pp, keys, rng)
    }

    fn round_trip(pp: &PublicParams, proof: SigmaProof) {
        let bytes = proof.encode(pp).unwrap();
        assert_eq!(bytes.len(), 1 + proof.kind().body_len(pp));
        assert_eq!(SigmaProof::decode(pp, &bytes).unwrap(), proof);
    }

    #[test]
    fn honest_proofs_verify() {
        let (pp, keys, mut rng) = setup();
        // MTP: z = 6·7 with x unknown to the prover.
        let x = pp.encrypt(&6.into(), &mut rng).unwrap();
        let y = pp.encrypt_opening(&7.into(), &mut rng).unwrap();
        let (z, nu) = mtp::scale_by_known(&pp, &x, &y.value, &mut rng);
        let stmt = MtpStatement {
            x: &x,
            y: &y.ciphertext,
            z: &z,
        };
        let wit = MtpWitness {
            y: y.value.clone(),
            gamma: y.randomness.clone(),
            nu,
        };
        let proof = prove_mtp(&pp, &stmt, &wit, &mut rng);
        assert!(verify_mtp(&pp, &stmt, &proof));
        let mut bad = proof.clone();
        bad.p += 1u32;
        assert!(!verify_mtp(&pp, &stmt, &bad));
        round_trip(&pp, proof.into());

        for sign in [-1, 1] {
            let o = pp.encrypt_opening(&sign.into(), &mut rng).unwrap();
            let proof = prove_mbs(&pp, &o, &mut rng).unwrap();
            assert!(verify_mbs(&pp, &o.ciphertext, &proof));
            round_trip(&pp, proof.into());
        }
        let two = pp.encrypt_opening(&2.into(), &mut rng).unwrap();
        assert!(!verify_mbs(
            &pp,
            &two.ciphertext,
            &mbs::prove_mbs_unchecked(&pp, &two, &mut rng)
        ));

        for v in [5i64, -3] {
            let o = pp.encrypt_opening(&v.into(), &mut rng).unwrap();
            let proof = prove_nz(&pp, &o, &mut rng).unwrap();
            assert!(verify_nz(&pp, &o.ciphertext, &proof));
            round_trip(&pp, proof.into());
        }
        let zero = pp.encrypt_opening(&0.into(), &mut rng).unwrap();
        assert!(prove_nz(&pp, &zero, &mut rng).is_err());

        let bound = BigUint::from(127u32);
        for v in [0u32, 64, 127] {
            let o = pp.encrypt_opening(&v.into(), &mut rng).unwrap();
            let wit = RgWitness {
                x: v.into(),
                r: o.randomness.clone(),
            };
            let proof = prove_rg(&pp, &o.ciphertext, &bound, &wit, &mut rng).unwrap();
            assert!(verify_rg(&pp, &o.ciphertext, &bound, &proof));
            round_trip(&pp, proof.into());
        }

        let c: Ciphertext = pp.encrypt(&BigInt::from(9), &mut rng).unwrap();
        let (part, proof) = pp.partial_decrypt(&keys[0], &c, &mut rng);
        assert!(verify_pd(&pp, &c, &part, &proof));
        round_trip(&pp, proof.into());
    }
}
