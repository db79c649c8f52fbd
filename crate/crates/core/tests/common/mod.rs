#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use secrank::paillier::{keygen, Ciphertext, PartialDecryption, PublicParams, SecretKeyShare};
use secrank::zkp::mtp::scale_by_known;
use secrank::zkp::{
    prove_mbs, prove_mtp, prove_nz, prove_rg, verify_mbs, verify_mtp, verify_nz, verify_pd,
    verify_rg, MtpStatement, MtpWitness, ProofKind, RgWitness, SigmaProof,
};

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn setup(workers: usize, seed: u64) -> (PublicParams, Vec<SecretKeyShare>, ChaCha20Rng) {
    let mut r = rng(seed);
    let (pp, keys) = keygen(512, workers, &mut r).unwrap();
    (pp, keys, r)
}

/// Statement of one proof, with enough context to re-verify a decoded body.
#[derive(Clone)]
pub enum Statement {
    Mtp {
        x: Ciphertext,
        y: Ciphertext,
        z: Ciphertext,
    },
    Mbs {
        x: Ciphertext,
    },
    Nz {
        x: Ciphertext,
    },
    Rg {
        x: Ciphertext,
        bound: BigUint,
    },
    Pd {
        c: Ciphertext,
        part: PartialDecryption,
    },
}

pub struct Instance {
    pub stmt: Statement,
    pub proof: SigmaProof,
}

impl Instance {
    pub fn kind(&self) -> ProofKind {
        self.proof.kind()
    }

    pub fn verify(&self, pp: &PublicParams) -> bool {
        check(pp, &self.stmt, &self.proof)
    }
}

pub fn check(pp: &PublicParams, stmt: &Statement, proof: &SigmaProof) -> bool {
    match (stmt, proof) {
        (Statement::Mtp { x, y, z }, SigmaProof::Mtp(p)) => {
            verify_mtp(pp, &MtpStatement { x, y, z }, p)
        }
        (Statement::Mbs { x }, SigmaProof::Mbs(p)) => verify_mbs(pp, x, p),
        (Statement::Nz { x }, SigmaProof::Nz(p)) => verify_nz(pp, x, p),
        (Statement::Rg { x, bound }, SigmaProof::Rg(p)) => verify_rg(pp, x, bound, p),
        (Statement::Pd { c, part }, SigmaProof::Pd(p)) => verify_pd(pp, c, part, p),
        _ => false,
    }
}

/// Fresh honest instance with random witnesses.
pub fn honest(
    kind: ProofKind,
    pp: &PublicParams,
    keys: &[SecretKeyShare],
    rng: &mut ChaCha20Rng,
) -> Instance {
    let small = |rng: &mut ChaCha20Rng| BigInt::from(rng.random_range(-1_000_000i64..=1_000_000));
    match kind {
        ProofKind::Mtp => {
            let x = pp.encrypt(&small(rng), rng).unwrap();
            let y = pp.encrypt_opening(&small(rng), rng).unwrap();
            let (z, nu) = scale_by_known(pp, &x, &y.value, rng);
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
            let proof = prove_mtp(pp, &stmt, &wit, rng).into();
            Instance {
                stmt: Statement::Mtp {
                    x: x.clone(),
                    y: y.ciphertext.clone(),
                    z: z.clone(),
                },
                proof,
            }
        }
        ProofKind::Mbs => {
            let s = if rng.random::<bool>() { 1 } else { -1 };
            let o = pp.encrypt_opening(&s.into(), rng).unwrap();
            let proof = prove_mbs(pp, &o, rng).unwrap().into();
            Instance {
                stmt: Statement::Mbs { x: o.ciphertext },
                proof,
            }
        }
        ProofKind::Nz => {
            let v = loop {
                let v = small(rng);
                if v != BigInt::from(0) {
                    break v;
                }
            };
            let o = pp.encrypt_opening(&v, rng).unwrap();
            let proof = prove_nz(pp, &o, rng).unwrap().into();
            Instance {
                stmt: Statement::Nz { x: o.ciphertext },
                proof,
            }
        }
        ProofKind::Rg => {
            let bound = BigUint::from(rng.random_range(1u64..=1 << 40));
            let v =
                BigUint::from(rng.random_range(0..=bound.iter_u64_digits().next().unwrap_or(0)));
            let o = pp.encrypt_opening(&BigInt::from(v.clone()), rng).unwrap();
            let wit = RgWitness {
                x: v,
                r: o.randomness.clone(),
            };
            let proof = prove_rg(pp, &o.ciphertext, &bound, &wit, rng)
                .unwrap()
                .into();
            Instance {
                stmt: Statement::Rg {
                    x: o.ciphertext,
                    bound,
                },
                proof,
            }
        }
        ProofKind::Pd => {
            let c = pp.encrypt(&small(rng), rng).unwrap();
            let key = &keys[rng.random_range(0..keys.len())];
            let (part, proof) = pp.partial_decrypt(key, &c, rng);
            Instance {
                stmt: Statement::Pd { c, part },
                proof: SigmaProof::Pd(proof),
            }
        }
    }
}

/// Adds one to the big-endian integer in `field`, wrapping to a subtraction on overflow.
fn bump(field: &mut [u8]) {
    if field.iter().all(|&b| b == 0xff) {
        *field.last_mut().unwrap() = 0xfe;
        return;
    }
    for b in field.iter_mut().rev() {
        let (v, carry) = b.overflowing_add(1);
        *b = v;
        if !carry {
            break;
        }
    }
}

fn times_g(pp: &PublicParams, c: &Ciphertext) -> Ciphertext {
    let g = &pp.n + 1u32;
    Ciphertext::from_value(pp, c.value() * g % &pp.n_sq).unwrap()
}

/// Every single-field mutation of the instance: one per wire field of the proof and one
/// per statement component. Returns `(label, rejected)`.
pub fn mutation_matrix(pp: &PublicParams, inst: &Instance) -> Vec<(String, bool)> {
    let kind = inst.kind();
    let body = inst.proof.encode_body(pp).unwrap();
    let mut out = Vec::new();
    let mut offset = 0;
    for (i, w) in kind.field_widths(pp).into_iter().enumerate() {
        let mut bytes = body.clone();
        bump(&mut bytes[offset..offset + w]);
        offset += w;
        let rejected = match SigmaProof::decode_body(pp, kind, &bytes) {
            Ok(p) => !check(pp, &inst.stmt, &p),
            Err(_) => true,
        };
        out.push((format!("{kind} proof field {i}"), rejected));
    }
    let stmts: Vec<(&str, Statement)> = match &inst.stmt {
        Statement::Mtp { x, y, z } => vec![
            (
                "x",
                Statement::Mtp {
                    x: times_g(pp, x),
                    y: y.clone(),
                    z: z.clone(),
                },
            ),
            (
                "y",
                Statement::Mtp {
                    x: x.clone(),
                    y: times_g(pp, y),
                    z: z.clone(),
                },
            ),
            (
                "z",
                Statement::Mtp {
                    x: x.clone(),
                    y: y.clone(),
                    z: times_g(pp, z),
                },
            ),
        ],
        Statement::Mbs { x } => vec![("x", Statement::Mbs { x: times_g(pp, x) })],
        Statement::Nz { x } => vec![("x", Statement::Nz { x: times_g(pp, x) })],
        Statement::Rg { x, bound } => vec![
            (
                "x",
                Statement::Rg {
                    x: times_g(pp, x),
                    bound: bound.clone(),
                },
            ),
            (
                "bound",
                Statement::Rg {
                    x: x.clone(),
                    bound: bound + 1u32,
                },
            ),
        ],
        Statement::Pd { c, part } => vec![
            (
                "c",
                Statement::Pd {
                    c: times_g(pp, c),
                    part: part.clone(),
                },
            ),
            (
                "share",
                Statement::Pd {
                    c: c.clone(),
                    part: PartialDecryption {
                        index: part.index,
                        share: part.share.clone() * 2u32 % &pp.n_sq,
                    },
                },
            ),
            (
                "index",
                Statement::Pd {
                    c: c.clone(),
                    part: PartialDecryption {
                        index: part.index % (pp.workers) + 1,
                        share: part.share.clone(),
                    },
                },
            ),
        ],
    };
    for (label, stmt) in stmts {
        out.push((
            format!("{kind} statement {label}"),
            !check(pp, &stmt, &inst.proof),
        ));
    }
    out
}
